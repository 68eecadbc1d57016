//! Periodic simulation box and the discrete Fourier machinery shared by all
//! field modules.
//!
//! Positions are x_j = j·h per axis with h = L/n. Wavevectors are stored in
//! FFT order, k = 2π·m/L with m ∈ {0, …, n/2−1, −n/2, …, −1}, so the Nyquist
//! index n/2 is its own partner under k ↦ −k. The forward transform follows
//! the continuum convention
//!
//! ```text
//! f̂(k) = (2π)^{−d/2} · h^d · Σ_x e^{−ik·x} f(x),
//! f(x) = (2π)^{−d/2} · Δk^d · Σ_k e^{+ik·x} f̂(k),     Δk = 2π/L,
//! ```
//!
//! so that ‖f‖₂² = h^d Σ|f|² = Δk^d Σ|f̂|² holds exactly (Parseval in the
//! grid measure) and discrete results converge to the continuum formulas as
//! n → ∞.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::CoreError;
use crate::Result;

const TAU: f64 = std::f64::consts::TAU;

/// Periodic d-dimensional lattice (the simulation box viewed as a torus).
///
/// The box is a cube of side `L` with `n` points per axis; its volume
/// Λ = L^d plays the role of the thermodynamic parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    len: f64,
    spacing: f64,
    axis_k: Vec<f64>,
}

impl TorusGrid {
    /// Builds a grid with `dim ∈ {1,2,3}`, even `n ≥ 4` points per axis and
    /// side length `L > 0`. Odd `n` is rejected because the Nyquist pairing
    /// k ↦ −k would break.
    pub fn new(dim: usize, n: usize, len: f64) -> Result<Arc<Self>> {
        if !(1..=3).contains(&dim) {
            return Err(CoreError::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if n < 4 {
            return Err(CoreError::InvalidGrid(format!("need n >= 4, got {n}")));
        }
        if n % 2 != 0 {
            return Err(CoreError::InvalidGrid(format!(
                "need even n for Nyquist pairing, got {n}"
            )));
        }
        if !(len > 0.0) || !len.is_finite() {
            return Err(CoreError::InvalidGrid(format!(
                "side length must be positive, got {len}"
            )));
        }
        let half = n / 2;
        let axis_k = (0..n)
            .map(|j| {
                let m = if j < half { j as i64 } else { j as i64 - n as i64 };
                TAU * m as f64 / len
            })
            .collect();
        Ok(Arc::new(Self {
            dim,
            n,
            len,
            spacing: len / n as f64,
            axis_k,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn points_per_dim(&self) -> usize {
        self.n
    }

    pub fn side_length(&self) -> f64 {
        self.len
    }

    /// Lattice spacing h = L/n.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Box volume Λ = L^dim.
    pub fn volume(&self) -> f64 {
        self.len.powi(self.dim as i32)
    }

    /// Total number of lattice points n^dim.
    pub fn total_points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Mode spacing Δk = 2π/L.
    pub fn delta_k(&self) -> f64 {
        TAU / self.len
    }

    /// Measure weight h^dim of one lattice cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Measure weight Δk^dim of one mode cell.
    pub fn mode_cell_volume(&self) -> f64 {
        self.delta_k().powi(self.dim as i32)
    }

    /// Per-axis wavevector table in FFT order.
    pub fn axis_wavevectors(&self) -> &[f64] {
        &self.axis_k
    }

    /// Decomposes a flat row-major index into per-axis indices (unused axes 0).
    pub fn axis_indices(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            out[a] = rest % self.n;
            rest /= self.n;
        }
        out
    }

    fn flat_index(&self, axes: [usize; 3]) -> usize {
        let mut flat = 0;
        for a in 0..self.dim {
            flat = flat * self.n + axes[a];
        }
        flat
    }

    /// Position of a lattice point (unused axes 0).
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.axis_indices(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = idx[a] as f64 * self.spacing;
        }
        x
    }

    /// Wavevector of a mode index (unused axes 0).
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.axis_indices(flat);
        let mut k = [0.0; 3];
        for a in 0..self.dim {
            k[a] = self.axis_k[idx[a]];
        }
        k
    }

    /// |k|² of a mode index.
    pub fn k_squared(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Flat index of the mode −k; the Nyquist index maps to itself.
    pub fn negated_index(&self, flat: usize) -> usize {
        let idx = self.axis_indices(flat);
        let mut neg = [0usize; 3];
        for a in 0..self.dim {
            neg[a] = (self.n - idx[a]) % self.n;
        }
        self.flat_index(neg)
    }

    /// Minimum-image distance of a lattice point from an arbitrary center.
    pub fn torus_distance(&self, flat: usize, center: &[f64; 3]) -> f64 {
        let x = self.position(flat);
        let mut d2 = 0.0;
        for a in 0..self.dim {
            let mut d = (x[a] - center[a]).abs() % self.len;
            if d > self.len / 2.0 {
                d = self.len - d;
            }
            d2 += d * d;
        }
        d2.sqrt()
    }

    /// Center of the box, used to place excitations and cutoffs.
    pub fn center(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for a in 0..self.dim {
            c[a] = self.len / 2.0;
        }
        c
    }
}

/// Builds a periodic grid; see [`TorusGrid::new`].
pub fn make_grid(dim: usize, n: usize, len: f64) -> Result<Arc<TorusGrid>> {
    TorusGrid::new(dim, n, len)
}

/// Complex amplitudes sampled on a [`TorusGrid`] (position space).
///
/// All norms carry the grid measure: ‖f‖₂² = h^d Σ|f_x|², so the constant
/// field 1 has ‖1‖₂² = Λ.
#[derive(Debug, Clone)]
pub struct ComplexField {
    grid: Arc<TorusGrid>,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: Arc<TorusGrid>) -> Self {
        let n = grid.total_points();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn constant(grid: Arc<TorusGrid>, c: Complex64) -> Self {
        let n = grid.total_points();
        Self {
            grid,
            values: vec![c; n],
        }
    }

    pub fn from_values(grid: Arc<TorusGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.total_points() {
            return Err(CoreError::InvalidInput(format!(
                "field length {} does not match grid with {} points",
                values.len(),
                grid.total_points()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples a function of position on the grid.
    pub fn from_fn(grid: Arc<TorusGrid>, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let values = (0..grid.total_points())
            .map(|i| f(grid.position(i)))
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// Measure-weighted L² norm.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Measure-weighted inner product ⟨self, other⟩ = h^d Σ self* · other.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if !self.same_grid(other) {
            return Err(CoreError::GridMismatch);
        }
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    /// self ← self + a·other.
    pub fn axpy(&mut self, a: Complex64, other: &Self) -> Result<()> {
        if !self.same_grid(other) {
            return Err(CoreError::GridMismatch);
        }
        for (v, w) in self.values.iter_mut().zip(&other.values) {
            *v += a * w;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(CoreError::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Cyclic lattice shift by integer steps per axis: g(x) = f(x − s·h).
    pub fn shifted(&self, steps: &[i64]) -> Self {
        let n = self.grid.points_per_dim() as i64;
        let mut values = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for (flat, out) in values.iter_mut().enumerate() {
            let idx = self.grid.axis_indices(flat);
            let mut src = [0usize; 3];
            for a in 0..self.grid.dim() {
                let s = steps.get(a).copied().unwrap_or(0);
                src[a] = (idx[a] as i64 - s).rem_euclid(n) as usize;
            }
            *out = self.values[self.grid.flat_index(src)];
        }
        Self {
            grid: Arc::clone(&self.grid),
            values,
        }
    }
}

/// Complex amplitudes over the wavevector table (momentum space).
///
/// Norms carry the dual measure: ‖f̂‖₂² = Δk^d Σ|f̂(k)|² and the ℓ¹ norm used
/// as a flatness diagnostic is ‖f̂‖₁ = Δk^d Σ|f̂(k)|.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<TorusGrid>,
    values: Vec<Complex64>,
}

impl SpectralField {
    pub fn from_values(grid: Arc<TorusGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.total_points() {
            return Err(CoreError::InvalidInput(format!(
                "spectral field length {} does not match grid with {} modes",
                values.len(),
                grid.total_points()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.mode_cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Measure-weighted ℓ¹ norm of the transform.
    pub fn l1_norm(&self) -> f64 {
        self.grid.mode_cell_volume() * self.values.iter().map(|v| v.norm()).sum::<f64>()
    }
}

// Plan cache keyed by transform length; rustfft plans are Send + Sync.
type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);
static PLANS: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();

fn plans_for(n: usize) -> PlanPair {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Unnormalized in-place FFT along every axis of a row-major n^d block.
pub(crate) fn fft_nd(grid: &TorusGrid, data: &mut [Complex64], inverse: bool) {
    let n = grid.points_per_dim();
    let dim = grid.dim();
    let total = grid.total_points();
    debug_assert_eq!(data.len(), total);
    let (fwd, inv) = plans_for(n);
    let plan = if inverse { inv } else { fwd };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        // stride between consecutive entries along `axis`
        let stride = n.pow((dim - 1 - axis) as u32);
        let outer = total / (n * stride);
        for o in 0..outer {
            for i in 0..stride {
                let base = o * n * stride + i;
                if stride == 1 {
                    plan.process(&mut data[base..base + n]);
                } else {
                    for (j, l) in line.iter_mut().enumerate() {
                        *l = data[base + j * stride];
                    }
                    plan.process(&mut line);
                    for (j, l) in line.iter().enumerate() {
                        data[base + j * stride] = *l;
                    }
                }
            }
        }
    }
}

/// Forward transform f ↦ f̂ with the continuum-convention normalization.
pub fn dft_forward(f: &ComplexField) -> SpectralField {
    let grid = Arc::clone(f.grid());
    let mut values = f.values().to_vec();
    fft_nd(&grid, &mut values, false);
    let scale = (TAU.powi(grid.dim() as i32)).sqrt().recip() * grid.cell_volume();
    for v in &mut values {
        *v *= scale;
    }
    SpectralField { grid, values }
}

/// Inverse transform f̂ ↦ f; exact inverse of [`dft_forward`].
pub fn dft_inverse(fhat: &SpectralField) -> ComplexField {
    let grid = Arc::clone(fhat.grid());
    let mut values = fhat.values().to_vec();
    fft_nd(&grid, &mut values, true);
    let scale = (TAU.powi(grid.dim() as i32)).sqrt().recip() * grid.mode_cell_volume();
    for v in &mut values {
        *v *= scale;
    }
    ComplexField { grid, values }
}
