//! Smooth compactly supported pair potentials and periodic convolution.
//!
//! The transform table Ǔ(k) = h^d Σ_x U(x) e^{−ik·x} is stored UNNORMALIZED
//! (no (2π)^{−d/2}), which makes it the exact convolution multiplier:
//! forward(U*f)(k) = Ǔ(k)·f̂(k). The momentum-space linearization then reads
//! i∂η̂ = ω₀η̂ + Ǔ(k)(η̂(k)+η̂*(−k)) with no stray constants, and for U ≥ 0
//! one has Ǔ(0) = ‖U‖₁.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::grid::{fft_nd, ComplexField, TorusGrid};
use crate::Result;

/// Real-space samples of a pair potential plus its unnormalized transform.
#[derive(Debug, Clone)]
pub struct PairPotential {
    grid: Arc<TorusGrid>,
    samples: Vec<f64>,
    strength: f64,
    range: f64,
    l1_norm: f64,
    hat: Vec<Complex64>,
}

impl PairPotential {
    /// Standard mollifier bump U(x) = sign·a·exp(1 − 1/(1 − (|x|/D)²)) for
    /// |x| < D (minimum-image distance on the torus), zero outside. The peak
    /// value at x = 0 is sign·a.
    pub fn bump(grid: Arc<TorusGrid>, strength: f64, range: f64, sign: i32) -> Result<Self> {
        if !(strength > 0.0) {
            return Err(CoreError::InvalidPotential(format!(
                "strength must be positive, got {strength}"
            )));
        }
        if !(range > 0.0) || range >= grid.side_length() / 2.0 {
            return Err(CoreError::InvalidPotential(format!(
                "range must satisfy 0 < D < L/2 so periodic images do not overlap, got D = {range}, L = {}",
                grid.side_length()
            )));
        }
        if sign != 1 && sign != -1 {
            return Err(CoreError::InvalidPotential(format!(
                "sign must be +1 or -1, got {sign}"
            )));
        }
        let origin = [0.0; 3];
        let a = sign as f64 * strength;
        let samples: Vec<f64> = (0..grid.total_points())
            .map(|i| {
                let d = grid.torus_distance(i, &origin);
                let u = d / range;
                if u < 1.0 {
                    a * (1.0 - 1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self::from_parts(grid, samples, strength, range))
    }

    /// Potential built from arbitrary real samples (used for U = 0 controls
    /// and constructed test potentials). `range` is taken as the largest
    /// distance with a nonzero sample.
    pub fn from_samples(grid: Arc<TorusGrid>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.total_points() {
            return Err(CoreError::InvalidPotential(format!(
                "sample length {} does not match grid with {} points",
                samples.len(),
                grid.total_points()
            )));
        }
        let origin = [0.0; 3];
        let range = samples
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != 0.0)
            .map(|(i, _)| grid.torus_distance(i, &origin))
            .fold(0.0, f64::max);
        let strength = samples.iter().map(|s| s.abs()).fold(0.0, f64::max);
        Ok(Self::from_parts(grid, samples, strength, range))
    }

    /// The zero potential (free dynamics control).
    pub fn zero(grid: Arc<TorusGrid>) -> Self {
        let samples = vec![0.0; grid.total_points()];
        Self::from_parts(grid, samples, 0.0, 0.0)
    }

    fn from_parts(grid: Arc<TorusGrid>, samples: Vec<f64>, strength: f64, range: f64) -> Self {
        let h_d = grid.cell_volume();
        let l1_norm = h_d * samples.iter().map(|s| s.abs()).sum::<f64>();
        let mut hat: Vec<Complex64> = samples.iter().map(|s| Complex64::new(*s, 0.0)).collect();
        fft_nd(&grid, &mut hat, false);
        for v in &mut hat {
            *v *= h_d;
        }
        Self {
            grid,
            samples,
            strength,
            range,
            l1_norm,
            hat,
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    /// ‖U‖₁ = h^d Σ|U(x)|.
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    /// Unnormalized transform table Ǔ(k) in FFT order.
    pub fn hat_table(&self) -> &[Complex64] {
        &self.hat
    }

    /// Ǔ at a grid mode. The potentials built here are real and even, so the
    /// imaginary part is roundoff; callers needing a real multiplier use
    /// [`Self::hat_re`].
    pub fn hat(&self, mode: usize) -> Complex64 {
        self.hat[mode]
    }

    pub fn hat_re(&self, mode: usize) -> f64 {
        self.hat[mode].re
    }

    /// Ǔ(0) = h^d Σ U(x); equals ‖U‖₁ for U ≥ 0.
    pub fn hat_zero(&self) -> f64 {
        self.hat[0].re
    }

    /// Evaluates Ǔ at an arbitrary wavevector by direct sum.
    pub fn hat_at(&self, k: &[f64; 3]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, s) in self.samples.iter().enumerate() {
            if *s == 0.0 {
                continue;
            }
            let x = self.grid.position(i);
            let phase = -(k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            acc += Complex64::from_polar(*s, phase);
        }
        acc * self.grid.cell_volume()
    }

    /// Periodic convolution (U*f)(x) = h^d Σ_y U(x−y) f(y), computed in
    /// momentum space via the multiplier Ǔ(k).
    pub fn convolve(&self, f: &ComplexField) -> Result<ComplexField> {
        if !(Arc::ptr_eq(&self.grid, f.grid()) || *self.grid == **f.grid()) {
            return Err(CoreError::GridMismatch);
        }
        let mut data = f.values().to_vec();
        fft_nd(&self.grid, &mut data, false);
        for (v, u) in data.iter_mut().zip(&self.hat) {
            *v *= u;
        }
        fft_nd(&self.grid, &mut data, true);
        let inv_n = 1.0 / self.grid.total_points() as f64;
        for v in &mut data {
            *v *= inv_n;
        }
        ComplexField::from_values(Arc::clone(f.grid()), data)
    }
}
