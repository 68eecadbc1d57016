//! Nonlinear effective one-particle dynamics on the torus.
//!
//! Three coupled solutions are tracked:
//!
//! ```text
//! i∂φ      = (−½Δ + U*|φ|²) φ                        (Hartree)
//! i∂φ_ref  = (−½Δ + U*|φ_ref|² − ‖U‖₁) φ_ref          (reference)
//! ε        = φ e^{i‖U‖₁ t} − φ_ref                    (excitation)
//! ```
//!
//! together with the direct excitation equation obtained by subtracting the
//! first two, which carries an inhomogeneous source. All steppers use Strang
//! splitting: the kinetic factor is the exact spectral multiplier
//! e^{−ik²dt/4}, the potential factor is an exact pointwise phase, so mass is
//! conserved to roundoff in every substep. For the excitation equation the
//! source is handled by a midpoint evaluation inside the potential substep,
//! keeping the step second order.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::grid::{dft_forward, fft_nd, ComplexField, TorusGrid};
use crate::potential::PairPotential;
use crate::Result;

/// The pair (φ_t, φ_ref_t) plus time and the phase bookkeeping e^{i‖U‖₁t};
/// the excitation ε_t is derived via [`extract_excitation`].
#[derive(Debug, Clone)]
pub struct MeanFieldState {
    pub time: f64,
    pub varphi: ComplexField,
    pub phi_ref: ComplexField,
    pub u_l1: f64,
}

/// Shape of the initial excitation bump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcitationShape {
    /// Periodic Gaussian a·exp(−d²/(2w²)); decays fast but has no sharp support.
    GaussianBump,
    /// Mollifier a·exp(1 − 1/(1 − (d/w)²)), exactly zero for d ≥ w.
    SmoothBump,
}

/// Parameters of the initial excitation ε₀ centered in the box.
#[derive(Debug, Clone, Copy)]
pub struct ExcitationSpec {
    pub amplitude: f64,
    pub width: f64,
    pub shape: ExcitationShape,
}

/// Reference-state geometry: exactly 1 on the torus, or a smooth plateau
/// emulating a box in free space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMode {
    Torus,
    Plateau,
}

/// Fraction of L over which the plateau decays to zero at the boundary.
const PLATEAU_MARGIN: f64 = 1.0 / 8.0;

/// C² smoothstep: s(0) = 0, s(1) = 1, vanishing first and second derivatives
/// at both ends.
fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }
}

/// Samples the excitation profile at distance `d` from its center.
fn excitation_profile(spec: &ExcitationSpec, d: f64) -> f64 {
    match spec.shape {
        ExcitationShape::GaussianBump => {
            spec.amplitude * (-d * d / (2.0 * spec.width * spec.width)).exp()
        }
        ExcitationShape::SmoothBump => {
            let u = d / spec.width;
            if u < 1.0 {
                spec.amplitude * (1.0 - 1.0 / (1.0 - u * u)).exp()
            } else {
                0.0
            }
        }
    }
}

/// Builds ε₀ centered in the box.
pub fn excitation_field(grid: &Arc<TorusGrid>, spec: &ExcitationSpec) -> Result<ComplexField> {
    if !(spec.width > 0.0) || spec.width >= grid.side_length() / 8.0 {
        return Err(CoreError::InvalidInput(format!(
            "excitation width must satisfy 0 < w < L/8, got w = {}, L = {}",
            spec.width,
            grid.side_length()
        )));
    }
    let center = grid.center();
    let values = (0..grid.total_points())
        .map(|i| {
            Complex64::new(
                excitation_profile(spec, grid.torus_distance(i, &center)),
                0.0,
            )
        })
        .collect();
    ComplexField::from_values(Arc::clone(grid), values)
}

/// Smooth plateau reference profile: 1 inside radius (L/2)(1 − margin),
/// decaying C²-smoothly to 0 at the maximal torus distance L/2.
pub fn plateau_field(grid: &Arc<TorusGrid>) -> ComplexField {
    let center = grid.center();
    let half = grid.side_length() / 2.0;
    let inner = half * (1.0 - PLATEAU_MARGIN);
    let len = grid.side_length();
    let dim = grid.dim();
    ComplexField::from_fn(Arc::clone(grid), |x| {
        let mut d: f64 = 0.0;
        for (a, c) in center.iter().enumerate().take(dim) {
            let mut da = (x[a] - c).abs() % len;
            if da > half {
                da = len - da;
            }
            d = d.max(da);
        }
        let v = 1.0 - smoothstep((d - inner) / (half - inner));
        Complex64::new(v, 0.0)
    })
}

/// Assembles matched initial data: φ_ref (torus constant or plateau), the
/// centered excitation ε₀, and φ₀ = φ_ref + ε₀.
pub fn initial_state(
    grid: &Arc<TorusGrid>,
    spec: &ExcitationSpec,
    mode: ReferenceMode,
    u: &PairPotential,
) -> Result<MeanFieldState> {
    let phi_ref = match mode {
        ReferenceMode::Torus => ComplexField::constant(Arc::clone(grid), Complex64::new(1.0, 0.0)),
        ReferenceMode::Plateau => plateau_field(grid),
    };
    let epsilon = excitation_field(grid, spec)?;
    let mut varphi = phi_ref.clone();
    varphi.axpy(Complex64::new(1.0, 0.0), &epsilon)?;
    Ok(MeanFieldState {
        time: 0.0,
        varphi,
        phi_ref,
        u_l1: u.l1_norm(),
    })
}

/// ε_t := φ_t e^{i‖U‖₁ t} − φ_ref_t.
pub fn extract_excitation(state: &MeanFieldState) -> ComplexField {
    let phase = Complex64::from_polar(1.0, state.u_l1 * state.time);
    let mut eps = state.varphi.clone();
    eps.scale(phase);
    eps.axpy(Complex64::new(-1.0, 0.0), &state.phi_ref)
        .expect("state fields share a grid");
    eps
}

fn kinetic_half_step(grid: &TorusGrid, data: &mut [Complex64], dt: f64) {
    fft_nd(grid, data, false);
    for (i, v) in data.iter_mut().enumerate() {
        let k2 = grid.k_squared(i);
        *v *= Complex64::from_polar(1.0, -k2 * dt / 4.0);
    }
    fft_nd(grid, data, true);
    let inv_n = 1.0 / grid.total_points() as f64;
    for v in data.iter_mut() {
        *v *= inv_n;
    }
}

/// Real part of a convolution result; the imaginary residue is FFT roundoff
/// whenever the convolved field is real.
fn convolve_re(u: &PairPotential, f: &ComplexField) -> Result<Vec<f64>> {
    Ok(u.convolve(f)?.values().iter().map(|v| v.re).collect())
}

fn density_field(f: &ComplexField) -> ComplexField {
    let values = f
        .values()
        .iter()
        .map(|v| Complex64::new(v.norm_sqr(), 0.0))
        .collect();
    ComplexField::from_values(Arc::clone(f.grid()), values).expect("same grid")
}

/// One Strang step of i∂ψ = (−½Δ + U*|ψ|² + shift)ψ.
fn nls_strang_step(
    field: &ComplexField,
    u: &PairPotential,
    shift: f64,
    dt: f64,
    time: f64,
) -> Result<ComplexField> {
    let grid = Arc::clone(field.grid());
    let mut data = field.values().to_vec();
    kinetic_half_step(&grid, &mut data, dt);
    // the phase step leaves |ψ| invariant, so the frozen potential is exact
    // for the potential sub-flow
    let mid = ComplexField::from_values(Arc::clone(&grid), data.clone())?;
    let v = convolve_re(u, &density_field(&mid))?;
    for (val, pot) in data.iter_mut().zip(&v) {
        *val *= Complex64::from_polar(1.0, -(pot + shift) * dt);
    }
    kinetic_half_step(&grid, &mut data, dt);
    let out = ComplexField::from_values(grid, data)?;
    if !out.is_finite() {
        return Err(CoreError::NonFinite {
            context: "split-step evolution".into(),
            time: time + dt,
        });
    }
    Ok(out)
}

/// Advances the Hartree orbital φ and the clock by one step of `dt`. The
/// reference field is left untouched; see [`step_state`] for the combined
/// driver.
pub fn hartree_step(state: &MeanFieldState, u: &PairPotential, dt: f64) -> Result<MeanFieldState> {
    let varphi = nls_strang_step(&state.varphi, u, 0.0, dt, state.time)?;
    Ok(MeanFieldState {
        time: state.time + dt,
        varphi,
        phi_ref: state.phi_ref.clone(),
        u_l1: state.u_l1,
    })
}

/// Advances the reference orbital φ_ref (potential shifted by −‖U‖₁) and the
/// clock by one step of `dt`. On the torus with repulsive U the constant 1 is
/// an exact fixed point.
pub fn reference_step(
    state: &MeanFieldState,
    u: &PairPotential,
    dt: f64,
) -> Result<MeanFieldState> {
    let phi_ref = nls_strang_step(&state.phi_ref, u, -state.u_l1, dt, state.time)?;
    Ok(MeanFieldState {
        time: state.time + dt,
        varphi: state.varphi.clone(),
        phi_ref,
        u_l1: state.u_l1,
    })
}

/// Advances both orbitals and the clock by one step of `dt`.
pub fn step_state(state: &MeanFieldState, u: &PairPotential, dt: f64) -> Result<MeanFieldState> {
    let varphi = nls_strang_step(&state.varphi, u, 0.0, dt, state.time)?;
    let phi_ref = nls_strang_step(&state.phi_ref, u, -state.u_l1, dt, state.time)?;
    Ok(MeanFieldState {
        time: state.time + dt,
        varphi,
        phi_ref,
        u_l1: state.u_l1,
    })
}

/// Exact solution of i∂ε = Vε + S over time τ with V, S frozen:
/// ε(τ) = e^{−iVτ}ε₀ + (e^{−iVτ} − 1)/V · S.
fn frozen_potential_substep(data: &mut [Complex64], v: &[f64], s: &[Complex64], tau: f64) {
    for ((val, pot), src) in data.iter_mut().zip(v).zip(s) {
        let theta = pot * tau;
        let phase = Complex64::from_polar(1.0, -theta);
        let coef = if theta.abs() < 1e-8 {
            // (e^{−iVτ} − 1)/V = τ·(e^z − 1)/z with z = −iVτ
            let z = Complex64::new(0.0, -theta);
            Complex64::new(0.0, -tau) * (Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0)
        } else {
            (phase - Complex64::new(1.0, 0.0)) / pot
        };
        *val = phase * *val + coef * src;
    }
}

/// Potential V[ε] and source S[ε] of the excitation equation for a given
/// reference orbital.
fn epsilon_coefficients(
    eps: &ComplexField,
    phi_ref: &ComplexField,
    u: &PairPotential,
    u_l1: f64,
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let grid = eps.grid();
    // U*|φ_ref|² − ‖U‖₁
    let ref_pot = convolve_re(u, &density_field(phi_ref))?;
    // U*|ε|²
    let eps_pot = convolve_re(u, &density_field(eps))?;
    // U*2Re(ε* φ_ref)
    let cross = ComplexField::from_values(
        Arc::clone(grid),
        eps.values()
            .iter()
            .zip(phi_ref.values())
            .map(|(e, p)| Complex64::new(2.0 * (e.conj() * p).re, 0.0))
            .collect(),
    )?;
    let cross_pot = convolve_re(u, &cross)?;

    let v: Vec<f64> = ref_pot
        .iter()
        .zip(&eps_pot)
        .zip(&cross_pot)
        .map(|((r, e), c)| r - u_l1 + e + c)
        .collect();
    let s: Vec<Complex64> = eps_pot
        .iter()
        .zip(&cross_pot)
        .zip(phi_ref.values())
        .map(|((e, c), p)| (e + c) * p)
        .collect();
    Ok((v, s))
}

/// One Strang step of the direct excitation equation: kinetic half step,
/// midpoint-frozen potential-plus-source step, kinetic half step. This is the
/// second, independent route to ε_t.
pub fn epsilon_direct_step(
    epsilon: &ComplexField,
    phi_ref: &ComplexField,
    u: &PairPotential,
    dt: f64,
) -> Result<ComplexField> {
    let grid = Arc::clone(epsilon.grid());
    let mut data = epsilon.values().to_vec();
    kinetic_half_step(&grid, &mut data, dt);

    let at_half_kin = ComplexField::from_values(Arc::clone(&grid), data.clone())?;
    // predictor: half potential step with coefficients frozen at the start
    let (v0, s0) = epsilon_coefficients(&at_half_kin, phi_ref, u, u.l1_norm())?;
    let mut half = data.clone();
    frozen_potential_substep(&mut half, &v0, &s0, dt / 2.0);
    let mid = ComplexField::from_values(Arc::clone(&grid), half)?;
    // corrector: full step with midpoint coefficients
    let (vm, sm) = epsilon_coefficients(&mid, phi_ref, u, u.l1_norm())?;
    frozen_potential_substep(&mut data, &vm, &sm, dt);

    kinetic_half_step(&grid, &mut data, dt);
    let out = ComplexField::from_values(grid, data)?;
    if !out.is_finite() {
        return Err(CoreError::NonFinite {
            context: "excitation equation".into(),
            time: dt,
        });
    }
    Ok(out)
}

/// Drives the direct excitation route over `steps` steps of `dt`, advancing
/// its own reference orbital so the ε step sees φ_ref at the half step (this
/// keeps the route second order when φ_ref is not constant). Returns the
/// final (ε, φ_ref).
pub fn evolve_epsilon_route(
    eps0: &ComplexField,
    phi_ref0: &ComplexField,
    u: &PairPotential,
    dt: f64,
    steps: usize,
) -> Result<(ComplexField, ComplexField)> {
    let u_l1 = u.l1_norm();
    let mut eps = eps0.clone();
    let mut phi_ref = phi_ref0.clone();
    for i in 0..steps {
        let t = i as f64 * dt;
        let half = nls_strang_step(&phi_ref, u, -u_l1, dt / 2.0, t)?;
        eps = epsilon_direct_step(&eps, &half, u, dt)?;
        phi_ref = nls_strang_step(&half, u, -u_l1, dt / 2.0, t + dt / 2.0)?;
    }
    Ok((eps, phi_ref))
}

/// Family of C² cutoff functions χ_r: zero within torus distance r·(L/2) of
/// the box center, one at the maximal distance L/2, with
/// ‖∇χ_r‖∞ ≤ C·Λ^{−1/dim}.
#[derive(Debug, Clone)]
pub struct CutoffFunction {
    pub r: f64,
    samples: Vec<f64>,
    grid: Arc<TorusGrid>,
}

impl CutoffFunction {
    pub fn new(grid: &Arc<TorusGrid>, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(CoreError::InvalidInput(format!(
                "cutoff parameter must lie in (0,1), got {r}"
            )));
        }
        let center = grid.center();
        let half = grid.side_length() / 2.0;
        let inner = r * half;
        let samples = (0..grid.total_points())
            .map(|i| {
                let d = grid.torus_distance(i, &center);
                smoothstep((d - inner) / (half - inner))
            })
            .collect();
        Ok(Self {
            r,
            samples,
            grid: Arc::clone(grid),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// ‖χ_r f‖₂ in the grid measure.
    pub fn weighted_l2(&self, f: &ComplexField) -> f64 {
        let s: f64 = self
            .samples
            .iter()
            .zip(f.values())
            .map(|(c, v)| c * c * v.norm_sqr())
            .sum();
        (self.grid.cell_volume() * s).sqrt()
    }

    /// Max-norm of the finite-difference gradient, for the Λ^{−1/dim} bound.
    pub fn gradient_linf(&self) -> f64 {
        let n = self.grid.points_per_dim();
        let dim = self.grid.dim();
        let h = self.grid.spacing();
        let mut max = 0.0f64;
        for flat in 0..self.grid.total_points() {
            let idx = self.grid.axis_indices(flat);
            for a in 0..dim {
                let mut up = idx;
                up[a] = (idx[a] + 1) % n;
                let mut flat_up = 0;
                for (b, u) in up.iter().enumerate().take(dim) {
                    flat_up = flat_up * n + u;
                    let _ = b;
                }
                let g = (self.samples[flat_up] - self.samples[flat]).abs() / h;
                max = max.max(g);
            }
        }
        max
    }
}

/// Norms and conserved quantities emitted along a run.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub eps_l2: f64,
    pub eps_linf: f64,
    pub eps_grad_l2: f64,
    /// ‖p_ref ε‖₂ = |⟨φ_ref, ε⟩| / ‖φ_ref‖₂.
    pub p_ref_eps_l2: f64,
    /// ‖χ_r ε‖₂ for each supplied cutoff, in input order.
    pub cutoff_eps_l2: Vec<f64>,
    /// Conserved functional E[φ] = ½‖∇φ‖₂² + ½⟨|φ|², U*|φ|²⟩.
    pub energy: f64,
    pub mass: f64,
    /// ℓ¹ norm of the transform of φ (flatness diagnostic).
    pub phi_hat_l1: f64,
}

/// Spectral ‖∇f‖₂ via Σ k²|f̂(k)|² Δk^d.
pub fn gradient_l2(f: &ComplexField) -> f64 {
    let fhat = dft_forward(f);
    let grid = f.grid();
    let s: f64 = fhat
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| grid.k_squared(i) * v.norm_sqr())
        .sum();
    (grid.mode_cell_volume() * s).sqrt()
}

/// Conserved Hartree energy E[φ] = ½‖∇φ‖₂² + ½⟨|φ|², U*|φ|²⟩.
pub fn hartree_energy(phi: &ComplexField, u: &PairPotential) -> Result<f64> {
    let kinetic = 0.5 * gradient_l2(phi).powi(2);
    let rho = density_field(phi);
    let pot = u.convolve(&rho)?;
    let interaction = 0.5 * rho.inner(&pot)?.re;
    Ok(kinetic + interaction)
}

/// Evaluates the full diagnostics record for a state.
pub fn diagnostics(
    state: &MeanFieldState,
    u: &PairPotential,
    cutoffs: &[CutoffFunction],
) -> Result<DiagnosticsRecord> {
    let eps = extract_excitation(state);
    let phi_ref_norm = state.phi_ref.l2_norm();
    let p_ref_eps_l2 = if phi_ref_norm > 0.0 {
        state.phi_ref.inner(&eps)?.norm() / phi_ref_norm
    } else {
        0.0
    };
    Ok(DiagnosticsRecord {
        time: state.time,
        eps_l2: eps.l2_norm(),
        eps_linf: eps.linf_norm(),
        eps_grad_l2: gradient_l2(&eps),
        p_ref_eps_l2,
        cutoff_eps_l2: cutoffs.iter().map(|c| c.weighted_l2(&eps)).collect(),
        energy: hartree_energy(&state.varphi, u)?,
        mass: state.varphi.l2_norm(),
        phi_hat_l1: dft_forward(&state.varphi).l1_norm(),
    })
}

/// Default step recommendation: 10⁻³ of the shortest kinetic period on the
/// grid.
pub fn default_dt(grid: &TorusGrid) -> f64 {
    let k_max = std::f64::consts::PI / grid.spacing();
    let omega_max = k_max * k_max * (grid.dim() as f64) / 2.0;
    1e-3 * std::f64::consts::TAU / omega_max
}
