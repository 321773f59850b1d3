//! The discrete generalized NLSE step and its tangent-linear and adjoint maps.
//!
//! One step of size `h` is Strang-split: half a dispersion step, an implicit
//! midpoint step of the nonlinear flow, half a dispersion step. The implicit
//! midpoint rule keeps every quadratic invariant of the nonlinear flow (energy
//! without self-steepening, photon number with it) and is symplectic, so the
//! linearized map inherits the Bogoliubov conditions wherever the continuous
//! flow has them.
//!
//! Perturbations are complex time-domain vectors acted on real-linearly. The
//! adjoints are taken with respect to the real inner product `Re⟨u, v⟩`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fourier;
use crate::fiber::FiberSpec;
use crate::grid::Grid;
use crate::raman::RamanKernel;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Deliberate defects used by the self-test to prove the checks can fail.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Negates the dispersion operator.
    FlipDispersionSign,
    /// Conjugates ν while assembling the Green matrix.
    ConjugateNu,
}

#[derive(Debug, Clone)]
pub struct GnlseModel {
    grid: Grid,
    fourier: Fourier,
    dispersion: Vec<f64>,
    gamma: f64,
    raman_fraction: f64,
    raman: Option<RamanKernel>,
    /// `ω_abs/ω₀` per bin when self-steepening is on.
    steepening: Option<Vec<f64>>,
    tolerance: f64,
    max_iterations: usize,
}

impl GnlseModel {
    pub fn new(spec: &FiberSpec, grid: &Grid) -> Result<Self> {
        Self::with_fault(spec, grid, Fault::None)
    }

    #[doc(hidden)]
    pub fn with_fault(spec: &FiberSpec, grid: &Grid, fault: Fault) -> Result<Self> {
        spec.validate()?;
        let sign = if fault == Fault::FlipDispersionSign { -1.0 } else { 1.0 };
        let dispersion = (0..grid.n_points())
            .map(|k| sign * spec.dispersion_operator(grid.omega(k)))
            .collect();
        let raman = spec.raman_kernel(grid)?;
        let raman_fraction = if raman.is_some() { spec.raman_fraction } else { 0.0 };
        let steepening = spec.self_steepening.then(|| {
            (0..grid.n_points())
                .map(|k| grid.absolute_omega(k) / grid.carrier_omega())
                .collect()
        });
        Ok(GnlseModel {
            grid: *grid,
            fourier: grid.fourier(),
            dispersion,
            gamma: spec.gamma,
            raman_fraction,
            raman,
            steepening,
            tolerance: 1e-13,
            max_iterations: 80,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn raman(&self) -> Option<&RamanKernel> {
        self.raman.as_ref()
    }

    pub fn raman_fraction(&self) -> f64 {
        self.raman_fraction
    }

    pub fn is_linear(&self) -> bool {
        self.gamma == 0.0
    }

    pub fn self_steepening(&self) -> bool {
        self.steepening.is_some()
    }

    /// Relative convergence threshold of the implicit nonlinear solves.
    pub fn set_tolerance(&mut self, tol: f64) {
        self.tolerance = tol;
    }

    /// `exp(i·dz·D(ω_k))`.
    pub fn phase(&self, dz: f64) -> Vec<Complex64> {
        self.dispersion
            .iter()
            .map(|d| Complex64::from_polar(1.0, dz * d))
            .collect()
    }

    fn convolve(&self, q: &[f64], transpose: bool) -> Vec<f64> {
        let kernel = self.raman.as_ref().expect("raman kernel").transfer();
        let mut buf: Vec<Complex64> = q.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fourier.raw_plus(&mut buf);
        let scale = 1.0 / self.grid.n_points() as f64;
        for (b, h) in buf.iter_mut().zip(kernel) {
            let h = if transpose { h.conj() } else { *h };
            *b *= h * scale;
        }
        self.fourier.raw_minus(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    /// `(1 − f_R)·q + f_R·(h ⊛ q)`, or its transpose.
    fn response(&self, q: &[f64], transpose: bool) -> Vec<f64> {
        if self.raman.is_none() {
            return q.to_vec();
        }
        let fr = self.raman_fraction;
        let delayed = self.convolve(q, transpose);
        q.iter()
            .zip(&delayed)
            .map(|(a, b)| (1.0 - fr) * a + fr * b)
            .collect()
    }

    /// `iγ·S[x]`, S being the self-steepening operator (identity when off).
    fn steepen_in_place(&self, x: &mut [Complex64], factor: Complex64) {
        match &self.steepening {
            Some(s) => {
                self.fourier.filter_time_real(x, s);
                for v in x.iter_mut() {
                    *v *= factor;
                }
            }
            None => {
                for v in x.iter_mut() {
                    *v *= factor;
                }
            }
        }
    }

    /// Real nonlinear potential `V(A) = R(|A|²)`.
    pub fn potential(&self, field: &[Complex64]) -> Vec<f64> {
        let intensity: Vec<f64> = field.iter().map(|a| a.norm_sqr()).collect();
        self.response(&intensity, false)
    }

    /// Nonlinear vector field `N(A) = iγ·S[A·V(A)]`.
    pub fn nonlinear(&self, field: &[Complex64]) -> Vec<Complex64> {
        let v = self.potential(field);
        let mut out: Vec<Complex64> = field.iter().zip(&v).map(|(a, p)| a * p).collect();
        self.steepen_in_place(&mut out, I * self.gamma);
        out
    }

    /// `N'(m)[δ]` with `V(m)` precomputed.
    pub fn tangent(&self, mid: &[Complex64], v: &[f64], delta: &[Complex64]) -> Vec<Complex64> {
        let q: Vec<f64> = mid
            .iter()
            .zip(delta)
            .map(|(m, d)| 2.0 * (m.conj() * d).re)
            .collect();
        let r = self.response(&q, false);
        let mut out: Vec<Complex64> = delta
            .iter()
            .zip(v)
            .zip(mid.iter().zip(&r))
            .map(|((d, p), (m, rr))| d * p + m * rr)
            .collect();
        self.steepen_in_place(&mut out, I * self.gamma);
        out
    }

    /// Adjoint of [`GnlseModel::tangent`] under `Re⟨·,·⟩`.
    pub fn tangent_adjoint(&self, mid: &[Complex64], v: &[f64], g: &[Complex64]) -> Vec<Complex64> {
        let mut u = g.to_vec();
        self.steepen_in_place(&mut u, -I * self.gamma);
        let p: Vec<f64> = mid.iter().zip(&u).map(|(m, x)| (m.conj() * x).re).collect();
        let r = self.response(&p, true);
        u.iter()
            .zip(v)
            .zip(mid.iter().zip(&r))
            .map(|((x, pot), (m, rr))| x * pot + 2.0 * m * rr)
            .collect()
    }

    /// Adjoint of the noise injection map `ξ ↦ i·S[m·ξ]`, i.e. `Re(m̄·(−i·S[g]))`.
    pub fn noise_adjoint(&self, mid: &[Complex64], g: &[Complex64]) -> Vec<f64> {
        let mut u = g.to_vec();
        self.steepen_in_place(&mut u, -I);
        mid.iter().zip(&u).map(|(m, x)| (m.conj() * x).re).collect()
    }

    /// Forward noise injection map `ξ ↦ i·S[m·ξ]`.
    pub fn noise_forward(&self, mid: &[Complex64], xi: &[f64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = mid.iter().zip(xi).map(|(m, x)| m * x).collect();
        self.steepen_in_place(&mut out, I);
        out
    }

    fn converged(&self, prev: &[Complex64], next: &[Complex64]) -> bool {
        let mut diff = 0.0;
        let mut norm = 0.0;
        for (a, b) in prev.iter().zip(next) {
            diff += (a - b).norm_sqr();
            norm += b.norm_sqr();
        }
        diff <= self.tolerance * self.tolerance * norm.max(f64::MIN_POSITIVE)
    }

    /// Implicit midpoint step of the nonlinear flow; returns the converged midpoint.
    pub fn nonlinear_step(&self, field: &mut [Complex64], h: f64, z: f64) -> Result<Vec<Complex64>> {
        if self.is_linear() {
            return Ok(field.to_vec());
        }
        let start = field.to_vec();
        let explicit = self.nonlinear(&start);
        let mut next: Vec<Complex64> = start.iter().zip(&explicit).map(|(a, n)| a + h * n).collect();
        for _ in 0..self.max_iterations {
            let mid: Vec<Complex64> = start.iter().zip(&next).map(|(a, y)| 0.5 * (a + y)).collect();
            let n = self.nonlinear(&mid);
            let candidate: Vec<Complex64> = start.iter().zip(&n).map(|(a, x)| a + h * x).collect();
            if candidate.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::Numerical {
                    z_m: z,
                    what: "non-finite field in the nonlinear step".into(),
                });
            }
            let done = self.converged(&next, &candidate);
            next = candidate;
            if done {
                let mid = start.iter().zip(&next).map(|(a, y)| 0.5 * (a + y)).collect();
                field.copy_from_slice(&next);
                return Ok(mid);
            }
        }
        Err(Error::Numerical {
            z_m: z,
            what: format!("nonlinear step of {h:.3e} m did not converge; reduce the step size"),
        })
    }

    /// Solves `x = b + (h/2)·op(b + x)` by fixed-point iteration.
    fn solve_linear<F>(&self, b: &[Complex64], h: f64, op: F) -> Vec<Complex64>
    where
        F: Fn(&[Complex64]) -> Vec<Complex64>,
    {
        let apply = |x: &[Complex64]| -> Vec<Complex64> {
            let s: Vec<Complex64> = b.iter().zip(x).map(|(p, q)| p + q).collect();
            op(&s).iter().zip(b).map(|(o, p)| p + 0.5 * h * o).collect()
        };
        let mut x = apply(b);
        for _ in 0..self.max_iterations {
            let next = apply(&x);
            let done = self.converged(&x, &next);
            x = next;
            if done {
                break;
            }
        }
        x
    }

    /// Full Strang step in place; returns the nonlinear midpoint.
    pub fn step(&self, field: &mut [Complex64], h: f64, z: f64) -> Result<Vec<Complex64>> {
        let half = self.phase(0.5 * h);
        self.fourier.filter_time(field, &half);
        let mid = self.nonlinear_step(field, h, z)?;
        self.fourier.filter_time(field, &half);
        Ok(mid)
    }

    /// Tangent-linear map of one step around a stored midpoint.
    pub fn tangent_step(&self, cp: &StepCheckpoint, delta: &mut [Complex64]) {
        self.tangent_step_parts(cp, delta);
        self.fourier.filter_time(delta, &cp.half_phase);
    }

    /// First half of [`GnlseModel::tangent_step`]: dispersion half step and nonlinear substep.
    pub fn tangent_step_parts(&self, cp: &StepCheckpoint, delta: &mut [Complex64]) {
        self.fourier.filter_time(delta, &cp.half_phase);
        if !self.is_linear() {
            let x = self.solve_linear(delta, cp.h, |s| self.tangent(&cp.mid, &cp.potential, s));
            delta.copy_from_slice(&x);
        }
    }

    /// Adjoint of [`GnlseModel::tangent_step`]; `g` is overwritten with the adjoint at step entry.
    pub fn adjoint_step(&self, cp: &StepCheckpoint, g: &mut [Complex64]) {
        self.adjoint_half(cp, g);
        self.adjoint_nonlinear(cp, g);
    }

    /// Adjoint of the trailing dispersion half step.
    pub fn adjoint_half(&self, cp: &StepCheckpoint, g: &mut [Complex64]) {
        let conj: Vec<Complex64> = cp.half_phase.iter().map(|p| p.conj()).collect();
        self.fourier.filter_time(g, &conj);
    }

    /// Adjoint of the nonlinear substep followed by the leading dispersion half step.
    pub fn adjoint_nonlinear(&self, cp: &StepCheckpoint, g: &mut [Complex64]) {
        if !self.is_linear() {
            let x = self.solve_linear(g, cp.h, |s| self.tangent_adjoint(&cp.mid, &cp.potential, s));
            g.copy_from_slice(&x);
        }
        let conj: Vec<Complex64> = cp.half_phase.iter().map(|p| p.conj()).collect();
        self.fourier.filter_time(g, &conj);
    }

    pub fn checkpoint(&self, h: f64, z: f64, mid: Vec<Complex64>) -> StepCheckpoint {
        let potential = if self.is_linear() {
            vec![0.0; mid.len()]
        } else {
            self.potential(&mid)
        };
        StepCheckpoint {
            h,
            z_end: z,
            half_phase: self.phase(0.5 * h),
            mid,
            potential,
        }
    }
}

/// What the linearized maps need to replay one step.
#[derive(Debug, Clone)]
pub struct StepCheckpoint {
    pub h: f64,
    /// Position at the end of the step.
    pub z_end: f64,
    pub half_phase: Vec<Complex64>,
    pub mid: Vec<Complex64>,
    pub potential: Vec<f64>,
}
