//! Split-step Fourier solver for the classical generalized NLSE.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::FiberSpec;
use crate::grid::{Envelope, Grid};
use crate::model::{Fault, GnlseModel, StepCheckpoint};

/// Fraction of spectral energy allowed within 3 bins of the Nyquist edge.
pub const ALIASING_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum StepScheme {
    /// Uniform symmetrized steps.
    FixedSymmetrized { steps: usize },
    /// Step doubling on the local error, relative L2 norm.
    AdaptiveLocalError { local_error_goal: f64, initial_dz_m: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub scheme: StepScheme,
    /// Snapshot spacing in m; `None` records no snapshots.
    #[serde(default)]
    pub record_interval_m: Option<f64>,
    #[serde(default = "yes")]
    pub check_aliasing: bool,
    #[serde(skip)]
    pub(crate) fault: Fault,
}

fn yes() -> bool {
    true
}

impl SolverOptions {
    pub fn fixed(steps: usize) -> Self {
        SolverOptions {
            scheme: StepScheme::FixedSymmetrized { steps },
            record_interval_m: None,
            check_aliasing: true,
            fault: Fault::None,
        }
    }

    /// Fixed stepping with the step count chosen so no step exceeds `dz_m`.
    pub fn fixed_dz(length_m: f64, dz_m: f64) -> Self {
        Self::fixed(((length_m / dz_m).ceil() as usize).max(1))
    }

    pub fn adaptive(local_error_goal: f64, initial_dz_m: f64) -> Self {
        SolverOptions {
            scheme: StepScheme::AdaptiveLocalError {
                local_error_goal,
                initial_dz_m,
            },
            record_interval_m: None,
            check_aliasing: true,
            fault: Fault::None,
        }
    }

    pub fn with_record_interval(mut self, interval_m: f64) -> Self {
        self.record_interval_m = Some(interval_m);
        self
    }

    pub fn without_aliasing_check(mut self) -> Self {
        self.check_aliasing = false;
        self
    }

    #[doc(hidden)]
    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = fault;
        self
    }

    pub fn fault(&self) -> Fault {
        self.fault
    }

    pub fn violations(&self, length_m: f64) -> Vec<String> {
        let mut v = Vec::new();
        match self.scheme {
            StepScheme::FixedSymmetrized { steps } => {
                if steps == 0 {
                    v.push("step count must be >= 1".into());
                }
            }
            StepScheme::AdaptiveLocalError {
                local_error_goal,
                initial_dz_m,
            } => {
                if !(local_error_goal > 0.0 && local_error_goal <= 1e-2) {
                    v.push(format!(
                        "local error goal must lie in (0, 1e-2] (got {local_error_goal})"
                    ));
                }
                if !(initial_dz_m > 0.0) || (length_m > 0.0 && initial_dz_m > length_m) {
                    v.push(format!(
                        "initial step must lie in (0, length] (got {initial_dz_m} m)"
                    ));
                }
            }
        }
        if let Some(r) = self.record_interval_m {
            if !(r > 0.0) {
                v.push(format!("record interval must be positive (got {r} m)"));
            }
        }
        v
    }
}

/// Output of a propagation: final field, optional snapshots and the step record.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub output: Envelope,
    pub snapshots: Vec<(f64, Envelope)>,
    /// Accepted step sizes, in order.
    pub steps: Vec<f64>,
}

/// Fraction of spectral energy in the 3 bins closest to ±Nyquist.
pub fn edge_energy_fraction(grid: &Grid, spectrum: &[Complex64]) -> f64 {
    let n = grid.n_points();
    let total: f64 = spectrum.iter().map(|a| a.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let edge: f64 = (n / 2 - 3..n / 2 + 3).map(|k| spectrum[k].norm_sqr()).sum();
    edge / total
}

pub(crate) fn check_aliasing(model: &GnlseModel, field: &[Complex64], z: f64) -> Result<()> {
    let grid = model.grid();
    let mut spec = field.to_vec();
    model.fourier().to_spectrum(&mut spec, grid.dt());
    let fraction = edge_energy_fraction(grid, &spec);
    if fraction > ALIASING_THRESHOLD {
        return Err(Error::Aliasing {
            z_m: z,
            fraction,
            suggested_points: grid.n_points() * 2,
        });
    }
    Ok(())
}

fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut d = 0.0;
    let mut n = 0.0;
    for (x, y) in a.iter().zip(b) {
        d += (x - y).norm_sqr();
        n += y.norm_sqr();
    }
    if n == 0.0 {
        0.0
    } else {
        (d / n).sqrt()
    }
}

/// Drives the stepping and hands every accepted step to `on_step`.
pub(crate) fn drive<F>(
    model: &GnlseModel,
    input: &Envelope,
    length_m: f64,
    opts: &SolverOptions,
    mut on_step: F,
) -> Result<Propagation>
where
    F: FnMut(&mut Vec<Complex64>, StepCheckpoint) -> Result<()>,
{
    if input.grid() != model.grid() {
        return Err(Error::contract("input envelope is on a different grid than the model"));
    }
    let violations = opts.violations(length_m);
    if !violations.is_empty() {
        return Err(Error::Config(violations.join("; ")));
    }
    let mut field = input.samples().to_vec();
    let mut z = 0.0;
    let mut steps = Vec::new();
    let mut snapshots = Vec::new();
    let mut next_record = opts.record_interval_m;
    if opts.record_interval_m.is_some() {
        snapshots.push((0.0, input.clone()));
    }

    let mut accept = |field: &mut Vec<Complex64>,
                      h: f64,
                      z_end: f64,
                      mid: Vec<Complex64>,
                      steps: &mut Vec<f64>,
                      snapshots: &mut Vec<(f64, Envelope)>|
     -> Result<()> {
        if field.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Numerical {
                z_m: z_end,
                what: "non-finite field".into(),
            });
        }
        if opts.check_aliasing {
            check_aliasing(model, field, z_end)?;
        }
        steps.push(h);
        on_step(field, model.checkpoint(h, z_end, mid))?;
        if let (Some(interval), Some(mark)) = (opts.record_interval_m, next_record.as_mut()) {
            if z_end >= *mark - 1e-12 * length_m.max(1.0) {
                snapshots.push((z_end, Envelope::new(*model.grid(), field.clone())?));
                while *mark <= z_end + 1e-12 * length_m.max(1.0) {
                    *mark += interval;
                }
            }
        }
        Ok(())
    };

    if length_m > 0.0 {
        match opts.scheme {
            StepScheme::FixedSymmetrized { steps: count } => {
                let h = length_m / count as f64;
                for i in 0..count {
                    let z_end = if i + 1 == count { length_m } else { (i + 1) as f64 * h };
                    let mid = model.step(&mut field, h, z_end)?;
                    accept(&mut field, h, z_end, mid, &mut steps, &mut snapshots)?;
                }
                z = length_m;
            }
            StepScheme::AdaptiveLocalError {
                local_error_goal,
                initial_dz_m,
            } => {
                let mut h = initial_dz_m.min(length_m);
                let min_h = length_m * 1e-9;
                while z < length_m * (1.0 - 1e-14) {
                    h = h.min(length_m - z);
                    let attempt = (|| -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, f64)> {
                        let mut coarse = field.clone();
                        model.step(&mut coarse, h, z + h)?;
                        let mut fine = field.clone();
                        let mid1 = model.step(&mut fine, 0.5 * h, z + 0.5 * h)?;
                        let first = fine.clone();
                        let mid2 = model.step(&mut fine, 0.5 * h, z + h)?;
                        let err = relative_l2(&coarse, &fine);
                        Ok((first, fine, mid1, mid2, err))
                    })();
                    match attempt {
                        Ok((first, fine, mid1, mid2, err)) if err <= local_error_goal => {
                            let mut f1 = first;
                            accept(&mut f1, 0.5 * h, z + 0.5 * h, mid1, &mut steps, &mut snapshots)?;
                            field = fine;
                            z += h;
                            accept(&mut field, 0.5 * h, z, mid2, &mut steps, &mut snapshots)?;
                            let factor = if err == 0.0 {
                                2.0
                            } else {
                                (0.9 * (local_error_goal / err).powf(1.0 / 3.0)).clamp(0.5, 2.0)
                            };
                            h *= factor;
                        }
                        Ok((_, _, _, _, err)) => {
                            h *= (0.9 * (local_error_goal / err).powf(1.0 / 3.0)).clamp(0.1, 0.5);
                        }
                        Err(Error::Numerical { .. }) => {
                            h *= 0.5;
                        }
                        Err(e) => return Err(e),
                    }
                    if h < min_h {
                        return Err(Error::Numerical {
                            z_m: z,
                            what: format!("adaptive step fell below {min_h:.3e} m"),
                        });
                    }
                }
                z = length_m;
            }
        }
    }

    if let Some(interval) = opts.record_interval_m {
        let last = snapshots.last().map(|s| s.0).unwrap_or(-1.0);
        if (z - last).abs() > 1e-12 * interval.max(1e-300) && z > 0.0 {
            snapshots.push((z, Envelope::new(*model.grid(), field.clone())?));
        }
    }

    Ok(Propagation {
        output: Envelope::new(*input.grid(), field)?,
        snapshots,
        steps,
    })
}

/// Propagates `input` through the whole fiber.
pub fn propagate(input: &Envelope, spec: &FiberSpec, opts: &SolverOptions) -> Result<Propagation> {
    let model = GnlseModel::with_fault(spec, input.grid(), opts.fault)?;
    drive(&model, input, spec.length_m, opts, |_, _| Ok(()))
}

/// Classical propagation that also keeps every step checkpoint for linearized replay.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub input: Envelope,
    pub output: Envelope,
    pub checkpoints: Vec<StepCheckpoint>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.checkpoints.len()
    }
}

pub fn propagate_recorded(
    model: &GnlseModel,
    input: &Envelope,
    length_m: f64,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    let mut checkpoints = Vec::new();
    let prop = drive(model, input, length_m, opts, |_, cp| {
        checkpoints.push(cp);
        Ok(())
    })?;
    Ok(Trajectory {
        input: input.clone(),
        output: prop.output,
        checkpoints,
    })
}
