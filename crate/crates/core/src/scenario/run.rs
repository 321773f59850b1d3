use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::grid::Envelope;
use crate::measurement::{
    apply_detection_efficiency, correlation_map, BinStatistics, CorrelationMap, FilterKind,
    SqueezeCurve,
};
use crate::model::GnlseModel;
use crate::propagate::{propagate, propagate_recorded};
use crate::quantum::{
    bin_covariance, linearized_propagate, quadrature_covariance, LinearizedRun, ObservableCovariance,
};
use crate::scenario::config::ScenarioConfig;
use crate::scenario::output::{correlation_svg, num, opt_num, squeeze_svg, OutputDir};
use crate::spectral::{photon_number_spectrum, spectrum, total_photons, FrequencyBins, SpectralDensity};
use crate::units::to_db;

/// Environment variable naming the directory scenario outputs go under.
pub const OUTPUT_ROOT_ENV: &str = "FIBERSQUEEZE_OUTPUT_ROOT";
pub const DEFAULT_OUTPUT_ROOT: &str = "output";

/// Output root from the environment, falling back to `./output`.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

/// A failure tagged with the stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{module}::{operation}: {source}")]
pub struct RunError {
    pub module: &'static str,
    pub operation: &'static str,
    #[source]
    pub source: Error,
}

impl RunError {
    pub fn is_validation(&self) -> bool {
        matches!(self.source, Error::Validation(_) | Error::Parse { .. })
    }

    pub fn report(&self) -> serde_json::Value {
        let violations = match &self.source {
            Error::Validation(v) => v.clone(),
            _ => Vec::new(),
        };
        json!({
            "module": self.module,
            "operation": self.operation,
            "kind": self.source.kind(),
            "message": self.source.to_string(),
            "z_m": self.source.z_position(),
            "violations": violations,
        })
    }
}

trait Stage<T> {
    fn at(self, module: &'static str, operation: &'static str) -> Result<T, RunError>;
}

impl<T> Stage<T> for crate::Result<T> {
    fn at(self, module: &'static str, operation: &'static str) -> Result<T, RunError> {
        self.map_err(|source| RunError {
            module,
            operation,
            source,
        })
    }
}

/// Everything computed for one launch energy.
#[derive(Debug, Clone)]
pub struct EnergyAnalysis {
    pub energy_pj: f64,
    pub steps: usize,
    pub output: Envelope,
    pub spectrum: SpectralDensity,
    pub snapshots: Vec<(f64, Envelope)>,
    pub bins: Option<FrequencyBins>,
    /// Bin statistics with the detection band applied.
    pub stats: Option<BinStatistics>,
    /// Vacuum and Raman parts of the bin covariance.
    pub covariance: Option<ObservableCovariance>,
    pub sweeps: Vec<SqueezeCurve>,
    pub map: Option<CorrelationMap>,
    pub green: Option<LinearizedRun>,
    pub elapsed_s: f64,
}

impl EnergyAnalysis {
    pub fn sweep(&self, kind: FilterKind) -> Option<&SqueezeCurve> {
        self.sweeps.iter().find(|c| c.kind == kind)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub kind: FilterKind,
    pub best_edge_nm: Option<f64>,
    pub best_fano: Option<f64>,
    pub best_fano_db: Option<f64>,
    /// The same point as seen by a detector of the configured efficiency.
    pub best_fano_db_at_efficiency: Option<f64>,
    pub edges_below_shot_noise: usize,
    pub gaps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergySummary {
    #[serde(rename = "energy_pJ")]
    pub energy_pj: f64,
    pub steps: usize,
    pub total_photons: f64,
    pub detected_photons: Option<f64>,
    pub raman_peak_nm: Option<f64>,
    pub width_20db_nm: Option<(f64, f64)>,
    pub detection_band_fano_db: Option<f64>,
    pub sweeps: Vec<SweepSummary>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub notes: Vec<String>,
    pub efficiency: f64,
    pub deterministic: bool,
    pub energies: Vec<EnergySummary>,
    pub runtime_s: f64,
    pub files: Vec<String>,
    pub version: &'static str,
}

#[derive(Debug)]
pub struct ScenarioOutcome {
    pub directory: PathBuf,
    pub summary: RunSummary,
    pub analyses: Vec<EnergyAnalysis>,
}

/// Propagates one launch energy and evaluates every requested measurement,
/// without touching the file system.
pub fn analyze_energy(config: &ScenarioConfig, energy_pj: f64) -> Result<EnergyAnalysis, RunError> {
    let start = Instant::now();
    let grid = config.grid().at("grid", "new")?;
    let spec = config.fiber_spec().at("fiber", "make_mf_spec")?;
    let input = config.input_pulse(&grid, energy_pj).at("grid", "input_pulse")?;
    let opts = config.solver_options();
    let q = &config.quantum;
    let m = &config.measurement;

    let mut analysis = EnergyAnalysis {
        energy_pj,
        steps: 0,
        output: input.clone(),
        spectrum: spectrum(&input),
        snapshots: Vec::new(),
        bins: None,
        stats: None,
        covariance: None,
        sweeps: Vec::new(),
        map: None,
        green: None,
        elapsed_s: 0.0,
    };

    if !q.enabled || opts.record_interval_m.is_some() {
        let prop = propagate(&input, &spec, &opts).at("propagate", "propagate")?;
        analysis.steps = prop.steps.len();
        analysis.output = prop.output;
        analysis.snapshots = prop.snapshots;
    }

    if q.enabled {
        let model = GnlseModel::new(&spec, &grid).at("model", "new")?;
        let traj = propagate_recorded(&model, &input, spec.length_m, &opts)
            .at("propagate", "propagate_recorded")?;
        let bins = FrequencyBins::uniform_wavelength(&grid, q.band_lo_nm, q.band_hi_nm, q.bin_width_nm)
            .at("spectral", "uniform_wavelength")?;
        let photons = photon_number_spectrum(&traj.output, &bins).at("spectral", "photon_number_spectrum")?;
        let cov = bin_covariance(&model, &traj, &bins, config.noise_options())
            .at("quantum", "bin_covariance")?;
        let stats = BinStatistics::new(bins.center_wavelengths(), photons, cov.total())
            .at("measurement", "bin_statistics")?
            .with_detection(config.detection_filter().at("measurement", "detection_filter")?);
        for &kind in &m.sweeps {
            analysis
                .sweeps
                .push(stats.sweep(kind, &m.edges_nm).at("measurement", "filter_sweep")?);
        }
        if m.correlation_map {
            analysis.map = Some(
                correlation_map(&stats.covariance, &stats.centers_nm, m.coarse_bins, m.map_lo_nm, m.map_hi_nm)
                    .at("measurement", "correlation_map")?,
            );
        }
        if q.export_green {
            analysis.green = Some(
                linearized_propagate(&input, &spec, &opts, config.noise_options())
                    .at("quantum", "linearized_propagate")?,
            );
        }
        analysis.steps = traj.steps();
        analysis.output = traj.output;
        analysis.bins = Some(bins);
        analysis.stats = Some(stats);
        analysis.covariance = Some(cov);
    }
    analysis.spectrum = spectrum(&analysis.output);
    analysis.elapsed_s = start.elapsed().as_secs_f64();
    Ok(analysis)
}

fn summarize(config: &ScenarioConfig, a: &EnergyAnalysis) -> EnergySummary {
    let eta = config.measurement.efficiency;
    let (_, hi) = a.output.grid().wavelength_span();
    let detection = config.detection_filter().ok();
    let sweeps = a
        .sweeps
        .iter()
        .map(|c| {
            let best = c.best();
            let fano = best.and_then(|p| p.fano);
            SweepSummary {
                kind: c.kind,
                best_edge_nm: best.map(|p| p.edge_nm),
                best_fano: fano,
                best_fano_db: fano.map(to_db),
                best_fano_db_at_efficiency: fano
                    .and_then(|f| apply_detection_efficiency(f, eta).ok())
                    .map(to_db),
                edges_below_shot_noise: c.points.iter().filter(|p| p.fano.is_some_and(|f| f < 1.0)).count(),
                gaps: c.gaps().count(),
            }
        })
        .collect();
    let (detected, band_fano) = match (&a.stats, &detection) {
        (Some(s), Some(d)) => (Some(s.mean(d)), s.fano(d).ok().map(to_db)),
        _ => (None, None),
    };
    EnergySummary {
        energy_pj: a.energy_pj,
        steps: a.steps,
        total_photons: total_photons(&a.output),
        detected_photons: detected,
        raman_peak_nm: a.spectrum.peak_wavelength_in(config.fiber.zero_gvd_nm, hi),
        width_20db_nm: a.spectrum.width_at(20.0),
        detection_band_fano_db: band_fano,
        sweeps,
        runtime_s: a.elapsed_s,
    }
}

fn energy_tag(e: f64) -> String {
    format!("{e}pJ")
}

fn write_energy(out: &mut OutputDir, config: &ScenarioConfig, a: &EnergyAnalysis) -> crate::Result<()> {
    let tag = energy_tag(a.energy_pj);
    let eta = config.measurement.efficiency;
    let db = a.spectrum.db_relative();
    out.write_csv(
        &format!("spectrum_{tag}.csv"),
        None,
        &["wavelength_nm", "density_pJ_per_nm", "relative_dB"],
        (0..a.spectrum.wavelength_nm.len()).map(|i| {
            vec![
                num(a.spectrum.wavelength_nm[i]),
                num(a.spectrum.density[i]),
                num(db[i]),
            ]
        }),
    )?;

    if !a.snapshots.is_empty() {
        let header = json!({ "energy_pJ": a.energy_pj, "config": config });
        let rows = a.snapshots.iter().flat_map(|(z, env)| {
            let s = spectrum(env);
            (0..s.wavelength_nm.len())
                .map(|i| vec![num(*z), num(s.wavelength_nm[i]), num(s.density[i])])
                .collect::<Vec<_>>()
        });
        out.write_csv(
            &format!("snapshots_{tag}.csv"),
            Some(&header),
            &["z_m", "wavelength_nm", "density_pJ_per_nm"],
            rows,
        )?;
    }

    if let (Some(stats), Some(bins)) = (&a.stats, &a.bins) {
        let rows = (0..stats.len()).map(|i| {
            let (lo, hi) = bins.wavelength_range(i).unwrap_or((f64::NAN, f64::NAN));
            let var = stats.covariance[(i, i)];
            let n = stats.photons[i];
            vec![
                num(stats.centers_nm[i]),
                num(lo),
                num(hi),
                num(n),
                num(var),
                if n > 0.0 { num(var / n) } else { String::new() },
            ]
        });
        out.write_csv(
            &format!("bins_{tag}.csv"),
            None,
            &["center_nm", "lo_nm", "hi_nm", "photons", "variance", "fano"],
            rows,
        )?;
    }

    for c in &a.sweeps {
        let rows = c.points.iter().map(|p| {
            vec![
                num(p.edge_nm),
                opt_num(p.fano),
                opt_num(p.fano_db),
                opt_num(
                    p.fano
                        .and_then(|f| apply_detection_efficiency(f, eta).ok())
                        .map(to_db),
                ),
                p.gap.clone().unwrap_or_default(),
            ]
        });
        let name = format!("squeeze_{}_{tag}", c.kind.label());
        out.write_csv(
            &format!("{name}.csv"),
            None,
            &["edge_nm", "fano", "fano_dB", "fano_dB_at_efficiency", "gap"],
            rows,
        )?;
        out.write_text(
            &format!("{name}.svg"),
            &squeeze_svg(&[c], &format!("{} sweep, {} pJ", c.kind.label(), a.energy_pj)),
        )?;
    }

    if let Some(map) = &a.map {
        let centers = map.centers_nm();
        let mut columns = vec!["center_nm".to_string()];
        columns.extend(centers.iter().map(|c| num(*c)));
        let cols: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
        let rows = (0..map.len()).map(|i| {
            let mut r = vec![num(centers[i])];
            r.extend((0..map.len()).map(|j| opt_num(map.get(i, j))));
            r
        });
        out.write_csv(&format!("correlation_{tag}.csv"), None, &cols, rows)?;
        out.write_text(
            &format!("correlation_{tag}.svg"),
            &correlation_svg(map, &format!("photon-number correlation, {} pJ", a.energy_pj)),
        )?;
    }

    if let Some(run) = &a.green {
        write_green(out, config, a.energy_pj, run)?;
    }
    Ok(())
}

fn write_green(out: &mut OutputDir, config: &ScenarioConfig, energy_pj: f64, run: &LinearizedRun) -> crate::Result<()> {
    let tag = energy_tag(energy_pj);
    let g = &run.green;
    let n = g.n_modes();
    let rows = (0..n).flat_map(|i| {
        (0..n)
            .map(|j| {
                let (mu, nu) = (g.mu()[(i, j)], g.nu()[(i, j)]);
                vec![
                    i.to_string(),
                    j.to_string(),
                    num(mu.re),
                    num(mu.im),
                    num(nu.re),
                    num(nu.im),
                ]
            })
            .collect::<Vec<_>>()
    });
    out.write_csv(
        &format!("green_{tag}.csv"),
        None,
        &["row", "col", "mu_re", "mu_im", "nu_re", "nu_im"],
        rows,
    )?;
    let sigma = quadrature_covariance(g, &run.ledger);
    let columns: Vec<String> = (0..n)
        .map(|k| format!("x{k}"))
        .chain((0..n).map(|k| format!("y{k}")))
        .collect();
    let cols: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    out.write_csv(
        &format!("covariance_{tag}.csv"),
        None,
        &cols,
        (0..2 * n).map(|i| (0..2 * n).map(|j| num(sigma[(i, j)])).collect()),
    )?;
    let (r1, r2) = g.symplectic_residuals();
    let spec = config.fiber_spec()?;
    out.write_json(
        &format!("green_{tag}.json"),
        &json!({
            "basis": "FFT bins in photon units, fft order; covariance ordered (x_0..x_{N-1}, y_0..y_{N-1}), δa = x + i·y, vacuum 1/4",
            "grid": g.grid(),
            "fiber": spec,
            "solver": config.solver_options(),
            "noise": config.noise_options(),
            "energy_pJ": energy_pj,
            "steps": run.trajectory.steps(),
            "symplectic_residuals": [r1, r2],
            "version": env!("CARGO_PKG_VERSION"),
        }),
    )?;
    Ok(())
}

/// Runs a validated scenario into `root/<output.directory>`.
///
/// A failed validation writes nothing. A later failure leaves `error.json`
/// next to whatever was already written.
pub fn run_scenario(config: &ScenarioConfig, root: &Path) -> Result<ScenarioOutcome, RunError> {
    let start = Instant::now();
    config.validate().at("scenario", "validate")?;
    let dir = root.join(&config.output.directory);
    let mut out = OutputDir::create(&dir).at("scenario", "create_output")?;
    let result = run_into(config, &mut out, start);
    if let Err(e) = &result {
        let _ = out.write_json("error.json", &e.report());
    }
    result.map(|(summary, analyses)| ScenarioOutcome {
        directory: dir,
        summary,
        analyses,
    })
}

fn run_into(
    config: &ScenarioConfig,
    out: &mut OutputDir,
    start: Instant,
) -> Result<(RunSummary, Vec<EnergyAnalysis>), RunError> {
    out.write_json("config.json", config).at("scenario", "write_config")?;
    let mut analyses = Vec::new();
    let mut energies = Vec::new();
    for &e in &config.input.energies_pj {
        let a = analyze_energy(config, e)?;
        write_energy(out, config, &a).at("scenario", "write_results")?;
        energies.push(summarize(config, &a));
        analyses.push(a);
    }
    let mut files: Vec<String> = out
        .written()
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    files.push("summary.json".into());
    let summary = RunSummary {
        scenario: config.name.clone(),
        notes: config.notes.clone(),
        efficiency: config.measurement.efficiency,
        deterministic: config.output.deterministic,
        energies,
        runtime_s: start.elapsed().as_secs_f64(),
        files,
        version: env!("CARGO_PKG_VERSION"),
    };
    out.write_json("summary.json", &summary).at("scenario", "write_summary")?;
    Ok((summary, analyses))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        c.name = "small".into();
        c.output.directory = "small".into();
        c.grid.n_points = 128;
        c.grid.time_window_ps = 0.6;
        c.fiber.length_m = 0.01;
        c.input.energies_pj = vec![20.0];
        c.input.delay_ps = 0.0;
        c.solver.scheme = crate::scenario::config::SolverKind::Fixed;
        c.solver.fixed_steps = 20;
        c.quantum.bin_width_nm = 10.0;
        c.quantum.export_green = true;
        c.measurement.coarse_bins = 6;
        c
    }

    #[test]
    fn invalid_config_writes_nothing() {
        let root = tempfile::tempdir().unwrap();
        let mut c = small();
        c.grid.n_points = 100;
        let err = run_scenario(&c, root.path()).unwrap_err();
        assert!(err.is_validation());
        assert!(err.report()["violations"][0].as_str().unwrap().contains("power of two"));
        assert_eq!(std::fs::read_dir(root.path()).unwrap().count(), 0);
    }

    #[test]
    fn runtime_failure_leaves_error_report() {
        let root = tempfile::tempdir().unwrap();
        let mut c = small();
        c.quantum.enabled = false;
        c.quantum.export_green = false;
        c.measurement.sweeps.clear();
        c.measurement.correlation_map = false;
        c.grid.n_points = 64;
        c.grid.time_window_ps = 0.3;
        c.input.energies_pj = vec![2000.0];
        c.fiber.length_m = 0.3;
        c.solver.fixed_steps = 50;
        let err = run_scenario(&c, root.path()).unwrap_err();
        assert!(!err.is_validation());
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(root.path().join("small/error.json")).unwrap()).unwrap();
        assert_eq!(report["module"], "propagate");
        assert!(report["z_m"].as_f64().is_some());
    }

    #[test]
    fn small_run_writes_bundle_inside_root() {
        let root = tempfile::tempdir().unwrap();
        let outcome = run_scenario(&small(), root.path()).unwrap();
        let dir = root.path().join("small");
        for f in [
            "config.json",
            "summary.json",
            "spectrum_20pJ.csv",
            "bins_20pJ.csv",
            "squeeze_low_pass_20pJ.csv",
            "squeeze_high_pass_20pJ.svg",
            "correlation_20pJ.csv",
            "correlation_20pJ.svg",
            "green_20pJ.csv",
            "green_20pJ.json",
            "covariance_20pJ.csv",
        ] {
            assert!(dir.join(f).exists(), "{f} missing");
        }
        let entries: Vec<_> = std::fs::read_dir(root.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);
        assert_eq!(outcome.summary.energies.len(), 1);
        let run = outcome.analyses[0].green.as_ref().unwrap();
        assert_eq!(run.green.n_modes(), 128);
    }

    #[test]
    fn config_echo_reproduces_identical_csvs() {
        let mut c = small();
        c.quantum.export_green = false;
        c.solver.snapshot_interval_m = Some(0.005);
        let first = tempfile::tempdir().unwrap();
        run_scenario(&c, first.path()).unwrap();
        let echo = ScenarioConfig::load(first.path().join("small/config.json").to_str().unwrap()).unwrap();
        assert_eq!(echo, c);
        let second = tempfile::tempdir().unwrap();
        run_scenario(&echo, second.path()).unwrap();
        let mut compared = 0;
        for entry in std::fs::read_dir(first.path().join("small")).unwrap() {
            let name = entry.unwrap().file_name();
            if name.to_string_lossy().ends_with(".csv") {
                let a = std::fs::read(first.path().join("small").join(&name)).unwrap();
                let b = std::fs::read(second.path().join("small").join(&name)).unwrap();
                assert!(a == b, "{name:?} differs");
                compared += 1;
            }
        }
        assert!(compared >= 6, "{compared}");
    }
}
