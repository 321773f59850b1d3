use std::path::{Component, Path};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{make_mf_spec, FiberSpec, MfConfig};
use crate::grid::{gaussian_pulse, sech_pulse, Envelope, Grid};
use crate::measurement::{FilterKind, SpectralFilter};
use crate::propagate::SolverOptions;
use crate::quantum::NoiseOptions;
use crate::raman::RamanModel;

/// One experiment: grid, fiber, launched pulses, solver, quantum analysis,
/// measurement and where the results go. Every physical quantity carries its
/// unit in the key name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub name: String,
    /// Free-text remarks copied into the summary.
    pub notes: Vec<String>,
    pub grid: GridSection,
    pub fiber: FiberSection,
    pub input: InputSection,
    pub solver: SolverSection,
    pub quantum: QuantumSection,
    pub measurement: MeasurementSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n_points: usize,
    pub time_window_ps: f64,
    pub carrier_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberSection {
    pub length_m: f64,
    #[serde(rename = "gamma_per_W_m")]
    pub gamma_per_w_m: f64,
    pub zero_gvd_nm: f64,
    pub beta3_ps3_per_m: f64,
    pub beta4_ps4_per_m: f64,
    pub beta5_ps5_per_m: f64,
    pub raman_fraction: f64,
    pub raman_model: RamanModel,
    pub self_steepening: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Sech,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputSection {
    #[serde(rename = "energies_pJ")]
    pub energies_pj: Vec<f64>,
    pub fwhm_fs: f64,
    pub center_nm: f64,
    /// Launch time offset; negative values leave room for the red-shifting soliton.
    pub delay_ps: f64,
    pub shape: PulseShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub scheme: SolverKind,
    pub fixed_steps: usize,
    pub local_error_goal: f64,
    pub initial_step_m: f64,
    /// z spacing of spectral snapshots; absent means none are written.
    pub snapshot_interval_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantumSection {
    pub enabled: bool,
    pub raman_noise: bool,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
    pub bin_width_nm: f64,
    pub band_lo_nm: f64,
    pub band_hi_nm: f64,
    /// Full Green matrix and covariance export (small grids only).
    pub export_green: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementSection {
    pub sweeps: Vec<FilterKind>,
    pub edges_nm: Vec<f64>,
    pub correlation_map: bool,
    pub coarse_bins: usize,
    pub map_lo_nm: f64,
    pub map_hi_nm: f64,
    pub efficiency: f64,
    pub detection_lo_nm: f64,
    pub detection_hi_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Relative to the output root.
    pub directory: String,
    /// Fixed reduction order. All reductions are ordered, so this only gets recorded.
    pub deterministic: bool,
}

/// Largest grid for which the full Green matrix may be exported.
pub const GREEN_EXPORT_MAX_POINTS: usize = 256;

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            n_points: 1024,
            time_window_ps: 5.0,
            carrier_nm: 810.0,
        }
    }
}

impl Default for FiberSection {
    fn default() -> Self {
        let mf = MfConfig::default();
        FiberSection {
            length_m: mf.length_m,
            gamma_per_w_m: mf.gamma,
            zero_gvd_nm: mf.zero_gvd_nm,
            beta3_ps3_per_m: mf.beta3,
            beta4_ps4_per_m: mf.beta4,
            beta5_ps5_per_m: mf.beta5,
            raman_fraction: mf.raman_fraction,
            raman_model: mf.raman_model,
            self_steepening: mf.self_steepening,
        }
    }
}

impl Default for InputSection {
    fn default() -> Self {
        InputSection {
            energies_pj: vec![118.0],
            fwhm_fs: 38.0,
            center_nm: 810.0,
            delay_ps: -1.5,
            shape: PulseShape::Sech,
        }
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            scheme: SolverKind::Adaptive,
            fixed_steps: 1000,
            local_error_goal: 1e-6,
            initial_step_m: 1e-4,
            snapshot_interval_m: None,
        }
    }
}

impl Default for QuantumSection {
    fn default() -> Self {
        let noise = NoiseOptions::default();
        QuantumSection {
            enabled: true,
            raman_noise: noise.raman_noise,
            temperature_k: noise.temperature_k,
            bin_width_nm: 5.0,
            band_lo_nm: 700.0,
            band_hi_nm: 1000.0,
            export_green: false,
        }
    }
}

impl Default for MeasurementSection {
    fn default() -> Self {
        MeasurementSection {
            sweeps: vec![FilterKind::LowPass, FilterKind::HighPass],
            edges_nm: (0..=40).map(|i| 750.0 + 5.0 * i as f64).collect(),
            correlation_map: true,
            coarse_bins: 15,
            map_lo_nm: 700.0,
            map_hi_nm: 1000.0,
            efficiency: 0.75,
            detection_lo_nm: 750.0,
            detection_hi_nm: 950.0,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: "default".into(),
            deterministic: true,
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "default".into(),
            notes: Vec::new(),
            grid: GridSection::default(),
            fiber: FiberSection::default(),
            input: InputSection::default(),
            solver: SolverSection::default(),
            quantum: QuantumSection::default(),
            measurement: MeasurementSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Names accepted by [`ScenarioConfig::builtin`].
pub const BUILTIN_SCENARIOS: [&str; 5] = ["default", "fig1", "fig2a", "fig2b", "fig3"];

const ENERGY_NOTE: &str = "alternative launch energies: 120 pJ for the low-pass and \
     112 pJ for the high-pass measurement";

impl ScenarioConfig {
    pub fn builtin(name: &str) -> Option<Self> {
        let mut c = ScenarioConfig::default();
        c.name = name.into();
        c.output.directory = name.into();
        match name {
            "default" | "fig3" => {}
            "fig1" => {
                c.grid.n_points = 8192;
                c.grid.time_window_ps = 20.0;
                c.input.energies_pj = vec![63.0, 112.0, 118.0];
                c.input.delay_ps = 0.0;
                c.quantum.enabled = false;
                c.measurement.sweeps.clear();
                c.measurement.correlation_map = false;
            }
            "fig2a" => {
                c.input.energies_pj = vec![118.3];
                c.measurement.sweeps = vec![FilterKind::LowPass];
                c.measurement.correlation_map = false;
                c.notes.push(ENERGY_NOTE.into());
            }
            "fig2b" => {
                c.input.energies_pj = vec![111.7];
                c.measurement.sweeps = vec![FilterKind::HighPass];
                c.measurement.correlation_map = false;
                c.notes.push(ENERGY_NOTE.into());
            }
            _ => return None,
        }
        Some(c)
    }

    /// Parses TOML, or JSON when the text starts with `{` (the config echo).
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text).map_err(|e| Error::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            });
        }
        toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_column(text, s.start))
                .unwrap_or((0, 0));
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    /// Reads a config file, or a builtin scenario when `source` names one and
    /// no such file exists.
    pub fn load(source: &str) -> Result<Self> {
        let path = Path::new(source);
        if !path.exists() {
            if let Some(c) = Self::builtin(source) {
                return Ok(c);
            }
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n_points, self.grid.time_window_ps, self.grid.carrier_nm)
    }

    pub fn mf_config(&self) -> MfConfig {
        let f = &self.fiber;
        MfConfig {
            length_m: f.length_m,
            gamma: f.gamma_per_w_m,
            carrier_nm: self.grid.carrier_nm,
            zero_gvd_nm: f.zero_gvd_nm,
            beta3: f.beta3_ps3_per_m,
            beta4: f.beta4_ps4_per_m,
            beta5: f.beta5_ps5_per_m,
            raman_fraction: f.raman_fraction,
            raman_model: f.raman_model,
            self_steepening: f.self_steepening,
        }
    }

    pub fn fiber_spec(&self) -> Result<FiberSpec> {
        make_mf_spec(&self.mf_config())
    }

    pub fn input_pulse(&self, grid: &Grid, energy_pj: f64) -> Result<Envelope> {
        let i = &self.input;
        let pulse = match i.shape {
            PulseShape::Sech => sech_pulse(grid, energy_pj, i.fwhm_fs, i.center_nm)?,
            PulseShape::Gaussian => gaussian_pulse(grid, energy_pj, i.fwhm_fs, i.center_nm)?,
        };
        Ok(if i.delay_ps == 0.0 {
            pulse
        } else {
            pulse.delayed(i.delay_ps)
        })
    }

    pub fn solver_options(&self) -> SolverOptions {
        let s = &self.solver;
        let mut o = match s.scheme {
            SolverKind::Fixed => SolverOptions::fixed(s.fixed_steps),
            SolverKind::Adaptive => SolverOptions::adaptive(s.local_error_goal, s.initial_step_m),
        };
        if let Some(r) = s.snapshot_interval_m {
            o = o.with_record_interval(r);
        }
        o
    }

    pub fn noise_options(&self) -> NoiseOptions {
        NoiseOptions {
            raman_noise: self.quantum.raman_noise,
            temperature_k: self.quantum.temperature_k,
        }
    }

    pub fn detection_filter(&self) -> Result<SpectralFilter> {
        SpectralFilter::band(self.measurement.detection_lo_nm, self.measurement.detection_hi_nm)
    }

    /// Every violated precondition across all sections; empty when runnable.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.name.trim().is_empty() {
            v.push("scenario name must not be empty".into());
        }
        let grid = match self.grid() {
            Ok(g) => Some(g),
            Err(e) => {
                v.push(plain(e));
                None
            }
        };

        match self.fiber_spec() {
            Ok(spec) => {
                if !(spec.length_m > 0.0) {
                    v.push(format!("fiber length must be > 0 (got {} m)", spec.length_m));
                }
            }
            Err(e) => v.push(plain(e)),
        }

        let i = &self.input;
        if i.energies_pj.is_empty() {
            v.push("at least one launch energy is required".into());
        }
        for &e in &i.energies_pj {
            if !(e > 0.0 && e.is_finite()) {
                v.push(format!("launch energy must be > 0 (got {e} pJ)"));
            }
        }
        if !(i.fwhm_fs > 0.0 && i.fwhm_fs.is_finite()) {
            v.push(format!("pulse FWHM must be > 0 (got {} fs)", i.fwhm_fs));
        }
        if !i.delay_ps.is_finite() {
            v.push("launch delay must be finite".into());
        }
        if let Some(g) = &grid {
            let (lo, hi) = g.wavelength_span();
            if !g.contains_wavelength(i.center_nm) {
                v.push(format!(
                    "center wavelength {} nm lies outside the grid's Nyquist band ({lo:.1}-{hi:.1} nm)",
                    i.center_nm
                ));
            }
            if i.delay_ps.abs() >= 0.5 * g.time_window() {
                v.push(format!(
                    "launch delay {} ps does not fit in the {} ps window",
                    i.delay_ps,
                    g.time_window()
                ));
            }
        }

        v.extend(self.solver_options().violations(self.fiber.length_m));

        let q = &self.quantum;
        let m = &self.measurement;
        v.extend(self.noise_options().violations());
        if q.enabled {
            if !(q.bin_width_nm > 0.0) {
                v.push(format!("bin width must be > 0 (got {} nm)", q.bin_width_nm));
            }
            if !(q.band_lo_nm < q.band_hi_nm) {
                v.push("analysis band needs band_lo_nm < band_hi_nm".into());
            } else if let Some(g) = &grid {
                let (lo, hi) = g.wavelength_span();
                if q.band_lo_nm <= lo || q.band_hi_nm >= hi {
                    v.push(format!(
                        "analysis band {}-{} nm must lie inside the grid's Nyquist band ({lo:.1}-{hi:.1} nm)",
                        q.band_lo_nm, q.band_hi_nm
                    ));
                }
            }
            if q.export_green && self.grid.n_points > GREEN_EXPORT_MAX_POINTS {
                v.push(format!(
                    "Green matrix export needs n_points <= {GREEN_EXPORT_MAX_POINTS} (got {})",
                    self.grid.n_points
                ));
            }
        } else if !m.sweeps.is_empty() || m.correlation_map || q.export_green {
            v.push("filter sweeps, correlation maps and Green export need quantum.enabled = true".into());
        }

        if !(m.efficiency > 0.0 && m.efficiency <= 1.0) {
            v.push(format!("efficiency must lie in (0,1] (got {})", m.efficiency));
        }
        if !(m.detection_lo_nm < m.detection_hi_nm) {
            v.push("detection band needs detection_lo_nm < detection_hi_nm".into());
        }
        for k in &m.sweeps {
            if !matches!(k, FilterKind::LowPass | FilterKind::HighPass) {
                v.push(format!("sweeps support knife edges only (got {})", k.label()));
            }
        }
        if !m.sweeps.is_empty() && m.edges_nm.is_empty() {
            v.push("a filter sweep needs at least one edge".into());
        }
        if m.edges_nm.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            v.push("filter edges must be positive wavelengths".into());
        }
        if m.correlation_map {
            if m.coarse_bins < 2 {
                v.push(format!("correlation map needs >= 2 coarse bins (got {})", m.coarse_bins));
            }
            if !(m.map_lo_nm < m.map_hi_nm) {
                v.push("correlation map needs map_lo_nm < map_hi_nm".into());
            }
        }

        let dir = Path::new(&self.output.directory);
        if self.output.directory.is_empty()
            || dir.components().any(|c| !matches!(c, Component::Normal(_)))
        {
            v.push(format!(
                "output directory must be a relative path without '..' (got {:?})",
                self.output.directory
            ));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

/// Error message without the variant prefix.
fn plain(e: Error) -> String {
    match e {
        Error::Config(m) | Error::Domain(m) | Error::Contract(m) => m,
        other => other.to_string(),
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_builtins_are_valid() {
        for name in BUILTIN_SCENARIOS {
            let c = ScenarioConfig::builtin(name).unwrap();
            assert!(c.violations().is_empty(), "{name}: {:?}", c.violations());
        }
        assert!(ScenarioConfig::builtin("fig9").is_none());
    }

    #[test]
    fn shipped_files_match_builtins() {
        for (name, text) in [
            ("default", include_str!("../../scenarios/default.toml")),
            ("fig1", include_str!("../../scenarios/fig1.toml")),
            ("fig2a", include_str!("../../scenarios/fig2a.toml")),
            ("fig2b", include_str!("../../scenarios/fig2b.toml")),
            ("fig3", include_str!("../../scenarios/fig3.toml")),
        ] {
            assert_eq!(ScenarioConfig::parse(text).unwrap(), ScenarioConfig::builtin(name).unwrap(), "{name}");
        }
    }

    #[test]
    fn toml_round_trip() {
        let c = ScenarioConfig::builtin("fig2a").unwrap();
        assert_eq!(ScenarioConfig::parse(&c.to_toml()).unwrap(), c);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(ScenarioConfig::parse(&json).unwrap(), c);
    }

    #[test]
    fn partial_file_takes_defaults() {
        let c = ScenarioConfig::parse("name = \"x\"\n[input]\nenergies_pJ = [50.0]\n").unwrap();
        assert_eq!(c.input.energies_pj, vec![50.0]);
        assert_eq!(c.grid, GridSection::default());
    }

    #[test]
    fn violations_are_collected_together() {
        let mut c = ScenarioConfig::default();
        c.grid.n_points = 100;
        c.measurement.efficiency = 1.2;
        let v = c.violations();
        assert!(v.iter().any(|s| s.contains("power of two")));
        assert!(v.iter().any(|s| s.contains("efficiency must lie in (0,1]")));
    }

    #[test]
    fn blue_center_is_outside_the_default_band() {
        let mut c = ScenarioConfig::default();
        c.input.center_nm = 400.0;
        let g = c.grid().unwrap();
        let (lo, _) = g.wavelength_span();
        // dt = 5 ps / 1024, so the band's blue end sits at 2πc/(ω₀ + π/dt)
        let w0 = 2.0 * std::f64::consts::PI * crate::units::C_NM_PER_PS / 810.0;
        let nyq = std::f64::consts::PI / (5.0 / 1024.0);
        let oracle = 2.0 * std::f64::consts::PI * crate::units::C_NM_PER_PS / (w0 + nyq);
        assert!((lo - oracle).abs() < 1e-9);
        assert!(lo > 400.0);
        assert!(c.violations().iter().any(|s| s.contains("Nyquist band")));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = ScenarioConfig::parse("name = \"x\"\n[grid]\nn_points = \"many\"\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column >= 1);
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = ScenarioConfig::parse("[grid]\nbogus_key = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn output_directory_must_stay_inside_root() {
        let mut c = ScenarioConfig::default();
        c.output.directory = "../escape".into();
        assert!(c.violations().iter().any(|s| s.contains("output directory")));
        c.output.directory = "/tmp/abs".into();
        assert!(c.violations().iter().any(|s| s.contains("output directory")));
    }
}
