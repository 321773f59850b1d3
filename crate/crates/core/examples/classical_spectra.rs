//! Output spectra of the default fiber for several launch energies: the
//! Raman soliton moves red and the spectrum widens as the energy grows.
//!
//! `cargo run --release --example classical_spectra -- 63 112 118`

use fibersqueeze::scenario::{analyze_energy, ScenarioConfig};

fn main() {
    let energies: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut config = ScenarioConfig::builtin("fig1").expect("builtin");
    if !energies.is_empty() {
        config.input.energies_pj = energies;
    }
    println!("{:>8} {:>8} {:>16} {:>12}", "pJ", "steps", "-20 dB span nm", "Raman nm");
    for &e in &config.input.energies_pj {
        match analyze_energy(&config, e) {
            Ok(a) => {
                let (_, red) = a.output.grid().wavelength_span();
                let span = a.spectrum.width_at(20.0).map(|(lo, hi)| format!("{lo:.0}-{hi:.0}"));
                let peak = a.spectrum.peak_wavelength_in(config.fiber.zero_gvd_nm, red);
                println!(
                    "{e:>8} {:>8} {:>16} {:>12.1}",
                    a.steps,
                    span.unwrap_or_default(),
                    peak.unwrap_or(f64::NAN)
                );
            }
            Err(err) => eprintln!("{e} pJ failed: {err}"),
        }
    }
}
