//! Knife-edge sweeps on the default scenario: Fano factor behind a low-pass
//! and a high-pass edge stepped across the detection band.
//!
//! `cargo run --release --example filter_sweep -- [energy_pJ] [bin_width_nm]`
//! (a few minutes at the default 1024-point grid)

use fibersqueeze::measurement::{apply_detection_efficiency, FilterKind};
use fibersqueeze::scenario::{analyze_energy, ScenarioConfig};
use fibersqueeze::units::to_db;

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut config = ScenarioConfig::builtin("default").expect("builtin");
    config.measurement.correlation_map = false;
    let energy = args.first().copied().unwrap_or(118.0);
    if let Some(&w) = args.get(1) {
        config.quantum.bin_width_nm = w;
        config.measurement.edges_nm = (0..)
            .map(|i| 750.0 + w * i as f64)
            .take_while(|&e| e <= 950.0)
            .collect();
    }
    let a = match analyze_energy(&config, energy) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let eta = config.measurement.efficiency;
    let lp = a.sweep(FilterKind::LowPass).unwrap();
    let hp = a.sweep(FilterKind::HighPass).unwrap();
    println!("{:>8} {:>12} {:>12}", "edge nm", "low-pass dB", "high-pass dB");
    for (p, q) in lp.points.iter().zip(&hp.points) {
        let show = |x: Option<f64>| x.map(|d| format!("{d:.2}")).unwrap_or_else(|| "-".into());
        println!("{:>8} {:>12} {:>12}", p.edge_nm, show(p.fano_db), show(q.fano_db));
    }
    for c in [lp, hp] {
        if let Some(b) = c.best() {
            let f = b.fano.unwrap();
            println!(
                "best {}: {:.2} dB at {} nm; {:.2} dB through a detector of efficiency {eta}",
                c.kind.label(),
                to_db(f),
                b.edge_nm,
                to_db(apply_detection_efficiency(f, eta).unwrap())
            );
        }
    }
}
