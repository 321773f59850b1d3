//! Photon-number correlations between spectral slices of the output pulse,
//! printed as a table and written as an SVG heat map.
//!
//! `cargo run --release --example correlation_map -- [energy_pJ] [out.svg]`

use fibersqueeze::scenario::{analyze_energy, correlation_svg, ScenarioConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let energy = args.first().and_then(|a| a.parse().ok()).unwrap_or(118.0);
    let mut config = ScenarioConfig::builtin("default").expect("builtin");
    config.measurement.sweeps.clear();
    let a = match analyze_energy(&config, energy) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let map = a.map.as_ref().unwrap();
    let centers = map.centers_nm();
    print!("{:>6}", "");
    for c in &centers {
        print!("{c:>6.0}");
    }
    println!();
    for (i, c) in centers.iter().enumerate() {
        print!("{c:>6.0}");
        for j in 0..centers.len() {
            match map.get(i, j) {
                Some(r) => print!("{r:>6.2}"),
                None => print!("{:>6}", "-"),
            }
        }
        println!();
    }
    if let Some(path) = args.get(1) {
        std::fs::write(path, correlation_svg(map, &format!("{energy} pJ"))).expect("write svg");
        println!("wrote {path}");
    }
}
