//! Detector efficiency and the Fano factor: what a lossy detector sees, how
//! to undo it, and which efficiency links a measured/true pair.

use fibersqueeze::measurement::{apply_detection_efficiency, correct_detection_efficiency, efficiency_from_pair};
use fibersqueeze::units::{from_db, to_db};

fn main() -> fibersqueeze::Result<()> {
    let (measured, true_db) = (-4.6, -10.3);
    let eta = efficiency_from_pair(from_db(measured), from_db(true_db))?;
    println!("{measured} dB measured over {true_db} dB true implies efficiency {eta:.4}");
    for eta in [0.72, 0.75, 0.9] {
        let corrected = correct_detection_efficiency(from_db(measured), eta)?;
        println!("  corrected at {eta}: {:.2} dB", to_db(corrected));
    }
    println!("{:>8} {:>10} {:>10}", "true dB", "eta 0.75", "eta 0.5");
    for db in [-1.0, -3.0, -6.0, -10.0] {
        let f = from_db(db);
        println!(
            "{db:>8} {:>10.2} {:>10.2}",
            to_db(apply_detection_efficiency(f, 0.75)?),
            to_db(apply_detection_efficiency(f, 0.5)?)
        );
    }
    Ok(())
}
