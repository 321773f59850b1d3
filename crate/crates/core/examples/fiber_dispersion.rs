//! Dispersion of the default microstructure fiber: GVD across the band,
//! the zero-GVD crossing and the soliton order of the launched pulse.

use fibersqueeze::grid::{sech_peak_power, SECH_FWHM_FACTOR};
use fibersqueeze::{make_mf_spec, MfConfig};

fn main() -> fibersqueeze::Result<()> {
    let config = MfConfig::default();
    let spec = make_mf_spec(&config)?;
    println!("beta2..beta5 at {} nm: {:?} ps^n/m", config.carrier_nm, spec.beta);
    println!("{:>8} {:>14}", "nm", "beta2 ps^2/km");
    for lambda in (700..=1000).step_by(25) {
        let b2 = spec.beta2_at_wavelength(lambda as f64, config.carrier_nm);
        println!("{lambda:>8} {:>14.3}", b2 * 1e3);
    }
    let (fwhm, energy) = (38.0, 118.0);
    let t0 = fwhm * 1e-3 / SECH_FWHM_FACTOR;
    let n = spec.soliton_number(sech_peak_power(energy, fwhm), t0, 0.0);
    println!("{energy} pJ, {fwhm} fs sech: soliton order {n:.2}");
    Ok(())
}
