//! Mollified Dirac comb at b = 1: the blow-up c/eps^2 separates from a stable part.

use fracdisp::periodic::h1_periodic_decompose;
use fracdisp::scatdata::{AtomicSpectrum, BumpProfile, NormMode};

fn main() -> fracdisp::Result<()> {
    let atoms = AtomicSpectrum::truncated_comb(2.5, 2)?;
    let bump = BumpProfile::standard(NormMode::UnitL2);
    println!("{:>7} {:>16} {:>16} {:>12} {:>12}", "eps", "total", "singular", "remainder", "stable");
    for eps in [0.1, 0.05, 0.025, 0.0125] {
        let d = h1_periodic_decompose(&atoms, &bump, eps, 1.0)?;
        println!(
            "{eps:>7} {:>16.8} {:>16.8} {:>12.8} {:>12.8}",
            d.total,
            d.singular_value,
            d.remainder(),
            d.stable_value
        );
    }
    Ok(())
}
