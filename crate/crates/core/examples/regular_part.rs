//! The bounded part R_b of a mollified comb and its limit as the mollifier shrinks.

use fracdisp::periodic::{l1_bound, rb_hat_atoms, regular_limit, regular_part_eps, singular_part};
use fracdisp::scatdata::{AtomicSpectrum, BumpProfile, NormMode};

fn main() -> fracdisp::Result<()> {
    let atoms = AtomicSpectrum::truncated_comb(2.5, 2)?;
    let bump = BumpProfile::standard(NormMode::UnitIntegral);
    let b = 0.5;
    let y = 0.3;

    let lim = regular_limit(&atoms, b, y)?;
    println!("R_b({y}) limit = {lim:.10}");
    for eps in [0.125, 0.0625, 0.03125, 0.015625] {
        let r = regular_part_eps(&atoms, &bump, eps, b, y)?;
        let s = singular_part(&atoms, &bump, eps, b, y)?;
        println!("  eps = {eps:<9} R = {r:.10} (error {:.2e}), singular part {s:.6}", (r - lim).abs());
    }

    let hat = rb_hat_atoms(&atoms, b)?;
    println!("\nFourier atoms of R_b ({} atoms, total variation {:.6} <= bound {:.6}):", hat.len(), hat.total_variation(), l1_bound(&atoms, b)?);
    print!("{}", hat.to_csv());
    Ok(())
}
