//! The transform Phi_b(tau) of a parabola blows up like a constant times |tau|^{-1-2b}
//! at the origin. The constant is read off by Wynn extrapolation.

use fracdisp::dispersion::{phi_hat, singular_limit};
use fracdisp::scatdata::ScatteringDensity;

fn main() -> fracdisp::Result<()> {
    let f = ScatteringDensity::parabola(2.0)?;
    for b in [0.25, 0.5] {
        println!("b = {b}");
        for tau in [0.1, 0.05, 0.025, 0.0125, 0.00625] {
            let v = phi_hat(&f, b, tau)?;
            println!("  tau = {tau:<6} Phi = {v:>14.9}  |tau|^(1+2b)|Phi| = {:.9}", tau.powf(1.0 + 2.0 * b) * v.abs());
        }
        let s = singular_limit(&f, b)?;
        println!("  predicted {:.9}, extrapolated {:.9}, unstable: {}", s.value, s.extrapolated, s.unstable);
    }
    Ok(())
}
