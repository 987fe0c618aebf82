//! The constants every other module leans on.

use fracdisp::schrlimit::{coeff_a, coeff_alpha};
use fracdisp::specfun::{frank_constant, gamma_real, omega, zeta};

fn main() -> fracdisp::Result<()> {
    println!("Gamma(0.5)^2 = {:.15}  (pi = {:.15})", gamma_real(0.5)?.powi(2), std::f64::consts::PI);
    println!("zeta(2)      = {:.15}", zeta(2.0)?);
    println!();
    println!("{:>5} {:>20} {:>20}", "b", "omega_b", "Frank constant");
    for b in [0.1, 0.25, 0.5, 0.75, 0.9] {
        println!("{b:>5} {:>20.15} {:>20.15}", omega(b)?, frank_constant(b)?);
    }
    println!();
    println!("a_0.25(q) for q = 1..8:");
    for q in 1..=8 {
        print!(" {:.6}", coeff_a(q, 0.25)?);
    }
    println!();
    println!("alpha_0.5(r) for r = 1..8:");
    for r in 1..=8 {
        print!(" {:.6}", coeff_alpha(r, 0.5)?);
    }
    println!();
    Ok(())
}
