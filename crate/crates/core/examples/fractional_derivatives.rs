//! Fractional derivatives on a grid, the fractional Leibniz bound and the
//! propagator multiplier bound.

use num_complex::Complex64;

use fracdisp::fieldquad::{frac_deriv_fourier, leibniz_sides, multiplier_bound_ratio, GridFunction};

fn main() -> fracdisp::Result<()> {
    let gauss = |x: f64| Complex64::new((-x * x).exp(), 0.0);
    let f = GridFunction::uniform(-12.0, 12.0, 1201, gauss)?;
    let g = GridFunction::uniform(-12.0, 12.0, 1201, |x| gauss(x - 0.5) * Complex64::new((3.0 * x).cos(), 0.0))?;

    let d = frac_deriv_fourier(&f, 0.5)?;
    println!("||D^0.5 f|| = {:.8}, aliasing warning: {}", d.values.l2_norm(), d.aliasing_warning());

    for b in [0.25, 0.5, 0.75] {
        let s = leibniz_sides(&f, &g, b)?;
        println!("b = {b}: ||D^b(fg) - f D^b g - g D^b f|| = {:.6} <= {:.6}", s.lhs, s.rhs);
    }

    for y in [0.5, 1.0, 2.0] {
        println!(
            "multiplier bound ratio at y = {y}: {:.6} (200 nodes), {:.6} (400 nodes)",
            multiplier_bound_ratio(y, 5.0, 0.5, 200)?,
            multiplier_bound_ratio(y, 5.0, 0.5, 400)?
        );
    }
    Ok(())
}
