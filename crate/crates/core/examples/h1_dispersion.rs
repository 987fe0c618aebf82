//! h_1(y) is a quadratic in y. Compare the closed form with the direct spatial moment.

use fracdisp::dispersion::{h1_direct, h1_polynomial};
use fracdisp::fieldquad::MomentOptions;
use fracdisp::scatdata::ScatteringDensity;

fn main() -> fracdisp::Result<()> {
    let f = ScatteringDensity::parabola(2.0)?;
    let p = h1_polynomial(&f)?;
    println!("h1(y) = {:.10} + {:.3e} y + {:.10} y^2, minimum at y = {:.3e}", p.c0, p.c1, p.c2, p.argmin());

    let opts = MomentOptions::default();
    for y in [0.0, 0.5, 1.0, 2.0] {
        let d = h1_direct(&f, y, &opts)?;
        println!(
            "y = {y:>4}: closed form {:.10}, direct {:.10} (window {:.0}, tail {:.1e})",
            p.eval(y),
            d.value,
            d.window,
            d.tail
        );
    }

    let chirped = ScatteringDensity::chirped_bump(2.0, 0.3, 1.0, 0.4)?;
    let q = h1_polynomial(&chirped)?;
    println!("\nchirped bump: linear term {:.6}, focus at y = {:.6}", q.c1, q.argmin());
    Ok(())
}
