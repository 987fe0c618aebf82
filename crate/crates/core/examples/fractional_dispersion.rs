//! h_b(y) by the Frank double integral and by the spatial moment of the field.

use fracdisp::dispersion::{hb_direct, hb_frank};
use fracdisp::fieldquad::MomentOptions;
use fracdisp::scatdata::ScatteringDensity;

fn main() -> fracdisp::Result<()> {
    let f = ScatteringDensity::bump(2.0, 0.0, 1.0)?;
    let opts = MomentOptions::default();
    println!("{:>5} {:>5} {:>18} {:>18} {:>10}", "b", "y", "Frank", "direct", "rel diff");
    for b in [0.25, 0.5, 0.75] {
        for y in [0.0, 1.0, 5.0] {
            let a = hb_frank(&f, b, y)?;
            let d = hb_direct(&f, b, y, &opts)?.value;
            println!("{b:>5} {y:>5} {a:>18.12} {d:>18.12} {:>10.2e}", (a - d).abs() / d);
        }
    }
    Ok(())
}
