//! The outgoing field of a bump and its stationary-phase far field.

use fracdisp::fieldquad::{eval_field, far_field, FieldEvaluator};
use fracdisp::scatdata::ScatteringDensity;

fn main() -> fracdisp::Result<()> {
    let f = ScatteringDensity::bump(2.0, 0.0, 1.0)?;

    println!("{:>6} {:>14} {:>14} {:>12}", "y", "|u(0,y)|", "|far field|", "error");
    for y in [6.25, 12.5, 25.0, 50.0, 100.0] {
        let u = eval_field(&f, 0.0, y)?;
        let v = far_field(&f, 0.0, y)?;
        println!("{y:>6} {:>14.8} {:>14.8} {:>12.3e}", u.norm(), v.norm(), (u - v).norm());
    }

    // many points on one line: build the quadrature once
    let ev = FieldEvaluator::new(&f, 4.0, 3.0)?;
    let line = ev.line(3.0);
    println!("\n|u(x, 3)| with {} nodes:", ev.len());
    for i in 0..=8 {
        let x = -4.0 + i as f64;
        println!("  x = {x:>5}: {:.8}", line.eval(x).norm());
    }
    Ok(())
}
