//! The normalized product |y|^{-2b} h_b(y) h_b(0) against its large-y limit.

use fracdisp::dispersion::uncertainty_product_with;
use fracdisp::scatdata::{regularity_report, ScatteringDensity};

fn main() -> fracdisp::Result<()> {
    let f = ScatteringDensity::bump(2.0, 0.0, 1.0)?;
    let b = 0.5;
    let report = regularity_report(&f, b)?;
    println!("moments: spatial {:.6}, spectral {:.6}, singular {:.6}", report.m_spatial, report.m_spectral, report.m_singular);
    for y in [5.0, 10.0, 25.0, 50.0] {
        let u = uncertainty_product_with(&f, b, y, &report)?;
        println!(
            "y = {y:>4}: product {:.8}, limit {:.8}, deviation {:.2e}",
            u.product, u.predicted_limit, u.deviation
        );
    }
    Ok(())
}
