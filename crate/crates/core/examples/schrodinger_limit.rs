//! Rescaled Fourier atoms of R_k approach the frequency atoms of h_{b,per} as k grows,
//! measured in a negative Sobolev norm.

use fracdisp::schrlimit::{hbper_freq_atoms, rescaled_cutoff, rescaled_rk_atoms, sobolev_distance, SobolevParams};

fn main() -> fracdisp::Result<()> {
    let b = 0.5;
    let eps = 0.1;
    let params = SobolevParams::new(-0.75)?;
    let n_top = rescaled_cutoff(1e4, eps);
    let target = hbper_freq_atoms(b, (2 * n_top * n_top) as u64)?;
    println!("target: {} atoms", target.len());
    for k in [1e2, 3e2, 1e3, 3e3, 1e4] {
        let mu = rescaled_rk_atoms(b, k, eps)?;
        let d = sobolev_distance(&mu, &target, params)?;
        println!("k = {k:>7}: N = {:>3}, {:>5} atoms, distance {d:.6}", rescaled_cutoff(k, eps), mu.len());
    }
    Ok(())
}
