//! The atoms of h_{b,per}(2t) on rationals in [0, 1), as plot-ready CSV on stdout.
//! A duality check against the frequency series goes to stderr.
//!
//!     cargo run --release --example talbot_atoms > talbot.csv

use fracdisp::schrlimit::{duality_check, hbper_time_atoms};

fn main() -> fracdisp::Result<()> {
    let set = hbper_time_atoms(0.25, 40, (0.0, 1.0))?;
    print!("{}", set.to_csv());

    let d = duality_check(0.25, 200, 4000, 0.1, 0.3)?;
    eprintln!(
        "{} atoms; period mass {:.8}; duality: freq side {:.9} vs predicted {:.9} (rel {:.1e})",
        set.atoms.len(),
        set.period_mass(),
        d.freq_side,
        d.predicted_freq_side,
        d.rel_error
    );
    Ok(())
}
