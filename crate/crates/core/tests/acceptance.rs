//! One pass/fail line per acceptance criterion; exits non-zero if any fails.

use fracdisp::acceptance::{run, ALL};

fn main() {
    let mut failed = Vec::new();
    for id in ALL {
        let r = run(id);
        println!("{}", r.line());
        if !r.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", ALL.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
