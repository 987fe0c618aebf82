use std::process::Command;

fn fracdisp(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fracdisp")).args(args).output().unwrap()
}

#[test]
fn omega_prints_seventeen_digits() {
    let out = fracdisp(&["omega", "--b", "0.5"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0.050660591821168902");
}

#[test]
fn talbot_table_contains_zero_atom() {
    let dir = std::env::temp_dir().join(format!("fracdisp-talbot-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("talbot.csv");
    let out = fracdisp(&["talbot", "--b", "0.25", "--qmax", "40", "--window", "0,1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,weight\n"));
    assert!(text.lines().any(|l| l.starts_with("0,-0.1067521")));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    for args in [
        &["regular", "--b", "0.5", "--eps", "0.125", "--y", "0,1,5", "--nmax", "2", "--format", "json"][..],
        &["hb", "--b", "0.25", "--y", "0,3,4"][..],
        &["limit-k", "--b", "0.5", "--k", "200"][..],
    ] {
        let a = fracdisp(args);
        let b = fracdisp(args);
        assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn spectrum_file_is_read_back_exactly() {
    let dir = std::env::temp_dir().join(format!("fracdisp-atoms-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("atoms.json");
    let spec = fracdisp::scatdata::AtomicSpectrum::truncated_comb(2.5, 2).unwrap();
    std::fs::write(&path, spec.to_json()).unwrap();
    let from_file = fracdisp(&["decompose", "--eps", "0.05", "--atoms", path.to_str().unwrap()]);
    let from_flags = fracdisp(&["decompose", "--eps", "0.05", "--k", "2.5", "--nmax", "2"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_flags.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(fracdisp(&["alpha", "--b", "0.5", "--r", "0"]).status.code(), Some(2));
    assert_eq!(fracdisp(&["regular", "--b", "0.5", "--eps", "0.3", "--nmax", "2"]).status.code(), Some(2));
    assert_eq!(fracdisp(&["decompose", "--eps", "0.1", "--atoms", "/nonexistent/a.json"]).status.code(), Some(3));
    assert_eq!(fracdisp(&["bogus"]).status.code(), Some(2));
}
