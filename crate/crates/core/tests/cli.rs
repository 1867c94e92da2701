use std::path::Path;
use std::process::{Command, Output};

fn epmodes(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epmodes")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const TWO_LEVEL: &str = "[model]\ntype = two_level\ngamma = 2\n[sweep]\ndelta_range = -1:1:0.05\n[output]\nsvg = plot.svg\n";

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = epmodes(&["selftest"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.lines().count() >= 5 && stdout.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn sweep_writes_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tl.cfg", TWO_LEVEL);
    let mut tables = Vec::new();
    for sub in ["a", "b"] {
        let out = epmodes(&["sweep", "-c", "tl.cfg", "-o", sub, "--no-timestamp"], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains("peak petermann mode 0: 0 "));
        assert!(dir.path().join(sub).join("plot.svg").exists());
        tables.push(std::fs::read(dir.path().join(sub).join("sweep.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
    assert!(tables[0].starts_with(b"delta,mode,"));

    let out = epmodes(&["sweep", "-c", "tl.cfg", "-o", "c"], dir.path());
    assert!(out.status.success());
    let stamped = std::fs::read_to_string(dir.path().join("c/sweep.csv")).unwrap();
    assert!(stamped.starts_with("# generated at"));
    assert_eq!(stamped.split_once('\n').unwrap().1.as_bytes(), &tables[0][..]);
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tl.cfg", TWO_LEVEL);
    let out = epmodes(
        &["sweep", "-c", "tl.cfg", "--set", "sweep.delta_range=-0.5:0.5:0.25", "--set", "output.csv=x.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("out/x.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 5 * 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "bins.cfg", "[model]\ntype = two_level\n[analysis]\nn_bins = -3\n");
    write(p, "key.cfg", "[model]\ntype = two_level\nflavour = 1\n");
    write(
        p,
        "fail.cfg",
        "[model]\ntype = cavity_closed\nh = 0.1\n[sweep]\nvalues = 0.1, 0.2\ntol = 1e-30\nmax_iter = 1\n",
    );
    let code = |args: &[&str]| epmodes(args, p).status.code();
    let bins = epmodes(&["sweep", "-c", "bins.cfg"], p);
    assert_eq!(bins.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bins.stderr).contains("n_bins"));
    let key = epmodes(&["sweep", "-c", "key.cfg"], p);
    assert_eq!(key.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&key.stderr).contains("model.flavour"));
    assert_eq!(code(&["sweep", "-c", "missing.cfg"]), Some(4));
    assert_eq!(code(&["sweep", "-c", "fail.cfg"]), Some(3));
    assert_eq!(code(&["analyze", "missing.epmode"]), Some(4));
    assert_eq!(code(&["sweep"]), Some(2));
}

#[test]
fn solve_then_analyze_matches_sweep_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "one.cfg", "[model]\ntype = two_level\ngamma = 1.3\n[sweep]\nvalues = -0.3\n");
    assert!(epmodes(&["sweep", "-c", "one.cfg", "--no-timestamp"], p).status.success());
    assert!(epmodes(&["solve", "-c", "one.cfg", "--param", "-0.3", "-o", "modes"], p).status.success());
    let out = epmodes(&["analyze", "modes/mode_0.epmode", "modes/mode_1.epmode"], p);
    assert!(out.status.success());
    let swept = std::fs::read_to_string(p.join("out/sweep.csv")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), swept);
}

#[test]
fn plot_from_table() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "tl.cfg", TWO_LEVEL);
    assert!(epmodes(&["sweep", "-c", "tl.cfg"], p).status.success());
    let ok = epmodes(
        &["plot", "out/sweep.csv", "-o", "k.svg", "--left", "r2", "--right", "renyi_2,s_folded", "--marker-peak", "petermann"],
        p,
    );
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let svg = std::fs::read_to_string(p.join("k.svg")).unwrap();
    assert!(svg.contains("class=\"marker\"") && svg.contains("renyi_2 (mode 1)"));
    let missing = epmodes(&["plot", "out/sweep.csv", "-o", "x.svg", "--left", "linewidth", "--right", ""], p);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("linewidth"));
}
