use std::path::Path;
use std::process::{Command, Output};

use dcd_core::trace_io::{read_manifest, read_state, MANIFEST};
use dcd_core::Boundary;

fn dcd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcd")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn result_line(out: &Output) -> String {
    let stdout = String::from_utf8(out.stdout.clone()).unwrap();
    stdout.lines().find(|l| l.starts_with("RESULT ")).expect("RESULT line").to_string()
}

fn field(line: &str, key: &str) -> f64 {
    let prefix = format!("{key}=");
    line.split_whitespace().find_map(|w| w.strip_prefix(&prefix)).unwrap().parse().unwrap()
}

#[test]
fn solve_heat_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let run =
        dcd(&["solve", "--model", "heat", "--scheme", "explicit", "--cells", "128", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let entries = read_manifest(&out.join(MANIFEST)).unwrap();
    assert_eq!(entries.first().unwrap().t, 0.0);
    assert_eq!(entries.last().unwrap().t, 0.05);
    assert!(field(&result_line(&run), "l1_error") < 1e-3);
}

#[test]
fn solve_rejects_unknown_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&dcd(&["solve", "--model", "nosuch", "--out", out])), 2);
    assert_eq!(code(&dcd(&["solve", "--model", "heat", "--flux", "lf", "--out", out])), 2);
    assert_eq!(code(&dcd(&["solve", "--model", "advection", "--flux", "ab:0.5,0", "--out", out])), 2);
    assert_eq!(code(&dcd(&["solve", "--model", "heat", "--scheme", "rk4", "--out", out])), 2);
    assert_eq!(code(&dcd(&["solve", "--model", "heat", "--cells", "lots", "--out", out])), 2);
}

#[test]
fn solve_burgers_shock_position() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("shock");
    let run = dcd(&[
        "solve",
        "--model",
        "burgers_shock",
        "--scheme",
        "explicit",
        "--cells",
        "512",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    let entries = read_manifest(&out.join(MANIFEST)).unwrap();
    let u = read_state(&out, entries.last().unwrap(), Boundary::Extrapolate).unwrap();
    let v = u.values();
    let j = (0..v.len() - 1).find(|&j| v[j] >= 0.5 && v[j + 1] < 0.5).unwrap();
    let (x0, x1) = (u.grid().cell_center(j), u.grid().cell_center(j + 1));
    let crossing = x0 + (v[j] - 0.5) / (v[j] - v[j + 1]) * (x1 - x0);
    assert!((crossing - 0.25).abs() <= u.dx(), "crossing at {crossing}");
}

#[test]
fn solve_affine_and_implicit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = dcd(&["solve", "--model", "burgers_shock", "--flux", "ab:0.5,1", "--cells", "64", "--out", out]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let run = dcd(&[
        "solve",
        "--model",
        "sd_bench",
        "--scheme",
        "implicit",
        "--dt-rule",
        "dx23",
        "--cells",
        "64",
        "--save-every",
        "2",
        "--out",
        out,
    ]);
    assert_eq!(code(&run), 0);
    assert!(result_line(&run).contains("newton_iters="));
}

#[test]
fn converge_advection_and_shock() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("adv.csv");
    let run = dcd(&[
        "converge",
        "--model",
        "advection",
        "--scheme",
        "explicit",
        "--levels",
        "4",
        "--coarsest-cells",
        "64",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    assert!(field(&result_line(&run), "fitted_rate") >= 0.8);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().last().unwrap().starts_with("# fitted_rate="));

    let csv = dir.path().join("shock.csv");
    let run = dcd(&[
        "converge",
        "--model",
        "burgers_shock",
        "--levels",
        "5",
        "--coarsest-cells",
        "64",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
}

#[test]
fn converge_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = dcd(&[
            "converge",
            "--model",
            "heat",
            "--scheme",
            "semi",
            "--levels",
            "3",
            "--coarsest-cells",
            "16",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn flat_synthetic_errors_fail_the_rate_gate() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flat.csv");
    let run = dcd(&[
        "converge",
        "--model",
        "heat",
        "--levels",
        "3",
        "--coarsest-cells",
        "16",
        "--synthetic-errors",
        "0.1,0.1,0.1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 3);
    assert_eq!(field(&result_line(&run), "fitted_rate"), 0.0);
    let run = dcd(&[
        "converge",
        "--model",
        "heat",
        "--levels",
        "3",
        "--coarsest-cells",
        "16",
        "--synthetic-errors",
        "0.1,0.05,0.025",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    assert_eq!(field(&result_line(&run), "fitted_rate"), 1.0);
}

#[test]
fn audit_passes_and_refuses() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("audit.csv");
    let run =
        dcd(&["audit", "--model", "heat", "--scheme", "explicit", "--cells", "128", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stdout));
    assert!(Path::new(&csv).exists());
    for scheme in ["semi", "implicit"] {
        let run = dcd(&["audit", "--model", "sd_bench", "--scheme", scheme, "--cells", "64", "--constants", "5"]);
        assert_eq!(code(&run), 0, "{scheme}");
    }
    let run = dcd(&["audit", "--model", "burgers_shock", "--scheme", "explicit", "--cells", "128", "--dt", "0.1"]);
    assert_eq!(code(&run), 2);
    assert!(String::from_utf8_lossy(&run.stderr).contains("CFL"));
}

#[test]
fn viscosity_rate() {
    let run = dcd(&["viscosity", "--model", "burgers_shock", "--etas", "1/16..1/128", "--cells", "2048"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stdout));
    assert!(field(&result_line(&run), "fitted_rate") >= 0.4);
    let run = dcd(&["viscosity", "--model", "burgers_shock", "--etas", "1/16..1/128", "--cells", "256"]);
    assert_eq!(code(&run), 2);
}
