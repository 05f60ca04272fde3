//! End-to-end tests of the `piecekit` binary: exit codes, golden output,
//! and the square-lattice DOS session.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_piecekit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const SINGULARITY_JSON: &str = r#"{
  "parity": "even",
  "pieces": [{
    "interval": [0.0, 4.0],
    "included": [false, true],
    "terms": [{"formula": "LOG", "params": [0.0, -0.05066059182116889]}]
  }]
}"#;

const BOX_JSON: &str = r#"{
  "parity": "none",
  "pieces": [{
    "interval": [-1.0, 1.0],
    "included": [true, true],
    "terms": [{"formula": "POLY", "params": [1.0]}]
  }]
}"#;

#[test]
fn missing_interval_is_a_usage_error() {
    let output = run(&[
        "fit",
        "--target",
        "builtin:square-lattice-dos",
        "--rtol",
        "5e-6",
        "--out",
        "/tmp/unused.json",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_formula_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.json");
    let output = run(&[
        "fit",
        "--target",
        "builtin:square-lattice-dos",
        "--interval",
        "0,4",
        "--formulas",
        "WAVELET",
        "--rtol",
        "1e-3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unreadable_input_is_an_io_error() {
    let output = run(&["eval", "--in", "/nonexistent/f.json", "--at", "1.0"]);
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn malformed_function_file_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "bad.json", "{oops");
    let output = run(&["eval", "--in", path.to_str().unwrap(), "--at", "1.0"]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn dos_session_reproduces_the_reference_curve() {
    let dir = tempfile::tempdir().unwrap();
    let sing = write_file(dir.path(), "sing.json", SINGULARITY_JSON);
    let out = dir.path().join("dos.json");

    let fit = run(&[
        "fit",
        "--target",
        "builtin:square-lattice-dos",
        "--interval",
        "0,4",
        "--formulas",
        "POLY",
        "--parity",
        "even",
        "--rtol",
        "5e-6",
        "--subtract",
        sing.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(fit.status.code(), Some(0), "{}", stdout(&fit));
    assert!(stdout(&fit).contains("1 piece(s)"));

    // the fitted curve matches the analytic density of states pointwise
    let eval = run(&["eval", "--in", out.to_str().unwrap(), "--grid", "-4,4,1000"]);
    assert_eq!(eval.status.code(), Some(0));
    let mut checked = 0;
    for line in stdout(&eval).lines() {
        let (x_text, y_text) = line.split_once(',').unwrap();
        let x: f64 = x_text.parse().unwrap();
        let y: f64 = y_text.parse().unwrap();
        let exact = reference_dos(x);
        assert!(
            (y / exact - 1.0).abs() < 1e-5,
            "x = {x}: {y} vs {exact}"
        );
        checked += 1;
    }
    assert_eq!(checked, 1000);

    // normalization from the analytic moments
    let moment = run(&["moment", "--in", out.to_str().unwrap(), "--n", "0"]);
    let m0: f64 = stdout(&moment)
        .lines()
        .next()
        .unwrap()
        .split_once(',')
        .unwrap()
        .1
        .parse()
        .unwrap();
    assert!((m0 - 1.0).abs() < 1e-5, "M0 = {m0}");

    // show prints the constructor text
    let show = run(&["show", "--in", out.to_str().unwrap()]);
    let text = stdout(&show);
    assert!(text.starts_with("PiecewiseFunction(:even, ["));
    assert!(text.contains("[POLY, LOG]"));
}

/// Independent copy of the reference density of states.
fn reference_dos(e: f64) -> f64 {
    use std::f64::consts::PI;
    let ae = e.abs();
    if ae > 4.0 {
        return 0.0;
    }
    if ae < 1e-4 {
        return (16.0 / ae).ln() / (2.0 * PI * PI);
    }
    let m = 1.0 - (e / 4.0) * (e / 4.0);
    let mut a: f64 = 1.0;
    let mut g: f64 = (1.0 - m).sqrt();
    for _ in 0..60 {
        if (a - g).abs() <= f64::EPSILON * a {
            break;
        }
        (a, g) = (0.5 * (a + g), (a * g).sqrt());
    }
    PI / (2.0 * a) / (2.0 * PI * PI)
}

#[test]
fn csv_line_fit_recovers_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("x,y\n");
    for i in 0..=50 {
        let x = i as f64 / 50.0;
        csv.push_str(&format!("{x},{}\n", 2.0 * x + 1.0));
    }
    let csv_path = write_file(dir.path(), "line.csv", &csv);
    let out = dir.path().join("line.json");
    let fit = run(&[
        "fit",
        "--target",
        &format!("csv:{}", csv_path.display()),
        "--interval",
        "0,1",
        "--formulas",
        "POLY",
        "--rtol",
        "1e-8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(fit.status.code(), Some(0), "{}", stdout(&fit));

    let text = std::fs::read_to_string(&out).unwrap();
    let f = piecekit::from_json(&text).unwrap();
    let params = f.pieces()[0].terms()[0].params();
    assert!((params[0] - 1.0).abs() < 1e-8, "{params:?}");
    assert!((params[1] - 2.0).abs() < 1e-8, "{params:?}");
    for extra in &params[2..] {
        assert!(extra.abs() < 1e-7, "{params:?}");
    }
}

#[test]
fn eval_golden_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "box.json", BOX_JSON);
    let output = run(&["eval", "--in", path.to_str().unwrap(), "--grid", "-2,2,5"]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout(&output), "-2,0\n-1,1\n0,1\n1,1\n2,0\n");
}

#[test]
fn hilbert_of_box_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "box.json", BOX_JSON);
    let output = run(&["hilbert", "--in", path.to_str().unwrap(), "--z", "0,1"]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    let (re_text, im_text) = text.trim().split_once(',').unwrap();
    let re: f64 = re_text.parse().unwrap();
    let im: f64 = im_text.parse().unwrap();
    // ln((1+i)/(-1+i)) = -i pi/2
    assert!(re.abs() < 1e-14);
    assert!((im + std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn hilbert_at_singular_point_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "box.json", BOX_JSON);
    let output = run(&[
        "hilbert",
        "--in",
        path.to_str().unwrap(),
        "--real-axis",
        "--at",
        "1.0",
    ]);
    assert_eq!(output.status.code(), Some(3));
    let err = String::from_utf8_lossy(&output.stderr).into_owned();
    assert!(err.contains("1"), "stderr should name the point: {err}");
}

#[test]
fn quad_cross_checks_the_analytic_moment() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "box.json", BOX_JSON);
    let analytic = run(&["moment", "--in", path.to_str().unwrap(), "--n", "2"]);
    let numeric = run(&["quad", "--in", path.to_str().unwrap(), "--n", "2"]);
    let m2: f64 = stdout(&analytic)
        .lines()
        .nth(2)
        .unwrap()
        .split_once(',')
        .unwrap()
        .1
        .parse()
        .unwrap();
    let q2: f64 = stdout(&numeric).trim().parse().unwrap();
    assert!((m2 - 2.0 / 3.0).abs() < 1e-14);
    assert!((q2 - m2).abs() < 1e-10);
}

#[test]
fn seed_env_var_overrides_flag_and_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.json");
    let out2 = dir.path().join("b.json");
    let args = |out: &Path| {
        vec![
            "fit".to_string(),
            "--target".to_string(),
            "builtin:square-lattice-dos".to_string(),
            "--interval".to_string(),
            "1,3".to_string(),
            "--formulas".to_string(),
            "POLY".to_string(),
            "--rtol".to_string(),
            "1e-6".to_string(),
            "--seed".to_string(),
            "42".to_string(),
            "--out".to_string(),
            out.display().to_string(),
        ]
    };
    // same env seed, different --seed values: identical output bytes
    let s1 = bin()
        .args(args(&out1))
        .env("PIECEKIT_SEED", "7")
        .output()
        .unwrap();
    let mut args2 = args(&out2);
    args2[10] = "43".to_string();
    let s2 = bin().args(args2).env("PIECEKIT_SEED", "7").output().unwrap();
    assert_eq!(s1.status.code(), Some(0));
    assert_eq!(s2.status.code(), Some(0));
    let bytes1 = std::fs::read(&out1).unwrap();
    let bytes2 = std::fs::read(&out2).unwrap();
    assert_eq!(bytes1, bytes2);
}
