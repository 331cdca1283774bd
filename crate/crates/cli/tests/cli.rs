use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use collarflow_cli::output::parse_series;
use collarflow_cli::{emit, parse_config, run_experiment, ExperimentError, Kind};

fn collarflow(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collarflow"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.conf");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const CONFORMAL: &str = "n=3\nmode=torus\nNx=32\nboundary=neumann\nperturbation=conformal\nw0=0.2\ndt=1e-3\nT=0.5\nsample_every=50\n";

#[test]
fn conformal_series_follows_the_exact_decay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFORMAL);
    let out = collarflow(&["simulate", &cfg], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_series(&fs::read_to_string(dir.path().join("out/series.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 11);
    for r in &rows {
        // |w h|_h = w sqrt(n + 1) and w = c^2 - 1 obeys w' = -2n w exactly
        let exact = 0.2 * 4.0_f64.sqrt() * (-6.0 * r.t).exp();
        let got = r.sup_z.unwrap();
        assert!((got - exact).abs() <= 0.02 * exact, "t = {}: {got} vs {exact}", r.t);
        assert!(r.lambda0.is_none() && r.kappa_hat.is_none());
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n=3\nNx=24\ndt=5e-3\nT=0.2\nseed=5\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(collarflow(&["simulate", &cfg], d).status.code(), Some(0));
    }
    for f in ["series.csv", "summary.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = dir.path().join("c");
    assert_eq!(collarflow(&["simulate", &cfg, "--seed", "6"], &c).status.code(), Some(0));
    assert_ne!(fs::read(a.join("series.csv")).unwrap(), fs::read(c.join("series.csv")).unwrap());
    assert!(fs::read_to_string(c.join("summary.txt")).unwrap().contains("  seed: 6\n"));
}

#[test]
fn stability_summary_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let here = Path::new(env!("CARGO_MANIFEST_DIR"));
    let cfg = here.join("tests/data/stability_small.conf");
    let out = collarflow(&["stability", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let got = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    let want = fs::read_to_string(here.join("tests/golden/stability_summary.txt")).unwrap();
    assert_eq!(got, want);
    for key in ["eta", "epsilon", "a_L2", "a_sup"] {
        assert!(got.contains(&format!("\n  {key}: ")), "missing {key}");
    }
    let series = parse_series(&fs::read_to_string(dir.path().join("series.csv")).unwrap()).unwrap();
    let last = series.last().unwrap();
    assert!(last.lambda0.is_some() && last.residual_max.is_some() && last.kato_max.is_some());
    assert!(series[..series.len() - 1].iter().all(|r| r.lambda0.is_none()));
}

#[test]
fn inadmissible_eta_fails_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n=3\nNx=24\nT=0.1\neta=0.2\nb_n=1\n");
    let out = collarflow(&["stability", &cfg], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("eta(n) = 1/(8 b_n)"), "{err}");
    assert!(!dir.path().join("out/summary.txt").exists());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = collarflow(&["simulate", &write_config(dir.path(), "n=1\n")], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let out = collarflow(&["simulate", &write_config(dir.path(), "n=3\nmode=sphere\n")], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let cfl = "n=3\nNx=64\nscheme=explicit_rk2\ndt=1e-2\nT=0.1\n";
    let out = collarflow(&["simulate", &write_config(dir.path(), cfl)], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("explicit_rk2"));
}

#[test]
fn identities_and_spectrum_pass() {
    let dir = tempfile::tempdir().unwrap();
    let ids = "n=3\nNx=16\nNy=8\nanisotropy=one_tangential\nx_min=1e-2\nbackground=tangential_wave\nbeta=0.2\nidentity_states=4\n";
    let out = collarflow(&["check-identities", &write_config(dir.path(), ids)], &dir.path().join("i"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = collarflow(&["spectrum", &write_config(dir.path(), "n=3\nNx=128\n")], &dir.path().join("s"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_series(&fs::read_to_string(dir.path().join("s/series.csv")).unwrap()).unwrap();
    // Dirichlet problem on the collar: n^2/4 + (pi / L)^2 with L = ln(500)
    let exact = 2.25 + (std::f64::consts::PI / 500f64.ln()).powi(2);
    assert!((rows[0].lambda0.unwrap() - exact).abs() < 5e-3 * exact);
}

#[test]
fn duhamel_reports_contraction() {
    let cfg = parse_config("n=3\nNx=32\nx_min=1e-2\nbackground=tangential_ramp\nbeta=0.02\nT=0.05\nsample_every=5\n").unwrap();
    let outcome = run_experiment(&cfg, Kind::Duhamel).unwrap();
    assert!(outcome.passed(), "{:?}", outcome.checks);
    let last = outcome.rows.last().unwrap();
    assert!(last.kappa_hat.unwrap() < 1.0);
    assert_eq!(outcome.rows.len(), 11);
}

#[test]
fn empty_series_is_a_precondition_error() {
    let cfg = parse_config("n=3\nNx=16\nT=0\n").unwrap();
    let mut outcome = run_experiment(&cfg, Kind::Simulate).unwrap();
    outcome.rows.clear();
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(emit(&outcome, &cfg, dir.path()), Err(ExperimentError::Precondition(_))));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}
