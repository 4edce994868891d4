//! End-to-end runs of the `fractal-index` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fractal_index::io;
use fractal_index::Rational;
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fractal-index"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("FRACTAL_INDEX_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[test]
fn verify_hs_accepts_the_gasket() {
    let dir = TempDir::new().unwrap();
    let o = run(&["verify-hs", "--preset", "sg2"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(dir.path().join("manifest.json"));
    assert_eq!(m["status"], "ok");
    assert!(m["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert!(dir.path().join("verify-hs.json").exists());
}

#[test]
fn extend_writes_level_one_values() {
    let dir = TempDir::new().unwrap();
    let o = run(&["extend", "--preset", "sg2", "--boundary", "1,0,0", "--level", "1"], dir.path());
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("extension.csv")).unwrap();
    let f = io::parse_vertex_values::<Rational>(&text, 1).unwrap();
    assert_eq!(f.values, [q(1, 1), q(0, 1), q(0, 1), q(2, 5), q(2, 5), q(1, 5)]);
    assert_eq!(json(dir.path().join("extension.json"))["energy"], "2");
}

#[test]
fn energy_table_reloads_with_total_twice_the_energy() {
    let dir = TempDir::new().unwrap();
    let o = run(&["energy-table", "--preset", "sg2", "--boundary", "1,0,0", "--level", "3"], dir.path());
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("energy-table.csv")).unwrap();
    let t = io::parse_measure_table::<Rational>(&text, 3).unwrap();
    assert_eq!(t.values.len(), 27);
    assert_eq!(t.total(), q(4, 1));
    let mut coarse = t.clone();
    for _ in 0..3 {
        coarse = coarse.coarsen().unwrap();
    }
    assert_eq!(coarse.values, [q(4, 1)]);
}

#[test]
fn phi_field_reloads_with_unit_trace() {
    let dir = TempDir::new().unwrap();
    let o = run(&["phi-field", "--preset", "sg2", "--level", "3"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("phi-field.csv")).unwrap();
    let phi = io::parse_phi_field::<Rational>(&text, 3).unwrap();
    assert_eq!(phi.matrices.len(), 27);
    for (m, k) in phi.matrices.iter().zip(&phi.kusuoka) {
        if *k > q(0, 1) {
            assert_eq!(m.get(0, 0) + m.get(1, 1), q(2, 1));
        }
    }
}

#[test]
fn rank_spectrum_mass_decreases() {
    let dir = TempDir::new().unwrap();
    let o = run(&["rank-spectrum", "--preset", "sg2", "--levels", "4,6,8", "--eps", "0.01"], dir.path());
    assert_eq!(code(&o), 0);
    let r = json(dir.path().join("rank-spectrum.json"));
    assert_eq!(r["mass_strictly_decreasing"], true);
    let mass: Vec<f64> =
        r["levels"].as_array().unwrap().iter().map(|l| l["mass_ratio_above"].as_f64().unwrap()).collect();
    assert!(mass.windows(2).all(|w| w[1] < w[0]), "{mass:?}");
    let points = io::parse_plot_data(&fs::read_to_string(dir.path().join("rank-spectrum.dat")).unwrap()).unwrap();
    assert_eq!(points.len(), 3);
    for (p, m) in points.iter().zip(&mass) {
        assert!((p.1 - m).abs() < 1e-12);
    }
    let cells = io::parse_rank_spectrum(&fs::read_to_string(dir.path().join("rank-spectrum-level4.csv")).unwrap()).unwrap();
    assert_eq!(cells.len(), 81);
}

#[test]
fn index_report_estimates_one_on_the_gasket() {
    let dir = TempDir::new().unwrap();
    let o = run(&["index-report", "--preset", "sg2", "--levels", "2,4,6"], dir.path());
    assert_eq!(code(&o), 0);
    let r = json(dir.path().join("index-report.json"));
    assert_eq!(r["estimate"], 1, "{r}");
}

#[test]
fn blowup_writes_a_trace() {
    let dir = TempDir::new().unwrap();
    let o = run(&["blowup", "--preset", "sg2", "--max-level", "4"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(dir.path().join("blowup.json")).is_object());
    assert!(dir.path().join("blowup-candidates.dat").exists());
}

#[test]
fn config_file_matches_preset() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("sg.toml");
    fs::write(
        &cfg,
        r#"
[structure]
name = "gasket"
boundary = [["0", "0"], ["1", "0"], ["0", "1"]]
maps = [
  { ratio = "1/2", fixed_point = ["0", "0"] },
  { ratio = "1/2", fixed_point = ["1", "0"] },
  { ratio = "1/2", fixed_point = ["0", "1"] },
]

[harmonic]
d = [[-2, 1, 1], [1, -2, 1], [1, 1, -2]]

[run]
levels = [4, 6]
epsilons = [0.01]
"#,
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&run(&["rank-spectrum", "--config", cfg.to_str().unwrap()], &a)), 0);
    assert_eq!(code(&run(&["rank-spectrum", "--preset", "sg2", "--levels", "4,6", "--eps", "0.01"], &b)), 0);
    let ma = json(a.join("rank-spectrum.json"))["levels"].clone();
    let mb = json(b.join("rank-spectrum.json"))["levels"].clone();
    assert_eq!(ma, mb);
}

#[test]
fn carpet_commands_run_and_reload() {
    let dir = TempDir::new().unwrap();
    let o = run(&["carpet", "check", "--preset", "carpet-2d"], dir.path());
    assert_eq!(code(&o), 0);
    let o = run(&["carpet", "resistance", "--preset", "carpet-2d", "--levels", "1,2,3"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (levels, ratios) =
        io::parse_resistance(&fs::read_to_string(dir.path().join("resistance.csv")).unwrap()).unwrap();
    assert_eq!(levels.len(), 3);
    assert_eq!(ratios.len(), 2);
    assert!(ratios.iter().all(|r| *r > 1.0));
    let o = run(&["carpet", "dims", "--preset", "carpet-2d", "--r-hat", "0.8"], dir.path());
    assert_eq!(code(&o), 0);
    let d = json(dir.path().join("dimensions.json"));
    // M = 8, l = 3, 1/r = 5/4: d_w = ln 10 / ln 3, d_s = 2 ln 8 / ln 10.
    assert!((d["d_w"].as_f64().unwrap() - 10f64.ln() / 3f64.ln()).abs() < 1e-12, "{d}");
    assert!((d["d_s"].as_f64().unwrap() - 2.0 * 8f64.ln() / 10f64.ln()).abs() < 1e-12, "{d}");
    assert_eq!(d["dm_bound"], 1);
}

#[test]
fn carpet_check_rejects_a_bad_generator() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[carpet]\ndim = 2\nl = 3\ncells = [[0, 0], [1, 1], [2, 2]]\n").unwrap();
    let o = run(&["carpet", "check", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    assert_ne!(json(dir.path().join("manifest.json"))["status"], "ok");
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(&["verify-hs", "--preset", "no-such"], dir.path())), 1);
    assert_eq!(code(&run(&["extend", "--preset", "sg2", "--boundary", "1,x,0"], dir.path())), 1);
    assert_eq!(code(&run(&["no-such-command"], dir.path())), 1);
    assert_eq!(code(&run(&["rank-spectrum", "--preset", "sg2", "--eps", "1.5"], dir.path())), 1);
}

#[test]
fn solver_failures_are_reported() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &["carpet", "resistance", "--preset", "carpet-2d", "--levels", "2,3", "--max-iterations", "1"],
        dir.path(),
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["carpet", "resistance", "--preset", "carpet-2d", "--levels", "2,3", "--cap", "100"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = ["rank-spectrum", "--preset", "sg3", "--levels", "2,3"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&run(&args, &a)), 0);
    assert_eq!(code(&run(&args, &b)), 0);
    let names: Vec<String> = json(a.join("manifest.json"))["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert!(!names.is_empty());
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n}");
    }
}
