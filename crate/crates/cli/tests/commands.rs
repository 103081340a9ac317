use std::fs;
use std::path::Path;

use mar_cli::commands::{rerun, run, Command};
use mar_cli::config::RunConfig;
use mar_cli::data::{read_draws_file, read_series};
use mar_cli::replicate::replicate_study;
use mar_core::summary::{summarize_draws, GRID_POINTS};

fn config(pairs: &[&str], output: &Path) -> RunConfig {
    let mut c = RunConfig::default();
    c.output = output.to_path_buf();
    for p in pairs {
        c.apply_assignment(p).unwrap();
    }
    c
}

/// A short Model A chain written to `dir/sim` and fitted into `dir/fit`.
fn simulate_and_fit(dir: &Path) -> RunConfig {
    run(Command::Simulate, config(&["model=a", "seed=3"], &dir.join("sim"))).unwrap();
    let input = dir.join("sim/series.csv");
    let fit = config(
        &["recipe=model_a", &format!("input={}", input.display()), "n_iter=1500", "burn_in=500", "tune_pilot=500"],
        &dir.join("fit"),
    );
    run(Command::Fit, fit.clone()).unwrap();
    fit
}

fn csv_column(path: &Path, column: usize) -> Vec<f64> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap()[column].parse().unwrap()).collect()
}

#[test]
fn validation_rejects_bad_configurations() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [&["gamma=0"][..], &["gamma=-1,2"], &["burn_in=20000"], &["g=0"], &["p_max=0"], &["g=3", "orders=1,1"]] {
        let c = config(bad, dir.path());
        assert!(run(Command::Fit, c).is_err(), "{bad:?} accepted");
    }
    let missing = run(Command::Fit, config(&[], dir.path())).unwrap_err();
    assert!(missing.to_string().contains("input"), "{missing}");
    assert!(config(&[], dir.path()).apply_assignment("no_such_key=1").is_err());
}

#[test]
fn simulate_refuses_unstable_models() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(&["model=user", "weights=0.5,0.5", "ar=1.2;0.9", "scales=1,1"], dir.path());
    let err = run(Command::Simulate, c).unwrap_err().to_string();
    assert!(err.contains("spectral radius"), "{err}");
    let ok = config(&["model=user", "weights=0.5,0.5", "ar=1.2;0.5", "scales=1,1", "n=50"], dir.path());
    let m = run(Command::Simulate, ok).unwrap();
    assert!(m.checks["spectral_radius"] < 1.0);
    assert_eq!(read_series(&dir.path().join("series.csv"), false, false).unwrap().0.len(), 50);
}

#[test]
fn simulation_lengths_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    run(Command::Simulate, config(&["model=b", "seed=9"], &dir.path().join("one"))).unwrap();
    run(Command::Simulate, config(&["model=b", "seed=9"], &dir.path().join("two"))).unwrap();
    let one = fs::read(dir.path().join("one/series.csv")).unwrap();
    assert_eq!(one, fs::read(dir.path().join("two/series.csv")).unwrap());
    assert_eq!(read_series(&dir.path().join("one/series.csv"), false, false).unwrap().1, 600);
}

#[test]
fn fit_rerun_is_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    simulate_and_fit(dir.path());
    let again = dir.path().join("again");
    let m = rerun(&dir.path().join("fit/manifest.json"), &again).unwrap();
    assert_eq!(m.command, "fit");
    for file in ["draws.csv", "summaries.json"] {
        assert_eq!(fs::read(dir.path().join("fit").join(file)).unwrap(), fs::read(again.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn reloaded_draws_reproduce_summaries_exactly() {
    let dir = tempfile::tempdir().unwrap();
    simulate_and_fit(dir.path());
    let draws = read_draws_file(&dir.path().join("fit/draws.csv")).unwrap();
    let recomputed = serde_json::to_value(summarize_draws(&draws).unwrap()).unwrap();
    let written: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fit/summaries.json")).unwrap()).unwrap();
    assert_eq!(recomputed, written);
}

#[test]
fn forecast_grids_are_proper_and_spread_with_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let fit = simulate_and_fit(dir.path());
    let draws = dir.path().join("fit/draws.csv");
    let mut sd = Vec::new();
    for h in [1, 2] {
        let out = dir.path().join(format!("h{h}"));
        let c = config(
            &[&format!("input={}", fit.input.as_ref().unwrap().display()), &format!("draws={}", draws.display()), &format!("horizon={h}")],
            &out,
        );
        let m = run(Command::Forecast, c).unwrap();
        assert!((m.checks["integral"] - 1.0).abs() < 1e-3);
        assert!(m.warnings.is_empty(), "{:?}", m.warnings);
        let path = out.join("forecast.csv");
        let (y, mean, lo, hi) = (csv_column(&path, 0), csv_column(&path, 1), csv_column(&path, 2), csv_column(&path, 3));
        assert_eq!(y.len(), GRID_POINTS);
        assert!(lo.iter().zip(&mean).zip(&hi).all(|((l, m), h)| l <= m && m <= h));
        let step = y[1] - y[0];
        let m1: f64 = y.iter().zip(&mean).map(|(y, d)| y * d * step).sum();
        let m2: f64 = y.iter().zip(&mean).map(|(y, d)| y * y * d * step).sum();
        sd.push((m2 - m1 * m1).sqrt());
        let again = rerun(&out.join("manifest.json"), &out.join("rerun")).unwrap();
        assert_eq!(again.checks["integral"], m.checks["integral"]);
        assert_eq!(fs::read(&path).unwrap(), fs::read(out.join("rerun/forecast.csv")).unwrap());
    }
    assert!(sd[1] > sd[0], "{sd:?}");
}

#[test]
fn select_reports_every_candidate() {
    let dir = tempfile::tempdir().unwrap();
    run(Command::Simulate, config(&["model=a", "seed=5", "n=150"], &dir.path().join("sim"))).unwrap();
    let input = dir.path().join("sim/series.csv");
    let c = config(
        &[
            &format!("input={}", input.display()),
            "g_min=1",
            "g_max=2",
            "p_max=2",
            "n_iter=1200",
            "burn_in=400",
            "tune_pilot=500",
            "n_j=400",
            "n_i=400",
            "reduced_burn_in=100",
            "relabel_m=100",
        ],
        &dir.path().join("sel"),
    );
    let m = run(Command::Select, c).unwrap();
    assert!(m.seeds.contains_key("g1") && m.seeds.contains_key("g2"));
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sel/select.json")).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for (row, g) in rows.iter().zip(1..) {
        assert_eq!(row["g"], g);
        assert_eq!(row["orders"].as_array().unwrap().len(), g as usize);
        let pref = row["preference"].as_f64().unwrap();
        assert!(pref > 0.0 && pref <= 1.0);
        assert!(row["log_marginal"].as_f64().unwrap().is_finite());
    }
}

#[test]
fn recipe_length_mismatch_warns() {
    let dir = tempfile::tempdir().unwrap();
    run(Command::Simulate, config(&["model=a", "n=120"], &dir.path().join("sim"))).unwrap();
    let input = dir.path().join("sim/series.csv");
    let c = config(
        &["recipe=ibm", &format!("input={}", input.display()), "n_iter=600", "burn_in=200", "tune_pilot=500", "relabel_m=50"],
        &dir.path().join("fit"),
    );
    let m = run(Command::Fit, c).unwrap();
    assert!(m.warnings.iter().any(|w| w.contains("369")), "{:?}", m.warnings);
    assert_eq!(m.config["difference"], "true");
    assert_eq!(m.config["orders"], "4,1,1");
}

#[test]
fn replication_smoke_run_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(&["replicas=2", "replica_n=150", "n_iter=1200", "burn_in=400", "tune_pilot=500", "relabel_m=100"], dir.path());
    let with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| replicate_study(&c).unwrap())
    };
    let (one, three) = (with(1), with(3));
    assert_eq!(one.averaged, three.averaged);
    for (name, grid) in &one.averaged {
        assert_eq!(grid.abscissae.len(), GRID_POINTS, "{name}");
        assert!((grid.integral() - 1.0).abs() < 0.02, "{name}: {}", grid.integral());
    }
    let m = run(Command::Replicate, c).unwrap();
    assert_eq!(m.stability_rejections.len(), 2);
    assert!(dir.path().join("replicate_density.csv").exists());
}
