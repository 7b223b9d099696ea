//! End-to-end scans on small grids: phase verdicts, bracketing, report
//! artifacts, determinism, and the partial-results path on cell failure.

use polyscale::scan::{
    bracket_crossover, report_to_json, run_scan, ScanConfig, ScanError, Verdict,
};

fn small_two_phase_config() -> ScanConfig {
    ScanConfig {
        alpha: 1.5,
        beta_grid: vec![0.0, 3.0],
        n_grid: vec![64, 128, 256],
        t_grid: vec![0.5, 1.0],
        replicas: 240,
        seed: 7,
        ..ScanConfig::default()
    }
}

#[test]
fn small_grid_scan_classifies_both_phases_and_brackets() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("scan.json");
    let csv_path = dir.path().join("scan.csv");
    let cfg = ScanConfig {
        out: Some(json_path.clone()),
        csv_out: Some(csv_path.clone()),
        ..small_two_phase_config()
    };
    let report = run_scan(&cfg).unwrap();

    assert_eq!(report.rows.len(), 6);
    assert_eq!(report.betas.len(), 2);
    let free = &report.betas[0];
    let coupled = &report.betas[1];
    assert_eq!(free.verdict, Verdict::Diffusive);
    assert!((free.gamma_hat - 0.5).abs() < 0.1, "gamma = {}", free.gamma_hat);
    assert_eq!(coupled.verdict, Verdict::Ballistic);
    assert!(coupled.gamma_hat > 0.9, "gamma = {}", coupled.gamma_hat);
    assert!(coupled.speed > 0.8, "speed = {}", coupled.speed);
    assert_eq!(report.crossover_bracket, Some([0.0, 3.0]));

    for row in &report.rows {
        assert_eq!(row.distances.len(), 2);
        for dp in &row.distances {
            assert!(dp.d_p.is_finite() && dp.d_p >= 0.0);
            // 240 replicas leave plenty of jackknife blocks.
            assert!(dp.d_p_se.is_some());
            assert!(dp.w_sq_mean > 0.0);
        }
        // The taxicab end-to-end norm is at most n, so its square is at most
        // n^2 pathwise, not just in mean.
        assert!(row.end_l1_sq <= (row.n * row.n) as f64);
        assert!(row.speed > 0.0 && row.speed <= 1.0);
        assert!(row.sigma_hat > 0.0);
    }

    // The distance trend at the last time separates the phases by an order
    // of magnitude at the largest length.
    let d_free = report.rows[2].distances.last().unwrap().d_p;
    let d_coupled = report.rows[5].distances.last().unwrap().d_p;
    assert!(
        d_coupled > 5.0 * d_free,
        "expected a wide gap, got {d_free} vs {d_coupled}"
    );

    // Written JSON parses back to the same report.
    let body = std::fs::read_to_string(&json_path).unwrap();
    let parsed: polyscale::scan::ScanReport = serde_json::from_str(&body).unwrap();
    assert_eq!(parsed, report);

    // CSV: header plus one line per (beta, n, t).
    let csv_body = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv_body.lines().count(), 1 + 6 * 2);
    assert!(csv_body.starts_with(
        "beta,n,t,d_p,d_p_se,chi_hat,var_ratio,block_var_ratio,gamma_hat,speed"
    ));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let cfg = small_two_phase_config();
    let a = run_scan(&cfg).unwrap();
    let b = run_scan(&cfg).unwrap();
    assert_eq!(report_to_json(&a), report_to_json(&b));
}

#[test]
fn failing_cell_persists_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("scan.json");
    // ref_samples pushes the transport instance past the atom cap, so every
    // cell fails; the scan must still leave a partial report behind.
    let cfg = ScanConfig {
        p: 1.5,
        ref_samples: 8192,
        out: Some(json_path.clone()),
        ..small_two_phase_config()
    };
    let err = run_scan(&cfg).unwrap_err();
    match &err {
        ScanError::Cell { beta, n, .. } => {
            assert_eq!(*beta, 0.0);
            assert_eq!(*n, 64);
        }
        other => panic!("expected a cell error, got {other}"),
    }
    let partial_path = dir.path().join("scan.partial.json");
    let body = std::fs::read_to_string(&partial_path).unwrap();
    assert!(body.contains("\"partial\": true"));
    assert!(body.contains("atom"), "error text should explain the cap: {body}");
    assert!(!json_path.exists(), "no full report on failure");
}

#[test]
fn free_walk_rows_classify_diffusive_across_seeds() {
    for seed in [11, 29, 47] {
        let cfg = ScanConfig {
            beta_grid: vec![0.0],
            seed,
            ..ScanConfig::default()
        };
        let report = run_scan(&cfg).unwrap();
        assert_eq!(
            report.betas[0].verdict,
            Verdict::Diffusive,
            "seed {seed} gave {:?}",
            report.betas[0]
        );
        assert!((report.betas[0].gamma_hat - 0.5).abs() < 0.05);
    }
}

#[test]
fn bracket_is_reused_from_the_report_verdicts() {
    // bracket_crossover is a pure function of the verdict sequence, so a
    // report's bracket must agree with recomputing it from the summaries.
    let report = run_scan(&small_two_phase_config()).unwrap();
    let verdicts: Vec<Verdict> = report.betas.iter().map(|b| b.verdict).collect();
    let recomputed = bracket_crossover(&report.config.beta_grid, &verdicts).unwrap();
    assert_eq!(report.crossover_bracket, Some(recomputed));
}
