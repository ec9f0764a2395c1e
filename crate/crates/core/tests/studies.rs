//! Harness-level behavior on reduced scenarios: weight independence,
//! refinement consistency, rough forcing, and the export surfaces.

use eddylab::document::{ScenarioDocument, StudyKind};
use eddylab::harness::{study_convergence_rate, study_resolvent_identity, study_uniform_bound};
use eddylab::ops::assemble_curl0;
use eddylab::scenarios::TimeProfile;

fn doc_8(kind: StudyKind) -> ScenarioDocument {
    let mut doc = ScenarioDocument::default_document()
        .with_grid_resolution(8)
        .unwrap();
    doc.study.kind = kind;
    doc.discretization.tau = 0.02;
    doc.discretization.t_end = 1.0;
    doc
}

/// The family limit is not a time-discretization artifact: halving tau moves
/// each e(s) by less than a factor of two.
#[test]
fn rate_errors_are_stable_under_tau_halving() {
    let mut errors = Vec::new();
    for tau in [0.02, 0.01] {
        let mut doc = doc_8(StudyKind::Rate);
        doc.discretization.tau = tau;
        doc.study.s_values = vec![0.1, 0.01, 0.001];
        let wb = doc.workbench().unwrap();
        let cfg = doc.study_config().unwrap();
        let report = study_convergence_rate(&wb, &cfg).unwrap();
        errors.push(report.rows.iter().map(|r| r.error).collect::<Vec<_>>());
    }
    for (coarse, fine) in errors[0].iter().zip(&errors[1]) {
        let factor = coarse.max(*fine) / coarse.min(*fine);
        assert!(factor < 2.0, "tau halving changed e(s) by {factor}");
    }
}

/// The studies hold for every weight: bound, identity and rate pass at
/// rho = 0.5, 1 and 2 on the reduced scenario.
#[test]
fn studies_pass_across_weights() {
    for rho in [0.5, 1.0, 2.0] {
        let mut doc = doc_8(StudyKind::Bound);
        doc.weight.rho = rho;
        doc.discretization.tau = (0.04 / rho).min(0.02);
        doc.discretization.t_end = doc.discretization.tau * 50.0;
        doc.study.s_values = vec![1.0, 0.1, 0.0];
        let wb = doc.workbench().unwrap();
        let cfg = doc.study_config().unwrap();
        let bound = study_uniform_bound(&wb, &cfg).unwrap();
        assert!(bound.passed, "bound study failed at rho = {rho}");
        let identity = study_resolvent_identity(&wb, &cfg, 0.1).unwrap();
        assert!(identity.passed, "identity study failed at rho = {rho}");
        let mut rate_cfg = cfg.clone();
        rate_cfg.s_values = vec![0.1, 0.03, 0.01, 0.003, 0.001];
        let rate = study_convergence_rate(&wb, &rate_cfg).unwrap();
        assert!(rate.passed, "rate study failed at rho = {rho}");
    }
}

/// Rough (step) forcing: convergence is still observed, the slope is
/// recorded but not asserted against the band.
#[test]
fn rough_forcing_still_converges() {
    let mut doc = doc_8(StudyKind::Rate);
    doc.geometry.coil.profile = TimeProfile::Step {
        amplitude: 1.0,
        onset: 0.1,
    };
    doc.study.s_values = vec![0.1, 0.01, 0.001];
    let wb = doc.workbench().unwrap();
    let cfg = doc.study_config().unwrap();
    let report = study_convergence_rate(&wb, &cfg).unwrap();
    // errors decrease along the sweep: convergence observed
    let errors: Vec<f64> = report.rows.iter().map(|r| r.error).collect();
    for pair in errors.windows(2) {
        assert!(pair[1] < pair[0], "e(s) not decreasing: {errors:?}");
    }
    // no band check was applied: the slope appears as a recorded entry
    assert!(report.checks.iter().any(|c| c.name == "slope_observed"));
    assert!(report.passed);
}

/// Vacuous identity: comparing s = 0 against itself reports a vacuous pass.
#[test]
fn identity_of_s_zero_with_itself_is_vacuous() {
    let doc = doc_8(StudyKind::Identity);
    let wb = doc.workbench().unwrap();
    let cfg = doc.study_config().unwrap();
    let report = study_resolvent_identity(&wb, &cfg, 0.0).unwrap();
    assert!(report.passed);
    assert!(report
        .checks
        .iter()
        .any(|c| c.name == "identity_defect_vacuous"));
}

/// A zero family parameter in the smoothed sweep compares the limit model
/// with itself: its sampled distance is exactly zero.
#[test]
fn smoothed_study_with_zero_s_row() {
    let mut doc = doc_8(StudyKind::Smoothed);
    doc.discretization.tau = 0.05;
    doc.discretization.t_end = 0.5;
    doc.study.s_values = vec![0.1, 0.03, 0.01, 0.0];
    let wb = doc.workbench().unwrap();
    let cfg = doc.study_config().unwrap();
    let report =
        eddylab::harness::study_smoothed_operator_convergence(&wb, &cfg, 10).unwrap();
    let zero_row = report.rows.iter().find(|r| r.s == 0.0).unwrap();
    assert_eq!(zero_row.error, 0.0);
    assert_eq!(zero_row.ratio, 0.0);
}

/// Smoothed study preconditions: sample and sweep minimums are enforced.
#[test]
fn smoothed_study_preconditions() {
    let doc = doc_8(StudyKind::Smoothed);
    let wb = doc.workbench().unwrap();
    let cfg = doc.study_config().unwrap();
    assert!(matches!(
        eddylab::harness::study_smoothed_operator_convergence(&wb, &cfg, 9),
        Err(eddylab::Error::Validation(_))
    ));
    let mut bad = cfg.clone();
    bad.s_values = vec![0.1, 0.0];
    assert!(eddylab::harness::study_smoothed_operator_convergence(&wb, &bad, 10).is_err());
}

/// Coordinate-format export of an assembled operator is deterministic and
/// parseable.
#[test]
fn curl_matrix_coordinate_export() {
    let doc = doc_8(StudyKind::Structure);
    let wb = doc.workbench().unwrap();
    let curl = assemble_curl0(wb.grid());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curl0.txt");
    curl.write_coordinate_text(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut count = 0;
    let mut prev: Option<(usize, usize)> = None;
    for line in text.lines() {
        let parts: Vec<&str> = line.split(' ').collect();
        assert_eq!(parts.len(), 3);
        let r: usize = parts[0].parse().unwrap();
        let c: usize = parts[1].parse().unwrap();
        let v: f64 = parts[2].parse().unwrap();
        assert!(r < curl.nrows() && c < curl.ncols());
        assert!(v.abs() > 0.0);
        if let Some(p) = prev {
            assert!((r, c) > p, "entries out of order");
        }
        prev = Some((r, c));
        count += 1;
    }
    assert_eq!(count, curl.nnz());
}

/// Solution export formats on a real solve: CSV layout and the raw
/// little-endian dump size.
#[test]
fn trajectory_exports_from_a_real_solve() {
    let doc = doc_8(StudyKind::Bound);
    let wb = doc.workbench().unwrap();
    let forcing = wb.forcing_spec().sample(0.02, 10, 1.0).unwrap();
    let result = wb.solve(1.0, forcing, 1e-10).unwrap();
    let mut csv = Vec::new();
    eddylab::evolution::write_trajectory_csv(&result.solution, wb.measure(), &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.starts_with("step,time,e_norm,h_norm\n"));

    let mut bin = Vec::new();
    eddylab::evolution::write_trajectory_bin(&result.solution, &mut bin).unwrap();
    let ne = wb.grid().e_space().count();
    let nh = wb.grid().h_space().count();
    assert_eq!(bin.len(), 10 * (ne + nh) * 8);
}
