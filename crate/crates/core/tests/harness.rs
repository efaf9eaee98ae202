mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nmmg::harness::audit::{audit_run, Invariant, Tolerances};
use nmmg::harness::front::{nondominated_filter, FrontResult, StartSummary};
use nmmg::harness::io;
use nmmg::problems::{by_id, PROBLEM_IDS};
use nmmg::{run, run_baseline, Algorithm, Baseline, SolverConfig, StopReason};

fn brute_force_front(points: &[Vec<f64>]) -> Vec<usize> {
    let mut keep = Vec::new();
    'outer: for i in 0..points.len() {
        for j in 0..points.len() {
            let le = (0..points[i].len()).all(|c| points[j][c] <= points[i][c]);
            let lt = (0..points[i].len()).any(|c| points[j][c] < points[i][c]);
            if le && lt {
                continue 'outer;
            }
        }
        keep.push(i);
    }
    keep
}

#[test]
fn filter_matches_brute_force_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for round in 0..20 {
        // coarse values force ties and duplicates
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                (0..3)
                    .map(|_| f64::from(rng.gen_range(0..12u8)) / 4.0)
                    .collect()
            })
            .collect();
        assert_eq!(
            nondominated_filter(&pts),
            brute_force_front(&pts),
            "round {round}"
        );
        let smooth: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..3).map(|_| rng.gen::<f64>()).collect())
            .collect();
        assert_eq!(nondominated_filter(&smooth), brute_force_front(&smooth));
    }
}

#[test]
fn convex_quadratic_from_three_three() {
    let e = by_id::<f64>("quad2", 2).unwrap();
    for algorithm in [Algorithm::AverageType, Algorithm::MaxType] {
        let r = run(
            e.problem.as_ref(),
            &[3.0, 3.0],
            &SolverConfig::with_algorithm(algorithm),
        )
        .unwrap();
        assert_eq!(r.stop_reason, StopReason::Critical);
        assert!(r.iterations() <= 500);
        assert!(r.final_v_norm().unwrap() <= 1e-6);
        assert!(e.pareto_distance(&r.final_x).unwrap() <= 1e-4);
    }
    let sd = run_baseline(
        e.problem.as_ref(),
        &[3.0, 3.0],
        &SolverConfig::default(),
        Baseline::SteepestDescent,
    )
    .unwrap();
    assert_eq!(sd.stop_reason, StopReason::Critical);
}

#[test]
fn convex_critical_points_lie_on_pareto_sets() {
    for id in ["quad2", "ellip2", "quad3"] {
        for n in [2, 5] {
            let e = by_id::<f64>(id, n).unwrap();
            for x0 in e.sample_starts(15, 8) {
                let r = run(e.problem.as_ref(), &x0, &SolverConfig::default()).unwrap();
                if r.stop_reason == StopReason::Critical {
                    let d = e.pareto_distance(&r.final_x).unwrap();
                    assert!(d <= 1e-3, "{id} n={n}: distance {d}");
                }
            }
        }
    }
}

#[test]
fn level_set_containment_for_monotone_runs() {
    let e = by_id::<f64>("ff", 5).unwrap();
    for cfg in [
        SolverConfig {
            eta_min: 0.0,
            eta_max: 0.0,
            ..SolverConfig::with_algorithm(Algorithm::AverageType)
        },
        SolverConfig::with_algorithm(Algorithm::MonotoneBaseline),
    ] {
        for x0 in e.sample_starts(10, 2) {
            let r = run(e.problem.as_ref(), &x0, &cfg).unwrap();
            let f0 = &r.trace.records()[0].f;
            for rec in r.trace.iter() {
                assert!(rec.f.iter().zip(f0).all(|(a, b)| a <= b));
            }
        }
    }
}

#[test]
fn front_result_keeps_start_order() {
    let e = by_id::<f64>("ff", 2).unwrap();
    let f = nmmg::harness::run_front(&e, &SolverConfig::default(), 30, 1).unwrap();
    let idx: Vec<usize> = f.runs.iter().map(|r| r.start).collect();
    assert_eq!(idx, (0..30).collect::<Vec<_>>());
    assert_eq!(f.runs[0].x0, e.sample_starts(30, 1)[0]);
    assert_eq!(f.stats.runs, 30);
}

#[test]
fn front_skips_non_finite_values() {
    let mk = |start, f: Vec<f64>| StartSummary {
        start,
        x0: vec![0.0],
        stop_reason: StopReason::Critical,
        iterations: 1,
        f_evals: 2,
        final_v_norm: 0.0,
        final_x: vec![0.0],
        final_f: f,
        pareto_distance: None,
    };
    let fr = FrontResult::from_runs(
        "t",
        vec![
            mk(0, vec![1.0, 1.0]),
            mk(1, vec![f64::NAN, 0.0]),
            mk(2, vec![0.5, 2.0]),
        ],
    );
    assert_eq!(fr.front, vec![0, 2]);
}

#[test]
fn audit_catches_tampered_traces() {
    let e = by_id::<f64>("ellip2", 5).unwrap();
    let cfg = SolverConfig::default();
    let x0 = e.sample_starts(1, 0).remove(0);
    let r = run(e.problem.as_ref(), &x0, &cfg).unwrap();
    let tol = Tolerances::default();
    assert!(audit_run(e.problem.as_ref(), &r, &cfg, &tol).passed());

    let mut bad = r.clone();
    let mut recs = bad.trace.records().to_vec();
    recs[3].x[0] += 1e-9;
    bad.trace = nmmg::RunTrace::new();
    for rec in recs {
        bad.trace.push(rec).unwrap();
    }
    assert!(audit_run(e.problem.as_ref(), &bad, &cfg, &tol).has(Invariant::StepConsistency));

    let mut bad = r.clone();
    let mut recs = bad.trace.records().to_vec();
    recs[2].psi_d = Some(recs[2].psi_v * 0.1);
    bad.trace = nmmg::RunTrace::new();
    for rec in recs {
        bad.trace.push(rec).unwrap();
    }
    let rep = audit_run(e.problem.as_ref(), &bad, &cfg, &tol);
    assert!(rep.has(Invariant::SufficientDescent));
}

#[test]
fn trace_csv_round_trips_single_precision() {
    let e = by_id::<f32>("quad3", 3).unwrap();
    let r = run(
        e.problem.as_ref(),
        &[4.0f32, -2.0, 1.0],
        &SolverConfig::default(),
    )
    .unwrap();
    let csv = io::trace_csv_string(&r).unwrap();
    assert_eq!(
        io::parse_trace_csv::<f32>(&csv).unwrap(),
        io::trace_rows(&r)
    );
    let json = io::run_json(&r, &SolverConfig::default()).unwrap();
    assert_eq!(
        io::parse_run_json::<f32>(&json).unwrap(),
        io::RunDocument::new(&r, &SolverConfig::default())
    );
}

#[test]
fn json_rejects_other_schema_versions() {
    let e = by_id::<f64>("sphere", 2).unwrap();
    let r = run(e.problem.as_ref(), &[1.0, 1.0], &SolverConfig::default()).unwrap();
    let json = io::run_json(&r, &SolverConfig::default())
        .unwrap()
        .replace("\"schema_version\": 1", "\"schema_version\": 99");
    assert!(matches!(
        io::parse_run_json::<f64>(&json),
        Err(io::ExportError::SchemaVersion(99))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn runs_pass_the_audit(
        pid in 0usize..PROBLEM_IDS.len(),
        n in prop::sample::select(vec![2usize, 3, 5]),
        algo in prop::sample::select(Algorithm::ALL.to_vec()),
        memory in 0usize..6,
        window in 0usize..12,
        eta_max in 0.0f64..0.95,
        seed in any::<u64>(),
    ) {
        let e = by_id::<f64>(PROBLEM_IDS[pid], n).unwrap();
        let cfg = SolverConfig { memory, window, eta_max, max_iter: 300, ..SolverConfig::with_algorithm(algo) };
        let x0 = e.sample_starts(1, seed).remove(0);
        let r = run(e.problem.as_ref(), &x0, &cfg).unwrap();
        let rep = audit_run(e.problem.as_ref(), &r, &cfg, &Tolerances::default());
        prop_assert!(rep.passed(), "{:?}", rep.violations.first());
        // determinism
        prop_assert_eq!(&r, &run(e.problem.as_ref(), &x0, &cfg).unwrap());
    }

    #[test]
    fn trace_csv_round_trips(
        pid in 0usize..PROBLEM_IDS.len(),
        seed in any::<u64>(),
        algo in prop::sample::select(Algorithm::ALL.to_vec()),
    ) {
        let e = by_id::<f64>(PROBLEM_IDS[pid], 3).unwrap();
        let cfg = SolverConfig { max_iter: 50, ..SolverConfig::with_algorithm(algo) };
        let r = run(e.problem.as_ref(), &e.sample_starts(1, seed)[0], &cfg).unwrap();
        let csv = io::trace_csv_string(&r).unwrap();
        prop_assert_eq!(io::parse_trace_csv::<f64>(&csv).unwrap(), io::trace_rows(&r));
    }

    #[test]
    fn filter_equals_brute_force(pts in prop::collection::vec(prop::collection::vec(-3i8..3, 2..5), 0..40)) {
        let m = pts.first().map_or(0, |p| p.len());
        let pts: Vec<Vec<f64>> = pts.into_iter().filter(|p| p.len() == m).map(|p| p.into_iter().map(f64::from).collect()).collect();
        prop_assert_eq!(nondominated_filter(&pts), brute_force_front(&pts));
    }
}
