use lru_core::experiment::{
    csv_without_wall_time, median, read_csv, summarize, write_csv, ExperimentSpec, GridPoint, Method,
};
use lru_core::{run_experiment, Error};

fn small_spec() -> ExperimentSpec {
    let grid = ExperimentSpec::cartesian(&[6], &[2.0], &[1.0], &[1.0, 5.0]);
    ExperimentSpec::new(grid, vec![3, 1, 2], Method::ALL.to_vec())
}

#[test]
fn rows_are_ordered_and_complete() {
    let spec = small_spec();
    let rows = run_experiment(&spec).unwrap();
    assert_eq!(rows.len(), 2 * 3 * 4);
    let mut expected = Vec::new();
    for q in [1.0, 5.0] {
        for seed in [3, 1, 2] {
            for m in [Method::Colgen, Method::Blp, Method::Oracle, Method::Clru] {
                expected.push((q, seed, m));
            }
        }
    }
    let got: Vec<_> = rows.iter().map(|r| (r.q, r.seed, r.method)).collect();
    assert_eq!(got, expected);
    for r in &rows {
        assert_eq!(r.status, "ok", "{r:?}");
    }
}

#[test]
fn gaps_and_certificates() {
    let rows = run_experiment(&small_spec()).unwrap();
    for chunk in rows.chunks(4) {
        let (cg, blp, oracle, clru) = (&chunk[0], &chunk[1], &chunk[2], &chunk[3]);
        let beta = cg.beta.unwrap();
        assert_eq!(blp.beta, Some(beta));
        assert!(beta.abs() < 1e-6);
        assert!((cg.objective.unwrap() - oracle.objective.unwrap()).abs() <= 1e-6 * oracle.objective.unwrap());
        assert!(clru.delta_pi.unwrap() >= -1e-12);
        assert_eq!(cg.integral, Some(true));
        assert_eq!(cg.cycle_free, Some(true));
        assert_eq!(cg.totally_balanced, Some(true));
        assert_eq!(cg.connected, Some(true));
        assert!(oracle.beta.is_none() && cg.delta_pi.is_none());
        assert_eq!(cg.design, oracle.design);
        assert_eq!(cg.design.as_deref().unwrap().split('|').count(), cg.num_lrus.unwrap());
        assert!(clru.design.as_deref().unwrap().contains('/'));
    }
}

#[test]
fn reruns_are_identical_apart_from_wall_time() {
    let mut spec = small_spec();
    spec.methods = vec![Method::Clru, Method::Colgen];
    spec.workers = Some(1);
    let a = run_experiment(&spec).unwrap();
    spec.workers = Some(3);
    let b = run_experiment(&spec).unwrap();
    assert_eq!(csv_without_wall_time(&a).unwrap(), csv_without_wall_time(&b).unwrap());
}

#[test]
fn csv_round_trip_and_header() {
    let mut spec = small_spec();
    spec.methods = vec![Method::Colgen, Method::Clru];
    let rows = run_experiment(&spec).unwrap();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "n,delta,delta_e,q,seed,method,status,objective,num_lrus,iterations,nodes,wall_ms,cycle_free,\
         totally_balanced,connected,integral,beta,delta_pi,design,error"
    );
    assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
}

#[test]
fn failures_are_recorded_per_row() {
    // n = 10 is over the exhaustive cover limit; colgen still runs
    let grid = vec![GridPoint { n: 10, delta: 2.0, delta_e: 1.0, q: 1.0 }];
    let rows = run_experiment(&ExperimentSpec::new(grid, vec![0], vec![Method::Colgen, Method::Clru])).unwrap();
    assert_eq!(rows[0].status, "ok");
    assert_eq!(rows[1].status, "limit");
    assert!(rows[1].error.as_deref().unwrap().contains("too large"));
    assert!(rows[1].delta_pi.is_none());
}

#[test]
fn invalid_grid_is_rejected() {
    let grid = vec![GridPoint { n: 4, delta: 9.0, delta_e: 1.0, q: 1.0 }];
    let err = run_experiment(&ExperimentSpec::new(grid, vec![0], vec![Method::Colgen])).unwrap_err();
    assert!(matches!(err, Error::InfeasibleConfig(_)));
}

#[test]
fn summary_statistics() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    assert_eq!(median(&[]), None);

    let rows = run_experiment(&small_spec()).unwrap();
    let s = summarize(&rows);
    assert_eq!(s.len(), 2 * 4);
    let cg = &s[0];
    assert_eq!((cg.method, cg.runs, cg.ok), (Method::Colgen, 3, 3));
    let objs: Vec<f64> = rows.iter().filter(|r| r.q == 1.0 && r.method == Method::Colgen).map(|r| r.objective.unwrap()).collect();
    let mean = objs.iter().sum::<f64>() / 3.0;
    assert!((cg.mean_objective.unwrap() - mean).abs() < 1e-9 * mean);
    assert_eq!(cg.median_objective, median(&objs));
    let clru = &s[3];
    assert_eq!(clru.method, Method::Clru);
    assert!(clru.min_delta_pi.unwrap() >= -1e-12);
    assert!(clru.mean_beta.is_none());
}
