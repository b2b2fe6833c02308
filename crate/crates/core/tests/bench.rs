use std::path::Path;

use mais::bench::quadrature::{load_reference, quadrature_reference, write_reference, ReferenceCache};
use mais::bench::{
    compute_mse, export_csv, group_by_point, header, parse_csv, read_csv, run_experiment, run_replication,
    write_csv, ExperimentSpec, ResultRecord,
};
use mais::rng::replication_seed;
use mais::targets::BananaSpec;
use mais::{run, Error, TargetModel};

fn record(i_hat: Vec<f64>, z_hat: Option<f64>) -> ResultRecord {
    ResultRecord {
        experiment: "demo, quoted".into(),
        algorithm: "population-mais".into(),
        target: "mixture5".into(),
        n: 10,
        m: 2,
        t: 3,
        sigma: Some(0.1),
        lambda: None,
        scheme: "spatial".into(),
        adaptation: "parallel-mh".into(),
        replication: 4,
        seed: u64::MAX,
        i_hat,
        z_hat,
        e: 90,
        wall_time_s: 1.0 / 3.0,
    }
}

fn small_spec(reps: usize, jobs: usize) -> ExperimentSpec {
    let text = format!(
        r#"
name = "small"
[target]
name = "mixture5"
reference = "analytic"
[algorithm]
kind = "population-mais"
adaptation = "parallel-mh"
scheme = "spatial"
N = 10
M = 4
T = 10
lambda = 5.0
init = "in2"
[sweep]
sigma = [2.0, 5.0]
[harness]
replications = {reps}
seed = 7
jobs = {jobs}
"#
    );
    ExperimentSpec::parse(&text, Path::new(".")).unwrap()
}

#[test]
fn csv_round_trip_is_exact() {
    let records = vec![
        record(vec![1.0 / 7.0, -2.5e-300], Some(std::f64::consts::PI)),
        record(vec![f64::MAX, 0.1 + 0.2], None),
    ];
    let mut buf = Vec::new();
    write_csv(&records, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    let columns = header(2).len();
    assert_eq!(columns, 17);
    for line in text.lines().skip(1) {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(line.as_bytes());
        assert_eq!(rdr.records().next().unwrap().unwrap().len(), columns);
    }
    assert!(text.contains(",NA,"));
    assert_eq!(read_csv(buf.as_slice()).unwrap(), records);
}

#[test]
fn header_names_the_columns() {
    assert_eq!(
        header(2).join(","),
        "experiment,algorithm,target,N,M,T,sigma,lambda,scheme,adaptation,replication,seed,I_hat_1,I_hat_2,Z_hat,E,wall_time_s"
    );
}

#[test]
fn empty_record_set_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    export_csv(&[], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(parse_csv(&path).unwrap().is_empty());
}

#[test]
fn export_errors_carry_the_path() {
    let path = Path::new("/nonexistent-dir/out.csv");
    match export_csv(&[], path) {
        Err(Error::Io { path: p, .. }) => assert_eq!(p, path),
        other => panic!("{other:?}"),
    }
}

#[test]
fn mse_examples() {
    let exact = vec![record(vec![1.0, 2.0], Some(1.0)); 3];
    let r = compute_mse(&exact, Some(&[1.0, 2.0]), Some(1.0)).unwrap();
    assert_eq!(r.per_component, vec![0.0, 0.0]);
    assert_eq!(r.z, Some(0.0));

    let one = vec![record(vec![2.0, 2.0], Some(1.0))];
    let r = compute_mse(&one, Some(&[1.0, 2.0]), None).unwrap();
    assert_eq!(r.per_component[0], 1.0);
    assert_eq!(r.z, None);

    let pair = vec![record(vec![2.0, 2.0], Some(3.0)), record(vec![0.0, 2.0], Some(-1.0))];
    let r = compute_mse(&pair, Some(&[1.0, 2.0]), Some(1.0)).unwrap();
    assert_eq!(r.per_component, vec![1.0, 0.0]);
    assert_eq!(r.z, Some(4.0));
    assert_eq!(r.mean_over_components(), Some(0.5));

    assert!(matches!(compute_mse(&pair, None, None), Err(Error::NoReference(_))));
}

#[test]
fn mse_ignores_record_order() {
    let recs: Vec<ResultRecord> = (0..50)
        .map(|i| record(vec![(i as f64 * 0.37).sin() * 1e3, 1.0], None))
        .collect();
    let mut rev = recs.clone();
    rev.reverse();
    let a = compute_mse(&recs, Some(&[0.1, 0.0]), None).unwrap();
    let b = compute_mse(&rev, Some(&[0.1, 0.0]), None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_replication_matches_a_direct_call() {
    let spec = small_spec(1, 1);
    let records = run_experiment(&spec).unwrap();
    assert_eq!(records.len(), 2);
    let seed = replication_seed(7, 0);
    let direct = run(&spec.config_for(&spec.points[0], seed).unwrap()).unwrap();
    assert_eq!(records[0].seed, seed);
    assert_eq!(records[0].i_hat, direct.i_hat);
    assert_eq!(records[0].z_hat, direct.z_hat);
    assert_eq!(records[0].e, direct.eval_count);
    assert_eq!(records[0].e, 10 * 4 * 10 + 10 * 10);
    let again = run_replication(&spec, 0, 0).unwrap();
    assert_eq!(again.i_hat, direct.i_hat);
}

#[test]
fn worker_count_does_not_change_records() {
    let strip = |mut v: Vec<ResultRecord>| {
        v.iter_mut().for_each(|r| r.wall_time_s = 0.0);
        v
    };
    let a = strip(run_experiment(&small_spec(4, 1)).unwrap());
    let b = strip(run_experiment(&small_spec(4, 4)).unwrap());
    assert_eq!(a.len(), 8);
    assert_eq!(a, b);
    let groups = group_by_point(&a);
    assert_eq!(groups.len(), 2);
    assert!(groups.iter().all(|g| g.len() == 4));
}

#[test]
fn mixture_sigma_sweep_has_an_interior_minimum() {
    let text = r#"
name = "sweep"
[target]
name = "mixture5"
reference = "analytic"
[algorithm]
kind = "population-mais"
adaptation = "parallel-mh"
scheme = "spatial"
N = 100
M = 19
T = 100
lambda = 10.0
init = "in1"
[sweep]
sigma = [0.5, 1.0, 2.0, 5.0, 10.0, 70.0]
[harness]
replications = 12
seed = 11
"#;
    let spec = ExperimentSpec::parse(text, Path::new(".")).unwrap();
    let (mean, _) = spec.reference_values().unwrap();
    let records = run_experiment(&spec).unwrap();
    let mse: Vec<f64> = group_by_point(&records)
        .iter()
        .map(|g| compute_mse(g, Some(&mean), None).unwrap().per_component[0])
        .collect();
    let best = (0..mse.len()).min_by(|&a, &b| mse[a].total_cmp(&mse[b])).unwrap();
    assert!(best > 0 && best < mse.len() - 1, "{mse:?}");
}

#[test]
fn spec_errors_are_reported() {
    let base = Path::new(".");
    let ok = r#"
name = "x"
[target]
name = "mixture5"
[algorithm]
kind = "static-mis"
N = 2
M = 1
T = 1
sigma = 1.0
"#;
    ExperimentSpec::parse(ok, base).unwrap();
    for bad in [
        ok.replace("N = 2", "N = 2\nbogus = 1"),
        ok.replace("mixture5", "no-such-target"),
        ok.replace("static-mis", "magic"),
        ok.replace("T = 1", ""),
        ok.replace("[target]", "[target]\nreference = \"quadrature\""),
        ok.replace("N = 2", "N = 0"),
        ok.replace("N = 2", "N = \"two\""),
    ] {
        let err = ExperimentSpec::parse(&bad, base).unwrap_err();
        assert!(err.is_config_error(), "{bad}: {err}");
    }
}

#[test]
fn mixture_quadrature_recovers_the_moments() {
    let q = quadrature_reference(&TargetModel::mixture5()).unwrap();
    assert!((q.z - 1.0).abs() < 1e-6, "{}", q.z);
    assert!((q.mean[0] - 1.6).abs() < 1e-6);
    assert!((q.mean[1] - 1.4).abs() < 1e-6);
}

#[test]
fn stale_reference_cache_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mixture.toml");
    let target = TargetModel::mixture5();
    let q = quadrature_reference(&target).unwrap();
    write_reference(&path, &ReferenceCache::new(&target, &q)).unwrap();
    let cached = load_reference(&path, &target).unwrap();
    assert_eq!(cached.mean, q.mean);
    let other = TargetModel::banana_with(BananaSpec { b: 0.3, ..BananaSpec::default() });
    assert!(load_reference(&path, &other).is_err());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.file_name().unwrap().to_str().unwrap().ends_with("-reference.toml") {
            continue;
        }
        let spec = ExperimentSpec::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        spec.reference_values().unwrap();
        n += 1;
    }
    assert!(n >= 8);
}

#[test]
fn banana_reference_matches_quadrature() {
    let target = TargetModel::banana();
    let q = quadrature_reference(&target).unwrap();
    let (mean, z) = target.true_moments().unwrap();
    assert!((q.mean[0] - mean[0]).abs() < 1e-6, "{:?}", q.mean);
    assert!(q.mean[1].abs() < 1e-9);
    assert!((q.z - z.unwrap()).abs() / q.z < 1e-6);
}

#[test]
fn shipped_sensor_cache_matches_the_target() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/sensor-reference.toml");
    let target = TargetModel::sensor();
    let cache = load_reference(&path, &target).unwrap();
    let (mean, z) = target.true_moments().unwrap();
    for (a, b) in cache.mean.iter().zip(&mean) {
        assert!((a - b).abs() < 1e-9, "{a} {b}");
    }
    assert!((cache.z - z.unwrap()).abs() / cache.z < 1e-9);
}
