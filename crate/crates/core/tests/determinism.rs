use ddpm_lab::harness::{
    run_lowdim_scan, run_rate_scan, run_score_error_scan, with_workers, write_results_csv,
    ExperimentSpec, TargetFamily, TvChoice,
};
use ddpm_lab::samplers::{run_reverse, DesignTag, SamplerCoefficients};
use ddpm_lab::scores::{ExactProvider, PerturbationSpec};
use ddpm_lab::targets::{AtomDef, TargetDef};
use ddpm_lab::Schedule;

fn mixture_spec() -> ExperimentSpec {
    let def = TargetDef::from_toml(
        r#"
kind = "gaussian_mixture"

[[components]]
weight = 0.4
mean = [-1.0]
cov = [[0.3]]

[[components]]
weight = 0.6
mean = [1.0]
cov = [[0.5]]
"#,
    )
    .unwrap();
    let mut spec = ExperimentSpec::new("det", TargetFamily::Definition { definition: def });
    spec.t_grid = vec![16, 32, 64];
    spec.trajectories = 4_000;
    spec.tv.method = TvChoice::Grid;
    spec.record_runtime = false;
    spec.seed = 9;
    spec
}

fn csv_bytes(spec: &ExperimentSpec, workers: usize) -> Vec<u8> {
    let result = with_workers(Some(workers), || run_rate_scan(spec))
        .unwrap()
        .unwrap();
    let mut out = Vec::new();
    write_results_csv(&spec.experiment_id, &result.rows, &mut out).unwrap();
    out
}

#[test]
fn rate_scan_bytes_do_not_depend_on_workers() {
    let spec = mixture_spec();
    let one = csv_bytes(&spec, 1);
    assert_eq!(one, csv_bytes(&spec, 2));
    assert_eq!(one, csv_bytes(&spec, 8));
}

#[test]
fn removing_a_row_leaves_the_others_unchanged() {
    let spec = mixture_spec();
    let full = run_rate_scan(&spec).unwrap();
    let mut wider = spec.clone();
    wider.t_grid = vec![16, 32, 48, 64];
    let more = run_rate_scan(&wider).unwrap();
    for row in &full.rows {
        let other = more.rows.iter().find(|r| r.steps == row.steps).unwrap();
        assert_eq!(row, other);
    }
}

#[test]
fn zero_eps_row_matches_the_exact_run() {
    let mut spec = mixture_spec();
    spec.t_grid = vec![32];
    spec.eps_grid = vec![0.0, 0.1];
    spec.perturbation = Some(PerturbationSpec::constant_bias(0.0, 1));
    let scan = run_score_error_scan(&spec).unwrap();
    let mut exact = spec.clone();
    exact.perturbation = None;
    exact.t_grid = vec![16, 32, 64];
    let rate = run_rate_scan(&exact).unwrap();
    let reference = rate.rows.iter().find(|r| r.steps == 32).unwrap();
    assert_eq!(scan.excess[0].tv, reference.tv);
    assert!(scan.excess[1].excess > 0.0);
}

#[test]
fn reverse_runs_are_prefix_stable() {
    let target = mixture_spec().target.build(None, None).unwrap();
    let schedule = Schedule::new(32, 2.0, 4.0).unwrap();
    let provider = ExactProvider::new(&target, &schedule).unwrap();
    let coeffs = SamplerCoefficients::standard(&schedule);
    let small = run_reverse(&provider, &schedule, &coeffs, 100, 4).unwrap();
    let large = run_reverse(&provider, &schedule, &coeffs, 300, 4).unwrap();
    assert_eq!(small.samples.as_slice(), &large.samples.as_slice()[..100]);
}

#[test]
fn full_dimensional_embedding_runs_both_designs() {
    let atoms = vec![
        AtomDef {
            weight: 0.5,
            location: vec![1.0, 0.0],
        },
        AtomDef {
            weight: 0.5,
            location: vec![-1.0, 0.5],
        },
    ];
    let mut spec = ExperimentSpec::new(
        "trivial",
        TargetFamily::EmbeddedAtoms {
            atoms,
            embed_seed: 0,
        },
    );
    spec.t_grid = vec![32, 64, 128];
    spec.ambient_dim = Some(2);
    spec.trajectories = 5_000;
    let result = run_lowdim_scan(&spec).unwrap();
    assert_eq!(result.rows.len(), 6);
    for r in &result.rows {
        assert_eq!((r.d, r.k), (2, 2));
        assert_eq!(r.tv_normal, Some(0.0));
    }
    assert!(result.fit_for(2, DesignTag::DdpmLowdim).is_some());
}
