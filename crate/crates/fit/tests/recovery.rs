use cellwear_core::params::CellParameters;
use cellwear_fit::dataset::{load_dir, Condition};
use cellwear_fit::parameter::FitParameter;
use cellwear_fit::pipeline::{fit_stage, synthesize, FitOptions, Protocol};

fn storage(temperature_k: f64) -> Protocol {
    Protocol {
        condition: Condition::Calendar {
            soc: 1.0,
            temperature_k,
        },
        days: 120,
        rpt_every: 30,
    }
}

#[test]
fn saved_datasets_refit_to_the_generating_rate() {
    let truth = CellParameters::bundled("nmc622_25c").unwrap();
    let dir = tempfile::tempdir().unwrap();
    for d in synthesize("nmc622_25c", &truth, &[storage(truth.temperature)], 0.0, 3).unwrap() {
        d.save(&dir.path().join(d.file_name())).unwrap();
    }
    let data: Vec<_> = load_dir(dir.path()).unwrap().into_iter().map(|(_, d)| d).collect();
    assert_eq!(data.len(), 1);
    assert_eq!(data[0].observations.len(), 5);

    let mut opts = FitOptions::default();
    let p = FitParameter::SeiRate;
    opts.start.insert(p, 2.0 * p.get(&truth));
    let (fitted, report) = fit_stage("stage1", &truth, &data, &[p], &opts).unwrap();
    let err = p.get(&fitted) / p.get(&truth) - 1.0;
    assert!(err.abs() < 0.01, "k_sei off by {err}");
    assert!(report.final_norm < report.initial_norm);
    // the fixed-stride optimum survives the exhaustive check
    assert!(
        report.verification.max_residual_delta < 1e-3,
        "{:?}",
        report.verification
    );

    let (_, again) = fit_stage("stage1", &truth, &data, &[p], &opts).unwrap();
    assert_eq!(
        serde_json::to_string(&report).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
}
