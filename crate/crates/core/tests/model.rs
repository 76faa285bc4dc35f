use std::collections::BTreeMap;

use nalgebra::DVector;
use proptest::prelude::*;

use rentgam::gam::{
    bootstrap_p_value, bootstrap_term_test, build_design, default_grid, fit_pls, grids_for,
    predict, select_smoothness, simulate_synthetic, BasisSizes, Covariate, MarginSpec,
    ModelSpec, ModelSummary, SimulationConfig, TermSpec, Truth,
};
use rentgam::Execution;

fn small_rent_model() -> ModelSpec {
    ModelSpec::rent_model_with(&BasisSizes {
        beds: 3,
        univariate: 5,
        location: 3,
        interaction: 2,
        location_interaction: 1,
    })
}

#[test]
fn duplicated_rows_with_doubled_lambda_give_same_fit() {
    let sim = simulate_synthetic(&SimulationConfig::new(400, 0.1, 3), &Truth::rent_like()).unwrap();
    let spec = small_rent_model();
    let y: Vec<f64> = sim.rows.iter().map(|r| r.logprice).collect();
    let lambdas = vec![0.5, 2.0, 10.0, 1.0, 4.0];
    let d = build_design(&sim.rows, &spec).unwrap();
    let once = fit_pls(&d, &y, &lambdas, Execution::Sequential).unwrap();

    let twice_rows: Vec<_> = sim.rows.iter().chain(&sim.rows).cloned().collect();
    let twice_y: Vec<f64> = y.iter().chain(&y).copied().collect();
    let d2 = build_design(&twice_rows, &spec).unwrap();
    let doubled: Vec<f64> = lambdas.iter().map(|l| 2.0 * l).collect();
    let twice = fit_pls(&d2, &twice_y, &doubled, Execution::Sequential).unwrap();

    // (2XᵀX + 2S) β = 2Xᵀy has the single-copy solution
    let gap = (&once.coefficients - &twice.coefficients).amax();
    assert!(gap < 1e-8, "{gap}");
    let a = predict(&once, &sim.rows).unwrap();
    let b = predict(&twice, &sim.rows).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-8);
    }
}

#[test]
fn intercept_only_predicts_the_mean() {
    let sim = simulate_synthetic(&SimulationConfig::new(150, 0.2, 8), &Truth::rent_like()).unwrap();
    let d = build_design(&sim.rows, &ModelSpec::intercept_only()).unwrap();
    let y: Vec<f64> = sim.rows.iter().map(|r| r.logprice).collect();
    let m = fit_pls(&d, &y, &[], Execution::Sequential).unwrap();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    for p in predict(&m, &sim.rows).unwrap() {
        assert!((p - mean).abs() < 1e-12);
    }
    assert!((m.edf - 1.0).abs() < 1e-12);
}

#[test]
fn noiseless_simulation_is_recovered_exactly() {
    // linear truth lies in every term's unpenalized space
    let sim = simulate_synthetic(&SimulationConfig::new(600, 0.0, 1), &Truth::linear()).unwrap();
    let spec = small_rent_model();
    let d = build_design(&sim.rows, &spec).unwrap();
    let y: Vec<f64> = sim.rows.iter().map(|r| r.logprice).collect();
    let sel = select_smoothness(&d, &y, &grids_for(&d, &default_grid()), Execution::Parallel).unwrap();
    let fitted = predict(&sel.model, &sim.rows).unwrap();
    let rmse = (fitted.iter().zip(&sim.signal).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        / fitted.len() as f64)
        .sqrt();
    assert!(rmse < 1e-6, "{rmse}");
}

#[test]
fn selection_modes_agree_on_the_full_model() {
    let sim = simulate_synthetic(&SimulationConfig::new(700, 0.1, 4), &Truth::rent_like()).unwrap();
    let spec = small_rent_model();
    let d = build_design(&sim.rows, &spec).unwrap();
    let y: Vec<f64> = sim.rows.iter().map(|r| r.logprice).collect();
    let grids = grids_for(&d, &default_grid());
    let a = select_smoothness(&d, &y, &grids, Execution::Sequential).unwrap();
    let b = select_smoothness(&d, &y, &grids, Execution::Parallel).unwrap();
    assert_eq!(a.lambdas, b.lambdas);
    assert_eq!(a.model.coefficients, b.model.coefficients);
    let ja = serde_json::to_string(&a.model.summary()).unwrap();
    let jb = serde_json::to_string(&b.model.summary()).unwrap();
    assert_eq!(ja, jb);
    let back: ModelSummary = serde_json::from_str(&ja).unwrap();
    assert_eq!(back, a.model.summary());
    assert!(a.sweeps <= 10);
}

#[test]
fn bootstrap_is_reproducible_across_modes() {
    let sim = simulate_synthetic(&SimulationConfig::new(300, 0.1, 6), &Truth::linear()).unwrap();
    let spec = ModelSpec {
        terms: vec![
            TermSpec::main("beds", vec![MarginSpec::new(Covariate::Beds, 3)]),
            TermSpec::main("year", vec![MarginSpec::new(Covariate::Year, 4)]),
            TermSpec::interaction(
                "beds:year",
                vec![MarginSpec::new(Covariate::Beds, 2), MarginSpec::new(Covariate::Year, 2)],
            ),
        ],
    };
    let lambdas: BTreeMap<String, f64> = [("beds".into(), 1.0), ("year".into(), 10.0)].into();
    let a = bootstrap_term_test(&spec, &sim.rows, "beds:year", &lambdas, 19, 5, Execution::Sequential).unwrap();
    let b = bootstrap_term_test(&spec, &sim.rows, "beds:year", &lambdas, 19, 5, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.statistics.len(), 19);
    assert_eq!(a.p_value, bootstrap_p_value(a.observed, &a.statistics));
    assert!(bootstrap_term_test(&spec, &sim.rows, "beds:year", &lambdas, 18, 5, Execution::Sequential).is_err());
    // removing a main effect also removes its interaction
    let main = bootstrap_term_test(&spec, &sim.rows, "beds", &lambdas, 19, 5, Execution::Sequential).unwrap();
    assert!(main.p_value > 0.0 && main.p_value <= 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hat_trace_is_non_increasing_in_each_lambda(seed in 0u64..1000, which in 0usize..3, base in -2.0f64..2.0) {
        let sim = simulate_synthetic(&SimulationConfig::new(200, 0.1, seed), &Truth::rent_like()).unwrap();
        let spec = ModelSpec {
            terms: vec![
                TermSpec::main("beds", vec![MarginSpec::new(Covariate::Beds, 3)]),
                TermSpec::main("deprivation", vec![MarginSpec::new(Covariate::Deprivation, 6)]),
                TermSpec::main("year", vec![MarginSpec::new(Covariate::Year, 5)]),
            ],
        };
        let d = build_design(&sim.rows, &spec).unwrap();
        let y: Vec<f64> = sim.rows.iter().map(|r| r.logprice).collect();
        let mut lambdas = vec![10f64.powf(base); 3];
        let mut last = f64::INFINITY;
        for step in 0..5 {
            lambdas[which] = 10f64.powf(-3.0 + 2.0 * step as f64);
            let k = fit_pls(&d, &y, &lambdas, Execution::Sequential).unwrap().edf;
            prop_assert!(k <= last + 1e-9, "k rose from {} to {}", last, k);
            prop_assert!(k > 0.0 && k < 200.0);
            last = k;
        }
    }

    #[test]
    fn p_values_follow_the_counting_formula(
        observed in -5.0f64..50.0,
        stats in prop::collection::vec(0.0f64..40.0, 19..120),
    ) {
        let p = bootstrap_p_value(observed, &stats);
        prop_assert!(p > 0.0 && p <= 1.0);
        let exceed = stats.iter().filter(|&&w| w >= observed).count();
        prop_assert_eq!(p, (1 + exceed) as f64 / (stats.len() + 1) as f64);
    }

    #[test]
    fn training_predictions_match_fitted_values(seed in 0u64..500, l in -3.0f64..4.0) {
        let sim = simulate_synthetic(&SimulationConfig::new(120, 0.1, seed), &Truth::rent_like()).unwrap();
        let spec = ModelSpec {
            terms: vec![
                TermSpec::main("deprivation", vec![MarginSpec::new(Covariate::Deprivation, 4)]),
                TermSpec::main("year", vec![MarginSpec::new(Covariate::Year, 3)]),
            ],
        };
        let d = build_design(&sim.rows, &spec).unwrap();
        let y: Vec<f64> = sim.rows.iter().map(|r| r.logprice).collect();
        let m = fit_pls(&d, &y, &[10f64.powf(l), 1.0], Execution::Sequential).unwrap();
        let p = DVector::from_vec(predict(&m, &sim.rows).unwrap());
        prop_assert!((&p - &m.fitted).amax() < 1e-10);
    }
}
