//! Generative-oracle fits for the three models, the end-to-end gradient
//! check, and model serialization round trips.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ald_survival::data::{Dataset, SurvivalRecord};
use ald_survival::distributions::AldParams;
use ald_survival::losses::{ald_nll_censored, ald_nll_observed};
use ald_survival::metrics::CdfAdapter;
use ald_survival::models::{
    fit_ald, fit_cqrnn, fit_lognorm, point_estimate, FitOptions, NetworkOptions, PointEstimate,
    PredictedDistribution, DEFAULT_QUANTILE_GRID,
};
use ald_survival::neuralnet::{
    backward, forward_eval, forward_train, Activation, MlpConfig, MlpParams, TrainConfig,
};

fn quick_train(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 120,
        batch_size: 64,
        learning_rate: 0.01,
        validation_fraction: 0.2,
        early_stop_patience: 20,
        seed,
    }
}

fn small_net() -> NetworkOptions {
    NetworkOptions {
        hidden_dims: vec![32, 32],
        dropout_rate: 0.0,
        residual: true,
    }
}

#[test]
fn ald_fit_recovers_constant_location() {
    // Times drawn from one fixed ALD(5, 1, 1) with no covariate signal and no
    // censoring: the predicted mean on held-out points should approach 5.
    let dist = AldParams::new(5.0, 1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let records: Vec<SurvivalRecord> = (0..800)
        .map(|_| {
            let u: f64 = rng.gen_range(1e-9..1.0);
            SurvivalRecord {
                x: vec![rng.gen_range(0.0..2.0)],
                y: dist.quantile(u).unwrap().max(0.0),
                event: true,
                o_true: None,
            }
        })
        .collect();
    let train = Dataset::new(records).unwrap();
    let model = fit_ald(&train, &small_net(), &quick_train(3), &FitOptions::default()).unwrap();
    let mut err = 0.0;
    let n = 50;
    for i in 0..n {
        let x = vec![2.0 * i as f64 / n as f64];
        let d = model.predict(&x).unwrap();
        err += point_estimate(&d, PointEstimate::Mean).unwrap() - 5.0;
    }
    let bias = err / n as f64;
    assert!(bias.abs() < 0.2, "mean prediction bias {bias}");
}

#[test]
fn ald_fit_handles_fully_censored_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let records: Vec<SurvivalRecord> = (0..200)
        .map(|_| SurvivalRecord {
            x: vec![rng.gen_range(0.0..2.0)],
            y: rng.gen_range(1.0..3.0),
            event: false,
            o_true: None,
        })
        .collect();
    let train = Dataset::new(records).unwrap();
    let mut cfg = quick_train(4);
    cfg.epochs = 30;
    let model = fit_ald(&train, &small_net(), &cfg, &FitOptions::default());
    assert!(model.is_ok(), "all-censored training failed: {model:?}");
}

#[test]
fn cqrnn_fit_recovers_gaussian_median() {
    // Uncensored i.i.d. N(10, 1) targets: the fitted median should be near 10.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let records: Vec<SurvivalRecord> = (0..800)
        .map(|_| {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            SurvivalRecord {
                x: vec![rng.gen_range(0.0..2.0)],
                y: (10.0 + z).max(0.0),
                event: true,
                o_true: None,
            }
        })
        .collect();
    let train = Dataset::new(records).unwrap();
    let model = fit_cqrnn(
        &train,
        &DEFAULT_QUANTILE_GRID,
        &small_net(),
        &quick_train(5),
        &FitOptions::default(),
    )
    .unwrap();
    let mut preds = Vec::new();
    for i in 0..50 {
        let d = model.predict(&[2.0 * i as f64 / 50.0]).unwrap();
        match &d {
            PredictedDistribution::Quantiles { values, .. } => {
                assert!(
                    values.windows(2).all(|w| w[0] <= w[1]),
                    "rearranged quantiles must be sorted"
                );
            }
            other => panic!("unexpected payload {other:?}"),
        }
        preds.push(point_estimate(&d, PointEstimate::Median).unwrap());
    }
    let mean_median = preds.iter().sum::<f64>() / preds.len() as f64;
    assert!(
        (mean_median - 10.0).abs() < 0.2,
        "median prediction {mean_median}"
    );
}

#[test]
fn cqrnn_pseudo_value_is_exactly_1_2_max_y() {
    let records: Vec<SurvivalRecord> = (0..40)
        .map(|i| SurvivalRecord {
            x: vec![i as f64 / 40.0],
            y: 1.0 + i as f64 * 0.25,
            event: i % 3 != 0,
            o_true: None,
        })
        .collect();
    let max_y = records.iter().map(|r| r.y).fold(f64::MIN, f64::max);
    let train = Dataset::new(records).unwrap();
    let mut cfg = quick_train(6);
    cfg.epochs = 3;
    let model = fit_cqrnn(
        &train,
        &DEFAULT_QUANTILE_GRID,
        &small_net(),
        &cfg,
        &FitOptions::default(),
    )
    .unwrap();
    let y_star = model.y_star().unwrap();
    assert!(
        (y_star - 1.2 * max_y).abs() < 1e-9 * max_y,
        "y* = {y_star} vs 1.2 * {max_y}"
    );
}

#[test]
fn lognorm_fit_recovers_median() {
    // Times from LogNormal(mu=1, eta=0.5) with no covariate signal: predicted
    // median should be near e^1 within 5%.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let records: Vec<SurvivalRecord> = (0..1000)
        .map(|_| {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            SurvivalRecord {
                x: vec![rng.gen_range(0.0..2.0)],
                y: (1.0 + 0.5 * z).exp(),
                event: true,
                o_true: None,
            }
        })
        .collect();
    let train = Dataset::new(records).unwrap();
    let model = fit_lognorm(&train, &small_net(), &quick_train(8), &FitOptions::default()).unwrap();
    let mut preds = Vec::new();
    for i in 0..50 {
        let d = model.predict(&[2.0 * i as f64 / 50.0]).unwrap();
        preds.push(point_estimate(&d, PointEstimate::Median).unwrap());
        match d {
            PredictedDistribution::LogNorm(p) => assert!(p.eta() > 0.0),
            other => panic!("unexpected payload {other:?}"),
        }
    }
    let mean_median = preds.iter().sum::<f64>() / preds.len() as f64;
    let target = 1f64.exp();
    assert!(
        (mean_median - target).abs() / target < 0.05,
        "median prediction {mean_median} vs {target}"
    );
}

#[test]
fn end_to_end_gradient_matches_finite_differences() {
    // Covariates -> small network -> censoring-aware ALD loss, differentiated
    // with respect to every network parameter.
    let config = MlpConfig {
        input_dim: 2,
        hidden_dims: vec![4],
        head_activations: vec![Activation::Exp, Activation::Exp, Activation::Exp],
        dropout_rate: 0.0,
        residual: true,
    };
    assert!(config.param_count() <= 50, "net should stay tiny");
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let params = MlpParams::init(&config, &mut rng);
    let batch: Vec<(Vec<f64>, f64, bool)> = (0..8)
        .map(|i| {
            (
                vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                0.3 + 0.4 * i as f64,
                i % 3 != 0,
            )
        })
        .collect();

    let loss_of = |p: &MlpParams| -> f64 {
        batch
            .iter()
            .map(|(x, y, event)| {
                let out = forward_eval(&config, p, x).unwrap();
                let ald = AldParams::new(out[0], out[1], out[2]).unwrap();
                if *event {
                    ald_nll_observed(*y, &ald).value
                } else {
                    ald_nll_censored(*y, &ald).value
                }
            })
            .sum::<f64>()
            / batch.len() as f64
    };

    let mut grad = vec![0.0; params.values.len()];
    for (x, y, event) in &batch {
        let (out, cache) = forward_train(&config, &params, x, &mut rng).unwrap();
        let ald = AldParams::new(out[0], out[1], out[2]).unwrap();
        let term = if *event {
            ald_nll_observed(*y, &ald)
        } else {
            ald_nll_censored(*y, &ald)
        };
        backward(
            &config,
            &params,
            &cache,
            &term.grad,
            &mut grad,
            1.0 / batch.len() as f64,
        )
        .unwrap();
    }

    let h = 1e-5;
    for i in 0..params.values.len() {
        let mut lo = params.clone();
        let mut hi = params.clone();
        lo.values[i] -= h;
        hi.values[i] += h;
        let fd = (loss_of(&hi) - loss_of(&lo)) / (2.0 * h);
        let scale = grad[i].abs().max(fd.abs()).max(1e-6);
        assert!(
            (grad[i] - fd).abs() / scale < 1e-4,
            "param {i}: analytic {} vs fd {fd}",
            grad[i]
        );
    }
}

#[test]
fn fits_are_deterministic_per_seed() {
    let data = ald_survival::datagen::generate(
        ald_survival::datagen::SyntheticConfig::NormLinear,
        300,
        11,
    )
    .unwrap();
    let mut cfg = quick_train(21);
    cfg.epochs = 10;
    let a = fit_ald(&data, &small_net(), &cfg, &FitOptions::default()).unwrap();
    let b = fit_ald(&data, &small_net(), &cfg, &FitOptions::default()).unwrap();
    let da = a.predict(&[1.0]).unwrap();
    let db = b.predict(&[1.0]).unwrap();
    assert_eq!(da, db);
}

#[test]
fn save_load_round_trip_preserves_predictions() {
    let data = ald_survival::datagen::generate(
        ald_survival::datagen::SyntheticConfig::NormHeavy,
        300,
        3,
    )
    .unwrap();
    let mut cfg = quick_train(17);
    cfg.epochs = 8;
    for fit in [
        fit_ald(&data, &small_net(), &cfg, &FitOptions::default()).unwrap(),
        fit_cqrnn(
            &data,
            &DEFAULT_QUANTILE_GRID,
            &small_net(),
            &cfg,
            &FitOptions::default(),
        )
        .unwrap(),
        fit_lognorm(&data, &small_net(), &cfg, &FitOptions::default()).unwrap(),
    ] {
        let path = std::env::temp_dir().join(format!(
            "ald_model_{}_{:?}.json",
            std::process::id(),
            fit.kind()
        ));
        fit.save(&path).unwrap();
        let loaded = ald_survival::models::SurvivalModel::load(&path).unwrap();
        let x = [0.5, 1.0, 1.5, 0.2];
        let before = fit.predict(&x).unwrap();
        let after = loaded.predict(&x).unwrap();
        assert_eq!(before, after);
        // The adapters agree pointwise too.
        for t in [0.1, 1.0, 5.0, 20.0] {
            assert_eq!(before.cdf(t).to_bits(), after.cdf(t).to_bits());
        }
        std::fs::remove_file(&path).ok();
    }
}
