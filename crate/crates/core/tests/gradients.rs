mod common;

use common::oracles::{central_difference, max_relative_error};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spoofcal::classifier::{logistic, mlp, MlpParams, Standardizer};
use spoofcal::store::{EmbeddingDataset, Label};

const STEP: f64 = 1e-5;
const TOL: f64 = 1e-5;
/// Components smaller than this are compared in absolute terms.
const FLOOR: f64 = 1e-6;

fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> EmbeddingDataset {
    let features = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0f32..2.0));
    let labels = (0..n).map(|i| Label::from_spoof(i % 2 == 0)).collect();
    EmbeddingDataset::new((0..n).map(|i| format!("g{i}")).collect(), features, labels, "grad").unwrap()
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let d = rng.random_range(1..6);
        let n = rng.random_range(5..12);
        let data = random_dataset(&mut rng, n, d);
        let std = (case % 2 == 0).then(|| Standardizer::fit(&data));
        let lambda = rng.random_range(0.0..0.5);
        let theta: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.5..1.5)).collect();

        let obj = logistic::objective(&data, std.as_ref(), &theta[..d], theta[d], lambda);
        let mut analytic = obj.grad_weights.clone();
        analytic.push(obj.grad_bias);
        let numeric = central_difference(
            |t| logistic::objective(&data, std.as_ref(), &t[..d], t[d], lambda).loss,
            &theta,
            STEP,
        );
        let err = max_relative_error(&analytic, &numeric, FLOOR);
        worst = worst.max(err);
        assert!(err < TOL, "case {case}: relative error {err}");
    }
    eprintln!("logistic worst relative error {worst:e}");
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let d = rng.random_range(1..5);
        let h = rng.random_range(1..7);
        let data = random_dataset(&mut rng, 5, d);
        let std = (case % 2 == 1).then(|| Standardizer::fit(&data));
        let lambda = rng.random_range(0.0..0.5);
        let mut params = MlpParams::init(d, h, &mut rng);
        params.layer1_bias.iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
        params.layer2_bias = rng.random_range(-0.5..0.5);
        let rows: Vec<usize> = (0..5).collect();

        let (_, grad) = mlp::objective(&data, std.as_ref(), &params, lambda, &rows);
        let analytic = grad.to_flat();
        let mut probe = params.clone();
        let numeric = central_difference(
            |flat| {
                probe.set_flat(flat);
                mlp::objective(&data, std.as_ref(), &probe, lambda, &rows).0
            },
            &params.to_flat(),
            STEP,
        );
        let err = max_relative_error(&analytic, &numeric, FLOOR);
        worst = worst.max(err);
        assert!(err < TOL, "case {case}: relative error {err}");
    }
    eprintln!("mlp worst relative error {worst:e}");
}
