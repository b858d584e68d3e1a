use lc_arena::valuenet::{copy_params, opt_step, Adam, Dense, Gradients, Mlp, MlpCheckpoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hand_net() -> Mlp {
    // 2-2-1: hidden = relu([[1, -1], [0.5, 2]] x + [0, -1]), out = [2, -3] h + 0.5
    Mlp::from_layers(vec![
        Dense {
            inputs: 2,
            outputs: 2,
            weights: vec![1.0, -1.0, 0.5, 2.0],
            bias: vec![0.0, -1.0],
        },
        Dense {
            inputs: 2,
            outputs: 1,
            weights: vec![2.0, -3.0],
            bias: vec![0.5],
        },
    ])
    .unwrap()
}

#[test]
fn forward_examples() {
    let zero = Mlp::zeros(&[3, 5, 2]).unwrap();
    assert_eq!(zero.forward(&[0.3, -1.0, 2.0]).unwrap(), vec![0.0, 0.0]);

    let mut ident = Dense::zeros(3, 3);
    for i in 0..3 {
        ident.weights[i * 3 + i] = 1.0;
    }
    let net = Mlp::from_layers(vec![ident]).unwrap();
    assert_eq!(net.forward(&[0.2, 0.0, 4.0]).unwrap(), vec![0.2, 0.0, 4.0]);

    // x = (3, 1): z1 = (2, 2.5), h = (2, 2.5), out = 4 - 7.5 + 0.5
    assert_eq!(hand_net().forward(&[3.0, 1.0]).unwrap(), vec![-3.0]);
    // x = (0, 1): z1 = (-1, 1), h = (0, 1), out = -3 + 0.5
    assert_eq!(hand_net().forward(&[0.0, 1.0]).unwrap(), vec![-2.5]);
}

#[test]
fn shape_errors() {
    let net = Mlp::new(&[4, 8, 3], 1).unwrap();
    assert!(net.forward(&[1.0; 3]).is_err());
    assert!(net.backward(&[1.0; 4], 3, 0.0).is_err());
    assert!(Mlp::new(&[4], 1).is_err());
    assert!(Mlp::from_layers(vec![Dense::zeros(2, 3), Dense::zeros(4, 1)]).is_err());
}

#[test]
fn glorot_bounds_and_zero_bias() {
    let net = Mlp::new(&[10, 30, 4], 3).unwrap();
    for layer in net.layers() {
        let bound = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
        assert!(layer.weights.iter().all(|w| w.abs() <= bound));
        assert!(layer.bias.iter().all(|&b| b == 0.0));
    }
    assert_eq!(net, Mlp::new(&[10, 30, 4], 3).unwrap());
    assert_ne!(net, Mlp::new(&[10, 30, 4], 4).unwrap());
}

#[test]
fn gradient_vanishes_at_target() {
    let net = Mlp::new(&[4, 8, 3], 5).unwrap();
    let x = [0.1, -0.4, 0.8, 0.3];
    let q = net.forward(&x).unwrap();
    let (loss, g) = net.backward(&x, 1, q[1]).unwrap();
    assert_eq!(loss, 0.0);
    assert!(g.flat().iter().all(|&v| v == 0.0));
}

#[test]
fn unselected_output_row_gets_no_gradient() {
    let net = Mlp::new(&[4, 8, 3], 6).unwrap();
    let (_, g) = net.backward(&[0.5, 0.2, -0.1, 0.9], 0, 10.0).unwrap();
    let last = &g.layers[1];
    assert!(last.weights[8..].iter().all(|&w| w == 0.0));
    assert_eq!(&last.bias[1..], &[0.0, 0.0]);
    assert!(last.bias[0] != 0.0);
}

/// Central-difference check; returns the worst relative error over
/// parameters, skipping inputs that sit near a ReLU kink.
fn finite_difference_error(seed: u64) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = Mlp::new(&[4, 8, 3], seed).unwrap();
    let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let index = rng.random_range(0..3);
    let target: f64 = rng.random_range(-1.0..1.0);
    let first = &net.layers()[0];
    let near_kink = (0..first.outputs).any(|o| {
        let z: f64 = first.bias[o]
            + (0..4).map(|i| first.weights[o * 4 + i] * x[i]).sum::<f64>();
        z.abs() < 1e-6
    });
    if near_kink {
        return None;
    }
    let (_, g) = net.backward(&x, index, target).unwrap();
    let analytic = g.flat();
    let params = net.params();
    let h = 1e-5;
    let loss = |p: &[f64]| {
        let mut n = net.clone();
        n.set_params(p).unwrap();
        let q = n.forward(&x).unwrap()[index];
        (target - q) * (target - q)
    };
    let mut worst = 0.0f64;
    for i in 0..params.len() {
        let mut plus = params.clone();
        let mut minus = params.clone();
        plus[i] += h;
        minus[i] -= h;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-7);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    Some(worst)
}

#[test]
fn gradients_match_finite_differences() {
    let mut checked = 0;
    for seed in 0..40 {
        if let Some(err) = finite_difference_error(seed) {
            assert!(err < 1e-4, "seed {seed}: relative error {err}");
            checked += 1;
        }
    }
    assert!(checked >= 20);
}

#[test]
fn zero_gradient_leaves_parameters() {
    let mut net = Mlp::new(&[3, 4, 2], 1).unwrap();
    let before = net.clone();
    let mut opt = Adam::new(&net, 1e-3);
    let zero = Gradients::zeros_like(&net);
    opt_step(&mut net, &zero, &mut opt).unwrap();
    assert_eq!(net, before);
}

#[test]
fn first_adam_step_moves_by_learning_rate() {
    let mut net = Mlp::from_layers(vec![Dense {
        inputs: 1,
        outputs: 1,
        weights: vec![0.7],
        bias: vec![0.0],
    }])
    .unwrap();
    let mut g = Gradients::zeros_like(&net);
    g.layers[0].weights[0] = 1.0;
    let mut opt = Adam::new(&net, 0.1);
    opt_step(&mut net, &g, &mut opt).unwrap();
    assert!((net.layers()[0].weights[0] - 0.6).abs() < 1e-7);
    assert_eq!(net.layers()[0].bias[0], 0.0);
}

#[test]
fn optimizer_is_deterministic() {
    let start = Mlp::new(&[3, 4, 2], 9).unwrap();
    let (_, g) = start.backward(&[0.1, 0.2, 0.3], 1, 1.0).unwrap();
    let run = || {
        let mut net = start.clone();
        let mut opt = Adam::new(&net, 1e-2);
        for _ in 0..3 {
            opt_step(&mut net, &g, &mut opt).unwrap();
        }
        net
    };
    assert_eq!(run(), run());
}

#[test]
fn copies_are_independent() {
    let mut src = Mlp::new(&[2, 3, 1], 2).unwrap();
    let copy = copy_params(&src);
    assert_eq!(copy, src);
    assert_eq!(copy_params(&copy), copy);
    src.layers_mut()[0].weights[0] += 1.0;
    assert_ne!(copy, src);
}

#[test]
fn checkpoint_file_roundtrip() {
    let net = Mlp::new(&[5, 6, 2], 4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    MlpCheckpoint::from_net(&net).save(&path).unwrap();
    assert_eq!(MlpCheckpoint::load(&path).unwrap().to_net().unwrap(), net);
    let mut bad = MlpCheckpoint::from_net(&net);
    bad.params.pop();
    assert!(bad.to_net().is_err());
}

#[test]
fn outputs_finite_for_finite_inputs() {
    let net = Mlp::new(&[6, 16, 16, 4], 8).unwrap();
    let out = net.forward(&[1e3, -1e3, 0.5, 0.0, 7.0, -2.0]).unwrap();
    assert!(out.iter().all(|v| v.is_finite()));
}
