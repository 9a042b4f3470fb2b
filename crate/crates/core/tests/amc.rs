use std::f64::consts::PI;

use autor_core::amc::{
    amc_architecture, build_dataset, complex_correntropy, confusion, kernel_peak, train,
    AmcDataset, AmcDatasetSpec, AmcExample, AmcHyperParams, AmcModel, FeatureScaler,
};
use autor_core::nncore::{Array, Network, NetworkParams};
use autor_core::sigchain::{apply_channel, ChannelConfig, IqSequence, Modulation};
use autor_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn iq_from(v: &[(f64, f64)]) -> IqSequence {
    IqSequence::new(v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
}

fn samples() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 4..40)
}

/// Straight double loop with the kernel written out in full.
fn oracle(y: &[Complex64], sigma: f64, l: usize) -> Vec<f64> {
    let m = y.len();
    let mut out = Vec::new();
    for i in 1..=l {
        let count = m - i + 1;
        let mut acc = 0.0;
        for n in 0..count {
            let d = y[n] - y[n + i - 1];
            let d2 = d.re * d.re + d.im * d.im;
            acc += (-d2 / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma * sigma);
        }
        out.push(acc / count as f64);
    }
    out
}

proptest! {
    #[test]
    fn zero_lag_is_kernel_peak(v in samples(), sigma in 0.05..3.0f64) {
        let f = complex_correntropy(&iq_from(&v), sigma, 3.min(v.len())).unwrap();
        prop_assert!((f.values[0] - 1.0 / ((2.0 * PI).sqrt() * sigma * sigma)).abs() <= 1e-9);
    }

    #[test]
    fn global_rotation_leaves_feature_unchanged(v in samples(), theta in -PI..PI, sigma in 0.1..2.0f64) {
        let a = iq_from(&v);
        let rot = Complex64::from_polar(1.0, theta);
        let b = IqSequence::new(a.samples().iter().map(|s| s * rot).collect()).unwrap();
        let l = v.len() / 2;
        let fa = complex_correntropy(&a, sigma, l).unwrap();
        let fb = complex_correntropy(&b, sigma, l).unwrap();
        for (x, y) in fa.values.iter().zip(&fb.values) {
            prop_assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn matches_direct_summation(v in samples(), sigma in 0.1..2.0f64) {
        let a = iq_from(&v);
        let l = v.len();
        let f = complex_correntropy(&a, sigma, l).unwrap();
        for (x, y) in f.values.iter().zip(oracle(a.samples(), sigma, l)) {
            prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn wider_kernel_never_lowers_the_exponential_factor(v in samples(), sigma in 0.05..2.0f64) {
        let a = iq_from(&v);
        let l = v.len() / 2;
        let narrow = complex_correntropy(&a, sigma, l).unwrap();
        let wide = complex_correntropy(&a, 2.0 * sigma, l).unwrap();
        for (n, w) in narrow.values.iter().zip(&wide.values) {
            prop_assert!(w / kernel_peak(2.0 * sigma) >= n / kernel_peak(sigma) - 1e-15);
        }
    }

    #[test]
    fn frequency_offset_keeps_zero_lag(v in samples(), w in -0.5..0.5f64, sigma in 0.1..2.0f64) {
        let ch = ChannelConfig { freq_offset: w, ..ChannelConfig::default() };
        let shifted = apply_channel(&iq_from(&v), &ch).unwrap();
        let f = complex_correntropy(&shifted, sigma, 2).unwrap();
        prop_assert!((f.values[0] - kernel_peak(sigma)).abs() <= 1e-9);
    }

    #[test]
    fn classifier_output_is_a_simplex_point(x in prop::collection::vec(-10.0..10.0f64, 20)) {
        let model = toy_model(1);
        let (_, p) = model.classify(&x).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(p.iter().all(|q| *q >= 0.0));
    }
}

fn toy_model(seed: u64) -> AmcModel {
    let hp = AmcHyperParams {
        conv2_kernel: 8,
        ..AmcHyperParams::default()
    };
    let specs = amc_architecture(20, 3, &hp).unwrap();
    let mut rng = autor_core::rng::Stream::new(seed, "toy", 0);
    AmcModel {
        network: Network::new(specs, &mut rng).unwrap(),
        class_names: vec![Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam16],
        scaler: FeatureScaler {
            mean: vec![0.0; 20],
            inv_std: vec![1.0; 20],
            log: false,
        },
    }
}

#[test]
fn alternating_sequence_by_hand() {
    let f = complex_correntropy(
        &iq_from(&[(1.0, 0.0), (-1.0, 0.0), (1.0, 0.0), (-1.0, 0.0)]),
        1.0,
        2,
    )
    .unwrap();
    let peak = 1.0 / (2.0 * PI).sqrt();
    assert!((f.values[0] - peak).abs() < 1e-12);
    // Three neighbour pairs, each at squared distance 4: (3 * e^-2) / 3.
    assert!((f.values[1] - peak * (-2.0f64).exp()).abs() < 1e-12);
}

#[test]
fn all_logits_equal_picks_first_class() {
    let mut model = toy_model(2);
    model.network = Network::from_parts(
        model.network.specs.clone(),
        NetworkParams::zeros(&model.network.specs),
    )
    .unwrap();
    let (class, p) = model.classify(&[0.5; 20]).unwrap();
    assert_eq!(class, Modulation::Bpsk);
    assert!(p.iter().all(|q| (q - 1.0 / 3.0).abs() < 1e-15));
}

#[test]
fn wrong_feature_length_is_an_input_error() {
    assert!(matches!(
        toy_model(3).classify(&[0.0; 19]),
        Err(Error::Input(_))
    ));
}

fn toy_dataset() -> AmcDataset {
    // Class set by which half of the taps carries the bump.
    let mut examples = Vec::new();
    for k in 0..24 {
        let label = if k % 2 == 0 {
            Modulation::Bpsk
        } else {
            Modulation::Qpsk
        };
        let features = (0..20)
            .map(|i| {
                let on = (i < 10) == (label == Modulation::Bpsk);
                let jitter = 0.05 * ((k * 7 + i * 3) % 11) as f64 / 11.0;
                if i == 0 {
                    1.0
                } else if on {
                    0.8 + jitter
                } else {
                    0.2 + jitter
                }
            })
            .collect();
        examples.push(AmcExample {
            label,
            snr_db: 10.0,
            paths: 1,
            features,
        });
    }
    AmcDataset { examples }
}

#[test]
fn separable_toy_reaches_full_training_accuracy() {
    let hp = AmcHyperParams {
        epochs: 200,
        conv2_kernel: 8,
        ..AmcHyperParams::default()
    };
    let (model, curve) = train(&toy_dataset(), &hp, 5).unwrap();
    let first_perfect = curve.accuracy.iter().position(|a| *a == 1.0);
    assert!(
        first_perfect.is_some_and(|e| e <= 200),
        "{:?}",
        curve.accuracy.last()
    );
    assert!(curve.loss.last().unwrap() < &curve.loss[0]);
    assert_eq!(confusion(&model, &toy_dataset()).unwrap().accuracy(), 1.0);
}

#[test]
fn single_class_is_rejected() {
    let data = toy_dataset();
    let one = data.filtered(|e| e.label == Modulation::Bpsk);
    assert!(matches!(
        train(&one, &AmcHyperParams::default(), 1),
        Err(Error::Input(_))
    ));
}

#[test]
fn checkpoint_round_trip_preserves_predictions() {
    let (model, _) = train(
        &toy_dataset(),
        &AmcHyperParams {
            epochs: 3,
            conv2_kernel: 8,
            ..Default::default()
        },
        9,
    )
    .unwrap();
    let back = AmcModel::from_checkpoint(&model.to_checkpoint().unwrap()).unwrap();
    for e in toy_dataset().examples {
        assert_eq!(
            model.classify(&e.features).unwrap().1,
            back.classify(&e.features).unwrap().1
        );
    }
}

#[test]
fn small_awgn_set_trains_and_labels_each_class() {
    let spec = AmcDatasetSpec {
        paths: vec![1],
        snr_db: vec![10.0],
        messages_per_combo: 4,
        message_len: 600,
        feature_len: 30,
        ..AmcDatasetSpec::default()
    };
    let data = build_dataset(&spec, 3).unwrap();
    assert_eq!(data.len(), 12);
    let hp = AmcHyperParams {
        epochs: 5,
        conv2_kernel: 10,
        ..Default::default()
    };
    let (model, curve) = train(&data, &hp, 3).unwrap();
    assert!(curve.loss.last().unwrap() < &curve.loss[0]);
    assert_eq!(
        model.class_names,
        vec![Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam16]
    );
    let x = Array::from_vec(model.network_input(&data.examples[0].features));
    assert_eq!(x.len(), 30);
}

#[test]
fn log_scaler_standardizes_log_taps() {
    let features = vec![vec![1.0, 0.1], vec![1.0, 0.001]];
    let s = FeatureScaler::fit(&features, true);
    // ln 0.1 and ln 0.001 sit one standard deviation either side of their mean.
    let mid = (0.1f64.ln() + 0.001f64.ln()) / 2.0;
    assert!((s.mean[1] - mid).abs() < 1e-12);
    assert!((s.apply(&[1.0, 0.1])[1] - 1.0).abs() < 1e-12);
    assert!((s.apply(&[1.0, 0.001])[1] + 1.0).abs() < 1e-12);
    assert_eq!(s.inv_std[0], 0.0);
    assert!(s.apply(&[1.0, 0.0])[1].is_finite());
}

#[test]
fn scaler_without_log_flag_deserializes_as_linear() {
    let s: FeatureScaler = serde_json::from_str(r#"{"mean":[0.5],"inv_std":[2.0]}"#).unwrap();
    assert!(!s.log);
    assert_eq!(s.apply(&[1.0]), vec![1.0]);
}

#[test]
fn log_feature_model_survives_checkpoint() {
    let hp = AmcHyperParams {
        epochs: 3,
        conv2_kernel: 8,
        log_features: true,
        ..Default::default()
    };
    let (model, _) = train(&toy_dataset(), &hp, 4).unwrap();
    assert!(model.scaler.log);
    let back = AmcModel::from_checkpoint(&model.to_checkpoint().unwrap()).unwrap();
    assert_eq!(back, model);
}

#[test]
fn info_bit_reference_shifts_symbol_snr_per_scheme() {
    let spec = AmcDatasetSpec {
        ebn0_code_rate: Some(0.5),
        ..AmcDatasetSpec::default()
    };
    // bits per symbol times rate: 0.5, 1 and 2.
    let expect = [
        (Modulation::Bpsk, -10.0 * 2f64.log10()),
        (Modulation::Qpsk, 0.0),
        (Modulation::Qam16, 10.0 * 2f64.log10()),
    ];
    for (m, shift) in expect {
        assert!((spec.symbol_snr_db(m, 4.0) - (4.0 + shift)).abs() < 1e-12);
    }
    assert_eq!(
        AmcDatasetSpec::default().symbol_snr_db(Modulation::Qam16, 4.0),
        4.0
    );
    let bad = AmcDatasetSpec {
        ebn0_code_rate: Some(1.5),
        ..AmcDatasetSpec::default()
    };
    assert!(matches!(bad.validate(), Err(Error::Config(_))));
}
