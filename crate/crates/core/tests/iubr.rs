use autor_core::iubr::*;
use autor_core::rng::Stream;
use autor_core::Error;
use proptest::prelude::*;
use rand::Rng;

fn toy_cfg(samples: usize) -> IubrDatasetConfig {
    IubrDatasetConfig {
        subcarriers: 64,
        samples,
        connections: (1, 2),
        connection_width: (4, 8),
        ..IubrDatasetConfig::sub6()
    }
}

fn toy_hp() -> IubrHyperParams {
    IubrHyperParams {
        compression_rate: 0.25,
        epochs: 60,
        ..IubrHyperParams::default()
    }
}

fn random_spectrum(n: usize, rng: &mut Stream) -> Spectrum {
    Spectrum::new((0..2 * n).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
}

#[test]
fn empty_occupancy_is_pure_noise() {
    let cfg = IubrDatasetConfig {
        connections: (0, 0),
        samples: 20,
        ..IubrDatasetConfig::sub6()
    };
    let data = generate_dataset(&cfg, 4).unwrap();
    for s in &data.signals {
        assert!(s.mask.iter().all(|m| !m));
        assert!(s.spectrum.energy().iter().all(|e| *e < 0.05));
    }
}

#[test]
fn desk_sizes() {
    let hp = IubrHyperParams::default();
    assert_eq!(hp.measurements(256).unwrap(), 32);
    let codec = Codec::new(256, &hp, 1).unwrap();
    assert_eq!(
        (codec.matrix.measurements(), codec.matrix.subcarriers()),
        (32, 256)
    );
    assert_eq!(codec.matrix.compression_rate(), 0.125);
    assert_eq!(IubrDatasetConfig::default().snr_db, 30.0);
    assert!(matches!(
        IubrHyperParams {
            compression_rate: 1.0,
            ..hp
        }
        .validate(),
        Err(Error::Config(_))
    ));
}

#[test]
fn generated_noise_matches_snr() {
    let cfg = IubrDatasetConfig {
        connections: (0, 0),
        samples: 200,
        ..IubrDatasetConfig::sub6()
    };
    let data = generate_dataset(&cfg, 8).unwrap();
    let energies: Vec<f64> = data
        .signals
        .iter()
        .flat_map(|s| s.spectrum.energy())
        .collect();
    let mean = energies.iter().sum::<f64>() / energies.len() as f64;
    assert!((mean / 1e-3 - 1.0).abs() < 0.02, "{mean}");
}

#[test]
fn occupied_blocks_carry_configured_power() {
    let cfg = IubrDatasetConfig {
        samples: 50,
        snr_db: 200.0,
        ..IubrDatasetConfig::sub6()
    };
    for s in generate_dataset(&cfg, 2).unwrap().signals {
        for (e, m) in s.spectrum.energy().into_iter().zip(&s.mask) {
            if *m {
                assert!((1.0 - 1e-9..=10f64.powf(0.6) + 1e-9).contains(&e));
            } else {
                assert!(e < 1e-15);
            }
        }
        let k = s.mask.iter().filter(|m| **m).count();
        assert!((8..=48).contains(&k));
    }
}

#[test]
fn same_seed_same_digest() {
    let cfg = toy_cfg(40);
    let a = generate_dataset(&cfg, 9).unwrap().digest().unwrap();
    let b = generate_dataset(&cfg, 9).unwrap().digest().unwrap();
    let c = generate_dataset(&cfg, 10).unwrap().digest().unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn csv_round_trip() {
    let data = generate_dataset(&toy_cfg(5), 3).unwrap();
    let text = data.to_csv_string().unwrap();
    assert!(text.starts_with("mask,re_0,re_1,"));
    assert_eq!(IubrDataset::read_csv(text.as_bytes()).unwrap(), data);
    let broken = text.replacen("mask,", "occupied,", 1);
    assert!(matches!(
        IubrDataset::read_csv(broken.as_bytes()),
        Err(Error::Parse { line: 1, .. })
    ));
    let bad_mask = "mask,re_0,im_0\n2,0.0,0.0\n";
    assert!(matches!(
        IubrDataset::read_csv(bad_mask.as_bytes()),
        Err(Error::Parse { line: 2, .. })
    ));
    let short_mask = "mask,re_0,re_1,im_0,im_1\n1,0,0,0,0\n";
    assert!(IubrDataset::read_csv(short_mask.as_bytes()).is_err());
}

#[test]
fn compress_is_linear_on_basics() {
    let mut rng = Stream::new(1, "phi", 0);
    let phi = SensingMatrix::gaussian(8, 32, &mut rng);
    let zero = compress(&Spectrum::zeros(32), &phi).unwrap();
    assert!(zero.values().iter().all(|v| *v == 0.0));
    let x = random_spectrum(32, &mut rng);
    assert_eq!(
        compress(&x, &SensingMatrix::identity(32)).unwrap().values(),
        x.values()
    );
    assert!(matches!(
        compress(&Spectrum::zeros(16), &phi),
        Err(Error::Input(_))
    ));
}

proptest! {
    #[test]
    fn compress_superposition(seed in 0u64..10_000) {
        let mut rng = Stream::new(seed, "sup", 0);
        let phi = SensingMatrix::gaussian(32, 256, &mut rng);
        let a = random_spectrum(256, &mut rng);
        let b = random_spectrum(256, &mut rng);
        let sum = Spectrum::new(a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect()).unwrap();
        let ya = compress(&a, &phi).unwrap();
        let yb = compress(&b, &phi).unwrap();
        let ys = compress(&sum, &phi).unwrap();
        for ((s, p), q) in ys.values().iter().zip(ya.values()).zip(yb.values()) {
            prop_assert!((s - p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn self_similarity_is_perfect(seed in 0u64..10_000) {
        let x = random_spectrum(64, &mut Stream::new(seed, "self", 0));
        prop_assert!((cosine_similarity(x.values(), x.values()) - 1.0).abs() < 1e-12);
        prop_assert_eq!(ssim_1d(&x, &x).unwrap(), 1.0);
    }

    #[test]
    fn metrics_stay_in_range(seed in 0u64..10_000) {
        let mut rng = Stream::new(seed, "range", 0);
        let a = random_spectrum(32, &mut rng);
        let b = random_spectrum(32, &mut rng);
        let c = cosine_similarity(a.values(), b.values());
        let s = ssim_1d(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&c));
        prop_assert!((-1.0..=1.0).contains(&s));
        let mask: Vec<bool> = (0..32).map(|_| rng.random()).collect();
        let det: Vec<bool> = (0..32).map(|_| rng.random()).collect();
        let truth = SpectrumSignal::new(b, mask).unwrap();
        let m = metrics(&[a], &[truth], &[det]).unwrap();
        for p in [m.p_d, m.p_f].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}

#[test]
fn perfect_reconstruction_detects_everything() {
    let data = generate_dataset(
        &IubrDatasetConfig {
            samples: 20,
            ..IubrDatasetConfig::sub6()
        },
        5,
    )
    .unwrap();
    let estimates: Vec<Spectrum> = data.signals.iter().map(|s| s.spectrum.clone()).collect();
    // Noise energy stays far below 0.1; tones carry at least unit energy.
    let det: Vec<Vec<bool>> = estimates.iter().map(|e| detect(e, 0.1).unwrap()).collect();
    let m = metrics(&estimates, &data.signals, &det).unwrap();
    assert_eq!((m.p_d, m.p_f, m.mse), (Some(1.0), Some(0.0), 0.0));
    assert!((m.cosine_similarity - 1.0).abs() < 1e-12);
    assert_eq!(m.ssim, 1.0);
    assert!(matches!(detect(&estimates[0], 0.0), Err(Error::Input(_))));
}

#[test]
fn no_occupied_subcarriers_leaves_detection_rate_undefined() {
    let x = Spectrum::zeros(8);
    let truth = SpectrumSignal::new(x.clone(), vec![false; 8]).unwrap();
    let m = metrics(&[x], &[truth], &[vec![false; 8]]).unwrap();
    assert_eq!((m.p_d, m.p_f), (None, Some(0.0)));
    let mut out = Vec::new();
    m.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("mse,cosine_similarity,ssim,p_d,p_f\n"));
    assert!(text.contains(",NA,"));
}

#[test]
fn untrained_codec_shape_contract() {
    let codec = Codec::new(64, &toy_hp(), 2).unwrap();
    let x = random_spectrum(64, &mut Stream::new(2, "x", 0));
    let y = codec.round_trip(&x).unwrap();
    assert_eq!(y.subcarriers(), 64);
    assert!(y.values().iter().all(|v| v.is_finite()));
    let wrong = compress(
        &random_spectrum(32, &mut Stream::new(2, "x", 1)),
        &SensingMatrix::identity(32),
    )
    .unwrap();
    assert!(matches!(codec.reconstruct(&wrong), Err(Error::Input(_))));
}

#[test]
fn calibration_meets_its_budget_on_the_calibration_set() {
    let data = generate_dataset(&toy_cfg(60), 6).unwrap();
    let mut codec = Codec::new(64, &toy_hp(), 6).unwrap();
    for target in [0.01, 0.05, 0.2] {
        codec.threshold = Some(calibrate_threshold(&codec, &data, target).unwrap());
        let m = evaluate(&codec, &data).unwrap();
        assert!(m.p_f.unwrap() <= target, "{target}: {:?}", m.p_f);
    }
    codec.threshold = None;
    assert!(matches!(evaluate(&codec, &data), Err(Error::State(_))));
}

#[test]
fn toy_training_end_to_end() {
    let data = generate_dataset(&toy_cfg(1000), 11).unwrap();
    let (train, val) = data.split_tail(0.2).unwrap();
    let hp = toy_hp();
    let initial = Codec::new(64, &hp, 4).unwrap();
    let (mut codec, curve) = train_end_to_end(&train, &hp, 4).unwrap();

    assert_eq!(curve.mse.len(), hp.epochs + 1);
    let train_mse = mean_mse(&codec, &train).unwrap();
    assert!(train_mse < 0.01, "training mse {train_mse}");
    for w in curve.mse.windows(2) {
        assert!(w[1] <= w[0] * 1.05, "{:?}", curve.mse);
    }
    let before = mean_mse(&initial, &val).unwrap();
    let after = mean_mse(&codec, &val).unwrap();
    assert!(after <= 0.7 * before, "validation {before} -> {after}");
    assert!(codec.matrix.frobenius_distance(&initial.matrix) > 0.0);

    codec.threshold = Some(calibrate_threshold(&codec, &val, hp.pf_target).unwrap());
    let quiet = IubrDatasetConfig {
        connections: (0, 0),
        samples: 20,
        ..toy_cfg(0)
    };
    for s in generate_dataset(&quiet, 12).unwrap().signals {
        let r = codec.round_trip(&s.spectrum).unwrap();
        assert!(detect(&r, codec.threshold.unwrap())
            .unwrap()
            .iter()
            .all(|d| !d));
    }

    let back = Codec::from_checkpoint(&codec.to_checkpoint().unwrap()).unwrap();
    assert_eq!(back, codec);
}

#[test]
fn frozen_matrix_stays_at_initialization() {
    let data = generate_dataset(&toy_cfg(40), 13).unwrap();
    let hp = IubrHyperParams {
        train_matrix: false,
        epochs: 2,
        ..toy_hp()
    };
    let (codec, _) = train_end_to_end(&data, &hp, 5).unwrap();
    assert_eq!(codec.matrix, Codec::new(64, &hp, 5).unwrap().matrix);
    assert!(matches!(
        train_end_to_end(&IubrDataset::default(), &hp, 5),
        Err(Error::Input(_))
    ));
}
