//! Acceptance suite. Each test writes one `PASS` or `FAIL` line to the real
//! stdout, so the verdicts show up without `--nocapture`, then asserts.
//!
//! Run directories land under `target/tmp/acceptance` and are kept for
//! inspection.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

mod common;

use autor_core::amc::{complex_correntropy, kernel_peak, AmcDatasetSpec, AmcNoise};
use autor_core::dirm::{
    brute_force, combination_count, noise_power_mw, CellConfig, SeTable, SlotState,
};
use autor_core::harness::{run, Algorithm, DecoderKind, ExperimentConfig, RunInputs, Verb};
use autor_core::ldpc::{
    bpsk_awgn_llr, classic_min_sum_run, neural_ms_decode, LdpcCode, NeuralMsParams,
};
use autor_core::nncore::{grad_check, Activation, Array, LayerSpec, NetworkParams, Padding};
use autor_core::rng::Stream;
use autor_core::sigchain::{random_bits, IqSequence, Modulation};
use common::{gf2_syndrome, hamming, nested_loop_best, operating_point_amc};
use num_complex::Complex64;
use rand::Rng;

/// `secs` is the criterion's runtime, including any shared run it reads.
fn verdict(
    id: u8,
    title: &str,
    secs: f64,
    budget_s: Option<f64>,
    detail: String,
    mut failures: Vec<String>,
) {
    if let Some(b) = budget_s.filter(|b| secs > *b) {
        failures.push(format!("took {secs:.1} s, budget {b:.0} s"));
    }
    let line = if failures.is_empty() {
        format!("\nPASS {id:02} {title} ({secs:.1} s): {detail}\n")
    } else {
        format!(
            "\nFAIL {id:02} {title} ({secs:.1} s): {}; {detail}\n",
            failures.join("; ")
        )
    };
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(failures.is_empty(), "{}", line.trim_end());
}

fn secs(started: Instant) -> f64 {
    started.elapsed().as_secs_f64()
}

fn check(failures: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        failures.push(what());
    }
}

// ---------------------------------------------------------------- run chains

fn acceptance_root(label: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR"))
        .join("acceptance")
        .join(label)
}

type Setup = fn(&Path) -> (ExperimentConfig, RunInputs);

/// One harness invocation; `setup` receives the chain root so later steps can
/// point at checkpoints written by earlier ones.
struct Step {
    dir: &'static str,
    algorithm: Algorithm,
    verb: Verb,
    setup: Setup,
}

struct Chain {
    root: PathBuf,
    seconds: f64,
}

impl Chain {
    fn path(&self, step: &str, file: &str) -> PathBuf {
        self.root.join(step).join(file)
    }
}

fn execute(root: &Path, steps: &[Step]) -> Chain {
    let _ = fs::remove_dir_all(root);
    let started = Instant::now();
    for s in steps {
        let (cfg, inputs) = (s.setup)(root);
        run(cfg, s.algorithm, s.verb, &root.join(s.dir), &inputs)
            .unwrap_or_else(|e| panic!("{} {} in {}: {e}", s.algorithm, s.verb, s.dir));
    }
    Chain {
        root: root.to_path_buf(),
        seconds: started.elapsed().as_secs_f64(),
    }
}

fn seeded(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        seed,
        ..ExperimentConfig::default()
    }
}

fn from_checkpoint(path: PathBuf) -> RunInputs {
    RunInputs {
        checkpoint: Some(path),
        ..RunInputs::default()
    }
}

const LDPC_STEPS: &[Step] = &[
    Step {
        dir: "train",
        algorithm: Algorithm::Ldpc,
        verb: Verb::Train,
        setup: |_| (seeded(1), RunInputs::default()),
    },
    Step {
        dir: "neural",
        algorithm: Algorithm::Ldpc,
        verb: Verb::Eval,
        setup: |root| {
            (
                seeded(1),
                from_checkpoint(root.join("train/ldpc.ckpt.json")),
            )
        },
    },
    Step {
        dir: "classic",
        algorithm: Algorithm::Ldpc,
        verb: Verb::Eval,
        setup: |_| {
            let mut cfg = seeded(1);
            cfg.ldpc.decoder = DecoderKind::Classic;
            cfg.ldpc.layers = cfg.ldpc.schedule.layers;
            (cfg, RunInputs::default())
        },
    },
];

fn held_out_amc_config() -> ExperimentConfig {
    let mut cfg = seeded(7);
    cfg.amc.dataset = AmcDatasetSpec {
        snr_db: vec![6.0, 8.0, 10.0],
        paths: vec![1],
        messages_per_combo: 100,
        noise: AmcNoise::Awgn,
        ..AmcDatasetSpec::default()
    };
    cfg.amc.test_fraction = 0.2;
    cfg.amc.split_seed = 1;
    cfg
}

const AMC_STEPS: &[Step] = &[Step {
    dir: "train",
    algorithm: Algorithm::Amc,
    verb: Verb::Train,
    setup: |_| (held_out_amc_config(), RunInputs::default()),
}];

const DIRM_STEPS: &[Step] = &[
    Step {
        dir: "train",
        algorithm: Algorithm::Dirm,
        verb: Verb::Train,
        setup: |_| (seeded(1), RunInputs::default()),
    },
    Step {
        dir: "eval",
        algorithm: Algorithm::Dirm,
        verb: Verb::Eval,
        setup: |root| (seeded(1), from_checkpoint(root.join("train"))),
    },
];

fn iubr_config(seed: u64) -> ExperimentConfig {
    let mut cfg = seeded(seed);
    cfg.iubr.ablation.seeds = vec![1, 2, 3];
    cfg
}

const IUBR_STEPS: &[Step] = &[Step {
    dir: "train",
    algorithm: Algorithm::Iubr,
    verb: Verb::Train,
    setup: |_| (iubr_config(3), RunInputs::default()),
}];

/// Same command shape as the full IUBR run at a size that can be repeated.
const IUBR_SMALL_STEPS: &[Step] = &[Step {
    dir: "train",
    algorithm: Algorithm::Iubr,
    verb: Verb::Train,
    setup: |_| {
        let mut cfg = iubr_config(3);
        cfg.iubr.dataset.samples = 700;
        cfg.iubr.validation_samples = 100;
        cfg.iubr.test_samples = 100;
        cfg.iubr.model.epochs = 4;
        cfg.iubr.ablation.seeds = vec![1];
        cfg.iubr.ablation.samples = 200;
        cfg.iubr.ablation.epochs = 2;
        (cfg, RunInputs::default())
    },
}];

fn e2e_config(
    scheme: Modulation,
    ebn0_db: f64,
    frames: usize,
    seed: u64,
    root: &Path,
) -> ExperimentConfig {
    let mut cfg = seeded(seed);
    cfg.e2e.scheme = scheme;
    cfg.e2e.ebn0_db = ebn0_db;
    cfg.e2e.frames = frames;
    cfg.e2e.amc_checkpoint = Some(root.join("amc/amc.ckpt.json"));
    cfg
}

const E2E_STEPS: &[Step] = &[
    Step {
        dir: "amc",
        algorithm: Algorithm::Amc,
        verb: Verb::Train,
        setup: |_| {
            let mut cfg = seeded(21);
            let code = LdpcCode::bg2(cfg.e2e.lifting).unwrap();
            (cfg.amc.dataset, cfg.amc.model) = operating_point_amc(code.rate());
            cfg.amc.test_fraction = 0.0;
            (cfg, RunInputs::default())
        },
    },
    Step {
        dir: "bpsk-clean",
        algorithm: Algorithm::E2e,
        verb: Verb::Run,
        setup: |root| {
            (
                e2e_config(Modulation::Bpsk, f64::INFINITY, 12, 1, root),
                RunInputs::default(),
            )
        },
    },
    Step {
        dir: "qpsk-4db",
        algorithm: Algorithm::E2e,
        verb: Verb::Run,
        setup: |root| {
            (
                e2e_config(Modulation::Qpsk, 4.0, 24, 2, root),
                RunInputs::default(),
            )
        },
    },
];

const CHAINS: [(&str, &[Step]); 5] = [
    ("ldpc", LDPC_STEPS),
    ("amc", AMC_STEPS),
    ("dirm", DIRM_STEPS),
    ("iubr", IUBR_STEPS),
    ("e2e", E2E_STEPS),
];

fn chain(label: &'static str) -> &'static Chain {
    static DONE: OnceLock<BTreeMap<&'static str, OnceLock<Chain>>> = OnceLock::new();
    let all = DONE.get_or_init(|| CHAINS.iter().map(|(l, _)| (*l, OnceLock::new())).collect());
    let steps = CHAINS
        .iter()
        .find(|(l, _)| *l == label)
        .map(|(_, s)| *s)
        .unwrap();
    all[label].get_or_init(|| execute(&acceptance_root(label), steps))
}

type Table = Vec<BTreeMap<String, String>>;

fn table(path: &Path) -> Table {
    let mut r = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let head = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            head.iter()
                .zip(rec.unwrap().iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn num(row: &BTreeMap<String, String>, col: &str) -> f64 {
    row[col]
        .parse()
        .unwrap_or_else(|_| panic!("{col}={:?} is not a number", row[col]))
}

fn row_for<'a>(t: &'a Table, col: &str, key: &str) -> &'a BTreeMap<String, String> {
    t.iter()
        .find(|r| r[col] == key)
        .unwrap_or_else(|| panic!("no {col} = {key}"))
}

// ------------------------------------------------------------------ criteria

fn one_hot(i: usize, n: usize) -> Array {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    Array::from_vec(v)
}

#[test]
fn c01_gradient_oracle() {
    let started = Instant::now();
    let stacks: Vec<Vec<LayerSpec>> = vec![
        vec![
            LayerSpec::dense(5, 6, Activation::Tanh),
            LayerSpec::dense(6, 4, Activation::Relu),
            LayerSpec::dense(4, 3, Activation::Linear),
            LayerSpec::Softmax { size: 3 },
        ],
        vec![
            LayerSpec::conv1d(1, 20, 4, 5, Activation::Relu),
            LayerSpec::conv1d(4, 16, 3, 6, Activation::Tanh),
            LayerSpec::global_avg_pool(3, 11),
            LayerSpec::dense(3, 3, Activation::Linear),
            LayerSpec::Softmax { size: 3 },
        ],
        vec![
            LayerSpec::Conv1d {
                in_channels: 2,
                in_len: 13,
                filter_count: 3,
                kernel_size: 4,
                stride: 2,
                padding: Padding::Same,
                activation: Activation::Linear,
            },
            LayerSpec::AvgPool1d {
                channels: 3,
                in_len: 7,
                window: 3,
                stride: 2,
            },
            LayerSpec::dense(9, 2, Activation::Tanh),
        ],
    ];
    let (mut failures, mut worst, mut checked) = (Vec::new(), 0.0f64, 0);
    for (k, specs) in stacks.iter().enumerate() {
        for seed in 0..20u64 {
            let mut rng = Stream::new(seed, "acceptance-grad", k as u64);
            let params = NetworkParams::init(specs, &mut rng).unwrap();
            let x = Array::from_vec(
                (0..specs[0].input_size())
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect(),
            );
            let outputs = specs.last().unwrap().output_size();
            let label = match specs.last() {
                Some(LayerSpec::Softmax { .. }) => one_hot(seed as usize % outputs, outputs),
                _ => Array::from_vec((0..outputs).map(|_| rng.random_range(-1.0..1.0)).collect()),
            };
            let r = grad_check(specs, &params, &x, &label, 1e-4).unwrap();
            worst = worst.max(r.max_rel_error);
            checked += r.checked;
            check(&mut failures, r.passed(), || {
                format!("stack {k} seed {seed}: {:?}", r.failures.first())
            });
        }
    }
    let detail = format!("{checked} parameters, max relative error {worst:.2e}");
    verdict(
        1,
        "gradient oracle",
        secs(started),
        Some(60.0),
        detail,
        failures,
    );
}

fn random_llrs(n: usize, rng: &mut Stream) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-8.0..8.0)).collect()
}

fn same_messages(code: &LdpcCode, llr: &[f64], layers: usize) -> bool {
    let neural = neural_ms_decode(llr, &code.graph, &NeuralMsParams::unit(layers), layers).unwrap();
    let classic = classic_min_sum_run(llr, &code.graph, layers, true).unwrap();
    neural.trace.len() == layers
        && neural.trace.len() == classic.trace.len()
        && neural
            .trace
            .iter()
            .zip(&classic.trace)
            .all(|(a, b)| a.var_to_check == b.var_to_check && a.check_to_var == b.check_to_var)
        && neural.llr == classic.llr
        && neural.hard == classic.hard
}

#[test]
fn c02_min_sum_equivalence() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let small = hamming();
    let mut rng = Stream::new(2, "acceptance-hamming", 0);
    for t in 0..50 {
        let llr = random_llrs(small.n(), &mut rng);
        check(&mut failures, same_messages(&small, &llr, 5), || {
            format!("hamming vector {t}")
        });
    }
    let bg2 = LdpcCode::bg2(16).unwrap();
    let mut rng = Stream::new(2, "acceptance-bg2", 0);
    for t in 0..10 {
        let cw = bg2.random_codeword(&mut rng);
        let llr = bpsk_awgn_llr(&cw, 1.0 + 0.2 * t as f64, bg2.rate(), &mut rng).unwrap();
        check(&mut failures, same_messages(&bg2, &llr, 10), || {
            format!("bg2 vector {t}")
        });
    }
    let detail =
        "50 Hamming vectors at 5 layers, 10 BG2 vectors at 10 layers, every message identical"
            .to_string();
    verdict(
        2,
        "min-sum equivalence",
        secs(started),
        Some(60.0),
        detail,
        failures,
    );
}

#[test]
fn c03_ldpc_structure() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let code = LdpcCode::bg2(16).unwrap();
    check(&mut failures, code.n() == 832, || {
        format!("{} columns", code.n())
    });
    let dense = code.h.to_dense();
    let mut rng = Stream::new(3, "acceptance-syndrome", 0);
    let mut nonzero = 0;
    for _ in 0..1000 {
        let cw = code
            .encoder
            .encode(&random_bits(code.k(), &mut rng))
            .unwrap();
        nonzero += usize::from(gf2_syndrome(&dense, &cw).iter().any(|s| *s != 0));
    }
    check(&mut failures, nonzero == 0, || {
        format!("{nonzero} codewords with nonzero syndrome")
    });
    let detail = format!(
        "{} columns, {} checks, 1000 encoded messages with zero syndrome",
        code.n(),
        dense.len()
    );
    verdict(
        3,
        "LDPC structure",
        secs(started),
        Some(60.0),
        detail,
        failures,
    );
}

#[test]
fn c04_neural_min_sum_training() {
    let c = chain("ldpc");
    let started = Instant::now();
    let mut failures = Vec::new();
    let layers = table(&c.path("train", "layer_loss.csv"));
    check(&mut failures, layers.len() == 10, || {
        format!("{} layers trained", layers.len())
    });
    let loss: Vec<f64> = layers.iter().map(|r| num(r, "final_loss")).collect();
    for (l, w) in loss.windows(2).enumerate() {
        check(&mut failures, w[1] <= 1.05 * w[0], || {
            format!("loss rises at layer {}: {} -> {}", l + 2, w[0], w[1])
        });
    }
    let cfg = ExperimentConfig::load(&c.path("neural", "resolved-config.toml")).unwrap();
    check(&mut failures, cfg.ldpc.trials >= 2000, || {
        format!("{} codewords per point", cfg.ldpc.trials)
    });
    let ber = table(&c.path("neural", "ber.csv"));
    let points: Vec<f64> = ber.iter().map(|r| num(r, "ebn0_db")).collect();
    check(&mut failures, points == [1.0, 2.0, 3.0], || {
        format!("Eb/N0 points {points:?}")
    });
    let mut shown = Vec::new();
    for r in &ber {
        let (pre, post) = (num(r, "pre_pct"), num(r, "post_pct"));
        check(&mut failures, post > pre, || {
            format!("{} dB: post {post} <= pre {pre}", r["ebn0_db"])
        });
        shown.push(format!("{} dB {pre:.2}% -> {post:.3}%", num(r, "ebn0_db")));
    }
    let detail = format!(
        "loss {:.4} -> {:.4} over {} layers; {} codewords/point; {}",
        loss.first().copied().unwrap_or(f64::NAN),
        loss.last().copied().unwrap_or(f64::NAN),
        loss.len(),
        cfg.ldpc.trials,
        shown.join(", ")
    );
    verdict(
        4,
        "neural min-sum training",
        c.seconds + secs(started),
        Some(1800.0),
        detail,
        failures,
    );
}

#[test]
fn c05_trained_versus_classic() {
    let c = chain("ldpc");
    let started = Instant::now();
    let mut failures = Vec::new();
    let trials = ExperimentConfig::load(&c.path("neural", "resolved-config.toml"))
        .unwrap()
        .ldpc
        .trials as f64;
    let neural = table(&c.path("neural", "ber.csv"));
    let classic = table(&c.path("classic", "ber.csv"));
    let classic_cfg = ExperimentConfig::load(&c.path("classic", "resolved-config.toml")).unwrap();
    check(&mut failures, classic_cfg.ldpc.layers == 10, || {
        format!("classic at {} layers", classic_cfg.ldpc.layers)
    });
    let mut shown = Vec::new();
    for (n, k) in neural.iter().zip(&classic) {
        let (pn, pc) = (num(n, "bler"), num(k, "bler"));
        let margin = 1.96 * (pn * (1.0 - pn) / trials + pc * (1.0 - pc) / trials).sqrt();
        check(&mut failures, pn <= pc + margin, || {
            format!(
                "{} dB: neural {pn} > classic {pc} + {margin:.4}",
                n["ebn0_db"]
            )
        });
        shown.push(format!("{} dB {pn:.4} vs {pc:.4}", num(n, "ebn0_db")));
    }
    check(
        &mut failures,
        neural.len() == classic.len() && !neural.is_empty(),
        || "row count mismatch".into(),
    );
    let detail = format!("BLER neural vs classic at 10 layers: {}", shown.join(", "));
    verdict(
        5,
        "trained versus classic",
        secs(started),
        None,
        detail,
        failures,
    );
}

#[test]
fn c06_modulation_classification() {
    let c = chain("amc");
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut rng = Stream::new(6, "acceptance-correntropy", 0);
    let (mut zero_lag, mut rotation) = (0.0f64, 0.0f64);
    for t in 0..20 {
        let sigma = [0.2, 0.5, 1.0, 2.0][t % 4];
        let samples: Vec<Complex64> = (0..400)
            .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect();
        let iq = IqSequence::new(samples.clone()).unwrap();
        let f = complex_correntropy(&iq, sigma, 50).unwrap();
        zero_lag = zero_lag.max((f.values[0] - 1.0 / ((2.0 * PI).sqrt() * sigma * sigma)).abs());
        zero_lag = zero_lag.max((f.values[0] - kernel_peak(sigma)).abs());
        let turn = Complex64::from_polar(1.0, rng.random_range(-PI..PI));
        let rotated = IqSequence::new(samples.iter().map(|s| s * turn).collect()).unwrap();
        let g = complex_correntropy(&rotated, sigma, 50).unwrap();
        for (a, b) in f.values.iter().zip(&g.values) {
            rotation = rotation.max((a - b).abs());
        }
    }
    check(&mut failures, zero_lag <= 1e-9, || {
        format!("zero-lag error {zero_lag:e}")
    });
    check(&mut failures, rotation <= 1e-12, || {
        format!("rotation error {rotation:e}")
    });

    let m = &table(&c.path("train", "metrics.csv"))[0];
    let acc = num(m, "accuracy");
    check(&mut failures, acc >= 0.9, || {
        format!("held-out accuracy {acc}")
    });
    let confusion = fs::read_to_string(c.path("train", "confusion.csv")).unwrap();
    let detail = format!(
        "held-out accuracy {acc:.4} on {} examples; zero-lag error {zero_lag:.1e}; rotation error {rotation:.1e}; confusion {}",
        m["examples"],
        confusion.lines().skip(1).collect::<Vec<_>>().join(" | ")
    );
    verdict(
        6,
        "modulation classification",
        c.seconds + secs(started),
        Some(900.0),
        detail,
        failures,
    );
}

#[test]
fn c07_radio_management() {
    let c = chain("dirm");
    let started = Instant::now();
    let mut failures = Vec::new();
    let cfg = ExperimentConfig::load(&c.path("train", "resolved-config.toml")).unwrap();
    let shape = (
        cfg.dirm.cell.pairs(),
        cfg.dirm.cell.resource_blocks,
        cfg.dirm.cell.power_pool_dbm.len(),
    );
    check(&mut failures, shape == (2, 2, 2), || {
        format!("cell {shape:?}")
    });
    check(&mut failures, cfg.dirm.dqn.episodes == 300, || {
        format!("{} episodes", cfg.dirm.dqn.episodes)
    });
    check(&mut failures, cfg.dirm.eval_episodes == 50, || {
        format!("{} eval episodes", cfg.dirm.eval_episodes)
    });
    let reward = table(&c.path("eval", "reward.csv"));
    let eval = table(&c.path("eval", "eval.csv"));
    let learned = num(row_for(&reward, "policy", "dirm"), "mean_slot_reward");
    let oracle = num(
        row_for(&reward, "policy", "brute_force"),
        "mean_slot_reward",
    );
    let ratio = learned / oracle;
    let own = num(row_for(&eval, "policy", "dirm"), "collision_rate");
    let random = num(row_for(&eval, "policy", "random"), "collision_rate");
    check(&mut failures, ratio >= 0.9, || {
        format!("reward ratio {ratio:.4}")
    });
    check(&mut failures, own < 0.05, || {
        format!("collision rate {own:.4}")
    });
    check(&mut failures, random >= 3.0 * own, || {
        format!("random collisions {random:.4} < 3 x {own:.4}")
    });
    let detail = format!(
        "reward {learned:.4} vs brute force {oracle:.4} (ratio {ratio:.4}); collisions {own:.4} vs random {random:.4}; train+eval {:.1} s",
        c.seconds
    );
    verdict(
        7,
        "radio management at desk scale",
        c.seconds + secs(started),
        Some(1200.0),
        detail,
        failures,
    );
}

#[test]
fn c08_brute_force_oracle() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let count = combination_count(3, 4, 6);
    check(&mut failures, count == 16_777_216, || {
        format!("count {count}")
    });
    let cfg = CellConfig {
        users: 12,
        resource_blocks: 3,
        power_pool_dbm: vec![5.0, 10.0, 15.0, 23.0],
        ..CellConfig::desk()
    };
    let big = SlotState {
        gains: vec![vec![1e-10; 6]; 6],
    };
    let refused = brute_force(&cfg, &SeTable::default(), &big, 1 << 20).is_err();
    check(&mut failures, refused, || {
        "a 16.7M enumeration was not refused by the cap".into()
    });

    let desk = CellConfig::desk();
    let table = SeTable::default();
    let mut rng = Stream::new(8, "acceptance-bf", 0);
    let mut agree = 0;
    for _ in 0..100 {
        let gains: Vec<Vec<f64>> = (0..2)
            .map(|_| {
                (0..2)
                    .map(|_| 10f64.powf(rng.random_range(-13.0..-8.0)))
                    .collect()
            })
            .collect();
        let got = brute_force(
            &desk,
            &table,
            &SlotState {
                gains: gains.clone(),
            },
            1 << 20,
        )
        .unwrap();
        let (v, a0, a1) = nested_loop_best(
            &gains,
            &desk.power_pool_dbm,
            desk.resource_blocks,
            noise_power_mw(&desk),
        );
        let same = (got.value - v).abs() < 1e-9
            && (got.actions[0].index(&desk), got.actions[1].index(&desk)) == (a0, a1);
        agree += usize::from(same);
    }
    check(&mut failures, agree == 100, || {
        format!("{agree}/100 slots agree with the nested-loop oracle")
    });
    let detail = format!(
        "U=6, M=3, |P|=4 gives {count}; 2-pair optimum matches nested loops on {agree}/100 slots"
    );
    verdict(
        8,
        "brute-force oracle",
        secs(started),
        None,
        detail,
        failures,
    );
}

#[test]
fn c09_learned_compressed_sensing() {
    let c = chain("iubr");
    let started = Instant::now();
    let mut failures = Vec::new();
    let cfg = ExperimentConfig::load(&c.path("train", "resolved-config.toml")).unwrap();
    let n_m =
        (cfg.iubr.model.compression_rate * cfg.iubr.dataset.subcarriers as f64).round() as usize;
    let setup = (cfg.iubr.dataset.subcarriers, n_m, cfg.iubr.dataset.snr_db);
    check(&mut failures, setup == (256, 32, 30.0), || {
        format!("(N_s, N_m, SNR) = {setup:?}")
    });
    let m = &table(&c.path("train", "metrics.csv"))[0];
    let (cos, pd, pf) = (num(m, "cosine_similarity"), num(m, "p_d"), num(m, "p_f"));
    check(&mut failures, cos >= 0.95, || format!("cosine {cos:.4}"));
    check(&mut failures, pd >= 0.85, || format!("P_d {pd:.4}"));
    check(&mut failures, pf <= 0.01, || format!("P_f {pf:.5}"));
    let ablation = table(&c.path("train", "ablation.csv"));
    let wins = ablation
        .iter()
        .filter(|r| num(r, "trainable_mse") < num(r, "frozen_mse"))
        .count();
    check(&mut failures, wins >= 3, || {
        format!("trainable matrix wins on {wins}/{} seeds", ablation.len())
    });
    let pairs: Vec<String> = ablation
        .iter()
        .map(|r| format!("{:.4}/{:.4}", num(r, "trainable_mse"), num(r, "frozen_mse")))
        .collect();
    let detail = format!(
        "cosine {cos:.4}, P_d {pd:.4}, P_f {pf:.5}, MSE {:.5}; trainable/frozen MSE {}",
        num(m, "mse"),
        pairs.join(", ")
    );
    verdict(
        9,
        "learned compressed sensing",
        c.seconds + secs(started),
        Some(1200.0),
        detail,
        failures,
    );
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(csv_files(&p));
        } else if p.extension().is_some_and(|e| e == "csv") {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn compare_trees(a: &Path, b: &Path, failures: &mut Vec<String>) -> usize {
    let files = csv_files(a);
    for f in &files {
        let rel = f.strip_prefix(a).unwrap();
        let other = b.join(rel);
        let same = fs::read(&other).is_ok_and(|bytes| bytes == fs::read(f).unwrap());
        check(failures, same, || format!("{} differs", rel.display()));
    }
    check(failures, files.len() == csv_files(b).len(), || {
        format!("{} has a different file set", b.display())
    });
    files.len()
}

#[test]
fn c10_determinism() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut compared = 0;
    for label in ["ldpc", "amc", "dirm", "e2e"] {
        let first = chain(label);
        let steps = CHAINS.iter().find(|(l, _)| *l == label).unwrap().1;
        let again = execute(&acceptance_root(&format!("{label}-rerun")), steps);
        compared += compare_trees(&first.root, &again.root, &mut failures);
    }
    let a = execute(&acceptance_root("iubr-small"), IUBR_SMALL_STEPS);
    let b = execute(&acceptance_root("iubr-small-rerun"), IUBR_SMALL_STEPS);
    compared += compare_trees(&a.root, &b.root, &mut failures);
    let detail = format!("{compared} metric CSVs byte-identical across reruns of ldpc, amc, dirm, e2e and iubr commands");
    verdict(10, "determinism", secs(started), None, detail, failures);
}

#[test]
fn c11_receive_chain() {
    let c = chain("e2e");
    let started = Instant::now();
    let mut failures = Vec::new();
    let clean = &table(&c.path("bpsk-clean", "e2e.csv"))[0];
    let noisy = &table(&c.path("qpsk-4db", "e2e.csv"))[0];
    let recovered = num(clean, "post_agreement");
    check(&mut failures, recovered == 1.0, || {
        format!("clean BPSK recovers {recovered}")
    });
    let (pre, post) = (num(noisy, "pre_agreement"), num(noisy, "post_agreement"));
    check(&mut failures, post > pre, || {
        format!("QPSK at 4 dB: post {post} <= pre {pre}")
    });
    let detail = format!(
        "clean BPSK classified {} with {} bit agreement over {} frames; QPSK at 4 dB classified {}, agreement {pre:.4} -> {post:.4}",
        clean["predicted"], recovered, clean["frames"], noisy["predicted"]
    );
    verdict(
        11,
        "receive chain",
        c.seconds + secs(started),
        Some(300.0),
        detail,
        failures,
    );
}
