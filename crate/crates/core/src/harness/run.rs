use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use super::config::{Algorithm, DecoderKind, ExperimentConfig};
use super::e2e::{e2e_receive, synthesize_stream, ReceiverModels};
use crate::amc::{self, AmcDataset, AmcModel};
use crate::csvfmt::{document, fmt_f64, fmt_opt};
use crate::digest::sha256_hex;
use crate::dirm::{
    self, combination_count, dqn_train, write_eval_csv, write_rewards_csv, BruteForce, DirmPolicy,
    RandomAccess,
};
use crate::iubr::{
    self, calibrate_threshold, generate_dataset, mean_mse, train_end_to_end, Codec, IubrDataset,
};
use crate::ldpc::{
    ber_eval, read_llr_csv, write_ber_csv, write_bits_csv, DecoderChoice, LdpcCode, NeuralMsParams,
};
use crate::nncore::{Checkpoint, CHECKPOINT_EXTENSION};
use crate::rng::Stream;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    GenData,
    Train,
    Eval,
    Decode,
    BruteForce,
    Run,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::GenData => "gen-data",
            Verb::Train => "train",
            Verb::Eval => "eval",
            Verb::Decode => "decode",
            Verb::BruteForce => "brute-force",
            Verb::Run => "run",
        }
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Verb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Verb::GenData,
            Verb::Train,
            Verb::Eval,
            Verb::Decode,
            Verb::BruteForce,
            Verb::Run,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown verb {s:?}")))
    }
}

/// Optional file arguments; each falls back to the config or the run directory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunInputs {
    pub data: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub input: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub verb: String,
    pub seed: u64,
    pub config_sha256: String,
    pub version: String,
    pub wall_time_s: f64,
    /// SHA-256 of every file the run wrote, by file name.
    pub outputs: BTreeMap<String, String>,
    /// Lines of each metric CSV, header first.
    pub metrics: BTreeMap<String, Vec<String>>,
}

/// Outputs whose rows are copied into `RunRecord::metrics`.
const METRIC_FILES: &[&str] = &[
    "ablation.csv",
    "ber.csv",
    "class_probabilities.csv",
    "combinations.csv",
    "confusion.csv",
    "e2e.csv",
    "eval.csv",
    "layer_loss.csv",
    "metrics.csv",
    "reward.csv",
];

pub fn version_string() -> String {
    option_env!("AUTOR_GIT_DESCRIBE")
        .map(str::to_string)
        .unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

/// Every file a run produces goes through here, one write at a time.
struct RunDir {
    path: PathBuf,
    outputs: BTreeMap<String, String>,
    metrics: BTreeMap<String, Vec<String>>,
}

impl RunDir {
    fn create(path: &Path) -> Result<Self> {
        fs::create_dir_all(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            outputs: BTreeMap::new(),
            metrics: BTreeMap::new(),
        })
    }

    fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.file(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        self.outputs.insert(name.to_string(), sha256_hex(bytes));
        if METRIC_FILES.contains(&name) {
            let text = String::from_utf8_lossy(bytes);
            self.metrics
                .insert(name.to_string(), text.lines().map(str::to_string).collect());
        }
        Ok(())
    }

    fn write_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    fn write_checkpoint(&mut self, name: &str, ck: &Checkpoint) -> Result<()> {
        self.write(name, ck.to_json()?.as_bytes())
    }

    /// Loads a checkpoint and keeps a copy under `name` so the run directory
    /// is self-contained.
    fn adopt_checkpoint(&mut self, source: &Path, name: &str) -> Result<Checkpoint> {
        let ck = Checkpoint::load(source)?;
        self.write_checkpoint(name, &ck)?;
        Ok(ck)
    }
}

fn ckpt_name(stem: &str) -> String {
    format!("{stem}{CHECKPOINT_EXTENSION}")
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Resolves the config for `algorithm`, writes the resolved copy and version,
/// dispatches `verb` and finishes with `run.json`.
pub fn run(
    mut config: ExperimentConfig,
    algorithm: Algorithm,
    verb: Verb,
    out: &Path,
    inputs: &RunInputs,
) -> Result<RunRecord> {
    let start = Instant::now();
    config.bind(algorithm)?;
    config.output = Some(out.to_path_buf());
    let resolved = config.to_toml()?;
    let mut dir = RunDir::create(out)?;
    dir.write("resolved-config.toml", resolved.as_bytes())?;
    let version = version_string();
    dir.write("version", format!("{version}\n").as_bytes())?;
    let seed = config.seed;
    match (algorithm, verb) {
        (Algorithm::Amc, Verb::GenData) => amc_gen(&config, &mut dir),
        (Algorithm::Amc, Verb::Train) => amc_train(&config, &mut dir, inputs),
        (Algorithm::Amc, Verb::Eval) => amc_eval(&config, &mut dir, inputs),
        (Algorithm::Ldpc, Verb::Train) => ldpc_train(&config, &mut dir),
        (Algorithm::Ldpc, Verb::Eval) => ldpc_eval(&config, &mut dir, inputs),
        (Algorithm::Ldpc, Verb::Decode) => ldpc_decode(&config, &mut dir, inputs),
        (Algorithm::Dirm, Verb::Train) => dirm_train(&config, &mut dir),
        (Algorithm::Dirm, Verb::Eval) => dirm_eval(&config, &mut dir, inputs),
        (Algorithm::Dirm, Verb::BruteForce) => dirm_brute_force(&config, &mut dir),
        (Algorithm::Iubr, Verb::GenData) => iubr_gen(&config, &mut dir),
        (Algorithm::Iubr, Verb::Train) => iubr_train(&config, &mut dir, inputs),
        (Algorithm::Iubr, Verb::Eval) => iubr_eval(&config, &mut dir, inputs),
        (Algorithm::E2e, Verb::Run) => e2e_run(&config, &mut dir),
        (a, v) => Err(Error::Config(format!("{a} has no verb {v}"))),
    }
    .map_err(|e| match e {
        Error::Io { .. } | Error::Config(_) => e,
        other => Error::Pipeline(format!("{algorithm} {verb}: {other}")),
    })?;
    let record = RunRecord {
        algorithm,
        verb: verb.name().to_string(),
        seed,
        config_sha256: sha256_hex(resolved.as_bytes()),
        version,
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: dir.outputs.clone(),
        metrics: dir.metrics.clone(),
    };
    let json = serde_json::to_string_pretty(&record)?;
    dir.write("run.json", json.as_bytes())?;
    Ok(record)
}

fn amc_data(config: &ExperimentConfig, inputs: &RunInputs) -> Result<(AmcDataset, bool)> {
    match &inputs.data {
        Some(p) => Ok((AmcDataset::read_csv(read_file(p)?.as_slice())?, true)),
        None => Ok((amc::build_dataset(&config.amc.dataset, config.seed)?, false)),
    }
}

fn amc_gen(config: &ExperimentConfig, dir: &mut RunDir) -> Result<()> {
    let data = amc::build_dataset(&config.amc.dataset, config.seed)?;
    dir.write_with("dataset.csv", |b| data.write_csv(b))
}

fn amc_scores(dir: &mut RunDir, model: &AmcModel, test: &AmcDataset) -> Result<()> {
    let cm = amc::confusion(model, test)?;
    dir.write_with("confusion.csv", |b| cm.write_csv(b))?;
    let doc = document(
        &["examples", "accuracy"],
        &[vec![cm.total().to_string(), fmt_f64(cm.accuracy())]],
    );
    dir.write("metrics.csv", doc.as_bytes())
}

fn amc_train(config: &ExperimentConfig, dir: &mut RunDir, inputs: &RunInputs) -> Result<()> {
    let sec = &config.amc;
    let (data, _) = amc_data(config, inputs)?;
    let (train, test) = data.split(sec.test_fraction, sec.split_seed)?;
    let (model, curve) = amc::train(&train, &sec.model, config.seed)?;
    dir.write_checkpoint(&ckpt_name("amc"), &model.to_checkpoint()?)?;
    let rows: Vec<Vec<String>> = curve
        .loss
        .iter()
        .zip(&curve.accuracy)
        .enumerate()
        .map(|(e, (l, a))| vec![e.to_string(), fmt_f64(*l), fmt_f64(*a)])
        .collect();
    dir.write(
        "loss.csv",
        document(&["epoch", "loss", "accuracy"], &rows).as_bytes(),
    )?;
    if test.is_empty() {
        return Ok(());
    }
    amc_scores(dir, &model, &test)
}

fn amc_eval(config: &ExperimentConfig, dir: &mut RunDir, inputs: &RunInputs) -> Result<()> {
    let source = inputs
        .checkpoint
        .clone()
        .unwrap_or_else(|| dir.file(&ckpt_name("amc")));
    let model = AmcModel::from_checkpoint(&dir.adopt_checkpoint(&source, &ckpt_name("amc"))?)?;
    let (data, external) = amc_data(config, inputs)?;
    let test = if external {
        data
    } else {
        data.split(config.amc.test_fraction, config.amc.split_seed)?
            .1
    };
    amc_scores(dir, &model, &test)
}

fn ldpc_train(config: &ExperimentConfig, dir: &mut RunDir) -> Result<()> {
    let sec = &config.ldpc;
    let code = LdpcCode::bg2(sec.lifting)?;
    let (params, report) =
        crate::ldpc::train_iteration_by_iteration(&code, &sec.schedule, config.seed)?;
    dir.write_checkpoint(&ckpt_name("ldpc"), &params.to_checkpoint()?)?;
    let rows: Vec<Vec<String>> = report
        .layers
        .iter()
        .zip(params.alpha.iter().zip(&params.beta))
        .enumerate()
        .map(|(i, (l, (a, b)))| {
            vec![
                (i + 1).to_string(),
                fmt_f64(l.initial_loss),
                fmt_f64(l.final_loss),
                u8::from(l.reverted).to_string(),
                fmt_f64(*a),
                fmt_f64(*b),
            ]
        })
        .collect();
    let header = [
        "layer",
        "initial_loss",
        "final_loss",
        "reverted",
        "alpha",
        "beta",
    ];
    dir.write("layer_loss.csv", document(&header, &rows).as_bytes())
}

fn ldpc_decoder(
    config: &ExperimentConfig,
    dir: &mut RunDir,
    inputs: &RunInputs,
) -> Result<(DecoderChoice, usize)> {
    let sec = &config.ldpc;
    match sec.decoder {
        DecoderKind::Classic => {
            if sec.layers == 0 {
                return Err(Error::Config(
                    "ldpc.layers must be set for the classic decoder".into(),
                ));
            }
            Ok((DecoderChoice::Classic, sec.layers))
        }
        DecoderKind::Neural => {
            let source = inputs
                .checkpoint
                .clone()
                .or_else(|| sec.checkpoint.clone())
                .unwrap_or_else(|| dir.file(&ckpt_name("ldpc")));
            let params = NeuralMsParams::from_checkpoint(
                &dir.adopt_checkpoint(&source, &ckpt_name("ldpc"))?,
            )?;
            let layers = if sec.layers == 0 {
                params.layers()
            } else {
                sec.layers
            };
            Ok((DecoderChoice::Neural(params), layers))
        }
    }
}

fn ldpc_eval(config: &ExperimentConfig, dir: &mut RunDir, inputs: &RunInputs) -> Result<()> {
    let sec = &config.ldpc;
    let code = LdpcCode::bg2(sec.lifting)?;
    let (decoder, layers) = ldpc_decoder(config, dir, inputs)?;
    let rows = ber_eval(
        &code,
        &decoder,
        layers,
        &sec.ebn0_db,
        sec.trials,
        config.seed,
    )?;
    dir.write_with("ber.csv", |b| write_ber_csv(&rows, b))
}

fn ldpc_decode(config: &ExperimentConfig, dir: &mut RunDir, inputs: &RunInputs) -> Result<()> {
    let input = inputs
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("ldpc decode needs an input LLR file".into()))?;
    let code = LdpcCode::bg2(config.ldpc.lifting)?;
    let frames = read_llr_csv(read_file(input)?.as_slice(), code.n())?;
    let (decoder, layers) = ldpc_decoder(config, dir, inputs)?;
    let bits = frames
        .iter()
        .map(|llr| decoder.decode(&code, llr, layers))
        .collect::<Result<Vec<_>>>()?;
    dir.write_with("bits.csv", |b| write_bits_csv(&bits, b))
}

fn dirm_train(config: &ExperimentConfig, dir: &mut RunDir) -> Result<()> {
    let sec = &config.dirm;
    let trained = dqn_train(&sec.cell, &sec.se_table, &sec.dqn, config.seed)?;
    dir.write_with("rewards.csv", |b| write_rewards_csv(&trained.curve, b))?;
    for (u, ck) in trained.policy.to_checkpoints()?.iter().enumerate() {
        dir.write_checkpoint(&ckpt_name(&format!("dirm-agent-{u}")), ck)?;
    }
    Ok(())
}

fn dirm_eval(config: &ExperimentConfig, dir: &mut RunDir, inputs: &RunInputs) -> Result<()> {
    let sec = &config.dirm;
    let source = inputs
        .checkpoint
        .clone()
        .or_else(|| sec.checkpoint_dir.clone())
        .unwrap_or_else(|| dir.path.clone());
    let cks = (0..sec.cell.users)
        .map(|u| {
            let name = ckpt_name(&format!("dirm-agent-{u}"));
            dir.adopt_checkpoint(&source.join(&name), &name)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut learned = DirmPolicy::from_checkpoints(&cks)?;
    let mut random = RandomAccess::new(config.seed);
    let mut oracle = BruteForce {
        cap: u128::from(sec.brute_force_cap),
    };
    let policies: [&mut dyn dirm::Policy; 3] = [&mut learned, &mut oracle, &mut random];
    let rows = policies
        .into_iter()
        .map(|p| dirm::evaluate(&sec.cell, &sec.se_table, p, sec.eval_episodes, config.seed))
        .collect::<Result<Vec<_>>>()?;
    dir.write_with("eval.csv", |b| write_eval_csv(&sec.cell, &rows, b))?;
    let reward_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.policy.clone(), fmt_f64(r.total.mean_reward())])
        .collect();
    dir.write(
        "reward.csv",
        document(&["policy", "mean_slot_reward"], &reward_rows).as_bytes(),
    )
}

fn dirm_brute_force(config: &ExperimentConfig, dir: &mut RunDir) -> Result<()> {
    let sec = &config.dirm;
    let pairs = sec.cell.pairs();
    let count = combination_count(
        sec.cell.resource_blocks,
        sec.cell.power_pool_dbm.len(),
        pairs,
    );
    let doc = document(
        &[
            "transmitters",
            "resource_blocks",
            "pool_size",
            "combinations",
        ],
        &[vec![
            pairs.to_string(),
            sec.cell.resource_blocks.to_string(),
            sec.cell.power_pool_dbm.len().to_string(),
            count.to_string(),
        ]],
    );
    dir.write("combinations.csv", doc.as_bytes())?;
    let mut oracle = BruteForce {
        cap: u128::from(sec.brute_force_cap),
    };
    let row = dirm::evaluate(
        &sec.cell,
        &sec.se_table,
        &mut oracle,
        sec.eval_episodes,
        config.seed,
    )?;
    dir.write_with("eval.csv", |b| {
        write_eval_csv(&sec.cell, std::slice::from_ref(&row), b)
    })
}

fn iubr_gen(config: &ExperimentConfig, dir: &mut RunDir) -> Result<()> {
    let data = generate_dataset(&config.iubr.dataset, config.seed)?;
    dir.write_with("dataset.csv", |b| data.write_csv(b))
}

fn iubr_data(config: &ExperimentConfig, inputs: &RunInputs) -> Result<IubrDataset> {
    match &inputs.data {
        Some(p) => IubrDataset::read_csv(read_file(p)?.as_slice()),
        None => generate_dataset(&config.iubr.dataset, config.seed),
    }
}

/// Train, validation and test parts: the test set is the tail, validation
/// precedes it.
fn iubr_split(config: &ExperimentConfig, data: IubrDataset) -> Result<[IubrDataset; 3]> {
    let sec = &config.iubr;
    let held = sec.validation_samples + sec.test_samples;
    if data.len() <= held {
        return Err(Error::Config(format!(
            "{} samples leave nothing to train on after holding out {held}",
            data.len()
        )));
    }
    let mut signals = data.signals;
    let test = signals.split_off(signals.len() - sec.test_samples);
    let val = signals.split_off(signals.len() - sec.validation_samples);
    Ok([
        IubrDataset { signals },
        IubrDataset { signals: val },
        IubrDataset { signals: test },
    ])
}

fn write_recon_metrics(dir: &mut RunDir, m: &iubr::ReconMetrics) -> Result<()> {
    dir.write_with("metrics.csv", |b| m.write_csv(b))
}

fn iubr_train(config: &ExperimentConfig, dir: &mut RunDir, inputs: &RunInputs) -> Result<()> {
    let sec = &config.iubr;
    let [train, val, test] = iubr_split(config, iubr_data(config, inputs)?)?;
    let (mut codec, curve) = train_end_to_end(&train, &sec.model, config.seed)?;
    if val.is_empty() {
        return Err(Error::Config(
            "iubr.validation_samples must be positive to calibrate".into(),
        ));
    }
    codec.threshold = Some(calibrate_threshold(&codec, &val, sec.model.pf_target)?);
    dir.write_checkpoint(&ckpt_name("codec"), &codec.to_checkpoint()?)?;
    let rows: Vec<Vec<String>> = curve
        .mse
        .iter()
        .enumerate()
        .map(|(e, m)| vec![e.to_string(), fmt_f64(*m)])
        .collect();
    dir.write("loss.csv", document(&["epoch", "mse"], &rows).as_bytes())?;
    if !test.is_empty() {
        write_recon_metrics(dir, &iubr::evaluate(&codec, &test)?)?;
    }
    if sec.ablation.seeds.is_empty() {
        return Ok(());
    }
    let subset = IubrDataset {
        signals: train
            .signals
            .iter()
            .take(sec.ablation.samples)
            .cloned()
            .collect(),
    };
    let mut rows = Vec::new();
    for &s in &sec.ablation.seeds {
        let mut mse = [0.0; 2];
        for (slot, trainable) in [true, false].into_iter().enumerate() {
            let hp = iubr::IubrHyperParams {
                epochs: sec.ablation.epochs,
                train_matrix: trainable,
                ..sec.model.clone()
            };
            let (c, _) = train_end_to_end(&subset, &hp, s)?;
            mse[slot] = mean_mse(&c, &val)?;
        }
        rows.push(vec![s.to_string(), fmt_f64(mse[0]), fmt_f64(mse[1])]);
    }
    dir.write(
        "ablation.csv",
        document(&["seed", "trainable_mse", "frozen_mse"], &rows).as_bytes(),
    )
}

fn iubr_eval(config: &ExperimentConfig, dir: &mut RunDir, inputs: &RunInputs) -> Result<()> {
    let source = inputs
        .checkpoint
        .clone()
        .or_else(|| config.iubr.checkpoint.clone())
        .unwrap_or_else(|| dir.file(&ckpt_name("codec")));
    let codec = Codec::from_checkpoint(&dir.adopt_checkpoint(&source, &ckpt_name("codec"))?)?;
    let test = match &inputs.data {
        Some(_) => iubr_data(config, inputs)?,
        None => {
            let [_, _, test] = iubr_split(config, iubr_data(config, inputs)?)?;
            test
        }
    };
    write_recon_metrics(dir, &iubr::evaluate(&codec, &test)?)
}

fn e2e_run(config: &ExperimentConfig, dir: &mut RunDir) -> Result<()> {
    let sec = &config.e2e;
    let amc_source = sec
        .amc_checkpoint
        .as_ref()
        .ok_or_else(|| Error::Config("e2e.amc_checkpoint is required".into()))?;
    let amc = AmcModel::from_checkpoint(&dir.adopt_checkpoint(amc_source, &ckpt_name("amc"))?)?;
    let decoder = match &sec.ldpc_checkpoint {
        Some(p) => DecoderChoice::Neural(NeuralMsParams::from_checkpoint(
            &dir.adopt_checkpoint(p, &ckpt_name("ldpc"))?,
        )?),
        None => DecoderChoice::Classic,
    };
    let models = ReceiverModels {
        amc,
        kernel_sigma: sec.kernel_sigma,
        code: LdpcCode::bg2(sec.lifting)?,
        decoder,
        layers: sec.layers,
        front_end: match &sec.iubr_checkpoint {
            Some(p) => Some(Codec::from_checkpoint(
                &dir.adopt_checkpoint(p, &ckpt_name("codec"))?,
            )?),
            None => None,
        },
    };
    let mut rng = Stream::new(config.seed, "e2e-stream", 0);
    let (iq, truth) =
        synthesize_stream(&models.code, sec.scheme, sec.frames, sec.ebn0_db, &mut rng)?;
    let out = e2e_receive(&iq, &models, sec.force_scheme, Some(&truth))?;
    let r = &out.report;
    let header = [
        "true_scheme",
        "predicted",
        "reconstructed",
        "demodulated_as",
        "noise_variance",
        "frames",
        "valid_frames",
        "pre_agreement",
        "post_agreement",
    ];
    let row = vec![
        sec.scheme.name().to_string(),
        r.predicted.name().to_string(),
        u8::from(r.reconstructed).to_string(),
        r.demodulated_as.name().to_string(),
        fmt_f64(r.noise_variance),
        r.frames.to_string(),
        r.valid_frames.to_string(),
        fmt_opt(r.pre_agreement),
        fmt_opt(r.post_agreement),
    ];
    dir.write("e2e.csv", document(&header, &[row]).as_bytes())?;
    let probs: Vec<Vec<String>> = r
        .probabilities
        .iter()
        .map(|(m, p)| vec![m.name().to_string(), fmt_f64(*p)])
        .collect();
    dir.write(
        "class_probabilities.csv",
        document(&["class", "probability"], &probs).as_bytes(),
    )
}
