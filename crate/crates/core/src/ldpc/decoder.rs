use serde::{Deserialize, Serialize};

use super::tanner::TannerGraph;
use crate::{Error, Result};

/// Magnitude bound applied to channel LLRs and variable-to-check messages.
pub const LLR_CLIP: f64 = 30.0;

/// Per-layer normalization `alpha` and offset `beta`, shared by all edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeuralMsParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl NeuralMsParams {
    /// Plain min-sum: `alpha = 1`, `beta = 0` for every layer.
    pub fn unit(layers: usize) -> Self {
        Self {
            alpha: vec![1.0; layers],
            beta: vec![0.0; layers],
        }
    }

    pub fn layers(&self) -> usize {
        self.alpha.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.len() != self.beta.len() {
            return Err(Error::Input(format!(
                "{} normalization factors but {} offsets",
                self.alpha.len(),
                self.beta.len()
            )));
        }
        for (i, (a, b)) in self.alpha.iter().zip(&self.beta).enumerate() {
            if !(a.is_finite() && *a > 0.0) || !(b.is_finite() && *b >= 0.0) {
                return Err(Error::Input(format!(
                    "layer {} has alpha {a}, beta {b}",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Messages exchanged in one decoding layer, indexed by edge id.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerTrace {
    pub var_to_check: Vec<f64>,
    pub check_to_var: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutput {
    pub hard: Vec<u8>,
    pub llr: Vec<f64>,
    pub trace: Vec<LayerTrace>,
}

#[inline]
pub(crate) fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub(crate) fn clip(x: f64) -> f64 {
    x.clamp(-LLR_CLIP, LLR_CLIP)
}

pub(crate) fn check_input(llr: &[f64], graph: &TannerGraph) -> Result<Vec<f64>> {
    if llr.len() != graph.n_vars() {
        return Err(Error::Input(format!(
            "{} LLRs for {} variable nodes",
            llr.len(),
            graph.n_vars()
        )));
    }
    if let Some(i) = llr.iter().position(|v| v.is_nan()) {
        return Err(Error::Input(format!("LLR {i} is NaN")));
    }
    Ok(llr.iter().map(|v| clip(*v)).collect())
}

/// Variable update: channel LLR plus every other incoming check message, summed
/// in ascending edge order, then clipped.
pub(crate) fn var_update(graph: &TannerGraph, llr: &[f64], check_msgs: &[f64], out: &mut [f64]) {
    for (v, &ch) in llr.iter().enumerate().take(graph.n_vars()) {
        let edges = graph.var_edges(v);
        for &e in edges {
            let mut acc = ch;
            for &o in edges {
                if o != e {
                    acc += check_msgs[o];
                }
            }
            out[e] = clip(acc);
        }
    }
}

/// Same update computed as total minus own message; equal to [`var_update`]
/// up to rounding, linear rather than quadratic in the node degree.
pub(crate) fn var_update_fast(
    graph: &TannerGraph,
    llr: &[f64],
    check_msgs: &[f64],
    out: &mut [f64],
) {
    for (v, &ch) in llr.iter().enumerate().take(graph.n_vars()) {
        let edges = graph.var_edges(v);
        let total = edges.iter().fold(ch, |acc, &e| acc + check_msgs[e]);
        for &e in edges {
            out[e] = clip(total - check_msgs[e]);
        }
    }
}

/// Sign product and minimum magnitude over the other edges of each check.
/// A check with a single edge yields magnitude 0.
pub(crate) fn check_extrinsics(
    graph: &TannerGraph,
    var_msgs: &[f64],
    signs: &mut [f64],
    mins: &mut [f64],
) {
    for c in 0..graph.n_checks() {
        let range = graph.check_edges(c);
        if range.len() == 1 {
            signs[range.start] = 1.0;
            mins[range.start] = 0.0;
            continue;
        }
        let mut total_sign = 1.0;
        let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, range.start);
        for e in range.clone() {
            let x = var_msgs[e];
            total_sign *= sign(x);
            let m = x.abs();
            if m < min1 {
                min2 = min1;
                min1 = m;
                arg = e;
            } else if m < min2 {
                min2 = m;
            }
        }
        for e in range {
            signs[e] = total_sign * sign(var_msgs[e]);
            mins[e] = if e == arg { min2 } else { min1 };
        }
    }
}

#[inline]
pub(crate) fn check_message(sign: f64, min: f64, alpha: f64, beta: f64) -> f64 {
    sign * (alpha * min - beta).max(0.0)
}

pub(crate) fn output_llr(graph: &TannerGraph, llr: &[f64], check_msgs: &[f64]) -> Vec<f64> {
    (0..graph.n_vars())
        .map(|v| {
            let mut acc = llr[v];
            for &e in graph.var_edges(v) {
                acc += check_msgs[e];
            }
            acc
        })
        .collect()
}

pub(crate) fn hard_decision(llr: &[f64]) -> Vec<u8> {
    llr.iter().map(|v| u8::from(*v < 0.0)).collect()
}

/// Runs `layers` unrolled min-sum iterations with learned per-layer
/// normalization and offset. Messages of every layer are kept when
/// `keep_trace` is set.
pub fn neural_ms_run(
    llr: &[f64],
    graph: &TannerGraph,
    params: &NeuralMsParams,
    layers: usize,
    keep_trace: bool,
) -> Result<DecodeOutput> {
    params.validate()?;
    if layers > params.layers() {
        return Err(Error::Input(format!(
            "{layers} layers requested, parameters cover {}",
            params.layers()
        )));
    }
    let llr = check_input(llr, graph)?;
    let n_e = graph.n_edges();
    let mut chk = vec![0.0; n_e];
    let mut var = vec![0.0; n_e];
    let mut signs = vec![0.0; n_e];
    let mut mins = vec![0.0; n_e];
    let mut trace = Vec::new();
    for i in 0..layers {
        var_update(graph, &llr, &chk, &mut var);
        check_extrinsics(graph, &var, &mut signs, &mut mins);
        let (a, b) = (params.alpha[i], params.beta[i]);
        for e in 0..n_e {
            chk[e] = check_message(signs[e], mins[e], a, b);
        }
        if keep_trace {
            trace.push(LayerTrace {
                var_to_check: var.clone(),
                check_to_var: chk.clone(),
            });
        }
    }
    let out = output_llr(graph, &llr, &chk);
    Ok(DecodeOutput {
        hard: hard_decision(&out),
        llr: out,
        trace,
    })
}

pub fn neural_ms_decode(
    llr: &[f64],
    graph: &TannerGraph,
    params: &NeuralMsParams,
    layers: usize,
) -> Result<DecodeOutput> {
    neural_ms_run(llr, graph, params, layers, true)
}

/// Reference min-sum decoder written directly from the per-edge definition:
/// each check message is recomputed from scratch over the other edges.
pub fn classic_min_sum_run(
    llr: &[f64],
    graph: &TannerGraph,
    layers: usize,
    keep_trace: bool,
) -> Result<DecodeOutput> {
    let llr = check_input(llr, graph)?;
    let n_e = graph.n_edges();
    let edges = graph.edges();
    let mut chk = vec![0.0; n_e];
    let mut var = vec![0.0; n_e];
    let mut trace = Vec::new();
    for _ in 0..layers {
        for (e, &(v, _)) in edges.iter().enumerate() {
            let mut acc = llr[v];
            for &o in graph.var_edges(v) {
                if o != e {
                    acc += chk[o];
                }
            }
            var[e] = clip(acc);
        }
        for (e, &(_, c)) in edges.iter().enumerate() {
            let mut s = 1.0;
            let mut m = f64::INFINITY;
            for o in graph.check_edges(c) {
                if o != e {
                    s *= sign(var[o]);
                    m = m.min(var[o].abs());
                }
            }
            chk[e] = if m.is_finite() { s * m } else { 0.0 };
        }
        if keep_trace {
            trace.push(LayerTrace {
                var_to_check: var.clone(),
                check_to_var: chk.clone(),
            });
        }
    }
    let out: Vec<f64> = (0..graph.n_vars())
        .map(|v| {
            graph
                .var_edges(v)
                .iter()
                .fold(llr[v], |acc, &e| acc + chk[e])
        })
        .collect();
    Ok(DecodeOutput {
        hard: hard_decision(&out),
        llr: out,
        trace,
    })
}

pub fn classic_min_sum_decode(llr: &[f64], graph: &TannerGraph, layers: usize) -> Result<Vec<u8>> {
    Ok(classic_min_sum_run(llr, graph, layers, false)?.hard)
}
