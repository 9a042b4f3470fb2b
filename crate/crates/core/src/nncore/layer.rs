use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activation output `y`.
    /// The ReLU kink gets subgradient 0.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Padding {
    /// No padding: output length `(len - kernel) / stride + 1`.
    #[default]
    Valid,
    /// Zero padding of `(kernel - 1) / 2` on the left, remainder on the right;
    /// with stride 1 the output length equals the input length.
    Same,
}

/// One layer of a feed-forward network.
///
/// Multi-channel signals are laid out channel-major: element `(c, i)` lives at
/// `c * len + i`. Conv1d is a cross-correlation (no kernel flip).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Dense {
        in_size: usize,
        out_size: usize,
        activation: Activation,
    },
    Conv1d {
        in_channels: usize,
        in_len: usize,
        filter_count: usize,
        kernel_size: usize,
        #[serde(default = "one")]
        stride: usize,
        #[serde(default)]
        padding: Padding,
        activation: Activation,
    },
    AvgPool1d {
        channels: usize,
        in_len: usize,
        /// Window length; equal to `in_len` for a full-sequence mean.
        window: usize,
        #[serde(default = "one")]
        stride: usize,
    },
    Softmax {
        size: usize,
    },
}

fn one() -> usize {
    1
}

impl LayerSpec {
    pub fn dense(in_size: usize, out_size: usize, activation: Activation) -> Self {
        LayerSpec::Dense {
            in_size,
            out_size,
            activation,
        }
    }

    pub fn conv1d(
        in_channels: usize,
        in_len: usize,
        filter_count: usize,
        kernel_size: usize,
        activation: Activation,
    ) -> Self {
        LayerSpec::Conv1d {
            in_channels,
            in_len,
            filter_count,
            kernel_size,
            stride: 1,
            padding: Padding::Valid,
            activation,
        }
    }

    pub fn global_avg_pool(channels: usize, in_len: usize) -> Self {
        LayerSpec::AvgPool1d {
            channels,
            in_len,
            window: in_len,
            stride: 1,
        }
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Shape { layer: index, msg });
        match *self {
            LayerSpec::Dense {
                in_size, out_size, ..
            } => {
                if in_size == 0 || out_size == 0 {
                    return bad("dense sizes must be positive".into());
                }
            }
            LayerSpec::Conv1d {
                in_channels,
                in_len,
                filter_count,
                kernel_size,
                stride,
                padding,
                ..
            } => {
                if in_channels == 0 || in_len == 0 || filter_count == 0 {
                    return bad("conv1d dimensions must be positive".into());
                }
                if kernel_size == 0 || stride == 0 {
                    return bad("kernel_size and stride must be >= 1".into());
                }
                if padding == Padding::Valid && kernel_size > in_len {
                    return bad(format!("kernel {kernel_size} longer than input {in_len}"));
                }
            }
            LayerSpec::AvgPool1d {
                channels,
                in_len,
                window,
                stride,
            } => {
                if channels == 0 || in_len == 0 || window == 0 || stride == 0 {
                    return bad("avgpool1d dimensions must be positive".into());
                }
                if window > in_len {
                    return bad(format!("window {window} longer than input {in_len}"));
                }
            }
            LayerSpec::Softmax { size } => {
                if size == 0 {
                    return bad("softmax size must be positive".into());
                }
            }
        }
        Ok(())
    }

    pub fn input_size(&self) -> usize {
        match *self {
            LayerSpec::Dense { in_size, .. } => in_size,
            LayerSpec::Conv1d {
                in_channels,
                in_len,
                ..
            } => in_channels * in_len,
            LayerSpec::AvgPool1d {
                channels, in_len, ..
            } => channels * in_len,
            LayerSpec::Softmax { size } => size,
        }
    }

    pub fn output_shape(&self) -> Vec<usize> {
        match *self {
            LayerSpec::Dense { out_size, .. } => vec![out_size],
            LayerSpec::Conv1d { filter_count, .. } => vec![filter_count, self.conv_out_len()],
            LayerSpec::AvgPool1d {
                channels,
                in_len,
                window,
                stride,
            } => vec![channels, (in_len - window) / stride + 1],
            LayerSpec::Softmax { size } => vec![size],
        }
    }

    pub fn output_size(&self) -> usize {
        self.output_shape().iter().product()
    }

    fn conv_out_len(&self) -> usize {
        match *self {
            LayerSpec::Conv1d {
                in_len,
                kernel_size,
                stride,
                padding,
                ..
            } => match padding {
                Padding::Valid => (in_len - kernel_size) / stride + 1,
                Padding::Same => (in_len - 1) / stride + 1,
            },
            _ => 0,
        }
    }

    /// Left zero-padding for conv layers.
    pub(crate) fn pad_left(&self) -> usize {
        match *self {
            LayerSpec::Conv1d {
                kernel_size,
                padding: Padding::Same,
                ..
            } => (kernel_size - 1) / 2,
            _ => 0,
        }
    }

    pub fn weight_shape(&self) -> Vec<usize> {
        match *self {
            LayerSpec::Dense {
                in_size, out_size, ..
            } => vec![out_size, in_size],
            LayerSpec::Conv1d {
                in_channels,
                filter_count,
                kernel_size,
                ..
            } => vec![filter_count, in_channels * kernel_size],
            _ => vec![0],
        }
    }

    pub fn bias_shape(&self) -> Vec<usize> {
        match *self {
            LayerSpec::Dense { out_size, .. } => vec![out_size],
            LayerSpec::Conv1d { filter_count, .. } => vec![filter_count],
            _ => vec![0],
        }
    }

    /// `(fan_in, fan_out)` used by the uniform Glorot initializer.
    pub fn fans(&self) -> (usize, usize) {
        match *self {
            LayerSpec::Dense {
                in_size, out_size, ..
            } => (in_size, out_size),
            LayerSpec::Conv1d {
                in_channels,
                filter_count,
                kernel_size,
                ..
            } => (in_channels * kernel_size, filter_count * kernel_size),
            _ => (0, 0),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Conv1d { .. } => "conv1d",
            LayerSpec::AvgPool1d { .. } => "avgpool1d",
            LayerSpec::Softmax { .. } => "softmax",
        }
    }
}

/// Checks that consecutive layers agree on sizes.
pub fn validate_stack(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::Config("network has no layers".into()));
    }
    for (i, s) in specs.iter().enumerate() {
        s.validate(i)?;
        if i > 0 {
            let prev = specs[i - 1].output_size();
            if prev != s.input_size() {
                return Err(Error::Shape {
                    layer: i,
                    msg: format!(
                        "expects {} inputs but layer {} produces {prev}",
                        s.input_size(),
                        i - 1
                    ),
                });
            }
        }
    }
    Ok(())
}
