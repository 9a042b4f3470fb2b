use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::IqSequence;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub delay: usize,
    pub gain: Complex64,
}

/// Flat gain `A e^{j(2 pi w n + theta)}` applied over a tapped delay line,
/// preceded by an optional fractional symbol delay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub amplitude: f64,
    pub phase: f64,
    /// Cycles per sample.
    pub freq_offset: f64,
    /// Fraction of a symbol in `[0, 1)`, realised by linear interpolation.
    pub time_offset: f64,
    pub taps: Vec<Tap>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            phase: 0.0,
            freq_offset: 0.0,
            time_offset: 0.0,
            taps: vec![Tap {
                delay: 0,
                gain: Complex64::new(1.0, 0.0),
            }],
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Input(format!(
                "amplitude {} must be positive",
                self.amplitude
            )));
        }
        if !(0.0..1.0).contains(&self.time_offset) {
            return Err(Error::Input(format!(
                "time offset {} outside [0, 1)",
                self.time_offset
            )));
        }
        if !self.phase.is_finite() || !self.freq_offset.is_finite() {
            return Err(Error::Input(
                "phase and frequency offset must be finite".into(),
            ));
        }
        if !self.taps.iter().any(|t| t.delay == 0) {
            return Err(Error::Input("channel needs a tap at delay 0".into()));
        }
        Ok(())
    }

    /// `paths` taps at delays `0..paths` with an exponentially decaying power
    /// profile, uniform random phases and unit total power.
    pub fn with_random_multipath<R: Rng + ?Sized>(
        mut self,
        paths: usize,
        decay: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if paths == 0 {
            return Err(Error::Input("at least one path is required".into()));
        }
        let powers: Vec<f64> = (0..paths).map(|p| (-decay * p as f64).exp()).collect();
        let total: f64 = powers.iter().sum();
        self.taps = powers
            .iter()
            .enumerate()
            .map(|(delay, p)| Tap {
                delay,
                gain: Complex64::from_polar((p / total).sqrt(), rng.random_range(-PI..PI)),
            })
            .collect();
        Ok(self)
    }
}

pub fn apply_channel(iq: &IqSequence, ch: &ChannelConfig) -> Result<IqSequence> {
    ch.validate()?;
    let x = iq.samples();
    if let Some(t) = ch.taps.iter().find(|t| t.delay >= x.len()) {
        return Err(Error::Input(format!(
            "tap delay {} not shorter than the {}-sample sequence",
            t.delay,
            x.len()
        )));
    }
    let eps = ch.time_offset;
    let shifted: Vec<Complex64> = if eps == 0.0 {
        x.to_vec()
    } else {
        (0..x.len())
            .map(|n| {
                let prev = if n > 0 {
                    x[n - 1]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                x[n] * (1.0 - eps) + prev * eps
            })
            .collect()
    };
    let out = (0..x.len())
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in &ch.taps {
                if n >= t.delay {
                    acc += t.gain * shifted[n - t.delay];
                }
            }
            let rot = Complex64::from_polar(
                ch.amplitude,
                2.0 * PI * ch.freq_offset * n as f64 + ch.phase,
            );
            acc * rot
        })
        .collect();
    IqSequence::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn seq(v: &[(f64, f64)]) -> IqSequence {
        IqSequence::new(v.iter().map(|(r, i)| Complex64::new(*r, *i)).collect()).unwrap()
    }

    #[test]
    fn identity_channel() {
        let x = seq(&[(1.0, 2.0), (-0.5, 0.25), (3.0, -1.0)]);
        assert_eq!(apply_channel(&x, &ChannelConfig::default()).unwrap(), x);
    }

    #[test]
    fn rotation_and_scale() {
        let ch = ChannelConfig {
            amplitude: 2.0,
            phase: PI,
            ..Default::default()
        };
        let y = apply_channel(&seq(&[(1.0, 0.0)]), &ch).unwrap();
        assert!((y.samples()[0] - Complex64::new(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_tap_convolution() {
        let ch = ChannelConfig {
            taps: vec![
                Tap {
                    delay: 0,
                    gain: Complex64::new(1.0, 0.0),
                },
                Tap {
                    delay: 1,
                    gain: Complex64::new(0.5, 0.0),
                },
            ],
            ..Default::default()
        };
        let y = apply_channel(&seq(&[(1.0, 0.0), (0.0, 0.0)]), &ch).unwrap();
        assert_eq!(y.samples(), seq(&[(1.0, 0.0), (0.5, 0.0)]).samples());
    }

    #[test]
    fn fractional_delay_interpolates() {
        let ch = ChannelConfig {
            time_offset: 0.25,
            ..Default::default()
        };
        let y = apply_channel(&seq(&[(1.0, 0.0), (-1.0, 0.0)]), &ch).unwrap();
        assert_eq!(y.samples()[0].re, 0.75);
        assert_eq!(y.samples()[1].re, -0.5);
    }

    #[test]
    fn missing_direct_tap_and_long_delay_rejected() {
        let mut ch = ChannelConfig::default();
        ch.taps[0].delay = 1;
        assert!(ch.validate().is_err());
        ch.taps.push(Tap {
            delay: 0,
            gain: Complex64::new(1.0, 0.0),
        });
        assert!(apply_channel(&seq(&[(1.0, 0.0)]), &ch).is_err());
    }

    #[test]
    fn multipath_has_unit_power() {
        let ch = ChannelConfig::default()
            .with_random_multipath(4, 0.5, &mut Stream::new(1, "mp", 0))
            .unwrap();
        let p: f64 = ch.taps.iter().map(|t| t.gain.norm_sqr()).sum();
        assert!((p - 1.0).abs() < 1e-12);
        assert_eq!(
            ch.taps.iter().map(|t| t.delay).collect::<Vec<_>>(),
            vec![0, 1, 2, 3]
        );
    }
}
