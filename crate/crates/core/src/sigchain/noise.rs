use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Euler-Mascheroni constant exponentiated.
pub const EXP_EULER: f64 = 1.781_072_417_990_198;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseConfig {
    /// Circular Gaussian with total power `E|n|^2 = variance`.
    Awgn { variance: f64 },
    /// Independent symmetric-or-skewed stable draws on each real component;
    /// characteristic function `exp(-dispersion |t|^alpha ...)`.
    AlphaStable {
        alpha: f64,
        beta: f64,
        dispersion: f64,
        location: f64,
    },
}

impl NoiseConfig {
    pub fn awgn_for_snr_db(snr_db: f64) -> Self {
        NoiseConfig::Awgn {
            variance: 10f64.powf(-snr_db / 10.0),
        }
    }

    /// Stable noise whose geometric SNR against a signal of amplitude
    /// `amplitude` equals `gsnr_db`.
    pub fn alpha_stable_for_gsnr_db(alpha: f64, amplitude: f64, gsnr_db: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let gsnr = 10f64.powf(gsnr_db / 10.0);
        let geometric_power = amplitude / (2.0 * EXP_EULER * gsnr).sqrt();
        let scale = geometric_power * EXP_EULER / EXP_EULER.powf(1.0 / alpha);
        Ok(NoiseConfig::AlphaStable {
            alpha,
            beta: 0.0,
            dispersion: scale.powf(alpha),
            location: 0.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseConfig::Awgn { variance } => {
                if !(variance >= 0.0 && variance.is_finite()) {
                    return Err(Error::Input(format!(
                        "noise variance {variance} is invalid"
                    )));
                }
            }
            NoiseConfig::AlphaStable {
                alpha,
                beta,
                dispersion,
                location,
            } => {
                check_alpha(alpha)?;
                if !(-1.0..=1.0).contains(&beta) {
                    return Err(Error::Input(format!("skewness {beta} outside [-1, 1]")));
                }
                if !(dispersion >= 0.0 && dispersion.is_finite()) || !location.is_finite() {
                    return Err(Error::Input(
                        "dispersion must be nonnegative and location finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "characteristic exponent {alpha} outside (0, 2]"
        )))
    }
}

/// Chambers-Mallows-Stuck draw from the standard stable law `S(alpha, beta, 1, 0)`.
pub fn standard_stable<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    let v = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
    let w: f64 = rng.sample(Exp1);
    if (alpha - 1.0).abs() < 1e-12 {
        let a = FRAC_PI_2 + beta * v;
        (2.0 / PI) * (a * v.tan() - beta * ((FRAC_PI_2 * w * v.cos()) / a).ln())
    } else {
        let t = beta * (PI * alpha / 2.0).tan();
        let b = t.atan() / alpha;
        let s = (1.0 + t * t).powf(1.0 / (2.0 * alpha));
        s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
            * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha)
    }
}

fn stable<R: Rng + ?Sized>(
    alpha: f64,
    beta: f64,
    dispersion: f64,
    location: f64,
    rng: &mut R,
) -> f64 {
    if dispersion == 0.0 {
        return location;
    }
    let c = dispersion.powf(1.0 / alpha);
    let x = standard_stable(alpha, beta, rng);
    if (alpha - 1.0).abs() < 1e-12 {
        c * x + (2.0 / PI) * beta * c * c.ln() + location
    } else {
        c * x + location
    }
}

pub fn sample_noise<R: Rng + ?Sized>(
    cfg: &NoiseConfig,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::Input("noise length must be at least 1".into()));
    }
    Ok(match *cfg {
        NoiseConfig::Awgn { variance } => {
            let s = (variance / 2.0).sqrt();
            (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re * s, im * s)
                })
                .collect()
        }
        NoiseConfig::AlphaStable {
            alpha,
            beta,
            dispersion,
            location,
        } => (0..n)
            .map(|_| {
                let re = stable(alpha, beta, dispersion, location, rng);
                let im = stable(alpha, beta, dispersion, location, rng);
                Complex64::new(re, im)
            })
            .collect(),
    })
}
