//! Pulse definitions, their normalized autocorrelations (ACRs), bandwidth
//! figures, and the interval partitions used by the interval-estimation MSE.

use crate::error::{Error, Result};
use crate::mse::{IntervalMode, IntervalSet};
use serde::{Deserialize, Serialize};

const LN10: f64 = std::f64::consts::LN_10;
const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    BasebandGaussian,
    PassbandGaussian,
}

/// Parametric description of the transmitted pulse.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PulseSpec {
    pub kind: PulseKind,
    /// Pulse width parameter of the Gaussian envelope `e^(-2πt²/T_w²)` (s).
    pub t_w: f64,
    /// Carrier frequency (Hz); 0 for baseband.
    pub f_c: f64,
}

impl PulseSpec {
    pub fn baseband_gaussian(t_w: f64) -> Result<Self> {
        if !(t_w > 0.0 && t_w.is_finite()) {
            return Err(Error::domain("pulse width T_w must be positive"));
        }
        Ok(Self {
            kind: PulseKind::BasebandGaussian,
            t_w,
            f_c: 0.0,
        })
    }

    pub fn passband_gaussian(t_w: f64, f_c: f64) -> Result<Self> {
        if !(t_w > 0.0 && t_w.is_finite()) {
            return Err(Error::domain("pulse width T_w must be positive"));
        }
        if !(f_c > 0.0 && f_c.is_finite()) {
            return Err(Error::domain("passband pulse requires carrier f_c > 0"));
        }
        Ok(Self {
            kind: PulseKind::PassbandGaussian,
            t_w,
            f_c,
        })
    }

    /// Pulse width that yields the requested −10 dB bandwidth.
    pub fn t_w_for_bandwidth(b: f64) -> Result<f64> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::domain("bandwidth must be positive"));
        }
        Ok(2.0 * (LN10 / PI).sqrt() / b)
    }
}

/// Normalized ACR of a pulse plus the derived bandwidth figures.
///
/// For the Gaussian envelope `e^(-2πt²/T_w²)` the normalized ACR is
/// `e_R(θ) = e^(-πθ²/T_w²)`; a carrier multiplies it by `cos(2πf_cθ)`.
#[derive(Debug, Clone, Copy)]
pub struct AcrModel {
    pub spec: PulseSpec,
    /// Mean quadratic bandwidth β_s² (s⁻²).
    pub beta_s_sq: f64,
    /// Envelope mean quadratic bandwidth β_e² (s⁻²).
    pub beta_e_sq: f64,
    /// −10 dB bandwidth (Hz).
    pub bandwidth: f64,
    /// Carrier-to-bandwidth ratio f_c/B (0 for baseband).
    pub lambda: f64,
}

/// Build the analytic ACR model for a pulse.
pub fn build_acr(spec: &PulseSpec) -> AcrModel {
    let b = 2.0 * (LN10 / PI).sqrt() / spec.t_w;
    let beta_e_sq = 2.0 * PI / (spec.t_w * spec.t_w);
    let beta_s_sq = beta_e_sq + 4.0 * PI * PI * spec.f_c * spec.f_c;
    AcrModel {
        spec: *spec,
        beta_s_sq,
        beta_e_sq,
        bandwidth: b,
        lambda: spec.f_c / b,
    }
}

impl AcrModel {
    /// Normalized ACR envelope `e_R(θ)`.
    #[inline]
    pub fn envelope(&self, theta: f64) -> f64 {
        let t = theta / self.spec.t_w;
        (-PI * t * t).exp()
    }

    /// Normalized ACR `R(θ)`.
    #[inline]
    pub fn r(&self, theta: f64) -> f64 {
        match self.spec.kind {
            PulseKind::BasebandGaussian => self.envelope(theta),
            PulseKind::PassbandGaussian => {
                self.envelope(theta) * (2.0 * PI * self.spec.f_c * theta).cos()
            }
        }
    }

    /// First derivative `Ṙ(θ)` of the normalized ACR.
    #[inline]
    pub fn r_dot(&self, theta: f64) -> f64 {
        let tw2 = self.spec.t_w * self.spec.t_w;
        let env = self.envelope(theta);
        let env_dot = -2.0 * PI * theta / tw2 * env;
        match self.spec.kind {
            PulseKind::BasebandGaussian => env_dot,
            PulseKind::PassbandGaussian => {
                let w = 2.0 * PI * self.spec.f_c;
                env_dot * (w * theta).cos() - w * env * (w * theta).sin()
            }
        }
    }

    /// Second derivative `R̈(θ)` of the normalized ACR.
    #[inline]
    pub fn r_ddot(&self, theta: f64) -> f64 {
        let tw2 = self.spec.t_w * self.spec.t_w;
        let env = self.envelope(theta);
        let a = 2.0 * PI / tw2;
        let env_dot = -a * theta * env;
        let env_ddot = (a * a * theta * theta - a) * env;
        match self.spec.kind {
            PulseKind::BasebandGaussian => env_ddot,
            PulseKind::PassbandGaussian => {
                let w = 2.0 * PI * self.spec.f_c;
                env_ddot * (w * theta).cos()
                    - 2.0 * w * env_dot * (w * theta).sin()
                    - w * w * env * (w * theta).cos()
            }
        }
    }

    #[inline]
    pub fn is_oscillating(&self) -> bool {
        self.spec.kind == PulseKind::PassbandGaussian
    }
}

/// True delay and its a priori domain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EstimationSetup {
    pub theta: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl EstimationSetup {
    pub fn new(theta: f64, theta1: f64, theta2: f64) -> Result<Self> {
        if !(theta1 <= theta && theta <= theta2 && theta2 > theta1) {
            return Err(Error::domain(
                "need Theta1 <= Theta <= Theta2 with Theta2 > Theta1",
            ));
        }
        Ok(Self {
            theta,
            theta1,
            theta2,
        })
    }

    /// Width of the a priori domain, T = Θ2 − Θ1.
    #[inline]
    pub fn width(&self) -> f64 {
        self.theta2 - self.theta1
    }

    /// A priori time-bandwidth product γ = T·B.
    #[inline]
    pub fn gamma(&self, acr: &AcrModel) -> f64 {
        self.width() * acr.bandwidth
    }
}

/// Golden-section maximization of `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

fn finish_intervals(
    acr: &AcrModel,
    setup: &EstimationSetup,
    boundaries: Vec<f64>,
    testpoints: Vec<f64>,
    mode: IntervalMode,
) -> IntervalSet {
    let d0_index = testpoints
        .iter()
        .position(|&t| t == setup.theta)
        .expect("D_0 testpoint pinned at Theta");
    let r_dot = testpoints
        .iter()
        .map(|&t| acr.r_dot(t - setup.theta))
        .collect();
    let r_ddot = testpoints
        .iter()
        .map(|&t| acr.r_ddot(t - setup.theta))
        .collect();
    IntervalSet {
        boundaries,
        testpoints,
        r_dot,
        r_ddot,
        mode,
        d0_index,
    }
}

/// Interval partition for oscillating ACRs: one interval around each local
/// maximum of `R(θ−Θ)` inside the a priori domain, with boundaries at the
/// local minima between consecutive maxima.
pub fn local_maxima(acr: &AcrModel, setup: &EstimationSetup) -> Result<IntervalSet> {
    if !acr.is_oscillating() {
        return Err(Error::model(
            "local-maxima intervals require an oscillating (passband) ACR",
        ));
    }
    let f_c = acr.spec.f_c;
    // Work in x = θ − Θ; maxima sit near x = k/f_c where the carrier peaks.
    let x_lo = setup.theta1 - setup.theta;
    let x_hi = setup.theta2 - setup.theta;
    let k_min = (x_lo * f_c).floor() as i64 - 1;
    let k_max = (x_hi * f_c).ceil() as i64 + 1;
    let mut maxima = Vec::new();
    for k in k_min..=k_max {
        let lo = (k as f64 - 0.45) / f_c;
        let hi = (k as f64 + 0.45) / f_c;
        let x = if k == 0 {
            0.0
        } else {
            golden_max(|t| acr.r(t), lo, hi)
        };
        if x >= x_lo && x <= x_hi && acr.r(x) > 0.0 {
            maxima.push(x);
        }
    }
    if maxima.is_empty() || !maxima.contains(&0.0) {
        return Err(Error::model(
            "no local maxima of the ACR found in the a priori domain",
        ));
    }
    maxima.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut boundaries = vec![setup.theta1];
    for pair in maxima.windows(2) {
        let min_x = golden_max(|t| -acr.r(t), pair[0], pair[1]);
        boundaries.push(setup.theta + min_x);
    }
    boundaries.push(setup.theta2);
    let testpoints: Vec<f64> = maxima.iter().map(|&x| setup.theta + x).collect();
    Ok(finish_intervals(
        acr,
        setup,
        boundaries,
        testpoints,
        IntervalMode::Oscillating,
    ))
}

/// Equal-width split of the a priori domain into `n` intervals
/// (non-oscillating ACRs). The testpoint nearest Θ is pinned to Θ.
pub fn equal_split(acr: &AcrModel, setup: &EstimationSetup, n: usize) -> Result<IntervalSet> {
    if n == 0 {
        return Err(Error::domain("interval count must be positive"));
    }
    let t = setup.width();
    let boundaries: Vec<f64> = (0..=n)
        .map(|i| setup.theta1 + t * i as f64 / n as f64)
        .collect();
    non_osc_from_boundaries(acr, setup, boundaries)
}

/// Intervals of width `0.75/β_s` centered on Θ, clipped to the a priori
/// domain (non-oscillating ACRs). The width scales with the pulse so the
/// extracted thresholds are invariant to the time-bandwidth product.
pub fn centered_split(acr: &AcrModel, setup: &EstimationSetup) -> Result<IntervalSet> {
    let w = 0.75 / acr.beta_s_sq.sqrt();
    let mut boundaries = vec![setup.theta1];
    let k_lo = ((setup.theta1 - setup.theta) / w - 0.5).floor() as i64;
    let k_hi = ((setup.theta2 - setup.theta) / w + 0.5).ceil() as i64;
    // Skip boundaries that would leave a sliver narrower than w/2 at a
    // window edge: every interval carries its own testpoint, and a sliver
    // at an extreme delay biases the low-SNR MSE above T²/12.
    for k in k_lo..=k_hi {
        let d = setup.theta + (k as f64 + 0.5) * w;
        if d > setup.theta1 + 0.5 * w && d < setup.theta2 - 0.5 * w {
            boundaries.push(d);
        }
    }
    boundaries.push(setup.theta2);
    non_osc_from_boundaries(acr, setup, boundaries)
}

fn non_osc_from_boundaries(
    acr: &AcrModel,
    setup: &EstimationSetup,
    boundaries: Vec<f64>,
) -> Result<IntervalSet> {
    let mut testpoints: Vec<f64> = boundaries
        .windows(2)
        .map(|d| 0.5 * (d[0] + d[1]))
        .collect();
    // Pin the testpoint of the interval containing Theta to Theta itself.
    let i0 = testpoints
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - setup.theta)
                .abs()
                .partial_cmp(&(b.1 - setup.theta).abs())
                .unwrap()
        })
        .map(|(i, _)| i)
        .unwrap();
    testpoints[i0] = setup.theta;
    Ok(finish_intervals(
        acr,
        setup,
        boundaries,
        testpoints,
        IntervalMode::NonOscillating,
    ))
}

/// Default partition for the ACR mode: local maxima for oscillating ACRs,
/// Θ-centered scale-invariant split otherwise.
pub fn intervals_auto(acr: &AcrModel, setup: &EstimationSetup) -> Result<IntervalSet> {
    if acr.is_oscillating() {
        local_maxima(acr, setup)
    } else {
        centered_split(acr, setup)
    }
}
