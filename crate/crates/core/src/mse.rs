//! Closed-form error quantities (CRLB, ECRLB, maximum MSE) and the two MSE
//! approximations: the numeric interval-estimation form and the analytic
//! McAulay-bound three-interval form.

use crate::error::{Error, Result};
use crate::mvn::{interval_probabilities, GaussianVector, MvnConfig};
use crate::pulse::{AcrModel, EstimationSetup};
use crate::special::q_function;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalMode {
    Oscillating,
    NonOscillating,
}

/// Partition of the a priori domain for the interval-estimation MSE.
#[derive(Debug, Clone)]
pub struct IntervalSet {
    /// Interval boundaries d_0 < d_1 < … < d_N (s); d_0 = Θ1, d_N = Θ2.
    pub boundaries: Vec<f64>,
    /// One testpoint θ_n per interval; the D_0 testpoint equals Θ.
    pub testpoints: Vec<f64>,
    /// Ṙ(θ_n − Θ) at each testpoint.
    pub r_dot: Vec<f64>,
    /// R̈(θ_n − Θ) at each testpoint.
    pub r_ddot: Vec<f64>,
    pub mode: IntervalMode,
    /// Index of the interval containing the true delay.
    pub d0_index: usize,
}

impl IntervalSet {
    pub fn len(&self) -> usize {
        self.testpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.testpoints.is_empty()
    }
}

/// Which curve a sampled MSE belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveLabel {
    Crlb,
    Ecrlb,
    MaxMse,
    ENum,
    EAna,
    EAnaEnv,
    Z1,
    Z2,
    B1,
    B2,
    MonteCarlo,
}

impl CurveLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveLabel::Crlb => "crlb",
            CurveLabel::Ecrlb => "ecrlb",
            CurveLabel::MaxMse => "e_u",
            CurveLabel::ENum => "e_num",
            CurveLabel::EAna => "e_ana",
            CurveLabel::EAnaEnv => "e_ana_env",
            CurveLabel::Z1 => "z1",
            CurveLabel::Z2 => "z2",
            CurveLabel::B1 => "b1",
            CurveLabel::B2 => "b2",
            CurveLabel::MonteCarlo => "monte_carlo",
        }
    }
}

/// A sampled MSE-versus-SNR curve.
#[derive(Debug, Clone)]
pub struct MseCurve {
    /// Linear SNR grid, strictly increasing.
    pub snr: Vec<f64>,
    /// MSE (s²) at each grid point.
    pub mse: Vec<f64>,
    pub label: CurveLabel,
}

impl MseCurve {
    pub fn new(snr: Vec<f64>, mse: Vec<f64>, label: CurveLabel) -> Result<Self> {
        if snr.len() != mse.len() || snr.is_empty() {
            return Err(Error::domain("curve grids empty or mismatched"));
        }
        if !snr.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::domain("SNR grid must be strictly increasing"));
        }
        Ok(Self { snr, mse, label })
    }

    /// CSV rows `snr_db,mse_s2,rmse_s,label`.
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        for (r, e) in self.snr.iter().zip(self.mse.iter()) {
            writeln!(
                out,
                "{:.6},{:e},{:e},{}",
                crate::lin_to_db(*r),
                e,
                e.sqrt(),
                self.label.as_str()
            )?;
        }
        Ok(())
    }
}

use crate::db_to_lin;

/// Default SNR grid in dB: −20 to 60 in 0.25 dB steps.
pub fn default_snr_grid_db() -> Vec<f64> {
    let mut g = Vec::new();
    let mut v = -20.0f64;
    while v <= 60.0 + 1e-9 {
        g.push(v);
        v += 0.25;
    }
    g
}

/// Cramer-Rao lower bound `1/(ρ·β_s²)`.
pub fn crlb(acr: &AcrModel, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::domain("SNR must be positive"));
    }
    Ok(1.0 / (rho * acr.beta_s_sq))
}

/// Envelope CRLB `1/(ρ·β_e²)`.
pub fn ecrlb(acr: &AcrModel, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::domain("SNR must be positive"));
    }
    Ok(1.0 / (rho * acr.beta_e_sq))
}

/// Maximum MSE `T²/12 + (Θ − (Θ1+Θ2)/2)²` (uniform-estimate limit).
pub fn max_mse(setup: &EstimationSetup) -> f64 {
    let t = setup.width();
    let mid = 0.5 * (setup.theta1 + setup.theta2);
    t * t / 12.0 + (setup.theta - mid).powi(2)
}

/// Interval-variance rule for oscillating ACRs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurvatureRule {
    /// `c·R̈_0²/R̈_n²` — squared curvature ratio.
    #[default]
    SquaredRatio,
    /// `c·|R̈_0/R̈_n|` — alternative heuristic, exposed for comparison.
    AbsRatio,
}

/// Numeric interval-estimation MSE at one SNR.
pub fn mse_num(
    acr: &AcrModel,
    setup: &EstimationSetup,
    intervals: &IntervalSet,
    rho: f64,
    cfg: &MvnConfig,
) -> Result<f64> {
    mse_num_with(acr, setup, intervals, rho, cfg, CurvatureRule::SquaredRatio)
}

/// As [`mse_num`] with an explicit interval-variance rule.
pub fn mse_num_with(
    acr: &AcrModel,
    setup: &EstimationSetup,
    intervals: &IntervalSet,
    rho: f64,
    cfg: &MvnConfig,
    rule: CurvatureRule,
) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::domain("SNR must be positive"));
    }
    match (acr.is_oscillating(), intervals.mode) {
        (true, IntervalMode::Oscillating) | (false, IntervalMode::NonOscillating) => {}
        _ => {
            return Err(Error::model(
                "interval mode inconsistent with ACR oscillation",
            ))
        }
    }
    let n = intervals.len();
    let sqrt_rho = rho.sqrt();
    let mean = DVector::from_fn(n, |i, _| {
        sqrt_rho * acr.r(intervals.testpoints[i] - setup.theta)
    });
    let cov = DMatrix::from_fn(n, n, |i, j| {
        acr.r(intervals.testpoints[i] - intervals.testpoints[j])
    });
    let g = GaussianVector::new(mean, cov)?;
    let p = interval_probabilities(&g, cfg)?;
    let c = crlb(acr, rho)?;
    let beta_s = acr.beta_s_sq.sqrt();
    let mut e = 0.0;
    for k in 0..n {
        let w = intervals.boundaries[k + 1] - intervals.boundaries[k];
        let uniform_var = w * w / 12.0;
        let (mu, var) = match intervals.mode {
            IntervalMode::Oscillating => {
                let rdd0 = intervals.r_ddot[intervals.d0_index];
                let rddn = intervals.r_ddot[k];
                let v = if rddn == 0.0 {
                    uniform_var
                } else {
                    let scaled = match rule {
                        CurvatureRule::SquaredRatio => c * (rdd0 / rddn).powi(2),
                        CurvatureRule::AbsRatio => c * (rdd0 / rddn).abs(),
                    };
                    scaled.min(uniform_var)
                };
                (intervals.testpoints[k], v)
            }
            IntervalMode::NonOscillating => {
                if k == intervals.d0_index {
                    (setup.theta, c.min(uniform_var))
                } else {
                    let pq = q_function(sqrt_rho * intervals.r_dot[k] / beta_s)?;
                    let mu = intervals.boundaries[k] * pq
                        + intervals.boundaries[k + 1] * (1.0 - pq);
                    ((mu), (pq * (1.0 - pq) * w * w).min(uniform_var))
                }
            }
        };
        e += p[k] * ((setup.theta - mu).powi(2) + var);
    }
    Ok(e)
}

/// Evaluate the numeric MSE over an SNR grid (dB), deriving a distinct MVN
/// seed per grid point from the base seed.
pub fn mse_num_curve(
    acr: &AcrModel,
    setup: &EstimationSetup,
    intervals: &IntervalSet,
    grid_db: &[f64],
    cfg: &MvnConfig,
) -> Result<MseCurve> {
    let mut mse = Vec::with_capacity(grid_db.len());
    for (i, db) in grid_db.iter().enumerate() {
        let cfg_i = MvnConfig {
            seed: cfg.seed.wrapping_add(i as u64),
            ..*cfg
        };
        mse.push(mse_num(acr, setup, intervals, db_to_lin(*db), &cfg_i)?);
    }
    MseCurve::new(grid_db.iter().map(|d| db_to_lin(*d)).collect(), mse, CurveLabel::ENum)
}

/// Sidelobe offset Δ used by the analytic three-interval MSE.
pub fn mcaulay_delta(acr: &AcrModel) -> f64 {
    if acr.is_oscillating() {
        1.0 / acr.spec.f_c
    } else {
        PI / (4.0 * acr.beta_s_sq.sqrt())
    }
}

/// Analytic three-interval MSE `c + 2Δ²·Q(√(ρ/2·[1−R(Δ)]))`.
pub fn mse_ana(acr: &AcrModel, rho: f64) -> Result<f64> {
    let c = crlb(acr, rho)?;
    let delta = mcaulay_delta(acr);
    let q = q_function((rho / 2.0 * (1.0 - acr.r(delta))).sqrt())?;
    Ok(c + 2.0 * delta * delta * q)
}

/// Envelope variant `c_e + 2Δ²·Q(√(ρ/2·[1−e_R(Δ)]))` with Δ = π/(4β_e).
pub fn mse_ana_env(acr: &AcrModel, rho: f64) -> Result<f64> {
    if !acr.is_oscillating() {
        return Err(Error::domain(
            "envelope MSE form applies to passband ACRs only",
        ));
    }
    let ce = ecrlb(acr, rho)?;
    let delta = PI / (4.0 * acr.beta_e_sq.sqrt());
    let q = q_function((rho / 2.0 * (1.0 - acr.envelope(delta))).sqrt())?;
    Ok(ce + 2.0 * delta * delta * q)
}
