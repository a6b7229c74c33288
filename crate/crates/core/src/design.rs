//! Pulse spectrum design: pick the bandwidth and carrier that minimize the
//! achievable TOA MSE under band constraints, for a given available SNR.
//!
//! The key quantity is λ0, the largest carrier-to-bandwidth ratio at which
//! the available SNR still sits in the asymptotic region; pushing the
//! carrier up to λ0·B minimizes the CRLB without falling into ambiguity.

use crate::error::{Error, Result};
use crate::mse::mse_num;
use crate::mvn::MvnConfig;
use crate::pulse::{build_acr, local_maxima, EstimationSetup, PulseSpec};
use crate::threshold::{
    lambda_at_asymptotic_threshold, lambda_at_asymptotic_threshold_numeric, rho_am1_analytic,
    Alphas, LambdaSolution,
};
use crate::lin_to_db;
use serde::{Deserialize, Serialize};

const PI: f64 = std::f64::consts::PI;
const LN10: f64 = std::f64::consts::LN_10;

/// Band, bandwidth and SNR constraints for the design problem.
#[derive(Debug, Clone, Copy)]
pub struct DesignConstraints {
    pub f_l: f64,
    pub f_h: f64,
    /// Fixed bandwidth b; `None` leaves the bandwidth free.
    pub fixed_b: Option<f64>,
    /// Available SNR (linear).
    pub rho0: f64,
    pub alphas: Alphas,
}

impl DesignConstraints {
    pub fn new(f_l: f64, f_h: f64, fixed_b: Option<f64>, rho0: f64) -> Result<Self> {
        if !(f_l > 0.0 && f_h > f_l) {
            return Err(Error::domain("need 0 < f_l < f_h"));
        }
        if let Some(b) = fixed_b {
            if !(b > 0.0) {
                return Err(Error::domain("fixed bandwidth must be positive"));
            }
            if b > f_h - f_l {
                return Err(Error::Infeasible(
                    "fixed bandwidth exceeds the available band".into(),
                ));
            }
        }
        if !(rho0 > 0.0) {
            return Err(Error::domain("SNR must be positive"));
        }
        Ok(Self {
            f_l,
            f_h,
            fixed_b,
            rho0,
            alphas: Alphas::default(),
        })
    }
}

/// Geometry of the feasible region in the (B, f_c) plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibleGeometry {
    /// Largest bandwidth fitting in the band.
    pub b_max: f64,
    /// Smallest carrier-to-bandwidth ratio over the feasible region.
    pub lambda_min: f64,
    /// λ range on the fixed-bandwidth segment, when a bandwidth is fixed.
    pub lambda_b_min: Option<f64>,
    pub lambda_b_max: Option<f64>,
    /// Corner points (B, f_c) of the feasible triangle.
    pub corners: Vec<(f64, f64)>,
}

/// Feasible-region geometry for the constraints.
pub fn feasible_geometry(c: &DesignConstraints) -> FeasibleGeometry {
    let b_max = c.f_h - c.f_l;
    let lambda_min = 0.5 + c.f_l / b_max;
    let (lambda_b_min, lambda_b_max) = match c.fixed_b {
        Some(b) => (Some(c.f_l / b + 0.5), Some(c.f_h / b - 0.5)),
        None => (None, None),
    };
    FeasibleGeometry {
        b_max,
        lambda_min,
        lambda_b_min,
        lambda_b_max,
        corners: vec![
            (0.0, c.f_l),
            (0.0, c.f_h),
            (b_max, 0.5 * (c.f_l + c.f_h)),
        ],
    }
}

/// Operating regime of a design solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    BelowBeginAmbiguity,
    AtBeginAmbiguity,
    CrlbAchieved,
    BetweenEcrlbAndCrlb,
    ClampedLambdaMax,
}

/// Predicted MSE: a point value, or an interval when the operating point
/// sits between the envelope CRLB and the CRLB.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsePrediction {
    Point(f64),
    Interval(f64, f64),
}

/// Optimal spectrum for the given constraints.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignSolution {
    pub b0: f64,
    pub f_c0: f64,
    pub lambda0: Option<f64>,
    pub regime: Regime,
    pub mse: MsePrediction,
}

impl DesignSolution {
    /// Band-constraint check with a relative tolerance.
    pub fn respects_band(&self, c: &DesignConstraints) -> bool {
        let tol = 1e-9 * c.f_h;
        self.f_c0 - self.b0 / 2.0 >= c.f_l - tol && self.f_c0 + self.b0 / 2.0 <= c.f_h + tol
    }

    /// RMSE for a point prediction; interval midpoint RMSE otherwise.
    pub fn rmse(&self) -> f64 {
        match self.mse {
            MsePrediction::Point(e) => e.sqrt(),
            MsePrediction::Interval(lo, hi) => (0.5 * (lo + hi)).sqrt(),
        }
    }
}

/// How λ0 is obtained from the asymptotic-threshold curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaMethod {
    /// Invert the numeric interval-estimation MSE curve (default).
    NumericCurve,
    /// Invert the closed-form Lambert-W threshold curve (faster, coarser).
    Analytic,
}

fn solve_lambda0(
    c: &DesignConstraints,
    method: LambdaMethod,
    cfg: &MvnConfig,
) -> Result<LambdaSolution> {
    match method {
        LambdaMethod::Analytic => lambda_at_asymptotic_threshold(c.rho0, c.alphas),
        LambdaMethod::NumericCurve => {
            lambda_at_asymptotic_threshold_numeric(c.rho0, c.alphas, cfg)
        }
    }
}

/// Envelope CRLB of a Gaussian pulse of bandwidth B: `2·ln10/(π²B²ρ)`.
fn envelope_crlb(b: f64, rho: f64) -> f64 {
    2.0 * LN10 / (PI * PI * b * b * rho)
}

/// CRLB in the carrier-dominated regime: `1/(4π²f_c²ρ)`.
fn carrier_crlb(f_c: f64, rho: f64) -> f64 {
    1.0 / (4.0 * PI * PI * f_c * f_c * rho)
}

/// Free-bandwidth design over the band `[f_l, f_h]`.
pub fn design_free_bandwidth(
    c: &DesignConstraints,
    method: LambdaMethod,
    cfg: &MvnConfig,
) -> Result<DesignSolution> {
    if c.fixed_b.is_some() {
        return Err(Error::domain("constraints carry a fixed bandwidth"));
    }
    let geo = feasible_geometry(c);
    let midband = 0.5 * (c.f_l + c.f_h);
    // Begin-ambiguity threshold of the envelope shape (λ-free).
    let family = crate::threshold::gaussian_family_acr(2.0);
    let rho_am1 = rho_am1_analytic(&family, c.alphas)?;
    let delta_db = 1.0;
    let rho0_db = lin_to_db(c.rho0);
    let am1_db = lin_to_db(rho_am1);
    if rho0_db < am1_db - delta_db {
        // Too little SNR for the carrier to help: fill the band.
        return Ok(DesignSolution {
            b0: geo.b_max,
            f_c0: midband,
            lambda0: None,
            regime: Regime::BelowBeginAmbiguity,
            mse: MsePrediction::Point(envelope_crlb(geo.b_max, c.rho0)),
        });
    }
    if (rho0_db - am1_db).abs() <= delta_db {
        return Ok(DesignSolution {
            b0: geo.b_max,
            f_c0: midband,
            lambda0: None,
            regime: Regime::AtBeginAmbiguity,
            mse: MsePrediction::Point(envelope_crlb(geo.b_max, c.rho0)),
        });
    }
    let lambda0 = match solve_lambda0(c, method, cfg)? {
        LambdaSolution::BelowMinimum => {
            return Ok(DesignSolution {
                b0: geo.b_max,
                f_c0: midband,
                lambda0: None,
                regime: Regime::BetweenEcrlbAndCrlb,
                mse: MsePrediction::Interval(
                    carrier_crlb(midband, c.rho0),
                    envelope_crlb(geo.b_max, c.rho0),
                ),
            })
        }
        LambdaSolution::Value(l) => l,
    };
    if lambda0 < geo.lambda_min {
        return Ok(DesignSolution {
            b0: geo.b_max,
            f_c0: midband,
            lambda0: Some(lambda0),
            regime: Regime::BetweenEcrlbAndCrlb,
            mse: MsePrediction::Interval(
                carrier_crlb(midband, c.rho0),
                envelope_crlb(geo.b_max, c.rho0),
            ),
        });
    }
    // Intersection of the upper band edge with the λ0 ray.
    let b0 = 2.0 * c.f_h / (2.0 * lambda0 + 1.0);
    let f_c0 = 2.0 * lambda0 * c.f_h / (2.0 * lambda0 + 1.0);
    Ok(DesignSolution {
        b0,
        f_c0,
        lambda0: Some(lambda0),
        regime: Regime::CrlbAchieved,
        mse: MsePrediction::Point(carrier_crlb(f_c0, c.rho0)),
    })
}

/// Fixed-bandwidth design: slide the carrier along the B = b segment.
pub fn design_fixed_bandwidth(
    c: &DesignConstraints,
    method: LambdaMethod,
    cfg: &MvnConfig,
) -> Result<DesignSolution> {
    let b = c
        .fixed_b
        .ok_or_else(|| Error::domain("constraints carry no fixed bandwidth"))?;
    let geo = feasible_geometry(c);
    let (lam_lo, lam_hi) = (geo.lambda_b_min.unwrap(), geo.lambda_b_max.unwrap());
    let lambda0 = match solve_lambda0(c, method, cfg)? {
        LambdaSolution::BelowMinimum => 0.0,
        LambdaSolution::Value(l) => l,
    };
    if lambda0 < lam_lo {
        let f_c0 = c.f_l + b / 2.0;
        Ok(DesignSolution {
            b0: b,
            f_c0,
            lambda0: Some(lambda0),
            regime: Regime::BetweenEcrlbAndCrlb,
            mse: MsePrediction::Interval(
                carrier_crlb(f_c0, c.rho0),
                envelope_crlb(b, c.rho0),
            ),
        })
    } else if lambda0 <= lam_hi {
        let f_c0 = lambda0 * b;
        Ok(DesignSolution {
            b0: b,
            f_c0,
            lambda0: Some(lambda0),
            regime: Regime::CrlbAchieved,
            mse: MsePrediction::Point(carrier_crlb(f_c0, c.rho0)),
        })
    } else {
        let f_c0 = c.f_h - b / 2.0;
        Ok(DesignSolution {
            b0: b,
            f_c0,
            lambda0: Some(lambda0),
            regime: Regime::ClampedLambdaMax,
            mse: MsePrediction::Point(carrier_crlb(f_c0, c.rho0)),
        })
    }
}

/// Predicted MSE when operating at an arbitrary `(b, f_c)` with threshold
/// ratio λ0: `α_as·c` when λ ≤ λ0 (asymptotic region), `α_am2·c_e`
/// otherwise (ambiguity region floor).
pub fn predict_mse_at(c: &DesignConstraints, b: f64, f_c: f64, lambda0: f64) -> f64 {
    let lambda = f_c / b;
    if lambda <= lambda0 {
        let beta_e_sq = PI * PI * b * b / (2.0 * LN10);
        let beta_s_sq = beta_e_sq + 4.0 * PI * PI * f_c * f_c;
        c.alphas.alpha_as / (c.rho0 * beta_s_sq)
    } else {
        c.alphas.alpha_am2 * envelope_crlb(b, c.rho0)
    }
}

/// Result of the exhaustive grid search over the feasible region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExhaustiveResult {
    pub b1: f64,
    pub f_c1: f64,
    pub e1: f64,
    pub lambda1: f64,
}

/// Grid argmin of the numeric interval-estimation MSE over the feasible
/// triangle (default steps 0.2 GHz in B, 0.1 GHz in f_c).
///
/// `lambda_cap` prunes grid points whose carrier-to-bandwidth ratio is far
/// above the asymptotic limit λ0: their MSE sits deep in the ambiguity
/// region and cannot win, while their testpoint count makes them the most
/// expensive to evaluate. Ties break toward smaller B, then smaller f_c.
pub fn exhaustive_search_reference(
    c: &DesignConstraints,
    step_b: f64,
    step_fc: f64,
    lambda_cap: f64,
    cfg: &MvnConfig,
) -> Result<ExhaustiveResult> {
    let eval = |b: f64, f_c: f64, cfg: &MvnConfig| -> Result<f64> {
        let t_w = PulseSpec::t_w_for_bandwidth(b)?;
        let acr = build_acr(&PulseSpec::passband_gaussian(t_w, f_c)?);
        let setup = EstimationSetup::new(0.0, -2.0 * t_w, 1.5 * t_w)?;
        let iv = local_maxima(&acr, &setup)?;
        mse_num(&acr, &setup, &iv, c.rho0, cfg)
    };
    let coarse = MvnConfig {
        points: (cfg.points / 4).max(512),
        randomizations: cfg.randomizations.min(4),
        seed: cfg.seed,
    };
    let b_max = c.f_h - c.f_l;
    let mut candidates: Vec<(f64, f64, f64)> = Vec::new();
    let mut b = step_b;
    while b <= b_max + 1e-9 * b_max {
        let fc_lo = c.f_l + b / 2.0;
        let fc_hi = c.f_h - b / 2.0;
        let mut k = (fc_lo / step_fc).ceil() as i64;
        loop {
            let f_c = k as f64 * step_fc;
            if f_c > fc_hi + 1e-9 * c.f_h {
                break;
            }
            if f_c / b <= lambda_cap {
                let e = eval(b, f_c, &coarse)?;
                candidates.push((b, f_c, e));
            }
            k += 1;
        }
        b += step_b;
    }
    if candidates.is_empty() {
        return Err(Error::Infeasible("empty feasible design grid".into()));
    }
    // Re-score the short list at full precision before picking the argmin.
    candidates.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    let shortlist = 12.min(candidates.len());
    let mut best: Option<(f64, f64, f64)> = None;
    for &(b, f_c, _) in candidates.iter().take(shortlist) {
        let e = eval(b, f_c, cfg)?;
        let better = match best {
            None => true,
            Some((bb, bf, be)) => {
                e < be * (1.0 - 1e-12)
                    || ((e - be).abs() <= 1e-12 * be && (b < bb || (b == bb && f_c < bf)))
            }
        };
        if better {
            best = Some((b, f_c, e));
        }
    }
    let (b1, f_c1, e1) = best.unwrap();
    Ok(ExhaustiveResult {
        b1,
        f_c1,
        e1,
        lambda1: f_c1 / b1,
    })
}

/// FCC UWB band edges (Hz), the running example throughout.
pub const FCC_BAND: (f64, f64) = (3.1e9, 10.6e9);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::db_to_lin;
    use approx::assert_relative_eq;

    fn fcc(rho0_db: f64, fixed_b: Option<f64>) -> DesignConstraints {
        DesignConstraints::new(FCC_BAND.0, FCC_BAND.1, fixed_b, db_to_lin(rho0_db)).unwrap()
    }

    #[test]
    fn fcc_geometry() {
        let geo = feasible_geometry(&fcc(22.0, None));
        assert_eq!(geo.b_max, 7.5e9);
        assert_relative_eq!(geo.lambda_min, 0.913, epsilon = 1e-3);
    }

    #[test]
    fn fixed_b_lambda_range() {
        let geo = feasible_geometry(&fcc(22.0, Some(1e9)));
        assert_relative_eq!(geo.lambda_b_min.unwrap(), 3.6, epsilon = 1e-9);
        assert_relative_eq!(geo.lambda_b_max.unwrap(), 10.1, epsilon = 1e-9);
    }

    #[test]
    fn constraint_validation() {
        assert!(DesignConstraints::new(5e9, 4e9, None, 10.0).is_err());
        assert!(DesignConstraints::new(3.1e9, 10.6e9, Some(8e9), 10.0).is_err());
        assert!(DesignConstraints::new(3.1e9, 10.6e9, None, 0.0).is_err());
    }

    #[test]
    fn free_bandwidth_low_snr_fills_band() {
        let c = fcc(5.0, None);
        let s = design_free_bandwidth(&c, LambdaMethod::Analytic, &MvnConfig::default()).unwrap();
        assert_eq!(s.regime, Regime::BelowBeginAmbiguity);
        assert_eq!(s.b0, 7.5e9);
        assert_relative_eq!(s.f_c0, 6.85e9, max_relative = 1e-12);
        assert!(s.respects_band(&c));
    }

    #[test]
    fn free_bandwidth_at_begin_ambiguity() {
        // 14.0 dB sits within the 1 dB regime window of the analytic
        // begin-ambiguity threshold (14.80 dB).
        let c = fcc(14.0, None);
        let s = design_free_bandwidth(&c, LambdaMethod::Analytic, &MvnConfig::default()).unwrap();
        assert_eq!(s.regime, Regime::AtBeginAmbiguity);
        match s.mse {
            MsePrediction::Point(e) => {
                // Envelope CRLB at B = 7.5 GHz, about 330 ps² at threshold.
                assert_relative_eq!(e * 1e24, 330.24, max_relative = 0.06);
            }
            _ => panic!("expected point MSE"),
        }
    }

    #[test]
    fn free_bandwidth_analytic_structure() {
        // The analytic λ0 places the solution on the upper band edge with
        // f_c0/B0 = λ0; the point MSE is the carrier-form CRLB.
        let c = fcc(25.0, None);
        let s = design_free_bandwidth(&c, LambdaMethod::Analytic, &MvnConfig::default()).unwrap();
        assert_eq!(s.regime, Regime::CrlbAchieved);
        let l0 = s.lambda0.unwrap();
        assert_relative_eq!(s.f_c0 / s.b0, l0, max_relative = 1e-9);
        assert_relative_eq!(s.f_c0 + s.b0 / 2.0, 10.6e9, max_relative = 1e-12);
        assert!(s.respects_band(&c));
        match s.mse {
            MsePrediction::Point(e) => {
                assert_relative_eq!(e, carrier_crlb(s.f_c0, c.rho0), max_relative = 1e-12);
            }
            _ => panic!("expected point MSE"),
        }
    }

    #[test]
    fn fixed_bandwidth_clamps() {
        // λ0 far above λ_b,max: carrier pinned to the top of the band.
        let c = fcc(45.0, Some(4e9));
        let s = design_fixed_bandwidth(&c, LambdaMethod::Analytic, &MvnConfig::default()).unwrap();
        assert_eq!(s.regime, Regime::ClampedLambdaMax);
        assert_relative_eq!(s.f_c0, 8.6e9, max_relative = 1e-12);
        assert!(s.respects_band(&c));
        // λ0 below λ_b,min: carrier pinned to the bottom, MSE bracketed.
        let c2 = fcc(16.0, Some(1e9));
        let s2 =
            design_fixed_bandwidth(&c2, LambdaMethod::Analytic, &MvnConfig::default()).unwrap();
        assert_eq!(s2.regime, Regime::BetweenEcrlbAndCrlb);
        assert_relative_eq!(s2.f_c0, 3.6e9, max_relative = 1e-12);
        match s2.mse {
            MsePrediction::Interval(lo, hi) => assert!(lo < hi),
            _ => panic!("expected interval MSE"),
        }
    }

    #[test]
    fn predict_mse_regions() {
        let c = fcc(27.5, Some(1e9));
        // Asymptotic region: α_as times the CRLB.
        let e_asym = predict_mse_at(&c, 1e9, 3.6e9, 3.6);
        assert_relative_eq!(e_asym.sqrt() * 1e12, 2.0, max_relative = 0.1);
        // Ambiguity region: half the envelope CRLB.
        let e_amb = predict_mse_at(&c, 1e9, 7.6e9, 3.6);
        assert_relative_eq!(e_amb.sqrt() * 1e12, 20.0, max_relative = 0.1);
    }
}
