//! SNR threshold extraction: numeric thresholds from sampled MSE curves and
//! closed-form thresholds via the Lambert W function (branch −1), plus the
//! inversion of the asymptotic-threshold curve in the carrier-to-bandwidth
//! ratio λ used by the spectrum design.

use crate::error::{Error, Result};
use crate::mse::{crlb, ecrlb, max_mse, mse_num, MseCurve};
use crate::mvn::MvnConfig;
use crate::pulse::{
    build_acr, local_maxima, AcrModel, EstimationSetup, PulseSpec,
};
use crate::special::{lambert_w_m1, q_function};
use crate::{db_to_lin, lin_to_db};
use serde::{Deserialize, Serialize};

const PI: f64 = std::f64::consts::PI;

/// Region-boundary multipliers used in the threshold definitions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Alphas {
    /// e(ρ_pr) = α_pr·e_U
    pub alpha_pr: f64,
    /// e(ρ_am1) = α_am1·c_e(ρ)
    pub alpha_am1: f64,
    /// e(ρ_am2) = α_am2·c_e(ρ)
    pub alpha_am2: f64,
    /// e(ρ_as) = α_as·c(ρ)
    pub alpha_as: f64,
}

impl Default for Alphas {
    fn default() -> Self {
        Self {
            alpha_pr: 0.5,
            alpha_am1: 2.0,
            alpha_am2: 0.5,
            alpha_as: 1.1,
        }
    }
}

/// Where a threshold set came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Extracted from a sampled curve with the given label.
    Numeric(String),
    /// Closed-form Lambert-W evaluation.
    Analytic,
}

/// The four SNR thresholds (linear SNR; missing when the curve never
/// satisfies the defining condition on the grid).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub rho_pr: Option<f64>,
    pub rho_am1: Option<f64>,
    pub rho_am2: Option<f64>,
    pub rho_as: Option<f64>,
    pub alphas: Alphas,
    pub provenance: Provenance,
}

impl ThresholdSet {
    pub fn rho_pr_db(&self) -> Option<f64> {
        self.rho_pr.map(lin_to_db)
    }
    pub fn rho_am1_db(&self) -> Option<f64> {
        self.rho_am1.map(lin_to_db)
    }
    pub fn rho_am2_db(&self) -> Option<f64> {
        self.rho_am2.map(lin_to_db)
    }
    pub fn rho_as_db(&self) -> Option<f64> {
        self.rho_as.map(lin_to_db)
    }

    /// ρ_pr ≤ ρ_am1 ≤ ρ_am2 ≤ ρ_as wherever defined (small slack for
    /// grid-refinement noise).
    pub fn ordering_holds(&self) -> bool {
        let seq: Vec<f64> = [self.rho_pr, self.rho_am1, self.rho_am2, self.rho_as]
            .into_iter()
            .flatten()
            .collect();
        seq.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9))
    }
}

/// Crossing rule shared by all four thresholds: smallest grid ρ after which
/// `e(ρ) ≤ target(ρ)` holds for every larger grid point, refined to 0.01 dB
/// by bisection on a log-log interpolant of the curve.
fn crossing(curve: &MseCurve, target: &dyn Fn(f64) -> f64) -> Option<f64> {
    let n = curve.snr.len();
    let ok: Vec<bool> = (0..n)
        .map(|i| curve.mse[i] <= target(curve.snr[i]))
        .collect();
    // Index of the start of the trailing all-true run.
    let mut idx = n;
    for i in (0..n).rev() {
        if ok[i] {
            idx = i;
        } else {
            break;
        }
    }
    if idx == n {
        return None;
    }
    if idx == 0 {
        return Some(curve.snr[0]);
    }
    // Refine inside [rho_{idx-1}, rho_idx]: log-MSE linear in dB.
    let db_lo = lin_to_db(curve.snr[idx - 1]);
    let db_hi = lin_to_db(curve.snr[idx]);
    let ln_lo = curve.mse[idx - 1].ln();
    let ln_hi = curve.mse[idx].ln();
    let h = |db: f64| {
        let t = (db - db_lo) / (db_hi - db_lo);
        let e = (ln_lo + t * (ln_hi - ln_lo)).exp();
        e - target(db_to_lin(db))
    };
    let (mut lo, mut hi) = (db_lo, db_hi);
    if h(lo) <= 0.0 {
        return Some(curve.snr[idx - 1]);
    }
    for _ in 0..24 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(db_to_lin(0.5 * (lo + hi)))
}

/// Extract the four thresholds from a sampled MSE curve.
pub fn thresholds_numeric(
    curve: &MseCurve,
    acr: &AcrModel,
    setup: &EstimationSetup,
    alphas: Alphas,
) -> ThresholdSet {
    let eu = max_mse(setup);
    let rho_pr = crossing(curve, &|_| alphas.alpha_pr * eu);
    let rho_am1 = crossing(curve, &|rho| {
        alphas.alpha_am1 * ecrlb(acr, rho).unwrap()
    });
    let rho_am2 = crossing(curve, &|rho| {
        alphas.alpha_am2 * ecrlb(acr, rho).unwrap()
    });
    let rho_as = crossing(curve, &|rho| alphas.alpha_as * crlb(acr, rho).unwrap());
    ThresholdSet {
        rho_pr,
        rho_am1,
        rho_am2,
        rho_as,
        alphas,
        provenance: Provenance::Numeric(curve.label.as_str().to_string()),
    }
}

/// Solve `ρ·Q_approx = G` via Lambert W: with the tail approximation
/// `Q(x) ≈ φ(x)/x` the equation `ρ·Q(√(ρ(1−r)/2)) = G` reduces to
/// `u·e^u = H` with `u = −ρ(1−r)/2` and `H = −π·G²·(1−r)²/2`, giving
/// `ρ = −2·W₋₁(H)/(1−r)`.
fn lambert_threshold(g: f64, one_minus_r: f64) -> Result<f64> {
    if !(g > 0.0 && one_minus_r > 0.0) {
        return Err(Error::domain("threshold constants must be positive"));
    }
    let h = -PI * g * g * one_minus_r * one_minus_r / 2.0;
    if h < -1.0 / std::f64::consts::E {
        return Err(Error::domain("asymptotic threshold formula inapplicable"));
    }
    let w = lambert_w_m1(h)?;
    Ok(-2.0 * w / one_minus_r)
}

/// Solve `ρ·Q(√(ρ(1−r)/2)) = G` with the exact Q on the decreasing branch.
///
/// The left side is unimodal in ρ; the threshold is the larger root, so the
/// bracket starts at the maximizer.
fn exact_q_threshold(g: f64, one_minus_r: f64) -> Result<f64> {
    let f = |rho: f64| rho * q_function((rho * one_minus_r / 2.0).sqrt()).unwrap();
    // Locate the peak by golden-section search on log10(rho).
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (-2.0f64, 8.0f64);
    let (mut x1, mut x2) = (hi - INV_PHI * (hi - lo), lo + INV_PHI * (hi - lo));
    let (mut f1, mut f2) = (f(10f64.powf(x1)), f(10f64.powf(x2)));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(10f64.powf(x2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(10f64.powf(x1));
        }
    }
    let peak = 10f64.powf(0.5 * (lo + hi));
    if f(peak) < g {
        return Err(Error::domain("threshold equation has no solution"));
    }
    let mut a = peak;
    let mut b = peak;
    while f(b) >= g {
        b *= 2.0;
        if b > 1e12 {
            return Err(Error::domain("threshold bracket ran away"));
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) >= g {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn as_constants(acr: &AcrModel, alphas: Alphas) -> (f64, f64) {
    let delta = if acr.is_oscillating() {
        1.0 / acr.spec.f_c
    } else {
        PI / (4.0 * acr.beta_s_sq.sqrt())
    };
    // At delta = 1/f_c the carrier term is exactly 1, so R(delta) equals
    // the envelope value in both cases.
    let r = if acr.is_oscillating() {
        acr.envelope(delta)
    } else {
        acr.r(delta)
    };
    let g = (alphas.alpha_as - 1.0) / (2.0 * delta * delta * acr.beta_s_sq);
    (g, 1.0 - r)
}

/// Closed-form asymptotic threshold (linear SNR).
pub fn rho_as_analytic(acr: &AcrModel, alphas: Alphas) -> Result<f64> {
    let (g, omr) = as_constants(acr, alphas);
    lambert_threshold(g, omr)
}

/// Asymptotic threshold with the exact Q function (no tail approximation);
/// satisfies `mse_ana(ρ) = α_as·crlb(ρ)` to machine precision.
pub fn rho_as_exact(acr: &AcrModel, alphas: Alphas) -> Result<f64> {
    let (g, omr) = as_constants(acr, alphas);
    exact_q_threshold(g, omr)
}

fn am2_constants(acr: &AcrModel, alphas: Alphas) -> Result<(f64, f64)> {
    if !acr.is_oscillating() {
        return Err(Error::domain(
            "end-ambiguity threshold requires an oscillating ACR",
        ));
    }
    let delta = 1.0 / acr.spec.f_c;
    let g = (alphas.alpha_am2 / acr.beta_e_sq - 1.0 / acr.beta_s_sq)
        / (2.0 * delta * delta);
    Ok((g, 1.0 - acr.envelope(delta)))
}

/// Closed-form end-ambiguity threshold (linear SNR).
pub fn rho_am2_analytic(acr: &AcrModel, alphas: Alphas) -> Result<f64> {
    let (g, omr) = am2_constants(acr, alphas)?;
    lambert_threshold(g, omr)
}

/// End-ambiguity threshold with the exact Q function.
pub fn rho_am2_exact(acr: &AcrModel, alphas: Alphas) -> Result<f64> {
    let (g, omr) = am2_constants(acr, alphas)?;
    exact_q_threshold(g, omr)
}

fn am1_constants(acr: &AcrModel, alphas: Alphas) -> Result<(f64, f64)> {
    if !acr.is_oscillating() {
        return Err(Error::domain(
            "begin-ambiguity threshold requires an oscillating ACR",
        ));
    }
    let delta = PI / (4.0 * acr.beta_e_sq.sqrt());
    let g = (alphas.alpha_am1 - 1.0) / (2.0 * delta * delta * acr.beta_e_sq);
    Ok((g, 1.0 - acr.envelope(delta)))
}

/// Closed-form begin-ambiguity threshold (linear SNR); depends only on the
/// envelope shape, not on B, f_c or λ.
pub fn rho_am1_analytic(acr: &AcrModel, alphas: Alphas) -> Result<f64> {
    let (g, omr) = am1_constants(acr, alphas)?;
    lambert_threshold(g, omr)
}

/// Begin-ambiguity threshold with the exact Q function; satisfies
/// `mse_ana_env(ρ) = α_am1·ecrlb(ρ)` to machine precision.
pub fn rho_am1_exact(acr: &AcrModel, alphas: Alphas) -> Result<f64> {
    let (g, omr) = am1_constants(acr, alphas)?;
    exact_q_threshold(g, omr)
}

/// Outcome of inverting the asymptotic-threshold curve in λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaSolution {
    /// ρ0 is below the threshold already at the search floor.
    BelowMinimum,
    Value(f64),
}

/// Reference passband pulse of the Gaussian-envelope family at a given λ
/// (the thresholds depend only on the shape and λ, not on the carrier).
pub fn gaussian_family_acr(lambda: f64) -> AcrModel {
    let f_c = 6.85e9;
    let b = f_c / lambda;
    let t_w = PulseSpec::t_w_for_bandwidth(b).unwrap();
    build_acr(&PulseSpec::passband_gaussian(t_w, f_c).unwrap())
}

/// λ solving `rho_as_analytic(λ) = rho0` for the Gaussian-envelope family
/// (bisection; the analytic threshold is increasing in λ).
pub fn lambda_at_asymptotic_threshold(rho0: f64, alphas: Alphas) -> Result<LambdaSolution> {
    if !(rho0 > 0.0) {
        return Err(Error::domain("SNR must be positive"));
    }
    let thr = |lambda: f64| rho_as_analytic(&gaussian_family_acr(lambda), alphas);
    lambda_bisect(rho0, 1e-4, &|l| thr(l))
}

/// λ at which the numeric interval-estimation MSE meets the asymptotic
/// condition `e_num(ρ0) = α_as·c(ρ0)` for the Gaussian-envelope family.
///
/// This inverts the numeric asymptotic-threshold curve directly: for fixed
/// ρ0 the excess `e_num/c` grows with λ, so a single bisection in λ finds
/// the curve crossing without sweeping thresholds.
pub fn lambda_at_asymptotic_threshold_numeric(
    rho0: f64,
    alphas: Alphas,
    cfg: &MvnConfig,
) -> Result<LambdaSolution> {
    if !(rho0 > 0.0) {
        return Err(Error::domain("SNR must be positive"));
    }
    let excess = |lambda: f64| -> Result<f64> {
        let acr = gaussian_family_acr(lambda);
        let t_w = acr.spec.t_w;
        let setup = EstimationSetup::new(0.0, -2.0 * t_w, 1.5 * t_w).unwrap();
        let iv = local_maxima(&acr, &setup)?;
        let e = mse_num(&acr, &setup, &iv, rho0, cfg)?;
        Ok(e / (alphas.alpha_as * crlb(&acr, rho0)?))
    };
    // Bisection on the indicator e_num <= alpha_as*c (true for small λ).
    let (floor, ceil) = (1.0f64, 10.0f64);
    if excess(floor)? > 1.0 {
        return Ok(LambdaSolution::BelowMinimum);
    }
    if excess(ceil)? <= 1.0 {
        return Err(Error::domain(
            "SNR above the asymptotic threshold at the λ search ceiling",
        ));
    }
    let (mut lo, mut hi) = (floor, ceil);
    for _ in 0..14 {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LambdaSolution::Value(0.5 * (lo + hi)))
}

fn lambda_bisect(
    rho0: f64,
    floor: f64,
    thr: &dyn Fn(f64) -> Result<f64>,
) -> Result<LambdaSolution> {
    let ceil = 50.0f64;
    if thr(floor)? >= rho0 {
        return Ok(LambdaSolution::BelowMinimum);
    }
    if thr(ceil)? <= rho0 {
        return Err(Error::domain(
            "SNR above the asymptotic threshold at the λ search ceiling",
        ));
    }
    let (mut lo, mut hi) = (floor, ceil);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if thr(mid)? < rho0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LambdaSolution::Value(0.5 * (lo + hi)))
}
