//! Multivariate normal probability that one component of a Gaussian vector
//! exceeds all others, via separation-of-variables randomized QMC.

use crate::error::{Error, Result};
use crate::special::{inv_norm_cdf, norm_cdf};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Square roots of the first 64 primes: generators of the QMC lattice.
const SQRT_PRIMES: [f64; 64] = {
    const P: [u32; 64] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,
        89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179,
        181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277,
        281, 283, 293, 307, 311,
    ];
    let mut out = [0.0f64; 64];
    let mut i = 0;
    while i < 64 {
        // integer Newton sqrt in const context
        let x = P[i] as f64;
        let mut s = x;
        let mut k = 0;
        while k < 64 {
            s = 0.5 * (s + x / s);
            k += 1;
        }
        out[i] = s;
        i += 1;
    }
    out
};

/// Mean and covariance of the correlator outputs at the testpoints.
#[derive(Debug, Clone)]
pub struct GaussianVector {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianVector {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if cov.nrows() != n || cov.ncols() != n || n == 0 {
            return Err(Error::domain("mean/covariance dimension mismatch"));
        }
        let scale = cov.diagonal().amax().max(1e-300);
        for i in 0..n {
            for j in (i + 1)..n {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Covariance(
                        "covariance not symmetric within tolerance".into(),
                    ));
                }
            }
        }
        Ok(Self { mean, cov })
    }
}

/// QMC parameters for the probability engine.
#[derive(Debug, Clone, Copy)]
pub struct MvnConfig {
    /// Lattice points per randomization.
    pub points: usize,
    /// Independent random shifts; stderr comes from their spread.
    pub randomizations: usize,
    pub seed: u64,
}

impl Default for MvnConfig {
    fn default() -> Self {
        Self {
            points: 1 << 14,
            randomizations: 8,
            seed: 0,
        }
    }
}

impl MvnConfig {
    /// Smaller budget for dense parameter sweeps.
    pub fn sweep(seed: u64) -> Self {
        Self {
            points: 1 << 11,
            randomizations: 4,
            seed,
        }
    }
}

/// Probability estimate with its QMC standard error.
#[derive(Debug, Clone, Copy)]
pub struct ProbResult {
    pub p: f64,
    pub stderr: f64,
    /// Set when the difference covariance needed extra regularization.
    pub degenerate: bool,
}

/// P{X_index > X_m for all m ≠ index} for X ~ N(mean, cov).
///
/// Reduces to the positive orthant of the difference vector
/// Y_m = X_index − X_m and integrates by sequential conditioning on the
/// Cholesky factor over a randomized rank-1 lattice.
pub fn prob_component_is_max(
    g: &GaussianVector,
    index: usize,
    cfg: &MvnConfig,
) -> Result<ProbResult> {
    let n = g.mean.len();
    if index >= n {
        return Err(Error::domain("component index out of range"));
    }
    if n == 1 {
        return Ok(ProbResult {
            p: 1.0,
            stderr: 0.0,
            degenerate: false,
        });
    }
    let d = n - 1;
    if d > 64 {
        return Err(Error::domain("dimension above 64 not supported"));
    }
    // Difference statistics: Y_m = X_index - X_m, m != index.
    let others: Vec<usize> = (0..n).filter(|&m| m != index).collect();
    let mut mu = DVector::<f64>::zeros(d);
    let mut s = DMatrix::<f64>::zeros(d, d);
    for (r, &i) in others.iter().enumerate() {
        mu[r] = g.mean[index] - g.mean[i];
        for (c, &j) in others.iter().enumerate() {
            s[(r, c)] = g.cov[(index, index)] - g.cov[(index, j)] - g.cov[(i, index)]
                + g.cov[(i, j)];
        }
    }
    // Genz reordering heuristic: integrate the least likely variables first.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        let ka = mu[a] / s[(a, a)].max(1e-300).sqrt();
        let kb = mu[b] / s[(b, b)].max(1e-300).sqrt();
        ka.partial_cmp(&kb).unwrap()
    });
    let mu: Vec<f64> = order.iter().map(|&i| mu[i]).collect();
    let s = DMatrix::from_fn(d, d, |r, c| s[(order[r], order[c])]);

    // Cholesky with escalating jitter for rank-deficient testpoint sets.
    let trace = s.trace();
    let mut jitter = 1e-12 * trace / d as f64;
    let mut degenerate = false;
    let l = loop {
        let mut sj = s.clone();
        for i in 0..d {
            sj[(i, i)] += jitter;
        }
        match sj.cholesky() {
            Some(ch) => break ch.l(),
            None => {
                jitter *= 100.0;
                degenerate = true;
                if jitter > 1e-3 * trace {
                    return Err(Error::Covariance(
                        "difference covariance not factorizable after jitter".into(),
                    ));
                }
            }
        }
    };
    if jitter > 1e-11 * trace {
        degenerate = true;
    }

    let mut estimates = Vec::with_capacity(cfg.randomizations);
    let mut y = vec![0.0f64; d];
    for r in 0..cfg.randomizations {
        // Independent substream per randomization for order-free determinism.
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(r as u64 + 1)));
        let shift: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let mut acc = 0.0f64;
        for i in 1..=cfg.points {
            let mut p = 1.0f64;
            for k in 0..d {
                let u = (i as f64 * SQRT_PRIMES[k] + shift[k]).fract();
                let mut proj = 0.0;
                for j in 0..k {
                    proj += l[(k, j)] * y[j];
                }
                let lo = (-mu[k] - proj) / l[(k, k)];
                let phi_lo = norm_cdf(lo);
                let dk = 1.0 - phi_lo;
                p *= dk;
                if p <= 0.0 {
                    p = 0.0;
                    break;
                }
                let e = (phi_lo + u * dk).clamp(1e-16, 1.0 - 1e-16);
                y[k] = inv_norm_cdf(e);
            }
            acc += p;
        }
        estimates.push(acc / cfg.points as f64);
    }
    let mean: f64 = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let stderr = if estimates.len() > 1 {
        let var: f64 = estimates.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / (estimates.len() - 1) as f64;
        (var / estimates.len() as f64).sqrt()
    } else {
        0.0
    };
    Ok(ProbResult {
        p: mean,
        stderr,
        degenerate,
    })
}

/// All interval probabilities, normalized to sum to one.
pub fn interval_probabilities(g: &GaussianVector, cfg: &MvnConfig) -> Result<Vec<f64>> {
    let n = g.mean.len();
    let mut p = Vec::with_capacity(n);
    for i in 0..n {
        p.push(prob_component_is_max(g, i, cfg)?.p);
    }
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return Err(Error::Covariance("all interval probabilities vanished".into()));
    }
    for v in &mut p {
        *v /= total;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::q_function;

    fn gv(mean: &[f64], cov: &[&[f64]]) -> GaussianVector {
        let n = mean.len();
        GaussianVector::new(
            DVector::from_row_slice(mean),
            DMatrix::from_fn(n, n, |r, c| cov[r][c]),
        )
        .unwrap()
    }

    #[test]
    fn single_component_is_certain() {
        let g = gv(&[3.0], &[&[2.0]]);
        let r = prob_component_is_max(&g, 0, &MvnConfig::default()).unwrap();
        assert_eq!(r.p, 1.0);
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn two_independent_components() {
        // Gap mu, variance sigma^2 each: P = Q(-mu/(sigma*sqrt(2))).
        let (mu, sigma2) = (0.7, 1.3);
        let g = gv(&[mu, 0.0], &[&[sigma2, 0.0], &[0.0, sigma2]]);
        let r = prob_component_is_max(&g, 0, &MvnConfig::default()).unwrap();
        let exact = q_function(-mu / (sigma2 * 2.0).sqrt()).unwrap();
        assert!((r.p - exact).abs() < 3.0 * r.stderr.max(1e-5), "{} vs {exact}", r.p);
    }

    #[test]
    fn equicorrelated_symmetry() {
        let g = gv(
            &[0.0, 0.0, 0.0],
            &[&[1.0, 0.5, 0.5], &[0.5, 1.0, 0.5], &[0.5, 0.5, 1.0]],
        );
        let r = prob_component_is_max(&g, 0, &MvnConfig::default()).unwrap();
        assert!((r.p - 1.0 / 3.0).abs() < 3.0 * r.stderr.max(1e-5));
    }

    #[test]
    fn matches_dense_quadrature_oracle() {
        // Means (1,0,-1), identity covariance, index 0. The difference
        // vector is N((1,2), [[2,1],[1,2]]); integrate its positive
        // quadrant on a dense grid as an independent oracle.
        let g = gv(
            &[1.0, 0.0, -1.0],
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]],
        );
        let r = prob_component_is_max(&g, 0, &MvnConfig::default()).unwrap();
        let (m1, m2) = (1.0, 2.0);
        let det: f64 = 3.0; // [[2,1],[1,2]]
        let norm = 1.0 / (2.0 * std::f64::consts::PI * det.sqrt());
        let n_grid = 900usize;
        let hi = 12.0;
        let h = hi / n_grid as f64;
        let mut oracle = 0.0;
        for i in 0..n_grid {
            let y1 = (i as f64 + 0.5) * h;
            for j in 0..n_grid {
                let y2 = (j as f64 + 0.5) * h;
                let (d1, d2) = (y1 - m1, y2 - m2);
                // inverse of [[2,1],[1,2]] is [[2,-1],[-1,2]]/3
                let q = (2.0 * d1 * d1 - 2.0 * d1 * d2 + 2.0 * d2 * d2) / 3.0;
                oracle += norm * (-0.5 * q).exp();
            }
        }
        oracle *= h * h;
        assert!((r.p - oracle).abs() < 1e-3, "{} vs {oracle}", r.p);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let g = gv(
            &[0.3, -0.1, 0.4],
            &[&[1.0, 0.2, 0.1], &[0.2, 1.5, 0.3], &[0.1, 0.3, 0.8]],
        );
        let cfg = MvnConfig::default();
        let mut total = 0.0;
        let mut err_sq = 0.0;
        for i in 0..3 {
            let r = prob_component_is_max(&g, i, &cfg).unwrap();
            total += r.p;
            err_sq += r.stderr * r.stderr;
        }
        assert!((total - 1.0).abs() < 3.0 * err_sq.sqrt().max(1e-4), "sum {total}");
    }

    #[test]
    fn monotone_in_own_mean() {
        let cfg = MvnConfig::default();
        let cov: &[&[f64]] = &[&[1.0, 0.3, 0.0], &[0.3, 1.2, 0.1], &[0.0, 0.1, 0.9]];
        let mut prev = 0.0;
        for step in 0..5 {
            let m0 = -1.0 + step as f64 * 0.8;
            let g = gv(&[m0, 0.2, -0.3], cov);
            let p = prob_component_is_max(&g, 0, &cfg).unwrap().p;
            assert!(p >= prev - 1e-4, "p {p} dropped below {prev}");
            prev = p;
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let g = gv(&[0.5, 0.0], &[&[1.0, 0.4], &[0.4, 1.0]]);
        let cfg = MvnConfig {
            seed: 42,
            ..MvnConfig::default()
        };
        let a = prob_component_is_max(&g, 0, &cfg).unwrap().p;
        let b = prob_component_is_max(&g, 0, &cfg).unwrap().p;
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_covariance_flagged() {
        // Perfectly correlated pair: difference covariance is singular.
        let g = gv(
            &[0.2, 0.0, 0.0],
            &[&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]],
        );
        let r = prob_component_is_max(&g, 0, &MvnConfig::default()).unwrap();
        assert!(r.p > 0.0 && r.p < 1.0);
    }

    #[test]
    fn rejects_asymmetric_covariance() {
        let mean = DVector::from_row_slice(&[0.0, 0.0]);
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(GaussianVector::new(mean, cov).is_err());
    }
}
