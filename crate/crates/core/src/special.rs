//! Scalar special functions: Q function, its large-argument approximation,
//! Lambert W branch −1, and the valley-filling operator.

use crate::error::{Error, Result};
use crate::Real;

#[inline]
fn k<T: Real>(v: f64) -> T {
    T::from_f64(v).unwrap()
}

/// Complementary error function, Cody-style rational approximation.
///
/// Absolute error below 1e-15 over the whole range in double precision.
pub fn erfc<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax <= k(0.46875) {
        return T::one() - erf_small(x);
    }
    let r = if ax <= k(4.0) {
        erfc_mid(ax)
    } else {
        erfc_large(ax)
    };
    if x < T::zero() {
        k::<T>(2.0) - r
    } else {
        r
    }
}

/// Error function.
pub fn erf<T: Real>(x: T) -> T {
    if x.abs() <= k(0.46875) {
        erf_small(x)
    } else {
        T::one() - erfc(x)
    }
}

fn erf_small<T: Real>(x: T) -> T {
    const A: [f64; 5] = [
        3.16112374387056560e0,
        1.13864154151050156e2,
        3.77485237685302021e2,
        3.20937758913846947e3,
        1.85777706184603153e-1,
    ];
    const B: [f64; 4] = [
        2.36012909523441209e1,
        2.44024637934444173e2,
        1.28261652607737228e3,
        2.84423683343917062e3,
    ];
    let y = x * x;
    let mut num = k::<T>(A[4]) * y;
    let mut den = y;
    for i in 0..3 {
        num = (num + k(A[i])) * y;
        den = (den + k(B[i])) * y;
    }
    x * (num + k(A[3])) / (den + k(B[3]))
}

fn erfc_mid<T: Real>(ax: T) -> T {
    const C: [f64; 9] = [
        5.64188496988670089e-1,
        8.88314979438837594e0,
        6.61191906371416295e1,
        2.98635138197400131e2,
        8.81952221241769090e2,
        1.71204761263407058e3,
        2.05107837782607147e3,
        1.23033935479799725e3,
        2.15311535474403846e-8,
    ];
    const D: [f64; 8] = [
        1.57449261107098347e1,
        1.17693950891312499e2,
        5.37181101862009858e2,
        1.62138957456669019e3,
        3.29079923573345963e3,
        4.36261909014324716e3,
        3.43936767414372164e3,
        1.23033935480374942e3,
    ];
    let mut num = k::<T>(C[8]) * ax;
    let mut den = ax;
    for i in 0..7 {
        num = (num + k(C[i])) * ax;
        den = (den + k(D[i])) * ax;
    }
    let r = (num + k(C[7])) / (den + k(D[7]));
    scaled_exp_sq(ax) * r
}

fn erfc_large<T: Real>(ax: T) -> T {
    const P: [f64; 6] = [
        3.05326634961232344e-1,
        3.60344899949804439e-1,
        1.25781726111229246e-1,
        1.60837851487422766e-2,
        6.58749161529837803e-4,
        1.63153871373020978e-2,
    ];
    const Q: [f64; 5] = [
        2.56852019228982242e0,
        1.87295284992346047e0,
        5.27905102951428412e-1,
        6.05183413124413191e-2,
        2.33520497626869185e-3,
    ];
    let inv_sqrt_pi = k::<T>(0.564_189_583_547_756_3);
    let y = T::one() / (ax * ax);
    let mut num = k::<T>(P[5]) * y;
    let mut den = y;
    for i in 0..4 {
        num = (num + k(P[i])) * y;
        den = (den + k(Q[i])) * y;
    }
    let r = y * (num + k(P[4])) / (den + k(Q[4]));
    scaled_exp_sq(ax) * (inv_sqrt_pi - r) / ax
}

// exp(-x^2) computed with the argument split to limit rounding of x*x.
fn scaled_exp_sq<T: Real>(ax: T) -> T {
    let sixteen = k::<T>(16.0);
    let xh = (ax * sixteen).trunc() / sixteen;
    let d = (ax - xh) * (ax + xh);
    (-xh * xh).exp() * (-d).exp()
}

/// Standard normal density.
pub fn norm_pdf<T: Real>(x: T) -> T {
    let inv_sqrt_2pi = k::<T>(0.398_942_280_401_432_7);
    inv_sqrt_2pi * (-x * x / k(2.0)).exp()
}

/// Upper-tail probability of the standard normal, `Q(x) = P{Z > x}`.
pub fn q_function<T: Real>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::domain("q_function: non-finite input"));
    }
    Ok(erfc(x / k(std::f64::consts::SQRT_2)) / k(2.0))
}

/// Standard normal CDF. Infallible companion of [`q_function`] for hot loops.
#[inline]
pub fn norm_cdf<T: Real>(x: T) -> T {
    erfc(-x / k(std::f64::consts::SQRT_2)) / k(2.0)
}

/// Large-argument approximation `Q(x) ≈ φ(x)/x`, valid for `x > 0`.
///
/// Upper half of the sandwich `(1/x − 1/x³)φ(x) < Q(x) < φ(x)/x`.
pub fn q_approx<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::domain(
            "q_approx: argument must be positive (large-argument tail approximation)",
        ));
    }
    Ok(norm_pdf(x) / x)
}

/// Standard normal quantile (inverse CDF), double precision only.
///
/// Acklam's rational initial estimate polished with one Halley step.
pub fn inv_norm_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "inv_norm_cdf: p must be in (0,1)");
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239e0,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838e0,
        -2.549732539343734e0,
        4.374664141464968e0,
        2.938163982698783e0,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996e0,
        3.754408661907416e0,
    ];
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement on Phi(x) - p
    let e = norm_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Lambert W function, branch −1: the solution `w ≤ −1` of `w·e^w = h`
/// for `h ∈ [−1/e, 0)`.
pub fn lambert_w_m1<T: Real>(h: T) -> Result<T> {
    let neg_inv_e = k::<T>(-std::f64::consts::E.recip());
    if !(h >= neg_inv_e && h < T::zero()) {
        return Err(Error::domain("Lambert W branch -1 undefined"));
    }
    if h == neg_inv_e {
        return Ok(-T::one());
    }
    // Initial guess: branch-point series close to -1/e, asymptotic log form elsewhere.
    let e = k::<T>(std::f64::consts::E);
    let p = (k::<T>(2.0) * (T::one() + e * h)).sqrt();
    let mut w = if p < k(0.2) {
        -T::one() - p - p * p / k(3.0) - k::<T>(11.0 / 72.0) * p * p * p
    } else {
        let l1 = (-h).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..60 {
        let ew = w.exp();
        let f = w * ew - h;
        let wp1 = w + T::one();
        let denom = ew * wp1 - (w + k(2.0)) * f / (k::<T>(2.0) * wp1);
        let step = f / denom;
        w = w - step;
        if step.abs() <= k::<T>(1e-15) * w.abs() {
            break;
        }
    }
    // Guard: Halley can stray near the branch point; fall back to bisection.
    let resid = (w * w.exp() - h).abs();
    if w > -T::one() || resid > k::<T>(1e-12) * h.abs() {
        w = lambert_bisect(h);
    }
    Ok(w)
}

fn lambert_bisect<T: Real>(h: T) -> T {
    let mut lo = k::<T>(-746.0); // w e^w underflows below this
    let mut hi = -T::one();
    for _ in 0..200 {
        let mid = (lo + hi) / k(2.0);
        if mid * mid.exp() <= h {
            // left of the target on the increasing-in-w branch
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) / k(2.0)
}

/// A sampled function on an ascending grid after valley-filling:
/// each value replaced by the maximum over all points at or to its right.
#[derive(Debug, Clone)]
pub struct ValleyFilledFn<T> {
    pub xi: Vec<T>,
    pub value: Vec<T>,
}

/// Suffix-maximum (valley-filling) of a sampled function.
pub fn valley_fill<T: Real>(xi: &[T], raw: &[T]) -> Result<ValleyFilledFn<T>> {
    if xi.is_empty() || xi.len() != raw.len() {
        return Err(Error::domain("valley_fill: empty or mismatched sample grid"));
    }
    let mut value = raw.to_vec();
    for i in (0..value.len().saturating_sub(1)).rev() {
        if value[i + 1] > value[i] {
            value[i] = value[i + 1];
        }
    }
    Ok(ValleyFilledFn {
        xi: xi.to_vec(),
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn q_at_zero_is_half() {
        assert_relative_eq!(q_function(0.0f64).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn q_tail_underflows() {
        assert!(q_function(40.0f64).unwrap() < 1e-300);
    }

    #[test]
    fn q_rejects_non_finite() {
        assert!(q_function(f64::NAN).is_err());
        assert!(q_function(f64::INFINITY).is_err());
    }

    #[test]
    fn q_matches_quadrature_oracle() {
        // Independent oracle: adaptive integration of the normal density.
        let oracle = |x: f64| {
            0.5 - adaptive_simpson(&|t: f64| norm_pdf(t), 0.0, x, 1e-12, 60)
        };
        assert!((q_function(1.6448536f64).unwrap() - 0.05).abs() < 1e-7);
        for x in [0.3, 1.0, 1.6448536, 2.5, 4.0] {
            assert_relative_eq!(q_function(x).unwrap(), oracle(x), max_relative = 1e-10);
        }
    }

    #[test]
    fn q_approx_value_and_sandwich() {
        let qa3 = q_approx(3.0f64).unwrap();
        assert!((qa3 - 0.0014772).abs() < 1e-7);
        assert!(qa3 > q_function(3.0).unwrap());
        for x in [2.0f64, 3.0, 5.0] {
            let q = q_function(x).unwrap();
            let hi = q_approx(x).unwrap();
            let lo = (1.0 / x - 1.0 / (x * x * x)) * norm_pdf(x);
            assert!(lo < q && q < hi, "sandwich violated at {x}");
        }
        let rel = (q_approx(3.0f64).unwrap() - q_function(3.0).unwrap()).abs()
            / q_function(3.0f64).unwrap();
        assert!(rel < 0.12);
    }

    #[test]
    fn q_approx_rejects_nonpositive() {
        assert!(q_approx(0.0f64).is_err());
        assert!(q_approx(-1.0f64).is_err());
    }

    #[test]
    fn q_works_in_f32() {
        let q: f32 = q_function(1.0f32).unwrap();
        assert!((q - 0.158_655_25).abs() < 1e-6);
    }

    #[test]
    fn lambert_branch_point() {
        let w = lambert_w_m1(-1.0f64 / std::f64::consts::E).unwrap();
        assert_relative_eq!(w, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn lambert_matches_bisection_oracle() {
        // Oracle: plain bisection of w e^w on [-50, -1].
        let oracle = |h: f64| {
            let (mut lo, mut hi) = (-50.0f64, -1.0);
            for _ in 0..80 {
                let m = 0.5 * (lo + hi);
                if m * m.exp() <= h {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            0.5 * (lo + hi)
        };
        let w = lambert_w_m1(-0.1f64).unwrap();
        assert!((w - (-3.577152)).abs() < 1e-5);
        assert_relative_eq!(w, oracle(-0.1), max_relative = 1e-10);
    }

    #[test]
    fn lambert_rejects_out_of_domain() {
        assert!(lambert_w_m1(-0.5f64).is_err());
        assert!(lambert_w_m1(0.0f64).is_err());
        assert!(lambert_w_m1(0.1f64).is_err());
    }

    #[test]
    fn valley_fill_suffix_max() {
        let xi = [0.0f64, 1.0, 2.0, 3.0];
        let f = valley_fill(&xi, &[1.0, 0.0, 2.0, 0.0]).unwrap();
        assert_eq!(f.value, vec![2.0, 2.0, 2.0, 0.0]);
    }

    #[test]
    fn valley_fill_identity_on_monotone() {
        let xi = [0.0f64, 1.0, 2.0];
        let raw = [3.0f64, 2.0, 1.0];
        let f = valley_fill(&xi, &raw).unwrap();
        assert_eq!(f.value, raw.to_vec());
    }

    #[test]
    fn valley_fill_rejects_empty() {
        assert!(valley_fill::<f64>(&[], &[]).is_err());
    }

    proptest! {
        #[test]
        fn q_symmetry(x in -8.0f64..8.0) {
            let s = q_function(x).unwrap() + q_function(-x).unwrap();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn q_strictly_decreasing(x in -8.0f64..8.0, d in 1e-3f64..2.0) {
            prop_assert!(q_function(x + d).unwrap() < q_function(x).unwrap());
        }

        #[test]
        fn lambert_round_trip(h in -0.3678f64..-1e-12) {
            let w = lambert_w_m1(h).unwrap();
            prop_assert!(w <= -1.0);
            prop_assert!((w * w.exp() - h).abs() <= 1e-12 * h.abs());
        }

        #[test]
        fn valley_fill_properties(raw in proptest::collection::vec(-10.0f64..10.0, 1..50)) {
            let xi: Vec<f64> = (0..raw.len()).map(|i| i as f64).collect();
            let once = valley_fill(&xi, &raw).unwrap();
            for (v, r) in once.value.iter().zip(raw.iter()) {
                prop_assert!(v >= r);
            }
            for w in once.value.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            let twice = valley_fill(&once.xi, &once.value).unwrap();
            prop_assert_eq!(once.value, twice.value);
        }
    }
}
