//! Adaptive numerical integration (Simpson with Richardson error control).

use crate::Real;

/// Integrate `f` over `[a, b]` with adaptive Simpson subdivision.
///
/// `tol` is relative to a global magnitude scale `max|f|·(b−a)` estimated
/// from a coarse scan; panels whose Richardson error is below their share of
/// the resulting absolute budget stop subdividing, so near-zero stretches of
/// a spiky integrand terminate immediately instead of recursing to
/// `max_depth`.
pub fn adaptive_simpson<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T, tol: f64, max_depth: u32) -> T {
    if a == b {
        return T::zero();
    }
    let two = T::from_f64(2.0).unwrap();
    let six = T::from_f64(6.0).unwrap();
    let scan = 64;
    let mut fmax = T::zero();
    for i in 0..=scan {
        let x = a + (b - a) * T::from_f64(i as f64 / scan as f64).unwrap();
        fmax = fmax.max(f(x).abs());
    }
    let scale = (fmax * (b - a).abs()).max(T::from_f64(1e-300).unwrap());
    let abs_tol = T::from_f64(tol).unwrap() * scale;
    let m = (a + b) / two;
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / six * (fa + T::from_f64(4.0).unwrap() * fm + fb);
    simpson_step(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        T::from_f64(tol).unwrap(),
        abs_tol,
        max_depth,
    )
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Real>(
    f: &dyn Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    rel_tol: T,
    abs_tol: T,
    depth: u32,
) -> T {
    let two = T::from_f64(2.0).unwrap();
    let four = T::from_f64(4.0).unwrap();
    let six = T::from_f64(6.0).unwrap();
    let fifteen = T::from_f64(15.0).unwrap();
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / six * (fa + four * flm + fm);
    let right = (b - m) / six * (fm + four * frm + fb);
    let delta = left + right - whole;
    let budget = abs_tol.max(rel_tol * whole.abs());
    if depth == 0 || delta.abs() <= fifteen * budget {
        return left + right + delta / fifteen;
    }
    let half_abs = abs_tol / two;
    simpson_step(f, a, m, fa, flm, fm, left, rel_tol, half_abs, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, rel_tol, half_abs, depth - 1)
}

/// Trapezoid rule on an explicit sample grid.
pub fn trapezoid<T: Real>(xi: &[T], values: &[T]) -> T {
    assert_eq!(xi.len(), values.len());
    let two = T::from_f64(2.0).unwrap();
    let mut acc = T::zero();
    for i in 1..xi.len() {
        acc = acc + (xi[i] - xi[i - 1]) * (values[i] + values[i - 1]) / two;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomial_exactly() {
        // Simpson is exact for cubics.
        let v = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-10, 40);
        assert_relative_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn integrates_oscillatory() {
        let v = adaptive_simpson(&|x: f64| (10.0 * x).sin(), 0.0, 1.0, 1e-10, 50);
        let exact = (1.0 - (10.0f64).cos()) / 10.0;
        assert_relative_eq!(v, exact, max_relative = 1e-9);
    }

    #[test]
    fn integrates_gaussian_tail() {
        let v = adaptive_simpson(
            &|x: f64| (-x * x / 2.0).exp(),
            0.0,
            8.0,
            1e-12,
            60,
        );
        let exact = (std::f64::consts::PI / 2.0).sqrt();
        assert_relative_eq!(v, exact, max_relative = 1e-10);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(adaptive_simpson(&|x: f64| x, 1.0, 1.0, 1e-8, 10), 0.0);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let xi: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let vals: Vec<f64> = xi.iter().map(|x| 3.0 * x + 1.0).collect();
        assert_relative_eq!(trapezoid(&xi, &vals), 2.5, max_relative = 1e-14);
    }
}
