//! Adaptive composite Gauss-Legendre quadrature.
//!
//! 16-point panels, bisected until the two-half refinement changes a panel
//! by less than its share of the absolute tolerance. Nodes and weights are
//! computed at startup by Newton iteration on the Legendre polynomial, which
//! avoids hand-transcribed constants.

use std::sync::OnceLock;

/// Panel order used throughout the crate.
pub const PANEL_ORDER: usize = 16;

/// Default absolute tolerance for arc-length integrals.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Legendre P_n and P_n' at x (recurrence).
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of n-point Gauss-Legendre on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        // Tricomi initial guess, then Newton
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

fn panel_rule() -> &'static Vec<(f64, f64)> {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

fn panel<E, F: Fn(f64) -> Result<f64, E>>(f: &F, a: f64, b: f64) -> Result<f64, E> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in panel_rule() {
        acc += w * f(mid + half * x)?;
    }
    Ok(acc * half)
}

/// Integrate `f` over [a, b] to absolute tolerance `tol` by adaptive
/// bisection of 16-point panels. `f` may fail (e.g. a curve leaving its
/// chart); the error propagates out.
pub fn integrate_adaptive<E, F: Fn(f64) -> Result<f64, E>>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, E> {
    fn recurse<E, F: Fn(f64) -> Result<f64, E>>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64, E> {
        let mid = 0.5 * (a + b);
        let left = panel(f, a, mid)?;
        let right = panel(f, mid, b)?;
        let refined = left + right;
        if (refined - whole).abs() <= tol || depth >= 40 {
            return Ok(refined);
        }
        Ok(recurse(f, a, mid, left, 0.5 * tol, depth + 1)?
            + recurse(f, mid, b, right, 0.5 * tol, depth + 1)?)
    }
    if a == b {
        return Ok(0.0);
    }
    let whole = panel(f, a, b)?;
    recurse(f, a, b, whole, tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_high_degree_polynomials_exactly() {
        // 16-point GL is exact through degree 31
        let f = |x: f64| -> Result<f64, ()> { Ok(x.powi(30) + 3.0 * x.powi(7) - x) };
        let got = integrate_adaptive(&f, -1.0, 1.0, 1e-12).unwrap();
        assert!((got - 2.0 / 31.0).abs() < 1e-13);
    }

    #[test]
    fn handles_boundary_blowup_integrand() {
        // artanh'(x) = 1/(1-x^2), integral from 0 to 0.99 is artanh(0.99)
        let f = |x: f64| -> Result<f64, ()> { Ok(1.0 / (1.0 - x * x)) };
        let got = integrate_adaptive(&f, 0.0, 0.99, 1e-10).unwrap();
        assert!((got - 0.99f64.atanh()).abs() < 1e-9);
    }

    #[test]
    fn zero_length_interval() {
        let f = |_: f64| -> Result<f64, ()> { Ok(1.0) };
        assert_eq!(integrate_adaptive(&f, 0.3, 0.3, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn integrand_errors_propagate() {
        let f = |x: f64| -> Result<f64, &'static str> {
            if x > 0.5 {
                Err("out of domain")
            } else {
                Ok(1.0)
            }
        };
        assert!(integrate_adaptive(&f, 0.0, 1.0, 1e-10).is_err());
    }
}
