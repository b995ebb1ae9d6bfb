//! Built-in geometries.
//!
//! Three chart models ship with the crate:
//!
//! * `flat_ball`: flat C^n with the radial field `xi(p) = p`, on the ball
//!   `|p|^2 < c`. The deformed metric is the complex hyperbolic metric of
//!   constant holomorphic sectional curvature -4.
//! * `cone_round_sphere`: the cone `dt^2 + t^2 g_S` over a round odd sphere
//!   in hyperspherical coordinates, with `xi = t d_t` and the complex
//!   structure pulled back from flat space through the cone chart. The same
//!   geometry as the ball in different coordinates, which makes every scalar
//!   invariant cross-checkable between charts.
//! * `warped_generic`: `dt^2 + f(t)^2 g_S` for a configurable warping
//!   function; `xi = f d_t` is closed conformal with factor `f'`. No Kähler
//!   claims are made for it; it exercises the conformal-field and curvature
//!   oracles, and `f(t) = t^2` serves as the standing negative control for
//!   the Kähler checks.
//!
//! All coordinates are real; complex pairs are interleaved as
//! (x_1, y_1, ..., x_n, y_n) with `J d_{x_k} = d_{y_k}`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{GeometrySpec, MatrixJetField, VectorJetField};
use crate::jet::{Jet2, JetMatrix};

/// Margin keeping `mu = (c - |xi|^2)^{-1}` finite on the chart domain.
pub const DOMAIN_MARGIN: f64 = 1e-3;

/// Polar angles are kept in [0.2, pi - 0.2] to stay clear of chart
/// degeneracy; the last (azimuthal) angle in [0.2, 2 pi - 0.2].
pub const ANGLE_MARGIN: f64 = 0.2;

/// The standard complex structure on interleaved real coordinates:
/// `J e_{2k} = e_{2k+1}`, `J e_{2k+1} = -e_{2k}`.
pub fn standard_j_matrix(d: usize) -> DMatrix<f64> {
    assert!(d % 2 == 0);
    let mut j = DMatrix::zeros(d, d);
    for k in 0..d / 2 {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

/// Flat ball model: g = Id, standard J, xi(p) = p, domain |p|^2 < c - margin.
pub fn flat_ball(n_complex: usize, c: f64) -> Result<GeometrySpec> {
    if n_complex < 1 || c <= 0.0 {
        return Err(Error::InvalidParams {
            reason: format!("flat_ball needs n >= 1 and c > 0, got n={n_complex}, c={c}"),
        });
    }
    let d = 2 * n_complex;
    let j_const = standard_j_matrix(d);
    let metric: MatrixJetField = Arc::new(move |x: &[Jet2]| {
        let dim = x[0].dim();
        JetMatrix::from_fn(d, d, |i, j| Jet2::constant(if i == j { 1.0 } else { 0.0 }, dim))
    });
    let jmat = j_const.clone();
    let complex_structure: MatrixJetField = Arc::new(move |x: &[Jet2]| {
        let dim = x[0].dim();
        JetMatrix::from_fn(d, d, |i, j| Jet2::constant(jmat[(i, j)], dim))
    });
    let xi: VectorJetField = Arc::new(|x: &[Jet2]| x.to_vec());
    let bound = c - DOMAIN_MARGIN;
    let domain = Arc::new(move |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() < bound);
    let half_width = 0.85 * (c / d as f64).sqrt();
    Ok(GeometrySpec {
        name: format!("flat_ball(n={n_complex}, c={c})"),
        n_complex,
        c,
        metric,
        complex_structure: Some(complex_structure),
        xi,
        domain,
        domain_box: vec![(-half_width, half_width); d],
    })
}

/// Ball variant with a deliberately non-conformal field `xi = (x_0^2, 0, ...)`.
/// Negative control: the closed-conformal and `d theta_{J xi} = 2 psi w`
/// identities must fail on it.
pub fn flat_ball_corrupted_xi(n_complex: usize, c: f64) -> Result<GeometrySpec> {
    let mut geom = flat_ball(n_complex, c)?;
    geom.name = format!("flat_ball_corrupted_xi(n={n_complex}, c={c})");
    geom.xi = Arc::new(|x: &[Jet2]| {
        let mut out: Vec<Jet2> = x.iter().map(|v| Jet2::constant(0.0, v.dim())).collect();
        out[0] = &x[0] * &x[0];
        out
    });
    Ok(geom)
}

// ---------------------------------------------------------------------------
// Hyperspherical machinery shared by the cone/warped models and leaf charts.
// ---------------------------------------------------------------------------

/// Unit-sphere embedding S^k -> R^{k+1} in hyperspherical angles
/// phi_0..phi_{k-1}:
/// `S^0 = cos phi_0`, `S^i = sin phi_0 ... sin phi_{i-1} cos phi_i`,
/// `S^k = sin phi_0 ... sin phi_{k-1}`.
pub(crate) fn sphere_embed(phi: &[Jet2]) -> Vec<Jet2> {
    let k = phi.len();
    let dim = if k > 0 { phi[0].dim() } else { 0 };
    let mut out = Vec::with_capacity(k + 1);
    for comp in 0..=k {
        let mut p = Jet2::constant(1.0, dim);
        for (beta, angle) in phi.iter().enumerate() {
            if beta < comp {
                p = &p * &angle.sin();
            } else if beta == comp && comp < k {
                p = &p * &angle.cos();
            }
        }
        out.push(p);
    }
    out
}

/// Analytic partial `d S^comp / d phi_wrt` as a jet expression, so that the
/// Jacobian itself stays twice differentiable.
pub(crate) fn sphere_embed_partial(phi: &[Jet2], comp: usize, wrt: usize) -> Jet2 {
    let k = phi.len();
    let dim = phi[0].dim();
    // factor for angle beta inside component comp: sin for beta < comp,
    // cos for beta == comp (when comp < k), absent otherwise
    let in_support = wrt < comp || (wrt == comp && comp < k);
    if !in_support {
        return Jet2::constant(0.0, dim);
    }
    let mut p = Jet2::constant(1.0, dim);
    for (beta, angle) in phi.iter().enumerate() {
        let factor = if beta < comp {
            if beta == wrt {
                angle.cos() // d sin
            } else {
                angle.sin()
            }
        } else if beta == comp && comp < k {
            if beta == wrt {
                angle.sin().neg() // d cos
            } else {
                angle.cos()
            }
        } else {
            continue;
        };
        p = &p * &factor;
    }
    p
}

/// Round-sphere metric in hyperspherical angles, as jet entries:
/// `diag(1, sin^2 phi_0, sin^2 phi_0 sin^2 phi_1, ...)`.
pub(crate) fn sphere_metric_jets(phi: &[Jet2]) -> JetMatrix {
    let k = phi.len();
    let dim = phi[0].dim();
    let mut m = JetMatrix::zeros(k, k, dim);
    for alpha in 0..k {
        let mut e = Jet2::constant(1.0, dim);
        for beta in 0..alpha {
            let s = phi[beta].sin();
            e = &e * &(&s * &s);
        }
        m.set(alpha, alpha, e);
    }
    m
}

/// Cone chart map `Phi(t, phi) = t S(phi)` together with its Jacobian as a
/// jet matrix (columns: d_t, d_phi_0, ...).
pub(crate) fn cone_embed_with_jacobian(x: &[Jet2]) -> (Vec<Jet2>, JetMatrix) {
    let t = &x[0];
    let phi = &x[1..];
    let k = phi.len();
    let s = sphere_embed(phi);
    let embed: Vec<Jet2> = s.iter().map(|si| t * si).collect();
    let jac = JetMatrix::from_fn(k + 1, k + 1, |row, col| {
        if col == 0 {
            s[row].clone()
        } else {
            t * &sphere_embed_partial(phi, row, col - 1)
        }
    });
    (embed, jac)
}

/// Warping function descriptors for `warped_generic`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WarpFn {
    /// f(t) = a t + b
    Affine { a: f64, b: f64 },
    /// f(t) = t^2 (the Kähler negative control)
    Square,
}

impl WarpFn {
    fn eval_jet(&self, t: &Jet2) -> Jet2 {
        match *self {
            WarpFn::Affine { a, b } => t.scale(a).add_scalar(b),
            WarpFn::Square => t * t,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        match *self {
            WarpFn::Affine { a, b } => a * t + b,
            WarpFn::Square => t * t,
        }
    }

    /// f' as a plain function, used only to describe expectations in tests
    /// and reports (the library always recomputes psi from div xi).
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            WarpFn::Affine { a, .. } => a,
            WarpFn::Square => 2.0 * t,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            WarpFn::Affine { a, b } => format!("{a}*t+{b}"),
            WarpFn::Square => "t^2".to_string(),
        }
    }
}

fn angle_domain_box(k: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(k);
    for alpha in 0..k {
        if alpha + 1 < k {
            out.push((ANGLE_MARGIN, std::f64::consts::PI - ANGLE_MARGIN));
        } else {
            out.push((ANGLE_MARGIN, 2.0 * std::f64::consts::PI - ANGLE_MARGIN));
        }
    }
    out
}

fn warped_sphere_geometry(
    name: String,
    m_complex: usize,
    c: f64,
    f: WarpFn,
    t_range: (f64, f64),
    xi_bounded_by_c: bool,
) -> Result<GeometrySpec> {
    let d = 2 * m_complex;
    let k = d - 1;
    let metric: MatrixJetField = Arc::new(move |x: &[Jet2]| {
        let dim = x[0].dim();
        let fval = f.eval_jet(&x[0]);
        let f2 = &fval * &fval;
        let sphere = sphere_metric_jets(&x[1..]);
        let mut mjet = JetMatrix::zeros(d, d, dim);
        mjet.set(0, 0, Jet2::constant(1.0, dim));
        for alpha in 0..k {
            mjet.set(alpha + 1, alpha + 1, &f2 * sphere.get(alpha, alpha));
        }
        mjet
    });
    let xi: VectorJetField = Arc::new(move |x: &[Jet2]| {
        let dim = x[0].dim();
        let mut out = vec![Jet2::constant(0.0, dim); x.len()];
        out[0] = f.eval_jet(&x[0]);
        out
    });
    // Complex structure pulled back from flat space through the cone chart
    // Phi(t, phi) = t S(phi): J_chart = DPhi^{-1} J_flat DPhi. For f(t) = t
    // this is the integrable structure making the cone Kähler; attaching the
    // same matrix field to other warpings provides the negative control.
    let j_flat = standard_j_matrix(d);
    let complex_structure: MatrixJetField = Arc::new(move |x: &[Jet2]| {
        let dim = x[0].dim();
        let (_, dphi) = cone_embed_with_jacobian(x);
        let jf = JetMatrix::from_fn(d, d, |i, jj| Jet2::constant(j_flat[(i, jj)], dim));
        let rhs = jf.mul_mat(&dphi);
        dphi.solve(&rhs).expect("cone chart Jacobian is invertible on the chart domain")
    });

    let (t_min, t_max) = t_range;
    let mut boxes = vec![(t_min, t_max)];
    boxes.extend(angle_domain_box(k));
    let boxes_for_domain = boxes.clone();
    let bound = c - DOMAIN_MARGIN;
    let domain = Arc::new(move |x: &[f64]| {
        if x.len() != d {
            return false;
        }
        for (v, (lo, hi)) in x.iter().zip(boxes_for_domain.iter()) {
            if v < lo || v > hi {
                return false;
            }
        }
        if xi_bounded_by_c {
            let fv = f.eval(x[0]);
            if fv * fv >= bound {
                return false;
            }
        }
        true
    });
    Ok(GeometrySpec {
        name,
        n_complex: m_complex,
        c,
        metric,
        complex_structure: Some(complex_structure),
        xi,
        domain,
        domain_box: boxes,
    })
}

/// Cone over the round sphere S^{2m-1} with f(t) = t, on t in
/// `[0.35 sqrt(c), 0.85 sqrt(c)]` by default.
pub fn cone_round_sphere(m_complex: usize, c: f64) -> Result<GeometrySpec> {
    let s = c.sqrt();
    cone_round_sphere_with_t_range(m_complex, c, (0.35 * s, 0.85 * s))
}

pub fn cone_round_sphere_with_t_range(
    m_complex: usize,
    c: f64,
    t_range: (f64, f64),
) -> Result<GeometrySpec> {
    if m_complex < 2 {
        return Err(Error::InvalidParams {
            reason: format!("cone_round_sphere needs sphere dimension 2m-1 >= 3, got m={m_complex}"),
        });
    }
    if c <= 0.0 || t_range.0 <= 0.0 || t_range.1 <= t_range.0 {
        return Err(Error::InvalidParams {
            reason: format!("cone_round_sphere needs c > 0 and 0 < t_min < t_max, got c={c}, t={t_range:?}"),
        });
    }
    if t_range.1 * t_range.1 >= c - DOMAIN_MARGIN {
        return Err(Error::InvalidParams {
            reason: format!(
                "cone_round_sphere needs t_max < sqrt(c) (got t_max={}, c={c})",
                t_range.1
            ),
        });
    }
    warped_sphere_geometry(
        format!("cone_round_sphere(m={m_complex}, c={c})"),
        m_complex,
        c,
        WarpFn::Affine { a: 1.0, b: 0.0 },
        t_range,
        true,
    )
}

/// Generic warped product `dt^2 + f(t)^2 g_{S^k}` with `xi = f d_t`.
///
/// Usable for conformal-field and curvature-oracle tests only; no Kähler
/// claims (the attached J is the cone one, which is parallel precisely for
/// affine f, and Hermitian only for f(t) = t).
pub fn warped_generic(f: WarpFn, sphere_dim: usize, t_range: (f64, f64)) -> Result<GeometrySpec> {
    if sphere_dim % 2 == 0 || sphere_dim < 3 {
        return Err(Error::InvalidParams {
            reason: format!("warped_generic needs an odd sphere dimension >= 3, got {sphere_dim}"),
        });
    }
    let (t_min, t_max) = t_range;
    if t_min >= t_max {
        return Err(Error::InvalidParams {
            reason: format!("warped_generic needs t_min < t_max, got {t_range:?}"),
        });
    }
    // f must stay positive on the range; both shipped shapes are monotone or
    // convex there, so endpoint checks suffice together with a sign check.
    let positive = match f {
        WarpFn::Affine { .. } => f.eval(t_min) > 0.0 && f.eval(t_max) > 0.0,
        WarpFn::Square => t_min > 0.0,
    };
    if !positive {
        return Err(Error::InvalidParams {
            reason: format!("warping function {} is not positive on {t_range:?}", f.describe()),
        });
    }
    let m_complex = (sphere_dim + 1) / 2;
    let fmax = f.eval(t_min).max(f.eval(t_max));
    let c = 2.0 * fmax * fmax; // generous bound; warped models are not deformed
    warped_sphere_geometry(
        format!(
            "warped_generic(f={}, sphere_dim={sphere_dim}, t=[{t_min},{t_max}])",
            f.describe()
        ),
        m_complex,
        c,
        f,
        t_range,
        false,
    )
}

/// Cartesian image of a cone-chart point under `Phi(t, phi) = t S(phi)`.
pub fn cone_chart_to_cartesian(x: &[f64]) -> DVector<f64> {
    let seeds = Jet2::seed_constants(x);
    let (embed, _) = cone_embed_with_jacobian(&seeds);
    DVector::from_iterator(embed.len(), embed.iter().map(|j| j.value))
}

/// Value of the cone-chart Jacobian `DPhi` (columns map chart directions to
/// Cartesian directions).
pub fn cone_chart_jacobian(x: &[f64]) -> DMatrix<f64> {
    let seeds = Jet2::seed_constants(x);
    let (_, jac) = cone_embed_with_jacobian(&seeds);
    jac.values()
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    FlatBall,
    ConeRoundSphere,
    WarpedGeneric,
}

impl ModelKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "flat_ball" => Ok(ModelKind::FlatBall),
            "cone_round_sphere" => Ok(ModelKind::ConeRoundSphere),
            "warped_generic" => Ok(ModelKind::WarpedGeneric),
            other => Err(Error::UnknownModel {
                name: other.to_string(),
            }),
        }
    }
}

/// Parameters selecting a built-in model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub n_complex: usize,
    pub c: f64,
    pub f_spec: WarpFn,
    pub t_range: Option<(f64, f64)>,
}

impl ModelParams {
    pub fn flat_ball(n_complex: usize, c: f64) -> Self {
        ModelParams {
            kind: ModelKind::FlatBall,
            n_complex,
            c,
            f_spec: WarpFn::Affine { a: 1.0, b: 0.0 },
            t_range: None,
        }
    }

    pub fn cone_round_sphere(m_complex: usize, c: f64) -> Self {
        ModelParams {
            kind: ModelKind::ConeRoundSphere,
            n_complex: m_complex,
            c,
            f_spec: WarpFn::Affine { a: 1.0, b: 0.0 },
            t_range: None,
        }
    }

    pub fn warped_generic(f: WarpFn, n_complex: usize, t_range: (f64, f64)) -> Self {
        ModelParams {
            kind: ModelKind::WarpedGeneric,
            n_complex,
            c: 0.0, // recomputed by the builder
            f_spec: f,
            t_range: Some(t_range),
        }
    }

    pub fn build(&self) -> Result<GeometrySpec> {
        match self.kind {
            ModelKind::FlatBall => flat_ball(self.n_complex, self.c),
            ModelKind::ConeRoundSphere => match self.t_range {
                Some(r) => cone_round_sphere_with_t_range(self.n_complex, self.c, r),
                None => cone_round_sphere(self.n_complex, self.c),
            },
            ModelKind::WarpedGeneric => {
                let range = self.t_range.unwrap_or((0.5, 1.5));
                warped_generic(self.f_spec, 2 * self.n_complex - 1, range)
            }
        }
    }

    /// Stable textual form used in reports.
    pub fn describe(&self) -> String {
        match self.kind {
            ModelKind::FlatBall => format!("flat_ball(n={}, c={})", self.n_complex, self.c),
            ModelKind::ConeRoundSphere => match self.t_range {
                Some((lo, hi)) => format!(
                    "cone_round_sphere(m={}, c={}, t=[{lo},{hi}])",
                    self.n_complex, self.c
                ),
                None => format!("cone_round_sphere(m={}, c={})", self.n_complex, self.c),
            },
            ModelKind::WarpedGeneric => {
                let range = self.t_range.unwrap_or((0.5, 1.5));
                format!(
                    "warped_generic(f={}, n={}, t=[{},{}])",
                    self.f_spec.describe(),
                    self.n_complex,
                    range.0,
                    range.1
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature;

    #[test]
    fn sphere_embed_is_unit_and_partials_match_jets() {
        let phi_vals = [0.7, 1.2, 2.1];
        let phi = Jet2::seed_point(&phi_vals);
        let s = sphere_embed(&phi);
        let norm: f64 = s.iter().map(|c| c.value * c.value).sum();
        assert!((norm - 1.0).abs() < 1e-14);
        // analytic partials agree with the jet gradients of the embedding
        for comp in 0..=2 {
            for wrt in 0..3 {
                let analytic = sphere_embed_partial(&phi, comp, wrt);
                assert!(
                    (analytic.value - s[comp].grad[wrt]).abs() < 1e-14,
                    "component {comp} wrt {wrt}"
                );
            }
        }
    }

    #[test]
    fn cone_chart_is_isometric_to_flat_space() {
        // pull the cone metric through the chart: DPhi^T DPhi must equal it
        let x = [0.8, 0.9, 1.1, 2.3];
        let geom = cone_round_sphere(2, 1.0).unwrap();
        let g_chart = geom.metric_value(&x).unwrap();
        let jac = cone_chart_jacobian(&x);
        assert!((jac.transpose() * &jac - g_chart).amax() < 1e-12);
    }

    #[test]
    fn cone_xi_is_radial_with_unit_conformal_factor() {
        let geom = cone_round_sphere(2, 1.0).unwrap();
        let x = [0.6, 1.0, 1.4, 0.9];
        let psi = geom.conformal_factor(&x).unwrap();
        assert!((psi - 1.0).abs() < 1e-11, "psi = {psi}");
        let dir = DVector::from_vec(vec![0.3, -0.4, 0.8, 0.1]);
        let r = geom.closed_conformal_residual(&x, &dir).unwrap();
        assert!(r.amax() < 1e-8, "residual {}", r.amax());
    }

    #[test]
    fn cone_j_squares_to_minus_identity_and_is_hermitian() {
        let geom = cone_round_sphere(2, 1.0).unwrap();
        let x = [0.7, 0.8, 1.9, 4.0];
        assert!(geom.j_squared_residual(&x).unwrap() < 1e-11);
        assert!(geom.hermitian_residual(&x).unwrap() < 1e-11);
    }

    #[test]
    fn cone_structure_is_kahler_but_t_squared_warp_is_not() {
        let geom = cone_round_sphere(2, 1.0).unwrap();
        let x = [0.6, 1.1, 0.8, 2.7];
        assert!(geom.kahler_residual(&x).unwrap() < 1e-7);

        let bad = warped_generic(WarpFn::Square, 3, (0.5, 1.2)).unwrap();
        let r = bad.kahler_residual(&[0.8, 1.1, 0.8, 2.7]).unwrap();
        assert!(r > 1e-3, "t^2 warping must fail the parallel-J test, got {r}");
    }

    #[test]
    fn warped_conformal_factors_match_f_prime() {
        let affine = warped_generic(WarpFn::Affine { a: 2.0, b: 3.0 }, 3, (0.4, 1.3)).unwrap();
        let x = [0.9, 1.0, 1.2, 3.0];
        assert!((affine.conformal_factor(&x).unwrap() - 2.0).abs() < 1e-10);

        let square = warped_generic(WarpFn::Square, 3, (0.5, 1.2)).unwrap();
        let psi = square.conformal_factor(&x).unwrap();
        assert!((psi - 2.0 * x[0]).abs() < 1e-10, "psi = {psi}");
        // closed conformal still holds for f = t^2
        let dir = DVector::from_vec(vec![1.0, 0.2, -0.5, 0.3]);
        let r = square.closed_conformal_residual(&x, &dir).unwrap();
        assert!(r.amax() < 1e-8);
    }

    #[test]
    fn warped_f_crossing_zero_is_rejected() {
        assert!(warped_generic(WarpFn::Affine { a: 1.0, b: -1.0 }, 3, (0.5, 1.5)).is_err());
        assert!(warped_generic(WarpFn::Square, 3, (-0.5, 0.5)).is_err());
    }

    #[test]
    fn cone_is_ricci_flat() {
        let geom = cone_round_sphere(2, 1.0).unwrap();
        let ric = curvature::ricci(&geom.metric, &[0.7, 1.0, 1.3, 2.0]).unwrap();
        assert!(ric.amax() < 1e-9, "cone Ricci amax = {}", ric.amax());
    }

    #[test]
    fn ric_xi_hat_on_square_warping() {
        // f = t^2: psi = 2t, grad psi = 2 d_t, xi = t^2 d_t, so the
        // operational value is r = -2/t^2; the tensor candidate
        // Ric(d_t,d_t)/(d-1) = -f''/f = -2/t^2 agrees.
        let geom = warped_generic(WarpFn::Square, 3, (0.5, 1.2)).unwrap();
        let x = [0.9, 1.0, 1.2, 3.0];
        let r_op = geom.ric_xi_hat(&x).unwrap();
        assert!((r_op - (-2.0 / (x[0] * x[0]))).abs() < 1e-9, "r_op = {r_op}");
        let xi = geom.xi_value(&x).unwrap();
        let r_tensor =
            curvature::ricci_direction(&geom.metric, &x, &xi, false).unwrap();
        assert!((r_op - r_tensor).abs() < 1e-8, "{r_op} vs {r_tensor}");
    }

    #[test]
    fn registry_roundtrip() {
        assert_eq!(ModelKind::parse("flat_ball").unwrap(), ModelKind::FlatBall);
        assert!(ModelKind::parse("nope").is_err());
        let p = ModelParams::flat_ball(2, 1.0);
        let g = p.build().unwrap();
        assert_eq!(g.dim(), 4);
        assert_eq!(p.describe(), "flat_ball(n=2, c=1)");
    }
}
