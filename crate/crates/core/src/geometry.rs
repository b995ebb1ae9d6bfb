//! Chart-based representation of a Hermitian/Kähler manifold carrying a
//! distinguished vector field xi.
//!
//! A [`GeometrySpec`] packages jet-evaluable component functions for the
//! metric, the complex structure J, and xi, together with a chart-domain
//! predicate and a sampling box. Everything downstream (curvature oracles,
//! the metric deformation, submanifold geometry) consumes these evaluators
//! uniformly, so built-in models and user models get identical treatment.
//!
//! The conformal factor is never supplied by a model: it is always computed
//! as `psi = div(xi) / d`, which both removes a redundant input and checks
//! the defining relation for free wherever `nabla_X xi = psi X` is asserted.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use ndarray::Array3;

use crate::curvature;
use crate::error::{Error, Result};
use crate::jet::{Jet2, JetMatrix};

pub type ScalarJetField = Arc<dyn Fn(&[Jet2]) -> Jet2 + Send + Sync>;
pub type VectorJetField = Arc<dyn Fn(&[Jet2]) -> Vec<Jet2> + Send + Sync>;
pub type MatrixJetField = Arc<dyn Fn(&[Jet2]) -> JetMatrix + Send + Sync>;
pub type DomainPredicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Threshold below which xi is treated as vanishing.
pub const XI_ZERO_THRESHOLD: f64 = 1e-12;

/// A chart-based geometry: real dimension `2 n_complex`, deformation
/// constant `c`, and jet-evaluable fields. `complex_structure` is absent for
/// models that only exercise the conformal-field machinery.
#[derive(Clone)]
pub struct GeometrySpec {
    pub name: String,
    pub n_complex: usize,
    pub c: f64,
    pub metric: MatrixJetField,
    pub complex_structure: Option<MatrixJetField>,
    pub xi: VectorJetField,
    pub domain: DomainPredicate,
    /// Axis-aligned sampling box inside the chart domain (rejection-sampled
    /// against `domain`).
    pub domain_box: Vec<(f64, f64)>,
}

impl std::fmt::Debug for GeometrySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeometrySpec")
            .field("name", &self.name)
            .field("n_complex", &self.n_complex)
            .field("c", &self.c)
            .field("has_complex_structure", &self.complex_structure.is_some())
            .finish()
    }
}

/// A tangent vector: base point coordinates plus contravariant components.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: DVector<f64>,
    pub comp: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: &[f64], comp: &[f64]) -> Self {
        TangentVector {
            base: DVector::from_row_slice(base),
            comp: DVector::from_row_slice(comp),
        }
    }

    fn same_base(&self, other: &TangentVector) -> bool {
        (&self.base - &other.base).amax() < 1e-12
    }
}

/// Ordered list (e_1, J e_1, ..., e_n, J e_n) of tangent vectors at a common
/// base point, orthonormal for the metric it was built against.
#[derive(Debug, Clone)]
pub struct HermitianFrame {
    pub base: DVector<f64>,
    pub vectors: Vec<DVector<f64>>,
}

impl GeometrySpec {
    /// Real chart dimension `2 n_complex`.
    pub fn dim(&self) -> usize {
        2 * self.n_complex
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && (self.domain)(x)
    }

    fn require_domain(&self, x: &[f64]) -> Result<()> {
        if self.in_domain(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                model: self.name.clone(),
                point: x.to_vec(),
            })
        }
    }

    pub fn complex_structure(&self) -> Result<&MatrixJetField> {
        self.complex_structure
            .as_ref()
            .ok_or(Error::MissingComplexStructure)
    }

    /// Metric components at `x` with gradients and Hessians populated.
    pub fn metric_at(&self, x: &[f64]) -> Result<JetMatrix> {
        self.require_domain(x)?;
        Ok((self.metric)(&Jet2::seed_point(x)))
    }

    pub fn metric_value(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.require_domain(x)?;
        Ok((self.metric)(&Jet2::seed_constants(x)).values())
    }

    pub fn j_value(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.require_domain(x)?;
        Ok((self.complex_structure()?)(&Jet2::seed_constants(x)).values())
    }

    pub fn xi_value(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.require_domain(x)?;
        let jets = (self.xi)(&Jet2::seed_constants(x));
        Ok(DVector::from_iterator(jets.len(), jets.iter().map(|j| j.value)))
    }

    /// J xi as a coordinate vector.
    pub fn j_xi_value(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok(self.j_value(x)? * self.xi_value(x)?)
    }

    /// The field J xi as a jet-evaluable vector field.
    pub fn j_xi_field(&self) -> Result<VectorJetField> {
        let j = self.complex_structure()?.clone();
        let xi = self.xi.clone();
        Ok(Arc::new(move |x: &[Jet2]| j(x).mul_vec(&xi(x))))
    }

    pub fn tangent(&self, x: &[f64], comp: &[f64]) -> TangentVector {
        TangentVector::new(x, comp)
    }

    /// g(X, Y) at the common base point.
    pub fn inner(&self, x: &TangentVector, y: &TangentVector) -> Result<f64> {
        if !x.same_base(y) {
            return Err(Error::MismatchedBasePoints);
        }
        let g = self.metric_value(x.base.as_slice())?;
        Ok((&g * &y.comp).dot(&x.comp))
    }

    pub fn norm_sq(&self, x: &TangentVector) -> Result<f64> {
        self.inner(x, x)
    }

    /// theta_xi(X) = g(xi, X).
    pub fn theta_xi(&self, x: &TangentVector) -> Result<f64> {
        let xi = self.xi_value(x.base.as_slice())?;
        let g = self.metric_value(x.base.as_slice())?;
        Ok((&g * &x.comp).dot(&xi))
    }

    /// theta_{J xi}(X) = g(J xi, X).
    pub fn theta_j_xi(&self, x: &TangentVector) -> Result<f64> {
        let jxi = self.j_xi_value(x.base.as_slice())?;
        let g = self.metric_value(x.base.as_slice())?;
        Ok((&g * &x.comp).dot(&jxi))
    }

    /// |xi|^2 at x.
    pub fn xi_norm_sq(&self, x: &[f64]) -> Result<f64> {
        let xi = self.xi_value(x)?;
        let g = self.metric_value(x)?;
        Ok((&g * &xi).dot(&xi))
    }

    /// Conformal factor `psi = div(xi) / d` (covariant divergence).
    pub fn conformal_factor(&self, x: &[f64]) -> Result<f64> {
        Ok(self.conformal_factor_with_gradient(x)?.0)
    }

    /// psi together with its coordinate gradient `d_k psi`.
    ///
    /// div(xi) = d_i xi^i + 1/2 xi^m d_m log det g, so the gradient needs the
    /// xi Hessians and the log-det Hessian, both of which one jet evaluation
    /// already carries.
    pub fn conformal_factor_with_gradient(&self, x: &[f64]) -> Result<(f64, DVector<f64>)> {
        self.require_domain(x)?;
        let d = self.dim();
        let seeds = Jet2::seed_point(x);
        let gj = (self.metric)(&seeds);
        let xij = (self.xi)(&seeds);
        let log_det = gj.det()?.try_ln()?;

        let mut div = 0.0;
        for i in 0..d {
            div += xij[i].grad[i];
        }
        for m in 0..d {
            div += 0.5 * xij[m].value * log_det.grad[m];
        }

        let mut grad = DVector::zeros(d);
        for k in 0..d {
            let mut acc = 0.0;
            for i in 0..d {
                acc += xij[i].hess[(k, i)];
            }
            for m in 0..d {
                acc += 0.5 * xij[m].grad[k] * log_det.grad[m];
                acc += 0.5 * xij[m].value * log_det.hess[(k, m)];
            }
            grad[k] = acc;
        }
        let scale = 1.0 / d as f64;
        Ok((div * scale, grad * scale))
    }

    /// The gradient vector field of psi: `(grad psi)^i = g^ik d_k psi`.
    pub fn grad_psi(&self, x: &[f64]) -> Result<DVector<f64>> {
        let (_, dpsi) = self.conformal_factor_with_gradient(x)?;
        let g = self.metric_value(x)?;
        let g_inv = g.try_inverse().ok_or(Error::SingularMetric)?;
        Ok(g_inv * dpsi)
    }

    /// Normalized Ricci curvature in the xi direction, defined operationally
    /// as the scalar r with `grad psi = -r xi`; 0 by convention where xi
    /// vanishes. The tensor-based candidate `Ric(xi,xi)/(|xi|^2 (d-1))` is
    /// cross-checked against this number in the verification suite.
    pub fn ric_xi_hat(&self, x: &[f64]) -> Result<f64> {
        let norm_sq = self.xi_norm_sq(x)?;
        if norm_sq < XI_ZERO_THRESHOLD {
            return Ok(0.0);
        }
        let (_, dpsi) = self.conformal_factor_with_gradient(x)?;
        let xi = self.xi_value(x)?;
        // <grad psi, xi>_g = dpsi(xi), no metric inverse needed
        Ok(-dpsi.dot(&xi) / norm_sq)
    }

    /// `nabla_X xi - psi X`: the zero vector iff xi is closed conformal at x
    /// in the direction X (within tolerance). Uses numerically computed
    /// Christoffel symbols.
    pub fn closed_conformal_residual(&self, x: &[f64], dir: &DVector<f64>) -> Result<DVector<f64>> {
        self.require_domain(x)?;
        let d = self.dim();
        let seeds = Jet2::seed_point(x);
        let xij = (self.xi)(&seeds);
        let gamma = curvature::christoffel(&self.metric, x)?;
        let psi = self.conformal_factor(x)?;
        let mut out = DVector::zeros(d);
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += dir[j] * xij[i].grad[j];
                for k in 0..d {
                    acc += gamma[[i, j, k]] * dir[j] * xij[k].value;
                }
            }
            out[i] = acc - psi * dir[i];
        }
        Ok(out)
    }

    /// Max component of the covariant derivative of J:
    /// `(nabla_k J)^i_j = d_k J^i_j + Gamma^i_km J^m_j - Gamma^m_kj J^i_m`.
    /// Zero iff the structure is Kähler at x.
    pub fn kahler_residual(&self, x: &[f64]) -> Result<f64> {
        self.require_domain(x)?;
        let d = self.dim();
        let jj = (self.complex_structure()?)(&Jet2::seed_point(x));
        let gamma = curvature::christoffel(&self.metric, x)?;
        let mut worst = 0.0f64;
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut acc = jj.entry_grad(i, j)[k];
                    for m in 0..d {
                        acc += gamma[[i, k, m]] * jj.get(m, j).value;
                        acc -= gamma[[m, k, j]] * jj.get(i, m).value;
                    }
                    worst = worst.max(acc.abs());
                }
            }
        }
        Ok(worst)
    }

    /// Max |(J^2 + Id)^i_j| at x.
    pub fn j_squared_residual(&self, x: &[f64]) -> Result<f64> {
        let j = self.j_value(x)?;
        let d = self.dim();
        Ok((&j * &j + DMatrix::<f64>::identity(d, d)).amax())
    }

    /// Max |g(J d_i, J d_j) - g_ij| at x.
    pub fn hermitian_residual(&self, x: &[f64]) -> Result<f64> {
        let g = self.metric_value(x)?;
        let j = self.j_value(x)?;
        Ok((j.transpose() * &g * &j - g).amax())
    }

    /// Hermitian frame at x. If `first` is supplied it seeds e_1 (after
    /// normalization); a degenerate first vector is an error.
    pub fn hermitian_frame_at(
        &self,
        x: &[f64],
        first: Option<&TangentVector>,
    ) -> Result<HermitianFrame> {
        let g = self.metric_value(x)?;
        let j = self.j_value(x)?;
        let seed = match first {
            Some(v) => {
                if (&v.base - DVector::from_row_slice(x)).amax() > 1e-12 {
                    return Err(Error::MismatchedBasePoints);
                }
                Some(v.comp.clone())
            }
            None => None,
        };
        let vectors = hermitian_frame(&g, &j, seed.as_ref())?;
        Ok(HermitianFrame {
            base: DVector::from_row_slice(x),
            vectors,
        })
    }
}

/// Gram-Schmidt construction of a Hermitian frame (e_1, J e_1, ...) for a
/// Hermitian pair (g, J) given by their value matrices at a point.
pub fn hermitian_frame(
    g: &DMatrix<f64>,
    j: &DMatrix<f64>,
    first: Option<&DVector<f64>>,
) -> Result<Vec<DVector<f64>>> {
    let d = g.nrows();
    let inner = |u: &DVector<f64>, v: &DVector<f64>| (g * v).dot(u);
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(d);

    let push_pair = |frame: &mut Vec<DVector<f64>>, cand: &DVector<f64>| -> Result<bool> {
        let mut v = cand.clone();
        for e in frame.iter() {
            v -= e * inner(e, &v);
        }
        let n2 = inner(&v, &v);
        if n2 < 1e-12 {
            return Ok(false);
        }
        let e = v / n2.sqrt();
        let je = j * &e;
        frame.push(e);
        frame.push(je);
        Ok(true)
    };

    if let Some(f) = first {
        let n2 = inner(f, f);
        if n2 < 1e-24 {
            return Err(Error::DegenerateVector {
                norm: n2.sqrt(),
                threshold: 1e-12,
            });
        }
        push_pair(&mut frame, f)?;
    }
    let mut k = 0;
    while frame.len() < d && k < d {
        let mut cand = DVector::zeros(d);
        cand[k] = 1.0;
        push_pair(&mut frame, &cand)?;
        k += 1;
    }
    if frame.len() != d {
        return Err(Error::SingularMetric);
    }
    Ok(frame)
}

/// Plain orthonormal frame (no J pairing) for a metric value matrix.
pub fn orthonormal_frame(g: &DMatrix<f64>) -> Result<Vec<DVector<f64>>> {
    let d = g.nrows();
    let inner = |u: &DVector<f64>, v: &DVector<f64>| (g * v).dot(u);
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(d);
    for k in 0..d {
        let mut v = DVector::zeros(d);
        v[k] = 1.0;
        for e in frame.iter() {
            v -= e * inner(e, &v);
        }
        let n2 = inner(&v, &v);
        if n2 < 1e-14 {
            return Err(Error::SingularMetric);
        }
        frame.push(v / n2.sqrt());
    }
    Ok(frame)
}

/// Exterior derivative of a jet-evaluable 2-form at x:
/// `(dw)_ijk = d_i w_jk - d_j w_ik + d_k w_ij`.
///
/// The input must be antisymmetric at x (checked on values); the output is
/// fully antisymmetric by construction.
pub fn two_form_exterior_derivative(form: &MatrixJetField, x: &[f64]) -> Result<Array3<f64>> {
    let jets = form(&Jet2::seed_point(x));
    let d = jets.nrows();
    let mut asym = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            asym = asym.max((jets.get(i, j).value + jets.get(j, i).value).abs());
        }
    }
    let scale = jets.values().amax().max(1.0);
    if asym > 1e-9 * scale {
        return Err(Error::NonAntisymmetric { residual: asym });
    }
    let mut out = Array3::zeros((d, d, d));
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                out[[i, j, k]] = jets.entry_grad(j, k)[i] - jets.entry_grad(i, k)[j]
                    + jets.entry_grad(i, j)[k];
            }
        }
    }
    Ok(out)
}

/// `[xi, J xi]` at x, from jet derivatives of the two fields. Vanishes
/// identically for a closed conformal xi on a Kähler manifold.
pub fn xi_jxi_commutator(geom: &GeometrySpec, x: &[f64]) -> Result<DVector<f64>> {
    let d = geom.dim();
    let seeds = Jet2::seed_point(x);
    let xi = (geom.xi)(&seeds);
    let jxi = (geom.j_xi_field()?)(&seeds);
    let mut out = DVector::zeros(d);
    for i in 0..d {
        let mut acc = 0.0;
        for j in 0..d {
            acc += xi[j].value * jxi[i].grad[j] - jxi[j].value * xi[i].grad[j];
        }
        out[i] = acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn flat_ball_metric_is_identity_with_zero_derivatives() {
        let geom = models::flat_ball(2, 1.0).unwrap();
        let m = geom.metric_at(&[0.1, 0.2, -0.1, 0.05]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let e = m.get(i, j);
                assert_eq!(e.value, if i == j { 1.0 } else { 0.0 });
                assert_eq!(e.grad.amax(), 0.0);
                assert_eq!(e.hess.amax(), 0.0);
            }
        }
    }

    #[test]
    fn out_of_domain_point_errors() {
        let geom = models::flat_ball(1, 1.0).unwrap();
        assert!(matches!(
            geom.metric_at(&[1.2, 0.0]),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn theta_forms_on_flat_ball() {
        let geom = models::flat_ball(1, 1.0).unwrap();
        let p = [0.5, 0.0];
        let x = geom.tangent(&p, &[1.0, 0.0]);
        assert!((geom.theta_xi(&x).unwrap() - 0.5).abs() < 1e-15);
        // J xi = (0, 0.5) at p, orthogonal to X
        assert!(geom.theta_j_xi(&x).unwrap().abs() < 1e-15);
        assert!((geom.norm_sq(&x).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_base_points_error() {
        let geom = models::flat_ball(1, 1.0).unwrap();
        let x = geom.tangent(&[0.1, 0.0], &[1.0, 0.0]);
        let y = geom.tangent(&[0.2, 0.0], &[1.0, 0.0]);
        assert!(matches!(geom.inner(&x, &y), Err(Error::MismatchedBasePoints)));
    }

    #[test]
    fn conformal_factor_of_position_field_is_one() {
        let geom = models::flat_ball(2, 1.0).unwrap();
        let (psi, dpsi) = geom
            .conformal_factor_with_gradient(&[0.2, -0.1, 0.3, 0.1])
            .unwrap();
        assert!((psi - 1.0).abs() < 1e-13);
        assert!(dpsi.amax() < 1e-13);
    }

    #[test]
    fn closed_conformal_residual_flat_ball() {
        let geom = models::flat_ball(2, 1.0).unwrap();
        let x = [0.3, 0.1, -0.2, 0.25];
        let dir = DVector::from_vec(vec![0.4, -1.0, 0.7, 0.2]);
        let r = geom.closed_conformal_residual(&x, &dir).unwrap();
        assert!(r.amax() < 1e-13);
    }

    #[test]
    fn corrupted_xi_fails_closed_conformal() {
        let geom = models::flat_ball_corrupted_xi(2, 1.0).unwrap();
        let x = [0.3, 0.1, -0.2, 0.25];
        let dir = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let r = geom.closed_conformal_residual(&x, &dir).unwrap();
        assert!(r.amax() > 1e-3, "corrupted xi must break the identity");
    }

    #[test]
    fn kahler_residual_flat_ball_vanishes() {
        let geom = models::flat_ball(2, 1.0).unwrap();
        assert!(geom.kahler_residual(&[0.2, 0.1, 0.0, -0.3]).unwrap() < 1e-13);
    }

    #[test]
    fn hermitian_frame_gram_identity() {
        let geom = models::flat_ball(2, 1.0).unwrap();
        let x = [0.3, 0.1, -0.2, 0.25];
        let frame = geom.hermitian_frame_at(&x, None).unwrap();
        let g = geom.metric_value(&x).unwrap();
        for (a, va) in frame.vectors.iter().enumerate() {
            for (b, vb) in frame.vectors.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!(((&g * vb).dot(va) - want).abs() < 1e-12);
            }
        }
        // pairing: vectors[2k+1] = J vectors[2k]
        let j = geom.j_value(&x).unwrap();
        for k in 0..2 {
            assert!((&j * &frame.vectors[2 * k] - &frame.vectors[2 * k + 1]).amax() < 1e-13);
        }
    }

    #[test]
    fn hermitian_frame_standard_basis_in_flat_space() {
        let geom = models::flat_ball(2, 1.0).unwrap();
        let x = [0.1, 0.0, 0.0, 0.0];
        let first = geom.tangent(&x, &[1.0, 0.0, 0.0, 0.0]);
        let frame = geom.hermitian_frame_at(&x, Some(&first)).unwrap();
        let expected = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for (v, e) in frame.vectors.iter().zip(expected.iter()) {
            assert!((v - DVector::from_row_slice(e)).amax() < 1e-14);
        }
    }

    #[test]
    fn degenerate_first_vector_errors() {
        let geom = models::flat_ball(1, 1.0).unwrap();
        let x = [0.1, 0.0];
        let zero = geom.tangent(&x, &[0.0, 0.0]);
        assert!(geom.hermitian_frame_at(&x, Some(&zero)).is_err());
    }

    #[test]
    fn constant_two_form_has_zero_exterior_derivative() {
        let geom = models::flat_ball(2, 1.0).unwrap();
        // Kähler form of flat C^2: constant components
        let j = geom.complex_structure.clone().unwrap();
        let g = geom.metric.clone();
        let form: MatrixJetField = Arc::new(move |x: &[Jet2]| {
            // w_ij = <J d_i, d_j> = (J^T g)_ij
            j(x).transpose().mul_mat(&g(x))
        });
        let dw = two_form_exterior_derivative(&form, &[0.1, 0.2, 0.0, -0.1]).unwrap();
        assert!(dw.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn xi_jxi_commute_on_flat_ball() {
        let geom = models::flat_ball(2, 1.0).unwrap();
        let c = xi_jxi_commutator(&geom, &[0.3, 0.1, -0.2, 0.25]).unwrap();
        assert!(c.amax() < 1e-14);
    }

    #[test]
    fn mu_identity_holds() {
        // 1 + mu |xi|^2 = c mu
        let geom = models::flat_ball(2, 4.0).unwrap();
        let x = [0.5, 0.3, -0.2, 0.6];
        let n2 = geom.xi_norm_sq(&x).unwrap();
        let mu = 1.0 / (geom.c - n2);
        assert!((1.0 + mu * n2 - geom.c * mu).abs() < 1e-12);
    }
}
