//! The metric deformation and its closed-form geometry.
//!
//! [`deform`] turns a geometry carrying a closed conformal field xi with
//! `|xi|^2 < c` into the deformed Kähler geometry
//!
//! ```text
//! g~ = mu g + mu^2 (theta_xi^2 + theta_{J xi}^2),   mu = (c - |xi|^2)^{-1},
//! w~ = mu w + mu^2 theta_xi ^ theta_{J xi}.
//! ```
//!
//! `g~` is exposed as an ordinary jet-evaluable metric field, so the whole
//! numerical curvature oracle applies to it unchanged. Each closed-form
//! expression implemented here — the Levi-Civita connection of `g~`, its
//! curvature tensor, holomorphic sectional curvature, decay bounds, and the
//! Ricci tensor — takes its base-curvature inputs from the oracle on `g`
//! and is verified against the oracle on `g~` directly, never against
//! model-specific shortcuts.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use ndarray::Array3;

use crate::curvature::{self, CurvatureData};
use crate::error::{Error, Result};
use crate::geometry::{
    hermitian_frame, DomainPredicate, GeometrySpec, MatrixJetField, ScalarJetField, TangentVector,
    XI_ZERO_THRESHOLD,
};
use crate::jet::{Jet2, JetMatrix};
use crate::quadrature;

/// A parameterized path with jet-evaluable components of one variable;
/// the jet carries the velocity.
pub type CurveJetField = Arc<dyn Fn(&Jet2) -> Vec<Jet2> + Send + Sync>;

/// The deformed geometry: the base spec plus jet-evaluable `mu`, `g~` and
/// Kähler form fields.
#[derive(Clone)]
pub struct DeformedGeometry {
    base: GeometrySpec,
    pub mu: ScalarJetField,
    pub g_tilde: MatrixJetField,
    pub omega_tilde: MatrixJetField,
    domain: DomainPredicate,
}

fn deformed_jets(
    metric: &MatrixJetField,
    xi_field: &crate::geometry::VectorJetField,
    j_field: &MatrixJetField,
    c: f64,
    x: &[Jet2],
) -> (Jet2, JetMatrix, JetMatrix) {
    let d = x.len();
    let dim = x[0].dim();
    let g = metric(x);
    let xi = xi_field(x);
    let j = j_field(x);
    let jxi = j.mul_vec(&xi);

    // covectors theta_xi = g xi, theta_{J xi} = g J xi
    let theta_xi = g.mul_vec(&xi);
    let theta_jxi = g.mul_vec(&jxi);

    let mut xi_norm_sq = Jet2::constant(0.0, dim);
    for i in 0..d {
        xi_norm_sq = &xi_norm_sq + &(&theta_xi[i] * &xi[i]);
    }
    let mu = Jet2::constant(c, dim) - &xi_norm_sq;
    let mu = mu.recip();
    let mu2 = &mu * &mu;

    let g_tilde = JetMatrix::from_fn(d, d, |i, k| {
        let theta_part = &(&theta_xi[i] * &theta_xi[k]) + &(&theta_jxi[i] * &theta_jxi[k]);
        &(&mu * g.get(i, k)) + &(&mu2 * &theta_part)
    });

    // w_ik = <J d_i, d_k> = (J^T g)_ik
    let omega = j.transpose().mul_mat(&g);
    let omega_tilde = JetMatrix::from_fn(d, d, |i, k| {
        let wedge = &(&theta_xi[i] * &theta_jxi[k]) - &(&theta_xi[k] * &theta_jxi[i]);
        &(&mu * omega.get(i, k)) + &(&mu2 * &wedge)
    });

    (mu, g_tilde, omega_tilde)
}

/// Construct the deformed geometry. Fails when the base geometry carries no
/// complex structure; the `|xi|^2 < c` precondition is checked per
/// evaluation point.
pub fn deform(geom: &GeometrySpec) -> Result<DeformedGeometry> {
    let j_field = geom.complex_structure()?.clone();
    let c = geom.c;

    let metric = geom.metric.clone();
    let xi = geom.xi.clone();
    let jf = j_field.clone();
    let mu: ScalarJetField = Arc::new(move |x: &[Jet2]| deformed_jets(&metric, &xi, &jf, c, x).0);

    let metric = geom.metric.clone();
    let xi = geom.xi.clone();
    let jf = j_field.clone();
    let g_tilde: MatrixJetField =
        Arc::new(move |x: &[Jet2]| deformed_jets(&metric, &xi, &jf, c, x).1);

    let metric = geom.metric.clone();
    let xi = geom.xi.clone();
    let jf = j_field;
    let omega_tilde: MatrixJetField =
        Arc::new(move |x: &[Jet2]| deformed_jets(&metric, &xi, &jf, c, x).2);

    let base_for_domain = geom.clone();
    let domain: DomainPredicate = Arc::new(move |x: &[f64]| {
        base_for_domain.in_domain(x)
            && base_for_domain
                .xi_norm_sq(x)
                .map(|n2| n2 < base_for_domain.c)
                .unwrap_or(false)
    });

    Ok(DeformedGeometry {
        base: geom.clone(),
        mu,
        g_tilde,
        omega_tilde,
        domain,
    })
}

/// Pointwise scalars and tensors of the base geometry that every closed
/// form consumes.
pub struct PointContext {
    pub g: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub xi: DVector<f64>,
    pub jxi: DVector<f64>,
    /// covector g xi
    pub theta_xi: DVector<f64>,
    /// covector g J xi
    pub theta_jxi: DVector<f64>,
    pub xi_norm_sq: f64,
    pub mu: f64,
    pub psi: f64,
    pub g_tilde: DMatrix<f64>,
}

impl PointContext {
    pub fn pair_xi(&self, v: &DVector<f64>) -> f64 {
        self.theta_xi.dot(v)
    }

    pub fn pair_jxi(&self, v: &DVector<f64>) -> f64 {
        self.theta_jxi.dot(v)
    }

    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (&self.g * v).dot(u)
    }

    pub fn inner_tilde(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (&self.g_tilde * v).dot(u)
    }
}

impl DeformedGeometry {
    pub fn base(&self) -> &GeometrySpec {
        &self.base
    }

    pub fn c(&self) -> f64 {
        self.base.c
    }

    pub fn n_complex(&self) -> usize {
        self.base.n_complex
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        (self.domain)(x)
    }

    fn require_domain(&self, x: &[f64]) -> Result<()> {
        if !self.base.in_domain(x) {
            return Err(Error::OutOfDomain {
                model: self.base.name.clone(),
                point: x.to_vec(),
            });
        }
        let n2 = self.base.xi_norm_sq(x)?;
        if n2 >= self.base.c {
            return Err(Error::XiTooLarge {
                norm_sq: n2,
                c: self.base.c,
            });
        }
        Ok(())
    }

    pub fn context(&self, x: &[f64]) -> Result<PointContext> {
        self.require_domain(x)?;
        let g = self.base.metric_value(x)?;
        let j = self.base.j_value(x)?;
        let xi = self.base.xi_value(x)?;
        let jxi = &j * &xi;
        let theta_xi = &g * &xi;
        let theta_jxi = &g * &jxi;
        let xi_norm_sq = theta_xi.dot(&xi);
        let mu = 1.0 / (self.base.c - xi_norm_sq);
        let psi = self.base.conformal_factor(x)?;
        let g_tilde = (self.g_tilde)(&Jet2::seed_constants(x)).values();
        Ok(PointContext {
            g,
            j,
            xi,
            jxi,
            theta_xi,
            theta_jxi,
            xi_norm_sq,
            mu,
            psi,
            g_tilde,
        })
    }

    /// `g~` components at x with derivatives populated.
    pub fn metric_tilde_at(&self, x: &[f64]) -> Result<JetMatrix> {
        self.require_domain(x)?;
        Ok((self.g_tilde)(&Jet2::seed_point(x)))
    }

    pub fn metric_tilde_value(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.require_domain(x)?;
        Ok((self.g_tilde)(&Jet2::seed_constants(x)).values())
    }

    pub fn mu_value(&self, x: &[f64]) -> Result<f64> {
        self.require_domain(x)?;
        Ok((self.mu)(&Jet2::seed_constants(x)).value)
    }

    /// Kähler form `w~ = mu w + mu^2 theta_xi ^ theta_{J xi}` (values).
    pub fn kahler_form_tilde(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.require_domain(x)?;
        Ok((self.omega_tilde)(&Jet2::seed_constants(x)).values())
    }

    /// Two-route consistency `|w~_ij - (J^T g~)_ij|`: the explicit formula
    /// for the Kähler form against `g~(J . , .)`.
    pub fn kahler_form_two_route_residual(&self, x: &[f64]) -> Result<f64> {
        let w = self.kahler_form_tilde(x)?;
        let ctx = self.context(x)?;
        let via_metric = ctx.j.transpose() * &ctx.g_tilde;
        Ok((w - via_metric).amax())
    }

    /// Max |d_i mu - 2 psi mu^2 (theta_xi)_i|.
    pub fn dmu_identity_residual(&self, x: &[f64]) -> Result<f64> {
        self.require_domain(x)?;
        let mu_jet = (self.mu)(&Jet2::seed_point(x));
        let ctx = self.context(x)?;
        let coeff = 2.0 * ctx.psi * ctx.mu * ctx.mu;
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            worst = worst.max((mu_jet.grad[i] - coeff * ctx.theta_xi[i]).abs());
        }
        Ok(worst)
    }

    /// Max |(d theta_{J xi})_ij - 2 psi w_ij|.
    pub fn dtheta_jxi_identity_residual(&self, x: &[f64]) -> Result<f64> {
        self.require_domain(x)?;
        let seeds = Jet2::seed_point(x);
        let g = (self.base.metric)(&seeds);
        let j = (self.base.complex_structure()?)(&seeds);
        let xi = (self.base.xi)(&seeds);
        let theta_jxi = g.mul_vec(&j.mul_vec(&xi));
        let ctx = self.context(x)?;
        let omega = ctx.j.transpose() * &ctx.g;
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for k in 0..d {
                let dtheta = theta_jxi[k].grad[i] - theta_jxi[i].grad[k];
                worst = worst.max((dtheta - 2.0 * ctx.psi * omega[(i, k)]).abs());
            }
        }
        Ok(worst)
    }

    /// Levi-Civita connection of `g~` applied to a vector: with `dY` the
    /// coordinate derivative matrix of the Y field (zero for coordinate
    /// fields),
    ///
    /// ```text
    /// nabla~_X Y = nabla_X Y
    ///            + psi mu { <xi,X> Y + <xi,Y> X + <Jxi,X> JY + <Jxi,Y> JX }.
    /// ```
    pub fn nabla_tilde(
        &self,
        x: &[f64],
        dir: &TangentVector,
        field: &TangentVector,
        d_field: Option<&DMatrix<f64>>,
    ) -> Result<DVector<f64>> {
        let ctx = self.context(x)?;
        let gamma = curvature::christoffel(&self.base.metric, x)?;
        let d = self.dim();
        let xv = &dir.comp;
        let yv = &field.comp;
        let mut nabla = DVector::zeros(d);
        for k in 0..d {
            let mut acc = 0.0;
            for jj in 0..d {
                if let Some(dy) = d_field {
                    acc += xv[jj] * dy[(k, jj)];
                }
                for m in 0..d {
                    acc += gamma[[k, jj, m]] * xv[jj] * yv[m];
                }
            }
            nabla[k] = acc;
        }
        let a_x = ctx.pair_xi(xv);
        let a_y = ctx.pair_xi(yv);
        let b_x = ctx.pair_jxi(xv);
        let b_y = ctx.pair_jxi(yv);
        let jx = &ctx.j * xv;
        let jy = &ctx.j * yv;
        let corr = (yv * a_x + xv * a_y + jy * b_x + jx * b_y) * (ctx.psi * ctx.mu);
        Ok(nabla + corr)
    }

    /// Christoffel symbols of `g~` from the connection formula:
    /// `G~^k_ij = G^k_ij + psi mu (th_i d^k_j + th_j d^k_i
    ///                             + thJ_i J^k_j + thJ_j J^k_i)`.
    pub fn christoffel_tilde_closed_form(&self, x: &[f64]) -> Result<Array3<f64>> {
        let ctx = self.context(x)?;
        let mut gamma = curvature::christoffel(&self.base.metric, x)?;
        let pm = ctx.psi * ctx.mu;
        let d = self.dim();
        for k in 0..d {
            for i in 0..d {
                for jj in 0..d {
                    let mut corr = 0.0;
                    if k == jj {
                        corr += ctx.theta_xi[i];
                    }
                    if k == i {
                        corr += ctx.theta_xi[jj];
                    }
                    corr += ctx.theta_jxi[i] * ctx.j[(k, jj)];
                    corr += ctx.theta_jxi[jj] * ctx.j[(k, i)];
                    gamma[[k, i, jj]] += pm * corr;
                }
            }
        }
        Ok(gamma)
    }

    /// Max difference between the closed-form Christoffels of `g~` and the
    /// jet-based ones computed from the `g~` field directly.
    pub fn christoffel_two_route_residual(&self, x: &[f64]) -> Result<f64> {
        let closed = self.christoffel_tilde_closed_form(x)?;
        let numeric = curvature::christoffel(&self.g_tilde, x)?;
        let mut worst = 0.0f64;
        for (a, b) in closed.iter().zip(numeric.iter()) {
            worst = worst.max((a - b).abs());
        }
        Ok(worst)
    }

    /// Metric compatibility of the closed-form connection on coordinate
    /// fields: max |d_i g~_jk - G~^m_ij g~_mk - G~^m_ik g~_jm|.
    pub fn metric_compatibility_residual(&self, x: &[f64]) -> Result<f64> {
        let gt = self.metric_tilde_at(x)?;
        let gamma = self.christoffel_tilde_closed_form(x)?;
        let gtv = gt.values();
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for jj in 0..d {
                for k in 0..d {
                    let mut acc = gt.entry_grad(jj, k)[i];
                    for m in 0..d {
                        acc -= gamma[[m, i, jj]] * gtv[(m, k)];
                        acc -= gamma[[m, i, k]] * gtv[(jj, m)];
                    }
                    worst = worst.max(acc.abs());
                }
            }
        }
        Ok(worst)
    }

    /// How far xi is from being closed conformal for `g~`: the minimum over
    /// scalars `phi` of `max_i |nabla~_{e_i} xi - phi e_i|_max`, over the
    /// coordinate basis. Strictly positive at generic points (the
    /// deformation is irreversible in this sense).
    pub fn xi_closed_conformal_tilde_defect(&self, x: &[f64]) -> Result<f64> {
        let ctx = self.context(x)?;
        if ctx.xi_norm_sq < XI_ZERO_THRESHOLD {
            return Err(Error::XiVanishes);
        }
        let a = self.nabla_xi_matrix(x, true)?;
        Ok(min_phi_residual(&a))
    }

    /// The same defect functional for the base connection; zero because
    /// `nabla_X xi = psi X`. Serves as the control for the previous check.
    pub fn xi_closed_conformal_base_defect(&self, x: &[f64]) -> Result<f64> {
        let ctx = self.context(x)?;
        if ctx.xi_norm_sq < XI_ZERO_THRESHOLD {
            return Err(Error::XiVanishes);
        }
        let a = self.nabla_xi_matrix(x, false)?;
        Ok(min_phi_residual(&a))
    }

    /// Column i holds `nabla_{e_i} xi` (base or deformed connection).
    fn nabla_xi_matrix(&self, x: &[f64], deformed: bool) -> Result<DMatrix<f64>> {
        let ctx = self.context(x)?;
        let seeds = Jet2::seed_point(x);
        let xi_jets = (self.base.xi)(&seeds);
        let gamma = curvature::christoffel(&self.base.metric, x)?;
        let d = self.dim();
        let mut a = DMatrix::zeros(d, d);
        for i in 0..d {
            for k in 0..d {
                let mut acc = xi_jets[k].grad[i];
                for m in 0..d {
                    acc += gamma[[k, i, m]] * ctx.xi[m];
                }
                a[(k, i)] = acc;
            }
        }
        if deformed {
            // nabla~_{e_i} xi = nabla_{e_i} xi
            //   + psi mu (th_i xi + |xi|^2 e_i + thJ_i J xi)
            let pm = ctx.psi * ctx.mu;
            for i in 0..d {
                for k in 0..d {
                    let mut corr = ctx.theta_xi[i] * ctx.xi[k] + ctx.theta_jxi[i] * ctx.jxi[k];
                    if k == i {
                        corr += ctx.xi_norm_sq;
                    }
                    a[(k, i)] += pm * corr;
                }
            }
        }
        Ok(a)
    }

    /// Closed-form curvature tensor of `g~` applied to (X, Y, Z):
    ///
    /// ```text
    /// R~(X,Y)Z = R(X,Y)Z
    ///   - Ric(xi^) mu ( <X,xi><Z,xi> Y + <X,xi><Y,Jxi> JZ + <X,xi><Z,Jxi> JY
    ///                 - <Y,xi><Z,xi> X - <Y,xi><X,Jxi> JZ - <Y,xi><Z,Jxi> JX )
    ///   + psi^2 mu   ( <X,Z> Y + 2<JX,Y> JZ + <JX,Z> JY - <Y,Z> X - <JY,Z> JX )
    ///   + psi^2 mu^2 ( <X,xi><Z,xi> Y - <Y,xi><Z,xi> X
    ///                + <X,xi><Z,Jxi> JY - <Y,xi><Z,Jxi> JX
    ///                + <X,Jxi><Z,Jxi> Y - <Y,Jxi><Z,Jxi> X
    ///                - <X,Jxi><Z,xi> JY + <Y,Jxi><Z,xi> JX
    ///                + 2<X,xi><Y,Jxi> JZ - 2<Y,xi><X,Jxi> JZ )
    /// ```
    ///
    /// with `R` and `Ric(xi^)` taken from the numerical oracle on the base
    /// metric.
    pub fn riemann_tilde_closed_form(
        &self,
        x: &[f64],
        xv: &DVector<f64>,
        yv: &DVector<f64>,
        zv: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let ctx = self.context(x)?;
        let base_data = curvature::curvature_data(&self.base.metric, x)?;
        let ric_hat = self.base.ric_xi_hat(x)?;
        Ok(self.riemann_tilde_from_parts(&ctx, &base_data, ric_hat, xv, yv, zv))
    }

    pub(crate) fn riemann_tilde_from_parts(
        &self,
        ctx: &PointContext,
        base_data: &CurvatureData,
        ric_hat: f64,
        xv: &DVector<f64>,
        yv: &DVector<f64>,
        zv: &DVector<f64>,
    ) -> DVector<f64> {
        let jx = &ctx.j * xv;
        let jy = &ctx.j * yv;
        let jz = &ctx.j * zv;
        let ax = ctx.pair_xi(xv);
        let ay = ctx.pair_xi(yv);
        let az = ctx.pair_xi(zv);
        let bx = ctx.pair_jxi(xv);
        let by = ctx.pair_jxi(yv);
        let bz = ctx.pair_jxi(zv);
        let xz = ctx.inner(xv, zv);
        let yz = ctx.inner(yv, zv);
        let jxy = ctx.inner(&jx, yv);
        let jxz = ctx.inner(&jx, zv);
        let jyz = ctx.inner(&jy, zv);
        let mu = ctx.mu;
        let psi2 = ctx.psi * ctx.psi;

        let mut out = curvature::apply_riemann(base_data, xv, yv, zv);

        out -= (yv * (ax * az) + &jz * (ax * by) + &jy * (ax * bz)
            - xv * (ay * az)
            - &jz * (ay * bx)
            - &jx * (ay * bz))
            * (ric_hat * mu);

        out += (yv * xz + &jz * (2.0 * jxy) + &jy * jxz - xv * yz - &jx * jyz) * (psi2 * mu);

        out += (yv * (ax * az) - xv * (ay * az) + &jy * (ax * bz) - &jx * (ay * bz)
            + yv * (bx * bz)
            - xv * (by * bz)
            - &jy * (bx * az)
            + &jx * (by * az)
            + &jz * (2.0 * ax * by)
            - &jz * (2.0 * ay * bx))
            * (psi2 * mu * mu);

        out
    }

    /// Closed-form holomorphic sectional curvature of `g~`:
    ///
    /// ```text
    /// K~(X) = { mu K(X) + mu^2 Ric(xi^) (<X,xi>^2 + <X,Jxi>^2) } / g~(X,X)^2
    ///       + 2 mu Ric(xi^) (<X,xi>^2 + <X,Jxi>^2) / g~(X,X)  -  4 psi^2
    /// ```
    ///
    /// for X unitary with respect to g. A non-unit direction is normalized
    /// internally, which leaves the value unchanged (both sides are
    /// scale-invariant).
    pub fn holomorphic_sectional_tilde_closed_form(
        &self,
        x: &[f64],
        dir: &DVector<f64>,
    ) -> Result<f64> {
        let ctx = self.context(x)?;
        let norm = ctx.inner(dir, dir).sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateVector {
                norm,
                threshold: 1e-12,
            });
        }
        let unit = dir / norm;
        let base_data = curvature::curvature_data(&self.base.metric, x)?;
        let k_base =
            curvature::holomorphic_sectional_from_data(&base_data, &ctx.g, &ctx.j, &unit)?;
        let ric_hat = self.base.ric_xi_hat(x)?;
        let a = ctx.pair_xi(&unit);
        let b = ctx.pair_jxi(&unit);
        let aa = a * a + b * b;
        let gxx = ctx.inner_tilde(&unit, &unit);
        let mu = ctx.mu;
        let psi2 = ctx.psi * ctx.psi;
        Ok((mu * k_base + mu * mu * ric_hat * aa) / (gxx * gxx)
            + 2.0 * mu * ric_hat * aa / gxx
            - 4.0 * psi2)
    }

    /// Numerical holomorphic sectional curvature of `g~` via the oracle.
    pub fn holomorphic_sectional_tilde_numerical(
        &self,
        x: &[f64],
        dir: &DVector<f64>,
    ) -> Result<f64> {
        self.require_domain(x)?;
        let j = self.base.complex_structure()?;
        curvature::holomorphic_sectional(&self.g_tilde, j, x, dir)
    }
}

/// `min_phi max_{k,i} |A_ki - phi d_ki|`: the max-norm distance of a matrix
/// from the line of scalar matrices. The minimizing phi is the midpoint of
/// the diagonal range.
fn min_phi_residual(a: &DMatrix<f64>) -> f64 {
    let d = a.nrows();
    let mut off = 0.0f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..d {
        for i in 0..d {
            if k == i {
                lo = lo.min(a[(k, k)]);
                hi = hi.max(a[(k, k)]);
            } else {
                off = off.max(a[(k, i)].abs());
            }
        }
    }
    off.max(0.5 * (hi - lo))
}

/// Decay-bound evaluation at one (point, direction) pair.
#[derive(Debug, Clone)]
pub struct DecayBound {
    pub k_base: f64,
    pub k_tilde: f64,
    /// `c K(X) + 2c Ric(xi^) - 4 psi^2`
    pub bound_general: f64,
    /// `c K(X) - 4 psi^2`, emitted only when X is orthogonal to xi and J xi
    pub bound_orthogonal: Option<f64>,
    pub satisfied: bool,
}

/// Tolerance allowed on the decay inequalities.
pub const DECAY_TOLERANCE: f64 = 1e-6;

impl DeformedGeometry {
    /// Evaluate the curvature-decay bounds for a g-unit direction
    /// (normalized internally).
    pub fn decay_bounds(&self, x: &[f64], dir: &DVector<f64>) -> Result<DecayBound> {
        let ctx = self.context(x)?;
        let norm = ctx.inner(dir, dir).sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateVector {
                norm,
                threshold: 1e-12,
            });
        }
        let unit = dir / norm;
        let base_data = curvature::curvature_data(&self.base.metric, x)?;
        let k_base =
            curvature::holomorphic_sectional_from_data(&base_data, &ctx.g, &ctx.j, &unit)?;
        let k_tilde = self.holomorphic_sectional_tilde_closed_form(x, &unit)?;
        let ric_hat = self.base.ric_xi_hat(x)?;
        let c = self.c();
        let psi2 = ctx.psi * ctx.psi;
        let bound_general = c * k_base + 2.0 * c * ric_hat - 4.0 * psi2;
        let a = ctx.pair_xi(&unit);
        let b = ctx.pair_jxi(&unit);
        let bound_orthogonal = if a.abs() < 1e-10 && b.abs() < 1e-10 {
            Some(c * k_base - 4.0 * psi2)
        } else {
            None
        };
        let mut satisfied = k_tilde <= bound_general + DECAY_TOLERANCE;
        if let Some(bo) = bound_orthogonal {
            satisfied = satisfied && k_tilde <= bo + DECAY_TOLERANCE;
        }
        Ok(DecayBound {
            k_base,
            k_tilde,
            bound_general,
            bound_orthogonal,
            satisfied,
        })
    }
}

/// Itemized closed-form Ricci evaluation. The closed form is compared to
/// the frame-trace oracle in report-only mode: the oracle is authoritative
/// and disagreements are logged term by term rather than asserted.
#[derive(Debug, Clone)]
pub struct RicciClosedForm {
    pub base_ricci: f64,
    /// `-c^{-1} [ <R(X,xi)xi,Y> + <R(X,Jxi)Jxi,Y> ]`
    pub curvature_xi: f64,
    /// the `c^{-1} Ric(xi^) [...]` group
    pub ric_xi_hat_group: f64,
    /// `mu <Y,xi> Ric(X,xi) + mu <Y,Jxi> Ric(X,Jxi)`
    pub mixed_ricci: f64,
    /// `-c^{-1} mu [ <R(X,xi)xi,Jxi><Y,Jxi> + <R(X,Jxi)Jxi,xi><Y,xi> ]`
    pub curvature_cross: f64,
    /// `-2(n+1) psi^2 mu [ <X,Y> + mu (<X,xi><Y,xi> + <X,Jxi><Y,Jxi>) ]`
    pub psi_group: f64,
    pub total: f64,
}

impl DeformedGeometry {
    /// Closed-form Ricci tensor of `g~` evaluated on (X, Y), with a per-term
    /// breakdown.
    pub fn ricci_tilde_closed_form(
        &self,
        x: &[f64],
        xv: &DVector<f64>,
        yv: &DVector<f64>,
    ) -> Result<RicciClosedForm> {
        let ctx = self.context(x)?;
        let data = curvature::curvature_data(&self.base.metric, x)?;
        let ric_hat = self.base.ric_xi_hat(x)?;
        let n = self.n_complex() as f64;
        let c = self.c();
        let mu = ctx.mu;
        let psi2 = ctx.psi * ctx.psi;

        let ric = &data.ricci;
        let base_ricci = (ric * yv).dot(xv);

        let r_x_xi_xi = curvature::apply_riemann(&data, xv, &ctx.xi, &ctx.xi);
        let r_x_jxi_jxi = curvature::apply_riemann(&data, xv, &ctx.jxi, &ctx.jxi);
        let curvature_xi =
            -(ctx.inner(&r_x_xi_xi, yv) + ctx.inner(&r_x_jxi_jxi, yv)) / c;

        let ax = ctx.pair_xi(xv);
        let ay = ctx.pair_xi(yv);
        let bx = ctx.pair_jxi(xv);
        let by = ctx.pair_jxi(yv);
        let xy = ctx.inner(xv, yv);
        let n2 = ctx.xi_norm_sq;
        let ric_xi_hat_group = ric_hat / c
            * (ax * ay + n2 * xy + bx * by + 2.0 * mu * n2 * (ax * ay + bx * by));

        let mixed_ricci =
            mu * ay * (ric * &ctx.xi).dot(xv) + mu * by * (ric * &ctx.jxi).dot(xv);

        let curvature_cross = -mu / c
            * (ctx.inner(&r_x_xi_xi, &ctx.jxi) * by + ctx.inner(&r_x_jxi_jxi, &ctx.xi) * ay);

        let psi_group = -2.0 * (n + 1.0) * psi2 * mu * (xy + mu * (ax * ay + bx * by));

        let total = base_ricci
            + curvature_xi
            + ric_xi_hat_group
            + mixed_ricci
            + curvature_cross
            + psi_group;
        Ok(RicciClosedForm {
            base_ricci,
            curvature_xi,
            ric_xi_hat_group,
            mixed_ricci,
            curvature_cross,
            psi_group,
            total,
        })
    }

    /// Numerical Ricci tensor of `g~` (index contraction; authoritative).
    pub fn ricci_tilde_numerical(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.require_domain(x)?;
        curvature::ricci(&self.g_tilde, x)
    }

    /// Hermitian frame for `g~` obtained by scaling a g-Hermitian frame
    /// adapted to xi: the pair spanned by xi is scaled by `1/(sqrt(c) mu)`,
    /// the remaining pairs by `1/sqrt(mu)`.
    pub fn hermitian_frame_tilde(&self, x: &[f64]) -> Result<Vec<DVector<f64>>> {
        let ctx = self.context(x)?;
        let (mut frame, xi_pair_first) = if ctx.xi_norm_sq >= XI_ZERO_THRESHOLD {
            let xihat = &ctx.xi / ctx.xi_norm_sq.sqrt();
            (hermitian_frame(&ctx.g, &ctx.j, Some(&xihat))?, true)
        } else {
            (hermitian_frame(&ctx.g, &ctx.j, None)?, false)
        };
        let inv_sqrt_mu = 1.0 / ctx.mu.sqrt();
        let inv_xi_scale = 1.0 / (self.c().sqrt() * ctx.mu);
        for (idx, v) in frame.iter_mut().enumerate() {
            let scale = if xi_pair_first && idx < 2 {
                inv_xi_scale
            } else {
                inv_sqrt_mu
            };
            *v *= scale;
        }
        Ok(frame)
    }

    /// Max over samples of `|Ric~ + 2(n+1) g~| / |g~|` (max-norm), with the
    /// base required to be Ricci-flat first — the hypothesis under which the
    /// deformed metric is Einstein with constant `-2(n+1)`.
    pub fn einstein_residual(&self, samples: &[Vec<f64>]) -> Result<f64> {
        let factor = 2.0 * (self.n_complex() as f64 + 1.0);
        let mut worst = 0.0f64;
        for x in samples {
            let base_ric = curvature::ricci(&self.base.metric, x)?;
            let scale = self.base.metric_value(x)?.amax();
            if base_ric.amax() > 1e-8 * scale.max(1.0) {
                return Err(Error::BaseNotRicciFlat {
                    norm: base_ric.amax(),
                });
            }
            let ric_t = self.ricci_tilde_numerical(x)?;
            let gt = self.metric_tilde_value(x)?;
            let residual = (&ric_t + &gt * factor).amax() / gt.amax();
            worst = worst.max(residual);
        }
        Ok(worst)
    }

    /// Length of a curve under `g~` by adaptive Gauss-Legendre quadrature.
    pub fn curve_length(
        &self,
        curve: &CurveJetField,
        t0: f64,
        t1: f64,
        tol: f64,
    ) -> Result<f64> {
        let integrand = |t: f64| -> Result<f64> {
            let jet = Jet2::variable(t, 0, 1).expect("1-d seed");
            let comps = curve(&jet);
            let point: Vec<f64> = comps.iter().map(|c| c.value).collect();
            let velocity = DVector::from_iterator(comps.len(), comps.iter().map(|c| c.grad[0]));
            if !self.in_domain(&point) {
                return Err(Error::CurveOutOfDomain { t });
            }
            let gt = (self.g_tilde)(&Jet2::seed_constants(&point)).values();
            let speed_sq = (&gt * &velocity).dot(&velocity);
            if !speed_sq.is_finite() || speed_sq < 0.0 {
                return Err(Error::NonFinite {
                    context: "curve speed",
                });
            }
            Ok(speed_sq.sqrt())
        };
        quadrature::integrate_adaptive(&integrand, t0, t1, tol)
    }
}

/// Max |g~(X,xi) - c mu^2 <X,xi>| and |g~(xi,xi) - c mu^2 |xi|^2| style
/// pairing identities, over the coordinate basis.
pub fn gtilde_pairing_residual(dg: &DeformedGeometry, x: &[f64]) -> Result<f64> {
    let ctx = dg.context(x)?;
    let c = dg.c();
    let d = dg.dim();
    let mut worst = 0.0f64;
    let gt_xi = &ctx.g_tilde * &ctx.xi;
    let cm2 = c * ctx.mu * ctx.mu;
    for i in 0..d {
        let mut e = DVector::zeros(d);
        e[i] = 1.0;
        worst = worst.max((gt_xi[i] - cm2 * ctx.pair_xi(&e)).abs());
    }
    let gxi = gt_xi.dot(&ctx.xi);
    worst = worst.max((gxi - cm2 * ctx.xi_norm_sq).abs());
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::two_form_exterior_derivative;
    use crate::models;

    fn ball_deformed(n: usize, c: f64) -> DeformedGeometry {
        deform(&models::flat_ball(n, c).unwrap()).unwrap()
    }

    #[test]
    fn deformed_ball_metric_at_half_radius() {
        // n=1, c=1, p=(0.5,0): mu = 4/3, g~ = (16/9) Id
        let dg = ball_deformed(1, 1.0);
        let gt = dg.metric_tilde_value(&[0.5, 0.0]).unwrap();
        let expected = DMatrix::identity(2, 2) * (16.0 / 9.0);
        assert!((gt - expected).amax() < 1e-14);
    }

    #[test]
    fn deformation_is_identity_where_xi_vanishes() {
        let dg = ball_deformed(2, 1.0);
        let gt = dg.metric_tilde_value(&[0.0; 4]).unwrap();
        assert!((gt - DMatrix::identity(4, 4)).amax() < 1e-15);
    }

    #[test]
    fn xi_too_large_is_rejected() {
        use crate::geometry::GeometrySpec;
        use std::sync::Arc;
        // unbounded chart so the |xi|^2 < c check itself must fire
        let ball = models::flat_ball(1, 1.0).unwrap();
        let wide = GeometrySpec {
            name: "wide".into(),
            domain: Arc::new(|_| true),
            domain_box: vec![(-2.0, 2.0); 2],
            ..ball
        };
        let dg = deform(&wide).unwrap();
        assert!(matches!(
            dg.metric_tilde_value(&[1.5, 0.0]),
            Err(Error::XiTooLarge { .. })
        ));
    }

    #[test]
    fn dmu_identity_hand_value() {
        // ball n=1, c=1 at (0.5, 0): d_x mu = 16/9 = 2 psi mu^2 theta_xi_x
        let dg = ball_deformed(1, 1.0);
        let mu_jet = (dg.mu)(&Jet2::seed_point(&[0.5, 0.0]));
        assert!((mu_jet.grad[0] - 16.0 / 9.0).abs() < 1e-13);
        assert!(dg.dmu_identity_residual(&[0.5, 0.0]).unwrap() < 1e-14);
        assert!(dg.dmu_identity_residual(&[0.0, 0.0]).unwrap() < 1e-15);
    }

    #[test]
    fn dtheta_jxi_identity_on_ball_and_corrupted_control() {
        let dg = ball_deformed(2, 1.0);
        let x = [0.3, 0.1, -0.2, 0.25];
        assert!(dg.dtheta_jxi_identity_residual(&x).unwrap() < 1e-13);

        let bad = deform(&models::flat_ball_corrupted_xi(2, 1.0).unwrap()).unwrap();
        assert!(bad.dtheta_jxi_identity_residual(&x).unwrap() > 1e-3);
    }

    #[test]
    fn kahler_form_two_routes_and_closedness() {
        let dg = ball_deformed(2, 1.0);
        let x = [0.3, 0.1, -0.2, 0.25];
        assert!(dg.kahler_form_two_route_residual(&x).unwrap() < 1e-14);
        let dw = two_form_exterior_derivative(&dg.omega_tilde, &x).unwrap();
        let worst = dw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 1e-12, "d omega~ = {worst}");
    }

    #[test]
    fn nabla_tilde_of_jxi_along_xi() {
        // nabla~_xi J xi = psi (1 + 2 mu |xi|^2) J xi; coefficient 5/3 at
        // (0.5, 0) with n=1, c=1.
        let dg = ball_deformed(1, 1.0);
        let x = [0.5, 0.0];
        let ctx = dg.context(&x).unwrap();
        let xi_t = TangentVector::new(&x, ctx.xi.as_slice());
        let jxi_t = TangentVector::new(&x, ctx.jxi.as_slice());
        // J xi as a field: d(Jxi)/dx = J (xi field has identity derivative)
        let d_jxi = ctx.j.clone();
        let got = dg.nabla_tilde(&x, &xi_t, &jxi_t, Some(&d_jxi)).unwrap();
        let expected = &ctx.jxi * (5.0 / 3.0);
        assert!((got - expected).amax() < 1e-13);
    }

    #[test]
    fn christoffel_two_routes_agree() {
        for (n, c) in [(1usize, 1.0), (2, 1.0), (2, 4.0), (3, 1.0)] {
            let dg = ball_deformed(n, c);
            let x: Vec<f64> = (0..2 * n).map(|i| 0.07 * (i as f64 + 1.0)).collect();
            let r = dg.christoffel_two_route_residual(&x).unwrap();
            assert!(r < 1e-10, "n={n} c={c}: {r}");
        }
    }

    #[test]
    fn metric_compatibility_of_closed_form_connection() {
        let dg = ball_deformed(2, 1.0);
        let r = dg
            .metric_compatibility_residual(&[0.3, 0.1, -0.2, 0.25])
            .unwrap();
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn xi_stops_being_closed_conformal() {
        let dg = ball_deformed(2, 1.0);
        let x = [0.5, 0.0, 0.0, 0.0];
        let defect = dg.xi_closed_conformal_tilde_defect(&x).unwrap();
        assert!(defect > 1e-3, "defect {defect}");
        let control = dg.xi_closed_conformal_base_defect(&x).unwrap();
        assert!(control < 1e-12, "control {control}");
        assert!(matches!(
            dg.xi_closed_conformal_tilde_defect(&[0.0; 4]),
            Err(Error::XiVanishes)
        ));
    }

    #[test]
    fn riemann_closed_form_matches_oracle_on_ball() {
        let dg = ball_deformed(2, 1.0);
        let x = [0.3, 0.1, -0.2, 0.25];
        let data = curvature::curvature_data(&dg.g_tilde, &x).unwrap();
        let xv = DVector::from_vec(vec![0.3, -0.2, 0.8, 0.1]);
        let yv = DVector::from_vec(vec![-0.5, 0.4, 0.2, 0.9]);
        let zv = DVector::from_vec(vec![0.1, 0.7, -0.3, 0.4]);
        let closed = dg.riemann_tilde_closed_form(&x, &xv, &yv, &zv).unwrap();
        let numeric = curvature::apply_riemann(&data, &xv, &yv, &zv);
        let scale = numeric.amax().max(closed.amax()).max(1e-9);
        assert!(
            (&closed - &numeric).amax() / scale < 1e-9,
            "closed {closed:?} vs numeric {numeric:?}"
        );
        // antisymmetry: X = Y gives zero exactly
        let same = dg.riemann_tilde_closed_form(&x, &xv, &xv, &zv).unwrap();
        assert!(same.amax() < 1e-13);
    }

    #[test]
    fn holomorphic_sectional_is_minus_four_on_the_ball() {
        for c in [1.0, 4.0] {
            let dg = ball_deformed(2, c);
            for x in [[0.0, 0.0, 0.0, 0.0], [0.3, 0.1, -0.2, 0.25]] {
                let dir = DVector::from_vec(vec![0.4, -0.1, 0.6, 0.2]);
                let closed = dg.holomorphic_sectional_tilde_closed_form(&x, &dir).unwrap();
                let numeric = dg.holomorphic_sectional_tilde_numerical(&x, &dir).unwrap();
                assert!((closed + 4.0).abs() < 1e-10, "c={c} closed={closed}");
                assert!((numeric + 4.0).abs() < 1e-8, "c={c} numeric={numeric}");
                // homogeneity: K~(2X) = K~(X)
                let doubled = dg
                    .holomorphic_sectional_tilde_numerical(&x, &(&dir * 2.0))
                    .unwrap();
                assert!((doubled - numeric).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn decay_bounds_hold_with_equality_on_the_ball() {
        let dg = ball_deformed(2, 1.0);
        let x = [0.3, 0.1, -0.2, 0.25];
        let dir = DVector::from_vec(vec![0.4, -0.1, 0.6, 0.2]);
        let b = dg.decay_bounds(&x, &dir).unwrap();
        assert!(b.satisfied);
        assert!((b.k_tilde - b.bound_general).abs() < 1e-10, "flat Ricci-flat case is equality");
        assert!(b.bound_orthogonal.is_none());

        // direction orthogonal to xi and J xi at a point on the x1-axis
        let x2 = [0.5, 0.0, 0.0, 0.0];
        let ortho = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        let b2 = dg.decay_bounds(&x2, &ortho).unwrap();
        let bo = b2.bound_orthogonal.expect("orthogonal bound emitted");
        assert!((bo - b2.bound_general).abs() < 1e-12, "Ric-flat: bounds coincide");
        assert!(b2.satisfied);
    }

    #[test]
    fn einstein_residual_on_ball_models() {
        for n in 1..=3usize {
            let dg = ball_deformed(n, 1.0);
            let samples: Vec<Vec<f64>> = vec![
                vec![0.02; 2 * n],
                (0..2 * n).map(|i| 0.06 * (i as f64 + 1.0)).collect(),
                (0..2 * n).map(|i| -0.05 * (i as f64 + 0.5)).collect(),
            ];
            let r = dg.einstein_residual(&samples).unwrap();
            assert!(r < 1e-8, "n={n}: residual {r}");
        }
    }

    #[test]
    fn einstein_rejects_non_ricci_flat_base() {
        // the t^2-warped metric is not Ricci-flat
        let geom = models::warped_generic(models::WarpFn::Square, 3, (0.5, 1.2)).unwrap();
        let dg = deform(&geom).unwrap();
        let err = dg.einstein_residual(&[vec![0.8, 1.0, 1.2, 3.0]]);
        assert!(matches!(err, Err(Error::BaseNotRicciFlat { .. })));
    }

    #[test]
    fn ricci_closed_form_equals_einstein_value_on_ball() {
        let dg = ball_deformed(2, 1.0);
        let x = [0.3, 0.1, -0.2, 0.25];
        let ctx = dg.context(&x).unwrap();
        let xv = DVector::from_vec(vec![0.4, -0.1, 0.6, 0.2]);
        let yv = DVector::from_vec(vec![-0.3, 0.8, 0.1, 0.5]);
        let cf = dg.ricci_tilde_closed_form(&x, &xv, &yv).unwrap();
        let expected = -6.0 * ctx.inner_tilde(&xv, &yv); // -2(n+1), n = 2
        assert!((cf.total - expected).abs() < 1e-10, "{} vs {expected}", cf.total);
        // and the numerical oracle agrees
        let ric = dg.ricci_tilde_numerical(&x).unwrap();
        let num = (&ric * &yv).dot(&xv);
        assert!((num - expected).abs() < 1e-7, "{num} vs {expected}");
    }

    #[test]
    fn ricci_closed_form_xi_slot() {
        // Ric~(xi, Y) = -2(n+1) g~(xi, Y)
        let dg = ball_deformed(2, 1.0);
        let x = [0.3, 0.1, -0.2, 0.25];
        let ctx = dg.context(&x).unwrap();
        let yv = DVector::from_vec(vec![-0.3, 0.8, 0.1, 0.5]);
        let cf = dg.ricci_tilde_closed_form(&x, &ctx.xi, &yv).unwrap();
        let expected = -6.0 * ctx.inner_tilde(&ctx.xi, &yv);
        assert!((cf.total - expected).abs() < 1e-10);
    }

    #[test]
    fn scaled_hermitian_frame_is_gtilde_orthonormal() {
        let dg = ball_deformed(2, 1.0);
        let x = [0.3, 0.1, -0.2, 0.25];
        let frame = dg.hermitian_frame_tilde(&x).unwrap();
        let gt = dg.metric_tilde_value(&x).unwrap();
        for (a, va) in frame.iter().enumerate() {
            for (b, vb) in frame.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                let got = (&gt * vb).dot(va);
                assert!((got - want).abs() < 1e-12, "Gram[{a}][{b}] = {got}");
            }
        }
        // frame trace of the g~ curvature reproduces the contraction Ricci
        let data = curvature::curvature_data(&dg.g_tilde, &x).unwrap();
        let ft = curvature::ricci_frame_trace(&data, &frame);
        assert!((ft - data.ricci.clone()).amax() < 1e-8);
    }

    #[test]
    fn gtilde_pairing_identities() {
        let dg = ball_deformed(2, 4.0);
        assert!(gtilde_pairing_residual(&dg, &[0.5, 0.3, -0.2, 0.6]).unwrap() < 1e-13);
    }

    #[test]
    fn radial_length_is_artanh() {
        let dg = ball_deformed(1, 1.0);
        let curve: CurveJetField = Arc::new(|t: &Jet2| vec![t.clone(), Jet2::constant(0.0, 1)]);
        for r in [0.5, 0.9, 0.99] {
            let len = dg.curve_length(&curve, 0.0, r, 1e-10).unwrap();
            assert!((len - r.atanh()).abs() < 1e-8, "r={r}: {len} vs {}", r.atanh());
        }
        assert_eq!(dg.curve_length(&curve, 0.3, 0.3, 1e-10).unwrap(), 0.0);
        // leaving the chart is an error
        assert!(dg.curve_length(&curve, 0.0, 1.01, 1e-10).is_err());
    }

    #[test]
    fn gtilde_is_hermitian() {
        let dg = ball_deformed(2, 1.0);
        let x = [0.3, 0.1, -0.2, 0.25];
        let ctx = dg.context(&x).unwrap();
        let resid = (ctx.j.transpose() * &ctx.g_tilde * &ctx.j - &ctx.g_tilde).amax();
        assert!(resid < 1e-13);
    }
}
