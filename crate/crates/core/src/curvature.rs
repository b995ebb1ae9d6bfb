//! Numerical curvature oracle for any jet-evaluable metric.
//!
//! Christoffel symbols, the Riemann tensor, Ricci, sectional and holomorphic
//! sectional curvature, and metric Lie derivatives are all computed in
//! coordinates from a single second-order jet evaluation of the metric at the
//! point. No geodesic integration, no finite differences: the jets carry
//! exact-to-roundoff first and second metric derivatives, and everything else
//! is index algebra.
//!
//! The sign convention is fixed once, carried as [`CONVENTION_TAG`] on every
//! [`CurvatureData`], and pinned by tests (round spheres come out with
//! positive sectional curvature). Sources differ on this sign, so it is kept
//! explicit.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array3, Array4};

use crate::error::{Error, Result};
use crate::geometry::MatrixJetField;
use crate::jet::Jet2;

/// Curvature convention: `R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z
/// - nabla_[X,Y] Z`, with `R_lijk = g(R(d_i,d_j)d_k, d_l)`.
pub const CONVENTION_TAG: &str =
    "R(X,Y)Z = [nabla_X,nabla_Y]Z - nabla_[X,Y]Z; round sphere K > 0";

/// Pointwise curvature package of a metric field.
///
/// Index layout: `gamma[[k,i,j]] = Gamma^k_ij`,
/// `riemann_up[[l,i,j,k]] = R^l_ijk` (the `d_l` component of
/// `R(d_i,d_j)d_k`), `riemann_down[[l,i,j,k]] = g_lm R^m_ijk`.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub gamma: Array3<f64>,
    pub riemann_up: Array4<f64>,
    pub riemann_down: Array4<f64>,
    pub ricci: DMatrix<f64>,
    pub convention_tag: &'static str,
}

fn positive_definite_inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if g.clone().cholesky().is_none() {
        return Err(Error::SingularMetric);
    }
    g.clone().try_inverse().ok_or(Error::SingularMetric)
}

/// Christoffel symbols of the second kind at `x`:
/// `Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)`.
pub fn christoffel(metric: &MatrixJetField, x: &[f64]) -> Result<Array3<f64>> {
    let jets = metric(&Jet2::seed_point(x));
    christoffel_from_jets(&jets)
}

pub(crate) fn christoffel_from_jets(jets: &crate::jet::JetMatrix) -> Result<Array3<f64>> {
    let d = jets.nrows();
    let g_inv = positive_definite_inverse(&jets.values())?;
    let mut gamma = Array3::zeros((d, d, d));
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut acc = 0.0;
                for l in 0..d {
                    let term = jets.entry_grad(j, l)[i] + jets.entry_grad(i, l)[j]
                        - jets.entry_grad(i, j)[l];
                    acc += g_inv[(k, l)] * term;
                }
                gamma[[k, i, j]] = 0.5 * acc;
                gamma[[k, j, i]] = 0.5 * acc;
            }
        }
    }
    Ok(gamma)
}

/// Full curvature package at `x`, from one jet evaluation of the metric.
pub fn curvature_data(metric: &MatrixJetField, x: &[f64]) -> Result<CurvatureData> {
    let jets = metric(&Jet2::seed_point(x));
    let d = jets.nrows();
    let g = jets.values();
    let g_inv = positive_definite_inverse(&g)?;

    // dg[[l,i,j]] = d_l g_ij ; ddg[[m,l,i,j]] = d_m d_l g_ij
    let mut dg = Array3::zeros((d, d, d));
    let mut ddg = Array4::zeros((d, d, d, d));
    for i in 0..d {
        for j in 0..d {
            let e = jets.get(i, j);
            for l in 0..d {
                dg[[l, i, j]] = e.grad[l];
                for m in 0..d {
                    ddg[[m, l, i, j]] = e.hess[(m, l)];
                }
            }
        }
    }

    // d_m g^kl = -g^ka (d_m g_ab) g^bl
    let mut dginv = Array3::zeros((d, d, d));
    for m in 0..d {
        let dgm = DMatrix::from_fn(d, d, |a, b| dg[[m, a, b]]);
        let block = -(&g_inv * dgm * &g_inv);
        for k in 0..d {
            for l in 0..d {
                dginv[[m, k, l]] = block[(k, l)];
            }
        }
    }

    let gamma = christoffel_from_jets(&jets)?;

    // dgamma[[m,k,i,j]] = d_m Gamma^k_ij
    let mut dgamma = Array4::zeros((d, d, d, d));
    for m in 0..d {
        for k in 0..d {
            for i in 0..d {
                for j in i..d {
                    let mut acc = 0.0;
                    for l in 0..d {
                        let sym = dg[[i, j, l]] + dg[[j, i, l]] - dg[[l, i, j]];
                        let dsym = ddg[[m, i, j, l]] + ddg[[m, j, i, l]] - ddg[[m, l, i, j]];
                        acc += dginv[[m, k, l]] * sym + g_inv[(k, l)] * dsym;
                    }
                    dgamma[[m, k, i, j]] = 0.5 * acc;
                    dgamma[[m, k, j, i]] = 0.5 * acc;
                }
            }
        }
    }

    // R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik
    //           + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
    let mut up = Array4::zeros((d, d, d, d));
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut acc = dgamma[[i, l, j, k]] - dgamma[[j, l, i, k]];
                    for m in 0..d {
                        acc += gamma[[l, i, m]] * gamma[[m, j, k]]
                            - gamma[[l, j, m]] * gamma[[m, i, k]];
                    }
                    up[[l, i, j, k]] = acc;
                }
            }
        }
    }

    let mut down = Array4::zeros((d, d, d, d));
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut acc = 0.0;
                    for m in 0..d {
                        acc += g[(l, m)] * up[[m, i, j, k]];
                    }
                    down[[l, i, j, k]] = acc;
                }
            }
        }
    }

    // Ric(X,Y) = sum_a g(R(X,E_a)E_a,Y) = g^ab R_jiab
    let mut ricci = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = 0.0;
            for a in 0..d {
                for b in 0..d {
                    acc += g_inv[(a, b)] * down[[j, i, a, b]];
                }
            }
            ricci[(i, j)] = acc;
        }
    }

    Ok(CurvatureData {
        gamma,
        riemann_up: up,
        riemann_down: down,
        ricci,
        convention_tag: CONVENTION_TAG,
    })
}

/// Riemann tensor at `x` (thin wrapper around [`curvature_data`]).
pub fn riemann(metric: &MatrixJetField, x: &[f64]) -> Result<CurvatureData> {
    curvature_data(metric, x)
}

/// Ricci tensor at `x` by index contraction.
pub fn ricci(metric: &MatrixJetField, x: &[f64]) -> Result<DMatrix<f64>> {
    Ok(curvature_data(metric, x)?.ricci)
}

/// Ricci tensor by tracing `g(R(d_i,E_a)E_a,d_j)` over an orthonormal frame.
/// Basis-independent; agrees with the contraction route and serves as its
/// two-oracle cross-check.
pub fn ricci_frame_trace(data: &CurvatureData, frame: &[DVector<f64>]) -> DMatrix<f64> {
    let d = data.ricci.nrows();
    let mut out = DMatrix::zeros(d, d);
    for ea in frame {
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for p in 0..d {
                    for q in 0..d {
                        acc += data.riemann_down[[j, i, p, q]] * ea[p] * ea[q];
                    }
                }
                out[(i, j)] += acc;
            }
        }
    }
    out
}

/// `R(X,Y)Z` as a coordinate vector.
pub fn apply_riemann(
    data: &CurvatureData,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> DVector<f64> {
    let d = x.len();
    let mut out = DVector::zeros(d);
    for l in 0..d {
        let mut acc = 0.0;
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0.0 {
                    continue;
                }
                for k in 0..d {
                    acc += data.riemann_up[[l, i, j, k]] * x[i] * y[j] * z[k];
                }
            }
        }
        out[l] = acc;
    }
    out
}

/// `g(R(X,Y)Z, W)`.
pub fn riemann_4(
    data: &CurvatureData,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
    w: &DVector<f64>,
) -> f64 {
    let d = x.len();
    let mut acc = 0.0;
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    acc += data.riemann_down[[l, i, j, k]] * w[l] * x[i] * y[j] * z[k];
                }
            }
        }
    }
    acc
}

/// Sectional curvature of the plane spanned by X, Y.
pub fn sectional(
    data: &CurvatureData,
    g: &DMatrix<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    let gxx = (g * x).dot(x);
    let gyy = (g * y).dot(y);
    let gxy = (g * x).dot(y);
    let denom = gxx * gyy - gxy * gxy;
    if denom <= 1e-12 {
        return Err(Error::DegeneratePlane { denom });
    }
    Ok(riemann_4(data, x, y, y, x) / denom)
}

/// Holomorphic sectional curvature
/// `K(X) = g(R(X,JX)JX,X) / (g(X,X) g(JX,JX) - g(X,JX)^2)`.
///
/// Scale-invariant in X; errors when the holomorphic plane degenerates
/// (denominator below 1e-12).
pub fn holomorphic_sectional(
    metric: &MatrixJetField,
    j_field: &MatrixJetField,
    x: &[f64],
    dir: &DVector<f64>,
) -> Result<f64> {
    let data = curvature_data(metric, x)?;
    let seeds = Jet2::seed_constants(x);
    let g = metric(&seeds).values();
    let j = j_field(&seeds).values();
    holomorphic_sectional_from_data(&data, &g, &j, dir)
}

pub fn holomorphic_sectional_from_data(
    data: &CurvatureData,
    g: &DMatrix<f64>,
    j: &DMatrix<f64>,
    dir: &DVector<f64>,
) -> Result<f64> {
    let jx = j * dir;
    let gxx = (g * dir).dot(dir);
    let gjj = (g * &jx).dot(&jx);
    let gxj = (g * dir).dot(&jx);
    let denom = gxx * gjj - gxj * gxj;
    if denom <= 1e-12 {
        return Err(Error::DegeneratePlane { denom });
    }
    Ok(riemann_4(data, dir, &jx, &jx, dir) / denom)
}

/// Lie derivative of a metric along a vector field, in coordinates:
/// `(L_V g)_ij = V^k d_k g_ij + g_kj d_i V^k + g_ik d_j V^k`.
/// Zero exactly when V is a Killing field at `x`. Needs only first
/// derivatives, so it is independent of the Christoffel machinery.
pub fn lie_derivative_metric(
    v_field: &crate::geometry::VectorJetField,
    metric: &MatrixJetField,
    x: &[f64],
) -> Result<DMatrix<f64>> {
    let seeds = Jet2::seed_point(x);
    let gj = metric(&seeds);
    let vj = v_field(&seeds);
    let d = x.len();
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += vj[k].value * gj.entry_grad(i, j)[k];
                acc += gj.get(k, j).value * vj[k].grad[i];
                acc += gj.get(i, k).value * vj[k].grad[j];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Normalized Ricci curvature in the direction of V:
/// `Ric(V,V) / (|V|^2 (d-1))`.
///
/// With `zero_convention`, a vanishing V yields 0 instead of an error,
/// matching the convention used for xi at its isolated zeros.
pub fn ricci_direction(
    metric: &MatrixJetField,
    x: &[f64],
    v: &DVector<f64>,
    zero_convention: bool,
) -> Result<f64> {
    let g = metric(&Jet2::seed_constants(x)).values();
    let norm_sq = (&g * v).dot(v);
    if norm_sq < 1e-12 {
        return if zero_convention {
            Ok(0.0)
        } else {
            Err(Error::DegenerateVector {
                norm: norm_sq.sqrt(),
                threshold: 1e-12,
            })
        };
    }
    let ric = ricci(metric, x)?;
    let d = v.len();
    Ok((&ric * v).dot(v) / (norm_sq * (d as f64 - 1.0)))
}

pub fn max_abs_riemann(data: &CurvatureData) -> f64 {
    data.riemann_down.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Max violation of antisymmetry in the (X,Y) slots and of the pair symmetry
/// `R_lijk = R_jkli`, as an absolute number (callers scale by
/// [`max_abs_riemann`] for a relative figure).
pub fn symmetry_residual(data: &CurvatureData) -> f64 {
    let d = data.ricci.nrows();
    let r = &data.riemann_down;
    let mut worst = 0.0f64;
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    worst = worst.max((r[[l, i, j, k]] + r[[l, j, i, k]]).abs());
                    worst = worst.max((r[[l, i, j, k]] - r[[j, k, l, i]]).abs());
                }
            }
        }
    }
    worst
}

/// Max violation of the first Bianchi identity
/// `R(X,Y)Z + R(Y,Z)X + R(Z,X)Y = 0` (absolute).
pub fn first_bianchi_residual(data: &CurvatureData) -> f64 {
    let d = data.ricci.nrows();
    let r = &data.riemann_up;
    let mut worst = 0.0f64;
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    worst =
                        worst.max((r[[l, i, j, k]] + r[[l, j, k, i]] + r[[l, k, i, j]]).abs());
                }
            }
        }
    }
    worst
}
