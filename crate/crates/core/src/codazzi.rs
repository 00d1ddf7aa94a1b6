//! Levi-Civita connection of a sampled metric, the Codazzi tensor
//! `T_S(X, Y) = ∇_X SY - ∇_Y SX - S[X, Y]`, the Codazzi function and the
//! intrinsic Gaussian curvature.
//!
//! All derivatives are sixth-order grid differences (see [`crate::grid`]).

use crate::error::{GeomError, Result};
use crate::grid::{Domain2D, ScalarField};
use crate::pair::{curvatures, mean_curvature, operator_of, FundamentalPair, SymmetricFormField};

/// Christoffel symbols `gamma[m][i][j] = Γ^m_{ij}` (index 0 = u, 1 = v).
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelField {
    pub gamma: [[[ScalarField; 2]; 2]; 2],
}

impl ChristoffelField {
    pub fn domain(&self) -> &Domain2D {
        &self.gamma[0][0][0].domain
    }

    #[inline]
    pub fn at(&self, m: usize, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[m][i][j].values[k]
    }
}

pub fn christoffel(metric: &SymmetricFormField) -> Result<ChristoffelField> {
    let d = *metric.domain();
    let (e, f, g) = (&metric.a11, &metric.a12, &metric.a22);
    let (eu, ev) = (e.d_u(), e.d_v());
    let (fu, fv) = (f.d_u(), f.d_v());
    let (gu, gv) = (g.d_u(), g.d_v());
    let n = d.len();
    let mut out: [[[Vec<f64>; 2]; 2]; 2] = Default::default();
    for k in 0..n {
        let (e, f, g) = (e.values[k], f.values[k], g.values[k]);
        let det = e * g - f * f;
        if !(det > 0.0) {
            return Err(GeomError::SingularMetric { index: k, det });
        }
        let s = 0.5 / det;
        let (eu, ev, fu, fv, gu, gv) = (
            eu.values[k],
            ev.values[k],
            fu.values[k],
            fv.values[k],
            gu.values[k],
            gv.values[k],
        );
        let uuu = (g * eu - 2.0 * f * fu + f * ev) * s;
        let vuu = (2.0 * e * fu - e * ev - f * eu) * s;
        let uuv = (g * ev - f * gu) * s;
        let vuv = (e * gu - f * ev) * s;
        let uvv = (2.0 * g * fv - g * gu - f * gv) * s;
        let vvv = (e * gv - 2.0 * f * fv + f * gu) * s;
        out[0][0][0].push(uuu);
        out[1][0][0].push(vuu);
        out[0][0][1].push(uuv);
        out[0][1][0].push(uuv);
        out[1][0][1].push(vuv);
        out[1][1][0].push(vuv);
        out[0][1][1].push(uvv);
        out[1][1][1].push(vvv);
    }
    let gamma = out.map(|a| a.map(|b| b.map(|v| ScalarField::from_values(d, v))));
    Ok(ChristoffelField { gamma })
}

/// Tangent vector field in the chart basis.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub u: ScalarField,
    pub v: ScalarField,
}

impl VectorField {
    pub fn new(u: ScalarField, v: ScalarField) -> Self {
        VectorField { u, v }
    }

    pub fn coordinate(domain: Domain2D, axis: usize) -> Self {
        let (a, b) = if axis == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
        VectorField {
            u: ScalarField::constant(domain, a),
            v: ScalarField::constant(domain, b),
        }
    }

    fn comp(&self, m: usize) -> &ScalarField {
        if m == 0 {
            &self.u
        } else {
            &self.v
        }
    }

    pub fn scaled(&self, f: &ScalarField) -> Self {
        VectorField {
            u: self.u.zip_map(f, |a, b| a * b),
            v: self.v.zip_map(f, |a, b| a * b),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorField {
            u: self.u.zip_map(&other.u, |a, b| a + b),
            v: self.v.zip_map(&other.v, |a, b| a + b),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        VectorField {
            u: self.u.zip_map(&other.u, |a, b| a - b),
            v: self.v.zip_map(&other.v, |a, b| a - b),
        }
    }

    /// Largest Euclidean norm of the component pair.
    pub fn max_norm(&self) -> f64 {
        self.u
            .values
            .iter()
            .zip(&self.v.values)
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }
}

/// Field of linear endomorphisms, `m[r][c] = S^r_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorField {
    pub m: [[ScalarField; 2]; 2],
}

impl OperatorField {
    /// `I⁻¹ form` at every node.
    pub fn of_forms(metric: &SymmetricFormField, form: &SymmetricFormField) -> Result<Self> {
        let d = *metric.domain();
        let mut cols: [[Vec<f64>; 2]; 2] = Default::default();
        for k in 0..d.len() {
            let s = operator_of(metric, form, k)?;
            for (r, row) in cols.iter_mut().enumerate() {
                for (c, col) in row.iter_mut().enumerate() {
                    col.push(s[(r, c)]);
                }
            }
        }
        Ok(OperatorField {
            m: cols.map(|row| row.map(|v| ScalarField::from_values(d, v))),
        })
    }

    pub fn shape(pair: &FundamentalPair) -> Result<Self> {
        Self::of_forms(&pair.first, &pair.second)
    }

    pub fn scaled(&self, f: &ScalarField) -> Self {
        OperatorField {
            m: self
                .m
                .clone()
                .map(|row| row.map(|x| x.zip_map(f, |a, b| a * b))),
        }
    }

    /// `S - h Id`.
    pub fn minus_identity(&self, h: &ScalarField) -> Self {
        let mut out = self.clone();
        for r in 0..2 {
            out.m[r][r] = out.m[r][r].zip_map(h, |a, b| a - b);
        }
        out
    }

    pub fn apply(&self, x: &VectorField) -> VectorField {
        let row = |r: usize| {
            let a = self.m[r][0].zip_map(&x.u, |s, w| s * w);
            let b = self.m[r][1].zip_map(&x.v, |s, w| s * w);
            a.zip_map(&b, |p, q| p + q)
        };
        VectorField {
            u: row(0),
            v: row(1),
        }
    }
}

/// `∇_X W` with `(∇_X W)^m = X^i (∂_i W^m + Γ^m_{ik} W^k)`.
pub fn covariant_derivative(
    gamma: &ChristoffelField,
    x: &VectorField,
    w: &VectorField,
) -> VectorField {
    let d = *gamma.domain();
    let dw = [[w.u.d_u(), w.u.d_v()], [w.v.d_u(), w.v.d_v()]];
    let comp = |m: usize| {
        let vals = (0..d.len())
            .map(|k| {
                let xs = [x.u.values[k], x.v.values[k]];
                let ws = [w.u.values[k], w.v.values[k]];
                let mut acc = 0.0;
                for i in 0..2 {
                    let mut inner = dw[m][i].values[k];
                    for (kk, wk) in ws.iter().enumerate() {
                        inner += gamma.at(m, i, kk, k) * wk;
                    }
                    acc += xs[i] * inner;
                }
                acc
            })
            .collect();
        ScalarField::from_values(d, vals)
    };
    VectorField {
        u: comp(0),
        v: comp(1),
    }
}

/// `[X, Y]^m = X^i ∂_i Y^m - Y^i ∂_i X^m`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    let d = x.u.domain;
    let comp = |m: usize| {
        let (ym, xm) = (y.comp(m), x.comp(m));
        let (ymu, ymv, xmu, xmv) = (ym.d_u(), ym.d_v(), xm.d_u(), xm.d_v());
        let vals = (0..d.len())
            .map(|k| {
                x.u.values[k] * ymu.values[k] + x.v.values[k] * ymv.values[k]
                    - y.u.values[k] * xmu.values[k]
                    - y.v.values[k] * xmv.values[k]
            })
            .collect();
        ScalarField::from_values(d, vals)
    };
    VectorField {
        u: comp(0),
        v: comp(1),
    }
}

/// `T_S(X, Y)` for arbitrary vector fields, bracket term included.
pub fn codazzi_tensor_general(
    gamma: &ChristoffelField,
    s: &OperatorField,
    x: &VectorField,
    y: &VectorField,
) -> VectorField {
    let a = covariant_derivative(gamma, x, &s.apply(y));
    let b = covariant_derivative(gamma, y, &s.apply(x));
    let c = s.apply(&lie_bracket(x, y));
    a.sub(&b).sub(&c)
}

/// `T_S(∂u, ∂v)` at every node:
/// `T^m = ∂u S^m_v - ∂v S^m_u + S^k_v Γ^m_{uk} - S^k_u Γ^m_{vk}`.
pub fn codazzi_tensor_of(gamma: &ChristoffelField, s: &OperatorField) -> VectorField {
    let d = *gamma.domain();
    let comp = |m: usize| {
        let dsv = s.m[m][1].d_u();
        let dsu = s.m[m][0].d_v();
        let vals = (0..d.len())
            .map(|k| {
                let mut acc = dsv.values[k] - dsu.values[k];
                for kk in 0..2 {
                    acc += s.m[kk][1].values[k] * gamma.at(m, 0, kk, k)
                        - s.m[kk][0].values[k] * gamma.at(m, 1, kk, k);
                }
                acc
            })
            .collect();
        ScalarField::from_values(d, vals)
    };
    VectorField {
        u: comp(0),
        v: comp(1),
    }
}

/// `T_S(X, Y) = (X^u Y^v - X^v Y^u) T_S(∂u, ∂v)`, by skew-symmetry and
/// bilinearity over functions.
pub fn codazzi_tensor_from_basis(
    basis_value: &VectorField,
    x: &VectorField,
    y: &VectorField,
) -> VectorField {
    let w =
        x.u.zip_map(&y.v, |a, b| a * b)
            .zip_map(&x.v.zip_map(&y.u, |a, b| a * b), |p, q| p - q);
    basis_value.scaled(&w)
}

pub fn codazzi_tensor(pair: &FundamentalPair) -> Result<VectorField> {
    let gamma = christoffel(&pair.first)?;
    Ok(codazzi_tensor_of(&gamma, &OperatorField::shape(pair)?))
}

/// `I(T, T) / (I(X,X) I(Y,Y) - I(X,Y)²)` with `T = T_S(X, Y)`.
pub fn codazzi_function_in_basis(
    metric: &SymmetricFormField,
    t: &VectorField,
    x: &VectorField,
    y: &VectorField,
) -> ScalarField {
    let d = *metric.domain();
    let ip = |k: usize, a: [f64; 2], b: [f64; 2]| {
        let [e, f, g] = metric.at(k);
        e * a[0] * b[0] + f * (a[0] * b[1] + a[1] * b[0]) + g * a[1] * b[1]
    };
    let vals = (0..d.len())
        .map(|k| {
            let tv = [t.u.values[k], t.v.values[k]];
            let xv = [x.u.values[k], x.v.values[k]];
            let yv = [y.u.values[k], y.v.values[k]];
            let gram = ip(k, xv, xv) * ip(k, yv, yv) - ip(k, xv, yv).powi(2);
            ip(k, tv, tv) / gram
        })
        .collect();
    ScalarField::from_values(d, vals)
}

/// Codazzi function for an operator field with respect to `metric`.
pub fn codazzi_function_of(metric: &SymmetricFormField, s: &OperatorField) -> Result<ScalarField> {
    let gamma = christoffel(metric)?;
    let t = codazzi_tensor_of(&gamma, s);
    let d = *metric.domain();
    Ok(codazzi_function_in_basis(
        metric,
        &t,
        &VectorField::coordinate(d, 0),
        &VectorField::coordinate(d, 1),
    ))
}

pub fn codazzi_function(pair: &FundamentalPair) -> Result<ScalarField> {
    codazzi_function_of(&pair.first, &OperatorField::shape(pair)?)
}

/// `max sqrt(𝒯_S)` over the nodes selected by `mask` (all nodes when `None`).
pub fn codazzi_residual(pair: &FundamentalPair, mask: Option<&[bool]>) -> Result<f64> {
    let cf = codazzi_function(pair)?.map(|x| x.max(0.0).sqrt());
    Ok(match mask {
        Some(m) => cf.max_abs_masked(m),
        None => cf.max_abs(),
    })
}

/// Codazzi function of the traceless operator `S - H Id`.
pub fn traceless_codazzi_function(pair: &FundamentalPair) -> Result<ScalarField> {
    let s = OperatorField::shape(pair)?.minus_identity(&mean_curvature(pair));
    codazzi_function_of(&pair.first, &s)
}

/// `‖∇f‖²_I = I^{ij} ∂_i f ∂_j f`.
pub fn gradient_norm_sq(metric: &SymmetricFormField, f: &ScalarField) -> ScalarField {
    let (fu, fv) = (f.d_u(), f.d_v());
    let d = *metric.domain();
    let vals = (0..d.len())
        .map(|k| {
            let [e, ff, g] = metric.at(k);
            let det = e * g - ff * ff;
            let (a, b) = (fu.values[k], fv.values[k]);
            (g * a * a - 2.0 * ff * a * b + e * b * b) / det
        })
        .collect();
    ScalarField::from_values(d, vals)
}

/// Quotient `𝒯_{S̃} / (H² - K)` on non-umbilic nodes (NaN elsewhere).
pub fn umbilic_quotient(pair: &FundamentalPair, tol_umb: f64) -> Result<ScalarField> {
    let tc = traceless_codazzi_function(pair)?;
    let curv = curvatures(pair, tol_umb)?;
    let mask = curv.umbilic_mask(tol_umb);
    let d = *pair.domain();
    let vals = (0..d.len())
        .map(|k| {
            if mask[k] {
                f64::NAN
            } else {
                tc.values[k] / curv.t.values[k].powi(2)
            }
        })
        .collect();
    Ok(ScalarField::from_values(d, vals))
}

/// `|Q_z̄|² - λ 𝒯_{S̃} |Q|² / (2 (H² - K))` on an isothermal chart, with the
/// mask of nodes where it is evaluated (`t² > tol_umb`).
pub fn hopf_defect_residual(
    pair: &FundamentalPair,
    hopf: &crate::hopf::HopfField,
    tol_umb: f64,
) -> Result<(ScalarField, Vec<bool>)> {
    let tc = traceless_codazzi_function(pair)?;
    let curv = curvatures(pair, tol_umb)?;
    let qzb = hopf.q.d_zbar();
    let d = *pair.domain();
    let mut mask = Vec::with_capacity(d.len());
    let vals = (0..d.len())
        .map(|k| {
            let t2 = curv.t.values[k].powi(2);
            let keep = t2 > tol_umb;
            mask.push(keep);
            if !keep {
                return 0.0;
            }
            let lhs = qzb.values[k].norm_sqr();
            let rhs =
                hopf.lambda.values[k] * tc.values[k] * hopf.q.values[k].norm_sqr() / (2.0 * t2);
            lhs - rhs
        })
        .collect();
    Ok((ScalarField::from_values(d, vals), mask))
}

/// Intrinsic Gaussian curvature of a metric by the Brioschi formula.
pub fn gauss_curvature(metric: &SymmetricFormField) -> Result<ScalarField> {
    let d = *metric.domain();
    let (e, f, g) = (&metric.a11, &metric.a12, &metric.a22);
    let (eu, ev, evv) = (e.d_u(), e.d_v(), e.d_vv());
    let (fu, fv, fuv) = (f.d_u(), f.d_v(), f.d_uv());
    let (gu, gv, guu) = (g.d_u(), g.d_v(), g.d_uu());
    let mut out = Vec::with_capacity(d.len());
    for k in 0..d.len() {
        let (e0, f0, g0) = (e.values[k], f.values[k], g.values[k]);
        let det = e0 * g0 - f0 * f0;
        if !(det > 0.0) {
            return Err(GeomError::SingularMetric { index: k, det });
        }
        let a = nalgebra::Matrix3::new(
            -0.5 * evv.values[k] + fuv.values[k] - 0.5 * guu.values[k],
            0.5 * eu.values[k],
            fu.values[k] - 0.5 * ev.values[k],
            fv.values[k] - 0.5 * gu.values[k],
            e0,
            f0,
            0.5 * gv.values[k],
            f0,
            g0,
        );
        let b = nalgebra::Matrix3::new(
            0.0,
            0.5 * ev.values[k],
            0.5 * gu.values[k],
            0.5 * ev.values[k],
            e0,
            f0,
            0.5 * gu.values[k],
            f0,
            g0,
        );
        out.push((a.determinant() - b.determinant()) / (det * det));
    }
    Ok(ScalarField::from_values(d, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::fixture;
    use crate::pair::third_form;
    use proptest::prelude::*;

    fn dom(n: usize) -> Domain2D {
        Domain2D::new((0.5, 1.5), (0.2, 1.2), (false, false), (n, n)).unwrap()
    }

    fn euclid(d: Domain2D) -> SymmetricFormField {
        SymmetricFormField::from_fn(d, |_, _| [1.0, 0.0, 1.0]).unwrap()
    }

    fn fixture_pair(name: &str, params: &[f64], n: usize) -> FundamentalPair {
        FundamentalPair::from_chart(&fixture(name, params, Some((n, n))).unwrap()).unwrap()
    }

    #[test]
    fn euclidean_christoffels_vanish() {
        let g = christoffel(&euclid(dom(16))).unwrap();
        for m in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(g.gamma[m][i][j].max_abs(), 0.0);
                }
            }
        }
    }

    #[test]
    fn sphere_christoffels_match_oracle() {
        let p = fixture_pair("sphere", &[1.0], 64);
        let g = christoffel(&p.first).unwrap();
        let d = p.domain();
        for k in 0..d.len() {
            let (u, _) = d.point(k);
            assert!((g.at(0, 1, 1, k) + u.sin() * u.cos()).abs() < 1e-6);
            assert!((g.at(1, 0, 1, k) - u.cos() / u.sin()).abs() < 1e-5);
            assert!(g.at(0, 0, 0, k).abs() < 1e-12);
        }
    }

    #[test]
    fn conformal_christoffels_match_complex_connection() {
        // I = 2λ(du² + dv²): ∇_{∂z}∂z = (λ_z/λ)∂z gives
        // Γ^u_uu = λ_u/(2λ), Γ^v_uu = -λ_v/(2λ), Γ^u_uv = λ_v/(2λ).
        let d = dom(64);
        let lam = |u: f64, v: f64| 1.0 + 0.3 * u * u + 0.2 * (u * v).sin();
        let metric =
            SymmetricFormField::from_fn(d, |u, v| [2.0 * lam(u, v), 0.0, 2.0 * lam(u, v)]).unwrap();
        let g = christoffel(&metric).unwrap();
        for k in 0..d.len() {
            let (u, v) = d.point(k);
            let lu = 0.6 * u + 0.2 * v * (u * v).cos();
            let lv = 0.2 * u * (u * v).cos();
            let l = lam(u, v);
            assert!((g.at(0, 0, 0, k) - lu / (2.0 * l)).abs() < 1e-8);
            assert!((g.at(1, 0, 0, k) + lv / (2.0 * l)).abs() < 1e-8);
            assert!((g.at(0, 0, 1, k) - lv / (2.0 * l)).abs() < 1e-8);
            assert!((g.at(1, 1, 1, k) - lv / (2.0 * l)).abs() < 1e-8);
        }
    }

    #[test]
    fn immersed_fixtures_are_codazzi() {
        for (name, params) in [
            ("sphere", vec![1.0]),
            ("cylinder", vec![1.0]),
            ("catenoid", vec![]),
            ("ellipsoid_rev", vec![2.0, 1.0]),
            ("torus_rev", vec![3.0, 1.0]),
        ] {
            let r = codazzi_residual(&fixture_pair(name, &params, 128), None).unwrap();
            assert!(r < 1e-6, "{name}: {r}");
        }
    }

    #[test]
    fn scaled_identity_pair_has_unit_codazzi_function() {
        let d = dom(32);
        let pair = FundamentalPair::from_forms(
            euclid(d),
            SymmetricFormField::from_fn(d, |u, _| [u, 0.0, u]).unwrap(),
        )
        .unwrap();
        let t = codazzi_tensor(&pair).unwrap();
        assert!(t.u.max_abs() < 1e-12);
        assert!(t.v.values.iter().all(|x| (x - 1.0).abs() < 1e-12));
        let cf = codazzi_function(&pair).unwrap();
        assert!(cf.values.iter().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn skew_symmetry_of_general_evaluation() {
        let p = fixture_pair("ellipsoid_rev", &[2.0, 1.0], 32);
        let d = *p.domain();
        let gamma = christoffel(&p.first).unwrap();
        let s = OperatorField::shape(&p).unwrap();
        let x = VectorField::new(
            ScalarField::from_fn(d, |u, v| 1.0 + 0.2 * (u + v).sin()),
            ScalarField::from_fn(d, |u, _| 0.3 * u.cos()),
        );
        let y = VectorField::new(
            ScalarField::from_fn(d, |_, v| 0.1 * v),
            ScalarField::from_fn(d, |u, v| 1.0 + 0.1 * u * v),
        );
        let a = codazzi_tensor_general(&gamma, &s, &x, &y);
        let b = codazzi_tensor_general(&gamma, &s, &y, &x);
        assert!(a.add(&b).max_norm() < 1e-13);
    }

    #[test]
    fn basis_change_preserves_codazzi_function() {
        let d = dom(48);
        let metric =
            SymmetricFormField::from_fn(d, |u, v| [1.0 + u * u, 0.2 * v, 2.0 + 0.1 * u * v])
                .unwrap();
        let form = SymmetricFormField::from_fn(d, |u, v| [u.sin(), u * v, v.cos()]).unwrap();
        let gamma = christoffel(&metric).unwrap();
        let s = OperatorField::of_forms(&metric, &form).unwrap();
        let (eu, ev) = (VectorField::coordinate(d, 0), VectorField::coordinate(d, 1));
        let base = codazzi_function_in_basis(&metric, &codazzi_tensor_of(&gamma, &s), &eu, &ev);
        let x = eu.add(&ev);
        let t = codazzi_tensor_general(&gamma, &s, &x, &ev);
        let other = codazzi_function_in_basis(&metric, &t, &x, &ev);
        let diff = base.zip_map(&other, |a, b| (a - b).abs()).max_abs();
        assert!(diff < 1e-10, "{diff}");
    }

    #[test]
    fn traceless_function_is_gradient_of_mean_curvature() {
        for name in ["sphere", "cylinder", "ellipsoid_rev"] {
            let p = fixture_pair(name, &[], 192);
            let tc = traceless_codazzi_function(&p).unwrap();
            let grad = gradient_norm_sq(&p.first, &mean_curvature(&p));
            let diff = tc.zip_map(&grad, |a, b| (a - b).abs()).max_abs();
            assert!(diff < 1e-6, "{name}: {diff}");
        }
    }

    #[test]
    fn hopf_defect_identity_on_isothermal_fixtures() {
        for (name, params, tol) in [
            ("catenoid", vec![], 1e-6),
            ("cylinder", vec![1.0], 1e-8),
            ("ellipsoid_rev_iso", vec![2.0, 1.0], 1e-5),
        ] {
            let p = fixture_pair(name, &params, 128);
            let hf = crate::hopf::hopf_coefficient(&p, 1e-8).unwrap();
            let (res, mask) = hopf_defect_residual(&p, &hf, 1e-10).unwrap();
            assert!(mask.iter().all(|&m| m), "{name}: unexpected umbilics");
            let r = res.max_abs();
            assert!(r < tol, "{name}: {r}");
        }
    }

    #[test]
    fn third_form_with_second_is_codazzi() {
        for (name, params) in [("sphere", vec![1.5]), ("ellipsoid_rev", vec![2.0, 1.0])] {
            let p = fixture_pair(name, &params, 96);
            let pair3 = FundamentalPair::from_forms(third_form(&p), p.second.clone()).unwrap();
            let r = codazzi_residual(&pair3, None).unwrap();
            assert!(r < 1e-5, "{name}: {r}");
            let c = crate::pair::curvatures(&p, 1e-10).unwrap();
            let h3 = mean_curvature(&pair3);
            for k in 0..p.domain().len() {
                let expect = c.h.values[k] / c.k.values[k];
                assert!((h3.values[k] - expect).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn gauss_curvature_examples() {
        let d = Domain2D::new((0.0, 1.0), (0.5, 1.5), (false, false), (192, 192)).unwrap();
        assert!(gauss_curvature(&euclid(d)).unwrap().max_abs() < 1e-14);
        let hyp =
            SymmetricFormField::from_fn(d, |_, v| [1.0 / (v * v), 0.0, 1.0 / (v * v)]).unwrap();
        let k = gauss_curvature(&hyp).unwrap();
        assert!(k.values.iter().all(|x| (x + 1.0).abs() < 1e-6));
        let s = fixture_pair("sphere", &[2.0], 96);
        let k = gauss_curvature(&s.first).unwrap();
        assert!(k.values.iter().all(|x| (x - 0.25).abs() < 1e-6));
    }

    /// A non-Codazzi operator field for a non-flat metric.
    fn generic_operator() -> (Domain2D, ChristoffelField, OperatorField) {
        let d = dom(96);
        let metric = SymmetricFormField::from_fn(d, |u, v| {
            [
                1.0 + 0.2 * u * u,
                0.1 * u * v,
                1.0 + 0.3 * (v + u).sin().powi(2),
            ]
        })
        .unwrap();
        let form =
            SymmetricFormField::from_fn(d, |u, v| [u.cos(), 0.3 * u * v, 1.0 + v * v]).unwrap();
        (
            d,
            christoffel(&metric).unwrap(),
            OperatorField::of_forms(&metric, &form).unwrap(),
        )
    }

    fn smooth(d: Domain2D, a: f64, b: f64, c: f64) -> ScalarField {
        ScalarField::from_fn(d, move |u, v| {
            a + b * (u + v).sin() + 0.1 * c * u * v.cos() + 0.05 * c * (2.0 * v).sin()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn tensor_is_bilinear_over_functions(
            a in -1.0f64..1.0, b in -0.5f64..0.5, c in -1.0f64..1.0,
            a2 in -1.0f64..1.0, b2 in -0.5f64..0.5, c2 in -1.0f64..1.0,
        ) {
            let (d, gamma, s) = generic_operator();
            let (f1, f2) = (smooth(d, a, b, c), smooth(d, a2, b2, c2));
            let x1 = VectorField::new(smooth(d, 1.0, 0.2, c), smooth(d, 0.0, 0.3, a));
            let x2 = VectorField::new(smooth(d, 0.0, 0.1, b), smooth(d, 1.0, 0.2, c2));
            let y = VectorField::new(smooth(d, 0.3, 0.1, a2), smooth(d, 1.0, 0.1, b2));
            let combo = x1.scaled(&f1).add(&x2.scaled(&f2));
            let lhs = codazzi_tensor_general(&gamma, &s, &combo, &y);
            let rhs = codazzi_tensor_general(&gamma, &s, &x1, &y).scaled(&f1)
                .add(&codazzi_tensor_general(&gamma, &s, &x2, &y).scaled(&f2));
            let mask = crate::grid::interior_mask(&d, 3);
            let diff = lhs.sub(&rhs);
            let err = diff.u.map(|x| x.abs()).max_abs_masked(&mask)
                .max(diff.v.map(|x| x.abs()).max_abs_masked(&mask));
            prop_assert!(err < 1e-8, "{}", err);
        }

        #[test]
        fn scaling_rule_for_operator_multiples(
            a in 0.5f64..1.5, b in -0.5f64..0.5, c in -1.0f64..1.0,
        ) {
            let (d, gamma, s) = generic_operator();
            let f = smooth(d, a, b, c);
            let (fu, fv) = (f.d_u(), f.d_v());
            let x = VectorField::new(smooth(d, 1.0, 0.2, c), smooth(d, 0.1, 0.1, a));
            let y = VectorField::new(smooth(d, 0.2, 0.1, b), smooth(d, 1.0, 0.2, a));
            let lhs = codazzi_tensor_general(&gamma, &s.scaled(&f), &x, &y);
            let xf = x.u.zip_map(&fu, |p, q| p * q).zip_map(&x.v.zip_map(&fv, |p, q| p * q), |p, q| p + q);
            let yf = y.u.zip_map(&fu, |p, q| p * q).zip_map(&y.v.zip_map(&fv, |p, q| p * q), |p, q| p + q);
            let rhs = codazzi_tensor_general(&gamma, &s, &x, &y).scaled(&f)
                .add(&s.apply(&y).scaled(&xf))
                .sub(&s.apply(&x).scaled(&yf));
            let mask = crate::grid::interior_mask(&d, 3);
            let diff = lhs.sub(&rhs);
            let err = diff.u.map(|x| x.abs()).max_abs_masked(&mask)
                .max(diff.v.map(|x| x.abs()).max_abs_masked(&mask));
            prop_assert!(err < 1e-8, "{}", err);
        }

        #[test]
        fn codazzi_function_is_non_negative(
            a in -2.0f64..2.0, b in -2.0f64..2.0,
        ) {
            let d = dom(24);
            let metric = SymmetricFormField::from_fn(d, |u, v| [1.0 + 0.1 * u * v, 0.1 * u, 1.0 + v * v]).unwrap();
            let form = SymmetricFormField::from_fn(d, |u, v| [a * u, b * v, a * b * u * v]).unwrap();
            let cf = codazzi_function_of(&metric, &OperatorField::of_forms(&metric, &form).unwrap()).unwrap();
            prop_assert!(cf.values.iter().all(|&x| x >= 0.0));
        }
    }
}
