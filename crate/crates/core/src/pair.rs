//! Fundamental pairs `(I, II)` of quadratic forms and their pointwise
//! invariants.

use nalgebra::Matrix2;

use crate::chart::Chart;
use crate::error::{GeomError, Result};
use crate::grid::{Domain2D, ScalarField};

/// Default relative umbilic tolerance.
pub const DEFAULT_TOL_UMB: f64 = 1e-10;

/// Field of symmetric forms `a11 du² + 2 a12 du dv + a22 dv²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricFormField {
    pub a11: ScalarField,
    pub a12: ScalarField,
    pub a22: ScalarField,
}

impl SymmetricFormField {
    pub fn new(a11: ScalarField, a12: ScalarField, a22: ScalarField) -> Result<Self> {
        if a11.domain != a12.domain || a11.domain != a22.domain {
            return Err(GeomError::InvalidDomain(
                "form coefficients live on different grids".into(),
            ));
        }
        for (name, f) in [("a11", &a11), ("a12", &a12), ("a22", &a22)] {
            if let Some(k) = f.values.iter().position(|x| !x.is_finite()) {
                return Err(GeomError::InvalidDomain(format!(
                    "coefficient {name} is not finite at grid point {k}"
                )));
            }
        }
        Ok(SymmetricFormField { a11, a12, a22 })
    }

    pub fn from_fn(domain: Domain2D, f: impl Fn(f64, f64) -> [f64; 3]) -> Result<Self> {
        let vals: Vec<[f64; 3]> = (0..domain.len())
            .map(|k| {
                let (u, v) = domain.point(k);
                f(u, v)
            })
            .collect();
        Self::from_coeffs(domain, &vals)
    }

    pub fn from_coeffs(domain: Domain2D, coeffs: &[[f64; 3]]) -> Result<Self> {
        let col =
            |c: usize| ScalarField::from_values(domain, coeffs.iter().map(|x| x[c]).collect());
        Self::new(col(0), col(1), col(2))
    }

    pub fn zero(domain: Domain2D) -> Self {
        let z = ScalarField::constant(domain, 0.0);
        SymmetricFormField {
            a11: z.clone(),
            a12: z.clone(),
            a22: z,
        }
    }

    pub fn domain(&self) -> &Domain2D {
        &self.a11.domain
    }

    #[inline]
    pub fn at(&self, k: usize) -> [f64; 3] {
        [self.a11.values[k], self.a12.values[k], self.a22.values[k]]
    }

    #[inline]
    pub fn matrix(&self, k: usize) -> Matrix2<f64> {
        let [a, b, c] = self.at(k);
        Matrix2::new(a, b, b, c)
    }

    pub fn det(&self) -> ScalarField {
        self.map_coeffs(|[a, b, c]| a * c - b * b)
    }

    pub fn map_coeffs(&self, f: impl Fn([f64; 3]) -> f64) -> ScalarField {
        let d = *self.domain();
        ScalarField::from_values(d, (0..d.len()).map(|k| f(self.at(k))).collect())
    }

    /// Pointwise `Σ c_i(p) · form_i(p)`.
    pub fn combine(terms: &[(&ScalarField, &SymmetricFormField)]) -> Self {
        let d = *terms[0].1.domain();
        let mut out = vec![[0.0; 3]; d.len()];
        for (c, form) in terms {
            for (k, o) in out.iter_mut().enumerate() {
                let w = c.values[k];
                let [a, b, e] = form.at(k);
                o[0] += w * a;
                o[1] += w * b;
                o[2] += w * e;
            }
        }
        let col = |i: usize| ScalarField::from_values(d, out.iter().map(|x| x[i]).collect());
        SymmetricFormField {
            a11: col(0),
            a12: col(1),
            a22: col(2),
        }
    }

    pub fn scaled(&self, c: &ScalarField) -> Self {
        Self::combine(&[(c, self)])
    }

    pub fn neg(&self) -> Self {
        SymmetricFormField {
            a11: self.a11.map(|x| -x),
            a12: self.a12.map(|x| -x),
            a22: self.a22.map(|x| -x),
        }
    }

    /// Largest coefficient-wise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (0..self.domain().len())
            .map(|k| {
                let (a, b) = (self.at(k), other.at(k));
                (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Largest coefficient-wise difference relative to the pointwise size of `self`.
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        (0..self.domain().len())
            .map(|k| {
                let (a, b) = (self.at(k), other.at(k));
                let scale = a
                    .iter()
                    .fold(0.0f64, |m, x| m.max(x.abs()))
                    .max(f64::MIN_POSITIVE);
                (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max) / scale
            })
            .fold(0.0, f64::max)
    }
}

/// A Riemannian metric `I` and an arbitrary quadratic form `II` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalPair {
    pub first: SymmetricFormField,
    pub second: SymmetricFormField,
}

impl FundamentalPair {
    pub fn from_forms(first: SymmetricFormField, second: SymmetricFormField) -> Result<Self> {
        if first.domain() != second.domain() {
            return Err(GeomError::InvalidDomain(
                "I and II live on different grids".into(),
            ));
        }
        for k in 0..first.domain().len() {
            let [e, f, g] = first.at(k);
            let det = e * g - f * f;
            if !(det > 0.0 && e > 0.0) {
                return Err(GeomError::NonRiemannian { index: k, det });
            }
        }
        Ok(FundamentalPair { first, second })
    }

    /// First and second fundamental forms of a chart sampled on its grid.
    pub fn from_chart(chart: &Chart) -> Result<Self> {
        let forms = chart.sample_forms().map_err(|e| match e {
            GeomError::NonRiemannian { det, .. } => GeomError::NonRiemannian { index: 0, det },
            other => other,
        })?;
        let d = chart.domain;
        let first: Vec<[f64; 3]> = forms.iter().map(|x| x.0).collect();
        let second: Vec<[f64; 3]> = forms.iter().map(|x| x.1).collect();
        Self::from_forms(
            SymmetricFormField::from_coeffs(d, &first)?,
            SymmetricFormField::from_coeffs(d, &second)?,
        )
    }

    pub fn domain(&self) -> &Domain2D {
        self.first.domain()
    }
}

/// `S = I⁻¹ II` at grid point `k`, in the chart basis (`S[(m, i)] = S^m_i`).
pub fn shape_operator(pair: &FundamentalPair, k: usize) -> Result<Matrix2<f64>> {
    operator_of(&pair.first, &pair.second, k)
}

/// `I⁻¹ M` at grid point `k`.
pub fn operator_of(
    metric: &SymmetricFormField,
    form: &SymmetricFormField,
    k: usize,
) -> Result<Matrix2<f64>> {
    let i = metric.matrix(k);
    let det = i.determinant();
    if !(det.abs() > f64::MIN_POSITIVE) || !det.is_finite() {
        return Err(GeomError::SingularMetric { index: k, det });
    }
    let inv = Matrix2::new(i[(1, 1)], -i[(0, 1)], -i[(1, 0)], i[(0, 0)]) / det;
    Ok(inv * form.matrix(k))
}

/// Mean, extrinsic and principal curvatures with `t = sqrt(H² - K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    pub h: ScalarField,
    pub k: ScalarField,
    pub k1: ScalarField,
    pub k2: ScalarField,
    pub t: ScalarField,
}

impl CurvatureData {
    /// Nodes where `t² < tol_umb · max(1, H²)`.
    pub fn umbilic_mask(&self, tol_umb: f64) -> Vec<bool> {
        self.t
            .values
            .iter()
            .zip(&self.h.values)
            .map(|(t, h)| t * t < tol_umb * (h * h).max(1.0))
            .collect()
    }
}

/// Curvatures of a pair. Negative `H² - K` above `-tol_umb · max(1, H²)` is
/// clamped to zero; anything lower is reported as inconsistent input.
pub fn curvatures(pair: &FundamentalPair, tol_umb: f64) -> Result<CurvatureData> {
    let d = *pair.domain();
    let n = d.len();
    let (mut h, mut kk, mut k1, mut k2, mut t) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for idx in 0..n {
        let [e1, f1, g1] = pair.first.at(idx);
        let [e2, f2, g2] = pair.second.at(idx);
        let det = e1 * g1 - f1 * f1;
        if !(det > 0.0) {
            return Err(GeomError::SingularMetric { index: idx, det });
        }
        let hv = (e1 * g2 + g1 * e2 - 2.0 * f1 * f2) / (2.0 * det);
        let kv = (e2 * g2 - f2 * f2) / det;
        let mut disc = hv * hv - kv;
        if disc < 0.0 {
            if disc < -tol_umb * (hv * hv).max(1.0) {
                return Err(GeomError::ClampViolation {
                    index: idx,
                    value: disc,
                });
            }
            disc = 0.0;
        }
        let tv = disc.sqrt();
        h.push(hv);
        kk.push(kv);
        k1.push(hv + tv);
        k2.push(hv - tv);
        t.push(tv);
    }
    let f = |v| ScalarField::from_values(d, v);
    Ok(CurvatureData {
        h: f(h),
        k: f(kk),
        k1: f(k1),
        k2: f(k2),
        t: f(t),
    })
}

pub fn umbilic_mask(pair: &FundamentalPair, tol_umb: f64) -> Result<Vec<bool>> {
    Ok(curvatures(pair, tol_umb)?.umbilic_mask(tol_umb))
}

/// Mean curvature field alone.
pub fn mean_curvature(pair: &FundamentalPair) -> ScalarField {
    let d = *pair.domain();
    ScalarField::from_values(
        d,
        (0..d.len())
            .map(|idx| {
                let [e1, f1, g1] = pair.first.at(idx);
                let [e2, f2, g2] = pair.second.at(idx);
                (e1 * g2 + g1 * e2 - 2.0 * f1 * f2) / (2.0 * (e1 * g1 - f1 * f1))
            })
            .collect(),
    )
}

/// `II' = II - H I`.
pub fn traceless_part(pair: &FundamentalPair) -> SymmetricFormField {
    let minus_h = mean_curvature(pair).map(|x| -x);
    let one = ScalarField::constant(*pair.domain(), 1.0);
    SymmetricFormField::combine(&[(&one, &pair.second), (&minus_h, &pair.first)])
}

/// `III = -K I + 2H II`.
pub fn third_form(pair: &FundamentalPair) -> SymmetricFormField {
    let d = *pair.domain();
    let mut minus_k = Vec::with_capacity(d.len());
    for idx in 0..d.len() {
        let [e1, f1, g1] = pair.first.at(idx);
        let [e2, f2, g2] = pair.second.at(idx);
        minus_k.push(-(e2 * g2 - f2 * f2) / (e1 * g1 - f1 * f1));
    }
    let minus_k = ScalarField::from_values(d, minus_k);
    let two_h = mean_curvature(pair).map(|x| 2.0 * x);
    SymmetricFormField::combine(&[(&minus_k, &pair.first), (&two_h, &pair.second)])
}
