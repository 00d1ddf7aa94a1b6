//! Special Weingarten pairs `H = f(H² - K)`: profiles, the primitive
//! `φ(t) = ∫₀ᵗ 2 f'(s²) ds`, the transformed pair
//! `A = cosh φ I + (sinh φ / t) II'`, `B = t sinh φ I + cosh φ II'`,
//! its inverse and the flat metric `t A`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::Matrix2;

use crate::codazzi::VectorField;
use crate::error::{GeomError, Result};
use crate::grid::{ComplexField, ScalarField};
use crate::hopf::{conformal_factor, quadratic_differential_form};
use crate::pair::{curvatures, traceless_part, CurvatureData, FundamentalPair, SymmetricFormField};
use crate::quad::{adaptive, gauss_legendre8};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Constant(f64),
    Linear { c: f64, eps: f64 },
    Table(Arc<HermiteTable>),
    Custom { f: RealFn, fp: RealFn },
}

/// The function `f` of `H = f(H² - K)` on `[0, extent)`.
#[derive(Clone)]
pub struct WeingartenProfile {
    label: String,
    kind: Kind,
    extent: f64,
}

impl fmt::Debug for WeingartenProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeingartenProfile")
            .field("label", &self.label)
            .field("extent", &self.extent)
            .finish()
    }
}

impl WeingartenProfile {
    pub fn constant(h0: f64) -> Self {
        WeingartenProfile {
            label: format!("const:{h0}"),
            kind: Kind::Constant(h0),
            extent: f64::INFINITY,
        }
    }

    pub fn linear(c: f64, eps: f64) -> Self {
        WeingartenProfile {
            label: format!("linear:{c},{eps}"),
            kind: Kind::Linear { c, eps },
            extent: f64::INFINITY,
        }
    }

    /// `f(x) = sqrt(x)`, on the boundary of ellipticity.
    pub fn sqrt() -> Self {
        Self::custom("sqrt", |x| x.sqrt(), |x| 0.5 / x.sqrt(), f64::INFINITY)
    }

    /// `f(x) = sqrt(x + k0)`, i.e. constant extrinsic curvature `K = k0`.
    pub fn constant_curvature(k0: f64) -> Self {
        let mut p = Self::custom(
            "constk",
            move |x| (x + k0).sqrt(),
            move |x| 0.5 / (x + k0).sqrt(),
            f64::INFINITY,
        );
        p.label = format!("constk:{k0}");
        p
    }

    pub fn custom(
        label: &str,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        fp: impl Fn(f64) -> f64 + Send + Sync + 'static,
        extent: f64,
    ) -> Self {
        WeingartenProfile {
            label: label.to_string(),
            kind: Kind::Custom {
                f: Arc::new(f),
                fp: Arc::new(fp),
            },
            extent,
        }
    }

    /// Cubic Hermite interpolant of samples `(x, f, f')` with `x` strictly
    /// increasing from 0; the extent is the last abscissa.
    pub fn from_samples(label: &str, x: Vec<f64>, f: Vec<f64>, fp: Vec<f64>) -> Result<Self> {
        let table = HermiteTable::new(x, f, fp)?;
        let extent = *table.x.last().unwrap();
        Ok(WeingartenProfile {
            label: label.to_string(),
            kind: Kind::Table(Arc::new(table)),
            extent,
        })
    }

    /// Read a CSV with header `t,f,fprime`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)
            .map_err(|e| GeomError::ProfileSpec(format!("{}: {e}", path.display())))?;
        let headers = rdr
            .headers()
            .map_err(|e| GeomError::ProfileSpec(e.to_string()))?
            .clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| GeomError::ProfileSpec(format!("missing column `{name}`")))
        };
        let (ct, cf, cp) = (col("t")?, col("f")?, col("fprime")?);
        let (mut xs, mut fs, mut ps) = (Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| GeomError::ProfileSpec(e.to_string()))?;
            let num = |c: usize| -> Result<f64> {
                rec.get(c)
                    .unwrap_or("")
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| GeomError::ProfileSpec(format!("row {}: {e}", line + 2)))
            };
            xs.push(num(ct)?);
            fs.push(num(cf)?);
            ps.push(num(cp)?);
        }
        Self::from_samples(&format!("table:{}", path.display()), xs, fs, ps)
    }

    /// Parse `const:<H0>`, `linear:<c>,<eps>`, `table:<path>`, `sqrt` or
    /// `constk:<K0>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let nums = |n: usize| -> Result<Vec<f64>> {
            let v: std::result::Result<Vec<f64>, _> =
                rest.split(',').map(|s| s.trim().parse::<f64>()).collect();
            match v {
                Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
                _ => Err(GeomError::ProfileSpec(format!(
                    "`{spec}`: expected {n} number(s) after `{kind}:`"
                ))),
            }
        };
        match kind {
            "const" => Ok(Self::constant(nums(1)?[0])),
            "linear" => {
                let v = nums(2)?;
                Ok(Self::linear(v[0], v[1]))
            }
            "table" if !rest.is_empty() => Self::from_csv(Path::new(rest)),
            "sqrt" if rest.is_empty() => Ok(Self::sqrt()),
            "constk" => {
                let k0 = nums(1)?[0];
                if k0 <= 0.0 {
                    return Err(GeomError::ProfileSpec("constk needs K0 > 0".into()));
                }
                Ok(Self::constant_curvature(k0))
            }
            _ => Err(GeomError::ProfileSpec(format!(
                "unrecognised profile `{spec}`"
            ))),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Right end `a` of the domain `[0, a)`.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn f(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Constant(h) => *h,
            Kind::Linear { c, eps } => c + eps * x,
            Kind::Table(t) => t.value(x).0,
            Kind::Custom { f, .. } => f(x),
        }
    }

    pub fn fprime(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Constant(_) => 0.0,
            Kind::Linear { eps, .. } => *eps,
            Kind::Table(t) => t.value(x).1,
            Kind::Custom { fp, .. } => fp(x),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, Kind::Constant(_))
    }

    fn check_arg(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || !(t * t < self.extent) {
            return Err(GeomError::DomainExceeded {
                value: t,
                extent: self.extent.sqrt(),
            });
        }
        Ok(())
    }
}

struct HermiteTable {
    x: Vec<f64>,
    f: Vec<f64>,
    fp: Vec<f64>,
}

impl HermiteTable {
    fn new(x: Vec<f64>, f: Vec<f64>, fp: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != f.len() || x.len() != fp.len() {
            return Err(GeomError::ProfileSpec(
                "table needs at least two complete rows".into(),
            ));
        }
        if x[0] != 0.0 {
            return Err(GeomError::ProfileSpec("table must start at t = 0".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(GeomError::ProfileSpec(
                "table abscissae must increase".into(),
            ));
        }
        if f.iter().chain(&fp).any(|v| !v.is_finite()) {
            return Err(GeomError::ProfileSpec("table values must be finite".into()));
        }
        Ok(HermiteTable { x, f, fp })
    }

    fn value(&self, x: f64) -> (f64, f64) {
        let k = self
            .x
            .partition_point(|&t| t <= x)
            .clamp(1, self.x.len() - 1)
            - 1;
        hermite(
            x,
            (self.x[k], self.x[k + 1]),
            (self.f[k], self.f[k + 1]),
            (self.fp[k], self.fp[k + 1]),
        )
    }
}

/// Cubic Hermite value and derivative on one interval.
fn hermite(x: f64, (x0, x1): (f64, f64), (y0, y1): (f64, f64), (d0, d1): (f64, f64)) -> (f64, f64) {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = 6.0 * s2 - 6.0 * s;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = -dh00;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let deriv = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
    (value, deriv)
}

/// Result of [`ellipticity_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipticity {
    pub elliptic: bool,
    /// `min (1 - 4x f'(x)²)` over the samples.
    pub margin: f64,
}

/// Margins below this count as the boundary case.
const ELLIPTIC_SLACK: f64 = 1e-12;

/// Tests `4x f'(x)² < 1` on `n` uniform samples of `[0, x_max]`
/// (at least 100). Samples where the product is not finite are skipped.
pub fn ellipticity_check(profile: &WeingartenProfile, x_max: f64, n: usize) -> Ellipticity {
    let n = n.max(100);
    let mut margin = f64::INFINITY;
    for k in 0..n {
        let x = x_max * k as f64 / (n - 1) as f64;
        let p = 4.0 * x * profile.fprime(x).powi(2);
        if p.is_finite() {
            margin = margin.min(1.0 - p);
        }
    }
    Ellipticity {
        elliptic: margin > ELLIPTIC_SLACK,
        margin,
    }
}

/// Absolute tolerance of [`phi`].
pub const PHI_TOL: f64 = 1e-10;

/// `φ(t) = ∫₀ᵗ 2 f'(s²) ds` by adaptive quadrature.
pub fn phi(profile: &WeingartenProfile, t: f64) -> Result<f64> {
    profile.check_arg(t)?;
    adaptive(&|s| 2.0 * profile.fprime(s * s), 0.0, t, PHI_TOL)
}

/// Below this argument `sinh φ(t) / t` uses its series in `φ`.
pub const SINHC_SERIES_BELOW: f64 = 1e-4;

/// Tabulated `φ` on `[0, t_max]` with cubic Hermite interpolation.
#[derive(Clone)]
pub struct PhiTable {
    profile: WeingartenProfile,
    t_max: f64,
    step: f64,
    values: Vec<f64>,
    scale: f64,
}

impl fmt::Debug for PhiTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiTable")
            .field("profile", &self.profile)
            .field("t_max", &self.t_max)
            .field("nodes", &self.values.len())
            .field("scale", &self.scale)
            .finish()
    }
}

impl PhiTable {
    pub const DEFAULT_NODES: usize = 2048;

    pub fn new(profile: &WeingartenProfile, t_max: f64, nodes: usize) -> Result<Self> {
        profile.check_arg(t_max)?;
        let nodes = nodes.max(2);
        let step = t_max / (nodes - 1) as f64;
        let mut values = Vec::with_capacity(nodes);
        values.push(0.0);
        let integrand = |s: f64| 2.0 * profile.fprime(s * s);
        for k in 1..nodes {
            let (a, b) = ((k - 1) as f64 * step, k as f64 * step);
            let piece = adaptive(&integrand, a, b, PHI_TOL / nodes as f64)?;
            values.push(values[k - 1] + piece);
        }
        Ok(PhiTable {
            profile: profile.clone(),
            t_max,
            step,
            values,
            scale: 1.0,
        })
    }

    pub fn with_default_nodes(profile: &WeingartenProfile, t_max: f64) -> Result<Self> {
        Self::new(profile, t_max, Self::DEFAULT_NODES)
    }

    /// Same table with `φ` replaced by `k φ` (for negative controls).
    pub fn scaled(&self, k: f64) -> Self {
        PhiTable {
            scale: self.scale * k,
            ..self.clone()
        }
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn profile(&self) -> &WeingartenProfile {
        &self.profile
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.t_max * (1.0 + 1e-12)) {
            return Err(GeomError::DomainExceeded {
                value: t,
                extent: self.t_max,
            });
        }
        Ok(())
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let t = t.min(self.t_max);
        let k = ((t / self.step) as usize).min(self.values.len() - 2);
        let (t0, t1) = (k as f64 * self.step, (k + 1) as f64 * self.step);
        let d = |s: f64| 2.0 * self.profile.fprime(s * s);
        let (v, _) = hermite(
            t,
            (t0, t1),
            (self.values[k], self.values[k + 1]),
            (d(t0), d(t1)),
        );
        Ok(self.scale * v)
    }

    /// `sinh φ(t) / t`, with the limit `φ'(0) = 2 f'(0)` at `t = 0`.
    pub fn sinhc(&self, t: f64) -> Result<f64> {
        if t < SINHC_SERIES_BELOW {
            self.check(t)?;
            // φ(t)/t = ∫₀¹ 2 f'(t² σ²) dσ
            let ratio = self.scale
                * gauss_legendre8(&|s| 2.0 * self.profile.fprime(t * t * s * s), 0.0, 1.0);
            let ph = ratio * t;
            return Ok(ratio * (1.0 + ph * ph / 6.0));
        }
        Ok(self.phi(t)?.sinh() / t)
    }

    /// `φ`, `cosh φ` and `sinh φ / t` at every node of a `t` field.
    pub fn evaluate(&self, t: &ScalarField) -> Result<PhiField> {
        let mut phi = Vec::with_capacity(t.values.len());
        let mut sinhc = Vec::with_capacity(t.values.len());
        for &tv in &t.values {
            phi.push(self.phi(tv)?);
            sinhc.push(self.sinhc(tv)?);
        }
        let d = t.domain;
        let phi = ScalarField::from_values(d, phi);
        Ok(PhiField {
            cosh: phi.map(f64::cosh),
            phi,
            sinhc: ScalarField::from_values(d, sinhc),
            t: t.clone(),
        })
    }
}

/// `φ(t)` and the transform coefficients over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiField {
    pub t: ScalarField,
    pub phi: ScalarField,
    pub cosh: ScalarField,
    /// `sinh φ / t`.
    pub sinhc: ScalarField,
}

impl PhiField {
    /// `t sinh φ = t² sinhc`, exactly zero at umbilics.
    pub fn t_sinh(&self) -> ScalarField {
        self.t.zip_map(&self.sinhc, |t, s| t * t * s)
    }
}

/// `(A, B)` with `H(A, B) = 0` and `K(A, B) = -(H² - K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BryantPair {
    pub a: SymmetricFormField,
    pub b: SymmetricFormField,
}

impl BryantPair {
    pub fn as_pair(&self) -> Result<FundamentalPair> {
        FundamentalPair::from_forms(self.a.clone(), self.b.clone())
    }
}

pub fn bryant_transform(pair: &FundamentalPair, phi: &PhiField) -> Result<BryantPair> {
    let tp = traceless_part(pair);
    let a = SymmetricFormField::combine(&[(&phi.cosh, &pair.first), (&phi.sinhc, &tp)]);
    let b = SymmetricFormField::combine(&[(&phi.t_sinh(), &pair.first), (&phi.cosh, &tp)]);
    for k in 0..a.domain().len() {
        let [e, f, g] = a.at(k);
        let det = e * g - f * f;
        if !(det > 0.0 && e > 0.0) {
            return Err(GeomError::NonRiemannian { index: k, det });
        }
    }
    Ok(BryantPair { a, b })
}

/// Components of `dH - t dφ`.
pub fn closure_residual(curv: &CurvatureData, phi: &ScalarField) -> VectorField {
    let (hu, hv) = (curv.h.d_u(), curv.h.d_v());
    let (pu, pv) = (phi.d_u(), phi.d_v());
    let t = &curv.t;
    let comb = |dh: &ScalarField, dp: &ScalarField| {
        let tdp = t.zip_map(dp, |a, b| a * b);
        dh.zip_map(&tdp, |a, b| a - b)
    };
    VectorField::new(comb(&hu, &pu), comb(&hv, &pv))
}

fn assemble(
    a: &SymmetricFormField,
    b: &SymmetricFormField,
    phi: &PhiField,
    profile: &WeingartenProfile,
) -> Result<FundamentalPair> {
    let minus_sinhc = phi.sinhc.map(|x| -x);
    let minus_tsinh = phi.t_sinh().map(|x| -x);
    let first = SymmetricFormField::combine(&[(&phi.cosh, a), (&minus_sinhc, b)]);
    let traceless = SymmetricFormField::combine(&[(&minus_tsinh, a), (&phi.cosh, b)]);
    let f_of_t = phi.t.map(|t| profile.f(t * t));
    let one = ScalarField::constant(phi.t.domain, 1.0);
    let second = SymmetricFormField::combine(&[(&f_of_t, &first), (&one, &traceless)]);
    FundamentalPair::from_forms(first, second)
}

/// `(I, II)` from a conformal metric `A` and a Hopf coefficient `Q`:
/// `B = Q dz² + Q̄ dz̄²`, `t = |Q| / λ_A`,
/// `I = cosh φ A - (sinh φ / t) B`, `II' = -t sinh φ A + cosh φ B` and
/// `II = f(t²) I + II'`.
pub fn recover_pair(
    a: &SymmetricFormField,
    q: &ComplexField,
    table: &PhiTable,
    tol_iso: f64,
) -> Result<FundamentalPair> {
    let lambda = conformal_factor(a, tol_iso)?;
    let t = q.zip_map(&lambda, |q, l| q.norm() / l);
    let phi = table.evaluate(&t)?;
    assemble(a, &quadratic_differential_form(q), &phi, table.profile())
}

/// Same inversion with `B` given directly and `t = sqrt(-K(A, B))`; no
/// conformality of `A` is needed.
pub fn recover_pair_from_forms(
    bp: &BryantPair,
    table: &PhiTable,
    tol_umb: f64,
) -> Result<FundamentalPair> {
    let curv = curvatures(&bp.as_pair()?, tol_umb)?;
    let t = curv.k.map(|k| (-k).max(0.0).sqrt());
    let phi = table.evaluate(&t)?;
    assemble(&bp.a, &bp.b, &phi, table.profile())
}

/// `g₀ = t A` on the nodes selected by `mask` (all nodes if `None`), which
/// must be free of umbilics.
pub fn flat_metric(
    curv: &CurvatureData,
    a: &SymmetricFormField,
    tol_umb: f64,
    mask: Option<&[bool]>,
) -> Result<SymmetricFormField> {
    let umb = curv.umbilic_mask(tol_umb);
    for (k, &is_umb) in umb.iter().enumerate() {
        if is_umb && mask.is_none_or(|m| m[k]) {
            return Err(GeomError::UmbilicRegion {
                index: k,
                t: curv.t.values[k],
            });
        }
    }
    Ok(a.scaled(&curv.t))
}

/// Result of [`completeness_bound_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompletenessReport {
    /// Per node: `2 cosh φ A - I` is positive semidefinite.
    pub psd: Vec<bool>,
    /// Smallest eigenvalue of `I⁻¹ (2 cosh φ A - I)` over the grid.
    pub min_eigenvalue: f64,
    /// `max cosh φ(t) / t` over nodes with `t ≥ sqrt(c0)`.
    pub c2: Option<f64>,
}

/// Eigenvalues at or above this count as semidefinite.
pub const PSD_SLACK: f64 = -1e-10;

pub fn completeness_bound_check(
    pair: &FundamentalPair,
    a: &SymmetricFormField,
    phi: &PhiField,
    c0: f64,
) -> Result<CompletenessReport> {
    let d = *pair.domain();
    let mut psd = Vec::with_capacity(d.len());
    let mut min_ev = f64::INFINITY;
    let mut c2: Option<f64> = None;
    let t_floor = c0.max(0.0).sqrt();
    for k in 0..d.len() {
        let i = pair.first.matrix(k);
        let m = a.matrix(k) * (2.0 * phi.cosh.values[k]) - i;
        let chol = i.cholesky().ok_or(GeomError::NonRiemannian {
            index: k,
            det: i.determinant(),
        })?;
        let linv = chol.l().try_inverse().ok_or(GeomError::SingularMetric {
            index: k,
            det: i.determinant(),
        })?;
        let sym: Matrix2<f64> = linv * m * linv.transpose();
        let ev = sym.symmetric_eigenvalues().min();
        min_ev = min_ev.min(ev);
        psd.push(ev >= PSD_SLACK);
        let t = phi.t.values[k];
        if t >= t_floor && t > 0.0 {
            let q = phi.cosh.values[k] / t;
            c2 = Some(c2.map_or(q, |c: f64| c.max(q)));
        }
    }
    Ok(CompletenessReport {
        psd,
        min_eigenvalue: min_ev,
        c2,
    })
}

/// Partial derivatives of a relation `W(H, K) = 0`.
#[derive(Clone)]
pub struct WeingartenRelation {
    pub wx: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub wy: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl WeingartenRelation {
    /// `W = x - c`.
    pub fn mean_curvature(_c: f64) -> Self {
        WeingartenRelation {
            wx: Arc::new(|_, _| 1.0),
            wy: Arc::new(|_, _| 0.0),
        }
    }

    /// `W = y - c`.
    pub fn extrinsic_curvature(_c: f64) -> Self {
        WeingartenRelation {
            wx: Arc::new(|_, _| 0.0),
            wy: Arc::new(|_, _| 1.0),
        }
    }

    /// `W = x - f(x² - y)`.
    pub fn profile(profile: &WeingartenProfile) -> Self {
        let (p1, p2) = (profile.clone(), profile.clone());
        WeingartenRelation {
            wx: Arc::new(move |x, y| 1.0 - 2.0 * x * p1.fprime(x * x - y)),
            wy: Arc::new(move |x, y| p2.fprime(x * x - y)),
        }
    }
}

/// `W_x(t, t²) + 2t W_y(t, t²)`.
pub fn weingarten_condition(w: &WeingartenRelation, t: f64) -> f64 {
    (w.wx)(t, t * t) + 2.0 * t * (w.wy)(t, t * t)
}
