//! Parametric charts of immersed surfaces, jet sampling and the first and
//! second fundamental forms.
//!
//! The unit normal is always `N = (Xu x Xv) / |Xu x Xv|`. Fixtures pick the
//! parameter order so that a round sphere of radius `R` has `H = +1/R`,
//! i.e. `N` points to the concave side.

mod fixtures;
pub mod revolution;

use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::grid::Domain2D;

pub use fixtures::{fixture, FIXTURE_NAMES};

pub type Vec3 = Vector3<f64>;
pub type Immersion = Arc<dyn Fn(f64, f64) -> Vec3 + Send + Sync>;
pub type JetFn = Arc<dyn Fn(f64, f64) -> RawJet + Send + Sync>;

/// Position and partial derivatives up to second order, without the normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawJet {
    pub x: Vec3,
    pub xu: Vec3,
    pub xv: Vec3,
    pub xuu: Vec3,
    pub xuv: Vec3,
    pub xvv: Vec3,
}

/// Second-order jet with unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub x: Vec3,
    pub xu: Vec3,
    pub xv: Vec3,
    pub xuu: Vec3,
    pub xuv: Vec3,
    pub xvv: Vec3,
    pub n: Vec3,
}

impl Jet2 {
    pub fn from_raw(raw: RawJet, u: f64, v: f64) -> Result<Self> {
        let c = raw.xu.cross(&raw.xv);
        let norm = c.norm();
        if !(norm >= 1e-12) {
            return Err(GeomError::DegenerateImmersion { u, v, norm });
        }
        Ok(Jet2 {
            x: raw.x,
            xu: raw.xu,
            xv: raw.xv,
            xuu: raw.xuu,
            xuv: raw.xuv,
            xvv: raw.xvv,
            n: c / norm,
        })
    }
}

/// First and second fundamental form coefficients `(E, F, G)`, `(e, f, g)`.
pub type FormCoeffs = [f64; 3];

/// A single-chart parametrised surface in Euclidean 3-space.
#[derive(Clone)]
pub struct Chart {
    pub name: String,
    pub immersion: Immersion,
    pub analytic_jets: Option<JetFn>,
    pub domain: Domain2D,
    /// Declared conformality of the first form; see [`Chart::verify_isothermal`].
    pub isothermal: bool,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("analytic_jets", &self.analytic_jets.is_some())
            .field("isothermal", &self.isothermal)
            .finish()
    }
}

impl Chart {
    pub fn new(name: impl Into<String>, immersion: Immersion, domain: Domain2D) -> Self {
        Chart {
            name: name.into(),
            immersion,
            analytic_jets: None,
            domain,
            isothermal: false,
        }
    }

    pub fn with_jets(mut self, jets: JetFn) -> Self {
        self.analytic_jets = Some(jets);
        self
    }

    pub fn with_isothermal(mut self, flag: bool) -> Self {
        self.isothermal = flag;
        self
    }

    /// Drop the analytic jets so that sampling falls back to finite differences.
    pub fn without_jets(mut self) -> Self {
        self.analytic_jets = None;
        self
    }

    pub fn with_resolution(mut self, nu: usize, nv: usize) -> Result<Self> {
        self.domain = self.domain.with_resolution(nu, nv)?;
        Ok(self)
    }

    /// The same surface in parameters `(a, b)` with
    /// `(u, v) = origin + m (a, b)`, over `domain`.
    pub fn affine(&self, origin: (f64, f64), m: [[f64; 2]; 2], domain: Domain2D) -> Chart {
        let to_uv = move |a: f64, b: f64| {
            (
                origin.0 + m[0][0] * a + m[0][1] * b,
                origin.1 + m[1][0] * a + m[1][1] * b,
            )
        };
        let imm = self.immersion.clone();
        let immersion: Immersion = Arc::new(move |a, b| {
            let (u, v) = to_uv(a, b);
            imm(u, v)
        });
        let mut chart = Chart::new(format!("{}[affine]", self.name), immersion, domain);
        if let Some(jets) = self.analytic_jets.clone() {
            chart = chart.with_jets(Arc::new(move |a, b| {
                let (u, v) = to_uv(a, b);
                let j = jets(u, v);
                let [[ua, ub], [va, vb]] = m;
                RawJet {
                    x: j.x,
                    xu: j.xu * ua + j.xv * va,
                    xv: j.xu * ub + j.xv * vb,
                    xuu: j.xuu * (ua * ua) + j.xuv * (2.0 * ua * va) + j.xvv * (va * va),
                    xuv: j.xuu * (ua * ub) + j.xuv * (ua * vb + va * ub) + j.xvv * (va * vb),
                    xvv: j.xuu * (ub * ub) + j.xuv * (2.0 * ub * vb) + j.xvv * (vb * vb),
                }
            }));
        }
        chart
    }

    /// Jets at every grid node, in grid order.
    pub fn sample_grid(&self) -> Result<Vec<Jet2>> {
        let h = self.domain.default_steps();
        (0..self.domain.len())
            .into_par_iter()
            .map(|k| {
                let (u, v) = self.domain.point(k);
                sample_jet(self, u, v, h)
            })
            .collect()
    }

    /// Fundamental form coefficients at every node.
    pub fn sample_forms(&self) -> Result<Vec<(FormCoeffs, FormCoeffs)>> {
        self.sample_grid()?.iter().map(fundamental_forms).collect()
    }

    /// Relative conformality defect `max(|E-G|, |F|) / E` over the grid.
    pub fn isothermal_defect(&self) -> Result<f64> {
        Ok(self
            .sample_forms()?
            .iter()
            .map(|([e, f, g], _)| (e - g).abs().max(f.abs()) / e)
            .fold(0.0, f64::max))
    }

    pub fn verify_isothermal(&self, tol: f64) -> Result<()> {
        let defect = self.isothermal_defect()?;
        if defect < tol {
            Ok(())
        } else {
            Err(GeomError::NotIsothermal { defect, tol })
        }
    }
}

/// Jet of the immersion at `(u, v)`.
///
/// Uses the analytic jets when present, otherwise fourth-order finite
/// differences with steps `h = (hu, hv)`; non-periodic directions switch to
/// one-sided stencils when the central stencil would leave the domain.
pub fn sample_jet(chart: &Chart, u: f64, v: f64, h: (f64, f64)) -> Result<Jet2> {
    if let Some(jets) = &chart.analytic_jets {
        return Jet2::from_raw(jets(u, v), u, v);
    }
    let (hu, hv) = h;
    if !(hu > 0.0 && hv > 0.0) {
        return Err(GeomError::InvalidDomain(format!(
            "finite-difference steps must be positive, got ({hu}, {hv})"
        )));
    }
    let d = &chart.domain;
    let x = &chart.immersion;
    let su = Stencil1d::new(u, hu, d.u_min, d.u_max, d.u_periodic);
    let sv = Stencil1d::new(v, hv, d.v_min, d.v_max, d.v_periodic);
    let xu = su.first(&|s| x(s, v));
    let xv = sv.first(&|t| x(u, t));
    let xuu = su.second(&|s| x(s, v));
    let xvv = sv.second(&|t| x(u, t));
    let xuv = su.first(&|s| sv.first(&|t| x(s, t)));
    let raw = RawJet {
        x: x(u, v),
        xu,
        xv,
        xuu,
        xuv,
        xvv,
    };
    Jet2::from_raw(raw, u, v)
}

/// `(E, F, G)` and `(e, f, g)` of a jet.
pub fn fundamental_forms(jet: &Jet2) -> Result<(FormCoeffs, FormCoeffs)> {
    let e_ = jet.xu.dot(&jet.xu);
    let f_ = jet.xu.dot(&jet.xv);
    let g_ = jet.xv.dot(&jet.xv);
    let det = e_ * g_ - f_ * f_;
    if !(det > 0.0) {
        return Err(GeomError::NonRiemannian { index: 0, det });
    }
    Ok((
        [e_, f_, g_],
        [
            jet.xuu.dot(&jet.n),
            jet.xuv.dot(&jet.n),
            jet.xvv.dot(&jet.n),
        ],
    ))
}

/// Offsets (in units of h) and weights for a 1D fourth-order stencil.
struct Stencil1d {
    x: f64,
    h: f64,
    // -1: backward one-sided, 0: central, 1: forward one-sided
    side: i8,
}

impl Stencil1d {
    fn new(x: f64, h: f64, lo: f64, hi: f64, periodic: bool) -> Self {
        let side = if periodic {
            0
        } else if x - 2.0 * h < lo {
            1
        } else if x + 2.0 * h > hi {
            -1
        } else {
            0
        };
        Stencil1d { x, h, side }
    }

    fn first(&self, f: &dyn Fn(f64) -> Vec3) -> Vec3 {
        let h = self.h;
        match self.side {
            0 => {
                (f(self.x - 2.0 * h) - f(self.x - h) * 8.0 + f(self.x + h) * 8.0
                    - f(self.x + 2.0 * h))
                    / (12.0 * h)
            }
            s => {
                let dir = s as f64;
                let w = [-25.0, 48.0, -36.0, 16.0, -3.0];
                let mut acc = Vec3::zeros();
                for (k, wk) in w.iter().enumerate() {
                    acc += f(self.x + dir * k as f64 * h) * *wk;
                }
                acc * dir / (12.0 * h)
            }
        }
    }

    fn second(&self, f: &dyn Fn(f64) -> Vec3) -> Vec3 {
        let h = self.h;
        match self.side {
            0 => {
                (f(self.x - 2.0 * h) * -1.0 + f(self.x - h) * 16.0 - f(self.x) * 30.0
                    + f(self.x + h) * 16.0
                    - f(self.x + 2.0 * h))
                    / (12.0 * h * h)
            }
            s => {
                let dir = s as f64;
                let w = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
                let mut acc = Vec3::zeros();
                for (k, wk) in w.iter().enumerate() {
                    acc += f(self.x + dir * k as f64 * h) * *wk;
                }
                acc / (12.0 * h * h)
            }
        }
    }
}
