//! Surfaces of revolution about the z-axis.
//!
//! A meridian `p -> (r(p), z(p))` traversed with `z' > 0` gives, through
//! `X(p, v) = (r cos v, r sin v, z)`, a normal pointing towards the axis.
//! Besides the direct chart, a meridian can be reparametrised by any
//! positive density `dq/dp`, which is how the isothermal (`|c'| / r`) and
//! second-form isothermal (`sqrt(e/g)`) charts are built.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{Chart, RawJet, Vec3};
use crate::error::{GeomError, Result};
use crate::grid::Domain2D;
use crate::quad::gauss_legendre8;

/// Meridian position and derivatives with respect to its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub r: f64,
    pub z: f64,
    pub dr: f64,
    pub dz: f64,
    pub ddr: f64,
    pub ddz: f64,
}

impl CurvePoint {
    pub fn speed(&self) -> f64 {
        self.dr.hypot(self.dz)
    }

    /// `e` coefficient of the second form in the `(p, v)` chart.
    pub fn e_pp(&self) -> f64 {
        (self.dr * self.ddz - self.dz * self.ddr) / self.speed()
    }

    /// `g` coefficient of the second form in the `(p, v)` chart.
    pub fn g_vv(&self) -> f64 {
        self.r * self.dz / self.speed()
    }
}

pub trait ProfileCurve: Send + Sync {
    fn eval(&self, p: f64) -> CurvePoint;
}

pub type Density = Arc<dyn Fn(&CurvePoint) -> f64 + Send + Sync>;

/// Density of the chart conformal for the first form.
pub fn isothermal_density() -> Density {
    Arc::new(|c: &CurvePoint| c.speed() / c.r)
}

/// Density of the chart conformal for the second form (requires `e g > 0`).
pub fn ii_isothermal_density() -> Density {
    Arc::new(|c: &CurvePoint| (c.e_pp() / c.g_vv()).sqrt())
}

pub fn revolution_jet(c: &CurvePoint, v: f64) -> RawJet {
    let (s, co) = v.sin_cos();
    RawJet {
        x: Vec3::new(c.r * co, c.r * s, c.z),
        xu: Vec3::new(c.dr * co, c.dr * s, c.dz),
        xv: Vec3::new(-c.r * s, c.r * co, 0.0),
        xuu: Vec3::new(c.ddr * co, c.ddr * s, c.ddz),
        xuv: Vec3::new(-c.dr * s, c.dr * co, 0.0),
        xvv: Vec3::new(-c.r * co, -c.r * s, 0.0),
    }
}

/// Direct `(p, v)` chart with analytic jets.
pub fn direct_chart(
    name: &str,
    curve: Arc<dyn ProfileCurve>,
    (p_lo, p_hi): (f64, f64),
    (nu, nv): (usize, usize),
) -> Result<Chart> {
    let domain = Domain2D::new(
        (p_lo, p_hi),
        (0.0, std::f64::consts::TAU),
        (false, true),
        (nu, nv),
    )?;
    let c1 = curve.clone();
    let immersion = Arc::new(move |p: f64, v: f64| {
        let c = c1.eval(p);
        Vec3::new(c.r * v.cos(), c.r * v.sin(), c.z)
    });
    let jets = Arc::new(move |p: f64, v: f64| revolution_jet(&curve.eval(p), v));
    Ok(Chart::new(name, immersion, domain).with_jets(jets))
}

/// Monotone reparametrisation `q(p) = ∫ density dp` of a meridian, tabulated
/// on `[p_lo, p_hi]` and inverted by safeguarded Newton iteration.
pub struct Reparam {
    curve: Arc<dyn ProfileCurve>,
    density: Density,
    nodes: Vec<f64>,
    q_nodes: Vec<f64>,
}

impl Reparam {
    pub fn new(
        curve: Arc<dyn ProfileCurve>,
        density: Density,
        (p_lo, p_hi): (f64, f64),
        intervals: usize,
    ) -> Result<Self> {
        let intervals = intervals.max(16);
        let h = (p_hi - p_lo) / intervals as f64;
        let nodes: Vec<f64> = (0..=intervals).map(|k| p_lo + k as f64 * h).collect();
        let rho = |p: f64| density(&curve.eval(p));
        let mut q_nodes = Vec::with_capacity(nodes.len());
        q_nodes.push(0.0);
        for w in nodes.windows(2) {
            let d0 = rho(w[0]);
            if !(d0 > 0.0 && d0.is_finite()) {
                return Err(GeomError::BadParams {
                    name: "reparam".into(),
                    reason: format!("density {d0} is not positive at p = {}", w[0]),
                });
            }
            let last = *q_nodes.last().unwrap();
            q_nodes.push(last + gauss_legendre8(&rho, w[0], w[1]));
        }
        Ok(Reparam {
            curve,
            density,
            nodes,
            q_nodes,
        })
    }

    pub fn q_range(&self) -> (f64, f64) {
        (self.q_nodes[0], *self.q_nodes.last().unwrap())
    }

    pub fn curve(&self) -> &Arc<dyn ProfileCurve> {
        &self.curve
    }

    fn rho(&self, p: f64) -> f64 {
        (self.density)(&self.curve.eval(p))
    }

    pub fn q_of_p(&self, p: f64) -> f64 {
        let k = self.interval_of(&self.nodes, p);
        self.q_nodes[k] + gauss_legendre8(&|x| self.rho(x), self.nodes[k], p)
    }

    fn interval_of(&self, table: &[f64], x: f64) -> usize {
        let k = table.partition_point(|&t| t <= x);
        k.clamp(1, table.len() - 1) - 1
    }

    pub fn p_of_q(&self, q: f64) -> f64 {
        let k = self.interval_of(&self.q_nodes, q);
        let (mut lo, mut hi) = (self.nodes[k], self.nodes[k + 1]);
        let (q0, q1) = (self.q_nodes[k], self.q_nodes[k + 1]);
        let mut p = lo + (hi - lo) * (q - q0) / (q1 - q0);
        for _ in 0..60 {
            let r = self.q_of_p(p) - q;
            if r > 0.0 {
                hi = hi.min(p);
            } else {
                lo = lo.max(p);
            }
            let mut next = p - r / self.rho(p);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - p).abs() <= 1e-15 * (1.0 + p.abs()) {
                return next;
            }
            p = next;
        }
        p
    }
}

/// `(r, z)` at parameter `q`, memoised on the exact bit pattern of `q`:
/// finite-difference stencils revisit the same meridian parameter once per
/// azimuth, and each inversion of `q(p)` costs several quadratures.
struct MeridianMemo {
    reparam: Arc<Reparam>,
    cache: Mutex<HashMap<u64, (f64, f64)>>,
}

impl MeridianMemo {
    fn new(reparam: Arc<Reparam>) -> Self {
        MeridianMemo {
            reparam,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn at(&self, q: f64) -> (f64, f64) {
        let key = q.to_bits();
        if let Some(&rz) = self.cache.lock().expect("memo lock").get(&key) {
            return rz;
        }
        let c = self.reparam.curve().eval(self.reparam.p_of_q(q));
        self.cache
            .lock()
            .expect("memo lock")
            .insert(key, (c.r, c.z));
        (c.r, c.z)
    }
}

/// Chart `(q, v)` for a reparametrised meridian; jets by finite differences.
pub fn reparam_chart(
    name: &str,
    reparam: Arc<Reparam>,
    (q_lo, q_hi): (f64, f64),
    (nu, nv): (usize, usize),
) -> Result<Chart> {
    let domain = Domain2D::new(
        (q_lo, q_hi),
        (0.0, std::f64::consts::TAU),
        (false, true),
        (nu, nv),
    )?;
    let memo = MeridianMemo::new(reparam);
    let immersion = Arc::new(move |q: f64, v: f64| {
        let (r, z) = memo.at(q);
        Vec3::new(r * v.cos(), r * v.sin(), z)
    });
    Ok(Chart::new(name, immersion, domain))
}

/// Conformal Cartesian chart centred on the upper pole of the meridian.
///
/// `reparam` must use [`isothermal_density`]; the point `(x, y)` sits at
/// `q = q_ref - ln|(x, y)|` and azimuth `-atan2(y, x)`.
pub fn pole_chart(
    name: &str,
    reparam: Arc<Reparam>,
    q_ref: f64,
    half_width: f64,
    n: usize,
) -> Result<Chart> {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let domain = Domain2D::new(
        (-half_width, half_width),
        (-half_width, half_width),
        (false, false),
        (n, n),
    )?;
    let memo = MeridianMemo::new(reparam);
    let immersion = Arc::new(move |x: f64, y: f64| {
        let rho = x.hypot(y);
        let (r, z) = memo.at(q_ref - rho.ln());
        Vec3::new(r * x / rho, -r * y / rho, z)
    });
    Ok(Chart::new(name, immersion, domain))
}

/// Spheroid `(b cos u, a sin u)` in the latitude parameter `u`.
pub struct SpheroidLatitude {
    pub polar: f64,
    pub equatorial: f64,
}

impl ProfileCurve for SpheroidLatitude {
    fn eval(&self, u: f64) -> CurvePoint {
        let (s, c) = u.sin_cos();
        let (a, b) = (self.polar, self.equatorial);
        CurvePoint {
            r: b * c,
            z: a * s,
            dr: -b * s,
            dz: a * c,
            ddr: -b * c,
            ddz: -a * s,
        }
    }
}

/// Spheroid in the Mercator-type parameter `σ` with `sin u = tanh σ`;
/// regular up to the poles, which sit at `σ = ±∞`.
pub struct SpheroidMercator {
    pub polar: f64,
    pub equatorial: f64,
}

impl ProfileCurve for SpheroidMercator {
    fn eval(&self, s: f64) -> CurvePoint {
        let (a, b) = (self.polar, self.equatorial);
        let t = s.tanh();
        let sech = 1.0 / s.cosh();
        let sech2 = sech * sech;
        CurvePoint {
            r: b * sech,
            z: a * t,
            dr: -b * sech * t,
            dz: a * sech2,
            ddr: -b * sech * (sech2 - t * t),
            ddz: -2.0 * a * sech2 * t,
        }
    }
}

/// Generic meridian of a sphere of radius `R` in colatitude from the lower pole.
pub struct SphereColatitude {
    pub radius: f64,
}

impl ProfileCurve for SphereColatitude {
    fn eval(&self, u: f64) -> CurvePoint {
        let (s, c) = u.sin_cos();
        let r = self.radius;
        CurvePoint {
            r: r * s,
            z: -r * c,
            dr: r * c,
            dz: r * s,
            ddr: -r * s,
            ddz: r * c,
        }
    }
}

pub struct CatenoidMeridian {
    pub scale: f64,
}

impl ProfileCurve for CatenoidMeridian {
    fn eval(&self, u: f64) -> CurvePoint {
        let a = self.scale;
        CurvePoint {
            r: a * u.cosh(),
            z: a * u,
            dr: a * u.sinh(),
            dz: a,
            ddr: a * u.cosh(),
            ddz: 0.0,
        }
    }
}

/// Meridian circle of a torus of revolution.
pub struct TorusMeridian {
    pub major: f64,
    pub minor: f64,
}

impl ProfileCurve for TorusMeridian {
    fn eval(&self, u: f64) -> CurvePoint {
        let (s, c) = u.sin_cos();
        let (rr, r) = (self.major, self.minor);
        CurvePoint {
            r: rr + r * c,
            z: r * s,
            dr: -r * s,
            dz: r * c,
            ddr: -r * c,
            ddz: -r * s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mercator_derivatives_match_finite_differences() {
        let c = SpheroidMercator {
            polar: 2.0,
            equatorial: 1.0,
        };
        let s = 0.37;
        let h = 1e-5;
        let p = c.eval(s);
        let (m, pl) = (c.eval(s - h), c.eval(s + h));
        assert!(((pl.r - m.r) / (2.0 * h) - p.dr).abs() < 1e-8);
        assert!(((pl.z - m.z) / (2.0 * h) - p.dz).abs() < 1e-8);
        assert!(((pl.dr - m.dr) / (2.0 * h) - p.ddr).abs() < 1e-8);
        assert!(((pl.dz - m.dz) / (2.0 * h) - p.ddz).abs() < 1e-8);
    }

    #[test]
    fn reparam_inverts_its_table() {
        let curve: Arc<dyn ProfileCurve> = Arc::new(SpheroidMercator {
            polar: 2.0,
            equatorial: 1.0,
        });
        let rp = Reparam::new(curve, isothermal_density(), (-2.0, 10.0), 512).unwrap();
        for &p in &[-1.9, -0.3, 0.0, 2.2, 9.5] {
            let q = rp.q_of_p(p);
            assert!((rp.p_of_q(q) - p).abs() < 1e-12);
        }
        // for a sphere the isothermal coordinate is the Mercator parameter itself
        let sphere: Arc<dyn ProfileCurve> = Arc::new(SpheroidMercator {
            polar: 1.0,
            equatorial: 1.0,
        });
        let rp = Reparam::new(sphere, isothermal_density(), (-1.0, 1.0), 64).unwrap();
        assert!((rp.q_of_p(0.5) - 1.5).abs() < 1e-13);
    }
}
