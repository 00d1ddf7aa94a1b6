//! Rotational surfaces satisfying `H = f(H² - K)`.
//!
//! The meridian is parametrised by arc length with tangent angle `θ`:
//! `r' = cos θ`, `z' = sin θ`, `θ' = κ₁`, and the parallel curvature is
//! `κ₂ = sin θ / r`. The normal `(-sin θ e_r, cos θ)` matches the chart
//! convention, so a pole start with `θ = 0` and `f(0) > 0` bends upwards.

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bryant::{ellipticity_check, PhiTable, WeingartenProfile};
use crate::chart::revolution::{
    direct_chart, ii_isothermal_density, isothermal_density, reparam_chart, CurvePoint, Density,
    ProfileCurve, Reparam,
};
use crate::chart::Chart;
use crate::error::{GeomError, Result};

/// Radius `1 / |f(0)|` of the totally umbilical sphere of the family.
pub fn umbilic_sphere_radius(profile: &WeingartenProfile) -> Result<f64> {
    let h0 = profile.f(0.0);
    if h0 == 0.0 {
        return Err(GeomError::MinimalType);
    }
    Ok(1.0 / h0.abs())
}

/// Iteration cap of [`solve_kappa1`].
pub const MAX_KAPPA_ITERATIONS: usize = 200;
const KAPPA_TOL: f64 = 1e-13;

/// Solves `κ₁ = 2 f(((κ₁ - κ₂)/2)²) - κ₂` by a damped fixed-point iteration
/// started at `guess`.
pub fn solve_kappa1(profile: &WeingartenProfile, kappa2: f64, guess: f64) -> Result<f64> {
    let g = |k: f64| {
        let half = 0.5 * (k - kappa2);
        let x = half * half;
        (2.0 * profile.f(x) - kappa2, 2.0 * half * profile.fprime(x))
    };
    let mut k = guess;
    let mut step = f64::INFINITY;
    for _ in 0..MAX_KAPPA_ITERATIONS {
        let (gk, slope) = g(k);
        let res = gk - k;
        if !res.is_finite() {
            break;
        }
        if res.abs() <= KAPPA_TOL * k.abs().max(1.0) {
            // a root with |g'| >= 1 lies outside the elliptic range
            if slope.abs() >= 1.0 {
                break;
            }
            return Ok(k);
        }
        let damping = 1.0 / (1.0 - slope.clamp(-0.9, 0.9));
        step = damping * res;
        k += step;
    }
    Err(GeomError::NoConvergence {
        iterations: MAX_KAPPA_ITERATIONS,
        step: step.abs(),
    })
}

/// A point of the meridian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileState {
    pub s: f64,
    pub r: f64,
    pub z: f64,
    pub theta: f64,
}

impl ProfileState {
    /// Lower pole of a cap, tangent horizontal.
    pub fn pole(z: f64) -> Self {
        ProfileState {
            s: 0.0,
            r: 0.0,
            z,
            theta: 0.0,
        }
    }
}

/// Sampled meridian of a generated surface.
#[derive(Debug, Clone)]
pub struct RotationalSurface {
    /// Samples at uniform spacing `ds`; the first and last may be partial
    /// steps (cuts, closure).
    pub states: Vec<ProfileState>,
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
    pub profile: WeingartenProfile,
    pub ds: f64,
    /// The meridian reached the axis regularly at its last sample.
    pub closed: bool,
    /// Richardson estimate of the global error in `(r, z, θ)`.
    pub error_estimate: f64,
}

/// Default step `1e-3 R`.
pub fn default_step(profile: &WeingartenProfile) -> Result<f64> {
    Ok(1e-3 * umbilic_sphere_radius(profile)?)
}

#[derive(Clone, Copy)]
struct Y {
    r: f64,
    z: f64,
    th: f64,
}

struct Integrator<'a> {
    profile: &'a WeingartenProfile,
    /// Last solved `κ₁`, the continuation guess.
    guess: f64,
}

impl Integrator<'_> {
    fn curvatures(&mut self, y: Y) -> Result<(f64, f64)> {
        if y.r <= 0.0 {
            let k = self.profile.f(0.0);
            return Ok((k, k));
        }
        let k2 = y.th.sin() / y.r;
        let k1 = solve_kappa1(self.profile, k2, self.guess)?;
        self.guess = k1;
        Ok((k1, k2))
    }

    fn rhs(&mut self, y: Y) -> Result<Y> {
        let (k1, _) = self.curvatures(y)?;
        Ok(Y {
            r: y.th.cos(),
            z: y.th.sin(),
            th: k1,
        })
    }

    fn rk4(&mut self, y: Y, h: f64) -> Result<Y> {
        let add = |a: Y, b: Y, c: f64| Y {
            r: a.r + c * b.r,
            z: a.z + c * b.z,
            th: a.th + c * b.th,
        };
        let start = self.guess;
        let k1 = self.rhs(y)?;
        let k2 = self.rhs(add(y, k1, 0.5 * h))?;
        let k3 = self.rhs(add(y, k2, 0.5 * h))?;
        let k4 = self.rhs(add(y, k3, h))?;
        let out = Y {
            r: y.r + h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r),
            z: y.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
            th: y.th + h / 6.0 * (k1.th + 2.0 * k2.th + 2.0 * k3.th + k4.th),
        };
        // keep the continuation anchored at the step start, not the last stage
        self.guess = start;
        Ok(out)
    }
}

enum Advance {
    Reached(Y),
    /// Closed at the axis after this arc length.
    Closed(Y, f64),
}

/// Fraction of `ds` below which an approaching meridian is extrapolated to
/// the axis.
const CLOSE_RADIUS: f64 = 0.05;
/// `|sin θ|` allowed at the axis for a regular closure.
const CLOSE_SINE: f64 = 1e-2;
const MAX_SUBSTEPS: usize = 100_000;

struct RawProfile {
    states: Vec<ProfileState>,
    kappa1: Vec<f64>,
    kappa2: Vec<f64>,
    closed: bool,
}

fn integrate_raw(
    profile: &WeingartenProfile,
    init: ProfileState,
    s_max: f64,
    ds: f64,
) -> Result<RawProfile> {
    if !(ds > 0.0) || !(s_max > init.s) || !(init.r >= 0.0) {
        return Err(GeomError::BadParams {
            name: "integrate_profile".into(),
            reason: format!(
                "need ds > 0, s_max > s0 and r0 >= 0 (ds = {ds}, s_max = {s_max}, r0 = {})",
                init.r
            ),
        });
    }
    if init.r == 0.0 && !(init.theta.sin().abs() < 1e-12 && init.theta.cos() > 0.0) {
        return Err(GeomError::BadParams {
            name: "integrate_profile".into(),
            reason: "a pole start needs a horizontal tangent pointing away from the axis".into(),
        });
    }
    let mut it = Integrator {
        profile,
        guess: 2.0 * profile.f(0.0)
            - if init.r > 0.0 {
                init.theta.sin() / init.r
            } else {
                profile.f(0.0)
            },
    };
    let mut y = Y {
        r: init.r,
        z: init.z,
        th: init.theta,
    };
    let (k1, k2) = it.curvatures(y)?;
    let mut out = RawProfile {
        states: vec![init],
        kappa1: vec![k1],
        kappa2: vec![k2],
        closed: false,
    };
    let steps = ((s_max - init.s) / ds).ceil() as usize;
    let close_r = CLOSE_RADIUS * ds;
    for n in 1..=steps {
        let s_prev = init.s + (n - 1) as f64 * ds;
        let h_full = ds.min(s_max - s_prev);
        match advance(&mut it, y, h_full, ds, close_r)? {
            Advance::Reached(next) => {
                y = next;
                if y.r < 0.0 {
                    return Err(GeomError::AxisCollision {
                        s: s_prev + h_full,
                        theta: y.th,
                    });
                }
                let (k1, k2) = it.curvatures(y)?;
                out.states.push(ProfileState {
                    s: s_prev + h_full,
                    r: y.r,
                    z: y.z,
                    theta: y.th,
                });
                out.kappa1.push(k1);
                out.kappa2.push(k2);
            }
            Advance::Closed(end, used) => {
                let k = profile.f(0.0);
                out.states.push(ProfileState {
                    s: s_prev + used,
                    r: 0.0,
                    z: end.z,
                    theta: end.th,
                });
                out.kappa1.push(k);
                out.kappa2.push(k);
                out.closed = true;
                break;
            }
        }
    }
    Ok(out)
}

fn advance(
    it: &mut Integrator<'_>,
    mut y: Y,
    h_full: f64,
    ds: f64,
    close_r: f64,
) -> Result<Advance> {
    let mut done = 0.0;
    for _ in 0..MAX_SUBSTEPS {
        let rem = h_full - done;
        if rem <= 1e-15 * ds {
            return Ok(Advance::Reached(y));
        }
        let approaching = y.th.cos() < 0.0;
        if approaching && y.r < close_r {
            let (st, ct) = y.th.sin_cos();
            if st.abs() > CLOSE_SINE {
                return Err(GeomError::AxisCollision {
                    s: done,
                    theta: y.th,
                });
            }
            // the remaining arc is nearly straight and sin θ falls linearly to 0
            let len = y.r / -ct;
            let (k1, _) = it.curvatures(y)?;
            let end = Y {
                r: 0.0,
                z: y.z + 0.5 * len * st,
                th: y.th + k1 * len,
            };
            return Ok(Advance::Closed(end, done + len));
        }
        let h = if approaching && y.r < 4.0 * ds {
            rem.min(0.25 * y.r)
        } else {
            rem
        };
        y = it.rk4(y, h)?;
        done += h;
    }
    Err(GeomError::NoConvergence {
        iterations: MAX_SUBSTEPS,
        step: h_full - done,
    })
}

/// Integrates the meridian from `init` up to arc length `s_max` (or until it
/// closes on the axis), with RK4 at step `ds` and a second pass at `ds / 2`
/// for the Richardson error estimate.
pub fn integrate_profile(
    profile: &WeingartenProfile,
    init: ProfileState,
    s_max: f64,
    ds: f64,
) -> Result<RotationalSurface> {
    let coarse = integrate_raw(profile, init, s_max, ds)?;
    let fine = integrate_raw(profile, init, s_max, 0.5 * ds)?;
    let mut diff: f64 = 0.0;
    let shared = coarse.states.len() - usize::from(coarse.closed);
    for (k, a) in coarse.states.iter().take(shared).enumerate() {
        if let Some(b) = fine.states.get(2 * k) {
            diff = diff
                .max((a.r - b.r).abs())
                .max((a.z - b.z).abs())
                .max((a.theta - b.theta).abs());
        }
    }
    if coarse.closed && fine.closed {
        let (a, b) = (coarse.states.last().unwrap(), fine.states.last().unwrap());
        diff = diff.max((a.z - b.z).abs()).max((a.s - b.s).abs());
    }
    Ok(RotationalSurface {
        states: coarse.states,
        kappa1: coarse.kappa1,
        kappa2: coarse.kappa2,
        profile: profile.clone(),
        ds,
        closed: coarse.closed,
        error_estimate: diff / 15.0,
    })
}

/// Cap grown from the lower pole at height `z0`; integrates until closure
/// or `s_max`.
pub fn integrate_cap(profile: &WeingartenProfile, s_max: f64) -> Result<RotationalSurface> {
    integrate_profile(
        profile,
        ProfileState::pole(0.0),
        s_max,
        default_step(profile)?,
    )
}

impl RotationalSurface {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn mean_curvature(&self, k: usize) -> f64 {
        0.5 * (self.kappa1[k] + self.kappa2[k])
    }

    pub fn extrinsic_curvature(&self, k: usize) -> f64 {
        self.kappa1[k] * self.kappa2[k]
    }

    /// `max |H - f(H² - K)|` over the samples.
    pub fn weingarten_residual(&self) -> f64 {
        (0..self.len())
            .map(|k| {
                let half = 0.5 * (self.kappa1[k] - self.kappa2[k]);
                (self.mean_curvature(k) - self.profile.f(half * half)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `t = |κ₁ - κ₂| / 2` along the meridian.
    pub fn max_t(&self) -> f64 {
        self.kappa1
            .iter()
            .zip(&self.kappa2)
            .map(|(a, b)| 0.5 * (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn height(&self) -> f64 {
        let (lo, hi) = self
            .states
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.z), hi.max(s.z))
            });
        hi - lo
    }

    pub fn s_range(&self) -> (f64, f64) {
        (self.states[0].s, self.states.last().unwrap().s)
    }

    /// Writes `s,r,z,theta,kappa1,kappa2,H,K`.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "s,r,z,theta,kappa1,kappa2,H,K")?;
        for (k, st) in self.states.iter().enumerate() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                st.s,
                st.r,
                st.z,
                st.theta,
                self.kappa1[k],
                self.kappa2[k],
                self.mean_curvature(k),
                self.extrinsic_curvature(k)
            )?;
        }
        Ok(())
    }

    /// Dense evaluation of the meridian.
    pub fn curve(&self) -> Arc<MeridianFlow> {
        Arc::new(MeridianFlow {
            s: self.states.iter().map(|st| st.s).collect(),
            states: self
                .states
                .iter()
                .map(|st| Y {
                    r: st.r,
                    z: st.z,
                    th: st.theta,
                })
                .collect(),
            kappa1: self.kappa1.clone(),
            profile: self.profile.clone(),
            max_step: 0.5 * self.ds,
        })
    }

    /// Portion at or above `z = plane_z`, starting at the first upward
    /// crossing of the plane.
    pub fn cut_above(&self, plane_z: f64) -> Result<RotationalSurface> {
        let k = self
            .states
            .windows(2)
            .position(|w| w[0].z < plane_z && w[1].z >= plane_z)
            .ok_or_else(|| GeomError::BadParams {
                name: "cut_above".into(),
                reason: format!("meridian does not cross z = {plane_z} upwards"),
            })?;
        let curve = self.curve();
        let (mut lo, mut hi) = (self.states[k].s, self.states[k + 1].s);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if curve.eval(mid).z < plane_z {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        let c = curve.eval(hi);
        let theta = c.dz.atan2(c.dr);
        let k1 = solve_kappa1(&self.profile, theta.sin() / c.r, self.kappa1[k + 1])?;
        let mut states = vec![ProfileState {
            s: hi,
            r: c.r,
            z: plane_z,
            theta,
        }];
        let mut kappa1 = vec![k1];
        let mut kappa2 = vec![theta.sin() / c.r];
        states.extend_from_slice(&self.states[k + 1..]);
        kappa1.extend_from_slice(&self.kappa1[k + 1..]);
        kappa2.extend_from_slice(&self.kappa2[k + 1..]);
        Ok(RotationalSurface {
            states,
            kappa1,
            kappa2,
            profile: self.profile.clone(),
            ds: self.ds,
            closed: self.closed,
            error_estimate: self.error_estimate,
        })
    }
}

/// Meridian between samples, obtained by integrating the profile ODE from
/// the nearest stored sample. Exact at the samples and smooth in between,
/// which keeps high derivatives of chart data free of knot artefacts.
pub struct MeridianFlow {
    s: Vec<f64>,
    states: Vec<Y>,
    kappa1: Vec<f64>,
    profile: WeingartenProfile,
    max_step: f64,
}

impl MeridianFlow {
    fn state_at(&self, p: f64) -> Result<(Y, f64)> {
        let k = self.s.partition_point(|&s| s <= p);
        let k = match k {
            0 => 0,
            k if k == self.s.len() => k - 1,
            k if p - self.s[k - 1] <= self.s[k] - p => k - 1,
            k => k,
        };
        let mut it = Integrator {
            profile: &self.profile,
            guess: self.kappa1[k],
        };
        let mut y = self.states[k];
        let span = p - self.s[k];
        if span != 0.0 {
            let n = (span.abs() / self.max_step).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                y = it.rk4(y, h)?;
            }
        }
        let (k1, _) = it.curvatures(y)?;
        Ok((y, k1))
    }
}

impl ProfileCurve for MeridianFlow {
    fn eval(&self, p: f64) -> CurvePoint {
        let (y, k1) = self.state_at(p).unwrap_or((
            Y {
                r: f64::NAN,
                z: f64::NAN,
                th: f64::NAN,
            },
            f64::NAN,
        ));
        let (sn, cs) = y.th.sin_cos();
        CurvePoint {
            r: y.r,
            z: y.z,
            dr: cs,
            dz: sn,
            ddr: -sn * k1,
            ddz: cs * k1,
        }
    }
}

/// Parameter of the meridian in a chart built by [`as_chart`].
#[derive(Clone, Debug)]
pub enum ChartKind {
    /// `(s, v)`, analytic jets from the interpolant.
    ArcLength,
    /// `dw = ds / r`, conformal for the first form.
    Isothermal,
    /// Conformal for `A = cosh φ I + (sinh φ / t) II'` of the given table.
    AIsothermal(PhiTable),
    /// Conformal for the second form (needs `K > 0`).
    IiIsothermal,
}

/// Reparametrised charts refuse ranges with `r` below this fraction of the
/// largest radius.
pub const AXIS_CLEARANCE: f64 = 1e-3;
const REPARAM_INTERVALS: usize = 1024;

/// Chart `(p, v) -> (r cos v, r sin v, z)` over the arc-length range
/// `[s_lo, s_hi]` of the generated meridian.
pub fn as_chart(
    surface: &RotationalSurface,
    kind: &ChartKind,
    (s_lo, s_hi): (f64, f64),
    grid: (usize, usize),
) -> Result<Chart> {
    let (a, b) = surface.s_range();
    if !(a <= s_lo && s_lo < s_hi && s_hi <= b) {
        return Err(GeomError::InvalidDomain(format!(
            "arc-length range [{s_lo}, {s_hi}] outside the meridian [{a}, {b}]"
        )));
    }
    let curve = surface.curve();
    let name = format!("rotgen[{}]", surface.profile.label());
    let density: Density = match kind {
        ChartKind::ArcLength => return direct_chart(&name, curve, (s_lo, s_hi), grid),
        ChartKind::Isothermal => isothermal_density(),
        ChartKind::IiIsothermal => ii_isothermal_density(),
        ChartKind::AIsothermal(table) => {
            let table = table.clone();
            Arc::new(move |c: &CurvePoint| {
                let speed2 = c.dr * c.dr + c.dz * c.dz;
                let k1 = c.e_pp() / speed2;
                let k2 = c.dz / (c.r * speed2.sqrt());
                let half = 0.5 * (k1 - k2);
                let phi = table.phi(half.abs()).unwrap_or(f64::NAN).copysign(half);
                phi.exp() * speed2.sqrt() / c.r
            })
        }
    };
    // the finite-difference jets look slightly past the chart edges
    let pad = (0.02 * (s_hi - s_lo)).min(s_lo - a).min(b - s_hi).max(0.0);
    let r_max = surface.states.iter().map(|s| s.r).fold(0.0, f64::max);
    let n_probe = 4096;
    for k in 0..=n_probe {
        let p = s_lo - pad + (s_hi - s_lo + 2.0 * pad) * k as f64 / n_probe as f64;
        let r = curve.eval(p).r;
        if r < AXIS_CLEARANCE * r_max {
            return Err(GeomError::AxisProximity { r });
        }
    }
    if let ChartKind::AIsothermal(table) = kind {
        let t = surface.max_t();
        if t > table.t_max() {
            return Err(GeomError::DomainExceeded {
                value: t,
                extent: table.t_max(),
            });
        }
    }
    let rp = Reparam::new(curve, density, (s_lo - pad, s_hi + pad), REPARAM_INTERVALS)?;
    let range = (rp.q_of_p(s_lo), rp.q_of_p(s_hi));
    let chart = reparam_chart(&name, Arc::new(rp), range, grid)?;
    Ok(chart.with_isothermal(matches!(kind, ChartKind::Isothermal)))
}

/// Height of a cap over its boundary plane against `4 R` and `8 R`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CapReport {
    pub height: f64,
    pub r_a: f64,
    pub bound_4r: bool,
    pub bound_8r: bool,
}

const PLANE_TOL: f64 = 1e-9;

/// Ends of the meridian off the axis form the boundary and must lie on the
/// plane.
pub fn cap_height_check(surface: &RotationalSurface, plane_z: f64) -> Result<CapReport> {
    let r_a = umbilic_sphere_radius(&surface.profile)?;
    let scale = r_a.max(1.0);
    for end in [&surface.states[0], surface.states.last().unwrap()] {
        if end.r > PLANE_TOL * scale && (end.z - plane_z).abs() > PLANE_TOL * scale {
            return Err(GeomError::BoundaryNotPlanar {
                plane_z,
                z: end.z,
                r: end.r,
            });
        }
    }
    let height = surface
        .states
        .iter()
        .map(|s| (s.z - plane_z).abs())
        .fold(0.0, f64::max);
    Ok(CapReport {
        height,
        r_a,
        bound_4r: height <= 4.0 * r_a + 1e-9,
        bound_8r: height <= 8.0 * r_a + 1e-9,
    })
}

/// One member of [`cap_batch`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CapCase {
    pub c: f64,
    pub eps: f64,
    pub plane_z: f64,
    pub report: CapReport,
}

/// Caps of `n` random elliptic linear profiles `f(x) = c + εx`,
/// `c ∈ [0.3, 2]`, with ellipticity margin above 0.1 on `x ∈ [0, 4]`, each
/// cut at a random height. Deterministic for a given seed.
pub fn cap_batch(n: usize, seed: u64) -> Result<Vec<CapCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // 1 - 4·4·ε² > 0.1
    let eps_max = (0.9f64 / 16.0).sqrt();
    let draws: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.gen_range(0.3..2.0),
                rng.gen_range(-eps_max..eps_max),
                rng.gen_range(0.05..0.95),
            )
        })
        .collect();
    draws
        .into_par_iter()
        .map(|(c, eps, frac)| {
            let profile = WeingartenProfile::linear(c, eps);
            let check = ellipticity_check(&profile, 4.0, 400);
            if !check.elliptic {
                return Err(GeomError::NotElliptic {
                    t_max: 2.0,
                    margin: check.margin,
                });
            }
            let r_a = umbilic_sphere_radius(&profile)?;
            let full = integrate_cap(&profile, 8.0 * r_a)?;
            if !full.closed {
                return Err(GeomError::BadParams {
                    name: profile.label().to_string(),
                    reason: "cap did not close".into(),
                });
            }
            let plane_z = frac * full.height();
            let cap = full.cut_above(plane_z)?;
            Ok(CapCase {
                c,
                eps,
                plane_z,
                report: cap_height_check(&cap, plane_z)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codazzi::codazzi_residual;
    use crate::hopf::conformal_factor;
    use crate::pair::{curvatures, FundamentalPair, DEFAULT_TOL_UMB};
    use proptest::prelude::*;

    fn quarter() -> WeingartenProfile {
        WeingartenProfile::linear(1.0, 0.25)
    }

    #[test]
    fn umbilic_radius_examples() {
        assert_eq!(
            umbilic_sphere_radius(&WeingartenProfile::constant(0.5)).unwrap(),
            2.0
        );
        assert_eq!(umbilic_sphere_radius(&quarter()).unwrap(), 1.0);
        assert_eq!(
            umbilic_sphere_radius(&WeingartenProfile::linear(0.0, 1.0)),
            Err(GeomError::MinimalType)
        );
    }

    #[test]
    fn kappa1_examples() {
        let cmc = WeingartenProfile::constant(0.7);
        assert!((solve_kappa1(&cmc, 0.3, 5.0).unwrap() - 1.1).abs() < 1e-15);
        // κ₁ = 2 + (κ₁ - 1/2)²/8 - 1/2, smaller root 9/2 - 2√2
        let k = solve_kappa1(&quarter(), 0.5, 1.5).unwrap();
        assert!((k - (4.5 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(solve_kappa1(&quarter(), 1.0, 1.0).unwrap(), 1.0);
        let steep = WeingartenProfile::linear(1.0, 3.0);
        assert!(matches!(
            solve_kappa1(&steep, 0.0, 2.0),
            Err(GeomError::NoConvergence { .. })
        ));
        // the double root κ₁ = 4 of κ₂ = 0 sits on the elliptic boundary
        assert!(solve_kappa1(&quarter(), 0.0, 2.0).is_err());
        let meridian = integrate_profile(
            &quarter(),
            ProfileState {
                s: 0.0,
                r: 0.6,
                z: 0.0,
                theta: std::f64::consts::FRAC_PI_2,
            },
            5.0,
            1e-3,
        );
        assert!(matches!(meridian, Err(GeomError::NoConvergence { .. })));
    }

    #[test]
    fn cmc_pole_start_is_the_round_sphere() {
        let cmc = WeingartenProfile::constant(0.5);
        let s = integrate_cap(&cmc, 20.0).unwrap();
        assert!(s.closed);
        assert!((s.height() - 4.0).abs() < 1e-6, "{}", s.height());
        assert!((s.states.last().unwrap().s - 2.0 * std::f64::consts::PI).abs() < 1e-6);
        for st in &s.states {
            let exact = 2.0 * (st.s / 2.0).sin();
            assert!((st.r - exact).abs() < 1e-6);
        }
        assert!(s.weingarten_residual() < 1e-12);
        assert!(s.error_estimate < 1e-9);
    }

    #[test]
    fn cmc_cylinder_start_stays_straight() {
        let cmc = WeingartenProfile::constant(0.5);
        let init = ProfileState {
            s: 0.0,
            r: 1.0,
            z: 0.0,
            theta: std::f64::consts::FRAC_PI_2,
        };
        let s = integrate_profile(&cmc, init, 3.0, 1e-2).unwrap();
        for (k, st) in s.states.iter().enumerate() {
            assert!((st.r - 1.0).abs() < 1e-12 && (st.z - st.s).abs() < 1e-12);
            assert!(s.extrinsic_curvature(k).abs() < 1e-12);
        }
    }

    #[test]
    fn quarter_profile_cap_is_the_unit_sphere() {
        let s = integrate_cap(&quarter(), 10.0).unwrap();
        assert!(s.closed);
        assert!((s.height() - 2.0).abs() < 1e-6);
        assert!(s.weingarten_residual() < 1e-8);
        let rep = cap_height_check(&s, 0.0).unwrap();
        assert!(rep.bound_4r && rep.r_a == 1.0);
    }

    #[test]
    fn hemisphere_cut_and_planarity() {
        let cmc = WeingartenProfile::constant(0.5);
        let s = integrate_cap(&cmc, 20.0).unwrap();
        let hemi = s.cut_above(2.0).unwrap();
        let rep = cap_height_check(&hemi, 2.0).unwrap();
        assert!((rep.height - 2.0).abs() < 1e-6 && rep.bound_4r && rep.bound_8r);
        assert!((hemi.states[0].r - 2.0).abs() < 1e-9);
        assert!(matches!(
            cap_height_check(&hemi, 1.5),
            Err(GeomError::BoundaryNotPlanar { .. })
        ));
    }

    /// Non-umbilic band grown from a vertical tangent at `r = 0.6`; the
    /// meridian leaves the elliptic range (`t = 2`) further on.
    fn bulge() -> RotationalSurface {
        let init = ProfileState {
            s: 0.0,
            r: 0.6,
            z: 0.0,
            theta: std::f64::consts::FRAC_PI_2,
        };
        integrate_profile(&quarter(), init, 1.2, 1e-3).unwrap()
    }

    #[test]
    fn pair_pipeline_confirms_the_relation() {
        let s = bulge();
        assert!(s.weingarten_residual() < 1e-12);
        assert!(s.states.iter().all(|st| st.r > 0.25));
        let chart = as_chart(&s, &ChartKind::ArcLength, (0.1, 1.0), (64, 32)).unwrap();
        let pair = FundamentalPair::from_chart(&chart).unwrap();
        let c = curvatures(&pair, DEFAULT_TOL_UMB).unwrap();
        let prof = quarter();
        for k in 0..c.h.values.len() {
            let t2 = c.t.values[k].powi(2);
            assert!((c.h.values[k] - prof.f(t2)).abs() < 1e-8);
        }
        assert!(codazzi_residual(&pair, None).unwrap() < 1e-6);
    }

    #[test]
    fn isothermal_charts() {
        let cyl = integrate_profile(
            &WeingartenProfile::constant(0.5),
            ProfileState {
                s: 0.0,
                r: 1.0,
                z: 0.0,
                theta: std::f64::consts::FRAC_PI_2,
            },
            2.0,
            1e-2,
        )
        .unwrap();
        let c = as_chart(&cyl, &ChartKind::Isothermal, (0.2, 1.8), (32, 32)).unwrap();
        let p = FundamentalPair::from_chart(&c).unwrap();
        assert!((conformal_factor(&p.first, 1e-8).unwrap().values[5] - 0.5).abs() < 1e-10);

        let sphere = integrate_cap(&WeingartenProfile::constant(0.5), 20.0).unwrap();
        let mid = std::f64::consts::PI;
        let band = as_chart(
            &sphere,
            &ChartKind::Isothermal,
            (mid - 1.0, mid + 1.0),
            (48, 48),
        )
        .unwrap();
        let bp = FundamentalPair::from_chart(&band).unwrap();
        conformal_factor(&bp.first, 1e-8).unwrap();
        let end = sphere.s_range().1;
        assert!(matches!(
            as_chart(&sphere, &ChartKind::Isothermal, (0.0, end), (48, 48)),
            Err(GeomError::AxisProximity { .. })
        ));
    }

    #[test]
    fn csv_is_deterministic() {
        let cmc = WeingartenProfile::constant(0.5);
        let mut a = Vec::new();
        let mut b = Vec::new();
        integrate_cap(&cmc, 20.0)
            .unwrap()
            .write_csv(&mut a)
            .unwrap();
        integrate_cap(&cmc, 20.0)
            .unwrap()
            .write_csv(&mut b)
            .unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("s,r,z,theta,kappa1,kappa2,H,K\n"));
    }

    #[test]
    fn small_batch_respects_the_bound() {
        let cases = cap_batch(4, 7).unwrap();
        assert_eq!(cases, cap_batch(4, 7).unwrap());
        assert!(cases.iter().all(|c| c.report.bound_4r));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn kappa1_iteration_contracts(c in 0.2f64..2.0, eps in -0.05f64..0.05, k2 in -1.0f64..1.0) {
            let p = WeingartenProfile::linear(c, eps);
            let k1 = solve_kappa1(&p, k2, 2.0 * c - k2).unwrap();
            let half = 0.5 * (k1 - k2);
            prop_assert!((0.5 * (k1 + k2) - p.f(half * half)).abs() < 1e-12);
            // continuation picks the root nearest the constant-mean-curvature one
            prop_assert!(half.abs() <= 2.0 * (c - k2).abs() + 1e-12);
        }
    }
}
