//! Catalogue of named test surfaces.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use super::revolution::{
    direct_chart, ii_isothermal_density, isothermal_density, pole_chart, reparam_chart,
    CatenoidMeridian, ProfileCurve, Reparam, SphereColatitude, SpheroidLatitude, SpheroidMercator,
    TorusMeridian,
};
use super::{Chart, RawJet, Vec3};
use crate::error::{GeomError, Result};
use crate::grid::Domain2D;

pub const FIXTURE_NAMES: &[&str] = &[
    "sphere",
    "sphere_stereo",
    "cylinder",
    "plane",
    "catenoid",
    "ellipsoid_rev",
    "ellipsoid_rev_iso",
    "ellipsoid_rev_ii_iso",
    "ellipsoid_rev_pole",
    "torus_rev",
];

const DEFAULT_GRID: (usize, usize) = (128, 128);
/// Mercator-parameter half range of the spheroid band charts.
const BAND: f64 = 1.5;
/// Mercator parameter at unit distance from the centre of the pole chart.
const POLE_REF: f64 = 1.5;
const POLE_HALF_WIDTH: f64 = 0.5;

fn param(name: &str, params: &[f64], k: usize, default: f64) -> Result<f64> {
    let v = params.get(k).copied().unwrap_or(default);
    if !(v.is_finite() && v > 0.0) {
        return Err(GeomError::BadParams {
            name: name.into(),
            reason: format!("parameter #{k} must be positive and finite, got {v}"),
        });
    }
    Ok(v)
}

fn check_arity(name: &str, params: &[f64], max: usize) -> Result<()> {
    if params.len() > max {
        return Err(GeomError::BadParams {
            name: name.into(),
            reason: format!("expected at most {max} parameters, got {}", params.len()),
        });
    }
    Ok(())
}

/// Build the named fixture chart.
///
/// | name | params | chart |
/// |---|---|---|
/// | `sphere` | `[R]` | colatitude/longitude |
/// | `sphere_stereo` | `[R]` | stereographic, isothermal |
/// | `cylinder` | `[r]` | `(r cos u, r sin u, -v)`, isothermal for `r = 1` |
/// | `plane` | `[]` | `(u, v, 0)` |
/// | `catenoid` | `[a]` | `a (cosh u cos v, cosh u sin v, u)`, isothermal |
/// | `ellipsoid_rev` | `[a, b]` | latitude chart of `(b cos u, a sin u)` |
/// | `ellipsoid_rev_iso` | `[a, b]` | conformal band chart |
/// | `ellipsoid_rev_ii_iso` | `[a, b]` | band chart conformal for the second form |
/// | `ellipsoid_rev_pole` | `[a, b]` | conformal chart centred on the upper pole |
/// | `torus_rev` | `[R, r]` | angle chart, both directions periodic |
///
/// `a` is the semi-axis along the rotation axis and `b` the equatorial one.
pub fn fixture(name: &str, params: &[f64], grid: Option<(usize, usize)>) -> Result<Chart> {
    let (nu, nv) = grid.unwrap_or(DEFAULT_GRID);
    let chart = match name {
        "sphere" => {
            check_arity(name, params, 1)?;
            let radius = param(name, params, 0, 1.0)?;
            direct_chart(
                name,
                Arc::new(SphereColatitude { radius }),
                (0.2, PI - 0.2),
                (nu, nv),
            )?
        }
        "sphere_stereo" => {
            check_arity(name, params, 1)?;
            let radius = param(name, params, 0, 1.0)?;
            stereographic(radius, (nu, nv))?
        }
        "cylinder" => {
            check_arity(name, params, 1)?;
            let r = param(name, params, 0, 1.0)?;
            let domain = Domain2D::new((0.0, TAU), (-1.0, 1.0), (true, false), (nu, nv))?;
            let imm = Arc::new(move |u: f64, v: f64| Vec3::new(r * u.cos(), r * u.sin(), -v));
            let jets = Arc::new(move |u: f64, v: f64| {
                let (s, c) = u.sin_cos();
                RawJet {
                    x: Vec3::new(r * c, r * s, -v),
                    xu: Vec3::new(-r * s, r * c, 0.0),
                    xv: Vec3::new(0.0, 0.0, -1.0),
                    xuu: Vec3::new(-r * c, -r * s, 0.0),
                    xuv: Vec3::zeros(),
                    xvv: Vec3::zeros(),
                }
            });
            Chart::new(name, imm, domain)
                .with_jets(jets)
                .with_isothermal(r == 1.0)
        }
        "plane" => {
            check_arity(name, params, 0)?;
            let domain = Domain2D::new((-1.0, 1.0), (-1.0, 1.0), (false, false), (nu, nv))?;
            let imm = Arc::new(|u: f64, v: f64| Vec3::new(u, v, 0.0));
            let jets = Arc::new(|u: f64, v: f64| RawJet {
                x: Vec3::new(u, v, 0.0),
                xu: Vec3::x(),
                xv: Vec3::y(),
                xuu: Vec3::zeros(),
                xuv: Vec3::zeros(),
                xvv: Vec3::zeros(),
            });
            Chart::new(name, imm, domain)
                .with_jets(jets)
                .with_isothermal(true)
        }
        "catenoid" => {
            check_arity(name, params, 1)?;
            let scale = param(name, params, 0, 1.0)?;
            direct_chart(
                name,
                Arc::new(CatenoidMeridian { scale }),
                (-1.5, 1.5),
                (nu, nv),
            )?
            .with_isothermal(true)
        }
        "ellipsoid_rev" => {
            let (polar, equatorial) = spheroid_axes(name, params)?;
            let lim = FRAC_PI_2 - 0.15;
            direct_chart(
                name,
                Arc::new(SpheroidLatitude { polar, equatorial }),
                (-lim, lim),
                (nu, nv),
            )?
        }
        "ellipsoid_rev_iso" | "ellipsoid_rev_ii_iso" => {
            let (polar, equatorial) = spheroid_axes(name, params)?;
            let curve: Arc<dyn ProfileCurve> = Arc::new(SpheroidMercator { polar, equatorial });
            let density = if name == "ellipsoid_rev_iso" {
                isothermal_density()
            } else {
                ii_isothermal_density()
            };
            let rp = Reparam::new(curve, density, (-BAND - 0.5, BAND + 0.5), 512)?;
            let range = (rp.q_of_p(-BAND), rp.q_of_p(BAND));
            let c = reparam_chart(name, Arc::new(rp), range, (nu, nv))?;
            c.with_isothermal(name == "ellipsoid_rev_iso")
        }
        "ellipsoid_rev_pole" => {
            let (polar, equatorial) = spheroid_axes(name, params)?;
            let curve: Arc<dyn ProfileCurve> = Arc::new(SpheroidMercator { polar, equatorial });
            let rp = Reparam::new(curve, isothermal_density(), (0.0, 16.0), 1024)?;
            let q_ref = rp.q_of_p(POLE_REF);
            pole_chart(name, Arc::new(rp), q_ref, POLE_HALF_WIDTH, nu.max(nv))?
                .with_isothermal(true)
        }
        "torus_rev" => {
            check_arity(name, params, 2)?;
            let major = param(name, params, 0, 3.0)?;
            let minor = param(name, params, 1, 1.0)?;
            if minor >= major {
                return Err(GeomError::BadParams {
                    name: name.into(),
                    reason: format!("tube radius {minor} must be below {major}"),
                });
            }
            let curve = Arc::new(TorusMeridian { major, minor });
            let c = direct_chart(name, curve, (0.0, TAU), (nu, nv))?;
            let domain = Domain2D::new((0.0, TAU), (0.0, TAU), (true, true), (nu, nv))?;
            Chart { domain, ..c }
        }
        other => return Err(GeomError::UnknownFixture(other.to_string())),
    };
    Ok(chart)
}

fn spheroid_axes(name: &str, params: &[f64]) -> Result<(f64, f64)> {
    check_arity(name, params, 2)?;
    Ok((param(name, params, 0, 2.0)?, param(name, params, 1, 1.0)?))
}

fn stereographic(radius: f64, (nu, nv): (usize, usize)) -> Result<Chart> {
    let domain = Domain2D::new((-1.5, 1.5), (-1.5, 1.5), (false, false), (nu, nv))?;
    let imm = Arc::new(move |x: f64, y: f64| {
        let w = 1.0 / (1.0 + x * x + y * y);
        radius * Vec3::new(2.0 * x * w, 2.0 * y * w, 1.0 - 2.0 * w)
    });
    let jets = Arc::new(move |x: f64, y: f64| {
        let w = 1.0 / (1.0 + x * x + y * y);
        let (w2, w3) = (w * w, w * w * w);
        let (wx, wy) = (-2.0 * x * w2, -2.0 * y * w2);
        let wxx = -2.0 * w2 + 8.0 * x * x * w3;
        let wyy = -2.0 * w2 + 8.0 * y * y * w3;
        let wxy = 8.0 * x * y * w3;
        let k = 2.0 * radius;
        RawJet {
            x: radius * Vec3::new(2.0 * x * w, 2.0 * y * w, 1.0 - 2.0 * w),
            xu: k * Vec3::new(w + x * wx, y * wx, -wx),
            xv: k * Vec3::new(x * wy, w + y * wy, -wy),
            xuu: k * Vec3::new(2.0 * wx + x * wxx, y * wxx, -wxx),
            xuv: k * Vec3::new(wy + x * wxy, wx + y * wxy, -wxy),
            xvv: k * Vec3::new(x * wyy, 2.0 * wy + y * wyy, -wyy),
        }
    });
    Ok(Chart::new("sphere_stereo", imm, domain)
        .with_jets(jets)
        .with_isothermal(true))
}
