//! Hopf differentials on charts conformal for `I`, and the decomposition of
//! `I` in charts conformal for `II`.
//!
//! With `z = u + iv`, `dz² = du² - dv² + 2i du dv`. Writing
//! `I = 2λ|dz|²` and `II = Q dz² + 2λH|dz|² + Q̄ dz̄²` and matching real
//! coefficients gives `λ = (E + G)/4`, `H = (e + g)/(4λ)` and
//! `Q = (e - g)/4 - i f/2`. The same expansion of
//! `I = P dz² + 2λ|dz|² + P̄ dz̄²` against `II = 2ρ|dz|²` gives
//! `P = (E - G)/4 - i F/2`, `λ = (E + G)/4` and `ρ = (e + g)/4`.

use num_complex::Complex64;

use crate::error::{GeomError, Result};
use crate::grid::{ComplexField, Domain2D, ScalarField};
use crate::pair::{FundamentalPair, SymmetricFormField};

/// Default conformality tolerance for charts declared isothermal.
pub const DEFAULT_TOL_ISO: f64 = 1e-8;

fn conformality_defect(form: &SymmetricFormField) -> f64 {
    (0..form.domain().len())
        .map(|k| {
            let [a, b, c] = form.at(k);
            (a - c).abs().max(2.0 * b.abs()) / (a + c).abs()
        })
        .fold(0.0, f64::max)
}

/// `λ` with `I = 2λ|dz|²`, after checking the chart is conformal for `I`.
pub fn conformal_factor(first: &SymmetricFormField, tol: f64) -> Result<ScalarField> {
    let defect = conformality_defect(first);
    if !(defect < tol) {
        return Err(GeomError::NotIsothermal { defect, tol });
    }
    Ok(first.map_coeffs(|[e, _, g]| 0.25 * (e + g)))
}

/// Conformal factor, mean curvature and Hopf coefficient on a conformal chart.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfField {
    pub lambda: ScalarField,
    pub h: ScalarField,
    pub q: ComplexField,
}

impl HopfField {
    pub fn domain(&self) -> &Domain2D {
        &self.lambda.domain
    }
}

pub fn hopf_coefficient(pair: &FundamentalPair, tol: f64) -> Result<HopfField> {
    let lambda = conformal_factor(&pair.first, tol)?;
    let d = *pair.domain();
    let mut h = Vec::with_capacity(d.len());
    let mut q = Vec::with_capacity(d.len());
    for k in 0..d.len() {
        let [e, f, g] = pair.second.at(k);
        h.push((e + g) / (4.0 * lambda.values[k]));
        q.push(Complex64::new(0.25 * (e - g), -0.5 * f));
    }
    Ok(HopfField {
        lambda,
        h: ScalarField::from_values(d, h),
        q: ComplexField::from_values(d, q),
    })
}

/// `Q_z̄ - λ H_z`.
pub fn cr_residual(field: &HopfField) -> ComplexField {
    let qzb = field.q.d_zbar();
    let hz = field.h.d_z();
    let d = *field.domain();
    ComplexField::from_values(
        d,
        (0..d.len())
            .map(|k| qzb.values[k] - hz.values[k] * field.lambda.values[k])
            .collect(),
    )
}

/// `K - (H² - |Q|²/λ²)`.
pub fn modulus_identity_residual(field: &HopfField, k: &ScalarField) -> ScalarField {
    let d = *field.domain();
    ScalarField::from_values(
        d,
        (0..d.len())
            .map(|i| {
                let (h, l) = (field.h.values[i], field.lambda.values[i]);
                k.values[i] - (h * h - field.q.values[i].norm_sqr() / (l * l))
            })
            .collect(),
    )
}

/// Real coefficients of `Q dz² + Q̄ dz̄²`.
pub fn quadratic_differential_form(q: &ComplexField) -> SymmetricFormField {
    SymmetricFormField {
        a11: q.map(|z| 2.0 * z.re),
        a12: q.map(|z| -2.0 * z.im),
        a22: q.map(|z| -2.0 * z.re),
    }
}

/// Winding of a closed sampled curve in `C \ {0}` (samples in order, the
/// last one joined back to the first).
pub fn winding_number(samples: &[Complex64]) -> Result<i64> {
    for (k, z) in samples.iter().enumerate() {
        if !(z.norm() > 0.0) {
            return Err(GeomError::ZeroOnLoop {
                index: k,
                modulus: z.norm(),
            });
        }
    }
    let n = samples.len();
    let total: f64 = (0..n)
        .map(|k| (samples[(k + 1) % n] / samples[k]).arg())
        .sum();
    Ok((total / std::f64::consts::TAU).round() as i64)
}

/// Winding of `Q` and the derived foliation index `-w/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingReport {
    pub winding: i64,
    pub foliation_index: f64,
}

/// Winding of `Q/|Q|` along a loop of grid indices; `min_modulus` is the
/// threshold below which `Q` counts as zero on the loop.
pub fn winding_index(field: &HopfField, lp: &[usize], min_modulus: f64) -> Result<WindingReport> {
    let samples: Vec<Complex64> = lp.iter().map(|&k| field.q.values[k]).collect();
    for (&k, z) in lp.iter().zip(&samples) {
        if !(z.norm() > min_modulus) {
            return Err(GeomError::ZeroOnLoop {
                index: k,
                modulus: z.norm(),
            });
        }
    }
    let winding = winding_number(&samples)?;
    Ok(WindingReport {
        winding,
        foliation_index: -(winding as f64) / 2.0,
    })
}

/// `I = P dz² + 2λ|dz|² + P̄ dz̄²`, `II = ±2ρ|dz|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroveDecomposition {
    pub rho: ScalarField,
    pub lambda: ScalarField,
    pub p: ComplexField,
    /// True when `II` was replaced by `-II` to make it positive definite.
    pub flipped: bool,
}

pub fn grove_decompose(pair: &FundamentalPair, tol: f64) -> Result<GroveDecomposition> {
    let d = *pair.domain();
    let sign = if pair.second.a11.values[0] < 0.0 {
        -1.0
    } else {
        1.0
    };
    for k in 0..d.len() {
        let [e, f, g] = pair.second.at(k);
        if !(e * g - f * f > 0.0 && sign * e > 0.0) {
            return Err(GeomError::IiNotDefinite { index: k });
        }
    }
    let defect = conformality_defect(&pair.second);
    if !(defect < tol) {
        return Err(GeomError::NotIiIsothermal { defect, tol });
    }
    Ok(GroveDecomposition {
        rho: pair.second.map_coeffs(|[e, _, g]| 0.25 * sign * (e + g)),
        lambda: pair.first.map_coeffs(|[e, _, g]| 0.25 * (e + g)),
        p: ComplexField::from_values(
            d,
            (0..d.len())
                .map(|k| {
                    let [e, f, g] = pair.first.at(k);
                    Complex64::new(0.25 * (e - g), -0.5 * f)
                })
                .collect(),
        ),
        flipped: sign < 0.0,
    })
}

impl GroveDecomposition {
    pub fn domain(&self) -> &Domain2D {
        &self.rho.domain
    }

    /// The pair rebuilt from `(ρ, λ, P)`, with the original orientation of `II`.
    pub fn reassemble(&self) -> FundamentalPair {
        let sign = if self.flipped { -1.0 } else { 1.0 };
        let two_rho = self.rho.map(|r| 2.0 * sign * r);
        FundamentalPair {
            first: SymmetricFormField {
                a11: self.lambda.zip_map(&self.p, |l, p| 2.0 * l + 2.0 * p.re),
                a12: self.p.map(|p| -2.0 * p.im),
                a22: self.lambda.zip_map(&self.p, |l, p| 2.0 * l - 2.0 * p.re),
            },
            second: SymmetricFormField {
                a11: two_rho.clone(),
                a12: ScalarField::constant(*self.domain(), 0.0),
                a22: two_rho,
            },
        }
    }

    fn denom(&self, k: usize) -> f64 {
        self.lambda.values[k].powi(2) - self.p.values[k].norm_sqr()
    }

    /// `λρ / (λ² - |P|²)` (mean curvature of the oriented pair).
    pub fn mean_curvature(&self) -> ScalarField {
        let d = *self.domain();
        ScalarField::from_values(
            d,
            (0..d.len())
                .map(|k| self.lambda.values[k] * self.rho.values[k] / self.denom(k))
                .collect(),
        )
    }

    /// `ρ² / (λ² - |P|²)`.
    pub fn extrinsic_curvature(&self) -> ScalarField {
        let d = *self.domain();
        ScalarField::from_values(
            d,
            (0..d.len())
                .map(|k| self.rho.values[k].powi(2) / self.denom(k))
                .collect(),
        )
    }
}

/// `P_z̄ + (λ K_z + P K_z̄) / (2K)`.
pub fn grove_f1_residual(dec: &GroveDecomposition, k: &ScalarField) -> ComplexField {
    let pzb = dec.p.d_zbar();
    let (kz, kzb) = (k.d_z(), k.d_zbar());
    let d = *dec.domain();
    ComplexField::from_values(
        d,
        (0..d.len())
            .map(|i| {
                pzb.values[i]
                    + (kz.values[i] * dec.lambda.values[i] + dec.p.values[i] * kzb.values[i])
                        / (2.0 * k.values[i])
            })
            .collect(),
    )
}

/// `|P₁ - P₂| - |λ₁ - λ₂|` for two decompositions sharing `II`.
pub fn grove_f2_gap(a: &GroveDecomposition, b: &GroveDecomposition) -> ScalarField {
    let d = *a.domain();
    ScalarField::from_values(
        d,
        (0..d.len())
            .map(|k| {
                (a.p.values[k] - b.p.values[k]).norm()
                    - (a.lambda.values[k] - b.lambda.values[k]).abs()
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::fixture;
    use crate::pair::{curvatures, DEFAULT_TOL_UMB};

    fn pair_of(name: &str, params: &[f64], n: usize) -> FundamentalPair {
        FundamentalPair::from_chart(&fixture(name, params, Some((n, n))).unwrap()).unwrap()
    }

    #[test]
    fn conformal_factor_examples() {
        let cat = pair_of("catenoid", &[], 32);
        let lam = conformal_factor(&cat.first, DEFAULT_TOL_ISO).unwrap();
        for k in 0..cat.domain().len() {
            let (u, _) = cat.domain().point(k);
            assert!((lam.values[k] - u.cosh().powi(2) / 2.0).abs() < 1e-13);
        }
        let pl = pair_of("plane", &[], 16);
        assert!(conformal_factor(&pl.first, DEFAULT_TOL_ISO)
            .unwrap()
            .values
            .iter()
            .all(|&l| l == 0.5));
        let sp = pair_of("sphere", &[1.0], 16);
        assert!(matches!(
            conformal_factor(&sp.first, DEFAULT_TOL_ISO),
            Err(GeomError::NotIsothermal { .. })
        ));
    }

    #[test]
    fn hopf_coefficient_examples() {
        let s = hopf_coefficient(&pair_of("sphere_stereo", &[1.0], 32), DEFAULT_TOL_ISO).unwrap();
        assert!(s.q.max_norm() < 1e-12);
        let c = hopf_coefficient(&pair_of("catenoid", &[], 32), DEFAULT_TOL_ISO).unwrap();
        assert!(c
            .q
            .values
            .iter()
            .all(|q| (q - Complex64::new(-0.5, 0.0)).norm() < 1e-13));
        let cy = hopf_coefficient(&pair_of("cylinder", &[1.0], 32), DEFAULT_TOL_ISO).unwrap();
        for k in 0..cy.domain().len() {
            assert!((cy.q.values[k].norm() / cy.lambda.values[k] - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn cauchy_riemann_and_modulus_identities() {
        for (name, cr_tol) in [
            ("catenoid", 1e-10),
            ("sphere_stereo", 1e-10),
            ("cylinder", 1e-10),
            ("ellipsoid_rev_iso", 1e-5),
        ] {
            let p = pair_of(name, &[], 96);
            let hf = hopf_coefficient(&p, DEFAULT_TOL_ISO).unwrap();
            let cr = cr_residual(&hf).max_norm();
            assert!(cr < cr_tol, "{name}: {cr}");
            let k = curvatures(&p, DEFAULT_TOL_UMB).unwrap().k;
            let m = modulus_identity_residual(&hf, &k).max_abs();
            assert!(m < 1e-8, "{name}: {m}");
        }
    }

    #[test]
    fn zero_set_of_q_matches_umbilic_mask() {
        let p = pair_of("ellipsoid_rev_pole", &[2.0, 1.0], 64);
        let hf = hopf_coefficient(&p, DEFAULT_TOL_ISO).unwrap();
        let c = curvatures(&p, DEFAULT_TOL_UMB).unwrap();
        for k in 0..p.domain().len() {
            let t_from_q = hf.q.values[k].norm() / hf.lambda.values[k];
            assert!((t_from_q - c.t.values[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn winding_of_model_differentials() {
        let d = Domain2D::new((-1.0, 1.0), (-1.0, 1.0), (false, false), (32, 32)).unwrap();
        let field = |f: &dyn Fn(Complex64) -> Complex64| HopfField {
            lambda: ScalarField::constant(d, 0.5),
            h: ScalarField::constant(d, 0.0),
            q: ComplexField::from_fn(d, |u, v| f(Complex64::new(u, v))),
        };
        let lp = d.square_loop((15, 15), 10);
        let w = |f: &dyn Fn(Complex64) -> Complex64| winding_index(&field(f), &lp, 0.0).unwrap();
        assert_eq!(w(&|z| z).winding, 1);
        assert_eq!(w(&|_| Complex64::new(0.3, -1.0)).winding, 0);
        let conj_sq = w(&|z| z.conj() * z.conj());
        assert_eq!(conj_sq.winding, -2);
        assert_eq!(conj_sq.foliation_index, 1.0);
        let sq = w(&|z| z * z);
        assert_eq!(sq.foliation_index, -1.0);
        assert!(matches!(
            winding_index(&field(&|_| Complex64::new(0.0, 0.0)), &lp, 0.0),
            Err(GeomError::ZeroOnLoop { .. })
        ));
    }

    #[test]
    fn spheroid_pole_has_index_one_on_nested_loops() {
        let chart = fixture("ellipsoid_rev_pole", &[2.0, 1.0], Some((64, 64))).unwrap();
        let p = FundamentalPair::from_chart(&chart).unwrap();
        let hf = hopf_coefficient(&p, DEFAULT_TOL_ISO).unwrap();
        let d = p.domain();
        let c = (d.nu / 2, d.nv / 2);
        for k in [8, 20] {
            let r = winding_index(&hf, &d.square_loop(c, k), 1e-12).unwrap();
            assert_eq!(r.winding, -2);
            assert_eq!(r.foliation_index, 1.0);
        }
    }

    #[test]
    fn grove_identities_on_spheroid() {
        let p = pair_of("ellipsoid_rev_ii_iso", &[2.0, 1.0], 128);
        let dec = grove_decompose(&p, DEFAULT_TOL_ISO).unwrap();
        assert!(!dec.flipped);
        let c = curvatures(&p, DEFAULT_TOL_UMB).unwrap();
        let hr = dec
            .mean_curvature()
            .zip_map(&c.h, |a, b| (a - b).abs())
            .max_abs();
        let kr = dec
            .extrinsic_curvature()
            .zip_map(&c.k, |a, b| (a - b).abs())
            .max_abs();
        assert!(hr < 1e-6 && kr < 1e-6, "{hr} {kr}");
        let f1 = grove_f1_residual(&dec, &c.k).max_norm();
        assert!(f1 < 1e-4, "{f1}");
        // degenerate (f2): identical pairs
        assert!(grove_f2_gap(&dec, &dec).max_abs() == 0.0);
    }

    #[test]
    fn grove_reassembly_and_orientation() {
        let p = pair_of("sphere_stereo", &[2.0], 24);
        let dec = grove_decompose(&p, DEFAULT_TOL_ISO).unwrap();
        assert!(dec.p.max_norm() < 1e-12 * dec.lambda.max_abs());
        assert!(dec
            .mean_curvature()
            .values
            .iter()
            .all(|h| (h - 0.5).abs() < 1e-12));
        let back = dec.reassemble();
        // exact up to the rounding of (E + G)/2 ± (E - G)/2
        assert!(p.first.max_rel_diff(&back.first) < 1e-15);
        assert!(p.second.max_rel_diff(&back.second) < 1e-15);

        let flipped = FundamentalPair::from_forms(p.first.clone(), p.second.neg()).unwrap();
        let fd = grove_decompose(&flipped, DEFAULT_TOL_ISO).unwrap();
        assert!(fd.flipped);
        assert_eq!(fd.p, dec.p);
        assert_eq!(fd.rho, dec.rho);
        assert!(flipped.second.max_rel_diff(&fd.reassemble().second) < 1e-15);

        let cyl = pair_of("cylinder", &[1.0], 16);
        assert!(matches!(
            grove_decompose(&cyl, DEFAULT_TOL_ISO),
            Err(GeomError::IiNotDefinite { .. })
        ));
        let sp = pair_of("ellipsoid_rev_iso", &[2.0, 1.0], 16);
        assert!(matches!(
            grove_decompose(&sp, DEFAULT_TOL_ISO),
            Err(GeomError::NotIiIsothermal { .. })
        ));
    }
}
