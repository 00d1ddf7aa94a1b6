//! Uniform node-centred grids over a rectangular chart domain and
//! sixth-order finite differences of sampled fields.
//!
//! Periodic directions place `n` nodes on `[min, max)` and wrap; the other
//! directions place `n` nodes on `[min, max]` and switch to one-sided
//! sixth-order stencils within three nodes of either end.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{GeomError, Result};

/// Rectangular parameter domain with a sampling resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain2D {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub u_periodic: bool,
    pub v_periodic: bool,
    pub nu: usize,
    pub nv: usize,
}

impl Domain2D {
    pub const MIN_NODES: usize = 8;

    pub fn new(
        (u_min, u_max): (f64, f64),
        (v_min, v_max): (f64, f64),
        (u_periodic, v_periodic): (bool, bool),
        (nu, nv): (usize, usize),
    ) -> Result<Self> {
        if !(u_min < u_max) || !(v_min < v_max) {
            return Err(GeomError::InvalidDomain(format!(
                "empty range u [{u_min}, {u_max}], v [{v_min}, {v_max}]"
            )));
        }
        if nu < Self::MIN_NODES || nv < Self::MIN_NODES {
            return Err(GeomError::InvalidDomain(format!(
                "grid {nu}x{nv} is below the minimum of {}",
                Self::MIN_NODES
            )));
        }
        Ok(Domain2D {
            u_min,
            u_max,
            v_min,
            v_max,
            u_periodic,
            v_periodic,
            nu,
            nv,
        })
    }

    /// Same extent and periodicity, different resolution.
    pub fn with_resolution(&self, nu: usize, nv: usize) -> Result<Self> {
        Domain2D::new(
            (self.u_min, self.u_max),
            (self.v_min, self.v_max),
            (self.u_periodic, self.v_periodic),
            (nu, nv),
        )
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn du(&self) -> f64 {
        spacing(self.u_min, self.u_max, self.nu, self.u_periodic)
    }

    pub fn dv(&self) -> f64 {
        spacing(self.v_min, self.v_max, self.nv, self.v_periodic)
    }

    pub fn u(&self, i: usize) -> f64 {
        self.u_min + i as f64 * self.du()
    }

    pub fn v(&self, j: usize) -> f64 {
        self.v_min + j as f64 * self.dv()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nu + i
    }

    #[inline]
    pub fn ij(&self, index: usize) -> (usize, usize) {
        (index % self.nu, index / self.nu)
    }

    pub fn point(&self, index: usize) -> (f64, f64) {
        let (i, j) = self.ij(index);
        (self.u(i), self.v(j))
    }

    /// Default finite-difference step for jets: extent times 1e-3 per direction.
    pub fn default_steps(&self) -> (f64, f64) {
        (
            (self.u_max - self.u_min) * 1e-3,
            (self.v_max - self.v_min) * 1e-3,
        )
    }

    /// Grid indices of the square loop of half-width `k` around node `(ic, jc)`,
    /// traversed counter-clockwise in the (u, v) plane.
    pub fn square_loop(&self, (ic, jc): (usize, usize), k: usize) -> Vec<usize> {
        let (i0, i1, j0, j1) = (ic - k, ic + k, jc - k, jc + k);
        let mut out = Vec::with_capacity(8 * k);
        for i in i0..i1 {
            out.push(self.index(i, j0));
        }
        for j in j0..j1 {
            out.push(self.index(i1, j));
        }
        for i in (i0 + 1..=i1).rev() {
            out.push(self.index(i, j1));
        }
        for j in (j0 + 1..=j1).rev() {
            out.push(self.index(i0, j));
        }
        out
    }

    /// Rectangular loop between corner nodes, counter-clockwise.
    pub fn rect_loop(&self, (i0, j0): (usize, usize), (i1, j1): (usize, usize)) -> Vec<usize> {
        let mut out = Vec::new();
        for i in i0..i1 {
            out.push(self.index(i, j0));
        }
        for j in j0..j1 {
            out.push(self.index(i1, j));
        }
        for i in (i0 + 1..=i1).rev() {
            out.push(self.index(i, j1));
        }
        for j in (j0 + 1..=j1).rev() {
            out.push(self.index(i0, j));
        }
        out
    }
}

fn spacing(min: f64, max: f64, n: usize, periodic: bool) -> f64 {
    if periodic {
        (max - min) / n as f64
    } else {
        (max - min) / (n - 1) as f64
    }
}

/// A field sampled at every node of a [`Domain2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    pub domain: Domain2D,
    pub values: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type ComplexField = Field<Complex64>;

/// Values the stencils can act on.
pub trait Stencilable:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
}

impl Stencilable for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Stencilable for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

#[derive(Clone, Copy)]
enum Axis {
    U,
    V,
}

// Sixth-order weights: first derivatives divide by 60h, second by 180h².
const D1_CENTRAL: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
const D1_EDGE: [[f64; 7]; 3] = [
    [-147.0, 360.0, -450.0, 400.0, -225.0, 72.0, -10.0],
    [-10.0, -77.0, 150.0, -100.0, 50.0, -15.0, 2.0],
    [2.0, -24.0, -35.0, 80.0, -30.0, 8.0, -1.0],
];
const D2_CENTRAL: [f64; 7] = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];
const D2_EDGE: [[f64; 8]; 3] = [
    [
        938.0, -4014.0, 7911.0, -9490.0, 7380.0, -3618.0, 1019.0, -126.0,
    ],
    [126.0, -70.0, -486.0, 855.0, -670.0, 324.0, -90.0, 11.0],
    [-11.0, 214.0, -378.0, 130.0, 85.0, -54.0, 16.0, -2.0],
];
const HALF_WIDTH: usize = 3;

impl<T: Stencilable> Field<T> {
    pub fn from_fn(domain: Domain2D, f: impl Fn(f64, f64) -> T) -> Self {
        let values = (0..domain.len())
            .map(|k| {
                let (u, v) = domain.point(k);
                f(u, v)
            })
            .collect();
        Field { domain, values }
    }

    pub fn from_values(domain: Domain2D, values: Vec<T>) -> Self {
        assert_eq!(values.len(), domain.len(), "field length mismatch");
        Field { domain, values }
    }

    pub fn map<S>(&self, f: impl Fn(T) -> S) -> Field<S> {
        Field {
            domain: self.domain,
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map<S: Copy, R>(&self, other: &Field<S>, f: impl Fn(T, S) -> R) -> Field<R> {
        Field {
            domain: self.domain,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[self.domain.index(i, j)]
    }

    pub fn d_u(&self) -> Self {
        self.derivative(Axis::U, 1)
    }

    pub fn d_v(&self) -> Self {
        self.derivative(Axis::V, 1)
    }

    pub fn d_uu(&self) -> Self {
        self.derivative(Axis::U, 2)
    }

    pub fn d_vv(&self) -> Self {
        self.derivative(Axis::V, 2)
    }

    pub fn d_uv(&self) -> Self {
        self.d_u().d_v()
    }

    /// Wirtinger derivative d/dz = (d/du - i d/dv) / 2.
    pub fn d_z(&self) -> ComplexField
    where
        T: Into<Complex64>,
    {
        let du = self.d_u();
        let dv = self.d_v();
        du.zip_map(&dv, |a, b| {
            let (a, b): (Complex64, Complex64) = (a.into(), b.into());
            (a - Complex64::i() * b) * 0.5
        })
    }

    /// Wirtinger derivative d/dz̄ = (d/du + i d/dv) / 2.
    pub fn d_zbar(&self) -> ComplexField
    where
        T: Into<Complex64>,
    {
        let du = self.d_u();
        let dv = self.d_v();
        du.zip_map(&dv, |a, b| {
            let (a, b): (Complex64, Complex64) = (a.into(), b.into());
            (a + Complex64::i() * b) * 0.5
        })
    }

    fn derivative(&self, axis: Axis, order: u8) -> Self {
        let d = &self.domain;
        let (n, h, periodic) = match axis {
            Axis::U => (d.nu, d.du(), d.u_periodic),
            Axis::V => (d.nv, d.dv(), d.v_periodic),
        };
        let scale = match order {
            1 => 1.0 / (60.0 * h),
            _ => 1.0 / (180.0 * h * h),
        };
        let get = |i: usize, j: usize, along: usize| -> T {
            match axis {
                Axis::U => self.values[d.index(along, j)],
                Axis::V => self.values[d.index(i, along)],
            }
        };
        let mut out = vec![T::zero(); d.len()];
        for j in 0..d.nv {
            for i in 0..d.nu {
                let pos = match axis {
                    Axis::U => i,
                    Axis::V => j,
                };
                let sample = |offset: isize| -> T {
                    let k = if periodic {
                        (pos as isize + offset).rem_euclid(n as isize) as usize
                    } else {
                        (pos as isize + offset) as usize
                    };
                    get(i, j, k)
                };
                let acc = stencil(pos, n, periodic, order, &sample);
                out[d.index(i, j)] = acc * scale;
            }
        }
        Field {
            domain: *d,
            values: out,
        }
    }
}

fn stencil<T: Stencilable>(
    pos: usize,
    n: usize,
    periodic: bool,
    order: u8,
    sample: &dyn Fn(isize) -> T,
) -> T {
    let mut acc = T::zero();
    let interior = periodic || (pos >= HALF_WIDTH && pos + HALF_WIDTH < n);
    if interior {
        let weights = if order == 1 { &D1_CENTRAL } else { &D2_CENTRAL };
        for (k, &w) in weights.iter().enumerate() {
            acc = acc + sample(k as isize - HALF_WIDTH as isize) * w;
        }
        return acc;
    }
    // One-sided: mirror the forward stencils at the far end.
    let (from_start, dist) = if pos < HALF_WIDTH {
        (true, pos)
    } else {
        (false, n - 1 - pos)
    };
    let dir: isize = if from_start { 1 } else { -1 };
    let sign = if order == 1 { dir as f64 } else { 1.0 };
    let weights: &[f64] = if order == 1 {
        &D1_EDGE[dist]
    } else {
        &D2_EDGE[dist]
    };
    let base = -(dist as isize);
    for (k, &w) in weights.iter().enumerate() {
        acc = acc + sample(dir * (base + k as isize)) * (w * sign);
    }
    acc
}

impl ScalarField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest |value| over the nodes where `mask` is true (0 when the mask is empty).
    pub fn max_abs_masked(&self, mask: &[bool]) -> f64 {
        self.values
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .fold(0.0, |acc, (x, _)| acc.max(x.abs()))
    }

    pub fn constant(domain: Domain2D, c: f64) -> Self {
        Field {
            domain,
            values: vec![c; domain.len()],
        }
    }
}

impl ComplexField {
    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    pub fn max_norm_masked(&self, mask: &[bool]) -> f64 {
        self.values
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .fold(0.0, |acc, (x, _)| acc.max(x.norm()))
    }
}

/// Mask of nodes at least `margin` nodes away from any non-periodic edge.
pub fn interior_mask(domain: &Domain2D, margin: usize) -> Vec<bool> {
    (0..domain.len())
        .map(|k| {
            let (i, j) = domain.ij(k);
            let ok_u = domain.u_periodic || (i >= margin && i + margin < domain.nu);
            let ok_v = domain.v_periodic || (j >= margin && j + margin < domain.nv);
            ok_u && ok_v
        })
        .collect()
}
