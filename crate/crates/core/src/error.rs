use thiserror::Error;

/// Errors raised by the geometry pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("degenerate immersion at (u, v) = ({u}, {v}): |Xu x Xv| = {norm:e}")]
    DegenerateImmersion { u: f64, v: f64, norm: f64 },

    #[error("first form is not Riemannian (det = {det:e}) at grid point {index}")]
    NonRiemannian { index: usize, det: f64 },

    #[error("singular metric (det = {det:e}) at grid point {index}")]
    SingularMetric { index: usize, det: f64 },

    #[error("H^2 - K = {value:e} below -tol_umb at grid point {index}")]
    ClampViolation { index: usize, value: f64 },

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("bad parameters for `{name}`: {reason}")]
    BadParams { name: String, reason: String },

    #[error("chart is not isothermal: defect {defect:e} exceeds {tol:e}")]
    NotIsothermal { defect: f64, tol: f64 },

    #[error("second form is not isothermal: defect {defect:e} exceeds {tol:e}")]
    NotIiIsothermal { defect: f64, tol: f64 },

    #[error("second form is not definite at grid point {index}")]
    IiNotDefinite { index: usize },

    #[error("Hopf coefficient vanishes on the loop (|Q| = {modulus:e} at grid point {index})")]
    ZeroOnLoop { index: usize, modulus: f64 },

    #[error("argument {value} outside the profile domain [0, {extent})")]
    DomainExceeded { value: f64, extent: f64 },

    #[error("umbilic point inside the evaluation region (t = {t:e} at grid point {index})")]
    UmbilicRegion { index: usize, t: f64 },

    #[error("profile is of minimal type (f(0) = 0)")]
    MinimalType,

    #[error("no convergence after {iterations} iterations (last step {step:e})")]
    NoConvergence { iterations: usize, step: f64 },

    #[error("profile hit the axis at s = {s} without closing a cap (theta = {theta})")]
    AxisCollision { s: f64, theta: f64 },

    #[error("isothermal chart requested too close to the axis (r = {r:e})")]
    AxisProximity { r: f64 },

    #[error("cap boundary is not on the plane z = {plane_z} (endpoint z = {z}, r = {r})")]
    BoundaryNotPlanar { plane_z: f64, z: f64, r: f64 },

    #[error("profile is not elliptic on [0, {t_max}] (margin {margin})")]
    NotElliptic { t_max: f64, margin: f64 },

    #[error("invalid profile spec: {0}")]
    ProfileSpec(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;

impl From<std::io::Error> for GeomError {
    fn from(e: std::io::Error) -> Self {
        GeomError::Io(e.to_string())
    }
}
