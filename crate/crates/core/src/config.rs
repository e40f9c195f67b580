//! Desk-scale bounds shared by the library and the command line.

/// Size limits. `ALGEO_MAX_CARRIER`, `ALGEO_MAX_POINTS` and
/// `ALGEO_FORMULA_DEPTH` override the defaults through [`Limits::from_env`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest accepted carrier per sort.
    pub max_carrier: usize,
    /// Largest point space that may be materialized as a bit-vector.
    pub max_points: usize,
    /// Depth bound for formula enumeration and sampling.
    pub formula_depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_carrier: 8,
            max_points: 1 << 20,
            formula_depth: 6,
        }
    }
}

impl Limits {
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        let read = |key: &str| std::env::var(key).ok().and_then(|v| v.trim().parse().ok());
        if let Some(v) = read("ALGEO_MAX_CARRIER") {
            limits.max_carrier = v;
        }
        if let Some(v) = read("ALGEO_MAX_POINTS") {
            limits.max_points = v;
        }
        if let Some(v) = read("ALGEO_FORMULA_DEPTH") {
            limits.formula_depth = v;
        }
        limits
    }
}
