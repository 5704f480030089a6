//! Laws of the recovery rates and edge weights, their moments, and the
//! lazily evaluated random environment on the complete graph.
//!
//! A recovery law must put all of its mass on `[1, ∞)`. A weight law must
//! live on `[0, 1]` and put positive mass above zero. The supported families
//! all have closed-form `E ρ`, `E 1/ξ` and `E 1/ξ²`, so the critical rate
//! `λ_c = 1 / (E ρ · E 1/ξ)` is exact.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{keyed_unit, StreamKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("cannot parse distribution `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("parameter violation: {0}")]
    ParamViolation(String),
    #[error("vertex {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("edge weight requested for self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("degenerate moments: mean edge weight is 0")]
    DegenerateMoments,
}

/// What a distribution is used for; decides the admissible support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Recovery,
    Weight,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Recovery => f.write_str("recovery"),
            Role::Weight => f.write_str("weight"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Constant(f64),
    Uniform(f64, f64),
    /// `v1` with probability `p1`, otherwise `v2`.
    TwoPoint {
        v1: f64,
        p1: f64,
        v2: f64,
    },
    Shifted {
        base: Box<Family>,
        offset: f64,
    },
}

impl Family {
    fn check_params(&self) -> Result<(), EnvError> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(EnvError::ParamViolation(format!("{what} must be finite, got {x}")))
            }
        };
        match self {
            Family::Constant(v) => finite(*v, "constant value"),
            Family::Uniform(a, b) => {
                finite(*a, "uniform lower bound")?;
                finite(*b, "uniform upper bound")?;
                if a < b {
                    Ok(())
                } else {
                    Err(EnvError::ParamViolation(format!("uniform requires a < b, got a = {a}, b = {b}")))
                }
            }
            Family::TwoPoint { v1, p1, v2 } => {
                finite(*v1, "two_point v1")?;
                finite(*v2, "two_point v2")?;
                if (0.0..=1.0).contains(p1) {
                    Ok(())
                } else {
                    Err(EnvError::ParamViolation(format!("two_point probability must lie in [0, 1], got p1 = {p1}")))
                }
            }
            Family::Shifted { base, offset } => {
                finite(*offset, "shift offset")?;
                base.check_params()
            }
        }
    }

    /// Collapses the family to atoms or a single uniform piece.
    pub fn law(&self) -> Law {
        match self {
            Family::Constant(v) => Law::Atoms(vec![(*v, 1.0)]),
            Family::Uniform(a, b) => Law::Uniform { lo: *a, hi: *b },
            Family::TwoPoint { v1, p1, v2 } => {
                let atoms =
                    if v1 == v2 { vec![(*v1, 1.0)] } else { [(*v1, *p1), (*v2, 1.0 - p1)].into_iter().filter(|&(_, p)| p > 0.0).collect() };
                Law::Atoms(atoms)
            }
            Family::Shifted { base, offset } => match base.law() {
                Law::Atoms(atoms) => Law::Atoms(atoms.into_iter().map(|(v, p)| (v + offset, p)).collect()),
                Law::Uniform { lo, hi } => Law::Uniform { lo: lo + offset, hi: hi + offset },
            },
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Constant(v) => write!(f, "constant:{v}"),
            Family::Uniform(a, b) => write!(f, "uniform:{a}:{b}"),
            Family::TwoPoint { v1, p1, v2 } => write!(f, "two_point:{v1}:{p1}:{v2}"),
            Family::Shifted { base, offset } => {
                if offset.is_sign_negative() {
                    write!(f, "shifted:{base}:{offset}")
                } else {
                    write!(f, "shifted:{base}:+{offset}")
                }
            }
        }
    }
}

impl FromStr for Family {
    type Err = EnvError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| EnvError::Parse { input: input.to_string(), reason: reason.into() };
        let num = |tok: &str| -> Result<f64, EnvError> {
            let t = tok.trim();
            let t = t.strip_prefix('+').unwrap_or(t);
            t.parse::<f64>().map_err(|_| fail(&format!("`{tok}` is not a number")))
        };
        let text = input.trim();
        if let Some(rest) = text.strip_prefix("shifted:") {
            let (base, offset) = rest.rsplit_once(':').ok_or_else(|| fail("expected shifted:<base>:<offset>"))?;
            let base: Family = base.parse()?;
            return Ok(Family::Shifted { base: Box::new(base), offset: num(offset)? });
        }
        let mut parts = text.split(':');
        let name = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let arity = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(fail(&format!("`{name}` takes {k} parameter(s), got {}", args.len())))
            }
        };
        match name {
            "constant" => {
                arity(1)?;
                Ok(Family::Constant(num(args[0])?))
            }
            "uniform" => {
                arity(2)?;
                Ok(Family::Uniform(num(args[0])?, num(args[1])?))
            }
            "two_point" => {
                arity(3)?;
                Ok(Family::TwoPoint { v1: num(args[0])?, p1: num(args[1])?, v2: num(args[2])? })
            }
            other => Err(fail(&format!("unknown family `{other}` (expected constant, uniform, two_point or shifted)"))),
        }
    }
}

/// Normalized law: finitely many atoms, or one uniform piece.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    /// `(value, probability)` pairs with positive probability.
    Atoms(Vec<(f64, f64)>),
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl Law {
    /// Smallest point of the support.
    pub fn support_min(&self) -> f64 {
        match self {
            Law::Atoms(a) => a.iter().map(|x| x.0).fold(f64::INFINITY, f64::min),
            Law::Uniform { lo, .. } => *lo,
        }
    }

    pub fn support_max(&self) -> f64 {
        match self {
            Law::Atoms(a) => a.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max),
            Law::Uniform { hi, .. } => *hi,
        }
    }

    pub fn is_constant(&self) -> Option<f64> {
        match self {
            Law::Atoms(a) if a.len() == 1 => Some(a[0].0),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Law::Atoms(a) => a.iter().map(|&(v, p)| v * p).sum(),
            Law::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    /// `E[1/X]`; the support must be bounded away from zero.
    pub fn mean_inv(&self) -> f64 {
        match self {
            Law::Atoms(a) => a.iter().map(|&(v, p)| p / v).sum(),
            Law::Uniform { lo, hi } => (hi / lo).ln() / (hi - lo),
        }
    }

    /// `E[1/X²]`; the support must be bounded away from zero.
    pub fn mean_inv_sq(&self) -> f64 {
        match self {
            Law::Atoms(a) => a.iter().map(|&(v, p)| p / (v * v)).sum(),
            Law::Uniform { lo, hi } => 1.0 / (lo * hi),
        }
    }

    /// Inverse CDF on `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Law::Atoms(a) => {
                let mut cum = 0.0;
                for &(v, p) in &a[..a.len() - 1] {
                    cum += p;
                    if u < cum {
                        return v;
                    }
                }
                a[a.len() - 1].0
            }
            Law::Uniform { lo, hi } => (lo + u * (hi - lo)).clamp(*lo, *hi),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Law::Atoms(a) => a.iter().filter(|&&(v, _)| v <= x).map(|&(_, p)| p).sum::<f64>().min(1.0),
            Law::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// Laplace transform `E[e^{-sX}]` for `s ≥ 0`.
    pub fn laplace(&self, s: f64) -> f64 {
        match self {
            Law::Atoms(a) => a.iter().map(|&(v, p)| p * (-s * v).exp()).sum(),
            Law::Uniform { lo, hi } => (-s * lo).exp() * phi1(s * (hi - lo)),
        }
    }

    /// `E[X e^{-tX}]` for `t ≥ 0`.
    pub fn mean_x_exp(&self, t: f64) -> f64 {
        match self {
            Law::Atoms(a) => a.iter().map(|&(v, p)| p * v * (-t * v).exp()).sum(),
            Law::Uniform { lo, hi } => {
                let w = hi - lo;
                (-t * lo).exp() * (lo * phi1(t * w) + w * phi2(t * w))
            }
        }
    }
}

/// `(1 - e^{-z}) / z`, continuous at 0.
pub(crate) fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-300 {
        1.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// `∫_0^1 y e^{-zy} dy = (1 - e^{-z}(1 + z)) / z²`.
pub(crate) fn phi2(z: f64) -> f64 {
    if z < 1.0 {
        // sum_k (-z)^k / (k! (k + 2))
        let mut term = 1.0;
        let mut sum = 0.5;
        for k in 1..40 {
            term *= -z / k as f64;
            let add = term / (k as f64 + 2.0);
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        (-(-z).exp_m1() - z * (-z).exp()) / (z * z)
    }
}

/// A validated law for one role.
#[derive(Debug, Clone, PartialEq)]
pub struct DistSpec {
    pub family: Family,
    pub role: Role,
}

impl DistSpec {
    pub fn new(family: Family, role: Role) -> Result<Self, EnvError> {
        validate_spec(DistSpec { family, role })
    }

    pub fn parse(text: &str, role: Role) -> Result<Self, EnvError> {
        Self::new(text.parse()?, role)
    }

    pub fn recovery(text: &str) -> Result<Self, EnvError> {
        Self::parse(text, Role::Recovery)
    }

    pub fn weight(text: &str) -> Result<Self, EnvError> {
        Self::parse(text, Role::Weight)
    }

    pub fn law(&self) -> Law {
        self.family.law()
    }

    /// True for the point mass at `v`.
    pub fn is_constant(&self, v: f64) -> bool {
        self.law().is_constant() == Some(v)
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.family.fmt(f)
    }
}

/// Returns the spec unchanged iff its parameters and role-dependent
/// support constraints hold.
pub fn validate_spec(spec: DistSpec) -> Result<DistSpec, EnvError> {
    spec.family.check_params()?;
    let law = spec.family.law();
    let (lo, hi) = (law.support_min(), law.support_max());
    match spec.role {
        Role::Recovery => {
            if lo < 1.0 {
                return Err(EnvError::SupportViolation(format!(
                    "recovery support must lie in [1, inf) (xi >= 1), but {} puts mass at {lo}",
                    spec.family
                )));
            }
        }
        Role::Weight => {
            if lo < 0.0 || hi > 1.0 {
                return Err(EnvError::SupportViolation(format!(
                    "weight support must lie in [0, 1] (0 <= rho <= 1), but {} spans [{lo}, {hi}]",
                    spec.family
                )));
            }
            if hi <= 0.0 {
                return Err(EnvError::SupportViolation(format!(
                    "weight must satisfy P(rho > 0) > 0, but {} is identically 0",
                    spec.family
                )));
            }
        }
    }
    Ok(spec)
}

/// Serde adapters storing a spec as its text syntax.
pub mod serde_spec {
    use super::{DistSpec, Role};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    fn de<'de, D: Deserializer<'de>>(d: D, role: Role) -> Result<DistSpec, D::Error> {
        let text = String::deserialize(d)?;
        DistSpec::parse(&text, role).map_err(D::Error::custom)
    }

    pub fn serialize<S: Serializer>(spec: &DistSpec, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(spec)
    }

    pub mod recovery {
        pub use super::serialize;
        pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<super::DistSpec, D::Error> {
            super::de(d, super::Role::Recovery)
        }
    }

    pub mod weight {
        pub use super::serialize;
        pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<super::DistSpec, D::Error> {
            super::de(d, super::Role::Weight)
        }
    }
}

/// `E ρ`, `E 1/ξ`, `E 1/ξ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean_rho: f64,
    pub mean_inv_xi: f64,
    pub mean_inv_xi_sq: f64,
}

pub fn moments(rho_spec: &DistSpec, xi_spec: &DistSpec) -> Moments {
    let rho = rho_spec.law();
    let xi = xi_spec.law();
    Moments { mean_rho: rho.mean(), mean_inv_xi: xi.mean_inv(), mean_inv_xi_sq: xi.mean_inv_sq() }
}

/// `λ_c = 1 / (E ρ · E 1/ξ)`.
pub fn critical_lambda(m: &Moments) -> Result<f64, EnvError> {
    if m.mean_rho <= 0.0 || m.mean_inv_xi <= 0.0 {
        return Err(EnvError::DegenerateMoments);
    }
    Ok(1.0 / (m.mean_rho * m.mean_inv_xi))
}

/// I.i.d. recovery rates on vertices and symmetric i.i.d. weights on the
/// edges of `C_n`, evaluated on demand from `seed`.
///
/// Values are keyed by vertex index (resp. unordered vertex pair) and do not
/// depend on `n`, so `C_n` sits inside `C_m` for `n ≤ m` under one seed.
#[derive(Debug, Clone)]
pub struct Environment {
    n: usize,
    seed: u64,
    xi_spec: DistSpec,
    rho_spec: DistSpec,
    xi_law: Law,
    rho_law: Law,
}

impl Environment {
    pub fn new(n: usize, seed: u64, xi_spec: DistSpec, rho_spec: DistSpec) -> Result<Self, EnvError> {
        if xi_spec.role != Role::Recovery {
            return Err(EnvError::ParamViolation("xi spec must have role recovery".into()));
        }
        if rho_spec.role != Role::Weight {
            return Err(EnvError::ParamViolation("rho spec must have role weight".into()));
        }
        if n == 0 {
            return Err(EnvError::ParamViolation("n >= 1".into()));
        }
        let xi_spec = validate_spec(xi_spec)?;
        let rho_spec = validate_spec(rho_spec)?;
        Ok(Self { n, seed, xi_law: xi_spec.law(), rho_law: rho_spec.law(), xi_spec, rho_spec })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn xi_spec(&self) -> &DistSpec {
        &self.xi_spec
    }

    pub fn rho_spec(&self) -> &DistSpec {
        &self.rho_spec
    }

    pub fn moments(&self) -> Moments {
        moments(&self.rho_spec, &self.xi_spec)
    }

    pub fn xi_at(&self, j: usize) -> Result<f64, EnvError> {
        if j >= self.n {
            return Err(EnvError::IndexOutOfRange { index: j, n: self.n });
        }
        Ok(self.xi(j))
    }

    pub fn rho_at(&self, i: usize, j: usize) -> Result<f64, EnvError> {
        for v in [i, j] {
            if v >= self.n {
                return Err(EnvError::IndexOutOfRange { index: v, n: self.n });
            }
        }
        if i == j {
            return Err(EnvError::SelfLoop(i));
        }
        Ok(self.rho(i, j))
    }

    /// Unchecked recovery rate of `j`.
    #[inline]
    pub fn xi(&self, j: usize) -> f64 {
        debug_assert!(j < self.n);
        if let Law::Atoms(a) = &self.xi_law {
            if a.len() == 1 {
                return a[0].0;
            }
        }
        self.xi_law.quantile(keyed_unit(self.seed, StreamKind::RecoveryRate, j as u64, 0))
    }

    /// Unchecked weight of the edge `{i, j}`.
    #[inline]
    pub fn rho(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i != j && i < self.n && j < self.n);
        if let Law::Atoms(a) = &self.rho_law {
            if a.len() == 1 {
                return a[0].0;
            }
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        self.rho_law.quantile(keyed_unit(self.seed, StreamKind::EdgeWeight, lo as u64, hi as u64))
    }
}
