//! Numerical norms of radial profiles on origin-centred balls and a
//! divergence classifier built on truncated integrals.
//!
//! Every estimator integrates the `p`-th power of its norm over the region
//! left after excluding a neighbourhood of the origin of radius `ε_j = R 2^{-j}`.
//! The contributions of consecutive dyadic shells behave like `ε^γ` near the
//! origin, with `γ > 0` exactly when the full integral converges; the
//! classifier reads the sign of the fitted `γ`.

mod gagliardo;
mod modulus;
mod radial;

use serde::{Deserialize, Serialize, Serializer};

use crate::exec::Execution;
use crate::profiles::{Membership, RadialProfile};
use crate::quadrature::QuadratureError;
use crate::radial_maps::{Ball, MapError};

pub use gagliardo::{angular_kernel, gagliardo_seminorm, reduced_angular_kernel};
pub use modulus::modulus_seminorm;
pub use radial::{lp_norm, sobolev_seminorm};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormError {
    #[error("norms are computed on origin-centred balls only")]
    OffCentre,
    #[error("integrability exponent must lie in (1, ∞), got {0}")]
    Exponent(f64),
    #[error("smoothness must lie in [0, 1], got {0}")]
    Smoothness(f64),
    #[error("fractional estimators need 0 < s < 1, got {0}")]
    NotFractional(f64),
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("invalid estimator configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    GagliardoDoubleIntegral,
    ModulusOfSmoothness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Member,
    NonMember,
    Inconclusive,
}

impl Verdict {
    pub fn is_definite(self) -> bool {
        self != Verdict::Inconclusive
    }

    /// Whether a numerical verdict contradicts an analytic one. Boundary
    /// and inconclusive values never contradict anything.
    pub fn contradicts(self, analytic: Membership) -> bool {
        matches!(
            (self, analytic),
            (Verdict::Member, Membership::NonMember) | (Verdict::NonMember, Membership::Member)
        )
    }

    pub fn agrees_with(self, analytic: Membership) -> bool {
        matches!(
            (self, analytic),
            (Verdict::Member, Membership::Member) | (Verdict::NonMember, Membership::NonMember)
        )
    }
}

impl From<Membership> for Verdict {
    fn from(m: Membership) -> Self {
        match m {
            Membership::Member => Verdict::Member,
            Membership::NonMember => Verdict::NonMember,
            Membership::Boundary => Verdict::Inconclusive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormValue {
    Finite(f64),
    Divergent,
}

impl NormValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            NormValue::Finite(v) => Some(v),
            NormValue::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        self == NormValue::Divergent
    }
}

impl Serialize for NormValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NormValue::Finite(v) => s.serialize_f64(*v),
            NormValue::Divergent => s.serialize_str("divergent"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MeshDiagnostics {
    pub cells: usize,
    pub nodes: usize,
    pub quadrature_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

/// Truncated integrals and their fitted decay.
///
/// `partials[i]` is the integral of the `p`-th power of the norm's integrand
/// over the part of the domain at distance at least `cutoffs[i]` from the
/// origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: NormValue,
    pub cutoffs: Vec<f64>,
    pub partials: Vec<f64>,
    /// Slope of `log(partial)` against `log(cutoff)` over the fitted window.
    pub log_slope: f64,
    /// Slope of `log(shell increment)` against `log(cutoff)`; positive for
    /// convergent integrals.
    pub shell_slope: f64,
    pub r2: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub mesh: MeshDiagnostics,
}

impl NormEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("estimate serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractionalNormSpec {
    pub s: f64,
    pub p: f64,
    pub n: usize,
    pub domain: Ball,
    pub estimator: Estimator,
}

impl FractionalNormSpec {
    pub fn new(s: f64, p: f64, n: usize, estimator: Estimator) -> Result<Self, NormError> {
        let spec = FractionalNormSpec { s, p, n, domain: Ball::centered(n, 1.0)?, estimator };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self, NormError> {
        self.domain = Ball::centered(self.n, radius)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), NormError> {
        if self.n < 2 {
            return Err(NormError::Dimension(self.n));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(NormError::Exponent(self.p));
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(NormError::Smoothness(self.s));
        }
        check_domain(&self.domain, self.n)
    }

    pub fn radius(&self) -> f64 {
        self.domain.radius()
    }
}

fn check_domain(ball: &Ball, n: usize) -> Result<(), NormError> {
    if !ball.is_origin_centered() {
        return Err(NormError::OffCentre);
    }
    if ball.dim() != n {
        return Err(NormError::Map(MapError::PointDimension { expected: n, got: ball.dim() }));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    /// `|shell slope|` below this is not trusted as a verdict.
    pub slope_threshold: f64,
    pub min_r2: f64,
    /// Relative size of the last shell below which partials count as settled.
    pub cauchy_tolerance: f64,
    /// Cutoffs `R 2^{-j}` for `j = min_level..=max_level`.
    pub min_level: u32,
    pub max_level: u32,
    /// Number of trailing shells entering the fit.
    pub fit_shells: usize,
    pub seed: u64,
    /// Direction samples per shift scale for the modulus estimator.
    pub samples: usize,
    pub execution: Execution,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            slope_threshold: 0.05,
            min_r2: 0.99,
            cauchy_tolerance: 1e-2,
            min_level: 2,
            max_level: 12,
            fit_shells: 6,
            seed: 0x51ab_5eed,
            samples: 100_000,
            execution: Execution::default(),
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<(), NormError> {
        let bad = |m: &str| Err(NormError::Config(m.to_string()));
        if !(self.slope_threshold >= 0.0) {
            return bad("slope_threshold must be nonnegative");
        }
        if self.min_level < 1 || self.max_level <= self.min_level || self.max_level > 40 {
            return bad("need 1 ≤ min_level < max_level ≤ 40");
        }
        let shells = (self.max_level - self.min_level) as usize;
        if self.fit_shells < 3 || self.fit_shells > shells {
            return bad("fit_shells must be at least 3 and at most max_level − min_level");
        }
        if self.samples < 1000 {
            return bad("samples must be at least 1000");
        }
        Ok(())
    }

    pub fn cutoffs(&self, radius: f64) -> Vec<f64> {
        (self.min_level..=self.max_level).map(|j| radius * 0.5f64.powi(j as i32)).collect()
    }
}

/// Dispatches on the smoothness: `s = 0` is the `L^p` norm, `s = 1` the
/// gradient seminorm, anything between uses the requested fractional
/// estimator.
pub fn estimate(
    prof: &RadialProfile,
    spec: &FractionalNormSpec,
    cfg: &EstimatorConfig,
) -> Result<NormEstimate, NormError> {
    spec.validate()?;
    cfg.validate()?;
    if spec.s == 0.0 {
        return lp_norm(prof, spec.p, &spec.domain, cfg);
    }
    if spec.s == 1.0 {
        let lp = lp_norm(prof, spec.p, &spec.domain, cfg)?;
        let mut grad = sobolev_seminorm(prof, spec.p, &spec.domain, cfg)?;
        if lp.value.is_divergent() {
            grad.value = NormValue::Divergent;
            grad.verdict = Verdict::NonMember;
        }
        return Ok(grad);
    }
    match spec.estimator {
        Estimator::GagliardoDoubleIntegral => gagliardo_seminorm(prof, spec, cfg),
        Estimator::ModulusOfSmoothness => modulus_seminorm(prof, spec, cfg),
    }
}

pub fn classify_membership(
    prof: &RadialProfile,
    spec: &FractionalNormSpec,
    cfg: &EstimatorConfig,
) -> Result<Verdict, NormError> {
    Ok(estimate(prof, spec, cfg)?.verdict)
}

/// Least-squares slope and `R²` of `y` against `x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Turns per-shell contributions into an estimate.
///
/// `shells[c]` is the contribution of the dyadic layer at distance
/// `[R 2^{-c-1}, R 2^{-c}]` from the origin, for `c = 0..max_level`.
/// `exponent` is `p`; the reported value is the `p`-th root.
pub(crate) fn assemble(
    shells: &[f64],
    radius: f64,
    exponent: f64,
    cfg: &EstimatorConfig,
    mesh: MeshDiagnostics,
    seed: Option<u64>,
) -> NormEstimate {
    let cutoffs = cfg.cutoffs(radius);
    let partials: Vec<f64> = (cfg.min_level..=cfg.max_level)
        .map(|j| shells[..j as usize].iter().sum())
        .collect();
    let last = *partials.last().expect("nonempty");

    let window = (cfg.max_level as usize - cfg.fit_shells)..cfg.max_level as usize;
    let log_cut: Vec<f64> = window.clone().map(|c| (radius * 0.5f64.powi(c as i32 + 1)).ln()).collect();
    let log_slope = if last > 0.0 {
        let k = cfg.fit_shells;
        let lp: Vec<f64> = partials[partials.len() - k..].iter().map(|v| v.ln()).collect();
        let lc: Vec<f64> = cutoffs[cutoffs.len() - k..].iter().map(|v| v.ln()).collect();
        fit_line(&lc, &lp).0.min(0.0)
    } else {
        0.0
    };

    let tail = &shells[window.clone()];
    let cauchy = last == 0.0 || tail[tail.len() - 1] <= cfg.cauchy_tolerance * last;
    let (shell_slope, r2, verdict);
    if tail.iter().all(|&v| v > 0.0) {
        let ls: Vec<f64> = tail.iter().map(|v| v.ln()).collect();
        let (slope, fit) = fit_line(&log_cut, &ls);
        shell_slope = slope;
        r2 = fit;
        let tau = cfg.slope_threshold;
        verdict = if slope < -tau && fit >= cfg.min_r2 {
            Verdict::NonMember
        } else if (slope > tau && fit >= cfg.min_r2) || (slope > -tau && cauchy) {
            Verdict::Member
        } else {
            Verdict::Inconclusive
        };
    } else {
        // a vanishing layer near the origin means the profile is flat there
        shell_slope = f64::INFINITY;
        r2 = 1.0;
        verdict = if cauchy { Verdict::Member } else { Verdict::Inconclusive };
    }

    let value = if verdict == Verdict::NonMember {
        NormValue::Divergent
    } else {
        let tail_sum = if shell_slope.is_finite() && shell_slope > 0.0 {
            let ratio = 0.5f64.powf(shell_slope);
            tail[tail.len() - 1] * ratio / (1.0 - ratio)
        } else {
            0.0
        };
        NormValue::Finite((last + tail_sum).powf(1.0 / exponent))
    };
    NormEstimate {
        value,
        cutoffs,
        partials,
        log_slope,
        shell_slope,
        r2,
        verdict,
        seed,
        mesh,
    }
}
