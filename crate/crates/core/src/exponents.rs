//! Integrability/smoothness exponent arithmetic for composition with a
//! quasiconformal map.
//!
//! Exponents are stored through their reciprocals so that `p = ∞` is the
//! ordinary value `1/p = 0`. All formulas are evaluated on [`Real`], which
//! keeps rational inputs exact; the regime split `sp` vs `n` is therefore an
//! exact comparison whenever `s` and `p` are rational.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::real::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExponentError {
    #[error("smoothness must lie in [0, 1], got {0}")]
    Smoothness(Real),
    #[error("integrability exponent out of range: {0}")]
    Exponent(String),
    #[error("invalid regularity data: {0}")]
    Regularity(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

type Result<T> = std::result::Result<T, ExponentError>;

/// An integrability exponent `0 < p ≤ ∞`, held as `1/p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Exponent {
    inv: Real,
}

impl Exponent {
    pub fn new(p: Real) -> Result<Self> {
        if !p.is_positive() {
            return Err(ExponentError::Exponent(format!("p = {p} is not positive")));
        }
        Ok(Exponent { inv: p.recip() })
    }

    pub fn infinity() -> Self {
        Exponent { inv: Real::zero() }
    }

    pub fn from_inv(inv: Real) -> Result<Self> {
        if inv.is_negative() {
            return Err(ExponentError::Exponent(format!("1/p = {inv} is negative")));
        }
        Ok(Exponent { inv })
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Exponent::new(Real::ratio(num, den)).expect("positive ratio")
    }

    pub fn int(p: i64) -> Self {
        Exponent::ratio(p, 1)
    }

    pub fn inv(&self) -> &Real {
        &self.inv
    }

    pub fn is_infinite(&self) -> bool {
        self.inv.is_zero()
    }

    /// `p` itself, `None` for `p = ∞`.
    pub fn value(&self) -> Option<Real> {
        (!self.is_infinite()).then(|| self.inv.recip())
    }

    pub fn to_f64(&self) -> f64 {
        match self.value() {
            Some(p) => p.to_f64(),
            None => f64::INFINITY,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.inv.is_exact()
    }

    /// `1 < p ≤ ∞`.
    fn require_above_one(&self) -> Result<()> {
        if self.inv >= Real::one() {
            return Err(ExponentError::Exponent(format!("p = {self} must exceed 1")));
        }
        Ok(())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(p) => write!(f, "{p}"),
            None => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = ExponentError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::infinity()),
            t => {
                let p: Real = t.parse().map_err(|e| ExponentError::Exponent(format!("{e}")))?;
                Exponent::new(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Num(Real),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Num(p) => Exponent::new(p).map_err(serde::de::Error::custom),
        }
    }
}

fn check_smoothness(s: &Real) -> Result<()> {
    if s.is_negative() || *s > Real::one() {
        return Err(ExponentError::Smoothness(s.clone()));
    }
    Ok(())
}

fn check_open_smoothness(s: &Real) -> Result<()> {
    if !s.is_positive() || *s >= Real::one() {
        return Err(ExponentError::Precondition(format!(
            "interpolation needs 0 < s < 1, got {s}"
        )));
    }
    Ok(())
}

/// A point `(1/p, s)` of the smoothness–integrability diagram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentPoint {
    pub inv_p: Real,
    pub s: Real,
}

impl ExponentPoint {
    pub fn new(inv_p: Real, s: Real) -> Result<Self> {
        if inv_p.is_negative() || inv_p >= Real::one() {
            return Err(ExponentError::Exponent(format!("1/p = {inv_p} outside [0, 1)")));
        }
        check_smoothness(&s)?;
        Ok(ExponentPoint { inv_p, s })
    }

    pub fn of(s: &Real, p: &Exponent) -> Result<Self> {
        ExponentPoint::new(p.inv().clone(), s.clone())
    }

    /// Horizontal distance `|1/p − s/n|` to the critical line.
    pub fn critical_distance(&self, n: u32) -> Real {
        (&self.inv_p - &self.s / Real::from(n as i64)).abs()
    }
}

/// Position relative to the critical line `sp = n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl Regime {
    /// Sign of `sp − n`, evaluated as `s − n/p` so that `p = ∞` needs no
    /// special case.
    pub fn classify(s: &Real, p: &Exponent, n: u32) -> Regime {
        let diff = s - &(Real::from(n as i64) * p.inv());
        match diff.sign() {
            std::cmp::Ordering::Less => Regime::Subcritical,
            std::cmp::Ordering::Equal => Regime::Critical,
            std::cmp::Ordering::Greater => Regime::Supercritical,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        })
    }
}

/// Integrability of the Jacobian of a quasiconformal map: `J^a` and `J^{-b}`
/// are integrable on the relevant domain with bounds `C_a`, `C_b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QcRegularity {
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<Real>,
    pub a: Real,
    pub c_a: Real,
    pub b: Real,
    pub c_b: Real,
}

impl QcRegularity {
    pub fn new(n: u32, a: Real, b: Real) -> Result<Self> {
        QcRegularity::with_bounds(n, None, a, Real::one(), b, Real::one())
    }

    pub fn with_bounds(
        n: u32,
        distortion: Option<Real>,
        a: Real,
        c_a: Real,
        b: Real,
        c_b: Real,
    ) -> Result<Self> {
        let reg = QcRegularity { n, distortion, a, c_a, b, c_b };
        reg.validate()?;
        Ok(reg)
    }

    /// Regularity of a planar `K`-quasiconformal map with the requested powers,
    /// which must lie strictly below the sharp planar bounds.
    pub fn planar(k: Real, a: Real, b: Real) -> Result<Self> {
        let (a_k, b_k) = planar_bounds(&k)?;
        if !a_k.exceeds(&a) || !b_k.exceeds(&b) {
            return Err(ExponentError::Regularity(format!(
                "K = {k} requires a < {a_k} and b < {b_k}, got a = {a}, b = {b}"
            )));
        }
        QcRegularity::with_bounds(2, Some(k), a, Real::one(), b, Real::one())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ExponentError::Regularity(m));
        if self.n < 2 {
            return bad(format!("dimension n = {} must be at least 2", self.n));
        }
        if self.a <= Real::one() {
            return bad(format!("a = {} must exceed 1", self.a));
        }
        if !self.b.is_positive() {
            return bad(format!("b = {} must be positive", self.b));
        }
        if !self.c_a.is_positive() || !self.c_b.is_positive() {
            return bad("C_a and C_b must be positive".into());
        }
        if let Some(k) = &self.distortion {
            if *k < Real::one() {
                return bad(format!("distortion K = {k} must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> Real {
        Real::from(self.n as i64)
    }
}

/// Why a formula's hypotheses fail. Rejections are ordinary results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionReason {
    /// `1/q ≥ 1`: the target exponent does not exceed one.
    TargetNotAboveOne,
    /// Subcritical Sobolev case below `p ≥ 1 + (n−1)/(nb+1)`.
    BelowSobolevThreshold,
    /// The smoothness after composition is not positive.
    NonPositiveSmoothness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rejection {
    pub reason: RejectionReason,
    /// The offending quantity (`1/q`, or `β`).
    pub value: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome<T> {
    Accepted(T),
    Rejected(Rejection),
}

impl<T> Outcome<T> {
    pub fn accepted(self) -> Option<T> {
        match self {
            Outcome::Accepted(v) => Some(v),
            Outcome::Rejected(_) => None,
        }
    }

    pub fn is_rejected(&self) -> bool {
        matches!(self, Outcome::Rejected(_))
    }
}

/// Result of the composition-target formula together with the quantities it
/// was built from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Target {
    pub q: Exponent,
    pub regime: Regime,
    /// The Jacobian power in charge: `a` when `sp ≥ n`, `b` otherwise.
    pub c: Real,
    /// `d = |s/n − 1/p|`.
    pub distance: Real,
}

impl Target {
    /// `1/q − 1/p`, which equals `d / c`.
    pub fn gap(&self, p: &Exponent) -> Real {
        self.q.inv() - p.inv()
    }
}

/// `1/q = 1/p + (1/c)|s/n − 1/p|` with `c = a` if `sp ≥ n` and `c = b`
/// otherwise. Rejected unless `q > 1`.
pub fn target_q(s: &Real, p: &Exponent, reg: &QcRegularity) -> Result<Outcome<Target>> {
    check_smoothness(s)?;
    p.require_above_one()?;
    reg.validate()?;
    let regime = Regime::classify(s, p, reg.n);
    let c = match regime {
        Regime::Subcritical => reg.b.clone(),
        Regime::Critical | Regime::Supercritical => reg.a.clone(),
    };
    let distance = (s / &reg.dim() - p.inv()).abs();
    let inv_q = p.inv() + &distance / &c;
    if inv_q >= Real::one() {
        return Ok(Outcome::Rejected(Rejection {
            reason: RejectionReason::TargetNotAboveOne,
            value: inv_q,
        }));
    }
    Ok(Outcome::Accepted(Target {
        q: Exponent::from_inv(inv_q)?,
        regime,
        c,
        distance,
    }))
}

/// A horizontal arrow `(1/p, s) → (1/q, s)` of the exponent diagram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Arrow {
    pub from: ExponentPoint,
    pub to: ExponentPoint,
    pub regime: Regime,
    pub c: Real,
    pub distance: Real,
    pub gap: Real,
}

impl Arrow {
    /// Joins `(1/p, s)` to `(1/q, s)`; `c` follows the convention of [`target_q`].
    pub fn between(s: &Real, p: &Exponent, q: &Exponent, reg: &QcRegularity) -> Result<Self> {
        let from = ExponentPoint::of(s, p)?;
        let to = ExponentPoint::of(s, q)?;
        let regime = Regime::classify(s, p, reg.n);
        let c = match regime {
            Regime::Subcritical => reg.b.clone(),
            _ => reg.a.clone(),
        };
        let distance = from.critical_distance(reg.n);
        let gap = &to.inv_p - &from.inv_p;
        Ok(Arrow { from, to, regime, c, distance, gap })
    }

    /// `gap = d / c`.
    pub fn is_proportional(&self) -> bool {
        self.gap == &self.distance / &self.c
    }
}

/// The arrow from `(1/p, s)` to the target `(1/q, s)`.
pub fn target_arrow(s: &Real, p: &Exponent, reg: &QcRegularity) -> Result<Outcome<Arrow>> {
    Ok(match target_q(s, p, reg)? {
        Outcome::Accepted(t) => Outcome::Accepted(Arrow::between(s, p, &t.q, reg)?),
        Outcome::Rejected(r) => Outcome::Rejected(r),
    })
}

/// Supremum of admissible Jacobian powers for a planar `K`-quasiconformal map.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanarBound {
    Finite(Real),
    Unbounded,
}

impl PlanarBound {
    /// Whether `v` lies strictly below the bound.
    pub fn exceeds(&self, v: &Real) -> bool {
        match self {
            PlanarBound::Finite(x) => x > v,
            PlanarBound::Unbounded => true,
        }
    }

    pub fn value(&self) -> Option<&Real> {
        match self {
            PlanarBound::Finite(x) => Some(x),
            PlanarBound::Unbounded => None,
        }
    }

    /// `1/bound`, zero when unbounded.
    pub fn reciprocal(&self) -> Real {
        match self {
            PlanarBound::Finite(x) => x.recip(),
            PlanarBound::Unbounded => Real::zero(),
        }
    }
}

impl fmt::Display for PlanarBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanarBound::Finite(x) => write!(f, "{x}"),
            PlanarBound::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// `(a_K, b_K) = (K/(K−1), 1/(K−1))`; both unbounded for `K = 1`.
pub fn planar_bounds(k: &Real) -> Result<(PlanarBound, PlanarBound)> {
    if *k < Real::one() {
        return Err(ExponentError::Regularity(format!("distortion K = {k} below 1")));
    }
    if *k == Real::one() {
        return Ok((PlanarBound::Unbounded, PlanarBound::Unbounded));
    }
    let km1 = k - &Real::one();
    Ok((
        PlanarBound::Finite(k / &km1),
        PlanarBound::Finite(km1.recip()),
    ))
}

/// Strict lower bound on `1/q` for a planar `K`-quasiconformal map:
/// `1/p + (1/c_K)|s/2 − 1/p|`.
pub fn planar_inv_q_bound(s: &Real, p: &Exponent, k: &Real) -> Result<(Regime, Real)> {
    check_smoothness(s)?;
    p.require_above_one()?;
    let (a_k, b_k) = planar_bounds(k)?;
    let regime = Regime::classify(s, p, 2);
    let c = match regime {
        Regime::Subcritical => b_k,
        _ => a_k,
    };
    let distance = (s / &Real::int(2) - p.inv()).abs();
    Ok((regime, p.inv() + &(c.reciprocal() * distance)))
}

/// Lebesgue composition: `1/q = (1/p)(1 + 1/b)`, any `0 < p ≤ ∞`.
pub fn lebesgue_q(p: &Exponent, b: &Real) -> Result<Exponent> {
    if !b.is_positive() {
        return Err(ExponentError::Regularity(format!("b = {b} must be positive")));
    }
    Exponent::from_inv(p.inv() * &(Real::one() + b.recip()))
}

/// First-order Sobolev composition.
pub fn sobolev_q(p: &Exponent, reg: &QcRegularity) -> Result<Outcome<Exponent>> {
    p.require_above_one()?;
    reg.validate()?;
    let inv_n = reg.dim().recip();
    match p.inv().partial_cmp(&inv_n) {
        // p > n
        Some(std::cmp::Ordering::Less) => {
            let inv_q = p.inv() + &((&inv_n - p.inv()) / &reg.a);
            Ok(Outcome::Accepted(Exponent::from_inv(inv_q)?))
        }
        Some(std::cmp::Ordering::Equal) => Ok(Outcome::Accepted(p.clone())),
        _ => {
            let n = reg.dim();
            let threshold = Real::one() + (&n - &Real::one()) / (&n * &reg.b + Real::one());
            let inv_q = p.inv() + &((p.inv() - &inv_n) / &reg.b);
            // p ≥ threshold  ⇔  1/p ≤ 1/threshold
            if *p.inv() > threshold.recip() {
                return Ok(Outcome::Rejected(Rejection {
                    reason: RejectionReason::BelowSobolevThreshold,
                    value: inv_q,
                }));
            }
            Ok(Outcome::Accepted(Exponent::from_inv(inv_q)?))
        }
    }
}

/// Smoothness retained by a planar `K`-quasiconformal composition in the
/// diagonal Besov scale: `β = s − (K−1)(2/p − s)`, rejected unless positive.
pub fn hk_beta_planar(s: &Real, p: &Exponent, k: &Real) -> Result<Outcome<Real>> {
    check_smoothness(s)?;
    p.require_above_one()?;
    if *k < Real::one() {
        return Err(ExponentError::Regularity(format!("distortion K = {k} below 1")));
    }
    let two_over_p = Real::int(2) * p.inv();
    if *s >= two_over_p {
        return Err(ExponentError::Precondition(format!("sp < 2 fails for s = {s}, p = {p}")));
    }
    let beta = s - &((k - &Real::one()) * (two_over_p - s));
    if beta.is_positive() {
        Ok(Outcome::Accepted(beta))
    } else {
        Ok(Outcome::Rejected(Rejection {
            reason: RejectionReason::NonPositiveSmoothness,
            value: beta,
        }))
    }
}

/// Volume-growth exponent `α = (b+1)/b` implied by integrability of `J^{-b}`.
pub fn alpha_from_b(b: &Real) -> Result<Real> {
    if !b.is_positive() {
        return Err(ExponentError::Regularity(format!("b = {b} must be positive")));
    }
    Ok((b + &Real::one()) / b)
}

/// `β = n/q − α(n/q − s)` for maps with `|φ(B)| ≥ C|B|^α`. Requires `sq ≤ n`.
pub fn hk_beta_general(s: &Real, q: &Exponent, alpha: &Real, n: u32) -> Result<Real> {
    check_smoothness(s)?;
    if *alpha < Real::one() {
        return Err(ExponentError::Precondition(format!("α = {alpha} must be at least 1")));
    }
    let n_over_q = Real::from(n as i64) * q.inv();
    if *s > n_over_q {
        return Err(ExponentError::Precondition(format!("sq ≤ n fails for s = {s}, q = {q}")));
    }
    Ok(&n_over_q - &(alpha * &(&n_over_q - s)))
}

/// Endpoint indices for interpolating a Lebesgue bound (λ = 0) with a
/// first-order Sobolev bound (λ = 1).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpolationIndices {
    pub regime: Regime,
    pub s: Real,
    /// The pair actually interpolated. For the subcritical regime this is the
    /// input `p` and the target `q`; for the critical and supercritical
    /// regimes it is the `ε₀`-perturbed approximating pair.
    pub p: Exponent,
    pub q: Exponent,
    pub p0: Exponent,
    pub p1: Exponent,
    pub q0: Exponent,
    pub q1: Exponent,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon0: Option<Real>,
}

impl InterpolationIndices {
    /// Residuals of `(1−s)/p0 + s/p1 = 1/p` and `(1−s)/q0 + s/q1 = 1/q`.
    pub fn convex_residuals(&self) -> (Real, Real) {
        let one_minus = Real::one() - &self.s;
        let rp = &one_minus * self.p0.inv() + &self.s * self.p1.inv() - self.p.inv();
        let rq = &one_minus * self.q0.inv() + &self.s * self.q1.inv() - self.q.inv();
        (rp, rq)
    }

    /// Residuals of `1/q_λ − 1/p_λ = (1/b)(1/p_λ − λ/n)` for λ = 0, 1.
    ///
    /// In the supercritical regime the Sobolev endpoint (λ = 1) lies above
    /// the critical line and obeys `1/q_1 − 1/p_1 = (1/a)(1/n − 1/p_1)`
    /// instead; that relation is used there.
    pub fn lambda_residuals(&self, reg: &QcRegularity) -> [Real; 2] {
        let n = reg.dim();
        let rel = |p: &Exponent, q: &Exponent, lambda: i64| {
            let lhs = q.inv() - p.inv();
            let rhs = (p.inv() - &(Real::int(lambda) / &n)) / &reg.b;
            lhs - rhs
        };
        let sobolev = if self.regime == Regime::Supercritical {
            let lhs = self.q1.inv() - self.p1.inv();
            lhs - (n.recip() - self.p1.inv()) / &reg.a
        } else {
            rel(&self.p1, &self.q1, 1)
        };
        [rel(&self.p0, &self.q0, 0), sobolev]
    }

    /// Arrows at the Lebesgue (`s = 0`) and Sobolev (`s = 1`) endpoints.
    pub fn arrows(&self, reg: &QcRegularity) -> Result<[Arrow; 2]> {
        Ok([
            Arrow::between(&Real::zero(), &self.p0, &self.q0, reg)?,
            Arrow::between(&Real::one(), &self.p1, &self.q1, reg)?,
        ])
    }

    fn check(self, tol: f64) -> Result<Self> {
        let (rp, rq) = self.convex_residuals();
        for (name, r) in [("p", rp), ("q", rq)] {
            let ok = if r.is_exact() { r.is_zero() } else { r.abs().to_f64() <= tol };
            if !ok {
                return Err(ExponentError::Precondition(format!(
                    "convex identity for {name} violated by {r}"
                )));
            }
        }
        for (name, q) in [("q0", &self.q0), ("q1", &self.q1)] {
            if *q.inv() >= Real::one() {
                return Err(ExponentError::Precondition(format!("{name} = {q} is not above 1")));
            }
        }
        for (name, e) in [("p0", &self.p0), ("p1", &self.p1)] {
            if e.inv().is_negative() {
                return Err(ExponentError::Precondition(format!("{name} has negative reciprocal")));
            }
        }
        Ok(self)
    }
}

/// Default perturbation `ε₀`: half the smallest of the constraints the
/// critical/supercritical constructions impose. The logarithmic constraint
/// is taken as the exact dyadic value of its `f64` so that rational inputs
/// keep producing exact indices.
pub fn default_epsilon0(s: &Real, p: &Exponent, reg: &QcRegularity) -> Result<Real> {
    check_open_smoothness(s)?;
    let regime = Regime::classify(s, p, reg.n);
    let mut bounds: Vec<Real> = Vec::new();
    let log_cb = reg.c_b.to_f64().ln();
    if log_cb > 0.0 {
        bounds.push(Real::exact_from_f64(std::f64::consts::LN_2 / log_cb).expect("finite"));
    }
    let one_minus = Real::one() - s;
    match regime {
        Regime::Subcritical => {}
        Regime::Critical => bounds.push(one_minus.clone()),
        Regime::Supercritical => {
            let inv_sp = p.inv() / s;
            let gap = (&inv_sp - &reg.dim().recip()).abs();
            bounds.push(gap.half() * s / &one_minus);
            bounds.push(p.inv().clone());
        }
    }
    let smallest = bounds
        .into_iter()
        .reduce(Real::min)
        .unwrap_or_else(|| one_minus.clone());
    Ok(smallest.half())
}

/// Builds the interpolation endpoints for `(s, p)` under `reg`.
///
/// `epsilon0` is only used by the critical and supercritical constructions;
/// `None` selects [`default_epsilon0`].
pub fn interpolation_indices(
    s: &Real,
    p: &Exponent,
    reg: &QcRegularity,
    epsilon0: Option<Real>,
) -> Result<InterpolationIndices> {
    check_open_smoothness(s)?;
    p.require_above_one()?;
    reg.validate()?;
    let n = reg.dim();
    let inv_n = n.recip();
    let one = Real::one();
    let one_minus = &one - s;
    let regime = Regime::classify(s, p, reg.n);
    let tol = 1e-12;

    match regime {
        Regime::Subcritical => {
            let q = match target_q(s, p, reg)? {
                Outcome::Accepted(t) => t.q,
                Outcome::Rejected(r) => {
                    return Err(ExponentError::Precondition(format!(
                        "target exponent rejected (1/q = {})",
                        r.value
                    )))
                }
            };
            // (1 − 1/p)/(n − s) = (1 − 1/p_λ)/(n − λ)
            let slope_p = (&one - p.inv()) / (&n - s);
            let slope_q = (&one - q.inv()) / (&n - s);
            let at = |slope: &Real, lambda: i64| {
                Exponent::from_inv(&one - &(slope * &(&n - &Real::int(lambda))))
            };
            InterpolationIndices {
                regime,
                s: s.clone(),
                p0: at(&slope_p, 0)?,
                p1: at(&slope_p, 1)?,
                q0: at(&slope_q, 0)?,
                q1: at(&slope_q, 1)?,
                p: p.clone(),
                q,
                epsilon0: None,
            }
            .check(tol)
        }
        Regime::Critical => {
            let eps = match epsilon0 {
                Some(e) => e,
                None => default_epsilon0(s, p, reg)?,
            };
            if !eps.is_positive() {
                return Err(ExponentError::Precondition("ε₀ must be positive".into()));
            }
            // 0 < 1/q − s/n < ε₀: take the midpoint
            let inv_q = s * &inv_n + eps.half();
            // 1/q = 1/p + (1/b)(1/p − s/n)
            let inv_p = (&inv_q + &(s * &inv_n / &reg.b)) / (&one + &reg.b.recip());
            let inv_p0 = &inv_n - &((&inv_n - &inv_p) / &one_minus);
            let inv_q0 = &inv_n - &((&inv_n - &inv_q) / &one_minus);
            let n_exp = Exponent::from_inv(inv_n.clone())?;
            InterpolationIndices {
                regime,
                s: s.clone(),
                p: Exponent::from_inv(inv_p)?,
                q: Exponent::from_inv(inv_q)?,
                p0: Exponent::from_inv(inv_p0)?,
                q0: Exponent::from_inv(inv_q0)?,
                p1: n_exp.clone(),
                q1: n_exp,
                epsilon0: Some(eps),
            }
            .check(tol)
        }
        Regime::Supercritical => {
            let eps = match epsilon0 {
                Some(e) => e,
                None => default_epsilon0(s, p, reg)?,
            };
            if !eps.is_positive() || eps >= *p.inv() {
                return Err(ExponentError::Precondition(format!(
                    "ε₀ = {eps} must lie in (0, 1/p)"
                )));
            }
            let inv_q0 = eps.half();
            // 1/q0 = (1/p0)(1 + 1/b)
            let inv_p0 = &inv_q0 / &(&one + &reg.b.recip());
            let inv_p1 = (p.inv() - &(&one_minus * &inv_p0)) / s;
            if inv_p1 >= inv_n {
                return Err(ExponentError::Precondition(format!(
                    "ε₀ = {eps} too large: p1 leaves the supercritical range"
                )));
            }
            let inv_q1 = &inv_p1 + &((&inv_n - &inv_p1) / &reg.a);
            let inv_q = &one_minus * &inv_q0 + s * &inv_q1;
            InterpolationIndices {
                regime,
                s: s.clone(),
                p: p.clone(),
                q: Exponent::from_inv(inv_q)?,
                p0: Exponent::from_inv(inv_p0)?,
                p1: Exponent::from_inv(inv_p1)?,
                q0: Exponent::from_inv(inv_q0)?,
                q1: Exponent::from_inv(inv_q1)?,
                epsilon0: Some(eps),
            }
            .check(tol)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Real {
        Real::ratio(n, d)
    }

    fn reg(n: u32, a: Real, b: Real) -> QcRegularity {
        QcRegularity::new(n, a, b).unwrap()
    }

    fn q_of(s: Real, p: Exponent, reg: &QcRegularity) -> Outcome<Target> {
        target_q(&s, &p, reg).unwrap()
    }

    #[test]
    fn target_on_critical_line_is_p() {
        let t = q_of(Real::one(), Exponent::int(2), &reg(2, r(3, 1), r(7, 5)));
        let t = t.accepted().unwrap();
        assert_eq!(t.q, Exponent::int(2));
        assert_eq!(t.regime, Regime::Critical);
    }

    #[test]
    fn target_subcritical_example() {
        // 1/q = 1/2 + (1/2 − 1/4)
        let t = q_of(r(1, 2), Exponent::int(2), &reg(2, r(2, 1), r(1, 1)));
        let t = t.accepted().unwrap();
        assert_eq!(t.q, Exponent::ratio(4, 3));
        assert_eq!(t.regime, Regime::Subcritical);
    }

    #[test]
    fn target_supercritical_example() {
        // 1/q = 1/4 + (1/2)(1/2 − 1/4)
        let t = q_of(Real::one(), Exponent::int(4), &reg(2, r(2, 1), r(1, 1)));
        let t = t.accepted().unwrap();
        assert_eq!(t.q, Exponent::ratio(8, 3));
        assert_eq!(t.regime, Regime::Supercritical);
    }

    #[test]
    fn target_rejects_when_q_not_above_one() {
        let s: Real = "0.5".parse().unwrap();
        let p: Exponent = "1.1".parse().unwrap();
        let t = q_of(s, p, &reg(2, r(2, 1), "0.1".parse().unwrap()));
        match t {
            Outcome::Rejected(rej) => {
                assert_eq!(rej.reason, RejectionReason::TargetNotAboveOne);
                // 1/1.1 + 10(1/1.1 − 1/4)
                let expected = r(10, 11) + r(10, 1) * (r(10, 11) - r(1, 4));
                assert_eq!(rej.value, expected);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn target_rejects_q_equal_one() {
        // s = 0, b = 1, p = 2: 1/q = 1/2 + 1/2 = 1
        let t = q_of(Real::zero(), Exponent::int(2), &reg(2, r(2, 1), r(1, 1)));
        assert!(t.is_rejected());
    }

    #[test]
    fn target_invalid_inputs() {
        let g = reg(2, r(2, 1), r(1, 1));
        assert!(target_q(&r(1, 2), &Exponent::int(1), &g).is_err());
        assert!(target_q(&r(1, 2), &Exponent::ratio(1, 2), &g).is_err());
        assert!(target_q(&r(3, 2), &Exponent::int(2), &g).is_err());
    }

    #[test]
    fn target_accepts_infinite_p_at_endpoints() {
        let g = reg(2, r(2, 1), r(1, 1));
        let t = q_of(Real::zero(), Exponent::infinity(), &g).accepted().unwrap();
        assert!(t.q.is_infinite());
        let t = q_of(Real::one(), Exponent::infinity(), &g).accepted().unwrap();
        // 1/q = 0 + (1/2)(1/2)
        assert_eq!(t.q, Exponent::int(4));
    }

    #[test]
    fn planar_bounds_examples() {
        let (a, b) = planar_bounds(&Real::int(2)).unwrap();
        assert_eq!(a, PlanarBound::Finite(Real::int(2)));
        assert_eq!(b, PlanarBound::Finite(Real::int(1)));
        let (a, b) = planar_bounds(&Real::int(3)).unwrap();
        assert_eq!(a, PlanarBound::Finite(r(3, 2)));
        assert_eq!(b, PlanarBound::Finite(r(1, 2)));
        let (a, b) = planar_bounds(&Real::one()).unwrap();
        assert_eq!((a, b), (PlanarBound::Unbounded, PlanarBound::Unbounded));
        assert!(planar_bounds(&r(1, 2)).is_err());
    }

    #[test]
    fn planar_regularity_is_strict() {
        assert!(QcRegularity::planar(Real::int(2), r(3, 2), r(1, 2)).is_ok());
        assert!(QcRegularity::planar(Real::int(2), r(2, 1), r(1, 2)).is_err());
        assert!(QcRegularity::planar(Real::int(2), r(3, 2), r(1, 1)).is_err());
    }

    #[test]
    fn planar_inv_q_bound_example() {
        let (regime, bound) =
            planar_inv_q_bound(&r(1, 2), &Exponent::int(2), &Real::int(2)).unwrap();
        assert_eq!(regime, Regime::Subcritical);
        assert_eq!(bound, r(3, 4));
    }

    #[test]
    fn lebesgue_examples() {
        assert!(lebesgue_q(&Exponent::infinity(), &Real::one()).unwrap().is_infinite());
        assert_eq!(lebesgue_q(&Exponent::int(2), &Real::one()).unwrap(), Exponent::int(1));
        assert_eq!(lebesgue_q(&Exponent::int(3), &Real::int(2)).unwrap(), Exponent::int(2));
        // no q > 1 restriction
        assert_eq!(
            lebesgue_q(&Exponent::ratio(1, 2), &Real::one()).unwrap(),
            Exponent::ratio(1, 4)
        );
        assert!(lebesgue_q(&Exponent::int(2), &Real::zero()).is_err());
    }

    #[test]
    fn sobolev_examples() {
        let g = reg(2, r(2, 1), r(1, 1));
        let q = sobolev_q(&Exponent::int(2), &g).unwrap().accepted().unwrap();
        assert_eq!(q, Exponent::int(2));
        let q = sobolev_q(&Exponent::int(4), &g).unwrap().accepted().unwrap();
        assert_eq!(q, Exponent::ratio(8, 3));
        let q = sobolev_q(&Exponent::ratio(3, 2), &g).unwrap().accepted().unwrap();
        assert_eq!(q, Exponent::ratio(6, 5));
    }

    #[test]
    fn sobolev_threshold() {
        let g = reg(2, r(2, 1), r(1, 1));
        // threshold 1 + 1/3 = 4/3, where q = 1 exactly
        let q = sobolev_q(&Exponent::ratio(4, 3), &g).unwrap().accepted().unwrap();
        assert_eq!(q, Exponent::int(1));
        let out = sobolev_q(&Exponent::ratio(13, 10), &g).unwrap();
        assert!(matches!(
            out,
            Outcome::Rejected(Rejection { reason: RejectionReason::BelowSobolevThreshold, .. })
        ));
    }

    #[test]
    fn sobolev_infinite_p() {
        let g = reg(3, r(3, 1), r(1, 1));
        // 1/q = (1/3)(1/3)
        let q = sobolev_q(&Exponent::infinity(), &g).unwrap().accepted().unwrap();
        assert_eq!(q, Exponent::int(9));
    }

    #[test]
    fn interpolation_subcritical_example() {
        let g = reg(2, r(2, 1), r(1, 1));
        let ix = interpolation_indices(&r(1, 2), &Exponent::int(2), &g, None).unwrap();
        assert_eq!(ix.regime, Regime::Subcritical);
        assert_eq!(ix.q, Exponent::ratio(4, 3));
        assert_eq!(ix.p0, Exponent::int(3));
        assert_eq!(ix.p1, Exponent::ratio(3, 2));
        assert_eq!(ix.q0, Exponent::ratio(3, 2));
        assert_eq!(ix.q1, Exponent::ratio(6, 5));
        let (rp, rq) = ix.convex_residuals();
        assert!(rp.is_zero() && rq.is_zero());
        for res in ix.lambda_residuals(&g) {
            assert!(res.is_zero());
        }
    }

    #[test]
    fn interpolation_critical_has_p1_q1_equal_n() {
        let g = reg(2, r(2, 1), r(1, 1));
        // s p = n with s = 1/2, p = 4
        let ix =
            interpolation_indices(&r(1, 2), &Exponent::int(4), &g, Some(r(1, 10))).unwrap();
        assert_eq!(ix.regime, Regime::Critical);
        assert_eq!(ix.p1, Exponent::int(2));
        assert_eq!(ix.q1, Exponent::int(2));
        assert!(*ix.p0.inv() < *ix.q0.inv());
        assert!(*ix.q0.inv() < r(1, 2));
        let (rp, rq) = ix.convex_residuals();
        assert!(rp.is_zero() && rq.is_zero());
        // 0 < 1/q − s/n < ε₀
        let gap = ix.q.inv() - &r(1, 4);
        assert!(gap.is_positive() && gap < r(1, 10));
        // the λ = 0 pair is a Lebesgue pair
        assert_eq!(lebesgue_q(&ix.p0, &g.b).unwrap(), ix.q0);
    }

    #[test]
    fn interpolation_supercritical_approaches_target() {
        let g = reg(2, r(2, 1), r(1, 1));
        let s = r(1, 2);
        let p = Exponent::int(8);
        let q = target_q(&s, &p, &g).unwrap().accepted().unwrap().q;
        for eps in [r(1, 20), r(1, 200), r(1, 2000)] {
            let ix = interpolation_indices(&s, &p, &g, Some(eps.clone())).unwrap();
            assert_eq!(ix.regime, Regime::Supercritical);
            assert_eq!(ix.p, p);
            let (rp, rq) = ix.convex_residuals();
            assert!(rp.is_zero() && rq.is_zero());
            // |1/q̃ − 1/q| ≤ ε₀(1−s)(2a−1)/a
            let bound = &eps * &(Real::one() - &s) * (Real::int(2) * &g.a - Real::one()) / &g.a;
            assert!((ix.q.inv() - q.inv()).abs() <= bound);
            assert_eq!(lebesgue_q(&ix.p0, &g.b).unwrap(), ix.q0);
            assert_eq!(sobolev_q(&ix.p1, &g).unwrap().accepted().unwrap(), ix.q1);
            assert!(ix.lambda_residuals(&g).iter().all(Real::is_zero));
        }
        assert!(interpolation_indices(&s, &p, &g, Some(r(1, 4))).is_err());
    }

    #[test]
    fn arrows_have_gap_proportional_to_distance() {
        let g = reg(2, r(2, 1), r(1, 1));
        let a = target_arrow(&r(1, 2), &Exponent::int(2), &g).unwrap().accepted().unwrap();
        assert_eq!((a.from.inv_p.clone(), a.to.inv_p.clone()), (r(1, 2), r(3, 4)));
        assert_eq!(a.gap, r(1, 4));
        assert!(a.is_proportional());
        // on the critical line the arrow has zero length
        let c = target_arrow(&r(1, 1), &Exponent::int(2), &g).unwrap().accepted().unwrap();
        assert!(c.gap.is_zero() && c.is_proportional());
        for (s, p, eps) in [(r(1, 2), Exponent::int(2), None), (r(1, 2), Exponent::int(4), Some(r(1, 10))),
                            (r(1, 2), Exponent::int(8), Some(r(1, 20)))] {
            let ix = interpolation_indices(&s, &p, &g, eps).unwrap();
            for arrow in ix.arrows(&g).unwrap() {
                assert!(arrow.is_proportional(), "{arrow:?}");
            }
        }
    }

    #[test]
    fn interpolation_default_epsilon_is_exact() {
        let g = QcRegularity::with_bounds(2, None, r(2, 1), r(1, 1), r(1, 1), r(3, 1)).unwrap();
        let ix = interpolation_indices(&r(1, 2), &Exponent::int(8), &g, None).unwrap();
        assert!(ix.epsilon0.as_ref().unwrap().is_exact());
        assert!(ix.q.is_exact());
    }

    #[test]
    fn interpolation_rejects_endpoint_smoothness() {
        let g = reg(2, r(2, 1), r(1, 1));
        assert!(interpolation_indices(&Real::zero(), &Exponent::int(2), &g, None).is_err());
        assert!(interpolation_indices(&Real::one(), &Exponent::int(2), &g, None).is_err());
    }

    #[test]
    fn beta_planar_examples() {
        let p = Exponent::int(2);
        let b = hk_beta_planar(&r(1, 2), &p, &Real::one()).unwrap();
        assert_eq!(b.accepted().unwrap(), r(1, 2));
        let b = hk_beta_planar(&r(1, 2), &p, &r(3, 2)).unwrap();
        assert_eq!(b.accepted().unwrap(), r(1, 4));
        let b = hk_beta_planar(&r(1, 2), &p, &Real::int(3)).unwrap();
        assert!(b.is_rejected());
        assert!(hk_beta_planar(&Real::one(), &p, &Real::int(2)).is_err());
    }

    #[test]
    fn beta_general_examples() {
        let s = r(1, 2);
        assert_eq!(hk_beta_general(&s, &Exponent::int(3), &Real::one(), 2).unwrap(), s);
        let alpha = alpha_from_b(&Real::one()).unwrap();
        assert_eq!(alpha, Real::int(2));
        assert_eq!(hk_beta_general(&s, &Exponent::int(2), &alpha, 2).unwrap(), Real::zero());
        assert_eq!(hk_beta_general(&s, &Exponent::int(4), &Real::int(2), 2).unwrap(), s);
        assert!(hk_beta_general(&Real::one(), &Exponent::int(4), &Real::int(2), 2).is_err());
    }

    #[test]
    fn exponent_parsing() {
        assert!("inf".parse::<Exponent>().unwrap().is_infinite());
        assert_eq!("4/3".parse::<Exponent>().unwrap(), Exponent::ratio(4, 3));
        assert!("0".parse::<Exponent>().is_err());
        assert_eq!(Exponent::ratio(8, 3).to_string(), "8/3");
    }
}
