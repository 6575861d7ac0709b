//! Sharpness witnesses: a radial stretch and a power profile showing that a
//! target exponent better than the theorem's cannot hold.
//!
//! Subcritically (`sp < n`) the witness is `f_ρ ∘ φ_k = f_{kρ}` with
//! `k = (1−δ)(1/b + 1)` and `(1−δ)(n/p − s) < ρ < n/p − s`: `f_ρ ∈ H^{s,p}`
//! but `kρ > n/q′ − s`, so `f_{kρ} ∉ H^{s,q′}`. Supercritically the flat
//! profiles `g_ρ` with `k = (1+δ)(1 − 1/a) < 1` play the same role.

use rand::Rng;
use serde::Serialize;

use crate::exec::Execution;
use crate::exponents::{target_q, Exponent, ExponentError, QcRegularity, Regime};
use crate::norms::{self, Estimator, EstimatorConfig, FractionalNormSpec, NormError, NormEstimate, Verdict};
use crate::profiles::{classify_power, membership_threshold, Membership, ProfileError, ProfileKind};
use crate::profiles::RadialProfile;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SharpnessError {
    #[error("the critical case sp = n has no sharpness construction")]
    Critical,
    #[error("requested {requested} regime but sp − n places the data in the {actual} regime")]
    RegimeMismatch { requested: Regime, actual: Regime },
    #[error("q′ = {q_prime} does not beat the theorem (ε = {epsilon} ≤ 0)")]
    Infeasible { q_prime: String, epsilon: Real },
    #[error("stretch exponent k = {k} lies outside the admissible window ({lo}, {hi})")]
    InadmissibleStretch { k: Real, lo: Real, hi: Real },
    #[error("profile exponent ρ = {0} is not inside the membership region")]
    Rho(Real),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

type Result<T> = std::result::Result<T, SharpnessError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
}

/// One verified inequality `lhs relation rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub lhs: Real,
    pub relation: Relation,
    pub rhs: Real,
    /// `lhs − rhs` for `>` and `rhs − lhs` for `<`; positive iff the check holds.
    pub margin: Real,
    pub holds: bool,
}

impl Check {
    fn new(name: &'static str, lhs: Real, relation: Relation, rhs: Real) -> Check {
        let margin = match relation {
            Relation::Greater => &lhs - &rhs,
            Relation::Less => &rhs - &lhs,
        };
        let holds = margin.is_positive();
        Check { name, lhs, relation, rhs, margin, holds }
    }
}

/// Which constraint fixed `δ_max` in the supercritical case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaBound {
    /// The δ-inequality, solved with equality.
    Inequality,
    /// `k < 1`, i.e. `δ < 1/(a − 1)`.
    StretchBelowOne,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessWitness {
    pub regime: Regime,
    pub s: Real,
    pub p: Exponent,
    pub q_prime: Exponent,
    pub n: u32,
    /// `b` subcritically, `a` supercritically.
    pub jacobian_power: Real,
    pub epsilon: Real,
    pub delta_max: Real,
    pub delta_bound: DeltaBound,
    pub delta: Real,
    pub k: Real,
    pub rho: Real,
    pub checks: Vec<Check>,
    /// `k = 1`: composition is the identity and no loss is expected.
    pub degenerate: bool,
}

impl SharpnessWitness {
    pub fn kind(&self) -> ProfileKind {
        match self.regime {
            Regime::Supercritical => ProfileKind::FlatPower,
            _ => ProfileKind::SingularPower,
        }
    }

    pub fn k_rho(&self) -> Real {
        &self.k * &self.rho
    }

    pub fn all_checks_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn source_profile(&self) -> Result<RadialProfile> {
        Ok(RadialProfile::of_kind(self.kind(), self.rho.to_f64())?)
    }

    pub fn composed_profile(&self) -> Result<RadialProfile> {
        Ok(RadialProfile::of_kind(self.kind(), self.k_rho().to_f64())?)
    }

    /// Expected analytic verdicts for `(f_ρ, s, p)` and `(f_{kρ}, s, q′)`.
    pub fn expected(&self) -> (Membership, Membership) {
        if self.degenerate {
            (Membership::Member, Membership::Member)
        } else {
            (Membership::Member, Membership::NonMember)
        }
    }

    /// Degenerate witness with `φ = id`: `k = 1`, `q′ = p`.
    pub fn identity(regime: Regime, s: Real, p: Exponent, n: u32, rho: Real) -> Result<Self> {
        let actual = Regime::classify(&s, &p, n);
        if actual != regime {
            return Err(SharpnessError::RegimeMismatch { requested: regime, actual });
        }
        let kind = match regime {
            Regime::Supercritical => ProfileKind::FlatPower,
            _ => ProfileKind::SingularPower,
        };
        if classify_power(kind, &rho, &s, &p, n)? != Membership::Member {
            return Err(SharpnessError::Rho(rho));
        }
        Ok(SharpnessWitness {
            regime,
            s,
            q_prime: p.clone(),
            p,
            n,
            jacobian_power: Real::one(),
            epsilon: Real::zero(),
            delta_max: Real::zero(),
            delta_bound: DeltaBound::Inequality,
            delta: Real::zero(),
            k: Real::one(),
            rho,
            checks: Vec::new(),
            degenerate: true,
        })
    }
}

/// Largest dyadic rational `m/2^40` not above `v`.
fn dyadic_floor(v: f64) -> Real {
    let scale = (1u64 << 40) as f64;
    Real::exact_from_f64((v * scale).floor() / scale).unwrap_or(Real::Float(v))
}

/// Exact when the inputs are exact, except that `δ` is `δ_max/2` rounded down
/// to a dyadic rational; every recorded inequality is then re-verified on
/// that exact `δ`.
pub fn build_witness(
    regime: Regime,
    s: &Real,
    p: &Exponent,
    q_prime: &Exponent,
    n: u32,
    jacobian_power: &Real,
) -> Result<SharpnessWitness> {
    let actual = Regime::classify(s, p, n);
    if regime == Regime::Critical || actual == Regime::Critical {
        return Err(SharpnessError::Critical);
    }
    if actual != regime {
        return Err(SharpnessError::RegimeMismatch { requested: regime, actual });
    }
    if s.is_negative() || *s > Real::one() {
        return Err(ExponentError::Smoothness(s.clone()).into());
    }
    for e in [p, q_prime] {
        if e.is_infinite() || *e.inv() >= Real::one() {
            return Err(ExponentError::Exponent(format!("{e} must lie in (1, ∞)")).into());
        }
    }
    let nr = Real::from(n as i64);
    let one = Real::one();
    let c = jacobian_power;
    match regime {
        Regime::Subcritical if !c.is_positive() => {
            return Err(ExponentError::Regularity(format!("b = {c} must be positive")).into())
        }
        Regime::Supercritical if *c <= one => {
            return Err(ExponentError::Regularity(format!("a = {c} must exceed 1")).into())
        }
        _ => {}
    }
    let (inv_p, inv_qp) = (p.inv(), q_prime.inv());
    let s_over_n = s / &nr;
    let epsilon = match regime {
        Regime::Subcritical => inv_p + &(inv_p - &s_over_n) / c - inv_qp,
        _ => inv_p + &(&s_over_n - inv_p) / c - inv_qp,
    };
    if !epsilon.is_positive() {
        return Err(SharpnessError::Infeasible { q_prime: q_prime.to_string(), epsilon });
    }
    let mut checks = vec![Check::new("epsilon_positive", epsilon.clone(), Relation::Greater, Real::zero())];
    let n_eps = &nr * &epsilon;

    let witness = match regime {
        Regime::Subcritical => {
            // (1−δ)²(n/q′ − s + nε) > n/q′ − s
            let y = &nr * inv_qp - s;
            let z = &y + &n_eps;
            let delta_max = if y.is_positive() { one.clone() - (&y / &z).sqrt() } else { one.clone() };
            let delta = dyadic_floor(delta_max.to_f64() / 2.0);
            let keep = &one - &delta;
            let keep2 = &keep * &keep;
            let k = &keep * &(c.recip() + &one);
            let thr = &nr * inv_p - s;
            let rho = &thr * &(&one - &delta.half());
            let k_rho = &k * &rho;
            let chain = &keep2 * &z;
            checks.extend([
                Check::new("delta_positive", delta.clone(), Relation::Greater, Real::zero()),
                Check::new("delta_below_one", delta.clone(), Relation::Less, one.clone()),
                Check::new("delta_inequality", chain.clone(), Relation::Greater, y.clone()),
                Check::new("stretch_admissible", k.clone(), Relation::Less, &one + &c.recip()),
                Check::new("rho_lower", rho.clone(), Relation::Greater, &keep * &thr),
                Check::new("rho_upper", rho.clone(), Relation::Less, thr.clone()),
                Check::new("chain_lower_bound", k_rho.clone(), Relation::Greater, chain),
                Check::new("composition_exceeds_threshold", k_rho, Relation::Greater, y),
            ]);
            SharpnessWitness {
                regime,
                s: s.clone(),
                p: p.clone(),
                q_prime: q_prime.clone(),
                n,
                jacobian_power: c.clone(),
                epsilon,
                delta_max,
                delta_bound: DeltaBound::Inequality,
                delta,
                k,
                rho,
                checks,
                degenerate: false,
            }
        }
        _ => {
            // (1+δ)²(s − n/q′ − nε) < s − n/q′
            let y = s - &(&nr * inv_qp);
            let x = &y - &n_eps;
            let by_inequality =
                if x.is_positive() { (&y / &x).sqrt() - one.clone() } else { Real::Float(f64::INFINITY) };
            let by_stretch = (c - &one).recip();
            let (delta_max, delta_bound) = if by_inequality <= by_stretch {
                (by_inequality, DeltaBound::Inequality)
            } else {
                (by_stretch, DeltaBound::StretchBelowOne)
            };
            let delta = dyadic_floor(delta_max.to_f64() / 2.0);
            let grow = &one + &delta;
            let grow2 = &grow * &grow;
            let k = &grow * &(&one - &c.recip());
            let thr = s - &(&nr * inv_p);
            let rho = &thr * &(&one + &delta.half());
            let k_rho = &k * &rho;
            let gap = &y - &k_rho;
            let chain = &y - &(&grow2 * &x);
            checks.extend([
                Check::new("delta_positive", delta.clone(), Relation::Greater, Real::zero()),
                Check::new("delta_inequality", &grow2 * &x, Relation::Less, y.clone()),
                Check::new("stretch_below_one", k.clone(), Relation::Less, one.clone()),
                Check::new("stretch_admissible", k.clone(), Relation::Greater, &one - &c.recip()),
                Check::new("rho_lower", rho.clone(), Relation::Greater, thr.clone()),
                Check::new("rho_upper", rho.clone(), Relation::Less, &grow * &thr),
                Check::new("chain_lower_bound", gap.clone(), Relation::Greater, chain),
                Check::new("composition_below_threshold", gap, Relation::Greater, Real::zero()),
            ]);
            SharpnessWitness {
                regime,
                s: s.clone(),
                p: p.clone(),
                q_prime: q_prime.clone(),
                n,
                jacobian_power: c.clone(),
                epsilon,
                delta_max,
                delta_bound,
                delta,
                k,
                rho,
                checks,
                degenerate: false,
            }
        }
    };
    Ok(witness)
}

/// Inputs for [`build_witness`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessInput {
    pub regime: Regime,
    pub s: Real,
    pub p: Exponent,
    pub q_prime: Exponent,
    pub n: u32,
    pub jacobian_power: Real,
}

impl WitnessInput {
    pub fn build(&self) -> Result<SharpnessWitness> {
        build_witness(self.regime, &self.s, &self.p, &self.q_prime, self.n, &self.jacobian_power)
    }
}

/// A random admissible input with small-denominator rationals: `n ∈ {2, 3}`,
/// `q′` strictly between the theorem's exponent and `p`'s side of it.
pub fn sample_admissible<R: Rng>(rng: &mut R) -> WitnessInput {
    loop {
        let n: u32 = rng.random_range(2..=3);
        let s = Real::ratio(rng.random_range(1..=8), 8);
        let p = Exponent::new(Real::ratio(rng.random_range(5..=24), 4)).expect("positive");
        let regime = Regime::classify(&s, &p, n);
        let power = match regime {
            Regime::Critical => continue,
            Regime::Subcritical => Real::ratio(rng.random_range(1..=12), 4),
            Regime::Supercritical => Real::ratio(rng.random_range(5..=16), 4),
        };
        let reg = match regime {
            Regime::Subcritical => QcRegularity::new(n, Real::int(2), power.clone()),
            _ => QcRegularity::new(n, power.clone(), Real::one()),
        }
        .expect("valid regularity");
        let Some(target) = target_q(&s, &p, &reg).expect("valid data").accepted() else {
            continue;
        };
        let t = Real::ratio(rng.random_range(1..=3), 4);
        let q_prime = improved_exponent(&target.q, &p, &t).expect("between q and p");
        return WitnessInput { regime, s, p, q_prime, n, jacobian_power: power };
    }
}

/// `1/q′ = 1/q − t(1/q − 1/p)`: a fraction `t ∈ (0, 1)` of the way from the
/// theorem's `q` back to `p`.
pub fn improved_exponent(q: &Exponent, p: &Exponent, t: &Real) -> Result<Exponent> {
    if !(t.is_positive() && *t < Real::one()) {
        return Err(ExponentError::Precondition(format!("t = {t} must lie in (0, 1)")).into());
    }
    let inv_q = q.inv();
    Ok(Exponent::from_inv(inv_q - &(t * &(inv_q - p.inv())))?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub witness: SharpnessWitness,
    pub analytic: (Membership, Membership),
    pub numerical: (Verdict, Verdict),
    /// Distances of `ρ` and `kρ` from their membership thresholds.
    pub margins: (f64, f64),
    pub source_estimate: NormEstimate,
    pub composed_estimate: NormEstimate,
    /// Analytic verdicts are the expected pair.
    pub analytic_ok: bool,
    /// No numerical verdict contradicts its analytic counterpart.
    pub consistent: bool,
    /// Inconclusive numerical verdicts occur only within 0.05 of a threshold.
    pub inconclusive_justified: bool,
    pub passed: bool,
}

/// Analytic and numerical membership of the source profile at `(s, p)` and
/// of the composed profile at `(s, q′)`.
pub fn verify_witness_numerically(
    w: &SharpnessWitness,
    estimator: Estimator,
    cfg: &EstimatorConfig,
) -> Result<WitnessReport> {
    let kind = w.kind();
    let k_rho = w.k_rho();
    let analytic = (
        classify_power(kind, &w.rho, &w.s, &w.p, w.n)?,
        classify_power(kind, &k_rho, &w.s, &w.q_prime, w.n)?,
    );
    let margins = (
        (w.rho.to_f64() - membership_threshold(kind, &w.s, &w.p, w.n)?.to_f64()).abs(),
        (k_rho.to_f64() - membership_threshold(kind, &w.s, &w.q_prime, w.n)?.to_f64()).abs(),
    );
    let s = w.s.to_f64();
    let run = |rho: &Real, q: &Exponent| -> Result<NormEstimate> {
        let prof = RadialProfile::of_kind(kind, rho.to_f64())?;
        let spec = FractionalNormSpec::new(s, q.to_f64(), w.n as usize, estimator)?;
        Ok(norms::estimate(&prof, &spec, cfg)?)
    };
    let source_estimate = run(&w.rho, &w.p)?;
    let composed_estimate = run(&k_rho, &w.q_prime)?;
    let numerical = (source_estimate.verdict, composed_estimate.verdict);
    let analytic_ok = analytic == w.expected();
    let consistent = !numerical.0.contradicts(analytic.0) && !numerical.1.contradicts(analytic.1);
    let near = margins.0.min(margins.1) < 0.05;
    let inconclusive_justified =
        (numerical.0.is_definite() && numerical.1.is_definite()) || near;
    Ok(WitnessReport {
        witness: w.clone(),
        analytic,
        numerical,
        margins,
        source_estimate,
        composed_estimate,
        analytic_ok,
        consistent,
        inconclusive_justified,
        passed: analytic_ok && consistent && inconclusive_justified && w.all_checks_hold(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: Real,
    pub rho: f64,
    pub k_rho: f64,
    pub analytic: Membership,
    pub numerical: Verdict,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub s: Real,
    pub p: Exponent,
    pub q: Exponent,
    pub regime: Regime,
    pub rows: Vec<SweepRow>,
    pub passed: bool,
}

/// Default profile exponents: fractions of the membership interval
/// `(0, n/p − s)` subcritically, multiples of `s − n/p` supercritically.
pub fn default_rhos(regime: Regime, s: &Real, p: &Exponent, n: u32) -> Vec<f64> {
    let nr = Real::from(n as i64);
    match regime {
        Regime::Supercritical => {
            let thr = (s - &(&nr * p.inv())).to_f64();
            [1.25, 1.6, 2.0].iter().map(|f| f * thr).collect()
        }
        _ => {
            let thr = (&nr * p.inv() - s).to_f64();
            [0.25, 0.5, 0.75].iter().map(|f| f * thr).collect()
        }
    }
}

/// Admissible window `(1 − 1/a, 1 + 1/b)` for the stretch exponent.
pub fn stretch_window(reg: &QcRegularity) -> (Real, Real) {
    (Real::one() - reg.a.recip(), Real::one() + reg.b.recip())
}

/// Quartiles of the admissible stretch window.
pub fn default_k_grid(reg: &QcRegularity) -> Vec<Real> {
    let (lo, hi) = stretch_window(reg);
    let width = &hi - &lo;
    (1..=3).map(|j| &lo + &(&width * &Real::ratio(j, 4))).collect()
}

/// For every admissible `k` and every `ρ` inside the membership region at
/// `(s, p)`, the composed profile must be a member at the theorem's target.
pub fn positive_direction_sweep(
    s: &Real,
    p: &Exponent,
    reg: &QcRegularity,
    k_grid: &[Real],
    rhos: Option<&[f64]>,
    estimator: Estimator,
    cfg: &EstimatorConfig,
) -> Result<SweepReport> {
    let n = reg.n;
    let regime = Regime::classify(s, p, n);
    if regime == Regime::Critical {
        return Err(SharpnessError::Critical);
    }
    let target = match target_q(s, p, reg)? {
        crate::exponents::Outcome::Accepted(t) => t,
        crate::exponents::Outcome::Rejected(r) => {
            return Err(ExponentError::Precondition(format!("no target exponent: {:?}", r.reason)).into())
        }
    };
    let (lo, hi) = stretch_window(reg);
    for k in k_grid {
        if !(*k > lo && *k < hi) {
            return Err(SharpnessError::InadmissibleStretch { k: k.clone(), lo, hi });
        }
    }
    let kind = match regime {
        Regime::Supercritical => ProfileKind::FlatPower,
        _ => ProfileKind::SingularPower,
    };
    let rhos = rhos.map(<[f64]>::to_vec).unwrap_or_else(|| default_rhos(regime, s, p, n));
    for &rho in &rhos {
        let exact = Real::exact_from_f64(rho).ok_or(SharpnessError::Rho(Real::Float(rho)))?;
        if classify_power(kind, &exact, s, p, n)? != Membership::Member {
            return Err(SharpnessError::Rho(exact));
        }
    }
    let cases: Vec<(Real, f64)> =
        k_grid.iter().flat_map(|k| rhos.iter().map(move |&r| (k.clone(), r))).collect();
    let q = target.q;
    let sf = s.to_f64();
    let inner = EstimatorConfig { execution: Execution::Sequential, ..*cfg };
    let rows = cfg.execution.map_slice(&cases, |(k, rho)| -> Result<SweepRow> {
        let k_rho = &Real::exact_from_f64(*rho).expect("checked above") * k;
        let analytic = classify_power(kind, &k_rho, s, &q, n)?;
        let prof = RadialProfile::of_kind(kind, k_rho.to_f64())?;
        let spec = FractionalNormSpec::new(sf, q.to_f64(), n as usize, estimator)?;
        let numerical = norms::estimate(&prof, &spec, &inner)?.verdict;
        Ok(SweepRow {
            k: k.clone(),
            rho: *rho,
            k_rho: k_rho.to_f64(),
            analytic,
            numerical,
            passed: analytic == Membership::Member && numerical == Verdict::Member,
        })
    });
    let rows: Vec<SweepRow> = rows.into_iter().collect::<Result<_>>()?;
    let passed = rows.iter().all(|r| r.passed);
    Ok(SweepReport { s: s.clone(), p: p.clone(), q, regime, rows, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> Real {
        Real::ratio(n, d)
    }

    fn subcritical_example() -> SharpnessWitness {
        build_witness(Regime::Subcritical, &r(1, 2), &Exponent::int(2), &Exponent::ratio(3, 2), 2, &r(1, 1))
            .unwrap()
    }

    fn supercritical_example() -> SharpnessWitness {
        build_witness(Regime::Supercritical, &r(1, 1), &Exponent::int(4), &Exponent::int(3), 2, &r(2, 1))
            .unwrap()
    }

    #[test]
    fn subcritical_worked_example() {
        let w = subcritical_example();
        assert_eq!(w.epsilon, r(1, 12));
        assert!((w.delta_max.to_f64() - (1.0 - (5.0f64 / 6.0).sqrt())).abs() < 1e-15);
        // δ = (1 − √(5/6))/2 = 0.0435645…
        assert!((w.delta.to_f64() - 0.043567).abs() < 1e-5);
        assert!((w.k.to_f64() - 1.912866).abs() < 1e-5);
        assert!((w.rho.to_f64() - 0.489108).abs() < 1e-5);
        assert!((w.k_rho().to_f64() - 0.935599).abs() < 1e-5);
        assert!(w.k_rho() > r(5, 6));
        assert!(w.delta.is_exact() && w.k.is_exact() && w.rho.is_exact());
        assert!(w.all_checks_hold(), "{:#?}", w.checks);
    }

    #[test]
    fn supercritical_worked_example() {
        let w = supercritical_example();
        assert_eq!(w.epsilon, r(1, 24));
        assert_eq!(w.delta_bound, DeltaBound::Inequality);
        assert!((w.delta_max.to_f64() - ((4.0f64 / 3.0).sqrt() - 1.0)).abs() < 1e-15);
        assert!(w.k < Real::one());
        assert!((w.k.to_f64() - 0.5387).abs() < 1e-4);
        assert!((w.rho.to_f64() - 0.5194).abs() < 1e-4);
        assert!(r(1, 3) - w.k_rho() > Real::zero());
        assert!(w.all_checks_hold(), "{:#?}", w.checks);
    }

    #[test]
    fn stretch_cap_can_bind() {
        // sp barely above n and q′ far beyond q: the δ-inequality allows δ > 1 = 1/(a−1)
        let w = build_witness(Regime::Supercritical, &r(1, 1), &Exponent::ratio(21, 10), &Exponent::int(20), 2, &r(2, 1))
            .unwrap();
        assert_eq!(w.delta_bound, DeltaBound::StretchBelowOne);
        assert!(w.all_checks_hold());
    }

    #[test]
    fn infeasible_and_rejected_inputs() {
        let e = build_witness(Regime::Subcritical, &r(1, 2), &Exponent::int(2), &Exponent::ratio(4, 3), 2, &r(1, 1));
        assert!(matches!(e, Err(SharpnessError::Infeasible { ref epsilon, .. }) if epsilon.is_zero()));
        let e = build_witness(Regime::Subcritical, &r(1, 2), &Exponent::int(2), &Exponent::ratio(5, 4), 2, &r(1, 1));
        assert!(matches!(e, Err(SharpnessError::Infeasible { .. })));
        let e = build_witness(Regime::Critical, &r(1, 1), &Exponent::int(2), &Exponent::int(2), 2, &r(2, 1));
        assert_eq!(e, Err(SharpnessError::Critical));
        let e = build_witness(Regime::Supercritical, &r(1, 2), &Exponent::int(2), &Exponent::ratio(3, 2), 2, &r(2, 1));
        assert!(matches!(e, Err(SharpnessError::RegimeMismatch { .. })));
    }

    #[test]
    fn random_witnesses_satisfy_every_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let input = sample_admissible(&mut rng);
            let w = input.build().unwrap();
            assert!(w.all_checks_hold(), "{input:?}: {:#?}", w.checks);
            assert_eq!(w.expected(), (Membership::Member, Membership::NonMember));
            let kind = w.kind();
            assert_eq!(classify_power(kind, &w.rho, &w.s, &w.p, w.n).unwrap(), Membership::Member);
            assert_eq!(
                classify_power(kind, &w.k_rho(), &w.s, &w.q_prime, w.n).unwrap(),
                Membership::NonMember
            );
        }
    }

    #[test]
    fn worked_examples_verify_numerically() {
        let cfg = EstimatorConfig::default();
        for w in [subcritical_example(), supercritical_example()] {
            let rep = verify_witness_numerically(&w, Estimator::GagliardoDoubleIntegral, &cfg).unwrap();
            assert_eq!(rep.analytic, (Membership::Member, Membership::NonMember));
            assert_eq!(rep.numerical.1, Verdict::NonMember);
            // ρ sits within 0.05 of its threshold in the subcritical example
            if rep.margins.0 >= 0.05 {
                assert_eq!(rep.numerical.0, Verdict::Member);
            }
            assert!(rep.consistent && rep.passed, "{:?} {:?}", rep.numerical, rep.margins);
        }
    }

    #[test]
    fn identity_witness_loses_nothing() {
        let w = SharpnessWitness::identity(Regime::Subcritical, r(1, 2), Exponent::int(2), 2, r(1, 4)).unwrap();
        let rep = verify_witness_numerically(&w, Estimator::GagliardoDoubleIntegral, &Default::default()).unwrap();
        assert_eq!(rep.analytic, (Membership::Member, Membership::Member));
        assert_eq!(rep.numerical, (Verdict::Member, Verdict::Member));
        assert!(rep.passed);
    }

    #[test]
    fn positive_sweep_examples() {
        let cfg = EstimatorConfig::default();
        let reg = QcRegularity::new(2, r(2, 1), r(1, 1)).unwrap();
        let rep = positive_direction_sweep(
            &r(1, 2),
            &Exponent::int(2),
            &reg,
            &[r(19, 10)],
            Some(&[0.4]),
            Estimator::GagliardoDoubleIntegral,
            &cfg,
        )
        .unwrap();
        assert_eq!(rep.q, Exponent::ratio(4, 3));
        assert!(rep.passed, "{rep:?}");

        let rep = positive_direction_sweep(
            &r(1, 1),
            &Exponent::int(4),
            &reg,
            &[r(3, 5)],
            Some(&[0.8]),
            Estimator::GagliardoDoubleIntegral,
            &cfg,
        )
        .unwrap();
        assert_eq!(rep.q, Exponent::ratio(8, 3));
        assert!((rep.rows[0].k_rho - 0.48).abs() < 1e-12);
        assert!(rep.passed);

        let bad = positive_direction_sweep(
            &r(1, 2),
            &Exponent::int(2),
            &reg,
            &[r(5, 2)],
            None,
            Estimator::GagliardoDoubleIntegral,
            &cfg,
        );
        assert!(matches!(bad, Err(SharpnessError::InadmissibleStretch { .. })));
    }
}
