//! Table and report commands: `exponents`, `jacobian`, `witness`, `verify`
//! and `norms`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use qcc_core::exec::Execution;
use qcc_core::exponents::{
    hk_beta_planar, planar_bounds, planar_inv_q_bound, target_q, Outcome, PlanarBound,
    RejectionReason,
};
use qcc_core::norms::{self, Estimator, FractionalNormSpec, Verdict};
use qcc_core::quadrature::AdaptiveOptions;
use qcc_core::radial_maps::{
    jacobian_power_integral_quadrature, jacobian_power_integral_with, Ball, JacobianIntegral,
    MonteCarloConfig, RadialStretch,
};
use qcc_core::sharpness::{
    build_witness, default_k_grid, improved_exponent, positive_direction_sweep,
    verify_witness_numerically, SharpnessError,
};
use qcc_core::{Exponent, QcRegularity, RadialProfile, Real, Regime};

use crate::output::{cell, float};
use crate::runspec::{ClassifierParams, RunSpec};
use crate::{CliError, Report, Status, Table};

fn one_or_many<T: serde::de::DeserializeOwned>(
    spec: &RunSpec,
    key: &str,
) -> Result<Vec<T>, CliError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Many<T> {
        cases: Vec<T>,
    }
    if spec.params.get(key).is_some() {
        let many: Many<T> = spec.params()?;
        if many.cases.is_empty() {
            return Err(CliError::invalid("cases is empty"));
        }
        Ok(many.cases)
    } else {
        Ok(vec![spec.params()?])
    }
}

fn default_estimator() -> Estimator {
    Estimator::GagliardoDoubleIntegral
}

fn unit() -> f64 {
    1.0
}

// ---------------------------------------------------------------- exponents

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentCase {
    pub s: Real,
    pub p: Exponent,
    #[serde(default)]
    pub n: Option<u32>,
    #[serde(default)]
    pub a: Option<Real>,
    #[serde(default)]
    pub b: Option<Real>,
    /// Planar distortion.
    #[serde(default, rename = "K")]
    pub distortion: Option<Real>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanarRow {
    pub a_k: PlanarBound,
    pub b_k: PlanarBound,
    /// `1/q` must exceed this for every admissible `(a, b)`.
    pub inv_q_lower_bound: Real,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Outcome<Real>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Accepted,
    Rejected,
    /// Planar data without Jacobian powers: only the bound is available.
    BoundOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentRow {
    pub s: Real,
    pub p: Exponent,
    pub n: u32,
    pub regime: Regime,
    pub a: Option<Real>,
    pub b: Option<Real>,
    #[serde(rename = "K")]
    pub distortion: Option<Real>,
    pub status: RowStatus,
    pub q: Option<Exponent>,
    pub inv_q: Option<Real>,
    pub gap: Option<Real>,
    pub reason: Option<RejectionReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planar: Option<PlanarRow>,
}

pub fn exponent_row(c: &ExponentCase) -> Result<ExponentRow, CliError> {
    let n = match (c.n, &c.distortion) {
        (Some(n), Some(_)) if n != 2 => {
            return Err(CliError::invalid("K describes a planar map; n must be 2"))
        }
        (Some(n), _) => n,
        (None, Some(_)) => 2,
        (None, None) => return Err(CliError::invalid("n is required without K")),
    };
    let regime = Regime::classify(&c.s, &c.p, n);
    let planar = match &c.distortion {
        Some(k) => {
            let (a_k, b_k) = planar_bounds(k)?;
            for (name, v, bound) in [("a", &c.a, &a_k), ("b", &c.b, &b_k)] {
                if let Some(v) = v {
                    if !bound.exceeds(v) {
                        return Err(CliError::invalid(format!(
                            "K = {k} requires {name} < {bound}, got {v}"
                        )));
                    }
                }
            }
            let (_, inv_q_lower_bound) = planar_inv_q_bound(&c.s, &c.p, k)?;
            let beta = match regime {
                Regime::Subcritical => Some(hk_beta_planar(&c.s, &c.p, k)?),
                _ => None,
            };
            Some(PlanarRow { a_k, b_k, inv_q_lower_bound, beta })
        }
        None => None,
    };
    let needed = match regime {
        Regime::Subcritical => c.b.is_some(),
        Regime::Supercritical => c.a.is_some(),
        Regime::Critical => true,
    };
    let mut row = ExponentRow {
        s: c.s.clone(),
        p: c.p.clone(),
        n,
        regime,
        a: c.a.clone(),
        b: c.b.clone(),
        distortion: c.distortion.clone(),
        status: RowStatus::BoundOnly,
        q: None,
        inv_q: None,
        gap: None,
        reason: None,
        planar,
    };
    if !needed {
        if row.planar.is_none() {
            let name = if regime == Regime::Subcritical { "b" } else { "a" };
            return Err(CliError::invalid(format!("{regime} data needs the power {name}")));
        }
        let bound = &row.planar.as_ref().expect("planar").inv_q_lower_bound;
        if *bound >= Real::one() {
            row.status = RowStatus::Rejected;
            row.reason = Some(RejectionReason::TargetNotAboveOne);
        }
        return Ok(row);
    }
    // a power the regime does not use only has to be valid
    let a = c.a.clone().unwrap_or_else(|| Real::int(2));
    let b = c.b.clone().unwrap_or_else(Real::one);
    let reg = QcRegularity::with_bounds(n, c.distortion.clone(), a, Real::one(), b, Real::one())?;
    match target_q(&c.s, &c.p, &reg)? {
        Outcome::Accepted(t) => {
            row.status = RowStatus::Accepted;
            row.gap = Some(t.gap(&c.p));
            row.inv_q = Some(t.q.inv().clone());
            row.q = Some(t.q);
        }
        Outcome::Rejected(r) => {
            row.status = RowStatus::Rejected;
            row.inv_q = Some(r.value);
            row.reason = Some(r.reason);
        }
    }
    Ok(row)
}

pub fn exponents(spec: &RunSpec) -> Result<Report, CliError> {
    let cases: Vec<ExponentCase> = one_or_many(spec, "cases")?;
    let rows = cases.iter().map(exponent_row).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&[
        "s", "p", "n", "regime", "a", "b", "K", "status", "q", "inv_q", "inv_q_float", "gap",
        "reason", "a_K", "b_K", "inv_q_lower_bound", "beta",
    ]);
    for r in &rows {
        let planar = r.planar.as_ref();
        let beta = planar.and_then(|p| p.beta.as_ref()).map(|b| match b {
            Outcome::Accepted(v) => v.to_string(),
            Outcome::Rejected(rej) => format!("rejected ({})", rej.value),
        });
        table.push(vec![
            r.s.to_string(),
            r.p.to_string(),
            r.n.to_string(),
            r.regime.to_string(),
            cell(&r.a),
            cell(&r.b),
            cell(&r.distortion),
            json_word(&r.status),
            cell(&r.q),
            cell(&r.inv_q),
            r.inv_q.as_ref().map(|v| float(v.to_f64())).unwrap_or_default(),
            cell(&r.gap),
            r.reason.as_ref().map(json_word).unwrap_or_default(),
            planar.map(|p| p.a_k.to_string()).unwrap_or_default(),
            planar.map(|p| p.b_k.to_string()).unwrap_or_default(),
            planar.map(|p| p.inv_q_lower_bound.to_string()).unwrap_or_default(),
            beta.unwrap_or_default(),
        ]);
    }
    let status = if rows.iter().any(|r| r.status == RowStatus::Rejected) {
        Status::Rejected
    } else {
        Status::Ok
    };
    Ok(Report { status, result: json!({ "rows": rows }), table: Some(table), svg: None })
}

fn json_word<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

// ---------------------------------------------------------------- jacobian

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JacobianParams {
    n: OneOrMany<usize>,
    k: OneOrMany<f64>,
    t: OneOrMany<f64>,
    #[serde(default = "unit")]
    radius: f64,
    #[serde(default)]
    center: Option<Vec<f64>>,
    #[serde(default)]
    samples: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
struct JacobianRow {
    n: usize,
    k: f64,
    t: f64,
    radius: f64,
    integral: JacobianIntegral,
    /// Adaptive radial quadrature, origin-centred balls only.
    quadrature: Option<Option<f64>>,
    rel_error: Option<f64>,
    agrees: Option<bool>,
}

pub fn jacobian(spec: &RunSpec) -> Result<Report, CliError> {
    let params: JacobianParams = spec.params()?;
    let tol = spec.tolerance.unwrap_or(1e-6);
    let mc = MonteCarloConfig {
        samples: params.samples.unwrap_or(MonteCarloConfig::default().samples),
        seed: spec.seed,
    };
    let opts = AdaptiveOptions::default();
    let mut rows = Vec::new();
    for &n in &params.n.to_vec() {
        let ball = match &params.center {
            Some(c) => Ball::new(c.clone(), params.radius)?,
            None => Ball::centered(n, params.radius)?,
        };
        for &k in &params.k.to_vec() {
            let map = RadialStretch::new(k, n)?;
            for &t in &params.t.to_vec() {
                let integral = jacobian_power_integral_with(&map, &ball, t, &mc, Execution::default())?;
                let mut row = JacobianRow {
                    n,
                    k,
                    t,
                    radius: params.radius,
                    integral,
                    quadrature: None,
                    rel_error: None,
                    agrees: None,
                };
                if ball.is_origin_centered() {
                    let quad = jacobian_power_integral_quadrature(&map, params.radius, t, &opts)?;
                    let (closed, numeric) = (row.integral.value(), quad.value());
                    row.quadrature = Some(numeric);
                    match (closed, numeric) {
                        (Some(v), Some(q)) => {
                            let rel = (q - v).abs() / v.abs().max(f64::MIN_POSITIVE);
                            row.rel_error = Some(rel);
                            row.agrees = Some(rel <= tol);
                        }
                        (None, None) => row.agrees = Some(true),
                        _ => row.agrees = Some(false),
                    }
                }
                rows.push(row);
            }
        }
    }
    let mut table = Table::new(&[
        "n", "k", "t", "radius", "status", "value", "std_error", "quadrature", "rel_error", "agrees",
    ]);
    for r in &rows {
        let (status, std_error) = match &r.integral {
            JacobianIntegral::Exact { .. } => ("exact", None),
            JacobianIntegral::Estimate { std_error, .. } => ("estimate", Some(*std_error)),
            JacobianIntegral::Divergent { .. } => ("divergent", None),
        };
        table.push(vec![
            r.n.to_string(),
            float(r.k),
            float(r.t),
            float(r.radius),
            status.into(),
            r.integral.value().map(float).unwrap_or_else(|| "divergent".into()),
            std_error.map(float).unwrap_or_default(),
            match r.quadrature {
                Some(Some(q)) => float(q),
                Some(None) => "divergent".into(),
                None => String::new(),
            },
            r.rel_error.map(float).unwrap_or_default(),
            cell(&r.agrees),
        ]);
    }
    let status = if rows.iter().any(|r| r.agrees == Some(false)) { Status::Failed } else { Status::Ok };
    Ok(Report {
        status,
        result: json!({ "tolerance": tol, "rows": rows }),
        table: Some(table),
        svg: None,
    })
}

// ---------------------------------------------------------------- witness

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessParams {
    regime: Regime,
    s: Real,
    p: Exponent,
    q_prime: Exponent,
    n: u32,
    #[serde(alias = "a_or_b")]
    jacobian_power: Real,
    #[serde(default)]
    verify: bool,
    #[serde(default = "default_estimator")]
    estimator: Estimator,
    #[serde(default)]
    classifier: ClassifierParams,
}

fn rejection(e: &SharpnessError) -> Report {
    let epsilon = match e {
        SharpnessError::Infeasible { epsilon, .. } => Some(epsilon.clone()),
        _ => None,
    };
    Report {
        status: Status::Rejected,
        result: json!({ "rejected": e.to_string(), "epsilon": epsilon }),
        table: None,
        svg: None,
    }
}

fn checks_table(w: &qcc_core::sharpness::SharpnessWitness) -> Table {
    let mut table = Table::new(&["check", "lhs", "relation", "rhs", "margin", "holds"]);
    for c in &w.checks {
        table.push(vec![
            c.name.to_string(),
            c.lhs.to_string(),
            json_word(&c.relation),
            c.rhs.to_string(),
            c.margin.to_string(),
            c.holds.to_string(),
        ]);
    }
    table
}

pub fn witness(spec: &RunSpec) -> Result<Report, CliError> {
    let p: WitnessParams = spec.params()?;
    let w = match build_witness(p.regime, &p.s, &p.p, &p.q_prime, p.n, &p.jacobian_power) {
        Ok(w) => w,
        Err(e @ SharpnessError::Infeasible { .. }) => return Ok(rejection(&e)),
        Err(e) => return Err(e.into()),
    };
    let mut status = if w.all_checks_hold() { Status::Ok } else { Status::Failed };
    let report = if p.verify {
        let cfg = p.classifier.config(spec.seed)?;
        let r = verify_witness_numerically(&w, p.estimator, &cfg)?;
        if !r.passed {
            status = Status::Failed;
        }
        Some(r)
    } else {
        None
    };
    Ok(Report {
        status,
        table: Some(checks_table(&w)),
        result: json!({ "witness": w, "verification": report }),
        svg: None,
    })
}

// ---------------------------------------------------------------- verify

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyParams {
    s: Real,
    p: Exponent,
    n: u32,
    a: Real,
    b: Real,
    #[serde(default)]
    q_prime: Option<Exponent>,
    #[serde(default)]
    k_grid: Option<Vec<Real>>,
    #[serde(default)]
    rhos: Option<Vec<f64>>,
    #[serde(default = "default_estimator")]
    estimator: Estimator,
    #[serde(default)]
    classifier: ClassifierParams,
}

/// Target exponent, sharpness witness with numerical verification, and the
/// positive-direction sweep for one data set.
pub fn verify(spec: &RunSpec) -> Result<Report, CliError> {
    let p: VerifyParams = spec.params()?;
    let cfg = p.classifier.config(spec.seed)?;
    let reg = QcRegularity::new(p.n, p.a.clone(), p.b.clone())?;
    let target = match target_q(&p.s, &p.p, &reg)? {
        Outcome::Accepted(t) => t,
        Outcome::Rejected(r) => {
            return Ok(Report {
                status: Status::Rejected,
                result: json!({ "target": Outcome::<()>::Rejected(r) }),
                table: None,
                svg: None,
            })
        }
    };
    if target.regime == Regime::Critical {
        return Ok(Report {
            status: Status::Ok,
            result: json!({ "target": target, "note": "critical data: composition is a self-map" }),
            table: None,
            svg: None,
        });
    }
    let q_prime = match &p.q_prime {
        Some(q) => q.clone(),
        None => improved_exponent(&target.q, &p.p, &Real::ratio(1, 2))?,
    };
    let w = match build_witness(target.regime, &p.s, &p.p, &q_prime, p.n, &target.c) {
        Ok(w) => w,
        Err(e @ SharpnessError::Infeasible { .. }) => return Ok(rejection(&e)),
        Err(e) => return Err(e.into()),
    };
    let report = verify_witness_numerically(&w, p.estimator, &cfg)?;
    let k_grid = p.k_grid.clone().unwrap_or_else(|| default_k_grid(&reg));
    let sweep =
        positive_direction_sweep(&p.s, &p.p, &reg, &k_grid, p.rhos.as_deref(), p.estimator, &cfg)?;

    let mut table =
        Table::new(&["stage", "k", "rho", "k_rho", "exponent", "analytic", "numerical", "passed"]);
    let stages = [
        ("source", w.rho.to_f64(), &w.p, report.analytic.0, report.numerical.0),
        ("composed", w.k_rho().to_f64(), &w.q_prime, report.analytic.1, report.numerical.1),
    ];
    for (stage, rho, exp, analytic, numerical) in stages {
        table.push(vec![
            stage.into(),
            w.k.to_string(),
            float(w.rho.to_f64()),
            float(rho),
            exp.to_string(),
            json_word(&analytic),
            json_word(&numerical),
            (!numerical.contradicts(analytic)).to_string(),
        ]);
    }
    for r in &sweep.rows {
        table.push(vec![
            "sweep".into(),
            r.k.to_string(),
            float(r.rho),
            float(r.k_rho),
            sweep.q.to_string(),
            json_word(&r.analytic),
            json_word(&r.numerical),
            r.passed.to_string(),
        ]);
    }
    let passed = report.passed && sweep.passed;
    Ok(Report {
        status: if passed { Status::Ok } else { Status::Failed },
        result: json!({ "target": target, "witness": report, "sweep": sweep, "passed": passed }),
        table: Some(table),
        svg: None,
    })
}

// ---------------------------------------------------------------- norms

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormsParams {
    profile: RadialProfile,
    s: f64,
    p: f64,
    n: usize,
    #[serde(default = "unit")]
    radius: f64,
    #[serde(default = "default_estimator")]
    estimator: Estimator,
    #[serde(default)]
    classifier: ClassifierParams,
}

/// Re-validates a deserialised profile through its constructors.
fn checked_profile(p: &RadialProfile) -> Result<RadialProfile, CliError> {
    Ok(match p {
        RadialProfile::SingularPower { rho } => RadialProfile::singular(*rho)?,
        RadialProfile::FlatPower { rho } => RadialProfile::flat(*rho)?,
        RadialProfile::Piecewise { pieces } => RadialProfile::piecewise(pieces.clone())?,
    })
}

pub fn norms(spec: &RunSpec) -> Result<Report, CliError> {
    let p: NormsParams = spec.params()?;
    let prof = checked_profile(&p.profile)?;
    let cfg = p.classifier.config(spec.seed)?;
    let nspec = FractionalNormSpec::new(p.s, p.p, p.n, p.estimator)?.with_radius(p.radius)?;
    let est = norms::estimate(&prof, &nspec, &cfg)?;
    let oracle = match (Real::exact_from_f64(p.s), Real::exact_from_f64(p.p)) {
        (Some(s), Some(q)) => Exponent::new(q)
            .ok()
            .and_then(|q| prof.membership_oracle(&s, &q, p.n as u32).ok()),
        _ => None,
    };
    let contradicts = oracle.is_some_and(|m| est.verdict.contradicts(m));
    let mut table = Table::new(&["cutoff", "partial"]);
    for (c, v) in est.cutoffs.iter().zip(&est.partials) {
        table.push(vec![float(*c), float(*v)]);
    }
    Ok(Report {
        status: if contradicts { Status::Failed } else { Status::Ok },
        result: json!({
            "estimate": est.to_json(),
            "oracle": oracle,
            "agrees": oracle.map(|m| est.verdict.agrees_with(m)),
            "definite": est.verdict != Verdict::Inconclusive,
        }),
        table: Some(table),
        svg: None,
    })
}
