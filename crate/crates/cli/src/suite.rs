//! The acceptance suite: eight criteria, each with a runtime budget.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use qcc_core::exponents::{
    hk_beta_planar, interpolation_indices, planar_bounds, target_q, Outcome, PlanarBound,
};
use qcc_core::norms::{self, Estimator, EstimatorConfig, FractionalNormSpec, Verdict};
use qcc_core::profiles::{membership_threshold, PowerPiece, ProfileKind};
use qcc_core::quadrature::AdaptiveOptions;
use qcc_core::radial_maps::{
    change_of_variables_check, jacobian_power_integral, jacobian_power_integral_quadrature, Ball,
    RadialStretch,
};
use qcc_core::sharpness::{
    build_witness, positive_direction_sweep, sample_admissible, verify_witness_numerically,
};
use qcc_core::{Exponent, Membership, QcRegularity, RadialProfile, Real, Regime};

use crate::diagram::{self, DiagramParams, SourcePoint};
use crate::output::float;
use crate::runspec::{ClassifierParams, RunSpec};
use crate::{CliError, Report, Status, Table};

pub const CRITERIA: [(u8, &str, f64); 8] = [
    (1, "exponent arithmetic", 1.0),
    (2, "interpolation identities", 5.0),
    (3, "jacobian integrals", 10.0),
    (4, "change of variables", 10.0),
    (5, "membership classifier", 180.0),
    (6, "sharpness end-to-end", 180.0),
    (7, "positive direction", 120.0),
    (8, "figure geometry", 1.0),
];

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Relative tolerance for quadrature comparisons.
    pub tolerance: f64,
    pub cfg: EstimatorConfig,
    pub interpolation_samples: usize,
    pub random_cov_cases: usize,
    pub random_witnesses: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        let cfg = EstimatorConfig::default();
        SuiteOptions {
            seed: cfg.seed,
            tolerance: 1e-6,
            cfg,
            interpolation_samples: 1000,
            random_cov_cases: 10,
            random_witnesses: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    /// The criterion's checks hold and it finished within budget.
    pub passed: bool,
    pub checks_passed: bool,
    pub runtime_s: f64,
    pub budget_s: f64,
    pub summary: String,
    pub details: Value,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {} {:<26} {}  {:>8.3}s / {:>5}s  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.runtime_s,
            self.budget_s,
            self.summary
        )
    }
}

#[derive(Default)]
struct Checks {
    items: Vec<(String, bool)>,
}

impl Checks {
    fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.items.push((name.into(), ok));
    }

    fn passed(&self) -> bool {
        self.items.iter().all(|(_, ok)| *ok)
    }

    fn summary(&self) -> String {
        let ok = self.items.iter().filter(|(_, ok)| *ok).count();
        let failed: Vec<&str> =
            self.items.iter().filter(|(_, ok)| !*ok).map(|(n, _)| n.as_str()).take(3).collect();
        if failed.is_empty() {
            format!("{ok}/{} checks", self.items.len())
        } else {
            format!("{ok}/{} checks; failing: {}", self.items.len(), failed.join(", "))
        }
    }

    fn details(&self) -> Value {
        json!(self.items.iter().map(|(n, ok)| json!({"check": n, "ok": ok})).collect::<Vec<_>>())
    }
}

type Outcome3 = (bool, String, Value);

fn from_checks(c: Checks, extra: Value) -> Outcome3 {
    let mut details = json!({ "checks": c.details() });
    if let (Value::Object(d), Value::Object(e)) = (&mut details, extra) {
        d.extend(e);
    }
    (c.passed(), c.summary(), details)
}

fn error_outcome(e: impl std::fmt::Display) -> Outcome3 {
    (false, format!("error: {e}"), json!({ "error": e.to_string() }))
}

pub fn run_criterion(id: u8, opts: &SuiteOptions) -> CriterionResult {
    let (_, name, budget) = CRITERIA
        .iter()
        .copied()
        .find(|c| c.0 == id)
        .unwrap_or((id, "unknown", 0.0));
    let start = Instant::now();
    let (checks_passed, summary, details) = match id {
        1 => exponent_vectors(),
        2 => interpolation_identities(opts),
        3 => jacobian_integrals(opts),
        4 => change_of_variables(opts),
        5 => membership_classifier(opts),
        6 => sharpness(opts),
        7 => positive_direction(opts),
        8 => figure_geometry(),
        _ => (false, "no such criterion".into(), Value::Null),
    };
    let runtime_s = start.elapsed().as_secs_f64();
    CriterionResult {
        id,
        name,
        passed: checks_passed && runtime_s <= budget,
        checks_passed,
        runtime_s,
        budget_s: budget,
        summary,
        details,
    }
}

fn r(n: i64, d: i64) -> Real {
    Real::ratio(n, d)
}

// 1
fn exponent_vectors() -> Outcome3 {
    let mut c = Checks::default();
    let attempt = || -> Result<Checks, CliError> {
        let mut c = Checks::default();
        let sub = QcRegularity::new(2, r(2, 1), r(1, 1))?;
        let q = target_q(&r(1, 2), &Exponent::int(2), &sub)?.accepted().map(|t| t.q);
        c.check("q(n=2, s=1/2, p=2, b=1) = 4/3", q == Some(Exponent::ratio(4, 3)));
        let q = target_q(&r(1, 1), &Exponent::int(4), &sub)?.accepted().map(|t| t.q);
        c.check("q(n=2, s=1, p=4, a=2) = 8/3", q == Some(Exponent::ratio(8, 3)));
        let bounds = planar_bounds(&r(2, 1))?;
        c.check(
            "(a_K, b_K)(K=2) = (2, 1)",
            bounds == (PlanarBound::Finite(r(2, 1)), PlanarBound::Finite(r(1, 1))),
        );
        let beta = hk_beta_planar(&r(1, 2), &Exponent::int(2), &r(3, 2))?;
        c.check("beta(s=1/2, p=2, K=3/2) = 1/4", beta == Outcome::Accepted(r(1, 4)));
        let ix = interpolation_indices(&r(1, 2), &Exponent::int(2), &sub, None)?;
        c.check(
            "indices (p0, p1, q0, q1) = (3, 3/2, 3/2, 6/5)",
            (ix.p0, ix.p1, ix.q0, ix.q1)
                == (Exponent::int(3), Exponent::ratio(3, 2), Exponent::ratio(3, 2), Exponent::ratio(6, 5)),
        );
        // the same vectors through floating-point inputs
        let fsub = QcRegularity::new(2, Real::float(2.0), Real::float(1.0))?;
        let close = |t: Option<qcc_core::exponents::Target>, want: f64| {
            t.is_some_and(|t| (t.q.inv().to_f64() - want).abs() <= 1e-12)
        };
        let t = target_q(&Real::float(0.5), &Exponent::new(Real::float(2.0))?, &fsub)?.accepted();
        c.check("float q(n=2, s=0.5, p=2, b=1)", close(t, 0.75));
        let t = target_q(&Real::float(1.0), &Exponent::new(Real::float(4.0))?, &fsub)?.accepted();
        c.check("float q(n=2, s=1, p=4, a=2)", close(t, 0.375));
        let beta = hk_beta_planar(&Real::float(0.5), &Exponent::new(Real::float(2.0))?, &Real::float(1.5))?;
        c.check(
            "float beta(s=0.5, p=2, K=1.5)",
            beta.accepted().is_some_and(|b| (b.to_f64() - 0.25).abs() <= 1e-12),
        );
        let ix = interpolation_indices(&Real::float(0.5), &Exponent::new(Real::float(2.0))?, &fsub, None)?;
        let got = [ix.p0.inv(), ix.p1.inv(), ix.q0.inv(), ix.q1.inv()].map(Real::to_f64);
        let want = [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 5.0 / 6.0];
        c.check(
            "float indices",
            got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1e-12),
        );
        Ok(c)
    };
    match attempt() {
        Ok(checks) => c = checks,
        Err(e) => c.check(format!("error: {e}"), false),
    }
    from_checks(c, json!({}))
}

fn random_regularity(rng: &mut ChaCha8Rng) -> (u32, Real, Exponent, QcRegularity) {
    let n = rng.random_range(2..=4u32);
    let s = r(rng.random_range(1..=23), 24);
    let p = Exponent::new(r(rng.random_range(9..=64), 8)).expect("above one");
    let a = r(rng.random_range(9..=40), 8);
    let b = r(rng.random_range(2..=40), 8);
    (n, s, p, QcRegularity::new(n, a, b).expect("positive powers"))
}

// 2
fn interpolation_identities(opts: &SuiteOptions) -> Outcome3 {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let mut worst_exact = 0.0f64;
    let mut worst_float = 0.0f64;
    let mut per_regime = std::collections::BTreeMap::<String, usize>::new();
    let mut per_dim = std::collections::BTreeMap::<u32, usize>::new();
    let mut float_failures = 0usize;
    while accepted < opts.interpolation_samples && attempts < 200 * opts.interpolation_samples {
        attempts += 1;
        let (n, s, p, reg) = random_regularity(&mut rng);
        let Ok(ix) = interpolation_indices(&s, &p, &reg, None) else { continue };
        accepted += 1;
        *per_regime.entry(ix.regime.to_string()).or_default() += 1;
        *per_dim.entry(n).or_default() += 1;
        let (rp, rq) = ix.convex_residuals();
        for res in [rp, rq].into_iter().chain(ix.lambda_residuals(&reg)) {
            worst_exact = worst_exact.max(res.abs().to_f64());
        }
        let fs = Real::float(s.to_f64());
        let fp = Exponent::new(Real::float(p.to_f64())).expect("above one");
        let freg = QcRegularity::new(n, Real::float(reg.a.to_f64()), Real::float(reg.b.to_f64()))
            .expect("positive powers");
        match interpolation_indices(&fs, &fp, &freg, None) {
            Ok(fx) => {
                let (rp, rq) = fx.convex_residuals();
                for res in [rp, rq].into_iter().chain(fx.lambda_residuals(&freg)) {
                    worst_float = worst_float.max(res.abs().to_f64());
                }
            }
            Err(_) => float_failures += 1,
        }
    }
    let mut c = Checks::default();
    c.check(format!("{accepted} admissible samples"), accepted == opts.interpolation_samples);
    c.check("all of n = 2, 3, 4 sampled", per_dim.len() == 3);
    c.check("exact residuals are zero", worst_exact == 0.0);
    c.check("float residuals within 1e-10", worst_float <= 1e-10);
    c.check("float inputs accepted alike", float_failures == 0);
    from_checks(
        c,
        json!({
            "samples": accepted, "attempts": attempts, "regimes": per_regime,
            "dimensions": per_dim, "max_float_residual": worst_float,
        }),
    )
}

// 3
fn jacobian_integrals(opts: &SuiteOptions) -> Outcome3 {
    let mut c = Checks::default();
    let quad_opts = AdaptiveOptions::default();
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    let mut mismatches = Vec::new();
    for n in [2usize, 3] {
        for k in [0.5, 0.8, 1.0, 1.5, 2.0, 3.0] {
            let Ok(map) = RadialStretch::new(k, n) else { continue };
            let mut ts = vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
            if let Some(t_star) = map.divergence_boundary() {
                ts.push(0.9 * t_star);
                ts.push(0.5 * t_star);
            }
            for t in ts {
                for radius in [1.0, 2.0] {
                    cases += 1;
                    let ball = Ball::centered(n, radius).expect("valid ball");
                    let closed = jacobian_power_integral(&map, &ball, t);
                    let quad = jacobian_power_integral_quadrature(&map, radius, t, &quad_opts);
                    let ok = match (closed, quad) {
                        (Ok(cl), Ok(q)) => match (cl.value(), q.value()) {
                            (Some(v), Some(qv)) => {
                                let rel = (qv - v).abs() / v.abs();
                                worst = worst.max(rel);
                                rel <= opts.tolerance
                            }
                            (None, None) => true,
                            _ => false,
                        },
                        _ => false,
                    };
                    if !ok {
                        mismatches.push(json!({"n": n, "k": k, "t": t, "radius": radius}));
                    }
                }
            }
        }
    }
    c.check(format!("{cases} closed forms match quadrature"), mismatches.is_empty());
    let ball = Ball::centered(2, 1.0).expect("valid ball");
    for k in [0.5, 0.8, 1.5, 2.0, 3.0] {
        let map = RadialStretch::new(k, 2).expect("positive k");
        let t_star = if k > 1.0 { -1.0 / (k - 1.0) } else { 1.0 / (1.0 - k) };
        let (inside, outside) = if k > 1.0 { (t_star + 1e-9, t_star - 1e-9) } else { (t_star - 1e-9, t_star + 1e-9) };
        let div = |t: f64| jacobian_power_integral(&map, &ball, t).map(|j| j.is_divergent());
        c.check(
            format!("boundary k={k} at t={t_star}"),
            map.divergence_boundary() == Some(t_star)
                && div(t_star) == Ok(true)
                && div(inside) == Ok(false)
                && div(outside) == Ok(true),
        );
    }
    let identity = RadialStretch::new(1.0, 2).expect("k = 1");
    c.check("identity never diverges", identity.divergence_boundary().is_none());
    from_checks(c, json!({ "cases": cases, "max_rel_error": worst, "mismatches": mismatches }))
}

// 4
fn change_of_variables(opts: &SuiteOptions) -> Outcome3 {
    let mut c = Checks::default();
    let mut rows = Vec::new();
    let mut record = |c: &mut Checks, label: String, k: f64, prof: RadialProfile, n: usize, radius: f64, tol: f64| {
        let res = RadialStretch::new(k, n)
            .map_err(|e| e.to_string())
            .and_then(|m| Ball::centered(n, radius).map(|b| (m, b)).map_err(|e| e.to_string()))
            .and_then(|(m, b)| change_of_variables_check(&m, &prof, &b).map_err(|e| e.to_string()));
        match res {
            Ok(cov) => {
                rows.push(json!({"case": label, "lhs": cov.lhs, "rhs": cov.rhs, "residual": cov.residual}));
                c.check(format!("{label}: residual {:.1e}", cov.residual), cov.residual <= tol);
                Some(cov)
            }
            Err(e) => {
                c.check(format!("{label}: {e}"), false);
                None
            }
        }
    };
    let tol = opts.tolerance;
    let area = record(&mut c, "k=2, f=1, B_1, n=2".into(), 2.0, RadialProfile::constant(1.0), 2, 1.0, tol);
    c.check(
        "LHS equals |phi_2(B_1)| = pi",
        area.is_some_and(|cov| (cov.lhs - std::f64::consts::PI).abs() <= 1e-6),
    );
    for (prof, n, radius) in [
        (RadialProfile::singular(0.5).expect("rho > 0"), 2, 1.0),
        (RadialProfile::flat(1.5).expect("rho > 0"), 3, 0.7),
    ] {
        record(&mut c, format!("k=1, {prof:?}, n={n}"), 1.0, prof, n, radius, 1e-12);
    }
    let linear = RadialProfile::piecewise(vec![PowerPiece {
        start: 0.0,
        end: None,
        coefficient: 1.0,
        exponent: 1.0,
    }])
    .expect("valid piece");
    record(&mut c, "k=1/2, f=|x|, B_1, n=2".into(), 0.5, linear, 2, 1.0, tol);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xc0_57);
    for i in 0..opts.random_cov_cases {
        let n = rng.random_range(2..=3usize);
        let k = rng.random_range(0.3..3.0);
        let radius = rng.random_range(0.5..1.5);
        let rho = rng.random_range(0.05..0.9);
        let prof = match rng.random_range(0..3) {
            0 => RadialProfile::singular(rho),
            1 => RadialProfile::flat(3.0 * rho),
            _ => RadialProfile::piecewise(vec![
                PowerPiece { start: 0.0, end: Some(0.5), coefficient: 1.0, exponent: 2.0 * rho },
                PowerPiece { start: 0.5, end: None, coefficient: 2.0, exponent: -rho },
            ]),
        }
        .expect("valid profile");
        record(&mut c, format!("random {i}: k={k:.3}, n={n}"), k, prof, n, radius, tol);
    }
    from_checks(c, json!({ "cases": rows }))
}

pub const GRID_P: [f64; 7] = [1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 3.5];
pub const GRID_RHO: [f64; 7] = [0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 1.0];

#[derive(Clone, Debug, Serialize)]
struct GridRow {
    rho: f64,
    p: f64,
    margin: f64,
    oracle: Membership,
    gagliardo: Verdict,
    modulus: Verdict,
    gagliardo_slope: f64,
    modulus_slope: f64,
}

// 5
fn membership_classifier(opts: &SuiteOptions) -> Outcome3 {
    let s = r(1, 2);
    let cases: Vec<(f64, f64)> =
        GRID_P.iter().flat_map(|&p| GRID_RHO.iter().map(move |&rho| (rho, p))).collect();
    let run = || -> Result<Vec<GridRow>, CliError> {
        cases
            .iter()
            .map(|&(rho, p)| {
                let prof = RadialProfile::singular(rho)?;
                let pe = Exponent::new(Real::exact_from_f64(p).expect("finite"))?;
                let oracle = prof.membership_oracle(&s, &pe, 2)?;
                let thr = membership_threshold(ProfileKind::SingularPower, &s, &pe, 2)?;
                let margin = (Real::exact_from_f64(rho).expect("finite") - thr).abs().to_f64();
                let run = |est| -> Result<(Verdict, f64), CliError> {
                    let spec = FractionalNormSpec::new(0.5, p, 2, est)?;
                    let e = norms::estimate(&prof, &spec, &opts.cfg)?;
                    Ok((e.verdict, e.shell_slope))
                };
                let (gagliardo, gagliardo_slope) = run(Estimator::GagliardoDoubleIntegral)?;
                let (modulus, modulus_slope) = run(Estimator::ModulusOfSmoothness)?;
                Ok(GridRow { rho, p, margin, oracle, gagliardo, modulus, gagliardo_slope, modulus_slope })
            })
            .collect()
    };
    let rows = match run() {
        Ok(rows) => rows,
        Err(e) => return error_outcome(e),
    };
    let mut c = Checks::default();
    let mut stats = serde_json::Map::new();
    let tau = opts.cfg.slope_threshold;
    for (name, pick, slope) in [
        (
            "gagliardo",
            (|g: &GridRow| g.gagliardo) as fn(&GridRow) -> Verdict,
            (|g: &GridRow| g.gagliardo_slope) as fn(&GridRow) -> f64,
        ),
        ("modulus", |g: &GridRow| g.modulus, |g: &GridRow| g.modulus_slope),
    ] {
        let rate = |min_margin: f64| {
            let sel: Vec<&GridRow> = rows.iter().filter(|g| g.margin >= min_margin).collect();
            let agree = sel.iter().filter(|g| pick(g).agrees_with(g.oracle)).count();
            (agree, sel.len())
        };
        let (a10, n10) = rate(0.1);
        let (a05, n05) = rate(0.05);
        c.check(format!("{name}: margin >= 0.1 agreement {a10}/{n10}"), a10 == n10);
        c.check(
            format!("{name}: margin >= 0.05 agreement {a05}/{n05}"),
            a05 as f64 >= 0.95 * n05 as f64,
        );
        let boundary: Vec<&GridRow> = rows.iter().filter(|g| g.oracle == Membership::Boundary).collect();
        c.check(
            format!("{name}: threshold cases inconclusive"),
            boundary.iter().all(|g| pick(g) == Verdict::Inconclusive),
        );
        // the true shell slope at a threshold is zero, so the dead band must cover the bias
        c.check(
            format!("{name}: threshold slopes inside the dead band (-{tau}, {tau})"),
            boundary.iter().all(|g| slope(g).abs() < tau),
        );
        let contradictions = rows.iter().filter(|g| pick(g).contradicts(g.oracle)).count();
        stats.insert(
            name.into(),
            json!({"agree_0.1": [a10, n10], "agree_0.05": [a05, n05], "contradicts_oracle": contradictions}),
        );
    }
    let disagreements = rows
        .iter()
        .filter(|g| g.gagliardo.is_definite() && g.modulus.is_definite() && g.gagliardo != g.modulus)
        .count();
    c.check(format!("estimators disagree on {disagreements} definite pairs"), disagreements == 0);
    c.check("grid has at least one threshold case", rows.iter().any(|g| g.oracle == Membership::Boundary));
    from_checks(c, json!({ "stats": stats, "grid": rows }))
}

// 6
fn sharpness(opts: &SuiteOptions) -> Outcome3 {
    let mut c = Checks::default();
    let mut reports = Vec::new();
    let mut inputs = vec![
        ("subcritical example".to_string(), Regime::Subcritical, r(1, 2), Exponent::int(2), Exponent::ratio(3, 2), 2, r(1, 1)),
        ("supercritical example".to_string(), Regime::Supercritical, r(1, 1), Exponent::int(4), Exponent::int(3), 2, r(2, 1)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5a_4b);
    for i in 0..opts.random_witnesses {
        let w = sample_admissible(&mut rng);
        inputs.push((format!("random {i}"), w.regime, w.s, w.p, w.q_prime, w.n, w.jacobian_power));
    }
    for (i, (label, regime, s, p, q_prime, n, power)) in inputs.into_iter().enumerate() {
        let w = match build_witness(regime, &s, &p, &q_prime, n, &power) {
            Ok(w) => w,
            Err(e) => {
                c.check(format!("{label}: {e}"), false);
                continue;
            }
        };
        c.check(format!("{label}: inequalities hold"), w.all_checks_hold());
        let estimators: &[Estimator] = if i < 2 {
            &[Estimator::GagliardoDoubleIntegral, Estimator::ModulusOfSmoothness]
        } else {
            &[Estimator::GagliardoDoubleIntegral]
        };
        for &est in estimators {
            match verify_witness_numerically(&w, est, &opts.cfg) {
                Ok(rep) => {
                    c.check(
                        format!("{label}: analytic (member, non-member)"),
                        rep.analytic == (Membership::Member, Membership::NonMember),
                    );
                    c.check(format!("{label} {est:?}: numerical consistent"), rep.consistent);
                    c.check(
                        format!("{label} {est:?}: inconclusive only near a threshold"),
                        rep.inconclusive_justified,
                    );
                    reports.push(json!({
                        "case": label, "estimator": est, "s": w.s, "p": w.p, "q_prime": w.q_prime,
                        "n": w.n, "k": w.k, "rho": w.rho, "analytic": rep.analytic,
                        "numerical": rep.numerical, "margins": rep.margins,
                    }));
                }
                Err(e) => c.check(format!("{label}: {e}"), false),
            }
        }
    }
    from_checks(c, json!({ "witnesses": reports }))
}

// 7
fn positive_direction(opts: &SuiteOptions) -> Outcome3 {
    let mut c = Checks::default();
    let mut sweeps = Vec::new();
    let mut pairs = 0;
    let cases = [
        (r(1, 2), Exponent::int(2), vec![r(3, 4), r(5, 4), r(19, 10)], vec![0.2, 0.4]),
        (r(1, 1), Exponent::int(4), vec![r(3, 5), r(4, 5)], vec![0.8, 1.0]),
    ];
    for (s, p, k_grid, rhos) in cases {
        let reg = QcRegularity::new(2, r(2, 1), r(1, 1)).expect("valid powers");
        match positive_direction_sweep(&s, &p, &reg, &k_grid, Some(&rhos), Estimator::GagliardoDoubleIntegral, &opts.cfg) {
            Ok(rep) => {
                for row in &rep.rows {
                    pairs += 1;
                    c.check(
                        format!("s={s} p={p} k={} rho={}: member at q={}", row.k, row.rho, rep.q),
                        row.passed,
                    );
                }
                sweeps.push(rep);
            }
            Err(e) => c.check(format!("s={s} p={p}: {e}"), false),
        }
    }
    c.check(format!("{pairs} pairs swept"), pairs == 10);
    from_checks(c, json!({ "sweeps": sweeps }))
}

// 8
fn figure_geometry() -> Outcome3 {
    let mut c = Checks::default();
    let pts = |v: Vec<(Real, Exponent)>| v.into_iter().map(|(s, p)| SourcePoint { s, p }).collect();
    let figure2 = DiagramParams {
        n: 2,
        a: r(2, 1),
        b: r(1, 1),
        points: pts(vec![
            (r(1, 1), Exponent::ratio(3, 2)),
            (r(1, 1), Exponent::int(2)),
            (r(1, 1), Exponent::int(4)),
            (r(1, 4), Exponent::ratio(5, 2)),
            (r(3, 4), Exponent::int(6)),
        ]),
        interpolation: false,
        epsilon0: None,
    };
    let figure3 = DiagramParams {
        n: 2,
        a: r(2, 1),
        b: r(1, 1),
        points: pts(vec![(r(1, 2), Exponent::int(2)), (r(1, 2), Exponent::int(4)), (r(1, 2), Exponent::int(8))]),
        interpolation: true,
        epsilon0: Some(r(1, 20)),
    };
    let mut arrows = 0;
    for (name, params) in [("figure 2", &figure2), ("figure 3", &figure3)] {
        match diagram::build(params) {
            Ok(d) => {
                arrows += d.arrows.len();
                c.check(format!("{name}: gap = d/c on {} arrows", d.arrows.len()), d.all_proportional());
                c.check(format!("{name}: no rejections"), d.rejected.is_empty() && d.skipped.is_empty());
                if name == "figure 2" {
                    let regimes: Vec<Regime> = d.arrows.iter().map(|a| a.arrow.regime).collect();
                    c.check(
                        "figure 2: all three regimes drawn",
                        [Regime::Subcritical, Regime::Critical, Regime::Supercritical]
                            .iter()
                            .all(|r| regimes.contains(r)),
                    );
                    c.check(
                        "figure 2: critical arrow has zero length",
                        d.arrows.iter().filter(|a| a.arrow.regime == Regime::Critical).all(|a| a.arrow.gap.is_zero()),
                    );
                } else {
                    let first: Vec<Real> =
                        d.index_points.iter().take(4).map(|p| p.point.inv_p.clone()).collect();
                    c.check(
                        "figure 3: indices 1/p0, 1/q0, 1/p1, 1/q1 = 1/3, 2/3, 2/3, 5/6",
                        first == vec![r(1, 3), r(2, 3), r(2, 3), r(5, 6)],
                    );
                }
            }
            Err(e) => c.check(format!("{name}: {e}"), false),
        }
    }
    from_checks(c, json!({ "arrows": arrows }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
    pub runtime_s: f64,
}

pub fn run_suite(ids: &[u8], opts: &SuiteOptions) -> SuiteReport {
    let start = Instant::now();
    let criteria: Vec<CriterionResult> = ids.iter().map(|&id| run_criterion(id, opts)).collect();
    SuiteReport {
        passed: criteria.iter().all(|c| c.passed),
        criteria,
        runtime_s: start.elapsed().as_secs_f64(),
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteParams {
    #[serde(default)]
    criteria: Option<Vec<u8>>,
    #[serde(default)]
    classifier: ClassifierParams,
    #[serde(default)]
    interpolation_samples: Option<usize>,
    #[serde(default)]
    random_witnesses: Option<usize>,
}

pub fn command(spec: &RunSpec) -> Result<Report, CliError> {
    let params: SuiteParams = spec.params()?;
    let d = SuiteOptions::default();
    let opts = SuiteOptions {
        seed: spec.seed,
        tolerance: spec.tolerance.unwrap_or(d.tolerance),
        cfg: params.classifier.config(spec.seed)?,
        interpolation_samples: params.interpolation_samples.unwrap_or(d.interpolation_samples),
        random_witnesses: params.random_witnesses.unwrap_or(d.random_witnesses),
        ..d
    };
    let all: Vec<u8> = CRITERIA.iter().map(|c| c.0).collect();
    let ids = params.criteria.unwrap_or(all);
    if let Some(bad) = ids.iter().find(|&&i| !CRITERIA.iter().any(|c| c.0 == i)) {
        return Err(CliError::invalid(format!("no criterion {bad}")));
    }
    let report = run_suite(&ids, &opts);
    for c in &report.criteria {
        eprintln!("{}", c.line());
    }
    let mut table = Table::new(&["criterion", "name", "passed", "runtime_s", "budget_s", "summary"]);
    for c in &report.criteria {
        table.push(vec![
            c.id.to_string(),
            c.name.into(),
            c.passed.to_string(),
            float(c.runtime_s),
            float(c.budget_s),
            c.summary.clone(),
        ]);
    }
    Ok(Report {
        status: if report.passed { Status::Ok } else { Status::Failed },
        result: json!(report),
        table: Some(table),
        svg: None,
    })
}
