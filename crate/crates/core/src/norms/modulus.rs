//! Integrated modulus of smoothness,
//! `∫_0^R t^{−sp} W(t) dt/t` with `W(t) = ∫_{B_R} ∫_{S^{n−1}} |f(x + tσ) − f(x)|^p dσ dx`.
//!
//! For radial `f` the inner sphere integral depends only on `r = |x|` and
//! the angle `θ` between `x` and the shift, giving
//! `W(t) = ω_{n−1} ω_{n−2} ∫_0^R r^{n−1} ∫_0^π sin^{n−2}θ |F(√(r² + t² + 2rt cos θ)) − F(r)|^p dθ dr`.
//! The `θ` integral is sampled by stratified Monte Carlo with a fixed seed;
//! the `r` integral uses Gauss–Legendre on a mesh scaled by `t`, so the
//! same relative nodes and the same random offsets recur at every shift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gagliardo::sphere_area_below;
use super::radial::lp_norm;
use super::{assemble, EstimatorConfig, FractionalNormSpec, MeshDiagnostics, NormError};
use super::{NormEstimate, NormValue, Verdict};
use crate::profiles::RadialProfile;
use crate::quadrature::{power_tail, GaussLegendre};
use crate::radial_maps::unit_sphere_area;

const R_ORDER: usize = 6;
const LOG_T_ORDER: usize = 4;
const ORIGIN_LEVELS: i32 = 20;
const DIAGONAL_LEVELS: i32 = 12;
const MIN_STRATA: usize = 16;

/// Cells in `ξ = r/t`, scale-free ones first.
fn xi_cells(t: f64, radius: f64, kinks: &[f64]) -> Vec<(f64, f64)> {
    let mut cells: Vec<(f64, f64)> = (1..=ORIGIN_LEVELS)
        .rev()
        .map(|m| (0.5f64.powi(m + 1), 0.5f64.powi(m)))
        .collect();
    cells.extend((1..=DIAGONAL_LEVELS).map(|m| (1.0 - 0.5f64.powi(m), 1.0 - 0.5f64.powi(m + 1))));
    cells.extend((1..=DIAGONAL_LEVELS).rev().map(|m| (1.0 + 0.5f64.powi(m + 1), 1.0 + 0.5f64.powi(m))));
    let top = radius / t;
    let mut lo = 2.0;
    while lo < top {
        cells.push((lo, 2.0 * lo));
        lo *= 2.0;
    }
    let cuts: Vec<f64> = kinks
        .iter()
        .flat_map(|&b| [(b - t) / t, b / t, (b + t) / t])
        .chain(std::iter::once(top))
        .collect();
    let mut out = Vec::with_capacity(cells.len() + cuts.len());
    for (a, b) in cells {
        if a >= top {
            continue;
        }
        let mut edges = vec![a, b.min(top)];
        edges.extend(cuts.iter().copied().filter(|&c| c > a && c < b.min(top)));
        edges.sort_by(f64::total_cmp);
        out.extend(edges.windows(2).map(|w| (w[0], w[1])));
    }
    out
}

struct ShiftEnergy {
    value: Option<f64>,
    nodes: usize,
    strata: usize,
}

/// `W(t)`; `None` when the part near the origin is not integrable.
fn shift_energy(
    prof: &RadialProfile,
    t: f64,
    n: usize,
    p: f64,
    radius: f64,
    offsets: &[f64],
) -> ShiftEnergy {
    use std::f64::consts::PI;
    let rule = GaussLegendre::new(R_ORDER);
    let cells = xi_cells(t, radius, &prof.kinks());
    let nodes: Vec<(f64, f64)> = cells
        .iter()
        .flat_map(|&(a, b)| rule.mapped(a * t, b * t).collect::<Vec<_>>())
        .collect();
    let strata = (offsets.len() / nodes.len()).max(MIN_STRATA);
    let dtheta = PI / strata as f64;
    let mut total = 0.0;
    for (i, &(r, w)) in nodes.iter().enumerate() {
        let fr = prof.value(r);
        let mut sum = 0.0;
        for m in 0..strata {
            let u = offsets[(i * strata + m) % offsets.len()];
            let theta = (m as f64 + u) * dtheta;
            let shifted = (r * r + t * t + 2.0 * r * t * theta.cos()).max(0.0).sqrt();
            let d = (prof.value(shifted) - fr).abs();
            if d != 0.0 {
                sum += theta.sin().powi(n as i32 - 2) * d.powf(p);
            }
        }
        total += w * r.powi(n as i32 - 1) * sum * dtheta;
    }
    let omega = unit_sphere_area(n);
    total *= omega * sphere_area_below(n);

    // below the mesh the shifted point sits at distance ≈ t
    let floor = t * 0.5f64.powi(ORIGIN_LEVELS + 1);
    let ft = prof.value(t);
    let g = |r: f64| omega * omega * r.powi(n as i32 - 1) * (prof.value(r) - ft).abs().powf(p);
    let value = match power_tail(&g, floor) {
        Ok((Some(tail), _)) => Some(total + tail),
        _ => None,
    };
    ShiftEnergy { value, nodes: nodes.len(), strata }
}

pub fn modulus_seminorm(
    prof: &RadialProfile,
    spec: &FractionalNormSpec,
    cfg: &EstimatorConfig,
) -> Result<NormEstimate, NormError> {
    spec.validate()?;
    cfg.validate()?;
    let (s, p, n) = (spec.s, spec.p, spec.n);
    if !(s > 0.0 && s < 1.0) {
        return Err(NormError::NotFractional(s));
    }
    let radius = spec.radius();
    let lp = lp_norm(prof, p, &spec.domain, cfg)?;
    if lp.value.is_divergent() {
        return Ok(NormEstimate { seed: Some(cfg.seed), ..lp });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let offsets: Vec<f64> = (0..cfg.samples).map(|_| rng.random::<f64>()).collect();

    let rule = GaussLegendre::new(LOG_T_ORDER);
    let levels = cfg.max_level as i32;
    let scales: Vec<(usize, f64, f64)> = (0..levels)
        .flat_map(|c| {
            let hi = (radius * 0.5f64.powi(c)).ln();
            let lo = (radius * 0.5f64.powi(c + 1)).ln();
            rule.mapped(lo, hi).map(move |(lt, w)| (c as usize, lt.exp(), w)).collect::<Vec<_>>()
        })
        .collect();
    let sp = s * p;
    let energies = cfg.execution.map_slice(&scales, |&(_, t, _)| {
        shift_energy(prof, t, n, p, radius, &offsets)
    });

    let mut shells = vec![0.0; levels as usize];
    let mut nodes = 0;
    let mut strata = 0;
    for (&(c, t, w), e) in scales.iter().zip(&energies) {
        nodes = nodes.max(e.nodes);
        strata = strata.max(e.strata);
        match e.value {
            Some(v) => shells[c] += w * t.powf(-sp) * v,
            None => {
                let mut est = assemble(&shells, radius, p, cfg, MeshDiagnostics::default(), Some(cfg.seed));
                est.value = NormValue::Divergent;
                est.verdict = Verdict::NonMember;
                return Ok(est);
            }
        }
    }
    let mesh = MeshDiagnostics {
        cells: scales.len(),
        nodes,
        quadrature_error: 0.0,
        samples: Some(nodes * strata),
    };
    Ok(assemble(&shells, radius, p, cfg, mesh, Some(cfg.seed)))
}
