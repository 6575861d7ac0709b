//! Sobolev–Slobodeckij double integral of a radial function,
//! `∬_{B×B} |f(x) − f(y)|^p / |x − y|^{n+sp} dx dy`.
//!
//! With `|x| = r`, `|y| = t` the spherical parts collapse to the angular
//! kernel `A(r, t) = ∫_0^π sin^{n−2}θ (r² + t² − 2rt cos θ)^{−(n+sp)/2} dθ`,
//! which is homogeneous: `A(r, t) = r^{−(n+sp)} Â(t/r)` for `t ≤ r`. Writing
//! `t` for the smaller radius and `x = t/r ∈ (0, 1)`,
//!
//! `E = 2 ω_{n−1} ω_{n−2} ∫_0^1 x^{sp−1} Â(x) ∫_0^{Rx} t^{n−1−sp} |F(t/x) − F(t)|^p dt dx`.
//!
//! The diagonal `r = t` becomes `x = 1`, where `Â(x) ~ (1 − x)^{−1−sp}` is
//! offset by `|F(t/x) − F(t)|^p ~ (1 − x)^p`; the `x`-mesh is graded
//! geometrically toward both ends. Layers of the smaller radius `t` give
//! the truncated integrals directly.

use super::{assemble, EstimatorConfig, FractionalNormSpec, MeshDiagnostics, NormError};
use super::NormEstimate;
use crate::profiles::RadialProfile;
use crate::quadrature::{adaptive, AdaptiveOptions, GaussLegendre};
use crate::radial_maps::unit_sphere_area;

/// Levels of geometric grading toward the diagonal `x = 1`.
const DIAGONAL_LEVELS: i32 = 30;
const X_ORDER: usize = 12;
const T_ORDER: usize = 10;

/// `A(r, t)`; symmetric in its first two arguments by construction.
pub fn angular_kernel(r: f64, t: f64, n: usize, exponent: f64) -> f64 {
    let (hi, lo) = if r >= t { (r, t) } else { (t, r) };
    hi.powf(-exponent) * reduced_angular_kernel(lo / hi, n, exponent)
}

/// `Â(x) = ∫_0^π sin^{n−2}θ ((1 − x)² + 4x sin²(θ/2))^{−exponent/2} dθ` for
/// `0 ≤ x < 1`.
///
/// The integrand has a peak of width `h = (1 − x)/√x` at `θ = 0`; cells
/// `[0, h], [h, 2h], [2h, 4h], …` resolve it.
pub fn reduced_angular_kernel(x: f64, n: usize, exponent: f64) -> f64 {
    reduced_kernel_with_error(x, n, exponent).0
}

fn reduced_kernel_with_error(x: f64, n: usize, exponent: f64) -> (f64, f64) {
    use std::f64::consts::PI;
    debug_assert!((0.0..1.0).contains(&x));
    let gap = (1.0 - x) * (1.0 - x);
    let f = |theta: f64| {
        let half = (0.5 * theta).sin();
        let d2 = gap + 4.0 * x * half * half;
        theta.sin().powi(n as i32 - 2) * d2.powf(-0.5 * exponent)
    };
    let opts = AdaptiveOptions { rel_tol: 1e-11, max_intervals: 200, ..Default::default() };
    let h = if x == 0.0 { PI } else { (1.0 - x) / x.sqrt() };
    let mut edges = vec![0.0];
    let mut e = h;
    while e < PI {
        edges.push(e);
        e *= 2.0;
    }
    edges.push(PI);
    let mut value = 0.0;
    let mut error = 0.0;
    for w in edges.windows(2) {
        match adaptive(&f, w[0], w[1], &opts) {
            Ok(q) => {
                value += q.value;
                error += q.error;
            }
            Err(crate::quadrature::QuadratureError::NoConvergence { value: v, error: er, .. }) => {
                value += v;
                error += er;
            }
            Err(_) => return (f64::NAN, f64::INFINITY),
        }
    }
    (value, error)
}

fn x_cells(levels: u32) -> Vec<(f64, f64)> {
    let mut cells: Vec<(f64, f64)> = (1..levels as i32)
        .rev()
        .map(|m| (0.5f64.powi(m + 1), 0.5f64.powi(m)))
        .collect();
    cells.extend((1..=DIAGONAL_LEVELS).map(|m| (1.0 - 0.5f64.powi(m), 1.0 - 0.5f64.powi(m + 1))));
    cells
}

pub fn gagliardo_seminorm(
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
    let sp = s * p;
    let exponent = n as f64 + sp;
    let levels = cfg.max_level;
    let kinks = prof.kinks();

    let x_rule = GaussLegendre::new(X_ORDER);
    let t_rule = GaussLegendre::new(T_ORDER);
    let cells = x_cells(levels);
    let nodes: Vec<(f64, f64)> =
        cells.iter().flat_map(|&(a, b)| x_rule.mapped(a, b).collect::<Vec<_>>()).collect();

    let per_node = cfg.execution.map_slice(&nodes, |&(x, wx)| {
        let (ahat, aerr) = reduced_kernel_with_error(x, n, exponent);
        debug_assert!({
            let (r, t) = (0.7, 0.7 * x);
            angular_kernel(r, t, n, exponent) == angular_kernel(t, r, n, exponent)
        });
        let weight = wx * x.powf(sp - 1.0) * ahat;
        let g = |t: f64| {
            let d = (prof.value(t / x) - prof.value(t)).abs();
            if d == 0.0 {
                0.0
            } else {
                t.powf(n as f64 - 1.0 - sp) * d.powf(p)
            }
        };
        let top = radius * x;
        let layers: Vec<f64> = (0..levels as i32)
            .map(|c| {
                let hi = (radius * 0.5f64.powi(c)).min(top);
                let lo = radius * 0.5f64.powi(c + 1);
                if hi <= lo {
                    return 0.0;
                }
                let mut edges = vec![lo, hi];
                for &b in &kinks {
                    for e in [b, b * x] {
                        if e > lo && e < hi {
                            edges.push(e);
                        }
                    }
                }
                edges.sort_by(f64::total_cmp);
                edges.windows(2).map(|w| t_rule.integrate(g, w[0], w[1])).sum::<f64>() * weight
            })
            .collect();
        (layers, aerr / ahat.abs().max(f64::MIN_POSITIVE))
    });

    let c_n = 2.0 * unit_sphere_area(n) * sphere_area_below(n);
    let mut shells = vec![0.0; levels as usize];
    let mut rel_err: f64 = 0.0;
    for (layers, err) in &per_node {
        for (acc, v) in shells.iter_mut().zip(layers) {
            *acc += v;
        }
        rel_err = rel_err.max(*err);
    }
    for v in shells.iter_mut() {
        *v *= c_n;
    }
    let mesh = MeshDiagnostics {
        cells: cells.len(),
        nodes: nodes.len(),
        quadrature_error: rel_err,
        samples: None,
    };
    Ok(assemble(&shells, radius, p, cfg, mesh, None))
}

/// `ω_{n−2}`, the area of the unit sphere in `ℝ^{n−1}`; two points for `n = 2`.
pub(super) fn sphere_area_below(n: usize) -> f64 {
    if n == 2 {
        2.0
    } else {
        unit_sphere_area(n - 1)
    }
}
