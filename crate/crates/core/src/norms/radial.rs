//! `L^p` norm and gradient seminorm of radial functions, reduced to
//! `ω_{n−1} ∫_0^R |G(r)|^p r^{n−1} dr`.

use super::{assemble, check_domain, EstimatorConfig, MeshDiagnostics, NormError, NormEstimate};
use super::{NormValue, Verdict};
use crate::profiles::{PowerPiece, RadialProfile};
use crate::quadrature::{radial_integral, AdaptiveOptions};
use crate::radial_maps::{unit_sphere_area, Ball};

#[derive(Clone, Copy)]
enum Order {
    Value,
    Gradient,
}

pub fn lp_norm(
    prof: &RadialProfile,
    p: f64,
    ball: &Ball,
    cfg: &EstimatorConfig,
) -> Result<NormEstimate, NormError> {
    radial_norm(prof, p, ball, cfg, Order::Value)
}

/// `‖∇f‖_{L^p}` with `|∇f(x)| = |F'(|x|)|`.
pub fn sobolev_seminorm(
    prof: &RadialProfile,
    p: f64,
    ball: &Ball,
    cfg: &EstimatorConfig,
) -> Result<NormEstimate, NormError> {
    radial_norm(prof, p, ball, cfg, Order::Gradient)
}

fn radial_norm(
    prof: &RadialProfile,
    p: f64,
    ball: &Ball,
    cfg: &EstimatorConfig,
    order: Order,
) -> Result<NormEstimate, NormError> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(NormError::Exponent(p));
    }
    cfg.validate()?;
    let n = ball.dim();
    check_domain(ball, n)?;
    let radius = ball.radius();
    let levels = cfg.max_level as usize;
    let (shells, total, mesh) = match prof {
        RadialProfile::Piecewise { pieces } => closed_form(pieces, p, n, radius, levels, order),
        _ => {
            let omega = unit_sphere_area(n);
            let g = |r: f64| {
                let v = match order {
                    Order::Value => prof.value(r),
                    Order::Gradient => prof.derivative(r),
                };
                omega * v.abs().powf(p) * r.powi(n as i32 - 1)
            };
            let opts = AdaptiveOptions { rel_tol: 1e-12, max_intervals: 1000, ..Default::default() };
            let ri = radial_integral(&g, radius, &prof.kinks(), &opts)?;
            let mut shells = ri.cells[..levels.min(ri.cells.len())].to_vec();
            shells.resize(levels, 0.0);
            let mesh = MeshDiagnostics {
                cells: ri.cells.len(),
                nodes: ri.cells.len() * 15,
                quadrature_error: ri.error,
                samples: None,
            };
            (shells, ri.value(), mesh)
        }
    };
    let mut est = assemble(&shells, radius, p, cfg, mesh, None);
    match total {
        Some(v) => {
            est.value = NormValue::Finite(v.powf(1.0 / p));
            est.verdict = Verdict::Member;
        }
        None => {
            est.value = NormValue::Divergent;
            est.verdict = Verdict::NonMember;
        }
    }
    Ok(est)
}

/// `ω ∫_lo^hi |c|^p r^{α−1} dr`.
fn power_integral(scale: f64, alpha: f64, lo: f64, hi: f64) -> Option<f64> {
    if scale == 0.0 || hi <= lo {
        return Some(0.0);
    }
    if lo == 0.0 && alpha <= 0.0 {
        return None;
    }
    Some(if alpha == 0.0 {
        scale * (hi / lo).ln()
    } else {
        scale * (hi.powf(alpha) - lo.powf(alpha)) / alpha
    })
}

fn closed_form(
    pieces: &[PowerPiece],
    p: f64,
    n: usize,
    radius: f64,
    levels: usize,
    order: Order,
) -> (Vec<f64>, Option<f64>, MeshDiagnostics) {
    let omega = unit_sphere_area(n);
    let terms: Vec<(f64, f64, f64, f64)> = pieces
        .iter()
        .map(|pc| {
            let (c, e) = match order {
                Order::Value => (pc.coefficient, pc.exponent),
                Order::Gradient => (pc.coefficient * pc.exponent, pc.exponent - 1.0),
            };
            let scale = omega * c.abs().powf(p);
            (scale, e * p + n as f64, pc.start, pc.end.unwrap_or(f64::INFINITY))
        })
        .collect();
    let over = |lo: f64, hi: f64| -> Option<f64> {
        terms.iter().try_fold(0.0, |acc, &(scale, alpha, a, b)| {
            power_integral(scale, alpha, lo.max(a), hi.min(b)).map(|v| acc + v)
        })
    };
    let shells = (0..levels)
        .map(|c| {
            let hi = radius * 0.5f64.powi(c as i32);
            over(0.5 * hi, hi).expect("cells away from the origin are finite")
        })
        .collect();
    let mesh = MeshDiagnostics { cells: pieces.len(), nodes: 0, quadrature_error: 0.0, samples: None };
    (shells, over(0.0, radius), mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit(n: usize) -> Ball {
        Ball::centered(n, 1.0).unwrap()
    }

    fn cfg() -> EstimatorConfig {
        EstimatorConfig::default()
    }

    #[test]
    fn lp_examples() {
        let g2 = RadialProfile::flat(2.0).unwrap();
        let v = lp_norm(&g2, 2.0, &unit(2), &cfg()).unwrap().value.finite().unwrap();
        assert!((v - (PI / 3.0).sqrt()).abs() < 1e-10, "{v}");

        let f = RadialProfile::singular(0.5).unwrap();
        let v = lp_norm(&f, 2.0, &unit(2), &cfg()).unwrap().value.finite().unwrap();
        assert!((v - (PI / 3.0).sqrt()).abs() < 1e-9, "{v}");

        for (rho, p, n) in [(1.0, 2.0, 2), (0.75, 4.0, 3), (0.5, 4.0, 2)] {
            let f = RadialProfile::singular(rho).unwrap();
            let e = lp_norm(&f, p, &unit(n), &cfg()).unwrap();
            assert!(e.value.is_divergent(), "rho={rho} p={p} n={n}");
            assert_eq!(e.verdict, Verdict::NonMember);
        }
    }

    #[test]
    fn gradient_examples() {
        let one = RadialProfile::constant(3.0);
        let e = sobolev_seminorm(&one, 2.0, &unit(2), &cfg()).unwrap();
        assert_eq!(e.value, NormValue::Finite(0.0));

        let g1 = RadialProfile::flat(1.0).unwrap();
        let v = sobolev_seminorm(&g1, 2.0, &unit(2), &cfg()).unwrap().value.finite().unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-10, "{v}");

        let f = RadialProfile::singular(0.5).unwrap();
        assert!(sobolev_seminorm(&f, 4.0, &unit(2), &cfg()).unwrap().value.is_divergent());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        // r^ρ on [0, 1) has the same gradient modulus as 1 − r^ρ
        let rho = 0.7;
        let flat = RadialProfile::flat(rho).unwrap();
        let pieces = RadialProfile::piecewise(vec![PowerPiece {
            start: 0.0,
            end: Some(1.0),
            coefficient: 1.0,
            exponent: rho,
        }])
        .unwrap();
        let b = Ball::centered(3, 1.0).unwrap();
        let a = sobolev_seminorm(&flat, 2.5, &b, &cfg()).unwrap();
        let c = sobolev_seminorm(&pieces, 2.5, &b, &cfg()).unwrap();
        let (a, c) = (a.value.finite().unwrap(), c.value.finite().unwrap());
        assert!((a - c).abs() < 1e-9 * c, "{a} vs {c}");
    }

    #[test]
    fn partials_grow_toward_the_origin() {
        let f = RadialProfile::singular(0.9).unwrap();
        let e = lp_norm(&f, 2.0, &unit(2), &cfg()).unwrap();
        assert!(e.partials.windows(2).all(|w| w[1] >= w[0]));
        assert!(e.log_slope <= 0.0);
        assert_eq!(e.verdict, Verdict::Member);
    }
}
