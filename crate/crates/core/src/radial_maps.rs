//! Radial stretches `φ_k(x) = x|x|^{k−1}`.
//!
//! `φ_k` has Jacobian `k|x|^{n(k−1)}`, so every integral of a power of the
//! Jacobian over an origin-centred ball reduces to a one-dimensional power
//! integral in `r` with weight `ω_{n−1} r^{n−1}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::profiles::RadialProfile;
use crate::quadrature::{radial_integral, AdaptiveOptions, QuadratureError, RadialIntegral};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("stretch exponent must be positive and finite, got {0}")]
    Exponent(f64),
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("point has dimension {got}, map expects {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("Jacobian of φ_k with k = {0} < 1 is singular at the origin")]
    Singular(f64),
    #[error("ball radius must be positive, got {0}")]
    Radius(f64),
    #[error("operation needs an origin-centred ball")]
    OffCentre,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Surface measure `ω_{n−1} = 2π^{n/2} / Γ(n/2)` of the unit sphere in ℝⁿ.
pub fn unit_sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    // Γ(n/2) through Γ(1) = 1 and Γ(1/2) = √π
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(n as f64 / 2.0) / gamma
}

/// Volume of the unit ball, `ω_{n−1}/n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    unit_sphere_area(n) / n as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self, MapError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(MapError::Radius(radius));
        }
        if center.len() < 2 {
            return Err(MapError::Dimension(center.len()));
        }
        Ok(Ball { center, radius })
    }

    pub fn centered(n: usize, radius: f64) -> Result<Self, MapError> {
        Ball::new(vec![0.0; n], radius)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn is_origin_centered(&self) -> bool {
        self.center.iter().all(|&c| c == 0.0)
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.radius.powi(self.dim() as i32)
    }

    /// Whether the closed ball contains the origin.
    pub fn contains_origin(&self) -> bool {
        norm(&self.center) <= self.radius
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialStretch {
    k: f64,
    n: usize,
}

impl RadialStretch {
    pub fn new(k: f64, n: usize) -> Result<Self, MapError> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(MapError::Exponent(k));
        }
        if n < 2 {
            return Err(MapError::Dimension(n));
        }
        Ok(RadialStretch { k, n })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn check_point(&self, x: &[f64]) -> Result<(), MapError> {
        if x.len() != self.n {
            return Err(MapError::PointDimension { expected: self.n, got: x.len() });
        }
        Ok(())
    }

    /// `x|x|^{k−1}`, extended by continuity with `φ_k(0) = 0`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, MapError> {
        self.check_point(x)?;
        let r = norm(x);
        if r == 0.0 {
            return Ok(vec![0.0; self.n]);
        }
        let scale = r.powf(self.k - 1.0);
        Ok(x.iter().map(|v| v * scale).collect())
    }

    /// `k|x|^{n(k−1)}`.
    pub fn jacobian(&self, x: &[f64]) -> Result<f64, MapError> {
        self.check_point(x)?;
        self.jacobian_at_radius(norm(x))
    }

    pub fn jacobian_at_radius(&self, r: f64) -> Result<f64, MapError> {
        if r == 0.0 && self.k < 1.0 {
            return Err(MapError::Singular(self.k));
        }
        if self.k == 1.0 {
            return Ok(1.0);
        }
        Ok(self.k * r.powf(self.n as f64 * (self.k - 1.0)))
    }

    /// `φ_k^{-1} = φ_{1/k}`.
    pub fn inverse(&self) -> RadialStretch {
        RadialStretch { k: 1.0 / self.k, n: self.n }
    }

    /// `φ_k ∘ φ_j = φ_{kj}`.
    pub fn compose(&self, inner: &RadialStretch) -> RadialStretch {
        RadialStretch { k: self.k * inner.k, n: self.n }
    }

    /// Distortion constant: `k^{n−1}` for `k ≥ 1` and `(2−k)^n / k` for `k < 1`.
    pub fn distortion(&self) -> f64 {
        if self.k >= 1.0 {
            self.k.powi(self.n as i32 - 1)
        } else {
            (2.0 - self.k).powi(self.n as i32) / self.k
        }
    }

    /// Power in `r` of `J^t · r^{n−1}` after radial reduction, plus one:
    /// `n + n(k−1)t`. The integral over a ball around the origin is finite
    /// iff this is positive.
    pub fn power_integral_exponent(&self, t: f64) -> f64 {
        let n = self.n as f64;
        n + n * (self.k - 1.0) * t
    }

    /// Largest `t` of the form `a` (for `k < 1`) or `−b` (for `k > 1`) at
    /// which `∫ J^t` over a ball around the origin stays finite, as a
    /// supremum: `1/(1−k)` for `k < 1`, and `−1/(k−1)` for `k > 1` is the
    /// infimum. `None` for `k = 1`.
    pub fn divergence_boundary(&self) -> Option<f64> {
        if self.k == 1.0 {
            None
        } else {
            Some(-1.0 / (self.k - 1.0))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig { samples: 100_000, seed: 0x5eed_0fc0_ffee }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum JacobianIntegral {
    /// Closed form over an origin-centred ball.
    Exact { value: f64 },
    /// Seeded Monte Carlo over an off-centre ball.
    Estimate { value: f64, std_error: f64, samples: usize, seed: u64 },
    Divergent { exponent: f64 },
}

impl JacobianIntegral {
    pub fn value(&self) -> Option<f64> {
        match self {
            JacobianIntegral::Exact { value } | JacobianIntegral::Estimate { value, .. } => {
                Some(*value)
            }
            JacobianIntegral::Divergent { .. } => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, JacobianIntegral::Divergent { .. })
    }
}

/// `∫_B J_{φ_k}(x)^t dx`.
///
/// Over `B_R(0)` this is `k^t ω_{n−1} R^e / e` with `e = n + n(k−1)t`, and
/// divergent when `e ≤ 0`. Off-centre balls are integrated by seeded Monte
/// Carlo with the default sample budget.
pub fn jacobian_power_integral(
    map: &RadialStretch,
    ball: &Ball,
    t: f64,
) -> Result<JacobianIntegral, MapError> {
    jacobian_power_integral_with(map, ball, t, &MonteCarloConfig::default(), Execution::default())
}

pub fn jacobian_power_integral_with(
    map: &RadialStretch,
    ball: &Ball,
    t: f64,
    mc: &MonteCarloConfig,
    exec: Execution,
) -> Result<JacobianIntegral, MapError> {
    if ball.dim() != map.dim() {
        return Err(MapError::PointDimension { expected: map.dim(), got: ball.dim() });
    }
    let exponent = map.power_integral_exponent(t);
    if map.k != 1.0 && exponent <= 0.0 && ball.contains_origin() {
        return Ok(JacobianIntegral::Divergent { exponent });
    }
    if ball.is_origin_centered() {
        let n = map.n;
        let value = if map.k == 1.0 {
            ball.volume()
        } else {
            map.k.powf(t) * unit_sphere_area(n) * ball.radius.powf(exponent) / exponent
        };
        return Ok(JacobianIntegral::Exact { value });
    }
    Ok(monte_carlo_jacobian(map, ball, t, mc, exec))
}

const MC_BATCH: usize = 4096;

fn monte_carlo_jacobian(
    map: &RadialStretch,
    ball: &Ball,
    t: f64,
    mc: &MonteCarloConfig,
    exec: Execution,
) -> JacobianIntegral {
    let n = map.n;
    let batches = mc.samples.div_ceil(MC_BATCH).max(1);
    let sums = exec.map(batches, |batch| {
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        rng.set_stream(batch as u64);
        let count = MC_BATCH.min(mc.samples.saturating_sub(batch * MC_BATCH)).max(1);
        let (mut s1, mut s2) = (0.0, 0.0);
        let mut point = vec![0.0; n];
        for _ in 0..count {
            uniform_in_ball(&mut rng, ball, &mut point);
            // the origin has probability zero
            let j = map.jacobian_at_radius(norm(&point)).unwrap_or(f64::INFINITY).powf(t);
            s1 += j;
            s2 += j * j;
        }
        (s1, s2, count)
    });
    let (mut s1, mut s2, mut count) = (0.0, 0.0, 0usize);
    for (a, b, c) in sums {
        s1 += a;
        s2 += b;
        count += c;
    }
    let m = count as f64;
    let mean = s1 / m;
    let var = (s2 / m - mean * mean).max(0.0);
    let vol = ball.volume();
    JacobianIntegral::Estimate {
        value: vol * mean,
        std_error: vol * (var / m).sqrt(),
        samples: count,
        seed: mc.seed,
    }
}

fn uniform_in_ball<R: Rng>(rng: &mut R, ball: &Ball, out: &mut [f64]) {
    let n = out.len();
    let mut len2 = 0.0;
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
        len2 += *v * *v;
    }
    let u: f64 = rng.random();
    let scale = ball.radius * u.powf(1.0 / n as f64) / len2.sqrt();
    for (v, c) in out.iter_mut().zip(&ball.center) {
        *v = c + *v * scale;
    }
}

/// The same integral over `B_R(0)` by graded radial quadrature, an
/// independent route to the closed form.
pub fn jacobian_power_integral_quadrature(
    map: &RadialStretch,
    radius: f64,
    t: f64,
    opts: &AdaptiveOptions,
) -> Result<RadialIntegral, MapError> {
    let n = map.n;
    let omega = unit_sphere_area(n);
    let k = map.k;
    let g = move |r: f64| omega * (k * r.powf(n as f64 * (k - 1.0))).powf(t) * r.powi(n as i32 - 1);
    Ok(radial_integral(&g, radius, &[], opts)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChangeOfVariables {
    /// `∫_B F(|φ(x)|) J_φ(x) dx`
    pub lhs: f64,
    /// `∫_{φ(B)} F(|w|) dw`
    pub rhs: f64,
    /// `|lhs − rhs| / max(|rhs|, 1)`
    pub residual: f64,
}

/// Checks `∫_B f(φ(x)) J_φ(x) dx = ∫_{φ(B)} f(w) dw` by radial quadrature of
/// both sides; `φ_k(B_R) = B_{R^k}`.
pub fn change_of_variables_check(
    map: &RadialStretch,
    profile: &RadialProfile,
    ball: &Ball,
) -> Result<ChangeOfVariables, MapError> {
    if !ball.is_origin_centered() {
        return Err(MapError::OffCentre);
    }
    if ball.dim() != map.dim() {
        return Err(MapError::PointDimension { expected: map.dim(), got: ball.dim() });
    }
    let n = map.n;
    let k = map.k;
    let omega = unit_sphere_area(n);
    let opts = AdaptiveOptions { rel_tol: 1e-12, max_intervals: 2000, ..Default::default() };
    let kinks = profile.kinks();

    let lhs_integrand = |r: f64| {
        omega
            * profile.value(r.powf(k))
            * k
            * r.powf(n as f64 * (k - 1.0))
            * r.powi(n as i32 - 1)
    };
    let lhs_breaks: Vec<f64> = kinks.iter().map(|b| b.powf(1.0 / k)).collect();
    let lhs = radial_integral(&lhs_integrand, ball.radius, &lhs_breaks, &opts)?;

    let rhs_integrand = |u: f64| omega * profile.value(u) * u.powi(n as i32 - 1);
    let rhs = radial_integral(&rhs_integrand, ball.radius.powf(k), &kinks, &opts)?;

    match (lhs.value(), rhs.value()) {
        (Some(l), Some(r)) => Ok(ChangeOfVariables {
            lhs: l,
            rhs: r,
            residual: (l - r).abs() / r.abs().max(1.0),
        }),
        _ => Err(MapError::Quadrature(QuadratureError::NoConvergence {
            a: 0.0,
            b: ball.radius,
            value: f64::INFINITY,
            error: f64::INFINITY,
        })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn stretch(k: f64, n: usize) -> RadialStretch {
        RadialStretch::new(k, n).unwrap()
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((unit_ball_volume(5) - 8.0 * PI * PI / 15.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_examples() {
        let m = stretch(2.0, 2);
        assert_eq!(m.evaluate(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(m.evaluate(&[0.5, 0.0]).unwrap(), vec![0.25, 0.0]);
        assert_eq!(stretch(0.3, 3).evaluate(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert!(m.evaluate(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn jacobian_examples() {
        assert_eq!(stretch(1.0, 3).jacobian(&[0.2, 0.1, 0.7]).unwrap(), 1.0);
        assert!((stretch(2.0, 2).jacobian(&[0.5, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((stretch(2.0, 2).jacobian(&[0.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(stretch(0.5, 2).jacobian(&[0.0, 0.0]), Err(MapError::Singular(_))));
        assert_eq!(stretch(2.0, 2).jacobian(&[0.0, 0.0]).unwrap(), 0.0);
    }

    /// `Dφ_k(x) = |x|^{k−1}((k−1) x xᵀ/|x|² + I)`.
    fn derivative_matrix(k: f64, x: &[f64]) -> Vec<Vec<f64>> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let scale = r2.sqrt().powf(k - 1.0);
        (0..x.len())
            .map(|i| {
                (0..x.len())
                    .map(|j| {
                        let id = if i == j { 1.0 } else { 0.0 };
                        scale * ((k - 1.0) * x[i] * x[j] / r2 + id)
                    })
                    .collect()
            })
            .collect()
    }

    fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
        let n = m.len();
        let mut det = 1.0;
        for c in 0..n {
            let piv = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
            if m[piv][c] == 0.0 {
                return 0.0;
            }
            if piv != c {
                m.swap(piv, c);
                det = -det;
            }
            det *= m[c][c];
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for j in c..n {
                    m[r][j] -= f * m[c][j];
                }
            }
        }
        det
    }

    fn operator_norm(m: &[Vec<f64>]) -> f64 {
        let n = m.len();
        let mut v = vec![1.0; n];
        let mut est = 0.0;
        for _ in 0..500 {
            let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i][j] * v[j]).sum()).collect();
            let u: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[j][i] * w[j]).sum()).collect();
            let len = norm(&u);
            est = len.sqrt();
            v = u.iter().map(|x| x / len).collect();
        }
        est
    }

    #[test]
    fn jacobian_matches_determinant_of_derivative() {
        let x = [0.3, -0.4, 0.2];
        for k in [0.4, 1.0, 1.7, 3.0] {
            let det = determinant(derivative_matrix(k, &x));
            let jac = stretch(k, 3).jacobian(&x).unwrap();
            assert!((det - jac).abs() < 1e-12 * jac, "k={k}: {det} vs {jac}");
        }
    }

    #[test]
    fn distortion_dominates_pointwise_ratio() {
        for n in [2usize, 3, 4] {
            let mut x = vec![0.0; n];
            x[0] = 0.6;
            x[n - 1] = -0.3;
            for k in [0.2, 0.5, 0.9, 1.0, 1.5, 3.0] {
                let m = stretch(k, n);
                let d = operator_norm(&derivative_matrix(k, &x));
                let ratio = d.powi(n as i32) / m.jacobian(&x).unwrap();
                assert!(m.distortion() >= ratio * (1.0 - 1e-9), "n={n} k={k}");
                assert!(m.distortion() >= 1.0);
                assert_eq!(m.distortion() == 1.0, k == 1.0);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        assert_eq!(stretch(1.0, 2).inverse().k(), 1.0);
        assert_eq!(stretch(2.0, 2).inverse().k(), 0.5);
        let m = stretch(3.0, 2);
        let y = m.evaluate(&[0.3, 0.4]).unwrap();
        let back = m.inverse().evaluate(&y).unwrap();
        assert!((back[0] - 0.3).abs() < 1e-12 && (back[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn power_integral_examples() {
        let unit = Ball::centered(2, 1.0).unwrap();
        let v = |k: f64, t: f64| jacobian_power_integral(&stretch(k, 2), &unit, t).unwrap();
        assert!((v(1.0, 3.7).value().unwrap() - PI).abs() < 1e-14);
        assert!((v(2.0, 1.0).value().unwrap() - PI).abs() < 1e-14);
        assert!((v(2.0, -0.5).value().unwrap() - PI * 2f64.sqrt()).abs() < 1e-13);
        assert!(v(2.0, -1.0).is_divergent());
        let b3 = Ball::centered(3, 2.0).unwrap();
        let vol = jacobian_power_integral(&stretch(1.0, 3), &b3, -2.0).unwrap();
        assert!((vol.value().unwrap() - 32.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn power_integral_off_centre_uses_monte_carlo() {
        let ball = Ball::new(vec![2.0, 0.0], 0.5).unwrap();
        let m = stretch(2.0, 2);
        let est = jacobian_power_integral(&m, &ball, 1.0).unwrap();
        let JacobianIntegral::Estimate { value, std_error, seed, .. } = est else {
            panic!("expected estimate");
        };
        assert_eq!(seed, MonteCarloConfig::default().seed);
        // ∫ 2|x|² over B_{1/2}((2,0)) = 2(|c|²|B| + (n/(n+2)) R²|B|)
        let vol = PI * 0.25;
        let exact = 2.0 * (4.0 * vol + 0.5 * 0.25 * vol);
        assert!((value - exact).abs() < 5.0 * std_error + 1e-9, "{value} vs {exact}");
        // an off-centre ball containing the origin still diverges
        let around = Ball::new(vec![0.1, 0.0], 0.5).unwrap();
        assert!(jacobian_power_integral(&m, &around, -1.5).unwrap().is_divergent());
    }

    #[test]
    fn monte_carlo_is_reproducible_across_execution_modes() {
        let ball = Ball::new(vec![1.0, 1.0, 0.0], 0.7).unwrap();
        let m = stretch(0.6, 3);
        let mc = MonteCarloConfig { samples: 20_000, seed: 7 };
        let a = jacobian_power_integral_with(&m, &ball, 1.2, &mc, Execution::Sequential).unwrap();
        let b = jacobian_power_integral_with(&m, &ball, 1.2, &mc, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let opts = AdaptiveOptions::default();
        for n in [2usize, 3] {
            for k in [0.5, 0.8, 1.5, 2.0, 3.0] {
                let m = stretch(k, n);
                for t in [-0.4, 0.5, 1.0, 1.5] {
                    let closed = jacobian_power_integral(&m, &Ball::centered(n, 1.3).unwrap(), t)
                        .unwrap();
                    let quad = jacobian_power_integral_quadrature(&m, 1.3, t, &opts).unwrap();
                    match closed.value() {
                        Some(v) => {
                            let q = quad.value().unwrap();
                            assert!((q - v).abs() <= 1e-8 * v, "n={n} k={k} t={t}: {q} vs {v}");
                        }
                        None => assert!(quad.is_divergent(), "n={n} k={k} t={t}"),
                    }
                }
            }
        }
    }

    #[test]
    fn change_of_variables_examples() {
        let unit = Ball::centered(2, 1.0).unwrap();
        let one = RadialProfile::constant(1.0);
        let cov = change_of_variables_check(&stretch(2.0, 2), &one, &unit).unwrap();
        assert!(cov.residual <= 1e-6);
        assert!((cov.lhs - PI).abs() < 1e-6);

        let f = RadialProfile::singular(0.3).unwrap();
        let cov = change_of_variables_check(&stretch(1.0, 2), &f, &Ball::centered(2, 0.7).unwrap())
            .unwrap();
        assert!(cov.residual <= 1e-12);

        let abs = RadialProfile::piecewise(vec![crate::profiles::PowerPiece {
            start: 0.0,
            end: None,
            coefficient: 1.0,
            exponent: 1.0,
        }])
        .unwrap();
        let cov = change_of_variables_check(&stretch(0.5, 2), &abs, &unit).unwrap();
        // ∫_{B_1} |w| dw = 2π/3
        assert!((cov.rhs - 2.0 * PI / 3.0).abs() < 1e-9);
        assert!(cov.residual <= 1e-6);

        let off = Ball::new(vec![0.5, 0.0], 1.0).unwrap();
        assert!(matches!(
            change_of_variables_check(&stretch(2.0, 2), &one, &off),
            Err(MapError::OffCentre)
        ));
    }
}
