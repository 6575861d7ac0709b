//! One-dimensional quadrature: fixed Gauss–Legendre rules, adaptive
//! Gauss–Kronrod (7/15), and radial integrals on `[0, R]` with a power-law
//! singularity at the origin.
//!
//! Radial integrals use a geometric mesh with ratio ½ from `R` down to
//! [`RADIAL_FLOOR`]; the remaining cell `[0, floor]` is closed analytically by
//! fitting the local power `g(r) ≈ C r^β` from two samples. A fitted `β ≤ −1`
//! is reported as divergence rather than summed into a finite number.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("adaptive quadrature on [{a}, {b}] did not converge (estimate {value}, error {error})")]
    NoConvergence { a: f64, b: f64, value: f64, error: f64 },
    #[error("integrand is not finite at r = {0}")]
    NonFinite(f64),
}

/// Smallest radius resolved by the graded radial mesh.
pub const RADIAL_FLOOR: f64 = 1e-12;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and `|K15 − G7|`.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions { abs_tol: 1e-300, rel_tol: 1e-10, max_intervals: 400 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss–Kronrod: bisect the interval with the largest
/// error estimate until the total error meets the tolerance.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> Result<Quadrature, QuadratureError> {
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, intervals: 0 });
    }
    let (v, e) = gauss_kronrod_15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut value = v;
    let mut error = e;
    loop {
        if !value.is_finite() {
            return Err(QuadratureError::NoConvergence { a, b, value, error });
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(Quadrature { value, error, intervals: parts.len() });
        }
        if parts.len() >= opts.max_intervals {
            return Err(QuadratureError::NoConvergence { a, b, value, error });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, v0, e0) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval exhausted at machine precision; accept what we have
            return Ok(Quadrature { value, error, intervals: parts.len() + 1 });
        }
        let (v1, e1) = gauss_kronrod_15(f, lo, mid);
        let (v2, e2) = gauss_kronrod_15(f, mid, hi);
        value += v1 + v2 - v0;
        error += e1 + e2 - e0;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
        // re-sum occasionally to shed accumulated cancellation error
        if parts.len() % 64 == 0 {
            value = parts.iter().map(|p| p.2).sum();
            error = parts.iter().map(|p| p.3).sum();
        }
    }
}

/// Fixed Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if order == 1 { x } else { p1 };
                let pm1 = if order == 1 { 1.0 } else { p0 };
                dp = n * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// `(x, w)` pairs mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Outcome of a radial integral over `[0, R]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialIntegral {
    /// Contributions of the dyadic cells `[R 2^{-j-1}, R 2^{-j}]`, `j = 0, 1, …`,
    /// each already including any interior breakpoints.
    pub cells: Vec<f64>,
    /// Analytic closure of `[0, floor]`; `None` when the fitted local power
    /// is not integrable.
    pub tail: Option<f64>,
    /// Fitted exponent `β` of `g(r) ≈ C r^β` at the floor.
    pub local_exponent: f64,
    pub error: f64,
}

impl RadialIntegral {
    pub fn is_divergent(&self) -> bool {
        self.tail.is_none()
    }

    /// Total value; `None` when divergent.
    pub fn value(&self) -> Option<f64> {
        self.tail.map(|t| self.cells.iter().sum::<f64>() + t)
    }

    /// `∫_{R 2^{-j}}^{R} g` for `j = 0..=cells.len()`.
    pub fn partials(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for c in &self.cells {
            acc += c;
            out.push(acc);
        }
        out
    }
}

/// `∫_0^R g(r) dr` for `g` with at most a power-law singularity at `r = 0`
/// and kinks at the given breakpoints.
pub fn radial_integral<F: Fn(f64) -> f64>(
    g: &F,
    radius: f64,
    breakpoints: &[f64],
    opts: &AdaptiveOptions,
) -> Result<RadialIntegral, QuadratureError> {
    let levels = (radius / RADIAL_FLOOR).log2().ceil().max(1.0) as usize;
    let floor = radius * 0.5f64.powi(levels as i32);
    let mut cells = Vec::with_capacity(levels);
    let mut error = 0.0;
    for j in 0..levels {
        let hi = radius * 0.5f64.powi(j as i32);
        let lo = 0.5 * hi;
        let mut edges = vec![lo];
        edges.extend(breakpoints.iter().copied().filter(|&b| b > lo && b < hi));
        edges.push(hi);
        edges.sort_by(f64::total_cmp);
        let mut cell = 0.0;
        for w in edges.windows(2) {
            let q = adaptive(g, w[0], w[1], opts)?;
            cell += q.value;
            error += q.error;
        }
        cells.push(cell);
    }
    let (tail, local_exponent) = power_tail(g, floor)?;
    Ok(RadialIntegral { cells, tail, local_exponent, error })
}

/// Local exponents this close to `−1` count as the logarithmic divergence
/// they approximate; rounding in `r^x` moves an exact `−1` by a few ulps.
const LOG_EXPONENT_TOL: f64 = 1e-9;

/// `∫_0^h g` assuming `g(r) = C r^β` on `(0, h]`.
pub fn power_tail<F: Fn(f64) -> f64>(g: &F, h: f64) -> Result<(Option<f64>, f64), QuadratureError> {
    let g1 = g(h);
    let g2 = g(0.5 * h);
    if !g1.is_finite() {
        return Err(QuadratureError::NonFinite(h));
    }
    if !g2.is_finite() {
        return Err(QuadratureError::NonFinite(0.5 * h));
    }
    if g1 == 0.0 && g2 == 0.0 {
        return Ok((Some(0.0), f64::INFINITY));
    }
    let beta = (g1.abs() / g2.abs()).log2();
    if !beta.is_finite() || beta <= -1.0 + LOG_EXPONENT_TOL {
        return Ok((None, beta));
    }
    Ok((Some(g1 * h / (beta + 1.0)), beta))
}
