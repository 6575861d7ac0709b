//! Radial test functions `F(|x|)`: the singular family `max(r^{-ρ} − 1, 0)`,
//! the flat family `max(1 − r^ρ, 0)`, and piecewise powers.
//!
//! Both families are closed under composition with a radial stretch, and
//! their Bessel-potential membership is known in closed form, which makes
//! them the reference against which the numerical estimators are judged.

use serde::{Deserialize, Serialize};

use crate::exponents::Exponent;
use crate::radial_maps::RadialStretch;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("profile exponent must be positive, got {0}")]
    Exponent(f64),
    #[error("invalid piecewise profile: {0}")]
    Pieces(String),
    #[error("profile is singular at r = {0}")]
    Singular(f64),
    #[error("radius must be nonnegative, got {0}")]
    Radius(f64),
    #[error("no analytic membership criterion for piecewise profiles")]
    Unsupported,
    #[error("membership criterion needs 0 ≤ s ≤ 1 and 1 < p < ∞ (s = {s}, p = {p})")]
    Range { s: String, p: String },
}

/// `coefficient · r^exponent` on `[start, end)`; `end = None` means unbounded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerPiece {
    pub start: f64,
    #[serde(default)]
    pub end: Option<f64>,
    pub coefficient: f64,
    pub exponent: f64,
}

impl PowerPiece {
    fn end_or_inf(&self) -> f64 {
        self.end.unwrap_or(f64::INFINITY)
    }

    fn contains(&self, r: f64) -> bool {
        r >= self.start && r < self.end_or_inf()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    SingularPower,
    FlatPower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialProfile {
    /// `max(r^{-ρ} − 1, 0)`
    SingularPower { rho: f64 },
    /// `max(1 − r^ρ, 0)`
    FlatPower { rho: f64 },
    Piecewise { pieces: Vec<PowerPiece> },
}

/// Analytic membership in `H^{s,p}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    Member,
    NonMember,
    Boundary,
}

impl RadialProfile {
    pub fn singular(rho: f64) -> Result<Self, ProfileError> {
        check_rho(rho)?;
        Ok(RadialProfile::SingularPower { rho })
    }

    pub fn flat(rho: f64) -> Result<Self, ProfileError> {
        check_rho(rho)?;
        Ok(RadialProfile::FlatPower { rho })
    }

    pub fn of_kind(kind: ProfileKind, rho: f64) -> Result<Self, ProfileError> {
        match kind {
            ProfileKind::SingularPower => RadialProfile::singular(rho),
            ProfileKind::FlatPower => RadialProfile::flat(rho),
        }
    }

    pub fn piecewise(mut pieces: Vec<PowerPiece>) -> Result<Self, ProfileError> {
        pieces.sort_by(|a, b| a.start.total_cmp(&b.start));
        for p in &pieces {
            if !(p.start >= 0.0 && p.start < p.end_or_inf()) {
                return Err(ProfileError::Pieces(format!(
                    "interval [{}, {:?}) is empty or negative",
                    p.start, p.end
                )));
            }
            if !p.coefficient.is_finite() || !p.exponent.is_finite() {
                return Err(ProfileError::Pieces("non-finite coefficient or exponent".into()));
            }
        }
        for w in pieces.windows(2) {
            if w[1].start < w[0].end_or_inf() {
                return Err(ProfileError::Pieces("pieces overlap".into()));
            }
        }
        Ok(RadialProfile::Piecewise { pieces })
    }

    pub fn constant(c: f64) -> Self {
        RadialProfile::Piecewise {
            pieces: vec![PowerPiece { start: 0.0, end: None, coefficient: c, exponent: 0.0 }],
        }
    }

    pub fn kind(&self) -> Option<ProfileKind> {
        match self {
            RadialProfile::SingularPower { .. } => Some(ProfileKind::SingularPower),
            RadialProfile::FlatPower { .. } => Some(ProfileKind::FlatPower),
            RadialProfile::Piecewise { .. } => None,
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match self {
            RadialProfile::SingularPower { rho } | RadialProfile::FlatPower { rho } => Some(*rho),
            RadialProfile::Piecewise { .. } => None,
        }
    }

    pub fn evaluate(&self, r: f64) -> Result<f64, ProfileError> {
        if !(r >= 0.0) {
            return Err(ProfileError::Radius(r));
        }
        if r == 0.0 {
            match self {
                RadialProfile::SingularPower { .. } => return Err(ProfileError::Singular(0.0)),
                RadialProfile::Piecewise { pieces } => {
                    if let Some(p) = pieces.iter().find(|p| p.contains(0.0)) {
                        if p.exponent < 0.0 && p.coefficient != 0.0 {
                            return Err(ProfileError::Singular(0.0));
                        }
                    }
                }
                RadialProfile::FlatPower { .. } => {}
            }
        }
        Ok(self.value(r))
    }

    /// `F(r)` without argument checks; `r > 0` expected.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match self {
            RadialProfile::SingularPower { rho } => {
                if r < 1.0 {
                    r.powf(-rho) - 1.0
                } else {
                    0.0
                }
            }
            RadialProfile::FlatPower { rho } => {
                if r < 1.0 {
                    1.0 - r.powf(*rho)
                } else {
                    0.0
                }
            }
            RadialProfile::Piecewise { pieces } => pieces
                .iter()
                .find(|p| p.contains(r))
                .map_or(0.0, |p| power_term(p.coefficient, r, p.exponent)),
        }
    }

    /// `F'(r)`, defined away from kinks.
    #[inline]
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            RadialProfile::SingularPower { rho } => {
                if r < 1.0 {
                    -rho * r.powf(-rho - 1.0)
                } else {
                    0.0
                }
            }
            RadialProfile::FlatPower { rho } => {
                if r < 1.0 {
                    -rho * r.powf(rho - 1.0)
                } else {
                    0.0
                }
            }
            RadialProfile::Piecewise { pieces } => pieces
                .iter()
                .find(|p| p.contains(r))
                .map_or(0.0, |p| power_term(p.coefficient * p.exponent, r, p.exponent - 1.0)),
        }
    }

    /// Radii where `F` or `F'` may jump.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            RadialProfile::SingularPower { .. } | RadialProfile::FlatPower { .. } => vec![1.0],
            RadialProfile::Piecewise { pieces } => {
                let mut out: Vec<f64> = pieces
                    .iter()
                    .flat_map(|p| [Some(p.start), p.end])
                    .flatten()
                    .filter(|&x| x > 0.0 && x.is_finite())
                    .collect();
                out.sort_by(f64::total_cmp);
                out.dedup();
                out
            }
        }
    }

    /// Radius beyond which `F ≡ 0`, if any.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            RadialProfile::SingularPower { .. } | RadialProfile::FlatPower { .. } => Some(1.0),
            RadialProfile::Piecewise { pieces } => pieces
                .iter()
                .filter(|p| p.coefficient != 0.0)
                .map(|p| p.end)
                .try_fold(0.0f64, |acc, e| e.map(|e| acc.max(e))),
        }
    }

    /// `F(|φ_k(x)|) = F(|x|^k)`, again a profile of the same kind.
    pub fn compose_with_stretch(&self, map: &RadialStretch) -> RadialProfile {
        let k = map.k();
        match self {
            RadialProfile::SingularPower { rho } => RadialProfile::SingularPower { rho: k * rho },
            RadialProfile::FlatPower { rho } => RadialProfile::FlatPower { rho: k * rho },
            RadialProfile::Piecewise { pieces } => RadialProfile::Piecewise {
                pieces: pieces
                    .iter()
                    .map(|p| PowerPiece {
                        start: p.start.powf(1.0 / k),
                        end: p.end.map(|e| e.powf(1.0 / k)),
                        coefficient: p.coefficient,
                        exponent: p.exponent * k,
                    })
                    .collect(),
            },
        }
    }

    /// Analytic classification in `H^{s,p}(ℝⁿ)` for the singular and flat
    /// families, with `ρ` read as the exact value of its `f64`.
    pub fn membership_oracle(
        &self,
        s: &Real,
        p: &Exponent,
        n: u32,
    ) -> Result<Membership, ProfileError> {
        let (kind, rho) = match self {
            RadialProfile::SingularPower { rho } => (ProfileKind::SingularPower, *rho),
            RadialProfile::FlatPower { rho } => (ProfileKind::FlatPower, *rho),
            RadialProfile::Piecewise { .. } => return Err(ProfileError::Unsupported),
        };
        let rho = Real::exact_from_f64(rho).ok_or(ProfileError::Exponent(rho))?;
        classify_power(kind, &rho, s, p, n)
    }
}

#[inline]
fn power_term(c: f64, r: f64, e: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else if e == 0.0 {
        c
    } else {
        c * r.powf(e)
    }
}

fn check_rho(rho: f64) -> Result<(), ProfileError> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(ProfileError::Exponent(rho))
    }
}

/// The critical exponent of the criterion: `n/p − s` for the singular family
/// (members lie below it) and `s − n/p` for the flat family (members lie
/// above it).
pub fn membership_threshold(
    kind: ProfileKind,
    s: &Real,
    p: &Exponent,
    n: u32,
) -> Result<Real, ProfileError> {
    if s.is_negative() || *s > Real::one() || p.is_infinite() || *p.inv() >= Real::one() {
        return Err(ProfileError::Range { s: s.to_string(), p: p.to_string() });
    }
    let n_over_p = Real::from(n as i64) * p.inv();
    Ok(match kind {
        ProfileKind::SingularPower => n_over_p - s,
        ProfileKind::FlatPower => s - &n_over_p,
    })
}

/// `f_ρ ∈ H^{s,p}` iff `0 < ρ < n/p − s`; `g_ρ ∈ H^{s,p}` iff `s − n/p < ρ`.
pub fn classify_power(
    kind: ProfileKind,
    rho: &Real,
    s: &Real,
    p: &Exponent,
    n: u32,
) -> Result<Membership, ProfileError> {
    if !rho.is_positive() {
        return Err(ProfileError::Exponent(rho.to_f64()));
    }
    let threshold = membership_threshold(kind, s, p, n)?;
    let ord = rho.partial_cmp(&threshold).expect("comparable");
    use std::cmp::Ordering::*;
    Ok(match (kind, ord) {
        (_, Equal) => Membership::Boundary,
        (ProfileKind::SingularPower, Less) | (ProfileKind::FlatPower, Greater) => Membership::Member,
        _ => Membership::NonMember,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Real {
        Real::ratio(n, d)
    }

    #[test]
    fn evaluate_examples() {
        let f = RadialProfile::singular(0.5).unwrap();
        assert_eq!(f.evaluate(1.0).unwrap(), 0.0);
        assert!((f.evaluate(0.25).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(f.evaluate(0.0), Err(ProfileError::Singular(_))));
        let g = RadialProfile::flat(2.0).unwrap();
        assert!((g.evaluate(0.5).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(g.evaluate(0.0).unwrap(), 1.0);
        assert_eq!(g.evaluate(3.0).unwrap(), 0.0);
        assert!(g.evaluate(-1.0).is_err());
    }

    #[test]
    fn rejects_nonpositive_rho() {
        assert!(RadialProfile::singular(0.0).is_err());
        assert!(RadialProfile::flat(-1.0).is_err());
    }

    #[test]
    fn piecewise_validation_and_evaluation() {
        let prof = RadialProfile::piecewise(vec![
            PowerPiece { start: 0.5, end: Some(1.0), coefficient: 2.0, exponent: 1.0 },
            PowerPiece { start: 0.0, end: Some(0.5), coefficient: 1.0, exponent: 0.0 },
        ])
        .unwrap();
        assert_eq!(prof.value(0.25), 1.0);
        assert_eq!(prof.value(0.75), 1.5);
        assert_eq!(prof.value(2.0), 0.0);
        assert_eq!(prof.kinks(), vec![0.5, 1.0]);
        assert_eq!(prof.support_radius(), Some(1.0));
        let overlap = RadialProfile::piecewise(vec![
            PowerPiece { start: 0.0, end: Some(0.6), coefficient: 1.0, exponent: 0.0 },
            PowerPiece { start: 0.5, end: Some(1.0), coefficient: 1.0, exponent: 0.0 },
        ]);
        assert!(overlap.is_err());
        assert_eq!(RadialProfile::constant(3.0).support_radius(), None);
    }

    #[test]
    fn compose_examples() {
        let f = RadialProfile::singular(0.5).unwrap();
        assert_eq!(f.compose_with_stretch(&RadialStretch::new(1.0, 2).unwrap()), f);
        assert_eq!(
            f.compose_with_stretch(&RadialStretch::new(2.0, 2).unwrap()),
            RadialProfile::singular(1.0).unwrap()
        );
        let g = RadialProfile::flat(0.5).unwrap();
        assert_eq!(
            g.compose_with_stretch(&RadialStretch::new(1.5, 2).unwrap()),
            RadialProfile::flat(0.75).unwrap()
        );
    }

    #[test]
    fn compose_matches_pointwise_substitution() {
        let grid: Vec<f64> = (1..200).map(|i| i as f64 / 150.0).collect();
        let profiles = [
            RadialProfile::singular(0.3).unwrap(),
            RadialProfile::flat(1.7).unwrap(),
            RadialProfile::piecewise(vec![
                PowerPiece { start: 0.0, end: Some(0.4), coefficient: 1.0, exponent: -0.2 },
                PowerPiece { start: 0.4, end: Some(0.9), coefficient: -2.0, exponent: 1.5 },
            ])
            .unwrap(),
        ];
        for k in [0.4, 1.0, 2.5] {
            let map = RadialStretch::new(k, 3).unwrap();
            for prof in &profiles {
                let composed = prof.compose_with_stretch(&map);
                for &rad in &grid {
                    let a = composed.value(rad);
                    let b = prof.value(rad.powf(k));
                    assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0), "k={k} r={rad}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let p2 = Exponent::int(2);
        let half = r(1, 2);
        let m = |prof: RadialProfile, s: &Real, p: &Exponent| prof.membership_oracle(s, p, 2).unwrap();
        assert_eq!(m(RadialProfile::singular(0.25).unwrap(), &half, &p2), Membership::Member);
        assert_eq!(m(RadialProfile::singular(0.75).unwrap(), &half, &p2), Membership::NonMember);
        assert_eq!(m(RadialProfile::singular(0.5).unwrap(), &half, &p2), Membership::Boundary);
        assert_eq!(
            m(RadialProfile::flat(1.0).unwrap(), &Real::one(), &Exponent::int(8)),
            Membership::Member
        );
        assert_eq!(
            m(RadialProfile::flat(0.75).unwrap(), &Real::one(), &Exponent::int(8)),
            Membership::Boundary
        );
        assert!(RadialProfile::constant(1.0).membership_oracle(&half, &p2, 2).is_err());
        assert!(RadialProfile::singular(0.2)
            .unwrap()
            .membership_oracle(&half, &Exponent::infinity(), 2)
            .is_err());
    }

    #[test]
    fn oracle_threshold_is_exact() {
        // threshold 2/3 − 1/3 = 1/3 has no exact f64; ρ = 1/3 as f64 is not the boundary
        let t = membership_threshold(ProfileKind::SingularPower, &r(1, 3), &Exponent::int(3), 2)
            .unwrap();
        assert_eq!(t, r(1, 3));
        let at = classify_power(ProfileKind::SingularPower, &r(1, 3), &r(1, 3), &Exponent::int(3), 2)
            .unwrap();
        assert_eq!(at, Membership::Boundary);
    }
}
