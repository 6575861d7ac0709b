//! The `(1/p, s)` diagram: critical line `sp = n`, one arrow per source
//! point to its target `(1/q, s)`, and optionally the interpolation endpoints
//! with their own arrows. Every coordinate is taken from `qcc-core`.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::json;

use qcc_core::exponents::{interpolation_indices, target_arrow, Arrow, Outcome, Rejection};
use qcc_core::{Exponent, ExponentPoint, QcRegularity, Real};

use crate::output::{float, SVG_SIZE};
use crate::runspec::RunSpec;
use crate::{CliError, Report, Status, Table};

const MARGIN: f64 = 60.0;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcePoint {
    pub s: Real,
    pub p: Exponent,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramParams {
    pub n: u32,
    pub a: Real,
    pub b: Real,
    pub points: Vec<SourcePoint>,
    #[serde(default)]
    pub interpolation: bool,
    #[serde(default)]
    pub epsilon0: Option<Real>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrowKind {
    Target,
    Lebesgue,
    Sobolev,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelledArrow {
    pub label: String,
    pub kind: ArrowKind,
    #[serde(flatten)]
    pub arrow: Arrow,
    pub proportional: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexPoint {
    pub label: String,
    pub point: ExponentPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Skipped {
    pub label: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagram {
    pub n: u32,
    pub critical_line: [ExponentPoint; 2],
    pub arrows: Vec<LabelledArrow>,
    pub index_points: Vec<IndexPoint>,
    pub rejected: Vec<(String, Rejection)>,
    pub skipped: Vec<Skipped>,
}

impl Diagram {
    pub fn all_proportional(&self) -> bool {
        self.arrows.iter().all(|a| a.proportional)
    }
}

pub fn build(params: &DiagramParams) -> Result<Diagram, CliError> {
    if params.points.is_empty() {
        return Err(CliError::invalid("points is empty"));
    }
    let reg = QcRegularity::new(params.n, params.a.clone(), params.b.clone())?;
    let critical_line = [
        ExponentPoint::new(Real::zero(), Real::zero())?,
        ExponentPoint::of(&Real::one(), &Exponent::int(params.n as i64))?,
    ];
    let mut d = Diagram {
        n: params.n,
        critical_line,
        arrows: Vec::new(),
        index_points: Vec::new(),
        rejected: Vec::new(),
        skipped: Vec::new(),
    };
    let labelled = |label: String, kind, arrow: Arrow| LabelledArrow {
        label,
        kind,
        proportional: arrow.is_proportional(),
        arrow,
    };
    for (i, pt) in params.points.iter().enumerate() {
        let label = format!("P{}", i + 1);
        match target_arrow(&pt.s, &pt.p, &reg)? {
            Outcome::Accepted(a) => d.arrows.push(labelled(label.clone(), ArrowKind::Target, a)),
            Outcome::Rejected(r) => {
                d.rejected.push((label.clone(), r));
                continue;
            }
        }
        if !params.interpolation {
            continue;
        }
        let ix = match interpolation_indices(&pt.s, &pt.p, &reg, params.epsilon0.clone()) {
            Ok(ix) => ix,
            Err(e) => {
                d.skipped.push(Skipped { label, reason: e.to_string() });
                continue;
            }
        };
        let [lebesgue, sobolev] = ix.arrows(&reg)?;
        for (name, point) in [
            ("p0", &lebesgue.from),
            ("q0", &lebesgue.to),
            ("p1", &sobolev.from),
            ("q1", &sobolev.to),
        ] {
            d.index_points.push(IndexPoint { label: format!("{label}.{name}"), point: point.clone() });
        }
        d.arrows.push(labelled(format!("{label}.0"), ArrowKind::Lebesgue, lebesgue));
        d.arrows.push(labelled(format!("{label}.1"), ArrowKind::Sobolev, sobolev));
    }
    Ok(d)
}

pub fn table(d: &Diagram) -> Table {
    let mut t = Table::new(&[
        "label", "kind", "regime", "from_inv_p", "from_s", "to_inv_p", "to_s", "distance", "c",
        "gap", "proportional", "from_inv_p_float", "to_inv_p_float",
    ]);
    for la in &d.arrows {
        let a = &la.arrow;
        t.push(vec![
            la.label.clone(),
            serde_json::to_value(la.kind).expect("unit").as_str().expect("str").into(),
            a.regime.to_string(),
            a.from.inv_p.to_string(),
            a.from.s.to_string(),
            a.to.inv_p.to_string(),
            a.to.s.to_string(),
            a.distance.to_string(),
            a.c.to_string(),
            a.gap.to_string(),
            la.proportional.to_string(),
            float(a.from.inv_p.to_f64()),
            float(a.to.inv_p.to_f64()),
        ]);
    }
    t
}

fn x(inv_p: &Real) -> f64 {
    MARGIN + (SVG_SIZE - 2.0 * MARGIN) * inv_p.to_f64()
}

fn y(s: &Real) -> f64 {
    MARGIN + (SVG_SIZE - 2.0 * MARGIN) * (1.0 - s.to_f64())
}

/// SVG body on the fixed viewport; the unit square maps to
/// `[MARGIN, SIZE − MARGIN]²` with `s` increasing upwards.
pub fn svg(d: &Diagram) -> String {
    let lo = MARGIN;
    let hi = SVG_SIZE - MARGIN;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(
        w,
        "<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" \
         markerHeight=\"8\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\"/></marker></defs>"
    );
    let _ = writeln!(
        w,
        "<rect x=\"{lo}\" y=\"{lo}\" width=\"{0}\" height=\"{0}\" fill=\"none\" stroke=\"black\"/>",
        hi - lo
    );
    for i in 0..=4 {
        let v = Real::ratio(i, 4);
        let (px, py) = (x(&v), y(&v));
        let _ = writeln!(
            w,
            "<text x=\"{px:.3}\" y=\"{:.3}\" font-size=\"12\" text-anchor=\"middle\">{v}</text>",
            hi + 18.0
        );
        let _ = writeln!(
            w,
            "<text x=\"{:.3}\" y=\"{py:.3}\" font-size=\"12\" text-anchor=\"end\">{v}</text>",
            lo - 8.0
        );
    }
    let _ = writeln!(
        w,
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"14\" text-anchor=\"middle\">1/p</text>",
        SVG_SIZE / 2.0,
        hi + 40.0
    );
    let _ = writeln!(w, "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"14\">s</text>", lo - 40.0, SVG_SIZE / 2.0);
    let [c0, c1] = &d.critical_line;
    let _ = writeln!(
        w,
        "<line class=\"critical\" x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"grey\" \
         stroke-dasharray=\"6 4\"/>",
        x(&c0.inv_p),
        y(&c0.s),
        x(&c1.inv_p),
        y(&c1.s)
    );
    let _ = writeln!(
        w,
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" fill=\"grey\">sp = {}</text>",
        x(&c1.inv_p) + 6.0,
        y(&c1.s) + 14.0,
        d.n
    );
    for la in &d.arrows {
        let a = &la.arrow;
        let colour = match la.kind {
            ArrowKind::Target => "black",
            ArrowKind::Lebesgue | ArrowKind::Sobolev => "steelblue",
        };
        let (x1, y1, x2, y2) = (x(&a.from.inv_p), y(&a.from.s), x(&a.to.inv_p), y(&a.to.s));
        let _ = writeln!(w, "<circle cx=\"{x1:.3}\" cy=\"{y1:.3}\" r=\"3\" fill=\"{colour}\"/>");
        if a.gap.is_zero() {
            let _ = writeln!(w, "<!-- {}: zero-length arrow -->", la.label);
        } else {
            let _ = writeln!(
                w,
                "<line class=\"arrow\" x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" \
                 stroke=\"{colour}\" marker-end=\"url(#head)\"/>"
            );
        }
        let _ = writeln!(
            w,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\">{} gap {}</text>",
            x1,
            y1 - 8.0,
            la.label,
            a.gap
        );
    }
    for ip in &d.index_points {
        let (px, py) = (x(&ip.point.inv_p), y(&ip.point.s));
        let _ = writeln!(
            w,
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"6\" height=\"6\" fill=\"steelblue\"/>",
            px - 3.0,
            py - 3.0
        );
        let _ = writeln!(
            w,
            "<text x=\"{px:.3}\" y=\"{:.3}\" font-size=\"10\" fill=\"steelblue\">{} = {}</text>",
            py + 14.0,
            ip.label,
            ip.point.inv_p
        );
    }
    out
}

pub fn command(spec: &RunSpec) -> Result<Report, CliError> {
    let params: DiagramParams = spec.params()?;
    let d = build(&params)?;
    let status = if !d.all_proportional() {
        Status::Failed
    } else if !d.rejected.is_empty() {
        Status::Rejected
    } else {
        Status::Ok
    };
    Ok(Report { status, table: Some(table(&d)), svg: Some(svg(&d)), result: json!(d) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Real {
        Real::ratio(n, d)
    }

    fn params(points: Vec<(Real, Exponent)>, interpolation: bool) -> DiagramParams {
        DiagramParams {
            n: 2,
            a: r(2, 1),
            b: r(1, 1),
            points: points.into_iter().map(|(s, p)| SourcePoint { s, p }).collect(),
            interpolation,
            epsilon0: None,
        }
    }

    #[test]
    fn index_layout_for_the_subcritical_example() {
        let d = build(&params(vec![(r(1, 2), Exponent::int(2))], true)).unwrap();
        let inv: Vec<Real> = d.index_points.iter().map(|p| p.point.inv_p.clone()).collect();
        assert_eq!(inv, vec![r(1, 3), r(2, 3), r(2, 3), r(5, 6)]);
        assert!(d.all_proportional());
        assert_eq!(d.arrows.len(), 3);
    }

    #[test]
    fn critical_point_has_zero_length_arrow() {
        let d = build(&params(vec![(r(1, 1), Exponent::int(2))], false)).unwrap();
        assert!(d.arrows[0].arrow.gap.is_zero());
        assert!(svg(&d).contains("zero-length"));
    }

    #[test]
    fn svg_maps_the_unit_square() {
        let d = build(&params(vec![(r(1, 1), Exponent::ratio(3, 2))], false)).unwrap();
        let body = svg(&d);
        // source (2/3, 1) sits on the top edge
        assert!(body.contains(&format!("cy=\"{:.3}\"", MARGIN)));
        assert!(body.contains("class=\"critical\""));
    }
}
