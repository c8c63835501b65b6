//! Report serialization: CSV rows, nested JSON, plot data and SVG plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use specmult_core::estimate::ConditionReport;
use specmult_core::stats::LineFit;

use crate::config::ScenarioConfig;
use crate::error::LabError;
use crate::ops::RunOutput;

pub const CSV_SCHEMA: &str = "specmult-csv/1";
pub const JSON_SCHEMA: &str = "specmult-json/1";

pub const CSV_COLUMNS: [&str; 17] = [
    "condition",
    "model",
    "p",
    "s",
    "q",
    "kappa",
    "ball_center",
    "r",
    "scale",
    "F_id",
    "lhs",
    "rhs",
    "ratio",
    "bracket_width",
    "flagged",
    "aux",
    "defect",
];

/// Shortest round-trip decimal; `inf`, `-inf`, `nan` for the rest.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        x.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn csv_bytes(out: &RunOutput) -> Result<Vec<u8>, LabError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| LabError::Io(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for sec in &out.sections {
        let r = &sec.report;
        let pr = &r.params;
        for rec in &r.records {
            let (aux, defect) = if sec.aux_is_defect { (None, rec.aux) } else { (rec.aux, None) };
            w.write_record([
                r.condition.clone(),
                r.model.clone(),
                num(pr.p),
                opt(pr.s),
                opt(pr.q),
                opt(pr.kappa),
                rec.ball_center.map(|c| c.to_string()).unwrap_or_default(),
                opt(rec.r),
                num(rec.scale),
                rec.f_id.clone(),
                num(rec.lhs),
                num(rec.rhs),
                num(rec.ratio),
                num(rec.bracket_width),
                u8::from(rec.flagged).to_string(),
                opt(aux),
                opt(defect),
            ])
            .map_err(io)?;
        }
    }
    w.into_inner().map_err(|e| LabError::Io(e.to_string()))
}

/// JSON number, or a string for values JSON cannot hold.
fn jnum(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(num(x))
    }
}

fn jopt(x: Option<f64>) -> Value {
    x.map(jnum).unwrap_or(Value::Null)
}

fn trend_json(t: &Option<LineFit>, bounded: bool) -> Value {
    match t {
        Some(t) => json!({
            "slope": jnum(t.slope),
            "intercept": jnum(t.intercept),
            "stderr": jnum(t.stderr),
            "points": t.points,
            "bounded": bounded,
        }),
        None => Value::Null,
    }
}

fn report_json(r: &ConditionReport, aux_is_defect: bool) -> Value {
    let records: Vec<Value> = r
        .records
        .iter()
        .map(|rec| {
            json!({
                "ball_center": rec.ball_center,
                "r": jopt(rec.r),
                "scale": jnum(rec.scale),
                "F_id": rec.f_id,
                "lhs": jnum(rec.lhs),
                "rhs": jnum(rec.rhs),
                "ratio": jnum(rec.ratio),
                "bracket_width": jnum(rec.bracket_width),
                "flagged": rec.flagged,
                if aux_is_defect { "defect" } else { "aux" }: jopt(rec.aux),
            })
        })
        .collect();
    json!({
        "condition": r.condition,
        "model": r.model,
        "params": {
            "p": jnum(r.params.p),
            "s": jopt(r.params.s),
            "q": jopt(r.params.q),
            "kappa": jopt(r.params.kappa),
        },
        "sup_ratio": jnum(r.sup_ratio),
        "trend": trend_json(&r.trend, r.bounded()),
        "flagged": r.flagged(),
        "skipped": r.skipped,
        "notes": r.notes,
        "records": records,
    })
}

pub fn json_value(cfg: &ScenarioConfig, seed: u64, out: &RunOutput) -> Value {
    let weak: Vec<Value> = out
        .weak
        .iter()
        .map(|w| {
            let per_f: Map<String, Value> = w.per_f_sup.iter().map(|(id, v)| (id.clone(), jnum(*v))).collect();
            json!({
                "model": w.model,
                "delta": jnum(w.delta),
                "p": jnum(w.p),
                "overall_sup": jnum(w.overall_sup),
                "uniformity_ratio": jnum(w.uniformity_ratio),
                "per_f_sup": per_f,
                "per_R_sup": w.per_r_sup.iter().map(|(r, v)| json!([jnum(*r), jnum(*v)])).collect::<Vec<_>>(),
                "notes": w.notes,
                "entries": w.entries.iter().map(|e| json!({
                    "R": jnum(e.r),
                    "F_id": e.f_id,
                    "sup": jnum(e.sup),
                    "alpha_values": e.alpha_values.iter().map(|(a, v)| json!([jnum(*a), jnum(*v)])).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let summary: Map<String, Value> = out.summary.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    json!({
        "schema": JSON_SCHEMA,
        "scenario": cfg.scenario.name,
        "operation": cfg.scenario.operation,
        "model": cfg.scenario.model,
        "seed": seed,
        "flagged": out.flagged(),
        "reports": out.sections.iter().map(|s| report_json(&s.report, s.aux_is_defect)).collect::<Vec<_>>(),
        "weak_type": weak,
        "summary": summary,
    })
}

/// Sup of the ratio per scale over unflagged records, ascending in scale.
pub fn per_scale_sup(r: &ConditionReport) -> Vec<(f64, f64)> {
    let mut by: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for rec in r.records.iter().filter(|r| !r.flagged && r.scale > 0.0 && r.ratio.is_finite()) {
        let e = by.entry(rec.scale.to_bits()).or_insert((rec.scale, rec.ratio));
        e.1 = e.1.max(rec.ratio);
    }
    let mut v: Vec<(f64, f64)> = by.into_values().collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// Two-column `scale sup_ratio` text with a commented header.
pub fn plot_data(r: &ConditionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# condition={} model={} p={} s={} q={}", r.condition, r.model, num(r.params.p), opt(r.params.s), opt(r.params.q));
    if let Some(t) = &r.trend {
        let _ = writeln!(s, "# slope={} stderr={} points={}", num(t.slope), num(t.stderr), t.points);
    }
    for (x, y) in per_scale_sup(r) {
        let _ = writeln!(s, "{} {}", num(x), num(y));
    }
    s
}

/// Static log-log line plot of the per-scale sup with the fitted trend.
pub fn svg_plot(r: &ConditionReport) -> Option<String> {
    let pts: Vec<(f64, f64)> = per_scale_sup(r).into_iter().filter(|&(_, y)| y > 0.0).map(|(x, y)| (x.log10(), y.log10())).collect();
    if pts.len() < 2 {
        return None;
    }
    let (w, h, m) = (480.0, 320.0, 48.0);
    let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = h - m,
        r = w - m
    );
    let line: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#, line.join(" "));
    for &(x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue"/>"#, sx(x), sy(y));
    }
    if let Some(t) = &r.trend {
        // the fit is in natural logs; log10 coordinates keep the slope
        let fy = |x: f64| t.slope * x + t.intercept / std::f64::consts::LN_10;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-dasharray="4 3"/>"#,
            sx(x0),
            sy(fy(x0)),
            sx(x1),
            sy(fy(x1))
        );
    }
    let title = format!(
        "{} on {} (p={}){}",
        r.condition,
        r.model,
        num(r.params.p),
        r.trend.map(|t| format!(", slope {:.3} ± {:.3}", t.slope, t.stderr)).unwrap_or_default()
    );
    let _ = writeln!(s, r#"<text x="{m}" y="24" font-family="sans-serif" font-size="13">{}</text>"#, escape(&title));
    let _ = writeln!(
        s,
        r#"<text x="{m}" y="{}" font-family="sans-serif" font-size="11">log10 scale [{:.2}, {:.2}]; log10 sup ratio [{:.2}, {:.2}]</text>"#,
        h - 14.0,
        x0,
        x1,
        y0,
        y1
    );
    s.push_str("</svg>\n");
    Some(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use specmult_core::estimate::{Record, ScanParams};

    fn rec(scale: f64, ratio: f64, flagged: bool) -> Record {
        Record {
            ball_center: Some(3),
            r: Some(0.5),
            scale,
            f_id: "bump".into(),
            lhs: ratio,
            rhs: 1.0,
            ratio,
            bracket_width: 0.0,
            aux: Some(1e-3),
            flagged,
        }
    }

    fn sample() -> ConditionReport {
        ConditionReport {
            condition: "ST".into(),
            model: "circle:64".into(),
            params: ScanParams { p: 1.0, s: Some(2.0), q: Some(f64::INFINITY), kappa: None },
            records: vec![rec(4.0, 1.0, false), rec(4.0, 2.0, false), rec(8.0, 3.0, false), rec(8.0, 9.0, true)],
            sup_ratio: 9.0,
            trend: None,
            skipped: 0,
            notes: vec![],
        }
    }

    #[test]
    fn per_scale_sup_skips_flagged() {
        assert_eq!(per_scale_sup(&sample()), vec![(4.0, 2.0), (8.0, 3.0)]);
    }

    #[test]
    fn csv_rows_are_self_describing() {
        let out = RunOutput { sections: vec![crate::ops::Section { report: sample(), aux_is_defect: true }], ..Default::default() };
        let text = String::from_utf8(csv_bytes(&out).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "ST,circle:64,1,2,inf,,3,0.5,4,bump,1,1,1,0,0,,0.001");
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn nonfinite_numbers() {
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(jnum(f64::NAN), Value::String("nan".into()));
        assert_eq!(num(0.1), "0.1");
    }

    #[test]
    fn svg_has_points() {
        let svg = svg_plot(&sample()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
