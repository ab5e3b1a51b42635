//! Minimal SVG charts: RMSE against the swept setting and box-and-whisker
//! panels, one group of panels per experiment.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::bench::io::{SummaryRow, TrialRow};
use crate::bench::stats::boxplot_stats;
use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn color(method: &str) -> &'static str {
    match method {
        "proposed" => "#1f77b4",
        "plain" => "#d62728",
        _ => "#555555",
    }
}

/// One box; whiskers are absent when only quartiles are known.
#[derive(Debug, Clone)]
struct BoxGlyph {
    q1: f64,
    median: f64,
    q3: f64,
    whiskers: Option<(f64, f64)>,
    outliers: Vec<f64>,
}

struct Panel<'a> {
    title: String,
    y_label: &'a str,
    settings: Vec<f64>,
    methods: Vec<String>,
    y_max: f64,
    top: f64,
}

impl Panel<'_> {
    fn plot_w(&self) -> f64 {
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    }

    fn plot_h(&self) -> f64 {
        PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    }

    fn x_of(&self, idx: usize) -> f64 {
        let slot = self.plot_w() / self.settings.len() as f64;
        MARGIN_LEFT + slot * (idx as f64 + 0.5)
    }

    fn y_of(&self, v: f64) -> f64 {
        self.top + MARGIN_TOP + self.plot_h() * (1.0 - (v / self.y_max).clamp(0.0, 1.0))
    }

    fn frame(&self, out: &mut String) {
        let (x0, y0) = (MARGIN_LEFT, self.top + MARGIN_TOP);
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#000"/>"##,
            self.plot_w(),
            self.plot_h()
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
            MARGIN_LEFT + self.plot_w() / 2.0,
            self.top + 22.0,
            escape(&self.title)
        );
        for k in 0..=4 {
            let v = self.y_max * k as f64 / 4.0;
            let y = self.y_of(v);
            let _ = writeln!(
                out,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="#000"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{v:.3}</text>"##,
                x0 - 5.0,
                x0 - 8.0,
                y + 4.0
            );
        }
        for (i, s) in self.settings.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{s}</text>"#,
                self.x_of(i),
                y0 + self.plot_h() + 16.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="18" y="{:.1}" font-size="12" transform="rotate(-90 18 {:.1})" text-anchor="middle">{}</text>"#,
            y0 + self.plot_h() / 2.0,
            y0 + self.plot_h() / 2.0,
            escape(self.y_label)
        );
        for (k, m) in self.methods.iter().enumerate() {
            let y = y0 + 14.0 + 18.0 * k as f64;
            let x = WIDTH - MARGIN_RIGHT + 12.0;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{}"/><text x="{:.1}" y="{y:.1}" font-size="12">{}</text>"#,
                y - 10.0,
                color(m),
                x + 18.0,
                escape(m)
            );
        }
    }

    fn axis_caption(&self, out: &mut String, caption: &str) {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#,
            MARGIN_LEFT + self.plot_w() / 2.0,
            self.top + PANEL_HEIGHT - 10.0,
            escape(caption)
        );
    }

    fn lines(&self, out: &mut String, series: &BTreeMap<String, Vec<Option<f64>>>) {
        for (method, values) in series {
            let pts: Vec<String> = values
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|v| format!("{:.1},{:.1}", self.x_of(i), self.y_of(v))))
                .collect();
            let c = color(method);
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#, pts.join(" "));
            for p in &pts {
                let (x, y) = p.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3" fill="{c}"/>"#);
            }
        }
    }

    fn boxes(&self, out: &mut String, glyphs: &BTreeMap<(usize, usize), BoxGlyph>) {
        let slot = self.plot_w() / self.settings.len() as f64;
        let width = slot * 0.7 / self.methods.len().max(1) as f64;
        for (&(si, mi), g) in glyphs {
            let c = color(&self.methods[mi]);
            let left = self.x_of(si) - slot * 0.35 + width * mi as f64 + width * 0.1;
            let w = width * 0.8;
            let cx = left + w / 2.0;
            if let Some((lo, hi)) = g.whiskers {
                let _ = writeln!(
                    out,
                    r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="{c}" stroke-dasharray="3,2"/><line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="{c}" stroke-dasharray="3,2"/>"#,
                    self.y_of(hi),
                    self.y_of(g.q3),
                    self.y_of(g.q1),
                    self.y_of(lo)
                );
                for v in [lo, hi] {
                    let _ = writeln!(
                        out,
                        r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{c}"/>"#,
                        cx - w / 4.0,
                        cx + w / 4.0,
                        y = self.y_of(v)
                    );
                }
            }
            let _ = writeln!(
                out,
                r#"<rect x="{left:.1}" y="{:.1}" width="{w:.1}" height="{:.1}" fill="none" stroke="{c}" stroke-width="1.5"/>"#,
                self.y_of(g.q3),
                (self.y_of(g.q1) - self.y_of(g.q3)).max(0.5)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{left:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{c}" stroke-width="2.5"/>"#,
                left + w,
                y = self.y_of(g.median)
            );
            for &o in &g.outliers {
                let y = self.y_of(o);
                let _ = writeln!(
                    out,
                    r#"<path d="M{:.1},{y:.1}h8M{cx:.1},{:.1}v8" stroke="{c}"/>"#,
                    cx - 4.0,
                    y - 4.0
                );
            }
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn document(panels: usize, body: &str) -> String {
    let h = PANEL_HEIGHT * panels as f64;
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{h}\" viewBox=\"0 0 {WIDTH} {h}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n{body}</svg>\n"
    )
}

fn ordered<T: PartialEq + Clone>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for it in items {
        if !out.contains(&it) {
            out.push(it);
        }
    }
    out
}

fn nice_max(v: f64) -> f64 {
    if v.is_finite() && v > 0.0 {
        v * 1.1
    } else {
        1.0
    }
}

/// RMSE line chart plus quartile boxes for every experiment in the summary.
pub fn summary_figure(rows: &[SummaryRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("summary has no rows".into()));
    }
    let experiments = ordered(rows.iter().map(|r| r.experiment.clone()));
    let mut body = String::new();
    let mut top = 0.0;
    for exp in &experiments {
        let sub: Vec<&SummaryRow> = rows.iter().filter(|r| &r.experiment == exp).collect();
        let settings = ordered(sub.iter().map(|r| r.setting));
        let methods = ordered(sub.iter().map(|r| r.method.clone()));
        let idx = |r: &SummaryRow| {
            (
                settings.iter().position(|&s| s == r.setting).unwrap_or(0),
                methods.iter().position(|m| m == &r.method).unwrap_or(0),
            )
        };

        let mut series: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
        for r in &sub {
            let (si, _) = idx(r);
            series.entry(r.method.clone()).or_insert_with(|| vec![None; settings.len()])[si] = r.rmse;
        }
        let rmse_max = sub.iter().filter_map(|r| r.rmse).fold(0.0, f64::max);
        let panel = Panel {
            title: format!("{exp}: RMSE"),
            y_label: "RMSE (m)",
            settings: settings.clone(),
            methods: methods.clone(),
            y_max: nice_max(rmse_max),
            top,
        };
        panel.frame(&mut body);
        panel.lines(&mut body, &series);
        panel.axis_caption(&mut body, "setting");
        top += PANEL_HEIGHT;

        let mut glyphs = BTreeMap::new();
        for r in &sub {
            if let (Some(q1), Some(median), Some(q3)) = (r.q1, r.median, r.q3) {
                glyphs.insert(idx(r), BoxGlyph { q1, median, q3, whiskers: None, outliers: vec![] });
            }
        }
        let q3_max = sub.iter().filter_map(|r| r.q3).fold(0.0, f64::max);
        let panel = Panel {
            title: format!("{exp}: median and quartiles of E_i"),
            y_label: "E_i (m)",
            settings,
            methods,
            y_max: nice_max(q3_max),
            top,
        };
        panel.frame(&mut body);
        panel.boxes(&mut body, &glyphs);
        panel.axis_caption(&mut body, "setting");
        top += PANEL_HEIGHT;
    }
    Ok(document(experiments.len() * 2, &body))
}

/// Box-and-whisker chart of `E_i` per setting and method, with outliers.
pub fn trials_figure(rows: &[TrialRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("trial table has no rows".into()));
    }
    let experiments = ordered(rows.iter().map(|r| r.experiment.clone()));
    let mut body = String::new();
    let mut top = 0.0;
    for exp in &experiments {
        let sub: Vec<&TrialRow> = rows.iter().filter(|r| &r.experiment == exp).collect();
        let settings = ordered(sub.iter().map(|r| r.setting));
        let methods = ordered(sub.iter().map(|r| r.method.clone()));
        let mut glyphs = BTreeMap::new();
        let mut y_max: f64 = 0.0;
        for (si, &s) in settings.iter().enumerate() {
            for (mi, m) in methods.iter().enumerate() {
                let errors: Vec<f64> = sub
                    .iter()
                    .filter(|r| r.setting == s && &r.method == m)
                    .filter_map(|r| r.error)
                    .collect();
                if errors.is_empty() {
                    continue;
                }
                let b = boxplot_stats(&errors)?;
                y_max = y_max.max(errors.iter().copied().fold(0.0, f64::max));
                glyphs.insert(
                    (si, mi),
                    BoxGlyph {
                        q1: b.q1,
                        median: b.median,
                        q3: b.q3,
                        whiskers: Some((b.whisker_lo, b.whisker_hi)),
                        outliers: b.outliers,
                    },
                );
            }
        }
        let panel = Panel {
            title: format!("{exp}: boxplots of E_i"),
            y_label: "E_i (m)",
            settings,
            methods,
            y_max: nice_max(y_max),
            top,
        };
        panel.frame(&mut body);
        panel.boxes(&mut body, &glyphs);
        panel.axis_caption(&mut body, "setting");
        top += PANEL_HEIGHT;
    }
    Ok(document(experiments.len(), &body))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(setting: f64, method: &str, rmse: f64) -> SummaryRow {
        SummaryRow {
            experiment: "exp3".into(),
            setting,
            method: method.into(),
            rmse: Some(rmse),
            median: Some(rmse * 0.8),
            q1: Some(rmse * 0.5),
            q3: Some(rmse * 1.1),
            n_outliers: 0,
            n_failed: 0,
        }
    }

    #[test]
    fn summary_chart_has_series_and_boxes() {
        let rows = vec![
            summary(1.0, "proposed", 0.3),
            summary(1.0, "plain", 0.4),
            summary(3.5, "proposed", 0.6),
            summary(3.5, "plain", 0.8),
        ];
        let svg = summary_figure(&rows).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("stroke-width=\"1.5\"").count(), 4);
        assert_eq!(svg, summary_figure(&rows).unwrap());
    }

    #[test]
    fn trial_chart_marks_outliers() {
        let rows: Vec<TrialRow> = [0.1, 0.2, 0.3, 0.4, 5.0]
            .iter()
            .enumerate()
            .map(|(i, &e)| TrialRow {
                experiment: "exp1".into(),
                setting: 5.0,
                method: "proposed".into(),
                trial: i,
                error: Some(e),
                connectivity: Some(0.4),
                kappa: Some(0.01),
                tightness: Some(0.0),
                status: "optimal".into(),
            })
            .collect();
        let svg = trials_figure(&rows).unwrap();
        assert_eq!(svg.matches("<path").count(), 1);
        assert!(trials_figure(&[]).is_err());
    }
}
