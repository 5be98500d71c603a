//! Static SVG charts derived from the CSV rows.

use std::fmt::Write as _;

use kljn_core::{CaseLabel, SecureSituation};

use crate::csvio::{ScatterRow, SweepRow};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#edb120", "#7e2f8e", "#2ca02c", "#d62728", "#17becf", "#8c564b",
];
const HL_COLOUR: &str = "#1f77b4";
const LH_COLOUR: &str = "#ff7f0e";

#[derive(Debug, Clone, Copy)]
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.y.0) / (self.y.1 - self.y.0) * self.height
    }

    fn axes(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let (l, t, w, h) = (self.left, self.top, self.width, self.height);
        let _ = writeln!(
            out,
            r#"<rect x="{l:.1}" y="{t:.1}" width="{w:.1}" height="{h:.1}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{title}</text>"#,
            l + w / 2.0,
            t - 8.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{x_label}</text>"#,
            l + w / 2.0,
            t + h + 34.0
        );
        let _ = writeln!(
            out,
            r#"<text transform="translate({:.1},{:.1}) rotate(-90)" text-anchor="middle" font-size="12">{y_label}</text>"#,
            l - 46.0,
            t + h / 2.0
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
                self.px(xv),
                t + h + 16.0,
                tick(xv)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
                l - 4.0,
                self.py(yv) + 3.0,
                tick(yv)
            );
        }
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn document(width: u32, height: u32, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

/// `p` against log₁₀ of the wire voltage, one line per (case, γ), with a
/// second panel for `ε`.
pub fn sweep_chart(rows: &[SweepRow]) -> String {
    let mut series: Vec<(CaseLabel, usize)> = Vec::new();
    for r in rows {
        if !series.contains(&(r.case, r.gamma)) {
            series.push((r.case, r.gamma));
        }
    }
    let xs = rows.iter().map(|r| r.u_w_rms.log10());
    let x = padded(
        xs.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
    );
    let mut body = String::new();
    let panels = [("p", 0.4, 1.0), ("epsilon", 0.0, 0.6)];
    for (k, (name, lo, hi)) in panels.into_iter().enumerate() {
        let frame = Frame {
            left: 70.0,
            top: 40.0 + k as f64 * 300.0,
            width: 560.0,
            height: 220.0,
            x,
            y: (lo, hi),
        };
        frame.axes(&mut body, name, "log10 U_w [V]", name);
        for (i, &(case, gamma)) in series.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = rows
                .iter()
                .filter(|r| r.case == case && r.gamma == gamma)
                .map(|r| {
                    let y = if k == 0 { r.p } else { r.epsilon };
                    format!("{:.2},{:.2}", frame.px(r.u_w_rms.log10()), frame.py(y.clamp(lo, hi)))
                })
                .collect();
            let _ = writeln!(
                body,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
            if k == 0 {
                let _ = writeln!(
                    body,
                    r#"<text x="650" y="{:.1}" font-size="11" fill="{colour}">{case} γ={gamma}</text>"#,
                    60.0 + 14.0 * i as f64
                );
            }
        }
    }
    document(800, 600, &body)
}

/// IU scatter, one panel per case: HL as circles, LH as crosses.
pub fn scatter_chart(rows: &[ScatterRow]) -> String {
    let mut cases: Vec<CaseLabel> = Vec::new();
    for r in rows {
        if !cases.contains(&r.0.case) {
            cases.push(r.0.case);
        }
    }
    let mut body = String::new();
    for (k, case) in cases.iter().enumerate() {
        let pts: Vec<_> = rows.iter().map(|r| r.0).filter(|s| s.case == *case).collect();
        let range = |f: fn(&kljn_core::ScatterSample) -> f64| {
            padded(
                pts.iter().map(f).fold(f64::INFINITY, f64::min),
                pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max),
            )
        };
        let frame = Frame {
            left: 80.0 + (k % 2) as f64 * 400.0,
            top: 40.0 + (k / 2) as f64 * 360.0,
            width: 300.0,
            height: 280.0,
            x: range(|s| s.u_w),
            y: range(|s| s.i_w),
        };
        frame.axes(&mut body, case.as_str(), "U_w [V]", "I_w [A]");
        for s in &pts {
            let (cx, cy) = (frame.px(s.u_w), frame.py(s.i_w));
            match s.situation {
                SecureSituation::HL => {
                    let _ = writeln!(
                        body,
                        r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="2" fill="none" stroke="{HL_COLOUR}"/>"#
                    );
                }
                SecureSituation::LH => {
                    let _ = writeln!(
                        body,
                        r#"<path d="M{:.2},{:.2}l4,4m0,-4l-4,4" stroke="{LH_COLOUR}"/>"#,
                        cx - 2.0,
                        cy - 2.0
                    );
                }
            }
        }
    }
    let rows_of_panels = cases.len().div_ceil(2).max(1) as u32;
    document(800, 360 * rows_of_panels + 20, &body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kljn_core::ScatterSample;

    #[test]
    fn charts_are_well_formed() {
        let rows = vec![
            SweepRow { case: CaseLabel::D2, gamma: 1000, t_eff: 1e17, u_w_rms: 5.0, p: 0.7, epsilon: 0.3 },
            SweepRow { case: CaseLabel::D2, gamma: 1000, t_eff: 1e18, u_w_rms: 15.8, p: 0.98, epsilon: 0.02 },
        ];
        let svg = sweep_chart(&rows);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);

        let pts = vec![
            ScatterRow(ScatterSample { case: CaseLabel::D3, situation: SecureSituation::HL, step: 0, u_w: 1.0, i_w: 1e-4 }),
            ScatterRow(ScatterSample { case: CaseLabel::D3, situation: SecureSituation::LH, step: 0, u_w: -1.0, i_w: 2e-4 }),
        ];
        let svg = scatter_chart(&pts);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(scatter_chart(&[]).contains("</svg>"));
    }
}
