use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{Fit, SweepMember, SweepResult};

const W: f64 = 960.0;
const H: f64 = 440.0;
const PAD: f64 = 60.0;
const PANEL: f64 = 380.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Axis {
    lo: f64,
    hi: f64,
    origin: f64,
    len: f64,
    flip: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, origin: f64, len: f64, flip: bool) -> Axis {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let m = 0.05 * (hi - lo);
        Axis { lo: lo - m, hi: hi + m, origin, len, flip }
    }

    fn map(&self, v: f64) -> f64 {
        let s = (v - self.lo) / (self.hi - self.lo) * self.len;
        if self.flip {
            self.origin + self.len - s
        } else {
            self.origin + s
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

type Family<'a> = (&'a str, fn(&SweepMember) -> &Vec<f64>, &'a [Option<Fit>]);

/// Writes a self-contained SVG: sup-over-time distances against ε on
/// log-log axes with fitted lines, and W2_i(t) per run.
pub fn emit_svg_plots(sweep: &SweepResult, path: &Path) -> Result<()> {
    let ok: Vec<&SweepMember> = sweep.members.iter().filter(|m| m.failure.is_none()).collect();
    if ok.len() < 2 {
        return Err(Error::Degenerate("log-log panels need at least two completed sweep members".into()));
    }
    let families: [Family; 2] = [
        ("W2(ω_i/a_i, δ_Y_i)", |m| &m.sup_w2, &sweep.w2_fit),
        ("|X_i − Y_i|", |m| &m.sup_center_gap, &sweep.center_gap_fit),
    ];
    let ncomp = ok[0].sup_w2.len();
    let mut logs = Vec::new();
    for (_, pick, _) in &families {
        for m in &ok {
            for &v in pick(m) {
                if v > 0.0 {
                    logs.push(v.log10());
                }
            }
        }
    }
    let ax = Axis::new(ok.iter().map(|m| m.epsilon.log10()), PAD, PANEL - PAD, false);
    let ay = Axis::new(logs.into_iter(), PAD, H - 2.0 * PAD, true);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" font-size="13">sup over t vs ε (log-log)</text>"#, PAD);
    frame(&mut s, &ax, &ay, "log10 ε", "log10 distance");

    let mut legend_y = PAD + 10.0;
    for (f, (name, pick, fits)) in families.iter().enumerate() {
        for i in 0..ncomp {
            let color = COLORS[(f * ncomp + i) % COLORS.len()];
            for m in &ok {
                let v = pick(m)[i];
                if v > 0.0 {
                    let (x, y) = (ax.map(m.epsilon.log10()), ay.map(v.log10()));
                    if f == 0 {
                        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{color}"/>"#);
                    } else {
                        let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="7" height="7" fill="{color}"/>"#, x - 3.5, y - 3.5);
                    }
                }
            }
            let mut label = format!("{} i={i}", escape(name));
            if let Some(fit) = fits.get(i).copied().flatten() {
                let line = |e: f64| (ax.map(e), ay.map((fit.intercept + fit.slope * e * std::f64::consts::LN_10) / std::f64::consts::LN_10));
                let (x0, y0) = line(ax.lo);
                let (x1, y1) = line(ax.hi);
                let _ = writeln!(
                    s,
                    r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="{color}" stroke-dasharray="4 3"/>"#
                );
                let _ = write!(label, " slope={:.2}", fit.slope);
            }
            let _ = writeln!(s, r#"<text x="{:.2}" y="{legend_y:.2}" fill="{color}">{label}</text>"#, PAD + 8.0);
            legend_y += 14.0;
        }
    }

    // time series panel
    let x0 = PANEL + PAD;
    let series: Vec<(usize, usize, Vec<(f64, f64)>)> = ok
        .iter()
        .enumerate()
        .flat_map(|(k, m)| {
            (0..ncomp).map(move |i| (k, i, m.records.iter().map(|r| (r.t, r.components[i].w2_pv)).collect()))
        })
        .collect();
    let tx = Axis::new(series.iter().flat_map(|s| s.2.iter().map(|p| p.0)), x0, W - x0 - PAD, false);
    let ty = Axis::new(series.iter().flat_map(|s| s.2.iter().map(|p| p.1)), PAD, H - 2.0 * PAD, true);
    let _ = writeln!(s, r#"<text x="{x0}" y="20" font-size="13">W2(ω_i/a_i, δ_Y_i) over time</text>"#);
    frame(&mut s, &tx, &ty, "t", "W2");
    let mut legend_y = PAD + 10.0;
    for (k, i, pts) in &series {
        if pts.is_empty() {
            continue;
        }
        let color = COLORS[(k * ncomp + i) % COLORS.len()];
        let dash = if *i == 0 { "" } else { r#" stroke-dasharray="5 2""# };
        let d: Vec<String> = pts.iter().map(|&(t, w)| format!("{:.2},{:.2}", tx.map(t), ty.map(w))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}"{dash} points="{}"/>"#, d.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{legend_y:.2}" fill="{color}">ε={} i={i}</text>"#,
            W - PAD - 90.0,
            ok[*k].epsilon
        );
        legend_y += 14.0;
    }
    s.push_str("</svg>\n");
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn frame(s: &mut String, ax: &Axis, ay: &Axis, xl: &str, yl: &str) {
    let (l, r) = (ax.origin, ax.origin + ax.len);
    let (t, b) = (ay.origin, ay.origin + ay.len);
    let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, ax.len, ay.len);
    for k in 0..=4 {
        let fx = ax.lo + (ax.hi - ax.lo) * k as f64 / 4.0;
        let fy = ay.lo + (ay.hi - ay.lo) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{fx:.3}</text>"#, ax.map(fx), b + 15.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{fy:.3}</text>"#, l - 4.0, ay.map(fy) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xl}</text>"#, (l + r) / 2.0, b + 32.0);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{yl}</text>"#,
        l - 42.0,
        (t + b) / 2.0,
        l - 42.0,
        (t + b) / 2.0
    );
}
