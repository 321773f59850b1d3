//! Result files: CSV tables, JSON documents and static SVG plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{CorrelationMap, SqueezeCurve};

/// A directory that only accepts plain file names, so nothing lands outside it.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(OutputDir {
            root,
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn target(&mut self, name: &str) -> Result<PathBuf> {
        let ok = !name.is_empty()
            && !name.contains(['/', '\\'])
            && name != "."
            && name != "..";
        if !ok {
            return Err(Error::contract(format!("output name {name:?} is not a plain file name")));
        }
        let p = self.root.join(name);
        self.written.push(p.clone());
        Ok(p)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf> {
        let p = self.target(name)?;
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value).expect("json value");
        self.write_text(name, &(text + "\n"))
    }

    /// CSV with an optional leading `# {...}` JSON comment line.
    pub fn write_csv(
        &mut self,
        name: &str,
        header_json: Option<&serde_json::Value>,
        columns: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<PathBuf> {
        let mut buf = Vec::new();
        if let Some(h) = header_json {
            buf.extend_from_slice(format!("# {h}\n").as_bytes());
        }
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let io = |e: csv::Error| Error::contract(format!("csv encoding failed: {e}"));
            w.write_record(columns).map_err(io)?;
            for r in rows {
                w.write_record(&r).map_err(io)?;
            }
            w.flush().map_err(|e| Error::io(name, e))?;
        }
        let text = String::from_utf8(buf).expect("utf-8 csv");
        self.write_text(name, &text)
    }
}

/// Shortest round-trip representation, so re-runs compare byte for byte.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;

/// Line plot of one or more squeeze curves, Fano factor in dB against edge.
pub fn squeeze_svg(curves: &[&SqueezeCurve], title: &str) -> String {
    let pts: Vec<(f64, f64)> = curves
        .iter()
        .flat_map(|c| c.points.iter().filter_map(|p| p.fano_db.map(|d| (p.edge_nm, d))))
        .collect();
    let (x0, x1) = range(pts.iter().map(|p| p.0));
    let (y0, y1) = range(pts.iter().map(|p| p.1).chain([0.0]));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let mut s = svg_open(title);
    let _ = writeln!(
        s,
        r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#888" stroke-dasharray="4 3"/>"##,
        MARGIN,
        sy(0.0),
        W - MARGIN,
        sy(0.0)
    );
    let colors = ["#c0392b", "#2c6fbb", "#27ae60", "#8e44ad"];
    for (ci, c) in curves.iter().enumerate() {
        let path: Vec<String> = c
            .points
            .iter()
            .filter_map(|p| p.fano_db.map(|d| format!("{:.1},{:.1}", sx(p.edge_nm), sy(d))))
            .collect();
        let color = colors[ci % colors.len()];
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}" font-size="12">{}</text>"#,
            W - MARGIN - 80.0,
            MARGIN + 16.0 * (ci as f64 + 1.0),
            c.kind.label()
        );
    }
    axes(&mut s, (x0, x1), (y0, y1), "filter edge (nm)", "Fano factor (dB)");
    s.push_str("</svg>\n");
    s
}

/// Heat map of ρ on a blue/white/red scale over [−1, 1].
pub fn correlation_svg(map: &CorrelationMap, title: &str) -> String {
    let n = map.len();
    let size = H - 2.0 * MARGIN;
    let cell = size / n as f64;
    let (lo, hi) = (map.edges_nm[0], map.edges_nm[n]);
    let mut s = svg_open(title);
    for i in 0..n {
        for j in 0..n {
            let fill = match map.get(i, j) {
                Some(r) => diverging(r),
                None => "#bbbbbb".to_string(),
            };
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                MARGIN + j as f64 * cell,
                H - MARGIN - (i as f64 + 1.0) * cell,
                cell + 0.3,
                cell + 0.3
            );
        }
    }
    let sx = |x: f64| MARGIN + (x - lo) / (hi - lo) * size;
    for k in 0..=4 {
        let l = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{l:.0}</text>"#,
            sx(l),
            H - MARGIN + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{l:.0}</text>"#,
            MARGIN - 6.0,
            H - MARGIN - (l - lo) / (hi - lo) * size + 4.0
        );
    }
    // colour bar
    let bx = MARGIN + size + 30.0;
    for k in 0..40 {
        let r = 1.0 - 2.0 * k as f64 / 39.0;
        let _ = writeln!(
            s,
            r#"<rect x="{bx:.1}" y="{:.2}" width="14" height="{:.2}" fill="{}"/>"#,
            MARGIN + k as f64 * size / 40.0,
            size / 40.0 + 0.3,
            diverging(r)
        );
    }
    for (r, y) in [(1.0, MARGIN), (0.0, MARGIN + size / 2.0), (-1.0, MARGIN + size)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11">{r:+.0}</text>"#,
            bx + 20.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">wavelength (nm)</text>"#,
        MARGIN + size / 2.0,
        H - 12.0
    );
    s.push_str("</svg>\n");
    s
}

fn diverging(r: f64) -> String {
    let r = r.clamp(-1.0, 1.0);
    let (red, green, blue) = if r >= 0.0 {
        (255.0, 255.0 * (1.0 - r), 255.0 * (1.0 - r))
    } else {
        (255.0 * (1.0 + r), 255.0 * (1.0 + r), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", red as u8, green as u8, blue as u8)
}

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    s
}

fn axes(s: &mut String, (x0, x1): (f64, f64), (y0, y1): (f64, f64), xl: &str, yl: &str) {
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{:.0}</text>"#,
            MARGIN + f * (W - 2.0 * MARGIN),
            H - MARGIN + 16.0,
            x0 + f * (x1 - x0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{:.2}</text>"#,
            MARGIN - 6.0,
            H - MARGIN - f * (H - 2.0 * MARGIN) + 4.0,
            y0 + f * (y1 - y0)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{xl}</text>"#,
        W / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.1})">{yl}</text>"#,
        H / 2.0,
        H / 2.0
    );
}

fn range(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
