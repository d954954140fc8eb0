//! CSV and gnuplot datasets, and the SVG rendering of a potential with its
//! energy levels.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Shortest representation that reads back to the same `f64`.
pub fn fmt_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Named columns of equal length.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    columns: Vec<(String, Vec<f64>)>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a column; its length must match the existing ones.
    pub fn with_column(mut self, name: impl Into<String>, values: Vec<f64>) -> io::Result<Self> {
        if let Some((first, v)) = self.columns.first() {
            if v.len() != values.len() {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidInput,
                    format!("column length {} differs from {first:?} ({})", values.len(), v.len()),
                ));
            }
        }
        self.columns.push((name.into(), values));
        Ok(self)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, v)| v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.rows() == 0
    }

    fn render(&self, header_prefix: &str, sep: &str) -> String {
        let mut out = String::from(header_prefix);
        out.push_str(&self.names().collect::<Vec<_>>().join(sep));
        out.push('\n');
        for i in 0..self.rows() {
            let row: Vec<String> = self.columns.iter().map(|(_, v)| fmt_float(v[i])).collect();
            out.push_str(&row.join(sep));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        self.render("", ",")
    }

    /// Whitespace-separated with a `#` header, as gnuplot reads it.
    pub fn to_dat(&self) -> String {
        self.render("# ", " ")
    }

    pub fn from_csv(text: &str) -> io::Result<Self> {
        let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty CSV".into()))?;
        let mut columns: Vec<(String, Vec<f64>)> =
            header.split(',').map(|n| (n.trim().to_string(), Vec::new())).collect();
        for (k, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(bad(format!("row {}: {} fields, expected {}", k + 1, fields.len(), columns.len())));
            }
            for (f, (_, col)) in fields.iter().zip(columns.iter_mut()) {
                col.push(f.trim().parse().map_err(|e| bad(format!("row {}: {e}", k + 1)))?);
            }
        }
        Ok(Dataset { columns })
    }

    pub fn write_csv(&self, path: &Path) -> io::Result<PathBuf> {
        fs::write(path, self.to_csv())?;
        Ok(path.to_path_buf())
    }
}

/// A potential curve and its energy levels.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureData {
    pub title: String,
    pub x: Vec<f64>,
    pub potential: Vec<f64>,
    pub levels: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotStyle {
    pub width: u32,
    pub height: u32,
    pub svg: bool,
}

impl Default for PlotStyle {
    fn default() -> Self {
        PlotStyle {
            width: 640,
            height: 480,
            svg: true,
        }
    }
}

/// Writes `<stem>.dat` and, if the style asks for it, `<stem>.svg`.
pub fn export_plot_data(data: &FigureData, style: &PlotStyle, dir: &Path, stem: &str) -> io::Result<Vec<PathBuf>> {
    if data.x.is_empty() || data.x.len() != data.potential.len() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("nothing to plot for {:?}", data.title),
        ));
    }
    let mut written = Vec::new();
    let curve = Dataset::new()
        .with_column("x", data.x.clone())?
        .with_column("V", data.potential.clone())?;
    let mut dat = curve.to_dat();
    // second gnuplot block: one segment per level
    dat.push_str("\n\n# level x_left x_right\n");
    for &e in &data.levels {
        let (l, r) = level_span(data, e);
        let _ = writeln!(dat, "{} {} {}", fmt_float(e), fmt_float(l), fmt_float(r));
    }
    let path = dir.join(format!("{stem}.dat"));
    fs::write(&path, dat)?;
    written.push(path);
    if style.svg {
        let path = dir.join(format!("{stem}.svg"));
        fs::write(&path, render_svg(data, style))?;
        written.push(path);
    }
    Ok(written)
}

/// Extent of the classically allowed region `V(x) ≤ E`, or the whole axis.
fn level_span(data: &FigureData, e: f64) -> (f64, f64) {
    let inside = |i: &usize| data.potential[*i] <= e;
    let n = data.x.len();
    match ((0..n).find(inside), (0..n).rev().find(inside)) {
        (Some(a), Some(b)) => (data.x[a], data.x[b]),
        _ => (data.x[0], data.x[n - 1]),
    }
}

pub fn render_svg(data: &FigureData, style: &PlotStyle) -> String {
    let (w, h) = (style.width as f64, style.height as f64);
    let margin = 48.0;
    let x0 = data.x[0];
    let x1 = data.x[data.x.len() - 1];
    let lo = data
        .potential
        .iter()
        .chain(&data.levels)
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = data.potential.iter().copied().fold(0.0f64, f64::max);
    let pad = 0.05 * (hi - lo).max(1e-12);
    let (y_lo, y_hi) = (lo - pad, hi + pad);
    let px = |x: f64| margin + (x - x0) / (x1 - x0) * (w - 2.0 * margin);
    let py = |y: f64| h - margin - (y - y_lo) / (y_hi - y_lo) * (h - 2.0 * margin);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        "<style>.axis{{stroke:#888;stroke-width:1}}.potential{{fill:none;stroke:#1f4e9c;stroke-width:2}}.level{{stroke:#c0392b;stroke-width:1.5}}text{{font:12px sans-serif}}</style>"
    );
    let _ = writeln!(s, r#"<text x="{:.2}" y="20" text-anchor="middle">{}</text>"#, w / 2.0, escape(&data.title));
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        px(x0),
        py(0.0),
        px(x1),
        py(0.0)
    );
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        px(0.0f64.clamp(x0, x1)),
        py(y_lo),
        px(0.0f64.clamp(x0, x1)),
        py(y_hi)
    );
    let mut path = String::new();
    for (i, (&x, &v)) in data.x.iter().zip(&data.potential).enumerate() {
        let _ = write!(path, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, px(x), py(v));
    }
    let _ = writeln!(s, r#"<path class="potential" d="{path}"/>"#);
    for &e in &data.levels {
        let (l, r) = level_span(data, e);
        let _ = writeln!(
            s,
            r#"<line class="level" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"><title>E = {}</title></line>"#,
            px(l),
            py(e),
            px(r),
            py(e),
            fmt_float(e)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">x</text>"#,
        w / 2.0,
        h - 12.0
    );
    let _ = writeln!(s, r#"<text x="14" y="{:.2}">V</text>"#, h / 2.0);
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
