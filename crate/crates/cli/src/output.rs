//! CSV and SVG emission.

use std::fmt::Write as _;
use std::io::{Read, Write};

use anyhow::Context;

/// Terminal waveforms of one probed element, sampled at `t`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Waveforms {
    pub t: Vec<f64>,
    pub i: Vec<f64>,
    pub v: Vec<f64>,
}

impl Waveforms {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Writes the `t,i,v` table. Floats use the shortest round-tripping form.
pub fn write_csv<W: Write>(w: &Waveforms, out: W) -> anyhow::Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["t", "i", "v"])?;
    for k in 0..w.len() {
        wr.write_record([w.t[k].to_string(), w.i[k].to_string(), w.v[k].to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> anyhow::Result<Waveforms> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["t", "i", "v"] {
        anyhow::bail!("expected header t,i,v, got {:?}", header);
    }
    let mut w = Waveforms::default();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let field = |j: usize| -> anyhow::Result<f64> {
            rec.get(j)
                .context("missing column")?
                .parse()
                .with_context(|| format!("row {}", k + 2))
        };
        w.t.push(field(0)?);
        w.i.push(field(1)?);
        w.v.push(field(2)?);
    }
    Ok(w)
}

pub fn emit_csv(w: &Waveforms, path: &std::path::Path) -> anyhow::Result<()> {
    let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(w, std::io::BufWriter::new(f))
}

/// One polyline of a plot.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

/// Static line plot; non-finite samples break the polyline.
pub fn render_svg(traces: &[Trace], x_label: &str, y_label: &str, title: &str) -> String {
    let (x0, x1) = bounds(traces.iter().flat_map(|t| t.x.iter().copied()));
    let (y0, y1) = bounds(traces.iter().flat_map(|t| t.y.iter().copied()));
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{MARGIN} {top} V{bot} H{right}" stroke="black" fill="none"/>"#,
        top = MARGIN,
        bot = HEIGHT - MARGIN,
        right = WIDTH - MARGIN
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(fx),
            HEIGHT - MARGIN + 16.0,
            tick(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            sy(fy) + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (n, tr) in traces.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let mut pts = String::new();
        let flush = |pts: &mut String, s: &mut String| {
            if !pts.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" points="{}"/>"#,
                    pts.trim_end()
                );
                pts.clear();
            }
        };
        for (x, y) in tr.x.iter().zip(&tr.y) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(*x), sy(*y));
            } else {
                flush(&mut pts, &mut s);
            }
        }
        flush(&mut pts, &mut s);
        let ly = MARGIN + 14.0 * n as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN,
            escape(&tr.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-2..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn emit_svg_plot(
    traces: &[Trace],
    x_label: &str,
    y_label: &str,
    title: &str,
    path: &std::path::Path,
) -> anyhow::Result<()> {
    std::fs::write(path, render_svg(traces, x_label, y_label, title))
        .with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_series_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&Waveforms::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,i,v\n");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let w = Waveforms {
            t: vec![0.0, 1e-4],
            i: vec![0.1 + 0.2, -1.0 / 3.0],
            v: vec![f64::MIN_POSITIVE, 6.02e23],
        };
        let mut buf = Vec::new();
        write_csv(&w, &mut buf).unwrap();
        assert_eq!(String::from_utf8_lossy(&buf).lines().count(), 3);
        assert_eq!(read_csv(buf.as_slice()).unwrap(), w);
    }

    #[test]
    fn svg_is_deterministic_and_labeled() {
        let tr = vec![Trace {
            label: "a<b".into(),
            x: vec![0.0, 1.0, 2.0],
            y: vec![0.0, f64::NAN, 1.0],
        }];
        let a = render_svg(&tr, "Time (s)", "Voltage (V)", "t");
        assert_eq!(a, render_svg(&tr, "Time (s)", "Voltage (V)", "t"));
        assert!(a.contains("Time (s)") && a.contains("Voltage (V)") && a.contains("a&lt;b"));
        assert_eq!(a.matches("<polyline").count(), 2);
    }
}
