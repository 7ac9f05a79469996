use cie_core::graph::NodePartition;
use cie_core::world::{Vec2, WorldConfig};
use std::fmt::Write;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const BLOCK_SHADES: [&str; 4] = ["#dbe9f6", "#f9dcdc", "#dcf2dc", "#fde9d4"];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn open(width: f64, height: f64, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(s, "<!-- cie {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="18" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Sampled adjacency matrix with the diagonal blocks of `part` shaded.
pub fn adjacency(sample: &[Vec<u8>], part: &NodePartition, title: &str) -> String {
    let n = sample.len();
    let cell = (480.0 / n.max(1) as f64).clamp(4.0, 40.0);
    let (left, top) = (40.0, 40.0);
    let side = cell * n as f64;
    let mut s = open(side + 2.0 * left, side + top + 20.0, title);
    let blocks = part.block_of();
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (left + j as f64 * cell, top + i as f64 * cell);
            let fill = if blocks[i] == blocks[j] {
                BLOCK_SHADES[blocks[i] % BLOCK_SHADES.len()]
            } else {
                "#eeeeee"
            };
            let _ = writeln!(s, r#"<rect x="{x:.2}" y="{y:.2}" width="{cell:.2}" height="{cell:.2}" fill="{fill}"/>"#);
            if sample[i][j] == 1 {
                let inset = cell * 0.2;
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="black"/>"#,
                    x + inset,
                    y + inset,
                    cell - 2.0 * inset,
                    cell - 2.0 * inset
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
            left - 4.0,
            top + (i as f64 + 0.7) * cell,
            i + 1
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{side:.2}" height="{side:.2}" fill="none" stroke="black"/>"#
    );
    s.push_str("</svg>\n");
    s
}

struct Frame {
    min: Vec2,
    scale: f64,
    margin: f64,
    top: f64,
    height: f64,
}

impl Frame {
    fn fit(points: &[Vec2], cfg: &WorldConfig, size: f64) -> Self {
        let mut min = [0.0f64, 0.0];
        let mut max = [cfg.map_size, cfg.map_size];
        for p in points {
            for d in 0..2 {
                min[d] = min[d].min(p[d]);
                max[d] = max[d].max(p[d]);
            }
        }
        let span = (max[0] - min[0]).max(max[1] - min[1]).max(f64::MIN_POSITIVE);
        Self {
            min,
            scale: size / span,
            margin: 20.0,
            top: 30.0,
            height: (max[1] - min[1]) * size / span,
        }
    }

    fn x(&self, v: f64) -> f64 {
        self.margin + (v - self.min[0]) * self.scale
    }

    fn y(&self, v: f64) -> f64 {
        self.top + self.height - (v - self.min[1]) * self.scale
    }
}

/// Map of the world with the trajectory drawn in one colour per label.
pub fn labeled_map(points: &[Vec2], labels: &[usize], cfg: &WorldConfig, title: &str, legend: &[String]) -> String {
    let size = 560.0;
    let fr = Frame::fit(points, cfg, size);
    let width = size + 2.0 * fr.margin + 120.0;
    let mut s = open(width, fr.height + fr.top + 2.0 * fr.margin, title);
    let m = cfg.map_size;
    let _ = writeln!(
        s,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#fafafa" stroke="#555"/>"##,
        fr.x(0.0),
        fr.y(m),
        m * fr.scale,
        m * fr.scale
    );
    let c = cfg.center();
    let _ = writeln!(
        s,
        r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="#555" stroke-dasharray="4 3"/>"##,
        fr.x(c[0]),
        fr.y(c[1]),
        cfg.r_center * fr.scale
    );
    let reach = 4.0 * m;
    for deg in [90.0f64, 210.0, 330.0] {
        let (sin, cos) = deg.to_radians().sin_cos();
        let start = [c[0] + cfg.r_center * cos, c[1] + cfg.r_center * sin];
        let end = [c[0] + reach * cos, c[1] + reach * sin];
        let clip = |v: f64, lo: f64, hi: f64| v.clamp(lo, hi);
        let end = [clip(end[0], 0.0, m), clip(end[1], 0.0, m)];
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555" stroke-dasharray="4 3"/>"##,
            fr.x(start[0]),
            fr.y(start[1]),
            fr.x(end[0]),
            fr.y(end[1])
        );
    }
    let mut i = 0;
    while i < points.len() {
        let label = labels[i];
        let mut j = i;
        while j + 1 < points.len() && labels[j + 1] == label {
            j += 1;
        }
        let end = (j + 1).min(points.len() - 1);
        let mut d = String::new();
        for p in &points[i..=end] {
            let _ = write!(d, "{:.1},{:.1} ", fr.x(p[0]), fr.y(p[1]));
        }
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="0.8"/>"#,
            d.trim_end(),
            color(label)
        );
        i = j + 1;
    }
    let lx = size + 2.0 * fr.margin;
    for (k, name) in legend.iter().enumerate() {
        let y = fr.top + 10.0 + 20.0 * k as f64;
        let _ = writeln!(s, r#"<rect x="{lx:.1}" y="{y:.1}" width="12" height="12" fill="{}"/>"#, color(k));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 18.0,
            y + 10.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// One band per object; a bar is drawn wherever the object is active.
pub fn activation_timeline(assignment: &[usize], k: usize, title: &str) -> String {
    let (left, top, band, plot_w) = (90.0, 34.0, 24.0, 800.0);
    let n = assignment.len().max(1) as f64;
    let mut s = open(left + plot_w + 20.0, top + band * k as f64 + 40.0, title);
    for obj in 0..k {
        let y = top + band * obj as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="end">object {}</text>"#,
            left - 8.0,
            y + band * 0.65,
            obj
        );
        let _ = writeln!(
            s,
            r##"<rect x="{left}" y="{y:.1}" width="{plot_w}" height="{:.1}" fill="#f2f2f2"/>"##,
            band - 4.0
        );
        let mut i = 0;
        while i < assignment.len() {
            if assignment[i] != obj {
                i += 1;
                continue;
            }
            let start = i;
            while i < assignment.len() && assignment[i] == obj {
                i += 1;
            }
            let x = left + plot_w * start as f64 / n;
            let w = (plot_w * (i - start) as f64 / n).max(0.5);
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{y:.1}" width="{w:.2}" height="{:.1}" fill="{}"/>"#,
                band - 4.0,
                color(obj)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">sample index (0 to {})</text>"#,
        left + plot_w / 2.0,
        top + band * k as f64 + 24.0,
        assignment.len().saturating_sub(1)
    );
    s.push_str("</svg>\n");
    s
}
