//! CSV and SVG emitters. Numeric CSV fields render with 18 significant
//! digits (plus an exact num/den column where the value is rational);
//! the SVG styling is fixed so reruns are byte-identical.

use toruslab_core::flow::{EulerSeries, OccupancySeries};
use toruslab_core::numeric::rat_to_f64;
use toruslab_core::Rat;

pub fn dec(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn rat_cols(x: &Rat) -> (String, String) {
    (dec(rat_to_f64(x)), format!("{}/{}", x.numer(), x.denom()))
}

/// columns: index, S_n (or Θ_n), mode, condition flag
pub fn series_csv(name: &str, values: &[f64], mode: &str, flagged: bool) -> String {
    let mut out = format!("index,{name},mode,condition_flag\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            dec(*v),
            mode,
            flagged as u8
        ));
    }
    out
}

/// columns: n, T_n, A_n, B_n, C_n, occ_p, occ_q, theta_proxy
pub fn special_csv(series: &OccupancySeries) -> String {
    let mut out = String::from("n,T_n,A_n,B_n,C_n,occ_p,occ_q,theta_proxy\n");
    for r in &series.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n,
            dec(r.total),
            dec(r.a),
            dec(r.b),
            dec(r.c),
            dec(r.occ_p),
            dec(r.occ_q),
            dec(r.theta_proxy),
        ));
    }
    out
}

/// columns: step, t_log10, x, y, in_box_p, in_box_q
pub fn euler_csv(series: &EulerSeries) -> String {
    let mut out = String::from("step,t_log10,x,y,in_box_p,in_box_q\n");
    for r in &series.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.step,
            dec(r.t_log10),
            dec(r.x),
            dec(r.y),
            r.in_box_p as u8,
            r.in_box_q as u8,
        ));
    }
    out
}

/// columns: t_log10, occ_p, occ_q
pub fn occupancy_csv(series: &EulerSeries) -> String {
    let mut out = String::from("t_log10,occ_p,occ_q\n");
    for (t, p, q) in &series.occupancy {
        out.push_str(&format!("{},{},{}\n", dec(*t), dec(*p), dec(*q)));
    }
    out
}

const W: f64 = 800.0;
const H: f64 = 500.0;
const MARGIN: f64 = 50.0;

fn svg_header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    )
}

fn axes(x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MARGIN,
        W - MARGIN,
        H - MARGIN
    ));
    s.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MARGIN
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">{x_label} [{:.3}, {:.3}]</text>\n",
        W / 2.0 - 60.0,
        H - 10.0,
        x_range.0,
        x_range.1
    ));
    s.push_str(&format!(
        "<text x=\"6\" y=\"{}\" font-size=\"12\">{y_label} [{:.3}, {:.3}]</text>\n",
        H / 2.0,
        y_range.0,
        y_range.1
    ));
    s
}

fn scale(v: f64, range: (f64, f64), pixels: (f64, f64)) -> f64 {
    if range.1 <= range.0 {
        return pixels.0;
    }
    pixels.0 + (v - range.0) / (range.1 - range.0) * (pixels.1 - pixels.0)
}

/// A fixed-style polyline plot of (x, y) points.
pub fn line_svg(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let xr = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, p| {
            (acc.0.min(p.0), acc.1.max(p.0))
        });
    let yr = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, p| {
            (acc.0.min(p.1), acc.1.max(p.1))
        });
    let mut s = svg_header();
    s.push_str(&axes(x_label, y_label, xr, yr));
    s.push_str("<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"");
    for (x, y) in points {
        s.push_str(&format!(
            "{:.2},{:.2} ",
            scale(*x, xr, (MARGIN, W - MARGIN)),
            scale(*y, yr, (H - MARGIN, MARGIN)),
        ));
    }
    s.push_str("\"/>\n</svg>\n");
    s
}

/// A fixed-style scatter plot of (x, y) points in the unit square.
pub fn scatter_svg(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let mut s = svg_header();
    s.push_str(&axes(x_label, y_label, (0.0, 1.0), (0.0, 1.0)));
    for (x, y) in points {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1\" fill=\"#1f77b4\"/>\n",
            scale(*x, (0.0, 1.0), (MARGIN, W - MARGIN)),
            scale(*y, (0.0, 1.0), (H - MARGIN, MARGIN)),
        ));
    }
    s.push_str("</svg>\n");
    s
}
