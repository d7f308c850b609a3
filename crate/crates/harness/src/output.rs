//! CSV and SVG writers. Numbers are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cylinder_bench::{DefectReport, ObservableSeries, Observables, Quantity};

use crate::error::HarnessError;

pub const OBSERVABLES_CSV: &str = "observables.csv";
pub const CONVERGENCE_CSV: &str = "convergence.csv";
pub const REFERENCE_BOUNDARIES_CSV: &str = "boundaries_reference.csv";
pub const PARAREAL_BOUNDARIES_CSV: &str = "boundaries_parareal.csv";
pub const ORDER_CSV: &str = "order.csv";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `observables.csv` written row by row, so that a failing run leaves the
/// rows computed so far on disk.
pub struct ObservablesCsv {
    path: PathBuf,
    w: BufWriter<File>,
}

impl ObservablesCsv {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        let file = File::create(path).map_err(HarnessError::io(path))?;
        let mut csv = Self {
            path: path.to_path_buf(),
            w: BufWriter::new(file),
        };
        csv.line("t,c_dr,c_li,delta_p,r_d")?;
        Ok(csv)
    }

    fn line(&mut self, s: &str) -> Result<(), HarnessError> {
        writeln!(self.w, "{s}").map_err(HarnessError::io(&self.path))
    }

    pub fn push(&mut self, o: &Observables) -> Result<(), HarnessError> {
        let row = [o.t, o.c_dr, o.c_li, o.delta_p, o.r_d].map(num).join(",");
        self.line(&row)
    }

    pub fn flush(&mut self) -> Result<(), HarnessError> {
        self.w.flush().map_err(HarnessError::io(&self.path))
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(HarnessError::io(path))
}

pub fn write_observables(path: &Path, series: &ObservableSeries) -> Result<(), HarnessError> {
    let mut csv = ObservablesCsv::create(path)?;
    for k in 0..series.len() {
        csv.push(&series.get(k))?;
    }
    csv.flush()
}

pub fn write_convergence(path: &Path, report: &DefectReport) -> Result<(), HarnessError> {
    let mut s = String::from("quantity,iteration,error\n");
    for q in Quantity::ALL {
        for (k, e) in report.iterations.iter().zip(report.get(q)) {
            let _ = writeln!(s, "{},{k},{}", q.label(), num(*e));
        }
    }
    write_file(path, &s)
}

fn boundary_row(o: &Observables) -> String {
    [o.t, o.c_dr, o.c_li, o.delta_p].map(num).join(",")
}

/// Observables at the slice ends `n = 1..=N` of the serial reference.
pub fn write_reference_boundaries(path: &Path, reference: &[Observables]) -> Result<(), HarnessError> {
    let mut s = String::from("slice,t,c_dr,c_li,delta_p\n");
    for (n, o) in reference.iter().enumerate() {
        let _ = writeln!(s, "{},{}", n + 1, boundary_row(o));
    }
    write_file(path, &s)
}

pub fn write_parareal_boundaries(path: &Path, iterates: &[(usize, Vec<Observables>)]) -> Result<(), HarnessError> {
    let mut s = String::from("iteration,slice,t,c_dr,c_li,delta_p\n");
    for (k, obs) in iterates {
        for (n, o) in obs.iter().enumerate() {
            let _ = writeln!(s, "{k},{},{}", n + 1, boundary_row(o));
        }
    }
    write_file(path, &s)
}

pub struct Curve<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Static line chart. With `log_y` the y values are plotted as `log10`,
/// floored at `1e-17`.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, curves: &[Curve], log_y: bool) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (70.0, 20.0, 30.0, 50.0);
    let tr = |y: f64| if log_y { y.max(1e-17).log10() } else { y };
    let pts = curves.iter().flat_map(|c| c.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts {
        let y = tr(y);
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let sy = |y: f64| h - bottom - (tr(y) - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{title}</text>"#, w / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - left - right,
        h - top - bottom
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let px = left + f * (w - left - right);
        let py = h - bottom - f * (h - top - bottom);
        let ylab = if log_y { format!("1e{yv:.1}") } else { format!("{yv:.3}") };
        let _ = writeln!(s, r#"<text x="{px}" y="{}" text-anchor="middle">{xv:.3}</text>"#, h - bottom + 16.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{ylab}</text>"#, left - 4.0, py + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, w / 2.0, h - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{y_label}</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (n, c) in curves.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let path: Vec<String> = c
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = top + 16.0 + 14.0 * n as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#,
            w - right - 6.0,
            c.label
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_profile_charts(dir: &Path, series: &ObservableSeries) -> Result<(), HarnessError> {
    for (q, name, label) in [
        (Quantity::Drag, "drag.svg", "C_dr"),
        (Quantity::Lift, "lift.svg", "C_li"),
        (Quantity::Pressure, "pressure.svg", "delta_p"),
    ] {
        let points = series.times.iter().copied().zip(series.quantity(q).iter().copied()).collect();
        let svg = line_chart(label, "t", label, &[Curve { label, points }], false);
        write_file(&dir.join(name), &svg)?;
    }
    Ok(())
}

pub fn write_convergence_chart(dir: &Path, report: &DefectReport) -> Result<(), HarnessError> {
    let curves: Vec<Curve> = Quantity::ALL
        .iter()
        .map(|q| Curve {
            label: q.label(),
            points: report
                .iterations
                .iter()
                .zip(report.get(*q))
                .map(|(k, e)| (*k as f64, *e))
                .collect(),
        })
        .collect();
    let svg = line_chart("defect per iteration", "iteration", "E", &curves, true);
    write_file(&dir.join("convergence.svg"), &svg)
}
