use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BenchError, BenchReport};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.low <= other.high && other.low <= self.high
    }
}

/// Wilson score interval for a proportion `p` observed over `n` trials.
pub fn wilson_interval(p: f64, n: usize, z: f64) -> Interval {
    if n == 0 {
        return Interval { low: 0.0, high: 1.0 };
    }
    let n = n as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Interval { low: (center - half).max(0.0), high: (center + half).min(1.0) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportFormats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for ReportFormats {
    fn default() -> Self {
        Self { csv: true, json: true, svg: false }
    }
}

/// One row per category plus an `overall` row.
pub fn report_csv(r: &BenchReport) -> String {
    let mut s = String::from("category,prompts,rate,ci_low,ci_high,top1,mean_topk\n");
    for c in &r.categories {
        writeln!(s, "{},{},{},{},{},{},{}", c.category, c.prompts, c.rate, c.ci.low, c.ci.high, c.top1, c.mean_topk)
            .unwrap();
    }
    writeln!(
        s,
        "overall,{},{},{},{},{},{}",
        r.prompts, r.overall, r.overall_ci.low, r.overall_ci.high, r.overall_top1, r.overall_mean_topk
    )
    .unwrap();
    s
}

/// Grouped bar chart of category rates, one colour per labelled report.
pub fn comparison_svg(reports: &[(&str, &BenchReport)]) -> String {
    const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1"];
    let Some((_, first)) = reports.first() else {
        return String::from("<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n");
    };
    let mut rows: Vec<String> = first.categories.iter().map(|c| c.category.to_string()).collect();
    rows.push("overall".into());
    let (bar, gap, plot_h, left, top) = (14.0, 18.0, 200.0, 40.0, 20.0);
    let group = bar * reports.len() as f64 + gap;
    let width = left + group * rows.len() as f64 + 140.0;
    let height = top + plot_h + 90.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"10\">\n"
    );
    writeln!(s, "<line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>", top + plot_h, width - 140.0, top + plot_h)
        .unwrap();
    for (ri, (label, r)) in reports.iter().enumerate() {
        let mut vals: Vec<f64> = r.categories.iter().map(|c| c.rate).collect();
        vals.push(r.overall);
        for (gi, v) in vals.iter().enumerate() {
            let x = left + gi as f64 * group + ri as f64 * bar;
            let h = v * plot_h;
            writeln!(
                s,
                "<rect x=\"{x}\" y=\"{}\" width=\"{}\" height=\"{h}\" fill=\"{}\"><title>{label}: {v:.3}</title></rect>",
                top + plot_h - h,
                bar - 1.0,
                PALETTE[ri % PALETTE.len()]
            )
            .unwrap();
        }
        let ly = top + 12.0 * ri as f64;
        writeln!(s, "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>", width - 130.0, ly, PALETTE[ri % PALETTE.len()]).unwrap();
        writeln!(s, "<text x=\"{}\" y=\"{}\">{label}</text>", width - 115.0, ly + 9.0).unwrap();
    }
    for (gi, name) in rows.iter().enumerate() {
        let x = left + gi as f64 * group + group / 2.0 - gap / 2.0;
        let y = top + plot_h + 12.0;
        writeln!(s, "<text x=\"{x}\" y=\"{y}\" transform=\"rotate(40 {x} {y})\">{name}</text>").unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<PathBuf, BenchError> {
    fs::write(&path, bytes).map_err(|source| BenchError::Io { path: path.display().to_string(), source })?;
    Ok(path)
}

/// Writes `<stem>.csv`, `<stem>.json` and optionally `<stem>.svg` into `dir`.
pub fn emit_report(r: &BenchReport, dir: &Path, stem: &str, formats: ReportFormats) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir).map_err(|source| BenchError::Io { path: dir.display().to_string(), source })?;
    let mut out = Vec::new();
    if formats.csv {
        out.push(write(dir.join(format!("{stem}.csv")), report_csv(r).as_bytes())?);
    }
    if formats.json {
        let mut json = serde_json::to_vec_pretty(r).expect("reports serialize");
        json.push(b'\n');
        out.push(write(dir.join(format!("{stem}.json")), &json)?);
    }
    if formats.svg {
        out.push(write(dir.join(format!("{stem}.svg")), comparison_svg(&[(r.config.strategy.name(), r)]).as_bytes())?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 8/10 at 95%: (0.4902, 0.9433) to 4 places.
        let w = wilson_interval(0.8, 10, Z95);
        assert!((w.low - 0.49016).abs() < 1e-4 && (w.high - 0.94332).abs() < 1e-4);
        let edge = wilson_interval(1.0, 600, Z95);
        assert_eq!(edge.high, 1.0);
        assert!(edge.low > 0.99 && edge.low < 1.0);
    }
}
