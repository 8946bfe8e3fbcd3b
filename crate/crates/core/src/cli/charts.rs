//! SVG charts with their data tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::commands::Outcome;
use super::report::{num, write_atomic, Csv};
use crate::error::{Error, Result};

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const W: f64 = 720.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;

pub struct Series {
    pub name: String,
    pub color_index: usize,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn frame(svg: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>
<line x1="{MARGIN}" y1="{}" x2="{}" y2="{}" stroke="black"/>
<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{}" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>
"#,
        W / 2.0,
        escape(title),
        H - MARGIN,
        W - MARGIN,
        H - MARGIN,
        H - MARGIN,
        W / 2.0,
        H - 12.0,
        escape(xlabel),
        H / 2.0,
        H / 2.0,
        escape(ylabel),
    );
}

fn y_axis_ticks(svg: &mut String, lo: f64, hi: f64) {
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let y = H - MARGIN - (H - 2.0 * MARGIN) * i as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.3}</text>"#, MARGIN - 4.0, y + 4.0, v);
    }
}

pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series], legend: &[(String, usize)]) -> String {
    let mut svg = String::new();
    frame(&mut svg, title, xlabel, ylabel);
    let xmax = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).fold(1.0f64, f64::max);
    let (ylo, yhi) = (0.0, 1.0);
    y_axis_ticks(&mut svg, ylo, yhi);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{xmax}</text>"#, W - MARGIN, H - MARGIN + 16.0);
    let sx = |x: f64| MARGIN + (W - 2.0 * MARGIN) * x / xmax;
    let sy = |y: f64| H - MARGIN - (H - 2.0 * MARGIN) * (y - ylo) / (yhi - ylo);
    for s in series {
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-opacity="0.6" stroke-width="1" points="{}"><title>{}</title></polyline>"#,
            PALETTE[s.color_index % PALETTE.len()],
            pts.join(" "),
            escape(&s.name)
        );
    }
    for (k, (name, c)) in legend.iter().enumerate() {
        let y = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            W - MARGIN - 90.0,
            y,
            PALETTE[c % PALETTE.len()],
            W - MARGIN - 76.0,
            y + 9.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn bar_chart(title: &str, ylabel: &str, bars: &[(String, f64)]) -> String {
    let mut svg = String::new();
    frame(&mut svg, title, "", ylabel);
    let finite = bars.iter().map(|b| b.1).filter(|v| v.is_finite());
    let yhi = finite.clone().fold(0.0f64, f64::max).max(1e-12);
    let ylo = finite.fold(0.0f64, f64::min);
    y_axis_ticks(&mut svg, ylo, yhi);
    let sy = |y: f64| H - MARGIN - (H - 2.0 * MARGIN) * (y - ylo) / (yhi - ylo);
    let slot = (W - 2.0 * MARGIN) / bars.len().max(1) as f64;
    for (k, (label, v)) in bars.iter().enumerate() {
        let v = if v.is_finite() { *v } else { 0.0 };
        let x = MARGIN + slot * k as f64 + slot * 0.15;
        let (top, bottom) = (sy(v.max(0.0)), sy(v.min(0.0)));
        let _ = writeln!(
            svg,
            r#"<rect x="{x:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{}</title></rect>"#,
            slot * 0.7,
            (bottom - top).max(0.5),
            PALETTE[k % PALETTE.len()],
            num(v)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text><text x="{:.2}" y="{:.2}" text-anchor="middle">{:.4}</text>"#,
            x + slot * 0.35,
            H - MARGIN + 16.0,
            escape(label),
            x + slot * 0.35,
            top - 4.0,
            v
        );
    }
    svg.push_str("</svg>\n");
    svg
}

struct TrajectoryData {
    seed: u64,
    snapshots: Vec<(usize, Vec<f64>)>,
}

fn read_trajectory(path: &Path) -> Result<TrajectoryData> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut seed = None;
    let mut snapshots = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let rec: Value = serde_json::from_str(line).map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), n + 1)))?;
        match rec["record"].as_str() {
            Some("header") => seed = rec["seed"].as_u64(),
            Some("snapshot") => {
                let t = rec["t"].as_u64().unwrap_or(0) as usize;
                let belief: Vec<f64> = serde_json::from_value(rec["belief"].clone())
                    .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), n + 1)))?;
                snapshots.push((t, belief));
            }
            _ => {}
        }
    }
    let seed = seed.ok_or_else(|| Error::Config(format!("{}: missing header record", path.display())))?;
    Ok(TrajectoryData { seed, snapshots })
}

fn trajectory_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let dir = if dir.join("trajectories").is_dir() { dir.join("trajectories") } else { dir.to_path_buf() };
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

fn belief_charts(files: &[PathBuf], out: &Path, written: &mut Vec<PathBuf>) -> Result<String> {
    if files.is_empty() {
        return Err(Error::Config("no trajectory files found".into()));
    }
    let mut trajs = files.iter().map(|f| read_trajectory(f)).collect::<Result<Vec<_>>>()?;
    trajs.sort_by_key(|t| t.seed);
    let m = trajs.iter().flat_map(|t| t.snapshots.first().map(|s| s.1.len())).max().unwrap_or(0);
    let mut series = Vec::new();
    let mut csv = Csv::new(&["seed", "t", "model", "weight"]);
    for tr in &trajs {
        for i in 0..m {
            series.push(Series {
                name: format!("seed {} q{}", tr.seed, i + 1),
                color_index: i,
                points: tr.snapshots.iter().map(|(t, b)| (*t as f64, b[i])).collect(),
            });
        }
        for (t, b) in &tr.snapshots {
            for (i, w) in b.iter().enumerate() {
                csv.row([tr.seed.to_string(), t.to_string(), format!("q{}", i + 1), num(*w)]);
            }
        }
    }
    let legend: Vec<(String, usize)> = (0..m).map(|i| (format!("q{}", i + 1), i)).collect();
    let svg = line_chart("Belief trajectories", "step", "posterior weight", &series, &legend);
    let dir = out.join("charts");
    for (name, bytes) in [("belief_trajectories.svg", svg.into_bytes()), ("belief_trajectories.csv", csv.into_bytes())] {
        write_atomic(&dir.join(name), &bytes)?;
        written.push(dir.join(name));
    }
    Ok(format!("belief chart over {} seed(s), {m} model(s)", trajs.len()))
}

fn bars_from_report(report: &Value) -> Result<Vec<(String, String, Vec<(String, f64)>)>> {
    let command = report["meta"]["command"].as_str().unwrap_or_default();
    let r = &report["result"];
    let f = |v: &Value| v.as_f64().unwrap_or(f64::NAN);
    let charts = match command {
        "reproduce" => r
            .as_array()
            .into_iter()
            .flatten()
            .filter(|p| p["checks"].as_array().is_some_and(|c| !c.is_empty()))
            .map(|p| {
                let id = p["prop_id"].as_u64().unwrap_or(0);
                let bars = p["checks"].as_array().unwrap().iter().map(|c| (c["name"].as_str().unwrap_or("?").to_string(), f(&c["computed"]))).collect();
                (format!("prop_{id}_payoffs"), format!("Proposition {id}"), bars)
            })
            .collect(),
        "trust" => vec![(
            "trust_payoffs".into(),
            "Worst-case user payoff".into(),
            vec![("strategic".into(), f(&r["audit"]["strategic_value"])), ("naive".into(), f(&r["audit"]["naive_value"]))],
        )],
        "solve" => vec![(
            "solve_candidates".into(),
            "Worst-case user payoff by candidate".into(),
            r["solution"]["per_candidate_table"]
                .as_array()
                .into_iter()
                .flatten()
                .map(|c| (c["label"].as_str().unwrap_or("?").to_string(), f(&c["user_payoff"])))
                .collect(),
        )],
        "counterfactual" => vec![(
            "counterfactual_payoffs".into(),
            "Platform payoff".into(),
            vec![
                ("current".into(), f(&r["audit"]["current"])),
                ("predicted".into(), f(&r["audit"]["predicted"])),
                ("true".into(), f(&r["audit"]["true_strategic"])),
            ],
        )],
        other => return Err(Error::Config(format!("cannot chart reports of command {other:?}"))),
    };
    Ok(charts)
}

/// Renders charts from a run directory, a trajectory file or a JSON report.
pub fn charts(input: &Path, out: &Path) -> Result<Outcome> {
    let mut files = Vec::new();
    let summary = if input.is_dir() {
        belief_charts(&trajectory_files(input)?, out, &mut files)?
    } else if input.extension().is_some_and(|x| x == "jsonl") {
        belief_charts(&[input.to_path_buf()], out, &mut files)?
    } else {
        let text = fs::read_to_string(input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
        let report: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", input.display())))?;
        if report["meta"]["command"] == "simulate" {
            let dir = input.parent().unwrap_or(Path::new("."));
            belief_charts(&trajectory_files(dir)?, out, &mut files)?
        } else {
            let sets = bars_from_report(&report)?;
            let dir = out.join("charts");
            for (stem, title, bars) in &sets {
                let mut csv = Csv::new(&["label", "value"]);
                for (l, v) in bars {
                    csv.row([l.clone(), num(*v)]);
                }
                let svg = bar_chart(title, "payoff", bars);
                for (path, bytes) in [(dir.join(format!("{stem}.svg")), svg.into_bytes()), (dir.join(format!("{stem}.csv")), csv.into_bytes())] {
                    write_atomic(&path, &bytes)?;
                    files.push(path);
                }
            }
            format!("{} bar chart(s)", sets.len())
        }
    };
    Ok(Outcome { files, summary, success: true })
}
