//! Result files: design.json, report.json, truss.svg, power.csv, sweep.csv.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use trusspp_core::fem::GroundStructure;

use crate::pipeline::{Outcome, Report, PRUNE_THRESHOLD};

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Line drawing of the design; bar width proportional to area, pruned bars omitted.
pub fn truss_svg(gs: &GroundStructure, a: &[f64]) -> String {
    let amax = a.iter().fold(0.0f64, |m, v| m.max(*v));
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in &gs.nodes {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = 400.0 / span;
    let pad = 20.0;
    let w = (x1 - x0) * scale + 2.0 * pad;
    let h = (y1 - y0) * scale + 2.0 * pad;
    // y axis points up in the model
    let px = |p: [f64; 2]| (pad + (p[0] - x0) * scale, pad + (y1 - p[1]) * scale);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (&(i, j), &ai) in gs.elements.iter().zip(a) {
        if !(ai > PRUNE_THRESHOLD * amax) {
            continue;
        }
        let (xa, ya) = px(gs.nodes[i]);
        let (xb, yb) = px(gs.nodes[j]);
        let sw = 0.5 + 7.5 * ai / amax;
        let _ = writeln!(
            s,
            r#"<line x1="{xa:.2}" y1="{ya:.2}" x2="{xb:.2}" y2="{yb:.2}" stroke="black" stroke-width="{sw:.3}" stroke-linecap="round"/>"#
        );
    }
    let fixed: Vec<bool> = (0..gs.nodes.len()).map(|n| !gs.is_node_free(n)).collect();
    for (n, p) in gs.nodes.iter().enumerate() {
        let (x, y) = px(*p);
        let fill = if fixed[n] { "gray" } else { "none" };
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{fill}" stroke="gray"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

pub fn power_csv(trace: &[(f64, f64)]) -> String {
    let mut s = String::from("t,p\n");
    for (t, p) in trace {
        let _ = writeln!(s, "{t:.10e},{p:.10e}");
    }
    s
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.10e}")).unwrap_or_default()
}

pub fn sweep_csv(reports: &[Report]) -> String {
    let mut s = String::from("eta,trace_gap,mass_utilization,theta,actual_peak_power,kkt_residual,status\n");
    for r in reports {
        let status = serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let _ = writeln!(
            s,
            "{:.10e},{},{:.10e},{:.10e},{},{},{}",
            r.eta,
            opt(r.trace_gap),
            r.mass_utilization,
            r.theta,
            opt(r.peak_power),
            opt(r.kkt_residual),
            if r.error.is_some() { "not_carried" } else { &status }
        );
    }
    s
}

/// design.json, report.json, truss.svg and power.csv in `dir`.
pub fn write_bundle(dir: &Path, gs: &GroundStructure, out: &Outcome) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&dir.join("design.json"), &out.design)?;
    write_json(&dir.join("report.json"), &out.report)?;
    fs::write(dir.join("truss.svg"), truss_svg(gs, &out.design))?;
    if let Some(trace) = &out.power {
        fs::write(dir.join("power.csv"), power_csv(trace))?;
    }
    Ok(())
}
