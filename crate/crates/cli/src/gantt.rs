//! Static SVG Gantt charts: one lane per processor, one rectangle per
//! piece, speed encoded as fill opacity. Output is byte-deterministic for
//! a fixed schedule.

use std::io;
use std::path::Path;

use espeed_core::{Instance, Schedule};

const LANE_H: f64 = 28.0;
const LANE_GAP: f64 = 6.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 14.0;
const PLOT_W: f64 = 880.0;
const CAPTION_H: f64 = 34.0;

fn fmt(x: f64) -> String {
    format!("{x:.3}")
}

fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Renders the schedule as a standalone SVG document.
pub fn render_svg(sched: &Schedule, inst: &Instance) -> String {
    let makespan = sched.makespan().max(1e-12);
    let scale = PLOT_W / makespan;
    let height = TOP + inst.m as f64 * (LANE_H + LANE_GAP) + CAPTION_H;
    let width = LEFT + PLOT_W + RIGHT;

    let max_speed = sched
        .pieces()
        .iter()
        .map(|p| p.speed)
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let energy: f64 = sched
        .pieces()
        .iter()
        .map(|p| p.procs.len() as f64 * p.len() * p.speed.powf(inst.alpha.get()))
        .sum();

    let mut rects: Vec<(usize, f64, f64, u64, f64)> = Vec::new();
    for p in sched.pieces() {
        for &proc in &p.procs {
            rects.push((proc, p.start, p.end, p.job, p.speed));
        }
    }
    rects.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.3.cmp(&b.3))
    });

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\" font-family=\"monospace\">\n",
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");

    for proc in 0..inst.m {
        let y = TOP + proc as f64 * (LANE_H + LANE_GAP);
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#333\">P{}</text>\n",
            fmt(8.0),
            fmt(y + LANE_H / 2.0 + 4.0),
            proc
        ));
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#f2f2f2\"/>\n",
            fmt(LEFT),
            fmt(y),
            fmt(PLOT_W),
            fmt(LANE_H)
        ));
    }

    for (proc, start, end, job, speed) in rects {
        let x = LEFT + start * scale;
        let w = (end - start) * scale;
        let y = TOP + proc as f64 * (LANE_H + LANE_GAP);
        let hue = (job * 47) % 360;
        let opacity = 0.35 + 0.6 * (speed / max_speed);
        let opacity = format!("{opacity:.4}");
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"hsl({hue},70%,45%)\" \
             fill-opacity=\"{opacity}\" stroke=\"#333\" stroke-width=\"0.5\"/>\n",
            fmt(x),
            fmt(y),
            fmt(w),
            fmt(LANE_H),
        ));
        if w >= 18.0 {
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"#000\">{}</text>\n",
                fmt(x + 3.0),
                fmt(y + LANE_H / 2.0 + 3.5),
                job
            ));
        }
    }

    let caption_y = TOP + inst.m as f64 * (LANE_H + LANE_GAP) + 18.0;
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#333\">sum C = {}  energy = {} / {}</text>\n",
        fmt(LEFT),
        fmt(caption_y),
        sig9(espeed_core::model::total_completion(sched)),
        sig9(energy),
        sig9(inst.energy)
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Writes the SVG to a file.
pub fn emit_gantt(sched: &Schedule, inst: &Instance, path: &Path) -> io::Result<()> {
    std::fs::write(path, render_svg(sched, inst))
}
