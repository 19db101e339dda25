//! Hand-written SVG for the confusion heatmap and the ROC curve.

use std::fmt::Write;

use sarcbench_core::eval::{ConfusionMatrix2, RocCurve};

/// Sequential blue scale, light to dark, at evenly spaced stops.
const BLUES: [(u8, u8, u8); 9] = [
    (0xf7, 0xfb, 0xff),
    (0xde, 0xeb, 0xf7),
    (0xc6, 0xdb, 0xef),
    (0x9e, 0xca, 0xe1),
    (0x6b, 0xae, 0xd6),
    (0x42, 0x92, 0xc6),
    (0x21, 0x71, 0xb5),
    (0x08, 0x51, 0x9c),
    (0x08, 0x30, 0x6b),
];

const FONT: &str = "font-family=\"DejaVu Sans, Arial, sans-serif\"";

pub fn blues(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let pos = t * (BLUES.len() - 1) as f64;
    let i = (pos.floor() as usize).min(BLUES.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (BLUES[i], BLUES[i + 1]);
    let mix = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const CELL: f64 = 150.0;
const GRID_X: f64 = 110.0;
const GRID_Y: f64 = 60.0;

/// 2x2 heatmap with true labels on rows and predicted labels on columns.
pub fn confusion_svg(cm: &ConfusionMatrix2, title: &str) -> String {
    let rows = cm.as_rows();
    let max = cm.max_cell();
    let min = rows.iter().flatten().copied().min().unwrap_or(0);
    let span = (max - min) as f64;
    let (w, h) = (560.0, 470.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"35\" text-anchor=\"middle\" font-size=\"18\" {FONT}>{}</text>",
        GRID_X + CELL,
        escape(title)
    );

    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let x = GRID_X + c as f64 * CELL;
            let y = GRID_Y + r as f64 * CELL;
            let t = if span > 0.0 { (v - min) as f64 / span } else { 0.0 };
            let text_fill = if v as f64 > max as f64 / 2.0 { "white" } else { "black" };
            let _ = writeln!(
                s,
                "<rect class=\"cell\" data-row=\"{r}\" data-col=\"{c}\" x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{}\"/>",
                blues(t)
            );
            let _ = writeln!(
                s,
                "<text class=\"count\" data-row=\"{r}\" data-col=\"{c}\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" dominant-baseline=\"central\" font-size=\"20\" fill=\"{text_fill}\" {FONT}>{v}</text>",
                x + CELL / 2.0,
                y + CELL / 2.0
            );
        }
    }
    let grid_bottom = GRID_Y + 2.0 * CELL;
    for i in 0..2 {
        let mid = i as f64 * CELL + CELL / 2.0;
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" {FONT}>{i}</text>",
            GRID_X + mid,
            grid_bottom + 22.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" dominant-baseline=\"central\" font-size=\"14\" {FONT}>{i}</text>",
            GRID_X - 10.0,
            GRID_Y + mid
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"15\" {FONT}>Predicted label</text>",
        GRID_X + CELL,
        grid_bottom + 50.0
    );
    let _ = writeln!(
        s,
        "<text x=\"0\" y=\"0\" transform=\"translate(45 {}) rotate(-90)\" text-anchor=\"middle\" font-size=\"15\" {FONT}>True label</text>",
        GRID_Y + CELL
    );

    // colour bar, darkest at the top
    let bar_x = GRID_X + 2.0 * CELL + 30.0;
    let _ = writeln!(
        s,
        "<defs><linearGradient id=\"blues\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
    );
    for (i, _) in BLUES.iter().enumerate() {
        let t = i as f64 / (BLUES.len() - 1) as f64;
        let _ = writeln!(s, "<stop offset=\"{t:.3}\" stop-color=\"{}\"/>", blues(t));
    }
    let _ = writeln!(s, "</linearGradient></defs>");
    let _ = writeln!(
        s,
        "<rect x=\"{bar_x}\" y=\"{GRID_Y}\" width=\"20\" height=\"{}\" fill=\"url(#blues)\" stroke=\"#444\" stroke-width=\"0.5\"/>",
        2.0 * CELL
    );
    for (label, y) in [(max, GRID_Y), (min, grid_bottom)] {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{y}\" dominant-baseline=\"central\" font-size=\"12\" {FONT}>{label}</text>",
            bar_x + 26.0
        );
    }
    s.push_str("</svg>\n");
    s
}

const ROC_LEFT: f64 = 80.0;
const ROC_TOP: f64 = 50.0;
const ROC_SIZE: f64 = 380.0;

/// Maps a `(false positive rate, true positive rate)` pair to SVG
/// coordinates inside the ROC plot area.
pub fn roc_to_pixel(fpr: f64, tpr: f64) -> (f64, f64) {
    (ROC_LEFT + fpr * ROC_SIZE, ROC_TOP + (1.0 - tpr) * ROC_SIZE)
}

pub fn roc_svg(roc: &RocCurve, model_name: &str) -> String {
    let (w, h) = (ROC_LEFT + ROC_SIZE + 40.0, ROC_TOP + ROC_SIZE + 70.0);
    let bottom = ROC_TOP + ROC_SIZE;
    let right = ROC_LEFT + ROC_SIZE;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-size=\"18\" {FONT}>ROC Curve ({})</text>",
        ROC_LEFT + ROC_SIZE / 2.0,
        escape(model_name)
    );

    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let (x, _) = roc_to_pixel(v, 0.0);
        let (_, y) = roc_to_pixel(0.0, v);
        let _ = writeln!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{bottom}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#333\"/>",
            bottom + 5.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" {FONT}>{v:.1}</text>",
            bottom + 20.0
        );
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{ROC_LEFT}\" y2=\"{y:.2}\" stroke=\"#333\"/>",
            ROC_LEFT - 5.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{y:.2}\" text-anchor=\"end\" dominant-baseline=\"central\" font-size=\"12\" {FONT}>{v:.1}</text>",
            ROC_LEFT - 9.0
        );
    }
    let _ = writeln!(
        s,
        "<rect x=\"{ROC_LEFT}\" y=\"{ROC_TOP}\" width=\"{ROC_SIZE}\" height=\"{ROC_SIZE}\" fill=\"none\" stroke=\"#333\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" {FONT}>False Positive Rate</text>",
        ROC_LEFT + ROC_SIZE / 2.0,
        bottom + 45.0
    );
    let _ = writeln!(
        s,
        "<text x=\"0\" y=\"0\" transform=\"translate(30 {}) rotate(-90)\" text-anchor=\"middle\" font-size=\"14\" {FONT}>True Positive Rate</text>",
        ROC_TOP + ROC_SIZE / 2.0
    );

    let _ = writeln!(
        s,
        "<line class=\"baseline\" x1=\"{ROC_LEFT}\" y1=\"{bottom}\" x2=\"{right}\" y2=\"{ROC_TOP}\" stroke=\"#888\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>"
    );
    let mut points = String::new();
    for (i, &(fpr, tpr)) in roc.points.iter().enumerate() {
        let (x, y) = roc_to_pixel(fpr, tpr);
        if i > 0 {
            points.push(' ');
        }
        let _ = write!(points, "{x:.2},{y:.2}");
    }
    let _ = writeln!(
        s,
        "<polyline class=\"roc\" points=\"{points}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>"
    );

    let lx = right - 200.0;
    let ly = bottom - 58.0;
    let _ = writeln!(
        s,
        "<rect x=\"{lx}\" y=\"{ly}\" width=\"190\" height=\"48\" fill=\"white\" stroke=\"#ccc\"/>"
    );
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#1f77b4\" stroke-width=\"2\"/>",
        lx + 8.0,
        ly + 15.0,
        lx + 32.0,
        ly + 15.0
    );
    let _ = writeln!(
        s,
        "<text class=\"legend\" x=\"{}\" y=\"{}\" dominant-baseline=\"central\" font-size=\"12\" {FONT}>{} (AUC = {:.3})</text>",
        lx + 38.0,
        ly + 15.0,
        escape(model_name),
        roc.auc
    );
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>",
        lx + 8.0,
        ly + 34.0,
        lx + 32.0,
        ly + 34.0
    );
    let _ = writeln!(
        s,
        "<text class=\"legend\" x=\"{}\" y=\"{}\" dominant-baseline=\"central\" font-size=\"12\" {FONT}>Random baseline</text>",
        lx + 38.0,
        ly + 34.0
    );
    s.push_str("</svg>\n");
    s
}
