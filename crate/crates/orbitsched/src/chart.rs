//! Minimal standalone SVG bar charts: axes, bars, labels. Enough for the
//! benchmark comparison figures without a plotting dependency.

use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;

/// Render one bar per (label, value) pair and write the SVG to `path`.
pub fn write_bar_chart(path: &Path, title: &str, y_label: &str, bars: &[(String, f64)]) -> Result<()> {
    std::fs::write(path, render_bar_chart(title, y_label, bars)).map_err(|e| Error::io(path, e))
}

pub fn render_bar_chart(title: &str, y_label: &str, bars: &[(String, f64)]) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

    let max = bars.iter().map(|b| b.1).fold(0.0f64, f64::max);
    let min = bars.iter().map(|b| b.1).fold(0.0f64, f64::min);
    let span = (max - min).max(1e-12);
    let scale = plot_h / span;
    let y_of = |v: f64| MARGIN_TOP + (max - v) * scale;

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" \
         transform=\"rotate(-90 18 {})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    ));

    // Axes.
    s.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN_TOP + plot_h
    ));
    s.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{zero}\" x2=\"{}\" y2=\"{zero}\" stroke=\"black\"/>\n",
        MARGIN_LEFT + plot_w,
        zero = y_of(0.0f64.clamp(min, max))
    ));

    // Four y ticks.
    for k in 0..=4 {
        let v = min + span * k as f64 / 4.0;
        let y = y_of(v);
        s.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{MARGIN_LEFT}\" y2=\"{y}\" stroke=\"black\"/>\n",
            MARGIN_LEFT - 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0,
            format_tick(v)
        ));
    }

    // Bars.
    if !bars.is_empty() {
        let slot = plot_w / bars.len() as f64;
        let bar_w = slot * 0.6;
        for (i, (label, value)) in bars.iter().enumerate() {
            let x = MARGIN_LEFT + slot * i as f64 + (slot - bar_w) / 2.0;
            let top = y_of(value.max(0.0));
            let bottom = y_of(value.min(0.0));
            s.push_str(&format!(
                "<rect x=\"{x:.1}\" y=\"{top:.1}\" width=\"{bar_w:.1}\" height=\"{:.1}\" \
                 fill=\"#4878a8\"/>\n",
                (bottom - top).max(0.5)
            ));
            s.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
                x + bar_w / 2.0,
                top - 5.0,
                format_tick(*value)
            ));
            s.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
                x + bar_w / 2.0,
                MARGIN_TOP + plot_h + 18.0,
                escape(label)
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 1000.0 {
        format!("{v:.0}")
    } else if a >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.4}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_svg() {
        let bars = vec![
            ("rule (without)".to_string(), 12.5),
            ("graph (without)".to_string(), 20.0),
            ("bnb (without)".to_string(), 21.0),
        ];
        let svg = render_bar_chart("Total reward", "mean reward", &bars);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<rect").count(), 4); // background + 3 bars
        assert!(svg.contains("rule (without)"));
    }

    #[test]
    fn handles_empty_and_negative_values() {
        let empty = render_bar_chart("t", "y", &[]);
        assert!(empty.contains("</svg>"));
        let neg = render_bar_chart("t", "y", &[("a".into(), -5.0), ("b".into(), 3.0)]);
        assert!(neg.contains("</svg>"));
    }
}
