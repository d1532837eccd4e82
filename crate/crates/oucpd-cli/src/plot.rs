//! Static SVG plots: the series with change-point markers, and histograms
//! of Monte-Carlo estimates. No display server or rendering library
//! involved; the files are plain SVG text.

use std::path::Path;

use oucpd::TimeSeries;

use crate::error::{CliError, Result};

const W: f64 = 900.0;
const H: f64 = 420.0;
const MARGIN: f64 = 55.0;

fn svg_header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    )
}

fn axis_box(min_x: f64, max_x: f64, min_y: f64, max_y: f64, title: &str) -> String {
    let x0 = MARGIN;
    let y0 = H - MARGIN;
    let x1 = W - MARGIN;
    let y1 = MARGIN;
    format!(
        "<rect x=\"{x0}\" y=\"{y1}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n\
         <text x=\"{x0}\" y=\"{}\" font-size=\"12\">{min_x:.4}</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{max_x:.4}</text>\n\
         <text x=\"{}\" y=\"{y0}\" font-size=\"12\" text-anchor=\"end\">{min_y:.4}</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{max_y:.4}</text>\n\
         <text x=\"{}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n",
        x1 - x0,
        y0 - y1,
        y0 + 20.0,
        x1,
        y0 + 20.0,
        x0 - 5.0,
        x0 - 5.0,
        y1 + 4.0,
        W / 2.0,
    )
}

fn to_px(x: f64, min_x: f64, max_x: f64, y: f64, min_y: f64, max_y: f64) -> (f64, f64) {
    let sx = (x - min_x) / (max_x - min_x).max(1e-300);
    let sy = (y - min_y) / (max_y - min_y).max(1e-300);
    (
        MARGIN + sx * (W - 2.0 * MARGIN),
        H - MARGIN - sy * (H - 2.0 * MARGIN),
    )
}

/// Series polyline with dashed vertical markers at the change times.
pub fn plot_series(path: &Path, series: &TimeSeries, change_times: &[f64]) -> Result<()> {
    let values = series.values();
    let t_max = series.horizon();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let mut svg = svg_header();
    svg.push_str(&axis_box(0.0, t_max, lo, hi, "series with change points"));
    // Subsample long series to at most ~4000 line segments.
    let step = (values.len() / 4000).max(1);
    let mut points = String::new();
    for (i, &v) in values.iter().enumerate().step_by(step) {
        let (px, py) = to_px(series.time_at(i), 0.0, t_max, v, lo, hi);
        points.push_str(&format!("{px:.2},{py:.2} "));
    }
    svg.push_str(&format!(
        "<polyline points=\"{points}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\"/>\n"
    ));
    for &tc in change_times {
        let (px, _) = to_px(tc, 0.0, t_max, lo, lo, hi);
        svg.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"crimson\" \
             stroke-width=\"1.5\" stroke-dasharray=\"6 3\"/>\n\
             <text x=\"{:.2}\" y=\"{}\" font-size=\"11\" fill=\"crimson\">t={tc:.3}</text>\n",
            MARGIN,
            H - MARGIN,
            px + 3.0,
            MARGIN + 14.0,
        ));
    }
    svg.push_str("</svg>\n");
    write_svg(path, &svg)
}

/// Histogram of Monte-Carlo estimates with the true value marked.
pub fn plot_histogram(path: &Path, samples: &[f64], true_value: f64, title: &str) -> Result<()> {
    if samples.is_empty() {
        return Err(CliError::Data("no samples to plot".to_owned()));
    }
    let mut lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    lo = lo.min(true_value);
    hi = hi.max(true_value);
    let pad = (hi - lo).max(1e-6) * 0.08;
    lo -= pad;
    hi += pad;
    let bins = 40usize;
    let mut counts = vec![0usize; bins];
    for &s in samples {
        let b = (((s - lo) / (hi - lo)) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let peak = *counts.iter().max().unwrap() as f64;
    let mut svg = svg_header();
    svg.push_str(&axis_box(lo, hi, 0.0, peak, title));
    let bar_w = (W - 2.0 * MARGIN) / bins as f64;
    for (b, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let height = c as f64 / peak * (H - 2.0 * MARGIN);
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"steelblue\" stroke=\"white\"/>\n",
            MARGIN + b as f64 * bar_w,
            H - MARGIN - height,
            bar_w,
            height,
        ));
    }
    let (px, _) = to_px(true_value, lo, hi, 0.0, 0.0, 1.0);
    svg.push_str(&format!(
        "<line x1=\"{px:.2}\" y1=\"{}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"crimson\" \
         stroke-width=\"1.5\" stroke-dasharray=\"6 3\"/>\n",
        MARGIN,
        H - MARGIN,
    ));
    svg.push_str("</svg>\n");
    write_svg(path, &svg)
}

fn write_svg(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent()
        && !parent.as_os_str().is_empty()
        && !parent.exists()
    {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_plot_contains_markers() {
        let series = TimeSeries::new(0.1, (0..50).map(|i| (i as f64).sin()).collect()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plots").join("series.svg");
        plot_series(&path, &series, &[1.5, 3.2]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("stroke=\"crimson\"").count(), 2);
        assert!(text.contains("<polyline"));
    }

    #[test]
    fn histogram_renders_bars_and_marker() {
        let samples: Vec<f64> = (0..200).map(|i| 0.3 + 0.001 * (i % 40) as f64).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hist.svg");
        plot_histogram(&path, &samples, 0.32, "s1").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("<rect"));
        assert!(text.contains("crimson"));
    }

    #[test]
    fn empty_output_errors() {
        assert!(plot_histogram(Path::new("/nonexistent-dir-xyz/h.svg"), &[], 0.0, "t").is_err());
    }
}
