//! Dependency-free SVG emission: heatmaps for contraction surfaces and
//! log-scale polyline plots for iteration traces. Output is fully
//! deterministic (fixed canvas, fixed palette, fixed number formatting).

const WIDTH: usize = 800;
const HEIGHT: usize = 600;
const MARGIN: usize = 60;

/// 16-step viridis-like palette, dark-to-bright.
const PALETTE: [&str; 16] = [
    "#440154", "#481467", "#482576", "#453781", "#404688", "#39558c", "#33638d", "#2d718e",
    "#287d8e", "#238a8d", "#1f968b", "#20a386", "#29af7f", "#3dbc74", "#56c667", "#94d840",
];

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

/// Heatmap of `values[row][col]` (row = y axis, col = x axis) with cells at
/// or above `contour_at` hatched to mark the non-contractive region.
pub fn heatmap(
    title: &str,
    x_label: &str,
    y_label: &str,
    x_vals: &[f64],
    y_vals: &[f64],
    values: &[Vec<f64>],
    contour_at: f64,
) -> String {
    let cols = x_vals.len();
    let rows = y_vals.len();
    let plot_w = WIDTH - 2 * MARGIN;
    let plot_h = HEIGHT - 2 * MARGIN;
    let cw = plot_w as f64 / cols as f64;
    let ch = plot_h as f64 / rows as f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in values {
        for v in row {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    let span = (hi - lo).max(1e-12);
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    s.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n<text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"16\">{title}</text>\n",
        WIDTH / 2
    ));
    for (r, row) in values.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let idx = (((v - lo) / span) * 15.0).round().clamp(0.0, 15.0) as usize;
            let x = MARGIN as f64 + c as f64 * cw;
            // row 0 at the bottom
            let y = MARGIN as f64 + (rows - 1 - r) as f64 * ch;
            s.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                fmt(x),
                fmt(y),
                fmt(cw),
                fmt(ch),
                PALETTE[idx]
            ));
            if *v >= contour_at {
                s.push_str(&format!(
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"white\" stroke-width=\"1\"/>\n",
                    fmt(x),
                    fmt(y),
                    fmt(x + cw),
                    fmt(y + ch)
                ));
            }
        }
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">{x_label} [{} .. {}]</text>\n",
        WIDTH / 2,
        HEIGHT - 20,
        fmt(x_vals[0]),
        fmt(x_vals[cols - 1])
    ));
    s.push_str(&format!(
        "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\" transform=\"rotate(-90 20 {})\">{y_label} [{} .. {}]</text>\n",
        HEIGHT / 2,
        HEIGHT / 2,
        fmt(y_vals[0]),
        fmt(y_vals[rows - 1])
    ));
    s.push_str("</svg>\n");
    s
}

/// Polyline plot of one positive series, optionally on a log10 vertical
/// scale (values clamped at 1e-16).
pub fn line_plot(title: &str, series: &[f64], log_scale: bool) -> String {
    let n = series.len().max(2);
    let ys: Vec<f64> = series
        .iter()
        .map(|v| if log_scale { v.max(1e-16).log10() } else { *v })
        .collect();
    let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    let plot_w = (WIDTH - 2 * MARGIN) as f64;
    let plot_h = (HEIGHT - 2 * MARGIN) as f64;
    let pts: Vec<String> = ys
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let px = MARGIN as f64 + plot_w * i as f64 / (n - 1) as f64;
            let py = MARGIN as f64 + plot_h * (1.0 - (y - lo) / span);
            format!("{},{}", fmt(px), fmt(py))
        })
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n<text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"16\">{title}</text>\n<polyline fill=\"none\" stroke=\"#33638d\" stroke-width=\"1.5\" points=\"{}\"/>\n</svg>\n",
        WIDTH / 2,
        pts.join(" ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_is_deterministic_and_wellformed() {
        let x = [0.1, 0.5, 1.0];
        let y = [1.0, 5.0];
        let v = vec![vec![0.2, 0.9, 1.4], vec![0.1, 0.3, 0.8]];
        let a = heatmap("t", "ratio", "L_g", &x, &y, &v, 1.0);
        let b = heatmap("t", "ratio", "L_g", &x, &y, &v, 1.0);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<rect").count(), 7); // background + 6 cells
        assert_eq!(a.matches("<line").count(), 1); // one cell >= contour
    }

    #[test]
    fn line_plot_handles_log_scale() {
        let s = line_plot("residual", &[1.0, 0.1, 0.01, 0.0], true);
        assert!(s.contains("polyline"));
    }
}
