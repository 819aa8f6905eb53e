//! Dependency-free SVG scatter plots: one cell's 2-D points, its centroid,
//! and the mean centroid-distance annotation.

/// Renders a fixed-size scatter. Coordinates are fit into the frame with a
/// shared scale for both axes so distances stay comparable.
pub fn scatter_svg(points: &[(f64, f64)], centroid: (f64, f64), annotation: &str, title: &str) -> String {
    const W: f64 = 480.0;
    const H: f64 = 400.0;
    const MARGIN: f64 = 36.0;

    let (mut min_x, mut max_x, mut min_y, mut max_y) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points.iter().chain(std::iter::once(&centroid)) {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    let span_x = (max_x - min_x).max(1e-9);
    let span_y = (max_y - min_y).max(1e-9);
    let scale = ((W - 2.0 * MARGIN) / span_x).min((H - 2.0 * MARGIN) / span_y);
    let px = |x: f64| MARGIN + (x - min_x) * scale;
    // SVG y grows downward.
    let py = |y: f64| H - MARGIN - (y - min_y) * scale;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    ));
    for &(x, y) in points {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#4477aa\" fill-opacity=\"0.6\"/>\n",
            px(x),
            py(y)
        ));
    }
    svg.push_str(&format!(
        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"#cc3311\"/>\n",
        px(centroid.0),
        py(centroid.1)
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"end\">{annotation}</text>\n",
        W - 12.0,
        H - 12.0
    ));
    svg.push_str("</svg>\n");
    svg
}
