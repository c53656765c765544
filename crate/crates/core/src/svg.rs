//! Self-contained SVG rendering of a scaled histogram: bars over [0, 1],
//! a reference line at density 1, no external plotting dependency.

use std::fmt::Write;

use crate::stats::Histogram;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;

pub fn histogram_svg(hist: &Histogram, title: &str) -> String {
    let densities = hist.densities();
    let y_max = densities
        .iter()
        .cloned()
        .fold(1.0f64, f64::max)
        .mul_add(1.15, 0.0)
        .max(1.5);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |u: f64| MARGIN_LEFT + u * plot_w;
    let y_of = |d: f64| MARGIN_TOP + (1.0 - d / y_max) * plot_h;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" \
         viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\">\n"
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let _ = write!(
        svg,
        "<text x=\"{:.1}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" \
         text-anchor=\"middle\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        xml_escape(title)
    );

    // Bars.
    let bin_w = plot_w / hist.bins as f64;
    for (i, d) in densities.iter().enumerate() {
        let x = MARGIN_LEFT + i as f64 * bin_w;
        let y = y_of(*d);
        let h = (MARGIN_TOP + plot_h) - y;
        let _ = write!(
            svg,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" \
             fill=\"#4878b0\" stroke=\"white\" stroke-width=\"0.5\"/>\n",
            w = bin_w
        );
    }

    // Reference line at density 1.
    let y_ref = y_of(1.0);
    let _ = write!(
        svg,
        "<line x1=\"{:.2}\" y1=\"{y_ref:.2}\" x2=\"{:.2}\" y2=\"{y_ref:.2}\" \
         stroke=\"#c03030\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n",
        x_of(0.0),
        x_of(1.0)
    );

    // Axes.
    let _ = write!(
        svg,
        "<line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\" stroke=\"black\"/>\n\
         <line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        r = MARGIN_LEFT + plot_w,
        t = MARGIN_TOP,
        b = MARGIN_TOP + plot_h
    );

    // X ticks at 0, 0.25, ..., 1.
    for i in 0..=4 {
        let u = i as f64 / 4.0;
        let x = x_of(u);
        let b = MARGIN_TOP + plot_h;
        let _ = write!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{b:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n\
             <text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\">{u:.2}</text>\n",
            b + 5.0,
            b + 20.0
        );
    }

    // Y ticks at 0, 0.5, ..., y_max rounded down to halves.
    let mut level = 0.0;
    while level <= y_max {
        let y = y_of(level);
        let _ = write!(
            svg,
            "<line x1=\"{tick_x:.2}\" y1=\"{y:.2}\" x2=\"{l:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>\n\
             <text x=\"{label_x:.2}\" y=\"{label_y:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"end\">{level:.1}</text>\n",
            tick_x = MARGIN_LEFT - 5.0,
            l = MARGIN_LEFT,
            label_x = MARGIN_LEFT - 9.0,
            label_y = y + 4.0
        );
        level += 0.5;
    }

    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
