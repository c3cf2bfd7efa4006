//! SVG scatter of eigenvalues over the `2n + β_k` lattice.

use std::fmt::Write;

use pencil_graph::spectral::Spectrum;

const W: f64 = 960.0;
const H: f64 = 320.0;
const PAD: f64 = 30.0;

pub fn spectrum_svg(spectrum: &Spectrum, lattice: &[f64]) -> String {
    let w = &spectrum.window;
    let sx = |x: f64| PAD + (x - w.re_min) / w.width().max(1e-12) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - w.im_min) / w.height().max(1e-12) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999"/>"##,
        sx(w.re_min),
        sy(0.0),
        sx(w.re_max),
        sy(0.0)
    );
    for &x in lattice {
        let _ = writeln!(
            s,
            r##"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="#4a7" stroke-width="1"/>"##,
            sx(x),
            sy(0.0) - 6.0,
            sy(0.0) + 6.0
        );
    }
    for e in &spectrum.entries {
        let r = if e.multiplicity > 1 { 4.5 } else { 3.0 };
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="none" stroke="#c33"/>"##,
            sx(e.lambda.re),
            sy(e.lambda.im)
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{PAD}" y="{:.0}" font-size="12" font-family="sans-serif">Re λ ∈ [{:.3}, {:.3}], Im λ ∈ [{:.3}, {:.3}]; circles: eigenvalues, ticks: 2n + β</text>"##,
        H - 8.0,
        w.re_min,
        w.re_max,
        w.im_min,
        w.im_max
    );
    s.push_str("</svg>\n");
    s
}
