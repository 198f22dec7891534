//! Static SVG plots: PL pieces on the slice simplex, and walk distance
//! against n on log-log axes.

use std::fmt::Write;

use crate::diophantine::walk::Checkpoint;
use crate::lattice_cone::RationalPoint;

const W: f64 = 480.0;
const H: f64 = 420.0;
const PAD: f64 = 40.0;

const FILLS: [&str; 6] = [
    "#8ecae6", "#ffb703", "#90be6d", "#f4978e", "#cdb4db", "#adb5bd",
];

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{PAD}" y="24">{title}</text>"#);
}

/// Barycentric position of a ray on the slice `Σx = 1`.
fn slice(p: &RationalPoint) -> Option<Vec<f64>> {
    let v: Vec<f64> = p.coords().iter().map(crate::arith::to_f64).collect();
    let s: f64 = v.iter().sum();
    (s > 0.0).then(|| v.iter().map(|x| x / s).collect())
}

fn to_screen(b: &[f64]) -> (f64, f64) {
    match b.len() {
        2 => (PAD + b[1] * (W - 2.0 * PAD), H / 2.0),
        _ => {
            // triangle with e1 bottom left, e2 bottom right, e3 on top
            let x = b[1] + 0.5 * b[2];
            let y = b[2] * 3f64.sqrt() / 2.0;
            let scale = W - 2.0 * PAD;
            (PAD + x * scale, H - PAD - y * scale)
        }
    }
}

/// Pieces of a decomposition in rank 2 (segments) or 3 (polygons); `None`
/// in other ranks or when a ray leaves the positive half-space.
pub fn pieces_svg(cones: &[Vec<RationalPoint>]) -> Option<String> {
    let rank = cones.first()?.first()?.dim();
    if !(2..=3).contains(&rank) {
        return None;
    }
    let mut out = String::new();
    header(&mut out, &format!("{} linear pieces", cones.len()));
    for (i, rays) in cones.iter().enumerate() {
        let pts: Vec<(f64, f64)> = rays
            .iter()
            .map(|r| slice(r).map(|b| to_screen(&b)))
            .collect::<Option<_>>()?;
        let fill = FILLS[i % FILLS.len()];
        if rank == 2 {
            let (x0, x1) = pts.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
                (lo.min(p.0), hi.max(p.0))
            });
            let _ = writeln!(
                out,
                r#"<rect x="{x0:.2}" y="{:.2}" width="{:.2}" height="24" fill="{fill}" stroke="black"/>"#,
                H / 2.0 - 12.0,
                x1 - x0
            );
        } else {
            let mut c = centroid_order(pts);
            let first = c.remove(0);
            let mut d = format!("M{:.2},{:.2}", first.0, first.1);
            for p in c {
                let _ = write!(d, " L{:.2},{:.2}", p.0, p.1);
            }
            let _ = writeln!(out, r#"<path d="{d} Z" fill="{fill}" stroke="black"/>"#);
        }
    }
    out.push_str("</svg>\n");
    Some(out)
}

fn centroid_order(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let n = pts.len() as f64;
    let (cx, cy) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    pts.sort_by(|a, b| {
        let ta = (a.1 - cy).atan2(a.0 - cx);
        let tb = (b.1 - cy).atan2(b.0 - cx);
        ta.total_cmp(&tb)
    });
    pts
}

/// `d_n` against `n` on log-log axes.
pub fn walk_svg(checkpoints: &[Checkpoint]) -> Option<String> {
    let pts: Vec<(f64, f64)> = checkpoints
        .iter()
        .filter(|c| c.n > 0 && c.distance > 0.0)
        .map(|c| ((c.n as f64).log10(), c.distance.log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let (x0, x1) = pts
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (y0, y1) = pts
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0).max(1e-9) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0).max(1e-9) * (H - 2.0 * PAD);
    let mut out = String::new();
    header(&mut out, "walk distance d_n (log-log)");
    let _ = writeln!(
        out,
        r#"<path d="M{PAD},{PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let mut d = String::new();
    for (i, (x, y)) in pts.iter().enumerate() {
        let _ = write!(
            d,
            "{}{:.2},{:.2}",
            if i == 0 { "M" } else { " L" },
            sx(*x),
            sy(*y)
        );
    }
    let _ = writeln!(
        out,
        r##"<path d="{d}" fill="none" stroke="#1d3557" stroke-width="1.5"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="{}">n = 10^{x0:.1} .. 10^{x1:.1}</text>"#,
        H - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}">d from 10^{y0:.2} to 10^{y1:.2}</text>"#,
        W / 2.0,
        H - 12.0
    );
    out.push_str("</svg>\n");
    Some(out)
}
