//! Deterministic SVG 1.1 rendering of trace results and graphs. The SVG is
//! presentation-only: it carries no data that is not in the JSON output.

use spag_core::{NGraph, TraceResult};

/// Element to render: a point chain with a class attribute, possibly closed.
struct PathEl {
    class: String,
    points: Vec<[f64; 2]>,
    closed: bool,
}

fn view_box(points: impl Iterator<Item = [f64; 2]>) -> (f64, f64, f64, f64) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut any = false;
    for p in points {
        any = true;
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    if !any {
        return (0.0, 0.0, 1.0, 1.0);
    }
    let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
    // 5% margin on each side; at least a unit for degenerate extents.
    let mx = (0.05 * w).max(0.5);
    let my = (0.05 * h).max(0.5);
    (lo[0] - mx, lo[1] - my, w + 2.0 * mx, h + 2.0 * my)
}

fn render(
    view: (f64, f64, f64, f64),
    paths: &[PathEl],
    circles: &[(String, [f64; 2])],
    lines: &[(String, [f64; 2], [f64; 2])],
) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         viewBox=\"{} {} {} {}\">\n",
        view.0, view.1, view.2, view.3
    ));
    out.push_str(
        "<g fill=\"none\" stroke=\"black\" stroke-width=\"0.15\" \
         stroke-linecap=\"round\" stroke-linejoin=\"round\">\n",
    );
    for (class, a, b) in lines {
        out.push_str(&format!(
            "<line class=\"{}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
            class, a[0], a[1], b[0], b[1]
        ));
    }
    for p in paths {
        let mut d = String::new();
        for (i, q) in p.points.iter().enumerate() {
            d.push_str(&format!(
                "{}{} {}",
                if i == 0 { "M" } else { " L" },
                q[0],
                q[1]
            ));
        }
        if p.closed {
            d.push_str(" Z");
        }
        out.push_str(&format!("<path class=\"{}\" d=\"{}\"/>\n", p.class, d));
    }
    for (class, c) in circles {
        out.push_str(&format!(
            "<circle class=\"{}\" cx=\"{}\" cy=\"{}\" r=\"0.3\"/>\n",
            class, c[0], c[1]
        ));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Render a trace: one path per contour (class `contour-N`), one per
/// segment (class `segment`), one circle per junction (class `junction`).
pub fn trace_svg(result: &TraceResult) -> String {
    let mut paths = Vec::new();
    for (i, s) in result.segments.iter().enumerate() {
        paths.push(PathEl {
            class: format!("segment segment-{i}"),
            points: s.pixels.iter().map(|p| [p[1] as f64, p[0] as f64]).collect(),
            closed: false,
        });
    }
    for (i, obj) in result.layer2.objects.iter().enumerate() {
        let points = obj
            .points2()
            .unwrap_or_default()
            .iter()
            .map(|p| [p[0], p[1]])
            .collect();
        paths.push(PathEl {
            class: format!("contour-{i}"),
            points,
            closed: result.contours.get(i).map_or(false, |c| c.closed),
        });
    }
    let circles: Vec<(String, [f64; 2])> = result
        .junctions
        .iter()
        .map(|j| ("junction".to_string(), [j[1] as f64, j[0] as f64]))
        .collect();
    let view = view_box(
        paths
            .iter()
            .flat_map(|p| p.points.iter().copied())
            .chain(circles.iter().map(|c| c.1)),
    );
    render(view, &paths, &circles, &[])
}

/// Render a graph: one line per edge (class `edge`), one circle per node
/// (class `node`).
pub fn graph_svg(g: &NGraph) -> String {
    let pos: Vec<[f64; 2]> = g
        .nodes()
        .iter()
        .map(|o| o.point2(0).unwrap_or([0.0, 0.0]))
        .collect();
    let lines: Vec<(String, [f64; 2], [f64; 2])> = g
        .edges()
        .iter()
        .map(|e| ("edge".to_string(), pos[e.u], pos[e.v]))
        .collect();
    let circles: Vec<(String, [f64; 2])> = pos
        .iter()
        .map(|&p| ("node".to_string(), p))
        .collect();
    let view = view_box(pos.iter().copied());
    render(view, &[], &circles, &lines)
}
