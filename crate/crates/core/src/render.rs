//! SVG renderings of network states and current maps.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::topology::{Network, NodeId};

const SCALE: f64 = 24.0;
const MARGIN: f64 = 24.0;
const OFF_RGB: (f64, f64, f64) = (200.0, 210.0, 230.0);
const ON_RGB: (f64, f64, f64) = (215.0, 25.0, 28.0);

fn blend(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let c = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        c(OFF_RGB.0, ON_RGB.0),
        c(OFF_RGB.1, ON_RGB.1),
        c(OFF_RGB.2, ON_RGB.2)
    )
}

struct Frame {
    min_x: f64,
    max_y: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(net: &Network) -> Self {
        let xs = net.nodes().iter().map(|n| n.position.x);
        let ys = net.nodes().iter().map(|n| n.position.y);
        let (min_x, max_x) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        let (min_y, max_y) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
        Self {
            min_x,
            max_y,
            width: (max_x - min_x) * SCALE + 2.0 * MARGIN,
            height: (max_y - min_y) * SCALE + 2.0 * MARGIN,
        }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        (MARGIN + (x - self.min_x) * SCALE, MARGIN + (self.max_y - y) * SCALE)
    }
}

fn draw(net: &Network, highlight: &[NodeId], edge_style: impl Fn(usize) -> (String, f64)) -> String {
    let f = Frame::new(net);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.2} {:.2}">"#,
        f.width, f.height, f.width, f.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    // Draw low-intensity edges first so strong ones stay visible.
    let mut order: Vec<(usize, String, f64)> = (0..net.edge_count())
        .map(|k| {
            let (c, w) = edge_style(k);
            (k, c, w)
        })
        .collect();
    order.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
    for (k, color, width) in order {
        let e = &net.edges()[k];
        let a = net.nodes()[e.from.0].position;
        let b = net.nodes()[e.to.0].position;
        let (x1, y1) = f.px(a.x, a.y);
        let (x2, y2) = f.px(b.x, b.y);
        let _ = writeln!(
            s,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{color}" stroke-width="{width:.2}" stroke-linecap="round"/>"#
        );
    }
    for n in net.nodes() {
        let (x, y) = f.px(n.position.x, n.position.y);
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="2.50" fill="#333333"/>"##);
    }
    for &h in highlight {
        if let Some(n) = net.nodes().get(h.0) {
            let (x, y) = f.px(n.position.x, n.position.y);
            let _ = writeln!(
                s,
                r##"<circle cx="{x:.2}" cy="{y:.2}" r="7.00" fill="#ffd700" stroke="#000000" stroke-width="1.00"/>"##
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Edges colored on a continuous scale from the OFF unit resistance to the
/// ON unit resistance; `highlight` nodes drawn as large yellow circles.
pub fn render_network(net: &Network, highlight: &[NodeId]) -> String {
    draw(net, highlight, |k| {
        let u = &net.edges()[k].unit;
        let p = u.params();
        let (off, on) = (p.unit_off_resistance(), p.unit_on_resistance());
        let t = (off - u.resistance()) / (off - on);
        (blend(t), 1.5 + 2.5 * t.clamp(0.0, 1.0))
    })
}

/// Current map: color and width follow `|I| / max |I|`.
pub fn render_currents(net: &Network, currents: &[f64], highlight: &[NodeId]) -> Result<String> {
    if currents.len() != net.edge_count() {
        return Err(Error::InvalidConfig(format!(
            "{} currents for {} edges",
            currents.len(),
            net.edge_count()
        )));
    }
    let peak = currents.iter().fold(0.0f64, |m, i| m.max(i.abs()));
    Ok(draw(net, highlight, |k| {
        let t = if peak > 0.0 { currents[k].abs() / peak } else { 0.0 };
        (blend(t), 1.0 + 4.0 * t)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::DeviceParams;

    #[test]
    fn off_network_is_uniform() {
        let net = Network::grid(3, 3, DeviceParams::default()).unwrap();
        let svg = render_network(&net, &[NodeId(0)]);
        assert_eq!(svg.matches("<line").count(), 12);
        assert_eq!(svg.matches(&blend(0.0)).count(), 12);
        assert_eq!(svg.matches("#ffd700").count(), 1);
    }

    #[test]
    fn on_edge_gets_on_color() {
        let mut net = Network::grid(2, 2, DeviceParams::default()).unwrap();
        net.edges_mut()[0].unit.device_b.x = 10.0;
        let svg = render_network(&net, &[]);
        assert_eq!(svg.matches(&blend(1.0)).count(), 1);
        assert!(render_currents(&net, &[1.0], &[]).is_err());
        let cur = render_currents(&net, &[1.0, 0.5, 0.0, -1.0], &[]).unwrap();
        assert_eq!(cur.matches(&blend(1.0)).count(), 2);
    }
}
