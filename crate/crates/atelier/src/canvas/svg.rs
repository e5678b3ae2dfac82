//! Deterministic SVG 1.1 serialization.
//!
//! Equal scenes serialize to identical bytes: coordinates are printed
//! with exactly three decimal places (negative zero normalized away),
//! attribute order is fixed, and metadata is embedded as sorted-key JSON
//! in a `desc` element. Physical units are millimetres.

use super::{
    CanvasError, Ellipse, Group, Path, PathSeg, Polyline, Primitive, Scene, Style, Text,
    TextAnchor,
};
use crate::mapping::hex_color;

/// Fixed three-decimal coordinate format; `-0.000` becomes `0.000`.
fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

/// Document dimensions keep up to three decimals but drop trailing zeros,
/// so integral sizes read as plain integers in viewBox and width/height.
fn fmt_dim(v: f64) -> String {
    let s = format!("{v:.3}");
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn attr_escape(s: &str) -> String {
    xml_escape(s).replace('"', "&quot;")
}

fn style_attrs(style: &Style, default_fill_none: bool) -> String {
    let mut out = String::new();
    match style.fill {
        Some(c) => out.push_str(&format!(" fill=\"{}\"", hex_color(c))),
        None if default_fill_none => out.push_str(" fill=\"none\""),
        None => {}
    }
    if let Some(stroke) = &style.stroke {
        out.push_str(&format!(
            " stroke=\"{}\" stroke-width=\"{}\" stroke-linecap=\"round\" stroke-linejoin=\"round\"",
            hex_color(stroke.color),
            fmt3(stroke.width)
        ));
    }
    out
}

/// Serialize a scene to a standalone SVG 1.1 document.
pub fn to_svg(scene: &Scene) -> Result<Vec<u8>, CanvasError> {
    scene.validate()?;
    // The root group is emitted implicitly as the svg element's children;
    // a transform or class there would be silently dropped.
    if !scene.root.transform.is_identity() || scene.root.class.is_some() {
        return Err(CanvasError::InvalidScene(
            "root group must carry no transform or class".into(),
        ));
    }
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}mm\" height=\"{h}mm\" viewBox=\"0 0 {w} {h}\">\n",
        w = fmt_dim(scene.width),
        h = fmt_dim(scene.height),
    ));
    let desc = serde_json::json!({
        "title": scene.metadata.title,
        "author": scene.metadata.author,
        "seed": scene.metadata.seed,
        "generator_version": env!("CARGO_PKG_VERSION"),
    });
    out.push_str(&format!("  <desc>{}</desc>\n", xml_escape(&desc.to_string())));
    for child in &scene.root.children {
        write_primitive(&mut out, child, 1);
    }
    out.push_str("</svg>\n");
    Ok(out.into_bytes())
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_primitive(out: &mut String, p: &Primitive, depth: usize) {
    match p {
        Primitive::Path(path) => write_path(out, path, depth),
        Primitive::Ellipse(e) => write_ellipse(out, e, depth),
        Primitive::Polyline(pl) => write_polyline(out, pl, depth),
        Primitive::Text(t) => write_text(out, t, depth),
        Primitive::Group(g) => write_group(out, g, depth),
    }
}

fn write_path(out: &mut String, path: &Path, depth: usize) {
    indent(out, depth);
    let mut d = String::new();
    for (i, seg) in path.segments.iter().enumerate() {
        if i > 0 {
            d.push(' ');
        }
        match seg {
            PathSeg::MoveTo(p) => d.push_str(&format!("M {} {}", fmt3(p.x), fmt3(p.y))),
            PathSeg::LineTo(p) => d.push_str(&format!("L {} {}", fmt3(p.x), fmt3(p.y))),
            PathSeg::QuadTo(c, p) => d.push_str(&format!(
                "Q {} {} {} {}",
                fmt3(c.x),
                fmt3(c.y),
                fmt3(p.x),
                fmt3(p.y)
            )),
            PathSeg::CubicTo(c1, c2, p) => d.push_str(&format!(
                "C {} {} {} {} {} {}",
                fmt3(c1.x),
                fmt3(c1.y),
                fmt3(c2.x),
                fmt3(c2.y),
                fmt3(p.x),
                fmt3(p.y)
            )),
        }
    }
    out.push_str(&format!(
        "<path d=\"{d}\"{}/>\n",
        style_attrs(&path.style, true)
    ));
}

fn write_ellipse(out: &mut String, e: &Ellipse, depth: usize) {
    indent(out, depth);
    if e.rx == e.ry {
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"{}/>\n",
            fmt3(e.cx),
            fmt3(e.cy),
            fmt3(e.rx),
            style_attrs(&e.style, true)
        ));
    } else {
        out.push_str(&format!(
            "<ellipse cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\"{}/>\n",
            fmt3(e.cx),
            fmt3(e.cy),
            fmt3(e.rx),
            fmt3(e.ry),
            style_attrs(&e.style, true)
        ));
    }
}

fn write_polyline(out: &mut String, pl: &Polyline, depth: usize) {
    indent(out, depth);
    let points: Vec<String> = pl
        .points
        .iter()
        .map(|p| format!("{},{}", fmt3(p.x), fmt3(p.y)))
        .collect();
    out.push_str(&format!(
        "<polyline points=\"{}\"{}/>\n",
        points.join(" "),
        style_attrs(&pl.style, true)
    ));
}

fn write_text(out: &mut String, t: &Text, depth: usize) {
    indent(out, depth);
    let anchor = match t.anchor {
        TextAnchor::Start => "",
        TextAnchor::Middle => " text-anchor=\"middle\"",
        TextAnchor::End => " text-anchor=\"end\"",
    };
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"{}\" font-family=\"sans-serif\"{anchor} fill=\"{}\">{}</text>\n",
        fmt3(t.x),
        fmt3(t.y),
        fmt3(t.size),
        hex_color(t.fill),
        xml_escape(&t.content)
    ));
}

fn write_group(out: &mut String, g: &Group, depth: usize) {
    indent(out, depth);
    out.push_str("<g");
    if let Some(class) = &g.class {
        out.push_str(&format!(" class=\"{}\"", attr_escape(class)));
    }
    if !g.transform.is_identity() {
        // SVG matrix() column order: x' = a·x + c·y + e, y' = b·x + d·y + f.
        let t = &g.transform;
        out.push_str(&format!(
            " transform=\"matrix({},{},{},{},{},{})\"",
            fmt3(t.a),
            fmt3(t.c),
            fmt3(t.b),
            fmt3(t.d),
            fmt3(t.e),
            fmt3(t.f)
        ));
    }
    out.push_str(">\n");
    for child in &g.children {
        write_primitive(out, child, depth + 1);
    }
    indent(out, depth);
    out.push_str("</g>\n");
}

#[cfg(test)]
mod tests {
    use super::super::{Affine, Point, SceneMetadata, Style};
    use super::*;

    #[test]
    fn empty_scene_document() {
        let scene = Scene::new(100.0, 100.0, SceneMetadata::default());
        let svg = String::from_utf8(to_svg(&scene).unwrap()).unwrap();
        assert!(svg.contains("viewBox=\"0 0 100 100\""));
        assert!(svg.contains("width=\"100mm\""));
        assert!(!svg.contains("<circle"));
        assert!(!svg.contains("<path"));
    }

    #[test]
    fn circle_formatting() {
        let mut scene = Scene::new(100.0, 100.0, SceneMetadata::default());
        scene.root.push(Primitive::Ellipse(Ellipse {
            cx: 50.0,
            cy: 50.0,
            rx: 10.0,
            ry: 10.0,
            style: Style::filled([255, 0, 0]),
        }));
        let svg = String::from_utf8(to_svg(&scene).unwrap()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("cx=\"50.000\""));
        assert!(svg.contains("r=\"10.000\""));
        assert!(svg.contains("fill=\"#FF0000\""));
    }

    #[test]
    fn unequal_radii_emit_ellipse() {
        let mut scene = Scene::new(100.0, 100.0, SceneMetadata::default());
        scene.root.push(Primitive::Ellipse(Ellipse {
            cx: 1.0,
            cy: 2.0,
            rx: 3.0,
            ry: 4.0,
            style: Style::default(),
        }));
        let svg = String::from_utf8(to_svg(&scene).unwrap()).unwrap();
        assert!(svg.contains("<ellipse"));
        assert!(!svg.contains("<circle"));
    }

    #[test]
    fn negative_zero_normalized() {
        assert_eq!(fmt3(-0.0), "0.000");
        assert_eq!(fmt3(-0.0001), "0.000");
        assert_eq!(fmt3(-0.001), "-0.001");
    }

    #[test]
    fn byte_determinism() {
        let build = || {
            let mut scene = Scene::new(50.0, 20.0, SceneMetadata {
                title: "t".into(),
                author: "a".into(),
                seed: 9,
            });
            scene.root.push(Primitive::Polyline(Polyline {
                points: vec![Point::new(0.0, 0.0), Point::new(10.0, 10.0)],
                style: Style::stroked([0, 0, 0], 0.5),
            }));
            scene
        };
        assert_eq!(to_svg(&build()).unwrap(), to_svg(&build()).unwrap());
    }

    #[test]
    fn desc_carries_metadata_json() {
        let scene = Scene::new(10.0, 10.0, SceneMetadata {
            title: "Faces <&>".into(),
            author: "me".into(),
            seed: 42,
        });
        let svg = String::from_utf8(to_svg(&scene).unwrap()).unwrap();
        assert!(svg.contains("<desc>"));
        assert!(svg.contains("\"seed\":42"));
        assert!(svg.contains("&lt;&amp;&gt;"));
        assert!(svg.contains("\"generator_version\""));
    }

    #[test]
    fn group_transform_matrix_order() {
        let mut scene = Scene::new(10.0, 10.0, SceneMetadata::default());
        let mut g = Group::with_class("face");
        g.transform = Affine::translate(3.0, 4.0);
        g.push(Primitive::Text(Text {
            x: 0.0,
            y: 0.0,
            content: "x".into(),
            size: 1.0,
            anchor: TextAnchor::Middle,
            fill: [0, 0, 0],
        }));
        scene.root.push(Primitive::Group(g));
        let svg = String::from_utf8(to_svg(&scene).unwrap()).unwrap();
        assert!(svg.contains("class=\"face\""));
        assert!(svg.contains("transform=\"matrix(1.000,0.000,0.000,1.000,3.000,4.000)\""));
    }
}
