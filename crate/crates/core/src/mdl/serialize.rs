use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::error::AnnotationRefError;
use super::model::{MapDocument, MdlAnnotation};
use super::parse::COORDINATE_DECIMALS;
use super::xml::escape_attr;
use crate::geo::Vec2;

/// Writes the canonical MDL text for a map and its annotations.
///
/// Element order is scale regions, landmarks, flows, annotations; each group
/// is sorted by id (annotations by robot id) and attributes appear in a fixed
/// order. Coordinates use seven decimals; other numbers use the shortest
/// representation that reads back to the same value.
pub fn serialize_mdl(doc: &MapDocument, annotations: &[MdlAnnotation]) -> Result<String, AnnotationRefError> {
    for a in annotations {
        check_annotation_refs(doc, a)?;
    }
    let mut regions: Vec<_> = doc.scale_regions.iter().collect();
    regions.sort_by(|a, b| a.id.cmp(&b.id));
    let mut landmarks: Vec<_> = doc.landmarks.iter().collect();
    landmarks.sort_by(|a, b| a.id.cmp(&b.id));
    let mut flows: Vec<_> = doc.flows.iter().collect();
    flows.sort_by(|a, b| a.id.cmp(&b.id));
    let mut notes: Vec<_> = annotations.iter().collect();
    notes.sort_by(|a, b| a.robot_id.cmp(&b.robot_id));

    let mut w = Out(String::new());
    w.raw("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<Map");
    w.attr("id", &doc.id);
    w.attr("name", &doc.name);
    w.raw(">\n");
    for r in regions {
        w.raw("  <ScaleRegion");
        w.attr("id", &r.id);
        w.deg("south", r.bounds.south);
        w.deg("west", r.bounds.west);
        w.deg("north", r.bounds.north);
        w.deg("east", r.bounds.east);
        w.attr("scale", &r.scale_denominator.to_string());
        w.raw("/>\n");
    }
    for l in landmarks {
        w.raw("  <Landmark");
        w.attr("id", &l.id);
        w.attr("kind", l.kind.as_str());
        w.deg("lat", l.position.lat);
        w.deg("lon", l.position.lon);
        w.attr("depth", &l.position.depth.to_string());
        w.attr("label", &l.label);
        w.raw("/>\n");
    }
    for f in flows {
        w.raw("  <Flow");
        w.attr("id", &f.id);
        w.attr("from", &f.from_id);
        w.attr("to", &f.to_id);
        w.attr("v_from", &vector(f.v_from));
        w.attr("v_to", &vector(f.v_to));
        w.raw(">\n");
        for id in &f.waypoint_ids {
            w.raw("    <Waypoint");
            w.attr("ref", id);
            w.raw("/>\n");
        }
        w.raw("  </Flow>\n");
    }
    for a in notes {
        w.raw("  <Annotation");
        w.attr("robot", &a.robot_id);
        if let Some(f) = &a.active_flow {
            w.attr("flow", f);
        }
        if let Some(l) = &a.lookahead_landmark {
            w.attr("lookahead", l);
        }
        if a.landmarks_passed.is_empty() {
            w.raw("/>\n");
        } else {
            w.raw(">\n");
            for id in &a.landmarks_passed {
                w.raw("    <Passed");
                w.attr("ref", id);
                w.raw("/>\n");
            }
            w.raw("  </Annotation>\n");
        }
    }
    w.raw("</Map>\n");
    Ok(w.0)
}

fn check_annotation_refs(doc: &MapDocument, a: &MdlAnnotation) -> Result<(), AnnotationRefError> {
    let missing = |id: &String| AnnotationRefError { robot_id: a.robot_id.clone(), missing_id: id.clone() };
    if let Some(f) = &a.active_flow {
        if doc.flow(f).is_none() {
            return Err(missing(f));
        }
    }
    for l in a.landmarks_passed.iter().chain(a.lookahead_landmark.iter()) {
        if doc.landmark(l).is_none() {
            return Err(missing(l));
        }
    }
    Ok(())
}

fn vector(v: Vec2) -> String {
    let mut s = String::new();
    let _ = write!(s, "{},{}", v.east, v.north);
    s
}

struct Out(String);

impl Out {
    fn raw(&mut self, s: &str) {
        self.0.push_str(s);
    }

    fn attr(&mut self, name: &str, value: &str) {
        self.0.push(' ');
        self.0.push_str(name);
        self.0.push_str("=\"");
        escape_attr(value, &mut self.0);
        self.0.push('"');
    }

    fn deg(&mut self, name: &str, value: f64) {
        let _ = write!(self.0, " {name}=\"{value:.prec$}\"", prec = COORDINATE_DECIMALS);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdl::parse_mdl;

    const DOC: &str = r#"<Map id="m" name="N &amp; co">
  <Landmark id="T" kind="fuel_rendezvous_terminal" lat="1" lon="2"/>
  <Landmark id="A" kind="marker" lat="1.001" lon="2" depth="3.5"/>
  <Flow id="F" from="A" to="T" v_from="0.25,-1" v_to="0,0"><Waypoint ref="A"/><Waypoint ref="T"/></Flow>
</Map>"#;

    #[test]
    fn canonical_text() {
        let f = parse_mdl(DOC).unwrap();
        let note = MdlAnnotation {
            robot_id: "sub1".into(),
            landmarks_passed: alloc::vec!["A".into()],
            lookahead_landmark: Some("T".into()),
            active_flow: Some("F".into()),
        };
        let text = serialize_mdl(&f.map, &[note]).unwrap();
        let expected = r#"<?xml version="1.0" encoding="UTF-8"?>
<Map id="m" name="N &amp; co">
  <Landmark id="A" kind="marker" lat="1.0010000" lon="2.0000000" depth="3.5" label=""/>
  <Landmark id="T" kind="fuel_rendezvous_terminal" lat="1.0000000" lon="2.0000000" depth="0" label=""/>
  <Flow id="F" from="A" to="T" v_from="0.25,-1" v_to="0,0">
    <Waypoint ref="A"/>
    <Waypoint ref="T"/>
  </Flow>
  <Annotation robot="sub1" flow="F" lookahead="T">
    <Passed ref="A"/>
  </Annotation>
</Map>
"#;
        assert_eq!(text, expected);
    }

    #[test]
    fn empty_annotations_write_no_annotation_section() {
        let f = parse_mdl(DOC).unwrap();
        let text = serialize_mdl(&f.map, &[]).unwrap();
        assert!(!text.contains("<Annotation"));
    }

    #[test]
    fn unknown_annotation_ref_is_refused() {
        let f = parse_mdl(DOC).unwrap();
        let note = MdlAnnotation {
            robot_id: "sub1".into(),
            lookahead_landmark: Some("Z".into()),
            ..Default::default()
        };
        let e = serialize_mdl(&f.map, &[note]).unwrap_err();
        assert_eq!(e.missing_id, "Z");
    }
}
