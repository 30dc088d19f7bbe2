use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::error::{MdlError, ParseCode, ParseError, Span};
use super::model::{FlowSegment, GeoBounds, Landmark, LandmarkKind, MapDocument, MdlAnnotation, MdlFile, ScaleRegion};
use super::validate::{validate_with_spans, SourceMap};
use super::xml::{read_document, Element};
use crate::geo::{GeoCoordinate, Vec2};

/// Decimal places used for every latitude/longitude in MDL text.
pub const COORDINATE_DECIMALS: usize = 7;

/// Rounds a coordinate to the 1e-7 degree grid that MDL text can express.
pub fn quantize_degrees(x: f64) -> f64 {
    libm::round(x * 1e7) / 1e7
}

/// Parses and validates an MDL document.
///
/// Lists in the result are sorted by id (annotations by robot id), which is
/// the canonical order the serializer writes.
pub fn parse_mdl(text: &str) -> Result<MdlFile, MdlError> {
    let root = read_document(text)?;
    let (mut file, spans) = build(&root)?;
    validate_with_spans(&file, Some(&spans)).map_err(MdlError::Invalid)?;
    file.map.canonicalize();
    file.annotations.sort_by(|a, b| a.robot_id.cmp(&b.robot_id));
    Ok(file)
}

/// Like [`parse_mdl`], for raw bytes. Invalid UTF-8 is a parse error at the
/// first offending byte.
pub fn parse_mdl_bytes(bytes: &[u8]) -> Result<MdlFile, MdlError> {
    match core::str::from_utf8(bytes) {
        Ok(text) => parse_mdl(text),
        Err(e) => {
            let good = &bytes[..e.valid_up_to()];
            // The prefix is valid UTF-8 by construction.
            let prefix = core::str::from_utf8(good).unwrap_or("");
            let line = 1 + prefix.matches('\n').count() as u32;
            let col = 1 + prefix.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32;
            Err(MdlError::Parse(ParseError {
                line,
                col,
                code: ParseCode::MalformedXml,
                message: "invalid UTF-8".to_string(),
            }))
        }
    }
}

fn err(span: Span, code: ParseCode, message: String) -> ParseError {
    ParseError { line: span.line, col: span.col, code, message }
}

struct Attrs<'e> {
    el: &'e Element,
    used: Vec<bool>,
}

impl<'e> Attrs<'e> {
    fn new(el: &'e Element) -> Self {
        Self { el, used: alloc::vec![false; el.attrs.len()] }
    }

    fn opt(&mut self, name: &str) -> Option<(&'e str, Span)> {
        let i = self.el.attrs.iter().position(|a| a.name == name)?;
        self.used[i] = true;
        let a = &self.el.attrs[i];
        Some((a.value.as_str(), a.span))
    }

    fn req(&mut self, name: &str) -> Result<(&'e str, Span), ParseError> {
        self.opt(name).ok_or_else(|| {
            err(
                self.el.span,
                ParseCode::MissingAttribute,
                format!("`{}` requires attribute `{name}`", self.el.name),
            )
        })
    }

    fn number(&mut self, name: &str) -> Result<f64, ParseError> {
        let (v, span) = self.req(name)?;
        parse_f64(v, span)
    }

    /// Rejects attributes that were never asked for.
    fn finish(self) -> Result<(), ParseError> {
        match self.used.iter().position(|u| !u) {
            Some(i) => {
                let a = &self.el.attrs[i];
                Err(err(
                    a.span,
                    ParseCode::UnknownAttribute,
                    format!("unknown attribute `{}` on `{}`", a.name, self.el.name),
                ))
            }
            None => Ok(()),
        }
    }
}

fn parse_f64(v: &str, span: Span) -> Result<f64, ParseError> {
    let t = v.trim();
    let ok = !t.is_empty()
        && t.chars().all(|c| c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E'));
    match t.parse::<f64>() {
        Ok(x) if ok && x.is_finite() => Ok(x),
        _ => Err(err(span, ParseCode::BadValue, format!("`{v}` is not a finite number"))),
    }
}

fn parse_vec2(v: &str, span: Span) -> Result<Vec2, ParseError> {
    let mut parts = v.split(',');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(e), Some(n), None) => Ok(Vec2::new(parse_f64(e, span)?, parse_f64(n, span)?)),
        _ => Err(err(span, ParseCode::BadValue, format!("`{v}` is not an `east,north` vector"))),
    }
}

fn no_children(el: &Element) -> Result<(), ParseError> {
    match el.children.first() {
        Some(c) => Err(err(
            c.span,
            ParseCode::UnknownElement,
            format!("`{}` may not contain `{}`", el.name, c.name),
        )),
        None => Ok(()),
    }
}

fn refs(el: &Element, child: &str) -> Result<Vec<String>, ParseError> {
    el.children
        .iter()
        .map(|c| {
            if c.name != child {
                return Err(err(
                    c.span,
                    ParseCode::UnknownElement,
                    format!("`{}` may only contain `{child}`", el.name),
                ));
            }
            no_children(c)?;
            let mut a = Attrs::new(c);
            let r = a.req("ref")?.0.to_string();
            a.finish()?;
            Ok(r)
        })
        .collect()
}

fn build(root: &Element) -> Result<(MdlFile, SourceMap), ParseError> {
    if root.name != "Map" {
        return Err(err(
            root.span,
            ParseCode::UnknownElement,
            format!("root element must be `Map`, found `{}`", root.name),
        ));
    }
    let mut a = Attrs::new(root);
    let mut map = MapDocument {
        id: a.req("id")?.0.to_string(),
        name: a.opt("name").map(|(v, _)| v.to_string()).unwrap_or_default(),
        ..MapDocument::default()
    };
    a.finish()?;

    let mut annotations = Vec::new();
    let mut spans = SourceMap::default();
    for el in &root.children {
        match el.name.as_str() {
            "ScaleRegion" => {
                no_children(el)?;
                let mut a = Attrs::new(el);
                let id = a.req("id")?.0.to_string();
                let bounds = GeoBounds {
                    south: quantize_degrees(a.number("south")?),
                    west: quantize_degrees(a.number("west")?),
                    north: quantize_degrees(a.number("north")?),
                    east: quantize_degrees(a.number("east")?),
                };
                let (s, sspan) = a.req("scale")?;
                let scale_denominator = s.trim().parse::<u64>().map_err(|_| {
                    err(sspan, ParseCode::BadValue, format!("`{s}` is not a non-negative integer scale"))
                })?;
                a.finish()?;
                map.scale_regions.push(ScaleRegion { id, bounds, scale_denominator });
                spans.regions.push(el.span);
            }
            "Landmark" => {
                no_children(el)?;
                let mut a = Attrs::new(el);
                let id = a.req("id")?.0.to_string();
                let (k, kspan) = a.req("kind")?;
                let kind = LandmarkKind::from_attr(k).ok_or_else(|| {
                    err(kspan, ParseCode::BadValue, format!("unknown landmark kind `{k}`"))
                })?;
                let lat = quantize_degrees(a.number("lat")?);
                let lon = quantize_degrees(a.number("lon")?);
                let depth = match a.opt("depth") {
                    Some((v, span)) => parse_f64(v, span)?,
                    None => 0.0,
                };
                let label = a.opt("label").map(|(v, _)| v.to_string()).unwrap_or_default();
                a.finish()?;
                map.landmarks.push(Landmark {
                    id,
                    kind,
                    position: GeoCoordinate::with_depth(lat, lon, depth),
                    label,
                });
                spans.landmarks.push(el.span);
            }
            "Flow" => {
                let mut a = Attrs::new(el);
                let id = a.req("id")?.0.to_string();
                let from_id = a.req("from")?.0.to_string();
                let to_id = a.req("to")?.0.to_string();
                let (v, vspan) = a.req("v_from")?;
                let v_from = parse_vec2(v, vspan)?;
                let (v, vspan) = a.req("v_to")?;
                let v_to = parse_vec2(v, vspan)?;
                a.finish()?;
                let waypoint_ids = refs(el, "Waypoint")?;
                map.flows.push(FlowSegment { id, from_id, to_id, waypoint_ids, v_from, v_to });
                spans.flows.push(el.span);
            }
            "Annotation" => {
                let mut a = Attrs::new(el);
                let robot_id = a.req("robot")?.0.to_string();
                let active_flow = a.opt("flow").map(|(v, _)| v.to_string());
                let lookahead_landmark = a.opt("lookahead").map(|(v, _)| v.to_string());
                a.finish()?;
                let landmarks_passed = refs(el, "Passed")?;
                annotations.push(MdlAnnotation { robot_id, landmarks_passed, lookahead_landmark, active_flow });
                spans.annotations.push(el.span);
            }
            other => {
                return Err(err(
                    el.span,
                    ParseCode::UnknownElement,
                    format!("unknown element `{other}` in `Map`"),
                ))
            }
        }
    }
    Ok((MdlFile { map, annotations }, spans))
}
