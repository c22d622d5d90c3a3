//! Sagittal (side-view) tongue diagrams. The head faces left: x grows from
//! the lips toward the throat and y grows downward, both normalized to [0, 1].

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::phoneme::{Backness, Category, Height, Manner, PhonemeFeatures, Place};

use super::kb::ArticulatoryEntry;
use super::FeedbackError;

pub const MIN_DIAGRAM_SIZE: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

const fn pt(x: f64, y: f64) -> Point {
    Point { x, y }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LipShape {
    Spread,
    Neutral,
    Rounded,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramParams {
    /// Tip first, root last; x strictly increasing.
    pub tongue_spline: [Point; 5],
    pub velum_open: bool,
    pub lips: LipShape,
    pub constriction_marker: Option<Point>,
}

/// Where the tongue root enters the pharynx; shared by every shape.
const ROOT: Point = pt(0.70, 0.80);

/// Consonant tongue shapes per place. The tip x orders the places from the
/// teeth backwards.
fn consonant_spline(place: Place) -> [Point; 5] {
    match place {
        Place::Dental => [pt(0.19, 0.46), pt(0.30, 0.50), pt(0.45, 0.52), pt(0.58, 0.58), ROOT],
        Place::Alveolar => [pt(0.21, 0.42), pt(0.30, 0.48), pt(0.45, 0.52), pt(0.58, 0.58), ROOT],
        Place::Labiodental => [pt(0.23, 0.52), pt(0.33, 0.52), pt(0.46, 0.53), pt(0.58, 0.58), ROOT],
        Place::Labial => [pt(0.24, 0.53), pt(0.34, 0.52), pt(0.47, 0.53), pt(0.59, 0.58), ROOT],
        Place::Palatal => [pt(0.25, 0.50), pt(0.34, 0.40), pt(0.46, 0.36), pt(0.58, 0.50), ROOT],
        Place::Retroflex => [pt(0.26, 0.36), pt(0.31, 0.46), pt(0.45, 0.52), pt(0.58, 0.58), ROOT],
        Place::Velar => [pt(0.27, 0.53), pt(0.38, 0.50), pt(0.52, 0.38), pt(0.62, 0.42), ROOT],
        Place::Glottal => [pt(0.27, 0.53), pt(0.38, 0.52), pt(0.50, 0.53), pt(0.62, 0.62), pt(0.70, 0.82)],
        Place::Uvular => [pt(0.28, 0.54), pt(0.40, 0.52), pt(0.54, 0.44), pt(0.64, 0.38), pt(0.71, 0.80)],
        Place::None => [pt(0.22, 0.52), pt(0.34, 0.50), pt(0.46, 0.48), pt(0.58, 0.56), ROOT],
    }
}

/// Vowel shapes: the tongue body peaks at a point set by height and backness.
fn vowel_spline(height: Height, backness: Backness) -> [Point; 5] {
    let px = match backness {
        Backness::Front => 0.36,
        Backness::Back => 0.58,
        Backness::Central | Backness::None => 0.46,
    };
    let py = match height {
        Height::High => 0.36,
        Height::Low => 0.54,
        Height::Mid | Height::None => 0.44,
    };
    [pt(0.22, 0.52), pt(px - 0.10, py + 0.06), pt(px, py), pt(px + 0.10, py + 0.08), ROOT]
}

fn constriction(place: Place) -> Option<Point> {
    Some(match place {
        Place::Labial => pt(0.10, 0.50),
        Place::Labiodental => pt(0.13, 0.50),
        Place::Dental => pt(0.18, 0.45),
        Place::Alveolar => pt(0.22, 0.40),
        Place::Retroflex => pt(0.29, 0.35),
        Place::Palatal => pt(0.40, 0.33),
        Place::Velar => pt(0.54, 0.36),
        Place::Uvular => pt(0.64, 0.39),
        Place::Glottal => pt(0.72, 0.70),
        Place::None => return None,
    })
}

impl DiagramParams {
    pub fn for_features(f: &PhonemeFeatures) -> Self {
        let vocalic = f.category != Category::Consonant;
        let tongue_spline =
            if vocalic { vowel_spline(f.height, f.backness) } else { consonant_spline(f.place) };
        let lips = if f.rounded {
            LipShape::Rounded
        } else if f.place == Place::Labial && matches!(f.manner, Manner::Plosive | Manner::Nasal) {
            LipShape::Closed
        } else if vocalic && f.backness == Backness::Front {
            LipShape::Spread
        } else {
            LipShape::Neutral
        };
        DiagramParams {
            tongue_spline,
            velum_open: f.manner == Manner::Nasal || f.nasalized,
            lips,
            constriction_marker: if vocalic { None } else { constriction(f.place) },
        }
    }
}

const HEAD_OUTLINE: &[(f64, f64)] = &[
    (0.08, 0.40),
    (0.10, 0.30),
    (0.16, 0.14),
    (0.30, 0.05),
    (0.52, 0.04),
    (0.74, 0.10),
    (0.86, 0.26),
    (0.88, 0.46),
    (0.84, 0.66),
    (0.80, 0.96),
    (0.62, 0.96),
    (0.60, 0.80),
    (0.40, 0.78),
    (0.20, 0.72),
    (0.10, 0.64),
    (0.08, 0.56),
];

const PALATE: &[(f64, f64)] = &[
    (0.19, 0.42),
    (0.22, 0.37),
    (0.32, 0.31),
    (0.45, 0.29),
    (0.56, 0.31),
    (0.56, 0.28),
    (0.45, 0.26),
    (0.32, 0.28),
    (0.20, 0.34),
];

const UPPER_TEETH: &[(f64, f64)] = &[(0.15, 0.38), (0.20, 0.38), (0.19, 0.46), (0.16, 0.46)];
const LOWER_TEETH: &[(f64, f64)] = &[(0.16, 0.54), (0.19, 0.54), (0.20, 0.62), (0.15, 0.62)];

struct Canvas {
    size: f64,
    out: String,
}

impl Canvas {
    fn c(&self, v: f64) -> String {
        format!("{:.1}", v * self.size)
    }

    fn polygon(&mut self, id: &str, points: &[(f64, f64)], style: &str) {
        let mut d = String::new();
        for (i, &(x, y)) in points.iter().enumerate() {
            let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, self.c(x), self.c(y));
        }
        d.push('Z');
        let _ = writeln!(self.out, r#"  <path id="{id}" d="{d}" {style}/>"#);
    }
}

/// Smooth closed tongue body: a Catmull-Rom curve through the control
/// points along the top, closed along the floor of the mouth.
fn tongue_path(canvas: &Canvas, p: &[Point; 5]) -> String {
    let mut d = format!("M{} {}", canvas.c(p[0].x), canvas.c(p[0].y));
    for i in 0..4 {
        let p0 = if i == 0 { p[0] } else { p[i - 1] };
        let (p1, p2) = (p[i], p[i + 1]);
        let p3 = if i + 2 < 5 { p[i + 2] } else { p[4] };
        let c1 = pt(p1.x + (p2.x - p0.x) / 6.0, p1.y + (p2.y - p0.y) / 6.0);
        let c2 = pt(p2.x - (p3.x - p1.x) / 6.0, p2.y - (p3.y - p1.y) / 6.0);
        let _ = write!(
            d,
            " C{} {} {} {} {} {}",
            canvas.c(c1.x),
            canvas.c(c1.y),
            canvas.c(c2.x),
            canvas.c(c2.y),
            canvas.c(p2.x),
            canvas.c(p2.y)
        );
    }
    let _ = write!(
        d,
        " L{} {} L{} {} Q{} {} {} {} Z",
        canvas.c(0.66),
        canvas.c(0.82),
        canvas.c(0.30),
        canvas.c(0.66),
        canvas.c(p[0].x - 0.02),
        canvas.c(p[0].y + 0.10),
        canvas.c(p[0].x),
        canvas.c(p[0].y)
    );
    d
}

fn lips(shape: LipShape) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let (gap, protrude, spread) = match shape {
        LipShape::Closed => (0.0, 0.0, 0.0),
        LipShape::Neutral => (0.03, 0.0, 0.0),
        LipShape::Spread => (0.025, -0.01, 0.01),
        LipShape::Rounded => (0.02, 0.03, -0.01),
    };
    let front = 0.07 - protrude;
    let upper = vec![(0.10 + spread, 0.36), (front, 0.42), (front, 0.50 - gap / 2.0), (0.14, 0.50 - gap / 2.0), (0.15, 0.40)];
    let lower = vec![(0.14, 0.50 + gap / 2.0), (front, 0.50 + gap / 2.0), (front, 0.58), (0.10 + spread, 0.64), (0.15, 0.60)];
    (upper, lower)
}

fn velum(open: bool) -> Vec<(f64, f64)> {
    // Raised, the velum touches the back wall of the pharynx; lowered, it
    // hangs forward and leaves the nasal passage open.
    if open {
        vec![(0.56, 0.28), (0.62, 0.32), (0.64, 0.42), (0.61, 0.43), (0.58, 0.34), (0.56, 0.31)]
    } else {
        vec![(0.56, 0.28), (0.66, 0.27), (0.79, 0.30), (0.79, 0.33), (0.66, 0.32), (0.56, 0.31)]
    }
}

/// Deterministic SVG 1.1 document for one entry.
pub fn render_tongue_diagram(entry: &ArticulatoryEntry, size: u32) -> Result<String, FeedbackError> {
    if size < MIN_DIAGRAM_SIZE {
        return Err(FeedbackError::DiagramTooSmall(size));
    }
    let params = &entry.diagram;
    let mut canvas = Canvas { size: f64::from(size), out: String::new() };
    let _ = writeln!(
        canvas.out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(canvas.out, "  <title>/{}/ {}</title>", xml_escape(&entry.ipa), entry.descriptors.join(" "));
    canvas.polygon("head", HEAD_OUTLINE, r##"fill="#f6e3d4" stroke="#5a4636" stroke-width="1.5""##);
    canvas.polygon("palate", PALATE, r##"fill="#c9a38f" stroke="#5a4636""##);
    canvas.polygon("teeth-upper", UPPER_TEETH, r##"fill="#ffffff" stroke="#777777""##);
    canvas.polygon("teeth-lower", LOWER_TEETH, r##"fill="#ffffff" stroke="#777777""##);
    let (upper, lower) = lips(params.lips);
    canvas.polygon("lip-upper", &upper, r##"fill="#c96b6b" stroke="#7a3030""##);
    canvas.polygon("lip-lower", &lower, r##"fill="#c96b6b" stroke="#7a3030""##);
    let velum_style = if params.velum_open {
        r##"class="velum-open" fill="#e3a0a0" stroke="#7a3030""##
    } else {
        r##"class="velum-closed" fill="#c9a38f" stroke="#5a4636""##
    };
    canvas.polygon("velum", &velum(params.velum_open), velum_style);
    let d = tongue_path(&canvas, &params.tongue_spline);
    let _ = writeln!(canvas.out, r##"  <path id="tongue" d="{d}" fill="#e06666" stroke="#8b2323" stroke-width="1.5"/>"##);
    if let Some(m) = params.constriction_marker {
        let _ = writeln!(
            canvas.out,
            r##"  <circle id="constriction" cx="{}" cy="{}" r="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
            canvas.c(m.x),
            canvas.c(m.y),
            canvas.c(0.035)
        );
    }
    canvas.out.push_str("</svg>\n");
    Ok(canvas.out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
