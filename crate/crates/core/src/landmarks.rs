//! Facial landmark point clouds.
//!
//! A face is 68 annotated points in image coordinates (pixels, `y` grows
//! downward). The pipeline only looks at the mouth, landmarks 48..68 of the
//! usual 68-point scheme, and at random vertex subsets of it.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of points in a full face record.
pub const FACE_POINTS: usize = 68;

/// Landmark indices (0-based) that make up the mouth.
pub const MOUTH_LANDMARKS: Range<usize> = 48..68;

/// Number of mouth points.
pub const MOUTH_POINTS: usize = MOUTH_LANDMARKS.end - MOUTH_LANDMARKS.start;

/// Smallest vertex subset that still spans a triangle.
pub const MIN_VERTICES: usize = 3;

/// Number of fields in one CSV record: the label plus 68 coordinate pairs.
pub const CSV_FIELDS: usize = 1 + 2 * FACE_POINTS;

#[derive(Debug, Error)]
pub enum LandmarkError {
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("unknown expression label `{0}`")]
    UnknownLabel(String),
    #[error("expected {expected} points, got {actual}")]
    WrongSize { expected: usize, actual: usize },
    #[error("vertex count {n} outside [{min}, {max}]")]
    VertexCount { n: usize, min: usize, max: usize },
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("selection index {index} out of range for a cloud of {len} points")]
    SelectionOutOfRange { index: usize, len: usize },
    #[error("noise must be finite and non-negative, got {0}")]
    InvalidNoise(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Expression label of a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expression {
    Happy,
    Sad,
}

impl Expression {
    pub const ALL: [Expression; 2] = [Expression::Happy, Expression::Sad];

    pub fn as_str(&self) -> &'static str {
        match self {
            Expression::Happy => "happy",
            Expression::Sad => "sad",
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Expression {
    type Err = LandmarkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "happy" => Ok(Expression::Happy),
            "sad" => Ok(Expression::Sad),
            other => Err(LandmarkError::UnknownLabel(other.to_string())),
        }
    }
}

/// An ordered, labeled set of 2D landmarks.
///
/// Each point remembers the landmark index it came from, so sub-clouds taken
/// from different faces with the same selection line up point for point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Point>,
    landmarks: Vec<usize>,
    label: Expression,
}

impl PointCloud {
    /// Builds a cloud whose landmark indices are `0..points.len()`.
    pub fn new(points: Vec<Point>, label: Expression) -> Result<Self, LandmarkError> {
        let landmarks = (0..points.len()).collect();
        Self::with_landmarks(points, landmarks, label)
    }

    pub fn with_landmarks(
        points: Vec<Point>,
        landmarks: Vec<usize>,
        label: Expression,
    ) -> Result<Self, LandmarkError> {
        if points.len() != landmarks.len() {
            return Err(LandmarkError::WrongSize {
                expected: landmarks.len(),
                actual: points.len(),
            });
        }
        if let Some(index) = points.iter().position(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(LandmarkError::NonFinite { index });
        }
        Ok(Self {
            points,
            landmarks,
            label,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Original landmark index of every point.
    pub fn landmarks(&self) -> &[usize] {
        &self.landmarks
    }

    pub fn label(&self) -> Expression {
        self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Returns the points of `face` at the given landmark range, keeping the label.
pub fn extract_region(face: &PointCloud, region: Range<usize>) -> Result<PointCloud, LandmarkError> {
    if face.len() != FACE_POINTS {
        return Err(LandmarkError::WrongSize {
            expected: FACE_POINTS,
            actual: face.len(),
        });
    }
    let points = face.points[region.clone()].to_vec();
    let landmarks = face.landmarks[region].to_vec();
    PointCloud::with_landmarks(points, landmarks, face.label)
}

/// The 20 mouth points of a 68-point face.
pub fn extract_mouth(face: &PointCloud) -> Result<PointCloud, LandmarkError> {
    extract_region(face, MOUTH_LANDMARKS)
}

/// A set of positions into a mouth cloud, drawn once and reused for every face.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexSelection {
    positions: Vec<usize>,
}

impl VertexSelection {
    /// Draws `n` of the `MOUTH_POINTS` positions uniformly without replacement.
    /// Positions are returned in ascending order so landmark order is kept.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self, LandmarkError> {
        if !(MIN_VERTICES..=MOUTH_POINTS).contains(&n) {
            return Err(LandmarkError::VertexCount {
                n,
                min: MIN_VERTICES,
                max: MOUTH_POINTS,
            });
        }
        let mut positions = if n == MOUTH_POINTS {
            (0..MOUTH_POINTS).collect()
        } else {
            index::sample(rng, MOUTH_POINTS, n).into_vec()
        };
        positions.sort_unstable();
        Ok(Self { positions })
    }

    pub fn all() -> Self {
        Self {
            positions: (0..MOUTH_POINTS).collect(),
        }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn apply(&self, cloud: &PointCloud) -> Result<PointCloud, LandmarkError> {
        let mut points = Vec::with_capacity(self.positions.len());
        let mut landmarks = Vec::with_capacity(self.positions.len());
        for &pos in &self.positions {
            if pos >= cloud.len() {
                return Err(LandmarkError::SelectionOutOfRange {
                    index: pos,
                    len: cloud.len(),
                });
            }
            points.push(cloud.points[pos]);
            landmarks.push(cloud.landmarks[pos]);
        }
        PointCloud::with_landmarks(points, landmarks, cloud.label)
    }
}

/// Samples `n` mouth vertices. To share a subset across faces, draw a
/// [`VertexSelection`] once and apply it to each.
pub fn select_vertices<R: Rng + ?Sized>(
    mouth: &PointCloud,
    n: usize,
    rng: &mut R,
) -> Result<PointCloud, LandmarkError> {
    if mouth.len() != MOUTH_POINTS {
        return Err(LandmarkError::WrongSize {
            expected: MOUTH_POINTS,
            actual: mouth.len(),
        });
    }
    VertexSelection::sample(n, rng)?.apply(mouth)
}

// Synthetic face geometry, in pixels.
const MOUTH_CENTER: Point = Point::new(320.0, 400.0);
/// Nominal corner-to-corner width of a synthetic mouth, the midpoint of the
/// happy and sad widths. Noise levels are quoted as fractions of it.
pub const MOUTH_WIDTH: f64 = 80.0;
const INNER_WIDTH_RATIO: f64 = 0.75;
const INNER_ELEVATION_RATIO: f64 = 0.8;

/// Lip geometry of one expression, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MouthShape {
    pub half_width: f64,
    /// Upward lift of the corners; negative pulls them down.
    pub corner_elevation: f64,
    pub outer_upper: f64,
    pub outer_lower: f64,
    pub inner_upper: f64,
    pub inner_lower: f64,
}

impl MouthShape {
    /// A smile widens the mouth, lifts the corners and opens the lower lip.
    pub const HAPPY: MouthShape = MouthShape {
        half_width: 46.0,
        corner_elevation: 12.0,
        outer_upper: 6.0,
        outer_lower: 12.0,
        inner_upper: 2.0,
        inner_lower: 6.0,
    };

    /// A frown narrows the mouth, drops the corners and presses the lips.
    pub const SAD: MouthShape = MouthShape {
        half_width: 34.0,
        corner_elevation: -12.0,
        outer_upper: 10.0,
        outer_lower: 7.0,
        inner_upper: 3.0,
        inner_lower: 2.0,
    };

    pub fn of(kind: Expression) -> MouthShape {
        match kind {
            Expression::Happy => MouthShape::HAPPY,
            Expression::Sad => MouthShape::SAD,
        }
    }
}

/// Point on a lip curve at angle `phi`: an ellipse whose upper and lower halves
/// have their own heights, bent so the corners (`cos phi = ±1`) move up by
/// `elevation` (image `y` shrinks).
fn lip_point(phi: f64, half_width: f64, upper: f64, lower: f64, elevation: f64) -> Point {
    let (s, c) = phi.sin_cos();
    let height = if s >= 0.0 { upper } else { lower };
    Point::new(
        MOUTH_CENTER.x + half_width * c,
        MOUTH_CENTER.y - height * s - elevation * c * c,
    )
}

/// Noise-free landmarks of a synthetic face.
pub fn face_template(kind: Expression) -> Vec<Point> {
    use std::f64::consts::PI;
    let mut pts = Vec::with_capacity(FACE_POINTS);

    // jaw 0..17, left ear around the chin to the right ear
    for i in 0..17 {
        let t = PI + PI * i as f64 / 16.0;
        pts.push(Point::new(320.0 + 150.0 * t.cos(), 300.0 - 190.0 * t.sin()));
    }
    // brows 17..27
    for side in [210.0, 350.0] {
        for i in 0..5 {
            let u = i as f64 / 4.0;
            let arch = 8.0 * (1.0 - (2.0 * u - 1.0).powi(2));
            pts.push(Point::new(side + 80.0 * u, 230.0 - arch));
        }
    }
    // nose bridge 27..31, base 31..36
    for i in 0..4 {
        pts.push(Point::new(320.0, 260.0 + 20.0 * i as f64));
    }
    for i in 0..5 {
        let u = i as f64 / 4.0;
        pts.push(Point::new(295.0 + 50.0 * u, 335.0 + 4.0 * (1.0 - (2.0 * u - 1.0).abs())));
    }
    // eyes 36..48
    for cx in [255.0, 385.0] {
        for i in 0..6 {
            let t = PI - PI * i as f64 / 3.0;
            pts.push(Point::new(cx + 22.0 * t.cos(), 270.0 - 9.0 * t.sin()));
        }
    }

    let m = MouthShape::of(kind);
    // outer lip 48..60: left corner, upper lip left to right, right corner,
    // lower lip right to left
    for k in 0..12 {
        let phi = PI - k as f64 * PI / 6.0;
        pts.push(lip_point(phi, m.half_width, m.outer_upper, m.outer_lower, m.corner_elevation));
    }
    // inner lip 60..68, same traversal
    for k in 0..8 {
        let phi = PI - k as f64 * PI / 4.0;
        pts.push(lip_point(
            phi,
            INNER_WIDTH_RATIO * m.half_width,
            m.inner_upper,
            m.inner_lower,
            INNER_ELEVATION_RATIO * m.corner_elevation,
        ));
    }
    debug_assert_eq!(pts.len(), FACE_POINTS);
    pts
}

/// A synthetic 68-point face: the template for `kind` plus isotropic Gaussian
/// jitter with standard deviation `noise` pixels. With `noise == 0` no random
/// numbers are drawn.
pub fn synthesize_face<R: Rng + ?Sized>(
    kind: Expression,
    noise: f64,
    rng: &mut R,
) -> Result<PointCloud, LandmarkError> {
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(LandmarkError::InvalidNoise(noise));
    }
    let mut points = face_template(kind);
    if noise > 0.0 {
        let jitter = Normal::new(0.0, noise).map_err(|_| LandmarkError::InvalidNoise(noise))?;
        for p in &mut points {
            p.x += jitter.sample(rng);
            p.y += jitter.sample(rng);
        }
    }
    PointCloud::new(points, kind)
}

/// Reads faces in the `label,x0,y0,...,x67,y67` format. Row indices in errors
/// are 0-based record numbers.
pub fn read_landmarks<R: Read>(reader: R, limit: Option<usize>) -> Result<Vec<PointCloud>, LandmarkError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut faces = Vec::new();
    for (row, record) in csv.records().enumerate() {
        if limit.is_some_and(|l| faces.len() >= l) {
            break;
        }
        let record = record?;
        faces.push(parse_record(row, &record)?);
    }
    Ok(faces)
}

fn parse_record(row: usize, record: &csv::StringRecord) -> Result<PointCloud, LandmarkError> {
    let err = |message: String| LandmarkError::Parse { row, message };
    let mut fields = record.iter();
    let label = fields.next().unwrap_or_default();
    let label: Expression = label
        .parse()
        .map_err(|_| err(format!("unknown label `{label}`")))?;
    let coords = fields
        .enumerate()
        .map(|(i, f)| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("field {}: `{f}` is not a finite number", i + 1)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if coords.len() != 2 * FACE_POINTS {
        return Err(err(format!(
            "expected {} coordinates, got {}",
            2 * FACE_POINTS,
            coords.len()
        )));
    }
    let points = coords.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect();
    PointCloud::new(points, label).map_err(|e| err(e.to_string()))
}

pub fn load_landmarks(path: impl AsRef<Path>, limit: Option<usize>) -> Result<Vec<PointCloud>, LandmarkError> {
    read_landmarks(File::open(path)?, limit)
}

/// Writes faces in the landmark CSV format, one record per face.
pub fn write_landmarks<W: Write>(writer: W, faces: &[PointCloud]) -> Result<(), LandmarkError> {
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for face in faces {
        if face.len() != FACE_POINTS {
            return Err(LandmarkError::WrongSize {
                expected: FACE_POINTS,
                actual: face.len(),
            });
        }
        let mut record = Vec::with_capacity(CSV_FIELDS);
        record.push(face.label().to_string());
        for p in face.points() {
            record.push(p.x.to_string());
            record.push(p.y.to_string());
        }
        csv.write_record(&record)?;
    }
    csv.flush()?;
    Ok(())
}
