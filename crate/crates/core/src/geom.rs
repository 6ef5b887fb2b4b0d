//! Core geometric types, rigid transforms and point-cloud ingestion.
//!
//! World frame is z-up, all lengths in meters. Camera frames follow the
//! pinhole convention: +z is the optical axis, +x is image right, +y is
//! image down.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Matrix3;

use crate::{Error, Result};

/// 3D position or direction, meters.
pub type Vec3 = nalgebra::Vector3<f64>;

const ORTHONORMAL_TOL: f64 = 1e-9;

/// 8-bit RGB color triple. Serializes as `[r, g, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(from = "[u8; 3]", into = "[u8; 3]")]
pub struct ColorRgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl ColorRgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }
}

impl From<[u8; 3]> for ColorRgb {
    fn from([r, g, b]: [u8; 3]) -> Self {
        Self { r, g, b }
    }
}

impl From<ColorRgb> for [u8; 3] {
    fn from(c: ColorRgb) -> Self {
        [c.r, c.g, c.b]
    }
}

/// Rigid transform in SE(3): `p -> rotation * p + translation`.
///
/// The rotation is stored as a 3x3 matrix because the projection math uses
/// it directly; `new` re-checks orthonormality on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Pose {
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self> {
        let dev = orthonormal_deviation(&rotation);
        if dev > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// Rotation by `yaw` radians about the world z axis, then translation.
    pub fn from_yaw(yaw: f64, translation: Vec3) -> Self {
        let (s, c) = yaw.sin_cos();
        let rotation = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        Self {
            rotation,
            translation,
        }
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Pose {
        let rot_t = self.rotation.transpose();
        Pose {
            rotation: rot_t,
            translation: -(rot_t * self.translation),
        }
    }

    /// `self` after `other`: `(self ∘ other)(p) = self(other(p))`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }
}

fn orthonormal_deviation(r: &Matrix3<f64>) -> f64 {
    let gram = r.transpose() * r - Matrix3::identity();
    let gram_dev = gram.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    gram_dev.max((r.determinant() - 1.0).abs())
}

/// One cloud sample: a position with its color.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    pub position: Vec3,
    pub color: ColorRgb,
}

/// A set of colored 3D points. May be empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RgbPointCloud {
    pub points: Vec<CloudPoint>,
}

impl RgbPointCloud {
    pub fn new(points: Vec<CloudPoint>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Applies a rigid transform to every point; colors and order are preserved.
pub fn transform_cloud(cloud: &RgbPointCloud, pose: &Pose) -> RgbPointCloud {
    RgbPointCloud {
        points: cloud
            .points
            .iter()
            .map(|p| CloudPoint {
                position: pose.transform_point(p.position),
                color: p.color,
            })
            .collect(),
    }
}

/// Camera-to-world pose placing the camera at `center` with its optical
/// axis (+z) pointing at `target` and its x axis orthogonal to `up_hint`.
pub fn look_at_pose(center: Vec3, target: Vec3, up_hint: Vec3) -> Result<Pose> {
    let forward = target - center;
    let norm = forward.norm();
    if norm < 1e-12 {
        return Err(Error::DegenerateLookAt(
            "camera center equals look-at target".into(),
        ));
    }
    let z_axis = forward / norm;
    let x_raw = z_axis.cross(&up_hint);
    let x_norm = x_raw.norm();
    if x_norm < 1e-9 {
        return Err(Error::DegenerateLookAt(
            "up hint is parallel to the viewing direction".into(),
        ));
    }
    let x_axis = x_raw / x_norm;
    let y_axis = z_axis.cross(&x_axis);
    Ok(Pose {
        rotation: Matrix3::from_columns(&[x_axis, y_axis, z_axis]),
        translation: center,
    })
}

// ---------------------------------------------------------------------------
// ASCII PLY subset: float x/y/z, uchar red/green/blue.

const REQUIRED_PROPS: [(&str, &str); 6] = [
    ("x", "float"),
    ("y", "float"),
    ("z", "float"),
    ("red", "uchar"),
    ("green", "uchar"),
    ("blue", "uchar"),
];

fn ply_err(line: usize, msg: impl Into<String>) -> Error {
    Error::PlyParse {
        line,
        msg: msg.into(),
    }
}

/// Parses an ASCII PLY point cloud (positions as `float`, colors as `uchar`).
///
/// Extra vertex properties are tolerated and skipped; `comment` lines are
/// ignored. Positions are read as f32 and widened, matching the file format.
pub fn load_ply(path: impl AsRef<Path>) -> Result<RgbPointCloud> {
    let text = fs::read_to_string(path.as_ref())?;
    parse_ply(&text)
}

pub fn parse_ply(text: &str) -> Result<RgbPointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let (line_no, magic) = lines.next().ok_or_else(|| ply_err(1, "empty file"))?;
    if magic != "ply" {
        return Err(ply_err(line_no, "expected `ply` magic"));
    }

    let mut vertex_count: Option<usize> = None;
    // (name, type) in declaration order
    let mut props: Vec<(String, String)> = Vec::new();
    let mut header_end = 0usize;
    let mut in_vertex_element = false;

    for (line_no, line) in lines.by_ref() {
        if line.is_empty() || line.starts_with("comment") {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("format") => {
                let rest: Vec<&str> = tokens.collect();
                if rest != ["ascii", "1.0"] {
                    return Err(ply_err(line_no, "only `format ascii 1.0` is supported"));
                }
            }
            Some("element") => match (tokens.next(), tokens.next()) {
                (Some("vertex"), Some(n)) => {
                    let n = n
                        .parse::<usize>()
                        .map_err(|_| ply_err(line_no, format!("bad vertex count `{n}`")))?;
                    if vertex_count.replace(n).is_some() {
                        return Err(ply_err(line_no, "duplicate `element vertex`"));
                    }
                    in_vertex_element = true;
                }
                (Some(other), _) => {
                    return Err(ply_err(line_no, format!("unsupported element `{other}`")));
                }
                _ => return Err(ply_err(line_no, "malformed element declaration")),
            },
            Some("property") => {
                if !in_vertex_element {
                    return Err(ply_err(line_no, "property outside vertex element"));
                }
                match (tokens.next(), tokens.next()) {
                    (Some(ty), Some(name)) => props.push((name.to_string(), ty.to_string())),
                    _ => return Err(ply_err(line_no, "malformed property declaration")),
                }
            }
            Some("end_header") => {
                header_end = line_no;
                break;
            }
            Some(other) => {
                return Err(ply_err(line_no, format!("unexpected header token `{other}`")));
            }
            None => unreachable!(),
        }
    }
    if header_end == 0 {
        return Err(ply_err(0, "missing `end_header`"));
    }
    let vertex_count =
        vertex_count.ok_or_else(|| ply_err(header_end, "missing `element vertex`"))?;

    let mut columns = [0usize; 6];
    for (slot, (name, ty)) in REQUIRED_PROPS.iter().enumerate() {
        match props.iter().position(|(n, _)| n == name) {
            Some(idx) => {
                if props[idx].1 != *ty {
                    return Err(ply_err(
                        header_end,
                        format!("property `{name}` must have type `{ty}`, got `{}`", props[idx].1),
                    ));
                }
                columns[slot] = idx;
            }
            None => return Err(Error::PlyMissingProperty(name)),
        }
    }

    let mut points = Vec::with_capacity(vertex_count);
    for (line_no, line) in lines {
        if points.len() == vertex_count {
            if !line.is_empty() {
                return Err(ply_err(line_no, "trailing data after declared vertices"));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != props.len() {
            return Err(ply_err(
                line_no,
                format!("expected {} fields, got {}", props.len(), fields.len()),
            ));
        }
        let float_at = |slot: usize| -> Result<f64> {
            let tok = fields[columns[slot]];
            tok.parse::<f32>()
                .map(f64::from)
                .map_err(|_| ply_err(line_no, format!("bad float `{tok}`")))
        };
        let chan_at = |slot: usize| -> Result<u8> {
            let tok = fields[columns[slot]];
            tok.parse::<u8>()
                .map_err(|_| ply_err(line_no, format!("bad color channel `{tok}`")))
        };
        points.push(CloudPoint {
            position: Vec3::new(float_at(0)?, float_at(1)?, float_at(2)?),
            color: ColorRgb::new(chan_at(3)?, chan_at(4)?, chan_at(5)?),
        });
    }
    if points.len() != vertex_count {
        return Err(ply_err(
            0,
            format!("expected {vertex_count} vertices, file has {}", points.len()),
        ));
    }
    Ok(RgbPointCloud { points })
}

/// Serializes a cloud to the same ASCII PLY subset `load_ply` reads.
///
/// Positions are narrowed to f32 (the declared storage type) and printed
/// with shortest round-trip formatting, so `parse_ply(&to_ply(c))` is exact.
pub fn to_ply(cloud: &RgbPointCloud) -> String {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", cloud.points.len());
    out.push_str(
        "property float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
    );
    for p in &cloud.points {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            p.position.x as f32,
            p.position.y as f32,
            p.position.z as f32,
            p.color.r,
            p.color.g,
            p.color.b
        );
    }
    out
}

pub fn save_ply(path: impl AsRef<Path>, cloud: &RgbPointCloud) -> Result<()> {
    fs::write(path.as_ref(), to_ply(cloud))?;
    Ok(())
}
