//! Point-splatting software renderer with per-pixel source labels.
//!
//! `synthesize_view` projects the fused actor + background clouds through a
//! pinhole camera into a small labeled image. A z-buffer keeps the nearest
//! splat per pixel, so self-occlusion and actor/background occlusion fall
//! out of the same depth test.

use std::io::{self, Write};

use crate::geom::{ColorRgb, Pose, RgbPointCloud, Vec3};

/// Pinhole camera parameters, in pixels.
#[derive(Debug, Clone, Copy)]
pub struct CameraIntrinsics {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Points closer than this along the optical axis are clipped, meters.
    pub near_clip: f64,
}

impl CameraIntrinsics {
    /// Square-pixel intrinsics from a horizontal field of view, principal
    /// point at the image center.
    pub fn from_horizontal_fov(width: usize, height: usize, fov_rad: f64, near_clip: f64) -> Self {
        let fx = width as f64 / 2.0 / (fov_rad / 2.0).tan();
        Self {
            width,
            height,
            fx,
            fy: fx,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            near_clip,
        }
    }

    pub fn diagonal(&self) -> f64 {
        ((self.width * self.width + self.height * self.height) as f64).sqrt()
    }
}

/// Which cloud painted a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelLabel {
    Actor,
    Background,
    Empty,
}

/// Synthesized camera image with per-pixel color, depth and source label.
///
/// A pixel has a depth iff its label is `Actor` or `Background`; the label
/// partition defines the actor and background pixel sets.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub width: usize,
    pub height: usize,
    pub colors: Vec<ColorRgb>,
    pub depths: Vec<f64>,
    pub labels: Vec<PixelLabel>,
}

impl LabeledImage {
    pub fn new_empty(width: usize, height: usize, clear_color: ColorRgb) -> Self {
        Self {
            width,
            height,
            colors: vec![clear_color; width * height],
            depths: vec![f64::INFINITY; width * height],
            labels: vec![PixelLabel::Empty; width * height],
        }
    }

    #[inline]
    pub fn index(&self, u: usize, v: usize) -> usize {
        v * self.width + u
    }

    pub fn label(&self, u: usize, v: usize) -> PixelLabel {
        self.labels[self.index(u, v)]
    }

    pub fn color(&self, u: usize, v: usize) -> ColorRgb {
        self.colors[self.index(u, v)]
    }

    pub fn depth(&self, u: usize, v: usize) -> Option<f64> {
        match self.label(u, v) {
            PixelLabel::Empty => None,
            _ => Some(self.depths[self.index(u, v)]),
        }
    }

    /// Directly paints one pixel; used by tests and image synthesis.
    pub fn set_pixel(&mut self, u: usize, v: usize, color: ColorRgb, depth: f64, label: PixelLabel) {
        let i = self.index(u, v);
        self.colors[i] = color;
        self.depths[i] = depth;
        self.labels[i] = label;
    }

    pub fn count_label(&self, label: PixelLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Projects a world point through the camera. Returns the integer pixel and
/// camera-frame depth, or `None` when the point is clipped or off-image.
pub fn project_point(
    intrinsics: &CameraIntrinsics,
    camera_pose: &Pose,
    point: Vec3,
) -> Option<((i64, i64), f64)> {
    let cam = camera_pose.rotation.transpose() * (point - camera_pose.translation);
    if cam.z < intrinsics.near_clip {
        return None;
    }
    let u = (intrinsics.fx * cam.x / cam.z + intrinsics.cx).round();
    let v = (intrinsics.fy * cam.y / cam.z + intrinsics.cy).round();
    if u < 0.0 || v < 0.0 || u >= intrinsics.width as f64 || v >= intrinsics.height as f64 {
        return None;
    }
    Some(((u as i64, v as i64), cam.z))
}

/// Depth ties closer than this are broken by point index.
const DEPTH_TIE_EPS: f64 = 1e-9;

/// Renders the fused actor + background clouds from `camera_pose`.
///
/// Every projected point paints a `(2*splat_radius+1)^2` pixel square at its
/// depth; per pixel the smallest depth wins and the winner's cloud of origin
/// sets the label. Actor points are indexed before background points, so
/// depth ties resolve to the actor first, then to the earlier point.
pub fn synthesize_view(
    actor: &RgbPointCloud,
    background: &RgbPointCloud,
    camera_pose: &Pose,
    intrinsics: &CameraIntrinsics,
    splat_radius: u32,
    clear_color: ColorRgb,
) -> LabeledImage {
    let mut image = LabeledImage::new_empty(intrinsics.width, intrinsics.height, clear_color);
    let mut winner_index = vec![usize::MAX; intrinsics.width * intrinsics.height];

    let mut splat_cloud = |cloud: &RgbPointCloud, label: PixelLabel, index_base: usize| {
        for (k, point) in cloud.points.iter().enumerate() {
            let Some(((u, v), depth)) = project_point(intrinsics, camera_pose, point.position)
            else {
                continue;
            };
            let point_index = index_base + k;
            let r = splat_radius as i64;
            let u_min = (u - r).max(0);
            let u_max = (u + r).min(intrinsics.width as i64 - 1);
            let v_min = (v - r).max(0);
            let v_max = (v + r).min(intrinsics.height as i64 - 1);
            for vv in v_min..=v_max {
                for uu in u_min..=u_max {
                    let i = vv as usize * intrinsics.width + uu as usize;
                    let replace = if winner_index[i] == usize::MAX
                        || depth < image.depths[i] - DEPTH_TIE_EPS
                    {
                        true
                    } else if depth <= image.depths[i] + DEPTH_TIE_EPS {
                        point_index < winner_index[i]
                    } else {
                        false
                    };
                    if replace {
                        image.colors[i] = point.color;
                        image.depths[i] = depth;
                        image.labels[i] = label;
                        winner_index[i] = point_index;
                    }
                }
            }
        }
    };

    splat_cloud(actor, PixelLabel::Actor, 0);
    splat_cloud(background, PixelLabel::Background, actor.len());
    image
}

// ---------------------------------------------------------------------------
// Image dumps: binary PPM for colors, binary PGM for label maps.

pub fn write_ppm(image: &LabeledImage, out: &mut impl Write) -> io::Result<()> {
    write!(out, "P6\n{} {}\n255\n", image.width, image.height)?;
    let mut bytes = Vec::with_capacity(image.colors.len() * 3);
    for c in &image.colors {
        bytes.extend_from_slice(&[c.r, c.g, c.b]);
    }
    out.write_all(&bytes)
}

pub const LABEL_ACTOR_GRAY: u8 = 255;
pub const LABEL_BACKGROUND_GRAY: u8 = 128;
pub const LABEL_EMPTY_GRAY: u8 = 0;

pub fn write_label_pgm(image: &LabeledImage, out: &mut impl Write) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", image.width, image.height)?;
    let bytes: Vec<u8> = image
        .labels
        .iter()
        .map(|l| match l {
            PixelLabel::Actor => LABEL_ACTOR_GRAY,
            PixelLabel::Background => LABEL_BACKGROUND_GRAY,
            PixelLabel::Empty => LABEL_EMPTY_GRAY,
        })
        .collect();
    out.write_all(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{look_at_pose, CloudPoint};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const GRAY: ColorRgb = ColorRgb::new(128, 128, 128);

    fn test_intrinsics() -> CameraIntrinsics {
        CameraIntrinsics {
            width: 101,
            height: 101,
            fx: 100.0,
            fy: 100.0,
            cx: 50.0,
            cy: 50.0,
            near_clip: 0.1,
        }
    }

    fn point(x: f64, y: f64, z: f64, c: ColorRgb) -> CloudPoint {
        CloudPoint {
            position: Vec3::new(x, y, z),
            color: c,
        }
    }

    #[test]
    fn project_on_axis() {
        let intr = test_intrinsics();
        let ((u, v), d) =
            project_point(&intr, &Pose::identity(), Vec3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!((u, v), (50, 50));
        assert_eq!(d, 2.0);
    }

    #[test]
    fn project_behind_camera() {
        let intr = test_intrinsics();
        assert!(project_point(&intr, &Pose::identity(), Vec3::new(0.0, 0.0, -1.0)).is_none());
        // inside the near clip
        assert!(project_point(&intr, &Pose::identity(), Vec3::new(0.0, 0.0, 0.05)).is_none());
    }

    #[test]
    fn project_pinhole_arithmetic() {
        let intr = test_intrinsics();
        let ((u, v), d) =
            project_point(&intr, &Pose::identity(), Vec3::new(0.5, 0.0, 1.0)).unwrap();
        assert_eq!((u, v), (100, 50));
        assert_eq!(d, 1.0);
    }

    #[test]
    fn project_respects_camera_pose() {
        let intr = test_intrinsics();
        // camera 5m up the x axis looking back at the origin
        let pose = look_at_pose(Vec3::new(5.0, 0.0, 0.0), Vec3::zeros(), Vec3::z()).unwrap();
        let ((u, v), d) = project_point(&intr, &pose, Vec3::zeros()).unwrap();
        assert_eq!((u, v), (50, 50));
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn empty_scene_is_all_empty() {
        let intr = test_intrinsics();
        let img = synthesize_view(
            &RgbPointCloud::default(),
            &RgbPointCloud::default(),
            &Pose::identity(),
            &intr,
            1,
            GRAY,
        );
        assert_eq!(img.count_label(PixelLabel::Empty), intr.width * intr.height);
        assert!(img.colors.iter().all(|&c| c == GRAY));
    }

    #[test]
    fn zbuffer_actor_wins_in_front() {
        let intr = test_intrinsics();
        let red = ColorRgb::new(255, 0, 0);
        let blue = ColorRgb::new(0, 0, 255);
        let actor = RgbPointCloud::new(vec![point(0.0, 0.0, 1.0, red)]);
        let bg = RgbPointCloud::new(vec![point(0.0, 0.0, 2.0, blue)]);
        let img = synthesize_view(&actor, &bg, &Pose::identity(), &intr, 0, GRAY);
        assert_eq!(img.label(50, 50), PixelLabel::Actor);
        assert_eq!(img.color(50, 50), red);
        assert_eq!(img.depth(50, 50), Some(1.0));
    }

    #[test]
    fn depth_tie_goes_to_lower_index() {
        let intr = test_intrinsics();
        let first = ColorRgb::new(10, 0, 0);
        let second = ColorRgb::new(20, 0, 0);
        let bg = RgbPointCloud::new(vec![
            point(0.0, 0.0, 1.0, first),
            point(0.0, 0.0, 1.0, second),
        ]);
        let img = synthesize_view(&RgbPointCloud::default(), &bg, &Pose::identity(), &intr, 0, GRAY);
        assert_eq!(img.color(50, 50), first);
    }

    #[test]
    fn splat_paints_square() {
        let intr = test_intrinsics();
        let red = ColorRgb::new(255, 0, 0);
        let actor = RgbPointCloud::new(vec![point(0.0, 0.0, 1.0, red)]);
        let img = synthesize_view(&actor, &RgbPointCloud::default(), &Pose::identity(), &intr, 2, GRAY);
        assert_eq!(img.count_label(PixelLabel::Actor), 25);
        for v in 48..=52 {
            for u in 48..=52 {
                assert_eq!(img.label(u, v), PixelLabel::Actor);
            }
        }
    }

    fn random_scene(seed: u64, n: usize) -> (RgbPointCloud, RgbPointCloud) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cloud = |count: usize| {
            RgbPointCloud::new(
                (0..count)
                    .map(|_| {
                        point(
                            rng.random_range(-1.0..1.0),
                            rng.random_range(-1.0..1.0),
                            rng.random_range(0.5..6.0),
                            ColorRgb::new(rng.random(), rng.random(), rng.random()),
                        )
                    })
                    .collect(),
            )
        };
        (cloud(n / 2), cloud(n / 2))
    }

    /// Exhaustive per-pixel oracle: depth must be the minimum over all
    /// points whose splat square covers the pixel.
    #[test]
    fn occlusion_matches_exhaustive_scan() {
        let intr = test_intrinsics();
        for seed in 0..4 {
            let (actor, bg) = random_scene(seed, 600);
            let radius = (seed % 3) as u32;
            let img = synthesize_view(&actor, &bg, &Pose::identity(), &intr, radius, GRAY);

            let all: Vec<&CloudPoint> = actor.points.iter().chain(bg.points.iter()).collect();
            for v in 0..intr.height {
                for u in 0..intr.width {
                    let mut best: Option<f64> = None;
                    for p in &all {
                        if let Some(((pu, pv), d)) = project_point(&intr, &Pose::identity(), p.position)
                        {
                            if (pu - u as i64).unsigned_abs() <= radius as u64
                                && (pv - v as i64).unsigned_abs() <= radius as u64
                            {
                                best = Some(best.map_or(d, |b: f64| b.min(d)));
                            }
                        }
                    }
                    assert_eq!(img.depth(u, v), best, "pixel ({u},{v}) seed {seed}");
                }
            }
        }
    }

    /// Rendering the clouds separately and composing by depth must agree
    /// with the fused render's label map.
    #[test]
    fn label_composition_consistency() {
        let intr = test_intrinsics();
        let (actor, bg) = random_scene(7, 800);
        let fused = synthesize_view(&actor, &bg, &Pose::identity(), &intr, 1, GRAY);
        let only_a = synthesize_view(&actor, &RgbPointCloud::default(), &Pose::identity(), &intr, 1, GRAY);
        let only_b = synthesize_view(&RgbPointCloud::default(), &bg, &Pose::identity(), &intr, 1, GRAY);
        for i in 0..fused.labels.len() {
            let expected = match (only_a.labels[i], only_b.labels[i]) {
                (PixelLabel::Empty, PixelLabel::Empty) => PixelLabel::Empty,
                (PixelLabel::Actor, PixelLabel::Empty) => PixelLabel::Actor,
                (PixelLabel::Empty, PixelLabel::Background) => PixelLabel::Background,
                (PixelLabel::Actor, PixelLabel::Background) => {
                    // actor wins ties because its points are indexed first
                    if only_a.depths[i] <= only_b.depths[i] + DEPTH_TIE_EPS {
                        PixelLabel::Actor
                    } else {
                        PixelLabel::Background
                    }
                }
                other => panic!("impossible single-cloud labels {other:?}"),
            };
            assert_eq!(fused.labels[i], expected, "pixel {i}");
        }
    }

    #[test]
    fn render_is_deterministic() {
        let intr = test_intrinsics();
        let (actor, bg) = random_scene(11, 500);
        let a = synthesize_view(&actor, &bg, &Pose::identity(), &intr, 1, GRAY);
        let b = synthesize_view(&actor, &bg, &Pose::identity(), &intr, 1, GRAY);
        assert_eq!(a, b);
    }

    #[test]
    fn ppm_pgm_bytes() {
        let mut img = LabeledImage::new_empty(2, 1, GRAY);
        img.set_pixel(0, 0, ColorRgb::new(1, 2, 3), 1.0, PixelLabel::Actor);
        img.set_pixel(1, 0, ColorRgb::new(4, 5, 6), 2.0, PixelLabel::Background);
        let mut ppm = Vec::new();
        write_ppm(&img, &mut ppm).unwrap();
        assert_eq!(ppm, b"P6\n2 1\n255\n\x01\x02\x03\x04\x05\x06");
        let mut pgm = Vec::new();
        write_label_pgm(&img, &mut pgm).unwrap();
        assert_eq!(pgm, b"P5\n2 1\n255\n\xff\x80");
    }
}
