//! Procedural point-cloud scenes for simulations, demos and tests.

use std::path::{Path, PathBuf};

use crate::geom::{save_ply, CloudPoint, ColorRgb, RgbPointCloud, Vec3};
use crate::scenario::{PathWaypoint, ScenarioFile};
use crate::Result;

pub const WHITE: ColorRgb = ColorRgb::new(240, 240, 240);
pub const OFF_WHITE: ColorRgb = ColorRgb::new(230, 230, 230);
pub const BRICK: ColorRgb = ColorRgb::new(150, 60, 50);
pub const SKY_BLUE: ColorRgb = ColorRgb::new(110, 180, 230);

/// Rectangular lattice patch: points `origin + i*spacing*u_dir + j*spacing*v_dir`
/// covering `u_len x v_len`, colored per point.
pub fn lattice_patch(
    origin: Vec3,
    u_dir: Vec3,
    v_dir: Vec3,
    u_len: f64,
    v_len: f64,
    spacing: f64,
    color: impl Fn(Vec3) -> ColorRgb,
) -> RgbPointCloud {
    let nu = (u_len / spacing).round() as usize;
    let nv = (v_len / spacing).round() as usize;
    let mut points = Vec::with_capacity((nu + 1) * (nv + 1));
    for i in 0..=nu {
        for j in 0..=nv {
            let position = origin + u_dir * (i as f64 * spacing) + v_dir * (j as f64 * spacing);
            points.push(CloudPoint {
                position,
                color: color(position),
            });
        }
    }
    RgbPointCloud::new(points)
}

/// Axis-aligned box surface (all six faces), centered at `center`.
pub fn box_cloud(center: Vec3, size: Vec3, spacing: f64, color: ColorRgb) -> RgbPointCloud {
    let h = size / 2.0;
    let faces = [
        // (origin, u_dir, v_dir, u_len, v_len)
        (Vec3::new(-h.x, -h.y, -h.z), Vec3::x(), Vec3::y(), size.x, size.y), // bottom
        (Vec3::new(-h.x, -h.y, h.z), Vec3::x(), Vec3::y(), size.x, size.y),  // top
        (Vec3::new(-h.x, -h.y, -h.z), Vec3::x(), Vec3::z(), size.x, size.z), // south
        (Vec3::new(-h.x, h.y, -h.z), Vec3::x(), Vec3::z(), size.x, size.z),  // north
        (Vec3::new(-h.x, -h.y, -h.z), Vec3::y(), Vec3::z(), size.y, size.z), // west
        (Vec3::new(h.x, -h.y, -h.z), Vec3::y(), Vec3::z(), size.y, size.z),  // east
    ];
    let mut points = Vec::new();
    for (origin, u, v, ul, vl) in faces {
        points.extend(lattice_patch(center + origin, u, v, ul, vl, spacing, |_| color).points);
    }
    RgbPointCloud::new(points)
}

pub fn merge(clouds: impl IntoIterator<Item = RgbPointCloud>) -> RgbPointCloud {
    let mut points = Vec::new();
    for c in clouds {
        points.extend(c.points);
    }
    RgbPointCloud::new(points)
}

/// White standing-person stand-in: a 0.4 x 0.4 x 1.7 m box centered at the
/// origin, so path waypoints carry the body-center height.
pub fn white_actor() -> RgbPointCloud {
    box_cloud(Vec3::zeros(), Vec3::new(0.4, 0.4, 1.7), 0.08, WHITE)
}

pub const FLOOR_GRAY: ColorRgb = ColorRgb::new(90, 90, 95);

/// The bundled mission environment: a gray floor between a white wall along
/// the north edge and a brick wall along the south edge. Cameras north of
/// the actor see it against brick (distinct); cameras south of it see it
/// against white (ambiguous for a white actor).
pub fn desk_background() -> RgbPointCloud {
    let spacing = 0.2;
    let floor = lattice_patch(
        Vec3::new(-5.0, -8.0, 0.0),
        Vec3::x(),
        Vec3::y(),
        45.0,
        16.0,
        spacing,
        |_| FLOOR_GRAY,
    );
    let south_wall = lattice_patch(
        Vec3::new(-5.0, -8.0, 0.0),
        Vec3::x(),
        Vec3::z(),
        45.0,
        4.0,
        spacing,
        |_| BRICK,
    );
    let north_wall = lattice_patch(
        Vec3::new(-5.0, 8.0, 0.0),
        Vec3::x(),
        Vec3::z(),
        45.0,
        4.0,
        spacing,
        |_| OFF_WHITE,
    );
    merge([floor, south_wall, north_wall])
}

/// Shade that shares an 8-bin RGB cell with [`SKY_BLUE`] without being
/// pixel-identical.
pub const SKY_BLUE_WALL: ColorRgb = ColorRgb::new(115, 185, 225);

/// Two-camera evaluation scene: a sky-blue box actor between a brick wall
/// (north) and a wall painted the actor's color (south). The camera south
/// of the actor sees it against brick and should score far better than the
/// camera north of it, which sees it against its own color.
pub struct TwoCameraScene {
    pub actor: RgbPointCloud,
    pub background: RgbPointCloud,
    pub actor_center: Vec3,
    pub camera_distinct: Vec3,
    pub camera_ambiguous: Vec3,
}

pub fn two_camera_scene() -> TwoCameraScene {
    let actor_center = Vec3::new(0.0, 0.0, 0.6);
    let actor = box_cloud(actor_center, Vec3::new(0.6, 0.6, 1.2), 0.05, SKY_BLUE);
    let brick_wall = lattice_patch(
        Vec3::new(-12.0, 5.0, 0.0),
        Vec3::x(),
        Vec3::z(),
        24.0,
        4.0,
        0.1,
        |_| BRICK,
    );
    let blue_wall = lattice_patch(
        Vec3::new(-12.0, -5.0, 0.0),
        Vec3::x(),
        Vec3::z(),
        24.0,
        4.0,
        0.1,
        |_| SKY_BLUE_WALL,
    );
    let floor = lattice_patch(
        Vec3::new(-12.0, -5.0, 0.0),
        Vec3::x(),
        Vec3::y(),
        24.0,
        10.0,
        0.15,
        |_| FLOOR_GRAY,
    );
    TwoCameraScene {
        actor,
        background: merge([brick_wall, blue_wall, floor]),
        actor_center,
        camera_distinct: Vec3::new(0.0, -4.0, 1.5),
        camera_ambiguous: Vec3::new(0.0, 4.0, 1.5),
    }
}

/// Scenario for the bundled desk mission: the white actor walks an
/// out-and-back loop between the walls while the drone starts on the south
/// (ambiguous) side, on the start view sphere.
pub fn desk_mission(background_ply: PathBuf, actor_ply: PathBuf) -> ScenarioFile {
    let waypoints = [
        (0.0, [0.0, -1.0, 0.85]),
        (14.0, [14.0, -1.0, 0.85]),
        (18.0, [14.0, -4.0, 0.85]),
        (30.0, [2.0, -4.0, 0.85]),
        (34.0, [2.0, -1.0, 0.85]),
        (46.0, [14.0, -1.0, 0.85]),
        (50.0, [14.0, -4.0, 0.85]),
        (58.0, [6.0, -4.0, 0.85]),
    ];
    let elevation = 20f64.to_radians();
    let start = Vec3::new(0.0, -1.0 - 5.0 * elevation.cos(), 0.85 + 5.0 * elevation.sin());
    ScenarioFile {
        background_ply,
        actor_ply,
        actor_path: waypoints
            .iter()
            .map(|&(t, pos)| PathWaypoint { t, pos })
            .collect(),
        duration_s: 60.0,
        tick_hz: 20.0,
        drone_start: [start.x, start.y, start.z],
        seed: 0,
        planner: Default::default(),
        camera: Default::default(),
        detect: Default::default(),
    }
}

/// Materializes the desk scene into a directory: both clouds plus
/// `mission.toml`. Returns the scenario path.
pub fn write_desk_scene(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    save_ply(dir.join("actor.ply"), &white_actor())?;
    save_ply(dir.join("background.ply"), &desk_background())?;
    let file = desk_mission("background.ply".into(), "actor.ply".into());
    let toml = toml::to_string_pretty(&file)
        .map_err(|e| crate::Error::Scenario(format!("serialize scenario: {e}")))?;
    let path = dir.join("mission.toml");
    std::fs::write(&path, toml)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_counts_and_colors() {
        let patch = lattice_patch(
            Vec3::zeros(),
            Vec3::x(),
            Vec3::y(),
            1.0,
            2.0,
            0.5,
            |p| if p.x > 0.6 { BRICK } else { WHITE },
        );
        assert_eq!(patch.len(), 3 * 5);
        assert_eq!(patch.points[0].color, WHITE);
        assert!(patch.points.iter().any(|p| p.color == BRICK));
    }

    #[test]
    fn desk_scene_is_bounded() {
        let bg = desk_background();
        assert!(bg.len() <= 50_000, "background has {} points", bg.len());
        assert!(bg.len() > 10_000);
        let actor = white_actor();
        assert!(actor.len() > 100 && actor.len() < 3000);
    }
}
