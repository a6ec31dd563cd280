use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{ObjectKind, Scene};
use crate::worldgen::{terrain_height, Region};

const SEABED: [f64; 3] = [194.0, 178.0, 128.0];
const AGENT: [f64; 3] = [255.0, 120.0, 0.0];
/// Agent triangle length in meters, never drawn shorter than this many pixels.
const AGENT_LENGTH: f64 = 1.2;
const AGENT_MIN_PIXELS: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SnapshotError {
    #[error("snapshot bounds {0:?} are degenerate")]
    DegenerateBounds(Region),
    #[error("snapshot resolution must be at least 1x1, got {0}x{1}")]
    ZeroResolution(u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnapshotSettings {
    /// Write a snapshot alongside every capture.
    pub enabled: bool,
    pub width: u32,
    pub height: u32,
    pub bounds: Region,
}

impl Default for SnapshotSettings {
    fn default() -> Self {
        Self {
            enabled: true,
            width: 128,
            height: 128,
            bounds: Region::default(),
        }
    }
}

pub fn kind_color(kind: ObjectKind) -> [u8; 3] {
    match kind {
        ObjectKind::Oyster => [235, 232, 215],
        ObjectKind::Rock => [105, 105, 110],
        ObjectKind::Coral => [250, 110, 140],
        ObjectKind::Grass => [60, 160, 70],
        ObjectKind::Shipwreck => [120, 80, 50],
        ObjectKind::BluerovStatic => [250, 200, 40],
    }
}

/// Binary PPM (P6) container for packed RGB rows.
pub fn encode_ppm(width: u32, height: u32, rgb: &[u8]) -> Vec<u8> {
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(rgb);
    out
}

struct Raster {
    width: u32,
    height: u32,
    bounds: Region,
    pixels: Vec<[f64; 3]>,
}

impl Raster {
    fn pixel_size(&self) -> (f64, f64) {
        (
            self.bounds.width() / f64::from(self.width),
            self.bounds.height() / f64::from(self.height),
        )
    }

    /// World coordinates of the center of pixel (col, row); row 0 is the +Y edge.
    fn center(&self, col: u32, row: u32) -> (f64, f64) {
        let (sx, sy) = self.pixel_size();
        (
            self.bounds.min[0] + (f64::from(col) + 0.5) * sx,
            self.bounds.max[1] - (f64::from(row) + 0.5) * sy,
        )
    }

    fn pixel_of(&self, x: f64, y: f64) -> Option<(u32, u32)> {
        let (sx, sy) = self.pixel_size();
        let col = ((x - self.bounds.min[0]) / sx).floor();
        let row = ((self.bounds.max[1] - y) / sy).floor();
        let inside =
            col >= 0.0 && row >= 0.0 && col < f64::from(self.width) && row < f64::from(self.height);
        inside.then_some((col as u32, row as u32))
    }

    fn set(&mut self, col: u32, row: u32, c: [f64; 3]) {
        self.pixels[(row * self.width + col) as usize] = c;
    }

    /// Paints every pixel whose center satisfies `inside`, scanning only the
    /// pixels overlapping the world-space box `[x0, x1] x [y0, y1]`.
    fn fill(
        &mut self,
        (x0, y0, x1, y1): (f64, f64, f64, f64),
        c: [f64; 3],
        inside: impl Fn(f64, f64) -> bool,
    ) {
        let (sx, sy) = self.pixel_size();
        let col0 = ((x0 - self.bounds.min[0]) / sx).floor().max(0.0);
        let col1 = ((x1 - self.bounds.min[0]) / sx)
            .ceil()
            .min(f64::from(self.width));
        let row0 = ((self.bounds.max[1] - y1) / sy).floor().max(0.0);
        let row1 = ((self.bounds.max[1] - y0) / sy)
            .ceil()
            .min(f64::from(self.height));
        if !(col0 < col1 && row0 < row1) {
            return;
        }
        for row in row0 as u32..row1 as u32 {
            for col in col0 as u32..col1 as u32 {
                let (x, y) = self.center(col, row);
                if inside(x, y) {
                    self.set(col, row, c);
                }
            }
        }
    }
}

/// Top-down orthographic view of `settings.bounds`: shaded seabed, one disc
/// per object, a triangle for the agent pointing along its yaw, everything
/// tinted toward the water color by `1 - exp(-turbidity)`.
pub fn render_topdown(
    scene: &Scene,
    settings: &SnapshotSettings,
) -> Result<Vec<u8>, SnapshotError> {
    let (width, height) = (settings.width, settings.height);
    if width == 0 || height == 0 {
        return Err(SnapshotError::ZeroResolution(width, height));
    }
    if settings.bounds.is_degenerate() {
        return Err(SnapshotError::DegenerateBounds(settings.bounds));
    }
    let mut r = Raster {
        width,
        height,
        bounds: settings.bounds,
        pixels: vec![SEABED; (width * height) as usize],
    };

    let terrain = scene.terrain();
    if terrain.amplitude > 0.0 {
        for row in 0..height {
            for col in 0..width {
                let (x, y) = r.center(col, row);
                let shade = 0.8 + 0.2 * terrain_height(terrain, x, y) / terrain.amplitude;
                r.set(col, row, SEABED.map(|c| c * shade));
            }
        }
    }

    for o in scene.objects() {
        let (ox, oy) = (o.pose.position.x, o.pose.position.y);
        let c = kind_color(o.kind).map(f64::from);
        let rad = o.bounding_radius;
        r.fill((ox - rad, oy - rad, ox + rad, oy + rad), c, |x, y| {
            (x - ox).powi(2) + (y - oy).powi(2) <= rad * rad
        });
        // small objects stay visible at coarse resolutions
        if let Some((col, row)) = r.pixel_of(ox, oy) {
            r.set(col, row, c);
        }
    }

    let agent = scene.agent();
    let (px, py) = (agent.position.x, agent.position.y);
    let (sx, sy) = r.pixel_size();
    let len = AGENT_LENGTH.max(AGENT_MIN_PIXELS * sx.max(sy));
    let (s, c) = agent.orientation.yaw.to_radians().sin_cos();
    let tip = (px + c * len, py + s * len);
    let back = (px - c * len / 2.0, py - s * len / 2.0);
    let a = (back.0 - s * len / 2.0, back.1 + c * len / 2.0);
    let b = (back.0 + s * len / 2.0, back.1 - c * len / 2.0);
    let tri = [tip, a, b];
    let bbox = (
        tri.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        tri.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        tri.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
        tri.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    r.fill(bbox, AGENT, |x, y| in_triangle((x, y), tri));

    let water = scene.water();
    let t = (1.0 - (-water.turbidity).exp()).clamp(0.0, 1.0);
    let tint = water.color.map(|w| w * 255.0);
    let mut rgb = Vec::with_capacity((width * height * 3) as usize);
    for p in &r.pixels {
        for ch in 0..3 {
            let v = p[ch] * (1.0 - t) + tint[ch] * t;
            rgb.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(encode_ppm(width, height, &rgb))
}

fn in_triangle(p: (f64, f64), [a, b, c]: [(f64, f64); 3]) -> bool {
    let cross = |o: (f64, f64), u: (f64, f64), v: (f64, f64)| {
        (u.0 - o.0) * (v.1 - o.1) - (u.1 - o.1) * (v.0 - o.0)
    };
    let d1 = cross(a, b, p);
    let d2 = cross(b, c, p);
    let d3 = cross(c, a, p);
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}
