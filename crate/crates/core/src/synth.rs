//! Synthetic truss scenes with exact analytic ground truth: a single truss
//! on a uniform blue background, mirroring the lab setting the detector
//! expects. Ground truth derives from the scene geometry, never from
//! re-detecting the rendered raster.

use image::{Rgb, RgbImage};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SynthError;
use crate::geom::Point2;
use crate::imgproc::{Label, LabelMask};
use crate::tomato::TomatoCircle;

/// A pedicel attached to the peduncle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PedicelSpec {
    /// Attachment arc position along the peduncle, mm.
    pub arc_mm: f64,
    /// Branch angle relative to the local peduncle tangent, radians.
    pub branch_angle_rad: f64,
    pub length_mm: f64,
}

/// A tomato hanging from a pedicel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomatoSpec {
    pub pedicel: usize,
    pub radius_mm: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Palette {
    pub background: [u8; 3],
    pub stem: [u8; 3],
    pub tomato: [u8; 3],
}

impl Default for Palette {
    fn default() -> Self {
        // Hues near 220 (blue), 110 (green) and 0 (red) keep the classes
        // separable for the k-means stage.
        Self {
            background: [25, 75, 200],
            stem: [40, 160, 35],
            tomato: [205, 30, 25],
        }
    }
}

/// Full description of one synthetic scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrussSpec {
    /// Peduncle control polyline in truss-local millimetres.
    pub peduncle_mm: Vec<Point2>,
    pub pedicels: Vec<PedicelSpec>,
    pub tomatoes: Vec<TomatoSpec>,
    /// Truss pose in world (image) millimetres.
    pub translation_mm: Point2,
    pub rotation_rad: f64,
    pub px_per_mm: f64,
    pub width: u32,
    pub height: u32,
    pub palette: Palette,
    /// Gaussian channel jitter sigma (0 disables noise).
    pub noise_sigma: f64,
    /// Specular highlight disks on the tomatoes.
    pub highlights: bool,
    pub stem_diameter_mm: f64,
    /// Maximum allowed overlap of two tomato disks as a fraction of the
    /// smaller radius.
    pub max_tomato_overlap: f64,
}

/// Analytic ground truth in image pixels.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub mask: LabelMask,
    pub geom: TrussGeometry,
}

/// The serializable geometric truth of a scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrussGeometry {
    pub tomatoes: Vec<TomatoCircle>,
    pub junctions: Vec<Point2>,
    pub peduncle_px: Vec<Point2>,
    /// Eq-style center of mass of the true circles.
    pub com: Point2,
    /// Junction arc positions along the peduncle, mm.
    pub junction_arcs_mm: Vec<f64>,
    pub peduncle_len_mm: f64,
    pub px_per_mm: f64,
}

impl TrussGeometry {
    /// True grasp candidate intervals (mm) for a clearance L.
    pub fn grasp_intervals(&self, clearance_l_mm: f64) -> Vec<(f64, f64)> {
        let mut arcs = self.junction_arcs_mm.clone();
        arcs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        arcs
            .windows(2)
            .filter_map(|w| {
                let s = w[0] + clearance_l_mm;
                let e = w[1] - clearance_l_mm;
                (e - s >= 0.0).then_some((s, e))
            })
            .collect()
    }
}

/// Resample a polyline at roughly the given spacing, keeping endpoints.
fn densify(points: &[Point2], spacing: f64) -> Vec<Point2> {
    let mut out = Vec::new();
    for w in points.windows(2) {
        let d = w[0].dist(w[1]);
        let n = (d / spacing).ceil().max(1.0) as usize;
        for i in 0..n {
            let t = i as f64 / n as f64;
            out.push(Point2::new(
                w[0].x + (w[1].x - w[0].x) * t,
                w[0].y + (w[1].y - w[0].y) * t,
            ));
        }
    }
    out.push(*points.last().unwrap());
    out
}

fn arc_lengths(points: &[Point2]) -> Vec<f64> {
    let mut cum = vec![0.0];
    let mut acc = 0.0;
    for w in points.windows(2) {
        acc += w[0].dist(w[1]);
        cum.push(acc);
    }
    cum
}

fn point_at(points: &[Point2], cum: &[f64], s: f64) -> (Point2, Point2) {
    let total = *cum.last().unwrap();
    let s = s.clamp(0.0, total);
    let mut i = match cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
        Ok(i) => i,
        Err(i) => i - 1,
    };
    if i + 1 >= points.len() {
        i = points.len() - 2;
    }
    let seg = cum[i + 1] - cum[i];
    let t = if seg > 0.0 { (s - cum[i]) / seg } else { 0.0 };
    let a = points[i];
    let b = points[i + 1];
    let p = Point2::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t);
    let tangent = b.sub(a);
    (p, tangent)
}

struct SceneGeometry {
    peduncle_px: Vec<Point2>,
    pedicel_px: Vec<(Point2, Point2)>,
    junctions_px: Vec<Point2>,
    junction_arcs_mm: Vec<f64>,
    tomatoes_px: Vec<TomatoCircle>,
    peduncle_len_mm: f64,
}

fn scene_geometry(spec: &TrussSpec) -> Result<SceneGeometry, SynthError> {
    if spec.peduncle_mm.len() < 2 {
        return Err(SynthError::SpecViolation(
            "peduncle polyline needs at least two points".into(),
        ));
    }
    let to_world = |p: Point2| -> Point2 { p.rotated(spec.rotation_rad).add(spec.translation_mm) };
    let to_px = |p: Point2| -> Point2 { to_world(p).scale(spec.px_per_mm) };

    let dense_mm = densify(&spec.peduncle_mm, 0.5 / spec.px_per_mm.max(0.25));
    let cum = arc_lengths(&dense_mm);
    let total_mm = *cum.last().unwrap();

    let mut junctions_px = Vec::new();
    let mut junction_arcs = Vec::new();
    let mut pedicel_px = Vec::new();
    let mut tomatoes_px = Vec::new();

    for (i, ped) in spec.pedicels.iter().enumerate() {
        if !(0.0..=total_mm).contains(&ped.arc_mm) {
            return Err(SynthError::SpecViolation(format!(
                "pedicel {i} arc {} outside peduncle length {total_mm}",
                ped.arc_mm
            )));
        }
        let (attach_mm, tangent) = point_at(&dense_mm, &cum, ped.arc_mm);
        let t_angle = tangent.y.atan2(tangent.x);
        let dir = t_angle + ped.branch_angle_rad;
        let tip_mm = Point2::new(
            attach_mm.x + ped.length_mm * dir.cos(),
            attach_mm.y + ped.length_mm * dir.sin(),
        );
        junctions_px.push(to_px(attach_mm));
        junction_arcs.push(ped.arc_mm);
        pedicel_px.push((to_px(attach_mm), to_px(tip_mm)));

        for tom in spec.tomatoes.iter().filter(|t| t.pedicel == i) {
            let center_mm = Point2::new(
                attach_mm.x + (ped.length_mm + tom.radius_mm) * dir.cos(),
                attach_mm.y + (ped.length_mm + tom.radius_mm) * dir.sin(),
            );
            tomatoes_px.push(TomatoCircle::new(
                to_px(center_mm),
                tom.radius_mm * spec.px_per_mm,
            ));
        }
    }

    for (i, t) in spec.tomatoes.iter().enumerate() {
        if t.pedicel >= spec.pedicels.len() {
            return Err(SynthError::SpecViolation(format!(
                "tomato {i} references missing pedicel {}",
                t.pedicel
            )));
        }
    }

    // Non-overlap invariant.
    for i in 0..tomatoes_px.len() {
        for j in (i + 1)..tomatoes_px.len() {
            let (a, b) = (&tomatoes_px[i], &tomatoes_px[j]);
            let allowed = a.radius + b.radius - spec.max_tomato_overlap * a.radius.min(b.radius);
            if a.center.dist(b.center) < allowed {
                return Err(SynthError::SpecViolation(format!(
                    "tomatoes {i} and {j} overlap beyond the configured fraction"
                )));
            }
        }
    }

    // Everything inside the image bounds.
    let margin = 2.0;
    let (w, h) = (spec.width as f64, spec.height as f64);
    let check = |p: Point2, r: f64, what: &str| -> Result<(), SynthError> {
        if p.x - r < margin || p.y - r < margin || p.x + r > w - margin || p.y + r > h - margin {
            return Err(SynthError::SpecViolation(format!(
                "{what} at ({:.1}, {:.1}) r={r:.1} leaves the image",
                p.x, p.y
            )));
        }
        Ok(())
    };
    let stem_r_px = spec.stem_diameter_mm / 2.0 * spec.px_per_mm;
    let peduncle_px: Vec<Point2> = dense_mm.iter().map(|&p| to_px(p)).collect();
    for p in [peduncle_px[0], *peduncle_px.last().unwrap()] {
        check(p, stem_r_px, "peduncle")?;
    }
    for &(_, tip) in &pedicel_px {
        check(tip, stem_r_px, "pedicel")?;
    }
    for t in &tomatoes_px {
        check(t.center, t.radius, "tomato")?;
    }

    Ok(SceneGeometry {
        peduncle_px,
        pedicel_px,
        junctions_px,
        junction_arcs_mm: junction_arcs,
        tomatoes_px,
        peduncle_len_mm: total_mm,
    })
}

fn stamp_thick_polyline(mask: &mut LabelMask, points: &[Point2], radius_px: f64, label: Label) {
    let r2 = radius_px * radius_px;
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    for p in points {
        let x0 = ((p.x - radius_px).floor() as i64).max(0);
        let x1 = ((p.x + radius_px).ceil() as i64).min(w - 1);
        let y0 = ((p.y - radius_px).floor() as i64).max(0);
        let y1 = ((p.y + radius_px).ceil() as i64).min(h - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dx = x as f64 - p.x;
                let dy = y as f64 - p.y;
                if dx * dx + dy * dy <= r2 {
                    mask.set(x as u32, y as u32, label);
                }
            }
        }
    }
}

fn fill_disk(mask: &mut LabelMask, center: Point2, radius: f64, label: Label) {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let x0 = ((center.x - radius).floor() as i64).max(0);
    let x1 = ((center.x + radius).ceil() as i64).min(w - 1);
    let y0 = ((center.y - radius).floor() as i64).max(0);
    let y1 = ((center.y + radius).ceil() as i64).min(h - 1);
    let r2 = radius * radius;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let dx = x as f64 - center.x;
            let dy = y as f64 - center.y;
            if dx * dx + dy * dy <= r2 {
                mask.set(x as u32, y as u32, label);
            }
        }
    }
}

/// Render the scene deterministically for `(spec, seed)`, returning the RGB
/// image and analytic ground truth.
pub fn render(spec: &TrussSpec, seed: u64) -> Result<(RgbImage, GroundTruth), SynthError> {
    let geo = scene_geometry(spec)?;
    let stem_r_px = spec.stem_diameter_mm / 2.0 * spec.px_per_mm;

    let mut mask = LabelMask::filled(spec.width, spec.height, Label::Background);
    stamp_thick_polyline(&mut mask, &geo.peduncle_px, stem_r_px, Label::Stem);
    for (a, b) in &geo.pedicel_px {
        let seg = densify(&[*a, *b], 0.5);
        stamp_thick_polyline(&mut mask, &seg, stem_r_px, Label::Stem);
    }
    // Tomatoes draw last: the calyx end of each pedicel tucks under the fruit.
    for t in &geo.tomatoes_px {
        fill_disk(&mut mask, t.center, t.radius, Label::Tomato);
    }

    let mut img = RgbImage::new(spec.width, spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            let color = match mask.get(x, y) {
                Label::Background => spec.palette.background,
                Label::Stem => spec.palette.stem,
                Label::Tomato => spec.palette.tomato,
            };
            img.put_pixel(x, y, Rgb(color));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if spec.highlights {
        for t in &geo.tomatoes_px {
            let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let off = t.radius * 0.45;
            let hc = Point2::new(
                t.center.x + off * ang.cos(),
                t.center.y + off * ang.sin(),
            );
            let hr = t.radius * rng.random_range(0.12..0.2);
            let (w, h) = (spec.width as i64, spec.height as i64);
            for y in ((hc.y - hr).floor() as i64).max(0)..=((hc.y + hr).ceil() as i64).min(h - 1) {
                for x in
                    ((hc.x - hr).floor() as i64).max(0)..=((hc.x + hr).ceil() as i64).min(w - 1)
                {
                    let dx = x as f64 - hc.x;
                    let dy = y as f64 - hc.y;
                    if dx * dx + dy * dy <= hr * hr && mask.get(x as u32, y as u32) == Label::Tomato
                    {
                        let p = img.get_pixel_mut(x as u32, y as u32);
                        for c in 0..3 {
                            p.0[c] = p.0[c].saturating_add(60);
                        }
                    }
                }
            }
        }
    }
    if spec.noise_sigma > 0.0 {
        for p in img.pixels_mut() {
            for c in 0..3 {
                // Box-Muller from two uniform draws.
                let u1: f64 = rng.random_range(f64::EPSILON..1.0);
                let u2: f64 = rng.random_range(0.0..1.0);
                let n = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                let v = p.0[c] as f64 + n * spec.noise_sigma;
                p.0[c] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }

    let com = crate::tomato::center_of_mass(&geo.tomatoes_px)
        .map(|c| c.com)
        .unwrap_or(Point2::new(spec.width as f64 / 2.0, spec.height as f64 / 2.0));
    let truth = GroundTruth {
        mask,
        geom: TrussGeometry {
            tomatoes: geo.tomatoes_px,
            junctions: geo.junctions_px,
            peduncle_px: geo.peduncle_px,
            com,
            junction_arcs_mm: geo.junction_arcs_mm,
            peduncle_len_mm: geo.peduncle_len_mm,
            px_per_mm: spec.px_per_mm,
        },
    };
    Ok((img, truth))
}

/// Scene difficulty, mirroring the two experimental truss categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    /// Straight thick peduncle, well-separated tomatoes, no noise.
    Simple,
    /// Curved peduncle, tighter pedicels, mild noise and highlights.
    Realistic,
}

impl std::str::FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(Self::Simple),
            "realistic" => Ok(Self::Realistic),
            other => Err(format!("unknown difficulty '{other}'")),
        }
    }
}

/// Sample a random truss spec. Scenes keep one designated junction gap wide
/// enough for grasping, like the trusses selected for the experiments.
fn sample_spec(rng: &mut ChaCha8Rng, difficulty: Difficulty, width: u32, height: u32) -> TrussSpec {
    let px_per_mm = 2.0;
    let n_tomatoes = rng.random_range(3..=5usize);

    // Junction gaps: one designated wide gap, the rest moderate.
    let wide_gap_at = rng.random_range(0..n_tomatoes.saturating_sub(1).max(1));
    let mut arcs = Vec::new();
    let mut s = rng.random_range(18.0..30.0);
    for i in 0..n_tomatoes {
        arcs.push(s);
        if i + 1 < n_tomatoes {
            let gap = if i == wide_gap_at {
                rng.random_range(82.0..100.0)
            } else {
                match difficulty {
                    Difficulty::Simple => rng.random_range(42.0..60.0),
                    Difficulty::Realistic => rng.random_range(36.0..52.0),
                }
            };
            s += gap;
        }
    }
    let total_len = s + rng.random_range(18.0..30.0);

    // Peduncle control polyline, local frame, roughly centered on x.
    let mut peduncle = vec![Point2::new(-total_len / 2.0, 0.0)];
    match difficulty {
        Difficulty::Simple => {
            peduncle.push(Point2::new(total_len / 2.0, 0.0));
        }
        Difficulty::Realistic => {
            // Gentle bends well inside the 45-degree curvature rule.
            let n_ctrl = 4;
            let mut heading: f64 = 0.0;
            let mut p = peduncle[0];
            for _ in 0..n_ctrl {
                heading += rng.random_range(-0.14..0.14);
                let step = total_len / n_ctrl as f64;
                p = Point2::new(p.x + step * heading.cos(), p.y + step * heading.sin());
                peduncle.push(p);
            }
        }
    }

    let mut pedicels = Vec::new();
    let mut tomatoes = Vec::new();
    for (i, &arc) in arcs.iter().enumerate() {
        let side = if i % 2 == 0 { 1.0 } else { -1.0 };
        let branch = side
            * match difficulty {
                Difficulty::Simple => rng.random_range(70f64..110f64).to_radians(),
                Difficulty::Realistic => rng.random_range(60f64..120f64).to_radians(),
            };
        let length = rng.random_range(22.0..34.0);
        pedicels.push(PedicelSpec {
            arc_mm: arc,
            branch_angle_rad: branch,
            length_mm: length,
        });
        tomatoes.push(TomatoSpec {
            pedicel: i,
            radius_mm: rng.random_range(15.0..21.0),
        });
    }

    let rotation = match difficulty {
        Difficulty::Simple => rng.random_range(-0.35..0.35),
        Difficulty::Realistic => rng.random_range(-0.45..0.45),
    };
    let translation = Point2::new(
        width as f64 / px_per_mm / 2.0 + rng.random_range(-8.0..8.0),
        height as f64 / px_per_mm / 2.0 + rng.random_range(-6.0..6.0),
    );

    TrussSpec {
        peduncle_mm: peduncle,
        pedicels,
        tomatoes,
        translation_mm: translation,
        rotation_rad: rotation,
        px_per_mm,
        width,
        height,
        palette: Palette::default(),
        noise_sigma: match difficulty {
            Difficulty::Simple => 0.0,
            Difficulty::Realistic => 3.0,
        },
        highlights: difficulty == Difficulty::Realistic,
        stem_diameter_mm: match difficulty {
            Difficulty::Simple => 5.0,
            Difficulty::Realistic => 4.0,
        },
        max_tomato_overlap: 0.0,
    }
}

/// Generate `n` scenes deterministically from the seed. Specs violating the
/// scene invariants are resampled from the same stream, so generation stays
/// reproducible.
pub fn corpus(
    n: usize,
    seed: u64,
    difficulty: Difficulty,
) -> Vec<(TrussSpec, RgbImage, GroundTruth)> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let scene_seed: u64 = master.random();
        let mut rng = ChaCha8Rng::seed_from_u64(scene_seed);
        let spec = sample_spec(&mut rng, difficulty, 640, 480);
        match render(&spec, scene_seed) {
            Ok((img, truth)) => out.push((spec, img, truth)),
            Err(_) => continue, // invariant violation: draw the next spec
        }
    }
    out
}
