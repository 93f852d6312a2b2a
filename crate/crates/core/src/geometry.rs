//! Planar geometry for oriented square ROIs.
//!
//! Coordinates follow the image convention: x to the right, y downwards.
//! A [`RotRect`] lives in normalized image coordinates (both axes in `[0, 1]`)
//! with its side length measured in image-height units, so the ROI is square in
//! pixels rather than in normalized space. IoU is therefore computed on the
//! pixel realization of each rect ([`Quad`]).
//!
//! Polygons are stored with positive signed shoelace area, i.e. the vertex
//! order `(-,-) (+,-) (+,+) (-,+)` for an axis-aligned square.

use std::ops::{Add, Div, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Scales the x component by `rho`, mapping normalized coordinates into a
    /// space where both axes are measured in image-height units.
    pub fn aspect_corrected(self, rho: f64) -> Vec2 {
        Vec2::new(self.x * rho, self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

/// A keypoint with relative depth. `z` uses the same normalized unit as `x`;
/// smaller values are closer to the camera.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

// Serialized as a bare `[x, y, z]` triple.
impl Serialize for Vec3 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x, self.y, self.z].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vec3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [x, y, z] = <[f64; 3]>::deserialize(d)?;
        Ok(Vec3::new(x, y, z))
    }
}

/// An oriented square region of interest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotRect {
    /// Center in normalized image coordinates.
    pub center: Vec2,
    /// Side length as a fraction of image height.
    pub size: f64,
    /// Rotation in degrees, `[0, 360)`.
    pub rotation: f64,
}

impl RotRect {
    /// Builds a rect, normalizing the rotation into `[0, 360)`.
    pub fn new(center: Vec2, size: f64, rotation: f64) -> Self {
        Self {
            center,
            size,
            rotation: normalize_deg(rotation),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.center.is_finite()
            && self.size.is_finite()
            && self.size >= 0.0
            && (0.0..360.0).contains(&self.rotation)
    }
}

/// Pixel-space realization of a [`RotRect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub corners: [Vec2; 4],
}

impl Quad {
    pub fn area(&self) -> f64 {
        polygon_area(&self.corners)
    }

    /// Whether `p` lies inside the quad or on its boundary, within `tol`
    /// pixels.
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        (0..4).all(|i| {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % 4];
            let edge = b - a;
            let len = edge.norm();
            if len == 0.0 {
                return (p - a).norm() <= tol;
            }
            edge.cross(p - a) / len >= -tol
        })
    }
}

/// Maps any angle to `[0, 360)`.
pub fn normalize_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid can round tiny negatives up to exactly 360.0
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Direction of `b` as seen from `a`, in degrees within `(-180, 180]`.
pub fn angle_deg(a: Vec2, b: Vec2) -> Result<f64> {
    let d = b - a;
    if d.x == 0.0 && d.y == 0.0 {
        return Err(Error::DegenerateGeometry("angle between coincident points"));
    }
    let deg = d.y.atan2(d.x).to_degrees();
    Ok(if deg <= -180.0 { 180.0 } else { deg })
}

/// Rotates `v` by `theta` degrees. With y pointing down a positive angle
/// turns clockwise on screen.
pub fn rotate_vec(v: Vec2, theta: f64) -> Vec2 {
    let (s, c) = theta.to_radians().sin_cos();
    Vec2::new(v.x * c - v.y * s, v.x * s + v.y * c)
}

pub(crate) fn check_aspect(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidAspect(rho))
    }
}

pub(crate) fn check_image(width: f64, height: f64) -> Result<()> {
    if width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidImage { width, height })
    }
}

/// Distance between two normalized points, in image-height units.
pub fn aspect_distance(a: Vec2, b: Vec2, rho: f64) -> Result<f64> {
    check_aspect(rho)?;
    Ok((a.aspect_corrected(rho) - b.aspect_corrected(rho)).norm())
}

pub fn rect_to_quad(r: &RotRect, width: f64, height: f64) -> Result<Quad> {
    check_image(width, height)?;
    let rho = width / height;
    let h = r.size / 2.0;
    let offsets = [
        Vec2::new(-h, -h),
        Vec2::new(h, -h),
        Vec2::new(h, h),
        Vec2::new(-h, h),
    ];
    let corners = offsets.map(|o| {
        let o = rotate_vec(o, r.rotation);
        let p = Vec2::new(r.center.x + o.x / rho, r.center.y + o.y);
        Vec2::new(p.x * width, p.y * height)
    });
    Ok(Quad { corners })
}

/// Signed shoelace area (positive for the crate's vertex order).
fn signed_area(p: &[Vec2]) -> f64 {
    if p.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (i, a) in p.iter().enumerate() {
        let b = p[(i + 1) % p.len()];
        acc += a.cross(b);
    }
    acc / 2.0
}

pub fn polygon_area(p: &[Vec2]) -> f64 {
    signed_area(p).abs()
}

/// Sutherland-Hodgman clipping of one convex quad against another.
///
/// Returns the intersection polygon (at most 8 vertices) in the same
/// orientation as the inputs, or an empty vector.
pub fn convex_clip(subject: &Quad, clip: &Quad) -> Vec<Vec2> {
    let clip_area = signed_area(&clip.corners);
    if clip_area == 0.0 || signed_area(&subject.corners) == 0.0 {
        return Vec::new();
    }
    // Orient the clip edges so that "inside" is always the left-hand side.
    let orient = clip_area.signum();
    let mut output: Vec<Vec2> = subject.corners.to_vec();
    if signed_area(&output).signum() != orient {
        output.reverse();
    }

    for i in 0..4 {
        if output.is_empty() {
            break;
        }
        let a = clip.corners[i];
        let b = clip.corners[(i + 1) % 4];
        let edge = b - a;
        let side = |p: Vec2| orient * edge.cross(p - a);

        let input = std::mem::take(&mut output);
        let mut prev = *input.last().unwrap();
        let mut prev_side = side(prev);
        for &cur in &input {
            let cur_side = side(cur);
            if cur_side >= 0.0 {
                if prev_side < 0.0 {
                    output.push(intersect(prev, cur, prev_side, cur_side));
                }
                output.push(cur);
            } else if prev_side >= 0.0 {
                output.push(intersect(prev, cur, prev_side, cur_side));
            }
            prev = cur;
            prev_side = cur_side;
        }
    }

    output.dedup_by(|a, b| (*a - *b).norm() <= 1e-12);
    if output.len() > 1 && (output[0] - output[output.len() - 1]).norm() <= 1e-12 {
        output.pop();
    }
    if output.len() < 3 {
        output.clear();
    }
    output
}

fn intersect(p: Vec2, q: Vec2, sp: f64, sq: f64) -> Vec2 {
    let t = sp / (sp - sq);
    p + (q - p) * t
}

/// Intersection-over-union of two rects, evaluated on their pixel quads.
///
/// A zero-area rect scores 0 against a valid one; two zero-area rects are an
/// error since the ratio is undefined.
pub fn rotated_iou(a: &RotRect, b: &RotRect, width: f64, height: f64) -> Result<f64> {
    let qa = rect_to_quad(a, width, height)?;
    let qb = rect_to_quad(b, width, height)?;
    let area_a = qa.area();
    let area_b = qb.area();
    if area_a == 0.0 && area_b == 0.0 {
        return Err(Error::DegenerateGeometry("both rects have zero area"));
    }
    if area_a == 0.0 || area_b == 0.0 {
        return Ok(0.0);
    }
    let inter = polygon_area(&convex_clip(&qa, &qb));
    let union = area_a + area_b - inter;
    Ok((inter / union).clamp(0.0, 1.0))
}

/// Absolute angular difference on the 360 degree circle, in `[0, 180]`.
pub fn circular_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn angle_examples() {
        assert_eq!(
            angle_deg(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)).unwrap(),
            0.0
        );
        let a = angle_deg(Vec2::new(0.5, 0.8), Vec2::new(0.5, 0.5)).unwrap();
        assert!((a + 90.0).abs() < EPS);
        let a = angle_deg(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0)).unwrap();
        assert!((a - 45.0).abs() < EPS);
        assert_eq!(
            angle_deg(Vec2::new(0.0, 0.0), Vec2::new(-1.0, -0.0)).unwrap(),
            180.0
        );
        assert!(matches!(
            angle_deg(Vec2::new(0.3, 0.3), Vec2::new(0.3, 0.3)),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn rotate_examples() {
        assert_eq!(rotate_vec(Vec2::new(1.0, 0.0), 0.0), Vec2::new(1.0, 0.0));
        assert!(close(
            rotate_vec(Vec2::new(0.0, -0.08), 90.0),
            Vec2::new(0.08, 0.0),
            EPS
        ));
        assert!(close(
            rotate_vec(Vec2::new(1.0, 0.0), 360.0),
            Vec2::new(1.0, 0.0),
            EPS
        ));
    }

    #[test]
    fn aspect_distance_examples() {
        let d = aspect_distance(Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.5), 2.0).unwrap();
        assert!((d - 0.5).abs() < EPS);
        let d = aspect_distance(Vec2::new(0.2, 0.5), Vec2::new(0.4, 0.5), 2.0).unwrap();
        assert!((d - 0.4).abs() < EPS);
        let p = Vec2::new(0.7, 0.1);
        assert_eq!(aspect_distance(p, p, 1.3).unwrap(), 0.0);
        assert!(matches!(
            aspect_distance(p, p, 0.0),
            Err(Error::InvalidAspect(_))
        ));
        assert!(matches!(
            aspect_distance(p, p, -1.0),
            Err(Error::InvalidAspect(_))
        ));
    }

    fn corner_set(q: &Quad) -> Vec<(i64, i64)> {
        let mut v: Vec<_> = q
            .corners
            .iter()
            .map(|c| ((c.x * 1e6).round() as i64, (c.y * 1e6).round() as i64))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn rect_to_quad_examples() {
        let r = RotRect::new(Vec2::new(0.5, 0.5), 0.5, 0.0);
        let q = rect_to_quad(&r, 100.0, 100.0).unwrap();
        let mut want = vec![(25, 25), (25, 75), (75, 75), (75, 25)]
            .into_iter()
            .map(|(x, y)| (x * 1_000_000, y * 1_000_000))
            .collect::<Vec<_>>();
        want.sort();
        assert_eq!(corner_set(&q), want);
        assert!(signed_area(&q.corners) > 0.0);

        let q = rect_to_quad(&RotRect::new(Vec2::new(0.5, 0.5), 0.0, 30.0), 100.0, 100.0).unwrap();
        assert!(q.corners.iter().all(|c| *c == q.corners[0]));
        assert_eq!(q.area(), 0.0);

        let q = rect_to_quad(&r, 200.0, 100.0).unwrap();
        let mut want = vec![(75, 25), (125, 25), (125, 75), (75, 75)]
            .into_iter()
            .map(|(x, y)| (x * 1_000_000, y * 1_000_000))
            .collect::<Vec<_>>();
        want.sort();
        assert_eq!(corner_set(&q), want);
        assert!((q.area() - 2500.0).abs() < 1e-9);

        assert!(matches!(
            rect_to_quad(&r, 0.0, 10.0),
            Err(Error::InvalidImage { .. })
        ));
    }

    fn unit_square() -> Quad {
        Quad {
            corners: [
                Vec2::new(0.0, 0.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(0.0, 1.0),
            ],
        }
    }

    fn rotated_about_center(q: &Quad, deg: f64) -> Quad {
        let c = q.corners.iter().fold(Vec2::default(), |a, &b| a + b) / 4.0;
        Quad {
            corners: q.corners.map(|p| c + rotate_vec(p - c, deg)),
        }
    }

    #[test]
    fn clip_examples() {
        let s = unit_square();
        let same = convex_clip(&s, &s);
        assert!((polygon_area(&same) - 1.0).abs() < 1e-9);

        let far = Quad {
            corners: s.corners.map(|p| p + Vec2::new(5.0, 0.0)),
        };
        assert!(convex_clip(&s, &far).is_empty());

        let oct = convex_clip(&s, &rotated_about_center(&s, 45.0));
        assert_eq!(oct.len(), 8);
        let want = 2.0 * (2f64.sqrt() - 1.0);
        assert!((polygon_area(&oct) - want).abs() < 1e-12);
        assert!(signed_area(&oct) > 0.0);
    }

    #[test]
    fn clip_octagon_matches_sampling() {
        // Independent check of the octagon area on a fine grid.
        let s = unit_square();
        let r = rotated_about_center(&s, 45.0);
        let n = 2000;
        let mut inside = 0usize;
        for i in 0..n {
            for j in 0..n {
                let p = Vec2::new((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                if r.contains(p, 0.0) {
                    inside += 1;
                }
            }
        }
        let est = inside as f64 / (n * n) as f64;
        assert!((est - 0.828427).abs() < 1e-3, "{est}");
    }

    #[test]
    fn area_examples() {
        assert_eq!(polygon_area(&[]), 0.0);
        assert_eq!(
            polygon_area(&[Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0)]),
            0.0
        );
        assert_eq!(polygon_area(&unit_square().corners), 1.0);
        let tri = [
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.0, 2.0),
        ];
        assert_eq!(polygon_area(&tri), 2.0);
    }

    #[test]
    fn iou_examples() {
        let a = RotRect::new(Vec2::new(0.3, 0.6), 0.2, 17.0);
        assert!((rotated_iou(&a, &a, 640.0, 480.0).unwrap() - 1.0).abs() < 1e-12);

        let b = RotRect::new(Vec2::new(0.9, 0.1), 0.1, 0.0);
        assert_eq!(rotated_iou(&a, &b, 640.0, 480.0).unwrap(), 0.0);

        // One-pixel square in a 1x1 image against itself rotated by 45 degrees.
        let p = RotRect::new(Vec2::new(0.5, 0.5), 1.0, 0.0);
        let q = RotRect::new(Vec2::new(0.5, 0.5), 1.0, 45.0);
        let want = 1.0 / 2f64.sqrt();
        assert!((rotated_iou(&p, &q, 1.0, 1.0).unwrap() - want).abs() < 1e-9);

        let z = RotRect::new(Vec2::new(0.5, 0.5), 0.0, 0.0);
        assert_eq!(rotated_iou(&p, &z, 1.0, 1.0).unwrap(), 0.0);
        assert!(matches!(
            rotated_iou(&z, &z, 1.0, 1.0),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn circular_diff_examples() {
        assert_eq!(circular_diff_deg(10.0, 10.0), 0.0);
        assert!((circular_diff_deg(350.0, 10.0) - 20.0).abs() < EPS);
        assert_eq!(circular_diff_deg(180.0, -180.0), 0.0);
        assert_eq!(circular_diff_deg(0.0, 180.0), 180.0);
    }

    #[test]
    fn normalize_handles_rounding_edge() {
        assert_eq!(normalize_deg(-1e-18), 0.0);
        assert_eq!(normalize_deg(360.0), 0.0);
        assert_eq!(normalize_deg(-90.0), 270.0);
    }

    fn arb_rect() -> impl Strategy<Value = RotRect> {
        (0.0..1.0f64, 0.0..1.0f64, 0.01..0.8f64, -720.0..720.0f64)
            .prop_map(|(x, y, s, r)| RotRect::new(Vec2::new(x, y), s, r))
    }

    proptest! {
        #[test]
        fn rotation_preserves_norm(x in -10.0..10.0f64, y in -10.0..10.0f64, t in -1000.0..1000.0f64) {
            let v = Vec2::new(x, y);
            prop_assert!((rotate_vec(v, t).norm() - v.norm()).abs() < 1e-12);
        }

        #[test]
        fn quads_are_convex_and_positive(r in arb_rect(), w in 10.0..2000.0f64, h in 10.0..2000.0f64) {
            let q = rect_to_quad(&r, w, h).unwrap();
            prop_assert!(signed_area(&q.corners) > 0.0);
            for i in 0..4 {
                let a = q.corners[i];
                let b = q.corners[(i + 1) % 4];
                let c = q.corners[(i + 2) % 4];
                prop_assert!((b - a).cross(c - b) > 0.0);
            }
        }

        #[test]
        fn iou_symmetric(a in arb_rect(), b in arb_rect(), w in 10.0..2000.0f64, h in 10.0..2000.0f64) {
            let ab = rotated_iou(&a, &b, w, h).unwrap();
            let ba = rotated_iou(&b, &a, w, h).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn iou_self_is_one(a in arb_rect(), w in 10.0..2000.0f64, h in 10.0..2000.0f64) {
            prop_assert!((rotated_iou(&a, &a, w, h).unwrap() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn iou_square_symmetry(a in arb_rect(), b in arb_rect(), w in 10.0..2000.0f64, h in 10.0..2000.0f64) {
            let base = rotated_iou(&a, &b, w, h).unwrap();
            let turned = RotRect::new(a.center, a.size, a.rotation + 90.0);
            prop_assert!((rotated_iou(&turned, &b, w, h).unwrap() - base).abs() < 1e-9);
        }

        #[test]
        fn circular_diff_properties(a in -1e4..1e4f64, b in -1e4..1e4f64, k in -5i32..5) {
            let d = circular_diff_deg(a, b);
            prop_assert!((0.0..=180.0).contains(&d));
            prop_assert!((d - circular_diff_deg(b, a)).abs() < 1e-9);
            prop_assert!(circular_diff_deg(a, a + 360.0 * k as f64) < 1e-9);
        }
    }
}
