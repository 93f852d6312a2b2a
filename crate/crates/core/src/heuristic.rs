//! The pose-to-hand ROI heuristic and gold ROI construction.
//!
//! Everything inside [`calc_hand_roi`] runs in aspect-corrected space
//! (`x * rho`, `y`), where both axes are measured in image-height units.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    angle_deg, aspect_distance, check_aspect, check_image, normalize_deg, rotate_vec, RotRect,
    Vec2, Vec3,
};

/// Hand landmark indices in the 21-point hand topology.
pub mod landmark {
    pub const WRIST: usize = 0;
    pub const THUMB_MCP: usize = 2;
    pub const INDEX_MCP: usize = 5;
    pub const MIDDLE_MCP: usize = 9;
    pub const PINKY_MCP: usize = 17;
}

/// Scale from the bounding square of the landmarks to the gold ROI side.
pub const DEFAULT_GOLD_SCALE: f64 = 2.0;

/// The six body-pose keypoints of one hand, in normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseHand {
    pub shoulder: Vec3,
    pub elbow: Vec3,
    pub wrist: Vec3,
    pub thumb: Vec3,
    pub index: Vec3,
    pub pinky: Vec3,
}

impl PoseHand {
    /// Keypoints in feature order.
    pub fn keypoints(&self) -> [Vec3; 6] {
        [
            self.shoulder,
            self.elbow,
            self.wrist,
            self.thumb,
            self.index,
            self.pinky,
        ]
    }

    pub fn keypoints_mut(&mut self) -> [&mut Vec3; 6] {
        [
            &mut self.shoulder,
            &mut self.elbow,
            &mut self.wrist,
            &mut self.thumb,
            &mut self.index,
            &mut self.pinky,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.keypoints().iter().all(|k| k.is_finite())
    }

    /// Runs [`calc_hand_roi`] on the projected wrist, index and pinky.
    pub fn heuristic_roi(&self, rho: f64) -> Result<RotRect> {
        calc_hand_roi(self.wrist.xy(), self.index.xy(), self.pinky.xy(), rho)
    }
}

/// One annotated hand landmark in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Landmark {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Landmark {
    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

impl Serialize for Landmark {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x, self.y, self.confidence].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Landmark {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [x, y, confidence] = <[f64; 3]>::deserialize(d)?;
        Ok(Landmark { x, y, confidence })
    }
}

/// 21 annotated hand landmarks (pixel coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hand21 {
    pub points: [Landmark; 21],
}

impl Hand21 {
    pub fn new(points: [Landmark; 21]) -> Result<Self> {
        let hand = Hand21 { points };
        hand.validate()?;
        Ok(hand)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::InvalidSample(format!("landmark {i} is not finite")));
            }
            if !(0.0..=1.0).contains(&p.confidence) {
                return Err(Error::InvalidSample(format!(
                    "landmark {i} confidence {} outside [0, 1]",
                    p.confidence
                )));
            }
        }
        Ok(())
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.points.iter().map(Landmark::pos)
    }
}

/// Rough hand ROI from the wrist, index and pinky body keypoints.
///
/// The rotation is taken from the unshifted center; the center is then moved
/// along the rotated hand axis and the size scaled by 2.7.
pub fn calc_hand_roi(wrist: Vec2, index: Vec2, pinky: Vec2, rho: f64) -> Result<RotRect> {
    check_aspect(rho)?;
    // (2 * index + pinky) / 3, written to be exact when index == pinky
    let center = index + (pinky - index) / 3.0;
    let size = 2.0 * aspect_distance(center, wrist, rho)?;
    if size == 0.0 {
        return Err(Error::DegenerateHand(
            "wrist coincides with the hand center",
        ));
    }
    let rotation =
        normalize_deg(angle_deg(wrist.aspect_corrected(rho), center.aspect_corrected(rho))? + 90.0);
    let shift = rotate_vec(Vec2::new(0.0, -0.1 * size), rotation);
    let center = Vec2::new(center.x + shift.x / rho, center.y + shift.y);
    Ok(RotRect {
        center,
        size: 2.7 * size,
        rotation,
    })
}

/// Closed-form size of [`calc_hand_roi`].
pub fn closed_form_size(wrist: Vec2, index: Vec2, pinky: Vec2, rho: f64) -> Result<f64> {
    check_aspect(rho)?;
    let dx = wrist.x - (2.0 * index.x + pinky.x) / 3.0;
    let dy = wrist.y - (2.0 * index.y + pinky.y) / 3.0;
    Ok(5.4 * (rho * rho * dx * dx + dy * dy).sqrt())
}

/// Reference ROI from 21 annotated landmarks.
///
/// The box is oriented by the wrist to middle-MCP direction, bounds all
/// landmarks in that frame, is squared on its longer side and scaled by
/// `scale`.
pub fn gold_roi(hand: &Hand21, width: f64, height: f64, scale: f64) -> Result<RotRect> {
    check_image(width, height)?;
    let first = hand.points[0].pos();
    if hand.positions().all(|p| p == first) {
        return Err(Error::DegenerateHand("all landmarks coincide"));
    }
    let wrist = hand.points[landmark::WRIST].pos();
    let middle = hand.points[landmark::MIDDLE_MCP].pos();
    if wrist == middle {
        return Err(Error::DegenerateHand("wrist coincides with middle MCP"));
    }
    let rotation = normalize_deg(angle_deg(wrist, middle)? + 90.0);

    let centroid = hand.positions().fold(Vec2::default(), |a, p| a + p) / 21.0;
    let (mut lo, mut hi) = (
        Vec2::new(f64::INFINITY, f64::INFINITY),
        Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in hand.positions() {
        let q = rotate_vec(p - centroid, -rotation);
        lo = Vec2::new(lo.x.min(q.x), lo.y.min(q.y));
        hi = Vec2::new(hi.x.max(q.x), hi.y.max(q.y));
    }
    let side = (hi.x - lo.x).max(hi.y - lo.y) * scale;
    let center = centroid + rotate_vec((lo + hi) / 2.0, rotation);
    Ok(RotRect {
        center: Vec2::new(center.x / width, center.y / height),
        size: side / height,
        rotation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rect_to_quad;
    use proptest::prelude::*;

    #[test]
    fn upright_hand_step_by_step() {
        let r = calc_hand_roi(
            Vec2::new(0.5, 0.8),
            Vec2::new(0.5, 0.5),
            Vec2::new(0.5, 0.5),
            1.0,
        )
        .unwrap();
        assert!((r.center.x - 0.5).abs() < 1e-12);
        assert!((r.center.y - 0.44).abs() < 1e-12);
        assert!((r.size - 1.62).abs() < 1e-12);
        assert!(r.rotation.abs() < 1e-12);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        for p in [
            Vec2::new(0.4, 0.4),
            Vec2::new(0.1, 0.9),
            Vec2::new(0.37, 0.61),
        ] {
            assert!(matches!(
                calc_hand_roi(p, p, p, 1.3),
                Err(Error::DegenerateHand(_))
            ));
        }
    }

    #[test]
    fn closed_form_examples() {
        let s = closed_form_size(
            Vec2::new(0.0, 0.0),
            Vec2::new(0.3, 0.0),
            Vec2::new(0.3, 0.0),
            1.0,
        )
        .unwrap();
        assert!((s - 1.62).abs() < 1e-12);
        let s = closed_form_size(
            Vec2::new(0.2, 0.5),
            Vec2::new(0.4, 0.5),
            Vec2::new(0.4, 0.5),
            2.0,
        )
        .unwrap();
        assert!((s - 2.16).abs() < 1e-12);
        let p = Vec2::new(0.1, 0.9);
        assert!(closed_form_size(p, p, p, 1.7).unwrap() < 1e-15);
        let p = Vec2::new(0.5, 0.25);
        assert_eq!(closed_form_size(p, p, p, 1.7).unwrap(), 0.0);
    }

    #[test]
    fn rotated_hand_on_wide_image() {
        // Wrist to the left of the knuckles in aspect-corrected space: the
        // hand points along +x, so the ROI is turned a quarter clockwise.
        let r = calc_hand_roi(
            Vec2::new(0.2, 0.5),
            Vec2::new(0.3, 0.5),
            Vec2::new(0.3, 0.5),
            2.0,
        )
        .unwrap();
        assert!((r.rotation - 90.0).abs() < 1e-9);
        // size0 = 2 * 0.2 = 0.4 height units; shift 0.04 height units along +x
        assert!((r.center.x - (0.3 + 0.04 / 2.0)).abs() < 1e-12);
        assert!((r.center.y - 0.5).abs() < 1e-12);
    }

    fn hand_from(points: &[(f64, f64)]) -> Hand21 {
        let mut lm = [Landmark::default(); 21];
        for (i, l) in lm.iter_mut().enumerate() {
            let (x, y) = points[i % points.len()];
            *l = Landmark {
                x,
                y,
                confidence: 1.0,
            };
        }
        Hand21 { points: lm }
    }

    fn square_hand() -> Hand21 {
        // Square with corners (40,40)-(60,60); wrist (index 0) bottom-left,
        // middle MCP (index 9) top-left so the hand points straight up.
        let mut h = hand_from(&[(40.0, 60.0), (60.0, 60.0), (60.0, 40.0), (40.0, 40.0)]);
        h.points[landmark::MIDDLE_MCP] = Landmark {
            x: 40.0,
            y: 40.0,
            confidence: 1.0,
        };
        h
    }

    #[test]
    fn gold_axis_aligned_square() {
        let r = gold_roi(&square_hand(), 100.0, 100.0, 1.0).unwrap();
        assert!(r.rotation.abs() < 1e-12);
        assert!((r.size - 0.2).abs() < 1e-12);
        assert!((r.center.x - 0.5).abs() < 1e-12);
        assert!((r.center.y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gold_scale_is_linear() {
        let h = square_hand();
        let one = gold_roi(&h, 100.0, 80.0, 1.0).unwrap();
        let two = gold_roi(&h, 100.0, 80.0, 2.0).unwrap();
        assert!((two.size - 2.0 * one.size).abs() < 1e-12);
        assert_eq!(one.center, two.center);
        assert_eq!(one.rotation, two.rotation);
    }

    #[test]
    fn gold_degenerate_cases() {
        let h = hand_from(&[(3.0, 3.0)]);
        assert!(matches!(
            gold_roi(&h, 10.0, 10.0, 2.0),
            Err(Error::DegenerateHand(_))
        ));
        let mut h = square_hand();
        h.points[landmark::MIDDLE_MCP] = h.points[landmark::WRIST];
        assert!(matches!(
            gold_roi(&h, 10.0, 10.0, 2.0),
            Err(Error::DegenerateHand(_))
        ));
    }

    fn arb_point() -> impl Strategy<Value = Vec2> {
        (0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| Vec2::new(x, y))
    }

    fn arb_hand() -> impl Strategy<Value = Hand21> {
        prop::collection::vec((0.0..640.0f64, 0.0..480.0f64), 21)
            .prop_map(|pts| hand_from(&pts))
            .prop_filter("wrist != middle", |h| {
                h.points[landmark::WRIST].pos() != h.points[landmark::MIDDLE_MCP].pos()
            })
    }

    proptest! {
        #[test]
        fn translation_equivariance(
            w in arb_point(), i in arb_point(), p in arb_point(),
            dx in -0.5..0.5f64, dy in -0.5..0.5f64, rho in 0.5..2.5f64,
        ) {
            let d = Vec2::new(dx, dy);
            let a = calc_hand_roi(w, i, p, rho);
            prop_assume!(a.is_ok());
            let a = a.unwrap();
            let b = calc_hand_roi(w + d, i + d, p + d, rho).unwrap();
            prop_assert!(((b.center - a.center) - d).norm() < 1e-9);
            prop_assert!((a.size - b.size).abs() < 1e-9);
            prop_assert!(crate::geometry::circular_diff_deg(a.rotation, b.rotation) < 1e-9);
        }

        #[test]
        fn gold_contains_landmarks(h in arb_hand(), scale in 1.0..3.0f64) {
            let r = gold_roi(&h, 640.0, 480.0, scale).unwrap();
            let q = rect_to_quad(&r, 640.0, 480.0).unwrap();
            for p in h.positions() {
                prop_assert!(q.contains(p, 1e-6));
            }
        }

        #[test]
        fn gold_rotation_ignores_other_landmarks(h in arb_hand(), other in arb_hand()) {
            let mut mixed = other;
            mixed.points[landmark::WRIST] = h.points[landmark::WRIST];
            mixed.points[landmark::MIDDLE_MCP] = h.points[landmark::MIDDLE_MCP];
            let a = gold_roi(&h, 640.0, 480.0, 2.0).unwrap();
            let b = gold_roi(&mixed, 640.0, 480.0, 2.0).unwrap();
            prop_assert_eq!(a.rotation, b.rotation);
        }
    }
}
