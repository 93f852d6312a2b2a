//! Oriented-square IoU through polygon clipping.
//!
//! ```text
//! cargo run --example rotated_iou
//! ```

use hand_roi::geometry::{convex_clip, polygon_area, rect_to_quad, rotated_iou};
use hand_roi::{RotRect, Vec2};

fn main() -> hand_roi::Result<()> {
    let (w, h) = (1280.0, 720.0);
    let base = RotRect::new(Vec2::new(0.5, 0.5), 0.3, 0.0);

    println!("rotation sweep against an axis-aligned copy:");
    for deg in [0.0, 15.0, 30.0, 45.0, 60.0, 90.0] {
        let r = RotRect::new(base.center, base.size, deg);
        println!("  {deg:>4} deg  IoU {:.6}", rotated_iou(&base, &r, w, h)?);
    }

    println!("horizontal shift:");
    for dx in [0.0, 0.05, 0.1, 0.2, 0.4] {
        let r = RotRect::new(base.center + Vec2::new(dx, 0.0), base.size, 0.0);
        println!("  dx {dx:.2}  IoU {:.6}", rotated_iou(&base, &r, w, h)?);
    }

    let a = rect_to_quad(&base, w, h)?;
    let b = rect_to_quad(&RotRect::new(base.center, base.size, 45.0), w, h)?;
    let clipped = convex_clip(&a, &b);
    println!(
        "45 deg intersection: {} vertices, area {:.1} px^2 of {:.1}",
        clipped.len(),
        polygon_area(&clipped),
        a.area()
    );
    Ok(())
}
