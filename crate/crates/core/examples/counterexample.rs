//! A star-shaped, law-invariant deviation that is not consistent with the convex order.

use stardev::duality::build_counterexample;

fn main() -> stardev::Result<()> {
    let b = build_counterexample(2000, 0.4)?;
    println!("D = {}", b.functional);
    println!("D(X) = {:.6}", b.d_x);
    println!("D(Y) = {:.6}  (X and Y share a law: {})", b.d_y, b.same_dist_ok);
    println!("D(Z) = {:.6}  (Z below X in convex order: {})", b.d_z, b.convex_order_ok);
    println!("D(Z) - D(X) = {:.6}", b.margin);
    Ok(())
}
