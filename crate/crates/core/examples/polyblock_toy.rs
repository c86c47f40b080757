//! Monotonic optimization on toy problems: an increasing objective over a
//! normal set given only by a membership test.

use wsee::global::{polyblock_maximize, PolyblockConfig};

fn main() -> wsee::Result<()> {
    let cfg = PolyblockConfig::default();

    // max z1 + 2 z2 over the simplex: optimum 2 at (0, 1)
    let lp = polyblock_maximize(|z| z[0] + 2.0 * z[1], |z| z[0] + z[1] <= 1.0, &[1.0, 1.0], &cfg)?;
    println!(
        "simplex LP: {:.6} at {:.4?}, bound {:.6}, {} iterations",
        lp.value, lp.point, lp.upper_bound, lp.iters
    );

    // max z1 z2 z3 over the unit ball: optimum 3^(-3/2) at z_i = 1/sqrt 3
    let ball = polyblock_maximize(
        |z| z.iter().product(),
        |z| z.iter().map(|x| x * x).sum::<f64>() <= 1.0,
        &[1.0; 3],
        &cfg,
    )?;
    println!(
        "product on the ball: {:.6} (exact {:.6}) at {:.4?}, {} iterations, {} vertices at peak",
        ball.value,
        3f64.powf(-1.5),
        ball.point,
        ball.iters,
        ball.peak_vertices
    );

    let step = (ball.bound_trace.len() / 8).max(1);
    for (i, (u, v)) in ball.bound_trace.iter().zip(&ball.incumbent_trace).enumerate().step_by(step) {
        println!("  iter {i:>6}: bound {u:.6} incumbent {v:.6}");
    }
    Ok(())
}
