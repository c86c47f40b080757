//! Runs successive convex approximation on a random three-user network and
//! prints the ascent trace.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wsee::sca::{sca_solve, ScaConfig};
use wsee::{InterferenceNetwork, PowerModel, WseeProblem};

fn main() -> wsee::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let k = 3;
    let theta = (0..k).map(|_| rng.gen_range(0.5..2.0)).collect();
    let eta = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 0.0 } else { rng.gen_range(0.01..0.3) }).collect())
        .collect();
    let net = InterferenceNetwork::new(theta, eta, vec![0.01; k])?;
    let prob = WseeProblem::new(net, PowerModel::uniform(k, 2.5, 1.0)?, vec![1.0; k], vec![2.0; k])?;

    let res = sca_solve(&prob, &ScaConfig::default())?;
    println!("start at full power: wsee {:.6}", res.f_initial);
    for (t, rec) in res.trace.iter().enumerate() {
        println!(
            "iter {:>2}: wsee {:.9} step {:<8} |Bp - p| {:.3e} {:?}",
            t + 1,
            rec.objective,
            rec.step_size,
            rec.step_norm,
            rec.line_search
        );
    }
    println!("{:?} after {} iterations", res.status, res.iters);
    println!("powers {:.5?}, stationarity residual {:.2e}", res.p_star, res.stationarity);

    // Starting elsewhere can end at a different stationary point.
    let low = sca_solve(&prob, &ScaConfig::default().with_start(vec![0.01; k]))?;
    println!("from low power: wsee {:.9} at {:.5?}", low.f_star, low.p_star);
    Ok(())
}
