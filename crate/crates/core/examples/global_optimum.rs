//! Certifies the global optimum of a two-user relay instance with
//! Dinkelbach's method and compares it with the SCA stationary point.

use std::env;

use wsee::bench::{sweep_channel, sweep_problem, SweepConfig};
use wsee::global::{dinkelbach_solve, DinkelbachConfig};
use wsee::sca::{sca_solve, ScaConfig};

fn main() -> wsee::Result<()> {
    let pmax_db: f64 = env::args().nth(1).map_or(Ok(-10.0), |s| s.parse()).expect("power level in dB");
    let cfg = SweepConfig {
        users: 2,
        ..SweepConfig::default()
    };
    for r in 0..3 {
        let prob = sweep_problem(&cfg, &sweep_channel(&cfg, r)?, pmax_db)?;
        let global = dinkelbach_solve(&prob, &DinkelbachConfig::default())?;
        let sca = sca_solve(&prob, &ScaConfig::default())?;
        println!("realization {r} at {pmax_db} dB: {:?}", global.status);
        for (t, o) in global.trace.iter().enumerate() {
            println!(
                "  outer {}: lambda {:.9} F {:.3e} inner iterations {} (bound {:.6}, incumbent {:.6})",
                t + 1,
                o.lambda,
                o.f_value,
                o.inner_iters,
                o.upper_bound,
                o.incumbent
            );
        }
        println!(
            "  global {:.9} at {:.4?}\n  sca    {:.9} at {:.4?}",
            global.f_star, global.p_star, sca.f_star, sca.p_star
        );
    }
    Ok(())
}
