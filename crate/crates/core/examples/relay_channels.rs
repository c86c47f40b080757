//! Draws relay-channel realizations, maps them to SINR coefficients and
//! writes both the raw channels and the resulting problem to disk.

use std::env;
use std::path::PathBuf;

use wsee::mwrc::{generate_channels, ChannelGenConfig, Scenario};
use wsee::PowerModel;

fn main() -> wsee::Result<()> {
    let dir = env::args().nth(1).map_or_else(env::temp_dir, PathBuf::from);
    let gen = ChannelGenConfig::new(2024, 3);
    let scenario = Scenario {
        p0: 1.0,
        n0: 1e-2,
        nk: 1e-2,
    };
    for r in 0..3 {
        let ch = generate_channels(&gen, &scenario, r)?;
        println!("realization {r}");
        for k in 0..ch.users() {
            println!(
                "  stream {k} -> user {}: |h|^2 {:.4}, relay gain at receiver {:.2}",
                ch.receiver(k),
                ch.h[k].norm_sqr(),
                ch.effective_gain(ch.receiver(k))
            );
        }
        let p = [0.5, 0.2, 0.8];
        let net = ch.to_interference_network()?;
        for k in 0..3 {
            println!("  rate {k}: mapped {:.12} direct {:.12}", net.rate(&p, k)?, ch.direct_rate(&p, k)?);
        }
        if r == 0 {
            let raw = dir.join("channel_r0.json");
            let problem = dir.join("problem_r0.json");
            ch.save_dump(&raw)?;
            ch.to_problem(PowerModel::uniform(3, 2.5, 1.0)?, vec![1.0; 3], vec![1.0; 3])?
                .save(&problem)?;
            println!("  wrote {} and {}", raw.display(), problem.display());
        }
    }
    Ok(())
}
