//! Evaluates the objective, its gradient and the rate decomposition on a
//! small two-user network.

use wsee::{InterferenceNetwork, PowerModel, WseeProblem};

fn main() -> wsee::Result<()> {
    let net = InterferenceNetwork::new(
        vec![1.0, 0.5],
        vec![vec![0.0, 0.2], vec![0.1, 0.0]],
        vec![0.01, 0.01],
    )?;
    let prob = WseeProblem::new(net, PowerModel::uniform(2, 2.5, 1.0)?, vec![1.0, 2.0], vec![1.0, 1.0])?;

    for p in [[0.0, 0.0], [0.1, 0.1], [1.0, 0.05], [1.0, 1.0]] {
        let rates = prob.network().rates(&p)?;
        let grad = prob.grad_wsee(&p)?;
        println!(
            "p = {p:?}: rates {:.4?} nats, wsee {:.5} nats/J, gradient {:.4?}",
            rates,
            prob.wsee(&p)?,
            grad
        );
    }

    let p = [0.3, 0.7];
    let split = prob.network().rate_dc_split(&p, 0)?;
    println!(
        "user 0 at {p:?}: ln(signal + interference) {:.5} - ln(interference) {:.5} = {:.5}",
        split.plus,
        split.minus,
        split.difference()
    );
    println!("problem as JSON:\n{}", prob.to_json()?);
    Ok(())
}
