//! Tullock contest for blockspace shares.

use ledger_equilibria::tullock::{self, c_star, c_star_asym, CostProfile};

fn main() -> ledger_equilibria::Result<()> {
    for costs in [vec![1.0, 1.0, 1.0], vec![1.0, 2.0, 4.0], vec![0.5, 0.6, 0.9, 3.0]] {
        let s = c_star(&costs)?;
        println!("costs {costs:?}: c* = {:.6}, shares {:?}", s.c_star, s.shares);
    }

    let s = c_star_asym(&CostProfile {
        resource_costs: vec![1.0, 1.0],
        write_costs: Some(vec![0.0, 0.1]),
        block_reward: 0.0,
        reference_price: 0.5,
    })?;
    println!("asymmetric write costs: shares {:?}", s.shares);

    // Exact loss from over-investing against the bound.
    let y = 1.0;
    let costs = [1.0, 1.0, 1.0];
    let sol = c_star(&costs)?;
    let q: Vec<f64> = sol.shares.iter().map(|x| x * y / sol.c_star).collect();
    let base = tullock::payoff(y, &q, 0, 1.0);
    for z in [0.1, 0.5, 1.0, 2.0] {
        let mut dev = q.clone();
        dev[0] += z * y / sol.c_star;
        let loss = base - tullock::payoff(y, &dev, 0, 1.0);
        let bound = tullock::investment_loss_bound(y, (costs[0] / sol.c_star).min(1.0), z);
        println!("z = {z}: loss {loss:.5} >= bound {bound:.5}");
    }
    Ok(())
}
