//! Block rewards move investment but not prices, and a large enough reward
//! restores the market-clearing equilibrium.

use ledger_equilibria::oracle::{verify_equilibrium, GridConfig};
use ledger_equilibria::{DemandCurve, LedgerMarket, WriteCost};

fn main() -> ledger_equilibria::Result<()> {
    let grid = GridConfig::default();
    let m = LedgerMarket::new(DemandCurve::linear(1.0, 1.0)?, 0.5, 0.0, vec![1.0; 3], WriteCost::Uniform(0.0))?;
    for b in [0.0, 1.0, 10.0] {
        let c = m.with_block_reward(b).market_clearing_candidate()?;
        println!("B = {b:>4}: price {:.4}, shares {:?}, total investment {:.4}", c.clearing_price, c.shares, c.total_investment());
    }

    let bound = m.min_block_reward()?;
    println!("sufficient block reward {:.4} (epsilon {:.4}, X {:.4})", bound.bound, bound.epsilon, bound.capped_revenue);
    let at = m.with_block_reward(bound.bound);
    let v = verify_equilibrium(&at, &at.market_clearing_candidate()?.profile(), &grid);
    println!("equilibrium at that reward: {} (gain {:.1e})", v.is_equilibrium, v.max_gain);

    let mc = m.market_clearing_candidate()?;
    let moved = m.block_reward_rescale(&mc, 5.0)?;
    println!("rescaled to B = 5: investments {:?}", moved.investments);
    Ok(())
}
