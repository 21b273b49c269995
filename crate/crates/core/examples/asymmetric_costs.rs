//! Per-miner write costs: shares depend on the price, so price-setter
//! candidates come from a damped fixed point.

use ledger_equilibria::oracle::{verify_equilibrium, GridConfig};
use ledger_equilibria::{DemandCurve, FixedPointConfig, LedgerMarket, WriteCost};

fn main() -> ledger_equilibria::Result<()> {
    let curve = DemandCurve::new(vec![(0.0, 2.0), (0.6, 1.2), (1.5, 0.0)])?;
    let m = LedgerMarket::new(curve, 0.8, 0.1, vec![1.0, 1.2, 1.5], WriteCost::PerMiner(vec![0.0, 0.05, 0.1]))?;
    let grid = GridConfig::default();

    let mc = m.market_clearing_candidate()?;
    let v = verify_equilibrium(&m, &mc.profile(), &grid);
    println!("market-clearing at {:.4}: shares {:?}, equilibrium {}", mc.clearing_price, mc.shares, v.is_equilibrium);

    let fp = FixedPointConfig { damping: 0.3, ..FixedPointConfig::default() };
    for i in 0..m.n() {
        let c = m.price_setter_candidate_with(i, &fp)?;
        let v = verify_equilibrium(&m, &c.profile(), &grid);
        println!("price-setter {i}: reserve {:.4}, degenerate {}, equilibrium {}, gain {:.1e}", c.clearing_price, c.degenerate, v.is_equilibrium, v.max_gain);
    }

    let b = m.min_block_reward()?;
    println!("sufficient block reward {:.4} (share level {:?})", b.bound, b.share_level);
    let at = m.with_block_reward(b.bound);
    let v = verify_equilibrium(&at, &at.market_clearing_candidate()?.profile(), &grid);
    println!("equilibrium at that reward: {}", v.is_equilibrium);
    Ok(())
}
