//! Linear demand, one unit of appends, three unit-cost miners: neither
//! candidate survives the oracle, so there is no pure equilibrium.

use ledger_equilibria::oracle::{verify_equilibrium, GridConfig};
use ledger_equilibria::{DemandCurve, LedgerMarket, WriteCost};

fn main() -> ledger_equilibria::Result<()> {
    let m = LedgerMarket::new(DemandCurve::linear(1.0, 1.0)?, 1.0, 0.0, vec![1.0; 3], WriteCost::Uniform(0.0))?;
    let grid = GridConfig::default();

    let mc = m.market_clearing_candidate()?;
    let v = verify_equilibrium(&m, &mc.profile(), &grid);
    println!("market-clearing at {:.4}: degenerate {}, equilibrium {}, gain {:.6}", mc.clearing_price, mc.degenerate, v.is_equilibrium, v.max_gain);

    let ps = m.price_setter_candidate(0)?;
    println!("price-setter reserve {:.6}, total investment {:.6}", ps.clearing_price, ps.total_investment());
    println!("price-setter revenue {:.6}, payoff {:.6}", ps.revenues[0], ps.payoffs[0]);
    let v = verify_equilibrium(&m, &ps.profile(), &grid);
    if let Some(w) = v.witness {
        println!("miner {} gains {:.6} by investing {:.6} at reserve {:.4}", w.miner, w.gain, w.deviation.investment, w.deviation.reserve);
    }
    Ok(())
}
