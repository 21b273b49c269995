//! Brute-force best responses against an arbitrary profile.

use ledger_equilibria::oracle::{best_response, evaluate, verify_equilibrium, GridConfig, StrategyProfile};
use ledger_equilibria::{DemandCurve, LedgerMarket, WriteCost};

fn main() -> ledger_equilibria::Result<()> {
    let m = LedgerMarket::new(DemandCurve::linear(1.0, 1.0)?, 0.75, 0.0, vec![1.0; 3], WriteCost::Uniform(0.0))?;
    let profile = StrategyProfile {
        investments: vec![0.05, 0.04, 0.03],
        reserves: vec![0.25, 0.3, 0.0],
    };
    let out = evaluate(&m, &profile);
    println!("price {:.4}, appends {:?}, payoffs {:?}", out.price, out.quantities, out.payoffs);

    let grid = GridConfig::default();
    for i in 0..m.n() {
        let br = best_response(&m, &profile, i, &grid);
        println!("miner {i}: best q {:.5} r {:.4}, gain {:.6}", br.deviation.investment, br.deviation.reserve, br.gain());
    }

    let mc = m.market_clearing_candidate()?;
    for g in [GridConfig { q_points: 64, r_points: 64, ..grid }, grid, grid.doubled()] {
        let v = verify_equilibrium(&m, &mc.profile(), &g);
        println!("{}x{} grid: equilibrium {}, gain {:.1e}", g.q_points, g.r_points, v.is_equilibrium, v.max_gain);
    }
    Ok(())
}
