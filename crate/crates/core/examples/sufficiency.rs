//! Sufficient conditions for the market-clearing equilibrium.

use ledger_equilibria::ledger::cover_ratio_sup;
use ledger_equilibria::oracle::{verify_equilibrium, GridConfig};
use ledger_equilibria::{DemandCurve, LedgerMarket, WriteCost};

fn main() -> ledger_equilibria::Result<()> {
    let lin = DemandCurve::linear(1.0, 1.0)?;
    println!("sup_z cover ratio at Q_A = 3/4: {:.9}", cover_ratio_sup(&lin, 0.75, 0.0)?);
    let grid = GridConfig::default();
    println!("{:>6} {:>3} {:>8} {:>9} {:>7}", "Q_A", "n", "regular", "threshold", "oracle");
    for n in [2, 3, 5] {
        for qa in [0.2, 0.4, 0.6, 0.75, 0.9] {
            let m = LedgerMarket::new(lin.clone(), qa, 0.0, vec![1.0; n], WriteCost::Uniform(0.0))?;
            let regular = m.sufficiency_regular().map_or("n/a".to_string(), |b| b.to_string());
            let exact = m.sufficiency_threshold()?.per_miner_pass.iter().all(|p| *p);
            let v = verify_equilibrium(&m, &m.market_clearing_candidate()?.profile(), &grid);
            println!("{qa:>6} {n:>3} {regular:>8} {exact:>9} {:>7}", v.is_equilibrium);
        }
    }
    Ok(())
}
