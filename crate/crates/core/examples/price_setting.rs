//! Price-setting game with fixed quantities.

use ledger_equilibria::{DemandCurve, PriceKind, PriceSettingInstance};

fn show(label: &str, inst: &PriceSettingInstance) -> ledger_equilibria::Result<()> {
    println!("{label}: p0 = {:.4}", inst.saturated_price()?);
    for i in 0..inst.quantities.len() {
        let (r, v) = inst.price_setter_optimum(i)?;
        println!("  seller {i}: threshold {:.4}, best price {r:.4} earning {v:.4}", inst.saturated_threshold(i)?);
    }
    for eq in inst.enumerate_equilibria()? {
        let kind = match eq.kind {
            PriceKind::Saturated => "saturated".to_string(),
            PriceKind::PriceSetter(i) => format!("price-setter {i}"),
        };
        println!("  equilibrium: {kind} at {:.4}, payoffs {:?}, search gain {:.1e}", eq.clearing_price, eq.payoffs, eq.oracle_gain);
    }
    Ok(())
}

fn main() -> ledger_equilibria::Result<()> {
    let lin = DemandCurve::linear(1.0, 1.0)?;
    show("two sellers with 1/4 each", &PriceSettingInstance::new(vec![0.25, 0.25], vec![0.0; 2], lin.clone())?)?;
    show("three sellers with 1/3 each", &PriceSettingInstance::new(vec![1.0 / 3.0; 3], vec![0.0; 3], lin.clone())?)?;
    show("sellers with 0.6 and 0.4", &PriceSettingInstance::new(vec![0.6, 0.4], vec![0.0; 2], lin)?)?;
    Ok(())
}
