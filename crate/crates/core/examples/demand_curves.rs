//! Building demand curves and querying them.

use ledger_equilibria::DemandCurve;

fn main() -> ledger_equilibria::Result<()> {
    // Kinked curve with a jump at 0.6: two breakpoints at the same price.
    let curve = DemandCurve::new(vec![(0.0, 2.0), (0.6, 1.2), (0.6, 0.8), (1.5, 0.0)])?;
    println!("v_max = {}, D(0) = {}", curve.v_max(), curve.total_mass());
    for p in [0.0, 0.3, 0.6, 1.0, 2.0] {
        println!("D({p}) = {:.4}  D^>({p}) = {:.4}", curve.eval(p)?, curve.eval_right(p)?);
    }
    for y in [1.0, 1.6] {
        let inv = curve.inverse(y)?;
        println!("inverse({y}) = [{:.4}, {:.4}]", inv.inf_price, inv.sup_price);
    }

    let lin = DemandCurve::linear(1.0, 1.0)?;
    println!("virtual value of 1 - x at 0.3: {}", lin.virtual_value(0.3)?);
    println!("regular: {}", lin.check_regular(256).regular);
    let m = lin.monopoly_revenue(0.0, 0.0)?;
    println!("monopoly price {} revenue {}", m.price, m.value);
    println!("k(0.5) for Q_A = 3/4: {}", lin.cover_function(0.75, 0.0, 0.5)?);
    Ok(())
}
