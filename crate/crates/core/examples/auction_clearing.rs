//! Canonical clearing of a seller book against a demand curve, and the same
//! price recovered from a discretized bidder population.

use ledger_equilibria::clearing::{canonical_clear, cleared_range, clearing_bounds, SellerBook};
use ledger_equilibria::oracle::{discrete_clearing_price, discretize_demand};
use ledger_equilibria::DemandCurve;

fn main() -> ledger_equilibria::Result<()> {
    let curve = DemandCurve::linear(1.0, 1.0)?;
    let third = 1.0 / 3.0;
    let book = SellerBook::new(&[(third, 1.0 / 6.0), (third, 0.0), (third, 0.0)])?;

    let (p_min, p_max) = clearing_bounds(&book, &curve);
    println!("clearing prices lie in [{p_min:.6}, {p_max:.6}]");
    let out = canonical_clear(&book, &curve);
    println!("canonical price {:.6}, cleared {:.6}", out.price, out.total_cleared);
    for (o, s) in book.offers.iter().zip(&out.sold) {
        println!("  seller {} reserve {:.4} sells {:.6}", o.seller_id, o.reserve, s);
    }
    let (lo, hi) = cleared_range(&book, &curve, out.price)?;
    println!("cleared mass at that price: [{lo:.6}, {hi:.6}]");

    for k in [4, 8, 12] {
        let bids = discretize_demand(&curve, 1 << k);
        println!("2^{k} bidders: price {:.6}", discrete_clearing_price(&book, &bids));
    }
    Ok(())
}
