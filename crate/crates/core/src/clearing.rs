//! Canonical outcome of simultaneous first-price auctions with reserves.
//!
//! Sellers post `(quantity, reserve)` offers; users bid against the demand
//! curve. Every bidding equilibrium has a single clearing price in
//! `[p_min, p_max]`; the canonical one uses `p_min` and clears as much as
//! possible.

use crate::demand::{DemandCurve, EPS};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SellerOffer {
    pub seller_id: usize,
    pub quantity: f64,
    pub reserve: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SellerBook {
    pub offers: Vec<SellerOffer>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClearingOutcome {
    pub price: f64,
    pub total_cleared: f64,
    /// Mass sold by each offer, in book order.
    pub sold: Vec<f64>,
}

/// `(Q^≤(b), Q^<(b), Q^=(b))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupplyProfile {
    pub q_leq: f64,
    pub q_lt: f64,
    pub q_eq: f64,
}

impl SellerBook {
    /// Book from `(quantity, reserve)` pairs; seller ids follow input order.
    pub fn new(offers: &[(f64, f64)]) -> Result<Self> {
        let offers = offers
            .iter()
            .enumerate()
            .map(|(seller_id, &(quantity, reserve))| SellerOffer {
                seller_id,
                quantity,
                reserve,
            })
            .collect();
        let book = SellerBook { offers };
        book.validate()?;
        Ok(book)
    }

    pub fn validate(&self) -> Result<()> {
        for (index, o) in self.offers.iter().enumerate() {
            if !(o.quantity >= 0.0 && o.quantity.is_finite()) {
                return Err(Error::InvalidOffer {
                    index,
                    reason: format!("quantity {} must be finite and non-negative", o.quantity),
                });
            }
            if !(o.reserve >= 0.0 && o.reserve.is_finite()) {
                return Err(Error::InvalidOffer {
                    index,
                    reason: format!("reserve {} must be finite and non-negative", o.reserve),
                });
            }
        }
        Ok(())
    }

    pub fn total_quantity(&self) -> f64 {
        self.offers.iter().map(|o| o.quantity).sum()
    }

    pub fn supply_profile(&self, b: f64) -> SupplyProfile {
        let mut q_leq = 0.0;
        let mut q_lt = 0.0;
        for o in &self.offers {
            if o.reserve <= b {
                q_leq += o.quantity;
                if o.reserve < b {
                    q_lt += o.quantity;
                }
            }
        }
        SupplyProfile {
            q_leq,
            q_lt,
            q_eq: q_leq - q_lt,
        }
    }

    /// Distinct reserve levels in increasing order with the cumulative supply
    /// offered at or below each.
    fn levels(&self) -> Vec<(f64, f64)> {
        let mut rs: Vec<(f64, f64)> = self.offers.iter().map(|o| (o.reserve, o.quantity)).collect();
        rs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(rs.len());
        let mut cum = 0.0;
        for (r, q) in rs {
            cum += q;
            match out.last_mut() {
                Some(last) if last.0 == r => last.1 = cum,
                _ => out.push((r, cum)),
            }
        }
        out
    }
}

/// `inf {b ≥ 0 : D^>(b) ≤ supply}` for a fixed supply level.
fn demand_exhausted_at(curve: &DemandCurve, supply: f64) -> f64 {
    if supply >= curve.total_mass() {
        0.0
    } else {
        curve.inverse_inf(supply)
    }
}

/// `sup {b ≥ 0 : D(b) ≥ supply}`; infinite when the supply is zero.
fn demand_covers_until(curve: &DemandCurve, supply: f64) -> f64 {
    if supply <= 0.0 {
        f64::INFINITY
    } else if supply > curve.total_mass() {
        f64::NEG_INFINITY
    } else {
        curve.inverse_sup(supply)
    }
}

/// `p_min = inf {b : D^>(b) ≤ Q^≤(b)}` given the book's reserve levels.
fn p_min_from_levels(curve: &DemandCurve, levels: &[(f64, f64)]) -> f64 {
    // Below the first reserve nothing is offered.
    let first = levels.first().map_or(f64::INFINITY, |l| l.0);
    let b = demand_exhausted_at(curve, 0.0);
    if b < first {
        return b;
    }
    for (k, &(r, cum)) in levels.iter().enumerate() {
        let next = levels.get(k + 1).map_or(f64::INFINITY, |l| l.0);
        let b = r.max(demand_exhausted_at(curve, cum));
        if b < next {
            return b;
        }
    }
    // Unreachable for finite reserves: the last level extends to infinity.
    levels.last().map_or(b, |l| l.0)
}

pub fn supply_profile(book: &SellerBook, b: f64) -> SupplyProfile {
    book.supply_profile(b)
}

/// `(p_min, p_max)`. `p_max` is infinite only when no positive supply is offered.
pub fn clearing_bounds(book: &SellerBook, curve: &DemandCurve) -> (f64, f64) {
    let levels = book.levels();
    let p_min = p_min_from_levels(curve, &levels);

    // p_max = sup {b : D(b) ≥ Q^<(b)}. Q^< is 0 on [0, r_1] and equals the
    // cumulative supply of level k on (r_k, r_{k+1}].
    let mut p_max = levels.first().map_or(f64::INFINITY, |l| l.0);
    for (k, &(r, cum)) in levels.iter().enumerate() {
        let next = levels.get(k + 1).map_or(f64::INFINITY, |l| l.0);
        let b = demand_covers_until(curve, cum).min(next);
        if b > r {
            p_max = p_max.max(b);
        }
    }
    (p_min, p_max)
}

/// `(B_min(p), B_max(p))`, the cleared masses consistent with price `p`.
pub fn cleared_range(book: &SellerBook, curve: &DemandCurve, p: f64) -> Result<(f64, f64)> {
    let (p_min, p_max) = clearing_bounds(book, curve);
    let tol = EPS * p_max.abs().max(1.0);
    if p < p_min - tol || p > p_max + tol {
        return Err(Error::PriceOutsideClearingRange { price: p, p_min, p_max });
    }
    let s = book.supply_profile(p);
    let b_min = curve.d_right(p).max(s.q_lt);
    let b_max = curve.d(p).min(s.q_leq);
    Ok((b_min, b_max))
}

/// Minimal clearing price, maximal cleared mass, and the allocation across
/// sellers. Ties at the clearing reserve share the residual in proportion to
/// quantity.
pub fn canonical_clear(book: &SellerBook, curve: &DemandCurve) -> ClearingOutcome {
    let levels = book.levels();
    let price = p_min_from_levels(curve, &levels);
    let s = book.supply_profile(price);
    let total = curve.d(price).min(s.q_leq);
    let residual = (total - s.q_lt).max(0.0);
    let sold = book
        .offers
        .iter()
        .map(|o| {
            if o.reserve < price {
                o.quantity
            } else if o.reserve > price || s.q_eq <= 0.0 {
                0.0
            } else {
                residual * o.quantity / s.q_eq
            }
        })
        .collect();
    ClearingOutcome {
        price,
        total_cleared: s.q_lt + residual.min(s.q_eq),
        sold,
    }
}
