//! Brute-force verification.
//!
//! Payoffs are computed directly from the game's definition: appends are
//! split in proportion to investment, the induced book clears canonically,
//! and each miner earns its auction revenue net of costs plus its share of
//! the block reward. Best responses are searched on a grid of
//! `(investment, reserve)` pairs augmented with analytic reserve candidates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clearing::{canonical_clear, SellerBook, SellerOffer};
use crate::demand::{DemandCurve, EPS};
use crate::ledger::LedgerMarket;
use crate::price_setting::PriceSettingInstance;
use crate::tullock;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub investments: Vec<f64>,
    pub reserves: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub q_points: usize,
    pub r_points: usize,
    /// Investment ceiling as a multiple of the analytic total investment.
    pub q_max_multiplier: f64,
    pub tolerance: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            q_points: 512,
            r_points: 512,
            q_max_multiplier: 4.0,
            tolerance: 1e-7,
        }
    }
}

impl GridConfig {
    pub fn doubled(&self) -> Self {
        GridConfig {
            q_points: 2 * self.q_points,
            r_points: 2 * self.r_points,
            ..*self
        }
    }
}

/// Everything the payoff definition produces for one profile.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileOutcome {
    pub price: f64,
    pub quantities: Vec<f64>,
    pub sold: Vec<f64>,
    pub payoffs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Deviation {
    pub investment: f64,
    pub reserve: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BestResponse {
    pub payoff: f64,
    pub deviation: Deviation,
    pub current: f64,
}

impl BestResponse {
    pub fn gain(&self) -> f64 {
        self.payoff - self.current
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub miner: usize,
    pub deviation: Deviation,
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub is_equilibrium: bool,
    pub max_gain: f64,
    pub witness: Option<Witness>,
}

/// Runs the payoff definition for every miner.
pub fn evaluate(market: &LedgerMarket, profile: &StrategyProfile) -> ProfileOutcome {
    let n = market.n();
    let sum: f64 = profile.investments.iter().sum();
    if !(sum > 0.0) {
        return ProfileOutcome {
            price: market.curve.v_max(),
            quantities: vec![0.0; n],
            sold: vec![0.0; n],
            payoffs: vec![0.0; n],
        };
    }
    let qa = market.append_supply;
    let quantities: Vec<f64> = profile.investments.iter().map(|q| qa * q / sum).collect();
    let book = SellerBook {
        offers: (0..n)
            .map(|i| SellerOffer {
                seller_id: i,
                quantity: quantities[i],
                reserve: profile.reserves[i],
            })
            .collect(),
    };
    let out = canonical_clear(&book, &market.curve);
    let payoffs = (0..n)
        .map(|i| {
            out.sold[i] * (out.price - market.write_cost_of(i))
                - profile.investments[i] * market.resource_costs[i]
                + market.block_reward * quantities[i]
        })
        .collect();
    ProfileOutcome {
        price: out.price,
        quantities,
        sold: out.sold,
        payoffs,
    }
}

/// `sold_i·(price − c_i^W) − q_i·c_i^R + B·Q_A·q_i/Σq`.
pub fn profile_payoff(market: &LedgerMarket, profile: &StrategyProfile, i: usize) -> f64 {
    evaluate(market, profile).payoffs[i]
}

/// Clearing price and the mass sold by one seller, with the other sellers
/// given as `(reserve, quantity)` levels sorted by reserve.
fn clear_one(curve: &DemandCurve, others: &[(f64, f64)], qi: f64, ri: f64) -> (f64, f64) {
    let exhausted = |s: f64| {
        if s >= curve.total_mass() {
            0.0
        } else {
            curve.inverse_inf(s)
        }
    };
    // Walk the merged reserve levels in increasing order.
    let mut price = f64::NAN;
    let first = others.first().map_or(ri, |l| l.0.min(ri));
    let b = exhausted(0.0);
    if b < first {
        price = b;
    } else {
        let mut cum = 0.0;
        let mut k = 0;
        let mut mine_added = false;
        loop {
            let next_other = others.get(k).map_or(f64::INFINITY, |l| l.0);
            let level = if mine_added { next_other } else { next_other.min(ri) };
            if !level.is_finite() {
                break;
            }
            while k < others.len() && others[k].0 == level {
                cum += others[k].1;
                k += 1;
            }
            if !mine_added && ri == level {
                cum += qi;
                mine_added = true;
            }
            let upcoming = {
                let o = others.get(k).map_or(f64::INFINITY, |l| l.0);
                if mine_added {
                    o
                } else {
                    o.min(ri)
                }
            };
            let b = level.max(exhausted(cum));
            if b < upcoming {
                price = b;
                break;
            }
        }
    }
    if price.is_nan() {
        price = b;
    }
    if ri > price {
        return (price, 0.0);
    }
    let mut q_lt = 0.0;
    let mut q_eq = 0.0;
    for &(r, q) in others {
        if r < price {
            q_lt += q;
        } else if r == price {
            q_eq += q;
        }
    }
    if ri < price {
        return (price, qi);
    }
    q_eq += qi;
    let total = curve.d(price).min(q_lt + q_eq);
    let residual = (total - q_lt).max(0.0);
    (price, if q_eq > 0.0 { residual * qi / q_eq } else { 0.0 })
}

/// Candidate reserves for one seller facing fixed other offers: the points
/// where it becomes the price-setter of the residual demand on each interval
/// between the others' reserves, plus the others' reserves and points just
/// below them.
fn analytic_reserves(
    curve: &DemandCurve,
    others: &[(f64, f64)],
    qi: f64,
    cost: f64,
    out: &mut Vec<f64>,
) {
    let hi_all = curve.v_max();
    let mut below = 0.0;
    let mut lo = 0.0;
    let mut k = 0;
    loop {
        let hi = others.get(k).map_or(hi_all.max(lo), |l| l.0);
        if hi >= lo {
            let best = curve.argmax_revenue(cost, -below, below + qi, lo, hi);
            out.push(best.price);
        }
        if k >= others.len() {
            break;
        }
        let r = others[k].0;
        out.push(r);
        if r > 0.0 {
            out.push(r - EPS * r.max(1.0));
        }
        while k < others.len() && others[k].0 == r {
            below += others[k].1;
            k += 1;
        }
        lo = r;
    }
}

fn levels_of(pairs: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = pairs.collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// Reference scale for the investment grid when the profile itself carries
/// no investment.
fn reference_investment(market: &LedgerMarket) -> f64 {
    let qa = market.append_supply;
    let floor = market.clearing_floor();
    let cmin = (0..market.n())
        .map(|i| market.write_cost_of(i))
        .fold(f64::INFINITY, f64::min);
    let margin = (market.curve.v_max().max(floor) - cmin + market.block_reward).max(EPS);
    match tullock::c_star(&market.resource_costs) {
        Ok(s) => qa * margin / s.c_star,
        Err(_) => qa * margin,
    }
}

/// Best deviation of miner `i` on the grid, with the other miners fixed.
pub fn best_response(
    market: &LedgerMarket,
    profile: &StrategyProfile,
    i: usize,
    grid: &GridConfig,
) -> BestResponse {
    let n = market.n();
    let qa = market.append_supply;
    let cw = market.write_cost_of(i);
    let cr = market.resource_costs[i];
    let current = profile_payoff(market, profile, i);
    let others_sum: f64 = (0..n).filter(|&j| j != i).map(|j| profile.investments[j]).sum();

    let scale = profile.investments.iter().sum::<f64>().max(reference_investment(market));
    let q_max = grid.q_max_multiplier * scale;
    let mut qs: Vec<f64> = (0..grid.q_points.max(2))
        .map(|k| q_max * k as f64 / (grid.q_points.max(2) - 1) as f64)
        .collect();
    qs.push(profile.investments[i]);
    // Contest best reply when the appends are worth the current clearing price.
    let value = qa * (evaluate(market, profile).price + market.block_reward - cw);
    if value > 0.0 && others_sum > 0.0 {
        let q = (value * others_sum / cr).sqrt() - others_sum;
        if q > 0.0 {
            qs.push(q);
        }
    }

    let cap = market.reserve_cap(i);
    let grid_rs: Vec<f64> = (0..grid.r_points.max(2))
        .map(|k| cap * k as f64 / (grid.r_points.max(2) - 1) as f64)
        .collect();
    let floor = market.clearing_floor();

    let eval_q = |q: f64| -> (f64, Deviation) {
        let total = q + others_sum;
        let mut best = (
            0.0,
            Deviation {
                investment: 0.0,
                reserve: 0.0,
            },
        );
        if !(total > 0.0) {
            return best;
        }
        let share = |x: f64| qa * x / total;
        let others = levels_of(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (profile.reserves[j], share(profile.investments[j]))),
        );
        let qi = share(q);
        let fixed = market.block_reward * qi - cr * q;
        let mut rs = grid_rs.clone();
        rs.push(floor);
        rs.push(profile.reserves[i]);
        analytic_reserves(&market.curve, &others, qi, cw, &mut rs);
        best.0 = f64::NEG_INFINITY;
        for &r in &rs {
            if !(r >= 0.0) || (r > cap && r != profile.reserves[i] && r != floor) {
                continue;
            }
            let (price, sold) = clear_one(&market.curve, &others, qi, r);
            let p = sold * (price - cw) + fixed;
            if p > best.0 {
                best = (
                    p,
                    Deviation {
                        investment: q,
                        reserve: r,
                    },
                );
            }
        }
        best
    };

    let (payoff, deviation) = qs
        .par_iter()
        .map(|&q| eval_q(q))
        .reduce(
            || {
                (
                    f64::NEG_INFINITY,
                    Deviation {
                        investment: 0.0,
                        reserve: 0.0,
                    },
                )
            },
            |a, b| if b.0 > a.0 { b } else { a },
        );
    BestResponse {
        payoff,
        deviation,
        current,
    }
}

/// Checks every miner's best response against its current payoff.
pub fn verify_equilibrium(
    market: &LedgerMarket,
    profile: &StrategyProfile,
    grid: &GridConfig,
) -> Verdict {
    let responses: Vec<BestResponse> = (0..market.n())
        .map(|i| best_response(market, profile, i, grid))
        .collect();
    let (miner, worst) = responses
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.gain().total_cmp(&b.1.gain()))
        .expect("at least two miners");
    let max_gain = worst.gain();
    let is_equilibrium = max_gain <= grid.tolerance;
    Verdict {
        is_equilibrium,
        max_gain,
        witness: (!is_equilibrium).then_some(Witness {
            miner,
            deviation: worst.deviation,
            gain: max_gain,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReserveResponse {
    pub reserve: f64,
    pub payoff: f64,
    pub gain: f64,
}

/// Best reserve for seller `i` in a price-setting game with fixed quantities.
pub fn reserve_only_best_response(
    instance: &PriceSettingInstance,
    reserves: &[f64],
    i: usize,
    r_points: usize,
) -> ReserveResponse {
    let curve = &instance.curve;
    let qi = instance.quantities[i];
    let cost = instance.unit_costs[i];
    let others = levels_of(
        (0..reserves.len())
            .filter(|&j| j != i)
            .map(|j| (reserves[j], instance.quantities[j])),
    );
    let payoff = |r: f64| {
        let (price, sold) = clear_one(curve, &others, qi, r);
        sold * (price - cost)
    };
    let current = payoff(reserves[i]);
    let top = curve.v_max();
    let mut rs: Vec<f64> = (0..r_points.max(2))
        .map(|k| top * k as f64 / (r_points.max(2) - 1) as f64)
        .collect();
    analytic_reserves(curve, &others, qi, cost, &mut rs);
    let mut best = ReserveResponse {
        reserve: reserves[i],
        payoff: current,
        gain: 0.0,
    };
    for r in rs {
        let p = payoff(r);
        if p > best.payoff {
            best = ReserveResponse {
                reserve: r,
                payoff: p,
                gain: p - current,
            };
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Winner {
    pub bid_index: usize,
    pub mass: f64,
    /// Winners pay their own bid.
    pub payment: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FpaOutcome {
    pub winners: Vec<Winner>,
    pub effective_price: f64,
}

/// `sup {x : B(x) ≥ y}` for the left-continuous bid-mass function `B(x)`
/// (mass bidding at least `x`). Zero when `y` exceeds the total mass.
fn bid_inverse_sup(bids: &[(f64, f64)], y: f64) -> f64 {
    let mut levels: Vec<f64> = bids.iter().map(|b| b.1).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    for b in levels {
        let mass: f64 = bids.iter().filter(|x| x.1 >= b).map(|x| x.0).sum();
        if mass >= y {
            return b;
        }
    }
    0.0
}

/// First-price auction with reserve over a discrete bid population
/// `(mass, bid)`.
///
/// If the mass bidding at least `r` fits into the capacity, all of it wins.
/// Otherwise bids above the marginal bid `B^{-1}_sup(Q)` win in full and the
/// marginal bid level is pro-rated. The effective price is
/// `max{B^{-1}_sup(Q), r}`.
pub fn fpa_rule_apply(bids: &[(f64, f64)], capacity: f64, reserve: f64) -> FpaOutcome {
    let effective_price = bid_inverse_sup(bids, capacity).max(reserve);
    let eligible: f64 = bids.iter().filter(|b| b.1 >= reserve).map(|b| b.0).sum();
    let mut winners = Vec::new();
    if eligible <= capacity {
        for (k, &(mass, bid)) in bids.iter().enumerate() {
            if bid >= reserve && mass > 0.0 {
                winners.push(Winner {
                    bid_index: k,
                    mass,
                    payment: bid,
                });
            }
        }
    } else {
        let cutoff = effective_price;
        let above: f64 = bids.iter().filter(|b| b.1 > cutoff).map(|b| b.0).sum();
        let at: f64 = bids.iter().filter(|b| b.1 == cutoff).map(|b| b.0).sum();
        let fill = if at > 0.0 {
            ((capacity - above) / at).clamp(0.0, 1.0)
        } else {
            0.0
        };
        for (k, &(mass, bid)) in bids.iter().enumerate() {
            let won = if bid > cutoff {
                mass
            } else if bid == cutoff {
                mass * fill
            } else {
                0.0
            };
            if won > 0.0 {
                winners.push(Winner {
                    bid_index: k,
                    mass: won,
                    payment: bid,
                });
            }
        }
    }
    FpaOutcome {
        winners,
        effective_price,
    }
}

/// Discretizes demand into `atoms` bid levels on `[0, v_max]`; the mass with
/// values in `[x_j, x_{j+1})` bids `x_j`, so the bid-mass function matches `D`
/// on the grid.
pub fn discretize_demand(curve: &DemandCurve, atoms: usize) -> Vec<(f64, f64)> {
    let top = curve.v_max();
    let h = top / atoms as f64;
    let mut bids = Vec::with_capacity(atoms + 1);
    for j in 0..atoms {
        let x = j as f64 * h;
        let mass = curve.d(x) - curve.d(x + h);
        if mass > 0.0 {
            bids.push((mass, x));
        }
    }
    let last = curve.d(top);
    if last > 0.0 {
        bids.push((last, top));
    }
    bids
}

/// Clearing price of a seller book against a discrete bid population, found
/// with the first-price rule alone: sellers enter in increasing reserve order
/// and the price is the first effective price that does not reach the next
/// reserve.
pub fn discrete_clearing_price(book: &SellerBook, bids: &[(f64, f64)]) -> f64 {
    let mut levels: Vec<(f64, f64)> = Vec::new();
    let mut offers = book.offers.clone();
    offers.sort_by(|a, b| a.reserve.total_cmp(&b.reserve));
    let mut cum = 0.0;
    for o in offers {
        cum += o.quantity;
        match levels.last_mut() {
            Some(l) if l.0 == o.reserve => l.1 = cum,
            _ => levels.push((o.reserve, cum)),
        }
    }
    let top = bids.iter().map(|b| b.1).fold(0.0, f64::max);
    if levels.first().is_none_or(|l| l.0 > top) {
        return top;
    }
    for (k, &(r, supply)) in levels.iter().enumerate() {
        let next = levels.get(k + 1).map_or(f64::INFINITY, |l| l.0);
        let out = fpa_rule_apply(bids, supply, r);
        if out.effective_price <= next {
            return out.effective_price;
        }
    }
    levels.last().map_or(top, |l| l.0)
}
