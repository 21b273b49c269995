//! The ledger market: miners buy blockspace in a Tullock contest, then resell
//! it to users through simultaneous first-price auctions with reserves.
//!
//! This module builds the analytic equilibrium candidates and the closed-form
//! sufficiency tests. Every payoff it reports goes through
//! [`oracle::evaluate`], the same code the brute-force search uses.

use crate::demand::{DemandCurve, EPS};
use crate::error::{Error, Result};
use crate::oracle::{self, StrategyProfile};
use crate::price_setting::saturation_bound;
use crate::tullock::{self, ContestShares, CostProfile};

#[derive(Clone, Debug, PartialEq)]
pub enum WriteCost {
    Uniform(f64),
    PerMiner(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerMarket {
    pub curve: DemandCurve,
    pub append_supply: f64,
    pub block_reward: f64,
    pub resource_costs: Vec<f64>,
    pub write_cost: WriteCost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateKind {
    MarketClearing,
    PriceSetter(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumCandidate {
    pub kind: CandidateKind,
    pub investments: Vec<f64>,
    pub reserves: Vec<f64>,
    pub clearing_price: f64,
    /// Appends won, `Q_A·q_i/Σq`.
    pub quantities: Vec<f64>,
    pub shares: Vec<f64>,
    /// First-price revenue `sold_i·price`.
    pub revenues: Vec<f64>,
    pub payoffs: Vec<f64>,
    /// Set when the candidate does not have the structure its kind requires:
    /// zero investment (no margin at the clearing price) or a price-setter
    /// whose best price is the market-clearing price itself.
    pub degenerate: bool,
}

impl EquilibriumCandidate {
    pub fn profile(&self) -> StrategyProfile {
        StrategyProfile {
            investments: self.investments.clone(),
            reserves: self.reserves.clone(),
        }
    }

    pub fn total_investment(&self) -> f64 {
        self.investments.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SufficiencyThreshold {
    /// `sup_z (k(z) − 1) / (2(√(k(z)/z) − 1))`, the largest over miners.
    pub threshold: f64,
    pub per_miner_threshold: Vec<f64>,
    /// `x_i* ≤ 1 − sup` for each miner.
    pub per_miner_pass: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinBlockReward {
    pub bound: f64,
    /// Smallest strict gap `ε` between the saturation bound and `Q_A·x_i*`.
    pub epsilon: f64,
    /// Largest `X_i = sup_{x ≤ Q_A} x·(D^{-1}_sup(x) − c_i^W)`.
    pub capped_revenue: f64,
    /// Share-convergence level found by doubling (per-miner write costs only).
    pub share_level: Option<f64>,
}

/// Comparison slack for share thresholds.
const SHARE_TOL: f64 = 1e-9;

/// Settings for the price/share fixed point used with per-miner write costs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointConfig {
    pub damping: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            damping: 0.5,
            max_iterations: 10_000,
            tolerance: 1e-9,
        }
    }
}

impl LedgerMarket {
    pub fn new(
        curve: DemandCurve,
        append_supply: f64,
        block_reward: f64,
        resource_costs: Vec<f64>,
        write_cost: WriteCost,
    ) -> Result<Self> {
        let n = resource_costs.len();
        if n < 2 {
            return Err(Error::InvalidCosts(format!("at least two miners are required, got {n}")));
        }
        if let Some(c) = resource_costs.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidCosts(format!("resource cost {c} must be positive and finite")));
        }
        if !(append_supply > 0.0 && append_supply <= curve.total_mass()) {
            return Err(Error::OutOfRange {
                what: "append supply",
                value: append_supply,
                lo: 0.0,
                hi: curve.total_mass(),
            });
        }
        if !(block_reward >= 0.0 && block_reward.is_finite()) {
            return Err(Error::OutOfRange {
                what: "block reward",
                value: block_reward,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        match &write_cost {
            WriteCost::Uniform(c) if !c.is_finite() => {
                return Err(Error::InvalidCosts("write cost must be finite".into()))
            }
            WriteCost::PerMiner(w) if w.len() != n => {
                return Err(Error::InvalidCosts(format!(
                    "{n} resource costs but {} write costs",
                    w.len()
                )))
            }
            WriteCost::PerMiner(w) if w.iter().any(|c| !c.is_finite()) => {
                return Err(Error::InvalidCosts("write costs must be finite".into()))
            }
            _ => {}
        }
        Ok(LedgerMarket {
            curve,
            append_supply,
            block_reward,
            resource_costs,
            write_cost,
        })
    }

    pub fn n(&self) -> usize {
        self.resource_costs.len()
    }

    pub fn write_cost_of(&self, i: usize) -> f64 {
        match &self.write_cost {
            WriteCost::Uniform(c) => *c,
            WriteCost::PerMiner(w) => w[i],
        }
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self.write_cost, WriteCost::Uniform(_))
    }

    /// `D^{-1}_sup(Q_A)`, the price at which all appends sell.
    pub fn clearing_floor(&self) -> f64 {
        self.curve.inverse_sup(self.append_supply)
    }

    pub fn with_block_reward(&self, block_reward: f64) -> Self {
        LedgerMarket {
            block_reward,
            ..self.clone()
        }
    }

    /// Contest shares when appends are valued at price `r`.
    pub fn contest_at(&self, r: f64) -> Result<ContestShares> {
        match &self.write_cost {
            WriteCost::Uniform(_) => tullock::c_star(&self.resource_costs),
            WriteCost::PerMiner(w) => tullock::c_star_asym(&CostProfile {
                resource_costs: self.resource_costs.clone(),
                write_costs: Some(w.clone()),
                block_reward: self.block_reward,
                reference_price: r,
            }),
        }
    }

    /// Total equilibrium investment `Σq` at price `r`.
    fn total_investment_at(&self, r: f64, contest: &ContestShares) -> Result<(f64, bool)> {
        match &self.write_cost {
            WriteCost::Uniform(cw) => {
                let margin = r + self.block_reward - cw;
                if margin < -EPS {
                    return Err(Error::DegenerateReward {
                        miner: 0,
                        value: margin,
                    });
                }
                if margin <= EPS {
                    return Ok((0.0, true));
                }
                Ok((self.append_supply * margin / contest.c_star, false))
            }
            WriteCost::PerMiner(_) => Ok((self.append_supply / contest.c_star, false)),
        }
    }

    /// Highest reserve worth searching: `argmax_{r ≥ D^{-1}_inf(Q_A)} (r − c_i^W)·D(r)`.
    pub fn reserve_cap(&self, i: usize) -> f64 {
        let lo = self.curve.inverse_inf(self.append_supply);
        self.curve
            .argmax_revenue(self.write_cost_of(i), 0.0, f64::INFINITY, lo, self.curve.v_max().max(lo))
            .price
    }

    fn build(
        &self,
        kind: CandidateKind,
        price: f64,
        reserves: Vec<f64>,
        shares: Vec<f64>,
        total: f64,
        degenerate: bool,
    ) -> EquilibriumCandidate {
        let investments: Vec<f64> = shares.iter().map(|x| x * total).collect();
        let profile = StrategyProfile {
            investments: investments.clone(),
            reserves: reserves.clone(),
        };
        let out = oracle::evaluate(self, &profile);
        let quantities = if total > 0.0 {
            out.quantities
        } else {
            shares.iter().map(|x| x * self.append_supply).collect()
        };
        EquilibriumCandidate {
            kind,
            investments,
            reserves,
            clearing_price: price,
            quantities,
            shares,
            revenues: out.sold.iter().map(|s| s * out.price).collect(),
            payoffs: out.payoffs,
            degenerate,
        }
    }

    /// All appends sell at `r = D^{-1}_sup(Q_A)`; every reserve equals `r`.
    pub fn market_clearing_candidate(&self) -> Result<EquilibriumCandidate> {
        let r = self.clearing_floor();
        let contest = self.contest_at(r)?;
        let (total, degenerate) = self.total_investment_at(r, &contest)?;
        Ok(self.build(
            CandidateKind::MarketClearing,
            r,
            vec![r; self.n()],
            contest.shares,
            total,
            degenerate,
        ))
    }

    /// Miner `i` posts the price-setting reserve
    /// `argmax_{x ≥ D^{-1}_sup(Q_A)} (x − c_i^W)(D(x) + Q_A·x_i − Q_A)`;
    /// everybody else posts 0.
    ///
    /// With per-miner write costs the shares depend on the price, so the two
    /// are solved jointly by damped fixed-point iteration.
    pub fn price_setter_candidate(&self, i: usize) -> Result<EquilibriumCandidate> {
        self.price_setter_candidate_with(i, &FixedPointConfig::default())
    }

    pub fn price_setter_candidate_with(
        &self,
        i: usize,
        fixed_point: &FixedPointConfig,
    ) -> Result<EquilibriumCandidate> {
        let p0 = self.clearing_floor();
        let setter_price = |shares: &[f64]| {
            let shift = self.append_supply * (shares[i] - 1.0);
            let hi = self.curve.v_max().max(p0);
            self.curve
                .argmax_revenue(self.write_cost_of(i), shift, f64::INFINITY, p0, hi)
                .price
        };

        let (r, contest) = if self.is_symmetric() {
            let contest = self.contest_at(p0)?;
            (setter_price(&contest.shares), contest)
        } else {
            let mut r = setter_price(&self.contest_at(p0)?.shares);
            let mut trace = Vec::new();
            let mut converged = false;
            for _ in 0..fixed_point.max_iterations {
                let next = setter_price(&self.contest_at(r)?.shares);
                let step = next - r;
                trace.push(r);
                if trace.len() > 8 {
                    trace.remove(0);
                }
                if step.abs() <= fixed_point.tolerance {
                    r = next;
                    converged = true;
                    break;
                }
                r += fixed_point.damping * step;
            }
            if !converged {
                return Err(Error::NonConvergence {
                    what: "price-setter fixed point",
                    iterations: fixed_point.max_iterations,
                    trace,
                });
            }
            (r, self.contest_at(r)?)
        };

        let (total, zero) = self.total_investment_at(r, &contest)?;
        let mut reserves = vec![0.0; self.n()];
        reserves[i] = r;
        Ok(self.build(
            CandidateKind::PriceSetter(i),
            r,
            reserves,
            contest.shares,
            total,
            zero || r <= p0 + EPS,
        ))
    }

    fn require_symmetric_zero_reward(&self, what: &str) -> Result<f64> {
        match self.write_cost {
            WriteCost::Uniform(cw) if self.block_reward == 0.0 => Ok(cw),
            WriteCost::Uniform(_) => Err(Error::Precondition(format!(
                "{what} is defined for a zero block reward"
            ))),
            WriteCost::PerMiner(_) => Err(Error::Precondition(format!(
                "{what} needs a uniform write cost"
            ))),
        }
    }

    /// `Q_A·(D^{-1}_sup(Q_A) − c^W)`, the resale value of all appends.
    pub fn reward(&self) -> f64 {
        let cw = match self.write_cost {
            WriteCost::Uniform(c) => c,
            WriteCost::PerMiner(ref w) => w.iter().cloned().fold(f64::INFINITY, f64::min),
        };
        self.append_supply * (self.clearing_floor() - cw)
    }

    /// Payoff of miner `i` against the market-clearing profile when it keeps a
    /// fraction `1 − y` of the appends and sells `z·Q_A` in total at
    /// `D^{-1}_sup(z·Q_A)`:
    ///
    /// `(1 − y/z)·z·Q_A·(D^{-1}_sup(z·Q_A) − c^W) − (1/y − 1)(1 − x_i*)²·Reward`.
    pub fn deviation_payoff_yz(&self, i: usize, y: f64, z: f64) -> Result<f64> {
        let cw = self.require_symmetric_zero_reward("the (y, z) deviation payoff")?;
        if !(y > 0.0) {
            return Err(Error::OutOfRange {
                what: "y",
                value: y,
                lo: 0.0,
                hi: z,
            });
        }
        if !(z <= 1.0 && y <= z) {
            return Err(Error::OutOfRange {
                what: "z",
                value: z,
                lo: y,
                hi: 1.0,
            });
        }
        let qa = self.append_supply;
        let contest = tullock::c_star(&self.resource_costs)?;
        let x = contest.shares[i];
        let price = self.curve.inverse_sup(z * qa);
        let revenue = (1.0 - y / z) * z * qa * (price - cw);
        let cost = if x > 0.0 {
            (1.0 / y - 1.0) * (1.0 - x) * (1.0 - x) * self.reward()
        } else {
            // Inactive miner: pay the raw resource cost of the investment.
            let others = self.reward() / contest.c_star;
            self.resource_costs[i] * others * (1.0 / y - 1.0)
        };
        Ok(revenue - cost)
    }

    /// `y` maximizing [`Self::deviation_payoff_yz`] at fixed `z`:
    /// `(1 − x_i*)·√(z/k(z))`.
    pub fn optimal_y(&self, i: usize, z: f64) -> Result<f64> {
        let cw = self.require_symmetric_zero_reward("the optimal y")?;
        let x = tullock::c_star(&self.resource_costs)?.shares[i];
        let k = self.curve.cover_function(self.append_supply, cw, z)?;
        Ok((1.0 - x) * (z / k).sqrt())
    }

    /// `L_i(z) = Reward·(k(z) − 2(1 − x_i*)√(k(z)/z) + (1 − x_i*)²)`.
    pub fn l_value(&self, i: usize, z: f64) -> Result<f64> {
        let cw = self.require_symmetric_zero_reward("L(z)")?;
        let x = tullock::c_star(&self.resource_costs)?.shares[i];
        let reward = self.reward();
        if z == 1.0 {
            return Ok(reward * x * x);
        }
        let k = self.curve.cover_function(self.append_supply, cw, z)?;
        Ok(reward * (k - 2.0 * (1.0 - x) * (k / z).sqrt() + (1.0 - x) * (1.0 - x)))
    }

    /// Closed-form test for regular demand: `x_1* ≤ 1 − 1/(D(0)/Q_A − 1)`.
    pub fn sufficiency_regular(&self) -> Result<bool> {
        let chk = self.curve.check_regular(1024);
        if !chk.regular {
            return Err(Error::Precondition(format!(
                "demand is not regular (virtual value decreases on {:?})",
                chk.violation
            )));
        }
        let ratio = self.curve.total_mass() / self.append_supply;
        if ratio <= 1.0 {
            return Err(Error::Precondition(format!(
                "D(0)/Q_A = {ratio} leaves no room for the bound"
            )));
        }
        if ratio <= 2.0 {
            // The right-hand side is non-positive; no positive share passes.
            return Ok(false);
        }
        let contest = self.contest_at(self.clearing_floor())?;
        let x1 = contest.shares.iter().cloned().fold(0.0, f64::max);
        Ok(x1 <= 1.0 - 1.0 / (ratio - 1.0) + SHARE_TOL)
    }

    /// Exact test for a zero block reward: the market-clearing candidate is an
    /// equilibrium iff `x_i* ≤ 1 − sup_z (k_i(z) − 1)/(2(√(k_i(z)/z) − 1))` for
    /// every miner.
    pub fn sufficiency_threshold(&self) -> Result<SufficiencyThreshold> {
        let contest = self.contest_at(self.clearing_floor())?;
        let mut per_miner_threshold = Vec::with_capacity(self.n());
        for i in 0..self.n() {
            let s = match (&self.write_cost, i) {
                (WriteCost::Uniform(_), i) if i > 0 => per_miner_threshold[0],
                _ => cover_ratio_sup(&self.curve, self.append_supply, self.write_cost_of(i))?,
            };
            per_miner_threshold.push(s);
        }
        let per_miner_pass = contest
            .shares
            .iter()
            .zip(&per_miner_threshold)
            .map(|(x, s)| *x <= 1.0 - s + SHARE_TOL)
            .collect();
        Ok(SufficiencyThreshold {
            threshold: per_miner_threshold
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max),
            per_miner_threshold,
            per_miner_pass,
        })
    }

    /// Moves a candidate to block reward `new_reward`, scaling investments by
    /// `(r + B' − c^W)/(r + B − c^W)` and keeping reserves.
    pub fn block_reward_rescale(
        &self,
        candidate: &EquilibriumCandidate,
        new_reward: f64,
    ) -> Result<EquilibriumCandidate> {
        let cw = match self.write_cost {
            WriteCost::Uniform(c) => c,
            WriteCost::PerMiner(_) => {
                return Err(Error::Precondition("rescaling needs a uniform write cost".into()))
            }
        };
        if !(new_reward >= self.block_reward) {
            return Err(Error::OutOfRange {
                what: "new block reward",
                value: new_reward,
                lo: self.block_reward,
                hi: f64::INFINITY,
            });
        }
        let r = candidate.clearing_price;
        let margin = r + self.block_reward - cw;
        if margin <= 0.0 {
            return Err(Error::DegenerateReward {
                miner: 0,
                value: margin,
            });
        }
        let factor = (r + new_reward - cw) / margin;
        let target = self.with_block_reward(new_reward);
        let total = candidate.total_investment() * factor;
        Ok(target.build(
            candidate.kind,
            r,
            candidate.reserves.clone(),
            candidate.shares.clone(),
            total,
            candidate.degenerate,
        ))
    }

    /// A block reward large enough for the market-clearing candidate to be an
    /// equilibrium, `2X/ε²` with uniform write costs.
    ///
    /// With per-miner write costs the shares move with `B`; a level `B'` is
    /// found by doubling where every miner keeps half of its limiting gap, and
    /// the bound is the largest of `B'` and `2X_i/(ε_i²·Q_A) + c_i^W − D^{-1}_sup(Q_A)`.
    pub fn min_block_reward(&self) -> Result<MinBlockReward> {
        let qa = self.append_supply;
        let p0 = self.clearing_floor();
        // Limiting shares as B grows: the symmetric contest on resource costs.
        let limit = tullock::c_star(&self.resource_costs)?;
        let gaps: Vec<f64> = (0..self.n())
            .map(|i| saturation_bound(&self.curve, qa, p0, self.write_cost_of(i)))
            .collect();
        let lim_eps: Vec<f64> = gaps
            .iter()
            .zip(&limit.shares)
            .map(|(g, x)| g - qa * x)
            .collect();

        if self.is_symmetric() {
            let eps = gaps[0] - qa * limit.shares.iter().cloned().fold(0.0, f64::max);
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(Error::DegenerateBound(format!(
                    "saturation gap ε = {eps} is not positive"
                )));
            }
            let x = self.curve.capped_revenue(self.write_cost_of(0), qa).value;
            return Ok(MinBlockReward {
                bound: 2.0 * x / (eps * eps),
                epsilon: eps,
                capped_revenue: x,
                share_level: None,
            });
        }

        if let Some((i, e)) = lim_eps.iter().enumerate().find(|(_, e)| !(**e > 0.0)) {
            return Err(Error::DegenerateBound(format!(
                "limiting saturation gap of miner {i} is {e}"
            )));
        }
        let eps: Vec<f64> = lim_eps.iter().map(|e| e / 2.0).collect();
        let xs: Vec<f64> = (0..self.n())
            .map(|i| self.curve.capped_revenue(self.write_cost_of(i), qa).value)
            .collect();
        let per_miner = (0..self.n())
            .map(|i| 2.0 * xs[i] / (eps[i] * eps[i] * qa) + self.write_cost_of(i) - p0)
            .fold(0.0, f64::max);

        let holds = |b: f64| -> Result<bool> {
            let shares = self.with_block_reward(b).contest_at(p0)?.shares;
            Ok((0..self.n()).all(|i| gaps[i] - qa * shares[i] >= eps[i]))
        };
        let mut level = self.block_reward.max(1.0);
        let mut tried = Vec::new();
        for _ in 0..200 {
            if holds(level)? {
                let bound = level.max(per_miner);
                if holds(bound)? {
                    return Ok(MinBlockReward {
                        bound,
                        epsilon: eps.iter().cloned().fold(f64::INFINITY, f64::min),
                        capped_revenue: xs.iter().cloned().fold(0.0, f64::max),
                        share_level: Some(level),
                    });
                }
                level = 2.0 * bound;
            } else {
                level *= 2.0;
            }
            tried.push(level);
            if tried.len() > 8 {
                tried.remove(0);
            }
        }
        Err(Error::NonConvergence {
            what: "share-convergence doubling search",
            iterations: 200,
            trace: tried,
        })
    }
}

/// `sup_{z ∈ (0,1)} (k(z) − 1) / (2(√(k(z)/z) − 1))` for the cover function
/// with unit cost `c`.
///
/// The ratio is 0/0 at `z = 1`; its limit there is `1 − d·(p0 − c)/Q_A` with
/// `d` the slope of demand just above `p0`. Points where `k(z) = z` (the
/// denominator vanishes) make the ratio `−∞` and are skipped.
pub fn cover_ratio_sup(curve: &DemandCurve, qa: f64, c: f64) -> Result<f64> {
    let p0 = curve.inverse_sup(qa);
    let g1 = p0 - c;
    if !(g1 > 0.0) {
        return Err(Error::DegenerateCover { price: p0 });
    }
    let ratio = |z: f64| {
        let k = (curve.inverse_sup(z * qa) - c) * z / g1;
        let s = (k / z).sqrt() - 1.0;
        if s <= 1e-13 {
            f64::NEG_INFINITY
        } else {
            (k - 1.0) / (2.0 * s)
        }
    };

    let mut best = f64::NEG_INFINITY;
    // z → 1.
    if curve.d_right(p0) >= qa * (1.0 - EPS) {
        if let Some((x0, x1, m0, m1)) = curve.segments().find(|s| s.0 <= p0 && p0 < s.1) {
            let d = (m0 - m1) / (x1 - x0);
            best = best.max(1.0 - d * g1 / qa);
        }
    }
    // z → 0: k(z)/z tends to (v_max − c)/g1.
    let a = (curve.v_max() - c) / g1;
    if a > 1.0 {
        best = best.max(-1.0 / (2.0 * (a.sqrt() - 1.0)));
    }

    const N: usize = 20_000;
    let mut zs: Vec<f64> = (1..N).map(|j| j as f64 / N as f64).collect();
    zs.extend(
        curve
            .points()
            .iter()
            .map(|&(_, m)| m / qa)
            .filter(|&z| z > 0.0 && z < 1.0),
    );
    zs.sort_by(f64::total_cmp);
    let vals: Vec<f64> = zs.iter().map(|&z| ratio(z)).collect();
    let (arg, &top) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    best = best.max(top);

    // Local golden-section refinement around the best grid point.
    if top.is_finite() {
        let mut lo = if arg > 0 { zs[arg - 1] } else { zs[arg] * 0.5 };
        let mut hi = if arg + 1 < zs.len() { zs[arg + 1] } else { 1.0 - 1e-9 };
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if ratio(a) >= ratio(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        best = best.max(ratio(0.5 * (lo + hi)));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin() -> DemandCurve {
        DemandCurve::linear(1.0, 1.0).unwrap()
    }

    fn market(qa: f64, n: usize) -> LedgerMarket {
        LedgerMarket::new(lin(), qa, 0.0, vec![1.0; n], WriteCost::Uniform(0.0)).unwrap()
    }

    fn tight(delta: f64) -> LedgerMarket {
        let n = (1.0 / delta).round() as usize;
        let curve = DemandCurve::linear(1.0 + delta, 1.0 + delta).unwrap();
        LedgerMarket::new(curve, 1.0, 0.0, vec![1.0; n], WriteCost::Uniform(0.0)).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn reserve_cap_examples() {
        assert!(close(market(0.75, 3).reserve_cap(0), 0.5));
        assert!(close(market(0.3, 3).reserve_cap(0), 0.7));
        let m = LedgerMarket::new(lin(), 0.5, 0.0, vec![1.0; 2], WriteCost::Uniform(1.0)).unwrap();
        assert_eq!(m.reserve_cap(0), 1.0);
    }

    #[test]
    fn market_clearing_examples() {
        let c = market(0.75, 3).market_clearing_candidate().unwrap();
        assert!(close(c.clearing_price, 0.25));
        assert!(close(c.total_investment(), 0.125));
        assert!(c.investments.iter().all(|q| close(*q, 1.0 / 24.0)));
        assert!(!c.degenerate);

        let c = market(1.0, 3).market_clearing_candidate().unwrap();
        assert_eq!(c.clearing_price, 0.0);
        assert_eq!(c.total_investment(), 0.0);
        assert!(c.degenerate);

        let c = tight(0.25).market_clearing_candidate().unwrap();
        assert!(close(c.clearing_price, 0.25));
        assert!(c.shares.iter().all(|x| close(*x, 0.25)));
        assert!(close(c.total_investment(), 3.0 / 16.0));
    }

    #[test]
    fn price_setter_example() {
        let c = market(1.0, 3).price_setter_candidate(0).unwrap();
        assert!(close(c.clearing_price, 1.0 / 6.0));
        assert!(close(c.total_investment(), 1.0 / 9.0));
        assert!(c.investments.iter().all(|q| close(*q, 1.0 / 27.0)));
        assert!(close(c.revenues[0], 1.0 / 36.0));
        assert!(close(c.payoffs[0], -1.0 / 108.0));
        assert!(close(c.payoffs[1], 1.0 / 54.0));
        assert_eq!(c.reserves[1..], [0.0, 0.0]);
    }

    #[test]
    fn price_setter_at_boundary_is_flagged() {
        // x(1/2 − x) peaks at 1/4, which is exactly the market-clearing price.
        let c = market(0.75, 3).price_setter_candidate(0).unwrap();
        assert!(close(c.clearing_price, 0.25));
        assert!(c.degenerate);
    }

    #[test]
    fn monopolist_share_prices_like_a_monopolist() {
        let m = LedgerMarket::new(lin(), 0.75, 0.0, vec![1.0, 1e6], WriteCost::Uniform(0.0)).unwrap();
        let c = m.price_setter_candidate(0).unwrap();
        let mono = lin().monopoly_revenue(0.0, 0.25).unwrap();
        assert!((c.clearing_price - mono.price).abs() < 1e-5);
    }

    #[test]
    fn yz_identities() {
        let m = market(0.75, 3);
        let c = m.market_clearing_candidate().unwrap();
        let at_eq = m.deviation_payoff_yz(0, 2.0 / 3.0, 1.0).unwrap();
        assert!((at_eq - c.payoffs[0]).abs() < 1e-9);
        assert!((at_eq - m.l_value(0, 1.0).unwrap()).abs() < 1e-12);
        assert!(m.deviation_payoff_yz(0, 0.3, 0.3).unwrap() < 0.0);
        assert!(m.deviation_payoff_yz(0, 0.0, 0.5).is_err());
        assert!(m.with_block_reward(1.0).deviation_payoff_yz(0, 0.5, 1.0).is_err());
    }

    #[test]
    fn l_value_dominates_y_grid() {
        let m = market(0.75, 3);
        let z = 2.0 / 3.0;
        let l = m.l_value(0, z).unwrap();
        let n = 4000;
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
        for j in 1..=n {
            let y = z * j as f64 / n as f64;
            let p = m.deviation_payoff_yz(0, y, z).unwrap();
            if p > best {
                best = p;
                arg = y;
            }
        }
        assert!(l >= best - 1e-9);
        assert!((arg - m.optimal_y(0, z).unwrap()).abs() <= z / n as f64);
    }

    #[test]
    fn regular_bound_examples() {
        assert!(market(1.0 / 3.0, 3).sufficiency_regular().unwrap());
        assert!(!market(0.5, 2).sufficiency_regular().unwrap());
        let convex = DemandCurve::new(vec![(0.0, 1.0), (0.2, 0.2), (1.0, 0.0)]).unwrap();
        let m = LedgerMarket::new(convex, 0.1, 0.0, vec![1.0; 3], WriteCost::Uniform(0.0)).unwrap();
        assert!(m.sufficiency_regular().is_err());
    }

    #[test]
    fn regular_bound_flips_where_the_algebra_says() {
        // 1/n ≤ 1 − Q/(1 − Q) rearranges to Q ≤ (n − 1)/(2n − 1).
        for n in 2..=6 {
            let edge = (n as f64 - 1.0) / (2.0 * n as f64 - 1.0);
            assert!(market(edge - 1e-9, n).sufficiency_regular().unwrap());
            assert!(!market(edge + 1e-6, n).sufficiency_regular().unwrap());
        }
    }

    #[test]
    fn threshold_examples() {
        let t = market(0.75, 3).sufficiency_threshold().unwrap();
        assert!((t.threshold - 2.0 / 3.0).abs() < 1e-6);
        assert!(t.per_miner_pass.iter().all(|p| *p));
        assert!(!(1.0 <= 1.0 - t.threshold));

        for delta in [0.25, 0.5] {
            let t = tight(delta).sufficiency_threshold().unwrap();
            assert!((t.threshold - (1.0 - delta)).abs() < 1e-9);
            assert!(t.per_miner_pass.iter().all(|p| *p));
        }
    }

    #[test]
    fn threshold_on_kinked_curve_matches_scan() {
        let curve = DemandCurve::new(vec![(0.0, 1.0), (0.3, 0.8), (0.8, 0.2), (1.2, 0.0)]).unwrap();
        let qa = 0.6;
        let p0 = curve.inverse_sup(qa);
        let scan = (1..2_000_000)
            .map(|j| j as f64 / 2e6)
            .map(|z| {
                let k = curve.inverse_sup(z * qa) * z / p0;
                (k - 1.0) / (2.0 * ((k / z).sqrt() - 1.0))
            })
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        let s = cover_ratio_sup(&curve, qa, 0.0).unwrap();
        assert!(s >= scan - 1e-9 && s - scan < 1e-5, "{s} vs {scan}");
    }

    #[test]
    fn rescale_examples() {
        let m = market(0.75, 3);
        let c = m.market_clearing_candidate().unwrap();
        let r = m.block_reward_rescale(&c, 1.0).unwrap();
        assert!(close(r.total_investment(), 0.625));
        assert!(close(r.total_investment(), 0.75 * 1.25 / 1.5));
        assert_eq!(r.shares, c.shares);
        assert_eq!(r.reserves, c.reserves);
        let same = m.block_reward_rescale(&c, 0.0).unwrap();
        assert_eq!(same, c);
        assert!(m.block_reward_rescale(&c, -1.0).is_err());
    }

    #[test]
    fn min_block_reward_examples() {
        let b = market(0.5, 3).min_block_reward().unwrap();
        assert!((b.bound - 4.5).abs() < 1e-9);
        assert!((b.epsilon - 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(tight(0.25).min_block_reward(), Err(Error::DegenerateBound(_))));
        assert!(matches!(market(1.0, 3).min_block_reward(), Err(Error::DegenerateBound(_))));
    }

    #[test]
    fn asymmetric_candidates() {
        let m = LedgerMarket::new(
            lin(),
            0.5,
            0.0,
            vec![1.0, 1.0, 1.2],
            WriteCost::PerMiner(vec![0.0, 0.05, 0.1]),
        )
        .unwrap();
        let mc = m.market_clearing_candidate().unwrap();
        assert!(close(mc.clearing_price, 0.5));
        assert!((mc.shares.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(mc.shares[0] > mc.shares[1] && mc.shares[1] > mc.shares[2]);
        assert!(close(mc.quantities.iter().sum::<f64>(), 0.5));

        let ps = m.price_setter_candidate(0).unwrap();
        // Fixed point: the price is optimal for the shares it induces.
        let shares = m.contest_at(ps.clearing_price).unwrap().shares;
        let best = m.curve.argmax_revenue(0.0, 0.5 * (shares[0] - 1.0), f64::INFINITY, 0.5, 1.0);
        assert!((best.price - ps.clearing_price).abs() < 1e-8);

        let b = m.min_block_reward().unwrap();
        assert!(b.bound >= b.share_level.unwrap());
    }

    #[test]
    fn asymmetric_reduces_to_symmetric() {
        let sym = market(0.75, 3);
        let asym = LedgerMarket {
            write_cost: WriteCost::PerMiner(vec![0.0; 3]),
            ..sym.clone()
        };
        let a = asym.market_clearing_candidate().unwrap();
        let s = sym.market_clearing_candidate().unwrap();
        assert!((a.total_investment() - s.total_investment()).abs() < 1e-12);
    }
}
