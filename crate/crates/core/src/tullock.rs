//! Tullock contest for blockspace: miners invest `q_i` and receive the share
//! `q_i / Σq` of a total reward `Y`.

use crate::error::{Error, Result};

/// Critical cost `c*` and equilibrium shares `x_i* = max{0, 1 − c_i/c*}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContestShares {
    pub c_star: f64,
    pub shares: Vec<f64>,
}

/// Costs for the asymmetric contest where each unit of share is worth
/// `r + B − c_i^W` to miner `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostProfile {
    pub resource_costs: Vec<f64>,
    pub write_costs: Option<Vec<f64>>,
    pub block_reward: f64,
    pub reference_price: f64,
}

const RESIDUAL_TOL: f64 = 1e-12;

/// `Σ max{0, 1 − c_i/x} − 1`.
pub fn residual(costs: &[f64], x: f64) -> f64 {
    costs.iter().map(|c| (1.0 - c / x).max(0.0)).sum::<f64>() - 1.0
}

fn validate(costs: &[f64]) -> Result<()> {
    if costs.len() < 2 {
        return Err(Error::InvalidCosts(format!(
            "the contest needs at least two miners, got {}",
            costs.len()
        )));
    }
    if let Some(c) = costs.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::InvalidCosts(format!("resource cost {c} must be positive and finite")));
    }
    Ok(())
}

/// Solves `Σ max{0, 1 − c_i/c*} = 1` by bisection on `[min c, n·max c]`.
///
/// Once the bracket is tight the active set is known, and `c*` is recomputed
/// as `Σ_active c_i / (|active| − 1)`, which is exact for that set.
pub fn c_star(costs: &[f64]) -> Result<ContestShares> {
    validate(costs)?;
    let n = costs.len() as f64;
    let mut lo = costs.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = n * costs.iter().cloned().fold(0.0, f64::max);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(costs, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut best = if residual(costs, hi).abs() <= residual(costs, lo).abs() {
        hi
    } else {
        lo
    };

    let active: Vec<f64> = costs.iter().cloned().filter(|&c| c < best).collect();
    if active.len() >= 2 {
        let exact = active.iter().sum::<f64>() / (active.len() as f64 - 1.0);
        let consistent = costs.iter().all(|&c| (c < exact) == active.contains(&c));
        if consistent && residual(costs, exact).abs() <= residual(costs, best).abs() {
            best = exact;
        }
    }
    if residual(costs, best).abs() > RESIDUAL_TOL {
        return Err(Error::NonConvergence {
            what: "critical cost bisection",
            iterations: 2000,
            trace: vec![lo, hi, residual(costs, best)],
        });
    }
    Ok(ContestShares {
        c_star: best,
        shares: costs.iter().map(|c| (1.0 - c / best).max(0.0)).collect(),
    })
}

/// Asymmetric critical cost: solves `Σ max{0, 1 − c_i^R/((r + B − c_i^W)·c*)} = 1`.
///
/// Miners with `r + B − c_i^W ≤ 0` do not participate and get share 0.
pub fn c_star_asym(profile: &CostProfile) -> Result<ContestShares> {
    let n = profile.resource_costs.len();
    validate(&profile.resource_costs)?;
    let margins: Vec<f64> = match &profile.write_costs {
        Some(w) if w.len() != n => {
            return Err(Error::InvalidCosts(format!(
                "{n} resource costs but {} write costs",
                w.len()
            )))
        }
        Some(w) => w
            .iter()
            .map(|cw| profile.reference_price + profile.block_reward - cw)
            .collect(),
        None => vec![profile.reference_price + profile.block_reward; n],
    };
    let viable: Vec<usize> = (0..n).filter(|&i| margins[i] > 0.0).collect();
    if viable.len() < 2 {
        return Err(Error::InvalidCosts(format!(
            "only {} miner(s) have a positive effective reward",
            viable.len()
        )));
    }
    let effective: Vec<f64> = viable
        .iter()
        .map(|&i| profile.resource_costs[i] / margins[i])
        .collect();
    let sol = c_star(&effective)?;
    let mut shares = vec![0.0; n];
    for (k, &i) in viable.iter().enumerate() {
        shares[i] = sol.shares[k];
    }
    Ok(ContestShares {
        c_star: sol.c_star,
        shares,
    })
}

/// Exact contest payoff `Y·q_i/Σq − c_i·q_i`; zero when nobody invests.
pub fn payoff(total_reward: f64, investments: &[f64], i: usize, cost: f64) -> f64 {
    let sum: f64 = investments.iter().sum();
    if sum <= 0.0 {
        return 0.0;
    }
    total_reward * investments[i] / sum - cost * investments[i]
}

/// Lower bound on the loss from investing `z·Y/c*` beyond the equilibrium:
/// `z²/(1+z)·Y·min{1, c_i/c*}`.
pub fn investment_loss_bound(total_reward: f64, cost_ratio: f64, z: f64) -> f64 {
    z * z / (1.0 + z) * total_reward * cost_ratio
}

/// Lower bound `w²·Y/2` on the loss from raising one's share by `w`.
pub fn share_increase_loss_bound(total_reward: f64, w: f64) -> f64 {
    w * w * total_reward / 2.0
}
