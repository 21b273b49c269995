//! Price-setting game between sellers with fixed quantities.
//!
//! Every pure equilibrium is either saturated (all sellers sell out at
//! `p0 = D^{-1}_sup(Q)`) or has a single price-setter who posts a reserve
//! above `p0` and sells the residual demand.

use crate::clearing::{canonical_clear, SellerBook, SellerOffer};
use crate::demand::{DemandCurve, EPS};
use crate::error::{Error, Result};
use crate::oracle;

#[derive(Clone, Debug, PartialEq)]
pub struct PriceSettingInstance {
    pub quantities: Vec<f64>,
    pub unit_costs: Vec<f64>,
    pub curve: DemandCurve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriceKind {
    Saturated,
    PriceSetter(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriceEquilibrium {
    pub kind: PriceKind,
    pub reserves: Vec<f64>,
    pub clearing_price: f64,
    pub payoffs: Vec<f64>,
    /// Largest gain any seller finds by moving only its reserve on a grid.
    /// Positive values flag a disagreement between the analytic checks and
    /// the search.
    pub oracle_gain: f64,
}

/// Reserve grid used by [`PriceSettingInstance::enumerate_equilibria`] to
/// cross-check its results.
pub const RESERVE_GRID: usize = 512;

/// `inf_{x > p0} (x − c)(Q − D(x)) / (x − p0)`, evaluated piecewise with the
/// `x → p0+` limit taken analytically. Negative (possibly `−∞`) when `p0 < c`:
/// such a seller would rather not sell out at `p0`.
pub(crate) fn saturation_bound(curve: &DemandCurve, total: f64, p0: f64, cost: f64) -> f64 {
    let alpha = p0 - cost;
    // h(u) = d·u + (α·d + β) + α·β/u with u = x − p0 and Q − D(x) = β + d·u.
    let h = |u: f64, d: f64, beta: f64| d * u + (alpha * d + beta) + alpha * beta / u;
    let mut best = f64::INFINITY;
    for (x0, x1, m0, m1) in curve.segments() {
        if x1 <= p0 {
            continue;
        }
        let d = (m0 - m1) / (x1 - x0);
        let a = m0 + d * x0;
        let beta = (total - a + d * p0).max(0.0);
        let lo = (x0 - p0).max(0.0);
        let hi = x1 - p0;
        if lo > 0.0 {
            best = best.min(h(lo, d, beta));
        } else if alpha * beta < 0.0 {
            return f64::NEG_INFINITY;
        } else if alpha * beta == 0.0 {
            best = best.min(alpha * d + beta);
        }
        best = best.min(h(hi, d, beta));
        if d > 0.0 && alpha * beta > 0.0 {
            let u = (alpha * beta / d).sqrt();
            if u > lo && u < hi {
                best = best.min(h(u, d, beta));
            }
        }
    }
    // Beyond v_max the ratio decreases towards Q.
    best.min(total)
}

impl PriceSettingInstance {
    pub fn new(quantities: Vec<f64>, unit_costs: Vec<f64>, curve: DemandCurve) -> Result<Self> {
        if quantities.len() != unit_costs.len() || quantities.is_empty() {
            return Err(Error::InvalidCosts(format!(
                "{} quantities and {} unit costs",
                quantities.len(),
                unit_costs.len()
            )));
        }
        if quantities.iter().any(|q| !(*q >= 0.0 && q.is_finite())) {
            return Err(Error::InvalidCosts("quantities must be finite and non-negative".into()));
        }
        if unit_costs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCosts("unit costs must be finite".into()));
        }
        let inst = PriceSettingInstance {
            quantities,
            unit_costs,
            curve,
        };
        let total = inst.total();
        if !(total > 0.0) {
            return Err(Error::InvalidCosts("total quantity must be positive".into()));
        }
        Ok(inst)
    }

    pub fn total(&self) -> f64 {
        self.quantities.iter().sum()
    }

    /// `p0 = D^{-1}_sup(Q)`.
    pub fn saturated_price(&self) -> Result<f64> {
        let total = self.total();
        let cap = self.curve.total_mass();
        if total > cap * (1.0 + EPS) {
            return Err(Error::InfeasibleQuantity {
                total,
                capacity: cap,
            });
        }
        Ok(self.curve.inverse(total.min(cap))?.sup_price)
    }

    /// Largest quantity seller `i` can hold and still prefer selling out at
    /// `p0` to setting a higher price. Negative when `p0` is below the seller's
    /// cost.
    pub fn saturated_threshold(&self, i: usize) -> Result<f64> {
        let p0 = self.saturated_price()?;
        Ok(saturation_bound(&self.curve, self.total(), p0, self.unit_costs[i]))
    }

    pub fn saturated_equilibrium(&self) -> Result<Option<PriceEquilibrium>> {
        let p0 = self.saturated_price()?;
        for i in 0..self.quantities.len() {
            let q = self.quantities[i];
            if q > 0.0 && q > self.saturated_threshold(i)? + EPS {
                return Ok(None);
            }
        }
        let reserves = vec![p0; self.quantities.len()];
        let payoffs = self.payoffs(&reserves);
        Ok(Some(PriceEquilibrium {
            kind: PriceKind::Saturated,
            clearing_price: p0,
            oracle_gain: self.reserve_gain(&reserves),
            reserves,
            payoffs,
        }))
    }

    /// `argmax_{x ≥ p0} (x − c_i)(D(x) + Q_i − Q)` and its value, floored at 0.
    pub fn price_setter_optimum(&self, i: usize) -> Result<(f64, f64)> {
        let p0 = self.saturated_price()?;
        let shift = self.quantities[i] - self.total();
        let hi = self.curve.v_max().max(p0);
        let best = self
            .curve
            .argmax_revenue(self.unit_costs[i], shift, f64::INFINITY, p0, hi);
        Ok((best.price, best.value.max(0.0)))
    }

    /// Saturated equilibrium (if any) followed by every price-setter profile
    /// that passes the analytic no-deviation checks. Non-price-setters post
    /// reserve 0.
    pub fn enumerate_equilibria(&self) -> Result<Vec<PriceEquilibrium>> {
        let mut out = Vec::new();
        if let Some(eq) = self.saturated_equilibrium()? {
            out.push(eq);
        }
        let p0 = self.saturated_price()?;
        let total = self.total();
        for i in 0..self.quantities.len() {
            let qi = self.quantities[i];
            if qi <= 0.0 {
                continue;
            }
            let (r, value) = self.price_setter_optimum(i)?;
            if r <= p0 + EPS || value <= 0.0 {
                continue;
            }
            if value + EPS < qi * (p0 - self.unit_costs[i]) {
                continue;
            }
            let stable = (0..self.quantities.len()).filter(|&j| j != i).all(|j| {
                let (qj, cj) = (self.quantities[j], self.unit_costs[j]);
                let hi = self.curve.v_max().max(r);
                let dev = self.curve.argmax_revenue(cj, qj - total, f64::INFINITY, r, hi);
                qj * (r - cj) + EPS >= dev.value
            });
            if !stable {
                continue;
            }
            let mut reserves = vec![0.0; self.quantities.len()];
            reserves[i] = r;
            let payoffs = self.payoffs(&reserves);
            out.push(PriceEquilibrium {
                kind: PriceKind::PriceSetter(i),
                clearing_price: r,
                oracle_gain: self.reserve_gain(&reserves),
                reserves,
                payoffs,
            });
        }
        Ok(out)
    }

    pub fn book(&self, reserves: &[f64]) -> SellerBook {
        SellerBook {
            offers: self
                .quantities
                .iter()
                .zip(reserves)
                .enumerate()
                .map(|(seller_id, (&quantity, &reserve))| SellerOffer {
                    seller_id,
                    quantity,
                    reserve,
                })
                .collect(),
        }
    }

    /// Payoffs `sold_i·(price − c_i)` under canonical clearing.
    pub fn payoffs(&self, reserves: &[f64]) -> Vec<f64> {
        let out = canonical_clear(&self.book(reserves), &self.curve);
        out.sold
            .iter()
            .zip(&self.unit_costs)
            .map(|(s, c)| s * (out.price - c))
            .collect()
    }

    fn reserve_gain(&self, reserves: &[f64]) -> f64 {
        (0..self.quantities.len())
            .map(|i| oracle::reserve_only_best_response(self, reserves, i, RESERVE_GRID).gain)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
