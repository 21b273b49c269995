//! Random instances shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use ledger_equilibria::clearing::SellerBook;
use ledger_equilibria::{DemandCurve, LedgerMarket, WriteCost};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Concave, strictly decreasing piecewise-linear demand, hence regular.
pub fn concave_curve(rng: &mut StdRng) -> DemandCurve {
    let segments = rng.gen_range(1..=4);
    let mass = rng.gen_range(0.5..3.0);
    let mut slopes: Vec<f64> = (0..segments).map(|_| rng.gen_range(0.2..3.0)).collect();
    slopes.sort_by(|a, b| a.total_cmp(b));
    // Split the mass across segments; steeper segments come later.
    let mut cuts: Vec<f64> = (0..segments - 1).map(|_| rng.gen_range(0.1..0.9)).collect();
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.push(1.0);
    let mut points = vec![(0.0, mass)];
    let (mut x, mut prev) = (0.0, 0.0);
    for (k, cut) in cuts.iter().enumerate() {
        let drop = mass * (cut - prev);
        x += drop / slopes[k];
        points.push((x, (mass * (1.0 - cut)).max(0.0)));
        prev = *cut;
    }
    let last = points.len() - 1;
    points[last].1 = 0.0;
    DemandCurve::new(points).expect("generated curve is valid")
}

/// Any non-increasing curve, with occasional jumps and flat stretches.
pub fn general_curve(rng: &mut StdRng) -> DemandCurve {
    let k = rng.gen_range(1..=5);
    let mut points = Vec::with_capacity(k + 1);
    let mut x = 0.0;
    let mut m: f64 = rng.gen_range(0.5..3.0);
    points.push((x, m));
    for j in 0..k {
        match rng.gen_range(0..6) {
            0 => {}
            1 => {
                x += rng.gen_range(0.05..0.5);
            }
            _ => x += rng.gen_range(0.05..0.8),
        }
        m = if j + 1 == k { 0.0 } else { m * rng.gen_range(0.2..1.0) };
        points.push((x, m));
    }
    if points.last().unwrap().0 == 0.0 {
        points.last_mut().unwrap().0 = 0.5;
    }
    DemandCurve::new(points).expect("generated curve is valid")
}

pub fn book(rng: &mut StdRng, curve: &DemandCurve) -> SellerBook {
    let n = rng.gen_range(1..=6);
    let top = curve.v_max() * 1.1;
    let mut reserves: Vec<f64> = Vec::with_capacity(n);
    let offers: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let q = rng.gen_range(0.0..0.6) * curve.total_mass();
            let r = if !reserves.is_empty() && rng.gen_bool(0.25) {
                reserves[rng.gen_range(0..reserves.len())]
            } else if rng.gen_bool(0.15) {
                0.0
            } else {
                rng.gen_range(0.0..top)
            };
            reserves.push(r);
            (q, r)
        })
        .collect();
    SellerBook::new(&offers).expect("generated book is valid")
}

/// Symmetric-write-cost market on a concave curve.
pub fn symmetric_market(rng: &mut StdRng, block_reward: f64) -> LedgerMarket {
    let curve = concave_curve(rng);
    let qa = rng.gen_range(0.05..0.9) * curve.total_mass();
    let n = rng.gen_range(2..=5);
    let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let p0 = curve.inverse(qa).unwrap().sup_price;
    let cw = rng.gen_range(0.0..0.5) * p0;
    LedgerMarket::new(curve, qa, block_reward, costs, WriteCost::Uniform(cw)).unwrap()
}

/// Symmetric market with identical miners; `x_i* = 1/n`.
pub fn identical_miner_market(rng: &mut StdRng) -> LedgerMarket {
    let curve = concave_curve(rng);
    let qa = rng.gen_range(0.05..0.95) * curve.total_mass();
    let n = rng.gen_range(2..=6);
    LedgerMarket::new(curve, qa, 0.0, vec![1.0; n], WriteCost::Uniform(0.0)).unwrap()
}
