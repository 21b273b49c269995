//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use ledger_equilibria::clearing::{canonical_clear, cleared_range, clearing_bounds};
use ledger_equilibria::ledger::cover_ratio_sup;
use ledger_equilibria::oracle::{self, GridConfig, StrategyProfile};
use ledger_equilibria::tullock::{self, c_star};
use ledger_equilibria::{DemandCurve, LedgerMarket, PriceSettingInstance, WriteCost};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn linear_market(qa: f64, b: f64, costs: Vec<f64>) -> LedgerMarket {
    LedgerMarket::new(DemandCurve::linear(1.0, 1.0).unwrap(), qa, b, costs, WriteCost::Uniform(0.0))
        .unwrap()
}

fn three_identical_miners() -> Outcome {
    let grid = GridConfig::default();
    let m = linear_market(1.0, 0.0, vec![1.0; 3]);
    let mut failures = Vec::new();
    let cs = c_star(&m.resource_costs).unwrap();
    if !(cs.c_star == 1.5 && tullock::residual(&m.resource_costs, cs.c_star).abs() <= 1e-12) {
        failures.push(format!("c* = {}", cs.c_star));
    }
    let ps = m.price_setter_candidate(0).unwrap();
    let checks = [
        ("r", ps.clearing_price, 1.0 / 6.0),
        ("sum q", ps.total_investment(), 1.0 / 9.0),
        ("q_i", ps.investments[1], 1.0 / 27.0),
        ("revenue", ps.revenues[0], 1.0 / 36.0),
        ("payoff", ps.payoffs[0], -1.0 / 108.0),
    ];
    for (name, got, want) in checks {
        if !close(got, want, 1e-9) {
            failures.push(format!("{name} = {got}, want {want}"));
        }
    }
    let mc = m.market_clearing_candidate().unwrap();
    let inst = PriceSettingInstance::new(mc.quantities.clone(), vec![0.0; 3], m.curve.clone()).unwrap();
    let thr = inst.saturated_threshold(0).unwrap();
    if !(close(thr, 0.0, 1e-9) && mc.quantities[0] > thr) {
        failures.push(format!("saturated threshold {thr} vs quantity {}", mc.quantities[0]));
    }
    let v_ps = oracle::verify_equilibrium(&m, &ps.profile(), &grid);
    let v_mc = oracle::verify_equilibrium(&m, &mc.profile(), &grid);
    if v_ps.is_equilibrium || v_ps.max_gain < 1.0 / 108.0 - grid.tolerance {
        failures.push(format!("price-setter gain {}", v_ps.max_gain));
    }
    if v_mc.is_equilibrium {
        failures.push("market-clearing candidate verified".into());
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "c*=1.5, r=1/6, payoff=-1/108; witness gains {:.6} (ps), {:.6} (mc)",
                v_ps.max_gain, v_mc.max_gain
            )
        } else {
            failures.join("; ")
        },
    )
}

fn qa_three_quarters() -> Outcome {
    let grid = GridConfig::default();
    let lin = DemandCurve::linear(1.0, 1.0).unwrap();
    let sup = cover_ratio_sup(&lin, 0.75, 0.0).unwrap();
    let m = linear_market(0.75, 0.0, vec![1.0; 3]);
    let t = m.sufficiency_threshold().unwrap();
    let mc = m.market_clearing_candidate().unwrap();
    let v = oracle::verify_equilibrium(&m, &mc.profile(), &grid);
    let monopolist_share_passes = 1.0 <= 1.0 - sup;
    let mono = linear_market(0.75, 0.0, vec![1.0, 1000.0]);
    let mono_t = mono.sufficiency_threshold().unwrap();
    let mono_v = oracle::verify_equilibrium(&mono, &mono.market_clearing_candidate().unwrap().profile(), &grid);
    let pass = close(sup, 2.0 / 3.0, 1e-6)
        && t.per_miner_pass.iter().all(|p| *p)
        && v.is_equilibrium
        && !monopolist_share_passes
        && !mono_t.per_miner_pass[0]
        && !mono_v.is_equilibrium;
    outcome(
        pass,
        format!(
            "sup = {sup:.9}; n=3 threshold pass {:?}, oracle gain {:.2e}; share-1 passes {}; \
             near-monopolist threshold pass {:?}, oracle gain {:.4}",
            t.per_miner_pass, v.max_gain, monopolist_share_passes, mono_t.per_miner_pass, mono_v.max_gain
        ),
    )
}

fn regular_boundary() -> Outcome {
    let mut mismatches = Vec::new();
    let mut flips = Vec::new();
    for n in 2..=6usize {
        let b = (n as f64 - 1.0) / (2.0 * n as f64);
        let holds = |qa: f64| linear_market(qa, 0.0, vec![1.0; n]).sufficiency_regular().unwrap();
        let mut qs: Vec<f64> = (1..50).map(|k| k as f64 / 50.0).collect();
        qs.extend([b - 1e-9, b + 1e-9]);
        for qa in qs {
            if holds(qa) != (qa <= b) {
                mismatches.push(format!("n={n}, Q_A={qa:.9}"));
            }
        }
        let (mut lo, mut hi) = (0.01, 0.99);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        flips.push(format!("n={n}: {lo:.6} vs {b:.6}"));
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "{} mismatches; observed flip vs expected: {}",
            mismatches.len(),
            flips.join(", ")
        ),
    )
}

fn b_invariance() -> Outcome {
    let mut rng = common::rng(4);
    let mut worst_price: f64 = 0.0;
    let mut worst_share: f64 = 0.0;
    let mut worst_scale: f64 = 0.0;
    for _ in 0..20 {
        let base = common::symmetric_market(&mut rng, 0.0);
        let cw = base.write_cost_of(0);
        let cands = |m: &LedgerMarket| {
            let mut v = vec![m.market_clearing_candidate().unwrap()];
            v.extend((0..m.n()).map(|i| m.price_setter_candidate(i).unwrap()));
            v
        };
        let at0 = cands(&base);
        for b in [0.0, 1.0, 10.0] {
            let at = cands(&base.with_block_reward(b));
            for (c0, c) in at0.iter().zip(&at) {
                worst_price = worst_price.max((c0.clearing_price - c.clearing_price).abs());
                for (x0, x) in c0.shares.iter().zip(&c.shares) {
                    worst_share = worst_share.max((x0 - x).abs());
                }
                let r = c0.clearing_price;
                if c0.total_investment() > 0.0 {
                    let want = (r + b - cw) / (r - cw);
                    let got = c.total_investment() / c0.total_investment();
                    worst_scale = worst_scale.max((got - want).abs() / want);
                }
            }
        }
    }
    outcome(
        worst_price <= 1e-12 && worst_share <= 1e-12 && worst_scale <= 1e-12,
        format!("max deviations: price {worst_price:.1e}, share {worst_share:.1e}, relative sum-q scale {worst_scale:.1e}"),
    )
}

fn rescale_soundness() -> Outcome {
    let grid = GridConfig::default();
    let mut rng = common::rng(5);
    let (mut verified, mut failures) = (0, 0);
    for _ in 0..50 {
        let m = common::symmetric_market(&mut rng, 0.0);
        let mc = m.market_clearing_candidate().unwrap();
        if !oracle::verify_equilibrium(&m, &mc.profile(), &grid).is_equilibrium {
            continue;
        }
        verified += 1;
        let moved = m.block_reward_rescale(&mc, 5.0).unwrap();
        if !oracle::verify_equilibrium(&m.with_block_reward(5.0), &moved.profile(), &grid).is_equilibrium {
            failures += 1;
        }
    }
    outcome(
        failures == 0 && verified > 0,
        format!("{verified} of 50 markets verified at B=0; {failures} failures after rescaling to B=5"),
    )
}

fn min_block_reward() -> Outcome {
    let grid = GridConfig::default();
    let m = linear_market(0.5, 0.0, vec![1.0; 3]);
    let b = m.min_block_reward().unwrap();
    let at = m.with_block_reward(b.bound);
    let v = oracle::verify_equilibrium(&at, &at.market_clearing_candidate().unwrap().profile(), &grid);
    outcome(
        close(b.bound, 4.5, 1e-9) && v.max_gain <= grid.tolerance,
        format!("bound {:.12}, oracle max gain at the bound {:.2e}", b.bound, v.max_gain),
    )
}

fn tightness() -> Outcome {
    let grid = GridConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for delta in [0.25, 0.5] {
        let n = (1.0 / delta) as usize;
        let curve = DemandCurve::linear(1.0 + delta, 1.0 + delta).unwrap();
        for b in [0.0, 1.0, 100.0] {
            let m = LedgerMarket::new(curve.clone(), 1.0, b, vec![1.0; n], WriteCost::Uniform(0.0)).unwrap();
            let mc = m.market_clearing_candidate().unwrap();
            let inst = PriceSettingInstance::new(mc.quantities.clone(), vec![0.0; n], curve.clone()).unwrap();
            let thr = inst.saturated_threshold(0).unwrap();
            let shares_ok = mc.shares.iter().all(|x| close(*x, delta, 1e-9)) && close(thr, delta, 1e-9);
            let v = oracle::verify_equilibrium(&m, &mc.profile(), &grid);
            let deviation = v.max_gain > grid.tolerance;
            pass &= shares_ok && deviation;
            parts.push(format!(
                "δ={delta} B={b}: x*,threshold ok={shares_ok}, gain {:.2e}",
                v.max_gain
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

/// Payoff resolution of the oracle around its argmax: the largest change in
/// payoff between the argmax investment and its grid neighbours.
fn resolution(m: &LedgerMarket, profile: &StrategyProfile, i: usize, q: f64, r: f64, step: f64) -> f64 {
    let at = |qq: f64| {
        let mut p = profile.clone();
        p.investments[i] = qq.max(0.0);
        p.reserves[i] = r;
        oracle::profile_payoff(m, &p, i)
    };
    let centre = at(q);
    (at(q - step) - centre).abs().max((at(q + step) - centre).abs())
}

fn closed_form_equivalence() -> Outcome {
    let grid = GridConfig::default();
    let mut rng = common::rng(8);
    let (mut surface_fail, mut y_fail, mut y_checked) = (Vec::new(), 0, 0);
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let m = common::symmetric_market(&mut rng, 0.0);
        let mc = m.market_clearing_candidate().unwrap();
        let profile = mc.profile();
        let total = mc.total_investment();
        let step = grid.q_max_multiplier * total / (grid.q_points - 1) as f64;
        for i in 0..m.n() {
            let x = mc.shares[i];
            if x <= 0.0 {
                continue;
            }
            let mut closed = f64::NEG_INFINITY;
            let mut zs: Vec<f64> = (1..=2000).map(|j| j as f64 / 2000.0).collect();
            zs.extend(
                m.curve
                    .points()
                    .iter()
                    .map(|p| p.1 / m.append_supply)
                    .filter(|z| *z > 0.0 && *z < 1.0),
            );
            for z in zs {
                let y = m.optimal_y(i, z).unwrap().min(z);
                closed = closed.max(m.deviation_payoff_yz(i, y, z).unwrap());
            }
            let br = oracle::best_response(&m, &profile, i, &grid);
            let tol = 2.0 * resolution(&m, &profile, i, br.deviation.investment, br.deviation.reserve, step)
                + grid.tolerance;
            worst = worst.max((closed - br.payoff).abs());
            if (closed - br.payoff).abs() > tol {
                surface_fail.push(format!("case {case} miner {i}: {closed:.9} vs {:.9}", br.payoff));
            }

            let others = total - mc.investments[i];
            let qa = m.append_supply;
            for z in [0.25, 0.5, 0.75] {
                let y_star = m.optimal_y(i, z).unwrap();
                let q_star = others * (1.0 - y_star) / y_star;
                if !(y_star < z) || q_star > grid.q_max_multiplier * total - 2.0 * step {
                    continue;
                }
                let r = m.curve.inverse(z * qa).unwrap().sup_price;
                let payoff = |q: f64| {
                    let mut p = profile.clone();
                    p.investments[i] = q;
                    p.reserves[i] = r;
                    oracle::profile_payoff(&m, &p, i)
                };
                // The family needs y ≤ z; smaller investments sell nothing.
                let first = (others * (1.0 - z) / z / step).ceil() as usize;
                let (k, _) = (first..grid.q_points)
                    .map(|k| (k, payoff(k as f64 * step)))
                    .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
                let y_of = |k: f64| others / (others + k * step);
                let (y_hi, y_lo) = (y_of(k as f64 - 1.0), y_of(k as f64 + 1.0));
                y_checked += 1;
                if !(y_star <= y_hi && y_star >= y_lo) {
                    y_fail += 1;
                }
            }
        }
    }
    outcome(
        surface_fail.is_empty() && y_fail == 0 && y_checked > 0,
        format!(
            "surface mismatches {}{}; max |closed - oracle| {worst:.2e}; optimal y outside one step: {y_fail} of {y_checked}",
            surface_fail.len(),
            surface_fail.first().map_or(String::new(), |s| format!(" (first: {s})")),
        ),
    )
}

fn tullock_suite() -> Outcome {
    let mut rng = common::rng(9);
    let mut failures = Vec::new();
    for _ in 0..200 {
        let n = rng.gen_range(2..=6);
        let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
        let base = c_star(&costs).unwrap();
        let alpha = rng.gen_range(0.01..100.0);
        let scaled = c_star(&costs.iter().map(|c| c * alpha).collect::<Vec<_>>()).unwrap();
        if (scaled.c_star - alpha * base.c_star).abs() > 1e-12 * alpha * base.c_star
            || scaled.shares.iter().zip(&base.shares).any(|(a, b)| (a - b).abs() > 1e-12)
        {
            failures.push("scale invariance".to_string());
        }
        let i = rng.gen_range(0..n);
        let mut raised = costs.clone();
        raised[i] *= 1.0 + rng.gen_range(0.01..1.0);
        if c_star(&raised).unwrap().shares[i] > base.shares[i] + 1e-15 {
            failures.push("share monotonicity".into());
        }
        let y = rng.gen_range(0.1..10.0);
        let q: Vec<f64> = base.shares.iter().map(|x| x * y / base.c_star).collect();
        let s: f64 = q.iter().sum();
        for j in 0..n {
            if base.shares[j] > 0.0 {
                let grad = y * (s - q[j]) / (s * s) - costs[j];
                if grad.abs() > 1e-9 * costs[j].max(1.0) {
                    failures.push(format!("stationarity residual {grad:e}"));
                }
            }
        }
    }
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=6);
        let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
        let sol = c_star(&costs).unwrap();
        let y = rng.gen_range(0.1..10.0);
        let q: Vec<f64> = sol.shares.iter().map(|x| x * y / sol.c_star).collect();
        let i = rng.gen_range(0..n);
        let base = tullock::payoff(y, &q, i, costs[i]);

        let z = rng.gen_range(0.0..3.0);
        let mut dev = q.clone();
        dev[i] += z * y / sol.c_star;
        let loss = base - tullock::payoff(y, &dev, i, costs[i]);
        let ratio = (costs[i] / sol.c_star).min(1.0);
        if tullock::investment_loss_bound(y, ratio, z) > loss + 1e-12 {
            violations += 1;
        }

        let x = sol.shares[i];
        let w = rng.gen_range(0.0..(1.0 - x) * 0.999);
        let others: f64 = q.iter().sum::<f64>() - q[i];
        let mut dev = q.clone();
        dev[i] = others * (x + w) / (1.0 - x - w);
        let loss = base - tullock::payoff(y, &dev, i, costs[i]);
        if tullock::share_increase_loss_bound(y, w) > loss + 1e-12 {
            violations += 1;
        }
    }
    if violations > 0 {
        failures.push(format!("{violations} loss-bound violations"));
    }
    failures.dedup();
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "200 contests, 1000 deviations per bound: no violations".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn clearing_suite() -> Outcome {
    let mut rng = common::rng(10);
    let mut failures: Vec<String> = Vec::new();
    let mut worst_final: f64 = 0.0;
    for case in 0..200 {
        let curve = common::general_curve(&mut rng);
        let book = common::book(&mut rng, &curve);
        let (p_min, p_max) = clearing_bounds(&book, &curve);
        if p_min > p_max + 1e-12 {
            failures.push(format!("case {case}: p_min {p_min} > p_max {p_max}"));
        }
        let out = canonical_clear(&book, &curve);
        let sum: f64 = out.sold.iter().sum();
        if (sum - out.total_cleared).abs() > 1e-12 {
            failures.push(format!("case {case}: sold {sum} vs cleared {}", out.total_cleared));
        }
        let (lo, hi) = cleared_range(&book, &curve, out.price).unwrap();
        if out.total_cleared < lo - 1e-12 || out.total_cleared > hi + 1e-12 {
            failures.push(format!("case {case}: cleared outside [{lo}, {hi}]"));
        }
        for (o, s) in book.offers.iter().zip(&out.sold) {
            let saturated = if o.reserve < out.price {
                (s - o.quantity).abs() <= 1e-12
            } else if o.reserve > out.price {
                *s == 0.0
            } else {
                *s <= o.quantity + 1e-12
            };
            if !saturated {
                failures.push(format!("case {case}: saturation"));
            }
        }
        let mut prev = f64::INFINITY;
        for k in 6..=12 {
            let bids = oracle::discretize_demand(&curve, 1 << k);
            let gap = (oracle::discrete_clearing_price(&book, &bids) - out.price).abs();
            if gap > prev + 1e-12 {
                failures.push(format!("case {case}: gap grew from {prev:.3e} to {gap:.3e} at 2^{k} atoms"));
            }
            prev = gap;
        }
        let step = curve.v_max() / 4096.0;
        worst_final = worst_final.max(prev / step);
        if prev > step + 1e-12 {
            failures.push(format!("case {case}: final gap {prev:.3e} exceeds one atom {step:.3e}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "200 books; {} failures{}; largest final gap {worst_final:.3} atoms",
            failures.len(),
            failures.first().map_or(String::new(), |s| format!(" (first: {s})"))
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("worked example with three identical miners", three_identical_miners),
        ("Q_A = 3/4 exact threshold", qa_three_quarters),
        ("regular-bound boundary at (n-1)/(2n)", regular_boundary),
        ("block-reward invariance", b_invariance),
        ("block-reward rescaling soundness", rescale_soundness),
        ("minimum block reward", min_block_reward),
        ("tightness family deviation", tightness),
        ("closed-form deviation surface vs oracle", closed_form_equivalence),
        ("Tullock property suite", tullock_suite),
        ("clearing engine property suite", clearing_suite),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "{} [{}] {name}: {} ({:.2}s)",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
