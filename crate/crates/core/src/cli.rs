//! Command-line front end: scenario files, reports, sweeps and built-in
//! reproductions. The `ledger-eq` binary is a thin wrapper around [`run`].

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demand::DemandCurve;
use crate::error::{Error, Result};
use crate::ledger::{
    CandidateKind, EquilibriumCandidate, FixedPointConfig, LedgerMarket, WriteCost,
};
use crate::oracle::{self, GridConfig, StrategyProfile, Verdict};
use crate::price_setting::PriceSettingInstance;

/// Exit code for a reproduction whose computed values disagree with the
/// pinned expectations.
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub demand: DemandSpec,
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub market: MarketSpec,
    pub miners: Vec<MinerSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSpec {
    /// `(price, mass)` breakpoints.
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub append_supply: f64,
    #[serde(default)]
    pub block_reward: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    #[serde(default)]
    pub write_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinerSpec {
    pub resource_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub write_cost: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub grid_q: usize,
    pub grid_r: usize,
    pub tolerance: f64,
    pub q_max_multiplier: f64,
    pub damping: f64,
    pub max_iterations: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let g = GridConfig::default();
        let f = FixedPointConfig::default();
        SolverSpec {
            grid_q: g.q_points,
            grid_r: g.r_points,
            tolerance: g.tolerance,
            q_max_multiplier: g.q_max_multiplier,
            damping: f.damping,
            max_iterations: f.max_iterations,
        }
    }
}

impl Scenario {
    /// Symmetric scenario with `n` unit-cost miners.
    pub fn symmetric(curve: &DemandCurve, append_supply: f64, block_reward: f64, n: usize) -> Self {
        Scenario {
            demand: DemandSpec {
                points: curve.points().to_vec(),
            },
            protocol: ProtocolSpec {
                append_supply,
                block_reward,
            },
            market: MarketSpec::default(),
            miners: vec![
                MinerSpec {
                    resource_cost: 1.0,
                    write_cost: None,
                };
                n
            ],
            solver: SolverSpec::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario =
            toml::from_str(text).map_err(|e| Error::input("scenario", e.message().to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::input(path.display().to_string(), e.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario fields are always representable")
    }

    /// Field-level checks; the market constructor repeats the economic ones.
    pub fn validate(&self) -> Result<()> {
        let curve = self.curve()?;
        let p = &self.protocol;
        if !(p.append_supply > 0.0 && p.append_supply <= curve.total_mass()) {
            return Err(Error::input(
                "protocol.append_supply",
                format!(
                    "{} must be in (0, {}], the demand at price zero",
                    p.append_supply,
                    curve.total_mass()
                ),
            ));
        }
        if !(p.block_reward >= 0.0 && p.block_reward.is_finite()) {
            return Err(Error::input(
                "protocol.block_reward",
                format!("{} must be finite and non-negative", p.block_reward),
            ));
        }
        if !self.market.write_cost.is_finite() {
            return Err(Error::input("market.write_cost", "must be finite"));
        }
        if self.miners.len() < 2 {
            return Err(Error::input(
                "miners",
                format!("at least two miners are required, got {}", self.miners.len()),
            ));
        }
        for (i, m) in self.miners.iter().enumerate() {
            if !(m.resource_cost > 0.0 && m.resource_cost.is_finite()) {
                return Err(Error::input(
                    format!("miners[{i}].resource_cost"),
                    format!("{} must be positive and finite", m.resource_cost),
                ));
            }
            if let Some(w) = m.write_cost {
                if !w.is_finite() {
                    return Err(Error::input(format!("miners[{i}].write_cost"), "must be finite"));
                }
            }
        }
        let s = &self.solver;
        if s.grid_q < 2 {
            return Err(Error::input("solver.grid_q", "needs at least 2 points"));
        }
        if s.grid_r < 2 {
            return Err(Error::input("solver.grid_r", "needs at least 2 points"));
        }
        if !(s.tolerance > 0.0 && s.tolerance.is_finite()) {
            return Err(Error::input("solver.tolerance", "must be positive"));
        }
        if !(s.q_max_multiplier >= 1.0 && s.q_max_multiplier.is_finite()) {
            return Err(Error::input("solver.q_max_multiplier", "must be at least 1"));
        }
        if !(s.damping > 0.0 && s.damping <= 1.0) {
            return Err(Error::input("solver.damping", "must be in (0, 1]"));
        }
        if s.max_iterations == 0 {
            return Err(Error::input("solver.max_iterations", "must be positive"));
        }
        Ok(())
    }

    pub fn curve(&self) -> Result<DemandCurve> {
        DemandCurve::new(self.demand.points.clone()).map_err(|e| match e {
            Error::InvalidCurve { index, reason } => {
                Error::input(format!("demand.points[{index}]"), reason)
            }
            other => other,
        })
    }

    pub fn market(&self) -> Result<LedgerMarket> {
        self.validate()?;
        let write_cost = if self.miners.iter().any(|m| m.write_cost.is_some()) {
            WriteCost::PerMiner(
                self.miners
                    .iter()
                    .map(|m| m.write_cost.unwrap_or(self.market.write_cost))
                    .collect(),
            )
        } else {
            WriteCost::Uniform(self.market.write_cost)
        };
        LedgerMarket::new(
            self.curve()?,
            self.protocol.append_supply,
            self.protocol.block_reward,
            self.miners.iter().map(|m| m.resource_cost).collect(),
            write_cost,
        )
    }

    pub fn grid(&self) -> GridConfig {
        GridConfig {
            q_points: self.solver.grid_q,
            r_points: self.solver.grid_r,
            q_max_multiplier: self.solver.q_max_multiplier,
            tolerance: self.solver.tolerance,
        }
    }

    pub fn fixed_point(&self) -> FixedPointConfig {
        FixedPointConfig {
            damping: self.solver.damping,
            max_iterations: self.solver.max_iterations,
            ..FixedPointConfig::default()
        }
    }

    /// Copy with one parameter replaced.
    ///
    /// `tightness.delta` replaces the whole market by the tightness family:
    /// `D(x) = 1 + δ − x`, one unit of appends, `1/δ` unit-cost miners.
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<Scenario> {
        let mut s = self.clone();
        match path {
            "protocol.append_supply" => s.protocol.append_supply = value,
            "protocol.block_reward" => s.protocol.block_reward = value,
            "market.write_cost" => s.market.write_cost = value,
            "tightness.delta" => {
                let n = tightness_miners(value)?;
                let solver = s.solver.clone();
                s = Scenario::symmetric(
                    &DemandCurve::linear(1.0 + value, 1.0 + value)?,
                    1.0,
                    s.protocol.block_reward,
                    n,
                );
                s.solver = solver;
            }
            other => {
                return Err(Error::input(
                    "sweep.parameter",
                    format!(
                        "unknown path '{other}' (expected protocol.append_supply, \
                         protocol.block_reward, market.write_cost or tightness.delta)"
                    ),
                ))
            }
        }
        s.validate()?;
        Ok(s)
    }
}

fn tightness_miners(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::input("tightness.delta", format!("{delta} must be in (0, 1)")));
    }
    let n = (1.0 / delta).round();
    if (n * delta - 1.0).abs() > 1e-9 {
        return Err(Error::input(
            "tightness.delta",
            format!("{delta} must be the reciprocal of an integer"),
        ));
    }
    Ok(n as usize)
}

/// The tightness-family scenario for `δ` at block reward `b`.
pub fn tightness_scenario(delta: f64, block_reward: f64) -> Result<Scenario> {
    let n = tightness_miners(delta)?;
    Ok(Scenario::symmetric(
        &DemandCurve::linear(1.0 + delta, 1.0 + delta)?,
        1.0,
        block_reward,
        n,
    ))
}

/// Explicit strategy profile read by `verify`.
pub fn load_profile(path: &Path, n: usize) -> Result<StrategyProfile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(path.display().to_string(), e.to_string()))?;
    let p: StrategyProfile =
        toml::from_str(&text).map_err(|e| Error::input("profile", e.message().to_string()))?;
    for (field, values) in [("investments", &p.investments), ("reserves", &p.reserves)] {
        if values.len() != n {
            return Err(Error::input(
                format!("profile.{field}"),
                format!("expected {n} entries, got {}", values.len()),
            ));
        }
        if let Some(k) = values.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::input(
                format!("profile.{field}[{k}]"),
                format!("{} must be finite and non-negative", values[k]),
            ));
        }
    }
    Ok(p)
}

#[derive(Clone, Debug)]
pub struct CandidateCheck {
    pub candidate: EquilibriumCandidate,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub clearing_floor: f64,
    pub reserve_caps: Vec<f64>,
    pub c_star: f64,
    pub shares: Vec<f64>,
    pub market_clearing: CandidateCheck,
    pub price_setters: Vec<std::result::Result<CandidateCheck, String>>,
    pub saturated_thresholds: Vec<f64>,
    pub regular: std::result::Result<bool, String>,
    pub threshold: std::result::Result<crate::ledger::SufficiencyThreshold, String>,
    pub min_block_reward: std::result::Result<crate::ledger::MinBlockReward, String>,
}

impl SolveReport {
    pub fn equilibria(&self) -> usize {
        let ps = self
            .price_setters
            .iter()
            .filter(|c| matches!(c, Ok(c) if !c.candidate.degenerate && c.verdict.is_equilibrium))
            .count();
        ps + usize::from(self.market_clearing.verdict.is_equilibrium)
    }
}

fn check(market: &LedgerMarket, candidate: EquilibriumCandidate, grid: &GridConfig) -> CandidateCheck {
    let verdict = oracle::verify_equilibrium(market, &candidate.profile(), grid);
    CandidateCheck { candidate, verdict }
}

/// Candidates, closed-form tests and oracle verdicts for one scenario.
pub fn solve(scenario: &Scenario, grid: &GridConfig) -> Result<SolveReport> {
    let market = scenario.market()?;
    let p0 = market.clearing_floor();
    let contest = market.contest_at(p0)?;
    let mc = market.market_clearing_candidate()?;
    let instance = PriceSettingInstance::new(
        mc.quantities.clone(),
        (0..market.n()).map(|i| market.write_cost_of(i)).collect(),
        market.curve.clone(),
    )?;
    let saturated_thresholds = (0..market.n())
        .map(|i| instance.saturated_threshold(i))
        .collect::<Result<Vec<_>>>()?;

    let fixed_point = scenario.fixed_point();
    let mut price_setters = Vec::with_capacity(market.n());
    for i in 0..market.n() {
        match market.price_setter_candidate_with(i, &fixed_point) {
            Ok(c) => price_setters.push(Ok(check(&market, c, grid))),
            Err(e @ Error::NonConvergence { .. }) => return Err(e),
            Err(e) => price_setters.push(Err(e.to_string())),
        }
    }
    Ok(SolveReport {
        clearing_floor: p0,
        reserve_caps: (0..market.n()).map(|i| market.reserve_cap(i)).collect(),
        c_star: contest.c_star,
        shares: contest.shares,
        market_clearing: check(&market, mc, grid),
        price_setters,
        saturated_thresholds,
        regular: market.sufficiency_regular().map_err(|e| e.to_string()),
        threshold: market.sufficiency_threshold().map_err(|e| e.to_string()),
        min_block_reward: market.min_block_reward().map_err(|e| e.to_string()),
    })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.9}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_verdict(out: &mut String, v: &Verdict) {
    if v.is_equilibrium {
        let _ = writeln!(out, "  oracle: equilibrium (max gain {:.3e})", v.max_gain);
    } else if let Some(w) = &v.witness {
        let _ = writeln!(
            out,
            "  oracle: NOT an equilibrium; miner {} gains {:.9} by investing {:.9} with reserve {:.9}",
            w.miner, w.gain, w.deviation.investment, w.deviation.reserve
        );
    }
}

fn fmt_candidate(out: &mut String, c: &CandidateCheck) {
    let k = &c.candidate;
    let title = match k.kind {
        CandidateKind::MarketClearing => "market-clearing candidate".to_string(),
        CandidateKind::PriceSetter(i) => format!("price-setter candidate (miner {i})"),
    };
    let _ = writeln!(out, "{title}{}", if k.degenerate { " [degenerate]" } else { "" });
    let _ = writeln!(out, "  clearing price: {:.9}", k.clearing_price);
    let _ = writeln!(out, "  reserves:       {}", fmt_vec(&k.reserves));
    let _ = writeln!(out, "  investments:    {}", fmt_vec(&k.investments));
    let _ = writeln!(out, "  total invest:   {:.9}", k.total_investment());
    let _ = writeln!(out, "  appends won:    {}", fmt_vec(&k.quantities));
    let _ = writeln!(out, "  revenues:       {}", fmt_vec(&k.revenues));
    let _ = writeln!(out, "  payoffs:        {}", fmt_vec(&k.payoffs));
    fmt_verdict(out, &c.verdict);
}

impl SolveReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "clearing floor D^-1_sup(Q_A): {:.9}", self.clearing_floor);
        let _ = writeln!(out, "reserve caps: {}", fmt_vec(&self.reserve_caps));
        let _ = writeln!(out, "c*: {:.12}", self.c_star);
        let _ = writeln!(out, "shares x*: {}", fmt_vec(&self.shares));
        let _ = writeln!(out);
        fmt_candidate(&mut out, &self.market_clearing);
        let _ = writeln!(out, "  saturated thresholds: {}", fmt_vec(&self.saturated_thresholds));
        for ps in &self.price_setters {
            let _ = writeln!(out);
            match ps {
                Ok(c) => fmt_candidate(&mut out, c),
                Err(e) => {
                    let _ = writeln!(out, "price-setter candidate unavailable: {e}");
                }
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "sufficiency (regular bound): {}", match &self.regular {
            Ok(true) => "pass".to_string(),
            Ok(false) => "fail".to_string(),
            Err(e) => format!("n/a ({e})"),
        });
        match &self.threshold {
            Ok(t) => {
                let _ = writeln!(
                    out,
                    "sufficiency (exact threshold): sup = {:.9}, pass per miner {:?}",
                    t.threshold, t.per_miner_pass
                );
            }
            Err(e) => {
                let _ = writeln!(out, "sufficiency (exact threshold): n/a ({e})");
            }
        }
        match &self.min_block_reward {
            Ok(b) => {
                let _ = writeln!(
                    out,
                    "sufficient block reward: {:.9} (epsilon {:.9}, X {:.9})",
                    b.bound, b.epsilon, b.capped_revenue
                );
            }
            Err(e) => {
                let _ = writeln!(out, "sufficient block reward: n/a ({e})");
            }
        }
        let _ = writeln!(out, "pure equilibria found: {}", self.equilibria());
        out
    }
}

pub fn verify(scenario: &Scenario, profile: &StrategyProfile, grid: &GridConfig) -> Result<String> {
    let market = scenario.market()?;
    if profile.investments.len() != market.n() || profile.reserves.len() != market.n() {
        return Err(Error::InvalidProfile(format!(
            "profile has {} investments and {} reserves for {} miners",
            profile.investments.len(),
            profile.reserves.len(),
            market.n()
        )));
    }
    let outcome = oracle::evaluate(&market, profile);
    let verdict = oracle::verify_equilibrium(&market, profile, grid);
    let mut out = String::new();
    let _ = writeln!(out, "clearing price: {:.9}", outcome.price);
    let _ = writeln!(out, "appends won:    {}", fmt_vec(&outcome.quantities));
    let _ = writeln!(out, "sold:           {}", fmt_vec(&outcome.sold));
    let _ = writeln!(out, "payoffs:        {}", fmt_vec(&outcome.payoffs));
    fmt_verdict(&mut out, &verdict);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::input(path.display().to_string(), e.to_string()))?;
        toml::from_str(&text).map_err(|e| Error::input("sweep", e.message().to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub param_value: f64,
    pub clearing_price_mc: f64,
    pub mc_exists: bool,
    pub best_ps_price: Option<f64>,
    pub ps_exists_any: bool,
    pub max_oracle_gain: f64,
    pub c_star: f64,
    pub x_max: f64,
}

fn sweep_row(scenario: &Scenario, value: f64, grid: &GridConfig) -> Result<SweepRow> {
    let market = scenario.market()?;
    let p0 = market.clearing_floor();
    let contest = market.contest_at(p0)?;
    let mc = market.market_clearing_candidate()?;
    let mc_verdict = oracle::verify_equilibrium(&market, &mc.profile(), grid);

    let fixed_point = scenario.fixed_point();
    let mut best: Option<(f64, f64)> = None;
    let mut ps_exists_any = false;
    for i in 0..market.n() {
        let c = match market.price_setter_candidate_with(i, &fixed_point) {
            Ok(c) if !c.degenerate => c,
            Ok(_) => continue,
            Err(e @ Error::NonConvergence { .. }) => return Err(e),
            Err(_) => continue,
        };
        let v = oracle::verify_equilibrium(&market, &c.profile(), grid);
        ps_exists_any |= v.is_equilibrium;
        if best.is_none_or(|(g, _)| v.max_gain < g) {
            best = Some((v.max_gain, c.clearing_price));
        }
    }
    Ok(SweepRow {
        param_value: value,
        clearing_price_mc: mc.clearing_price,
        mc_exists: mc_verdict.is_equilibrium,
        best_ps_price: best.map(|b| b.1),
        ps_exists_any,
        max_oracle_gain: mc_verdict.max_gain,
        c_star: contest.c_star,
        x_max: contest.shares.iter().cloned().fold(0.0, f64::max),
    })
}

/// One row per value, in input order.
pub fn sweep(scenario: &Scenario, spec: &SweepSpec, grid: &GridConfig) -> Result<Vec<SweepRow>> {
    let scenarios = spec
        .values
        .iter()
        .map(|&v| scenario.with_parameter(&spec.parameter, v))
        .collect::<Result<Vec<_>>>()?;
    scenarios
        .par_iter()
        .zip(spec.values.par_iter())
        .map(|(s, &v)| sweep_row(s, v, grid))
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in rows {
        wtr.serialize(row)
            .map_err(|e| Error::input("csv", e.to_string()))?;
    }
    wtr.flush().map_err(|e| Error::input("csv", e.to_string()))
}

/// One pinned expectation of a reproduction.
#[derive(Clone, Debug, PartialEq)]
pub struct ReproCheck {
    pub label: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReproReport {
    pub name: String,
    pub checks: Vec<ReproCheck>,
}

impl ReproReport {
    fn new(name: impl Into<String>) -> Self {
        ReproReport {
            name: name.into(),
            checks: Vec::new(),
        }
    }

    fn num(&mut self, label: impl Into<String>, actual: f64, expected: f64, tol: f64) {
        self.checks.push(ReproCheck {
            label: label.into(),
            expected: format!("{expected:.12} ± {tol:e}"),
            actual: format!("{actual:.12}"),
            pass: (actual - expected).abs() <= tol,
        });
    }

    fn flag(&mut self, label: impl Into<String>, actual: bool, expected: bool) {
        self.checks.push(ReproCheck {
            label: label.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
            pass: actual == expected,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut out = format!("repro {}\n", self.name);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  [{}] {}: got {}, expected {}",
                if c.pass { "ok" } else { "MISMATCH" },
                c.label,
                c.actual,
                c.expected
            );
        }
        let _ = writeln!(out, "{}", if self.passed() { "all checks passed" } else { "mismatch" });
        out
    }
}

pub const REPRO_NAMES: [&str; 4] = [
    "no-pure-equilibrium",
    "qa-0.75-n3",
    "tightness-delta",
    "min-blockreward-demo",
];

fn linear_market(qa: f64, b: f64, costs: Vec<f64>) -> Result<LedgerMarket> {
    LedgerMarket::new(DemandCurve::linear(1.0, 1.0)?, qa, b, costs, WriteCost::Uniform(0.0))
}

/// Runs a pinned scenario. `delta` selects the tightness instance; both 1/4
/// and 1/2 are run when it is absent.
pub fn repro(name: &str, delta: Option<f64>, grid: &GridConfig) -> Result<ReproReport> {
    let mut rep = ReproReport::new(name);
    match name {
        "no-pure-equilibrium" => {
            let m = linear_market(1.0, 0.0, vec![1.0; 3])?;
            let contest = m.contest_at(m.clearing_floor())?;
            rep.num("c*", contest.c_star, 1.5, 1e-12);
            let ps = m.price_setter_candidate(0)?;
            rep.num("price-setter reserve", ps.clearing_price, 1.0 / 6.0, 1e-9);
            rep.num("total investment", ps.total_investment(), 1.0 / 9.0, 1e-9);
            rep.num("investment per miner", ps.investments[0], 1.0 / 27.0, 1e-9);
            rep.num("price-setter revenue", ps.revenues[0], 1.0 / 36.0, 1e-9);
            rep.num("price-setter payoff", ps.payoffs[0], -1.0 / 108.0, 1e-9);
            let mc = m.market_clearing_candidate()?;
            let inst = PriceSettingInstance::new(mc.quantities.clone(), vec![0.0; 3], m.curve.clone())?;
            let thr = inst.saturated_threshold(0)?;
            rep.num("saturated threshold", thr, 0.0, 1e-9);
            rep.flag("market-clearing saturated", mc.quantities[0] <= thr + 1e-12, false);
            let v_ps = oracle::verify_equilibrium(&m, &ps.profile(), grid);
            let v_mc = oracle::verify_equilibrium(&m, &mc.profile(), grid);
            rep.flag("price-setter is equilibrium", v_ps.is_equilibrium, false);
            rep.flag("market-clearing is equilibrium", v_mc.is_equilibrium, false);
            rep.flag(
                "price-setter witness gain >= 1/108 - tol",
                v_ps.max_gain >= 1.0 / 108.0 - grid.tolerance,
                true,
            );
        }
        "qa-0.75-n3" => {
            let m = linear_market(0.75, 0.0, vec![1.0; 3])?;
            let t = m.sufficiency_threshold()?;
            rep.num("cover threshold", t.threshold, 2.0 / 3.0, 1e-6);
            rep.flag("threshold test passes", t.per_miner_pass.iter().all(|p| *p), true);
            let mc = m.market_clearing_candidate()?;
            let v = oracle::verify_equilibrium(&m, &mc.profile(), grid);
            rep.flag("market-clearing is equilibrium", v.is_equilibrium, true);
            rep.flag("share 1 passes threshold", 1.0 <= 1.0 - t.threshold, false);
            let mono = linear_market(0.75, 0.0, vec![1.0, 1000.0])?;
            let mc = mono.market_clearing_candidate()?;
            let v = oracle::verify_equilibrium(&mono, &mc.profile(), grid);
            rep.flag("near-monopolist market-clearing is equilibrium", v.is_equilibrium, false);
        }
        "tightness-delta" => {
            let deltas = match delta {
                Some(d) => vec![d],
                None => vec![0.25, 0.5],
            };
            for d in deltas {
                for b in [0.0, 1.0, 100.0] {
                    let m = tightness_scenario(d, b)?.market()?;
                    let mc = m.market_clearing_candidate()?;
                    if b == 0.0 {
                        let inst = PriceSettingInstance::new(
                            mc.quantities.clone(),
                            vec![0.0; m.n()],
                            m.curve.clone(),
                        )?;
                        rep.num(format!("δ={d}: share x*"), mc.shares[0], d, 1e-9);
                        rep.num(format!("δ={d}: saturated threshold"), inst.saturated_threshold(0)?, d, 1e-9);
                    }
                    let v = oracle::verify_equilibrium(&m, &mc.profile(), grid);
                    rep.flag(
                        format!("δ={d}, B={b}: profitable deviation found (gain {:.3e})", v.max_gain),
                        v.max_gain > grid.tolerance,
                        true,
                    );
                }
            }
        }
        "min-blockreward-demo" => {
            let m = linear_market(0.5, 0.0, vec![1.0; 3])?;
            let b = m.min_block_reward()?;
            rep.num("block reward bound", b.bound, 4.5, 1e-9);
            let at = m.with_block_reward(b.bound);
            let mc = at.market_clearing_candidate()?;
            let v = oracle::verify_equilibrium(&at, &mc.profile(), grid);
            rep.flag("market-clearing is equilibrium at the bound", v.is_equilibrium, true);
        }
        other => {
            return Err(Error::input(
                "repro",
                format!("unknown name '{other}' (known: {})", REPRO_NAMES.join(", ")),
            ))
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct StabilityRow {
    pub label: String,
    pub coarse: Verdict,
    pub fine: Verdict,
}

impl StabilityRow {
    pub fn stable(&self) -> bool {
        self.coarse.is_equilibrium == self.fine.is_equilibrium
    }
}

/// Verdicts of every candidate at the configured grid and at twice its size.
pub fn oracle_check(scenario: &Scenario, grid: &GridConfig) -> Result<Vec<StabilityRow>> {
    let market = scenario.market()?;
    let fixed_point = scenario.fixed_point();
    let mut candidates = vec![("market-clearing".to_string(), market.market_clearing_candidate()?)];
    for i in 0..market.n() {
        match market.price_setter_candidate_with(i, &fixed_point) {
            Ok(c) => candidates.push((format!("price-setter {i}"), c)),
            Err(e @ Error::NonConvergence { .. }) => return Err(e),
            Err(_) => {}
        }
    }
    let fine = grid.doubled();
    Ok(candidates
        .into_iter()
        .map(|(label, c)| StabilityRow {
            label,
            coarse: oracle::verify_equilibrium(&market, &c.profile(), grid),
            fine: oracle::verify_equilibrium(&market, &c.profile(), &fine),
        })
        .collect())
}

fn render_stability(rows: &[StabilityRow], grid: &GridConfig) -> String {
    let fine = grid.doubled();
    let mut out = format!(
        "grid {}x{} vs {}x{}\n",
        grid.q_points, grid.r_points, fine.q_points, fine.r_points
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<18} gain {:.3e} -> {:.3e}  equilibrium {} -> {}  {}",
            r.label,
            r.coarse.max_gain,
            r.fine.max_gain,
            r.coarse.is_equilibrium,
            r.fine.is_equilibrium,
            if r.stable() { "stable" } else { "UNSTABLE" }
        );
    }
    out
}

#[derive(Parser, Debug)]
#[command(name = "ledger-eq", version, about = "Solve and verify ledger-market equilibria")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Investment grid size for the oracle.
    #[arg(long, global = true)]
    pub grid_q: Option<usize>,
    /// Reserve grid size for the oracle.
    #[arg(long, global = true)]
    pub grid_r: Option<usize>,
    /// Gain tolerance for equilibrium verdicts.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the report or CSV here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Candidates, sufficiency tests and oracle verdicts for a scenario.
    Solve { scenario: PathBuf },
    /// Oracle verdict for an explicit profile (TOML with investments and reserves).
    Verify { scenario: PathBuf, profile: PathBuf },
    /// CSV sweep over one scenario parameter.
    Sweep {
        scenario: PathBuf,
        /// Sweep spec file with parameter, values and optional out.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Parameter path, e.g. protocol.append_supply.
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        values: Vec<f64>,
    },
    /// Run a pinned reproduction and compare against expected values.
    Repro {
        /// no-pure-equilibrium, qa-0.75-n3, tightness-delta or min-blockreward-demo.
        name: String,
        /// δ for tightness-delta; 0.25 and 0.5 when omitted.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Compare verdicts at the configured grid and a doubled grid.
    OracleCheck { scenario: PathBuf },
}

impl Cli {
    fn grid(&self, base: GridConfig) -> Result<GridConfig> {
        let g = GridConfig {
            q_points: self.grid_q.unwrap_or(base.q_points),
            r_points: self.grid_r.unwrap_or(base.r_points),
            tolerance: self.tol.unwrap_or(base.tolerance),
            ..base
        };
        if g.q_points < 2 {
            return Err(Error::input("--grid-q", "needs at least 2 points"));
        }
        if g.r_points < 2 {
            return Err(Error::input("--grid-r", "needs at least 2 points"));
        }
        if !(g.tolerance > 0.0 && g.tolerance.is_finite()) {
            return Err(Error::input("--tol", "must be positive"));
        }
        Ok(g)
    }
}

fn emit(text: &[u8], out_path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out_path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::input(p.display().to_string(), e.to_string())),
        None => stdout
            .write_all(text)
            .map_err(|e| Error::input("stdout", e.to_string())),
    }
}

/// Executes a parsed command and returns the process exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Solve { scenario } => {
            let s = Scenario::load(scenario)?;
            let report = solve(&s, &cli.grid(s.grid())?)?;
            emit(report.render().as_bytes(), out, stdout)?;
            Ok(0)
        }
        Command::Verify { scenario, profile } => {
            let s = Scenario::load(scenario)?;
            let p = load_profile(profile, s.miners.len())?;
            let text = verify(&s, &p, &cli.grid(s.grid())?)?;
            emit(text.as_bytes(), out, stdout)?;
            Ok(0)
        }
        Command::Sweep {
            scenario,
            spec,
            param,
            values,
        } => {
            let s = Scenario::load(scenario)?;
            let spec = match (spec, param) {
                (Some(path), None) => SweepSpec::load(path)?,
                (None, Some(p)) => SweepSpec {
                    parameter: p.clone(),
                    values: values.clone(),
                    out: None,
                },
                _ => return Err(Error::input("sweep", "give exactly one of --spec or --param")),
            };
            if spec.values.is_empty() {
                return Err(Error::input("sweep.values", "at least one value is required"));
            }
            let rows = sweep(&s, &spec, &cli.grid(s.grid())?)?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit(&buf, out.or(spec.out.as_deref()), stdout)?;
            Ok(0)
        }
        Command::Repro { name, delta } => {
            let rep = repro(name, *delta, &cli.grid(GridConfig::default())?)?;
            emit(rep.render().as_bytes(), out, stdout)?;
            Ok(if rep.passed() { 0 } else { EXIT_MISMATCH })
        }
        Command::OracleCheck { scenario } => {
            let s = Scenario::load(scenario)?;
            let grid = cli.grid(s.grid())?;
            let rows = oracle_check(&s, &grid)?;
            emit(render_stability(&rows, &grid).as_bytes(), out, stdout)?;
            Ok(if rows.iter().all(StabilityRow::stable) { 0 } else { 2 })
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
