//! Sweep the append supply and print the CSV the `sweep` verb writes.

use ledger_equilibria::cli::{sweep, write_csv, Scenario, SweepSpec};
use ledger_equilibria::oracle::GridConfig;
use ledger_equilibria::DemandCurve;

fn main() -> ledger_equilibria::Result<()> {
    let base = Scenario::symmetric(&DemandCurve::linear(1.0, 1.0)?, 0.5, 0.0, 3);
    let spec = SweepSpec {
        parameter: "protocol.append_supply".into(),
        values: (1..10).map(|k| k as f64 / 10.0).collect(),
        out: None,
    };
    let grid = GridConfig { q_points: 256, r_points: 256, ..GridConfig::default() };
    let rows = sweep(&base, &spec, &grid)?;
    write_csv(&rows, std::io::stdout())?;

    let spec = SweepSpec {
        parameter: "tightness.delta".into(),
        values: vec![0.25, 0.5],
        out: None,
    };
    write_csv(&sweep(&base, &spec, &grid)?, std::io::stdout())?;
    Ok(())
}
