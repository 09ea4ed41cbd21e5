//! Plot-ready CSV tables and JSON reports. All writers are pure functions of
//! their inputs, so identical runs produce identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::optimizer::{ScenarioOutcome, Sweep};
use crate::reliability::CurvePoint;
use crate::selection::OptionScore;
use crate::sizing::SizingSolution;

pub const SWEEP_HEADER: &str =
    "alpha,cost_per_mw_year,total_gen_mw,bess_mw,bess_mwh,n_ng,lole,prm,fc";
pub const COST_TREND_HEADER: &str = "alpha,cost_per_mw_year,total_gen_mw";
pub const CURVE_HEADER: &str = "prm,lole,ci";
pub const LCOE_HEADER: &str = "technology,capacity_factor,lcoe_per_mwh";

fn solution_row(out: &mut String, alpha: f64, s: &SizingSolution) {
    writeln!(
        out,
        "{alpha},{},{},{},{},{},{},{},{}",
        s.cost.per_mw_year,
        s.fleet.total_capacity_mw(),
        s.bess.power_mw,
        s.bess.energy_mwh,
        s.fleet.ng_unit_count,
        s.lole.lole_days_per_year,
        s.prm,
        s.cutoff_cycles_per_hour
    )
    .expect("writing to a String cannot fail");
}

/// One row per scenario; failed scenarios keep their alpha and leave the
/// other fields empty.
pub fn sweep_csv(sweep: &Sweep) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for scenario in &sweep.scenarios {
        match &scenario.outcome {
            ScenarioOutcome::Feasible(s) => solution_row(&mut out, scenario.alpha, s),
            ScenarioOutcome::Failed { .. } => writeln!(out, "{},,,,,,,,", scenario.alpha)
                .expect("writing to a String cannot fail"),
        }
    }
    out
}

/// Cost and total generator capacity against alpha, feasible scenarios only.
pub fn cost_trend_csv(sweep: &Sweep) -> String {
    let mut out = format!("{COST_TREND_HEADER}\n");
    for scenario in &sweep.scenarios {
        if let ScenarioOutcome::Feasible(s) = &scenario.outcome {
            writeln!(
                out,
                "{},{},{}",
                scenario.alpha,
                s.cost.per_mw_year,
                s.fleet.total_capacity_mw()
            )
            .expect("writing to a String cannot fail");
        }
    }
    out
}

pub fn solution_csv(solution: &SizingSolution) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    solution_row(&mut out, solution.alpha, solution);
    out
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for p in points {
        writeln!(out, "{},{},{}", p.prm, p.lole, p.ci).expect("writing to a String cannot fail");
    }
    out
}

/// `(technology, [(capacity factor, LCOE)])` families in long format.
pub fn lcoe_csv(curves: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut out = format!("{LCOE_HEADER}\n");
    for (name, points) in curves {
        let name = if name.contains([',', '"']) {
            format!("\"{}\"", name.replace('"', "\"\""))
        } else {
            name.clone()
        };
        for (cf, lcoe) in points {
            writeln!(out, "{name},{cf},{lcoe}").expect("writing to a String cannot fail");
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionReport<'a> {
    /// Absolute targets in matrix order.
    pub scores: &'a [OptionScore],
    /// Highest score first.
    pub ranking: &'a [OptionScore],
}

/// LOLE-against-PRM points for one largest-unit proportion.
#[derive(Debug, Clone, Serialize)]
pub struct CurveFamily<'a> {
    pub plg: f64,
    pub points: &'a [CurvePoint],
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
    text.push('\n');
    Ok(text)
}
