//! Cut-off frequency search nested in the gas-unit-count loop, and the
//! renewable-credit scenario sweep.

mod design;
mod pso;

pub use design::{
    design, evaluate_candidate, scenario_sweep, Binding, Candidate, Design, DesignConfig,
    DesignTrace, Designer, Scenario, ScenarioOutcome, SearchSettings, Stage, Sweep, TraceEntry,
};
pub use pso::{pso_minimize, PsoParams, PsoResult};
