//! Load and renewable profiles: stochastic models, forecasts, external traces
//! and the net load seen by the dispatchable fleet.

mod models;
mod series;

pub use models::{
    default_clearsky_shape, expected_profile, synthesize, LoadModel, PvModel, SignalKind,
    StochasticProfile, WtModel, DAYS_PER_YEAR, HOURS_PER_DAY, HOURS_PER_YEAR,
    LOAD_DIURNAL_PEAK_HOUR, LOAD_SEASONAL_PEAK_DAY,
};
pub use series::{read_timeseries, write_timeseries, TimeSeries};

use crate::error::{domain, Result};
use crate::rng;

/// `net(t) = load(t) − alpha·(pv(t) + wt(t))`.
pub fn net_load(
    load: &TimeSeries,
    pv: &TimeSeries,
    wt: &TimeSeries,
    alpha: f64,
) -> Result<TimeSeries> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(domain(format!(
            "counted portion alpha must lie in [0, 1], got {alpha}"
        )));
    }
    load.check_same_shape(pv)?;
    load.check_same_shape(wt)?;
    let values = load
        .values()
        .iter()
        .zip(pv.values())
        .zip(wt.values())
        .map(|((l, p), w)| l - alpha * (p + w))
        .collect();
    Ok(TimeSeries::from_parts_unchecked(values, load.dt_hours()))
}

/// Where a signal comes from: a stochastic model or a fixed hourly trace that
/// is replayed unchanged in every realization.
#[derive(Debug, Clone, PartialEq)]
pub enum Source<M> {
    Model(M),
    Trace(TimeSeries),
}

impl<M: StochasticProfile> Source<M> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Source::Model(m) => m.validate(),
            Source::Trace(ts) => {
                if (ts.dt_hours() - 1.0).abs() > 1e-12 {
                    return Err(domain(format!(
                        "external traces must be hourly, got dt_hours = {}",
                        ts.dt_hours()
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn expected(&self, n_hours: usize) -> Result<TimeSeries> {
        match self {
            Source::Model(m) => expected_profile(m, n_hours),
            Source::Trace(ts) => Ok(ts.tiled(n_hours)),
        }
    }

    /// Writes replication `replication` of this signal into `out`.
    pub fn realize_into(&self, kind: SignalKind, seed: u64, replication: u64, out: &mut [f64]) {
        match self {
            Source::Model(m) => {
                let mut stream = rng::stream(seed, replication, kind.channel());
                m.sample_into(&mut stream, out);
            }
            Source::Trace(ts) => {
                for (slot, v) in out.iter_mut().zip(ts.values().iter().cycle()) {
                    *slot = *v;
                }
            }
        }
    }
}

/// The three signals that make up the net load.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemProfiles {
    pub load: Source<LoadModel>,
    pub pv: Source<PvModel>,
    pub wind: Source<WtModel>,
}

impl Default for SystemProfiles {
    fn default() -> Self {
        Self {
            load: Source::Model(LoadModel::default()),
            pv: Source::Model(PvModel::default()),
            wind: Source::Model(WtModel::default()),
        }
    }
}

impl SystemProfiles {
    pub fn validate(&self) -> Result<()> {
        self.load.validate()?;
        self.pv.validate()?;
        self.wind.validate()
    }

    /// Rated peak load: the model's `peak_mw`, or the trace maximum.
    pub fn peak_load_mw(&self) -> f64 {
        match &self.load {
            Source::Model(m) => m.peak_mw,
            Source::Trace(ts) => ts.max(),
        }
    }

    /// Forecast net load with a counted renewable portion `alpha`.
    pub fn expected_net_load(&self, alpha: f64, n_hours: usize) -> Result<TimeSeries> {
        let load = self.load.expected(n_hours)?;
        let pv = self.pv.expected(n_hours)?;
        let wind = self.wind.expected(n_hours)?;
        net_load(&load, &pv, &wind, alpha)
    }

    /// One stochastic realization of `load − pv − wind` (renewables fully counted).
    pub fn realize_residual(&self, seed: u64, replication: u64, out: &mut [f64]) {
        let n = out.len();
        let mut pv = vec![0.0; n];
        let mut wind = vec![0.0; n];
        self.load
            .realize_into(SignalKind::Load, seed, replication, out);
        self.pv
            .realize_into(SignalKind::Pv, seed, replication, &mut pv);
        self.wind
            .realize_into(SignalKind::Wind, seed, replication, &mut wind);
        for ((slot, p), w) in out.iter_mut().zip(&pv).zip(&wind) {
            *slot -= p + w;
        }
    }

    pub fn has_renewables(&self) -> bool {
        let pv = match &self.pv {
            Source::Model(m) => m.capacity_mw > 0.0,
            Source::Trace(ts) => ts.values().iter().any(|v| *v != 0.0),
        };
        let wind = match &self.wind {
            Source::Model(m) => m.capacity_mw > 0.0,
            Source::Trace(ts) => ts.values().iter().any(|v| *v != 0.0),
        };
        pv || wind
    }
}
