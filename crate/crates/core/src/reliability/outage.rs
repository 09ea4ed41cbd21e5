use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rng::{self, MAX_UNITS};

/// Two-state up/down outage process stepping every `step_hours`.
///
/// Per step the unit fails with probability `p` and is repaired with
/// probability `q = step_hours / mttr_hours`; `p` is set so the stationary
/// unavailability `p / (p + q)` equals `forced_outage_rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageModel {
    pub forced_outage_rate: f64,
    pub mttr_hours: f64,
    #[serde(default = "default_step_hours")]
    pub step_hours: u32,
}

fn default_step_hours() -> u32 {
    1
}

impl Default for OutageModel {
    fn default() -> Self {
        Self {
            forced_outage_rate: 0.05,
            mttr_hours: 24.0,
            step_hours: 1,
        }
    }
}

impl OutageModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.forced_outage_rate) {
            return Err(domain(format!(
                "forced outage rate must lie in [0, 1), got {}",
                self.forced_outage_rate
            )));
        }
        if self.step_hours == 0 {
            return Err(domain("outage step must be at least one hour"));
        }
        if !(self.mttr_hours.is_finite() && self.mttr_hours >= f64::from(self.step_hours)) {
            return Err(domain(format!(
                "mttr_hours ({}) must be at least the outage step ({} h)",
                self.mttr_hours, self.step_hours
            )));
        }
        let (fail, _) = self.transition_probabilities();
        if fail > 1.0 {
            return Err(domain(format!(
                "forced outage rate {} is unreachable with mttr {} h",
                self.forced_outage_rate, self.mttr_hours
            )));
        }
        Ok(())
    }

    /// `(P(up → down), P(down → up))` per step.
    pub fn transition_probabilities(&self) -> (f64, f64) {
        let repair = f64::from(self.step_hours) / self.mttr_hours;
        let fail = repair * self.forced_outage_rate / (1.0 - self.forced_outage_rate);
        (fail, repair)
    }

    /// Writes a stationary realization into `down` (true = unavailable), one entry per hour.
    pub(crate) fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, down: &mut [bool]) {
        if self.forced_outage_rate == 0.0 {
            down.fill(false);
            return;
        }
        let (fail, repair) = self.transition_probabilities();
        let up_len = Geometric::new(fail).expect("validated outage model");
        let down_len = Geometric::new(repair).expect("validated outage model");
        let step = self.step_hours as usize;
        let mut is_down = rng.random::<f64>() < self.forced_outage_rate;
        let mut hour = 0usize;
        while hour < down.len() {
            let steps = 1 + if is_down {
                down_len.sample(rng)
            } else {
                up_len.sample(rng)
            };
            let end = hour
                .saturating_add((steps as usize).saturating_mul(step))
                .min(down.len());
            down[hour..end].fill(is_down);
            hour = end;
            is_down = !is_down;
        }
    }
}

/// Outage parameters for a fleet: one model shared by all units, with an
/// optional override for the biomass (slot 0) unit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FleetOutage {
    pub units: OutageModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub biomass: Option<OutageModel>,
}

impl FleetOutage {
    pub fn uniform(model: OutageModel) -> Self {
        Self {
            units: model,
            biomass: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.units.validate()?;
        if let Some(b) = &self.biomass {
            b.validate()?;
        }
        Ok(())
    }

    pub fn for_slot(&self, slot: usize) -> &OutageModel {
        match (slot, &self.biomass) {
            (0, Some(b)) => b,
            _ => &self.units,
        }
    }
}

/// Dispatchable fleet: one biomass unit plus `ng_unit_count` identical gas units.
/// Slot 0 is the biomass unit, slots `1..=ng_unit_count` the gas units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenFleet {
    pub biomass_capacity_mw: f64,
    pub ng_unit_capacity_mw: f64,
    pub ng_unit_count: usize,
    #[serde(default)]
    pub outage: FleetOutage,
}

impl GenFleet {
    pub fn validate(&self) -> Result<()> {
        if !(self.biomass_capacity_mw.is_finite() && self.biomass_capacity_mw >= 0.0) {
            return Err(domain(format!(
                "biomass capacity must be >= 0, got {}",
                self.biomass_capacity_mw
            )));
        }
        if !(self.ng_unit_capacity_mw.is_finite() && self.ng_unit_capacity_mw >= 0.0) {
            return Err(domain(format!(
                "gas unit capacity must be >= 0, got {}",
                self.ng_unit_capacity_mw
            )));
        }
        if self.unit_count() > MAX_UNITS {
            return Err(domain(format!(
                "fleet has {} units, at most {MAX_UNITS} are supported",
                self.unit_count()
            )));
        }
        self.outage.validate()
    }

    pub fn unit_count(&self) -> usize {
        1 + self.ng_unit_count
    }

    pub fn total_capacity_mw(&self) -> f64 {
        self.biomass_capacity_mw + self.ng_unit_count as f64 * self.ng_unit_capacity_mw
    }

    pub fn largest_unit_mw(&self) -> f64 {
        if self.ng_unit_count > 0 {
            self.biomass_capacity_mw.max(self.ng_unit_capacity_mw)
        } else {
            self.biomass_capacity_mw
        }
    }

    /// Share of total capacity held by the largest unit.
    pub fn largest_unit_proportion(&self) -> f64 {
        let total = self.total_capacity_mw();
        if total > 0.0 {
            self.largest_unit_mw() / total
        } else {
            0.0
        }
    }

    /// Deterministic N-1 test: without its largest unit the fleet plus battery
    /// power still covers `peak_mw`.
    pub fn passes_n_minus_1(&self, bess_power_mw: f64, peak_mw: f64) -> bool {
        self.total_capacity_mw() - self.largest_unit_mw() + bess_power_mw >= peak_mw - 1e-9
    }
}

/// Per-unit availability (`true` = available) for replication 0 of `seed`.
pub fn simulate_availability(
    fleet: &GenFleet,
    n_hours: usize,
    seed: u64,
) -> Result<Vec<Vec<bool>>> {
    fleet.validate()?;
    Ok((0..fleet.unit_count())
        .map(|slot| {
            let mut down = vec![false; n_hours];
            unit_downtime(&fleet.outage, slot, seed, 0, &mut down);
            down.into_iter().map(|d| !d).collect()
        })
        .collect())
}

pub(crate) fn unit_downtime(
    outage: &FleetOutage,
    slot: usize,
    seed: u64,
    replication: u64,
    down: &mut [bool],
) {
    let mut stream = rng::stream(seed, replication, rng::unit_channel(slot));
    outage.for_slot(slot).sample_into(&mut stream, down);
}
