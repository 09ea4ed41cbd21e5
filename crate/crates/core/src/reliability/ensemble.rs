use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::outage::{unit_downtime, FleetOutage, GenFleet};
use super::{ReliabilityResult, ReliabilitySettings};
use crate::error::{domain, Result};
use crate::profiles::{SystemProfiles, HOURS_PER_DAY};
use crate::rng::MAX_UNITS;
use crate::sizing::BessSpec;

/// Unserved power below this is treated as rounding noise (MW).
const SHORTFALL_EPS: f64 = 1e-9;

/// Hourly dispatch of one candidate system: fleet capacities and an
/// energy-limited battery with greedy charge/discharge.
#[derive(Debug, Clone)]
pub(crate) struct Dispatch {
    biomass_mw: f64,
    unit_mw: f64,
    n_ng: usize,
    power_mw: f64,
    energy_mwh: f64,
    efficiency: f64,
}

impl Dispatch {
    pub(crate) fn new(fleet: &GenFleet, bess: &BessSpec, efficiency: f64) -> Self {
        Self {
            biomass_mw: fleet.biomass_capacity_mw,
            unit_mw: fleet.ng_unit_capacity_mw,
            n_ng: fleet.ng_unit_count,
            power_mw: bess.power_mw,
            energy_mwh: bess.energy_mwh,
            efficiency,
        }
    }

    #[inline]
    fn available(&self, state: u8) -> f64 {
        f64::from(state >> 7) * self.biomass_mw + f64::from(state & 0x7f) * self.unit_mw
    }

    fn worst_gap(&self, residual: &[f64], states: &[u8]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (&need, &s) in residual.iter().zip(states) {
            let gap = need - self.available(s);
            worst = if gap > worst { gap } else { worst };
        }
        worst
    }

    /// Loss-of-load days in one simulated year. The battery starts full.
    fn loss_days(&self, year: YearView<'_>) -> u32 {
        let mut soc = self.energy_mwh;
        let mut days = 0;
        let hourly = year
            .residual
            .chunks_exact(HOURS_PER_DAY)
            .zip(year.states.chunks_exact(HOURS_PER_DAY));
        for ((res_day, st_day), (&peak, &floor)) in
            hourly.zip(year.day_peak.iter().zip(year.day_floor))
        {
            // A full battery stays full through a day without any deficit hour.
            if soc >= self.energy_mwh
                && (peak <= self.available(floor) || self.worst_gap(res_day, st_day) <= 0.0)
            {
                continue;
            }
            let mut lost = false;
            for (&need, &s) in res_day.iter().zip(st_day) {
                let gap = need - self.available(s);
                if gap > 0.0 {
                    let discharge = gap.min(self.power_mw).min(soc);
                    soc -= discharge;
                    if gap - discharge > SHORTFALL_EPS {
                        lost = true;
                    }
                } else {
                    soc = (soc + (-gap).min(self.power_mw) * self.efficiency).min(self.energy_mwh);
                }
            }
            days += u32::from(lost);
        }
        days
    }
}

/// Per-hour state byte for a fleet with `n_ng` gas units: the top bit is the
/// biomass unit, the low seven bits count available gas units. `floor`
/// receives, per day, a state whose capacity bounds every hour's from below.
fn compact_states(up: &[u128], n_ng: usize, states: &mut Vec<u8>, floor: &mut Vec<u8>) {
    debug_assert!(n_ng < MAX_UNITS);
    let gas = if n_ng == 0 {
        0
    } else {
        u128::MAX >> (128 - n_ng)
    };
    for day in up.chunks_exact(HOURS_PER_DAY) {
        let (mut bio, mut count) = (1u8, u8::MAX);
        for &mask in day {
            let b = (mask & 1) as u8;
            let c = ((mask >> 1) & gas).count_ones() as u8;
            bio &= b;
            count = count.min(c);
            states.push((b << 7) | c);
        }
        floor.push((bio << 7) | count);
    }
}

fn day_peaks(residual: &[f64]) -> Vec<f64> {
    residual
        .chunks_exact(HOURS_PER_DAY)
        .map(|day| day.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

#[derive(Clone, Copy)]
struct YearView<'a> {
    residual: &'a [f64],
    day_peak: &'a [f64],
    states: &'a [u8],
    day_floor: &'a [u8],
}

#[derive(Default)]
struct Compact {
    states: Vec<u8>,
    day_floor: Vec<u8>,
}

impl Compact {
    fn new(up: &[u128], n_ng: usize) -> Self {
        let mut c = Compact::default();
        c.extend(up, n_ng);
        c
    }

    fn extend(&mut self, up: &[u128], n_ng: usize) {
        compact_states(up, n_ng, &mut self.states, &mut self.day_floor);
    }
}

/// One simulated year: residual demand `load − pv − wind` and a per-hour
/// availability bitmask (bit `i` set when unit slot `i` is up).
struct Year {
    residual: Vec<f64>,
    day_peak: Vec<f64>,
    up: Vec<u128>,
}

fn realize_year(
    profiles: &SystemProfiles,
    outage: &FleetOutage,
    slots: usize,
    settings: &ReliabilitySettings,
    replication: u64,
) -> Year {
    let hours = settings.horizon_hours;
    let mut residual = vec![0.0; hours];
    profiles.realize_residual(settings.seed, replication, &mut residual);
    let all = if slots >= 128 {
        u128::MAX
    } else {
        (1u128 << slots) - 1
    };
    let mut up = vec![all; hours];
    let mut down = vec![false; hours];
    for slot in 0..slots {
        unit_downtime(outage, slot, settings.seed, replication, &mut down);
        let bit = !(1u128 << slot);
        for (mask, &d) in up.iter_mut().zip(&down) {
            if d {
                *mask &= bit;
            }
        }
    }
    Year {
        day_peak: day_peaks(&residual),
        residual,
        up,
    }
}

/// Loss-of-load days summed over `settings.years` replications, generated on
/// the fly (nothing is retained between replications).
pub(crate) fn stream_loss_days(
    profiles: &SystemProfiles,
    outage: &FleetOutage,
    slots: usize,
    settings: &ReliabilitySettings,
    dispatch: &Dispatch,
) -> u64 {
    let per_year: Vec<u32> = (0..settings.years as u64)
        .into_par_iter()
        .map(|rep| {
            let year = realize_year(profiles, outage, slots, settings, rep);
            let c = Compact::new(&year.up, dispatch.n_ng);
            dispatch.loss_days(YearView {
                residual: &year.residual,
                day_peak: &year.day_peak,
                states: &c.states,
                day_floor: &c.day_floor,
            })
        })
        .collect();
    per_year.iter().map(|&d| u64::from(d)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossCount {
    /// Total loss days, within the budget (or unbudgeted).
    Within(u64),
    /// The budget was exceeded; evaluation stopped early.
    Exceeded,
}

/// Pre-drawn replications reused across many candidate systems, so that every
/// candidate faces the same load, renewable and outage realizations.
pub struct Ensemble {
    years: Vec<Year>,
    slots: usize,
    days_per_year: usize,
    hours: usize,
    /// Compact states for the most recently requested gas-unit count.
    states: Mutex<Option<(usize, Arc<Compact>)>>,
}

impl Ensemble {
    pub fn build(
        profiles: &SystemProfiles,
        outage: &FleetOutage,
        slots: usize,
        settings: &ReliabilitySettings,
    ) -> Result<Self> {
        settings.validate()?;
        outage.validate()?;
        if slots == 0 || slots > MAX_UNITS {
            return Err(domain(format!(
                "unit slots must lie in 1..={MAX_UNITS}, got {slots}"
            )));
        }
        let years = (0..settings.years as u64)
            .into_par_iter()
            .map(|rep| realize_year(profiles, outage, slots, settings, rep))
            .collect();
        Ok(Self {
            years,
            slots,
            days_per_year: settings.days_per_year(),
            hours: settings.horizon_hours,
            states: Mutex::new(None),
        })
    }

    pub fn years(&self) -> usize {
        self.years.len()
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn days_per_year(&self) -> usize {
        self.days_per_year
    }

    fn states_for(&self, n_ng: usize) -> Arc<Compact> {
        let mut cached = self.states.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((n, states)) = cached.as_ref() {
            if *n == n_ng {
                return Arc::clone(states);
            }
        }
        let mut states = Compact::default();
        for year in &self.years {
            states.extend(&year.up, n_ng);
        }
        let states = Arc::new(states);
        *cached = Some((n_ng, Arc::clone(&states)));
        states
    }

    /// Loss days over the first `years` replications; stops as soon as the
    /// running total exceeds `budget`.
    pub(crate) fn evaluate(
        &self,
        dispatch: &Dispatch,
        years: usize,
        budget: Option<u64>,
    ) -> LossCount {
        assert!(
            dispatch.n_ng < self.slots,
            "fleet needs {} unit slots, ensemble has {}",
            dispatch.n_ng + 1,
            self.slots
        );
        let states = self.states_for(dispatch.n_ng);
        let mut total = 0u64;
        let days = self.days_per_year;
        let per_year = states
            .states
            .chunks_exact(self.hours)
            .zip(states.day_floor.chunks_exact(days));
        for (year, (st, floor)) in self.years.iter().take(years).zip(per_year) {
            total += u64::from(dispatch.loss_days(YearView {
                residual: &year.residual,
                day_peak: &year.day_peak,
                states: st,
                day_floor: floor,
            }));
            if budget.is_some_and(|b| total > b) {
                return LossCount::Exceeded;
            }
        }
        LossCount::Within(total)
    }

    pub(crate) fn lole(&self, dispatch: &Dispatch, years: usize) -> ReliabilityResult {
        let years = years.min(self.years());
        match self.evaluate(dispatch, years, None) {
            LossCount::Within(days) => {
                ReliabilityResult::from_counts(days, years, self.days_per_year)
            }
            LossCount::Exceeded => unreachable!("unbudgeted evaluation cannot exceed"),
        }
    }

    fn check_fleet(&self, fleet: &GenFleet) -> Result<()> {
        if fleet.unit_count() > self.slots {
            return Err(domain(format!(
                "fleet has {} units but the ensemble only simulates {}",
                fleet.unit_count(),
                self.slots
            )));
        }
        Ok(())
    }

    /// LOLE of `fleet` with `bess` over the first `years` replications.
    pub fn estimate(
        &self,
        fleet: &GenFleet,
        bess: &BessSpec,
        efficiency: f64,
        years: usize,
    ) -> Result<ReliabilityResult> {
        self.check_fleet(fleet)?;
        Ok(self.lole(&Dispatch::new(fleet, bess, efficiency), years))
    }

    /// Loss days of `fleet` over the first `years` replications, abandoning
    /// the count once it exceeds `budget`.
    pub fn loss_days_within(
        &self,
        fleet: &GenFleet,
        bess: &BessSpec,
        efficiency: f64,
        years: usize,
        budget: u64,
    ) -> Result<LossCount> {
        self.check_fleet(fleet)?;
        Ok(self.evaluate(&Dispatch::new(fleet, bess, efficiency), years, Some(budget)))
    }
}
