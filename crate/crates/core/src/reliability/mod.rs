//! Monte-Carlo generation adequacy: outage simulation, loss-of-load
//! expectation, planning reserve margin and its relation to LOLE.

mod ensemble;
mod outage;

pub use ensemble::{Ensemble, LossCount};
pub use outage::{simulate_availability, FleetOutage, GenFleet, OutageModel};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::profiles::{SystemProfiles, HOURS_PER_DAY, HOURS_PER_YEAR};
use crate::rng::MAX_UNITS;
use crate::sizing::BessSpec;

/// z-score of a two-sided 95 % interval.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilitySettings {
    /// Simulated years (independent replications).
    pub years: usize,
    pub seed: u64,
    #[serde(default = "default_efficiency")]
    pub round_trip_efficiency: f64,
    #[serde(default = "default_horizon")]
    pub horizon_hours: usize,
}

fn default_efficiency() -> f64 {
    0.9
}

fn default_horizon() -> usize {
    HOURS_PER_YEAR
}

impl Default for ReliabilitySettings {
    fn default() -> Self {
        Self {
            years: 1000,
            seed: 20170821,
            round_trip_efficiency: default_efficiency(),
            horizon_hours: default_horizon(),
        }
    }
}

impl ReliabilitySettings {
    pub fn validate(&self) -> Result<()> {
        if self.years == 0 {
            return Err(domain("at least one simulated year is required"));
        }
        if !(self.round_trip_efficiency > 0.0 && self.round_trip_efficiency <= 1.0) {
            return Err(domain(format!(
                "round-trip efficiency must lie in (0, 1], got {}",
                self.round_trip_efficiency
            )));
        }
        if self.horizon_hours == 0 || !self.horizon_hours.is_multiple_of(HOURS_PER_DAY) {
            return Err(domain(format!(
                "horizon must be a positive whole number of days, got {} h",
                self.horizon_hours
            )));
        }
        Ok(())
    }

    pub fn days_per_year(&self) -> usize {
        self.horizon_hours / HOURS_PER_DAY
    }
}

/// LOLE estimate with a 95 % binomial (Wilson) half-width, both in days/year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityResult {
    pub lole_days_per_year: f64,
    pub ci_halfwidth: f64,
    pub replications: usize,
}

impl ReliabilityResult {
    pub(crate) fn from_counts(loss_days: u64, years: usize, days_per_year: usize) -> Self {
        let trials = (years * days_per_year) as f64;
        let p = loss_days as f64 / trials;
        let z2 = Z95 * Z95;
        let half = Z95 * (p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)).sqrt()
            / (1.0 + z2 / trials);
        Self {
            lole_days_per_year: loss_days as f64 / years as f64,
            ci_halfwidth: half * days_per_year as f64,
            replications: years,
        }
    }
}

/// Planning reserve margin `(dispatchable + battery power − peak) / peak`.
pub fn prm_of(
    total_dispatchable_mw: f64,
    bess_power_mw: f64,
    peak_net_load_mw: f64,
) -> Result<f64> {
    if !(peak_net_load_mw > 0.0) {
        return Err(domain(format!(
            "peak net load must be positive, got {peak_net_load_mw}"
        )));
    }
    Ok((total_dispatchable_mw + bess_power_mw - peak_net_load_mw) / peak_net_load_mw)
}

/// Simulates `settings.years` independent years of the fleet and battery
/// against stochastic load and fully counted renewables.
pub fn estimate_lole(
    fleet: &GenFleet,
    bess: &BessSpec,
    profiles: &SystemProfiles,
    settings: &ReliabilitySettings,
) -> Result<ReliabilityResult> {
    fleet.validate()?;
    bess.validate()?;
    profiles.validate()?;
    settings.validate()?;
    let dispatch = ensemble::Dispatch::new(fleet, bess, settings.round_trip_efficiency);
    let days = ensemble::stream_loss_days(
        profiles,
        &fleet.outage,
        fleet.unit_count(),
        settings,
        &dispatch,
    );
    Ok(ReliabilityResult::from_counts(
        days,
        settings.years,
        settings.days_per_year(),
    ))
}

/// Fleet whose largest unit is `plg` of `total_mw`, the remainder split into
/// the fewest equal units no larger than the largest one.
pub fn plg_fleet(plg: f64, total_mw: f64, outage: FleetOutage) -> Result<GenFleet> {
    if !(plg > 0.0 && plg <= 1.0) {
        return Err(Error::Config(format!(
            "largest-unit proportion must lie in (0, 1], got {plg}"
        )));
    }
    let others = ((1.0 - plg) / plg - 1e-9).ceil().max(0.0) as usize;
    if others + 1 > MAX_UNITS {
        return Err(Error::Config(format!(
            "proportion {plg} needs {} units, at most {MAX_UNITS} are supported",
            others + 1
        )));
    }
    let total = total_mw.max(0.0);
    let unit = if others > 0 {
        (1.0 - plg) * total / others as f64
    } else {
        0.0
    };
    Ok(GenFleet {
        biomass_capacity_mw: plg * total,
        ng_unit_capacity_mw: unit,
        ng_unit_count: others,
        outage,
    })
}

/// Inputs shared by the PRM/LOLE curve family and the PRM search.
#[derive(Debug, Clone)]
pub struct AdequacyStudy<'a> {
    pub profiles: &'a SystemProfiles,
    pub outage: FleetOutage,
    pub bess: BessSpec,
    pub settings: ReliabilitySettings,
}

impl AdequacyStudy<'_> {
    /// Peak of the forecast net load with renewables fully counted.
    pub fn reference_peak_mw(&self) -> Result<f64> {
        let peak = self
            .profiles
            .expected_net_load(1.0, self.settings.horizon_hours)?
            .max();
        if !(peak > 0.0) {
            return Err(domain(format!(
                "forecast net load never positive (peak {peak})"
            )));
        }
        Ok(peak)
    }

    fn ensemble_for(&self, plg: f64) -> Result<(Ensemble, f64)> {
        self.profiles.validate()?;
        self.settings.validate()?;
        self.bess.validate()?;
        self.outage.validate()?;
        let peak = self.reference_peak_mw()?;
        let slots = plg_fleet(plg, peak, self.outage)?.unit_count();
        let ensemble = Ensemble::build(self.profiles, &self.outage, slots, &self.settings)?;
        Ok((ensemble, peak))
    }

    fn fleet_at(&self, plg: f64, prm: f64, peak: f64) -> Result<GenFleet> {
        plg_fleet(plg, peak * (1.0 + prm) - self.bess.power_mw, self.outage)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub prm: f64,
    pub lole: f64,
    pub ci: f64,
}

/// LOLE along a PRM grid for fleets whose largest unit holds `plg` of the
/// dispatchable capacity. All grid points share one set of random draws.
pub fn lole_vs_prm_curve(
    study: &AdequacyStudy<'_>,
    plg: f64,
    prm_grid: &[f64],
) -> Result<Vec<CurvePoint>> {
    if prm_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("PRM grid must be sorted ascending"));
    }
    let (ensemble, peak) = study.ensemble_for(plg)?;
    prm_grid
        .iter()
        .map(|&prm| {
            let fleet = study.fleet_at(plg, prm, peak)?;
            let dispatch =
                ensemble::Dispatch::new(&fleet, &study.bess, study.settings.round_trip_efficiency);
            let r = ensemble.lole(&dispatch, ensemble.years());
            Ok(CurvePoint {
                prm,
                lole: r.lole_days_per_year,
                ci: r.ci_halfwidth,
            })
        })
        .collect()
}

/// Outcome of a monotone threshold search.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Threshold<T> {
    pub at: f64,
    pub value: T,
}

/// Smallest `x` in `[lo, hi]` (to within `tol`, rounded up) with `probe(x)`
/// returning `Some`, assuming feasibility is monotone in `x`.
pub(crate) fn bisect_threshold<T>(
    lo: f64,
    hi: f64,
    tol: f64,
    mut probe: impl FnMut(f64) -> Result<Option<T>>,
) -> Result<Option<Threshold<T>>> {
    let Some(top) = probe(hi)? else {
        return Ok(None);
    };
    if let Some(value) = probe(lo)? {
        return Ok(Some(Threshold { at: lo, value }));
    }
    let (mut lo, mut best) = (lo, Threshold { at: hi, value: top });
    while best.at - lo > tol {
        let mid = 0.5 * (lo + best.at);
        match probe(mid)? {
            Some(value) => best = Threshold { at: mid, value },
            None => lo = mid,
        }
    }
    Ok(Some(best))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinPrm {
    /// Reported margin: the larger of the LOLE-driven and N-1 requirements.
    pub prm: f64,
    /// Smallest margin meeting the LOLE target (bracket upper end).
    pub lole_prm: f64,
    /// Smallest margin meeting the deterministic N-1 criterion.
    pub n_minus_1_prm: f64,
    pub lole: ReliabilityResult,
}

/// Bisection on PRM for the smallest margin whose LOLE meets `target_days`,
/// raised if needed to satisfy N-1 against the forecast peak.
pub fn min_prm_for_target(
    study: &AdequacyStudy<'_>,
    target_days: f64,
    plg: f64,
    prm_max: f64,
    tol: f64,
) -> Result<MinPrm> {
    if !(target_days > 0.0) {
        return Err(domain(format!(
            "LOLE target must be positive, got {target_days}"
        )));
    }
    if !(prm_max >= 0.0 && tol > 0.0) {
        return Err(domain("need prm_max >= 0 and tol > 0"));
    }
    let (ensemble, peak) = study.ensemble_for(plg)?;
    let years = ensemble.years();
    let budget = (target_days * years as f64).floor() as u64;
    let efficiency = study.settings.round_trip_efficiency;
    let dispatch_at = |prm: f64| -> Result<ensemble::Dispatch> {
        let fleet = study.fleet_at(plg, prm, peak)?;
        Ok(ensemble::Dispatch::new(&fleet, &study.bess, efficiency))
    };

    let found = bisect_threshold(0.0, prm_max, tol, |prm| {
        Ok(
            match ensemble.evaluate(&dispatch_at(prm)?, years, Some(budget)) {
                LossCount::Within(days) => Some(days),
                LossCount::Exceeded => None,
            },
        )
    })?;
    let Some(found) = found else {
        return Err(Error::Infeasible(format!(
            "LOLE target {target_days} days/yr not reached at PRM {prm_max}"
        )));
    };

    let p_b = study.bess.power_mw;
    let n_minus_1_prm = if plg < 1.0 {
        let total = ((peak - p_b) / (1.0 - plg)).max(0.0);
        prm_of(total, p_b, peak)?.max(0.0)
    } else if p_b >= peak {
        0.0
    } else {
        return Err(Error::Infeasible(
            "a single-unit fleet cannot satisfy N-1 without battery power covering the peak".into(),
        ));
    };

    let prm = found.at.max(n_minus_1_prm);
    let lole = ensemble.lole(&dispatch_at(prm)?, years);
    Ok(MinPrm {
        prm,
        lole_prm: found.at,
        n_minus_1_prm,
        lole,
    })
}
