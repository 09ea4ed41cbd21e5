//! Capacities from generator/battery shares, and the annualized cost of a design.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::profiles::TimeSeries;
use crate::reliability::{FleetOutage, GenFleet, ReliabilityResult};
use crate::selection::DerCostSpec;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BessSpec {
    pub power_mw: f64,
    pub energy_mwh: f64,
}

impl BessSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.power_mw.is_finite() && self.power_mw >= 0.0) {
            return Err(domain(format!(
                "battery power must be >= 0, got {}",
                self.power_mw
            )));
        }
        if !(self.energy_mwh.is_finite() && self.energy_mwh >= 0.0) {
            return Err(domain(format!(
                "battery energy must be >= 0, got {}",
                self.energy_mwh
            )));
        }
        Ok(())
    }
}

/// A sized design for one cut-off frequency and gas-unit count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingSolution {
    pub cutoff_cycles_per_hour: f64,
    pub cutoff_bin: usize,
    pub fleet: GenFleet,
    pub bess: BessSpec,
    /// Reserve margin of generators plus battery power over the forecast net peak.
    pub prm: f64,
    /// Margin applied on top of the generator share's peak.
    pub gen_reserve: f64,
    pub lole: ReliabilityResult,
    pub cost: CostBreakdown,
    pub energy: DispatchEnergy,
    pub alpha: f64,
}

/// Fleet for a generator share: total `max(share)·(1 + prm)`, of which the
/// biomass unit takes `biomass_mw` and `n_ng` identical gas units the rest.
pub fn size_generators(
    gen_share: &TimeSeries,
    prm: f64,
    biomass_mw: f64,
    n_ng: usize,
    outage: FleetOutage,
) -> Result<GenFleet> {
    fleet_for_peak(gen_share.max(), prm, biomass_mw, n_ng, outage)
}

pub(crate) fn fleet_for_peak(
    gen_peak_mw: f64,
    prm: f64,
    biomass_mw: f64,
    n_ng: usize,
    outage: FleetOutage,
) -> Result<GenFleet> {
    if n_ng == 0 {
        return Err(domain("at least one gas unit is required"));
    }
    if !(prm.is_finite() && prm >= 0.0) {
        return Err(domain(format!("reserve margin must be >= 0, got {prm}")));
    }
    let total = gen_peak_mw.max(0.0) * (1.0 + prm);
    if total < biomass_mw {
        return Err(Error::InfeasibleSplit {
            total_mw: total,
            biomass_mw,
        });
    }
    Ok(GenFleet {
        biomass_capacity_mw: biomass_mw,
        ng_unit_capacity_mw: (total - biomass_mw) / n_ng as f64,
        ng_unit_count: n_ng,
        outage,
    })
}

/// Battery rating that tracks `bess_share` exactly: power is the largest
/// absolute share, energy the swing of the cumulative energy (from zero).
pub fn size_bess(bess_share: &TimeSeries) -> BessSpec {
    let dt = bess_share.dt_hours();
    let mut level = 0.0f64;
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let mut power = 0.0f64;
    for &b in bess_share.values() {
        power = power.max(b.abs());
        level += b * dt;
        lo = lo.min(level);
        hi = hi.max(level);
    }
    BessSpec {
        power_mw: power,
        energy_mwh: hi - lo,
    }
}

/// Battery cost: power-related terms as for a generator plus a per-kWh
/// energy capital cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BessCostSpec {
    #[serde(flatten)]
    pub power: DerCostSpec,
    pub energy_capital_per_kwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSpecs {
    pub biomass: DerCostSpec,
    pub natural_gas: DerCostSpec,
    pub bess: BessCostSpec,
}

impl CostSpecs {
    pub fn validate(&self) -> Result<()> {
        self.biomass.validate()?;
        self.natural_gas.validate()?;
        self.bess.power.validate()?;
        if !(self.bess.energy_capital_per_kwh.is_finite()
            && self.bess.energy_capital_per_kwh >= 0.0)
        {
            return Err(domain("battery energy capital cost must be >= 0"));
        }
        Ok(())
    }

    /// Illustrative planning-grade prices (not calibrated to any study),
    /// 20-year life, 5 % discount rate.
    pub fn illustrative() -> Self {
        let spec = |name: &str, capital, fixed, var, fuel, ptc, cf| DerCostSpec {
            name: name.to_string(),
            capital_per_kw: capital,
            fixed_om_per_kw_yr: fixed,
            variable_om_per_mwh: var,
            fuel_per_mwh: fuel,
            ptc_per_mwh: ptc,
            capacity_factor: cf,
            lifetime_years: 20,
            discount_rate: 0.05,
        };
        Self {
            biomass: spec("Biomass Generator", 4000.0, 110.0, 5.0, 40.0, 12.0, 0.8),
            natural_gas: spec("Natural Gas Generator", 1000.0, 15.0, 7.0, 35.0, 0.0, 0.5),
            bess: BessCostSpec {
                power: spec("Battery", 300.0, 10.0, 2.0, 0.0, 0.0, 0.2),
                energy_capital_per_kwh: 350.0,
            },
        }
    }
}

/// Yearly energy flows of a design's dispatch plan.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DispatchEnergy {
    pub biomass_mwh: f64,
    pub natural_gas_mwh: f64,
    /// Energy discharged by the battery.
    pub bess_throughput_mwh: f64,
}

impl DispatchEnergy {
    /// Biomass is loaded first (up to its capacity each hour), gas takes the rest.
    pub fn from_shares(gen_share: &TimeSeries, bess_share: &TimeSeries, biomass_mw: f64) -> Self {
        let dt = gen_share.dt_hours();
        let mut out = Self::default();
        for &g in gen_share.values() {
            let bio = g.min(biomass_mw).max(0.0);
            out.biomass_mwh += bio * dt;
            out.natural_gas_mwh += (g - bio).max(0.0) * dt;
        }
        out.bess_throughput_mwh =
            bess_share.values().iter().map(|b| b.max(0.0)).sum::<f64>() * bess_share.dt_hours();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub capital_annualized: f64,
    pub fixed_om: f64,
    pub variable_om: f64,
    pub fuel: f64,
    /// Production tax credit, subtracted from the total.
    pub ptc_credit: f64,
    pub total: f64,
    pub per_mw_year: f64,
}

/// Annualized cost of a fleet and battery with the given yearly energy flows.
/// `per_mw_year` is normalized by `peak_load_mw`.
pub fn annualized_cost(
    fleet: &GenFleet,
    bess: &BessSpec,
    energy: &DispatchEnergy,
    specs: &CostSpecs,
    peak_load_mw: f64,
) -> Result<CostBreakdown> {
    specs.validate()?;
    let kw = 1000.0;
    let bio_kw = fleet.biomass_capacity_mw * kw;
    let ng_kw = fleet.ng_unit_count as f64 * fleet.ng_unit_capacity_mw * kw;
    let bess_kw = bess.power_mw * kw;
    let bess_kwh = bess.energy_mwh * kw;
    let (bio, ng, bat) = (&specs.biomass, &specs.natural_gas, &specs.bess);

    let capital_annualized = bio.capital_per_kw * bio_kw * bio.crf()?
        + ng.capital_per_kw * ng_kw * ng.crf()?
        + (bat.power.capital_per_kw * bess_kw + bat.energy_capital_per_kwh * bess_kwh)
            * bat.power.crf()?;
    let fixed_om = bio.fixed_om_per_kw_yr * bio_kw
        + ng.fixed_om_per_kw_yr * ng_kw
        + bat.power.fixed_om_per_kw_yr * bess_kw;
    let variable_om = bio.variable_om_per_mwh * energy.biomass_mwh
        + ng.variable_om_per_mwh * energy.natural_gas_mwh
        + bat.power.variable_om_per_mwh * energy.bess_throughput_mwh;
    let fuel = bio.fuel_per_mwh * energy.biomass_mwh + ng.fuel_per_mwh * energy.natural_gas_mwh;
    let ptc_credit = bio.ptc_per_mwh * energy.biomass_mwh;
    let total = capital_annualized + fixed_om + variable_om + fuel - ptc_credit;
    Ok(CostBreakdown {
        capital_annualized,
        fixed_om,
        variable_om,
        fuel,
        ptc_credit,
        total,
        per_mw_year: normalize_cost(total, peak_load_mw)?,
    })
}

/// Cost per MW of peak load.
pub fn normalize_cost(total_per_year: f64, peak_load_mw: f64) -> Result<f64> {
    if !(peak_load_mw > 0.0) {
        return Err(domain(format!(
            "peak load must be positive, got {peak_load_mw}"
        )));
    }
    Ok(total_per_year / peak_load_mw)
}
