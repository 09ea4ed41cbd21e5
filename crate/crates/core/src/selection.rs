//! Technology screening: levelized cost of energy and weighted
//! relationship-matrix (QFD) scoring of candidate resources.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Capital recovery factor: the fraction of an up-front cost repaid each year
/// by an `years`-long annuity at `rate`.
pub fn capital_recovery_factor(rate: f64, years: u32) -> Result<f64> {
    if years == 0 {
        return Err(domain("lifetime must be at least one year"));
    }
    if !(0.0..1.0).contains(&rate) {
        return Err(domain(format!(
            "discount rate must lie in [0, 1), got {rate}"
        )));
    }
    if rate == 0.0 {
        return Ok(1.0 / f64::from(years));
    }
    let growth = (1.0 + rate).powi(years as i32);
    Ok(rate * growth / (growth - 1.0))
}

/// Cost parameters of one generation technology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerCostSpec {
    pub name: String,
    pub capital_per_kw: f64,
    pub fixed_om_per_kw_yr: f64,
    pub variable_om_per_mwh: f64,
    /// Fuel cost per MWh of electrical output (heat rate already applied).
    pub fuel_per_mwh: f64,
    /// Production tax credit, $/MWh, applied flat over the evaluation year.
    pub ptc_per_mwh: f64,
    pub capacity_factor: f64,
    pub lifetime_years: u32,
    pub discount_rate: f64,
}

impl DerCostSpec {
    pub fn validate(&self) -> Result<()> {
        let money = [
            ("capital_per_kw", self.capital_per_kw),
            ("fixed_om_per_kw_yr", self.fixed_om_per_kw_yr),
            ("variable_om_per_mwh", self.variable_om_per_mwh),
            ("fuel_per_mwh", self.fuel_per_mwh),
            ("ptc_per_mwh", self.ptc_per_mwh),
        ];
        for (field, v) in money {
            if !(v.is_finite() && v >= 0.0) {
                return Err(domain(format!(
                    "{}: {field} must be >= 0, got {v}",
                    self.name
                )));
            }
        }
        if !(self.capacity_factor > 0.0 && self.capacity_factor <= 1.0) {
            return Err(domain(format!(
                "{}: capacity factor must lie in (0, 1], got {}",
                self.name, self.capacity_factor
            )));
        }
        capital_recovery_factor(self.discount_rate, self.lifetime_years)?;
        Ok(())
    }

    pub fn crf(&self) -> Result<f64> {
        capital_recovery_factor(self.discount_rate, self.lifetime_years)
    }

    fn annual_fixed_per_kw(&self) -> Result<f64> {
        Ok(self.capital_per_kw * self.crf()? + self.fixed_om_per_kw_yr)
    }
}

/// Levelized cost of energy in $/MWh for a plant of `capacity_kw`.
pub fn lcoe(spec: &DerCostSpec, capacity_kw: f64) -> Result<f64> {
    if !(capacity_kw.is_finite() && capacity_kw > 0.0) {
        return Err(domain(format!(
            "capacity must be positive, got {capacity_kw} kW"
        )));
    }
    spec.validate()?;
    let energy_mwh = capacity_kw * spec.capacity_factor * HOURS_PER_YEAR / 1000.0;
    let fixed = spec.annual_fixed_per_kw()? * capacity_kw;
    let per_mwh = spec.variable_om_per_mwh + spec.fuel_per_mwh - spec.ptc_per_mwh;
    Ok((fixed + per_mwh * energy_mwh) / energy_mwh)
}

/// LCOE at unit capacity for every capacity factor in `cf_grid`.
pub fn lcoe_curve(spec: &DerCostSpec, cf_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    cf_grid
        .iter()
        .map(|&cf| {
            if !(cf > 0.0 && cf <= 1.0) {
                return Err(domain(format!(
                    "capacity factor must lie in (0, 1], got {cf}"
                )));
            }
            let at_cf = DerCostSpec {
                capacity_factor: cf,
                ..spec.clone()
            };
            Ok((cf, lcoe(&at_cf, 1.0)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub label: String,
    /// Weight on a 1-5 scale.
    pub importance: i64,
}

/// Weighted criteria-vs-options relationship matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QfdMatrix {
    pub criteria: Vec<Criterion>,
    pub options: Vec<String>,
    /// `relation[criterion][option]`, one of ±9, ±3, ±1, 0.
    pub relation: Vec<Vec<i64>>,
}

impl QfdMatrix {
    pub fn validate(&self) -> Result<()> {
        if self.relation.len() != self.criteria.len() {
            return Err(Error::Shape(format!(
                "{} criteria but {} relation rows",
                self.criteria.len(),
                self.relation.len()
            )));
        }
        for (c, row) in self.criteria.iter().zip(&self.relation) {
            if !(1..=5).contains(&c.importance) {
                return Err(domain(format!(
                    "importance of `{}` must lie in 1..=5, got {}",
                    c.label, c.importance
                )));
            }
            if row.len() != self.options.len() {
                return Err(Error::Shape(format!(
                    "row `{}` has {} entries for {} options",
                    c.label,
                    row.len(),
                    self.options.len()
                )));
            }
            if let Some(bad) = row.iter().find(|r| ![0, 1, 3, 9].contains(&r.abs())) {
                return Err(domain(format!(
                    "relation {bad} in row `{}` is not one of ±9, ±3, ±1, 0",
                    c.label
                )));
            }
        }
        Ok(())
    }

    /// The DER evaluation matrix for community microgrids: seven criteria
    /// against six candidate technologies.
    pub fn community_microgrid() -> Self {
        let criteria = [
            ("LCOE", 5),
            ("CO2 Emission Reduction", 5),
            ("Fuel Consumption Savings", 4),
            ("Outage Time Reduction", 5),
            ("Dispatchability", 4),
            ("Equipment Lifetime", 3),
            ("Comply with the U.S. DOE Target", 5),
        ];
        let options = [
            "PV Panel",
            "Wind Turbine",
            "Biomass Generator",
            "Natural Gas Generator",
            "Natural Gas Combustion Turbine",
            "Coal-Fired Power Plant",
        ];
        let relation = vec![
            vec![9, 9, 3, 3, 1, 1],
            vec![3, 3, 9, 9, 1, 0],
            vec![9, 9, 9, 3, 1, 0],
            vec![-3, -3, 1, 3, 3, 3],
            vec![-1, -1, 1, 3, 3, 1],
            vec![3, 3, 1, 1, 1, 3],
            vec![9, 9, 9, 1, 1, 0],
        ];
        Self {
            criteria: criteria
                .iter()
                .map(|(label, importance)| Criterion {
                    label: (*label).to_string(),
                    importance: *importance,
                })
                .collect(),
            options: options.iter().map(|s| (*s).to_string()).collect(),
            relation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionScore {
    pub option: String,
    pub score: i64,
}

/// Absolute target per option, `Σ importance × relation`, in matrix order.
pub fn qfd_absolute_targets(matrix: &QfdMatrix) -> Result<Vec<OptionScore>> {
    matrix.validate()?;
    Ok(matrix
        .options
        .iter()
        .enumerate()
        .map(|(j, option)| OptionScore {
            option: option.clone(),
            score: matrix
                .criteria
                .iter()
                .zip(&matrix.relation)
                .map(|(c, row)| c.importance * row[j])
                .sum(),
        })
        .collect())
}

/// Highest score first; ties go to the lexicographically smaller label.
pub fn rank_options(scores: &[OptionScore]) -> Result<Vec<OptionScore>> {
    if scores.is_empty() {
        return Err(domain("nothing to rank"));
    }
    let mut ranked = scores.to_vec();
    ranked.sort_by(|a, b| match b.score.cmp(&a.score) {
        Ordering::Equal => a.option.cmp(&b.option),
        other => other,
    });
    Ok(ranked)
}

/// Illustrative cost assumptions for the screening curves. These are generic
/// planning-grade placeholders, not calibrated to any published study.
pub fn illustrative_technologies() -> Vec<DerCostSpec> {
    let base = |name: &str, capital, fixed, var, fuel, ptc, cf| DerCostSpec {
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
    vec![
        base("PV Panel", 1800.0, 20.0, 0.0, 0.0, 23.0, 0.16),
        base("Wind Turbine", 1600.0, 40.0, 0.0, 0.0, 23.0, 0.30),
        base("Biomass Generator", 4000.0, 110.0, 5.0, 40.0, 12.0, 0.80),
        base("Natural Gas Generator", 1000.0, 15.0, 7.0, 35.0, 0.0, 0.50),
        base(
            "Natural Gas Combustion Turbine",
            900.0,
            12.0,
            4.0,
            55.0,
            0.0,
            0.30,
        ),
        base("Coal-Fired Power Plant", 3500.0, 40.0, 5.0, 25.0, 0.0, 0.80),
    ]
}
