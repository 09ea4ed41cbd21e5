use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::pso::{pso_minimize, PsoParams};
use crate::error::{domain, Error, Result};
use crate::profiles::SystemProfiles;
use crate::reliability::{
    bisect_threshold, prm_of, Ensemble, FleetOutage, GenFleet, LossCount, ReliabilityResult,
    ReliabilitySettings,
};
use crate::rng::{derive_seed, MAX_UNITS};
use crate::sizing::{
    annualized_cost, fleet_for_peak, size_bess, BessSpec, CostSpecs, DispatchEnergy, SizingSolution,
};
use crate::spectral::{bess_share, nyquist, SpectralSplitter};

/// Cost-control knobs for the nested search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    /// Replications used while the swarm screens cut-off frequencies; a
    /// prefix of the full ensemble.
    pub screening_years: usize,
    /// Upper end of the generator reserve search.
    pub reserve_max: f64,
    pub reserve_tolerance: f64,
    pub max_gas_units: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            screening_years: 200,
            reserve_max: 3.0,
            reserve_tolerance: 1e-3,
            max_gas_units: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DesignConfig {
    pub profiles: SystemProfiles,
    pub biomass_capacity_mw: f64,
    /// Counted portion of the renewable forecast used for sizing.
    pub alpha: f64,
    pub lole_target_days_per_year: f64,
    pub costs: CostSpecs,
    pub outage: FleetOutage,
    pub reliability: ReliabilitySettings,
    pub search: SearchSettings,
    pub pso: PsoParams,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            profiles: SystemProfiles::default(),
            biomass_capacity_mw: 0.5,
            alpha: 0.8,
            lole_target_days_per_year: 0.1,
            costs: CostSpecs::illustrative(),
            outage: FleetOutage::default(),
            reliability: ReliabilitySettings::default(),
            search: SearchSettings::default(),
            pso: PsoParams::default(),
        }
    }
}

impl DesignConfig {
    pub fn validate(&self) -> Result<()> {
        self.profiles.validate()?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(domain(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.lole_target_days_per_year > 0.0) {
            return Err(domain(format!(
                "LOLE target must be positive, got {}",
                self.lole_target_days_per_year
            )));
        }
        if !(self.biomass_capacity_mw.is_finite() && self.biomass_capacity_mw >= 0.0) {
            return Err(domain("biomass capacity must be >= 0"));
        }
        self.costs.validate()?;
        self.outage.validate()?;
        self.reliability.validate()?;
        self.pso.validate()?;
        let [lo, hi] = self.pso.bounds;
        if lo < 0.0 || hi > nyquist(1.0) {
            return Err(domain(format!(
                "cut-off bounds [{lo}, {hi}] must lie within [0, {}] cycles/h",
                nyquist(1.0)
            )));
        }
        let s = &self.search;
        if s.screening_years == 0 || s.screening_years > self.reliability.years {
            return Err(domain(format!(
                "screening years must lie in 1..={}, got {}",
                self.reliability.years, s.screening_years
            )));
        }
        if !(s.reserve_max > 0.0 && s.reserve_tolerance > 0.0) {
            return Err(domain("reserve_max and reserve_tolerance must be positive"));
        }
        if s.max_gas_units == 0 || s.max_gas_units >= MAX_UNITS {
            return Err(domain(format!(
                "max_gas_units must lie in 1..{MAX_UNITS}, got {}",
                s.max_gas_units
            )));
        }
        Ok(())
    }

    /// Builds the shared outage/renewable ensemble for this configuration.
    /// It does not depend on `alpha`, so one ensemble serves a whole sweep.
    pub fn build_ensemble(&self) -> Result<Ensemble> {
        self.validate()?;
        Ensemble::build(
            &self.profiles,
            &self.outage,
            self.search.max_gas_units + 1,
            &self.reliability,
        )
    }
}

/// The constraint that rules a candidate out even at the largest reserve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    /// Generator total stays below the biomass unit.
    Split,
    NMinus1,
    Lole,
}

impl Binding {
    pub fn describe(self) -> &'static str {
        match self {
            Binding::Split => "generator total below the biomass unit (negative gas unit size)",
            Binding::NMinus1 => "N-1 criterion",
            Binding::Lole => "LOLE target",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Candidate {
    Feasible(Box<SizingSolution>),
    Infeasible(Binding),
}

impl Candidate {
    pub fn cost(&self) -> f64 {
        match self {
            Candidate::Feasible(s) => s.cost.total,
            Candidate::Infeasible(_) => f64::INFINITY,
        }
    }

    pub fn solution(&self) -> Option<&SizingSolution> {
        match self {
            Candidate::Feasible(s) => Some(s),
            Candidate::Infeasible(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Screen,
    Verify,
}

/// One evaluated candidate in the design's certificate log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub stage: Stage,
    pub n_ng: usize,
    pub cutoff_bin: usize,
    pub fc: f64,
    /// Annualized cost in $/yr; `None` when infeasible.
    pub cost: Option<f64>,
    pub binding: Option<Binding>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DesignTrace {
    pub entries: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub solution: SizingSolution,
    pub trace: DesignTrace,
}

/// Share-derived quantities for one cut-off bin.
#[derive(Debug, Clone)]
struct Shares {
    gen_peak: f64,
    bess: BessSpec,
    energy: DispatchEnergy,
}

/// Evaluates candidates for one configuration against a prebuilt ensemble.
pub struct Designer<'a> {
    cfg: &'a DesignConfig,
    ensemble: &'a Ensemble,
    splitter: SpectralSplitter,
    peak_net_mw: f64,
    shares: HashMap<usize, Shares>,
}

impl<'a> Designer<'a> {
    pub fn new(cfg: &'a DesignConfig, ensemble: &'a Ensemble) -> Result<Self> {
        cfg.validate()?;
        if ensemble.slots() < cfg.search.max_gas_units + 1
            || ensemble.years() < cfg.reliability.years
        {
            return Err(domain(
                "ensemble is smaller than the configuration requires",
            ));
        }
        let net = cfg
            .profiles
            .expected_net_load(cfg.alpha, cfg.reliability.horizon_hours)?;
        let peak_net_mw = net.max();
        if !(peak_net_mw > 0.0) {
            return Err(domain(format!(
                "forecast net load is never positive (peak {peak_net_mw} MW)"
            )));
        }
        Ok(Self {
            cfg,
            ensemble,
            splitter: SpectralSplitter::new(&net)?,
            peak_net_mw,
            shares: HashMap::new(),
        })
    }

    /// Peak of the forecast net load at the configured `alpha`.
    pub fn peak_net_mw(&self) -> f64 {
        self.peak_net_mw
    }

    pub fn cutoff_bin(&self, fc: f64) -> Result<usize> {
        self.splitter.cutoff_bin(fc)
    }

    fn shares(&mut self, kc: usize) -> Result<&Shares> {
        if !self.shares.contains_key(&kc) {
            let gen = self.splitter.generator_share_at_bin(kc)?;
            let bess_share = bess_share(self.splitter.net(), &gen)?;
            let entry = Shares {
                gen_peak: gen.max(),
                bess: size_bess(&bess_share),
                energy: DispatchEnergy::from_shares(
                    &gen,
                    &bess_share,
                    self.cfg.biomass_capacity_mw,
                ),
            };
            self.shares.insert(kc, entry);
        }
        Ok(&self.shares[&kc])
    }

    /// Sizes the candidate `(fc, n_ng)` with the smallest generator reserve
    /// that passes N-1 and meets the LOLE target over the first `years`
    /// replications.
    pub fn evaluate(&mut self, fc: f64, n_ng: usize, years: usize) -> Result<Candidate> {
        if n_ng == 0 || n_ng > self.cfg.search.max_gas_units {
            return Err(domain(format!(
                "gas unit count must lie in 1..={}, got {n_ng}",
                self.cfg.search.max_gas_units
            )));
        }
        if years == 0 || years > self.ensemble.years() {
            return Err(domain(format!(
                "years must lie in 1..={}",
                self.ensemble.years()
            )));
        }
        let kc = self.cutoff_bin(fc)?;
        let shares = self.shares(kc)?.clone();
        let cfg = self.cfg;
        let ensemble = self.ensemble;
        let peak = self.peak_net_mw;
        let budget = (cfg.lole_target_days_per_year * years as f64).floor() as u64;
        let efficiency = cfg.reliability.round_trip_efficiency;

        let check = |reserve: f64| -> Result<std::result::Result<(GenFleet, u64), Binding>> {
            let fleet = match fleet_for_peak(
                shares.gen_peak,
                reserve,
                cfg.biomass_capacity_mw,
                n_ng,
                cfg.outage,
            ) {
                Ok(f) => f,
                Err(Error::InfeasibleSplit { .. }) => return Ok(Err(Binding::Split)),
                Err(e) => return Err(e),
            };
            if !fleet.passes_n_minus_1(shares.bess.power_mw, peak) {
                return Ok(Err(Binding::NMinus1));
            }
            Ok(
                match ensemble.loss_days_within(&fleet, &shares.bess, efficiency, years, budget)? {
                    LossCount::Within(days) => Ok((fleet, days)),
                    LossCount::Exceeded => Err(Binding::Lole),
                },
            )
        };

        let search = &cfg.search;
        let found = bisect_threshold(0.0, search.reserve_max, search.reserve_tolerance, |r| {
            Ok(check(r)?.ok())
        })?;
        let Some(found) = found else {
            let binding = check(search.reserve_max)?.err().unwrap_or(Binding::Lole);
            return Ok(Candidate::Infeasible(binding));
        };
        let (fleet, days) = found.value;
        let lole = ReliabilityResult::from_counts(days, years, ensemble.days_per_year());
        let cost = annualized_cost(
            &fleet,
            &shares.bess,
            &shares.energy,
            &cfg.costs,
            cfg.profiles.peak_load_mw(),
        )?;
        Ok(Candidate::Feasible(Box::new(SizingSolution {
            cutoff_cycles_per_hour: fc,
            cutoff_bin: kc,
            prm: prm_of(fleet.total_capacity_mw(), shares.bess.power_mw, peak)?,
            fleet,
            bess: shares.bess,
            gen_reserve: found.at,
            lole,
            cost,
            energy: shares.energy,
            alpha: cfg.alpha,
        })))
    }

    /// Runs the full procedure: for `n_ng = 1, 2, …` the swarm screens
    /// cut-off frequencies on the screening replications, the best one is
    /// re-sized on all replications, and the loop stops after the first
    /// count whose verified gas unit is smaller than the biomass unit.
    pub fn design(&mut self) -> Result<Design> {
        let cfg = self.cfg;
        let full_years = cfg.reliability.years;
        let screen_years = cfg.search.screening_years;
        let mut trace = DesignTrace::default();
        let mut best: Option<SizingSolution> = None;
        let mut bindings: HashMap<Binding, usize> = HashMap::new();

        for n_ng in 1..=cfg.search.max_gas_units {
            let params = PsoParams {
                seed: derive_seed(cfg.pso.seed, n_ng as u64),
                ..cfg.pso
            };
            let mut cache: HashMap<usize, f64> = HashMap::new();
            let mut failure: Option<Error> = None;
            let result = pso_minimize(
                |fc| {
                    if failure.is_some() {
                        return f64::INFINITY;
                    }
                    let kc = match self.cutoff_bin(fc) {
                        Ok(kc) => kc,
                        Err(e) => {
                            failure = Some(e);
                            return f64::INFINITY;
                        }
                    };
                    if let Some(&cost) = cache.get(&kc) {
                        return cost;
                    }
                    match self.evaluate(fc, n_ng, screen_years) {
                        Ok(candidate) => {
                            let cost = candidate.cost();
                            record(
                                &mut trace,
                                &mut bindings,
                                Stage::Screen,
                                n_ng,
                                kc,
                                fc,
                                &candidate,
                            );
                            cache.insert(kc, cost);
                            cost
                        }
                        Err(e) => {
                            failure = Some(e);
                            f64::INFINITY
                        }
                    }
                },
                &params,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            if !result.f.is_finite() {
                log::debug!("n_ng = {n_ng}: no feasible cut-off on screening replications");
                continue;
            }

            let candidate = self.evaluate(result.x, n_ng, full_years)?;
            let kc = self.cutoff_bin(result.x)?;
            record(
                &mut trace,
                &mut bindings,
                Stage::Verify,
                n_ng,
                kc,
                result.x,
                &candidate,
            );
            let Candidate::Feasible(solution) = candidate else {
                log::debug!("n_ng = {n_ng}: screened optimum fails on full replications");
                continue;
            };
            log::info!(
                "n_ng = {n_ng}: fc = {:.5} cycles/h, cost {:.0} $/MW-yr, gas unit {:.4} MW",
                solution.cutoff_cycles_per_hour,
                solution.cost.per_mw_year,
                solution.fleet.ng_unit_capacity_mw
            );
            let stop = solution.fleet.ng_unit_capacity_mw < cfg.biomass_capacity_mw;
            if best
                .as_ref()
                .is_none_or(|b| solution.cost.total < b.cost.total)
            {
                best = Some(*solution);
            }
            if stop {
                break;
            }
        }

        match best {
            Some(solution) => Ok(Design { solution, trace }),
            None => {
                let binding = bindings
                    .iter()
                    .max_by_key(|(b, count)| (**count, std::cmp::Reverse(**b)))
                    .map(|(b, _)| *b)
                    .unwrap_or(Binding::Lole);
                Err(Error::Infeasible(format!(
                    "no feasible design for alpha = {} up to {} gas units; binding constraint: {}",
                    cfg.alpha,
                    cfg.search.max_gas_units,
                    binding.describe()
                )))
            }
        }
    }
}

fn record(
    trace: &mut DesignTrace,
    bindings: &mut HashMap<Binding, usize>,
    stage: Stage,
    n_ng: usize,
    cutoff_bin: usize,
    fc: f64,
    candidate: &Candidate,
) {
    let binding = match candidate {
        Candidate::Feasible(_) => None,
        Candidate::Infeasible(b) => {
            *bindings.entry(*b).or_default() += 1;
            Some(*b)
        }
    };
    trace.entries.push(TraceEntry {
        stage,
        n_ng,
        cutoff_bin,
        fc,
        cost: candidate.solution().map(|s| s.cost.total),
        binding,
    });
}

/// Sizes the single candidate `(fc, n_ng)` on all configured replications.
pub fn evaluate_candidate(fc: f64, n_ng: usize, cfg: &DesignConfig) -> Result<Candidate> {
    let ensemble = cfg.build_ensemble()?;
    Designer::new(cfg, &ensemble)?.evaluate(fc, n_ng, cfg.reliability.years)
}

pub fn design(cfg: &DesignConfig) -> Result<Design> {
    let ensemble = cfg.build_ensemble()?;
    Designer::new(cfg, &ensemble)?.design()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ScenarioOutcome {
    Feasible(Box<SizingSolution>),
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub alpha: f64,
    pub outcome: ScenarioOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub scenarios: Vec<Scenario>,
    /// Alpha of the cheapest feasible scenario (first one on ties).
    pub best_alpha: Option<f64>,
}

/// Designs every `alpha` against one shared ensemble. A scenario that has no
/// feasible design is reported as failed and the sweep continues.
pub fn scenario_sweep(cfg: &DesignConfig, alphas: &[f64]) -> Result<Sweep> {
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(domain(format!("alpha must lie in [0, 1], got {a}")));
    }
    let ensemble = cfg.build_ensemble()?;
    let mut scenarios = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let scenario_cfg = DesignConfig {
            alpha,
            ..cfg.clone()
        };
        let outcome = match Designer::new(&scenario_cfg, &ensemble)?.design() {
            Ok(d) => ScenarioOutcome::Feasible(Box::new(d.solution)),
            Err(Error::Infeasible(reason)) => {
                log::warn!("alpha = {alpha}: {reason}");
                ScenarioOutcome::Failed { reason }
            }
            Err(e) => return Err(e),
        };
        scenarios.push(Scenario { alpha, outcome });
    }
    let best_alpha = scenarios
        .iter()
        .filter_map(|s| match &s.outcome {
            ScenarioOutcome::Feasible(sol) => Some((s.alpha, sol.cost.total)),
            ScenarioOutcome::Failed { .. } => None,
        })
        .fold(None, |acc: Option<(f64, f64)>, (a, c)| match acc {
            Some((_, best)) if best <= c => acc,
            _ => Some((a, c)),
        })
        .map(|(a, _)| a);
    Ok(Sweep {
        scenarios,
        best_alpha,
    })
}
