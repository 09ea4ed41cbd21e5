use std::f64::consts::TAU;

use microgrid_capacity::optimizer::{
    design, evaluate_candidate, scenario_sweep, Candidate, DesignConfig, Stage,
};
use microgrid_capacity::profiles::{Source, HOURS_PER_DAY};
use microgrid_capacity::reliability::estimate_lole;
use microgrid_capacity::spectral::SpectralSplitter;

fn quick() -> DesignConfig {
    let mut cfg = DesignConfig::default();
    cfg.reliability.years = 120;
    cfg.search.screening_years = 60;
    cfg.pso.swarm_size = 8;
    cfg.pso.iterations = 6;
    cfg
}

fn feasible(c: Candidate) -> microgrid_capacity::sizing::SizingSolution {
    match c {
        Candidate::Feasible(s) => *s,
        Candidate::Infeasible(b) => panic!("expected a feasible candidate, binding {b:?}"),
    }
}

#[test]
fn candidate_meets_target_and_n_minus_1() {
    let cfg = quick();
    let s = feasible(evaluate_candidate(0.05, 10, &cfg).unwrap());
    assert!(s.lole.lole_days_per_year <= cfg.lole_target_days_per_year);
    let peak = cfg
        .profiles
        .expected_net_load(cfg.alpha, cfg.reliability.horizon_hours)
        .unwrap()
        .max();
    assert!(s.fleet.passes_n_minus_1(s.bess.power_mw, peak));
    assert_eq!(s.fleet.ng_unit_count, 10);
    assert_eq!(s.fleet.biomass_capacity_mw, cfg.biomass_capacity_mw);
    let expected = (s.fleet.total_capacity_mw() + s.bess.power_mw - peak) / peak;
    assert!((s.prm - expected).abs() < 1e-9);
}

#[test]
fn design_is_cheapest_verified_candidate() {
    let cfg = quick();
    let result = design(&cfg).unwrap();
    let cost = result.solution.cost.total;
    let verified: Vec<f64> = result
        .trace
        .entries
        .iter()
        .filter(|e| e.stage == Stage::Verify)
        .filter_map(|e| e.cost)
        .collect();
    assert!(!verified.is_empty());
    assert!(verified.iter().all(|c| cost <= *c));
    assert!(verified.contains(&cost));
    let last = result
        .trace
        .entries
        .iter()
        .filter(|e| e.stage == Stage::Verify)
        .next_back()
        .unwrap();
    assert!(result.solution.fleet.ng_unit_count <= last.n_ng);
}

#[test]
fn oversized_biomass_stops_at_first_verified_count() {
    let mut cfg = quick();
    cfg.biomass_capacity_mw = 2.0 * cfg.profiles.peak_load_mw();
    let result = design(&cfg).unwrap();
    let s = &result.solution;
    assert!(s.lole.lole_days_per_year <= cfg.lole_target_days_per_year);
    assert!(s.fleet.ng_unit_capacity_mw < cfg.biomass_capacity_mw);
    let first_verified = result
        .trace
        .entries
        .iter()
        .filter(|e| e.stage == Stage::Verify && e.cost.is_some())
        .map(|e| e.n_ng)
        .min()
        .unwrap();
    assert_eq!(s.fleet.ng_unit_count, first_verified);
    assert!(result
        .trace
        .entries
        .iter()
        .all(|e| e.n_ng <= first_verified));
}

#[test]
fn dc_cutoff_battery_covers_diurnal_swing() {
    let cfg = quick();
    let net = cfg
        .profiles
        .expected_net_load(cfg.alpha, cfg.reliability.horizon_hours)
        .unwrap();
    let n = net.len();
    let cycles = (n / HOURS_PER_DAY) as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (t, v) in net.values().iter().enumerate() {
        let phase = TAU * cycles * t as f64 / n as f64;
        re += v * phase.cos();
        im -= v * phase.sin();
    }
    let diurnal_amplitude = 2.0 * (re * re + im * im).sqrt() / n as f64;
    assert!(diurnal_amplitude > 0.1);

    let s = feasible(evaluate_candidate(0.0, 10, &cfg).unwrap());
    assert_eq!(s.cutoff_bin, 0);
    assert!(
        s.bess.power_mw >= diurnal_amplitude,
        "{} < {diurnal_amplitude}",
        s.bess.power_mw
    );

    let (gen, _) = SpectralSplitter::new(&net).unwrap().split(0.0).unwrap();
    assert!(gen
        .values()
        .iter()
        .all(|g| (g - net.mean().max(0.0)).abs() < 1e-9));
}

#[test]
fn tighter_target_needs_at_least_as_much_capacity() {
    let mut cfg = quick();
    let size = |cfg: &DesignConfig| {
        let s = design(cfg).unwrap().solution;
        s.fleet.total_capacity_mw() + s.bess.power_mw
    };
    cfg.lole_target_days_per_year = 0.5;
    let loose = size(&cfg);
    cfg.lole_target_days_per_year = 0.1;
    let tight = size(&cfg);
    assert!(tight >= loose - 1e-9, "{tight} < {loose}");
}

#[test]
fn without_renewables_alpha_is_irrelevant() {
    let mut cfg = quick();
    if let Source::Model(pv) = &mut cfg.profiles.pv {
        pv.capacity_mw = 0.0;
    }
    if let Source::Model(wind) = &mut cfg.profiles.wind {
        wind.capacity_mw = 0.0;
    }
    let at = |alpha| {
        let mut c = cfg.clone();
        c.alpha = alpha;
        let mut s = feasible(evaluate_candidate(0.05, 10, &c).unwrap());
        s.alpha = 0.0;
        s
    };
    assert_eq!(at(0.0), at(1.0));
}

#[test]
fn duplicate_alphas_give_identical_rows() {
    let cfg = quick();
    let sweep = scenario_sweep(&cfg, &[0.8, 0.8]).unwrap();
    assert_eq!(sweep.scenarios.len(), 2);
    assert_eq!(sweep.scenarios[0], sweep.scenarios[1]);
}

#[test]
fn design_holds_up_on_a_fresh_seed() {
    let mut cfg = quick();
    cfg.reliability.years = 300;
    cfg.search.screening_years = 100;
    let s = design(&cfg).unwrap().solution;
    let mut fresh = cfg.reliability.clone();
    fresh.seed = cfg.reliability.seed.wrapping_add(1);
    let r = estimate_lole(&s.fleet, &s.bess, &cfg.profiles, &fresh).unwrap();
    assert!(
        r.lole_days_per_year <= cfg.lole_target_days_per_year + 3.0 * r.ci_halfwidth,
        "{} ± {}",
        r.lole_days_per_year,
        r.ci_halfwidth
    );
}
