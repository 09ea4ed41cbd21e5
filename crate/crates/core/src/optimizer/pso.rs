use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rng;

/// Swarm settings for a bounded one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub iterations: usize,
    pub bounds: [f64; 2],
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            swarm_size: 30,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            iterations: 40,
            bounds: [0.0, 0.5],
            seed: 7,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.bounds;
        if self.swarm_size < 2 {
            return Err(domain("swarm needs at least two particles"));
        }
        if self.iterations == 0 {
            return Err(domain("at least one iteration is required"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(domain(format!("invalid bounds [{lo}, {hi}]")));
        }
        if !(self.inertia > 0.0 && self.inertia <= 1.0) {
            return Err(domain(format!(
                "inertia must lie in (0, 1], got {}",
                self.inertia
            )));
        }
        if !(self.cognitive > 0.0 && self.social > 0.0) {
            return Err(domain("acceleration coefficients must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoResult {
    pub x: f64,
    pub f: f64,
    pub evaluations: usize,
}

/// `(f, x)` ordering: lower value wins, ties go to the lower position.
fn better(f: f64, x: f64, best_f: f64, best_x: f64) -> bool {
    f < best_f || (f == best_f && x < best_x)
}

/// Minimizes `objective` over `params.bounds`. Infeasible points should
/// return `f64::INFINITY`; NaN is treated the same way.
///
/// Initial positions are stratified (one particle per equal-width slice of
/// the interval). Positions leaving the interval are clipped and their
/// velocity zeroed.
pub fn pso_minimize(
    mut objective: impl FnMut(f64) -> f64,
    params: &PsoParams,
) -> Result<PsoResult> {
    params.validate()?;
    let [lo, hi] = params.bounds;
    let span = hi - lo;
    let n = params.swarm_size;
    let mut rng = rng::stream(params.seed, 0, 0);
    let mut eval = |x: f64, count: &mut usize| {
        *count += 1;
        let f = objective(x);
        if f.is_nan() {
            f64::INFINITY
        } else {
            f
        }
    };
    let mut evaluations = 0;

    let mut pos: Vec<f64> = (0..n)
        .map(|i| lo + span * (i as f64 + rng.random::<f64>()) / n as f64)
        .collect();
    let mut vel: Vec<f64> = (0..n)
        .map(|_| span * (rng.random::<f64>() - 0.5) * 0.2)
        .collect();
    let mut best_pos = pos.clone();
    let mut best_val: Vec<f64> = pos.iter().map(|&x| eval(x, &mut evaluations)).collect();

    let (mut gx, mut gf) = (best_pos[0], best_val[0]);
    for i in 1..n {
        if better(best_val[i], best_pos[i], gf, gx) {
            (gx, gf) = (best_pos[i], best_val[i]);
        }
    }

    for _ in 1..params.iterations {
        for i in 0..n {
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            vel[i] = params.inertia * vel[i]
                + params.cognitive * r1 * (best_pos[i] - pos[i])
                + params.social * r2 * (gx - pos[i]);
            vel[i] = vel[i].clamp(-span, span);
            pos[i] += vel[i];
            if pos[i] < lo || pos[i] > hi {
                pos[i] = pos[i].clamp(lo, hi);
                vel[i] = 0.0;
            }
        }
        // Evaluate in particle order, then reduce, so the result does not
        // depend on evaluation scheduling.
        let values: Vec<f64> = pos.iter().map(|&x| eval(x, &mut evaluations)).collect();
        for i in 0..n {
            if better(values[i], pos[i], best_val[i], best_pos[i]) {
                best_val[i] = values[i];
                best_pos[i] = pos[i];
            }
            if better(best_val[i], best_pos[i], gf, gx) {
                (gx, gf) = (best_pos[i], best_val[i]);
            }
        }
    }
    Ok(PsoResult {
        x: gx,
        f: gf,
        evaluations,
    })
}
