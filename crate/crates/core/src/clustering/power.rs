use serde::{Deserialize, Serialize};

use super::threshold::{default_power, delta_power, estimate_s_star};
use super::{threshold_groups, Algorithm, Clustering, DeltaMode};
use crate::error::{invalid, Result};
use crate::linalg::{scaled_power, ScaledPower, ScaledValue, SymMatrix};
use crate::model::validate_probabilities;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    /// Exponent; `ceil(ln n)` when unset.
    pub r: Option<u32>,
    pub delta_mode: DeltaMode,
    pub p: f64,
    pub q: f64,
    /// Largest cluster size for the theoretical threshold.
    pub s_star_hint: Option<usize>,
    /// Experimental: after the first round, remove the largest group and
    /// rerun on the rest this many times (threshold re-estimated each round).
    #[serde(default)]
    pub peel_rounds: u32,
}

impl PowerConfig {
    pub fn new(p: f64, q: f64) -> Self {
        Self {
            r: None,
            delta_mode: DeltaMode::Theoretical,
            p,
            q,
            s_star_hint: None,
            peel_rounds: 0,
        }
    }

    pub fn with_r(mut self, r: u32) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_delta(mut self, mode: DeltaMode) -> Self {
        self.delta_mode = mode;
        self
    }

    pub fn with_s_star(mut self, s_star: usize) -> Self {
        self.s_star_hint = Some(s_star);
        self
    }

    pub fn with_peeling(mut self, rounds: u32) -> Self {
        self.peel_rounds = rounds;
        self
    }

    fn exponent(&self, n: usize) -> Result<u32> {
        match self.r {
            Some(0) => Err(invalid("power exponent must be at least 1")),
            Some(r) => Ok(r),
            None => Ok(default_power(n)),
        }
    }
}

/// The powered matrix and threshold behind a power-method clustering.
#[derive(Debug, Clone)]
pub struct PowerRun {
    pub power: ScaledPower,
    pub delta: ScaledValue,
    /// Largest-cluster size the threshold was built from, if any.
    pub s_star: Option<usize>,
    pub clustering: Clustering,
}

impl PowerRun {
    /// Threshold in units of the stored power base.
    pub fn unit_threshold(&self) -> f64 {
        self.delta.in_units_of(self.power.log_scale())
    }
}

/// Groups vertices whose rows of `B^r` lie within the threshold of each other.
pub fn run_power(b: &SymMatrix, cfg: &PowerConfig) -> Result<PowerRun> {
    validate_probabilities(cfg.p, cfg.q)?;
    let n = b.n();
    if n == 0 {
        return Err(invalid("empty matrix"));
    }
    let r = cfg.exponent(n)?;
    let (delta, s_star) = match cfg.delta_mode {
        DeltaMode::Theoretical => {
            let s = cfg.s_star_hint.ok_or_else(|| {
                invalid("theoretical threshold needs the largest cluster size (s_star_hint)")
            })?;
            (delta_power(s, cfg.p, cfg.q, r)?, Some(s))
        }
        DeltaMode::Estimated => {
            let s = estimate_s_star(b, cfg.p, cfg.q)?;
            (delta_power(s, cfg.p, cfg.q, r)?, Some(s))
        }
        DeltaMode::Explicit(v) => (ScaledValue::from_f64(v), None),
    };
    if !delta.ln().is_finite() {
        return Err(invalid(format!("threshold is not finite (ln = {})", delta.ln())));
    }
    let power = scaled_power(b, r)?;
    let unit = delta.in_units_of(power.log_scale());
    let groups = threshold_groups(power.base().as_matrix(), unit);
    let clustering = Clustering::new(n, groups, Algorithm::Power, delta, Some(r));
    Ok(PowerRun {
        power,
        delta,
        s_star,
        clustering,
    })
}

/// Power-iteration clustering of a centered adjacency matrix.
pub fn power_iteration_cluster(b: &SymMatrix, cfg: &PowerConfig) -> Result<Clustering> {
    if cfg.peel_rounds == 0 {
        return Ok(run_power(b, cfg)?.clustering);
    }
    peel(b, cfg)
}

fn peel(b: &SymMatrix, cfg: &PowerConfig) -> Result<Clustering> {
    let n = b.n();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut groups = Vec::new();
    let mut first: Option<(ScaledValue, u32)> = None;
    let mut round_cfg = cfg.clone();
    for round in 0..=cfg.peel_rounds {
        let sub = b.submatrix(&remaining);
        let mut this_cfg = round_cfg.clone();
        if cfg.r.is_none() {
            this_cfg.r = None;
        }
        let run = run_power(&sub, &this_cfg)?;
        first.get_or_insert((run.delta, run.power.exponent()));
        let local = run.clustering;
        let last = round == cfg.peel_rounds || local.groups.len() <= 1;
        if last {
            groups.extend(
                local
                    .groups
                    .iter()
                    .map(|g| g.iter().map(|&v| remaining[v]).collect::<Vec<_>>()),
            );
            break;
        }
        let peeled: Vec<usize> = local.largest_group().iter().map(|&v| remaining[v]).collect();
        let mut keep = vec![true; remaining.len()];
        for &v in local.largest_group() {
            keep[v] = false;
        }
        remaining = remaining
            .iter()
            .zip(&keep)
            .filter_map(|(&v, &k)| k.then_some(v))
            .collect();
        groups.push(peeled);
        // Later rounds cannot use the hint for the whole graph.
        if matches!(round_cfg.delta_mode, DeltaMode::Theoretical) {
            round_cfg.delta_mode = DeltaMode::Estimated;
        }
    }
    let (delta, r) = first.expect("at least one round runs");
    Ok(Clustering::new(n, groups, Algorithm::Power, delta, Some(r)))
}
