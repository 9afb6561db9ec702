//! Audit runs behind `sbm verify`.

use anyhow::Result;
use clap::ValueEnum;
use rand::Rng;
use serde_json::json;

use sbm_core::clustering::{default_power, delta_power};
use sbm_core::linalg::{Matrix, ScaledMatrix, SymMatrix};
use sbm_core::model::{center, split, BlockParams, PlantedModel};
use sbm_core::rng::{derive_seed, rng_from_seed};
use sbm_verify::{
    audit_entry_bound_ltr, audit_entry_bound_rtl, audit_norm_lemmas, audit_projection_scaling,
    decompose_terms, enumerate_encodings, group_sum_oracle, partition_unbiasedness_check,
    partition_unbiasedness_sampled, AuditRecord, Envelope, NormBars, MAX_PARTITIONS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AuditKind {
    Encodings,
    Decomposition,
    GroupSum,
    Partition,
    Norms,
    EntryRtl,
    EntryLtr,
    Projection,
}

/// Parameters shared by the audits; unset fields take per-audit defaults.
#[derive(Debug, Clone, Default)]
pub struct AuditParams {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<u32>,
    pub t: Option<usize>,
    pub instances: Option<usize>,
    pub seed: u64,
    pub log_power: Option<i32>,
}

fn random_pair(n: usize, seed: u64) -> (SymMatrix, SymMatrix) {
    let mut rng = rng_from_seed(seed);
    let r = SymMatrix::from_upper_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let l = SymMatrix::from_upper_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    (r, l)
}

fn naive_power(b: &Matrix, r: u32) -> Result<Matrix> {
    let mut acc = b.clone();
    for _ in 1..r {
        acc = acc.matmul(b)?;
    }
    Ok(acc)
}

pub fn run_audit(kind: AuditKind, a: &AuditParams) -> Result<Vec<AuditRecord>> {
    let mut out = Vec::new();
    match kind {
        AuditKind::Encodings => {
            let t = a.t.unwrap_or(4);
            let count = enumerate_encodings(t)?.len();
            let bound = (t as f64).powi(t as i32);
            out.push(
                AuditRecord::new(
                    "encodings",
                    "number of encoding classes is at most t^t",
                    json!({ "t": t }),
                    count as f64,
                    (count as f64) <= bound,
                    true,
                )
                .with_envelope(bound),
            );
        }
        AuditKind::Decomposition => {
            let (n, k) = (a.n.unwrap_or(50), a.k.unwrap_or(2));
            let (p, q) = (a.p.unwrap_or(0.6), a.q.unwrap_or(0.2));
            let r = a.r.unwrap_or(4);
            for i in 0..a.instances.unwrap_or(1) {
                let seed = derive_seed(a.seed, i as u64);
                let m = PlantedModel::new(BlockParams::uniform(n, k, p, q)?, seed)?;
                let s = split(&center(&m.sample(), q), &m)?;
                let terms = decompose_terms(&s, r)?;
                let b = s.structure.as_matrix().add(s.noise.as_matrix())?;
                let want = ScaledMatrix::new(naive_power(&b, r)?);
                let err = terms.reconstruction_error(&want)?;
                out.push(
                    AuditRecord::new(
                        "decomposition",
                        "B^r = L^r + M + M' + R^r",
                        json!({ "n": n, "k": k, "p": p, "q": q, "r": r, "seed": seed }),
                        err,
                        err <= 1e-9,
                        true,
                    )
                    .with_envelope(1e-9),
                );
            }
        }
        AuditKind::GroupSum => {
            let (n, t) = (a.n.unwrap_or(6), a.t.unwrap_or(2));
            for i in 0..a.instances.unwrap_or(1) {
                let seed = derive_seed(a.seed, i as u64);
                let (r, l) = random_pair(n, seed);
                let mut worst = 0.0_f64;
                for x in 0..n {
                    for y in 0..n {
                        worst = worst.max(group_sum_oracle(&r, &l, x, y, t)?.relative_error());
                    }
                }
                out.push(
                    AuditRecord::new(
                        "group-sum",
                        "sum of encoding-class sums equals (R^t L)_{a,b}",
                        json!({ "n": n, "t": t, "seed": seed }),
                        worst,
                        worst <= 1e-10,
                        true,
                    )
                    .with_envelope(1e-10),
                );
            }
        }
        AuditKind::Partition => {
            let (n, t) = (a.n.unwrap_or(6), a.t.unwrap_or(3));
            for i in 0..a.instances.unwrap_or(1) {
                let seed = derive_seed(a.seed, i as u64);
                let (r, l) = random_pair(n, seed);
                let exhaustive = (t as f64).powi(n as i32) <= MAX_PARTITIONS as f64;
                let (c, measured, bar) = if exhaustive {
                    let c = partition_unbiasedness_check(&r, &l, 0, n - 1, t)?;
                    let e = c.relative_error;
                    (c, e, 1e-9)
                } else {
                    // Too many partitions to list: Monte Carlo, judged in standard errors.
                    let c = partition_unbiasedness_sampled(&r, &l, 0, n - 1, t, 20_000, seed)?;
                    let z = (c.w_from_partitions - c.w_direct).abs() / c.standard_error.max(f64::MIN_POSITIVE);
                    (c, z, 4.0)
                };
                out.push(
                    AuditRecord::new(
                        "partition",
                        "W^t = t^t E_T[W^t(T)]",
                        json!({ "n": n, "t": t, "seed": seed, "exhaustive": exhaustive }),
                        measured,
                        measured <= bar,
                        exhaustive,
                    )
                    .with_envelope(bar)
                    .with_details(serde_json::to_value(&c)?),
                );
            }
        }
        AuditKind::Norms => {
            let (n, k) = (a.n.unwrap_or(400), a.k.unwrap_or(4));
            let (p, q) = (a.p.unwrap_or(0.6), a.q.unwrap_or(0.1));
            let r = a.r.unwrap_or_else(|| default_power(n));
            for i in 0..a.instances.unwrap_or(1) {
                let seed = derive_seed(a.seed, i as u64);
                let m = PlantedModel::new(BlockParams::uniform(n, k, p, q)?, seed)?;
                let s = split(&center(&m.sample(), q), &m)?;
                let terms = decompose_terms(&s, r)?;
                let delta = delta_power(m.s_star(), p, q, r)?;
                let audit = audit_norm_lemmas(&terms, delta, NormBars::default());
                let worst = audit.m_ratio.max(audit.mp_ratio).max(audit.rr_ratio);
                out.push(
                    AuditRecord::new(
                        "norms",
                        "row norms of M, M', R^r at most Delta; L^r separation at least 2 Delta",
                        json!({ "n": n, "k": k, "p": p, "q": q, "r": r, "seed": seed }),
                        worst,
                        audit.pass,
                        false,
                    )
                    .with_envelope(audit.ratio_bar)
                    .with_details(serde_json::to_value(&audit)?),
                );
            }
        }
        AuditKind::EntryRtl | AuditKind::EntryLtr => {
            let (n, k) = (a.n.unwrap_or(400), a.k.unwrap_or(2));
            let (p, q) = (a.p.unwrap_or(0.6), a.q.unwrap_or(0.1));
            let t = a.t.unwrap_or(1) as u32;
            for i in 0..a.instances.unwrap_or(1) {
                let seed = derive_seed(a.seed, i as u64);
                let m = PlantedModel::new(BlockParams::uniform(n, k, p, q)?, seed)?;
                let s = split(&center(&m.sample(), q), &m)?;
                let (name, lemma, audit) = if kind == AuditKind::EntryRtl {
                    let mut env = Envelope::rtl().with_log_power(3);
                    if let Some(e) = a.log_power {
                        env = env.with_log_power(e);
                    }
                    let audit = audit_entry_bound_rtl(&s, t, m.s_star(), p, q, env)?;
                    ("entry-rtl", "entries of R^t L within the calibrated envelope", audit)
                } else {
                    let mut env = Envelope::ltr();
                    if let Some(e) = a.log_power {
                        env = env.with_log_power(e);
                    }
                    let audit = audit_entry_bound_ltr(&s, t, m.s_star(), p, q, env)?;
                    ("entry-ltr", "entries of L^t R within the calibrated envelope", audit)
                };
                out.push(
                    AuditRecord::new(
                        name,
                        lemma,
                        json!({ "n": n, "k": k, "p": p, "q": q, "t": t, "seed": seed }),
                        audit.ratio,
                        audit.pass,
                        false,
                    )
                    .with_envelope(1.0)
                    .with_details(serde_json::to_value(&audit)?),
                );
            }
        }
        AuditKind::Projection => {
            let (n, k) = (a.n.unwrap_or(1200), a.k.unwrap_or(4));
            let (p, q) = (a.p.unwrap_or(0.5), a.q.unwrap_or(0.1));
            let r = a.r.unwrap_or_else(|| default_power(n));
            for i in 0..a.instances.unwrap_or(1) {
                let seed = derive_seed(a.seed, i as u64);
                let m = PlantedModel::new(BlockParams::uniform(n, k, p, q)?, seed)?;
                let b = center(&m.sample(), q);
                let audit = audit_projection_scaling(&b, k, r, p, q)?;
                out.push(
                    AuditRecord::new(
                        "projection",
                        "f_r lambda_i^r near 1 for i <= k and negligible beyond",
                        json!({ "n": n, "k": k, "p": p, "q": q, "r": r, "seed": seed }),
                        audit.top_deviation,
                        audit.top_deviation <= 0.5 && audit.tail_max <= 1e-3,
                        false,
                    )
                    .with_envelope(0.5)
                    .with_details(serde_json::to_value(&audit)?),
                );
            }
        }
    }
    Ok(out)
}
