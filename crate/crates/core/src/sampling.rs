//! Seeded samplers for the three node processes, truncated to a finite
//! depth, plus replicate orchestration.
//!
//! * the i.i.d. supercritical process: every string present independently
//!   with probability p;
//! * the Florida process: the root is present and every present node
//!   receives child set {left}, {right}, {both} with probabilities
//!   (1-p, 1-p, 2p-1);
//! * the subcritical filler: every string present independently with
//!   probability 1-p.
//!
//! Samplers are pure functions of (config, replicate index); replicate
//! loops may run on any number of workers and aggregate with commutative
//! counters, so results never depend on execution order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::SurvivalParams;
use crate::rng::{ReplicateRng, Stream};
use crate::stats::binomial_stderr;
use crate::strings::{self, BinaryString, StringSet, TreePattern, MAX_SAMPLING_DEPTH};

/// Everything a sampler needs: parameters, truncation depth, master seed,
/// and the replicate count for Monte Carlo runs.
#[derive(Clone, Debug)]
pub struct SampleConfig {
    pub params: SurvivalParams<f64>,
    pub depth: u32,
    pub seed: u64,
    pub replicates: u32,
}

impl SampleConfig {
    pub fn new(params: SurvivalParams<f64>, depth: u32, seed: u64, replicates: u32) -> Result<Self> {
        if depth > MAX_SAMPLING_DEPTH {
            return Err(Error::DepthCeiling {
                requested: depth,
                max: MAX_SAMPLING_DEPTH,
                context: "sampling",
            });
        }
        if replicates == 0 {
            return Err(Error::NoReplicates);
        }
        Ok(SampleConfig {
            params,
            depth,
            seed,
            replicates,
        })
    }

    fn p(&self) -> f64 {
        *self.params.p()
    }
}

/// One draw of the i.i.d. process: the raw string set and the tree it
/// induces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GwSample {
    pub raw: StringSet,
    pub tree: TreePattern,
}

/// Sample the i.i.d. process: every string of length < depth is included
/// independently with probability p.
pub fn sample_gw(cfg: &SampleConfig, replicate: u64) -> GwSample {
    let rng = ReplicateRng::new(cfg.seed, Stream::GwNodes, replicate);
    let p = cfg.p();
    let mut raw = StringSet::new(cfg.depth);
    for level in 0..cfg.depth {
        for bits in 0..1u64 << level {
            let s = BinaryString::from_bits(level as usize, bits).unwrap();
            if rng.bernoulli(s.heap_index(), p) {
                raw.insert(s).unwrap();
            }
        }
    }
    let tree = strings::truncate_to_tree(&raw, cfg.depth);
    GwSample { raw, tree }
}

/// The induced tree of [`sample_gw`] without materializing the raw set:
/// nodes outside the tree are never drawn, which leaves every other draw
/// unchanged because draws are keyed by node. Identical to
/// `sample_gw(cfg, replicate).tree` for every (cfg, replicate).
pub fn sample_gw_tree(cfg: &SampleConfig, replicate: u64) -> TreePattern {
    let rng = ReplicateRng::new(cfg.seed, Stream::GwNodes, replicate);
    let p = cfg.p();
    let mut set = StringSet::new(cfg.depth);
    if cfg.depth == 0 {
        return TreePattern::empty(0);
    }
    let root = BinaryString::empty();
    if !rng.bernoulli(root.heap_index(), p) {
        return TreePattern::empty(cfg.depth);
    }
    set.insert(root).unwrap();
    let mut frontier = vec![root];
    for _level in 1..cfg.depth {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for node in frontier {
            for bit in 0..2u8 {
                let c = node.child(bit);
                if rng.bernoulli(c.heap_index(), p) {
                    set.insert(c).unwrap();
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    TreePattern::new(set).unwrap()
}

/// Sample the Florida process to depth n: the root is present, every
/// present node of length < n-1 receives a nonempty child set, and the
/// result is a tree in which no internal node is childless. Requires
/// p > 1/2 (otherwise {both} would have negative mass 2p-1).
pub fn sample_florida(cfg: &SampleConfig, replicate: u64) -> Result<TreePattern> {
    if !cfg.params.is_supercritical() {
        return Err(Error::NotSupercritical { p: cfg.p() });
    }
    let rng = ReplicateRng::new(cfg.seed, Stream::FloridaChildren, replicate);
    let p = cfg.p();
    let q = 1.0 - p;
    let mut set = StringSet::new(cfg.depth);
    if cfg.depth == 0 {
        return Ok(TreePattern::empty(0));
    }
    let root = BinaryString::empty();
    set.insert(root).unwrap();
    let mut frontier = vec![root];
    for _level in 1..cfg.depth {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for node in frontier {
            let u = rng.uniform(node.heap_index());
            let (left, right) = if u < q {
                (true, false)
            } else if u < 2.0 * q {
                (false, true)
            } else {
                (true, true)
            };
            for (bit, keep) in [(0u8, left), (1u8, right)] {
                if keep {
                    let c = node.child(bit);
                    set.insert(c).unwrap();
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    Ok(TreePattern::new(set).unwrap())
}

/// Sample the subcritical filler: every string of length < depth included
/// independently with probability 1-p.
pub fn sample_filler(cfg: &SampleConfig, replicate: u64) -> StringSet {
    let rng = ReplicateRng::new(cfg.seed, Stream::FillerNodes, replicate);
    let q = 1.0 - cfg.p();
    let mut raw = StringSet::new(cfg.depth);
    for level in 0..cfg.depth {
        for bits in 0..1u64 << level {
            let s = BinaryString::from_bits(level as usize, bits).unwrap();
            if rng.bernoulli(s.heap_index(), q) {
                raw.insert(s).unwrap();
            }
        }
    }
    raw
}

/// The deepest level reached by the tree induced by the filler sample,
/// or `None` when the root is absent. Computed lazily in O(tree size).
pub fn filler_reach(cfg: &SampleConfig, replicate: u64) -> Option<u32> {
    let rng = ReplicateRng::new(cfg.seed, Stream::FillerNodes, replicate);
    let q = 1.0 - cfg.p();
    if cfg.depth == 0 || !rng.bernoulli(BinaryString::empty().heap_index(), q) {
        return None;
    }
    let mut frontier = vec![BinaryString::empty()];
    let mut reached = 0;
    for level in 1..cfg.depth {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for node in frontier {
            for bit in 0..2u8 {
                let c = node.child(bit);
                if rng.bernoulli(c.heap_index(), q) {
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            return Some(reached);
        }
        reached = level;
        frontier = next;
    }
    Some(reached)
}

/// Per-probe Monte Carlo summary for tree membership frequencies.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeStat {
    pub probe: BinaryString,
    pub expected: f64,
    pub observed: f64,
    pub stderr: f64,
    pub within_3se: bool,
}

/// Default probe set: for each length 1..=10, the all-zeros string and the
/// alternating string, giving 20 probes.
pub fn default_probes(depth: u32) -> Vec<BinaryString> {
    let max_len = (depth.saturating_sub(2)).min(10).max(1);
    let mut probes = Vec::new();
    for len in 1..=max_len {
        probes.push(BinaryString::from_bits(len as usize, 0).unwrap());
        let mut alt = BinaryString::empty();
        for i in 0..len {
            alt = alt.child((i % 2) as u8);
        }
        probes.push(alt);
    }
    probes
}

/// Estimate P(probe in tree) under the i.i.d. process for every probe and
/// compare with the survival formula p^{len}. Runs replicates in parallel;
/// aggregation is a commutative sum of hit counters.
pub fn probe_survival_stats(cfg: &SampleConfig, probes: &[BinaryString]) -> Vec<ProbeStat> {
    assert!(probes.len() <= 64, "probe mask is a u64");
    let n = cfg.replicates as u64;
    let hits = (0..n)
        .into_par_iter()
        .fold(
            || vec![0u64; probes.len()],
            |mut acc, rep| {
                let tree = sample_gw_tree(cfg, rep);
                for (i, probe) in probes.iter().enumerate() {
                    if tree.contains(probe) {
                        acc[i] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; probes.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    probes
        .iter()
        .zip(hits)
        .map(|(probe, h)| {
            let expected = cfg.p().powi(probe.len() as i32);
            let observed = h as f64 / n as f64;
            let stderr = binomial_stderr(expected, n);
            ProbeStat {
                probe: *probe,
                expected,
                observed,
                stderr,
                within_3se: (observed - expected).abs() <= 3.0 * stderr,
            }
        })
        .collect()
}

/// Frequencies of whole depth-n patterns under an arbitrary per-replicate
/// sampler. Aggregation merges count maps, so worker count is irrelevant.
pub fn pattern_counts<F>(replicates: u32, sampler: F) -> BTreeMap<TreePattern, u64>
where
    F: Fn(u64) -> TreePattern + Sync,
{
    (0..replicates as u64)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<TreePattern, u64>, rep| {
            *acc.entry(sampler(rep)).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        })
}

/// Count, for each level k <= depth-1, how many replicates produce a
/// filler-induced tree reaching that level.
pub fn filler_reach_counts(cfg: &SampleConfig) -> Vec<u64> {
    let levels = cfg.depth as usize;
    (0..cfg.replicates as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; levels],
            |mut acc, rep| {
                if let Some(reached) = filler_reach(cfg, rep) {
                    for slot in acc.iter_mut().take(reached as usize + 1) {
                        *slot += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; levels],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}
