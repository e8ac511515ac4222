//! Gamma-weight machinery: the prefix-free hitting bound, the guessing
//! apparatus for the extendible part of a sampled tree (threshold
//! schedule, decision horizon, deep-trace mismatch estimate), and the
//! change-bounded cover construction, all at finite scale with Monte
//! Carlo bound checks.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::SurvivalParams;
use crate::prob::Scalar;
use crate::report::SCHEMA_VERSION;
use crate::sampling::{sample_gw_tree, SampleConfig};
use crate::stats::binomial_stderr;
use crate::strings::{minimal_prefix_free, BinaryString, StringSet, TreePattern};

/// The gamma-weight of a set of strings: sum of 2^{-len * gamma}.
pub fn weight_gamma(set: &StringSet, gamma: f64) -> f64 {
    set.iter().map(|w| (-(w.len() as f64) * gamma).exp2()).sum()
}

/// A level-indexed family of string sets with the per-level weight of its
/// minimal prefix-free refinement recorded alongside.
#[derive(Clone, Debug, Serialize)]
pub struct TestFamily {
    pub gamma: f64,
    pub levels: Vec<StringSet>,
    pub level_weights: Vec<f64>,
}

/// Monte Carlo check that the probability of hitting a set of strings
/// with the sampled tree never exceeds the prefix-free weight bound.
#[derive(Clone, Debug, Serialize)]
pub struct HittingReport {
    pub schema_version: u32,
    pub gamma: f64,
    pub depth: u32,
    pub replicates: u32,
    pub seed: u64,
    pub prefix_free: StringSet,
    pub bound: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub pass: bool,
}

/// Estimate P(some string of `u` lies on the sampled tree) and compare
/// with the weight bound of the minimal prefix-free refinement. A tree
/// that hits `u` contains the shortest hit prefix, so the refinement
/// bounds the full family.
pub fn hitting_bound_check(u: &StringSet, cfg: &SampleConfig) -> Result<HittingReport> {
    for s in u.iter() {
        if s.len() as u32 >= cfg.depth {
            return Err(Error::StringBeyondDepth {
                string: *s,
                depth: cfg.depth,
            });
        }
    }
    let refined = minimal_prefix_free(u);
    let bound = weight_gamma(&refined, cfg.params.gamma());
    let n = cfg.replicates as u64;
    let hits = (0..n)
        .into_par_iter()
        .filter(|&rep| {
            let tree = sample_gw_tree(cfg, rep);
            refined.iter().any(|s| tree.contains(s))
        })
        .count() as u64;
    let estimate = hits as f64 / n as f64;
    let stderr = binomial_stderr(estimate.clamp(1.0 / n as f64, 1.0), n);
    Ok(HittingReport {
        schema_version: SCHEMA_VERSION,
        gamma: cfg.params.gamma(),
        depth: cfg.depth,
        replicates: cfg.replicates,
        seed: cfg.seed,
        prefix_free: refined,
        bound,
        estimate,
        stderr,
        pass: estimate <= bound + 3.0 * stderr,
    })
}

/// Least m with e^m <= 2^{-n - 2l}, where e is the extinction
/// probability. At e = 1/2 this is exactly n + 2l.
pub fn m_schedule<T: Scalar>(n: u32, l: u32, params: &SurvivalParams<T>) -> Result<u32> {
    let e = params.extinction_probability()?;
    let shift = n + 2 * l;
    assert!(shift < 63, "threshold exponent too large");
    let bound = T::from_ratio(1, 1u64 << shift);
    if e == T::zero() {
        return Ok(u32::from(shift > 0));
    }
    // Start from the float estimate, then settle the boundary exactly in
    // the scalar's own arithmetic.
    let ef = e.to_f64();
    let mut m = ((shift as f64) * std::f64::consts::LN_2 / -ef.ln()).ceil() as u32;
    m = m.saturating_sub(2);
    while e.powu(m) > bound {
        m += 1;
    }
    while m > 0 && e.powu(m - 1) <= bound {
        m -= 1;
    }
    Ok(m)
}

/// Nodes of the pattern at level `level` that have a descendant at level
/// `horizon` — the horizon approximation to the extendible trace.
pub fn level_trace(tree: &TreePattern, level: u32, horizon: u32) -> StringSet {
    let mut out = StringSet::new(level + 1);
    for s in tree.level_members(level) {
        if tree.level_members(horizon).any(|t| s.is_prefix_of(t)) {
            out.insert(*s).unwrap();
        }
    }
    out
}

/// The least level L in (l, depth) at which every length-l string is
/// off the pattern, has no descendant at level L, or has at least
/// `threshold` of them; `None` when no level of the sampled depth
/// settles every node.
pub fn decision_horizon(tree: &TreePattern, l: u32, threshold: u32) -> Option<u32> {
    let depth = tree.depth();
    if l + 2 > depth {
        return None;
    }
    'levels: for horizon in l + 1..depth {
        for s in tree.level_members(l) {
            let descendants = tree
                .level_members(horizon)
                .filter(|t| s.is_prefix_of(t))
                .count() as u32;
            if descendants != 0 && descendants < threshold {
                continue 'levels;
            }
        }
        return Some(horizon);
    }
    None
}

/// Per-level slice of the mismatch estimate.
#[derive(Clone, Debug, Serialize)]
pub struct LevelViolation {
    pub level: u32,
    pub estimate: f64,
    pub bound: f64,
    pub stderr: f64,
    pub pass: bool,
}

/// Monte Carlo estimate of the event "for some level l, the decision
/// horizon is defined but the horizon trace disagrees with the deepest
/// available trace".
#[derive(Clone, Debug, Serialize)]
pub struct ViolationReport {
    pub schema_version: u32,
    pub n: u32,
    pub depth: u32,
    pub l_max: u32,
    pub replicates: u32,
    pub seed: u64,
    pub undecided_frequency: f64,
    pub estimate: f64,
    pub bound: f64,
    pub stderr: f64,
    pub pass: bool,
    pub per_level: Vec<LevelViolation>,
}

/// Estimate the probability that a guess made at the decision horizon
/// misclassifies the deep trace, for levels 0..=l_max, against the bound
/// 2^{-n} (and 2^{-n} 2^{-l} per level). The deep trace at the final
/// sampled level stands in for the true extendible part; the thresholds
/// are chosen so both approximations fail with probability far below the
/// tested bound.
pub fn guess_violation_estimate(
    n: u32,
    cfg: &SampleConfig,
    l_max: u32,
) -> Result<ViolationReport> {
    assert!(l_max + 2 <= cfg.depth, "levels must sit well below the sampled depth");
    let thresholds: Vec<u32> = (0..=l_max)
        .map(|l| m_schedule(n, l, &cfg.params))
        .collect::<Result<_>>()?;
    let deep = cfg.depth - 1;
    let reps = cfg.replicates as u64;

    let zero = || vec![0u64; l_max as usize + 2];
    // slot l < len-1: violations at level l; last slot: undecided count
    let counts = (0..reps)
        .into_par_iter()
        .fold(zero, |mut acc, rep| {
            let tree = sample_gw_tree(cfg, rep);
            let mut undecided = false;
            for l in 0..=l_max {
                match decision_horizon(&tree, l, thresholds[l as usize]) {
                    Some(horizon) => {
                        if level_trace(&tree, l, horizon) != level_trace(&tree, l, deep) {
                            acc[l as usize] += 1;
                        }
                    }
                    None => undecided = true,
                }
            }
            if undecided {
                acc[l_max as usize + 1] += 1;
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        });

    let mut per_level = Vec::new();
    let mut any = 0u64;
    for l in 0..=l_max {
        let c = counts[l as usize];
        any += c;
        let estimate = c as f64 / reps as f64;
        let bound = (-(n as f64) - l as f64).exp2();
        let stderr = binomial_stderr(estimate.clamp(1.0 / reps as f64, 1.0), reps);
        per_level.push(LevelViolation {
            level: l,
            estimate,
            bound,
            stderr,
            pass: estimate <= bound + 3.0 * stderr,
        });
    }
    // union bound across levels, so summed counts over-estimate the event
    let estimate = (any as f64 / reps as f64).min(1.0);
    let bound = (-(n as f64)).exp2();
    let stderr = binomial_stderr(estimate.clamp(1.0 / reps as f64, 1.0), reps);
    Ok(ViolationReport {
        schema_version: SCHEMA_VERSION,
        n,
        depth: cfg.depth,
        l_max,
        replicates: cfg.replicates,
        seed: cfg.seed,
        undecided_frequency: counts[l_max as usize + 1] as f64 / reps as f64,
        estimate,
        bound,
        stderr,
        pass: estimate <= bound + 3.0 * stderr,
        per_level,
    })
}

/// One stage of a change-bounded approximation: how many changes occurred
/// at this index, and the cone prefixes (of length equal to the stage
/// index) discovered so far.
#[derive(Clone, Debug, Serialize)]
pub struct ChangeStage {
    pub changes: u64,
    pub witnesses: Vec<BinaryString>,
}

/// Per-stage change counts and witness prefixes.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ChangeLog {
    pub stages: Vec<ChangeStage>,
}

/// Output of the cover construction: the level family, the analytic
/// weight bounds, and the selected subsequence.
#[derive(Clone, Debug, Serialize)]
pub struct FceCover {
    pub schema_version: u32,
    pub family: TestFamily,
    pub cumulative_changes: Vec<u64>,
    pub weight_bounds: Vec<f64>,
    /// (k, n_k): least stage whose weight bound is at most 2^{-k}.
    pub selected: Vec<(u32, u32)>,
    pub pass: bool,
}

/// Build the cover family of a change-bounded approximation: stage n is a
/// union of at most F(n) = sum of f(j) for j < n many length-n cones, so
/// its weight is at most F(n) 2^{-n gamma}, which goes effectively to
/// zero; the selected subsequence n_k realizes weight at most 2^{-k}.
pub fn fce_cover(
    log: &ChangeLog,
    f: &dyn Fn(u32) -> u64,
    gamma: f64,
    select_up_to: u32,
) -> Result<FceCover> {
    let mut levels = Vec::new();
    let mut level_weights = Vec::new();
    let mut weight_bounds = Vec::new();
    let mut cumulative = Vec::new();
    let mut total_changes = 0u64;
    for (stage, entry) in log.stages.iter().enumerate() {
        let stage = stage as u32;
        let allowed = f(stage);
        if entry.changes > allowed {
            return Err(Error::ChangeCountExceeded {
                stage,
                count: entry.changes,
                bound: allowed,
            });
        }
        for w in &entry.witnesses {
            if w.len() as u32 != stage {
                return Err(Error::BadWitnessLength { stage, witness: *w });
            }
        }
        if entry.witnesses.len() as u64 > total_changes {
            return Err(Error::ChangeCountExceeded {
                stage,
                count: entry.witnesses.len() as u64,
                bound: total_changes,
            });
        }
        let set = StringSet::with_members(stage + 1, entry.witnesses.iter().copied())?;
        let weight = weight_gamma(&set, gamma);
        let bound = total_changes as f64 * (-(stage as f64) * gamma).exp2();
        debug_assert!(weight <= bound + 1e-12);
        levels.push(set);
        level_weights.push(weight);
        weight_bounds.push(bound);
        cumulative.push(total_changes);
        total_changes += entry.changes;
    }
    let mut selected = Vec::new();
    for k in 0..=select_up_to {
        let target = (-(k as f64)).exp2();
        if let Some(n_k) = weight_bounds.iter().position(|&b| b <= target) {
            selected.push((k, n_k as u32));
        }
    }
    let pass = selected.len() == select_up_to as usize + 1;
    Ok(FceCover {
        schema_version: SCHEMA_VERSION,
        family: TestFamily {
            gamma,
            levels,
            level_weights,
        },
        cumulative_changes: cumulative,
        weight_bounds,
        selected,
        pass,
    })
}

/// A deterministic change log saturating the bound f: stage n reports
/// f(n) changes and carries min(F(n), 2^n) distinct witness prefixes.
pub fn synthetic_change_log(f: &dyn Fn(u32) -> u64, stages: u32) -> ChangeLog {
    let mut log = ChangeLog::default();
    let mut total = 0u64;
    for stage in 0..stages {
        let max_distinct = if stage >= 63 { u64::MAX } else { 1u64 << stage };
        let count = total.min(max_distinct);
        let witnesses = (0..count)
            .map(|bits| BinaryString::from_bits(stage as usize, bits).unwrap())
            .collect();
        log.stages.push(ChangeStage {
            changes: f(stage),
            witnesses,
        });
        total += f(stage);
    }
    log
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strings::bs;
    use num_rational::BigRational;

    fn params23_exact() -> SurvivalParams<BigRational> {
        SurvivalParams::new(1.5f64.log2(), BigRational::from_ratio(2, 3)).unwrap()
    }

    fn cfg(p: f64, depth: u32, seed: u64, replicates: u32) -> SampleConfig {
        let params = SurvivalParams::new(-p.log2(), p).unwrap();
        SampleConfig::new(params, depth, seed, replicates).unwrap()
    }

    #[test]
    fn weight_examples() {
        let level2 = StringSet::with_members(3, crate::strings::enumerate_level(2)).unwrap();
        assert_eq!(weight_gamma(&level2, 0.5), 2.0);
        assert_eq!(weight_gamma(&StringSet::new(3), 0.7), 0.0);
        let root = StringSet::with_members(1, [bs("e")]).unwrap();
        assert_eq!(weight_gamma(&root, 0.9), 1.0);
    }

    #[test]
    fn weight_additive_and_monotone_in_gamma() {
        let a = StringSet::with_members(4, [bs("0"), bs("00")]).unwrap();
        let b = StringSet::with_members(4, [bs("1"), bs("11")]).unwrap();
        let ab = a.union(&b);
        let g = 0.37;
        assert!((weight_gamma(&ab, g) - weight_gamma(&a, g) - weight_gamma(&b, g)).abs() < 1e-12);
        assert!(weight_gamma(&ab, 0.8) < weight_gamma(&ab, 0.3));
    }

    #[test]
    fn m_schedule_closed_form_at_half() {
        let p = params23_exact();
        for n in 0..=16 {
            for l in 0..=16 {
                if n + 2 * l < 63 {
                    assert_eq!(m_schedule(n, l, &p).unwrap(), n + 2 * l);
                }
            }
        }
    }

    #[test]
    fn m_schedule_examples() {
        let p = params23_exact();
        assert_eq!(m_schedule(1, 1, &p).unwrap(), 3);
        assert_eq!(m_schedule(4, 2, &p).unwrap(), 8);
        let p34 = SurvivalParams::new((4.0f64 / 3.0).log2(), BigRational::from_ratio(3, 4))
            .unwrap();
        assert_eq!(m_schedule(1, 0, &p34).unwrap(), 1);
        // p = 1: e = 0, any single survivor settles it
        let sure = SurvivalParams::new(0.0, BigRational::from_ratio(1, 1)).unwrap();
        assert_eq!(m_schedule(3, 1, &sure).unwrap(), 1);
        assert_eq!(m_schedule(0, 0, &sure).unwrap(), 0);
    }

    #[test]
    fn m_schedule_float_matches_exact() {
        let exact = params23_exact();
        let float = SurvivalParams::new(1.5f64.log2(), 2.0 / 3.0).unwrap();
        for n in 0..10 {
            for l in 0..10 {
                assert_eq!(
                    m_schedule(n, l, &float).unwrap(),
                    m_schedule(n, l, &exact).unwrap()
                );
            }
        }
    }

    #[test]
    fn decision_horizon_full_tree() {
        // On the full pattern every length-l node has 2^{L-l} descendants
        // at level L, so the horizon is the least L with enough of them.
        let tree = TreePattern::full(8);
        let p = params23_exact();
        let l = 1u32;
        let m = m_schedule(1, l, &p).unwrap(); // 3
        let horizon = decision_horizon(&tree, l, m).unwrap();
        assert_eq!(horizon, 3); // 2^{3-1} = 4 >= 3, 2^{2-1} = 2 < 3
        // empty pattern: vacuously decided at the first level above l
        let empty = TreePattern::empty(8);
        assert_eq!(decision_horizon(&empty, 2, 5), Some(3));
    }

    #[test]
    fn undecided_frequency_decays_with_depth() {
        let mut prev = 1.0f64;
        for depth in [6u32, 10, 14] {
            let c = cfg(2.0 / 3.0, depth, 314, 2000);
            let report = guess_violation_estimate(1, &c, 2).unwrap();
            assert!(report.undecided_frequency <= prev + 0.02);
            prev = report.undecided_frequency;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn violation_estimate_within_bounds() {
        for n in [1u32, 3] {
            let c = cfg(2.0 / 3.0, 14, 2718, 3000);
            let report = guess_violation_estimate(n, &c, 3).unwrap();
            assert!(report.pass, "n={n}: {report:?}");
            for lv in &report.per_level {
                assert!(lv.pass, "n={n} level {}", lv.level);
            }
        }
    }

    #[test]
    fn hitting_bound_single_string() {
        let c = cfg(2.0 / 3.0, 8, 5150, 20_000);
        let u = StringSet::with_members(8, [bs("010")]).unwrap();
        let report = hitting_bound_check(&u, &c).unwrap();
        // singleton: bound met with equality up to Monte Carlo noise
        let expect = (2.0f64 / 3.0).powi(3);
        assert!((report.bound - expect).abs() < 1e-12);
        assert!((report.estimate - expect).abs() <= 3.0 * report.stderr);
        assert!(report.pass);
    }

    #[test]
    fn hitting_bound_children_of_root() {
        let c = cfg(2.0 / 3.0, 6, 1001, 20_000);
        let u = StringSet::with_members(6, [bs("0"), bs("1")]).unwrap();
        let report = hitting_bound_check(&u, &c).unwrap();
        assert!((report.bound - 2.0 * (2.0 / 3.0)).abs() < 1e-12);
        let expect = 1.0 - (1.0f64 / 3.0).powi(2);
        assert!((report.estimate - expect).abs() <= 3.0 * report.stderr);
        assert!(report.pass);
    }

    #[test]
    fn hitting_bound_nested_strings_reduce_to_refinement() {
        let c = cfg(2.0 / 3.0, 6, 77, 5000);
        let nested =
            StringSet::with_members(6, [bs("0"), bs("00"), bs("01"), bs("0110")]).unwrap();
        let flat = StringSet::with_members(6, [bs("0")]).unwrap();
        let a = hitting_bound_check(&nested, &c).unwrap();
        let b = hitting_bound_check(&flat, &c).unwrap();
        assert_eq!(a.prefix_free, b.prefix_free);
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.bound, b.bound);
    }

    #[test]
    fn fce_cover_arithmetic() {
        let f = |n: u32| n as u64;
        let log = synthetic_change_log(&f, 20);
        let cover = fce_cover(&log, &f, 0.5, 3).unwrap();
        // F(16) = 120, bound = 120 * 2^{-8}
        assert!((cover.weight_bounds[16] - 0.46875).abs() < 1e-12);
        assert_eq!(cover.cumulative_changes[16], 120);
        assert!(cover.pass);
        for (k, n_k) in &cover.selected {
            assert!(cover.weight_bounds[*n_k as usize] <= (-(*k as f64)).exp2());
        }
    }

    #[test]
    fn fce_cover_zero_changes() {
        let f = |_: u32| 0u64;
        let log = synthetic_change_log(&f, 10);
        let cover = fce_cover(&log, &f, 0.5, 2).unwrap();
        assert!(cover.family.level_weights.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn fce_cover_rejects_excess_changes() {
        let mut log = synthetic_change_log(&|n| n as u64, 5);
        log.stages[3].changes = 99;
        let err = fce_cover(&log, &|n| n as u64, 0.5, 2);
        assert!(matches!(err, Err(Error::ChangeCountExceeded { stage: 3, .. })));
    }

    #[test]
    fn fce_cover_rejects_bad_witness_length() {
        let mut log = synthetic_change_log(&|n| n as u64, 5);
        log.stages[2].witnesses = vec![bs("0101")];
        let err = fce_cover(&log, &|n| n as u64, 0.5, 2);
        assert!(matches!(err, Err(Error::BadWitnessLength { stage: 2, .. })));
    }
}
