//! The overlay map: combine an extendible skeleton with a subcritical
//! filler into a full tree, sample from it, and verify by exhaustive
//! enumeration that it pushes the product law forward to the
//! survival-conditioned law on basic open sets.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{conditioned_pair_prob, florida_pattern_prob, CylinderPair};
use crate::params::SurvivalParams;
use crate::prob::{Prob, Scalar};
use crate::report::SCHEMA_VERSION;
use crate::sampling::{sample_filler, sample_florida, SampleConfig};
use crate::strings::{
    enumerate_below, tree_patterns, BinaryString, StringSet, TreePattern,
    MAX_SUBSET_ENUM_DEPTH,
};

/// Arguments of the overlay map, confined to depth n.
#[derive(Clone, Debug)]
pub struct OverlayInput {
    pub live: TreePattern,
    pub filler: StringSet,
    pub depth: u32,
}

/// The overlay: all strings of length < depth whose every prefix lies in
/// the union of skeleton and filler — the largest tree inside the union.
/// Always contains `live` when `live` is a tree containing the root.
pub fn psi(input: &OverlayInput) -> TreePattern {
    let n = input.depth;
    let mut out = StringSet::new(n);
    let member =
        |s: &BinaryString| input.live.contains(s) || input.filler.contains(s);
    if n == 0 || !member(&BinaryString::empty()) {
        return TreePattern::empty(n);
    }
    out.insert(BinaryString::empty()).unwrap();
    let mut frontier = vec![BinaryString::empty()];
    for _level in 1..n {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for node in frontier {
            for bit in 0..2u8 {
                let c = node.child(bit);
                if member(&c) {
                    out.insert(c).unwrap();
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    TreePattern::new(out).unwrap()
}

/// (product law)(overlay restricted to depth n = `tree` and skeleton
/// restricted to depth n = `live`), by exact summation: the Florida
/// weight of `live` times the filler mass of every filler set whose
/// overlay with `live` is `tree`. Filler coordinates inside `live` never
/// affect the overlay (the union is unchanged), so the sum runs over
/// subsets of the complement only; those coordinates marginalize to
/// total mass 1.
pub fn pushforward_prob<T: Scalar>(
    tree: &TreePattern,
    live: &TreePattern,
    n: u32,
    params: &SurvivalParams<T>,
) -> Result<T> {
    if n > MAX_SUBSET_ENUM_DEPTH {
        return Err(Error::DepthCeiling {
            requested: n,
            max: MAX_SUBSET_ENUM_DEPTH,
            context: "filler subset enumeration",
        });
    }
    let skeleton_weight = florida_pattern_prob(live, n, params)?;
    if skeleton_weight == T::zero() {
        return Ok(T::zero());
    }
    let rest: Vec<BinaryString> = enumerate_below(n)
        .into_iter()
        .filter(|s| !live.contains(s))
        .collect();
    let include = params.p_bar();
    let exclude = params.p().clone();
    let mut total = T::zero();
    for mask in 0..1u64 << rest.len() {
        let filler = StringSet::with_members(
            n,
            rest.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, s)| *s),
        )
        .unwrap();
        let image = psi(&OverlayInput {
            live: live.clone(),
            filler,
            depth: n,
        });
        if image == *tree {
            let k = mask.count_ones();
            total = total
                + include.powu(k) * exclude.powu(rest.len() as u32 - k);
        }
    }
    Ok(skeleton_weight * total)
}

/// One comparison row of the verification report.
#[derive(Clone, Debug, Serialize)]
pub struct PreservationRow {
    #[serde(rename = "T")]
    pub tree: String,
    #[serde(rename = "T'")]
    pub live: String,
    pub pushforward: Prob,
    pub conditioned: Prob,
    pub equal: bool,
}

/// Result of checking every valid pair at one depth.
#[derive(Clone, Debug, Serialize)]
pub struct PreservationReport {
    pub schema_version: u32,
    pub depth: u32,
    pub gamma: f64,
    pub exact: bool,
    pub rows: Vec<PreservationRow>,
    pub total_pushforward: Prob,
    pub total_conditioned: Prob,
    pub pass: bool,
}

/// Float-mode tolerance for row equality; rational mode demands exact
/// equality with no masking.
pub const FLOAT_EQUALITY_TOL: f64 = 1e-12;

/// For every valid pair (pattern, extendible part) at depth n, compare
/// the pushforward of the product law under the overlay with the
/// survival-conditioned law. Exact equality is required in rational mode.
pub fn verify_measure_preservation<T: Scalar>(
    n: u32,
    params: &SurvivalParams<T>,
) -> Result<PreservationReport> {
    if n > MAX_SUBSET_ENUM_DEPTH {
        return Err(Error::DepthCeiling {
            requested: n,
            max: MAX_SUBSET_ENUM_DEPTH,
            context: "filler subset enumeration",
        });
    }
    let trees = tree_patterns(n);
    let universe = enumerate_below(n);
    let include = params.p_bar();
    let exclude = params.p().clone();

    // Group the filler enumeration by skeleton: one sweep per valid
    // extendible shape accumulates pushforward mass into pair buckets.
    let mut pushforward: BTreeMap<(TreePattern, TreePattern), T> = BTreeMap::new();
    for live in trees.iter().filter(|t| t.has_spanning_leaves(n)) {
        let skeleton_weight = florida_pattern_prob(live, n, params)?;
        let rest: Vec<BinaryString> = universe
            .iter()
            .filter(|s| !live.contains(s))
            .copied()
            .collect();
        for mask in 0..1u64 << rest.len() {
            let filler = StringSet::with_members(
                n,
                rest.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, s)| *s),
            )
            .unwrap();
            let image = psi(&OverlayInput {
                live: live.clone(),
                filler,
                depth: n,
            });
            let k = mask.count_ones();
            let mass = skeleton_weight.clone()
                * include.powu(k)
                * exclude.powu(rest.len() as u32 - k);
            let slot = pushforward
                .entry((image, live.clone()))
                .or_insert_with(T::zero);
            *slot = slot.clone() + mass;
        }
    }

    let mut rows = Vec::new();
    let mut total_lhs = T::zero();
    let mut total_rhs = T::zero();
    let mut pass = true;
    for tree in &trees {
        for live in &trees {
            let pair = CylinderPair::new(tree.clone(), live.clone());
            if !pair.shape_valid(n) {
                continue;
            }
            let lhs = pushforward
                .get(&(tree.clone(), live.clone()))
                .cloned()
                .unwrap_or_else(T::zero);
            let rhs = conditioned_pair_prob(&pair, n, params)?;
            let equal = if T::EXACT {
                lhs == rhs
            } else {
                (lhs.to_f64() - rhs.to_f64()).abs() <= FLOAT_EQUALITY_TOL
            };
            pass &= equal;
            total_lhs = total_lhs + lhs.clone();
            total_rhs = total_rhs + rhs.clone();
            rows.push(PreservationRow {
                tree: tree.to_string(),
                live: live.to_string(),
                pushforward: lhs.into_prob(),
                conditioned: rhs.into_prob(),
                equal,
            });
        }
    }
    Ok(PreservationReport {
        schema_version: SCHEMA_VERSION,
        depth: n,
        gamma: params.gamma(),
        exact: T::EXACT,
        rows,
        total_pushforward: total_lhs.into_prob(),
        total_conditioned: total_rhs.into_prob(),
        pass,
    })
}

/// One overlay draw: an independent skeleton and filler, and the tree
/// they combine into. The skeleton is always contained in the result.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlaySample {
    pub live: TreePattern,
    pub filler: StringSet,
    pub tree: TreePattern,
}

pub fn overlay_sample(cfg: &SampleConfig, replicate: u64) -> Result<OverlaySample> {
    let live = sample_florida(cfg, replicate)?;
    let filler = sample_filler(cfg, replicate);
    let tree = psi(&OverlayInput {
        live: live.clone(),
        filler: filler.clone(),
        depth: cfg.depth,
    });
    Ok(OverlaySample { live, filler, tree })
}
