//! Exact finite-depth cylinder probabilities for the i.i.d. process, the
//! Florida process, the survival-conditioned law on pairs (pattern,
//! extendible part), and the extendible-part marginal, with horizon
//! approximations that serve as convergence oracles.
//!
//! The conditioned pair law: a depth-n pattern T occurs with the product
//! probability p^{|T|} (1-p)^{|boundary|}; given T, each top-level node
//! independently carries an infinite subtree with probability 1 - e^2;
//! the extendible part is the downward closure of the surviving top
//! nodes; the whole thing is conditioned on survival (mass 1 - e). The
//! worked computation behind the per-top-node factor: a present node's
//! two child lines are independent fresh processes, each dying with
//! probability (1-p) + p e^2 = e, so the subtree is finite with
//! probability e^2.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{extinction_recursion, SurvivalParams};
use crate::prob::{Prob, Scalar};
use crate::strings::{
    boundary, tree_patterns, StringSet, TreePattern, MAX_PATTERN_ENUM_DEPTH,
};

fn check_depth(tree: &TreePattern, n: u32) {
    debug_assert!(
        tree.iter().all(|s| (s.len() as u32) < n),
        "pattern has members at or beyond depth {n}"
    );
}

/// P(induced tree restricted to depth n equals `tree`) under the i.i.d.
/// process: present nodes contribute p each, minimal excluded nodes 1-p.
pub fn gw_pattern_prob<T: Scalar>(tree: &TreePattern, n: u32, params: &SurvivalParams<T>) -> T {
    check_depth(tree, n);
    let excluded = boundary(tree, n).len() as u32;
    params.p().powu(tree.len() as u32) * params.p_bar().powu(excluded)
}

/// P(depth-n Florida pattern equals `tree`): product over internal nodes
/// of (2p-1) when both children are present and (1-p) when exactly one
/// is. Zero for patterns outside the support (no root, or a childless
/// internal node).
pub fn florida_pattern_prob<T: Scalar>(
    tree: &TreePattern,
    n: u32,
    params: &SurvivalParams<T>,
) -> Result<T> {
    check_depth(tree, n);
    if !params.is_supercritical() {
        return Err(Error::NotSupercritical {
            p: params.p().to_f64(),
        });
    }
    if !tree.contains(&crate::strings::BinaryString::empty())
        || tree.has_childless_internal_node(n)
    {
        return Ok(T::zero());
    }
    let one_child = params.p_bar();
    let both = params.p().clone() + params.p().clone() - T::one();
    let mut prob = T::one();
    for s in tree.iter() {
        if (s.len() as u32) + 1 >= n {
            continue;
        }
        let left = tree.contains(&s.child(0));
        let right = tree.contains(&s.child(1));
        prob = prob
            * match (left, right) {
                (true, true) => both.clone(),
                (true, false) | (false, true) => one_child.clone(),
                (false, false) => unreachable!("childless internal nodes were rejected"),
            };
    }
    Ok(prob)
}

/// A depth-n pattern together with a candidate extendible part.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CylinderPair {
    pub tree: TreePattern,
    pub live: TreePattern,
}

impl CylinderPair {
    pub fn new(tree: TreePattern, live: TreePattern) -> Self {
        CylinderPair { tree, live }
    }

    /// The shape an extendible part must have: contained in the pattern,
    /// nonempty, and spanning (every member extends to the top level
    /// n-1 inside it). Invalid shapes carry probability 0.
    pub fn shape_valid(&self, n: u32) -> bool {
        self.live.as_set().is_subset(self.tree.as_set()) && self.live.has_spanning_leaves(n)
    }
}

/// The survival-conditioned probability that the depth-n pattern is
/// `pair.tree` and the extendible part restricted to depth n is
/// `pair.live`.
pub fn conditioned_pair_prob<T: Scalar>(
    pair: &CylinderPair,
    n: u32,
    params: &SurvivalParams<T>,
) -> Result<T> {
    check_depth(&pair.tree, n);
    check_depth(&pair.live, n);
    let e = params.extinction_probability()?;
    if !pair.shape_valid(n) {
        return Ok(T::zero());
    }
    let e2 = e.clone() * e.clone();
    let top = n - 1;
    let live_top = pair.live.level_count(top) as u32;
    let dead_top = pair.tree.level_count(top) as u32 - live_top;
    let survive = T::one() - e2.clone();
    let value = gw_pattern_prob(&pair.tree, n, params)
        * survive.powu(live_top)
        * e2.powu(dead_top)
        / (T::one() - e);
    Ok(value)
}

/// Finite-horizon version of [`conditioned_pair_prob`], an exact
/// probability in its own right: "extendible" is proxied by "has a
/// descendant at level L", whose per-top-node failure probability is
/// ext_{L-n}^2, and the conditioning event is "the tree reaches level L"
/// with probability 1 - ext_L. Converges to the conditioned law as
/// L grows, geometrically with ratio 2 p e; at L = n the proxy uses
/// ext_0 per leaf.
pub fn conditioned_pair_prob_horizon<T: Scalar>(
    pair: &CylinderPair,
    n: u32,
    horizon: u32,
    params: &SurvivalParams<T>,
) -> Result<T> {
    assert!(horizon >= n, "horizon must be at least the pattern depth");
    if !params.is_supercritical() {
        return Err(Error::NotSupercritical {
            p: params.p().to_f64(),
        });
    }
    if !pair.shape_valid(n) {
        return Ok(T::zero());
    }
    let x = extinction_recursion(params.p(), horizon - n);
    let death = x.clone() * x;
    let survive = T::one() - death.clone();
    let norm = T::one() - extinction_recursion(params.p(), horizon);
    let top = n - 1;
    let live_top = pair.live.level_count(top) as u32;
    let dead_top = pair.tree.level_count(top) as u32 - live_top;
    Ok(gw_pattern_prob(&pair.tree, n, params)
        * survive.powu(live_top)
        * death.powu(dead_top)
        / norm)
}

/// The same finite-horizon probability computed by full enumeration of
/// depth-(L+1) patterns, with no reference to the closed-form factors:
/// sums the i.i.d. pattern probabilities of every depth-(L+1) tree whose
/// restriction is `pair.tree` and whose top survivors (nodes at level
/// n-1 with a descendant at length L) generate exactly `pair.live`,
/// normalized by the total mass of trees reaching length L.
pub fn conditioned_pair_prob_horizon_enumerated<T: Scalar>(
    pair: &CylinderPair,
    n: u32,
    horizon: u32,
    params: &SurvivalParams<T>,
) -> Result<T> {
    assert!(horizon >= n);
    if horizon + 1 > MAX_PATTERN_ENUM_DEPTH {
        return Err(Error::DepthCeiling {
            requested: horizon + 1,
            max: MAX_PATTERN_ENUM_DEPTH,
            context: "pattern enumeration",
        });
    }
    if !params.is_supercritical() {
        return Err(Error::NotSupercritical {
            p: params.p().to_f64(),
        });
    }
    if !pair.shape_valid(n) {
        return Ok(T::zero());
    }
    let mut numerator = T::zero();
    let mut denominator = T::zero();
    for u in tree_patterns(horizon + 1) {
        let weight = gw_pattern_prob(&u, horizon + 1, params);
        if !u.reaches_level(horizon) {
            continue;
        }
        denominator = denominator + weight.clone();
        if restriction(&u, n) != *pair.tree.as_set() {
            continue;
        }
        if survivors_closure(&u, n, horizon) == *pair.live.as_set() {
            numerator = numerator + weight;
        }
    }
    Ok(numerator / denominator)
}

fn restriction(u: &TreePattern, n: u32) -> StringSet {
    let mut out = StringSet::new(n);
    for s in u.iter().filter(|s| (s.len() as u32) < n) {
        out.insert(*s).unwrap();
    }
    out
}

/// Downward closure of the level-(n-1) nodes of `u` that have a
/// descendant in `u` at length `deep`.
fn survivors_closure(u: &TreePattern, n: u32, deep: u32) -> StringSet {
    let mut out = StringSet::new(n);
    for top in u.level_members(n - 1) {
        let survives = u.level_members(deep).any(|t| top.is_prefix_of(t));
        if survives {
            for prefix in top.prefixes() {
                out.insert(prefix).unwrap();
            }
        }
    }
    out
}

/// Marginal law of the extendible part: sums the conditioned pair
/// probability over all depth-n trees containing `live`. By the
/// equivalence of the two models this equals the Florida pattern
/// probability of `live`.
pub fn live_marginal_prob<T: Scalar>(
    live: &TreePattern,
    n: u32,
    params: &SurvivalParams<T>,
) -> Result<T> {
    if n > MAX_PATTERN_ENUM_DEPTH {
        return Err(Error::DepthCeiling {
            requested: n,
            max: MAX_PATTERN_ENUM_DEPTH,
            context: "pattern enumeration",
        });
    }
    let mut total = T::zero();
    for tree in tree_patterns(n) {
        if !live.as_set().is_subset(tree.as_set()) {
            continue;
        }
        let pair = CylinderPair::new(tree, live.clone());
        total = total + conditioned_pair_prob(&pair, n, params)?;
    }
    Ok(total)
}

/// Horizon-L approximation of the distribution of the surviving child
/// set of the root, conditioned on survival: with x = ext_L, the branch
/// through each child reaches the horizon with probability 1 - x, so the
/// conditional triple ({left only}, {right only}, {both}) is
/// (x, x, 1-x) / (1+x). Limits as L grows: (1-p, 1-p, 2p-1).
pub fn conditional_child_distribution<T: Scalar>(
    params: &SurvivalParams<T>,
    horizon: u32,
) -> Result<[T; 3]> {
    if !params.is_supercritical() {
        return Err(Error::NotSupercritical {
            p: params.p().to_f64(),
        });
    }
    let x = extinction_recursion(params.p(), horizon);
    let norm = T::one() + x.clone();
    Ok([
        x.clone() / norm.clone(),
        x.clone() / norm.clone(),
        (T::one() - x) / norm,
    ])
}

/// One row of the per-pattern probability table emitted by the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct MeasureTableRow {
    pub n: u32,
    #[serde(rename = "T")]
    pub tree: String,
    #[serde(rename = "T'")]
    pub live: String,
    pub mu_c: Prob,
    pub mu_i: Prob,
    pub florida: Prob,
    pub gw: Prob,
}

/// The full table over every valid pair at depth n.
pub fn measure_table<T: Scalar>(n: u32, params: &SurvivalParams<T>) -> Result<Vec<MeasureTableRow>> {
    if n > MAX_PATTERN_ENUM_DEPTH {
        return Err(Error::DepthCeiling {
            requested: n,
            max: MAX_PATTERN_ENUM_DEPTH,
            context: "pattern enumeration",
        });
    }
    let trees = tree_patterns(n);
    let mut rows = Vec::new();
    for tree in &trees {
        let gw = gw_pattern_prob(tree, n, params);
        for live in &trees {
            let pair = CylinderPair::new(tree.clone(), live.clone());
            if !pair.shape_valid(n) {
                continue;
            }
            rows.push(MeasureTableRow {
                n,
                tree: tree.to_string(),
                live: live.to_string(),
                mu_c: conditioned_pair_prob(&pair, n, params)?.into_prob(),
                mu_i: live_marginal_prob(live, n, params)?.into_prob(),
                florida: florida_pattern_prob(live, n, params)?.into_prob(),
                gw: gw.clone().into_prob(),
            });
        }
    }
    Ok(rows)
}
