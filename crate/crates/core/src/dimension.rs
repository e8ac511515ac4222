//! Ultrametric distance, gamma-energy of cylinder measures, scheduled
//! split measures, periodic forced-bit trees with cover counting, and
//! Bernoulli entropy threshold analytics.
//!
//! Energy is computed through the neighbor-cylinder expansion: the level-n
//! contribution is 2^{n gamma} times the sum over strings of length n+1
//! of mass(sigma) * mass(neighbor of sigma). For measures built from a
//! split schedule (equal split at scheduled free positions, forced 0
//! elsewhere) this collapses to one closed-form term per free level, so
//! partial sums to large depths cost one multiply per level.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::SCHEMA_VERSION;
use crate::strings::BinaryString;

/// 2^x, hitting exact powers of two on integer exponents.
fn pow2(x: f64) -> f64 {
    if x.fract() == 0.0 && x.abs() < 1000.0 {
        2.0f64.powi(x as i32)
    } else {
        x.exp2()
    }
}

/// Distance 2^{-(first disagreement index)} between distinct strings of
/// equal length. Equal strings are rejected: the energy integrand blows
/// up on the diagonal and callers handle it analytically.
pub fn ultrametric(x: &BinaryString, y: &BinaryString) -> Result<f64> {
    if x.len() != y.len() || x == y {
        return Err(Error::UltrametricUndefined);
    }
    let first_diff = (0..x.len()).find(|&i| x.bit(i) != y.bit(i)).unwrap();
    Ok(pow2(-(first_diff as f64)))
}

/// Positions at which a split-schedule measure splits its mass in half;
/// all other positions force bit 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitSchedule {
    /// Strictly increasing split positions, covering [0, horizon).
    positions: Vec<u32>,
    horizon: u32,
}

impl SplitSchedule {
    /// Splits at the even positions 0, 2, 4, ...; the k-th split sits at
    /// level 2k.
    pub fn even_levels(horizon: u32) -> Self {
        SplitSchedule {
            positions: (0..horizon).step_by(2).collect(),
            horizon,
        }
    }

    /// The even schedule stretched by a logarithmic correction: the k-th
    /// split sits at ceil(2k - 2(1 + epsilon) log2 k), bumped upward
    /// where the early non-monotone values collide. The correction makes
    /// the gamma = 1/2 energy series summable (terms of order
    /// k^{-(1+epsilon)}) while the schedule still grows like 2k.
    pub fn stretched(epsilon: f64, horizon: u32) -> Result<Self> {
        if !(0.0 < epsilon && epsilon < 1.0) {
            return Err(Error::BadEpsilon { epsilon });
        }
        let mut positions = vec![0u32];
        let mut k = 1u64;
        loop {
            let raw = 2.0 * k as f64 - 2.0 * (1.0 + epsilon) * (k as f64).log2();
            let pos = (raw.ceil().max(0.0) as u32).max(positions.last().unwrap() + 1);
            if pos >= horizon {
                break;
            }
            positions.push(pos);
            k += 1;
        }
        Ok(SplitSchedule { positions, horizon })
    }

    /// Free exactly where the periodic pattern allows a choice.
    pub fn periodic(z: &ZPattern, horizon: u32) -> Self {
        SplitSchedule {
            positions: (0..horizon).filter(|&i| z.member(i)).collect(),
            horizon,
        }
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    pub fn is_free(&self, position: u32) -> bool {
        debug_assert!(position < self.horizon);
        self.positions.binary_search(&position).is_ok()
    }

    /// Number of free positions strictly below `len`.
    pub fn free_before(&self, len: u32) -> u32 {
        self.positions.partition_point(|&p| p < len) as u32
    }

    /// The k-th term of the energy series: 2^{position(k) gamma} 2^{-(k+1)}.
    pub fn energy_term(&self, k: usize, gamma: f64) -> f64 {
        pow2(self.positions[k] as f64 * gamma - (k as f64 + 1.0))
    }

    /// The first `count` energy terms (requires the schedule to hold that
    /// many splits within its horizon).
    pub fn energy_terms(&self, gamma: f64, count: usize) -> Vec<f64> {
        assert!(
            count <= self.positions.len(),
            "schedule holds {} splits below horizon {}, requested {count}",
            self.positions.len(),
            self.horizon
        );
        (0..count).map(|k| self.energy_term(k, gamma)).collect()
    }
}

#[derive(Clone, Debug)]
enum MeasureKind {
    Uniform,
    Bernoulli { p: f64 },
    Split { schedule: Arc<SplitSchedule> },
}

/// A measure on Cantor space given by its mass on cylinders, defined for
/// all strings up to a depth horizon. Conservation
/// mass(w) = mass(w0) + mass(w1) holds by construction for every kind.
#[derive(Clone, Debug)]
pub struct CylinderMeasure {
    tag: String,
    horizon: u32,
    kind: MeasureKind,
}

impl CylinderMeasure {
    pub fn uniform(horizon: u32) -> Self {
        CylinderMeasure {
            tag: "uniform".into(),
            horizon,
            kind: MeasureKind::Uniform,
        }
    }

    pub fn bernoulli(p: f64, horizon: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability { value: p });
        }
        Ok(CylinderMeasure {
            tag: format!("bernoulli({p})"),
            horizon,
            kind: MeasureKind::Bernoulli { p },
        })
    }

    fn from_schedule(tag: String, schedule: SplitSchedule) -> Self {
        CylinderMeasure {
            tag,
            horizon: schedule.horizon(),
            kind: MeasureKind::Split {
                schedule: Arc::new(schedule),
            },
        }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn schedule(&self) -> Option<&SplitSchedule> {
        match &self.kind {
            MeasureKind::Split { schedule } => Some(schedule),
            _ => None,
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len as u32 > self.horizon {
            return Err(Error::HorizonExceeded {
                tag: self.tag.clone(),
                horizon: self.horizon,
                needed: len as u32,
            });
        }
        Ok(())
    }

    /// Mass of the cylinder at `w`.
    pub fn mass(&self, w: &BinaryString) -> Result<f64> {
        self.check_len(w.len())?;
        Ok(match &self.kind {
            MeasureKind::Uniform => pow2(-(w.len() as f64)),
            MeasureKind::Bernoulli { p } => {
                let ones = (0..w.len()).filter(|&i| w.bit(i) == 1).count() as i32;
                let zeros = w.len() as i32 - ones;
                p.powi(ones) * (1.0 - p).powi(zeros)
            }
            MeasureKind::Split { schedule } => {
                if self.support_contains(w)? {
                    pow2(-(schedule.free_before(w.len() as u32) as f64))
                } else {
                    0.0
                }
            }
        })
    }

    /// Exact dyadic mass, available for the uniform and split kinds.
    pub fn mass_exact(&self, w: &BinaryString) -> Result<Option<BigRational>> {
        self.check_len(w.len())?;
        let dyadic = |k: u32| {
            BigRational::new(BigInt::one(), BigInt::from(2u64).pow(k))
        };
        Ok(match &self.kind {
            MeasureKind::Uniform => Some(dyadic(w.len() as u32)),
            MeasureKind::Bernoulli { .. } => None,
            MeasureKind::Split { schedule } => {
                if self.support_contains(w)? {
                    Some(dyadic(schedule.free_before(w.len() as u32)))
                } else {
                    Some(BigRational::new(BigInt::from(0), BigInt::one()))
                }
            }
        })
    }

    /// Whether the cylinder at `w` carries positive mass.
    pub fn support_contains(&self, w: &BinaryString) -> Result<bool> {
        self.check_len(w.len())?;
        Ok(match &self.kind {
            MeasureKind::Uniform => true,
            MeasureKind::Bernoulli { p } => (0..w.len()).all(|i| {
                let bit = w.bit(i);
                (bit == 1 && *p > 0.0) || (bit == 0 && *p < 1.0)
            }),
            MeasureKind::Split { schedule } => {
                (0..w.len()).all(|i| schedule.is_free(i as u32) || w.bit(i) == 0)
            }
        })
    }

    /// The largest mass among strings of the given length, with a string
    /// attaining it.
    pub fn max_mass_at(&self, len: u32) -> Result<(f64, BinaryString)> {
        self.check_len(len as usize)?;
        Ok(match &self.kind {
            MeasureKind::Uniform => (
                pow2(-(len as f64)),
                BinaryString::from_bits(len as usize, 0).unwrap(),
            ),
            MeasureKind::Bernoulli { p } => {
                let bits = if *p >= 0.5 { (1u64 << len) - 1 } else { 0 };
                (
                    p.max(1.0 - p).powi(len as i32),
                    BinaryString::from_bits(len as usize, bits).unwrap(),
                )
            }
            MeasureKind::Split { schedule } => (
                pow2(-(schedule.free_before(len) as f64)),
                BinaryString::from_bits(len as usize, 0).unwrap(),
            ),
        })
    }

    /// The level-n energy contribution 2^{n gamma} * sum over strings of
    /// length n+1 of mass * neighbor mass, in closed form per kind.
    pub fn level_energy_increment(&self, level: u32, gamma: f64) -> Result<f64> {
        self.check_len(level as usize + 1)?;
        Ok(match &self.kind {
            // 2^{n+1} strings, each mass 2^{-(n+1)}, neighbor the same.
            MeasureKind::Uniform => pow2(level as f64 * gamma - (level as f64 + 1.0)),
            // Sum over parents of 2 p (1-p) mass(parent)^2, and the sum of
            // squared masses at level n is (p^2 + (1-p)^2)^n.
            MeasureKind::Bernoulli { p } => {
                let q = 1.0 - p;
                pow2(level as f64 * gamma)
                    * 2.0
                    * p
                    * q
                    * (p * p + q * q).powi(level as i32)
            }
            // Forced levels contribute nothing (the neighbor is off the
            // support); the k-th free level contributes its series term.
            MeasureKind::Split { schedule } => {
                if schedule.is_free(level) {
                    let k = schedule.free_before(level) as f64;
                    pow2(level as f64 * gamma - (k + 1.0))
                } else {
                    0.0
                }
            }
        })
    }
}

/// Partial gamma-energy: the sum of level contributions for levels < depth.
pub fn gamma_energy_partial(mu: &CylinderMeasure, gamma: f64, depth: u32) -> Result<f64> {
    let mut total = 0.0;
    for level in 0..depth {
        total += mu.level_energy_increment(level, gamma)?;
    }
    Ok(total)
}

/// The level contributions themselves, for tables and decay checks.
pub fn energy_increments(mu: &CylinderMeasure, gamma: f64, depth: u32) -> Result<Vec<f64>> {
    (0..depth)
        .map(|level| mu.level_energy_increment(level, gamma))
        .collect()
}

/// Which split measure to build.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SplitVariant {
    /// Split at even levels, force 0 at odd levels.
    EvenLevels,
    /// Stretched schedule with logarithmic correction.
    Stretched { epsilon: f64 },
}

/// The dimension-one-half measure family: equal split at scheduled
/// positions, forced 0 elsewhere. The plain variant has infinite
/// gamma-energy exactly at gamma = 1/2; the stretched variant's
/// gamma = 1/2 energy series converges.
pub fn split_measure(variant: SplitVariant, horizon: u32) -> Result<CylinderMeasure> {
    Ok(match variant {
        SplitVariant::EvenLevels => CylinderMeasure::from_schedule(
            "even-split".into(),
            SplitSchedule::even_levels(horizon),
        ),
        SplitVariant::Stretched { epsilon } => CylinderMeasure::from_schedule(
            format!("stretched-split({epsilon})"),
            SplitSchedule::stretched(epsilon, horizon)?,
        ),
    })
}

/// Periodic membership rule: position i is free exactly when
/// i mod q < r.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ZPattern {
    q: u32,
    r: u32,
}

impl ZPattern {
    pub fn new(q: u32, r: u32) -> Result<Self> {
        if r == 0 || r >= q {
            return Err(Error::BadPeriodPattern { q, r });
        }
        Ok(ZPattern { q, r })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn member(&self, i: u32) -> bool {
        i % self.q < self.r
    }

    /// Whether `w` lies on the tree that forces bit 0 wherever the
    /// pattern is absent.
    pub fn tree_contains(&self, w: &BinaryString) -> bool {
        (0..w.len()).all(|i| self.member(i as u32) || w.bit(i) == 0)
    }
}

/// Both routes to the number of strings of length m*q on the periodic
/// tree: the closed form 2^{m*r}, and direct enumeration when feasible.
#[derive(Clone, Debug, Serialize)]
pub struct TzCount {
    pub blocks: u32,
    pub closed_form: u64,
    pub enumerated: Option<u64>,
}

impl TzCount {
    pub fn agree(&self) -> bool {
        self.enumerated.map(|e| e == self.closed_form).unwrap_or(true)
    }
}

/// Count strings of length m*q on the periodic tree. Enumeration walks
/// all 2^{m q} strings when that is small enough; the closed form counts
/// one free choice per free position, 2^{m r}.
pub fn tz_tree_count(z: &ZPattern, blocks: u32) -> TzCount {
    let len = blocks * z.q();
    let closed_form = 1u64 << (blocks * z.r());
    let enumerated = if len <= 20 {
        Some(
            (0..1u64 << len)
                .filter(|&bits| {
                    let w = BinaryString::from_bits(len as usize, bits).unwrap();
                    z.tree_contains(&w)
                })
                .count() as u64,
        )
    } else {
        None
    };
    TzCount {
        blocks,
        closed_form,
        enumerated,
    }
}

/// The natural measure on the periodic tree: split where the pattern is
/// free, forced 0 elsewhere. Its support is exactly the tree.
pub fn tz_measure(z: &ZPattern, horizon: u32) -> CylinderMeasure {
    CylinderMeasure::from_schedule(
        format!("tz({},{})", z.q(), z.r()),
        SplitSchedule::periodic(z, horizon),
    )
}

/// Result of checking a mass bound hypothesis and the energy bound it
/// implies.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyBoundReport {
    pub schema_version: u32,
    pub tag: String,
    pub gamma: f64,
    pub c_r: f64,
    /// c_R * sum over n of 2^{-gamma - penalty(n+1)}.
    pub c_hat: f64,
    pub depth: u32,
    pub max_partial: f64,
    pub pass: bool,
}

/// Verify mass(w) <= c_R 2^{-|w| gamma - penalty(|w|)} for all strings to
/// the measure's horizon, then check that every partial energy stays
/// below the implied constant c_hat. The penalty must be summable
/// (callers supply one with finite sum of 2^{-penalty(n)}).
pub fn energy_bound_check(
    mu: &CylinderMeasure,
    gamma: f64,
    penalty: &dyn Fn(u32) -> f64,
    c_r: f64,
) -> Result<EnergyBoundReport> {
    let depth = mu.horizon();
    for len in 0..=depth {
        let (mass, witness) = mu.max_mass_at(len)?;
        let bound = c_r * pow2(-(len as f64) * gamma - penalty(len));
        if mass > bound * (1.0 + 1e-12) {
            return Err(Error::MassBoundViolation {
                sigma: witness,
                mass,
                bound,
            });
        }
    }
    let mut c_hat = 0.0;
    for n in 0..1_000_000u32 {
        let term = pow2(-gamma - penalty(n + 1));
        c_hat += term;
        if term < 1e-18 * c_hat.max(1.0) {
            break;
        }
    }
    c_hat *= c_r;
    let mut max_partial = 0.0f64;
    let mut running = 0.0;
    for level in 0..depth {
        running += mu.level_energy_increment(level, gamma)?;
        max_partial = max_partial.max(running);
    }
    Ok(EnergyBoundReport {
        schema_version: SCHEMA_VERSION,
        tag: mu.tag().to_string(),
        gamma,
        c_r,
        c_hat,
        depth,
        max_partial,
        pass: max_partial <= c_hat * (1.0 + 1e-12),
    })
}

/// Binary entropy -(p log2 p + (1-p) log2 (1-p)), with 0 log 0 = 0.
pub fn bernoulli_entropy(p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "bias outside [0,1]");
    let part = |x: f64| if x == 0.0 { 0.0 } else { x * x.log2() };
    -(part(p) + part(1.0 - p))
}

/// The open interval of biases whose entropy exceeds gamma, computed by
/// bisecting p^p (1-p)^{1-p} = 2^{-gamma} (equivalently entropy = gamma)
/// on both sides of 1/2.
pub fn bernoulli_member_interval(gamma: f64) -> Result<(f64, f64)> {
    if !(0.0 < gamma && gamma < 1.0) {
        return Err(Error::InvalidGamma { gamma });
    }
    // entropy is strictly increasing on [0, 1/2] and decreasing on
    // [1/2, 1], with range [0, 1] on each side
    let bisect = |mut lo: f64, mut hi: f64, rising: bool| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let below = bernoulli_entropy(mid) < gamma;
            if below == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    Ok((bisect(0.0, 0.5, true), bisect(0.5, 1.0, false)))
}
