//! Survival-parameter arithmetic and extinction quantities shared by all
//! measure and sampling code.
//!
//! The supercritical process keeps each child of a present node with
//! probability p > 1/2 and dies out with probability e = (1-p)/p; a node
//! that is already present has a doomed subtree with probability e^2
//! (each of its two child lines is an independent fresh process that dies
//! with probability (1-p) + p*e^2 = e, so both die with probability e^2).



use crate::error::{Error, Result};
use crate::prob::{GammaSpec, Scalar};

/// gamma together with the survival parameter p = 2^{-gamma}.
#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalParams<T: Scalar> {
    gamma: f64,
    p: T,
}

impl<T: Scalar> SurvivalParams<T> {
    pub fn new(gamma: f64, p: T) -> Result<Self> {
        let pf = p.to_f64();
        if !(0.0..=1.0).contains(&pf) {
            return Err(Error::InvalidProbability { value: pf });
        }
        Ok(SurvivalParams { gamma, p })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn p(&self) -> &T {
        &self.p
    }

    pub fn p_bar(&self) -> T {
        T::one() - self.p.clone()
    }

    pub fn is_supercritical(&self) -> bool {
        self.p > T::from_ratio(1, 2)
    }

    fn require_supercritical(&self) -> Result<()> {
        if self.is_supercritical() {
            Ok(())
        } else {
            Err(Error::NotSupercritical {
                p: self.p.to_f64(),
            })
        }
    }

    /// Extinction probability e = (1-p)/p of the supercritical process.
    pub fn extinction_probability(&self) -> Result<T> {
        self.require_supercritical()?;
        Ok(self.p_bar() / self.p.clone())
    }

    /// e^2: the probability that a node already known to be present has a
    /// finite subtree.
    pub fn extinction_given_root(&self) -> Result<T> {
        let e = self.extinction_probability()?;
        Ok(e.clone() * e)
    }
}

impl SurvivalParams<f64> {
    pub fn from_gamma(spec: &GammaSpec) -> Self {
        SurvivalParams {
            gamma: spec.gamma(),
            p: spec.p_f64(),
        }
    }
}

impl SurvivalParams<num_rational::BigRational> {
    pub fn from_gamma_exact(spec: &GammaSpec) -> Result<Self> {
        Ok(SurvivalParams {
            gamma: spec.gamma(),
            p: spec.p_exact()?,
        })
    }
}

/// ext_L: the probability that the induced tree contains no string of
/// length L. ext_0 = 1-p and ext_{k+1} = (1-p) + p * ext_k^2; the limit is
/// the extinction probability.
pub fn extinction_recursion<T: Scalar>(p: &T, levels: u32) -> T {
    let p_bar = T::one() - p.clone();
    let mut ext = p_bar.clone();
    for _ in 0..levels {
        ext = p_bar.clone() + p.clone() * ext.clone() * ext;
    }
    ext
}

/// The same recursion with survival parameter 1-p in place of p: the
/// probability that the filler process (inclusion probability 1-p) has no
/// string of length L. Converges to 1 when p > 1/2.
pub fn subcritical_extinction<T: Scalar>(p: &T, levels: u32) -> T {
    let q = T::one() - p.clone();
    extinction_recursion(&q, levels)
}

/// r_k: the probability that a filler tree rooted at a fresh node contains
/// a chain to relative depth k. r_0 = 1, r_{k+1} = (1-p)(1 - (1-r_k)^2);
/// tends to 0 monotonically when p > 1/2.
pub fn subcritical_reach_prob<T: Scalar>(p: &T, depth: u32) -> T {
    let q = T::one() - p.clone();
    let mut r = T::one();
    for _ in 0..depth {
        let miss = T::one() - r;
        r = q.clone() * (T::one() - miss.clone() * miss);
    }
    r
}
