//! Stable-configuration dynamic program for the constants `alpha_k`.
//!
//! `alpha_k` is the largest ratio `(2^-k pi_q(C)) / pi_m(C)` over decision
//! trees `C` on `3^k` variables that query at least one variable, where for a
//! uniform 0-hard input `pi_q` is the expected number of sensitive bits read
//! and `pi_m` the probability of reading the absolute minority. For fixed
//! `alpha` the program maximizes `rho_alpha = 2^-k pi_q - alpha pi_m`; the
//! ratio of the optimizer then becomes the next `alpha`.
//!
//! Internally every statistic is an integer sum over completions, so the
//! program is exact and needs no fractions until the very end.

mod classes;
mod dp;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_traits::{Signed, Zero};

pub use classes::{stable_count_formula, Branch, Outcome, StableClasses};

use classes::{check_k, Resolver, N0, N1, UNQ};
use dp::{optimize, order_groups, rho, Scorer, Transitions, STOP};

use crate::error::{Error, Result};
use crate::formula::{pow3, Leaf};
use crate::rational::{self, Rational};

/// Partial assignment to the `3^k` leaves of a height-`k` instance, in
/// ordinary majority values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    k: u32,
    leaves: Vec<Option<bool>>,
}

impl Configuration {
    pub fn new(k: u32, leaves: Vec<Option<bool>>) -> Result<Self> {
        check_k(k, 0)?;
        let expected = pow3(k) as usize;
        if leaves.len() != expected {
            return Err(Error::LengthMismatch { expected, found: leaves.len() });
        }
        Ok(Configuration { k, leaves })
    }

    pub fn empty(k: u32) -> Result<Self> {
        Self::new(k, vec![None; pow3(k) as usize])
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn leaves(&self) -> &[Option<bool>] {
        &self.leaves
    }

    pub fn with(mut self, leaf: Leaf, value: bool) -> Result<Self> {
        let max = self.leaves.len() as u64;
        let slot = self
            .leaves
            .get_mut(leaf.offset() as usize)
            .ok_or(Error::LeafOutOfRange { leaf: leaf.one_based(), max })?;
        if slot.is_some() {
            return Err(Error::RepeatedQuery(leaf.one_based()));
        }
        *slot = Some(value);
        Ok(self)
    }

    fn negated(&self) -> Vec<u8> {
        let flip = self.k % 2 == 1;
        self.leaves
            .iter()
            .map(|l| match l {
                None => UNQ,
                Some(x) if *x != flip => N1,
                Some(_) => N0,
            })
            .collect()
    }
}

impl fmt::Display for Configuration {
    /// One character per leaf: `0`, `1` or `?`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.leaves {
            let c = match l {
                None => '?',
                Some(true) => '1',
                Some(false) => '0',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let leaves: Vec<Option<bool>> = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '?' | '.' | '_' => Ok(None),
                '0' => Ok(Some(false)),
                '1' => Ok(Some(true)),
                other => Err(Error::Parse(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<_>>()?;
        let k = (0..=4).find(|&k| pow3(k) as usize == leaves.len()).ok_or_else(|| {
            Error::Parse(format!("length {} is not 3^k for k <= 4", leaves.len()))
        })?;
        Configuration::new(k, leaves)
    }
}

/// One stable class with its bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalClass {
    pub height: u32,
    pub index: usize,
    pub key: String,
    /// Raw configurations in the orbit.
    pub members: u128,
    /// 0-hard completions of one member.
    pub completions: u128,
    pub unqueried: u32,
    pub stable: bool,
}

/// Forced-query closure of `config`: every branch ends in a stable class
/// or with the root value determined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    /// 0-hard completions of the input configuration.
    pub completions: u128,
    /// Sum over all completions of the sensitive bits read by forced queries.
    pub forced_sensitive: u128,
    pub branches: Vec<Branch>,
}

impl StableClasses {
    pub fn class(&self, height: u32, index: usize) -> CanonicalClass {
        let level = &self.levels[height as usize];
        CanonicalClass {
            height,
            index,
            key: self.key(height, index),
            members: level.members[index],
            completions: level.cnt[index][0],
            unqueried: level.unq[index],
            stable: true,
        }
    }

    pub fn classes(&self, height: u32) -> Vec<CanonicalClass> {
        (0..self.count(height)).map(|i| self.class(height, i)).collect()
    }

    pub fn resolve(&self, config: &Configuration) -> Result<Resolution> {
        if config.k != self.k() {
            return Err(Error::InvalidArgument(format!(
                "configuration height {} differs from {}",
                config.k,
                self.k()
            )));
        }
        let cfg = config.negated();
        let mut resolver = Resolver::new(self);
        let completions = resolver.root_stats(&cfg).cnt[0];
        let mut branches = Vec::new();
        let forced_sensitive = resolver.resolve(&cfg, 1, &mut branches)?;
        Ok(Resolution { completions, forced_sensitive, branches })
    }

    /// Class of a configuration that is already stable.
    pub fn classify(&self, config: &Configuration) -> Option<usize> {
        let cfg = config.negated();
        let mut resolver = Resolver::new(self);
        if !resolver.is_stable(&cfg) {
            return None;
        }
        resolver.classify_top(&cfg).map(|c| c as usize)
    }

    /// Whether a configuration admits no forced action and leaves the root
    /// undetermined.
    pub fn is_stable(&self, config: &Configuration) -> bool {
        Resolver::new(self).is_stable(&config.negated())
    }

    /// Representative of a class as a configuration.
    pub fn representative(&self, index: usize) -> Configuration {
        let flip = self.k() % 2 == 1;
        let leaves = self.levels[self.k() as usize].reps[index]
            .iter()
            .map(|&s| match s {
                UNQ => None,
                N1 => Some(!flip),
                _ => Some(flip),
            })
            .collect();
        Configuration { k: self.k(), leaves }
    }

    /// Index of the class with no queried leaf.
    pub fn empty_class(&self) -> usize {
        let full = pow3(self.k()) as u32;
        self.levels[self.k() as usize].unq.iter().position(|&u| u == full).expect("present")
    }
}

/// What an optimal tree does in a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Choice {
    Stop,
    /// Query this leaf of the class representative.
    Query(Leaf),
}

/// Optimal value and statistics for one stable class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpEntry {
    pub class: usize,
    /// `2^-k p_q - alpha p_m`.
    pub rho: Rational,
    /// Expected number of sensitive bits read from this class on.
    pub p_q: Rational,
    /// Probability that the absolute minority is read from this class on.
    pub p_m: Rational,
    pub choice: Choice,
}

/// Result of one optimization at a fixed `alpha`.
pub struct DpSolution<'a> {
    dp: &'a AlphaDp,
    pub alpha: Rational,
    opt: dp::Optimum,
}

impl DpSolution<'_> {
    pub fn entry(&self, class: usize) -> DpEntry {
        let k = self.dp.k();
        let cnt = self.dp.classes.levels[k as usize].cnt[class][0];
        let (qv, mv) = (self.opt.q[class], self.opt.m[class]);
        let choice = match self.opt.action[class] {
            STOP => Choice::Stop,
            a => Choice::Query(Leaf::from_offset(self.dp.transitions.leaf[a as usize] as u64)),
        };
        DpEntry {
            class,
            rho: rho(&self.alpha, k, qv, mv, cnt),
            p_q: rational::ratio_u128(qv, cnt),
            p_m: rational::ratio_u128(mv as u128, cnt),
            choice,
        }
    }

    /// Entry of the empty configuration, optimized over querying trees.
    pub fn root(&self) -> DpEntry {
        self.entry(self.dp.root)
    }

    /// `max rho_alpha` over trees that query at least one variable.
    pub fn max_rho(&self) -> Rational {
        self.root().rho
    }

    /// `alpha_C` of the optimizer: `p_q / (2^k p_m)`.
    pub fn optimizer_alpha(&self) -> Rational {
        let root = self.dp.root;
        rational::from_u128(self.opt.q[root])
            / (rational::from_u128(1u128 << self.dp.k()) * rational::from_u128(self.opt.m[root] as u128))
    }

    pub fn len(&self) -> usize {
        self.opt.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opt.q.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaResult {
    pub k: u32,
    pub alpha: Rational,
    pub n_k: u64,
    /// Every `alpha` that was optimized, starting from 0; the last is `alpha`.
    pub iterations: Vec<Rational>,
    pub elapsed_s: f64,
    /// More than ten iterations were needed.
    pub flagged: bool,
}

/// Stable classes plus the `alpha`-independent transition table at one
/// height.
pub struct AlphaDp {
    classes: StableClasses,
    transitions: Transitions,
    groups: Vec<Vec<u32>>,
    root: usize,
}

/// Stages reported while building and iterating.
#[derive(Clone, Debug)]
pub enum Progress {
    Classes { height: u32, count: usize },
    Transitions { done: usize, total: usize },
    Iteration { index: usize, alpha: Rational },
}

impl AlphaDp {
    pub fn build(k: u32) -> Result<Self> {
        Self::build_with_progress(k, &|_| {})
    }

    pub fn build_with_progress(k: u32, progress: &(dyn Fn(Progress) + Sync)) -> Result<Self> {
        check_k(k, 1)?;
        let classes = StableClasses::enumerate(k)?;
        for j in 0..=k {
            progress(Progress::Classes { height: j, count: classes.count(j) });
        }
        let transitions =
            Transitions::build(&classes, &|done, total| progress(Progress::Transitions { done, total }));
        let groups = order_groups(&classes);
        let root = classes.empty_class();
        Ok(AlphaDp { classes, transitions, groups, root })
    }

    pub fn k(&self) -> u32 {
        self.classes.k()
    }

    pub fn classes(&self) -> &StableClasses {
        &self.classes
    }

    pub fn action_count(&self) -> usize {
        self.transitions.action_count()
    }

    pub fn dp_optimize(&self, alpha: &Rational) -> Result<DpSolution<'_>> {
        if alpha.is_negative() {
            return Err(Error::InvalidArgument("alpha must be non-negative".into()));
        }
        let scorer = Scorer::new(alpha, self.k());
        let n = self.classes.count(self.k());
        let opt = optimize(&self.transitions, &self.groups, self.root, n, &scorer);
        Ok(DpSolution { dp: self, alpha: alpha.clone(), opt })
    }

    /// Fixed-point iteration from `alpha = 0` until `max rho = 0`.
    pub fn alpha(&self) -> Result<AlphaResult> {
        self.alpha_with_progress(&|_| {})
    }

    pub fn alpha_with_progress(&self, progress: &(dyn Fn(Progress) + Sync)) -> Result<AlphaResult> {
        let start = Instant::now();
        let mut alpha = Rational::zero();
        let mut iterations = Vec::new();
        loop {
            iterations.push(alpha.clone());
            progress(Progress::Iteration { index: iterations.len(), alpha: alpha.clone() });
            let sol = self.dp_optimize(&alpha)?;
            if sol.max_rho().is_zero() {
                break;
            }
            let next = sol.optimizer_alpha();
            assert!(next > alpha, "iteration must increase alpha");
            alpha = next;
        }
        Ok(AlphaResult {
            k: self.k(),
            n_k: self.classes.count(self.k()) as u64,
            flagged: iterations.len() > 10,
            alpha,
            iterations,
            elapsed_s: start.elapsed().as_secs_f64(),
        })
    }
}

/// Builds the program and iterates to `alpha_k`.
pub fn alpha(k: u32) -> Result<AlphaResult> {
    AlphaDp::build(k)?.alpha()
}

/// Stable classes of height `k`.
pub fn enumerate_stable(k: u32) -> Result<Vec<CanonicalClass>> {
    Ok(StableClasses::enumerate(k)?.classes(k))
}

#[cfg(test)]
mod tests;
