//! Transitions between top-level stable classes and the optimization over
//! decision trees.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::classes::{Outcome, Resolver, StableClasses};
use crate::rational::{self, Rational};

/// Query of one orbit representative from one class, with every outcome run
/// through the forced-query closure. Independent of `alpha`.
#[derive(Clone, Debug, Default)]
pub(crate) struct Action {
    pub leaf: u32,
    pub dq: u128,
    pub dm: u64,
    /// `(class, multiplicity)`, merged per class.
    pub succ: Vec<(u32, u64)>,
}

pub(crate) fn class_actions(classes: &StableClasses, resolver: &mut Resolver<'_>, class: usize) -> Vec<Action> {
    let k = classes.k();
    let rep = &classes.levels[k as usize].reps[class];
    let mut actions = Vec::new();
    let mut branches = Vec::new();
    for leaf in classes.orbits(k, class) {
        let mut action = Action { leaf: leaf as u32, ..Action::default() };
        for a in 0..2u8 {
            let (w, sens, min0) = resolver.leaf_outcome(rep, leaf, a);
            if w == 0 {
                continue;
            }
            action.dq += sens;
            action.dm += u64::try_from(min0).expect("fits");
            let mut cfg = rep.clone();
            cfg[leaf] = if a == 0 { super::classes::N0 } else { super::classes::N1 };
            branches.clear();
            action.dq += resolver.resolve(&cfg, 1, &mut branches).expect("reachable outcome is consistent");
            for b in &branches {
                if let Outcome::Stable(c) = b.outcome {
                    match action.succ.iter_mut().find(|(s, _)| *s == c) {
                        Some(e) => e.1 += b.multiplicity,
                        None => action.succ.push((c, b.multiplicity)),
                    }
                }
            }
        }
        action.succ.sort_unstable();
        actions.push(action);
    }
    actions
}

/// Flat transition table for all classes at the top height.
pub(crate) struct Transitions {
    /// `start[c]..start[c + 1]` indexes the actions of class `c`.
    pub start: Vec<usize>,
    pub leaf: Vec<u32>,
    pub dq: Vec<u128>,
    pub dm: Vec<u64>,
    pub succ_start: Vec<usize>,
    pub succ_class: Vec<u32>,
    pub succ_mult: Vec<u64>,
}

impl Transitions {
    pub fn build(classes: &StableClasses, progress: &(dyn Fn(usize, usize) + Sync)) -> Self {
        let k = classes.k();
        let n = classes.count(k);
        let mut t = Transitions {
            start: vec![0],
            leaf: Vec::new(),
            dq: Vec::new(),
            dm: Vec::new(),
            succ_start: vec![0],
            succ_class: Vec::new(),
            succ_mult: Vec::new(),
        };
        let chunk = 4096;
        let mut done = 0;
        while done < n {
            let end = (done + chunk).min(n);
            let batch: Vec<Vec<Action>> = (done..end)
                .into_par_iter()
                .map_init(|| Resolver::new(classes), |r, c| class_actions(classes, r, c))
                .collect();
            for actions in batch {
                for a in actions {
                    t.leaf.push(a.leaf);
                    t.dq.push(a.dq);
                    t.dm.push(a.dm);
                    for (c, m) in a.succ {
                        t.succ_class.push(c);
                        t.succ_mult.push(m);
                    }
                    t.succ_start.push(t.succ_class.len());
                }
                t.start.push(t.leaf.len());
            }
            done = end;
            progress(done, n);
        }
        t
    }

    pub fn actions(&self, class: usize) -> std::ops::Range<usize> {
        self.start[class]..self.start[class + 1]
    }

    pub fn successors(&self, action: usize) -> impl Iterator<Item = (u32, u64)> + '_ {
        let r = self.succ_start[action]..self.succ_start[action + 1];
        self.succ_class[r.clone()].iter().copied().zip(self.succ_mult[r].iter().copied())
    }

    pub fn action_count(&self) -> usize {
        self.leaf.len()
    }
}

/// Scores `q Q - 2^k p M` for `alpha = p / q`; machine integers when they
/// cannot overflow, big integers otherwise.
#[derive(Clone, Debug)]
pub(crate) enum Scorer {
    Small { p: i128, q: i128, two_k: i128 },
    Big { p: BigInt, q: BigInt, two_k: BigInt },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Score {
    Small(i128),
    Big(BigInt),
}

impl Scorer {
    pub fn new(alpha: &Rational, k: u32) -> Self {
        let (p, q) = (alpha.numer(), alpha.denom());
        // |Q| < 2^72 and |M| < 2^64 for k <= 4, so 2^50 keeps products in range.
        let limit = BigInt::from(1u64 << 50);
        if p < &limit && q < &limit {
            Scorer::Small { p: p.to_i128().unwrap(), q: q.to_i128().unwrap(), two_k: 1 << k }
        } else {
            Scorer::Big { p: p.clone(), q: q.clone(), two_k: BigInt::from(1u32) << k }
        }
    }

    pub fn score(&self, qv: u128, mv: u64) -> Score {
        match self {
            Scorer::Small { p, q, two_k } => Score::Small(q * qv as i128 - two_k * p * mv as i128),
            Scorer::Big { p, q, two_k } => Score::Big(q * BigInt::from(qv) - two_k * p * BigInt::from(mv)),
        }
    }
}

pub(crate) const STOP: u32 = u32::MAX;

/// Optimal `(Q, M, action)` per class for one `alpha`.
pub(crate) struct Optimum {
    pub q: Vec<u128>,
    pub m: Vec<u64>,
    pub action: Vec<u32>,
}

/// Classes grouped by unqueried-leaf count, fewest first; successors always
/// lie in an earlier group.
pub(crate) fn order_groups(classes: &StableClasses) -> Vec<Vec<u32>> {
    let k = classes.k();
    let unq = &classes.levels[k as usize].unq;
    let max = unq.iter().copied().max().unwrap_or(0) as usize;
    let mut groups = vec![Vec::new(); max + 1];
    for (c, &u) in unq.iter().enumerate() {
        groups[u as usize].push(c as u32);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

pub(crate) fn optimize(
    t: &Transitions,
    groups: &[Vec<u32>],
    root: usize,
    n: usize,
    scorer: &Scorer,
) -> Optimum {
    let mut opt = Optimum { q: vec![0; n], m: vec![0; n], action: vec![STOP; n] };
    for group in groups {
        let results: Vec<(u128, u64, u32)> = group
            .par_iter()
            .map(|&c| {
                let c = c as usize;
                let mut best: Option<(Score, u128, u64, u32)> = if c == root {
                    None
                } else {
                    Some((scorer.score(0, 0), 0, 0, STOP))
                };
                for a in t.actions(c) {
                    let mut qv = t.dq[a];
                    let mut mv = t.dm[a];
                    for (s, mult) in t.successors(a) {
                        qv += mult as u128 * opt.q[s as usize];
                        mv += mult * opt.m[s as usize];
                    }
                    let sc = scorer.score(qv, mv);
                    if best.as_ref().is_none_or(|b| sc > b.0) {
                        best = Some((sc, qv, mv, a as u32));
                    }
                }
                let (_, qv, mv, a) = best.expect("the root class always has a query");
                (qv, mv, a)
            })
            .collect();
        for (&c, (qv, mv, a)) in group.iter().zip(results) {
            opt.q[c as usize] = qv;
            opt.m[c as usize] = mv;
            opt.action[c as usize] = a;
        }
    }
    opt
}

/// `rho = Q / (2^k cnt) - alpha M / cnt`.
pub(crate) fn rho(alpha: &Rational, k: u32, qv: u128, mv: u64, cnt: u128) -> Rational {
    let cnt = rational::from_u128(cnt);
    if cnt.is_zero() {
        return Rational::zero();
    }
    rational::from_u128(qv) / (rational::from_u128(1u128 << k) * &cnt) - alpha * rational::from_u128(mv as u128) / cnt
}
