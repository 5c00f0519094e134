//! Stable classes, per-node completion counting and the forced-query closure.
//!
//! Everything here works in negated-majority space: a node at depth `d` with
//! majority value `x` gets `N = x xor (d mod 2)`. In the 0-world the root
//! has `N = 0`, every node on the minority path has `N = 0`, a node has
//! `N = b` iff exactly one of its children has `N = b`, and a leaf is
//! sensitive iff the `N` values on its path alternate `0, 1, 0, ...`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::formula::{hard_count, pow3};

/// Leaf states in negated-majority space.
pub(crate) const UNQ: u8 = 0;
pub(crate) const N0: u8 = 1;
pub(crate) const N1: u8 = 2;

/// Child code of a fully queried subtree with `N = 1`.
pub(crate) const FULL: u32 = 0;

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Stats {
    /// Completions of the subtree with `N = b`.
    pub cnt: [u128; 2],
    /// Sum over those completions of masked unqueried leaves whose path from
    /// this node alternates starting at `b`.
    pub sens: [u128; 2],
    /// Completions with `N = 0` whose minority leaf is masked and unqueried.
    pub min0: u128,
    pub unq: u32,
}

/// Flat node indexing for a tree of height `k`: leaves first, root last.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub k: u32,
    pub base: Vec<usize>,
    pub total: usize,
}

impl Layout {
    pub fn new(k: u32) -> Self {
        let mut base = Vec::new();
        let mut total = 0;
        for j in 0..=k {
            base.push(total);
            total += pow3(k - j) as usize;
        }
        Layout { k, base, total }
    }

    pub fn idx(&self, height: u32, offset: usize) -> usize {
        self.base[height as usize] + offset
    }

    pub fn root(&self) -> usize {
        self.total - 1
    }

    /// Bitmask of the unqueried leaves below a node.
    pub fn unqueried_mask(&self, cfg: &[u8], height: u32, offset: usize) -> u128 {
        let w = pow3(height) as usize;
        let mut m = 0u128;
        for (leaf, &state) in cfg.iter().enumerate().skip(offset * w).take(w) {
            if state == UNQ {
                m |= 1 << leaf;
            }
        }
        m
    }

    /// Bottom-up counts. `mask` selects the leaves counted by `sens` and
    /// `min0`; `fix` restricts one node to a value.
    pub fn analyze(&self, cfg: &[u8], mask: u128, fix: Option<(usize, u8)>, out: &mut [Stats]) {
        let apply = |s: &mut Stats, i: usize| {
            if let Some((j, v)) = fix {
                if i == j {
                    let o = 1 - v as usize;
                    s.cnt[o] = 0;
                    s.sens[o] = 0;
                    if v == 1 {
                        s.min0 = 0;
                    }
                }
            }
        };
        let leaves = pow3(self.k) as usize;
        for (i, &state) in cfg.iter().enumerate().take(leaves) {
            let mut s = match state {
                UNQ => {
                    let m = mask >> i & 1;
                    Stats { cnt: [1, 1], sens: [m, m], min0: m, unq: 1 }
                }
                N0 => Stats { cnt: [1, 0], ..Stats::default() },
                _ => Stats { cnt: [0, 1], ..Stats::default() },
            };
            apply(&mut s, i);
            out[i] = s;
        }
        for j in 1..=self.k {
            let n = pow3(self.k - j) as usize;
            for o in 0..n {
                let cb = self.base[j as usize - 1] + 3 * o;
                let c = [out[cb], out[cb + 1], out[cb + 2]];
                let mut s = combine(&c);
                let i = self.base[j as usize] + o;
                apply(&mut s, i);
                out[i] = s;
            }
        }
    }
}

fn combine(c: &[Stats; 3]) -> Stats {
    let mut s = Stats { unq: c[0].unq + c[1].unq + c[2].unq, ..Stats::default() };
    for b in 0..2 {
        let o = 1 - b;
        for i in 0..3 {
            let (j, l) = ((i + 1) % 3, (i + 2) % 3);
            let special = c[i].cnt[b];
            if special == 0 {
                continue;
            }
            s.cnt[b] += special * c[j].cnt[o] * c[l].cnt[o];
            s.sens[b] += special * (c[j].sens[o] * c[l].cnt[o] + c[j].cnt[o] * c[l].sens[o]);
        }
    }
    for i in 0..3 {
        let (j, l) = ((i + 1) % 3, (i + 2) % 3);
        s.min0 += c[i].min0 * c[j].cnt[1] * c[l].cnt[1];
    }
    s
}

/// Canonical fully queried assignment of height `j` with `N = v`: the first
/// child carries `v`, the other two `1 - v`.
pub(crate) fn full_fill(j: u32, v: u8, out: &mut Vec<u8>) {
    if j == 0 {
        out.push(if v == 0 { N0 } else { N1 });
        return;
    }
    full_fill(j - 1, v, out);
    full_fill(j - 1, 1 - v, out);
    full_fill(j - 1, 1 - v, out);
}

#[derive(Clone, Debug)]
pub(crate) struct Level {
    /// Sorted child codes; empty at height 0.
    pub codes: Vec<[u32; 3]>,
    pub index: HashMap<[u32; 3], u32>,
    pub reps: Vec<Vec<u8>>,
    pub members: Vec<u128>,
    pub cnt: Vec<[u128; 2]>,
    pub unq: Vec<u32>,
}

/// All stable classes of heights `0..=k`.
#[derive(Clone, Debug)]
pub struct StableClasses {
    k: u32,
    pub(crate) levels: Vec<Level>,
}

/// The closed form `N_k = C(N+1, 2) + C(N+2, 3)`, `N_0 = 1`.
pub fn stable_count_formula(k: u32) -> u128 {
    let mut n: u128 = 1;
    for _ in 0..k {
        n = (n + 1) * n / 2 + (n + 2) * (n + 1) * n / 6;
    }
    n
}

pub(crate) fn check_k(k: u32, min: u32) -> Result<()> {
    if k < min || k > 4 {
        Err(Error::LevelRange { k, min, max: 4 })
    } else {
        Ok(())
    }
}

impl StableClasses {
    pub fn enumerate(k: u32) -> Result<Self> {
        check_k(k, 0)?;
        let leaf = Level {
            codes: vec![[0; 3]],
            index: HashMap::new(),
            reps: vec![vec![UNQ]],
            members: vec![1],
            cnt: vec![[1, 1]],
            unq: vec![1],
        };
        let mut levels = vec![leaf];
        for j in 1..=k {
            let prev = &levels[j as usize - 1];
            let n = prev.codes.len() as u32;
            let mut full = Vec::new();
            full_fill(j - 1, 1, &mut full);
            let full_members = hard_count(j - 1);
            let mut level = Level {
                codes: Vec::new(),
                index: HashMap::new(),
                reps: Vec::new(),
                members: Vec::new(),
                cnt: Vec::new(),
                unq: Vec::new(),
            };
            let layout = Layout::new(j);
            let mut stats = vec![Stats::default(); layout.total];
            for x in 0..=n {
                for y in x.max(1)..=n {
                    for z in y..=n {
                        let codes = [x, y, z];
                        let mut rep = Vec::with_capacity(pow3(j) as usize);
                        let mut members: u128 = match (x == y, y == z) {
                            (true, true) => 1,
                            (false, false) if x != z => 6,
                            _ => 3,
                        };
                        for &c in &codes {
                            if c == FULL {
                                rep.extend_from_slice(&full);
                                members *= full_members;
                            } else {
                                rep.extend_from_slice(&prev.reps[c as usize - 1]);
                                members *= prev.members[c as usize - 1];
                            }
                        }
                        layout.analyze(&rep, 0, None, &mut stats);
                        let root = stats[layout.root()];
                        level.index.insert(codes, level.codes.len() as u32);
                        level.codes.push(codes);
                        level.reps.push(rep);
                        level.members.push(members);
                        level.cnt.push(root.cnt);
                        level.unq.push(root.unq);
                    }
                }
            }
            levels.push(level);
        }
        Ok(StableClasses { k, levels })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn count(&self, height: u32) -> usize {
        self.levels[height as usize].codes.len()
    }

    /// Canonical key: `U` for an unqueried leaf, `F` for a fully queried
    /// subtree with negated value 1, and `[abc]` for the sorted children.
    pub fn key(&self, height: u32, class: usize) -> String {
        let mut s = String::new();
        self.write_key(height, class, &mut s);
        s
    }

    fn write_key(&self, height: u32, class: usize, s: &mut String) {
        if height == 0 {
            s.push('U');
            return;
        }
        s.push('[');
        for &c in &self.levels[height as usize].codes[class] {
            if c == FULL {
                s.push('F');
            } else {
                self.write_key(height - 1, c as usize - 1, s);
            }
        }
        s.push(']');
    }

    /// Representative leaf of every orbit of unqueried leaves, ascending.
    pub(crate) fn orbits(&self, height: u32, class: usize) -> Vec<usize> {
        if height == 0 {
            return vec![0];
        }
        let codes = self.levels[height as usize].codes[class];
        let w = pow3(height - 1) as usize;
        let mut out = Vec::new();
        for (p, &c) in codes.iter().enumerate() {
            if c == FULL || (p > 0 && codes[p - 1] == c) {
                continue;
            }
            out.extend(self.orbits(height - 1, c as usize - 1).into_iter().map(|o| p * w + o));
        }
        out
    }

    /// Class code of the subtree at (`height`, `offset`) of a stable raw
    /// configuration, from precomputed stats; `None` if it is not stable.
    pub(crate) fn classify_node(&self, layout: &Layout, stats: &[Stats], height: u32, offset: usize) -> Option<u32> {
        let s = stats[layout.idx(height, offset)];
        if s.unq == 0 {
            return (s.cnt == [0, 1]).then_some(FULL);
        }
        if height == 0 {
            return Some(1);
        }
        let mut codes = [0u32; 3];
        for (i, c) in codes.iter_mut().enumerate() {
            *c = self.classify_node(layout, stats, height - 1, 3 * offset + i)?;
        }
        codes.sort_unstable();
        self.levels[height as usize].index.get(&codes).map(|&c| c + 1)
    }
}

/// Where a configuration ends after the forced queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// A stable class at the top height.
    Stable(u32),
    /// The root value is fixed; the optimal continuation is to stop.
    Determined,
}

/// One result of the forced-query closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub outcome: Outcome,
    /// Number of original completions represented by each completion of the
    /// resulting representative configuration (forced subtree queries are
    /// collapsed to one canonical assignment).
    pub multiplicity: u64,
}

/// Scratch space for the closure at a fixed height.
pub(crate) struct Resolver<'a> {
    pub classes: &'a StableClasses,
    pub layout: Layout,
    stats: Vec<Stats>,
    fixed: Vec<Stats>,
}

impl<'a> Resolver<'a> {
    pub fn new(classes: &'a StableClasses) -> Self {
        let layout = Layout::new(classes.k);
        let total = layout.total;
        Resolver { classes, layout, stats: vec![Stats::default(); total], fixed: vec![Stats::default(); total] }
    }

    /// A node that a forced rule says to query in full.
    fn forced_target(&self) -> Option<(u32, usize)> {
        let l = &self.layout;
        for j in (0..l.k).rev() {
            for o in 0..pow3(l.k - j) as usize {
                let s = self.stats[l.idx(j, o)];
                if s.cnt[0] == 0 && s.unq > 0 {
                    return Some((j, o));
                }
                if s.cnt[1] == 0 {
                    let first = o - o % 3;
                    for sib in first..first + 3 {
                        if sib != o && self.stats[l.idx(j, sib)].unq > 0 {
                            return Some((j, sib));
                        }
                    }
                }
            }
        }
        None
    }

    /// Applies forced queries to `cfg` until the root is determined or the
    /// configuration is stable, appending every branch to `out`. Returns the
    /// sum over all completions of the sensitive bits read by forced queries.
    pub fn resolve(&mut self, cfg: &[u8], mult: u64, out: &mut Vec<Branch>) -> Result<u128> {
        let root = self.layout.root();
        self.layout.analyze(cfg, 0, None, &mut self.stats);
        let rs = self.stats[root];
        if rs.cnt[0] == 0 {
            return Err(Error::Inconsistent);
        }
        if rs.cnt[1] == 0 {
            out.push(Branch { outcome: Outcome::Determined, multiplicity: mult });
            return Ok(0);
        }
        let Some((j, o)) = self.forced_target() else {
            let code = self
                .classes
                .classify_node(&self.layout, &self.stats, self.layout.k, 0)
                .expect("configuration without forced queries is a stable class");
            out.push(Branch { outcome: Outcome::Stable(code - 1), multiplicity: mult });
            return Ok(0);
        };
        let local = self.stats[self.layout.idx(j, o)].cnt;
        let mask = self.layout.unqueried_mask(cfg, j, o);
        let w = pow3(j) as usize;
        let mut fills = Vec::with_capacity(2);
        for v in 0..2u8 {
            if local[v as usize] == 0 {
                continue;
            }
            let node = self.layout.idx(j, o);
            self.layout.analyze(cfg, mask, Some((node, v)), &mut self.fixed);
            let r = self.fixed[root];
            if r.cnt[0] == 0 {
                continue;
            }
            // The forced subtree is never on the minority path.
            assert_eq!(r.min0, 0, "forced query reached the absolute minority");
            let m = u64::try_from(local[v as usize]).expect("completion counts fit in u64");
            fills.push((v, r.sens[0], m));
        }
        let mut dq = 0;
        for (v, sens, m) in fills {
            let mut next = cfg.to_vec();
            let mut fill = Vec::with_capacity(w);
            full_fill(j, v, &mut fill);
            next[o * w..(o + 1) * w].copy_from_slice(&fill);
            dq += mult as u128 * sens + self.resolve(&next, mult * m, out)?;
        }
        Ok(dq)
    }

    /// Sensitive and minority contributions of querying leaf `leaf` with
    /// outcome `a`, and the completion count of that outcome.
    pub fn leaf_outcome(&mut self, cfg: &[u8], leaf: usize, a: u8) -> (u128, u128, u128) {
        self.layout.analyze(cfg, 1 << leaf, Some((leaf, a)), &mut self.fixed);
        let r = self.fixed[self.layout.root()];
        (r.cnt[0], r.sens[0], r.min0)
    }

    pub fn root_stats(&mut self, cfg: &[u8]) -> Stats {
        self.layout.analyze(cfg, 0, None, &mut self.stats);
        self.stats[self.layout.root()]
    }

    /// Whether `cfg` has an undetermined root and no forced query.
    pub fn is_stable(&mut self, cfg: &[u8]) -> bool {
        let r = self.root_stats(cfg);
        r.cnt[0] > 0 && r.cnt[1] > 0 && self.forced_target().is_none()
    }

    pub fn classify_top(&mut self, cfg: &[u8]) -> Option<u32> {
        self.layout.analyze(cfg, 0, None, &mut self.stats);
        self.classes.classify_node(&self.layout, &self.stats, self.layout.k, 0).and_then(|c| c.checked_sub(1))
    }
}
