//! Brute-force cross-checks: explicit decision trees evaluated on every
//! 0-hard input, all trees on three variables, the hand-built trees for
//! height two, and an optimizer over raw configurations that uses no
//! symmetry or forced-query reasoning.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::formula::{encode, hard_count, hard_inputs_exhaustive, pow3, q_positions, EncodingRandomness, HardInput, Input, Leaf};
use crate::rational::{self, int, ratio, Rational};

/// A deterministic decision tree without output labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExplicitTree {
    Stop,
    Query { leaf: Leaf, on_zero: Box<ExplicitTree>, on_one: Box<ExplicitTree> },
}

impl ExplicitTree {
    pub fn query(leaf: u64, on_zero: ExplicitTree, on_one: ExplicitTree) -> Self {
        ExplicitTree::Query {
            leaf: Leaf::from_one_based(leaf).expect("one-based index"),
            on_zero: Box::new(on_zero),
            on_one: Box::new(on_one),
        }
    }

    pub fn is_stop(&self) -> bool {
        matches!(self, ExplicitTree::Stop)
    }

    pub fn size(&self) -> usize {
        match self {
            ExplicitTree::Stop => 1,
            ExplicitTree::Query { on_zero, on_one, .. } => 1 + on_zero.size() + on_one.size(),
        }
    }

    /// Checks leaf range (`1..=n_leaves`) and that no path repeats a leaf.
    pub fn validate(&self, n_leaves: u64) -> Result<()> {
        fn go(t: &ExplicitTree, n: u64, path: &mut Vec<u64>) -> Result<()> {
            if let ExplicitTree::Query { leaf, on_zero, on_one } = t {
                let i = leaf.one_based();
                if i > n {
                    return Err(Error::LeafOutOfRange { leaf: i, max: n });
                }
                if path.contains(&i) {
                    return Err(Error::RepeatedQuery(i));
                }
                path.push(i);
                go(on_zero, n, path)?;
                go(on_one, n, path)?;
                path.pop();
            }
            Ok(())
        }
        go(self, n_leaves, &mut Vec::new())
    }

    /// Leaves read on input `x`, in order.
    pub fn run(&self, x: &HardInput) -> Vec<Leaf> {
        let mut out = Vec::new();
        let mut t = self;
        while let ExplicitTree::Query { leaf, on_zero, on_one } = t {
            out.push(*leaf);
            t = if x.input().bit(*leaf) { on_one } else { on_zero };
        }
        out
    }
}

impl fmt::Display for ExplicitTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExplicitTree::Stop => write!(f, "STOP"),
            ExplicitTree::Query { leaf, on_zero, on_one } => write!(f, "(q {leaf} {on_zero} {on_one})"),
        }
    }
}

impl FromStr for ExplicitTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spaced = s.replace('(', " ( ").replace(')', " ) ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        let mut pos = 0;
        let tree = parse_tree(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!("trailing input after tree: {:?}", &tokens[pos..])));
        }
        Ok(tree)
    }
}

fn parse_tree(tokens: &[&str], pos: &mut usize) -> Result<ExplicitTree> {
    let next = |pos: &mut usize| -> Result<&str> {
        let t = tokens.get(*pos).copied().ok_or_else(|| Error::Parse("unexpected end of tree".into()))?;
        *pos += 1;
        Ok(t)
    };
    match next(pos)? {
        "STOP" => Ok(ExplicitTree::Stop),
        "(" => {
            if next(pos)? != "q" {
                return Err(Error::Parse("expected `q` after `(`".into()));
            }
            let leaf: u64 = next(pos)?.parse().map_err(|_| Error::Parse("bad leaf index".into()))?;
            let leaf = Leaf::from_one_based(leaf).ok_or_else(|| Error::Parse("leaf indices start at 1".into()))?;
            let on_zero = parse_tree(tokens, pos)?;
            let on_one = parse_tree(tokens, pos)?;
            if next(pos)? != ")" {
                return Err(Error::Parse("expected `)`".into()));
            }
            Ok(ExplicitTree::Query { leaf, on_zero: Box::new(on_zero), on_one: Box::new(on_one) })
        }
        other => Err(Error::Parse(format!("unexpected token {other:?}"))),
    }
}

/// Number of query structures on `n` variables:
/// `trees(n) = 1 + n trees(n - 1)^2`.
pub fn tree_count(n: u32) -> u128 {
    (0..n).fold(1u128, |t, i| 1 + (i as u128 + 1) * t * t)
}

/// Every decision tree on three variables, STOP included.
pub fn enumerate_trees_k1() -> Vec<ExplicitTree> {
    fn all(avail: &[u64]) -> Vec<ExplicitTree> {
        let mut out = vec![ExplicitTree::Stop];
        for (i, &v) in avail.iter().enumerate() {
            let mut rest = avail.to_vec();
            rest.remove(i);
            let subs = all(&rest);
            for z in &subs {
                for o in &subs {
                    out.push(ExplicitTree::query(v, z.clone(), o.clone()));
                }
            }
        }
        out
    }
    all(&[1, 2, 3])
}

/// `rho_alpha` of a tree with its two statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoStats {
    pub rho: Rational,
    /// Expected number of sensitive bits read.
    pub pi_q: Rational,
    /// Probability of reading the absolute minority.
    pub pi_m: Rational,
}

impl RhoStats {
    /// `alpha_C = 2^-k pi_q / pi_m`; `None` when `pi_m = 0`.
    pub fn alpha_c(&self, k: u32) -> Option<Rational> {
        (!self.pi_m.is_zero()).then(|| &self.pi_q / (rational::int(1 << k) * &self.pi_m))
    }
}

/// Runs `tree` on every input of `H_k^0` (`k <= 2`).
pub fn rho_exhaustive(tree: &ExplicitTree, k: u32, alpha: &Rational) -> Result<RhoStats> {
    if k > 2 {
        return Err(Error::EnumerationGuard { height: k, max: 2 });
    }
    tree.validate(pow3(k))?;
    let inputs = hard_inputs_exhaustive(k, Some(false))?;
    let mut q = 0u64;
    let mut m = 0u64;
    for x in &inputs {
        let read = tree.run(x);
        let sens = x.sensitive_bits();
        q += read.iter().filter(|l| sens.contains(l)).count() as u64;
        m += read.contains(&x.absolute_minority()) as u64;
    }
    let n = int(inputs.len() as i64);
    let pi_q = int(q as i64) / &n;
    let pi_m = int(m as i64) / &n;
    let rho = &pi_q / int(1 << k) - alpha * &pi_m;
    Ok(RhoStats { rho, pi_q, pi_m })
}

/// Worst ratio found while checking that every three-variable tree reads the
/// encoded position at most twice as often as the absolute minority.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingRatioReport {
    pub trees: usize,
    pub all_hold: bool,
    pub max_ratio: Rational,
    pub worst: ExplicitTree,
    /// Querying trees that attain the maximum.
    pub attaining: usize,
}

/// Position of the source bit in the one-level code `y01`, `1y0`, `01y`
/// that produces each input of `H_1^0`.
fn encoded_position(x: &HardInput) -> Leaf {
    let bits: Vec<bool> = x.input().bits().iter().map(|b| *b).collect();
    let pos = match bits.as_slice() {
        [false, false, true] => 1,
        [true, false, false] => 2,
        [false, true, false] => 3,
        _ => unreachable!("not in H_1^0"),
    };
    Leaf::from_one_based(pos).expect("non-zero")
}

pub fn verify_encoding_ratio() -> EncodingRatioReport {
    let inputs = hard_inputs_exhaustive(1, Some(false)).expect("h = 1");
    let trees = enumerate_trees_k1();
    let mut all_hold = true;
    let mut best: Option<(Rational, ExplicitTree)> = None;
    let mut attaining = 0;
    for t in &trees {
        let (mut num, mut den) = (0i64, 0i64);
        for x in &inputs {
            let read = t.run(x);
            num += read.contains(&encoded_position(x)) as i64;
            den += read.contains(&x.absolute_minority()) as i64;
        }
        if num > 2 * den {
            all_hold = false;
        }
        if den == 0 {
            continue;
        }
        let r = ratio(num, den);
        match &best {
            Some((b, _)) if &r < b => {}
            Some((b, _)) if &r == b => attaining += 1,
            _ => {
                best = Some((r, t.clone()));
                attaining = 1;
            }
        }
    }
    let (max_ratio, worst) = best.expect("querying trees exist");
    EncodingRatioReport { trees: trees.len(), all_hold, max_ratio, worst, attaining }
}

/// Height-two configuration in ordinary values, used to build the
/// hand-specified trees.
type Partial = [Option<bool>; 9];

fn consistent(inputs: &[HardInput], cfg: &Partial) -> bool {
    inputs.iter().any(|x| {
        cfg.iter().enumerate().all(|(i, v)| v.is_none_or(|b| x.input().bit(Leaf::from_offset(i as u64)) == b))
    })
}

fn build_from_policy(policy: &dyn Fn(&Partial) -> Option<usize>) -> ExplicitTree {
    let inputs = hard_inputs_exhaustive(2, Some(false)).expect("h = 2");
    fn go(cfg: &mut Partial, inputs: &[HardInput], policy: &dyn Fn(&Partial) -> Option<usize>) -> ExplicitTree {
        if !consistent(inputs, cfg) {
            return ExplicitTree::Stop;
        }
        let Some(i) = policy(cfg) else {
            return ExplicitTree::Stop;
        };
        cfg[i] = Some(false);
        let on_zero = go(cfg, inputs, policy);
        cfg[i] = Some(true);
        let on_one = go(cfg, inputs, policy);
        cfg[i] = None;
        ExplicitTree::Query {
            leaf: Leaf::from_offset(i as u64),
            on_zero: Box::new(on_zero),
            on_one: Box::new(on_one),
        }
    }
    go(&mut [None; 9], &inputs, policy)
}

/// Value of a clause if two of its bits agree.
fn clause_value(cfg: &Partial, c: usize) -> Option<bool> {
    let bits = &cfg[3 * c..3 * c + 3];
    let ones = bits.iter().filter(|b| **b == Some(true)).count();
    let zeros = bits.iter().filter(|b| **b == Some(false)).count();
    if ones >= 2 {
        Some(true)
    } else if zeros >= 2 {
        Some(false)
    } else {
        None
    }
}

fn first_unqueried(cfg: &Partial, clauses: impl IntoIterator<Item = usize>) -> Option<usize> {
    clauses.into_iter().flat_map(|c| 3 * c..3 * c + 3).find(|&i| cfg[i].is_none())
}

/// The height-two tree obtained from the clause rules with the smallest
/// index chosen whenever symmetry allows.
pub fn build_c_prime() -> ExplicitTree {
    build_from_policy(&|cfg| {
        let values: Vec<Option<bool>> = (0..3).map(|c| clause_value(cfg, c)).collect();
        // Two majority clauses fix the root.
        if values.iter().filter(|v| **v == Some(false)).count() >= 2 {
            return None;
        }
        // A zero in an open clause: finish that clause.
        for c in 0..3 {
            let has_zero = cfg[3 * c..3 * c + 3].contains(&Some(false));
            if has_zero && values[c].is_none() {
                if let Some(i) = first_unqueried(cfg, [c]) {
                    return Some(i);
                }
            }
        }
        // The minority clause is known: read everything else.
        if let Some(m) = values.iter().position(|v| *v == Some(true)) {
            return first_unqueried(cfg, (0..3).filter(|&c| c != m));
        }
        // One majority clause and nothing decisive elsewhere: stop.
        if values.contains(&Some(false)) {
            return None;
        }
        let untouched: Vec<usize> =
            (0..3).filter(|&c| cfg[3 * c..3 * c + 3].iter().all(|b| b.is_none())).collect();
        first_unqueried(cfg, untouched).or_else(|| first_unqueried(cfg, 0..3))
    })
}

/// Read `x1`; on 1 stop; otherwise read `x2, x3`, and if the first clause is
/// 1 read everything else.
pub fn build_c0() -> ExplicitTree {
    build_from_policy(&|cfg| match cfg[0] {
        None => Some(0),
        Some(true) => None,
        Some(false) => match clause_value(cfg, 0) {
            None => first_unqueried(cfg, [0]),
            Some(false) => None,
            Some(true) => first_unqueried(cfg, 0..3),
        },
    })
}

/// Optimizer over raw configurations of height `k <= 2`: every decision tree
/// is considered, states are memoized by the set of consistent inputs.
pub struct RawDp {
    k: u32,
    inputs: Vec<HardInput>,
    sens: Vec<u32>,
    minority: Vec<u32>,
}

/// Best tree statistics from a raw optimization, in sums over inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawOptimum {
    pub max_rho: Rational,
    pub pi_q: Rational,
    pub pi_m: Rational,
}

impl RawDp {
    pub fn new(k: u32) -> Result<Self> {
        if !(1..=2).contains(&k) {
            return Err(Error::LevelRange { k, min: 1, max: 2 });
        }
        let inputs = hard_inputs_exhaustive(k, Some(false))?;
        let sens = inputs
            .iter()
            .map(|x| x.sensitive_bits().iter().fold(0u32, |m, l| m | 1 << l.offset()))
            .collect();
        let minority = inputs.iter().map(|x| 1u32 << x.absolute_minority().offset()).collect();
        Ok(RawDp { k, inputs, sens, minority })
    }

    /// Maximum of `rho_alpha` over trees that read at least one variable.
    pub fn optimize(&self, alpha: &Rational) -> RawOptimum {
        let all: u128 = if self.inputs.len() == 128 { u128::MAX } else { (1u128 << self.inputs.len()) - 1 };
        let mut memo = HashMap::new();
        let (score, q, m) = self.best(0, all, alpha, true, &mut memo);
        let n = int(self.inputs.len() as i64);
        let _ = score;
        let pi_q = int(q as i64) / &n;
        let pi_m = int(m as i64) / &n;
        let max_rho = &pi_q / int(1 << self.k) - alpha * &pi_m;
        RawOptimum { max_rho, pi_q, pi_m }
    }

    /// `(score, Q, M)` with `score = Q / 2^k - alpha M` over the inputs in
    /// `set`, given the leaves in `queried` are read.
    fn best(
        &self,
        queried: u32,
        set: u128,
        alpha: &Rational,
        must_query: bool,
        memo: &mut HashMap<(u32, u128, bool), (Rational, u64, u64)>,
    ) -> (Rational, u64, u64) {
        if let Some(v) = memo.get(&(queried, set, must_query)) {
            return v.clone();
        }
        let n_leaves = pow3(self.k) as u32;
        let scale = Rational::one() / int(1 << self.k);
        let mut best: Option<(Rational, u64, u64)> = (!must_query).then(|| (Rational::zero(), 0, 0));
        for leaf in 0..n_leaves {
            if queried >> leaf & 1 == 1 {
                continue;
            }
            let (mut q, mut m) = (0u64, 0u64);
            let mut parts = [0u128; 2];
            for (i, x) in self.inputs.iter().enumerate() {
                if set >> i & 1 == 0 {
                    continue;
                }
                q += (self.sens[i] >> leaf & 1) as u64;
                m += (self.minority[i] >> leaf & 1) as u64;
                parts[x.input().bit(Leaf::from_offset(leaf as u64)) as usize] |= 1 << i;
            }
            for part in parts {
                if part != 0 {
                    let (_, sq, sm) = self.best(queried | 1 << leaf, part, alpha, false, memo);
                    q += sq;
                    m += sm;
                }
            }
            let score = &scale * int(q as i64) - alpha * int(m as i64);
            if best.as_ref().is_none_or(|b| score > b.0) {
                best = Some((score, q, m));
            }
        }
        let out = best.expect("an unqueried leaf exists whenever a query is required");
        memo.insert((queried, set, must_query), out.clone());
        out
    }

    /// Fixed-point iteration from `alpha = 0`; returns the trace.
    pub fn alpha(&self) -> Vec<Rational> {
        let mut alpha = Rational::zero();
        let mut trace = vec![alpha.clone()];
        loop {
            let opt = self.optimize(&alpha);
            if opt.max_rho.is_zero() {
                return trace;
            }
            alpha = &opt.pi_q / (int(1 << self.k) * &opt.pi_m);
            trace.push(alpha.clone());
        }
    }
}

/// Pushes every `(y, r)` with `y` a single bit through the `k`-level encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingCensus {
    pub k: u32,
    pub pairs: usize,
    /// Distinct images; all of `H_k` when the push-forward is onto.
    pub images: usize,
    /// Every pair kept the root value.
    pub value_preserved: bool,
    /// Every input of `H_k` has exactly `pairs / |H_k|` preimages.
    pub uniform_image: bool,
    /// Conditioned on each image, the encoded position is uniform over its
    /// `2^k` sensitive bits.
    pub uniform_position: bool,
}

impl EncodingCensus {
    pub fn holds(&self) -> bool {
        self.value_preserved && self.uniform_image && self.uniform_position
    }
}

/// Exhaustive census of the encoding at height `k` (`k <= 2`).
pub fn encoding_census(k: u32) -> Result<EncodingCensus> {
    let rs = EncodingRandomness::enumerate(k, k)?;
    let hard = hard_inputs_exhaustive(k, None)?;
    let mut hits: HashMap<Input, (u64, HashMap<Leaf, u64>)> = HashMap::new();
    let mut value_preserved = true;
    for y in [false, true] {
        let y = Input::from_bools(0, &[y])?;
        for r in &rs {
            let x = encode(&y, r)?;
            value_preserved &= x.eval() == y.eval();
            let e = hits.entry(x).or_default();
            e.0 += 1;
            *e.1.entry(q_positions(r)[0]).or_default() += 1;
        }
    }
    let pairs = 2 * rs.len();
    let per = pairs as u64 / (2 * hard_count(k)) as u64;
    let mut uniform_image = hits.len() == hard.len();
    let mut uniform_position = true;
    for x in &hard {
        let Some((n, pos)) = hits.get(x.input()) else {
            uniform_image = false;
            continue;
        };
        uniform_image &= *n == per;
        let sens = x.sensitive_bits();
        uniform_position &= pos.len() == sens.len()
            && sens.iter().all(|l| pos.get(l).is_some_and(|&c| c * sens.len() as u64 == *n));
    }
    Ok(EncodingCensus { k, pairs, images: hits.len(), value_preserved, uniform_image, uniform_position })
}
