use num_traits::Zero;
use rand::Rng;

use super::{complete, evaluate, full_read, naive, resolve_child, AlgorithmId};
use crate::error::{Error, Result};
use crate::formula::{pow3, Input, Leaf, NodeId, TreeAddr};
use crate::rational::{self, Rational};

/// Execution backend for the evaluation algorithms.
pub trait Runner: Sized {
    /// Reads one input bit and counts it.
    fn query(&mut self, leaf: Leaf) -> bool;
    /// Runs `f` on a uniformly random branch in `0..n` and returns its value.
    fn uniform(&mut self, n: usize, f: &mut dyn FnMut(&mut Self, usize) -> bool) -> bool;
    /// A node value determined earlier in this run.
    fn known(&self, node: NodeId) -> Option<bool>;
    fn record(&mut self, node: NodeId, value: bool);
}

/// Wraps an input and logs every query.
#[derive(Clone, Debug)]
pub struct QueryOracle<'a> {
    input: &'a Input,
    log: Vec<Leaf>,
}

impl<'a> QueryOracle<'a> {
    pub fn new(input: &'a Input) -> Self {
        QueryOracle { input, log: Vec::new() }
    }

    pub fn query(&mut self, leaf: Leaf) -> bool {
        self.log.push(leaf);
        self.input.bit(leaf)
    }

    pub fn input(&self) -> &'a Input {
        self.input
    }

    pub fn log(&self) -> &[Leaf] {
        &self.log
    }

    pub fn count(&self) -> u64 {
        self.log.len() as u64
    }

    pub fn has_duplicates(&self) -> bool {
        let mut seen: Vec<u64> = self.log.iter().map(|l| l.offset()).collect();
        seen.sort_unstable();
        seen.windows(2).any(|w| w[0] == w[1])
    }

    pub fn clear(&mut self) {
        self.log.clear();
    }
}

/// Determined node values of one run, flat-indexed by height and offset.
#[derive(Clone, Debug)]
pub(crate) struct Scoreboard {
    base: Vec<usize>,
    vals: Vec<u8>,
    trail: Vec<usize>,
}

impl Scoreboard {
    pub(crate) fn new(h: u32) -> Self {
        let mut base = Vec::with_capacity(h as usize + 1);
        let mut total = 0usize;
        for j in 0..=h {
            base.push(total);
            total += pow3(h - j) as usize;
        }
        Scoreboard { base, vals: vec![0; total], trail: Vec::new() }
    }

    fn idx(&self, node: NodeId) -> usize {
        self.base[node.height as usize] + node.offset as usize
    }

    pub(crate) fn get(&self, node: NodeId) -> Option<bool> {
        match self.vals[self.idx(node)] {
            0 => None,
            v => Some(v == 2),
        }
    }

    pub(crate) fn set(&mut self, node: NodeId, value: bool) {
        let i = self.idx(node);
        if self.vals[i] == 0 {
            self.trail.push(i);
        }
        self.vals[i] = 1 + value as u8;
    }

    pub(crate) fn mark(&self) -> usize {
        self.trail.len()
    }

    pub(crate) fn rollback(&mut self, mark: usize) {
        for i in self.trail.drain(mark..) {
            self.vals[i] = 0;
        }
    }
}

/// One sampled run of an algorithm on a fixed input.
pub struct Session<'a, G: Rng> {
    oracle: QueryOracle<'a>,
    board: Scoreboard,
    rng: G,
}

impl<'a, G: Rng> Session<'a, G> {
    pub fn new(input: &'a Input, rng: G) -> Self {
        Session { oracle: QueryOracle::new(input), board: Scoreboard::new(input.height()), rng }
    }

    pub fn oracle(&self) -> &QueryOracle<'a> {
        &self.oracle
    }

    pub fn count(&self) -> u64 {
        self.oracle.count()
    }

    pub fn rng_mut(&mut self) -> &mut G {
        &mut self.rng
    }

    /// Forgets all queries and determined values; keeps the generator.
    pub fn reset(&mut self) {
        self.oracle.clear();
        self.board.rollback(0);
    }

    pub fn run(&mut self, alg: AlgorithmId) -> bool {
        let root = self.oracle.input.root();
        super::run_root(alg, self, root)
    }

    pub fn full_read(&mut self) -> bool {
        let root = self.oracle.input.root();
        full_read(self, root)
    }

    pub fn naive_evaluate(&mut self, v: &TreeAddr) -> Result<bool> {
        let node = v.node(self.oracle.input.height())?;
        Ok(naive(self, node))
    }

    /// `Evaluate(v)`.
    pub fn evaluate(&mut self, v: &TreeAddr) -> Result<bool> {
        let node = v.node(self.oracle.input.height())?;
        Ok(evaluate(self, node))
    }

    /// `Complete(v, y1)`; the value of `y1` must already be determined in
    /// this session.
    pub fn complete(&mut self, v: &TreeAddr, y1: &TreeAddr) -> Result<bool> {
        let (node, child) = resolve_child(self.oracle.input.height(), v, y1)?;
        if self.board.get(child).is_none() {
            return Err(Error::InvalidArgument(format!("value of {y1} is not determined yet")));
        }
        Ok(complete(self, node, child))
    }
}

impl<G: Rng> Runner for Session<'_, G> {
    fn query(&mut self, leaf: Leaf) -> bool {
        self.oracle.query(leaf)
    }

    fn uniform(&mut self, n: usize, f: &mut dyn FnMut(&mut Self, usize) -> bool) -> bool {
        let i = self.rng.random_range(0..n);
        f(self, i)
    }

    fn known(&self, node: NodeId) -> Option<bool> {
        self.board.get(node)
    }

    fn record(&mut self, node: NodeId, value: bool) {
        self.board.set(node, value);
    }
}

/// Follows every random branch and averages the query counts exactly.
///
/// Sub-calls return a deterministic value (the node value), so each
/// `uniform` only averages its own continuation and the work stays additive.
pub(crate) struct Expecter<'a> {
    input: &'a Input,
    board: Scoreboard,
    cost: Rational,
}

impl<'a> Expecter<'a> {
    pub(crate) fn new(input: &'a Input) -> Self {
        Expecter { input, board: Scoreboard::new(input.height()), cost: Rational::zero() }
    }

    pub(crate) fn cost(&self) -> &Rational {
        &self.cost
    }

    pub(crate) fn reveal(&mut self, node: NodeId) {
        let v = self.input.eval_node(node);
        self.board.set(node, v);
    }
}

impl Runner for Expecter<'_> {
    fn query(&mut self, leaf: Leaf) -> bool {
        assert!(
            self.board.get(NodeId::leaf(leaf.offset())).is_none(),
            "leaf {leaf} queried twice"
        );
        self.cost += rational::int(1);
        self.input.bit(leaf)
    }

    fn uniform(&mut self, n: usize, f: &mut dyn FnMut(&mut Self, usize) -> bool) -> bool {
        let start = self.cost.clone();
        let mark = self.board.mark();
        let mut total = Rational::zero();
        let mut value = None;
        for i in 0..n {
            self.cost = start.clone();
            let v = f(self, i);
            assert!(value.is_none_or(|w| w == v), "random branches disagree on the value");
            value = Some(v);
            total += &self.cost - &start;
            self.board.rollback(mark);
        }
        self.cost = start + total / rational::int(n as i64);
        value.expect("n >= 1")
    }

    fn known(&self, node: NodeId) -> Option<bool> {
        self.board.get(node)
    }

    fn record(&mut self, node: NodeId, value: bool) {
        self.board.set(node, value);
    }
}
