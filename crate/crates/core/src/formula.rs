//! The complete ternary majority formula `3-MAJ_h`, its inputs, the hard
//! distribution and the uniform k-level encodings.
//!
//! Leaves are numbered left to right. [`Leaf`] keeps the zero-based offset
//! internally and prints one-based, which is also the convention of every
//! serialized format in this crate.

use std::fmt;
use std::str::FromStr;

use bitvec::prelude::*;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest supported formula height (`3^18` leaves, about 387 million).
pub const MAX_HEIGHT: u32 = 18;

pub const fn pow3(e: u32) -> u64 {
    3u64.pow(e)
}

/// Number of `b`-hard inputs of height `h`, for either value `b`:
/// `3^((3^h - 1) / 2)`.
pub fn hard_count(h: u32) -> u128 {
    3u128.pow(((pow3(h) - 1) / 2) as u32)
}

pub(crate) fn check_height(h: u32) -> Result<()> {
    if h > MAX_HEIGHT {
        Err(Error::HeightCap { height: h, max: MAX_HEIGHT })
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leaf(u64);

impl Leaf {
    pub fn from_offset(offset: u64) -> Self {
        Leaf(offset)
    }

    /// `None` for index 0.
    pub fn from_one_based(index: u64) -> Option<Self> {
        index.checked_sub(1).map(Leaf)
    }

    pub fn offset(self) -> u64 {
        self.0
    }

    pub fn one_based(self) -> u64 {
        self.0 + 1
    }
}

impl fmt::Display for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.one_based())
    }
}

/// A node of the formula tree identified by the height of its subtree and its
/// left-to-right position among the nodes of that height.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub height: u32,
    pub offset: u64,
}

impl NodeId {
    pub fn root(h: u32) -> Self {
        NodeId { height: h, offset: 0 }
    }

    pub fn leaf(offset: u64) -> Self {
        NodeId { height: 0, offset }
    }

    pub fn child(self, i: usize) -> Self {
        debug_assert!(self.height > 0 && i < 3);
        NodeId { height: self.height - 1, offset: 3 * self.offset + i as u64 }
    }

    pub fn children(self) -> [NodeId; 3] {
        [self.child(0), self.child(1), self.child(2)]
    }

    pub fn parent(self) -> Self {
        NodeId { height: self.height + 1, offset: self.offset / 3 }
    }

    /// Position of this node among its siblings.
    pub fn index_in_parent(self) -> usize {
        (self.offset % 3) as usize
    }

    pub fn is_child_of(self, parent: NodeId) -> bool {
        self.height + 1 == parent.height && self.offset / 3 == parent.offset
    }

    /// Zero-based offsets of the leaves below this node.
    pub fn leaves(self) -> std::ops::Range<u64> {
        let w = pow3(self.height);
        self.offset * w..(self.offset + 1) * w
    }

    pub fn contains_leaf(self, leaf: Leaf) -> bool {
        self.leaves().contains(&leaf.offset())
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node(height={}, offset={})", self.height, self.offset)
    }
}

/// Root-to-node path of child indices in `{0, 1, 2}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeAddr {
    path: Vec<u8>,
}

impl TreeAddr {
    pub fn root() -> Self {
        TreeAddr::default()
    }

    pub fn new(path: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = path.iter().find(|&&c| c > 2) {
            return Err(Error::InvalidArgument(format!("child index {bad} not in 0..=2")));
        }
        Ok(TreeAddr { path })
    }

    pub fn path(&self) -> &[u8] {
        &self.path
    }

    pub fn depth(&self) -> u32 {
        self.path.len() as u32
    }

    pub fn child(&self, i: u8) -> Self {
        assert!(i < 3);
        let mut path = self.path.clone();
        path.push(i);
        TreeAddr { path }
    }

    pub fn parent(&self) -> Option<Self> {
        let mut path = self.path.clone();
        path.pop().map(|_| TreeAddr { path })
    }

    /// Resolves the address inside a formula of height `h`.
    pub fn node(&self, h: u32) -> Result<NodeId> {
        if self.depth() > h {
            return Err(Error::InvalidArgument(format!(
                "address {self} is deeper than the formula height {h}"
            )));
        }
        let offset = self.path.iter().fold(0u64, |acc, &c| 3 * acc + c as u64);
        Ok(NodeId { height: h - self.depth(), offset })
    }

    pub fn from_node(h: u32, node: NodeId) -> Self {
        let depth = h - node.height;
        let mut path = vec![0u8; depth as usize];
        let mut o = node.offset;
        for slot in path.iter_mut().rev() {
            *slot = (o % 3) as u8;
            o /= 3;
        }
        TreeAddr { path }
    }

    pub fn from_leaf(h: u32, leaf: Leaf) -> Self {
        Self::from_node(h, NodeId::leaf(leaf.offset()))
    }
}

impl fmt::Display for TreeAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            return write!(f, "root");
        }
        let parts: Vec<String> = self.path.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl FromStr for TreeAddr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "root" {
            return Ok(TreeAddr::root());
        }
        let path = s
            .split('.')
            .map(|p| p.parse::<u8>().map_err(|_| Error::Parse(format!("bad address {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        TreeAddr::new(path)
    }
}

/// An assignment to the `3^h` leaves of the formula.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Input {
    height: u32,
    bits: BitVec<u64, Lsb0>,
}

impl fmt::Debug for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Input(h={}, {})", self.height, self.to_line())
    }
}

impl Input {
    pub fn new(height: u32, bits: BitVec<u64, Lsb0>) -> Result<Self> {
        check_height(height)?;
        let expected = pow3(height) as usize;
        if bits.len() != expected {
            return Err(Error::LengthMismatch { expected, found: bits.len() });
        }
        Ok(Input { height, bits })
    }

    pub fn from_bools(height: u32, bits: &[bool]) -> Result<Self> {
        Self::new(height, bits.iter().copied().collect())
    }

    /// All-zero input.
    pub fn zeros(height: u32) -> Result<Self> {
        check_height(height)?;
        Ok(Input { height, bits: bitvec![u64, Lsb0; 0; pow3(height) as usize] })
    }

    /// Reads `3^h` characters over `{0,1}`; whitespace is ignored so that
    /// triples may be grouped (`"110 100 010"`).
    pub fn from_line(line: &str) -> Result<Self> {
        let bits: Vec<bool> = line
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<_>>()?;
        let n = bits.len() as u64;
        let mut h = 0;
        while pow3(h) < n {
            h += 1;
        }
        if pow3(h) != n {
            return Err(Error::Parse(format!("length {n} is not a power of 3")));
        }
        Self::from_bools(h, &bits)
    }

    pub fn to_line(&self) -> String {
        self.bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, leaf: Leaf) -> bool {
        self.bits[leaf.offset() as usize]
    }

    pub fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.bits
    }

    pub fn set(&mut self, leaf: Leaf, value: bool) {
        self.bits.set(leaf.offset() as usize, value);
    }

    pub fn flipped(&self, leaf: Leaf) -> Self {
        let mut x = self.clone();
        let b = x.bit(leaf);
        x.set(leaf, !b);
        x
    }

    pub fn root(&self) -> NodeId {
        NodeId::root(self.height)
    }

    /// `3-MAJ_h(x)`.
    pub fn eval(&self) -> bool {
        self.eval_node(self.root())
    }

    pub fn eval_node(&self, node: NodeId) -> bool {
        if node.height == 0 {
            return self.bits[node.offset as usize];
        }
        let mut ones = 0;
        for (i, c) in node.children().into_iter().enumerate() {
            if self.eval_node(c) {
                ones += 1;
            }
            // Two equal votes settle the majority.
            if ones == 2 || (i + 1 - ones) == 2 {
                break;
            }
        }
        ones >= 2
    }

    pub fn eval_at(&self, addr: &TreeAddr) -> Result<bool> {
        Ok(self.eval_node(addr.node(self.height)?))
    }

    /// Value of `node` if every internal node below it has children that
    /// are not all equal, `None` otherwise.
    fn hard_value(&self, node: NodeId) -> Option<bool> {
        if node.height == 0 {
            return Some(self.bits[node.offset as usize]);
        }
        let mut vals = [false; 3];
        for (i, c) in node.children().into_iter().enumerate() {
            vals[i] = self.hard_value(c)?;
        }
        if vals[0] == vals[1] && vals[1] == vals[2] {
            return None;
        }
        Some(vals.iter().filter(|v| **v).count() >= 2)
    }

    pub fn is_hard(&self) -> bool {
        self.hard_value(self.root()).is_some()
    }
}

/// `3-MAJ_h(x)`.
pub fn eval(x: &Input) -> bool {
    x.eval()
}

pub fn is_hard(x: &Input) -> bool {
    x.is_hard()
}

/// A hard input together with its minority path and absolute minority.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardInput {
    input: Input,
    root_value: bool,
    path: Vec<NodeId>,
}

impl HardInput {
    pub fn new(input: Input) -> Result<Self> {
        let root_value = input.hard_value(input.root()).ok_or(Error::NotHard)?;
        let mut path = vec![input.root()];
        let mut node = input.root();
        let mut value = root_value;
        while node.height > 0 {
            let next = node
                .children()
                .into_iter()
                .find(|&c| input.eval_node(c) != value)
                .expect("hard node has a disagreeing child");
            node = next;
            value = !value;
            path.push(node);
        }
        Ok(HardInput { input, root_value, path })
    }

    pub fn input(&self) -> &Input {
        &self.input
    }

    pub fn into_input(self) -> Input {
        self.input
    }

    pub fn height(&self) -> u32 {
        self.input.height
    }

    pub fn root_value(&self) -> bool {
        self.root_value
    }

    /// Nodes of the minority path, root first; length `h + 1`.
    pub fn minority_path(&self) -> &[NodeId] {
        &self.path
    }

    pub fn minority_addrs(&self) -> Vec<TreeAddr> {
        self.path.iter().map(|&n| TreeAddr::from_node(self.height(), n)).collect()
    }

    /// The absolute minority `m(x)`.
    pub fn absolute_minority(&self) -> Leaf {
        Leaf(self.path.last().expect("path is never empty").offset)
    }

    /// Leaves whose root-to-leaf path carries one value throughout; these are
    /// exactly the bits whose flip flips the root.
    pub fn sensitive_bits(&self) -> Vec<Leaf> {
        let mut out = Vec::with_capacity(1 << self.height().min(20));
        self.collect_sensitive(self.input.root(), &mut out);
        out
    }

    fn collect_sensitive(&self, node: NodeId, out: &mut Vec<Leaf>) {
        if node.height == 0 {
            out.push(Leaf(node.offset));
            return;
        }
        for c in node.children() {
            if self.input.eval_node(c) == self.root_value {
                self.collect_sensitive(c, out);
            }
        }
    }

    /// `h=<int> root=<bit> m=<leaf>` followed by the bit line.
    pub fn to_fixture(&self) -> String {
        format!(
            "h={} root={} m={}\n{}\n",
            self.height(),
            self.root_value as u8,
            self.absolute_minority(),
            self.input.to_line()
        )
    }

    /// Parses one fixture record; the header is checked against the bits.
    pub fn from_fixture(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty fixture".into()))?;
        let body = lines.next().ok_or_else(|| Error::Parse("missing bit line".into()))?;
        let mut h = None;
        let mut root = None;
        let mut m = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field {field:?}")))?;
            let num: u64 = value.parse().map_err(|_| Error::Parse(format!("bad value in {field:?}")))?;
            match key {
                "h" => h = Some(num),
                "root" => root = Some(num),
                "m" => m = Some(num),
                _ => return Err(Error::Parse(format!("unknown header key {key:?}"))),
            }
        }
        let x = HardInput::new(Input::from_line(body)?)?;
        let mismatch = |what: &str| Error::Parse(format!("header {what} disagrees with the bits"));
        if h != Some(x.height() as u64) {
            return Err(mismatch("h"));
        }
        if root != Some(x.root_value as u64) {
            return Err(mismatch("root"));
        }
        if m != Some(x.absolute_minority().one_based()) {
            return Err(mismatch("m"));
        }
        Ok(x)
    }
}

/// Minority path (as addresses) and absolute minority of a hard input.
pub fn minority_path(x: &Input) -> Result<(Vec<TreeAddr>, Leaf)> {
    let hx = HardInput::new(x.clone())?;
    Ok((hx.minority_addrs(), hx.absolute_minority()))
}

pub fn sensitive_bits(x: &Input) -> Result<Vec<Leaf>> {
    Ok(HardInput::new(x.clone())?.sensitive_bits())
}

/// Uniform sample from `H_h`, or from `H_h^b` when `root_value = Some(b)`.
///
/// Every internal node picks the position of its minority child uniformly;
/// since `|H_h^0| = |H_h^1|` this is exactly uniform.
pub fn sample_hard<R: Rng + ?Sized>(h: u32, root_value: Option<bool>, rng: &mut R) -> Result<HardInput> {
    check_height(h)?;
    let root_value = root_value.unwrap_or_else(|| rng.random_bool(0.5));
    let mut bits = bitvec![u64, Lsb0; 0; pow3(h) as usize];
    let mut path = Vec::with_capacity(h as usize + 1);
    fill_hard(&mut bits, NodeId::root(h), root_value, true, &mut path, rng);
    path.reverse();
    let input = Input { height: h, bits };
    Ok(HardInput { input, root_value, path })
}

fn fill_hard<R: Rng + ?Sized>(
    bits: &mut BitVec<u64, Lsb0>,
    node: NodeId,
    value: bool,
    on_path: bool,
    path: &mut Vec<NodeId>,
    rng: &mut R,
) {
    if node.height == 0 {
        bits.set(node.offset as usize, value);
    } else {
        let minority = rng.random_range(0..3);
        for (i, c) in node.children().into_iter().enumerate() {
            let v = if i == minority { !value } else { value };
            fill_hard(bits, c, v, on_path && i == minority, path, rng);
        }
    }
    if on_path {
        path.push(node);
    }
}

/// Every input of height `h`; only for `h <= 2`.
pub fn all_inputs(h: u32) -> Result<Vec<Input>> {
    if h > 2 {
        return Err(Error::EnumerationGuard { height: h, max: 2 });
    }
    let n = pow3(h) as usize;
    Ok((0u64..1 << n)
        .map(|mask| {
            let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            Input::from_bools(h, &bits).expect("length matches")
        })
        .collect())
}

/// Hard inputs found by scanning every input; `root_value` filters by value.
pub fn hard_inputs_exhaustive(h: u32, root_value: Option<bool>) -> Result<Vec<HardInput>> {
    Ok(all_inputs(h)?
        .into_iter()
        .filter(|x| x.is_hard())
        .map(|x| HardInput::new(x).expect("filtered"))
        .filter(|x| root_value.is_none_or(|b| x.root_value() == b))
        .collect())
}

/// One symbol of the encoding alphabet `{0,1} x {1,2,3}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gadget {
    pub b: bool,
    /// Position of the encoded bit inside its triple, `1..=3`.
    pub s: u8,
}

impl Gadget {
    pub fn new(b: bool, s: u8) -> Result<Self> {
        if !(1..=3).contains(&s) {
            return Err(Error::InvalidArgument(format!("gadget position {s} not in 1..=3")));
        }
        Ok(Gadget { b, s })
    }

    pub fn all() -> [Gadget; 6] {
        let mut out = [Gadget { b: false, s: 1 }; 6];
        for (i, g) in out.iter_mut().enumerate() {
            *g = Gadget { b: i >= 3, s: (i % 3) as u8 + 1 };
        }
        out
    }

    /// The triple `c(y, (b, s))`.
    pub fn apply(self, y: bool) -> [bool; 3] {
        let b = self.b;
        match self.s {
            1 => [y, b, !b],
            2 => [!b, y, b],
            _ => [b, !b, y],
        }
    }
}

/// Randomness of the uniform k-level encoding of height-`(h-k)` inputs into
/// height-`h` inputs. `levels[i]` holds `3^(h-1-i)` symbols; the last level is
/// applied first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EncodingRandomness {
    height: u32,
    levels: Vec<Vec<Gadget>>,
}

impl EncodingRandomness {
    pub fn new(height: u32, levels: Vec<Vec<Gadget>>) -> Result<Self> {
        let k = levels.len() as u32;
        if k == 0 || k > height {
            return Err(Error::InvalidArgument(format!("need 1 <= k <= h, got k={k}, h={height}")));
        }
        check_height(height)?;
        for (i, level) in levels.iter().enumerate() {
            let expected = pow3(height - 1 - i as u32) as usize;
            if level.len() != expected {
                return Err(Error::LengthMismatch { expected, found: level.len() });
            }
        }
        Ok(EncodingRandomness { height, levels })
    }

    pub fn random<R: Rng + ?Sized>(height: u32, k: u32, rng: &mut R) -> Result<Self> {
        if k == 0 || k > height {
            return Err(Error::InvalidArgument(format!("need 1 <= k <= h, got k={k}, h={height}")));
        }
        let all = Gadget::all();
        let levels = (0..k)
            .map(|i| (0..pow3(height - 1 - i)).map(|_| all[rng.random_range(0..6)]).collect())
            .collect();
        Self::new(height, levels)
    }

    /// Every element of `R^(k)_h`; only sensible for tiny `h`.
    pub fn enumerate(height: u32, k: u32) -> Result<Vec<Self>> {
        let sizes: Vec<usize> = (0..k).map(|i| pow3(height - 1 - i) as usize).collect();
        let total: usize = sizes.iter().sum();
        if total > 8 {
            return Err(Error::EnumerationGuard { height, max: 2 });
        }
        let all = Gadget::all();
        let mut out = Vec::with_capacity(6usize.pow(total as u32));
        for code in 0..6usize.pow(total as u32) {
            let mut c = code;
            let levels = sizes
                .iter()
                .map(|&n| {
                    (0..n)
                        .map(|_| {
                            let g = all[c % 6];
                            c /= 6;
                            g
                        })
                        .collect()
                })
                .collect();
            out.push(Self::new(height, levels)?);
        }
        Ok(out)
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn k(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn levels(&self) -> &[Vec<Gadget>] {
        &self.levels
    }
}

fn encode_one_level(y: &Input, level: &[Gadget]) -> Input {
    let mut bits = BitVec::with_capacity(3 * y.len());
    for (i, g) in level.iter().enumerate() {
        bits.extend(g.apply(y.bits[i]));
    }
    Input { height: y.height + 1, bits }
}

/// `psi^(k)(y, r)`: embeds a hard input of height `h - k` into height `h`.
pub fn encode(y: &Input, r: &EncodingRandomness) -> Result<Input> {
    if y.height + r.k() != r.height {
        return Err(Error::InvalidArgument(format!(
            "input height {} plus k = {} differs from the encoding height {}",
            y.height,
            r.k(),
            r.height
        )));
    }
    if !y.is_hard() {
        return Err(Error::NotHard);
    }
    let mut x = y.clone();
    for level in r.levels.iter().rev() {
        x = encode_one_level(&x, level);
    }
    Ok(x)
}

/// `q_i(r)` for every source bit `i`: the leaf of the encoded input that
/// carries `y_i`. All other leaves are fixed bits.
pub fn q_positions(r: &EncodingRandomness) -> Vec<Leaf> {
    let sources = pow3(r.height - r.k());
    (0..sources)
        .map(|i| {
            let pos = r.levels.iter().rev().fold(i, |pos, level| {
                3 * pos + (level[pos as usize].s as u64 - 1)
            });
            Leaf(pos)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x(s: &str) -> Input {
        Input::from_line(s).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert!(x("1").eval());
        assert!(!x("010").eval());
        assert!(!x("110 100 010").eval());
    }

    #[test]
    fn eval_at_addresses() {
        let input = x("110 100 010");
        assert!(input.eval_at(&"0".parse().unwrap()).unwrap());
        assert!(!input.eval_at(&"1".parse().unwrap()).unwrap());
        assert!(input.eval_at(&"2.1".parse().unwrap()).unwrap());
        assert!(input.eval_at(&"0.1.1".parse().unwrap()).is_err());
    }

    #[test]
    fn hardness_examples() {
        assert!(x("010").is_hard());
        assert!(!x("000").is_hard());
        assert!(x("001 010 011").is_hard());
        assert!(!x("001 010 100").is_hard());
    }

    #[test]
    fn minority_examples() {
        assert_eq!(minority_path(&x("010")).unwrap().1.one_based(), 2);
        assert_eq!(minority_path(&x("110")).unwrap().1.one_based(), 3);
        let (path, m) = minority_path(&x("001 010 110")).unwrap();
        assert_eq!(m.one_based(), 9);
        assert_eq!(path.len(), 3);
        assert_eq!(path[1].to_string(), "2");
        assert_eq!(minority_path(&x("000")), Err(Error::NotHard));
    }

    #[test]
    fn sensitive_examples() {
        let s: Vec<u64> = sensitive_bits(&x("1")).unwrap().iter().map(|l| l.one_based()).collect();
        assert_eq!(s, vec![1]);
        let s: Vec<u64> = sensitive_bits(&x("010")).unwrap().iter().map(|l| l.one_based()).collect();
        assert_eq!(s, vec![1, 3]);
        assert!(sensitive_bits(&x("111")).is_err());
    }

    #[test]
    fn sample_h0_with_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let s = sample_hard(0, Some(true), &mut rng).unwrap();
            assert_eq!(s.input().to_line(), "1");
            assert_eq!(s.absolute_minority().one_based(), 1);
        }
    }

    #[test]
    fn sampled_path_matches_recomputed_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for h in 0..6 {
            let s = sample_hard(h, None, &mut rng).unwrap();
            let again = HardInput::new(s.input().clone()).unwrap();
            assert_eq!(s, again);
        }
    }

    #[test]
    fn height_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            sample_hard(19, None, &mut rng).unwrap_err(),
            Error::HeightCap { height: 19, max: MAX_HEIGHT }
        );
        assert!(Input::zeros(19).is_err());
    }

    #[test]
    fn fixture_round_trip_and_validation() {
        let hx = HardInput::new(x("001010110")).unwrap();
        let text = hx.to_fixture();
        assert_eq!(text, "h=2 root=0 m=9\n001010110\n");
        assert_eq!(HardInput::from_fixture(&text).unwrap(), hx);
        assert!(HardInput::from_fixture("h=2 root=1 m=9\n001010110\n").is_err());
        assert!(HardInput::from_fixture("h=1 root=0 m=1\n000\n").is_err());
    }

    #[test]
    fn gadget_definition() {
        let y = Input::from_line("0").unwrap();
        let r = EncodingRandomness::new(1, vec![vec![Gadget::new(true, 3).unwrap()]]).unwrap();
        assert_eq!(encode(&y, &r).unwrap().to_line(), "100");
        assert_eq!(q_positions(&r)[0].one_based(), 3);
        for s in 1..=3u8 {
            let r = EncodingRandomness::new(1, vec![vec![Gadget::new(false, s).unwrap()]]).unwrap();
            assert_eq!(q_positions(&r)[0].one_based(), s as u64);
        }
    }

    #[test]
    fn encode_rejects_bad_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = EncodingRandomness::random(2, 1, &mut rng).unwrap();
        assert!(encode(&x("0"), &r).is_err());
        assert_eq!(encode(&x("000"), &r), Err(Error::NotHard));
        assert!(EncodingRandomness::new(2, vec![vec![Gadget::all()[0]; 2]]).is_err());
    }

    #[test]
    fn tree_addr_round_trip() {
        for h in 0..4 {
            for off in 0..pow3(h) {
                let a = TreeAddr::from_leaf(h, Leaf::from_offset(off));
                assert_eq!(a.node(h).unwrap(), NodeId::leaf(off));
                assert_eq!(a.to_string().parse::<TreeAddr>().unwrap(), a);
            }
        }
    }
}
