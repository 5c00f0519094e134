//! Query-counting evaluation of `3-MAJ_h`: full read, the naive directional
//! algorithm and the depth-two `Evaluate`/`Complete` pair.
//!
//! Every algorithm is written once against [`Runner`]. A [`Session`] samples
//! each random choice; the expectation interpreter follows every choice and
//! averages the query counts exactly.

mod exact;
mod montecarlo;
mod runner;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Input, Leaf, NodeId, TreeAddr};

pub use exact::{exact_expected_queries, exact_hard_average, Entry};
pub use montecarlo::{monte_carlo, Distribution, MonteCarloResult};
pub use runner::{QueryOracle, Runner, Session};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmId {
    #[serde(rename = "full", alias = "full-read")]
    FullRead,
    Naive,
    Depth2,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 3] = [AlgorithmId::FullRead, AlgorithmId::Naive, AlgorithmId::Depth2];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::FullRead => "full",
            AlgorithmId::Naive => "naive",
            AlgorithmId::Depth2 => "depth2",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "full" | "full-read" => Ok(AlgorithmId::FullRead),
            "naive" => Ok(AlgorithmId::Naive),
            "depth2" | "depth-2" => Ok(AlgorithmId::Depth2),
            _ => Err(Error::InvalidArgument(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// The permutation of `{0,1,2}` with index `p` in `0..6`.
fn permute(items: [NodeId; 3], p: usize) -> [NodeId; 3] {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let q = PERMS[p];
    [items[q[0]], items[q[1]], items[q[2]]]
}

pub(crate) fn run_root<R: Runner>(alg: AlgorithmId, r: &mut R, root: NodeId) -> bool {
    match alg {
        AlgorithmId::FullRead => full_read(r, root),
        AlgorithmId::Naive => naive(r, root),
        AlgorithmId::Depth2 => evaluate(r, root),
    }
}

pub(crate) fn full_read<R: Runner>(r: &mut R, v: NodeId) -> bool {
    let val = if v.height == 0 {
        r.query(Leaf::from_offset(v.offset))
    } else {
        let ones = v.children().into_iter().filter(|&c| full_read(r, c)).count();
        ones >= 2
    };
    r.record(v, val);
    val
}

pub(crate) fn naive<R: Runner>(r: &mut R, v: NodeId) -> bool {
    let val = if v.height == 0 {
        r.query(Leaf::from_offset(v.offset))
    } else {
        r.uniform(6, &mut |r, p| {
            let [y1, y2, y3] = permute(v.children(), p);
            let a = naive(r, y1);
            let b = naive(r, y2);
            if a == b {
                a
            } else {
                naive(r, y3)
            }
        })
    };
    r.record(v, val);
    val
}

pub(crate) fn evaluate<R: Runner>(r: &mut R, v: NodeId) -> bool {
    let val = if v.height == 0 {
        r.query(Leaf::from_offset(v.offset))
    } else {
        r.uniform(6, &mut |r, p| {
            let [y1, y2, y3] = permute(v.children(), p);
            if v.height == 1 {
                let a = evaluate(r, y1);
                let b = evaluate(r, y2);
                return if a == b { a } else { evaluate(r, y3) };
            }
            r.uniform(9, &mut |r, g| {
                let (x1, x2) = (y1.child(g / 3), y2.child(g % 3));
                evaluate_deep(r, [y1, y2, y3], x1, x2)
            })
        })
    };
    r.record(v, val);
    val
}

fn evaluate_deep<R: Runner>(r: &mut R, [y1, y2, y3]: [NodeId; 3], x1: NodeId, x2: NodeId) -> bool {
    let a1 = evaluate(r, x1);
    let a2 = evaluate(r, x2);
    if a1 != a2 {
        let v3 = evaluate(r, y3);
        // a1 != a2, so exactly one grandchild agrees with y3.
        let ((yb, xb), (yo, xo)) = if a1 == v3 { ((y1, x1), (y2, x2)) } else { ((y2, x2), (y1, x1)) };
        debug_assert!((a1 == v3) != (a2 == v3));
        let vb = complete(r, yb, xb);
        if vb == v3 {
            vb
        } else {
            complete(r, yo, xo)
        }
    } else {
        let v1 = complete(r, y1, x1);
        if v1 == a1 {
            let v2 = complete(r, y2, x2);
            if v2 == v1 {
                v1
            } else {
                evaluate(r, y3)
            }
        } else {
            let v3 = evaluate(r, y3);
            if v3 == v1 {
                v1
            } else {
                complete(r, y2, x2)
            }
        }
    }
}

/// `Complete(v, y1)`: `y1` is a child of `v` whose value is already known.
pub(crate) fn complete<R: Runner>(r: &mut R, v: NodeId, y1: NodeId) -> bool {
    debug_assert!(y1.is_child_of(v));
    let a = r.known(y1).expect("Complete needs the value of its evaluated child");
    let others: Vec<NodeId> = v.children().into_iter().filter(|&c| c != y1).collect();
    let val = r.uniform(2, &mut |r, p| {
        let (y2, y3) = if p == 0 { (others[0], others[1]) } else { (others[1], others[0]) };
        if v.height == 1 {
            let b = evaluate(r, y2);
            return if b == a { a } else { evaluate(r, y3) };
        }
        r.uniform(3, &mut |r, g| {
            let x2 = y2.child(g);
            let b = evaluate(r, x2);
            if a != b {
                let c = evaluate(r, y3);
                if a == c {
                    a
                } else {
                    complete(r, y2, x2)
                }
            } else {
                let c = complete(r, y2, x2);
                if a == c {
                    a
                } else {
                    evaluate(r, y3)
                }
            }
        })
    });
    r.record(v, val);
    val
}

pub(crate) fn resolve_child(h: u32, node: &TreeAddr, child: &TreeAddr) -> Result<(NodeId, NodeId)> {
    let v = node.node(h)?;
    let y = child.node(h)?;
    if !y.is_child_of(v) {
        return Err(Error::NotAChild { parent: node.to_string(), child: child.to_string() });
    }
    Ok((v, y))
}

/// Checks the formula height of `input` against an algorithm-specific cap.
pub(crate) fn guard(input: &Input, max: u32) -> Result<()> {
    if input.height() > max {
        Err(Error::EnumerationGuard { height: input.height(), max })
    } else {
        Ok(())
    }
}
