use num_traits::Zero;

use super::runner::{Expecter, Runner};
use super::{complete, guard, resolve_child, run_root, AlgorithmId};
use crate::error::{Error, Result};
use crate::formula::{hard_inputs_exhaustive, Input, TreeAddr};
use crate::rational::{self, Rational};

/// Where the exact interpreter starts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Entry {
    /// Evaluate the whole formula.
    #[default]
    Root,
    /// `Complete(node, known_child)` with the value of `known_child` given
    /// for free.
    Complete { node: TreeAddr, known_child: TreeAddr },
}

/// Exact expected number of queries of `alg` on `input`, averaged over all of
/// the algorithm's random choices. Panics if any branch returns a wrong value.
pub fn exact_expected_queries(alg: AlgorithmId, input: &Input, entry: &Entry) -> Result<Rational> {
    match alg {
        AlgorithmId::Depth2 => guard(input, 3)?,
        AlgorithmId::Naive => guard(input, 4)?,
        AlgorithmId::FullRead => guard(input, 8)?,
    }
    let mut ex = Expecter::new(input);
    match entry {
        Entry::Root => {
            let root = input.root();
            let v = run_root(alg, &mut ex, root);
            assert_eq!(v, input.eval(), "{alg} returned a wrong value on {input:?}");
        }
        Entry::Complete { node, known_child } => {
            if alg != AlgorithmId::Depth2 {
                return Err(Error::InvalidArgument(format!("{alg} has no Complete entry point")));
            }
            let (v, y1) = resolve_child(input.height(), node, known_child)?;
            ex.reveal(y1);
            let val = complete(&mut ex, v, y1);
            assert_eq!(val, input.eval_node(v), "Complete returned a wrong value on {input:?}");
            debug_assert!(ex.known(v).is_some());
        }
    }
    Ok(ex.cost().clone())
}

/// Exact expectation of `alg` over the uniform hard distribution, by
/// enumerating `H_h`; only for `h <= 2`.
pub fn exact_hard_average(alg: AlgorithmId, h: u32) -> Result<Rational> {
    let inputs = hard_inputs_exhaustive(h, None)?;
    let mut total = Rational::zero();
    for x in &inputs {
        total += exact_expected_queries(alg, x.input(), &Entry::Root)?;
    }
    Ok(total / rational::int(inputs.len() as i64))
}
