use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::runner::Session;
use super::AlgorithmId;
use crate::error::{Error, Result};
use crate::formula::{check_height, sample_hard, Input};

/// 99% two-sided normal quantile.
const Z99: f64 = 2.5758293035489;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distribution {
    /// Uniform over `H_h`, or over `H_h^b` when a root value is given.
    UniformHard { root: Option<bool> },
    Fixed(Input),
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::UniformHard { root: None } => write!(f, "uniform-hard"),
            Distribution::UniformHard { root: Some(b) } => write!(f, "uniform-hard-{}", *b as u8),
            Distribution::Fixed(x) => write!(f, "fixed:{}", x.to_line()),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-hard" => Ok(Distribution::UniformHard { root: None }),
            "uniform-hard-0" => Ok(Distribution::UniformHard { root: Some(false) }),
            "uniform-hard-1" => Ok(Distribution::UniformHard { root: Some(true) }),
            _ => match s.strip_prefix("fixed:") {
                Some(bits) => Ok(Distribution::Fixed(Input::from_line(bits)?)),
                None => Err(Error::Parse(format!("unknown distribution {s:?}"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub alg: AlgorithmId,
    pub h: u32,
    pub distribution: String,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    pub stddev: f64,
    /// 99% normal confidence interval for the mean.
    pub ci99: [f64; 2],
}

impl MonteCarloResult {
    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.stddev / (self.trials as f64).sqrt()
    }

    /// `|mean - target| <= sigmas * std_error`.
    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.std_error() + 1e-12 * target.abs().max(1.0)
    }
}

/// Runs `trials` independent evaluations. Trial `i` draws from a ChaCha8
/// stream selected by `(seed, i)`, so results do not depend on `threads`.
/// Sampling errors (wrong output) abort with a panic.
pub fn monte_carlo(
    alg: AlgorithmId,
    h: u32,
    distribution: &Distribution,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<MonteCarloResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    check_height(h)?;
    if let Distribution::Fixed(x) = distribution {
        if x.height() != h {
            return Err(Error::InvalidArgument(format!(
                "fixed input has height {}, expected {h}",
                x.height()
            )));
        }
    }
    let run = || -> Vec<u64> {
        (0..trials)
            .into_par_iter()
            .map(|trial| one_trial(alg, h, distribution, seed, trial))
            .collect()
    };
    let counts = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(run),
        None => run(),
    };
    // Integer sums keep the statistics independent of reduction order.
    let sum: u128 = counts.iter().map(|&c| c as u128).sum();
    let sum_sq: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
    let n = trials as f64;
    let mean = sum as f64 / n;
    let var = if trials > 1 {
        let num = trials as u128 * sum_sq - sum * sum;
        num as f64 / (n * (n - 1.0))
    } else {
        0.0
    };
    let stddev = var.max(0.0).sqrt();
    let half = Z99 * stddev / n.sqrt();
    Ok(MonteCarloResult {
        alg,
        h,
        distribution: distribution.to_string(),
        trials,
        seed,
        mean,
        stddev,
        ci99: [mean - half, mean + half],
    })
}

fn one_trial(alg: AlgorithmId, h: u32, distribution: &Distribution, seed: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let sampled;
    let input = match distribution {
        Distribution::UniformHard { root } => {
            sampled = sample_hard(h, *root, &mut rng).expect("height checked").into_input();
            &sampled
        }
        Distribution::Fixed(x) => x,
    };
    let mut session = Session::new(input, rng);
    let value = session.run(alg);
    assert_eq!(value, input.eval(), "{alg} returned a wrong value");
    session.count()
}
