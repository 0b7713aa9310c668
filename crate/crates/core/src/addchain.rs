//! Addition chains for prescribed target sets: validation, optimal search
//! by iterative deepening, and the seven fixed chains that drive the
//! Toom-4 interpolation scalars.
//!
//! A chain for a target set S is an increasing sequence starting at 1 in
//! which every later element is the sum of two earlier ones (doubling
//! allowed) and every member of S appears. Its length (elements minus one)
//! is the number of block additions needed to materialize all multiples.

use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use crate::toom4::EvalPoint;
use crate::Error;

#[derive(Clone, PartialEq, Eq)]
pub struct AdditionChain {
    elements: Vec<u64>,
    targets: BTreeSet<u64>,
}

impl std::fmt::Debug for AdditionChain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "AdditionChain({:?} for {:?})",
            self.elements, self.targets
        )
    }
}

/// First rule violation found while validating a chain.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainDefect {
    #[error("chain is empty")]
    Empty,
    #[error("chain must start at 1, found {0}")]
    FirstNotOne(u64),
    #[error("element {value} at index {index} is not strictly increasing")]
    NotIncreasing { index: usize, value: u64 },
    #[error("element {value} at index {index} is not a sum of two earlier elements")]
    NotASum { index: usize, value: u64 },
    #[error("target {0} does not appear in the chain")]
    MissingTarget(u64),
}

impl AdditionChain {
    pub fn new(elements: Vec<u64>, targets: impl IntoIterator<Item = u64>) -> Self {
        Self {
            elements,
            targets: targets.into_iter().collect(),
        }
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn targets(&self) -> &BTreeSet<u64> {
        &self.targets
    }

    /// Number of additions the chain encodes: elements minus one.
    pub fn additions(&self) -> usize {
        self.elements.len().saturating_sub(1)
    }

    /// Checks both chain invariants; reports the first violation.
    pub fn validate(&self) -> Result<(), ChainDefect> {
        self.decompose().map(|_| ())
    }

    /// For each element after the first, a pair of earlier positions that
    /// sum to it (the lexicographically first such pair).
    pub fn decompose(&self) -> Result<Vec<(usize, usize)>, ChainDefect> {
        if self.elements.is_empty() {
            return Err(ChainDefect::Empty);
        }
        if self.elements[0] != 1 {
            return Err(ChainDefect::FirstNotOne(self.elements[0]));
        }
        let mut steps = Vec::with_capacity(self.elements.len() - 1);
        for (m, &value) in self.elements.iter().enumerate().skip(1) {
            if value <= self.elements[m - 1] {
                return Err(ChainDefect::NotIncreasing { index: m, value });
            }
            let pair = (0..m).find_map(|i| {
                (i..m)
                    .find_map(|j| (self.elements[i] + self.elements[j] == value).then_some((i, j)))
            });
            match pair {
                Some(p) => steps.push(p),
                None => return Err(ChainDefect::NotASum { index: m, value }),
            }
        }
        if let Some(&t) = self.targets.iter().find(|t| !self.elements.contains(t)) {
            return Err(ChainDefect::MissingTarget(t));
        }
        Ok(steps)
    }
}

// ---------------------------------------------------------------------------
// Optimal search
// ---------------------------------------------------------------------------

/// Depth and time limits for [`search_optimal`].
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub max_len: u32,
    pub time_limit: Option<Duration>,
}

impl SearchBudget {
    pub fn with_max_len(max_len: u32) -> Self {
        Self {
            max_len,
            time_limit: None,
        }
    }

    pub fn timed(max_len: u32, time_limit: Duration) -> Self {
        Self {
            max_len,
            time_limit: Some(time_limit),
        }
    }
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    /// A chain of minimal length within the budget; shorter lengths were
    /// exhausted, so this is optimal (not merely feasible).
    Found { chain: AdditionChain, minimal: bool },
    /// No chain of length `<= max_len` exists; proven by enumeration.
    Exhausted { max_len: u32 },
    /// The time limit struck first. Lengths up to `exhausted_len` (when
    /// present) were fully enumerated without success.
    TimedOut { exhausted_len: Option<u32> },
}

enum Dfs {
    Found,
    Exhausted,
    TimedOut,
}

struct SearchState<'a> {
    targets: &'a BTreeSet<u64>,
    elements: Vec<u64>,
    deadline: Option<Instant>,
}

impl SearchState<'_> {
    /// Depth-first extension of an increasing chain. Candidates never
    /// exceed the smallest missing target (a larger element would make it
    /// unreachable), and the largest missing target must stay within
    /// doubling range of the remaining steps.
    fn dfs(&mut self, missing: usize, limit: u32) -> Dfs {
        if missing == 0 {
            return Dfs::Found;
        }
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                return Dfs::TimedOut;
            }
        }
        let used = self.elements.len() as u32 - 1;
        let remaining = limit - used;
        if (missing as u32) > remaining {
            return Dfs::Exhausted;
        }
        let last = *self.elements.last().unwrap();
        let smallest_missing = *self.targets.iter().find(|&&t| t > last).unwrap();
        let largest_missing = *self.targets.iter().next_back().unwrap();
        if reach_bound(last, remaining) < largest_missing {
            return Dfs::Exhausted;
        }

        let mut candidates: Vec<u64> = Vec::new();
        for (i, &x) in self.elements.iter().enumerate() {
            for &y in &self.elements[i..] {
                // checked_add: sums past u64 can only overshoot targets.
                match x.checked_add(y) {
                    Some(s) if s > last && s <= smallest_missing => candidates.push(s),
                    _ => {}
                }
            }
        }
        candidates.sort_unstable();
        candidates.dedup();

        for e in candidates {
            self.elements.push(e);
            let hit = self.targets.contains(&e) as usize;
            match self.dfs(missing - hit, limit) {
                Dfs::Found => return Dfs::Found,
                Dfs::TimedOut => {
                    self.elements.pop();
                    return Dfs::TimedOut;
                }
                Dfs::Exhausted => {
                    self.elements.pop();
                }
            }
        }
        Dfs::Exhausted
    }
}

fn reach_bound(last: u64, steps: u32) -> u64 {
    if steps >= last.leading_zeros() {
        u64::MAX
    } else {
        last << steps
    }
}

fn ceil_log2(x: u64) -> u32 {
    64 - (x - 1).leading_zeros()
}

/// Shortest addition chain containing all targets, found by iterative
/// deepening over increasing chains. Deterministic: among minimum-length
/// chains the lexicographically smallest is returned.
pub fn search_optimal(targets: &[u64], budget: &SearchBudget) -> Result<SearchOutcome, Error> {
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    assert!(targets.iter().all(|&t| t >= 1), "targets must be positive");
    let tset: BTreeSet<u64> = targets.iter().copied().collect();
    let largest = *tset.iter().next_back().unwrap();
    let above_one = tset.iter().filter(|&&t| t > 1).count() as u32;
    // No chain shorter than the doubling bound on the largest target or
    // the element count of the targets themselves can exist.
    let lower = ceil_log2(largest).max(above_one);
    let deadline = budget.time_limit.map(|d| Instant::now() + d);

    for limit in lower..=budget.max_len {
        let mut state = SearchState {
            targets: &tset,
            elements: vec![1],
            deadline,
        };
        let missing = tset.len() - tset.contains(&1) as usize;
        match state.dfs(missing, limit) {
            Dfs::Found => {
                let chain = AdditionChain::new(state.elements, tset);
                debug_assert!(chain.validate().is_ok());
                return Ok(SearchOutcome::Found {
                    chain,
                    minimal: true,
                });
            }
            Dfs::Exhausted => continue,
            Dfs::TimedOut => {
                let exhausted_len = limit.checked_sub(1);
                return Ok(SearchOutcome::TimedOut { exhausted_len });
            }
        }
    }
    Ok(SearchOutcome::Exhausted {
        max_len: budget.max_len,
    })
}

// ---------------------------------------------------------------------------
// The Toom-4 interpolation chains
// ---------------------------------------------------------------------------

/// A chain labeled with the evaluation point whose product it scales.
#[derive(Clone, Debug)]
pub struct LabeledChain {
    pub point: EvalPoint,
    pub chain: AdditionChain,
}

/// The seven chains generating every scalar multiple the Toom-4
/// interpolation needs, one per evaluation point, with the required
/// multiples as targets. Lengths 11, 10, 8, 7, 4, 3, 15 (58 additions
/// total).
pub fn toom4_chains() -> &'static [LabeledChain; 7] {
    static CHAINS: OnceLock<[LabeledChain; 7]> = OnceLock::new();
    CHAINS.get_or_init(|| {
        let chain = |point, elements: &[u64], targets: &[u64]| LabeledChain {
            point,
            chain: AdditionChain::new(elements.to_vec(), targets.iter().copied()),
        };
        [
            chain(
                EvalPoint::Zero,
                &[1, 2, 4, 8, 10, 20, 30, 40, 50, 100, 120, 150],
                &[10, 30, 40, 50, 120, 150],
            ),
            chain(
                EvalPoint::One,
                &[1, 2, 4, 8, 10, 20, 30, 40, 70, 80, 120],
                &[10, 20, 70, 80, 120],
            ),
            chain(
                EvalPoint::NegOne,
                &[1, 2, 4, 5, 10, 20, 40, 60, 80],
                &[5, 20, 60, 80],
            ),
            chain(EvalPoint::Two, &[1, 2, 4, 5, 10, 20, 30, 35], &[5, 30, 35]),
            chain(EvalPoint::NegTwo, &[1, 2, 4, 5, 6], &[5, 6]),
            chain(EvalPoint::Three, &[1, 2, 4, 5], &[4, 5]),
            chain(
                EvalPoint::Infinity,
                &[
                    1, 2, 4, 8, 10, 20, 40, 80, 120, 240, 360, 480, 600, 1080, 1440, 1800,
                ],
                &[120, 360, 480, 600, 1440, 1800],
            ),
        ]
    })
}
