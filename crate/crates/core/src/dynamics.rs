//! Exact evolution of the scalar dynamics and termination detection.
//!
//! Every agent moves to the average of all opinions within distance
//! `epsilon` of its own (closed inequality, self included). Because the
//! profile is kept sorted, each neighbor set is a contiguous index interval
//! and all intervals can be found in a single two-pointer sweep.

use num::{BigInt, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{from_usize, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpinionProfile {
    epsilon: Rational,
    opinions: Vec<Rational>,
    time: usize,
}

impl OpinionProfile {
    /// Builds a profile at t = 0, rejecting unsorted input.
    pub fn new(epsilon: Rational, opinions: Vec<Rational>) -> Result<Self> {
        Self::validate_header(&epsilon, &opinions)?;
        if let Some(i) = opinions.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::Unsorted(i + 1));
        }
        Ok(Self {
            epsilon,
            opinions,
            time: 0,
        })
    }

    /// Builds a profile at t = 0, sorting the opinions first. The flag is
    /// true when sorting actually changed the order.
    pub fn sorted(epsilon: Rational, mut opinions: Vec<Rational>) -> Result<(Self, bool)> {
        Self::validate_header(&epsilon, &opinions)?;
        let reordered = opinions.windows(2).any(|w| w[0] > w[1]);
        if reordered {
            opinions.sort();
        }
        Ok((
            Self {
                epsilon,
                opinions,
                time: 0,
            },
            reordered,
        ))
    }

    fn validate_header(epsilon: &Rational, opinions: &[Rational]) -> Result<()> {
        if !epsilon.is_positive() {
            return Err(Error::NonPositiveEpsilon(epsilon.to_string()));
        }
        if opinions.is_empty() {
            return Err(Error::EmptyProfile);
        }
        Ok(())
    }

    pub fn with_time(mut self, time: usize) -> Self {
        self.time = time;
        self
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn opinions(&self) -> &[Rational] {
        &self.opinions
    }

    pub fn into_opinions(self) -> Vec<Rational> {
        self.opinions
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn len(&self) -> usize {
        self.opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opinions.is_empty()
    }

    /// Same opinions with a different confidence bound.
    pub fn with_epsilon(&self, epsilon: Rational) -> Result<Self> {
        Self::validate_header(&epsilon, &self.opinions)?;
        Ok(Self {
            epsilon,
            opinions: self.opinions.clone(),
            time: self.time,
        })
    }
}

/// Inclusive index bounds `[lo, hi]` of one agent's neighbor set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NeighborInterval {
    pub lo: usize,
    pub hi: usize,
}

impl NeighborInterval {
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.lo <= i && i <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminationResult {
    /// Termination time, or `max_steps` when truncated.
    pub t: usize,
    pub steady_state: OpinionProfile,
    pub truncated: bool,
}

/// The profiles x(0), ..., x(T) of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub profiles: Vec<OpinionProfile>,
    pub terminated: bool,
}

impl Trajectory {
    pub fn epsilon(&self) -> &Rational {
        self.profiles[0].epsilon()
    }

    pub fn agents(&self) -> usize {
        self.profiles[0].len()
    }

    /// Index of the last stored profile (T for a terminated run).
    pub fn last_time(&self) -> usize {
        self.profiles.len() - 1
    }
}

/// Neighbor interval of agent `i` found by scanning outward from `i`.
pub fn neighbors(profile: &OpinionProfile, i: usize) -> Result<NeighborInterval> {
    let x = profile.opinions();
    if i >= x.len() {
        return Err(Error::IndexOutOfRange { index: i, n: x.len() });
    }
    Ok(neighbors_in(x, &profile.epsilon, i))
}

pub(crate) fn neighbors_in(x: &[Rational], epsilon: &Rational, i: usize) -> NeighborInterval {
    let low = &x[i] - epsilon;
    let high = &x[i] + epsilon;
    let mut lo = i;
    while lo > 0 && x[lo - 1] >= low {
        lo -= 1;
    }
    let mut hi = i;
    while hi + 1 < x.len() && x[hi + 1] <= high {
        hi += 1;
    }
    NeighborInterval { lo, hi }
}

/// All neighbor intervals in one O(n) two-pointer pass.
pub fn all_neighbors(profile: &OpinionProfile) -> Vec<NeighborInterval> {
    intervals(profile.opinions(), &profile.epsilon)
}

pub(crate) fn intervals(x: &[Rational], epsilon: &Rational) -> Vec<NeighborInterval> {
    let mut out = Vec::with_capacity(x.len());
    let (mut lo, mut hi) = (0, 0);
    for i in 0..x.len() {
        if i > 0 && x[i] == x[i - 1] {
            out.push(out[i - 1]);
            continue;
        }
        let low = &x[i] - epsilon;
        while x[lo] < low {
            lo += 1;
        }
        let high = &x[i] + epsilon;
        hi = hi.max(i);
        while hi + 1 < x.len() && x[hi + 1] <= high {
            hi += 1;
        }
        out.push(NeighborInterval { lo, hi });
    }
    out
}

/// One synchronous update. Runs in O(n) rational operations: the window
/// sum is maintained incrementally because both interval ends only move
/// right.
pub fn step(profile: &OpinionProfile) -> OpinionProfile {
    let next = step_opinions(profile.opinions(), &profile.epsilon);
    debug_assert!(
        next.windows(2).all(|w| w[0] <= w[1]),
        "order must be preserved by the update"
    );
    OpinionProfile {
        epsilon: profile.epsilon.clone(),
        opinions: next,
        time: profile.time + 1,
    }
}

pub(crate) fn step_opinions(x: &[Rational], epsilon: &Rational) -> Vec<Rational> {
    let windows = intervals(x, epsilon);
    let mut out: Vec<Rational> = Vec::with_capacity(x.len());
    let mut sum = Rational::zero();
    // current window is [win_lo, win_hi) in half-open form
    let (mut win_lo, mut win_hi) = (0, 0);
    for (i, w) in windows.iter().enumerate() {
        if i > 0 && windows[i - 1] == *w {
            let prev = out[i - 1].clone();
            out.push(prev);
            continue;
        }
        while win_hi <= w.hi {
            sum += &x[win_hi];
            win_hi += 1;
        }
        while win_lo < w.lo {
            sum -= &x[win_lo];
            win_lo += 1;
        }
        out.push(&sum / from_usize(w.len()));
    }
    out
}

pub fn is_terminated(profile: &OpinionProfile) -> bool {
    step_opinions(profile.opinions(), &profile.epsilon) == profile.opinions
}

/// Default step budget 3n^3 + n from the termination theorem.
pub fn default_max_steps(n: usize) -> usize {
    3 * n * n * n + n
}

/// Same budget as an exact integer, for comparisons that must not overflow.
pub fn theorem_bound(n: usize) -> BigInt {
    let n = BigInt::from(n);
    BigInt::from(3) * &n * &n * &n + n
}

/// Iterates until x(t) = x(t+1) or `max_steps` updates have been made.
/// Termination of x(max_steps) itself is still detected.
pub fn simulate(initial: &OpinionProfile, max_steps: usize) -> (Trajectory, TerminationResult) {
    let start = initial.clone().with_time(0);
    let mut profiles = vec![start];
    loop {
        let current = profiles.last().expect("trajectory is never empty");
        let next = step(current);
        let t = current.time;
        if next.opinions == current.opinions {
            let result = TerminationResult {
                t,
                steady_state: current.clone(),
                truncated: false,
            };
            let trajectory = Trajectory {
                profiles,
                terminated: true,
            };
            return (trajectory, result);
        }
        if t >= max_steps {
            let result = TerminationResult {
                t,
                steady_state: current.clone(),
                truncated: true,
            };
            let trajectory = Trajectory {
                profiles,
                terminated: false,
            };
            return (trajectory, result);
        }
        profiles.push(next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{from_int, ratio};

    fn profile(eps: Rational, xs: &[Rational]) -> OpinionProfile {
        OpinionProfile::new(eps, xs.to_vec()).unwrap()
    }

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&v| from_int(v)).collect()
    }

    #[test]
    fn neighbors_of_three_chain() {
        let p = profile(from_int(1), &ints(&[0, 1, 2]));
        assert_eq!(neighbors(&p, 1).unwrap(), NeighborInterval { lo: 0, hi: 2 });
        assert_eq!(neighbors(&p, 0).unwrap(), NeighborInterval { lo: 0, hi: 1 });
        assert!(matches!(
            neighbors(&p, 3),
            Err(Error::IndexOutOfRange { index: 3, n: 3 })
        ));
    }

    #[test]
    fn singleton_neighborhood() {
        let p = profile(ratio(1, 7), &ints(&[5]));
        assert_eq!(neighbors(&p, 0).unwrap(), NeighborInterval { lo: 0, hi: 0 });
        assert_eq!(all_neighbors(&p), vec![NeighborInterval { lo: 0, hi: 0 }]);
    }

    #[test]
    fn all_neighbors_examples() {
        let p = profile(from_int(1), &ints(&[0, 1, 2]));
        let got: Vec<_> = all_neighbors(&p).iter().map(|w| (w.lo, w.hi)).collect();
        assert_eq!(got, vec![(0, 1), (0, 2), (1, 2)]);

        let p = profile(from_int(1), &ints(&[0, 2]));
        let got: Vec<_> = all_neighbors(&p).iter().map(|w| (w.lo, w.hi)).collect();
        assert_eq!(got, vec![(0, 0), (1, 1)]);

        let p = profile(ratio(1, 1000), &ints(&[4, 4, 4, 4]));
        assert!(all_neighbors(&p).iter().all(|w| w.lo == 0 && w.hi == 3));
    }

    #[test]
    fn tie_at_exactly_epsilon_is_a_neighbor() {
        let p = profile(ratio(1, 2), &[from_int(0), ratio(1, 2)]);
        assert_eq!(neighbors(&p, 0).unwrap().hi, 1);
    }

    #[test]
    fn step_examples() {
        let p = profile(from_int(1), &ints(&[0, 1, 2]));
        let q = step(&p);
        assert_eq!(q.opinions(), &[ratio(1, 2), from_int(1), ratio(3, 2)]);
        assert_eq!(q.time(), 1);
        let r = step(&q);
        assert_eq!(r.opinions(), &ints(&[1, 1, 1])[..]);

        let p = profile(from_int(1), &ints(&[0, 2]));
        assert_eq!(step(&p).opinions(), p.opinions());
    }

    #[test]
    fn termination_examples() {
        assert!(is_terminated(&profile(from_int(1), &ints(&[0, 2]))));
        assert!(!is_terminated(&profile(from_int(1), &ints(&[0, 1, 2]))));
        assert!(is_terminated(&profile(from_int(1), &ints(&[3, 3, 3]))));
    }

    #[test]
    fn simulate_examples() {
        let (traj, res) = simulate(&profile(from_int(1), &ints(&[0, 1, 2])), 84);
        assert_eq!(res.t, 2);
        assert!(!res.truncated);
        assert_eq!(res.steady_state.opinions(), &ints(&[1, 1, 1])[..]);
        assert_eq!(traj.profiles.len(), 3);

        let (_, res) = simulate(&profile(from_int(1), &[from_int(0), ratio(3, 4)]), 10);
        assert_eq!(res.t, 1);
        assert_eq!(res.steady_state.opinions(), &[ratio(3, 8), ratio(3, 8)]);

        let (traj, res) = simulate(&profile(ratio(2, 3), &ints(&[0])), 0);
        assert_eq!(res.t, 0);
        assert!(!res.truncated);
        assert_eq!(traj.profiles.len(), 1);
    }

    #[test]
    fn truncation_is_reported() {
        let (traj, res) = simulate(&profile(from_int(1), &ints(&[0, 1, 2])), 1);
        assert!(res.truncated);
        assert_eq!(res.t, 1);
        assert!(!traj.terminated);
        assert_eq!(traj.profiles.len(), 2);

        // x(2) is terminal and reached exactly at the budget
        let (_, res) = simulate(&profile(from_int(1), &ints(&[0, 1, 2])), 2);
        assert!(!res.truncated);
    }

    #[test]
    fn unsorted_input() {
        assert!(matches!(
            OpinionProfile::new(from_int(1), ints(&[2, 1])),
            Err(Error::Unsorted(1))
        ));
        let (p, reordered) = OpinionProfile::sorted(from_int(1), ints(&[2, 0, 1])).unwrap();
        assert!(reordered);
        assert_eq!(p.opinions(), &ints(&[0, 1, 2])[..]);
        assert!(OpinionProfile::new(from_int(0), ints(&[1])).is_err());
        assert!(OpinionProfile::new(from_int(1), vec![]).is_err());
    }

    #[test]
    fn theorem_budget() {
        assert_eq!(default_max_steps(3), 84);
        assert_eq!(default_max_steps(1), 4);
        assert_eq!(theorem_bound(200), BigInt::from(24_000_200));
    }
}
