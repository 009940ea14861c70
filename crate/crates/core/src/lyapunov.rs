//! Leftmost-cluster Lyapunov function and per-step instrumentation.
//!
//! For a sorted frame `x` with leftmost cluster `U` (all agents tied at the
//! minimum) and `nu = |U| + 1`:
//!
//! ```text
//! L = |U| * (x_last - x_first) + (x_last - x_nu)
//! ```
//!
//! with `L = 0` when the whole frame is one cluster. The frame is the set of
//! agents still active in the current phase, a suffix of the full profile.

use std::fmt;

use num::Zero;
use serde::{Deserialize, Serialize};

use crate::dynamics::{intervals, step_opinions, Trajectory};
use crate::error::{Error, Result};
use crate::phases::peel_frozen;
use crate::rational::{from_usize, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StepClass {
    /// nu strictly increases.
    #[serde(rename = "I")]
    Increase,
    /// nu unchanged.
    #[serde(rename = "D")]
    Decrease,
    /// After the step the leftmost cluster is more than epsilon away from the
    /// rest of the frame; the next time index opens a new phase.
    #[serde(rename = "S")]
    Split,
    #[serde(rename = "terminal")]
    Terminal,
    /// Last stored profile of a run stopped by its step budget.
    #[serde(rename = "truncated")]
    Truncated,
}

impl fmt::Display for StepClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepClass::Increase => "I",
            StepClass::Decrease => "D",
            StepClass::Split => "S",
            StepClass::Terminal => "terminal",
            StepClass::Truncated => "truncated",
        };
        f.write_str(s)
    }
}

/// Leftmost-cluster quantities of one frame at one time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSummary {
    pub u_size: usize,
    pub nu: usize,
    pub lyapunov: Rational,
    /// `x_nu - x_first`; absent when the frame is a single cluster.
    pub d: Option<Rational>,
}

impl FrameSummary {
    pub fn of(x: &[Rational]) -> Self {
        let (u_size, nu) = leftmost_cluster(x);
        let d = x.get(u_size).map(|v| v - &x[0]);
        Self {
            u_size,
            nu,
            lyapunov: lyapunov_value(x),
            d,
        }
    }

    pub fn separated(&self, epsilon: &Rational) -> bool {
        self.d.as_ref().is_some_and(|d| d > epsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepAnalysis {
    pub t: usize,
    /// 1-based phase index.
    pub phase: usize,
    /// Global index of the first active agent.
    pub frame_start: usize,
    pub u_size: usize,
    pub nu: usize,
    pub lyapunov: Rational,
    /// M = N_first \ (U and the nu agent), as global inclusive bounds.
    pub m_set: Option<(usize, usize)>,
    pub m: usize,
    pub x_tilde: Option<Rational>,
    pub d: Option<Rational>,
    /// Smallest global index in N_nu \ N_first.
    pub witness_q: Option<usize>,
    pub class: StepClass,
    /// The same frame evaluated at t + 1 (absent for the last profile).
    pub next: Option<FrameSummary>,
}

impl StepAnalysis {
    pub fn is_step(&self) -> bool {
        self.next.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct AnnotatedTrajectory {
    pub trajectory: Trajectory,
    pub analyses: Vec<StepAnalysis>,
    pub increase: Vec<usize>,
    pub decrease: Vec<usize>,
    pub split: Vec<usize>,
}

impl AnnotatedTrajectory {
    pub fn epsilon(&self) -> &Rational {
        self.trajectory.epsilon()
    }

    pub fn agents(&self) -> usize {
        self.trajectory.agents()
    }

    /// Number of steps stored (T for a terminated run).
    pub fn steps(&self) -> usize {
        self.trajectory.last_time()
    }

    pub fn opinions(&self, t: usize) -> &[Rational] {
        self.trajectory.profiles[t].opinions()
    }
}

/// `(|U|, nu)` for a sorted frame. `nu = n + 1` for a single cluster.
pub fn leftmost_cluster(x: &[Rational]) -> (usize, usize) {
    let u_size = match x.first() {
        Some(first) => x.iter().take_while(|v| *v == first).count(),
        None => 0,
    };
    (u_size, u_size + 1)
}

pub fn lyapunov_value(x: &[Rational]) -> Rational {
    let (u_size, _) = leftmost_cluster(x);
    if u_size >= x.len() {
        return Rational::zero();
    }
    let last = &x[x.len() - 1];
    let spread = last - &x[0];
    from_usize(u_size) * spread + (last - &x[u_size])
}

/// Analysis of a consecutive pair over the whole profile (single frame).
pub fn analyze_step(
    current: &crate::OpinionProfile,
    next: &crate::OpinionProfile,
) -> Result<StepAnalysis> {
    let eps = current.epsilon();
    if next.len() != current.len() || step_opinions(current.opinions(), eps) != next.opinions() {
        return Err(Error::DynamicsMismatch {
            t: current.time() + 1,
        });
    }
    Ok(analyze_in_frame(
        current.opinions(),
        Some(next.opinions()),
        eps,
        current.time(),
        1,
        0,
        false,
    ))
}

pub(crate) fn analyze_in_frame(
    current: &[Rational],
    next: Option<&[Rational]>,
    epsilon: &Rational,
    t: usize,
    phase: usize,
    frame_start: usize,
    truncated: bool,
) -> StepAnalysis {
    let frame = &current[frame_start..];
    let summary = FrameSummary::of(frame);
    let u = summary.u_size;

    let (mut m_set, mut m, mut x_tilde, mut witness_q) = (None, 0, None, None);
    if u < frame.len() {
        let windows = intervals(frame, epsilon);
        let first = windows[0];
        let second = windows[u];
        if first.hi > u {
            let members = &frame[u + 1..=first.hi];
            m = members.len();
            m_set = Some((frame_start + u + 1, frame_start + first.hi));
            let total = members.iter().fold(Rational::zero(), |acc, v| acc + v);
            x_tilde = Some(total / from_usize(m));
        }
        if second.hi > first.hi {
            witness_q = Some(frame_start + first.hi + 1);
        }
    }

    let next_summary = next.map(|x| FrameSummary::of(&x[frame_start..]));
    let class = match &next_summary {
        None if truncated => StepClass::Truncated,
        None => StepClass::Terminal,
        Some(s) if s.separated(epsilon) => StepClass::Split,
        Some(s) if s.nu > summary.nu => StepClass::Increase,
        Some(_) => StepClass::Decrease,
    };

    StepAnalysis {
        t,
        phase,
        frame_start,
        u_size: u,
        nu: summary.nu,
        lyapunov: summary.lyapunov,
        m_set,
        m,
        x_tilde,
        d: summary.d,
        witness_q,
        class,
        next: next_summary,
    }
}

/// Applies [`analyze_step`] along a trajectory with phase-aware frames:
/// after a split step the separated leftmost clusters are frozen and the
/// following analyses only see the remaining agents.
pub fn annotate(trajectory: &Trajectory) -> AnnotatedTrajectory {
    let eps = trajectory.epsilon();
    let last = trajectory.last_time();
    let mut analyses = Vec::with_capacity(last + 1);
    let (mut increase, mut decrease, mut split) = (Vec::new(), Vec::new(), Vec::new());
    let mut frame_start = 0;
    let mut phase = 1;
    for t in 0..=last {
        let x = trajectory.profiles[t].opinions();
        if t > 0 && split.last() == Some(&(t - 1)) {
            frame_start = peel_frozen(x, frame_start, eps);
            phase += 1;
        }
        let next = (t < last).then(|| trajectory.profiles[t + 1].opinions());
        let a = analyze_in_frame(x, next, eps, t, phase, frame_start, !trajectory.terminated);
        match a.class {
            StepClass::Increase => increase.push(t),
            StepClass::Decrease => decrease.push(t),
            StepClass::Split => split.push(t),
            StepClass::Terminal | StepClass::Truncated => {}
        }
        analyses.push(a);
    }
    AnnotatedTrajectory {
        trajectory: trajectory.clone(),
        analyses,
        increase,
        decrease,
        split,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, OpinionProfile};
    use crate::rational::{from_int, ratio};

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&v| from_int(v)).collect()
    }

    fn run(eps: Rational, xs: Vec<Rational>) -> AnnotatedTrajectory {
        let p = OpinionProfile::new(eps, xs).unwrap();
        let (traj, _) = simulate(&p, 1000);
        annotate(&traj)
    }

    #[test]
    fn leftmost_cluster_examples() {
        assert_eq!(leftmost_cluster(&ints(&[0, 0, 1, 2])), (2, 3));
        assert_eq!(leftmost_cluster(&ints(&[0, 1, 2])), (1, 2));
        assert_eq!(leftmost_cluster(&ints(&[7, 7, 7])), (3, 4));
    }

    #[test]
    fn lyapunov_examples() {
        assert_eq!(lyapunov_value(&ints(&[0, 1, 2])), from_int(3));
        assert_eq!(
            lyapunov_value(&[ratio(1, 2), from_int(1), ratio(3, 2)]),
            ratio(3, 2)
        );
        assert_eq!(lyapunov_value(&ints(&[5, 5, 5, 5])), from_int(0));
        assert_eq!(lyapunov_value(&ints(&[5])), from_int(0));
    }

    #[test]
    fn analyze_decrease_step() {
        let p = OpinionProfile::new(from_int(1), ints(&[0, 1, 2])).unwrap();
        let q = crate::step(&p);
        let a = analyze_step(&p, &q).unwrap();
        assert_eq!(a.class, StepClass::Decrease);
        assert_eq!(a.d, Some(from_int(1)));
        assert_eq!(a.m, 0);
        assert_eq!(a.x_tilde, None);
        assert_eq!(a.witness_q, Some(2));
        assert_eq!(a.nu, 2);
        assert_eq!(a.lyapunov, from_int(3));
    }

    #[test]
    fn analyze_increase_step() {
        let p = OpinionProfile::new(from_int(1), vec![ratio(1, 2), from_int(1), ratio(3, 2)])
            .unwrap()
            .with_time(1);
        let q = crate::step(&p);
        let a = analyze_step(&p, &q).unwrap();
        assert_eq!(a.class, StepClass::Increase);
        assert_eq!(a.nu, 2);
        assert_eq!(a.next.as_ref().unwrap().nu, 4);
        assert_eq!(a.m, 1);
        assert_eq!(a.x_tilde, Some(ratio(3, 2)));
    }

    #[test]
    fn analyze_split_step() {
        let p = OpinionProfile::new(from_int(1), vec![from_int(0), from_int(1), ratio(5, 2)])
            .unwrap();
        let q = crate::step(&p);
        assert_eq!(q.opinions(), &[ratio(1, 2), ratio(1, 2), ratio(5, 2)]);
        let a = analyze_step(&p, &q).unwrap();
        assert_eq!(a.class, StepClass::Split);
        assert_eq!(a.next.unwrap().d, Some(from_int(2)));
    }

    #[test]
    fn analyze_rejects_non_successor() {
        let p = OpinionProfile::new(from_int(1), ints(&[0, 1, 2])).unwrap();
        let bogus = OpinionProfile::new(from_int(1), ints(&[0, 1, 2])).unwrap();
        assert!(matches!(
            analyze_step(&p, &bogus),
            Err(Error::DynamicsMismatch { t: 1 })
        ));
    }

    #[test]
    fn annotate_examples() {
        let a = run(from_int(1), ints(&[0, 1, 2]));
        assert_eq!(a.decrease, vec![0]);
        assert_eq!(a.increase, vec![1]);
        assert!(a.split.is_empty());
        let ls: Vec<_> = a.analyses.iter().map(|s| s.lyapunov.clone()).collect();
        assert_eq!(ls, vec![from_int(3), ratio(3, 2), from_int(0)]);
        assert_eq!(a.analyses[2].class, StepClass::Terminal);

        let a = run(from_int(1), ints(&[0, 2]));
        assert_eq!(a.steps(), 0);
        assert!(a.increase.is_empty() && a.decrease.is_empty() && a.split.is_empty());

        let a = run(from_int(1), vec![from_int(0), from_int(1), ratio(5, 2)]);
        assert_eq!(a.split, vec![0]);
        // after the split only agent 3 remains active
        assert_eq!(a.analyses[1].frame_start, 2);
        assert_eq!(a.analyses[1].phase, 2);
        assert_eq!(a.analyses[1].lyapunov, from_int(0));
    }

    #[test]
    fn m_set_and_witness_bounds() {
        // N_1 = {0,1,2,3}, nu agent = 1, M = {2,3}; N_nu reaches agent 4
        let x = vec![from_int(0), ratio(1, 2), from_int(1), from_int(1), ratio(3, 2)];
        let a = analyze_in_frame(&x, None, &from_int(1), 0, 1, 0, false);
        assert_eq!(a.m_set, Some((2, 3)));
        assert_eq!(a.m, 2);
        assert_eq!(a.x_tilde, Some(from_int(1)));
        assert_eq!(a.witness_q, Some(4));
    }
}
