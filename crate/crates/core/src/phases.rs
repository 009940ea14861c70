//! Phase decomposition at leftmost-cluster splits.
//!
//! Once the leftmost cluster of the active agents is more than epsilon away
//! from everyone else it can never move again. At that time (a splitting
//! time T_k) the cluster is frozen, removed from the active range, and the
//! Lyapunov bookkeeping restarts on the remaining n_k agents.

use std::collections::BTreeSet;

use num::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants::{CheckSuiteResult, Outcome, ViolationReport};
use crate::lyapunov::{leftmost_cluster, AnnotatedTrajectory, StepAnalysis, StepClass};
use crate::rational::{from_usize, Rational};

pub const PHASE_DURATION: &str = "phase-duration";
pub const PHASE_D_BUDGET: &str = "phase-d-budget";
pub const PHASE_I_BUDGET: &str = "phase-i-budget";
pub const PHASE_TILING: &str = "phase-tiling";
pub const PHASE_TOTAL: &str = "phase-total";
pub const PHASE_COUNT: &str = "phase-count";
pub const NU_TELESCOPING: &str = "nu-telescoping";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseRecord {
    /// 1-based phase index.
    pub k: usize,
    /// T_{k-1}.
    pub start: usize,
    /// T_k (the termination time for the last phase).
    pub end: usize,
    /// First active agent; the active range is `agent_start..n`.
    pub agent_start: usize,
    pub n_k: usize,
    pub nu_k_start: usize,
    /// nu_k(T_k), measured on this phase's agents.
    pub nu_k_end: usize,
    pub lyapunov_start: Rational,
    pub lyapunov_end: Rational,
    pub increase: Vec<usize>,
    pub decrease: Vec<usize>,
    pub split_step: Option<usize>,
    /// Agents frozen at T_k (zero for the last phase).
    pub frozen: usize,
    /// Opinion of the frozen leftmost cluster U_k(T_k).
    pub frozen_value: Option<Rational>,
    /// Sum of nu(t+1) - nu(t) over the phase's steps.
    pub nu_increments: usize,
}

impl PhaseRecord {
    pub fn duration(&self) -> usize {
        self.end - self.start
    }
}

/// A gap wider than epsilon that opened away from the leftmost cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InteriorGap {
    pub t: usize,
    /// The gap lies between agents `after` and `after + 1`.
    pub after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseDecomposition {
    /// Splitting times T_1 < T_2 < ...; T_0 = 0 is implicit.
    pub splits: Vec<usize>,
    pub phases: Vec<PhaseRecord>,
    pub total_time: usize,
    pub agents: usize,
    /// Sum over phases of nu_k(T_k). Diagnostic only.
    pub nu_sum: usize,
    pub interior_gaps: Vec<InteriorGap>,
}

impl PhaseDecomposition {
    pub fn nu_sum_within_n(&self) -> bool {
        self.nu_sum <= self.agents
    }
}

/// True iff the leftmost cluster of the analysed frame is more than epsilon
/// away from the next agent.
pub fn detect_split(analysis: &StepAnalysis, epsilon: &Rational) -> bool {
    analysis.d.as_ref().is_some_and(|d| d > epsilon)
}

/// Advances `start` past every leading cluster that is separated from the
/// rest by more than epsilon.
pub(crate) fn peel_frozen(x: &[Rational], mut start: usize, epsilon: &Rational) -> usize {
    loop {
        let (u, _) = leftmost_cluster(&x[start..]);
        if start + u >= x.len() {
            return start;
        }
        if &x[start + u] - &x[start] > *epsilon {
            start += u;
        } else {
            return start;
        }
    }
}

pub fn decompose(annotated: &AnnotatedTrajectory) -> Result<PhaseDecomposition> {
    if !annotated.trajectory.terminated {
        return Err(Error::Truncated(annotated.steps()));
    }
    let total_time = annotated.steps();
    let agents = annotated.agents();
    let analyses = &annotated.analyses;

    let mut phases: Vec<PhaseRecord> = Vec::new();
    let mut i = 0;
    while i < analyses.len() {
        let first = &analyses[i];
        let mut j = i;
        while j + 1 < analyses.len() && analyses[j + 1].phase == first.phase {
            j += 1;
        }
        let members = &analyses[i..=j];
        let last = &analyses[j];
        let split_step = members
            .iter()
            .find(|a| a.class == StepClass::Split)
            .map(|a| a.t);
        let (end, nu_k_end, lyapunov_end) = match split_step {
            Some(t) => {
                let next = analyses[t].next.as_ref().expect("split step has a successor");
                (t + 1, next.nu, next.lyapunov.clone())
            }
            None => (last.t, last.nu, last.lyapunov.clone()),
        };
        let (frozen, frozen_value) = match analyses.get(j + 1) {
            Some(following) => (
                following.frame_start - first.frame_start,
                Some(annotated.opinions(following.t)[first.frame_start].clone()),
            ),
            None => (0, None),
        };
        let pick = |class| {
            members
                .iter()
                .filter(|a| a.class == class)
                .map(|a| a.t)
                .collect::<Vec<_>>()
        };
        let nu_increments = members
            .iter()
            .filter_map(|a| a.next.as_ref().map(|n| n.nu.saturating_sub(a.nu)))
            .sum();
        phases.push(PhaseRecord {
            k: first.phase,
            start: first.t,
            end,
            agent_start: first.frame_start,
            n_k: agents - first.frame_start,
            nu_k_start: first.nu,
            nu_k_end,
            lyapunov_start: first.lyapunov.clone(),
            lyapunov_end,
            increase: pick(StepClass::Increase),
            decrease: pick(StepClass::Decrease),
            split_step,
            frozen,
            frozen_value,
            nu_increments,
        });
        i = j + 1;
    }

    let splits = phases.iter().skip(1).map(|p| p.start).collect();
    let nu_sum = phases.iter().map(|p| p.nu_k_end).sum();
    Ok(PhaseDecomposition {
        splits,
        phases,
        total_time,
        agents,
        nu_sum,
        interior_gaps: interior_gaps(annotated),
    })
}

fn interior_gaps(annotated: &AnnotatedTrajectory) -> Vec<InteriorGap> {
    let eps = annotated.epsilon();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for a in &annotated.analyses {
        let x = annotated.opinions(a.t);
        let boundary = a.frame_start + a.u_size;
        for i in boundary..x.len().saturating_sub(1) {
            if &x[i + 1] - &x[i] > *eps && seen.insert(i) {
                out.push(InteriorGap { t: a.t, after: i });
            }
        }
    }
    out
}

fn fail(check_id: &str, t: usize, phase: usize, lhs: Rational, rhs: Rational, message: String) -> Outcome {
    Outcome::Failed(Box::new(ViolationReport {
        check_id: check_id.to_string(),
        t,
        lhs,
        rhs,
        phase,
        class: None,
        message,
    }))
}

fn require_le(check_id: &str, t: usize, phase: usize, lhs: Rational, rhs: Rational, what: &str) -> Outcome {
    if lhs <= rhs {
        Outcome::Passed
    } else {
        let message = format!("phase {phase}: {what}: {lhs} > {rhs}");
        fail(check_id, t, phase, lhs, rhs, message)
    }
}

/// Per-phase accounting: duration, I/D counts, tiling and the aggregate
/// n(3n^2 + 1) bound.
pub fn phase_budget_check(decomposition: &PhaseDecomposition) -> CheckSuiteResult {
    let mut result = CheckSuiteResult::default();
    let n = decomposition.agents;
    let mut expected_start = 0;
    let mut frozen_so_far = 0;
    for p in &decomposition.phases {
        let nk = from_usize(p.n_k);
        let nu = from_usize(p.nu_k_end);
        let three_nk2 = from_usize(3) * &nk * &nk;

        result.record(
            PHASE_DURATION,
            require_le(
                PHASE_DURATION,
                p.start,
                p.k,
                from_usize(p.duration()),
                (&three_nk2 + from_usize(1)) * &nu,
                "T_k - T_{k-1} <= (3 n_k^2 + 1) nu_k(T_k)",
            ),
        );
        result.record(
            PHASE_D_BUDGET,
            require_le(
                PHASE_D_BUDGET,
                p.start,
                p.k,
                from_usize(p.decrease.len()),
                &three_nk2 * &nu,
                "|D_k| <= 3 nu_k(T_k) n_k^2",
            ),
        );
        result.record(
            PHASE_I_BUDGET,
            require_le(
                PHASE_I_BUDGET,
                p.start,
                p.k,
                from_usize(p.increase.len()),
                nu.clone(),
                "|I_k| <= nu_k(T_k)",
            ),
        );
        let tiled = p.start == expected_start
            && p.end >= p.start
            && p.duration() == p.increase.len() + p.decrease.len() + usize::from(p.split_step.is_some());
        result.record(
            PHASE_TILING,
            if tiled {
                Outcome::Passed
            } else {
                fail(
                    PHASE_TILING,
                    p.start,
                    p.k,
                    from_usize(p.start),
                    from_usize(expected_start),
                    format!("phase {} does not continue the previous phase or miscounts its steps", p.k),
                )
            },
        );
        result.record(
            PHASE_COUNT,
            if p.n_k == n - frozen_so_far {
                Outcome::Passed
            } else {
                fail(
                    PHASE_COUNT,
                    p.start,
                    p.k,
                    from_usize(p.n_k),
                    from_usize(n - frozen_so_far),
                    format!("phase {} has the wrong active agent count", p.k),
                )
            },
        );
        result.record(
            NU_TELESCOPING,
            if p.nu_k_start + p.nu_increments == p.nu_k_end {
                Outcome::Passed
            } else {
                fail(
                    NU_TELESCOPING,
                    p.start,
                    p.k,
                    from_usize(p.nu_k_start + p.nu_increments),
                    from_usize(p.nu_k_end),
                    format!("phase {}: nu increments do not telescope", p.k),
                )
            },
        );
        expected_start = p.end;
        frozen_so_far += p.frozen;
    }

    let total: usize = decomposition.phases.iter().map(PhaseRecord::duration).sum();
    let bound = BigInt::from(n) * (BigInt::from(3) * BigInt::from(n) * BigInt::from(n) + 1);
    result.record(
        PHASE_TOTAL,
        require_le(
            PHASE_TOTAL,
            decomposition.total_time,
            0,
            from_usize(total),
            Rational::from_integer(bound),
            "sum of phase durations <= n (3 n^2 + 1)",
        ),
    );
    result.record(
        PHASE_TILING,
        if total == decomposition.total_time {
            Outcome::Passed
        } else {
            fail(
                PHASE_TILING,
                decomposition.total_time,
                0,
                from_usize(total),
                from_usize(decomposition.total_time),
                "phase durations do not sum to T".to_string(),
            )
        },
    );
    result
}
