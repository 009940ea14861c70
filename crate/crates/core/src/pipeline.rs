//! Simulation plus full instrumentation in one call, and offline
//! re-verification of stored trajectories.

use crate::dynamics::{simulate, step_opinions, OpinionProfile, TerminationResult, Trajectory};
use crate::error::{Error, Result};
use crate::invariants::{run_suite, CheckSuiteResult};
use crate::io::TrajectoryRecord;
use crate::lyapunov::{annotate, AnnotatedTrajectory};
use crate::phases::{decompose, PhaseDecomposition};
use crate::rational::Rational;

#[derive(Debug, Clone)]
pub struct RunReport {
    pub termination: TerminationResult,
    pub annotated: AnnotatedTrajectory,
    /// Absent for truncated runs.
    pub decomposition: Option<PhaseDecomposition>,
    /// Present when checks were requested and the run terminated.
    pub suite: Option<CheckSuiteResult>,
}

impl RunReport {
    pub fn increase_count(&self) -> usize {
        self.annotated.increase.len()
    }

    pub fn decrease_count(&self) -> usize {
        self.annotated.decrease.len()
    }

    pub fn split_count(&self) -> usize {
        self.annotated.split.len()
    }
}

pub fn run(initial: &OpinionProfile, max_steps: usize, check: bool) -> RunReport {
    let (trajectory, termination) = simulate(initial, max_steps);
    instrument(trajectory, termination, check)
}

fn instrument(trajectory: Trajectory, termination: TerminationResult, check: bool) -> RunReport {
    let annotated = annotate(&trajectory);
    let decomposition = decompose(&annotated).ok();
    let suite = match (&decomposition, check) {
        (Some(d), true) => Some(run_suite(&annotated, d)),
        _ => None,
    };
    RunReport {
        termination,
        annotated,
        decomposition,
        suite,
    }
}

/// Rebuilds a trajectory from stored records, recomputing every step.
///
/// Errors: `MalformedTrajectory` for bad time indices, unsorted or ragged
/// records; `DynamicsMismatch` when a stored profile differs from the exact
/// successor of the previous one; `Truncated` when the last profile is not
/// a fixed point.
pub fn verify_records(records: &[TrajectoryRecord], epsilon: &Rational) -> Result<RunReport> {
    let first = records
        .first()
        .ok_or_else(|| Error::MalformedTrajectory("no records".into()))?;
    let n = first.x.len();
    let mut profiles = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        if r.t != i {
            return Err(Error::MalformedTrajectory(format!(
                "record {i} has t = {}, expected {i}",
                r.t
            )));
        }
        if r.x.len() != n {
            return Err(Error::MalformedTrajectory(format!(
                "record t={} has {} agents, expected {n}",
                r.t,
                r.x.len()
            )));
        }
        let p = OpinionProfile::new(epsilon.clone(), r.x.clone())
            .map_err(|e| Error::MalformedTrajectory(format!("record t={}: {e}", r.t)))?
            .with_time(i);
        if i > 0 {
            let expected = step_opinions(records[i - 1].x.as_slice(), epsilon);
            if expected != r.x {
                return Err(Error::DynamicsMismatch { t: i });
            }
        }
        profiles.push(p);
    }
    let last = profiles.last().expect("non-empty");
    let terminated = step_opinions(last.opinions(), epsilon) == last.opinions();
    if !terminated {
        return Err(Error::Truncated(last.time()));
    }
    let termination = TerminationResult {
        t: last.time(),
        steady_state: last.clone(),
        truncated: false,
    };
    let trajectory = Trajectory {
        profiles,
        terminated: true,
    };
    Ok(instrument(trajectory, termination, true))
}
