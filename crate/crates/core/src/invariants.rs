//! Step-by-step checks of every inequality used in the termination proof.
//!
//! All comparisons are exact. A check either does not apply to a step
//! (`Outcome::Skipped`), holds, or yields a [`ViolationReport`] carrying the
//! two sides of the failed comparison.

use std::collections::BTreeMap;

use num::{BigInt, Signed, Zero};
use serde::Serialize;

use crate::dynamics::{neighbors_in, theorem_bound};
use crate::error::{Error, Result};
use crate::lyapunov::{AnnotatedTrajectory, FrameSummary, StepAnalysis, StepClass};
use crate::phases::{phase_budget_check, PhaseDecomposition};
use crate::rational::{from_usize, serde_rational, Rational};

pub const ORDER: &str = "order";
pub const EXTREMES: &str = "extremes";
pub const LEMMA2: &str = "lemma2";
pub const LEMMA2_GLOBAL: &str = "lemma2-global";
pub const CLUSTER_COINCIDE: &str = "u-coincide";
pub const X_TILDE: &str = "x-tilde";
pub const LYAPUNOV_NONNEG: &str = "lyapunov-nonneg";
pub const L0_BOUND: &str = "l0-bound";
pub const L0_SUM: &str = "l0-sum";
pub const EQ1: &str = "eq1";
pub const INCREMENT_CAP: &str = "increment-cap";
pub const INCREMENT_CAP_NEPS: &str = "increment-cap-neps";
pub const LEMMA3: &str = "lemma3";
pub const DECREMENT_FLOOR: &str = "decrement-floor";
pub const THEOREM1: &str = "theorem1";
pub const FROZEN: &str = "frozen";
pub const FROZEN_GAP: &str = "frozen-gap";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViolationReport {
    pub check_id: String,
    pub t: usize,
    #[serde(with = "serde_rational")]
    pub lhs: Rational,
    #[serde(with = "serde_rational")]
    pub rhs: Rational,
    pub phase: usize,
    pub class: Option<StepClass>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Skipped,
    Passed,
    Failed(Box<ViolationReport>),
}

impl Outcome {
    pub fn is_failed(&self) -> bool {
        matches!(self, Outcome::Failed(_))
    }

    pub fn violation(self) -> Option<ViolationReport> {
        match self {
            Outcome::Failed(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CheckCounter {
    pub run: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CheckSuiteResult {
    pub checks_run: usize,
    pub violations: Vec<ViolationReport>,
    #[serde(skip)]
    pub counters: BTreeMap<String, CheckCounter>,
    /// Smallest D-step decrement in units of eps / (3 n_k).
    #[serde(skip)]
    pub min_decrement_ratio: Option<Rational>,
}

impl CheckSuiteResult {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn record(&mut self, check_id: &str, outcome: Outcome) {
        if outcome == Outcome::Skipped {
            return;
        }
        self.checks_run += 1;
        let counter = self.counters.entry(check_id.to_string()).or_default();
        counter.run += 1;
        if let Outcome::Failed(v) = outcome {
            counter.failed += 1;
            self.violations.push(*v);
        }
    }

    pub fn merge(&mut self, other: CheckSuiteResult) {
        self.checks_run += other.checks_run;
        self.violations.extend(other.violations);
        for (id, c) in other.counters {
            let mine = self.counters.entry(id).or_default();
            mine.run += c.run;
            mine.failed += c.failed;
        }
        self.min_decrement_ratio = match (self.min_decrement_ratio.take(), other.min_decrement_ratio) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }

    pub fn run_count(&self, check_id: &str) -> usize {
        self.counters.get(check_id).map_or(0, |c| c.run)
    }

    pub(crate) fn canonicalize(&mut self) {
        self.violations
            .sort_by(|a, b| (a.t, &a.check_id).cmp(&(b.t, &b.check_id)));
    }
}

/// Where a step-level check is being applied.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub t: usize,
    pub phase: usize,
    pub class: StepClass,
    pub epsilon: &'a Rational,
    /// Active agents in the phase.
    pub n_phase: usize,
}

impl StepContext<'_> {
    fn fail(&self, check_id: &str, lhs: Rational, rhs: Rational, message: String) -> Outcome {
        Outcome::Failed(Box::new(ViolationReport {
            check_id: check_id.to_string(),
            t: self.t,
            lhs,
            rhs,
            phase: self.phase,
            class: Some(self.class),
            message,
        }))
    }

    fn require_le(&self, check_id: &str, lhs: Rational, rhs: Rational, what: &str) -> Outcome {
        if lhs <= rhs {
            Outcome::Passed
        } else {
            let message = format!("t={}: {what}: {lhs} > {rhs}", self.t);
            self.fail(check_id, lhs, rhs, message)
        }
    }
}

/// |U| x_1(t) + x_nu(t) <= nu x_1(t+1), over the frame. Needs |U| < n and
/// d(t) <= eps.
pub fn check_eq1(ctx: &StepContext<'_>, current: &[Rational], next: &[Rational]) -> Outcome {
    let s = FrameSummary::of(current);
    let Some(d) = &s.d else {
        return Outcome::Skipped;
    };
    if d > ctx.epsilon {
        return Outcome::Skipped;
    }
    let lhs = from_usize(s.u_size) * &current[0] + &current[s.u_size];
    let rhs = from_usize(s.nu) * &next[0];
    ctx.require_le(EQ1, lhs, rhs, "|U| x_1 + x_nu <= nu x_1(t+1)")
}

/// L(t+1) - L(t) <= dnu * (x_n(t+1) - x_1(t+1)) for steps where nu grows,
/// plus the dnu * n_k * eps form when the diameter at t+1 is within n_k eps.
/// Returns the unconditional and the conditional outcomes.
pub fn check_increment_cap(
    ctx: &StepContext<'_>,
    current: &[Rational],
    next: &[Rational],
) -> (Outcome, Outcome) {
    let now = FrameSummary::of(current);
    let then = FrameSummary::of(next);
    if then.nu <= now.nu || now.d.as_ref().is_none_or(|d| d > ctx.epsilon) {
        return (Outcome::Skipped, Outcome::Skipped);
    }
    let dnu = from_usize(then.nu - now.nu);
    let delta = &then.lyapunov - &now.lyapunov;
    let diameter = &next[next.len() - 1] - &next[0];
    let plain = ctx.require_le(
        INCREMENT_CAP,
        delta.clone(),
        &dnu * &diameter,
        "L(t+1) - L(t) <= dnu (x_n - x_1)(t+1)",
    );
    let n_eps = from_usize(ctx.n_phase) * ctx.epsilon;
    let scaled = if diameter <= n_eps {
        ctx.require_le(
            INCREMENT_CAP_NEPS,
            delta,
            dnu * n_eps,
            "L(t+1) - L(t) <= dnu n_k eps",
        )
    } else {
        Outcome::Skipped
    };
    (plain, scaled)
}

/// N_1 is contained in N_nu and N_nu \ N_1 is non-empty. Applies to steps
/// where nu is unchanged and d(t) <= eps.
pub fn check_lemma3(ctx: &StepContext<'_>, current: &[Rational]) -> Outcome {
    let s = FrameSummary::of(current);
    let Some(d) = &s.d else {
        return Outcome::Skipped;
    };
    if d > ctx.epsilon {
        return Outcome::Skipped;
    }
    let first = neighbors_in(current, ctx.epsilon, 0);
    let second = neighbors_in(current, ctx.epsilon, s.u_size);
    if second.lo != 0 || second.hi < first.hi {
        let message = format!(
            "t={}: N_1 = [0,{}] not contained in N_nu = [{},{}]",
            ctx.t, first.hi, second.lo, second.hi
        );
        return ctx.fail(
            LEMMA3,
            from_usize(first.hi),
            from_usize(second.hi),
            message,
        );
    }
    if second.hi == first.hi {
        let message = format!("t={}: N_nu \\ N_1 is empty (both end at {})", ctx.t, first.hi);
        return ctx.fail(
            LEMMA3,
            from_usize(second.hi),
            from_usize(first.hi),
            message,
        );
    }
    Outcome::Passed
}

/// L(t) - L(t+1) >= eps / (3 n_k) for steps where nu is unchanged. The
/// second value is the decrement in units of eps / (3 n_k).
pub fn check_decrement_floor(
    ctx: &StepContext<'_>,
    current: &[Rational],
    next: &[Rational],
) -> (Outcome, Option<Rational>) {
    let now = FrameSummary::of(current);
    let then = FrameSummary::of(next);
    if then.nu != now.nu || now.d.as_ref().is_none_or(|d| d > ctx.epsilon) {
        return (Outcome::Skipped, None);
    }
    let decrement = &now.lyapunov - &then.lyapunov;
    let floor = ctx.epsilon / from_usize(3 * ctx.n_phase);
    let ratio = &decrement / &floor;
    let outcome = if decrement >= floor {
        Outcome::Passed
    } else {
        let message = format!("t={}: decrement {decrement} < eps/(3 n_k) = {floor}", ctx.t);
        ctx.fail(DECREMENT_FLOOR, decrement, floor, message)
    };
    (outcome, Some(ratio))
}

/// T <= 3n^3 + n for a terminated run.
pub fn check_total_budget(annotated: &AnnotatedTrajectory) -> Result<Outcome> {
    if !annotated.trajectory.terminated {
        return Err(Error::Truncated(annotated.steps()));
    }
    let t = annotated.steps();
    let n = annotated.agents();
    let bound = theorem_bound(n);
    if BigInt::from(t) <= bound {
        return Ok(Outcome::Passed);
    }
    Ok(Outcome::Failed(Box::new(ViolationReport {
        check_id: THEOREM1.to_string(),
        t,
        lhs: from_usize(t),
        rhs: Rational::from_integer(bound),
        phase: 0,
        class: None,
        message: format!("termination time {t} exceeds 3n^3 + n for n = {n}"),
    })))
}

fn global_fail(check_id: &str, t: usize, phase: usize, lhs: Rational, rhs: Rational, message: String) -> Outcome {
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

fn check_order(t: usize, phase: usize, next: &[Rational]) -> Outcome {
    match next.windows(2).position(|w| w[0] > w[1]) {
        None => Outcome::Passed,
        Some(i) => global_fail(
            ORDER,
            t,
            phase,
            next[i].clone(),
            next[i + 1].clone(),
            format!("t={t}: x_{i}(t+1) > x_{}(t+1)", i + 1),
        ),
    }
}

fn check_extremes(t: usize, phase: usize, current: &[Rational], next: &[Rational]) -> Outcome {
    let last = current.len() - 1;
    if next[last] > current[last] {
        return global_fail(
            EXTREMES,
            t,
            phase,
            next[last].clone(),
            current[last].clone(),
            format!("t={t}: maximum opinion increased"),
        );
    }
    if next[0] < current[0] {
        return global_fail(
            EXTREMES,
            t,
            phase,
            current[0].clone(),
            next[0].clone(),
            format!("t={t}: minimum opinion decreased"),
        );
    }
    Outcome::Passed
}

fn prefix_cluster(x: &[Rational]) -> usize {
    x.iter().take_while(|v| **v == x[0]).count()
}

/// Every per-step check plus the run-level and phase-level budgets.
pub fn run_suite(annotated: &AnnotatedTrajectory, decomposition: &PhaseDecomposition) -> CheckSuiteResult {
    let mut result = CheckSuiteResult::default();
    let eps = annotated.epsilon();
    let n = annotated.agents();

    let mut phase_increment_sum = BTreeMap::<usize, Rational>::new();
    for a in &annotated.analyses {
        let x = annotated.opinions(a.t);
        let frame = &x[a.frame_start..];
        let ctx = StepContext {
            t: a.t,
            phase: a.phase,
            class: a.class,
            epsilon: eps,
            n_phase: n - a.frame_start,
        };

        result.record(LYAPUNOV_NONNEG, nonneg(&ctx, a));
        if a.m > 0 {
            let x_tilde = a.x_tilde.clone().expect("x_tilde present when m > 0");
            result.record(
                X_TILDE,
                ctx.require_le(X_TILDE, frame[a.u_size].clone(), x_tilde, "x_nu <= x_tilde"),
            );
        }
        if a.frame_start > 0 {
            let gap = &x[a.frame_start] - &x[a.frame_start - 1];
            let outcome = if gap > *eps {
                Outcome::Passed
            } else {
                global_fail(
                    FROZEN_GAP,
                    a.t,
                    a.phase,
                    gap,
                    eps.clone(),
                    format!("t={}: active minimum within eps of the frozen cluster", a.t),
                )
            };
            result.record(FROZEN_GAP, outcome);
        }
        if a.t > 0 && a.frame_start > 0 {
            let prev_start = annotated.analyses[a.t - 1].frame_start;
            let before = annotated.opinions(a.t - 1);
            let moved = (0..prev_start).find(|&i| before[i] != x[i]);
            let outcome = match moved {
                None => Outcome::Passed,
                Some(i) => global_fail(
                    FROZEN,
                    a.t,
                    a.phase,
                    x[i].clone(),
                    before[i].clone(),
                    format!("t={}: frozen agent {i} changed its opinion", a.t),
                ),
            };
            result.record(FROZEN, outcome);
        }
        if is_phase_start(annotated, a) {
            result.record(L0_BOUND, l0_bound(&ctx, a, frame));
        }

        let Some(next_summary) = &a.next else {
            continue;
        };
        let next_full = annotated.opinions(a.t + 1);
        let next = &next_full[a.frame_start..];

        result.record(ORDER, check_order(a.t, a.phase, next_full));
        result.record(EXTREMES, check_extremes(a.t, a.phase, x, next_full));
        let global_now = prefix_cluster(x);
        let global_next = prefix_cluster(next_full);
        result.record(
            LEMMA2_GLOBAL,
            if global_next >= global_now {
                Outcome::Passed
            } else {
                global_fail(
                    LEMMA2_GLOBAL,
                    a.t,
                    a.phase,
                    from_usize(global_next),
                    from_usize(global_now),
                    format!("t={}: leftmost cluster shrank", a.t),
                )
            },
        );
        result.record(
            LEMMA2,
            ctx.require_le(
                LEMMA2,
                from_usize(a.nu),
                from_usize(next_summary.nu),
                "phase-local nu non-decreasing",
            ),
        );
        if a.u_size < frame.len() {
            let head = &next[0];
            let outcome = match next[..a.u_size].iter().position(|v| v != head) {
                None => Outcome::Passed,
                Some(i) => ctx.fail(
                    CLUSTER_COINCIDE,
                    next[i].clone(),
                    head.clone(),
                    format!("t={}: agents of U(t) disagree after the step", a.t),
                ),
            };
            result.record(CLUSTER_COINCIDE, outcome);
        }

        result.record(EQ1, check_eq1(&ctx, frame, next));
        let (cap, cap_neps) = check_increment_cap(&ctx, frame, next);
        result.record(INCREMENT_CAP, cap);
        result.record(INCREMENT_CAP_NEPS, cap_neps);
        if next_summary.nu == a.nu {
            result.record(LEMMA3, check_lemma3(&ctx, frame));
            let (floor, ratio) = check_decrement_floor(&ctx, frame, next);
            result.record(DECREMENT_FLOOR, floor);
            if let Some(r) = ratio {
                result.min_decrement_ratio = Some(match result.min_decrement_ratio.take() {
                    Some(m) => m.min(r),
                    None => r,
                });
            }
        }
        if a.class == StepClass::Increase {
            *phase_increment_sum.entry(a.phase).or_insert_with(Rational::zero) +=
                &next_summary.lyapunov - &a.lyapunov;
        }
    }

    // singular steady state: one phase ending in consensus
    if decomposition.phases.len() == 1 && annotated.trajectory.terminated {
        let last = annotated.analyses.last().expect("at least one analysis");
        if last.u_size == n && n >= 2 {
            let l0 = &annotated.analyses[0].lyapunov;
            let inc = phase_increment_sum.get(&1).cloned().unwrap_or_else(Rational::zero);
            let ctx = StepContext {
                t: 0,
                phase: 1,
                class: annotated.analyses[0].class,
                epsilon: eps,
                n_phase: n,
            };
            let bound = from_usize(n * n) * eps;
            result.record(
                L0_SUM,
                ctx.require_le(L0_SUM, l0 + inc, bound, "L(0) + sum of I-step increments <= n^2 eps"),
            );
        }
    }

    match check_total_budget(annotated) {
        Ok(outcome) => result.record(THEOREM1, outcome),
        Err(_) => result.record(
            THEOREM1,
            global_fail(
                THEOREM1,
                annotated.steps(),
                0,
                from_usize(annotated.steps()),
                Rational::from_integer(theorem_bound(n)),
                "run did not terminate within its step budget".to_string(),
            ),
        ),
    }

    result.merge(phase_budget_check(decomposition));
    result.canonicalize();
    result
}

fn is_phase_start(annotated: &AnnotatedTrajectory, a: &StepAnalysis) -> bool {
    a.t == 0 || annotated.analyses[a.t - 1].phase != a.phase
}

fn nonneg(ctx: &StepContext<'_>, a: &StepAnalysis) -> Outcome {
    if a.lyapunov.is_negative() {
        ctx.fail(
            LYAPUNOV_NONNEG,
            a.lyapunov.clone(),
            Rational::zero(),
            format!("t={}: L(t) = {} < 0", a.t, a.lyapunov),
        )
    } else {
        Outcome::Passed
    }
}

/// L < nu (x_n - x_1) at a phase start, when the frame is not one cluster.
fn l0_bound(ctx: &StepContext<'_>, a: &StepAnalysis, frame: &[Rational]) -> Outcome {
    if a.u_size >= frame.len() {
        return Outcome::Skipped;
    }
    let spread = &frame[frame.len() - 1] - &frame[0];
    let bound = from_usize(a.nu) * spread;
    if a.lyapunov < bound {
        Outcome::Passed
    } else {
        ctx.fail(
            L0_BOUND,
            a.lyapunov.clone(),
            bound,
            format!("t={}: L >= nu (x_n - x_1) at phase start", a.t),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, step_opinions, OpinionProfile};
    use crate::lyapunov::annotate;
    use crate::phases::decompose;
    use crate::rational::{from_int, ratio};

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&v| from_int(v)).collect()
    }

    fn ctx<'a>(eps: &'a Rational, class: StepClass, n: usize) -> StepContext<'a> {
        StepContext {
            t: 0,
            phase: 1,
            class,
            epsilon: eps,
            n_phase: n,
        }
    }

    fn suite(eps: Rational, xs: Vec<Rational>) -> CheckSuiteResult {
        let p = OpinionProfile::new(eps, xs).unwrap();
        let (traj, _) = simulate(&p, crate::dynamics::default_max_steps(p.len()));
        let annotated = annotate(&traj);
        let decomposition = decompose(&annotated).unwrap();
        run_suite(&annotated, &decomposition)
    }

    #[test]
    fn eq1_tight_when_m_is_zero() {
        let eps = from_int(1);
        let cur = ints(&[0, 1, 2]);
        let next = step_opinions(&cur, &eps);
        assert_eq!(check_eq1(&ctx(&eps, StepClass::Decrease, 3), &cur, &next), Outcome::Passed);
        // LHS = 1 and RHS = 2 * 1/2 = 1
        assert_eq!(next[0], ratio(1, 2));
    }

    #[test]
    fn eq1_four_agents() {
        let eps = from_int(1);
        let cur = ints(&[0, 1, 1, 2]);
        let next = step_opinions(&cur, &eps);
        assert_eq!(next[0], ratio(2, 3));
        assert_eq!(check_eq1(&ctx(&eps, StepClass::Decrease, 4), &cur, &next), Outcome::Passed);
    }

    #[test]
    fn eq1_skipped_on_consensus() {
        let eps = from_int(1);
        let cur = ints(&[2, 2, 2]);
        assert_eq!(check_eq1(&ctx(&eps, StepClass::Terminal, 3), &cur, &cur), Outcome::Skipped);
    }

    #[test]
    fn eq1_reports_exact_sides() {
        // not a real successor: x_1 jumps backward
        let eps = from_int(1);
        let cur = ints(&[0, 1, 2]);
        let fake = vec![ratio(1, 4), from_int(1), ratio(3, 2)];
        let v = check_eq1(&ctx(&eps, StepClass::Decrease, 3), &cur, &fake)
            .violation()
            .unwrap();
        assert_eq!(v.check_id, EQ1);
        assert_eq!(v.lhs, from_int(1));
        assert_eq!(v.rhs, ratio(1, 2));
    }

    #[test]
    fn increment_cap_on_consensus_merge() {
        let eps = from_int(1);
        let cur = vec![ratio(1, 2), from_int(1), ratio(3, 2)];
        let next = step_opinions(&cur, &eps);
        let (plain, scaled) = check_increment_cap(&ctx(&eps, StepClass::Increase, 3), &cur, &next);
        assert_eq!(plain, Outcome::Passed);
        assert_eq!(scaled, Outcome::Passed);
    }

    #[test]
    fn increment_cap_skipped_without_growth() {
        let eps = from_int(1);
        let cur = ints(&[0, 1, 2]);
        let next = step_opinions(&cur, &eps);
        let (plain, scaled) = check_increment_cap(&ctx(&eps, StepClass::Decrease, 3), &cur, &next);
        assert_eq!((plain, scaled), (Outcome::Skipped, Outcome::Skipped));
    }

    #[test]
    fn increment_cap_four_agents() {
        let eps = from_int(1);
        let cur = ints(&[0, 0, 1, 2]);
        let mut x = cur.clone();
        // advance to the first step where nu grows
        loop {
            let next = step_opinions(&x, &eps);
            let grows = FrameSummary::of(&next).nu > FrameSummary::of(&x).nu;
            if grows {
                let (plain, scaled) =
                    check_increment_cap(&ctx(&eps, StepClass::Increase, 4), &x, &next);
                assert_eq!(plain, Outcome::Passed);
                assert_eq!(scaled, Outcome::Passed);
                break;
            }
            assert_ne!(next, x, "run ended without an I-step");
            x = next;
        }
    }

    #[test]
    fn lemma3_examples() {
        let eps = from_int(1);
        assert_eq!(
            check_lemma3(&ctx(&eps, StepClass::Decrease, 3), &ints(&[0, 1, 2])),
            Outcome::Passed
        );
        assert_eq!(
            check_lemma3(&ctx(&eps, StepClass::Decrease, 4), &ints(&[0, 1, 1, 2])),
            Outcome::Passed
        );
        // N_nu = N_1: the lemma's hypothesis (a D-step) cannot hold here
        let v = check_lemma3(&ctx(&eps, StepClass::Decrease, 3), &[from_int(0), ratio(1, 2), from_int(1)]);
        assert!(v.is_failed());
    }

    #[test]
    fn decrement_floor_example() {
        let eps = from_int(1);
        let cur = ints(&[0, 1, 2]);
        let next = step_opinions(&cur, &eps);
        let (outcome, ratio_seen) = check_decrement_floor(&ctx(&eps, StepClass::Decrease, 3), &cur, &next);
        assert_eq!(outcome, Outcome::Passed);
        // decrement 3/2 against floor 1/9
        assert_eq!(ratio_seen, Some(ratio(27, 2)));
    }

    #[test]
    fn suite_examples_have_no_violations() {
        let r = suite(from_int(1), ints(&[0, 1, 2]));
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!(r.run_count(L0_SUM), 1);
        assert_eq!(r.run_count(LEMMA3), 1);

        let r = suite(from_int(1), vec![from_int(0), from_int(1), ratio(5, 2)]);
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.run_count(FROZEN_GAP) > 0);

        let r = suite(from_int(1), ints(&[4, 4, 4]));
        assert!(r.passed());
        for id in [EQ1, LEMMA3, DECREMENT_FLOOR, INCREMENT_CAP] {
            assert_eq!(r.run_count(id), 0, "{id} should not apply");
        }
    }

    #[test]
    fn total_budget_rejects_truncated_runs() {
        let p = OpinionProfile::new(from_int(1), ints(&[0, 1, 2])).unwrap();
        let (traj, _) = simulate(&p, 1);
        assert!(matches!(check_total_budget(&annotate(&traj)), Err(Error::Truncated(1))));
        let (traj, _) = simulate(&p, 100);
        assert_eq!(check_total_budget(&annotate(&traj)).unwrap(), Outcome::Passed);
        let single = OpinionProfile::new(from_int(1), ints(&[0])).unwrap();
        let (traj, _) = simulate(&single, 4);
        assert_eq!(check_total_budget(&annotate(&traj)).unwrap(), Outcome::Passed);
    }

    #[test]
    fn violations_are_ordered() {
        let mut r = CheckSuiteResult::default();
        let eps = from_int(1);
        let c = ctx(&eps, StepClass::Decrease, 2);
        for (t, id) in [(3, "b"), (1, "z"), (3, "a")] {
            let c = StepContext { t, ..c };
            r.record(id, c.fail(id, from_int(1), from_int(0), String::new()));
        }
        r.canonicalize();
        let order: Vec<_> = r.violations.iter().map(|v| (v.t, v.check_id.as_str())).collect();
        assert_eq!(order, vec![(1, "z"), (3, "a"), (3, "b")]);
        assert!(!r.passed());
    }
}
