//! Parameter sweeps over instance families, one CSV row per instance.
//!
//! Instances run in parallel; rows are sorted by (n, seed) before output so
//! the CSV is reproducible. The `ms` column is the only non-deterministic
//! field and can be zeroed for byte comparison.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::dynamics::default_max_steps;
use crate::error::{Error, Result};
use crate::generators::{generate, InstanceSpec};
use crate::invariants::ViolationReport;
use crate::pipeline::run;
use crate::rational::{to_decimal, Rational};

pub const CSV_HEADER: [&str; 9] = ["n", "seed", "T", "I", "D", "S", "L0", "min_dec_ratio", "ms"];

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub template: InstanceSpec,
    pub n_min: usize,
    pub n_max: usize,
    pub n_step: usize,
    pub repetitions: usize,
    pub seed_base: u64,
    /// Defaults to 3n^3 + n per instance.
    pub max_steps: Option<usize>,
}

impl SweepConfig {
    pub fn sizes(&self) -> Result<Vec<usize>> {
        if self.n_step == 0 || self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::InvalidParams(format!(
                "empty n range {}..={} step {}",
                self.n_min, self.n_max, self.n_step
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParams("repetitions must be at least 1".into()));
        }
        Ok((self.n_min..=self.n_max).step_by(self.n_step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub n: usize,
    pub seed: u64,
    pub t: usize,
    pub increase: usize,
    pub decrease: usize,
    pub split: usize,
    pub l0: Rational,
    /// Smallest D-step decrement over eps / (3 n_k); absent without D-steps.
    pub min_dec_ratio: Option<Rational>,
    pub ms: u128,
}

#[derive(Debug, Clone)]
pub struct SweepFailure {
    pub n: usize,
    pub seed: u64,
    pub reason: String,
    pub violations: Vec<ViolationReport>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

pub fn run_instance(spec: &InstanceSpec, max_steps: Option<usize>) -> Result<(SweepRow, Option<SweepFailure>)> {
    let profile = generate(spec)?;
    let n = profile.len();
    let budget = max_steps.unwrap_or_else(|| default_max_steps(n));
    let started = Instant::now();
    let report = run(&profile, budget, true);
    let ms = started.elapsed().as_millis();
    let row = SweepRow {
        n,
        seed: spec.seed,
        t: report.termination.t,
        increase: report.increase_count(),
        decrease: report.decrease_count(),
        split: report.split_count(),
        l0: report.annotated.analyses[0].lyapunov.clone(),
        min_dec_ratio: report.suite.as_ref().and_then(|s| s.min_decrement_ratio.clone()),
        ms,
    };
    let failure = match &report.suite {
        None => Some(SweepFailure {
            n,
            seed: spec.seed,
            reason: format!("no termination within {budget} steps"),
            violations: Vec::new(),
        }),
        Some(s) if !s.passed() => Some(SweepFailure {
            n,
            seed: spec.seed,
            reason: format!("{} invariant violations", s.violations.len()),
            violations: s.violations.clone(),
        }),
        Some(_) => None,
    };
    Ok((row, failure))
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome> {
    let jobs: Vec<InstanceSpec> = config
        .sizes()?
        .into_iter()
        .flat_map(|n| {
            (0..config.repetitions as u64).map(move |r| (n, config.seed_base.wrapping_add(r)))
        })
        .map(|(n, seed)| config.template.clone().with_n(n).with_seed(seed))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|spec| run_instance(spec, config.max_steps))
        .collect::<Result<_>>()?;
    let mut outcome = SweepOutcome::default();
    for (row, failure) in results {
        outcome.rows.push(row);
        outcome.failures.extend(failure);
    }
    outcome.rows.sort_by_key(|r| (r.n, r.seed));
    outcome.failures.sort_by_key(|f| (f.n, f.seed));
    Ok(outcome)
}

/// Writes the fixed CSV schema. With `timing = false` the `ms` column is 0.
pub fn write_csv<W: Write>(writer: W, rows: &[SweepRow], timing: bool) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        let ms = if timing { r.ms } else { 0 };
        out.write_record([
            r.n.to_string(),
            r.seed.to_string(),
            r.t.to_string(),
            r.increase.to_string(),
            r.decrease.to_string(),
            r.split.to_string(),
            to_decimal(&r.l0, 6),
            r.min_dec_ratio
                .as_ref()
                .map(|v| to_decimal(v, 6))
                .unwrap_or_default(),
            ms.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::InstanceKind;
    use crate::rational::from_int;

    fn config(kind: InstanceKind) -> SweepConfig {
        SweepConfig {
            template: InstanceSpec::new(kind, 1, from_int(1)),
            n_min: 10,
            n_max: 40,
            n_step: 10,
            repetitions: 1,
            seed_base: 5,
            max_steps: None,
        }
    }

    #[test]
    fn equidistant_sweep_rows() {
        let out = run_sweep(&config(InstanceKind::Equidistant)).unwrap();
        assert_eq!(out.rows.len(), 4);
        assert!(out.failures.is_empty());
        for r in &out.rows {
            assert_eq!(r.t, r.increase + r.decrease + r.split);
        }
        assert!(out.rows.windows(2).all(|w| w[0].t <= w[1].t));
    }

    #[test]
    fn repetitions_use_consecutive_seeds() {
        let mut cfg = config(InstanceKind::UniformRandom);
        cfg.repetitions = 3;
        cfg.n_max = 20;
        let out = run_sweep(&cfg).unwrap();
        let keys: Vec<_> = out.rows.iter().map(|r| (r.n, r.seed)).collect();
        assert_eq!(keys, vec![(10, 5), (10, 6), (10, 7), (20, 5), (20, 6), (20, 7)]);
    }

    #[test]
    fn csv_schema() {
        let out = run_sweep(&config(InstanceKind::Equidistant)).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &out.rows, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "n,seed,T,I,D,S,L0,min_dec_ratio,ms");
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().skip(1).all(|l| l.ends_with(",0")));
    }

    #[test]
    fn invalid_ranges() {
        let mut cfg = config(InstanceKind::Equidistant);
        cfg.n_min = 50;
        assert!(run_sweep(&cfg).is_err());
        let mut cfg = config(InstanceKind::Equidistant);
        cfg.repetitions = 0;
        assert!(run_sweep(&cfg).is_err());
    }

    #[test]
    fn budget_overrun_is_a_failure() {
        let mut cfg = config(InstanceKind::Equidistant);
        cfg.max_steps = Some(2);
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.failures.len(), 4);
    }
}
