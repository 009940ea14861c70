//! Instance families for tests and sweeps.

use std::path::PathBuf;

use num::{BigInt, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::OpinionProfile;
use crate::error::{Error, Result};
use crate::rational::{from_usize, Rational};

pub const DEFAULT_MAX_DENOM: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceKind {
    /// n draws on a grid of step 1/max_denom over [0, n eps].
    UniformRandom,
    /// x_i = base + i * spacing.
    Equidistant,
    /// Two blocks of equal opinions, `gap` apart.
    TwoCluster,
    /// Two blocks joined by an equidistant bridge of the remaining agents.
    Dumbbell,
    FromFile(PathBuf),
}

impl InstanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            InstanceKind::UniformRandom => "uniform_random",
            InstanceKind::Equidistant => "equidistant",
            InstanceKind::TwoCluster => "two_cluster",
            InstanceKind::Dumbbell => "dumbbell",
            InstanceKind::FromFile(_) => "from_file",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub n: usize,
    pub epsilon: Rational,
    /// Defaults to epsilon.
    pub spacing: Option<Rational>,
    /// Defaults to epsilon.
    pub gap: Option<Rational>,
    /// Cluster sizes for two_cluster (default n/2 and the rest) and dumbbell
    /// (default n/3 each).
    pub sizes: Option<(usize, usize)>,
    pub base: Rational,
    pub seed: u64,
    pub max_denom: u64,
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, n: usize, epsilon: Rational) -> Self {
        Self {
            kind,
            n,
            epsilon,
            spacing: None,
            gap: None,
            sizes: None,
            base: Rational::zero(),
            seed: 0,
            max_denom: DEFAULT_MAX_DENOM,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }
}

pub fn generate(spec: &InstanceSpec) -> Result<OpinionProfile> {
    if let InstanceKind::FromFile(path) = &spec.kind {
        return crate::io::ingest(path);
    }
    if spec.n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    if !spec.epsilon.is_positive() {
        return Err(Error::NonPositiveEpsilon(spec.epsilon.to_string()));
    }
    let n = spec.n;
    let eps = &spec.epsilon;
    let opinions = match &spec.kind {
        InstanceKind::UniformRandom => {
            if spec.max_denom == 0 {
                return Err(Error::InvalidParams("max_denom must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let width = from_usize(n) * eps;
            let denom = BigInt::from(spec.max_denom);
            let mut xs: Vec<Rational> = (0..n)
                .map(|_| {
                    let k = rng.gen_range(0..=spec.max_denom);
                    &spec.base + &width * Rational::new(BigInt::from(k), denom.clone())
                })
                .collect();
            xs.sort();
            xs
        }
        InstanceKind::Equidistant => {
            let spacing = non_negative(spec.spacing.as_ref().unwrap_or(eps), "spacing")?;
            (0..n).map(|i| &spec.base + from_usize(i) * spacing).collect()
        }
        InstanceKind::TwoCluster => {
            let gap = non_negative(spec.gap.as_ref().unwrap_or(eps), "gap")?;
            let (left, right) = spec.sizes.unwrap_or((n.div_ceil(2), n / 2));
            if left + right != n || left == 0 || right == 0 {
                return Err(Error::InvalidParams(format!(
                    "two_cluster sizes ({left},{right}) must be positive and sum to n = {n}"
                )));
            }
            let far = &spec.base + gap;
            std::iter::repeat_n(spec.base.clone(), left)
                .chain(std::iter::repeat_n(far, right))
                .collect()
        }
        InstanceKind::Dumbbell => {
            let spacing = non_negative(spec.spacing.as_ref().unwrap_or(eps), "spacing")?;
            let (left, right) = spec.sizes.unwrap_or((n / 3, n / 3));
            if left == 0 || right == 0 || left + right > n {
                return Err(Error::InvalidParams(format!(
                    "dumbbell sizes ({left},{right}) must be positive and fit in n = {n}"
                )));
            }
            let bridge = n - left - right;
            let mut xs = vec![spec.base.clone(); left];
            xs.extend((1..=bridge).map(|j| &spec.base + from_usize(j) * spacing));
            let far = &spec.base + from_usize(bridge + 1) * spacing;
            xs.extend(std::iter::repeat_n(far, right));
            xs
        }
        InstanceKind::FromFile(_) => unreachable!("handled above"),
    };
    OpinionProfile::new(eps.clone(), opinions)
}

fn non_negative<'a>(value: &'a Rational, what: &str) -> Result<&'a Rational> {
    if value.is_negative() {
        Err(Error::InvalidParams(format!("{what} must be non-negative, got {value}")))
    } else {
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{from_int, ratio};

    #[test]
    fn equidistant_by_construction() {
        let mut spec = InstanceSpec::new(InstanceKind::Equidistant, 3, from_int(1));
        spec.spacing = Some(from_int(1));
        let p = generate(&spec).unwrap();
        assert_eq!(p.opinions(), &[from_int(0), from_int(1), from_int(2)]);

        spec.spacing = Some(from_int(-1));
        assert!(matches!(generate(&spec), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn two_cluster_by_construction() {
        let mut spec = InstanceSpec::new(InstanceKind::TwoCluster, 3, from_int(1));
        spec.sizes = Some((2, 1));
        spec.gap = Some(ratio(5, 2));
        let p = generate(&spec).unwrap();
        assert_eq!(p.opinions(), &[from_int(0), from_int(0), ratio(5, 2)]);

        spec.sizes = Some((2, 2));
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn dumbbell_shape() {
        let mut spec = InstanceSpec::new(InstanceKind::Dumbbell, 7, from_int(1));
        spec.sizes = Some((2, 3));
        let p = generate(&spec).unwrap();
        let expect: Vec<_> = [0, 0, 1, 2, 3, 3, 3].iter().map(|&v| from_int(v)).collect();
        assert_eq!(p.opinions(), &expect[..]);
    }

    #[test]
    fn uniform_random_is_seeded() {
        let spec = InstanceSpec::new(InstanceKind::UniformRandom, 5, from_int(1)).with_seed(7);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        let c = generate(&spec.clone().with_seed(8)).unwrap();
        assert_ne!(a, c);
        let width = from_int(5);
        assert!(a.opinions().iter().all(|x| *x >= from_int(0) && *x <= width));
        assert!(a
            .opinions()
            .iter()
            .all(|x| x.denom() <= &BigInt::from(DEFAULT_MAX_DENOM)));
    }

    #[test]
    fn rejects_empty_and_bad_epsilon() {
        let spec = InstanceSpec::new(InstanceKind::Equidistant, 0, from_int(1));
        assert!(generate(&spec).is_err());
        let spec = InstanceSpec::new(InstanceKind::Equidistant, 3, from_int(0));
        assert!(generate(&spec).is_err());
    }
}
