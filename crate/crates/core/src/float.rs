//! Floating-point mode, for speed comparisons only. Termination is decided
//! with an absolute tolerance, so none of the exact checks apply here.

#[derive(Debug, Clone, PartialEq)]
pub struct FloatRun {
    pub t: usize,
    pub profiles: Vec<Vec<f64>>,
    pub truncated: bool,
}

pub fn step_f64(x: &[f64], epsilon: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let (mut lo, mut hi) = (0, 0);
    for &xi in x {
        while hi < x.len() && x[hi] - xi <= epsilon {
            hi += 1;
        }
        while xi - x[lo] > epsilon {
            lo += 1;
        }
        let window = &x[lo..hi];
        out.push(window.iter().sum::<f64>() / window.len() as f64);
    }
    out
}

/// Runs until no opinion moves by more than `tolerance`.
pub fn simulate_f64(initial: &[f64], epsilon: f64, tolerance: f64, max_steps: usize) -> FloatRun {
    let mut x = initial.to_vec();
    x.sort_by(f64::total_cmp);
    let mut profiles = vec![x];
    loop {
        let current = profiles.last().expect("non-empty");
        let t = profiles.len() - 1;
        let next = step_f64(current, epsilon);
        let settled = next
            .iter()
            .zip(current)
            .all(|(a, b)| (a - b).abs() <= tolerance);
        if settled {
            return FloatRun {
                t,
                profiles,
                truncated: false,
            };
        }
        if t >= max_steps {
            return FloatRun {
                t,
                profiles,
                truncated: true,
            };
        }
        profiles.push(next);
    }
}
