//! Brute-force reference implementation, written straight from the update
//! rule with no ordering assumptions.

#![allow(dead_code)]

use hk_core::Rational;
use num::{Signed, Zero};

/// Neighbour index set of agent `i`, by full scan.
pub fn neighbor_set(x: &[Rational], eps: &Rational, i: usize) -> Vec<usize> {
    (0..x.len())
        .filter(|&j| (&x[j] - &x[i]).abs() <= *eps)
        .collect()
}

pub fn step(x: &[Rational], eps: &Rational) -> Vec<Rational> {
    (0..x.len())
        .map(|i| {
            let nb = neighbor_set(x, eps, i);
            let sum = nb.iter().fold(Rational::zero(), |acc, &j| acc + &x[j]);
            sum / Rational::from_integer(nb.len().into())
        })
        .collect()
}

/// Returns (T, steady state), or None if not fixed within `max_steps`.
pub fn simulate(x: &[Rational], eps: &Rational, max_steps: usize) -> Option<(usize, Vec<Rational>)> {
    let mut cur = x.to_vec();
    for t in 0..=max_steps {
        let next = step(&cur, eps);
        if next == cur {
            return Some((t, cur));
        }
        cur = next;
    }
    None
}

/// Lyapunov value computed from its definition: |U| (x_n - x_1) + (x_n - x_nu).
pub fn lyapunov(x: &[Rational]) -> Rational {
    let n = x.len();
    let u = x.iter().filter(|v| **v == x[0]).count();
    if u == n {
        return Rational::zero();
    }
    let span = &x[n - 1] - &x[0];
    Rational::from_integer(u.into()) * span + (&x[n - 1] - &x[u])
}
