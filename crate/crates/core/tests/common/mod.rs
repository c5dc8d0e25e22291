#![allow(dead_code)]

use covertime_core::rational::ExactChain;
use covertime_core::MarkovChain;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Visit every positive-probability walk `X_0..X_len` from `start`.
pub fn for_each_walk(m: &MarkovChain, start: usize, len: usize, f: &mut dyn FnMut(&[usize], f64)) {
    fn go(m: &MarkovChain, path: &mut Vec<usize>, p: f64, left: usize, f: &mut dyn FnMut(&[usize], f64)) {
        if left == 0 {
            f(path, p);
            return;
        }
        let x = *path.last().unwrap();
        for &(y, q) in m.row(x) {
            path.push(y);
            go(m, path, p * q, left - 1, f);
            path.pop();
        }
    }
    go(m, &mut vec![start], 1.0, len, f);
}

pub fn covers(path: &[usize], targets: &[usize], include_start: bool) -> bool {
    let seen = if include_start { path } else { &path[1..] };
    targets.iter().all(|t| seen.contains(t))
}

/// Cover probability by summing over walks, in floating point.
pub fn brute_cover(m: &MarkovChain, start: usize, targets: &[usize], len: usize, include_start: bool) -> f64 {
    let mut total = 0.0;
    for_each_walk(m, start, len, &mut |path, p| {
        if covers(path, targets, include_start) {
            total += p;
        }
    });
    total
}

/// Same sum in exact rationals.
pub fn brute_cover_exact(
    c: &ExactChain,
    start: usize,
    targets: &[usize],
    len: usize,
    include_start: bool,
) -> BigRational {
    fn go(
        c: &ExactChain,
        path: &mut Vec<usize>,
        p: &BigRational,
        left: usize,
        targets: &[usize],
        include_start: bool,
        total: &mut BigRational,
    ) {
        if left == 0 {
            if covers(path, targets, include_start) {
                *total += p;
            }
            return;
        }
        let x = *path.last().unwrap();
        for (y, q) in &c.rows()[x] {
            path.push(*y);
            go(c, path, &(p * q), left - 1, targets, include_start, total);
            path.pop();
        }
    }
    let mut total = BigRational::zero();
    go(c, &mut vec![start], &BigRational::one(), len, targets, include_start, &mut total);
    total
}
