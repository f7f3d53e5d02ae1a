//! Adaptive Gauss–Legendre quadrature on intervals.

use crate::scalar::Real;

const NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

const MAX_DEPTH: usize = 24;

/// Two-point Gauss rule on `[0, 1]`: `(nodes, weights)`.
pub fn gauss2_unit<T: Real>() -> ([T; 2], [T; 2]) {
    let d = T::lit(0.5) / T::lit(3.0).sqrt();
    let half = T::lit(0.5);
    ([half - d, half + d], [half, half])
}

fn gauss5<T: Real, const N: usize>(f: &impl Fn(T) -> [T; N], a: T, b: T) -> [T; N] {
    let half = T::lit(0.5) * (b - a);
    let mid = T::lit(0.5) * (a + b);
    let mut acc = [T::zero(); N];
    for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
        let v = f(mid + half * T::lit(*x));
        for k in 0..N {
            acc[k] += T::lit(*w) * half * v[k];
        }
    }
    acc
}

fn norm1<T: Real, const N: usize>(v: &[T; N]) -> T {
    v.iter().fold(T::zero(), |s, x| s + x.abs())
}

/// Integrates a vector-valued `f` over `[a, b]`, bisecting until the
/// increment from refining is below `rel_tol` relative to the running total.
pub fn adaptive_gauss<T: Real, const N: usize>(f: &impl Fn(T) -> [T; N], a: T, b: T, rel_tol: T) -> [T; N] {
    let whole = gauss5(f, a, b);
    refine(f, a, b, whole, rel_tol, 0)
}

fn refine<T: Real, const N: usize>(f: &impl Fn(T) -> [T; N], a: T, b: T, whole: [T; N], rel_tol: T, depth: usize) -> [T; N] {
    let mid = T::lit(0.5) * (a + b);
    let left = gauss5(f, a, mid);
    let right = gauss5(f, mid, b);
    let mut halves = [T::zero(); N];
    let mut diff = [T::zero(); N];
    for k in 0..N {
        halves[k] = left[k] + right[k];
        diff[k] = halves[k] - whole[k];
    }
    let scale = norm1(&halves);
    if norm1(&diff) <= rel_tol * scale || scale == T::zero() || depth >= MAX_DEPTH {
        return halves;
    }
    let l = refine(f, a, mid, left, rel_tol, depth + 1);
    let r = refine(f, mid, b, right, rel_tol, depth + 1);
    let mut out = [T::zero(); N];
    for k in 0..N {
        out[k] = l[k] + r[k];
    }
    out
}
