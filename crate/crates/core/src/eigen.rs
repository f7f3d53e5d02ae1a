//! Extremal generalized eigenpairs `A u = λ M u` by shifted inverse
//! iteration. Inner solves use a sparse Cholesky factorization of the
//! shifted operator, or Jacobi-preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::factor::EnvelopeCholesky;
use crate::fem::{NodalField, SparseSymMatrix};
use crate::scalar::Real;

pub const DEFAULT_MAX_CG: usize = 10_000;

#[derive(Debug, Clone, Copy)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `A x = b` for symmetric positive definite `A` to `‖Ax − b‖ ≤ tol‖b‖`.
pub fn solve_spd<T: Real>(a: &SparseSymMatrix<T>, b: &[T], tol: T) -> Result<Vec<T>> {
    solve_spd_from(a, b, None, tol, DEFAULT_MAX_CG).map(|(x, _)| x)
}

/// Preconditioned CG with an optional starting guess.
pub fn solve_spd_from<T: Real>(
    a: &SparseSymMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    tol: T,
    max_iter: usize,
) -> Result<(Vec<T>, CgReport)> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let bnorm = norm(b);
    if bnorm == T::zero() {
        return Ok((vec![T::zero(); n], CgReport { iterations: 0, relative_residual: 0.0 }));
    }
    let inv_diag: Vec<T> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();

    let mut x = match x0 {
        Some(x0) if x0.len() == n => x0.to_vec(),
        _ => vec![T::zero(); n],
    };
    let mut r = a.mul_vec(&x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(r, d)| *r * *d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let target = tol * bnorm;

    let mut rnorm = norm(&r);
    let mut it = 0;
    while rnorm > target {
        if it >= max_iter {
            return Err(Error::SolverDiverged { iterations: it, residual: (rnorm / bnorm).to_f64_lossy() });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::SolverDiverged { iterations: it, residual: (rnorm / bnorm).to_f64_lossy() });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rnorm = norm(&r);
        it += 1;
    }
    Ok((x, CgReport { iterations: it, relative_residual: (rnorm / bnorm).to_f64_lossy() }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerSolver {
    /// Factor the shifted operator once per eigen solve.
    Direct,
    Cg,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions<T> {
    /// Relative eigen-residual target.
    pub tol: T,
    pub max_iter: usize,
    pub max_cg: usize,
    /// Relative tolerance of each inner CG solve.
    pub cg_tol: T,
    /// Spectral shift `σ` in `(A + σM)^{-1} M`; `None` picks 0 unless `A`
    /// annihilates constants, in which case a small positive shift is used.
    pub shift: Option<T>,
    /// Number of vectors iterated together; 2 keeps near-degenerate
    /// pairs from stalling convergence and yields a gap estimate.
    pub block_size: usize,
    pub inner: InnerSolver,
}

impl<T: Real> Default for EigenOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::clamp_tol(1e-9),
            max_iter: 2000,
            max_cg: DEFAULT_MAX_CG,
            cg_tol: T::clamp_tol(1e-12),
            shift: None,
            block_size: 2,
            inner: InnerSolver::Direct,
        }
    }
}

impl<T: Real> EigenOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        let d = Self::default();
        Self { tol, cg_tol: (tol * T::lit(1e-3)).max(d.cg_tol), ..d }
    }
}

/// `(λ, u)` with `uᵀMu = 1` and `∫u ≥ 0`.
#[derive(Debug, Clone)]
pub struct EigenPair<T> {
    pub lambda: T,
    pub u: NodalField<T>,
    /// `‖Au − λMu‖ / (‖Au‖ + (|λ| + σ)‖Mu‖)`.
    pub residual: T,
    pub iterations: usize,
    pub cg_iterations: usize,
    /// Second Ritz value, when the block has more than one vector.
    pub next_estimate: Option<T>,
    /// Set when the Ritz gap is below `1e-6·max(λ, 1)`.
    pub near_degenerate: bool,
}

pub fn smallest_eigenpair<T: Real>(a: &SparseSymMatrix<T>, m: &SparseSymMatrix<T>, opts: &EigenOptions<T>) -> Result<EigenPair<T>> {
    let x0 = vec![T::one(); a.dim()];
    inverse_iteration(a, m, &x0, &[], opts)
}

/// As [`smallest_eigenpair`], warm-started from `x0`.
pub fn smallest_eigenpair_from<T: Real>(
    a: &SparseSymMatrix<T>,
    m: &SparseSymMatrix<T>,
    x0: &[T],
    opts: &EigenOptions<T>,
) -> Result<EigenPair<T>> {
    inverse_iteration(a, m, x0, &[], opts)
}

/// First nonzero Neumann eigenpair: inverse iteration deflated against
/// constants in the `M` inner product, so `1ᵀMu = 0`.
pub fn neumann_nontrivial_eigenpair<T: Real>(
    k: &SparseSymMatrix<T>,
    m: &SparseSymMatrix<T>,
    opts: &EigenOptions<T>,
) -> Result<EigenPair<T>> {
    let n = k.dim();
    // deterministic, non-symmetric start
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let x0: Vec<T> = (0..n)
        .map(|_| {
            state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
            T::lit((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        })
        .collect();
    neumann_nontrivial_eigenpair_from(k, m, &x0, opts)
}

pub fn neumann_nontrivial_eigenpair_from<T: Real>(
    k: &SparseSymMatrix<T>,
    m: &SparseSymMatrix<T>,
    x0: &[T],
    opts: &EigenOptions<T>,
) -> Result<EigenPair<T>> {
    let ones = vec![T::one(); k.dim()];
    let mut opts = *opts;
    if opts.shift.is_none() {
        opts.shift = Some(auto_shift(k, m));
    }
    inverse_iteration(k, m, x0, &[ones], &opts)
}

fn auto_shift<T: Real>(a: &SparseSymMatrix<T>, m: &SparseSymMatrix<T>) -> T {
    let da = a.diagonal().into_iter().fold(T::zero(), T::max);
    let dm = m.diagonal().into_iter().fold(T::zero(), T::max);
    T::lit(1e-4) * da / dm
}

fn annihilates_constants<T: Real>(a: &SparseSymMatrix<T>) -> bool {
    let ones = vec![T::one(); a.dim()];
    let r = norm(&a.mul_vec(&ones));
    let scale = a.diagonal().into_iter().fold(T::zero(), T::max) * T::from_usize_lossy(a.dim()).sqrt();
    r <= T::clamp_tol(1e-10) * scale
}

fn inverse_iteration<T: Real>(
    a: &SparseSymMatrix<T>,
    m: &SparseSymMatrix<T>,
    x0: &[T],
    deflate: &[Vec<T>],
    opts: &EigenOptions<T>,
) -> Result<EigenPair<T>> {
    let n = a.dim();
    if m.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.dim() });
    }
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    let shift = match opts.shift {
        Some(s) => s,
        None if annihilates_constants(a) => auto_shift(a, m),
        None => T::zero(),
    };
    let op = if shift == T::zero() { a.clone() } else { a.add_scaled(m, shift) };
    let chol = match opts.inner {
        // CG remains the fallback if the factorization breaks down
        InnerSolver::Direct => EnvelopeCholesky::factor(&op).ok(),
        InnerSolver::Cg => None,
    };
    let deflate_m: Vec<(Vec<T>, T)> = deflate
        .iter()
        .map(|d| {
            let md = m.mul_vec(d);
            let dd = dot(d, &md);
            (md, dd)
        })
        .collect();
    let project = |v: &mut Vec<T>| {
        for (d, (md, dd)) in deflate.iter().zip(&deflate_m) {
            let c = dot(v, md) / *dd;
            for i in 0..n {
                v[i] -= c * d[i];
            }
        }
    };

    let p = opts.block_size.clamp(1, n.saturating_sub(deflate.len()).max(1));
    let mut block: Vec<Vec<T>> = Vec::with_capacity(p);
    block.push(x0.to_vec());
    let mut state: u64 = 0x2545_f491_4f6c_dd1d;
    for _ in 1..p {
        block.push(
            (0..n)
                .map(|_| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    T::lit((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
                })
                .collect(),
        );
    }
    block.iter_mut().for_each(&project);
    let (mut ritz, mut theta) = rayleigh_ritz(a, m, &block)?;

    let mut history: Vec<T> = Vec::new();
    let mut cg_total = 0;
    let mut au = a.mul_vec(&ritz[0]);
    let mut res = eigen_residual(m, &ritz[0], &au, theta[0], shift);
    let mut it = 0;
    while res > opts.tol {
        if it >= opts.max_iter {
            let tail = history.iter().rev().take(8).rev().map(|r| r.to_f64_lossy()).collect();
            return Err(Error::EigenNotConverged { iterations: it, history: tail });
        }
        let mut next = Vec::with_capacity(p);
        for (u, &th) in ritz.iter().zip(&theta) {
            let mut rhs = m.mul_vec(u);
            // keep the right-hand side in the range of the deflated operator
            for d in deflate {
                let c = dot(&rhs, d) / dot(d, d);
                for i in 0..n {
                    rhs[i] -= c * d[i];
                }
            }
            let mut w = match &chol {
                Some(f) => f.solve(&rhs),
                None => {
                    let denom = th + shift;
                    let guess: Vec<T> = if denom > T::zero() { u.iter().map(|x| *x / denom).collect() } else { u.clone() };
                    let (w, cg) = solve_spd_from(&op, &rhs, Some(&guess), opts.cg_tol, opts.max_cg)?;
                    cg_total += cg.iterations;
                    w
                }
            };
            project(&mut w);
            next.push(w);
        }
        (ritz, theta) = rayleigh_ritz(a, m, &next)?;
        au = a.mul_vec(&ritz[0]);
        history.push(res);
        res = eigen_residual(m, &ritz[0], &au, theta[0], shift);
        it += 1;
    }

    let mut u = ritz.swap_remove(0);
    let lambda = dot(&u, &au);
    let next_estimate = theta.get(1).copied();
    let near_degenerate = next_estimate
        .map(|l2| (l2 - lambda).abs() < T::lit(1e-6) * lambda.abs().max(T::one()))
        .unwrap_or(false);

    let mean = dot(&m.mul_vec(&u), &vec![T::one(); n]);
    if mean < T::zero() {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(EigenPair {
        lambda,
        u: NodalField { values: u },
        residual: res,
        iterations: it,
        cg_iterations: cg_total,
        next_estimate,
        near_degenerate,
    })
}

/// Ritz vectors (M-orthonormal, ascending Ritz values) of the span of `block`.
fn rayleigh_ritz<T: Real>(a: &SparseSymMatrix<T>, m: &SparseSymMatrix<T>, block: &[Vec<T>]) -> Result<(Vec<Vec<T>>, Vec<T>)> {
    let p = block.len();
    if p == 1 {
        let mut u = block[0].clone();
        normalize_m(m, &mut u)?;
        let th = a.quad_form(&u);
        return Ok((vec![u], vec![th]));
    }
    let ab: Vec<Vec<T>> = block.iter().map(|v| a.mul_vec(v)).collect();
    let mb: Vec<Vec<T>> = block.iter().map(|v| m.mul_vec(v)).collect();
    let mut ap = vec![vec![T::zero(); p]; p];
    let mut mp = vec![vec![T::zero(); p]; p];
    for i in 0..p {
        for j in 0..p {
            ap[i][j] = dot(&block[i], &ab[j]);
            mp[i][j] = dot(&block[i], &mb[j]);
        }
    }
    let (vals, vecs) = dense_generalized_eig(&ap, &mp)?;
    let n = block[0].len();
    let ritz = (0..p)
        .map(|k| {
            let mut u = vec![T::zero(); n];
            for (j, v) in block.iter().enumerate() {
                let c = vecs[j][k];
                for i in 0..n {
                    u[i] += c * v[i];
                }
            }
            u
        })
        .collect::<Vec<_>>();
    let mut ritz = ritz;
    for u in ritz.iter_mut() {
        normalize_m(m, u)?;
    }
    Ok((ritz, vals))
}

/// Small dense `A x = θ B x` via Cholesky of `B` and cyclic Jacobi.
/// Returns ascending eigenvalues and eigenvectors as columns.
pub(crate) fn dense_generalized_eig<T: Real>(a: &[Vec<T>], b: &[Vec<T>]) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let p = a.len();
    // B = L Lᵀ
    let mut l = vec![vec![T::zero(); p]; p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = b[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return Err(Error::ZeroFunction);
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // Linv
    let mut linv = vec![vec![T::zero(); p]; p];
    for i in 0..p {
        linv[i][i] = T::one() / l[i][i];
        for j in 0..i {
            let mut s = T::zero();
            for k in j..i {
                s += l[i][k] * linv[k][j];
            }
            linv[i][j] = -s / l[i][i];
        }
    }
    // C = Linv A Linvᵀ
    let mut c = vec![vec![T::zero(); p]; p];
    for i in 0..p {
        for j in 0..p {
            let mut s = T::zero();
            for k in 0..p {
                for q in 0..p {
                    s += linv[i][k] * a[k][q] * linv[j][q];
                }
            }
            c[i][j] = s;
        }
    }
    let (vals, q) = jacobi_eig(c);
    // x = Linvᵀ q
    let mut x = vec![vec![T::zero(); p]; p];
    for i in 0..p {
        for k in 0..p {
            let mut s = T::zero();
            for j in 0..p {
                s += linv[j][i] * q[j][k];
            }
            x[i][k] = s;
        }
    }
    Ok((vals, x))
}

fn jacobi_eig<T: Real>(mut a: Vec<Vec<T>>) -> (Vec<T>, Vec<Vec<T>>) {
    let p = a.len();
    let mut v = vec![vec![T::zero(); p]; p];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..p {
            diag += a[i][i] * a[i][i];
            for j in (i + 1)..p {
                off += a[i][j] * a[i][j];
            }
        }
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                if a[i][j] == T::zero() {
                    continue;
                }
                let tau = (a[j][j] - a[i][i]) / (T::lit(2.0) * a[i][j]);
                let t = tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt());
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = t * cs;
                for k in 0..p {
                    let (aki, akj) = (a[k][i], a[k][j]);
                    a[k][i] = cs * aki - sn * akj;
                    a[k][j] = sn * aki + cs * akj;
                }
                for k in 0..p {
                    let (aik, ajk) = (a[i][k], a[j][k]);
                    a[i][k] = cs * aik - sn * ajk;
                    a[j][k] = sn * aik + cs * ajk;
                }
                for k in 0..p {
                    let (vki, vkj) = (v[k][i], v[k][j]);
                    v[k][i] = cs * vki - sn * vkj;
                    v[k][j] = sn * vki + cs * vkj;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| a[x][x].partial_cmp(&a[y][y]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&k| a[k][k]).collect();
    let vecs = (0..p).map(|i| order.iter().map(|&k| v[i][k]).collect()).collect();
    (vals, vecs)
}

fn eigen_residual<T: Real>(m: &SparseSymMatrix<T>, u: &[T], au: &[T], lambda: T, shift: T) -> T {
    let mu = m.mul_vec(u);
    let r: Vec<T> = au.iter().zip(&mu).map(|(a, b)| *a - lambda * *b).collect();
    let denom = norm(au) + (lambda.abs() + shift) * norm(&mu);
    if denom == T::zero() {
        T::zero()
    } else {
        norm(&r) / denom
    }
}

fn normalize_m<T: Real>(m: &SparseSymMatrix<T>, v: &mut [T]) -> Result<()> {
    let s = m.quad_form(v);
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::ZeroFunction);
    }
    let inv = T::one() / s.sqrt();
    v.iter_mut().for_each(|x| *x *= inv);
    Ok(())
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}
