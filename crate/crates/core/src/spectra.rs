//! Reference eigenvalues: Dirichlet, Neumann and Robin on the disk from
//! Bessel dispersion relations, the same quantities by finite elements on
//! any mesh, the convection threshold `β*` with `λ^R(β*) = λ^N`, and the
//! critical mass `m̄(β)` with `λ_{m̄} = λ^N`.

use crate::eigen::{neumann_nontrivial_eigenpair, smallest_eigenpair, EigenOptions, EigenPair};
use crate::error::{Error, Result};
use crate::fem::{assemble_boundary_mass, Discretization, NodalField};
use crate::insulation::{minimize_lambda_m, radiality_indicator, InsulationOptions, SolveResult};
use crate::scalar::Real;

/// Largest argument accepted by [`bessel_j`].
pub const BESSEL_MAX_X: f64 = 50.0;

/// `J₀(x)` or `J₁(x)` for `0 ≤ x ≤ 50`.
pub fn bessel_j<T: Real>(n: u32, x: T) -> Result<T> {
    if n > 1 {
        return Err(Error::InvalidArgument(format!("only J0 and J1 are available, got order {n}")));
    }
    if !(x >= T::zero()) || x > T::lit(BESSEL_MAX_X) {
        return Err(Error::OutOfRange { x: x.to_f64_lossy(), max: BESSEL_MAX_X });
    }
    Ok(if x <= T::lit(12.0) { series(n, x) } else { miller(n, x) })
}

fn series<T: Real>(n: u32, x: T) -> T {
    let q = -(x * x) / T::lit(4.0);
    let mut term = if n == 0 { T::one() } else { x / T::lit(2.0) };
    let mut sum = term;
    for k in 1..200 {
        let k = T::from_usize_lossy(k);
        term = term * q / (k * (k + T::from_usize_lossy(n as usize)));
        sum += term;
        if term.abs() <= T::epsilon() * T::lit(1e-3) * sum.abs().max(T::lit(1e-300)) {
            break;
        }
    }
    sum
}

/// Backward recurrence `J_{k-1} = (2k/x) J_k − J_{k+1}` normalized by
/// `J₀ + 2 Σ J_{2k} = 1`.
fn miller<T: Real>(n: u32, x: T) -> T {
    let start = 2 * ((3 * x.to_f64_lossy() as usize / 2 + 40) / 2);
    let two = T::lit(2.0);
    let (mut next, mut cur) = (T::zero(), T::lit(1e-30));
    let (mut j0, mut j1) = (T::zero(), T::zero());
    let mut norm = T::zero();
    for k in (1..=start).rev() {
        let prev = two * T::from_usize_lossy(k) / x * cur - next;
        next = cur;
        cur = prev;
        // cur is now J_{k-1}
        if (k - 1) % 2 == 0 && k > 1 {
            norm += two * cur;
        }
        if k == 2 {
            j1 = cur;
        }
        if k == 1 {
            j0 = cur;
        }
        if cur.abs() > T::lit(1e250) {
            let s = T::lit(1e-250);
            cur *= s;
            next *= s;
            norm *= s;
            j1 *= s;
        }
    }
    norm += j0;
    if n == 0 { j0 / norm } else { j1 / norm }
}

/// `J₁'(x) = J₀(x) − J₁(x)/x`.
pub fn bessel_j1_prime<T: Real>(x: T) -> Result<T> {
    if x == T::zero() {
        return Ok(T::lit(0.5));
    }
    Ok(bessel_j(0, x)? - bessel_j(1, x)? / x)
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<T: Real>(mut f: impl FnMut(T) -> Result<T>, mut lo: T, mut hi: T, x_tol: T) -> Result<T> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(Error::Bracket { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
    }
    for _ in 0..300 {
        let mid = T::lit(0.5) * (lo + hi);
        if hi - lo <= x_tol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(T::lit(0.5) * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `J₀(kR) = 0`.
    Dirichlet,
    /// `J₁'(kR) = 0`.
    Neumann,
    /// `k J₁(kR) = β J₀(kR)`.
    Robin,
    /// Disk with a thin layer of conductivity `ε`, see [`crate::layered`].
    Layered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRoot<T> {
    pub k: T,
    pub lambda: T,
    pub relation: Relation,
    /// Dispersion relation at `k`, scaled by the size of its terms.
    pub residual: T,
}

/// First zero of `J₀` on `(2, 3)`.
pub fn j0_first_zero<T: Real>() -> Result<T> {
    bisect(|x| bessel_j(0, x), T::lit(2.0), T::lit(3.0), T::epsilon())
}

/// First positive zero of `J₁'` on `(1, 3)`.
pub fn j1_prime_first_zero<T: Real>() -> Result<T> {
    bisect(bessel_j1_prime, T::one(), T::lit(3.0), T::epsilon())
}

fn check_radius<T: Real>(radius: T) -> Result<()> {
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

pub fn disk_dirichlet_oracle<T: Real>(radius: T) -> Result<DispersionRoot<T>> {
    check_radius(radius)?;
    let z = j0_first_zero::<T>()?;
    let k = z / radius;
    Ok(DispersionRoot { k, lambda: k * k, relation: Relation::Dirichlet, residual: bessel_j(0, z)?.abs() })
}

pub fn disk_neumann_oracle<T: Real>(radius: T) -> Result<DispersionRoot<T>> {
    check_radius(radius)?;
    let z = j1_prime_first_zero::<T>()?;
    let k = z / radius;
    let residual = bessel_j1_prime(z)?.abs() / (bessel_j(0, z)?.abs() + (bessel_j(1, z)? / z).abs());
    Ok(DispersionRoot { k, lambda: k * k, relation: Relation::Neumann, residual })
}

/// Smallest `k > 0` with `k J₁(kR) = β J₀(kR)`; `k = 0` when `β = 0`.
pub fn disk_robin_oracle<T: Real>(beta: T, radius: T) -> Result<DispersionRoot<T>> {
    check_radius(radius)?;
    if !(beta >= T::zero()) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be nonnegative, got {beta}")));
    }
    if beta == T::zero() {
        return Ok(DispersionRoot { k: T::zero(), lambda: T::zero(), relation: Relation::Robin, residual: T::zero() });
    }
    let z = j0_first_zero::<T>()?;
    let f = |k: T| -> Result<T> { Ok(k * bessel_j(1, k * radius)? - beta * bessel_j(0, k * radius)?) };
    let k = bisect(f, T::zero(), z / radius, T::epsilon() * z / radius)?;
    let (j0, j1) = (bessel_j(0, k * radius)?, bessel_j(1, k * radius)?);
    let residual = (k * j1 - beta * j0).abs() / ((k * j1).abs() + (beta * j0).abs());
    Ok(DispersionRoot { k, lambda: k * k, relation: Relation::Robin, residual })
}

/// `β* = p' J₁(p') / J₀(p')` for the unit disk, scaled by `1/R`.
pub fn disk_beta_star<T: Real>(radius: T) -> Result<T> {
    check_radius(radius)?;
    let p = j1_prime_first_zero::<T>()?;
    Ok(p * bessel_j(1, p)? / bessel_j(0, p)? / radius)
}

/// `λ^D`: Dirichlet values eliminated at the boundary vertices.
pub fn fem_dirichlet<T: Real>(disc: &Discretization<T>, opts: &EigenOptions<T>) -> Result<EigenPair<T>> {
    let mut keep = vec![true; disc.mesh.num_vertices()];
    for &v in disc.mesh.boundary_vertices() {
        keep[v] = false;
    }
    if !keep.iter().any(|k| *k) {
        return Err(Error::InvalidMesh("mesh has no interior vertices".into()));
    }
    let k = disc.stiffness.restrict(&keep);
    let m = disc.mass.restrict(&keep);
    let inner = smallest_eigenpair(&k, &m, opts)?;
    let mut values = vec![T::zero(); keep.len()];
    let mut it = inner.u.values.iter();
    for (v, kept) in values.iter_mut().zip(&keep) {
        if *kept {
            *v = *it.next().expect("restricted vector is shorter than the kept set");
        }
    }
    Ok(EigenPair { u: NodalField { values }, ..inner })
}

/// `λ^N`: first nonzero Neumann eigenvalue.
pub fn fem_neumann<T: Real>(disc: &Discretization<T>, opts: &EigenOptions<T>) -> Result<EigenPair<T>> {
    neumann_nontrivial_eigenpair(&disc.stiffness, &disc.mass, opts)
}

/// `λ^R(β)`: uninsulated Robin problem.
pub fn fem_robin<T: Real>(disc: &Discretization<T>, beta: T, opts: &EigenOptions<T>) -> Result<EigenPair<T>> {
    if !(beta >= T::zero()) {
        return Err(Error::InvalidArgument(format!("beta must be nonnegative, got {beta}")));
    }
    let w = vec![beta; disc.mesh.num_boundary()];
    let b = assemble_boundary_mass(&disc.mesh, &w)?;
    smallest_eigenpair(&disc.stiffness.add(&b), &disc.mass, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaStar<T> {
    pub beta_star: T,
    pub lambda_n: T,
    /// `|λ^R(β*) − λ^N|`.
    pub residual: T,
}

/// `β*` on the disk from the Bessel oracles, by bisection on `λ^R(β) − λ^N`.
pub fn beta_star_oracle<T: Real>(radius: T, tol: T) -> Result<BetaStar<T>> {
    let lambda_n = disk_neumann_oracle(radius)?.lambda;
    let f = |b: T| disk_robin_oracle(b, radius).map(|r| r.lambda - lambda_n);
    let hi = bracket_up(&f, T::one() / radius)?;
    let beta_star = bisect(f, T::zero(), hi, T::epsilon() * hi)?;
    let residual = f(beta_star)?.abs();
    if residual > tol {
        return Err(Error::Bracket { lo: 0.0, hi: hi.to_f64_lossy() });
    }
    Ok(BetaStar { beta_star, lambda_n, residual })
}

/// `β*` on any mesh from FEM eigenvalues.
pub fn beta_star_fem<T: Real>(disc: &Discretization<T>, tol: T, opts: &EigenOptions<T>) -> Result<BetaStar<T>> {
    let lambda_n = fem_neumann(disc, opts)?.lambda;
    let f = |b: T| fem_robin(disc, b, opts).map(|r| r.lambda - lambda_n);
    let hi = bracket_up(&f, T::one())?;
    let (mut lo, mut hi) = (T::zero(), hi);
    let mut best = (hi, f(hi)?.abs());
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() < best.1 {
            best = (mid, fm.abs());
        }
        if best.1 <= tol || mid <= lo || mid >= hi {
            break;
        }
        if fm < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.1 > tol {
        return Err(Error::Bracket { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
    }
    Ok(BetaStar { beta_star: best.0, lambda_n, residual: best.1 })
}

/// Doubles `x` until `f(x) > 0`.
fn bracket_up<T: Real>(f: &impl Fn(T) -> Result<T>, mut x: T) -> Result<T> {
    for _ in 0..60 {
        if f(x)? > T::zero() {
            return Ok(x);
        }
        x *= T::lit(2.0);
    }
    Err(Error::Bracket { lo: 0.0, hi: x.to_f64_lossy() })
}

/// `2π (1/β* − 1/β)`: the critical mass on the disk of radius `R` when the
/// minimizer at `m̄` is radial, so that `λ_{m̄}` is the Robin value with
/// coefficient `β / (1 + βm̄/|∂Ω|)`.
pub fn disk_m_bar<T: Real>(beta: T, radius: T) -> Result<T> {
    let bs = disk_beta_star(radius)?;
    if !(beta > bs) {
        return Err(Error::NoThreshold { beta: beta.to_f64_lossy(), beta_star: bs.to_f64_lossy() });
    }
    Ok(T::lit(2.0) * T::PI() * radius * (T::one() / bs - T::one() / beta))
}

/// Probe budget of [`m_bar`].
pub const M_BAR_PROBES: usize = 40;

#[derive(Debug, Clone)]
pub struct MBarReport<T> {
    pub m_bar: T,
    /// `λ_{m̄}` as computed at the returned probe.
    pub lambda: T,
    pub lambda_n: T,
    pub probes: usize,
    pub bracket: (T, T),
    /// Every probe `(m, λ_m, converged)`, in evaluation order.
    pub history: Vec<(T, T, bool)>,
}

/// Critical mass `m̄(β)` with `λ_{m̄} = λ^N`, by bisection on `λ_m − λ^N`.
///
/// `λ^N` and `β*` are taken from the same mesh. The alternation decreases
/// `F` monotonically, so every probe value is an upper bound for `λ_m`: a
/// probe below `λ^N` certifies `m > m̄` even when the probe has not
/// converged. A probe above `λ^N` is trusted as `m < m̄`.
pub fn m_bar<T: Real>(disc: &Discretization<T>, beta: T, tol: T, opts: &InsulationOptions<T>) -> Result<MBarReport<T>> {
    let bs = beta_star_fem(disc, T::clamp_tol(1e-10), &opts.eigen)?;
    if !(beta > bs.beta_star) {
        return Err(Error::NoThreshold { beta: beta.to_f64_lossy(), beta_star: bs.beta_star.to_f64_lossy() });
    }
    let lambda_n = bs.lambda_n;
    let mut history = Vec::new();
    let probe = |m: T, history: &mut Vec<(T, T, bool)>| -> Result<SolveResult<T>> {
        let r = minimize_lambda_m(disc, beta, m, opts)?;
        history.push((m, r.lambda_m, r.converged));
        Ok(r)
    };

    let (mut lo, mut hi) = (T::zero(), disc.perimeter / beta);
    // expand the upper end until it lies above m̄
    loop {
        if history.len() >= M_BAR_PROBES {
            return Err(Error::Bracket { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
        }
        let r = probe(hi, &mut history)?;
        if r.lambda_m < lambda_n {
            if (lambda_n - r.lambda_m) <= tol && r.converged {
                return Ok(MBarReport { m_bar: hi, lambda: r.lambda_m, lambda_n, probes: history.len(), bracket: (lo, hi), history });
            }
            break;
        }
        lo = hi;
        hi *= T::lit(2.0);
    }
    while history.len() < M_BAR_PROBES {
        let mid = T::lit(0.5) * (lo + hi);
        let r = probe(mid, &mut history)?;
        let gap = r.lambda_m - lambda_n;
        // above λ^N the probe is an upper bound on a value that is itself
        // above λ^N, so a small gap is conclusive with or without convergence
        if gap.abs() <= tol && (gap >= T::zero() || r.converged) {
            return Ok(MBarReport { m_bar: mid, lambda: r.lambda_m, lambda_n, probes: history.len(), bracket: (lo, hi), history });
        }
        if gap > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Bracket { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() })
}

/// Radiality tolerance `τ_mesh` of a mesh: the largest radiality indicator
/// of the uninsulated Robin eigenfunctions for the coefficients in `betas`.
/// These eigenfunctions are radial on the disk, so the value is pure mesh
/// anisotropy.
pub fn radiality_tolerance<T: Real>(disc: &Discretization<T>, betas: &[T], opts: &EigenOptions<T>) -> Result<T> {
    if betas.is_empty() {
        return Err(Error::InvalidArgument("no beta to calibrate against".into()));
    }
    let mut tau = T::zero();
    for &beta in betas {
        let eig = fem_robin(disc, beta, opts)?;
        tau = tau.max(radiality_indicator(&disc.mesh, &eig.u));
    }
    Ok(tau)
}
