//! Optimal insulation of a Robin boundary.
//!
//! For a fixed trace `v` on the boundary, the profile of mass `m` that
//! minimizes `∫ v²/(1+βh)` is
//!
//! ```text
//! h_v = |v|/(c β) − 1/β  on {|v| ≥ c},   0 elsewhere,
//! c (|{|v| ≥ c}| + β m) = ∫_{|v| ≥ c} |v|,
//! ```
//!
//! and for a fixed profile the best `v` is the first eigenfunction of
//! `−Δu = λu`, `∂u/∂ν + βu/(1+βh) = 0`. [`minimize_lambda_m`] alternates the
//! two exact partial minimizations, so the functional never increases.
//!
//! Traces are piecewise linear along the boundary loop and all level sets are
//! computed exactly, splitting edges where the trace crosses `c`. The optimal
//! profile keeps those crossing points as breakpoints, so its mass is `m`
//! without any renormalization.

use rand::Rng;

use crate::eigen::{norm, smallest_eigenpair, smallest_eigenpair_from, EigenOptions, EigenPair};
use crate::error::{Error, Result};
use crate::fem::{assemble_robin_boundary, BoundaryField, Discretization, NodalField};
use crate::mesh::TriMesh;
use crate::quad::adaptive_gauss;
use crate::scalar::Real;

/// `|v|` at the boundary vertices with the lengths of the edges between them.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceField<T> {
    values: Vec<T>,
    lengths: Vec<T>,
}

impl<T: Real> TraceField<T> {
    /// Edge `e` runs from vertex `e` to vertex `e + 1 (mod n)` and has length
    /// `lengths[e]`; zero lengths are allowed and model jumps.
    pub fn new(values: &[T], lengths: &[T]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty trace".into()));
        }
        if values.len() != lengths.len() {
            return Err(Error::DimensionMismatch { expected: values.len(), got: lengths.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite trace value".into()));
        }
        if lengths.iter().any(|l| !(*l >= T::zero()) || !l.is_finite()) {
            return Err(Error::InvalidArgument("edge lengths must be finite and nonnegative".into()));
        }
        Ok(Self { values: values.iter().map(|v| v.abs()).collect(), lengths: lengths.to_vec() })
    }

    pub fn from_nodal(mesh: &TriMesh<T>, u: &NodalField<T>) -> Result<Self> {
        Self::new(&u.boundary_trace(mesh), &mesh.boundary_edge_lengths())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn perimeter(&self) -> T {
        self.lengths.iter().copied().sum()
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// `∫ |v|` over the whole loop.
    pub fn integral(&self) -> T {
        self.edges().map(|(a, b, l)| T::lit(0.5) * (a + b) * l).sum()
    }

    fn edges(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        let n = self.values.len();
        (0..n).map(move |e| (self.values[e], self.values[(e + 1) % n], self.lengths[e]))
    }

    /// Measure of `{|v| ≥ c}` and `∫_{|v| ≥ c} |v|`, exact for the linear trace.
    pub fn level_set(&self, c: T) -> (T, T) {
        let half = T::lit(0.5);
        let mut measure = T::zero();
        let mut integral = T::zero();
        for (a, b, l) in self.edges() {
            match (a >= c, b >= c) {
                (true, true) => {
                    measure += l;
                    integral += half * (a + b) * l;
                }
                (false, false) => {}
                (true, false) => {
                    let t = (a - c) / (a - b);
                    measure += t * l;
                    integral += half * (a + c) * t * l;
                }
                (false, true) => {
                    let t = (b - c) / (b - a);
                    measure += t * l;
                    integral += half * (b + c) * t * l;
                }
            }
        }
        (measure, integral)
    }

    /// `g(c) = c (|{|v| ≥ c}| + β m) − ∫_{|v| ≥ c} |v|`, increasing in `c`.
    pub fn fixed_point_residual(&self, c: T, beta: T, m: T) -> T {
        let (measure, integral) = self.level_set(c);
        c * (measure + beta * m) - integral
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointReport<T> {
    pub c: T,
    pub level_set_measure: T,
    pub level_set_integral: T,
    pub residual: T,
    /// Final bisection bracket; `g(lo) < 0 ≤ g(hi)`.
    pub bracket: (T, T),
}

fn check_params<T: Real>(beta: T, m: T) -> Result<()> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    if !(m > T::zero()) || !m.is_finite() {
        return Err(Error::InvalidArgument(format!("mass must be positive, got {m}")));
    }
    Ok(())
}

/// The unique `c > 0` with `g(c) = 0`, by bisection on `[0, max|v|]`.
pub fn solve_c_fixed_point<T: Real>(trace: &TraceField<T>, beta: T, m: T, tol: T) -> Result<FixedPointReport<T>> {
    check_params(beta, m)?;
    let top = trace.max();
    if !(top > T::zero()) {
        return Err(Error::DegenerateTrace);
    }
    let g = |c: T| trace.fixed_point_residual(c, beta, m);
    let (mut lo, mut hi) = (T::zero(), top);
    for _ in 0..400 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let c = if g(lo).abs() < g(hi).abs() && lo > T::zero() { lo } else { hi };
    let residual = g(c);
    if residual.abs() > tol * (T::one() + trace.integral()) {
        return Err(Error::Bracket { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
    }
    let (level_set_measure, level_set_integral) = trace.level_set(c);
    Ok(FixedPointReport { c, level_set_measure, level_set_integral, residual, bracket: (lo, hi) })
}

/// Relative tolerance on the mass identity `∫ h_v = m`.
pub const MASS_TOL: f64 = 1e-8;

/// The minimizer `h_v` of `∫ v²/(1+βh)` over nonnegative `h` of mass `m`.
pub fn optimal_h<T: Real>(trace: &TraceField<T>, beta: T, m: T, tol: T) -> Result<(BoundaryField<T>, FixedPointReport<T>)> {
    let fp = solve_c_fixed_point(trace, beta, m, tol)?;
    let c = fp.c;
    let profile = |v: T| (v / (c * beta) - T::one() / beta).max(T::zero());
    let values: Vec<T> = trace.values.iter().map(|&v| profile(v)).collect();
    let n = trace.len();
    let mut breaks = Vec::new();
    for e in 0..n {
        let (a, b) = (trace.values[e], trace.values[(e + 1) % n]);
        if (a > c && b < c) || (a < c && b > c) {
            let t = (c - a) / (b - a);
            if t > T::zero() && t < T::one() {
                breaks.push((e, t, T::zero()));
            }
        }
    }
    let h = BoundaryField::with_breaks(values, breaks)?;
    let mass = h.mass(&trace.lengths);
    if (mass - m).abs() > T::clamp_tol(MASS_TOL) * m {
        return Err(Error::MassIdentity { expected: m.to_f64_lossy(), got: mass.to_f64_lossy() });
    }
    Ok((h, fp))
}

/// `∫ v² / (1 + βh)` over the boundary, edge by edge and piece by piece.
pub fn boundary_energy<T: Real>(trace: &TraceField<T>, h: &BoundaryField<T>, beta: T) -> T {
    assert_eq!(trace.len(), h.len(), "trace and profile live on different boundaries");
    let tol = T::clamp_tol(1e-12);
    let n = trace.len();
    let mut total = T::zero();
    for e in 0..n {
        let (a, b) = (trace.values[e], trace.values[(e + 1) % n]);
        let l = trace.lengths[e];
        if l == T::zero() {
            continue;
        }
        for (t0, h0, t1, h1) in h.pieces(e) {
            if t1 <= t0 {
                continue;
            }
            let f = |t: T| {
                let v = a + t * (b - a);
                let s = (t - t0) / (t1 - t0);
                let hv = h0 + s * (h1 - h0);
                [v * v / (T::one() + beta * hv)]
            };
            total += adaptive_gauss(&f, t0, t1, tol)[0] * l;
        }
    }
    total
}

/// `F(u, h) = (∫|∇u|² + β ∫ u²/(1+βh)) / ∫u²`, boundary term by quadrature of the trace.
pub fn functional_value<T: Real>(disc: &Discretization<T>, u: &NodalField<T>, h: &BoundaryField<T>, beta: T) -> Result<T> {
    let denom = disc.mass.quad_form(&u.values);
    if !(denom > T::zero()) {
        return Err(Error::ZeroFunction);
    }
    let trace = TraceField::from_nodal(&disc.mesh, u)?;
    Ok((disc.stiffness.quad_form(&u.values) + beta * boundary_energy(&trace, h, beta)) / denom)
}

/// First eigenpair of `−Δu = λu`, `∂u/∂ν + βu/(1+βh) = 0`.
pub fn lambda_of_h<T: Real>(
    disc: &Discretization<T>,
    h: &BoundaryField<T>,
    beta: T,
    opts: &EigenOptions<T>,
    warm: Option<&[T]>,
) -> Result<EigenPair<T>> {
    if !(beta > T::zero()) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    let b = assemble_robin_boundary(&disc.mesh, h, beta)?;
    let a = disc.stiffness.add(&b);
    match warm {
        Some(x0) => smallest_eigenpair_from(&a, &disc.mass, x0, opts),
        None => smallest_eigenpair(&a, &disc.mass, opts),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct InsulationOptions<T> {
    /// Stop once the relative decrease of `F` falls below this ...
    pub tol_f: T,
    /// ... and the relative change of `c_u` falls below this.
    pub tol_c: T,
    pub max_iter: usize,
    pub fixed_point_tol: T,
    pub eigen: EigenOptions<T>,
    /// Also start from a profile tilted by `1 + tilt·cos θ`.
    pub perturbed_restart: bool,
    pub tilt: T,
    /// Relative increase of `F` tolerated before a step counts as ascent.
    pub descent_slack: T,
}

impl<T: Real> Default for InsulationOptions<T> {
    fn default() -> Self {
        Self {
            tol_f: T::clamp_tol(1e-10),
            tol_c: T::clamp_tol(1e-8),
            max_iter: 500,
            fixed_point_tol: T::clamp_tol(1e-12),
            eigen: EigenOptions::default(),
            perturbed_restart: true,
            tilt: T::lit(0.1),
            descent_slack: T::clamp_tol(1e-12),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    Symmetric,
    Tilted,
    /// `m = 0`: the plain Robin problem, no alternation.
    Bare,
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub lambda_m: T,
    pub u: NodalField<T>,
    pub h: BoundaryField<T>,
    pub c_u: T,
    pub iterations: usize,
    /// `λ(h^k)` after every eigen step; nonincreasing.
    pub functional_trace: Vec<T>,
    pub radiality: T,
    pub converged: bool,
    pub start: Start,
    /// Relative gap between the two starts' values, when both ran.
    pub multistart_gap: Option<T>,
    pub eigen_residual: T,
}

impl<T: Real> SolveResult<T> {
    /// True when the symmetric and tilted starts disagree by more than `1e-6` relative.
    pub fn multistart_disagrees(&self) -> bool {
        self.multistart_gap.map(|g| g > T::lit(1e-6)).unwrap_or(false)
    }
}

/// `λ_m`: minimum of `F(v, h)` over `v` and over profiles of mass `m`.
///
/// Runs the alternation from the uniform profile and, if enabled, from a
/// tilted one; the tilted result replaces the symmetric one only if it is
/// lower by more than `1e-9` relative.
pub fn minimize_lambda_m<T: Real>(disc: &Discretization<T>, beta: T, m: T, opts: &InsulationOptions<T>) -> Result<SolveResult<T>> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    if !(m >= T::zero()) || !m.is_finite() {
        return Err(Error::InvalidArgument(format!("mass must be nonnegative, got {m}")));
    }
    let nb = disc.mesh.num_boundary();
    if m == T::zero() {
        let h = BoundaryField::constant(nb, T::zero())?;
        let eig = lambda_of_h(disc, &h, beta, &opts.eigen, None)?;
        let radiality = radiality_indicator(&disc.mesh, &eig.u);
        return Ok(SolveResult {
            lambda_m: eig.lambda,
            u: eig.u,
            h,
            c_u: T::zero(),
            iterations: 0,
            functional_trace: vec![eig.lambda],
            radiality,
            converged: true,
            start: Start::Bare,
            multistart_gap: None,
            eigen_residual: eig.residual,
        });
    }

    let uniform = BoundaryField::constant(nb, m / disc.perimeter)?;
    let symmetric = alternate(disc, beta, m, uniform, Start::Symmetric, opts)?;
    if !opts.perturbed_restart {
        return Ok(symmetric);
    }
    let tilted_h0 = tilted_profile(disc, m, opts.tilt)?;
    let tilted = alternate(disc, beta, m, tilted_h0, Start::Tilted, opts)?;
    let gap = (symmetric.lambda_m - tilted.lambda_m).abs() / symmetric.lambda_m.abs().max(T::min_positive_value());
    let mut best = if tilted.lambda_m < symmetric.lambda_m * (T::one() - T::clamp_tol(1e-9)) { tilted } else { symmetric };
    best.multistart_gap = Some(gap);
    Ok(best)
}

/// Uniform profile of mass `m` modulated by `1 + tilt·cos θ`.
pub fn tilted_profile<T: Real>(disc: &Discretization<T>, m: T, tilt: T) -> Result<BoundaryField<T>> {
    let raw: Vec<T> = disc.mesh.boundary_angles().into_iter().map(|a| T::one() + tilt * a.cos()).collect();
    let h = BoundaryField::from_vertex_values(raw)?;
    let mass = h.mass(&disc.edge_lengths);
    Ok(h.scaled(m / mass))
}

fn alternate<T: Real>(
    disc: &Discretization<T>,
    beta: T,
    m: T,
    h0: BoundaryField<T>,
    start: Start,
    opts: &InsulationOptions<T>,
) -> Result<SolveResult<T>> {
    let mut eig = lambda_of_h(disc, &h0, beta, &opts.eigen, None)?;
    let mut trace = vec![eig.lambda];
    let mut c_prev: Option<T> = None;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let tr = TraceField::from_nodal(&disc.mesh, &eig.u)?;
        let (h_next, fp) = optimal_h(&tr, beta, m, opts.fixed_point_tol)?;
        let next = lambda_of_h(disc, &h_next, beta, &opts.eigen, Some(&eig.u.values))?;
        iterations += 1;
        let prev = eig.lambda;
        if next.lambda > prev + opts.descent_slack * prev.abs().max(T::one()) {
            return Err(Error::NonDescent {
                iteration: iterations,
                previous: prev.to_f64_lossy(),
                current: next.lambda.to_f64_lossy(),
            });
        }
        let rel_f = (prev - next.lambda) / prev.abs().max(T::min_positive_value());
        let rel_c = c_prev.map(|cp| (fp.c - cp).abs() / fp.c).unwrap_or(T::infinity());
        trace.push(next.lambda);
        eig = next;
        c_prev = Some(fp.c);
        if rel_f < opts.tol_f && rel_c < opts.tol_c {
            converged = true;
            break;
        }
    }
    // report the profile that is optimal for the final u, so (u, h_u) is the
    // couple of the optimality system
    let tr = TraceField::from_nodal(&disc.mesh, &eig.u)?;
    let (h_u, fp) = optimal_h(&tr, beta, m, opts.fixed_point_tol)?;
    let radiality = radiality_indicator(&disc.mesh, &eig.u);
    Ok(SolveResult {
        lambda_m: eig.lambda,
        u: eig.u,
        h: h_u,
        c_u: fp.c,
        iterations,
        functional_trace: trace,
        radiality,
        converged,
        start,
        multistart_gap: None,
        eigen_residual: eig.residual,
    })
}


/// Weighted standard deviation of the boundary trace over its weighted mean
/// absolute value. Vanishes when the trace is constant.
pub fn radiality_indicator<T: Real>(mesh: &TriMesh<T>, u: &NodalField<T>) -> T {
    let trace = u.boundary_trace(mesh);
    let lengths = mesh.boundary_edge_lengths();
    let n = trace.len();
    let half = T::lit(0.5);
    let weights: Vec<T> = (0..n).map(|i| half * (lengths[(i + n - 1) % n] + lengths[i])).collect();
    let total: T = weights.iter().copied().sum();
    let mean = trace.iter().zip(&weights).map(|(v, w)| *v * *w).sum::<T>() / total;
    let mean_abs = trace.iter().zip(&weights).map(|(v, w)| v.abs() * *w).sum::<T>() / total;
    let var = trace.iter().zip(&weights).map(|(v, w)| (*v - mean) * (*v - mean) * *w).sum::<T>() / total;
    var.sqrt() / (mean_abs + T::lit(1e-14))
}

/// Residual of the coupled optimality system: `u` against the Robin
/// problem with weight `β/(1+βh_u)`, i.e. `‖(K + B(h_u))u − λMu‖` relative to
/// `‖(K + B(h_u))u‖ + λ‖Mu‖`. On `{u ≥ c_u}` this weight makes the flux
/// `β c_u`; elsewhere it is `β`.
pub fn optimality_residual<T: Real>(disc: &Discretization<T>, result: &SolveResult<T>, beta: T) -> Result<T> {
    let b = assemble_robin_boundary(&disc.mesh, &result.h, beta)?;
    let a = disc.stiffness.add(&b);
    let au = a.mul_vec(&result.u.values);
    let mu = disc.mass.mul_vec(&result.u.values);
    let lambda = result.lambda_m;
    let r: Vec<T> = au.iter().zip(&mu).map(|(x, y)| *x - lambda * *y).collect();
    Ok(norm(&r) / (norm(&au) + lambda.abs() * norm(&mu)))
}

/// Upper bound on `λ_m − λ_{m+ε}` from rescaling the optimal profile of
/// mass `m + ε` down to mass `m`: `(β ε / m) ∫ u²/(1+βh)` with `‖u‖ = 1`.
pub fn continuity_bound<T: Real>(beta: T, m: T, eps: T, boundary_energy_at_m_plus_eps: T) -> T {
    beta * eps / m * boundary_energy_at_m_plus_eps
}

/// Random nonnegative vertex profile rescaled to mass `m`.
pub fn random_profile<T: Real, R: Rng + ?Sized>(rng: &mut R, edge_lengths: &[T], m: T) -> Result<BoundaryField<T>> {
    let raw: Vec<T> = (0..edge_lengths.len()).map(|_| T::lit(rng.gen::<f64>())).collect();
    let h = BoundaryField::from_vertex_values(raw)?;
    let mass = h.mass(edge_lengths);
    if !(mass > T::zero()) {
        return Err(Error::InvalidArgument("random profile has zero mass".into()));
    }
    Ok(h.scaled(m / mass))
}

#[derive(Debug, Clone, Copy)]
pub struct AuditReport<T> {
    pub samples: usize,
    pub violations: usize,
    /// `max F(u, h_u) − F(u, h')` over the samples; nonpositive when optimal.
    pub worst_margin: T,
}

/// Compares `F(u, h)` with `F(u, h')` for `samples` random `h'` of mass `m`.
pub fn optimality_audit<T: Real, R: Rng + ?Sized>(
    disc: &Discretization<T>,
    u: &NodalField<T>,
    h: &BoundaryField<T>,
    beta: T,
    m: T,
    samples: usize,
    slack: T,
    rng: &mut R,
) -> Result<AuditReport<T>> {
    let f0 = functional_value(disc, u, h, beta)?;
    let mut worst = T::neg_infinity();
    let mut violations = 0;
    for _ in 0..samples {
        let hp = random_profile(rng, &disc.edge_lengths, m)?;
        let f = functional_value(disc, u, &hp, beta)?;
        let margin = f0 - f;
        worst = worst.max(margin);
        if margin > slack {
            violations += 1;
        }
    }
    Ok(AuditReport { samples, violations, worst_margin: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, DomainSpec};
    use std::f64::consts::PI;

    fn uniform_lengths(n: usize, total: f64) -> Vec<f64> {
        vec![total / n as f64; n]
    }

    #[test]
    fn constant_trace() {
        let tr = TraceField::new(&[2.0; 16], &uniform_lengths(16, 2.0 * PI)).unwrap();
        let fp = solve_c_fixed_point(&tr, 1.0, 2.0 * PI, 1e-13).unwrap();
        assert!((fp.c - 1.0).abs() < 1e-12);
        let (h, _) = optimal_h(&tr, 1.0, 2.0 * PI, 1e-13).unwrap();
        assert!(h.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn two_level_trace_with_jumps() {
        // value 4 on an arc of length π, 0 on the rest, zero-length jump edges
        let values = [4.0, 4.0, 4.0, 0.0, 0.0, 0.0];
        let lengths = [PI / 2.0, PI / 2.0, 0.0, PI / 2.0, PI / 2.0, 0.0];
        let tr = TraceField::new(&values, &lengths).unwrap();
        let fp = solve_c_fixed_point(&tr, 1.0, 2.0 * PI, 1e-13).unwrap();
        assert!((fp.c - 4.0 / 3.0).abs() < 1e-12);
        let (h, _) = optimal_h(&tr, 1.0, 2.0 * PI, 1e-13).unwrap();
        assert_eq!(&h.values()[3..], &[0.0, 0.0, 0.0]);
        assert!(h.values()[..3].iter().all(|v| (v - 2.0).abs() < 1e-12));
        assert!((h.mass(&lengths) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_invalid() {
        let tr = TraceField::new(&[0.0; 4], &[1.0; 4]).unwrap();
        assert_eq!(solve_c_fixed_point(&tr, 1.0, 1.0, 1e-12), Err(Error::DegenerateTrace));
        let tr = TraceField::new(&[1.0; 4], &[1.0; 4]).unwrap();
        assert!(solve_c_fixed_point(&tr, 0.0, 1.0, 1e-12).is_err());
        assert!(solve_c_fixed_point(&tr, 1.0, -1.0, 1e-12).is_err());
        assert!(TraceField::new(&[1.0; 4], &[1.0; 3]).is_err());
    }

    #[test]
    fn c_decreases_with_mass() {
        let values: Vec<f64> = (0..20).map(|i| 1.0 + (i as f64 * 0.7).sin().abs()).collect();
        let tr = TraceField::new(&values, &[0.3; 20]).unwrap();
        let mut last = f64::INFINITY;
        for m in [0.1, 1.0, 10.0, 100.0, 1e4] {
            let c = solve_c_fixed_point(&tr, 2.0, m, 1e-13).unwrap().c;
            assert!(c < last);
            last = c;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn boundary_energy_constants() {
        let n = 12;
        let l = uniform_lengths(n, 3.0);
        let tr = TraceField::new(&vec![1.0; n], &l).unwrap();
        let zero = BoundaryField::constant(n, 0.0).unwrap();
        assert!((boundary_energy(&tr, &zero, 2.0) - 3.0).abs() < 1e-13);
        let (beta, m) = (2.0, 1.5);
        let h = BoundaryField::constant(n, m / 3.0).unwrap();
        assert!((boundary_energy(&tr, &h, beta) - 3.0 / (1.0 + beta * m / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn radiality_of_constant_and_x() {
        let mesh = build_mesh(&DomainSpec::<f64>::disk(1.0, 0.05)).unwrap();
        let one = NodalField::from_fn(&mesh, |_, _| 1.0);
        assert!(radiality_indicator(&mesh, &one) < 1e-12);
        let x = NodalField::from_fn(&mesh, |x, _| x);
        let expected = (0.5f64).sqrt() / (2.0 / PI);
        assert!((radiality_indicator(&mesh, &x) - expected).abs() < 1e-3);
    }

    #[test]
    fn functional_routes_agree() {
        let disc = Discretization::new(build_mesh(&DomainSpec::<f64>::disk(1.0, 0.2)).unwrap()).unwrap();
        let u = NodalField::from_fn(&disc.mesh, |x, y| 1.0 + 0.3 * x + 0.1 * y * y);
        let tr = TraceField::from_nodal(&disc.mesh, &u).unwrap();
        let (h, _) = optimal_h(&tr, 3.0, 0.7, 1e-13).unwrap();
        let b = assemble_robin_boundary(&disc.mesh, &h, 3.0).unwrap();
        let via_matrix = crate::fem::rayleigh_quotient(&disc.stiffness, &disc.mass, &b, &u.values).unwrap();
        let via_trace = functional_value(&disc, &u, &h, 3.0).unwrap();
        assert!((via_matrix - via_trace).abs() < 1e-11 * via_matrix);
    }
}
