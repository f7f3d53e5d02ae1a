//! P1 finite elements: sparse symmetric storage, stiffness, mass and
//! boundary-mass assembly, and the Rayleigh quotient of the insulation
//! functional.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::quad::{adaptive_gauss, gauss2_unit};
use crate::scalar::Real;

const MIN_AREA: f64 = 1e-14;

/// Symmetric sparse matrix storing the upper triangle (`row <= col`) in CSR.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> SparseSymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, row_ptr: vec![0; n + 1], cols: Vec::new(), vals: Vec::new() }
    }

    /// Sums duplicate entries; `(i, j)` and `(j, i)` denote the same entry.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut t: Vec<(usize, usize, T)> = triplets
            .into_iter()
            .map(|(i, j, v)| (i.min(j), i.max(j), v))
            .collect();
        t.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<T> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            assert!(j < n, "triplet ({i}, {j}) outside dimension {n}");
            if last == Some((i, j)) {
                *vals.last_mut().expect("nonempty") += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &d)| (i, i, d)))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz_upper(&self) -> usize {
        self.vals.len()
    }

    /// Upper-triangle entries `(row, col, value)` with `row <= col`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = (i.min(j), i.max(j));
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.vals[self.row_ptr[i] + k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.n);
        y.iter_mut().for_each(|v| *v = T::zero());
        for i in 0..self.n {
            let xi = x[i];
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let a = self.vals[k];
                acc += a * x[j];
                if j != i {
                    y[j] += a * xi;
                }
            }
            y[i] += acc;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let a = self.vals[k];
                s += a * x[i] * y[j];
                if j != i {
                    s += a * x[j] * y[i];
                }
            }
        }
        s
    }

    pub fn quad_form(&self, x: &[T]) -> T {
        self.bilinear(x, x)
    }

    /// `self + alpha * other`, merging sparsity patterns.
    pub fn add_scaled(&self, other: &Self, alpha: T) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut row_ptr = vec![0; self.n + 1];
        let mut cols = Vec::with_capacity(self.vals.len().max(other.vals.len()));
        let mut vals = Vec::with_capacity(cols.capacity());
        for i in 0..self.n {
            let (mut p, pe) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let (mut q, qe) = (other.row_ptr[i], other.row_ptr[i + 1]);
            while p < pe || q < qe {
                let cp = if p < pe { self.cols[p] } else { usize::MAX };
                let cq = if q < qe { other.cols[q] } else { usize::MAX };
                if cp == cq {
                    cols.push(cp);
                    vals.push(self.vals[p] + alpha * other.vals[q]);
                    p += 1;
                    q += 1;
                } else if cp < cq {
                    cols.push(cp);
                    vals.push(self.vals[p]);
                    p += 1;
                } else {
                    cols.push(cq);
                    vals.push(alpha * other.vals[q]);
                    q += 1;
                }
            }
            row_ptr[i + 1] = cols.len();
        }
        Self { n: self.n, row_ptr, cols, vals }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, T::one())
    }

    /// Principal submatrix on the indices where `keep` is true, in order.
    pub fn restrict(&self, keep: &[bool]) -> Self {
        assert_eq!(keep.len(), self.n);
        let mut map = vec![usize::MAX; self.n];
        let mut m = 0;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                map[i] = m;
                m += 1;
            }
        }
        Self::from_triplets(
            m,
            self.triplets()
                .filter(|&(i, j, _)| keep[i] && keep[j])
                .map(|(i, j, v)| (map[i], map[j], v)),
        )
    }

    /// Dense copy, for small checks.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n]; self.n];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
            d[j][i] = v;
        }
        d
    }

    /// Debug dump as `row col value` lines (upper triangle).
    pub fn dump_triplets(&self) -> String {
        let mut out = String::new();
        for (i, j, v) in self.triplets() {
            let _ = writeln!(out, "{i} {j} {v}");
        }
        out
    }
}

/// P1 coefficient vector over mesh vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField<T> {
    pub values: Vec<T>,
}

impl<T: Real> NodalField<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite nodal value at {i}")));
        }
        Ok(Self { values })
    }

    pub fn from_fn(mesh: &TriMesh<T>, f: impl Fn(T, T) -> T) -> Self {
        Self { values: mesh.vertices().iter().map(|p| f(p[0], p[1])).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values at the boundary vertices, in loop order.
    pub fn boundary_trace(&self, mesh: &TriMesh<T>) -> Vec<T> {
        mesh.boundary_vertices().iter().map(|&v| self.values[v]).collect()
    }
}

/// Nonnegative profile on the boundary loop: piecewise linear between
/// boundary vertices, with optional interior breakpoints on edges.
///
/// Breakpoints let the optimal profile `max(|v|/(cβ) - 1/β, 0)` be held
/// exactly when the trace crosses the level `c` inside an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField<T> {
    values: Vec<T>,
    /// `(edge, t, value)` sorted by `(edge, t)`, `0 < t < 1`.
    breaks: Vec<(usize, T, T)>,
}

impl<T: Real> BoundaryField<T> {
    pub fn from_vertex_values(values: Vec<T>) -> Result<Self> {
        Self::with_breaks(values, Vec::new())
    }

    pub fn constant(nb: usize, value: T) -> Result<Self> {
        Self::from_vertex_values(vec![value; nb])
    }

    pub fn with_breaks(values: Vec<T>, mut breaks: Vec<(usize, T, T)>) -> Result<Self> {
        let nb = values.len();
        if nb == 0 {
            return Err(Error::InvalidArgument("empty boundary field".into()));
        }
        let bad = |v: T| !(v >= T::zero()) || !v.is_finite();
        if let Some(i) = values.iter().position(|&v| bad(v)) {
            return Err(Error::InvalidArgument(format!("boundary value {} at {i} is not finite and nonnegative", values[i])));
        }
        for &(e, t, v) in &breaks {
            if e >= nb || !(t > T::zero() && t < T::one()) || bad(v) {
                return Err(Error::InvalidArgument(format!("invalid breakpoint ({e}, {t}, {v})")));
            }
        }
        breaks.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).expect("finite"));
        Ok(Self { values, breaks })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn breaks(&self) -> &[(usize, T, T)] {
        &self.breaks
    }

    /// Linear pieces `(t0, h0, t1, h1)` covering edge `e` in parameter `t ∈ [0, 1]`.
    pub fn pieces(&self, e: usize) -> Vec<(T, T, T, T)> {
        let nb = self.values.len();
        let start = self.breaks.partition_point(|b| b.0 < e);
        let end = self.breaks.partition_point(|b| b.0 <= e);
        let mut pts = Vec::with_capacity(end - start + 2);
        pts.push((T::zero(), self.values[e]));
        pts.extend(self.breaks[start..end].iter().map(|&(_, t, v)| (t, v)));
        pts.push((T::one(), self.values[(e + 1) % nb]));
        pts.windows(2).map(|w| (w[0].0, w[0].1, w[1].0, w[1].1)).collect()
    }

    /// Exact integral of the piecewise-linear profile given the edge lengths.
    pub fn mass(&self, edge_lengths: &[T]) -> T {
        assert_eq!(edge_lengths.len(), self.values.len());
        let half = T::lit(0.5);
        (0..self.values.len())
            .map(|e| {
                self.pieces(e)
                    .into_iter()
                    .map(|(t0, h0, t1, h1)| half * (h0 + h1) * (t1 - t0) * edge_lengths[e])
                    .sum::<T>()
            })
            .sum()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| v * s).collect(),
            breaks: self.breaks.iter().map(|&(e, t, v)| (e, t, v * s)).collect(),
        }
    }
}

/// A mesh together with its stiffness and mass matrices.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    pub mesh: TriMesh<T>,
    pub stiffness: SparseSymMatrix<T>,
    pub mass: SparseSymMatrix<T>,
    pub edge_lengths: Vec<T>,
    pub perimeter: T,
}

impl<T: Real> Discretization<T> {
    pub fn new(mesh: TriMesh<T>) -> Result<Self> {
        let stiffness = assemble_stiffness(&mesh)?;
        let mass = assemble_mass(&mesh)?;
        let edge_lengths = mesh.boundary_edge_lengths();
        let perimeter = edge_lengths.iter().copied().sum();
        Ok(Self { mesh, stiffness, mass, edge_lengths, perimeter })
    }

    /// Largest triangle diameter of the underlying mesh.
    pub fn mesh_h(&self) -> T {
        self.mesh.max_diameter()
    }
}

fn check_triangle<T: Real>(mesh: &TriMesh<T>, t: usize) -> Result<T> {
    let area = mesh.triangle_area(t);
    if !(area >= T::lit(MIN_AREA)) {
        return Err(Error::DegenerateTriangle { index: t, area: area.to_f64_lossy() });
    }
    Ok(area)
}

/// `∫ ∇v·∇w` on P1.
pub fn assemble_stiffness<T: Real>(mesh: &TriMesh<T>) -> Result<SparseSymMatrix<T>> {
    let p = mesh.vertices();
    let mut trip = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = check_triangle(mesh, t)?;
        let mut b = [T::zero(); 3];
        let mut c = [T::zero(); 3];
        for i in 0..3 {
            let (j, k) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
            b[i] = p[j][1] - p[k][1];
            c[i] = p[k][0] - p[j][0];
        }
        let s = T::one() / (T::lit(4.0) * area);
        for i in 0..3 {
            for j in i..3 {
                trip.push((tri[i], tri[j], (b[i] * b[j] + c[i] * c[j]) * s));
            }
        }
    }
    Ok(SparseSymMatrix::from_triplets(mesh.num_vertices(), trip))
}

/// Consistent P1 mass matrix `∫ v w`.
pub fn assemble_mass<T: Real>(mesh: &TriMesh<T>) -> Result<SparseSymMatrix<T>> {
    let mut trip = Vec::with_capacity(6 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = check_triangle(mesh, t)?;
        let off = area / T::lit(12.0);
        for i in 0..3 {
            trip.push((tri[i], tri[i], off + off));
            for j in (i + 1)..3 {
                trip.push((tri[i], tri[j], off));
            }
        }
    }
    Ok(SparseSymMatrix::from_triplets(mesh.num_vertices(), trip))
}

/// `∫_∂Ω w v φ` with `w` piecewise linear from its boundary-vertex values.
/// The edge integrand is cubic, so two-point Gauss is exact.
pub fn assemble_boundary_mass<T: Real>(mesh: &TriMesh<T>, weights: &[T]) -> Result<SparseSymMatrix<T>> {
    let nb = mesh.num_boundary();
    if weights.len() != nb {
        return Err(Error::DimensionMismatch { expected: nb, got: weights.len() });
    }
    if let Some(i) = weights.iter().position(|w| !(*w >= T::zero()) || !w.is_finite()) {
        return Err(Error::InvalidArgument(format!("boundary weight {} at {i} is negative or not finite", weights[i])));
    }
    let (x, wq) = gauss2_unit::<T>();
    let mut trip = Vec::with_capacity(3 * nb);
    for (e, edge) in mesh.boundary_edges().iter().enumerate() {
        let (w0, w1) = (weights[e], weights[(e + 1) % nb]);
        let mut loc = [T::zero(); 3];
        for q in 0..2 {
            let t = x[q];
            let w = (T::one() - t) * w0 + t * w1;
            let (p0, p1) = (T::one() - t, t);
            let s = wq[q] * w * edge.length;
            loc[0] += s * p0 * p0;
            loc[1] += s * p0 * p1;
            loc[2] += s * p1 * p1;
        }
        push_edge(&mut trip, edge.vertices, loc);
    }
    Ok(SparseSymMatrix::from_triplets(mesh.num_vertices(), trip))
}

/// `β ∫_∂Ω v φ / (1 + β h)` integrated edge by edge, exactly up to the
/// adaptive quadrature tolerance, over the linear pieces of `h`.
pub fn assemble_robin_boundary<T: Real>(mesh: &TriMesh<T>, h: &BoundaryField<T>, beta: T) -> Result<SparseSymMatrix<T>> {
    let nb = mesh.num_boundary();
    if h.len() != nb {
        return Err(Error::DimensionMismatch { expected: nb, got: h.len() });
    }
    if !(beta >= T::zero()) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be finite and nonnegative, got {beta}")));
    }
    let tol = T::clamp_tol(1e-13);
    let mut trip = Vec::with_capacity(3 * nb);
    for (e, edge) in mesh.boundary_edges().iter().enumerate() {
        let mut loc = [T::zero(); 3];
        for (t0, h0, t1, h1) in h.pieces(e) {
            if t1 <= t0 {
                continue;
            }
            let f = |t: T| {
                let s = (t - t0) / (t1 - t0);
                let hv = h0 + s * (h1 - h0);
                let w = beta / (T::one() + beta * hv);
                let (p0, p1) = (T::one() - t, t);
                [w * p0 * p0, w * p0 * p1, w * p1 * p1]
            };
            let part = adaptive_gauss(&f, t0, t1, tol);
            for k in 0..3 {
                loc[k] += part[k] * edge.length;
            }
        }
        push_edge(&mut trip, edge.vertices, loc);
    }
    Ok(SparseSymMatrix::from_triplets(mesh.num_vertices(), trip))
}

fn push_edge<T: Real>(trip: &mut Vec<(usize, usize, T)>, [a, b]: [usize; 2], loc: [T; 3]) {
    trip.push((a, a, loc[0]));
    trip.push((a, b, loc[1]));
    trip.push((b, b, loc[2]));
}

/// `(vᵀKv + vᵀBv) / vᵀMv`.
pub fn rayleigh_quotient<T: Real>(
    stiffness: &SparseSymMatrix<T>,
    mass: &SparseSymMatrix<T>,
    boundary: &SparseSymMatrix<T>,
    v: &[T],
) -> Result<T> {
    let n = stiffness.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    let denom = mass.quad_form(v);
    if !(denom > T::zero()) {
        return Err(Error::ZeroFunction);
    }
    Ok((stiffness.quad_form(v) + boundary.quad_form(v)) / denom)
}
