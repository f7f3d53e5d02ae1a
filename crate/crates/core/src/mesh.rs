//! Triangulations of the disk and of convex polygons.
//!
//! Disks and polygons are meshed with concentric rings around the centre:
//! ring `i` of `k` sits at relative radius `i/k`, and neighbouring rings are
//! zipped together by polar angle. Rectangles use a structured grid. Meshes
//! are immutable once built; [`refine`] produces a new one.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Point<T> = [T; 2];

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind<T> {
    Disk { radius: T },
    RegularPolygon { sides: usize, circumradius: T },
    Rectangle { width: T, height: T },
    /// Vertices of a strictly convex polygon, either orientation.
    ConvexPolygon { vertices: Vec<Point<T>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec<T> {
    pub kind: DomainKind<T>,
    pub target_h: T,
}

impl<T: Real> DomainSpec<T> {
    pub fn disk(radius: T, target_h: T) -> Self {
        Self { kind: DomainKind::Disk { radius }, target_h }
    }

    pub fn regular_polygon(sides: usize, circumradius: T, target_h: T) -> Self {
        Self { kind: DomainKind::RegularPolygon { sides, circumradius }, target_h }
    }

    pub fn rectangle(width: T, height: T, target_h: T) -> Self {
        Self { kind: DomainKind::Rectangle { width, height }, target_h }
    }

    pub fn convex_polygon(vertices: Vec<Point<T>>, target_h: T) -> Self {
        Self { kind: DomainKind::ConvexPolygon { vertices }, target_h }
    }

    /// Diameter of the continuous domain.
    pub fn diameter(&self) -> T {
        match &self.kind {
            DomainKind::Disk { radius } => *radius + *radius,
            DomainKind::RegularPolygon { sides, circumradius } => {
                let two = T::lit(2.0);
                if sides % 2 == 0 {
                    two * *circumradius
                } else {
                    // longest diagonal of an odd polygon
                    let n = T::from_usize_lossy(*sides);
                    two * *circumradius * (T::PI() * T::from_usize_lossy(sides / 2) / n).sin()
                }
            }
            DomainKind::Rectangle { width, height } => width.hypot(*height),
            DomainKind::ConvexPolygon { vertices } => {
                let mut d = T::zero();
                for p in vertices {
                    for q in vertices {
                        d = d.max(dist(*p, *q));
                    }
                }
                d
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.target_h;
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::InvalidDomain(format!("target_h must be positive, got {h}")));
        }
        match &self.kind {
            DomainKind::Disk { radius } => {
                if !(*radius > T::zero()) {
                    return Err(Error::InvalidDomain(format!("radius must be positive, got {radius}")));
                }
            }
            DomainKind::RegularPolygon { sides, circumradius } => {
                if *sides < 3 {
                    return Err(Error::InvalidDomain(format!("a polygon needs at least 3 sides, got {sides}")));
                }
                if !(*circumradius > T::zero()) {
                    return Err(Error::InvalidDomain(format!(
                        "circumradius must be positive, got {circumradius}"
                    )));
                }
            }
            DomainKind::Rectangle { width, height } => {
                if !(*width > T::zero() && *height > T::zero()) {
                    return Err(Error::InvalidDomain(format!(
                        "rectangle sides must be positive, got {width} x {height}"
                    )));
                }
            }
            DomainKind::ConvexPolygon { vertices } => {
                convex_ccw(vertices)?;
            }
        }
        if !(h < self.diameter()) {
            return Err(Error::InvalidDomain(format!(
                "target_h {h} must be smaller than the domain diameter {}",
                self.diameter()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle<T> {
    pub center: Point<T>,
    pub radius: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge<T> {
    /// Endpoints in traversal order (interior on the left).
    pub vertices: [usize; 2],
    /// Outward unit normal.
    pub normal: Point<T>,
    pub length: T,
}

/// Conforming P1 triangulation with counterclockwise triangles and a single
/// counterclockwise boundary loop.
///
/// Boundary edge `e` joins `boundary_vertices[e]` to
/// `boundary_vertices[(e + 1) % nb]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh<T> {
    vertices: Vec<Point<T>>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge<T>>,
    boundary_vertices: Vec<usize>,
    boundary_slot: Vec<Option<usize>>,
    circle: Option<Circle<T>>,
}

impl<T: Real> TriMesh<T> {
    /// Builds a mesh from raw arrays, deriving and checking the boundary loop.
    pub fn new(vertices: Vec<Point<T>>, triangles: Vec<[usize; 3]>, circle: Option<Circle<T>>) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > T::zero()) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has non-positive signed area {area:e}"
                )));
            }
        }

        // directed edge -> count of undirected occurrences
        let mut count: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let entry = count.entry(key).or_insert((0, (a, b)));
                entry.0 += 1;
            }
        }
        let mut next: HashMap<usize, usize> = HashMap::new();
        for (&(lo, hi), &(c, (a, b))) in &count {
            match c {
                1 => {
                    if next.insert(a, b).is_some() {
                        return Err(Error::InvalidMesh(format!("boundary pinches at vertex {a}")));
                    }
                }
                2 => {}
                _ => {
                    return Err(Error::InvalidMesh(format!("edge ({lo}, {hi}) shared by {c} triangles")));
                }
            }
        }
        if next.is_empty() {
            return Err(Error::InvalidMesh("mesh has no boundary".into()));
        }
        let start = *next.keys().min().expect("nonempty");
        let mut boundary_vertices = Vec::with_capacity(next.len());
        let mut v = start;
        loop {
            boundary_vertices.push(v);
            v = *next
                .get(&v)
                .ok_or_else(|| Error::InvalidMesh(format!("boundary loop broken at vertex {v}")))?;
            if v == start {
                break;
            }
            if boundary_vertices.len() > next.len() {
                return Err(Error::InvalidMesh("boundary traversal does not close".into()));
            }
        }
        if boundary_vertices.len() != next.len() {
            return Err(Error::InvalidMesh(format!(
                "boundary has several loops ({} of {} edges reached)",
                boundary_vertices.len(),
                next.len()
            )));
        }

        let nb = boundary_vertices.len();
        let mut boundary_slot = vec![None; nv];
        let mut boundary_edges = Vec::with_capacity(nb);
        for (e, &a) in boundary_vertices.iter().enumerate() {
            boundary_slot[a] = Some(e);
            let b = boundary_vertices[(e + 1) % nb];
            let (pa, pb) = (vertices[a], vertices[b]);
            let length = dist(pa, pb);
            let normal = [(pb[1] - pa[1]) / length, -(pb[0] - pa[0]) / length];
            boundary_edges.push(BoundaryEdge { vertices: [a, b], normal, length });
        }

        Ok(Self { vertices, triangles, boundary_edges, boundary_vertices, boundary_slot, circle })
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge<T>] {
        &self.boundary_edges
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    /// Position of vertex `v` in the boundary loop, if it lies on the boundary.
    pub fn boundary_slot(&self, v: usize) -> Option<usize> {
        self.boundary_slot[v]
    }

    /// The circle the boundary vertices lie on, for disk meshes.
    pub fn circle(&self) -> Option<Circle<T>> {
        self.circle
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_boundary(&self) -> usize {
        self.boundary_vertices.len()
    }

    pub fn boundary_edge_lengths(&self) -> Vec<T> {
        self.boundary_edges.iter().map(|e| e.length).collect()
    }

    pub fn triangle_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn area(&self) -> T {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Largest triangle diameter (longest edge).
    pub fn max_diameter(&self) -> T {
        let mut d = T::zero();
        for tri in &self.triangles {
            for k in 0..3 {
                d = d.max(dist(self.vertices[tri[k]], self.vertices[tri[(k + 1) % 3]]));
            }
        }
        d
    }

    /// Centroid of the boundary vertices.
    pub fn boundary_centroid(&self) -> Point<T> {
        let n = T::from_usize_lossy(self.boundary_vertices.len());
        let mut c = [T::zero(); 2];
        for &v in &self.boundary_vertices {
            c[0] += self.vertices[v][0];
            c[1] += self.vertices[v][1];
        }
        [c[0] / n, c[1] / n]
    }

    /// Cumulative arc length at each boundary vertex, starting at 0.
    pub fn boundary_arclength(&self) -> Vec<T> {
        let mut s = T::zero();
        self.boundary_edges
            .iter()
            .map(|e| {
                let here = s;
                s += e.length;
                here
            })
            .collect()
    }

    /// Polar angle of each boundary vertex about the boundary centroid.
    pub fn boundary_angles(&self) -> Vec<T> {
        let c = self.circle.map(|c| c.center).unwrap_or_else(|| self.boundary_centroid());
        self.boundary_vertices
            .iter()
            .map(|&v| {
                let p = self.vertices[v];
                (p[1] - c[1]).atan2(p[0] - c[0])
            })
            .collect()
    }

    /// Text serialization: `NV NT NB`, then `x y`, `i j k` and `a b nx ny len` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.num_vertices(), self.num_triangles(), self.num_boundary());
        for p in &self.vertices {
            let _ = writeln!(out, "{} {}", p[0], p[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        for e in &self.boundary_edges {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                e.vertices[0], e.vertices[1], e.normal[0], e.normal[1], e.length
            );
        }
        out
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let mut next_fields = |what: &str, n: usize| -> Result<(usize, Vec<String>)> {
            let (line, text) = lines
                .next()
                .ok_or_else(|| Error::Parse { line: 0, msg: format!("unexpected end of input, expected {what}") })?;
            let text = text.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            let fields: Vec<String> = text.split_whitespace().map(str::to_owned).collect();
            if fields.len() != n {
                return Err(Error::Parse { line, msg: format!("expected {n} fields for {what}, got {}", fields.len()) });
            }
            Ok((line, fields))
        };
        fn num<U: std::str::FromStr>(line: usize, s: &str) -> Result<U> {
            s.parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse {s:?}") })
        }
        fn real<T: Real>(line: usize, s: &str) -> Result<T> {
            let x: f64 = num(line, s)?;
            Ok(T::lit(x))
        }

        let (line, head) = next_fields("header", 3)?;
        let nv: usize = num(line, &head[0])?;
        let nt: usize = num(line, &head[1])?;
        let nb: usize = num(line, &head[2])?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, f) = next_fields("vertex", 2)?;
            vertices.push([real(line, &f[0])?, real(line, &f[1])?]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (line, f) = next_fields("triangle", 3)?;
            triangles.push([num(line, &f[0])?, num(line, &f[1])?, num(line, &f[2])?]);
        }
        let mut listed = Vec::with_capacity(nb);
        for _ in 0..nb {
            let (line, f) = next_fields("boundary edge", 5)?;
            listed.push((line, num::<usize>(line, &f[0])?, num::<usize>(line, &f[1])?));
        }
        let mesh = Self::new(vertices, triangles, None)?;
        if mesh.num_boundary() != nb {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {nb} boundary edges, triangulation has {}", mesh.num_boundary()),
            });
        }
        for (line, a, b) in listed {
            let ok = mesh
                .boundary_slot(a)
                .map(|e| mesh.boundary_edges[e].vertices[1] == b)
                .unwrap_or(false);
            if !ok {
                return Err(Error::Parse { line, msg: format!("({a}, {b}) is not a boundary edge") });
            }
        }
        Ok(mesh)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read_text(text.as_bytes())
    }
}

/// Sum of boundary edge lengths.
pub fn boundary_measure<T: Real>(mesh: &TriMesh<T>) -> T {
    mesh.boundary_edges.iter().map(|e| e.length).sum()
}

pub fn build_mesh<T: Real>(spec: &DomainSpec<T>) -> Result<TriMesh<T>> {
    spec.validate()?;
    let h = spec.target_h;
    let limit = T::lit(1.5) * h;
    match &spec.kind {
        DomainKind::Rectangle { width, height } => {
            let nx = (*width / h).ceil().to_usize().unwrap_or(1).max(1);
            let ny = (*height / h).ceil().to_usize().unwrap_or(1).max(1);
            rectangle_mesh(*width, *height, nx, ny)
        }
        DomainKind::Disk { radius } => {
            let circle = Circle { center: [T::zero(); 2], radius: *radius };
            fit_rings(*radius, h, limit, |k| disk_mesh(circle, k))
        }
        DomainKind::RegularPolygon { sides, circumradius } => {
            let n = T::from_usize_lossy(*sides);
            let corners = (0..*sides)
                .map(|j| {
                    let a = T::lit(2.0) * T::PI() * T::from_usize_lossy(j) / n;
                    [*circumradius * a.cos(), *circumradius * a.sin()]
                })
                .collect::<Vec<_>>();
            fit_rings(*circumradius, h, limit, |k| polygon_mesh(&corners, k))
        }
        DomainKind::ConvexPolygon { vertices } => {
            let corners = convex_ccw(vertices)?;
            let c = mean(&corners);
            let reach = corners.iter().map(|p| dist(*p, c)).fold(T::zero(), T::max);
            fit_rings(reach, h, limit, |k| polygon_mesh(&corners, k))
        }
    }
}

/// Picks the smallest ring count whose mesh meets the diameter bound.
fn fit_rings<T: Real>(
    reach: T,
    h: T,
    limit: T,
    make: impl Fn(usize) -> Result<TriMesh<T>>,
) -> Result<TriMesh<T>> {
    let mut k = (reach / h).ceil().to_usize().unwrap_or(1).max(1);
    loop {
        let mesh = make(k)?;
        if mesh.max_diameter() <= limit {
            return Ok(mesh);
        }
        k += 1;
    }
}

fn rectangle_mesh<T: Real>(width: T, height: T, nx: usize, ny: usize) -> Result<TriMesh<T>> {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // exact endpoints so that the area sums to width * height
            let x = if i == nx { width } else { width * T::from_usize_lossy(i) / T::from_usize_lossy(nx) };
            let y = if j == ny { height } else { height * T::from_usize_lossy(j) / T::from_usize_lossy(ny) };
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    TriMesh::new(vertices, triangles, None)
}

fn disk_mesh<T: Real>(circle: Circle<T>, k: usize) -> Result<TriMesh<T>> {
    let two_pi = T::lit(2.0) * T::PI();
    let kk = T::from_usize_lossy(k);
    let mut rings: Vec<Vec<Point<T>>> = Vec::with_capacity(k);
    for i in 1..=k {
        let r = circle.radius * T::from_usize_lossy(i) / kk;
        let n = 6 * i;
        let ring = (0..n)
            .map(|j| {
                let a = two_pi * T::from_usize_lossy(j) / T::from_usize_lossy(n);
                [circle.center[0] + r * a.cos(), circle.center[1] + r * a.sin()]
            })
            .collect();
        rings.push(ring);
    }
    let mut mesh = zip_rings(circle.center, &rings)?;
    mesh.circle = Some(circle);
    Ok(mesh)
}

fn polygon_mesh<T: Real>(corners: &[Point<T>], k: usize) -> Result<TriMesh<T>> {
    let c = mean(corners);
    let n = corners.len();
    let kk = T::from_usize_lossy(k);
    let mut rings = Vec::with_capacity(k);
    for i in 1..=k {
        let s = T::from_usize_lossy(i) / kk;
        let ii = T::from_usize_lossy(i);
        let mut ring = Vec::with_capacity(n * i);
        for side in 0..n {
            let p = corners[side];
            let q = corners[(side + 1) % n];
            for j in 0..i {
                let t = T::from_usize_lossy(j) / ii;
                let x = p[0] + t * (q[0] - p[0]);
                let y = p[1] + t * (q[1] - p[1]);
                if i == k {
                    ring.push([x, y]);
                } else {
                    ring.push([c[0] + s * (x - c[0]), c[1] + s * (y - c[1])]);
                }
            }
        }
        rings.push(ring);
    }
    zip_rings(c, &rings)
}

/// Triangulates a centre point plus nested rings that all start in the same
/// polar direction and run counterclockwise.
fn zip_rings<T: Real>(center: Point<T>, rings: &[Vec<Point<T>>]) -> Result<TriMesh<T>> {
    let two_pi = T::lit(2.0) * T::PI();
    let mut vertices = vec![center];
    let mut offsets = Vec::with_capacity(rings.len());
    for ring in rings {
        offsets.push(vertices.len());
        vertices.extend_from_slice(ring);
    }
    let theta0 = {
        let p = rings[0][0];
        (p[1] - center[1]).atan2(p[0] - center[0])
    };
    let angle = |p: Point<T>| {
        let a = (p[1] - center[1]).atan2(p[0] - center[0]) - theta0;
        let mut a = a % two_pi;
        if a < -T::lit(1e-12) {
            a += two_pi;
        }
        a.max(T::zero())
    };

    let mut triangles = Vec::new();
    let first = &rings[0];
    for j in 0..first.len() {
        triangles.push([0, offsets[0] + j, offsets[0] + (j + 1) % first.len()]);
    }
    for r in 1..rings.len() {
        let (inner, outer) = (&rings[r - 1], &rings[r]);
        let (ni, no) = (inner.len(), outer.len());
        let ang_in = |a: usize| if a == ni { two_pi } else { angle(inner[a]) };
        let ang_out = |b: usize| if b == no { two_pi } else { angle(outer[b]) };
        let gi = |a: usize| offsets[r - 1] + a % ni;
        let go = |b: usize| offsets[r] + b % no;
        let (mut a, mut b) = (0, 0);
        while a < ni || b < no {
            let advance_inner = b == no || (a < ni && ang_in(a + 1) < ang_out(b + 1));
            if advance_inner {
                triangles.push([gi(a), go(b), gi(a + 1)]);
                a += 1;
            } else {
                triangles.push([gi(a), go(b), go(b + 1)]);
                b += 1;
            }
        }
    }
    TriMesh::new(vertices, triangles, None)
}

/// Uniform 1-to-4 split; boundary midpoints of disk meshes are pushed onto the circle.
pub fn refine<T: Real>(mesh: &TriMesh<T>) -> Result<TriMesh<T>> {
    let mut vertices = mesh.vertices.clone();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let half = T::lit(0.5);
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point<T>>| -> usize {
        *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (p, q) = (vertices[a], vertices[b]);
            vertices.push([half * (p[0] + q[0]), half * (p[1] + q[1])]);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = midpoint(a, b, &mut vertices);
        let bc = midpoint(b, c, &mut vertices);
        let ca = midpoint(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    if let Some(circle) = mesh.circle {
        for e in &mesh.boundary_edges {
            let [a, b] = e.vertices;
            let m = mid[&(a.min(b), a.max(b))];
            let p = vertices[m];
            let (dx, dy) = (p[0] - circle.center[0], p[1] - circle.center[1]);
            let s = circle.radius / dx.hypot(dy);
            vertices[m] = [circle.center[0] + s * dx, circle.center[1] + s * dy];
        }
    }
    let mut refined = TriMesh::new(vertices, triangles, None)?;
    refined.circle = mesh.circle;
    Ok(refined)
}

pub(crate) fn signed_area<T: Real>(a: Point<T>, b: Point<T>, c: Point<T>) -> T {
    T::lit(0.5) * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

pub(crate) fn dist<T: Real>(p: Point<T>, q: Point<T>) -> T {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

fn mean<T: Real>(pts: &[Point<T>]) -> Point<T> {
    let n = T::from_usize_lossy(pts.len());
    let sx: T = pts.iter().map(|p| p[0]).sum();
    let sy: T = pts.iter().map(|p| p[1]).sum();
    [sx / n, sy / n]
}

/// Returns the corners in counterclockwise order, rejecting non-convex input.
fn convex_ccw<T: Real>(vertices: &[Point<T>]) -> Result<Vec<Point<T>>> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::InvalidDomain(format!("a polygon needs at least 3 vertices, got {n}")));
    }
    let turn = |i: usize| {
        let (p, q, r) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
        (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0])
    };
    let turns: Vec<T> = (0..n).map(turn).collect();
    let ccw = turns.iter().all(|&t| t > T::zero());
    let cw = turns.iter().all(|&t| t < T::zero());
    if !(ccw || cw) {
        return Err(Error::InvalidDomain("polygon is not strictly convex".into()));
    }
    // a star polygon turns the same way at every corner but winds more than once
    let mut winding = T::zero();
    for i in 0..n {
        let (p, q, r) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
        let a1 = (q[1] - p[1]).atan2(q[0] - p[0]);
        let a2 = (r[1] - q[1]).atan2(r[0] - q[0]);
        let mut d = a2 - a1;
        while d > T::PI() {
            d -= T::lit(2.0) * T::PI();
        }
        while d < -T::PI() {
            d += T::lit(2.0) * T::PI();
        }
        winding += d;
    }
    if (winding.abs() - T::lit(2.0) * T::PI()).abs() > T::lit(1e-3) {
        return Err(Error::InvalidDomain("polygon is self-intersecting".into()));
    }
    let mut out = vertices.to_vec();
    if cw {
        out.reverse();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disk(h: f64) -> TriMesh<f64> {
        build_mesh(&DomainSpec::<f64>::disk(1.0, h)).unwrap()
    }

    #[test]
    fn disk_perimeter_coarse() {
        let m = disk(0.5);
        assert!((boundary_measure(&m) - 2.0 * PI).abs() / (2.0 * PI) < 0.05);
        assert!(m.max_diameter() <= 0.75);
        let c = m.circle().unwrap();
        for &v in m.boundary_vertices() {
            let p = m.vertices()[v];
            assert!((p[0].hypot(p[1]) - c.radius).abs() < 1e-14);
        }
    }

    #[test]
    fn disk_perimeter_fine_matches_inscribed_polygon() {
        let m = disk(0.05);
        let n = m.num_boundary() as f64;
        let inscribed = 2.0 * n * (PI / n).sin();
        let p = boundary_measure(&m);
        assert!((p - inscribed).abs() < 1e-12);
        assert!((p - 2.0 * PI).abs() < 1e-3);
    }

    #[test]
    fn square_area_and_perimeter_exact() {
        let m = build_mesh(&DomainSpec::<f64>::rectangle(1.0, 1.0, 0.25)).unwrap();
        assert_eq!(m.area(), 1.0);
        assert!((boundary_measure(&m) - 4.0).abs() < 1e-14);
        assert!(m.max_diameter() <= 0.375);
    }

    #[test]
    fn hexagon_boundary() {
        let m = build_mesh(&DomainSpec::<f64>::regular_polygon(6, 1.0, 0.3)).unwrap();
        assert_eq!(m.num_boundary() % 6, 0);
        assert!((boundary_measure(&m) - 6.0).abs() < 1e-12);
        assert!(m.max_diameter() <= 0.45 + 1e-12);
        let exact_area = 1.5 * 3f64.sqrt();
        assert!((m.area() - exact_area).abs() < 1e-12);
    }

    #[test]
    fn refine_quadruples_and_improves_perimeter() {
        let m0 = disk(0.3);
        let m1 = refine(&m0).unwrap();
        assert_eq!(m1.num_triangles(), 4 * m0.num_triangles());
        let e0 = (boundary_measure(&m0) - 2.0 * PI).abs();
        let e1 = (boundary_measure(&m1) - 2.0 * PI).abs();
        assert!(e1 < e0);
        let sq = build_mesh(&DomainSpec::<f64>::rectangle(1.0, 1.0, 0.25)).unwrap();
        let sq1 = refine(&sq).unwrap();
        assert!((sq1.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(build_mesh(&DomainSpec::<f64>::disk(1.0, 0.0)).is_err());
        assert!(build_mesh(&DomainSpec::<f64>::disk(1.0, -0.1)).is_err());
        assert!(build_mesh(&DomainSpec::<f64>::disk(1.0, 3.0)).is_err());
        assert!(build_mesh(&DomainSpec::<f64>::disk(-1.0, 0.1)).is_err());
        assert!(build_mesh(&DomainSpec::<f64>::regular_polygon(2, 1.0, 0.1)).is_err());
        let dart = vec![[0.0, 0.0], [2.0, 1.0], [0.0, 2.0], [0.5, 1.0]];
        assert!(matches!(
            build_mesh(&DomainSpec::<f64>::convex_polygon(dart, 0.2)),
            Err(Error::InvalidDomain(_))
        ));
    }

    #[test]
    fn convex_polygon_either_orientation() {
        let tri = vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]];
        let m = build_mesh(&DomainSpec::<f64>::convex_polygon(tri, 0.2)).unwrap();
        assert!((m.area() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn boundary_loop_and_normals() {
        for m in [disk(0.2), build_mesh(&DomainSpec::<f64>::regular_polygon(5, 1.0, 0.2)).unwrap()] {
            let nb = m.num_boundary();
            let c = m.boundary_centroid();
            for (e, edge) in m.boundary_edges().iter().enumerate() {
                let next = &m.boundary_edges()[(e + 1) % nb];
                assert_eq!(edge.vertices[1], next.vertices[0]);
                assert!((edge.normal[0].hypot(edge.normal[1]) - 1.0).abs() < 1e-12);
                let p = m.vertices()[edge.vertices[0]];
                assert!(edge.normal[0] * (p[0] - c[0]) + edge.normal[1] * (p[1] - c[1]) > 0.0);
            }
        }
    }

    #[test]
    fn text_roundtrip() {
        let m = disk(0.4);
        let back = TriMesh::<f64>::from_text(&m.to_text()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.boundary_edges(), m.boundary_edges());
    }

    #[test]
    fn text_rejects_garbage() {
        assert!(matches!(TriMesh::<f64>::from_text("3 1\n"), Err(Error::Parse { .. })));
        assert!(TriMesh::<f64>::from_text("3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1 0 -1 1\n1 2 1 1 1\n0 2 -1 0 1\n").is_err());
    }
}
