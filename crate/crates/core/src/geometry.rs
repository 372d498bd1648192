//! Action spaces: Euclidean balls, bounded halfspace polytopes and finite
//! embedding catalogs, with exact projection and membership tests.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};

pub type ActionVector = DVector<f64>;

/// Tolerance used when deciding whether an active-set candidate is feasible.
const FEASIBILITY_TOL: f64 = 1e-10;

/// One linear constraint `normal · a <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: DVector<f64>,
    pub bound: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, bound: f64) -> Self {
        Self {
            normal: DVector::from_vec(normal),
            bound,
        }
    }
}

/// Bounded polytope `{a : c_i·a <= b_i, a_j >= 0 for flagged j}` containing the origin.
#[derive(Debug, Clone)]
pub struct Polytope {
    halfspaces: Vec<Halfspace>,
    nonnegative: Vec<bool>,
    // every constraint (user rows followed by `-a_j <= 0` rows) as a matrix
    normals: DMatrix<f64>,
    bounds: DVector<f64>,
    vertices: Vec<DVector<f64>>,
}

impl Polytope {
    pub fn new(halfspaces: Vec<Halfspace>, nonnegative: Vec<bool>) -> Result<Self> {
        let dim = nonnegative.len();
        if dim == 0 {
            return Err(Error::InvalidSpace("polytope dimension must be positive".into()));
        }
        for h in &halfspaces {
            check_dim(dim, h.normal.len())?;
            if !h.bound.is_finite() || h.normal.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpace("non-finite constraint".into()));
            }
        }
        let rows: Vec<(DVector<f64>, f64)> = halfspaces
            .iter()
            .map(|h| (h.normal.clone(), h.bound))
            .chain(
                nonnegative
                    .iter()
                    .enumerate()
                    .filter(|(_, &flag)| flag)
                    .map(|(j, _)| (-DVector::<f64>::from_fn(dim, |i, _| f64::from(i == j)), 0.0)),
            )
            .collect();
        let m = rows.len();
        let normals = DMatrix::from_fn(m, dim, |i, j| rows[i].0[j]);
        let bounds = DVector::from_fn(m, |i, _| rows[i].1);

        if bounds.iter().any(|&b| b < 0.0) {
            return Err(Error::InvalidSpace(
                "polytope must contain the origin (every bound must be >= 0)".into(),
            ));
        }
        if m < dim || normals.rank(1e-12) < dim {
            return Err(Error::InvalidSpace("polytope is unbounded".into()));
        }
        if has_recession_ray(&normals) {
            return Err(Error::InvalidSpace("polytope is unbounded".into()));
        }

        let mut poly = Self {
            halfspaces,
            nonnegative,
            normals,
            bounds,
            vertices: Vec::new(),
        };
        poly.vertices = poly.enumerate_vertices();
        if poly.vertices.is_empty() {
            return Err(Error::InvalidSpace("polytope has no vertices".into()));
        }
        Ok(poly)
    }

    pub fn dim(&self) -> usize {
        self.normals.ncols()
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn nonnegative(&self) -> &[bool] {
        &self.nonnegative
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    /// Largest constraint violation of `x` (non-positive when feasible).
    fn max_violation(&self, x: &DVector<f64>) -> f64 {
        (&self.normals * x - &self.bounds).max()
    }

    fn enumerate_vertices(&self) -> Vec<DVector<f64>> {
        let d = self.dim();
        let mut out: Vec<DVector<f64>> = Vec::new();
        for subset in (0..self.normals.nrows()).combinations(d) {
            let a = self.normals.select_rows(&subset);
            let b = DVector::from_fn(d, |i, _| self.bounds[subset[i]]);
            let Some(v) = a.lu().solve(&b) else { continue };
            if !v.iter().all(|x| x.is_finite()) || self.max_violation(&v) > 1e-9 {
                continue;
            }
            if !out.iter().any(|w| (w - &v).amax() < 1e-9) {
                out.push(v);
            }
        }
        out
    }

    /// Exact projection by enumerating candidate active sets of size <= d.
    fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.max_violation(x) <= 0.0 {
            return x.clone();
        }
        let d = self.dim();
        let m = self.normals.nrows();
        let mut best: Option<(f64, DVector<f64>)> = None;
        for size in 1..=d.min(m) {
            for subset in (0..m).combinations(size) {
                let c = self.normals.select_rows(&subset);
                let b = DVector::from_fn(size, |i, _| self.bounds[subset[i]]);
                let gram = &c * c.transpose();
                if gram.determinant().abs() < 1e-14 {
                    continue;
                }
                let Some(mult) = gram.lu().solve(&(&c * x - b)) else {
                    continue;
                };
                let cand = x - c.transpose() * mult;
                let scale = 1.0 + cand.amax();
                if self.max_violation(&cand) > FEASIBILITY_TOL * scale {
                    continue;
                }
                let dist = (&cand - x).norm_squared();
                if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
                    best = Some((dist, cand));
                }
            }
        }
        // The true projection is always one of the candidates; vertices are a
        // safety net against degenerate rounding.
        best.map(|(_, p)| p).unwrap_or_else(|| {
            self.vertices
                .iter()
                .min_by(|a, b| (*a - x).norm().total_cmp(&(*b - x).norm()))
                .cloned()
                .expect("validated polytope has vertices")
        })
    }
}

/// True when the cone `{r : A r <= 0}` contains a nonzero ray. Assumes `A`
/// has full column rank, so the cone is pointed and any nonzero cone has an
/// extreme ray lying on `d-1` independent constraint hyperplanes.
fn has_recession_ray(normals: &DMatrix<f64>) -> bool {
    let d = normals.ncols();
    let m = normals.nrows();
    let is_ray = |r: &DVector<f64>| {
        let scale = r.norm();
        scale > 0.0 && (normals * r).max() <= 1e-12 * scale
    };
    for subset in (0..m).combinations(d - 1) {
        let sub = normals.select_rows(&subset);
        // generalized cross product: cofactors of the (d-1) x d matrix
        let null = DVector::from_fn(d, |j, _| {
            if d == 1 {
                return 1.0;
            }
            let minor = sub.clone().remove_column(j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * minor.determinant()
        });
        if null.norm() < 1e-12 {
            continue;
        }
        if is_ray(&null) || is_ray(&(-&null)) {
            return true;
        }
    }
    false
}

/// Finite catalog of actions (rows) enclosed in a ball around the origin.
#[derive(Debug, Clone)]
pub struct Catalog {
    items: Vec<f64>,
    rows: usize,
    dim: usize,
    enclosing_radius: f64,
}

impl Catalog {
    /// `items` is row-major, `rows x dim`. When `enclosing_radius` is `None`
    /// the largest item norm is used.
    pub fn new(items: Vec<f64>, dim: usize, enclosing_radius: Option<f64>) -> Result<Self> {
        if dim == 0 || items.is_empty() || !items.len().is_multiple_of(dim) {
            return Err(Error::InvalidSpace(format!(
                "catalog of {} values cannot be split into rows of dimension {dim}",
                items.len()
            )));
        }
        if items.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpace("catalog contains non-finite values".into()));
        }
        let rows = items.len() / dim;
        let max_norm = items
            .chunks_exact(dim)
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let radius = match enclosing_radius {
            Some(r) if r > 0.0 && r >= max_norm => r,
            Some(r) => {
                return Err(Error::InvalidSpace(format!(
                    "enclosing radius {r} does not cover the largest item norm {max_norm}"
                )))
            }
            None if max_norm > 0.0 => max_norm,
            None => return Err(Error::InvalidSpace("catalog items are all zero".into())),
        };
        Ok(Self {
            items,
            rows,
            dim,
            enclosing_radius: radius,
        })
    }

    pub fn from_matrix(items: &DMatrix<f64>, enclosing_radius: Option<f64>) -> Result<Self> {
        let dim = items.ncols();
        let flat = (0..items.nrows())
            .flat_map(|i| items.row(i).iter().copied().collect::<Vec<_>>())
            .collect();
        Self::new(flat, dim, enclosing_radius)
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn enclosing_radius(&self) -> f64 {
        self.enclosing_radius
    }

    pub fn item(&self, i: usize) -> ActionVector {
        DVector::from_column_slice(&self.items[i * self.dim..(i + 1) * self.dim])
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.items.chunks_exact(self.dim)
    }

    /// Index of the nearest item; ties go to the lowest index.
    pub fn nearest(&self, x: &DVector<f64>) -> usize {
        let mut best = (0usize, f64::INFINITY);
        for (i, row) in self.rows().enumerate() {
            let dist: f64 = row.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            if dist < best.1 {
                best = (i, dist);
            }
        }
        best.0
    }
}

/// The feasible action set.
#[derive(Debug, Clone)]
pub enum ActionSpace {
    Ball { dim: usize, radius: f64 },
    Polytope(Polytope),
    Discrete(Catalog),
}

impl ActionSpace {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("ball dimension must be positive".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSpace(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self::Ball { dim, radius })
    }

    pub fn polytope(halfspaces: Vec<Halfspace>, nonnegative: Vec<bool>) -> Result<Self> {
        Polytope::new(halfspaces, nonnegative).map(Self::Polytope)
    }

    pub fn discrete(catalog: Catalog) -> Self {
        Self::Discrete(catalog)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { dim, .. } => *dim,
            Self::Polytope(p) => p.dim(),
            Self::Discrete(c) => c.dim(),
        }
    }

    /// Radius of a ball around the origin that contains the whole space.
    pub fn enclosing_radius(&self) -> f64 {
        match self {
            Self::Ball { radius, .. } => *radius,
            Self::Polytope(p) => p.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max),
            Self::Discrete(c) => c.enclosing_radius(),
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, Self::Discrete(_))
    }

    /// The convex set learners iterate in: the space itself when convex, the
    /// enclosing ball of a discrete catalog otherwise.
    pub fn convex_hull_proxy(&self) -> ActionSpace {
        match self {
            Self::Discrete(c) => Self::Ball {
                dim: c.dim(),
                radius: c.enclosing_radius(),
            },
            other => other.clone(),
        }
    }

    /// Euclidean projection onto the space.
    pub fn project(&self, x: &ActionVector) -> Result<ActionVector> {
        check_dim(self.dim(), x.len())?;
        Ok(match self {
            Self::Ball { radius, .. } => {
                let norm = x.norm();
                if norm <= *radius {
                    x.clone()
                } else {
                    x * (*radius / norm)
                }
            }
            Self::Polytope(p) => p.project(x),
            Self::Discrete(c) => c.item(c.nearest(x)),
        })
    }

    /// Projection onto the scaled copy `scale * space` (the space contains
    /// the origin, so this is a shrunk copy for `scale < 1`).
    pub fn project_scaled(&self, x: &ActionVector, scale: f64) -> Result<ActionVector> {
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "shrink scale must be positive, got {scale}"
            )));
        }
        Ok(self.project(&(x / scale))? * scale)
    }

    /// Membership test with tolerance. For catalogs, `x` must equal an item
    /// within `tol` in the max-norm.
    pub fn contains(&self, x: &ActionVector, tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        if !(tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be >= 0, got {tol}")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Ok(false);
        }
        Ok(match self {
            Self::Ball { radius, .. } => x.norm() <= radius + tol,
            Self::Polytope(p) => p.max_violation(x) <= tol,
            Self::Discrete(c) => c
                .rows()
                .any(|row| row.iter().zip(x.iter()).all(|(a, b)| (a - b).abs() <= tol)),
        })
    }

    /// Draw a point uniformly from the space (catalog: a uniform item).
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> ActionVector {
        match self {
            Self::Ball { dim, radius } => {
                let dir = sample_unit_sphere(rng, *dim);
                let r = radius * rng.random::<f64>().powf(1.0 / *dim as f64);
                dir * r
            }
            Self::Polytope(p) => {
                let d = p.dim();
                let lo = DVector::from_fn(d, |j, _| {
                    p.vertices().iter().map(|v| v[j]).fold(f64::INFINITY, f64::min)
                });
                let hi = DVector::from_fn(d, |j, _| {
                    p.vertices().iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max)
                });
                loop {
                    let x = DVector::from_fn(d, |j, _| lo[j] + (hi[j] - lo[j]) * rng.random::<f64>());
                    if p.max_violation(&x) <= 0.0 {
                        return x;
                    }
                }
            }
            Self::Discrete(c) => c.item(rng.random_range(0..c.len())),
        }
    }
}

/// Uniform direction on the unit sphere in `d` dimensions, by normalizing a
/// standard Gaussian vector.
pub fn sample_unit_sphere<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ActionVector {
    assert!(d >= 1, "sphere dimension must be at least 1");
    loop {
        let g = DVector::<f64>::from_fn(d, |_, _| rng.sample(StandardNormal));
        let norm = g.norm();
        if norm > 1e-300 {
            return g / norm;
        }
    }
}
