//! Finite metric measure spaces.
//!
//! A [`Space`] owns its full pairwise distance matrix together with, for each
//! point, the other points sorted by distance and grouped into *shells*
//! (points at one common distance, up to [`SHELL_REL_TOL`]). Every
//! radius-dependent supremum in the crate is evaluated over the realizable
//! open balls, which on a finite space are exactly the shell prefixes.

use std::fs;
use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Maximum number of points a builder produces unless told otherwise.
pub const DEFAULT_POINT_BUDGET: usize = 4096;

/// Distances within this relative tolerance of a shell's first distance belong to that shell.
pub const SHELL_REL_TOL: f64 = 1e-9;

/// Largest space for which the binary distance cache is written.
pub const DISTANCE_CACHE_MAX_POINTS: usize = 4096;

static NEXT_SPACE_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightMode {
    /// Every point carries `1/N`.
    #[serde(rename = "uniform-total-1")]
    UniformTotal1,
    /// Every point carries the volume `h^dim` of its grid cell.
    #[serde(rename = "cell-volume")]
    CellVolume,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Euclidean,
    /// Shortest path along the adjacency edges, edge length = Euclidean length.
    Graph,
    /// Explicit distance matrix.
    Matrix,
}

#[derive(Clone, Debug)]
struct RowShells {
    order: Vec<u32>,
    shell_end: Vec<u32>,
    prefix_mass: Vec<f64>,
}

/// A finite metric measure space `(X, d, μ)` with atomic measure.
#[derive(Clone, Debug)]
pub struct Space {
    id: u64,
    n: usize,
    dim: Option<usize>,
    coords: Option<Vec<f64>>,
    dist: Vec<f64>,
    weights: Vec<f64>,
    total_mass: f64,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    metric: Metric,
    rows: Vec<RowShells>,
    min_spacing: f64,
    diameter: f64,
}

/// An open ball `B(c, r) = {y : d(c, y) < r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    pub members: Vec<usize>,
    pub mass: f64,
}

/// Shell structure of the space as seen from one center.
#[derive(Clone, Copy)]
pub struct Shells<'a> {
    space: &'a Space,
    center: usize,
    row: &'a RowShells,
}

impl<'a> Shells<'a> {
    pub fn center(&self) -> usize {
        self.center
    }

    /// Number of shells, counting the center itself as shell 0.
    pub fn len(&self) -> usize {
        self.row.shell_end.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row.shell_end.is_empty()
    }

    /// Point ids sorted by distance from the center (the center comes first).
    pub fn order(&self) -> &'a [u32] {
        &self.row.order
    }

    /// Positions in [`Shells::order`] occupied by shell `k`.
    pub fn range(&self, k: usize) -> Range<usize> {
        let start = if k == 0 { 0 } else { self.row.shell_end[k - 1] as usize };
        start..self.row.shell_end[k] as usize
    }

    /// Members of shell `k`.
    pub fn members(&self, k: usize) -> &'a [u32] {
        &self.row.order[self.range(k)]
    }

    /// Distance from the center to shell `k` (0 for the center shell).
    pub fn radius(&self, k: usize) -> f64 {
        let first = self.row.order[self.range(k).start] as usize;
        self.space.dist(self.center, first)
    }

    /// Mass of the points strictly closer than shell `k`, i.e. `μ(B(c, radius(k)))`.
    pub fn mass_before(&self, k: usize) -> f64 {
        self.row.prefix_mass[self.range(k).start]
    }

    /// Mass of shells `0..=k`.
    pub fn mass_through(&self, k: usize) -> f64 {
        self.row.prefix_mass[self.row.shell_end[k] as usize]
    }

    /// Mass of shell `k` alone.
    pub fn shell_mass(&self, k: usize) -> f64 {
        self.mass_through(k) - self.mass_before(k)
    }

    /// Radius whose open ball is exactly shells `0..=k`: the midpoint to the
    /// next shell, or a radius past the farthest point for the last shell.
    pub fn midpoint_radius(&self, k: usize) -> f64 {
        if k + 1 < self.len() {
            0.5 * (self.radius(k) + self.radius(k + 1))
        } else {
            let r = self.radius(k);
            if r > 0.0 {
                2.0 * r
            } else {
                1.0
            }
        }
    }

    /// Shell index of every point, indexed by point id.
    pub fn shell_index_of_points(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.space.n];
        for k in 0..self.len() {
            for &p in self.members(k) {
                out[p as usize] = k as u32;
            }
        }
        out
    }
}

fn fresh_id() -> u64 {
    NEXT_SPACE_ID.fetch_add(1, Ordering::Relaxed)
}

fn build_rows(n: usize, dist: &[f64], weights: &[f64]) -> Vec<RowShells> {
    (0..n)
        .into_par_iter()
        .map(|x| {
            let row = &dist[x * n..(x + 1) * n];
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_by(|&a, &b| {
                row[a as usize]
                    .total_cmp(&row[b as usize])
                    .then_with(|| a.cmp(&b))
            });
            // the center must lead even if another point sits at distance 0.0
            debug_assert_eq!(order[0] as usize, x);
            let mut shell_end = Vec::new();
            let mut shell_start_dist = 0.0;
            for (pos, &p) in order.iter().enumerate().skip(1) {
                let d = row[p as usize];
                if pos == 1 || d - shell_start_dist > SHELL_REL_TOL * shell_start_dist {
                    shell_end.push(pos as u32);
                    shell_start_dist = d;
                }
            }
            shell_end.push(n as u32);
            let mut prefix_mass = Vec::with_capacity(n + 1);
            let mut acc = 0.0;
            prefix_mass.push(0.0);
            for &p in &order {
                acc += weights[p as usize];
                prefix_mass.push(acc);
            }
            RowShells {
                order,
                shell_end,
                prefix_mass,
            }
        })
        .collect()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_budget(requested: usize, budget: usize) -> Result<()> {
    if requested > budget {
        Err(Error::SizeExceeded { requested, budget })
    } else {
        Ok(())
    }
}

impl Space {
    /// Builds a space from an explicit distance matrix (row-major, `n × n`).
    ///
    /// The matrix must be symmetric with a zero diagonal and positive
    /// off-diagonal entries; weights must be strictly positive.
    pub fn from_distance_matrix(
        dist: Vec<f64>,
        weights: Vec<f64>,
        coords: Option<(usize, Vec<f64>)>,
        edges: Vec<(usize, usize)>,
        metric: Metric,
    ) -> Result<Space> {
        let n = weights.len();
        if n == 0 {
            return Err(invalid("a space needs at least one point"));
        }
        if dist.len() != n * n {
            return Err(invalid(format!(
                "distance matrix has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(invalid(format!("weight of point {i} must be positive and finite, got {w}")));
            }
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(invalid(format!("d({i},{i}) must be 0")));
            }
            for j in (i + 1)..n {
                let d = dist[i * n + j];
                if !(d > 0.0 && d.is_finite()) {
                    return Err(invalid(format!("d({i},{j}) = {d} must be positive and finite")));
                }
                if d != dist[j * n + i] {
                    return Err(invalid(format!("distance matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        let (dim, coords) = match coords {
            Some((dim, c)) => {
                if c.len() != n * dim {
                    return Err(invalid("coordinate array does not match point count"));
                }
                (Some(dim), Some(c))
            }
            None => (None, None),
        };
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(invalid(format!("edge ({a},{b}) references a missing point")));
            }
            if a == b {
                return Err(invalid(format!("edge ({a},{b}) is a loop")));
            }
            if !neighbors[a].contains(&b) {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        let total_mass = crate::sum::pairwise_sum(&weights);
        let rows = build_rows(n, &dist, &weights);
        let mut min_spacing = f64::INFINITY;
        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    min_spacing = min_spacing.min(dist[i * n + j]);
                    diameter = diameter.max(dist[i * n + j]);
                }
            }
        }
        if n == 1 {
            min_spacing = 0.0;
        }
        Ok(Space {
            id: fresh_id(),
            n,
            dim,
            coords,
            dist,
            weights,
            total_mass,
            edges,
            neighbors,
            metric,
            rows,
            min_spacing,
            diameter,
        })
    }

    /// Builds a Euclidean space from point coordinates (flat, `n × dim`).
    pub fn from_points(
        dim: usize,
        coords: Vec<f64>,
        weights: Vec<f64>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Space> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let n = weights.len();
        if coords.len() != n * dim {
            return Err(invalid("coordinate array does not match point count"));
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = euclidean(&coords[i * dim..(i + 1) * dim], &coords[j * dim..(j + 1) * dim]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Space::from_distance_matrix(dist, weights, Some((dim, coords)), edges, Metric::Euclidean)
    }

    /// Regular grid on `[0,1)^dim` with spacing `h = 1/n_per_side`, points at `i·h`.
    pub fn grid(dim: usize, n_per_side: usize, mode: WeightMode) -> Result<Space> {
        Space::grid_with_budget(dim, n_per_side, mode, DEFAULT_POINT_BUDGET)
    }

    pub fn grid_with_budget(
        dim: usize,
        n_per_side: usize,
        mode: WeightMode,
        budget: usize,
    ) -> Result<Space> {
        if !(1..=3).contains(&dim) {
            return Err(invalid(format!("grid dimension must be 1, 2 or 3, got {dim}")));
        }
        if n_per_side < 2 {
            return Err(invalid("a grid needs at least 2 points per side"));
        }
        let n = n_per_side
            .checked_pow(dim as u32)
            .ok_or(Error::SizeExceeded { requested: usize::MAX, budget })?;
        check_budget(n, budget)?;
        let h = 1.0 / n_per_side as f64;
        let index = |p: usize| -> Vec<usize> {
            let mut rem = p;
            (0..dim)
                .map(|_| {
                    let c = rem % n_per_side;
                    rem /= n_per_side;
                    c
                })
                .collect()
        };
        let lattice: Vec<Vec<usize>> = (0..n).map(index).collect();
        let coords: Vec<f64> = lattice
            .iter()
            .flat_map(|ix| ix.iter().map(|&c| c as f64 * h))
            .collect();
        // integer offsets keep equal lattice distances bitwise equal
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let sq: usize = lattice[i]
                    .iter()
                    .zip(&lattice[j])
                    .map(|(&a, &b)| a.abs_diff(b).pow(2))
                    .sum();
                let d = h * (sq as f64).sqrt();
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let weights = match mode {
            WeightMode::UniformTotal1 => vec![1.0 / n as f64; n],
            WeightMode::CellVolume => vec![h.powi(dim as i32); n],
        };
        let mut edges = Vec::new();
        let mut stride = 1;
        for axis in 0..dim {
            for (p, ix) in lattice.iter().enumerate() {
                if ix[axis] + 1 < n_per_side {
                    edges.push((p, p + stride));
                }
            }
            stride *= n_per_side;
        }
        edges.sort_unstable();
        Space::from_distance_matrix(dist, weights, Some((dim, coords)), edges, Metric::Euclidean)
    }

    /// Middle-thirds Cantor set at depth `level` (left endpoints of the
    /// surviving intervals), or its product with itself for `dim = 2`.
    pub fn cantor(level: usize, dim: usize) -> Result<Space> {
        Space::cantor_with_budget(level, dim, DEFAULT_POINT_BUDGET)
    }

    pub fn cantor_with_budget(level: usize, dim: usize, budget: usize) -> Result<Space> {
        if !(1..=2).contains(&dim) {
            return Err(invalid(format!("cantor dimension must be 1 or 2, got {dim}")));
        }
        if level == 0 {
            return Err(invalid("cantor level must be at least 1"));
        }
        let bits = level
            .checked_mul(dim)
            .filter(|&b| b < usize::BITS as usize)
            .ok_or(Error::SizeExceeded { requested: usize::MAX, budget })?;
        let n = 1usize << bits;
        check_budget(n, budget)?;
        let per_side = 1usize << level;
        // ascending left endpoints: binary digits of k become ternary digits 0/2
        let line: Vec<f64> = (0..per_side)
            .map(|k| {
                (0..level)
                    .map(|i| {
                        let bit = (k >> (level - 1 - i)) & 1;
                        2.0 * bit as f64 * 3f64.powi(-(i as i32 + 1))
                    })
                    .sum()
            })
            .collect();
        let mut coords = Vec::with_capacity(n * dim);
        let mut edges = Vec::new();
        if dim == 1 {
            coords.extend_from_slice(&line);
            edges.extend((0..per_side - 1).map(|k| (k, k + 1)));
        } else {
            for j in 0..per_side {
                for i in 0..per_side {
                    coords.push(line[i]);
                    coords.push(line[j]);
                    let p = j * per_side + i;
                    if i + 1 < per_side {
                        edges.push((p, p + 1));
                    }
                    if j + 1 < per_side {
                        edges.push((p, p + per_side));
                    }
                }
            }
        }
        let weight = 0.5f64.powi(bits as i32);
        Space::from_points(dim, coords, vec![weight; n], edges)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn coords(&self, i: usize) -> Option<&[f64]> {
        let dim = self.dim?;
        self.coords.as_ref().map(|c| &c[i * dim..(i + 1) * dim])
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn distance_matrix(&self) -> &[f64] {
        &self.dist
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_adjacency(&self) -> bool {
        !self.edges.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].contains(&j)
    }

    /// Smallest nonzero distance.
    pub fn min_spacing(&self) -> f64 {
        self.min_spacing
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn shells(&self, center: usize) -> Shells<'_> {
        Shells {
            space: self,
            center,
            row: &self.rows[center],
        }
    }

    /// Number of points strictly closer to `center` than `radius`.
    fn ball_len(&self, center: usize, radius: f64) -> usize {
        let row = &self.rows[center];
        let base = center * self.n;
        row.order
            .partition_point(|&p| self.dist[base + p as usize] < radius)
    }

    /// The open ball `B(center, radius)`. Radii below the minimal spacing give `{center}`.
    pub fn ball(&self, center: usize, radius: f64) -> Result<Ball> {
        if !(radius > 0.0) {
            return Err(invalid(format!("ball radius must be positive, got {radius}")));
        }
        let k = self.ball_len(center, radius);
        let row = &self.rows[center];
        let mut members: Vec<usize> = row.order[..k].iter().map(|&p| p as usize).collect();
        members.sort_unstable();
        Ok(Ball {
            center,
            radius,
            members,
            mass: row.prefix_mass[k],
        })
    }

    /// `μ(B(center, radius))` without materializing the member list.
    pub fn ball_mass(&self, center: usize, radius: f64) -> f64 {
        let k = self.ball_len(center, radius);
        self.rows[center].prefix_mass[k]
    }

    /// Centers whose coordinates stay at least `margin` away from the
    /// bounding box of the space. Spaces without coordinates return every point.
    pub fn interior_centers(&self, margin: f64) -> Vec<usize> {
        let (Some(dim), Some(coords)) = (self.dim, self.coords.as_ref()) else {
            return (0..self.n).collect();
        };
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in 0..self.n {
            for a in 0..dim {
                lo[a] = lo[a].min(coords[p * dim + a]);
                hi[a] = hi[a].max(coords[p * dim + a]);
            }
        }
        (0..self.n)
            .filter(|&p| {
                (0..dim).all(|a| {
                    let c = coords[p * dim + a];
                    c >= lo[a] + margin && c <= hi[a] - margin
                })
            })
            .collect()
    }

    /// Counts triangle-inequality violations over `samples` random triples.
    pub fn triangle_violations(&self, samples: usize, seed: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.n;
        (0..samples)
            .filter(|_| {
                let (a, b, c) = (
                    rng.random_range(0..n),
                    rng.random_range(0..n),
                    rng.random_range(0..n),
                );
                let direct = self.dist(a, c);
                let via = self.dist(a, b) + self.dist(b, c);
                direct > via * (1.0 + 1e-12)
            })
            .count()
    }

    pub fn to_document(&self) -> SpaceDocument {
        let points = match (self.dim, &self.coords) {
            (Some(dim), Some(c)) => c.chunks(dim).map(<[f64]>::to_vec).collect(),
            _ => Vec::new(),
        };
        let distances = (self.metric == Metric::Matrix)
            .then(|| self.dist.chunks(self.n).map(<[f64]>::to_vec).collect());
        SpaceDocument {
            points,
            weights: self.weights.clone(),
            adjacency: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            metric: self.metric,
            distances,
        }
    }
}

/// JSON form of a space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDocument {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    #[serde(default)]
    pub adjacency: Vec<[usize; 2]>,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
}

fn default_metric() -> Metric {
    Metric::Euclidean
}

impl SpaceDocument {
    fn flat_coords(&self) -> Result<Option<(usize, Vec<f64>)>> {
        if self.points.is_empty() {
            return Ok(None);
        }
        let dim = self.points[0].len();
        if dim == 0 || self.points.iter().any(|p| p.len() != dim) {
            return Err(invalid("all points must have the same positive dimension"));
        }
        if self.points.len() != self.weights.len() {
            return Err(invalid(format!(
                "{} points but {} weights",
                self.points.len(),
                self.weights.len()
            )));
        }
        Ok(Some((dim, self.points.concat())))
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency.iter().map(|&[a, b]| (a, b)).collect()
    }

    /// Computes the distance matrix this document describes.
    pub fn distance_matrix(&self) -> Result<Vec<f64>> {
        let n = self.weights.len();
        match self.metric {
            Metric::Euclidean => {
                let (dim, c) = self
                    .flat_coords()?
                    .ok_or_else(|| invalid("euclidean metric needs point coordinates"))?;
                let mut d = vec![0.0; n * n];
                for i in 0..n {
                    for j in (i + 1)..n {
                        let v = euclidean(&c[i * dim..(i + 1) * dim], &c[j * dim..(j + 1) * dim]);
                        d[i * n + j] = v;
                        d[j * n + i] = v;
                    }
                }
                Ok(d)
            }
            Metric::Graph => {
                let (dim, c) = self
                    .flat_coords()?
                    .ok_or_else(|| invalid("graph metric needs point coordinates for edge lengths"))?;
                let mut g = petgraph::graph::UnGraph::<(), f64>::with_capacity(n, self.adjacency.len());
                let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
                for &[a, b] in &self.adjacency {
                    if a >= n || b >= n {
                        return Err(invalid(format!("edge ({a},{b}) references a missing point")));
                    }
                    let len = euclidean(&c[a * dim..(a + 1) * dim], &c[b * dim..(b + 1) * dim]);
                    g.add_edge(nodes[a], nodes[b], len);
                }
                let mut d = vec![0.0; n * n];
                for i in 0..n {
                    let sp = petgraph::algo::dijkstra(&g, nodes[i], None, |e| *e.weight());
                    for j in 0..n {
                        d[i * n + j] = *sp.get(&nodes[j]).ok_or_else(|| {
                            invalid(format!("graph metric: point {j} unreachable from {i}"))
                        })?;
                    }
                }
                Ok(d)
            }
            Metric::Matrix => {
                let rows = self
                    .distances
                    .as_ref()
                    .ok_or_else(|| invalid("matrix metric needs a `distances` field"))?;
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(invalid("distance matrix must be N x N"));
                }
                Ok(rows.concat())
            }
        }
    }

    pub fn into_space(self) -> Result<Space> {
        let dist = self.distance_matrix()?;
        self.into_space_with_distances(dist)
    }

    pub fn into_space_with_distances(self, dist: Vec<f64>) -> Result<Space> {
        let coords = self.flat_coords()?;
        let edges = self.edges();
        Space::from_distance_matrix(dist, self.weights, coords, edges, self.metric)
    }

    /// Like [`SpaceDocument::into_space`], reading/writing the distance matrix
    /// in `cache_dir` keyed by a hash of the document.
    pub fn into_space_cached(self, cache_dir: Option<&Path>) -> Result<Space> {
        let n = self.weights.len();
        let Some(dir) = cache_dir.filter(|_| n <= DISTANCE_CACHE_MAX_POINTS) else {
            return self.into_space();
        };
        let key = document_hash(&self)?;
        let path = dir.join(format!("{key}.dist"));
        let dist = match read_distance_cache(&path, n) {
            Ok(d) => d,
            Err(_) => {
                let d = self.distance_matrix()?;
                fs::create_dir_all(dir)?;
                write_distance_cache(&path, &d)?;
                d
            }
        };
        self.into_space_with_distances(dist)
    }
}

fn document_hash(doc: &SpaceDocument) -> Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = serde_json::to_vec(doc)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Writes a distance matrix as row-major little-endian `f64`.
pub fn write_distance_cache(path: &Path, dist: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(dist.len() * 8);
    for d in dist {
        buf.extend_from_slice(&d.to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

/// Reads an `n × n` distance matrix written by [`write_distance_cache`].
pub fn read_distance_cache(path: &Path, n: usize) -> Result<Vec<f64>> {
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() != n * n * 8 {
        return Err(invalid(format!(
            "distance cache {} has {} bytes, expected {}",
            path.display(),
            buf.len(),
            n * n * 8
        )));
    }
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}
