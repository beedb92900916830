//! CR node placement on the unit square and the unit-disk communication graph.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Static node placement and the symmetric in-range adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<Position>,
    radius: f64,
    neighbors: Vec<Vec<usize>>,
    adjacent: Vec<bool>,
}

impl Topology {
    /// Builds the graph for fixed positions: `u ~ v` iff `dist(u, v) <= radius`.
    pub fn from_positions(positions: Vec<Position>, radius: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(SimError::EmptyTopology);
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SimError::config("radius", "must be positive"));
        }
        let n = positions.len();
        let mut neighbors = vec![Vec::new(); n];
        let mut adjacent = vec![false; n * n];
        for u in 0..n {
            for v in (u + 1)..n {
                if positions[u].distance(&positions[v]) <= radius {
                    neighbors[u].push(v);
                    neighbors[v].push(u);
                    adjacent[u * n + v] = true;
                    adjacent[v * n + u] = true;
                }
            }
        }
        Ok(Self {
            positions,
            radius,
            neighbors,
            adjacent,
        })
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    /// Sorted neighbor ids of `node`.
    pub fn neighbors(&self, node: usize) -> Result<&[usize]> {
        self.neighbors
            .get(node)
            .map(Vec::as_slice)
            .ok_or_else(|| out_of_range(node, self.node_count()))
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        let n = self.node_count();
        u < n && v < n && self.adjacent[u * n + v]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// BFS hop distances from `source`; `None` for unreachable nodes.
    pub fn hop_distances(&self, source: usize) -> Result<Vec<Option<usize>>> {
        let n = self.node_count();
        if source >= n {
            return Err(out_of_range(source, n));
        }
        let mut dist = vec![None; n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in &self.neighbors[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Fraction of the other `N - 1` nodes reachable from `source`. A
    /// single-node topology has nothing to reach and reports 1.0.
    pub fn connected_fraction(&self, source: usize) -> Result<f64> {
        let n = self.node_count();
        let dist = self.hop_distances(source)?;
        if n == 1 {
            return Ok(1.0);
        }
        let reached = dist.iter().filter(|d| d.is_some()).count() - 1;
        Ok(reached as f64 / (n - 1) as f64)
    }

    /// Plain-text node list, one `id x y` line per node.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.positions.iter().enumerate() {
            let _ = writeln!(out, "{i} {} {}", p.x, p.y);
        }
        out
    }

    /// Parses the node list written by [`Topology::to_text`]. Blank lines and
    /// lines starting with `#` are ignored; ids must be `0..N` in order.
    pub fn from_text(text: &str, radius: f64) -> Result<Self> {
        let mut positions = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(SimError::parse(lineno + 1, "expected `id x y`"));
            }
            let id: usize = fields[0]
                .parse()
                .map_err(|_| SimError::parse(lineno + 1, "bad node id"))?;
            if id != positions.len() {
                return Err(SimError::parse(lineno + 1, "node ids must be consecutive from 0"));
            }
            let coord = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| SimError::parse(lineno + 1, "bad coordinate"))
            };
            positions.push(Position::new(coord(fields[1])?, coord(fields[2])?));
        }
        Self::from_positions(positions, radius)
    }
}

fn out_of_range(node: usize, n: usize) -> SimError {
    SimError::config("node", format!("node {node} out of range 0..{n}"))
}

/// Places `n` nodes i.i.d. uniformly on the unit square (x then y per node).
pub fn generate_topology<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Result<Topology> {
    if n == 0 {
        return Err(SimError::EmptyTopology);
    }
    if !(radius > 0.0 && radius <= std::f64::consts::SQRT_2) {
        return Err(SimError::config("radius", "must lie in (0, sqrt(2)]"));
    }
    let positions = (0..n)
        .map(|_| {
            let x = rng.gen::<f64>();
            let y = rng.gen::<f64>();
            Position::new(x, y)
        })
        .collect();
    Topology::from_positions(positions, radius)
}
