//! Two applications at desk scale: eigenvalue counts of Haar-random
//! unitaries in a circular arc, and uniform spanning trees as a
//! determinantal subset of graph edges.

pub mod cue;
pub mod ust;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::ReplicateRng;
use crate::C64;

use std::f64::consts::TAU;

/// An arc of the unit circle, half-open `[center − length/2, center +
/// length/2)` so adjacent arcs never double-count an angle.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct Arc {
    length: f64,
    center: f64,
}

impl Arc {
    /// `length` in (0, 2π]; `center` is any angle in radians.
    pub fn new(length: f64, center: f64) -> Result<Self> {
        if !length.is_finite() || !center.is_finite() || length <= 0.0 || length > TAU {
            return Err(Error::OutOfRange {
                context: format!("arc length {length} outside (0, 2π]"),
            });
        }
        Ok(Arc { length, center })
    }

    /// Centered at angle 0.
    pub fn centered(length: f64) -> Result<Self> {
        Self::new(length, 0.0)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Membership of an angle (radians, any branch).
    pub fn contains(&self, theta: f64) -> bool {
        let start = self.center - self.length / 2.0;
        let offset = (theta - start).rem_euclid(TAU);
        offset < self.length
    }

    /// Fraction of the circle covered.
    pub fn coverage(&self) -> f64 {
        self.length / TAU
    }
}

/// An undirected simple connected graph. Edges keep their listed order and
/// carry the fixed reference orientation (smaller vertex → larger vertex).
#[derive(Clone, Debug)]
pub struct SimpleGraph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl SimpleGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::OutOfRange {
                context: "graph needs at least one vertex".into(),
            });
        }
        let mut oriented = Vec::with_capacity(edges.len());
        let mut seen = std::collections::HashSet::new();
        for (u, v) in edges {
            if u >= vertices {
                return Err(Error::IndexOutOfRange { index: u, n: vertices });
            }
            if v >= vertices {
                return Err(Error::IndexOutOfRange { index: v, n: vertices });
            }
            if u == v {
                return Err(Error::OutOfRange {
                    context: format!("self-loop at vertex {u}"),
                });
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::OutOfRange {
                    context: format!("duplicate edge ({}, {})", e.0, e.1),
                });
            }
            oriented.push(e);
        }
        let g = SimpleGraph {
            vertices,
            edges: oriented,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in listed order, oriented (smaller, larger).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbor lists: `(neighbor vertex, edge index)` per vertex.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        adj
    }

    fn is_connected(&self) -> bool {
        if self.vertices == 1 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        reached == self.vertices
    }
}

/// A Haar-distributed n×n unitary: QR of a complex Ginibre matrix with the
/// R diagonal's phases folded into Q, which corrects the raw QR draw to
/// exact Haar measure.
pub fn haar_unitary(n: usize, rng: &mut ReplicateRng) -> DMatrix<C64> {
    assert!(n >= 1);
    let scale = 0.5f64.sqrt();
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            d / d.norm()
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}
