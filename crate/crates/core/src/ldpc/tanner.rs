use std::ops::Range;

use super::matrix::ParityCheckMatrix;

/// Edge list of a parity-check matrix ordered by check, then by variable.
/// Edges of check `c` occupy the contiguous range `check_edges(c)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TannerGraph {
    n_vars: usize,
    edges: Vec<(usize, usize)>,
    check_start: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let mut edges = Vec::with_capacity(h.ones());
        let mut check_start = Vec::with_capacity(h.n_checks() + 1);
        let mut var_edges = vec![Vec::new(); h.n_vars()];
        for (c, row) in h.rows().iter().enumerate() {
            check_start.push(edges.len());
            for &v in row {
                var_edges[v].push(edges.len());
                edges.push((v, c));
            }
        }
        check_start.push(edges.len());
        Self {
            n_vars: h.n_vars(),
            edges,
            check_start,
            var_edges,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.check_start.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// `(variable, check)` pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn check_edges(&self, c: usize) -> Range<usize> {
        self.check_start[c]..self.check_start[c + 1]
    }

    /// Edge ids touching variable `v`, ascending.
    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[v]
    }
}
