use std::collections::BTreeSet;

use ndarray::Array2;

use super::GcnError;

/// Symmetric-normalized adjacency with self-loops, D^-1/2 (A+I) D^-1/2, stored
/// by row with columns ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    rows: Vec<Vec<(usize, f64)>>,
}

impl NormalizedAdjacency {
    /// Edges are symmetrized and duplicates collapse to weight 1.
    pub fn new(edges: &[(usize, usize)], k: usize) -> Result<Self, GcnError> {
        let mut nbrs: Vec<BTreeSet<usize>> = (0..k).map(|i| BTreeSet::from([i])).collect();
        for &(a, b) in edges {
            if a >= k || b >= k {
                return Err(GcnError::IndexOutOfRange {
                    edge: (a, b),
                    nodes: k,
                });
            }
            nbrs[a].insert(b);
            nbrs[b].insert(a);
        }
        let inv_sqrt: Vec<f64> = nbrs.iter().map(|n| 1.0 / (n.len() as f64).sqrt()).collect();
        let rows = nbrs
            .iter()
            .enumerate()
            .map(|(i, n)| n.iter().map(|&j| (j, inv_sqrt[i] * inv_sqrt[j])).collect())
            .collect();
        Ok(NormalizedAdjacency { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Â · H
    pub fn propagate(&self, h: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows.len(), h.ncols()));
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc = out.row_mut(i);
            for &(j, w) in row {
                acc.scaled_add(w, &h.row(j));
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let k = self.rows.len();
        let mut m = Array2::zeros((k, k));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                m[[i, j]] = w;
            }
        }
        m
    }
}

/// Dense Â for `k` nodes.
pub fn normalize_adjacency(edges: &[(usize, usize)], k: usize) -> Result<Array2<f64>, GcnError> {
    Ok(NormalizedAdjacency::new(edges, k)?.to_dense())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn lone_node() {
        assert_eq!(normalize_adjacency(&[], 1).unwrap(), array![[1.0]]);
    }

    #[test]
    fn single_edge() {
        let a = normalize_adjacency(&[(0, 1)], 2).unwrap();
        assert!(a.iter().all(|&x| (x - 0.5).abs() < 1e-15));
    }

    #[test]
    fn sv_path() {
        // degrees with self-loops: 2, 3, 2
        let a = normalize_adjacency(&[(0, 1), (1, 2)], 3).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() < 1e-15;
        assert!(close(a[[0, 0]], 0.5));
        assert!(close(a[[0, 1]], 1.0 / 6f64.sqrt()));
        assert!(close(a[[1, 1]], 1.0 / 3.0));
        assert!(close(a[[2, 2]], 0.5));
        assert_eq!(a[[0, 2]], 0.0);
        assert_eq!(a, a.t());
    }

    #[test]
    fn duplicates_and_direction_collapse() {
        let once = normalize_adjacency(&[(0, 1)], 3).unwrap();
        let many = normalize_adjacency(&[(0, 1), (1, 0), (0, 1)], 3).unwrap();
        assert_eq!(once, many);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(
            normalize_adjacency(&[(0, 3)], 3),
            Err(GcnError::IndexOutOfRange {
                edge: (0, 3),
                nodes: 3
            })
        ));
    }

    #[test]
    fn propagate_matches_dense() {
        let adj = NormalizedAdjacency::new(&[(0, 1), (1, 2), (2, 3), (0, 3)], 4).unwrap();
        let h = array![[1.0, 2.0], [0.5, -1.0], [3.0, 0.0], [-2.0, 1.5]];
        let sparse = adj.propagate(&h);
        let dense = adj.to_dense().dot(&h);
        for (a, b) in sparse.iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
