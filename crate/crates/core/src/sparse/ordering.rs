use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use super::SparseMatrix;

/// Orders up to this size use a bitset elimination graph.
const BITSET_LIMIT: usize = 16_384;

/// Minimum-degree fill-reducing ordering on the pattern of `M + Mᵀ`.
///
/// Works on the explicit elimination graph: the node of smallest current
/// degree is eliminated and its neighbours become a clique. Ties go to the
/// lowest index so the ordering is deterministic. Returns `perm` with
/// `perm[k]` the original index placed at position `k`.
pub fn minimum_degree(m: &SparseMatrix) -> Vec<usize> {
    let n = m.ncols().min(m.nrows());
    let edges = m.triplets().filter(|&(i, j, _)| i != j && i < n && j < n).map(|(i, j, _)| (i, j));
    if n <= BITSET_LIMIT {
        eliminate(BitGraph::new(n, edges))
    } else {
        eliminate(SetGraph::new(n, edges))
    }
}

trait EliminationGraph {
    fn order(&self) -> usize;
    fn degree(&self, node: usize) -> usize;
    /// Removes `node`, joins its neighbours into a clique and returns them.
    fn eliminate(&mut self, node: usize) -> Vec<usize>;
}

fn eliminate(mut g: impl EliminationGraph) -> Vec<usize> {
    let n = g.order();
    let mut eliminated = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|i| Reverse((g.degree(i), i))).collect();
    let mut perm = Vec::with_capacity(n);
    while let Some(Reverse((deg, node))) = heap.pop() {
        if eliminated[node] || deg != g.degree(node) {
            continue;
        }
        eliminated[node] = true;
        perm.push(node);
        for u in g.eliminate(node) {
            heap.push(Reverse((g.degree(u), u)));
        }
    }
    perm
}

struct SetGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl SetGraph {
    fn new(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![BTreeSet::new(); n];
        for (i, j) in edges {
            adj[i].insert(j);
            adj[j].insert(i);
        }
        SetGraph { adj }
    }
}

impl EliminationGraph for SetGraph {
    fn order(&self) -> usize {
        self.adj.len()
    }

    fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    fn eliminate(&mut self, node: usize) -> Vec<usize> {
        let nbrs: Vec<usize> = std::mem::take(&mut self.adj[node]).into_iter().collect();
        for &u in &nbrs {
            self.adj[u].remove(&node);
        }
        for (a, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[a + 1..] {
                self.adj[u].insert(w);
                self.adj[w].insert(u);
            }
        }
        nbrs
    }
}

/// Dense adjacency bitsets; clique formation is a word-wise OR.
struct BitGraph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    degree: Vec<usize>,
}

impl BitGraph {
    fn new(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Self {
        let words = n.div_ceil(64);
        let mut g = BitGraph {
            n,
            words,
            bits: vec![0; n * words],
            degree: vec![0; n],
        };
        for (i, j) in edges {
            g.set(i, j);
            g.set(j, i);
        }
        for i in 0..n {
            g.degree[i] = g.row(i).iter().map(|w| w.count_ones() as usize).sum();
        }
        g
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }
}

impl EliminationGraph for BitGraph {
    fn order(&self) -> usize {
        self.n
    }

    fn degree(&self, node: usize) -> usize {
        self.degree[node]
    }

    fn eliminate(&mut self, node: usize) -> Vec<usize> {
        let w = self.words;
        let clique: Vec<u64> = self.row(node).to_vec();
        let nbrs: Vec<usize> = clique
            .iter()
            .enumerate()
            .flat_map(|(k, &word)| (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| 64 * k + b))
            .collect();
        for &u in &nbrs {
            let row = &mut self.bits[u * w..(u + 1) * w];
            for (r, c) in row.iter_mut().zip(&clique) {
                *r |= c;
            }
            row[u / 64] &= !(1 << (u % 64));
            row[node / 64] &= !(1 << (node % 64));
            self.degree[u] = row.iter().map(|x| x.count_ones() as usize).sum();
        }
        self.bits[node * w..(node + 1) * w].fill(0);
        self.degree[node] = 0;
        nbrs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_a_permutation() {
        let t: Vec<_> = (0..10)
            .flat_map(|i| vec![(i, i, 1.0), (i, (i * 3 + 1) % 10, 1.0)])
            .collect();
        let m = SparseMatrix::from_real_triplets(10, 10, &t).unwrap();
        let mut p = minimum_degree(&m);
        p.sort();
        assert_eq!(p, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn arrow_matrix_puts_hub_last() {
        // node 0 couples to everything; eliminating it first would fill the whole matrix
        let mut t = vec![];
        for i in 0..8 {
            t.push((i, i, 1.0));
            if i > 0 {
                t.push((0, i, 1.0));
                t.push((i, 0, 1.0));
            }
        }
        let m = SparseMatrix::from_real_triplets(8, 8, &t).unwrap();
        let p = minimum_degree(&m);
        assert!(p[..6].iter().all(|&k| k != 0));
    }

    #[test]
    fn bitset_and_set_graphs_agree() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for n in [1, 5, 63, 64, 65, 130] {
            let t: Vec<_> = (0..3 * n).map(|_| (next() % n, next() % n, 1.0)).collect();
            let m = SparseMatrix::from_real_triplets(n, n, &t).unwrap();
            let edges = || m.triplets().filter(|&(i, j, _)| i != j).map(|(i, j, _)| (i, j));
            assert_eq!(eliminate(BitGraph::new(n, edges())), eliminate(SetGraph::new(n, edges())));
        }
    }
}
