use std::collections::BTreeSet;

use super::CsrMatrix;

/// Minimum-degree ordering on the pattern of `A + Aᵀ`.
///
/// Plain elimination-graph implementation: ties are broken by the smallest
/// index, so the permutation is deterministic. Adequate for the ≤ 1e4-unknown
/// systems this crate builds; not a substitute for AMD on large problems.
pub fn minimum_degree(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n_rows();
    assert_eq!(n, a.n_cols(), "ordering needs a square matrix");
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }

    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|i| (adj[i].len(), i)).collect();
    let mut perm = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        perm.push(v);
        let nbrs: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        for &u in &nbrs {
            queue.remove(&(adj[u].len(), u));
            adj[u].remove(&v);
        }
        for (k, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[k + 1..] {
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
        for &u in &nbrs {
            queue.insert((adj[u].len(), u));
        }
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_a_permutation() {
        let trips: Vec<_> = (0..6)
            .flat_map(|i| [(i, i, 2.0), (i, (i + 1) % 6, -1.0), ((i + 1) % 6, i, -1.0)])
            .collect();
        let a = CsrMatrix::from_triplets(6, 6, &trips);
        let mut p = minimum_degree(&a);
        p.sort_unstable();
        assert_eq!(p, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn arrow_matrix_puts_hub_last() {
        // hub 0 connected to everything; eliminating it first would fill in
        let mut trips = vec![];
        for i in 0..5 {
            trips.push((i, i, 4.0));
            if i > 0 {
                trips.push((0, i, 1.0));
                trips.push((i, 0, 1.0));
            }
        }
        let a = CsrMatrix::from_triplets(5, 5, &trips);
        let p = minimum_degree(&a);
        assert_ne!(p[0], 0);
    }
}
