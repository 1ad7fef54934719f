//! Slow reference implementations shared by integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

/// One global filtration of every simplex up to `top_dim` vertices-1, ordered
/// by (value, dimension, vertex list), reduced with the plain column algorithm.
/// Returns `(dim, birth, death)` for pairs with positive persistence and
/// essential classes of dimension `<= max_dim`.
pub fn brute_force_persistence(d: &[Vec<f64>], max_dim: usize, thr: f64) -> Vec<(usize, f64, f64)> {
    let n = d.len();
    let mut simplices: Vec<(f64, Vec<usize>)> = Vec::new();
    fn grow(d: &[Vec<f64>], n: usize, cur: &mut Vec<usize>, max_len: usize, thr: f64, out: &mut Vec<(f64, Vec<usize>)>) {
        let start = cur.last().map_or(0, |&l| l + 1);
        for v in start..n {
            let mut val = 0.0f64;
            for &u in cur.iter() {
                val = val.max(d[u][v]);
            }
            if val > thr {
                continue;
            }
            cur.push(v);
            let mut full = 0.0f64;
            for a in 0..cur.len() {
                for b in a + 1..cur.len() {
                    full = full.max(d[cur[a]][cur[b]]);
                }
            }
            out.push((full, cur.clone()));
            if cur.len() < max_len {
                grow(d, n, cur, max_len, thr, out);
            }
            cur.pop();
        }
    }
    grow(d, n, &mut Vec::new(), max_dim + 2, thr, &mut simplices);
    simplices.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.len().cmp(&b.1.len()))
            .then_with(|| a.1.cmp(&b.1))
    });
    let index: std::collections::HashMap<Vec<usize>, usize> =
        simplices.iter().enumerate().map(|(i, s)| (s.1.clone(), i)).collect();
    let m = simplices.len();
    let mut low_owner: Vec<Option<usize>> = vec![None; m];
    let mut cols: Vec<BTreeSet<usize>> = Vec::with_capacity(m);
    let mut is_zero = vec![true; m];
    for (c, (_, verts)) in simplices.iter().enumerate() {
        let mut col: BTreeSet<usize> = BTreeSet::new();
        if verts.len() > 1 {
            for skip in 0..verts.len() {
                let face: Vec<usize> =
                    verts.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &v)| v).collect();
                col.insert(index[&face]);
            }
        }
        while let Some(&low) = col.iter().next_back() {
            match low_owner[low] {
                Some(o) => {
                    let other: &BTreeSet<usize> = &cols[o];
                    col = col.symmetric_difference(other).copied().collect();
                }
                None => break,
            }
        }
        if let Some(&low) = col.iter().next_back() {
            low_owner[low] = Some(c);
            is_zero[c] = false;
        }
        cols.push(col);
    }
    let mut out = Vec::new();
    for s in 0..m {
        let dim = simplices[s].1.len() - 1;
        if !is_zero[s] || dim > max_dim {
            continue;
        }
        match low_owner[s] {
            Some(c) => {
                if simplices[c].0 > simplices[s].0 {
                    out.push((dim, simplices[s].0, simplices[c].0));
                }
            }
            None => out.push((dim, simplices[s].0, f64::INFINITY)),
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    out
}

/// Edge weights of a minimum spanning tree of the complete graph, ascending.
pub fn prim_mst_weights(d: &[Vec<f64>]) -> Vec<f64> {
    let n = d.len();
    if n == 0 {
        return vec![];
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut weights = Vec::new();
    for step in 0..n {
        let v = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[v] = true;
        if step > 0 {
            weights.push(best[v]);
        }
        for u in 0..n {
            if !in_tree[u] && d[v][u] < best[u] {
                best[u] = d[v][u];
            }
        }
    }
    weights.sort_by(f64::total_cmp);
    weights
}

pub fn euclidean(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            points
                .iter()
                .map(|q| p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
                .collect()
        })
        .collect()
}
