//! Vietoris-Rips persistence over the two-element field.
//!
//! Simplices enter the filtration at the largest pairwise distance among
//! their vertices; simplices with equal values are ordered lexicographically
//! by vertex list. Dimension 0 is computed with union-find over edges in
//! filtration order. Higher dimensions use persistent cohomology, working
//! upward and clearing columns of simplices already paired one dimension
//! below.

use std::collections::{BinaryHeap, HashMap};

use crate::error::{FusionError, Result};
use crate::types::DissimilarityMatrix;

/// Default cap on the number of simplices built for one diagram.
pub const DEFAULT_SIMPLEX_BUDGET: usize = 25_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// The largest entry of the matrix, at which the complex is a full simplex.
    Enclosing,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RipsOptions {
    pub max_dim: usize,
    pub threshold: Threshold,
    pub simplex_budget: usize,
}

impl Default for RipsOptions {
    fn default() -> Self {
        RipsOptions {
            max_dim: 1,
            threshold: Threshold::Enclosing,
            simplex_budget: DEFAULT_SIMPLEX_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePoint {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for classes alive at the threshold.
    pub death: f64,
}

impl PersistencePoint {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub points: Vec<PersistencePoint>,
    /// Filtration value the complex was truncated at.
    pub threshold: f64,
    pub max_dim: usize,
}

impl PersistenceDiagram {
    pub fn dimension(&self, dim: usize) -> impl Iterator<Item = &PersistencePoint> {
        self.points.iter().filter(move |p| p.dim == dim)
    }
}

/// Points of each dimension `0..=max_dim`, sorted by persistence, longest
/// first; essential classes lead. The sort is stable.
pub fn diagram_summary(diagram: &PersistenceDiagram) -> Vec<Vec<PersistencePoint>> {
    let dims = if diagram.points.is_empty() && diagram.max_dim == 0 {
        0
    } else {
        diagram.max_dim + 1
    };
    (0..dims)
        .map(|d| {
            let mut pts: Vec<PersistencePoint> = diagram.dimension(d).copied().collect();
            pts.sort_by(|a, b| b.persistence().total_cmp(&a.persistence()));
            pts
        })
        .collect()
}

/// Rips persistence up to `max_dim` with the default simplex budget.
pub fn rips_persistence(
    d: &DissimilarityMatrix,
    max_dim: usize,
    threshold: Threshold,
) -> Result<PersistenceDiagram> {
    rips_persistence_with(
        d,
        &RipsOptions {
            max_dim,
            threshold,
            ..Default::default()
        },
    )
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Simplices of one dimension in filtration order.
struct Layer {
    values: Vec<f64>,
    vertices: Vec<u32>,
    width: usize,
}

impl Layer {
    fn len(&self) -> usize {
        self.values.len()
    }

    fn verts(&self, idx: usize) -> &[u32] {
        &self.vertices[idx * self.width..(idx + 1) * self.width]
    }
}

fn sort_layer<const W: usize>(mut items: Vec<(f64, [u32; W])>) -> Layer {
    items.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut values = Vec::with_capacity(items.len());
    let mut vertices = Vec::with_capacity(items.len() * W);
    for (v, vs) in items {
        values.push(v);
        vertices.extend_from_slice(&vs);
    }
    Layer { values, vertices, width: W }
}

fn edge_layer(d: &DissimilarityMatrix, thr: f64) -> Layer {
    let n = d.n();
    let mut items = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v = d.get(i, j);
            if v <= thr {
                items.push((v, [i as u32, j as u32]));
            }
        }
    }
    sort_layer(items)
}

fn triangle_layer(d: &DissimilarityMatrix, thr: f64) -> Layer {
    let n = d.n();
    let mut items: Vec<(f64, [u32; 3])> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dij = d.get(i, j);
            if dij > thr {
                continue;
            }
            for k in j + 1..n {
                let v = dij.max(d.get(i, k)).max(d.get(j, k));
                if v <= thr {
                    items.push((v, [i as u32, j as u32, k as u32]));
                }
            }
        }
    }
    sort_layer(items)
}

fn tetra_layer(d: &DissimilarityMatrix, thr: f64) -> Layer {
    let n = d.n();
    let mut items = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dij = d.get(i, j);
            if dij > thr {
                continue;
            }
            for k in j + 1..n {
                let vijk = dij.max(d.get(i, k)).max(d.get(j, k));
                if vijk > thr {
                    continue;
                }
                for l in k + 1..n {
                    let v = vijk.max(d.get(i, l)).max(d.get(j, l)).max(d.get(k, l));
                    if v <= thr {
                        items.push((v, [i as u32, j as u32, k as u32, l as u32]));
                    }
                }
            }
        }
    }
    sort_layer(items)
}

fn count_simplices(d: &DissimilarityMatrix, thr: f64, max_dim: usize, budget: usize) -> Result<usize> {
    let n = d.n();
    let mut count = n;
    let over = |count: usize| -> Result<()> {
        if count > budget {
            Err(FusionError::BudgetExceeded { count, budget })
        } else {
            Ok(())
        }
    };
    if max_dim == 0 {
        return Ok(count);
    }
    for i in 0..n {
        for j in i + 1..n {
            let dij = d.get(i, j);
            if dij > thr {
                continue;
            }
            count += 1;
            for k in j + 1..n {
                let vijk = dij.max(d.get(i, k)).max(d.get(j, k));
                if vijk > thr {
                    continue;
                }
                count += 1;
                if max_dim >= 2 {
                    for l in k + 1..n {
                        let v = vijk.max(d.get(i, l)).max(d.get(j, l)).max(d.get(k, l));
                        if v <= thr {
                            count += 1;
                        }
                    }
                    over(count)?;
                }
            }
        }
        over(count)?;
    }
    Ok(count)
}

/// Simplex rank lookup keyed by the combinatorial number system.
enum RankIndex {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

const DENSE_INDEX_LIMIT: u64 = 1 << 24;

struct Binomials {
    table: Vec<[u64; 5]>,
}

impl Binomials {
    fn new(n: usize) -> Self {
        let mut table = vec![[0u64; 5]; n + 1];
        for (v, row) in table.iter_mut().enumerate() {
            row[0] = 1;
            for k in 1..5 {
                let mut c: u64 = 1;
                for t in 0..k as u64 {
                    if (v as u64) < k as u64 {
                        c = 0;
                        break;
                    }
                    c = c * (v as u64 - t) / (t + 1);
                }
                row[k] = c;
            }
        }
        Binomials { table }
    }

    /// Index of an ascending vertex list among all subsets of its size.
    fn key(&self, verts: &[u32]) -> u64 {
        verts
            .iter()
            .enumerate()
            .map(|(k, &v)| self.table[v as usize][k + 1])
            .sum()
    }
}

impl RankIndex {
    fn build(layer: &Layer, binom: &Binomials, n: usize) -> Self {
        let total = binom.table[n][layer.width];
        if total <= DENSE_INDEX_LIMIT {
            let mut dense = vec![u32::MAX; total as usize];
            for s in 0..layer.len() {
                dense[binom.key(layer.verts(s)) as usize] = s as u32;
            }
            RankIndex::Dense(dense)
        } else {
            RankIndex::Sparse((0..layer.len()).map(|s| (binom.key(layer.verts(s)), s as u32)).collect())
        }
    }

    fn get(&self, key: u64) -> u32 {
        match self {
            RankIndex::Dense(v) => v[key as usize],
            RankIndex::Sparse(m) => m[&key],
        }
    }
}

/// Result of reducing one coboundary matrix.
struct Reduction {
    /// `(row, column)` for every nonzero reduced column, `row` being its pivot.
    pairs: Vec<(u32, u32)>,
    /// Columns that reduced to zero; cleared columns are not included.
    zero: Vec<bool>,
}

/// Pops the largest row with odd multiplicity, discarding cancelled pairs.
fn pop_pivot(heap: &mut BinaryHeap<u32>) -> Option<u32> {
    while let Some(top) = heap.pop() {
        if heap.peek() == Some(&top) {
            heap.pop();
        } else {
            return Some(top);
        }
    }
    None
}

/// Column reduction where the pivot is the largest row.
///
/// Reduced columns are never stored. Each paired column keeps the list of
/// original columns summing to it, and the working column lives in a heap
/// refilled from `column(c, buf)`, which writes the rows of original column
/// `c`. Columns flagged in `cleared` are known to reduce to zero and are
/// skipped.
fn reduce(n_cols: usize, n_rows: usize, cleared: &[bool], mut column: impl FnMut(usize, &mut Vec<u32>)) -> Reduction {
    let mut pivot_col: Vec<u32> = vec![u32::MAX; n_rows];
    let mut combos: Vec<Vec<u32>> = Vec::new();
    let mut pairs = Vec::new();
    let mut zero = vec![false; n_cols];
    let mut heap = BinaryHeap::new();
    let mut buf = Vec::new();
    for c in 0..n_cols {
        if cleared[c] {
            continue;
        }
        heap.clear();
        column(c, &mut buf);
        heap.extend(buf.iter().copied());
        let mut combo = vec![c as u32];
        let pivot = loop {
            let Some(low) = pop_pivot(&mut heap) else { break None };
            let owner = pivot_col[low as usize];
            if owner == u32::MAX {
                break Some(low);
            }
            heap.push(low);
            for &s in &combos[owner as usize] {
                column(s as usize, &mut buf);
                heap.extend(buf.iter().copied());
            }
            combo.extend_from_slice(&combos[owner as usize]);
        };
        match pivot {
            Some(low) => {
                combo.sort_unstable();
                let mut odd = Vec::with_capacity(combo.len());
                for s in combo {
                    if odd.last() == Some(&s) {
                        odd.pop();
                    } else {
                        odd.push(s);
                    }
                }
                pivot_col[low as usize] = combos.len() as u32;
                combos.push(odd);
                pairs.push((low, c as u32));
            }
            None => zero[c] = true,
        }
    }
    Reduction { pairs, zero }
}

/// Persistent cohomology of one dimension.
///
/// Columns are the `lower` simplices and rows their cofacets in `upper`, both
/// in reverse filtration order, so a pivot is the earliest cofacet. Returns
/// the diagram points and, for each `upper` simplex, whether it was paired.
fn cohomology_step(
    dim: usize,
    lower: &Layer,
    upper: &Layer,
    cleared_lower: &[bool],
    cofacets: impl Fn(&[u32], &mut Vec<u32>),
    points: &mut Vec<PersistencePoint>,
) -> Vec<bool> {
    let (nl, nu) = (lower.len(), upper.len());
    let cleared: Vec<bool> = (0..nl).map(|c| cleared_lower[nl - 1 - c]).collect();
    let red = reduce(nl, nu, &cleared, |c, buf| {
        buf.clear();
        cofacets(lower.verts(nl - 1 - c), buf);
        for r in buf.iter_mut() {
            *r = (nu - 1) as u32 - *r;
        }
    });
    let mut paired_upper = vec![false; nu];
    for &(row, col) in &red.pairs {
        let (s, t) = (nl - 1 - col as usize, nu - 1 - row as usize);
        paired_upper[t] = true;
        if upper.values[t] > lower.values[s] {
            points.push(PersistencePoint { dim, birth: lower.values[s], death: upper.values[t] });
        }
    }
    for c in 0..nl {
        if red.zero[c] {
            let s = nl - 1 - c;
            points.push(PersistencePoint { dim, birth: lower.values[s], death: f64::INFINITY });
        }
    }
    paired_upper
}

/// Vietoris-Rips persistence diagram of `d`.
pub fn rips_persistence_with(d: &DissimilarityMatrix, opts: &RipsOptions) -> Result<PersistenceDiagram> {
    if opts.max_dim > 2 {
        return Err(FusionError::InvalidParameter(format!(
            "max_dim must be 0, 1 or 2, got {}",
            opts.max_dim
        )));
    }
    let thr = match opts.threshold {
        Threshold::Enclosing if opts.max_dim >= 2 => return Err(FusionError::ThresholdRequired),
        Threshold::Enclosing => d.max_entry(),
        Threshold::Value(t) if t.is_finite() && t >= 0.0 => t,
        Threshold::Value(t) => {
            return Err(FusionError::InvalidParameter(format!("threshold must be finite and >= 0, got {t}")))
        }
    };
    count_simplices(d, thr, opts.max_dim, opts.simplex_budget)?;

    let n = d.n();
    let mut points = Vec::new();
    let edges = edge_layer(d, thr);

    // dimension 0
    let mut uf = UnionFind::new(n);
    let mut edge_negative = vec![false; edges.len()];
    for e in 0..edges.len() {
        let v = edges.verts(e);
        if uf.union(v[0] as usize, v[1] as usize) {
            edge_negative[e] = true;
            if edges.values[e] > 0.0 {
                points.push(PersistencePoint { dim: 0, birth: 0.0, death: edges.values[e] });
            }
        }
    }
    let components = (0..n).filter(|&v| uf.find(v) == v).count();
    points.extend((0..components).map(|_| PersistencePoint { dim: 0, birth: 0.0, death: f64::INFINITY }));
    if opts.max_dim == 0 {
        return Ok(PersistenceDiagram { points, threshold: thr, max_dim: 0 });
    }

    let binom = Binomials::new(n);
    let triangles = triangle_layer(d, thr);
    let tri_rank = RankIndex::build(&triangles, &binom, n);
    let within = |u: u32, v: u32| d.get(u as usize, v as usize) <= thr;

    let triangle_negative = cohomology_step(
        1,
        &edges,
        &triangles,
        &edge_negative,
        |e, buf| {
            for k in 0..n as u32 {
                if k == e[0] || k == e[1] || !within(k, e[0]) || !within(k, e[1]) {
                    continue;
                }
                let mut t = [e[0], e[1], k];
                t.sort_unstable();
                buf.push(tri_rank.get(binom.key(&t)));
            }
        },
        &mut points,
    );
    if opts.max_dim == 1 {
        return Ok(PersistenceDiagram { points, threshold: thr, max_dim: 1 });
    }

    let tetras = tetra_layer(d, thr);
    let tet_rank = RankIndex::build(&tetras, &binom, n);
    cohomology_step(
        2,
        &triangles,
        &tetras,
        &triangle_negative,
        |t, buf| {
            for l in 0..n as u32 {
                if t.contains(&l) || !t.iter().all(|&v| within(l, v)) {
                    continue;
                }
                let mut q = [t[0], t[1], t[2], l];
                q.sort_unstable();
                buf.push(tet_rank.get(binom.key(&q)));
            }
        },
        &mut points,
    );
    Ok(PersistenceDiagram { points, threshold: thr, max_dim: 2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{validate_dissimilarity, SquareMatrix};

    fn dm(rows: &[&[f64]]) -> DissimilarityMatrix {
        validate_dissimilarity(
            SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap(),
        )
        .unwrap()
    }

    fn square() -> DissimilarityMatrix {
        let s = 2f64.sqrt();
        dm(&[
            &[0.0, 1.0, s, 1.0],
            &[1.0, 0.0, 1.0, s],
            &[s, 1.0, 0.0, 1.0],
            &[1.0, s, 1.0, 0.0],
        ])
    }

    #[test]
    fn two_points() {
        let d = dm(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let dg = rips_persistence(&d, 0, Threshold::Enclosing).unwrap();
        assert_eq!(
            dg.points,
            vec![
                PersistencePoint { dim: 0, birth: 0.0, death: 1.0 },
                PersistencePoint { dim: 0, birth: 0.0, death: f64::INFINITY },
            ]
        );
    }

    #[test]
    fn unit_square() {
        let dg = rips_persistence(&square(), 1, Threshold::Enclosing).unwrap();
        let h1: Vec<_> = dg.dimension(1).copied().collect();
        assert_eq!(h1, vec![PersistencePoint { dim: 1, birth: 1.0, death: 2f64.sqrt() }]);
        let mut h0: Vec<f64> = dg.dimension(0).map(|p| p.death).collect();
        h0.sort_by(f64::total_cmp);
        assert_eq!(h0, vec![1.0, 1.0, 1.0, f64::INFINITY]);
        let summary = diagram_summary(&dg);
        assert_eq!(summary[1][0], h1[0]);
        assert!(summary[0][0].is_essential());
    }

    #[test]
    fn summary_edge_cases() {
        let empty = PersistenceDiagram { points: vec![], threshold: 0.0, max_dim: 0 };
        assert!(diagram_summary(&empty).is_empty());
        let one = PersistenceDiagram {
            points: vec![PersistencePoint { dim: 0, birth: 0.0, death: 2.0 }],
            threshold: 2.0,
            max_dim: 0,
        };
        assert_eq!(diagram_summary(&one), vec![one.points.clone()]);
    }

    #[test]
    fn threshold_truncates_and_gates_dimension_two() {
        let dg = rips_persistence(&square(), 1, Threshold::Value(1.0)).unwrap();
        let h1: Vec<_> = dg.dimension(1).copied().collect();
        assert_eq!(h1, vec![PersistencePoint { dim: 1, birth: 1.0, death: f64::INFINITY }]);
        assert_eq!(
            rips_persistence(&square(), 2, Threshold::Enclosing),
            Err(FusionError::ThresholdRequired)
        );
        let small = RipsOptions { max_dim: 2, threshold: Threshold::Value(2.0), simplex_budget: 10 };
        assert!(matches!(
            rips_persistence_with(&square(), &small),
            Err(FusionError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn octahedron_has_a_two_sphere() {
        // vertices +-e1, +-e2, +-e3; opposite pairs at 2, others at sqrt(2)
        let pts: [[f64; 3]; 6] = [
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let d = DissimilarityMatrix::from_upper(6, |i, j| {
            (0..3).map(|c| (pts[i][c] - pts[j][c]).powi(2)).sum::<f64>().sqrt()
        });
        let dg = rips_persistence(&d, 2, Threshold::Value(2.0)).unwrap();
        let h2: Vec<_> = dg.dimension(2).copied().collect();
        assert_eq!(h2, vec![PersistencePoint { dim: 2, birth: 2f64.sqrt(), death: 2.0 }]);
        assert_eq!(dg.dimension(1).count(), 0);
    }
}
