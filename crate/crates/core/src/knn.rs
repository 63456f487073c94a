//! k-th nearest-neighbor Euclidean distances.
//!
//! Zero distances are skipped: a point's k-th neighbor distance is the k-th
//! smallest *strictly positive* distance to the other points, with exact
//! duplicates at other locations each counted. Posterior process atoms repeat
//! data rows, so without this the log-distance terms of the entropy
//! estimators would be `-inf`.
//!
//! The fast path groups identical rows first, then answers one query per
//! distinct location (sorted sweep in one dimension, a kd-tree otherwise).
//! [`knn_distances_exact_oracle`] is the brute-force reference it is tested
//! against.

use crate::{Error, Result, SampleMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// Skip zero distances.
    #[default]
    PositiveOnly,
    /// Merge identical points into one location first. Weighted estimators
    /// add up the merged weights and count distinct locations only.
    MergeDuplicates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnConfig {
    pub k: usize,
    pub tie_policy: TiePolicy,
}

impl KnnConfig {
    pub fn new(k: usize) -> Result<Self> {
        check_k(k)?;
        Ok(KnnConfig {
            k,
            tie_policy: TiePolicy::PositiveOnly,
        })
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("neighbor order k must be at least 1".into()));
    }
    Ok(())
}

fn check_points(points: &SampleMatrix) -> Result<()> {
    if !points.is_finite() {
        return Err(Error::InvalidParameter("points must be finite".into()));
    }
    Ok(())
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// For every row, the k-th smallest strictly positive distance to the other
/// rows. Fails with [`Error::DegenerateSupport`] naming the first row that has
/// fewer than `k` positive distances.
pub fn knn_distances(points: &SampleMatrix, k: usize) -> Result<Vec<f64>> {
    check_k(k)?;
    check_points(points)?;
    let groups = Groups::new(points);
    let per_location: Vec<Option<f64>> = if points.ncols() == 1 {
        sweep_1d(&groups, k)
    } else if groups.len() <= BRUTE_FORCE_LIMIT {
        brute_grouped(&groups, k)
    } else {
        KdTree::new(&groups.coords, groups.dim).kth_positive_all(&groups, k)
    };
    groups
        .membership
        .iter()
        .enumerate()
        .map(|(i, &g)| per_location[g].ok_or(Error::DegenerateSupport { index: i, k }))
        .collect()
}

/// Distinct rows of `points` (in lexicographic order) and, for every input
/// row, the index of its distinct row.
pub fn distinct_rows(points: &SampleMatrix) -> (SampleMatrix, Vec<usize>) {
    let groups = Groups::new(points);
    let unique = SampleMatrix::new(groups.len(), groups.dim, groups.coords)
        .expect("group coordinates are rectangular");
    (unique, groups.membership)
}

/// Same contract as [`knn_distances`], computed by sorting every row's full
/// list of distances. O(m^2 log m); kept as a test oracle.
pub fn knn_distances_exact_oracle(points: &SampleMatrix, k: usize) -> Result<Vec<f64>> {
    check_k(k)?;
    check_points(points)?;
    let m = points.nrows();
    let mut out = Vec::with_capacity(m);
    let mut dists = Vec::with_capacity(m);
    for i in 0..m {
        dists.clear();
        dists.extend(
            (0..m)
                .filter(|&j| j != i)
                .map(|j| sq_dist(points.row(i), points.row(j)))
                .filter(|&s| s > 0.0),
        );
        if dists.len() < k {
            return Err(Error::DegenerateSupport { index: i, k });
        }
        dists.sort_by(f64::total_cmp);
        out.push(dists[k - 1].sqrt());
    }
    Ok(out)
}

const BRUTE_FORCE_LIMIT: usize = 48;
const LEAF_SIZE: usize = 8;

/// Distinct rows with multiplicities.
struct Groups {
    dim: usize,
    /// Row-major coordinates of each distinct location.
    coords: Vec<f64>,
    counts: Vec<usize>,
    /// Group index of every input row.
    membership: Vec<usize>,
}

impl Groups {
    fn new(points: &SampleMatrix) -> Self {
        let dim = points.ncols();
        let canon = |i: usize| points.row(i).iter().map(|&x| x + 0.0);
        let mut order: Vec<usize> = (0..points.nrows()).collect();
        order.sort_by(|&a, &b| {
            canon(a)
                .zip(canon(b))
                .map(|(x, y)| x.total_cmp(&y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut coords = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let mut membership = vec![0; points.nrows()];
        let mut prev: Option<usize> = None;
        for &i in &order {
            let same = prev.is_some_and(|p| canon(p).eq(canon(i)));
            if !same {
                coords.extend(canon(i));
                counts.push(0);
            }
            *counts.last_mut().expect("group exists") += 1;
            membership[i] = counts.len() - 1;
            prev = Some(i);
        }
        Groups {
            dim,
            coords,
            counts,
            membership,
        }
    }

    fn len(&self) -> usize {
        self.counts.len()
    }

    fn point(&self, g: usize) -> &[f64] {
        &self.coords[g * self.dim..(g + 1) * self.dim]
    }
}

/// Walks `(squared distance, count)` pairs in ascending distance order and
/// returns the distance at which the cumulative count reaches `k`.
fn accumulate(sorted: impl Iterator<Item = (f64, usize)>, k: usize) -> Option<f64> {
    let mut seen = 0;
    for (s, c) in sorted {
        if s > 0.0 {
            seen += c;
            if seen >= k {
                return Some(s.sqrt());
            }
        }
    }
    None
}

/// One dimension: locations are already sorted, so expand outwards.
fn sweep_1d(groups: &Groups, k: usize) -> Vec<Option<f64>> {
    let x = &groups.coords;
    let u = x.len();
    (0..u)
        .map(|g| {
            let (mut left, mut right) = (g, g + 1);
            let steps = std::iter::from_fn(|| {
                let dl = (left > 0).then(|| (x[g] - x[left - 1]) * (x[g] - x[left - 1]));
                let dr = (right < u).then(|| (x[right] - x[g]) * (x[right] - x[g]));
                match (dl, dr) {
                    (Some(a), Some(b)) if a <= b => {
                        left -= 1;
                        Some((a, groups.counts[left]))
                    }
                    (Some(a), None) => {
                        left -= 1;
                        Some((a, groups.counts[left]))
                    }
                    (_, Some(b)) => {
                        right += 1;
                        Some((b, groups.counts[right - 1]))
                    }
                    (None, None) => None,
                }
            });
            accumulate(steps, k)
        })
        .collect()
}

fn brute_grouped(groups: &Groups, k: usize) -> Vec<Option<f64>> {
    let u = groups.len();
    let mut buf = Vec::with_capacity(u);
    (0..u)
        .map(|g| {
            buf.clear();
            buf.extend(
                (0..u)
                    .filter(|&h| h != g)
                    .map(|h| (sq_dist(groups.point(g), groups.point(h)), groups.counts[h])),
            );
            buf.sort_by(|a, b| a.0.total_cmp(&b.0));
            accumulate(buf.iter().copied(), k)
        })
        .collect()
}

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static kd-tree over distinct locations.
struct KdTree<'a> {
    coords: &'a [f64],
    dim: usize,
    index: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    fn new(coords: &'a [f64], dim: usize) -> Self {
        let n = coords.len() / dim;
        let mut tree = KdTree {
            coords,
            dim,
            index: (0..n).collect(),
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
        };
        tree.build(0, n);
        tree
    }

    fn coord(&self, p: usize, axis: usize) -> f64 {
        self.coords[p * self.dim + axis]
    }

    fn point(&self, p: usize) -> &[f64] {
        &self.coords[p * self.dim..(p + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = (0..self.dim)
            .map(|a| {
                let (lo, hi) = self.index[start..end]
                    .iter()
                    .map(|&p| self.coord(p, a))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    });
                (a, hi - lo)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(a, _)| a)
            .unwrap_or(0);
        let mid = start + (end - start) / 2;
        let (coords, dim) = (self.coords, self.dim);
        self.index[start..end].select_nth_unstable_by(mid - start, |&p, &q| {
            coords[p * dim + axis].total_cmp(&coords[q * dim + axis])
        });
        let value = self.coord(self.index[mid], axis);
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// The `k` nearest locations to location `q` at positive distance, as
    /// `(squared distance, location)` in ascending order.
    fn nearest(&self, q: usize, k: usize, best: &mut Vec<(f64, usize)>) {
        best.clear();
        self.search(0, q, k, best);
    }

    fn search(&self, node: usize, q: usize, k: usize, best: &mut Vec<(f64, usize)>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                let qp = self.point(q);
                for &p in &self.index[start..end] {
                    if p == q {
                        continue;
                    }
                    let s = sq_dist(qp, self.point(p));
                    if s == 0.0 || (best.len() == k && s >= best[k - 1].0) {
                        continue;
                    }
                    let at = best.partition_point(|e| e.0 <= s);
                    if best.len() == k {
                        best.pop();
                    }
                    best.insert(at, (s, p));
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = self.coord(q, axis) - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, k, best);
                if best.len() < k || diff * diff < best[k - 1].0 {
                    self.search(far, q, k, best);
                }
            }
        }
    }

    fn kth_positive_all(&self, groups: &Groups, k: usize) -> Vec<Option<f64>> {
        let mut best = Vec::with_capacity(k + 1);
        (0..groups.len())
            .map(|g| {
                self.nearest(g, k, &mut best);
                accumulate(best.iter().map(|&(s, p)| (s, groups.counts[p])), k)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngStream;
    use proptest::prelude::*;
    use rand::RngExt;

    fn col(v: &[f64]) -> SampleMatrix {
        SampleMatrix::column_vector(v.to_vec())
    }

    #[test]
    fn hand_geometry() {
        assert_eq!(knn_distances(&col(&[0.0, 3.0, 4.0]), 1).unwrap(), vec![3.0, 1.0, 1.0]);
        assert_eq!(knn_distances(&col(&[0.0, 3.0, 4.0]), 2).unwrap(), vec![4.0, 3.0, 4.0]);
    }

    #[test]
    fn duplicates_are_skipped() {
        assert_eq!(knn_distances(&col(&[0.0, 0.0, 1.0]), 1).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(
            knn_distances_exact_oracle(&col(&[0.0, 0.0, 1.0]), 1).unwrap(),
            vec![1.0, 1.0, 1.0]
        );
        // duplicates at another location each count
        assert_eq!(knn_distances(&col(&[0.0, 1.0, 1.0, 5.0]), 2).unwrap()[0], 1.0);
        assert_eq!(knn_distances(&col(&[-0.0, 0.0, 2.0]), 1).unwrap(), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn degenerate_support() {
        assert_eq!(
            knn_distances(&col(&[0.0, 0.0]), 1),
            Err(Error::DegenerateSupport { index: 0, k: 1 })
        );
        assert_eq!(
            knn_distances_exact_oracle(&col(&[0.0, 0.0]), 1),
            Err(Error::DegenerateSupport { index: 0, k: 1 })
        );
        let pts = SampleMatrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(
            knn_distances(&pts, 3),
            Err(Error::DegenerateSupport { index: 0, k: 3 })
        );
        assert!(knn_distances(&col(&[0.0, 1.0]), 0).is_err());
    }

    fn random_points(seed: u64, m: usize, d: usize, dup: bool) -> SampleMatrix {
        let mut rng = RngStream::new(seed, 0).rng();
        let mut rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        if dup {
            for i in 0..m / 3 {
                let j = rng.random_range(0..m);
                rows[i] = rows[j].clone();
            }
        }
        SampleMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn matches_oracle_on_random_instances() {
        for inst in 0..200u64 {
            let m = 2 + (inst as usize * 37) % 199;
            let d = 1 + (inst as usize) % 5;
            let k = 1 + (inst as usize) % 4;
            let pts = random_points(inst, m, d, inst % 2 == 0);
            let fast = knn_distances(&pts, k);
            let slow = knn_distances_exact_oracle(&pts, k);
            match (fast, slow) {
                (Ok(a), Ok(b)) => {
                    for (x, y) in a.iter().zip(&b) {
                        assert!((x - y).abs() <= 1e-12, "instance {inst}");
                    }
                }
                (a, b) => assert_eq!(a, b, "instance {inst}"),
            }
        }
    }

    #[test]
    fn kd_tree_path_with_heavy_duplication() {
        // many repeats of a few locations plus some fresh points
        let base = random_points(99, 60, 3, false);
        let mut rng = RngStream::new(5, 5).rng();
        let idx: Vec<usize> = (0..500).map(|_| rng.random_range(0..60)).collect();
        let pts = base.select_rows(&idx);
        for k in 1..=5 {
            assert_eq!(knn_distances(&pts, k), knn_distances_exact_oracle(&pts, k));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn permutation_equivariant(seed in 0u64..1000, m in 5usize..80, d in 1usize..4) {
            let pts = random_points(seed, m, d, seed % 3 == 0);
            let mut perm: Vec<usize> = (0..m).collect();
            perm.reverse();
            perm.rotate_left(seed as usize % m);
            let a = knn_distances(&pts, 2).unwrap();
            let b = knn_distances(&pts.select_rows(&perm), 2).unwrap();
            for (i, &p) in perm.iter().enumerate() {
                prop_assert_eq!(b[i], a[p]);
            }
        }

        #[test]
        fn monotone_in_k(seed in 0u64..1000, m in 6usize..80, d in 1usize..4) {
            let pts = random_points(seed, m, d, seed % 2 == 0);
            let lo = knn_distances(&pts, 2).unwrap();
            let hi = knn_distances(&pts, 3).unwrap();
            for (a, b) in lo.iter().zip(&hi) {
                prop_assert!(b >= a);
            }
        }

        #[test]
        fn rigid_motion_invariant(seed in 0u64..1000, m in 5usize..60, angle in 0.0f64..6.28) {
            let pts = random_points(seed, m, 2, false);
            let (s, c) = angle.sin_cos();
            let rows: Vec<[f64; 2]> = pts
                .rows()
                .map(|r| [c * r[0] - s * r[1] + 3.0, s * r[0] + c * r[1] - 1.5])
                .collect();
            let moved = SampleMatrix::from_rows(&rows).unwrap();
            let a = knn_distances(&pts, 2).unwrap();
            let b = knn_distances(&moved, 2).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
