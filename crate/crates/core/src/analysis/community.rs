use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::Matrix;
use crate::error::{Error, Result};
use crate::training::derive_seed;

/// Community id per vertex plus the partition's modularity.
#[derive(Clone, Debug, PartialEq)]
pub struct CommunityPartition {
    /// Ids are `0..count`, numbered by decreasing size, ties by lowest member.
    pub assignment: Vec<usize>,
    pub modularity: f64,
}

impl CommunityPartition {
    pub fn count(&self) -> usize {
        self.assignment.iter().max().map_or(0, |m| m + 1)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.count()];
        for &c in &self.assignment {
            s[c] += 1;
        }
        s
    }

    pub fn members(&self, community: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == community)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LouvainOptions {
    pub resolution: f64,
    /// Restart 0 sweeps vertices in index order; later restarts shuffle it.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for LouvainOptions {
    fn default() -> Self {
        Self {
            resolution: 1.0,
            restarts: 64,
            seed: 0,
        }
    }
}

/// `Σ_c [in_c / 2m − γ (tot_c / 2m)²]` with `in_c = Σ_{i,j ∈ c} w_ij`,
/// `tot_c = Σ_{i ∈ c} k_i`, `k_i = Σ_j w_ij` and `2m = Σ_ij w_ij`.
///
/// A self-loop `w_ii` enters both `in_c` and `k_i` once, as the matrix entry it is.
pub fn modularity(weights: &Matrix, assignment: &[usize], resolution: f64) -> f64 {
    let n = weights.rows();
    let two_m = weights.sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let count = assignment.iter().max().map_or(0, |m| m + 1);
    let mut inside = vec![0.0; count];
    let mut tot = vec![0.0; count];
    for i in 0..n {
        let ci = assignment[i];
        for j in 0..n {
            let w = weights[(i, j)];
            tot[ci] += w;
            if assignment[j] == ci {
                inside[ci] += w;
            }
        }
    }
    inside
        .iter()
        .zip(&tot)
        .map(|(a, t)| a / two_m - resolution * (t / two_m) * (t / two_m))
        .sum()
}

/// Sparse symmetric graph for one Louvain level.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    degree: Vec<f64>,
}

impl Level {
    fn from_matrix(w: &Matrix) -> Self {
        let n = w.rows();
        let mut adj = vec![Vec::new(); n];
        let mut self_loop = vec![0.0; n];
        let mut degree = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let v = w[(i, j)];
                if v == 0.0 {
                    continue;
                }
                degree[i] += v;
                if i == j {
                    self_loop[i] = v;
                } else {
                    adj[i].push((j, v));
                }
            }
        }
        Self { adj, self_loop, degree }
    }

    fn n(&self) -> usize {
        self.degree.len()
    }

    /// Greedy local moving; returns whether anything moved.
    fn local_moves(&self, community: &mut [usize], order: &[usize], gamma: f64, two_m: f64) -> bool {
        let n = self.n();
        let mut tot = vec![0.0; n];
        for i in 0..n {
            tot[community[i]] += self.degree[i];
        }
        let mut link = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for &i in order {
                let ci = community[i];
                let ki = self.degree[i];
                for &(j, w) in &self.adj[i] {
                    let cj = community[j];
                    if link[cj] == 0.0 {
                        touched.push(cj);
                    }
                    link[cj] += w;
                }
                tot[ci] -= ki;
                let gain = |c: usize, link: &[f64], tot: &[f64]| link[c] - gamma * tot[c] * ki / two_m;
                let mut best = ci;
                let mut best_gain = gain(ci, &link, &tot);
                touched.sort_unstable();
                for &c in &touched {
                    let g = gain(c, &link, &tot);
                    if g > best_gain + 1e-12 * two_m.max(1.0) {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += ki;
                if best != ci {
                    community[i] = best;
                    moved = true;
                    moved_any = true;
                }
                for &c in &touched {
                    link[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                return moved_any;
            }
        }
    }

    /// Collapses communities (already numbered `0..k`) into vertices.
    fn aggregate(&self, community: &[usize], k: usize) -> Matrix {
        let mut w = Matrix::zeros(k, k);
        for i in 0..self.n() {
            let ci = community[i];
            w[(ci, ci)] += self.self_loop[i];
            for &(j, v) in &self.adj[i] {
                w[(ci, community[j])] += v;
            }
        }
        w
    }
}

/// Renumbers labels to `0..k` by first appearance.
fn compact(labels: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; labels.len().max(1)];
    let mut next = 0;
    for l in labels.iter_mut() {
        if map[*l] == usize::MAX {
            map[*l] = next;
            next += 1;
        }
        *l = map[*l];
    }
    next
}

/// Renumbers by decreasing size, ties by lowest member index.
fn canonical(assignment: &mut [usize]) {
    let k = compact(assignment);
    let mut size = vec![0usize; k];
    for &c in assignment.iter() {
        size[c] += 1;
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(size[c]), c));
    let mut rank = vec![0; k];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    for c in assignment.iter_mut() {
        *c = rank[*c];
    }
}

/// Aggregation levels starting from `membership` collapsed into vertices.
fn climb(base: &Level, membership: &mut [usize], gamma: f64, two_m: f64, rng: &mut Option<&mut ChaCha8Rng>) {
    let k = compact(membership);
    let mut level = Level::from_matrix(&base.aggregate(membership, k));
    loop {
        let m = level.n();
        let mut community: Vec<usize> = (0..m).collect();
        let mut order: Vec<usize> = (0..m).collect();
        if let Some(r) = rng.as_deref_mut() {
            order.shuffle(r);
        }
        if !level.local_moves(&mut community, &order, gamma, two_m) {
            break;
        }
        let k = compact(&mut community);
        for c in membership.iter_mut() {
            *c = community[*c];
        }
        if k == m {
            break;
        }
        level = Level::from_matrix(&level.aggregate(&community, k));
    }
}

/// Moves single vertices again on the original graph and restarts
/// aggregation from the refined partition, until no vertex moves.
fn refine(base: &Level, membership: &mut [usize], gamma: f64, two_m: f64, rng: &mut Option<&mut ChaCha8Rng>) {
    let n = base.n();
    let mut order: Vec<usize> = (0..n).collect();
    // each round strictly increases modularity, the cap only guards rounding
    for _ in 0..n.max(16) {
        if let Some(r) = rng.as_deref_mut() {
            order.shuffle(r);
        }
        if !base.local_moves(membership, &order, gamma, two_m) {
            break;
        }
        climb(base, membership, gamma, two_m, rng);
    }
}

/// One Louvain run with vertex refinement, then merge-and-refine: two
/// communities are joined, the result refined, and kept when modularity rises.
/// Plain merges never help at a Louvain fixpoint, but a merge followed by
/// vertex moves can escape it.
/// Moves of two linked vertices at once: both into a shared community
/// (existing or new) or exchanging their communities. Catches optima that
/// single-vertex moves cannot reach. Returns whether anything changed.
fn pair_moves(base: &Level, membership: &mut [usize], gamma: f64, two_m: f64) -> bool {
    let n = base.n();
    let mut tot = vec![0.0; n];
    let mut size = vec![0usize; n];
    for i in 0..n {
        tot[membership[i]] += base.degree[i];
        size[membership[i]] += 1;
    }
    let link = |m: &[usize], i: usize, c: usize| -> f64 {
        base.adj[i].iter().filter(|&&(j, _)| m[j] == c).map(|&(_, w)| w).sum()
    };
    // change in 2m·Q from moving `i` out of its community into `c`
    let delta = |m: &[usize], tot: &[f64], i: usize, c: usize| -> f64 {
        let a = m[i];
        if a == c {
            return 0.0;
        }
        let k = base.degree[i];
        let sq = |x: f64| x * x;
        2.0 * (link(m, i, c) - link(m, i, a))
            - gamma / two_m * (sq(tot[c] + k) - sq(tot[c]) + sq(tot[a] - k) - sq(tot[a]))
    };
    let apply = |m: &mut [usize], tot: &mut [f64], size: &mut [usize], i: usize, c: usize| {
        let a = m[i];
        tot[a] -= base.degree[i];
        size[a] -= 1;
        tot[c] += base.degree[i];
        size[c] += 1;
        m[i] = c;
    };
    let eps = 1e-12 * two_m.max(1.0);
    let mut changed = false;
    loop {
        let mut improved = false;
        for u in 0..n {
            for &(v, _) in &base.adj[u] {
                if v <= u {
                    continue;
                }
                let (cu, cv) = (membership[u], membership[v]);
                let mut targets: Vec<usize> = base.adj[u]
                    .iter()
                    .chain(&base.adj[v])
                    .map(|&(j, _)| membership[j])
                    .collect();
                if let Some(empty) = (0..n).find(|&c| size[c] == 0) {
                    targets.push(empty);
                }
                targets.sort_unstable();
                targets.dedup();
                let mut best: Option<(f64, usize, usize)> = None;
                let mut consider = |gain: f64, tu: usize, tv: usize| {
                    if gain > eps && best.is_none_or(|(g, _, _)| gain > g + eps) {
                        best = Some((gain, tu, tv));
                    }
                };
                for &c in &targets {
                    if c == cu && c == cv {
                        continue;
                    }
                    let d1 = delta(membership, &tot, u, c);
                    apply(membership, &mut tot, &mut size, u, c);
                    let d2 = delta(membership, &tot, v, c);
                    apply(membership, &mut tot, &mut size, u, cu);
                    consider(d1 + d2, c, c);
                }
                if cu != cv {
                    let d1 = delta(membership, &tot, u, cv);
                    apply(membership, &mut tot, &mut size, u, cv);
                    let d2 = delta(membership, &tot, v, cu);
                    apply(membership, &mut tot, &mut size, u, cu);
                    consider(d1 + d2, cv, cu);
                }
                if let Some((_, tu, tv)) = best {
                    apply(membership, &mut tot, &mut size, u, tu);
                    apply(membership, &mut tot, &mut size, v, tv);
                    improved = true;
                    changed = true;
                }
            }
        }
        if !improved {
            return changed;
        }
    }
}

fn louvain_once(
    weights: &Matrix,
    gamma: f64,
    start: Option<Vec<usize>>,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Vec<usize> {
    let n = weights.rows();
    let two_m = weights.sum();
    let base = Level::from_matrix(weights);
    let mut membership: Vec<usize> = start.unwrap_or_else(|| (0..n).collect());
    climb(&base, &mut membership, gamma, two_m, &mut rng);
    refine(&base, &mut membership, gamma, two_m, &mut rng);
    let mut q = modularity(weights, &membership, gamma);
    'improve: loop {
        let k = compact(&mut membership);
        for a in 0..k {
            for b in a + 1..k {
                let mut trial: Vec<usize> = membership.iter().map(|&c| if c == b { a } else { c }).collect();
                compact(&mut trial);
                refine(&base, &mut trial, gamma, two_m, &mut rng);
                let tq = modularity(weights, &trial, gamma);
                if tq > q + 1e-12 {
                    membership = trial;
                    q = tq;
                    continue 'improve;
                }
            }
        }
        if pair_moves(&base, &mut membership, gamma, two_m) {
            refine(&base, &mut membership, gamma, two_m, &mut rng);
            q = modularity(weights, &membership, gamma);
            continue;
        }
        break;
    }
    membership
}

/// Sends a random share (10–60%) of the vertices to random communities,
/// fresh ones included.
fn perturb(assignment: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = assignment.len();
    let share = rng.gen_range(0.1..0.6);
    let mut out = assignment.to_vec();
    for c in out.iter_mut() {
        if rng.gen_bool(share) {
            *c = rng.gen_range(0..n);
        }
    }
    out
}

/// Louvain local moving plus aggregation, best of several restarts.
///
/// Zero total weight leaves every vertex alone with modularity 0.
pub fn detect_communities(weights: &Matrix, opts: LouvainOptions) -> Result<CommunityPartition> {
    if !weights.is_square() || weights.asymmetry() > 1e-12 {
        return Err(Error::Validation(
            "community detection needs a square symmetric matrix".into(),
        ));
    }
    if weights.data().iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::Validation(
            "community detection needs finite non-negative weights".into(),
        ));
    }
    let n = weights.rows();
    if weights.sum() == 0.0 {
        return Ok(CommunityPartition {
            assignment: (0..n).collect(),
            modularity: 0.0,
        });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in 0..opts.restarts.max(1) {
        let mut assignment = if r == 0 {
            louvain_once(weights, opts.resolution, None, None)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, r));
            // odd restarts perturb the best partition so far instead of starting fresh
            let start = match &best {
                Some((_, b)) if r % 2 == 1 => Some(perturb(b, &mut rng)),
                _ => None,
            };
            louvain_once(weights, opts.resolution, start, Some(&mut rng))
        };
        canonical(&mut assignment);
        let q = modularity(weights, &assignment, opts.resolution);
        if best.as_ref().is_none_or(|(bq, _)| q > *bq + 1e-12) {
            best = Some((q, assignment));
        }
    }
    let (modularity, assignment) = best.expect("at least one restart");
    Ok(CommunityPartition { assignment, modularity })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> Matrix {
        let mut m = Matrix::zeros(6, 6);
        for (a, b) in [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)] {
            m[(a, b)] = 1.0;
            m[(b, a)] = 1.0;
        }
        m
    }

    #[test]
    fn recovers_cliques() {
        let p = detect_communities(&two_triangles(), LouvainOptions::default()).unwrap();
        assert_eq!(p.assignment, vec![0, 0, 0, 1, 1, 1]);
        assert!((p.modularity - 5.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn edgeless() {
        let p = detect_communities(&Matrix::zeros(4, 4), LouvainOptions::default()).unwrap();
        assert_eq!(p.assignment, vec![0, 1, 2, 3]);
        assert_eq!(p.modularity, 0.0);
    }
}
