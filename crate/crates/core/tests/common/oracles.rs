//! Independent reference computations the library is checked against.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime};

use nalgebra::DMatrix;
use stationcast::analysis::modularity;
use stationcast::autodiff::Matrix;
use stationcast::graph::{BinaryAdjacency, StationMeta, EARTH_RADIUS_MILES};

pub fn dense(adj: &BinaryAdjacency) -> DMatrix<f64> {
    let n = adj.n();
    DMatrix::from_fn(n, n, |i, j| adj.entries[(i, j)])
}

pub fn oracle_filter(adj: &BinaryAdjacency) -> DMatrix<f64> {
    let n = adj.n();
    let a_tilde = dense(adj) + DMatrix::identity(n, n);
    let d = DMatrix::from_diagonal(&a_tilde.column_sum().map(|s| 1.0 / s.sqrt()));
    &d * a_tilde * &d
}

pub fn oracle_laplacian(adj: &BinaryAdjacency) -> DMatrix<f64> {
    let n = adj.n();
    let a = dense(adj);
    let d = DMatrix::from_diagonal(&a.column_sum().map(|s| if s > 0.0 { 1.0 / s.sqrt() } else { 0.0 }));
    DMatrix::identity(n, n) - &d * a * &d
}

pub fn max_diff(m: &Matrix, o: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            worst = worst.max((m[(i, j)] - o[(i, j)]).abs());
        }
    }
    worst
}

/// Hop distance from the nearest vertex in `sources`; `usize::MAX` if unreachable.
pub fn bfs(adj: &BinaryAdjacency, sources: &[usize]) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.n()];
    let mut queue = VecDeque::new();
    for &s in sources {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for v in 0..adj.n() {
            if adj.entries[(u, v)] != 0.0 && dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Chord-length great-circle distance through 3-D unit vectors.
pub fn chord_distance(a: &StationMeta, b: &StationMeta) -> f64 {
    let v = |s: &StationMeta| {
        let (p, l) = (s.latitude.to_radians(), s.longitude.to_radians());
        [p.cos() * l.cos(), p.cos() * l.sin(), p.sin()]
    };
    let (x, y) = (v(a), v(b));
    let chord = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
    2.0 * EARTH_RADIUS_MILES * (chord / 2.0).asin()
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub struct Direct {
    pub rmse: f64,
    pub rmse_daytime: f64,
    pub mae: f64,
    pub r_squared: f64,
}

/// RMSE, daytime RMSE over hours 7 to 20, MAE and R² written out term by term.
pub fn direct_metrics(pred: &Matrix, target: &Matrix, hours: &[u32]) -> Direct {
    let y: Vec<f64> = target.data().to_vec();
    let p: Vec<f64> = pred.data().to_vec();
    let mn = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / mn;
    let sq: Vec<f64> = y.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).collect();
    let day: Vec<f64> = (0..target.rows())
        .filter(|&r| (7..=20).contains(&hours[r]))
        .flat_map(|r| (0..target.cols()).map(move |c| (r, c)))
        .map(|(r, c)| (target[(r, c)] - pred[(r, c)]).powi(2))
        .collect();
    Direct {
        rmse: (sq.iter().sum::<f64>() / mn).sqrt(),
        rmse_daytime: (day.iter().sum::<f64>() / day.len() as f64).sqrt(),
        mae: y.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum::<f64>() / mn,
        r_squared: 1.0 - sq.iter().sum::<f64>() / y.iter().map(|a| (a - ybar).powi(2)).sum::<f64>(),
    }
}

/// Every set partition of `n` vertices as restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            rec(prefix, max.max(c), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    let mut p = vec![0];
    rec(&mut p, 0, n, &mut out);
    out
}

pub fn brute_best(w: &Matrix) -> f64 {
    all_partitions(w.rows())
        .iter()
        .map(|p| modularity(w, p, 1.0))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Hand-rolled reading of the fixture: `(station id, start time)` for rows
/// with a positive duration, a parseable time and a non-null station.
pub fn oracle_rows(path: &Path) -> Vec<(String, NaiveDateTime)> {
    let text = fs::read_to_string(path).unwrap();
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let duration: f64 = f[0].parse().unwrap();
        let id = f[3];
        if duration <= 0.0 || id == "NULL" {
            continue;
        }
        let Some(t) = oracle_time(f[1]) else { continue };
        out.push((id.to_string(), t));
    }
    out
}

/// `YYYY-MM-DD HH:MM:SS[.fff]` or `MM/DD/YYYY HH:MM:SS`.
pub fn oracle_time(s: &str) -> Option<NaiveDateTime> {
    let (date, time) = s.split_once(' ')?;
    let (y, m, d) = if date.contains('/') {
        let p: Vec<&str> = date.split('/').collect();
        (p[2].parse().ok()?, p[0].parse().ok()?, p[1].parse().ok()?)
    } else {
        let p: Vec<&str> = date.split('-').collect();
        (p[0].parse().ok()?, p[1].parse().ok()?, p[2].parse().ok()?)
    };
    let t: Vec<&str> = time.split(':').collect();
    let secs: f64 = t[2].parse().ok()?;
    let base = NaiveDate::from_ymd_opt(y, m, d)?.and_hms_opt(t[0].parse().ok()?, t[1].parse().ok()?, 0)?;
    Some(base + Duration::milliseconds((secs * 1000.0).round() as i64))
}
