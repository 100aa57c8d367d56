use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Inclusive arithmetic range written `{start:step:end}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridRange {
    pub start: f64,
    pub step: f64,
    pub end: f64,
}

impl GridRange {
    pub fn new(start: f64, step: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && step.is_finite() && end.is_finite()) || !(step > 0.0) || end < start {
            return Err(Error::Usage(format!(
                "grid range {{{start}:{step}:{end}}} needs step > 0 and end ≥ start"
            )));
        }
        Ok(Self { start, step, end })
    }

    pub fn single(v: f64) -> Self {
        Self {
            start: v,
            step: 1.0,
            end: v,
        }
    }

    /// `start, start + step, …` up to `end`. Values are computed as
    /// `start + k·step`, and one landing within rounding distance of `end`
    /// is snapped to it.
    pub fn expand(&self) -> Vec<f64> {
        let steps = ((self.end - self.start) / self.step + 1e-9).floor();
        (0..=steps as usize)
            .map(|k| {
                let v = self.start + k as f64 * self.step;
                if (v - self.end).abs() <= 1e-9 * self.step {
                    self.end
                } else {
                    v.min(self.end)
                }
            })
            .collect()
    }
}

impl FromStr for GridRange {
    type Err = Error;

    /// Accepts `{start:step:end}` or a bare number.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad number `{t}` in grid range `{s}`")))
        };
        match s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            Some(inner) => {
                let parts: Vec<&str> = inner.split(':').collect();
                if parts.len() != 3 {
                    return Err(Error::Usage(format!("grid range `{s}` must be {{start:step:end}}")));
                }
                GridRange::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
            }
            None => Ok(GridRange::single(num(s)?)),
        }
    }
}

impl fmt::Display for GridRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start == self.end {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{{{}:{}:{}}}", self.start, self.step, self.end)
        }
    }
}

/// Hyperparameter names in search order; the last varies fastest.
pub const GRID_ORDER: [&str; 10] = ["th", "c0", "c1", "c2", "t", "d", "alpha", "b", "s", "lambda"];

/// Named ranges, kept in [`GRID_ORDER`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridSpec {
    ranges: Vec<(String, GridRange)>,
}

/// One Cartesian grid point as `(name, value)` pairs in grid order.
pub type GridPoint = Vec<(String, f64)>;

impl GridSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: &str, range: GridRange) -> Result<&mut Self> {
        let rank = GRID_ORDER.iter().position(|n| *n == name).ok_or_else(|| {
            Error::Usage(format!(
                "unknown grid parameter `{name}` (known: {})",
                GRID_ORDER.join(", ")
            ))
        })?;
        self.ranges.retain(|(n, _)| n != name);
        let at = self
            .ranges
            .iter()
            .position(|(n, _)| GRID_ORDER.iter().position(|g| g == n).unwrap() > rank)
            .unwrap_or(self.ranges.len());
        self.ranges.insert(at, (name.to_string(), range));
        Ok(self)
    }

    pub fn ranges(&self) -> &[(String, GridRange)] {
        &self.ranges
    }

    pub fn get(&self, name: &str) -> Option<GridRange> {
        self.ranges.iter().find(|(n, _)| n == name).map(|(_, r)| *r)
    }

    pub fn len(&self) -> usize {
        self.ranges.iter().map(|(_, r)| r.expand().len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian product, last parameter varying fastest.
    pub fn expand(&self) -> Vec<GridPoint> {
        let mut points: Vec<GridPoint> = vec![Vec::new()];
        for (name, range) in &self.ranges {
            let values = range.expand();
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push((name.clone(), v));
                        q
                    })
                })
                .collect();
        }
        points
    }
}

/// SplitMix64 finalizer over `(base, index)`, so every grid run gets its own stream.
pub fn derive_seed(base: u64, index: usize) -> u64 {
    let mut z = base ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct GridRun<T> {
    pub index: usize,
    pub point: GridPoint,
    pub seed: u64,
    pub outcome: std::result::Result<(f64, T), String>,
}

impl<T> GridRun<T> {
    pub fn val_rmse(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|(v, _)| *v)
    }
}

#[derive(Clone, Debug)]
pub struct GridOutcome<T> {
    /// Successful runs sorted by validation RMSE, earlier grid index first on ties,
    /// followed by failed runs in grid order.
    pub ranked: Vec<GridRun<T>>,
}

impl<T> GridOutcome<T> {
    pub fn best(&self) -> &GridRun<T> {
        &self.ranked[0]
    }

    pub fn into_best(self) -> (GridRun<T>, usize) {
        let total = self.ranked.len();
        (self.ranked.into_iter().next().expect("non-empty grid outcome"), total)
    }
}

/// Runs `run` once per grid point, at most `budget` points in grid order,
/// on up to `jobs` threads. `run` returns the validation RMSE and a payload.
pub fn grid_search<T, F>(
    points: &[GridPoint],
    budget: Option<usize>,
    base_seed: u64,
    jobs: usize,
    run: F,
) -> Result<GridOutcome<T>>
where
    T: Send,
    F: Fn(usize, &GridPoint, u64) -> Result<(f64, T)> + Sync,
{
    let take = budget.unwrap_or(points.len()).min(points.len());
    if take == 0 {
        return Err(Error::Usage("grid expansion is empty".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    let mut runs: Vec<GridRun<T>> = pool.install(|| {
        points[..take]
            .par_iter()
            .enumerate()
            .map(|(index, point)| {
                let seed = derive_seed(base_seed, index);
                let outcome = run(index, point, seed)
                    .and_then(|(v, t)| {
                        if v.is_nan() {
                            Err(Error::Contract("validation RMSE is NaN".into()))
                        } else {
                            Ok((v, t))
                        }
                    })
                    .map_err(|e| e.to_string());
                GridRun {
                    index,
                    point: point.clone(),
                    seed,
                    outcome,
                }
            })
            .collect()
    });
    if runs.iter().all(|r| r.outcome.is_err()) {
        let detail: Vec<String> = runs
            .iter()
            .map(|r| format!("run {}: {}", r.index, r.outcome.as_ref().err().unwrap()))
            .collect();
        return Err(Error::Validation(format!(
            "every grid run failed:\n{}",
            detail.join("\n")
        )));
    }
    runs.sort_by(|a, b| match (a.val_rmse(), b.val_rmse()) {
        (Some(x), Some(y)) => x.total_cmp(&y).then(a.index.cmp(&b.index)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.index.cmp(&b.index),
    });
    Ok(GridOutcome { ranked: runs })
}
