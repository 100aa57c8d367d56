//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Hyperparameters use
//! the grid names (`th`, `c0`, `c1`, `c2`, `t`, `d`, `alpha`, `b`, `s`,
//! `lambda`) and accept either a single number or a `{start:step:end}` range.
//! [`RunConfig::to_text`] writes every key in a fixed order; parsing that text
//! gives back an equal configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::NaiveDateTime;

use crate::error::{Error, Result};
use crate::ingest::{parse_timestamp, StationFilter, StudyWindow};
use crate::models::{Architecture, ModelKind};
use crate::training::{GridPoint, GridRange, GridSpec, TrainConfig, GRID_ORDER};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub trips: Vec<PathBuf>,
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    pub min_total_demand: u64,
    pub require_every_year: bool,
    /// Fail on the first malformed trip row.
    pub strict: bool,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub model: Option<ModelKind>,
    /// Explicit hyperparameters; anything unset falls back to [`default_hyper`].
    pub hyper: GridSpec,
    pub max_epochs: usize,
    /// Cap on grid runs, taken in grid order.
    pub grid_budget: Option<usize>,
    /// Historical average by hour of week instead of hour of day.
    pub weekly: bool,
    pub seed: u64,
    pub out: PathBuf,
    pub clip_negative: bool,
    /// Edge threshold for the learned-filter analysis.
    pub tau: f64,
    /// Width in miles of the distance bins for edge profiles.
    pub distance_bin: f64,
    pub distance_bins: usize,
    /// Stations of largest weighted degree listed in the rank table.
    pub rank_stations: usize,
    pub rank_depth: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trips: Vec::new(),
            start: parse_timestamp("2013-07-01 00:00:00").unwrap(),
            end: parse_timestamp("2016-07-01 00:00:00").unwrap(),
            min_total_demand: StationFilter::default().min_total_demand,
            require_every_year: true,
            strict: false,
            n_train: 22_304,
            n_val: 2_000,
            n_test: 2_000,
            model: None,
            hyper: GridSpec::new(),
            max_epochs: 500,
            grid_budget: None,
            weekly: false,
            seed: 0,
            out: PathBuf::from("out"),
            clip_negative: false,
            tau: 0.15,
            distance_bin: 1.0,
            distance_bins: 10,
            rank_stations: 6,
            rank_depth: 10,
        }
    }
}

/// Hyperparameters each model kind reads.
pub fn required_hyper(kind: ModelKind) -> &'static [&'static str] {
    use ModelKind::*;
    match kind {
        GcnnSd | GcnnDe | GcnnAtd | GcnnDc => &["th", "c0", "c1", "c2", "alpha", "b", "s"],
        GcnnRegDdgf | Mlp => &["c0", "c1", "c2", "alpha", "b", "s"],
        GcnnRecDdgf | Lstm => &["t", "d", "alpha", "b", "s"],
        Lasso => &["c0", "lambda"],
        Ha => &[],
    }
}

/// Validation-optimal settings for the full 2013-2016 Citi Bike network, used
/// when a configuration leaves a parameter out. LASSO's `lambda` has none.
pub fn default_hyper(kind: ModelKind, name: &str) -> Option<f64> {
    use ModelKind::*;
    let v = match (kind, name) {
        (GcnnSd, "th") => 3.0,
        (GcnnDe, "th") => 900.0,
        (GcnnAtd, "th") => 20.0,
        (GcnnDc, "th") => 0.9,
        (GcnnSd | GcnnAtd, "c0") => 36.0,
        (GcnnDe | GcnnDc | GcnnRegDdgf | Mlp | Lasso, "c0") => 24.0,
        (_, "c1") => 40.0,
        (_, "c2") => 0.0,
        (_, "t") => 24.0,
        (_, "d") => 100.0,
        (GcnnSd | GcnnDe | GcnnAtd, "alpha") => 0.01,
        (GcnnDc | GcnnRegDdgf | Mlp, "alpha") => 0.005,
        (GcnnRecDdgf | Lstm, "alpha") => 0.001,
        (_, "b") => 100.0,
        (GcnnRecDdgf | Lstm, "s") => 100.0,
        (_, "s") => 20.0,
        _ => return None,
    };
    Some(v)
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| usage(format!("config key `{key}`: cannot parse `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(usage(format!("config key `{key}`: expected true or false, got `{v}`"))),
    }
}

fn as_count(name: &str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(usage(format!("`{name}` must be a non-negative integer, got {v}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), lineno).is_some() {
                return Err(usage(format!("config key `{key}` given twice")));
            }
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "trips" => {
                self.trips = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(PathBuf::from)
                    .collect()
            }
            "start" | "end" => {
                let t = parse_timestamp(value)
                    .ok_or_else(|| usage(format!("config key `{key}`: bad timestamp `{value}`")))?;
                if key == "start" {
                    self.start = t;
                } else {
                    self.end = t;
                }
            }
            "min_total_demand" => self.min_total_demand = parse_value(key, value)?,
            "require_every_year" => self.require_every_year = parse_bool(key, value)?,
            "strict" => self.strict = parse_bool(key, value)?,
            "split" => {
                let parts: Vec<usize> = value
                    .split(',')
                    .map(|p| parse_value(key, p.trim()))
                    .collect::<Result<_>>()?;
                let [a, b, c] = parts[..] else {
                    return Err(usage("`split` needs three sizes: train, validation, test"));
                };
                (self.n_train, self.n_val, self.n_test) = (a, b, c);
            }
            "model" => {
                self.model = if value.is_empty() { None } else { Some(value.parse()?) };
            }
            "max_epochs" => self.max_epochs = parse_value(key, value)?,
            "grid_budget" => {
                self.grid_budget = if value.is_empty() {
                    None
                } else {
                    Some(parse_value(key, value)?)
                };
            }
            "weekly" => self.weekly = parse_bool(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "clip_negative" => self.clip_negative = parse_bool(key, value)?,
            "tau" => self.tau = parse_value(key, value)?,
            "distance_bin" => self.distance_bin = parse_value(key, value)?,
            "distance_bins" => self.distance_bins = parse_value(key, value)?,
            "rank_stations" => self.rank_stations = parse_value(key, value)?,
            "rank_depth" => self.rank_depth = parse_value(key, value)?,
            _ if GRID_ORDER.contains(&key) => {
                let mut range: GridRange = value.parse()?;
                if range.start == range.end {
                    range = GridRange::single(range.start);
                }
                self.hyper.set(key, range)?;
            }
            _ => return Err(usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Canonical text form; every key, fixed order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let trips: Vec<String> = self.trips.iter().map(|p| p.display().to_string()).collect();
        let _ = writeln!(s, "trips = {}", trips.join(", "));
        let _ = writeln!(s, "start = {}", self.start.format("%Y-%m-%d %H:%M:%S"));
        let _ = writeln!(s, "end = {}", self.end.format("%Y-%m-%d %H:%M:%S"));
        let _ = writeln!(s, "min_total_demand = {}", self.min_total_demand);
        let _ = writeln!(s, "require_every_year = {}", self.require_every_year);
        let _ = writeln!(s, "strict = {}", self.strict);
        let _ = writeln!(s, "split = {}, {}, {}", self.n_train, self.n_val, self.n_test);
        let _ = writeln!(s, "model = {}", self.model.map(|m| m.name()).unwrap_or(""));
        for (name, range) in self.hyper.ranges() {
            let _ = writeln!(s, "{name} = {range}");
        }
        let _ = writeln!(s, "max_epochs = {}", self.max_epochs);
        let _ = writeln!(
            s,
            "grid_budget = {}",
            self.grid_budget.map(|b| b.to_string()).unwrap_or_default()
        );
        let _ = writeln!(s, "weekly = {}", self.weekly);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "clip_negative = {}", self.clip_negative);
        let _ = writeln!(s, "tau = {:?}", self.tau);
        let _ = writeln!(s, "distance_bin = {:?}", self.distance_bin);
        let _ = writeln!(s, "distance_bins = {}", self.distance_bins);
        let _ = writeln!(s, "rank_stations = {}", self.rank_stations);
        let _ = writeln!(s, "rank_depth = {}", self.rank_depth);
        s
    }

    pub fn window(&self) -> Result<StudyWindow> {
        StudyWindow::new(self.start, self.end).map_err(|e| usage(e.to_string()))
    }

    pub fn station_filter(&self) -> StationFilter {
        StationFilter {
            min_total_demand: self.min_total_demand,
            require_every_year: self.require_every_year,
        }
    }

    pub fn model_kind(&self) -> Result<ModelKind> {
        self.model.ok_or_else(|| usage("config does not name a `model`"))
    }

    /// Checks everything a model-level command needs before it starts work:
    /// a model kind, every hyperparameter it reads, and no stray ones.
    pub fn validate_model(&self) -> Result<ModelKind> {
        let kind = self.model_kind()?;
        let needed = required_hyper(kind);
        for (name, _) in self.hyper.ranges() {
            if !needed.contains(&name.as_str()) {
                return Err(usage(format!("`{name}` does not apply to model `{kind}`")));
            }
        }
        for name in needed {
            if self.hyper.get(name).is_none() && default_hyper(kind, name).is_none() {
                return Err(usage(format!("model `{kind}` needs `{name}`")));
            }
        }
        if !(self.tau >= 0.0 && self.tau <= 1.0) {
            return Err(usage(format!("`tau` must lie in [0, 1], got {}", self.tau)));
        }
        if self.max_epochs == 0 && kind.is_neural() {
            return Err(usage("`max_epochs` must be at least 1"));
        }
        for point in self.grid()?.expand() {
            self.point_settings(kind, &point)?;
        }
        Ok(kind)
    }

    /// Every hyperparameter the model reads, explicit or defaulted, as a grid.
    pub fn grid(&self) -> Result<GridSpec> {
        let kind = self.model_kind()?;
        let mut spec = GridSpec::new();
        for name in required_hyper(kind) {
            let range = match self.hyper.get(name) {
                Some(r) => r,
                None => GridRange::single(
                    default_hyper(kind, name).ok_or_else(|| usage(format!("model `{kind}` needs `{name}`")))?,
                ),
            };
            spec.set(name, range)?;
        }
        Ok(spec)
    }

    /// The single point for `train`; a multi-valued range is a usage error.
    pub fn single_point(&self) -> Result<GridPoint> {
        let spec = self.grid()?;
        for (name, range) in spec.ranges() {
            if range.expand().len() != 1 {
                return Err(usage(format!("`{name}` = {range} is a range; use `grid` to search it")));
            }
        }
        Ok(spec.expand().remove(0))
    }

    /// Resolves one grid point into a model shape, training settings and an
    /// optional adjacency threshold.
    pub fn point_settings(&self, kind: ModelKind, point: &GridPoint) -> Result<PointSettings> {
        let get = |name: &str| point.iter().find(|(n, _)| n == name).map(|(_, v)| *v);
        let count = |name: &str| get(name).map(|v| as_count(name, v)).transpose();
        let recurrent = kind.is_recurrent();
        let window = match kind {
            // evaluated on the same sample hours as the default feedforward
            // window, or as many as the shortest split allows
            ModelKind::Ha => 24
                .min(self.n_train.min(self.n_val).min(self.n_test).saturating_sub(1))
                .max(1),
            _ if recurrent => count("t")?.unwrap_or(0),
            _ => count("c0")?.unwrap_or(0),
        };
        if kind != ModelKind::Ha && window == 0 {
            return Err(usage(format!("model `{kind}` needs a window of at least one hour")));
        }
        let hidden1 = count("c1")?.unwrap_or(0);
        if matches!(get("c1"), Some(_)) && hidden1 == 0 {
            return Err(usage("`c1` must be at least 1"));
        }
        let units = count("d")?.unwrap_or(0);
        if recurrent && units == 0 {
            return Err(usage("`d` must be at least 1"));
        }
        let lambda = get("lambda").unwrap_or(0.0);
        if !(lambda >= 0.0) {
            return Err(usage("`lambda` must be non-negative"));
        }
        let arch = Architecture {
            kind,
            n: 0,
            window,
            hidden1,
            hidden2: count("c2")?.unwrap_or(0),
            units,
            weekly: self.weekly,
            lambda,
        };
        let train = TrainConfig {
            learning_rate: get("alpha").unwrap_or(0.01),
            batch_size: count("b")?.unwrap_or(1),
            patience: count("s")?.unwrap_or(1),
            max_epochs: self.max_epochs,
            seed: self.seed,
        };
        if kind.is_neural() {
            train.validate().map_err(|e| usage(e.to_string()))?;
        }
        Ok(PointSettings {
            arch,
            train,
            threshold: get("th"),
        })
    }
}

/// Settings for one model fit. `arch.n` is filled in once the data is known.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSettings {
    pub arch: Architecture,
    pub train: TrainConfig,
    pub threshold: Option<f64>,
}
