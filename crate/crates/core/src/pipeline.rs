//! The command-line stages as library calls.
//!
//! Every stage reads its inputs from and writes its outputs to the run's
//! output directory through temp-file-and-rename, so a failed stage leaves
//! no partial files and a rerun with the same configuration reproduces its
//! outputs byte for byte.
//!
//! | stage | reads | writes |
//! |---|---|---|
//! | ingest | trip CSVs | `demand.scst`, `ingest_report.csv` |
//! | build-graph | `demand.scst` | `graph-<kind>.scst` |
//! | train | `demand.scst` | `model-<model>.scst`, `train-<model>.csv` |
//! | grid | `demand.scst` | `grid-<model>.csv` plus the winner as `train` does |
//! | evaluate | `demand.scst`, every `model-*.scst` | `metrics.csv` |
//! | analyze | `demand.scst`, `model-<ddgf model>.scst` | five `analysis-*` files |
//! | export | any `.scst` | `export/<stem>/` plain files |

use std::cell::RefCell;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use log::{info, warn};

use crate::analysis::{
    detect_communities, edge_profiles, gexf_document, normalize_ddgf, profiles_csv, rank_table_csv, threshold_edges,
    top_k, vertex_csv, weighted_degree, Bins, CommunityPartition, LouvainOptions, WeightedGraph,
};
use crate::autodiff::Matrix;
use crate::config::{PointSettings, RunConfig};
use crate::container::{write_atomic, Container, Section};
use crate::error::{Error, Result};
use crate::graph::{
    build_atd_matrix, build_dc_matrix, build_de_matrix, build_sd_matrix, normalize, threshold, GraphFilter, MatrixKind,
    PairwiseMatrix, StationMeta,
};
use crate::ingest::{
    aggregate_hourly, filter_stations, od_totals, parse_timestamp, parse_trips, prepare_windows, split, DatasetSplit,
    DemandSeries, ParseOptions, ParseTally, TripRecord,
};
use crate::models::ModelKind;
use crate::training::{
    evaluate_dataset, fit_model, grid_search, load_checkpoint, save_checkpoint, Checkpoint, Fit, Metrics, GRID_ORDER,
};

pub const DEMAND_FILE: &str = "demand.scst";
pub const METRICS_FILE: &str = "metrics.csv";
pub const ANALYSIS_FILES: [&str; 5] = [
    "analysis-vertices.csv",
    "analysis-communities.csv",
    "analysis-ranks.csv",
    "analysis-profiles.csv",
    "analysis-ddgf.gexf",
];

pub fn graph_file(kind: MatrixKind) -> String {
    format!("graph-{}.scst", kind.code())
}

pub fn model_file(kind: ModelKind) -> String {
    format!("model-{kind}.scst")
}

fn missing(path: &Path, what: &str) -> Error {
    Error::Usage(format!(
        "{what} {} does not exist; run the earlier stage first",
        path.display()
    ))
}

fn read_container(path: &Path, what: &str) -> Result<Container> {
    if !path.exists() {
        return Err(missing(path, what));
    }
    Container::read(path)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))
}

/// Trips from every file in order, parsed lazily. The first fatal error is
/// parked in `error` and ends the stream.
fn stream_trips<'a>(
    paths: &'a [PathBuf],
    options: ParseOptions,
    error: &'a RefCell<Option<Error>>,
    tally: &'a RefCell<ParseTally>,
) -> impl Iterator<Item = TripRecord> + 'a {
    paths.iter().flat_map(move |path| {
        let reader = if error.borrow().is_some() {
            None
        } else {
            match File::open(path)
                .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
                .and_then(|f| parse_trips(BufReader::new(f), options))
            {
                Ok(r) => Some(r),
                Err(e) => {
                    *error.borrow_mut() = Some(e);
                    None
                }
            }
        };
        let mut reader = reader;
        std::iter::from_fn(move || {
            let r = reader.as_mut()?;
            match r.next() {
                Some(Ok(t)) => Some(t),
                Some(Err(e)) => {
                    *error.borrow_mut() = Some(e);
                    reader = None;
                    None
                }
                None => {
                    tally.borrow_mut().merge(r.tally());
                    reader = None;
                    None
                }
            }
        })
    })
}

/// Runs one streaming pass and surfaces any parse failure.
fn with_trips<T>(
    cfg: &RunConfig,
    pass: impl FnOnce(&mut dyn Iterator<Item = TripRecord>) -> T,
) -> Result<(T, ParseTally)> {
    let error = RefCell::new(None);
    let tally = RefCell::new(ParseTally::default());
    let options = ParseOptions { strict: cfg.strict };
    let out = pass(&mut stream_trips(&cfg.trips, options, &error, &tally));
    if let Some(e) = error.into_inner() {
        return Err(e);
    }
    Ok((out, tally.into_inner()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IngestReport {
    pub files: usize,
    pub rows_accepted: u64,
    pub rows_skipped: u64,
    pub stations_kept: usize,
    pub hours: usize,
    pub trips_counted: u64,
    pub trips_outside_window: u64,
    pub trips_other_station: u64,
}

impl IngestReport {
    pub fn to_csv(&self) -> String {
        format!(
            "key,value\nfiles,{}\nrows_accepted,{}\nrows_skipped,{}\nstations_kept,{}\nhours,{}\ntrips_counted,{}\ntrips_outside_window,{}\ntrips_other_station,{}\n",
            self.files,
            self.rows_accepted,
            self.rows_skipped,
            self.stations_kept,
            self.hours,
            self.trips_counted,
            self.trips_outside_window,
            self.trips_other_station
        )
    }
}

/// Demand counts with the origin–destination tallies the graph builders need.
#[derive(Clone, Debug)]
pub struct DemandArtifact {
    pub series: DemandSeries,
    pub split: DatasetSplit,
    /// Directed trip counts over the training hours.
    pub od: Matrix,
    /// Directed summed trip durations (seconds) over the training hours.
    pub ttd: Matrix,
}

impl DemandArtifact {
    pub fn to_container(&self, config: &str) -> Container {
        let mut c = Container::new();
        c.push_text("config", config)
            .push_text("t0", self.series.t0.format("%Y-%m-%d %H:%M:%S").to_string())
            .push_text(
                "split",
                format!(
                    "{}, {}, {}",
                    self.split.train.len(),
                    self.split.validation.len(),
                    self.split.test.len()
                ),
            )
            .push_stations("stations", self.series.stations.clone())
            .push_matrix("demand", self.series.to_matrix())
            .push_matrix("od", self.od.clone())
            .push_matrix("ttd", self.ttd.clone());
        c
    }

    pub fn from_container(c: &Container) -> Result<Self> {
        let t0 =
            parse_timestamp(c.text("t0")?).ok_or_else(|| Error::Container("demand container has a bad `t0`".into()))?;
        let sizes: Vec<usize> = c
            .text("split")?
            .split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| Error::Container("bad `split` section".into()))
            })
            .collect::<Result<_>>()?;
        let [a, b, d] = sizes[..] else {
            return Err(Error::Container("`split` needs three sizes".into()));
        };
        let series = DemandSeries::from_matrix(c.stations("stations")?.to_vec(), t0, c.matrix("demand")?)?;
        Ok(Self {
            split: split(&series, a, b, d)?,
            series,
            od: c.matrix("od")?.clone(),
            ttd: c.matrix("ttd")?.clone(),
        })
    }

    pub fn station_ids(&self) -> Vec<String> {
        self.series.stations.iter().map(|s| s.station_id.clone()).collect()
    }

    /// Any of the four pairwise matrices. Demand correlation uses the training hours.
    pub fn pairwise(&self, kind: MatrixKind) -> Result<PairwiseMatrix> {
        let ids = self.station_ids();
        match kind {
            MatrixKind::SpatialDistance => build_sd_matrix(&self.series.stations),
            MatrixKind::Demand => build_de_matrix(&self.od, &ids),
            MatrixKind::AverageTripDuration => build_atd_matrix(&self.ttd, &build_de_matrix(&self.od, &ids)?),
            MatrixKind::DemandCorrelation => {
                let train = self.series.slice_hours(self.split.train.clone()).to_matrix();
                Ok(build_dc_matrix(&train, &ids)?.0)
            }
        }
    }
}

pub fn load_demand(cfg: &RunConfig) -> Result<DemandArtifact> {
    DemandArtifact::from_container(&read_container(&cfg.out.join(DEMAND_FILE), "demand container")?)
}

/// Parses, filters and aggregates the trip files into `demand.scst`.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestReport> {
    if cfg.trips.is_empty() {
        return Err(Error::Usage("config lists no `trips` files".into()));
    }
    for p in &cfg.trips {
        if !p.is_file() {
            return Err(missing(p, "trip file"));
        }
    }
    let window = cfg.window()?;
    let (stations, tally) = with_trips(cfg, |trips| filter_stations(trips, &window, cfg.station_filter()))?;
    let stations = stations?;
    info!("{} stations pass the filter rules", stations.len());
    let (aggregated, _) = with_trips(cfg, |trips| aggregate_hourly(trips, &stations, &window))?;
    let (series, agg) = aggregated?;
    let split = split(&series, cfg.n_train, cfg.n_val, cfg.n_test)?;
    let ((od, ttd), _) = with_trips(cfg, |trips| od_totals(trips, &stations, &window, split.train.clone()))?;
    let report = IngestReport {
        files: cfg.trips.len(),
        rows_accepted: tally.accepted,
        rows_skipped: tally.skipped,
        stations_kept: stations.len(),
        hours: series.n_hours(),
        trips_counted: agg.counted,
        trips_outside_window: agg.outside_window,
        trips_other_station: agg.other_station,
    };
    if report.rows_skipped > 0 {
        warn!("skipped {} malformed trip rows", report.rows_skipped);
    }
    let artifact = DemandArtifact { series, split, od, ttd };
    ensure_dir(&cfg.out)?;
    let mut c = artifact.to_container(&cfg.to_text());
    c.push_text("report", report.to_csv());
    c.write(&cfg.out.join(DEMAND_FILE))?;
    write_text(&cfg.out.join("ingest_report.csv"), &report.to_csv())?;
    Ok(report)
}

/// Checks that `kappa` makes sense for `kind`.
fn check_threshold(kind: MatrixKind, kappa: f64) -> Result<()> {
    let ok = match kind {
        MatrixKind::DemandCorrelation => (-1.0..=1.0).contains(&kappa),
        _ => kappa >= 0.0 && kappa.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "threshold {kappa} is out of range for the {kind} matrix"
        )))
    }
}

/// Pairwise matrix, binary adjacency and normalized filter for one graph kind.
pub fn graph_filter(
    demand: &DemandArtifact,
    kind: MatrixKind,
    kappa: f64,
) -> Result<(PairwiseMatrix, GraphFilter, usize)> {
    check_threshold(kind, kappa)?;
    let pairwise = demand.pairwise(kind)?;
    let adj = threshold(&pairwise, kappa)?;
    let edges = adj.edge_count();
    Ok((pairwise, normalize(&adj), edges))
}

/// Writes `graph-<kind>.scst` for the configured fixed-graph model.
pub fn cmd_build_graph(cfg: &RunConfig) -> Result<PathBuf> {
    let model = cfg.validate_model()?;
    let kind = model
        .graph_kind()
        .ok_or_else(|| Error::Usage(format!("model `{model}` does not use a pre-defined graph")))?;
    let point = cfg.single_point()?;
    let kappa = cfg
        .point_settings(model, &point)?
        .threshold
        .expect("graph models read `th`");
    let demand = load_demand(cfg)?;
    let (pairwise, filter, edges) = graph_filter(&demand, kind, kappa)?;
    let adj = threshold(&pairwise, kappa)?;
    info!("{kind} graph at threshold {kappa}: {edges} edges");
    let mut c = Container::new();
    c.push_text("config", cfg.to_text())
        .push_text("kind", kind.code())
        .push_text("threshold", format!("{kappa:?}"))
        .push_stations("stations", demand.series.stations.clone())
        .push_matrix("pairwise", pairwise.values)
        .push_matrix("adjacency", adj.entries)
        .push_matrix("filter", filter.matrix);
    let path = cfg.out.join(graph_file(kind));
    c.write(&path)?;
    Ok(path)
}

/// A fitted model plus what is needed to save it.
#[derive(Clone, Debug)]
pub struct Trained {
    pub settings: PointSettings,
    pub fit: Fit,
    pub checkpoint: Checkpoint,
}

/// Fits one grid point on the demand artifact.
pub fn fit_point(
    cfg: &RunConfig,
    demand: &DemandArtifact,
    kind: ModelKind,
    mut settings: PointSettings,
    seed: u64,
) -> Result<Trained> {
    settings.arch.n = demand.series.n_stations();
    settings.train.seed = seed;
    let filter = match kind.graph_kind() {
        Some(g) => Some(graph_filter(demand, g, settings.threshold.expect("graph models read `th`"))?.1),
        None => None,
    };
    let data = prepare_windows(&demand.series, &demand.split, settings.arch.window)?;
    let fit = fit_model(
        &settings.arch,
        filter.as_ref(),
        &data.train,
        &data.validation,
        &data.scaler,
        &settings.train,
    )?;
    let checkpoint = Checkpoint {
        architecture: settings.arch.clone(),
        model: fit.model.clone(),
        scaler: data.scaler,
        stations: demand.series.stations.clone(),
        seed,
        config: cfg.to_text(),
    };
    Ok(Trained {
        settings,
        fit,
        checkpoint,
    })
}

fn reports_csv(fit: &Fit) -> String {
    let mut out = String::from("run,epoch,train_loss,val_rmse,best\n");
    for (r, report) in fit.reports.iter().enumerate() {
        for line in report.to_csv().lines().skip(1) {
            let _ = writeln!(out, "{r},{line}");
        }
    }
    out
}

fn save_trained(cfg: &RunConfig, kind: ModelKind, t: &Trained) -> Result<PathBuf> {
    ensure_dir(&cfg.out)?;
    let path = cfg.out.join(model_file(kind));
    save_checkpoint(&t.checkpoint).write(&path)?;
    write_text(&cfg.out.join(format!("train-{kind}.csv")), &reports_csv(&t.fit))?;
    Ok(path)
}

/// Trains the configured model at its single hyperparameter point.
pub fn cmd_train(cfg: &RunConfig) -> Result<Trained> {
    let kind = cfg.validate_model()?;
    let settings = cfg.point_settings(kind, &cfg.single_point()?)?;
    let demand = load_demand(cfg)?;
    let trained = fit_point(cfg, &demand, kind, settings, cfg.seed)?;
    info!("{kind}: validation RMSE {}", trained.fit.val_rmse);
    save_trained(cfg, kind, &trained)?;
    Ok(trained)
}

/// Ranked grid table; the winner is saved like a `train` result.
pub fn cmd_grid(cfg: &RunConfig, jobs: usize) -> Result<String> {
    let kind = cfg.validate_model()?;
    let spec = cfg.grid()?;
    let demand = load_demand(cfg)?;
    let points = spec.expand();
    info!(
        "{kind}: {} grid points",
        points.len().min(cfg.grid_budget.unwrap_or(usize::MAX))
    );
    let outcome = grid_search(&points, cfg.grid_budget, cfg.seed, jobs, |_, point, seed| {
        let settings = cfg.point_settings(kind, point)?;
        let t = fit_point(cfg, &demand, kind, settings, seed)?;
        Ok((t.fit.val_rmse, t))
    })?;
    let names: Vec<&str> = GRID_ORDER.iter().copied().filter(|n| spec.get(n).is_some()).collect();
    let mut table = format!("rank,index,{},seed,val_rmse,error\n", names.join(","));
    for (rank, run) in outcome.ranked.iter().enumerate() {
        let values: Vec<String> = run.point.iter().map(|(_, v)| v.to_string()).collect();
        let (rmse, err) = match &run.outcome {
            Ok((v, _)) => (v.to_string(), String::new()),
            Err(e) => (String::new(), crate::analysis::csv_field(e)),
        };
        let _ = writeln!(
            table,
            "{},{},{},{},{rmse},{err}",
            rank + 1,
            run.index,
            values.join(","),
            run.seed
        );
    }
    let (best, _) = outcome.into_best();
    let (_, trained) = best.outcome.expect("ranked first is a success");
    save_trained(cfg, kind, &trained)?;
    write_text(&cfg.out.join(format!("grid-{kind}.csv")), &table)?;
    Ok(table)
}

/// Test-split metrics in original units, floored at zero when `clip_negative` is set.
pub fn evaluate_checkpoint(ck: &Checkpoint, demand: &DemandArtifact, clip_negative: bool) -> Result<Metrics> {
    if ck.stations != demand.series.stations {
        return Err(Error::Validation(
            "checkpoint stations differ from the demand container".into(),
        ));
    }
    let data = prepare_windows(&demand.series, &demand.split, ck.architecture.window)?;
    let mut pred = ck.model.predict_raw(&data.test, &ck.scaler)?;
    if clip_negative {
        pred = pred.map(|v| v.max(0.0));
    }
    evaluate_dataset(&pred, &data.test)
}

/// One metrics row per saved model, in model-kind order.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<String> {
    let demand = load_demand(cfg)?;
    let mut out = format!("model,{}\n", Metrics::CSV_HEADER);
    let mut any = false;
    for kind in ModelKind::ALL {
        let path = cfg.out.join(model_file(kind));
        if !path.exists() {
            continue;
        }
        any = true;
        let ck = load_checkpoint(&Container::read(&path)?)?;
        let m = evaluate_checkpoint(&ck, &demand, cfg.clip_negative)?;
        let _ = writeln!(out, "{kind},{}", m.csv_fields());
    }
    if !any {
        return Err(Error::Usage(format!(
            "no model-*.scst checkpoints in {}",
            cfg.out.display()
        )));
    }
    write_text(&cfg.out.join(METRICS_FILE), &out)?;
    Ok(out)
}

/// The five analysis outputs for a learned filter, as `(file name, contents)`.
pub fn analyze_filter(
    filter: &Matrix,
    stations: &[StationMeta],
    demand: &DemandArtifact,
    cfg: &RunConfig,
) -> Result<Vec<(&'static str, String)>> {
    let full = normalize_ddgf(filter, stations.to_vec())?;
    let g = threshold_edges(&full, cfg.tau);
    let partition = detect_communities(
        &g.weights,
        LouvainOptions {
            seed: cfg.seed,
            ..Default::default()
        },
    )?;
    info!(
        "{} edges kept at τ = {}; {} communities, Q = {}",
        g.edges().len(),
        cfg.tau,
        partition.count(),
        partition.modularity
    );
    let sd = demand.pairwise(MatrixKind::SpatialDistance)?;
    let de = demand.pairwise(MatrixKind::Demand)?;
    let dc = demand.pairwise(MatrixKind::DemandCorrelation)?;

    let wd = weighted_degree(&g);
    let focus = top_k(&wd, cfg.rank_stations.min(g.n()));
    let ranks = rank_table_csv(&g, &focus, cfg.rank_depth, &[("de", &de.values), ("dc", &dc.values)]);

    let de_max = de.values.max_value().max(1.0);
    let sd_bins = Bins::uniform(0.0, cfg.distance_bin, cfg.distance_bins.max(1))?;
    let de_bins = Bins::uniform(0.0, de_max / 10.0, 10)?;
    let dc_bins = Bins::uniform(-1.0, 0.1, 20)?;
    let profiles = profiles_csv(&[
        ("sd", &edge_profiles(&g, &partition, &sd, &sd_bins)?),
        ("de", &edge_profiles(&g, &partition, &de, &de_bins)?),
        ("dc", &edge_profiles(&g, &partition, &dc, &dc_bins)?),
    ]);

    Ok(vec![
        (ANALYSIS_FILES[0], vertex_csv(&g, &partition)?),
        (ANALYSIS_FILES[1], communities_csv(&g, &partition, &demand.series)),
        (ANALYSIS_FILES[2], ranks),
        (ANALYSIS_FILES[3], profiles),
        (ANALYSIS_FILES[4], gexf_document(&g, &partition)?),
    ])
}

/// `community,size,internal_weight,total_demand,station_ids` with ids `;`-joined.
fn communities_csv(g: &WeightedGraph, p: &CommunityPartition, series: &DemandSeries) -> String {
    let mut out = format!(
        "# modularity {}\ncommunity,size,internal_weight,total_demand,station_ids\n",
        p.modularity
    );
    for c in 0..p.count() {
        let members = p.members(c);
        let internal: f64 = 0.0
            + g.edges()
                .iter()
                .filter(|(i, j, _)| p.assignment[*i] == c && p.assignment[*j] == c)
                .map(|e| e.2)
                .sum::<f64>();
        let demand: u64 = members
            .iter()
            .map(|&i| series.station_row(i).iter().map(|&v| v as u64).sum::<u64>())
            .sum();
        let ids: Vec<&str> = members.iter().map(|&i| g.stations[i].station_id.as_str()).collect();
        let _ = writeln!(
            out,
            "{c},{},{internal},{demand},{}",
            members.len(),
            crate::analysis::csv_field(&ids.join(";"))
        );
    }
    out
}

/// Analyses the learned filter of the configured DDGF model.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let kind = cfg.model_kind()?;
    if !matches!(kind, ModelKind::GcnnRegDdgf | ModelKind::GcnnRecDdgf) {
        return Err(Error::Usage(format!("analyze needs a DDGF model, not `{kind}`")));
    }
    if !(0.0..=1.0).contains(&cfg.tau) {
        return Err(Error::Usage(format!("`tau` must lie in [0, 1], got {}", cfg.tau)));
    }
    let demand = load_demand(cfg)?;
    let ck = load_checkpoint(&read_container(&cfg.out.join(model_file(kind)), "checkpoint")?)?;
    let filter = ck
        .model
        .learned_filter()
        .ok_or_else(|| Error::Contract("checkpoint has no learned filter".into()))?;
    let files = analyze_filter(&filter, &ck.stations, &demand, cfg)?;
    let mut paths = Vec::new();
    for (name, text) in files {
        let p = cfg.out.join(name);
        write_text(&p, &text)?;
        paths.push(p);
    }
    Ok(paths)
}

fn matrix_csv(m: &Matrix) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn stations_csv(list: &[StationMeta]) -> String {
    let mut s = String::from("station_id,name,lat,lon\n");
    for st in list {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            crate::analysis::csv_field(&st.station_id),
            crate::analysis::csv_field(&st.name),
            st.latitude,
            st.longitude
        );
    }
    s
}

/// Writes every section of each container as a plain file under
/// `out/export/<stem>/`: matrices and station tables as CSV, text as `.txt`.
/// With no explicit paths, exports every `.scst` file in the output directory.
pub fn cmd_export(cfg: &RunConfig, artifacts: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut inputs = artifacts.to_vec();
    if inputs.is_empty() {
        if !cfg.out.is_dir() {
            return Err(missing(&cfg.out, "output directory"));
        }
        for entry in std::fs::read_dir(&cfg.out)? {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e == "scst") {
                inputs.push(p);
            }
        }
        inputs.sort();
        if inputs.is_empty() {
            return Err(Error::Usage(format!("no .scst artifacts in {}", cfg.out.display())));
        }
    }
    let mut written = Vec::new();
    for input in &inputs {
        let c = read_container(input, "artifact")?;
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("artifact");
        let dir = cfg.out.join("export").join(stem);
        ensure_dir(&dir)?;
        for (name, section) in c.sections() {
            let safe = name.replace(['/', '\\'], "__");
            let (file, text) = match section {
                Section::Matrix(m) => (format!("{safe}.csv"), matrix_csv(m)),
                Section::Text(t) => (format!("{safe}.txt"), t.clone()),
                Section::Stations(s) => (format!("{safe}.csv"), stations_csv(s)),
            };
            let p = dir.join(file);
            write_text(&p, &text)?;
            written.push(p);
        }
    }
    Ok(written)
}
