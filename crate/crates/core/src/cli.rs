//! Command-line front end: argument model, run orchestration and report files.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::dataset::{read_csv, write_csv, TrajectoryDataset};
use crate::embed::{self, DiagnosticsReport, Embedding, Method};
use crate::error::{invalid_param, Error, ErrorKind, Result};
use crate::fmt_real;
use crate::graph::{build_skip_graph, subsample, NeighborhoodGraph};
use crate::metrics::{
    pairwise_distances, residual_variance_isomap, residual_variance_pca, trajectory_entropy, ResidualVariance,
};
use crate::synth::{self, Family, ProcessSpec};

pub const THREADS_ENV: &str = "TRAJ_MANIFOLD_THREADS";
pub const MANIFEST_FILE: &str = "run_manifest.txt";

/// Correlation-based residual variance is reported up to at least this many
/// dimensions (when the data allows).
const RESIDUAL_CURVE_DIMS: usize = 10;

const EXIT_CODES_HELP: &str = "Exit codes: 0 success, 2 bad arguments, 3 bad input, \
4 numerical degeneracy, 5 output write failure.\n\
Environment: TRAJ_MANIFOLD_THREADS caps worker threads (0 = automatic).";

#[derive(Debug, Parser)]
#[command(name = "traj-manifold", version, about = "Spectral embeddings for trajectory data", after_help = EXIT_CODES_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a dataset and write embedding and diagnostic reports.
    #[command(after_help = EXIT_CODES_HELP)]
    Run(RunArgs),
    /// Generate a synthetic trajectory dataset.
    #[command(after_help = EXIT_CODES_HELP)]
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Pca,
    Mds,
    Isomap,
    EntropyIsomap,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Pca => Method::Pca,
            MethodArg::Mds => Method::Mds,
            MethodArg::Isomap => Method::Isomap,
            MethodArg::EntropyIsomap => Method::EntropyIsomap,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Input CSV (columns traj, t, param:<name>..., f0..f{D-1}).
    #[arg(long, required_unless_present = "from_manifest")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "entropy-isomap")]
    pub method: MethodArg,
    /// Base neighborhood size.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Entropy threshold in bits.
    #[arg(long, default_value_t = 0.3)]
    pub entropy: f64,
    /// Maximum number of neighbors added beyond k.
    #[arg(long, default_value_t = 100)]
    pub max_extra: usize,
    /// Embedding dimension.
    #[arg(long, default_value_t = 3)]
    pub dims: usize,
    /// Skip this many nearest neighbors (isomap only).
    #[arg(long, default_value_t = 0)]
    pub skip: usize,
    /// Keep every stride-th point of each trajectory.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the neighborhood graph.
    #[arg(long)]
    pub dump_graph: bool,
    /// Re-run with the parameters recorded in a run manifest.
    #[arg(long, conflicts_with = "input")]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// swissroll, fan or interleaved [default: swissroll]
    #[arg(long)]
    pub family: Option<String>,
    /// Number of trajectories.
    #[arg(long = "T")]
    pub trajectories: Option<usize>,
    /// Points per trajectory.
    #[arg(long)]
    pub m: Option<usize>,
    /// Ambient dimension.
    #[arg(long = "D")]
    pub dim: Option<usize>,
    /// Gaussian noise standard deviation.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-trajectory latent parameter values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub params: Option<Vec<f64>>,
    /// Read the spec from a `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub method: Method,
    pub k: usize,
    pub entropy_threshold: f64,
    pub max_extra: usize,
    pub dims: usize,
    pub skip: usize,
    pub stride: usize,
    pub out_dir: PathBuf,
    pub dump_graph: bool,
    /// Worker thread cap; `None` reads the environment, `Some(0)` is automatic.
    pub threads: Option<usize>,
    /// Checksum the input must match, when re-running from a manifest.
    pub expected_checksum: Option<String>,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, method: Method, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            method,
            k: 8,
            entropy_threshold: 0.3,
            max_extra: 100,
            dims: 3,
            skip: 0,
            stride: 1,
            out_dir: out_dir.into(),
            dump_graph: false,
            threads: None,
            expected_checksum: None,
        }
    }

    pub fn from_args(args: &RunArgs) -> Result<Self> {
        if let Some(path) = &args.from_manifest {
            let text = fs::read_to_string(path).map_err(Error::Read)?;
            return Self::from_manifest(&text, &args.out);
        }
        let input = args.input.clone().ok_or_else(|| invalid_param("--input is required"))?;
        Ok(RunConfig {
            k: args.k,
            entropy_threshold: args.entropy,
            max_extra: args.max_extra,
            dims: args.dims,
            skip: args.skip,
            stride: args.stride,
            dump_graph: args.dump_graph,
            ..RunConfig::new(input, args.method.into(), &args.out)
        })
    }

    fn check(&self) -> Result<()> {
        if self.k < 1 {
            return Err(invalid_param("--k must be at least 1"));
        }
        if self.dims < 1 {
            return Err(invalid_param("--dims must be at least 1"));
        }
        if self.stride < 1 {
            return Err(invalid_param("--stride must be at least 1"));
        }
        if !self.entropy_threshold.is_finite() || self.entropy_threshold < 0.0 {
            return Err(invalid_param("--entropy must be finite and nonnegative"));
        }
        if self.skip > 0 && self.method != Method::Isomap {
            return Err(invalid_param("--skip applies to --method isomap only"));
        }
        if self.dump_graph && matches!(self.method, Method::Pca | Method::Mds) {
            return Err(invalid_param("--dump-graph needs a graph-based method"));
        }
        Ok(())
    }

    /// The manifest text: every resolved parameter plus the input checksum.
    pub fn to_manifest(&self, checksum: &str) -> String {
        format!(
            "input = {}\ninput_sha256 = {}\nmethod = {}\nk = {}\nentropy = {}\nmax_extra = {}\ndims = {}\nskip = {}\nstride = {}\ndump_graph = {}\n",
            self.input.display(),
            checksum,
            self.method,
            self.k,
            fmt_real(self.entropy_threshold),
            self.max_extra,
            self.dims,
            self.skip,
            self.stride,
            self.dump_graph
        )
    }

    pub fn from_manifest(text: &str, out_dir: &Path) -> Result<Self> {
        let mut cfg = RunConfig::new("", Method::EntropyIsomap, out_dir);
        let mut have_input = false;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, value) = line
                .split_once(" = ")
                .ok_or_else(|| invalid_param(format!("manifest line '{line}' is not key = value")))?;
            let bad = || invalid_param(format!("manifest has bad value for {key}: '{value}'"));
            match key {
                "input" => {
                    cfg.input = PathBuf::from(value);
                    have_input = true;
                }
                "input_sha256" => cfg.expected_checksum = Some(value.to_string()),
                "method" => {
                    cfg.method = match value {
                        "pca" => Method::Pca,
                        "mds" => Method::Mds,
                        "isomap" => Method::Isomap,
                        "entropy-isomap" => Method::EntropyIsomap,
                        _ => return Err(bad()),
                    }
                }
                "k" => cfg.k = value.parse().map_err(|_| bad())?,
                "entropy" => cfg.entropy_threshold = value.parse().map_err(|_| bad())?,
                "max_extra" => cfg.max_extra = value.parse().map_err(|_| bad())?,
                "dims" => cfg.dims = value.parse().map_err(|_| bad())?,
                "skip" => cfg.skip = value.parse().map_err(|_| bad())?,
                "stride" => cfg.stride = value.parse().map_err(|_| bad())?,
                "dump_graph" => cfg.dump_graph = value.parse().map_err(|_| bad())?,
                _ => return Err(invalid_param(format!("unknown manifest key '{key}'"))),
            }
        }
        if !have_input {
            return Err(invalid_param("manifest has no input"));
        }
        Ok(cfg)
    }
}

/// Headline numbers of a run, also written to `summary.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub lines: Vec<(String, String)>,
}

impl RunSummary {
    fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Parameter => 2,
        ErrorKind::Input => 3,
        ErrorKind::Degenerate => 4,
        ErrorKind::Output => 5,
    }
}

fn thread_cap(config: &RunConfig) -> Result<usize> {
    match config.threads {
        Some(t) => Ok(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| invalid_param(format!("{THREADS_ENV} must be an integer"))),
            Err(_) => Ok(0),
        },
    }
}

/// Executes a run and writes all output files into `config.out_dir`.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    config.check()?;
    let threads = thread_cap(config)?;
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| invalid_param(format!("cannot start thread pool: {e}")))?;
        pool.install(|| run_inner(config))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        run_inner(config)
    }
}

fn run_inner(config: &RunConfig) -> Result<RunSummary> {
    let bytes = fs::read(&config.input).map_err(Error::Read)?;
    let checksum = hex_digest(&bytes);
    if let Some(expected) = &config.expected_checksum {
        if *expected != checksum {
            return Err(Error::InvalidDataset(format!("input checksum {checksum} does not match manifest {expected}")));
        }
    }
    let full = read_csv(bytes.as_slice())?;
    let dataset = if config.stride > 1 { subsample(&full, config.stride)? } else { full };

    let out = Outputs::create(&config.out_dir)?;
    let mut summary = RunSummary { lines: Vec::new() };
    summary.push("method", config.method);
    summary.push("points", dataset.len());
    summary.push("features", dataset.dim());
    summary.push("trajectories", dataset.trajectory_count());

    let mut graph_parts: Option<(NeighborhoodGraph, Option<DiagnosticsReport>)> = None;
    let (embedding, residual) = match config.method {
        Method::Pca => {
            let (embedding, spectrum) = embed::pca(&dataset, config.dims)?;
            let rv = residual_variance_pca(&spectrum, spectrum.len())?;
            (embedding, (rv, "spectral"))
        }
        Method::Mds => {
            let distances = pairwise_distances(&dataset)?;
            let wide = curve_dims(config.dims, dataset.len());
            check_dims(config.dims, wide)?;
            let embedding = embed::classical_mds(&distances, wide)?;
            let rv = residual_variance_isomap(&distances, &embedding)?;
            summary.push("negative_mass_fraction", fmt_real(embedding.negative_mass_fraction()));
            (embedding.truncated(config.dims), (rv, "correlation"))
        }
        Method::Isomap | Method::EntropyIsomap => {
            let distances = pairwise_distances(&dataset)?;
            let graph = if config.method == Method::Isomap {
                build_skip_graph(&dataset, &distances, config.k, config.skip)?
            } else {
                crate::graph::build_entropy_graph(
                    &dataset,
                    &distances,
                    config.k,
                    config.entropy_threshold,
                    config.max_extra,
                )?
            };
            let report = if config.method == Method::EntropyIsomap {
                Some(DiagnosticsReport::from_graph(
                    &dataset,
                    &graph,
                    config.k,
                    config.max_extra,
                    config.entropy_threshold,
                )?)
            } else {
                None
            };
            let components = crate::graph::connected_components(&graph);
            let largest = components.iter().map(Vec::len).max().unwrap_or(0);
            let wide = curve_dims(config.dims, largest);
            check_dims(config.dims, wide)?;
            let ge = embed::embed_graph(graph, wide, config.method)?;
            let rv = residual_variance_isomap(&ge.geodesics, &ge.embedding)?;
            summary.push("embedded_points", ge.embedding.len());
            summary.push("excluded_points", ge.embedding.excluded_points().len());
            summary.push("connected_components", components.len());
            summary.push("negative_mass_fraction", fmt_real(ge.embedding.negative_mass_fraction()));
            let mean_entropy =
                (0..dataset.len()).map(|i| ge.graph.entropy_at_k(i).bits()).sum::<f64>() / dataset.len() as f64;
            summary.push("mean_entropy", fmt_real(mean_entropy));
            for t in 0..dataset.trajectory_count() {
                let h = trajectory_entropy(&dataset, &ge.graph, t)?;
                summary.push(&format!("trajectory_entropy.{}", dataset.trajectory_name(t)), fmt_real(h.bits()));
            }
            if let Some(r) = &report {
                summary.push("capped_points", r.capped_points.len());
                summary.push("cap_fraction", fmt_real(r.cap_fraction));
            }
            let embedding = ge.embedding.truncated(config.dims);
            graph_parts = Some((ge.graph, report));
            (embedding, (rv, "correlation"))
        }
    };

    out.write(MANIFEST_FILE, &config.to_manifest(&checksum))?;
    out.write("trajectories.csv", &trajectories_csv(&dataset))?;
    out.write("embedding.csv", &embedding_csv(&dataset, &embedding))?;
    out.write("spectrum.csv", &spectrum_csv(embedding.spectrum()))?;
    out.write("residual_variance.csv", &residual_csv(&residual.0, residual.1))?;
    out.write("excluded_points.csv", &excluded_csv(&dataset, embedding.excluded_points()))?;
    if let Some((graph, report)) = &graph_parts {
        if let Some(report) = report {
            out.write("chosen_k_hist.csv", &histogram_csv(report))?;
            out.write("entropy_vs_time.csv", &entropy_time_csv(&dataset, report))?;
            out.write("mixing.csv", &mixing_csv(&dataset, report))?;
        }
        if config.dump_graph {
            out.write("graph_edges.csv", &edges_csv(graph))?;
            out.write("graph_neighbors.csv", &neighbors_csv(graph))?;
        }
    }
    out.write("summary.txt", &summary.render())?;
    Ok(summary)
}

fn curve_dims(dims: usize, points: usize) -> usize {
    dims.max(RESIDUAL_CURVE_DIMS).min(points.saturating_sub(1)).max(dims.min(points.saturating_sub(1)))
}

fn check_dims(dims: usize, available: usize) -> Result<()> {
    if dims > available {
        return Err(Error::Degenerate(format!(
            "only {available} embedding dimensions are available, {dims} requested"
        )));
    }
    Ok(())
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

struct Outputs {
    dir: PathBuf,
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(Error::Write)?;
        Ok(Outputs { dir: dir.to_path_buf() })
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents).map_err(Error::Write)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn trajectories_csv(ds: &TrajectoryDataset) -> String {
    let mut s = String::from("id,name");
    for p in ds.param_names() {
        s.push_str(&format!(",{}", csv_field(&format!("param:{p}"))));
    }
    s.push('\n');
    for t in 0..ds.trajectory_count() {
        s.push_str(&format!("{t},{}", csv_field(ds.trajectory_name(t))));
        for &v in ds.trajectory_params(t) {
            s.push_str(&format!(",{}", fmt_real(v)));
        }
        s.push('\n');
    }
    s
}

fn embedding_csv(ds: &TrajectoryDataset, e: &Embedding) -> String {
    let mut s = String::from("point,traj,t");
    for c in 1..=e.dim() {
        s.push_str(&format!(",y{c}"));
    }
    s.push('\n');
    for (r, &i) in e.point_indices().iter().enumerate() {
        s.push_str(&format!("{i},{},{}", csv_field(ds.trajectory_name(ds.trajectory_of(i))), fmt_real(ds.time_of(i))));
        for &v in e.coords().row(r) {
            s.push_str(&format!(",{}", fmt_real(v)));
        }
        s.push('\n');
    }
    s
}

fn spectrum_csv(spectrum: &[f64]) -> String {
    let mut s = String::from("index,eigenvalue\n");
    for (i, v) in spectrum.iter().enumerate() {
        s.push_str(&format!("{},{}\n", i + 1, fmt_real(*v)));
    }
    s
}

fn residual_csv(rv: &ResidualVariance, measure: &str) -> String {
    let mut s = String::from("d,measure,residual_variance\n");
    for (d, r) in &rv.per_dimension {
        s.push_str(&format!("{d},{measure},{}\n", fmt_real(*r)));
    }
    s
}

fn excluded_csv(ds: &TrajectoryDataset, excluded: &[usize]) -> String {
    let mut s = String::from("point,traj,t\n");
    for &i in excluded {
        s.push_str(&format!(
            "{i},{},{}\n",
            csv_field(ds.trajectory_name(ds.trajectory_of(i))),
            fmt_real(ds.time_of(i))
        ));
    }
    s
}

fn histogram_csv(r: &DiagnosticsReport) -> String {
    let mut s = String::from("k,count\n");
    for (k, c) in &r.chosen_k_histogram {
        s.push_str(&format!("{k},{c}\n"));
    }
    s
}

fn entropy_time_csv(ds: &TrajectoryDataset, r: &DiagnosticsReport) -> String {
    let capped: std::collections::HashSet<usize> = r.capped_points.iter().copied().collect();
    let mut s = String::from("point,traj,time_index,t,entropy,chosen_k,capped\n");
    for series in &r.entropy_vs_time {
        let name = csv_field(ds.trajectory_name(series.trajectory));
        for &(i, t, h, k) in &series.points {
            s.push_str(&format!(
                "{i},{name},{},{},{},{k},{}\n",
                ds.time_index_of(i),
                fmt_real(t),
                fmt_real(h),
                capped.contains(&i)
            ));
        }
    }
    s
}

fn mixing_csv(ds: &TrajectoryDataset, r: &DiagnosticsReport) -> String {
    let mut s = String::from("traj");
    for name in ds.trajectory_names() {
        s.push_str(&format!(",{}", csv_field(name)));
    }
    s.push('\n');
    for (t, row) in r.mixing.counts.iter().enumerate() {
        s.push_str(&csv_field(ds.trajectory_name(t)));
        for c in row {
            s.push_str(&format!(",{c}"));
        }
        s.push('\n');
    }
    s
}

fn edges_csv(g: &NeighborhoodGraph) -> String {
    let mut s = String::from("a,b,weight\n");
    for e in g.symmetrized_edges() {
        s.push_str(&format!("{},{},{}\n", e.a, e.b, fmt_real(e.weight)));
    }
    s
}

fn neighbors_csv(g: &NeighborhoodGraph) -> String {
    let mut s = String::from("point,rank,neighbor,distance\n");
    for i in 0..g.len() {
        for (rank, nb) in g.neighbors(i).iter().enumerate() {
            s.push_str(&format!("{i},{},{},{}\n", rank + 1, nb.index, fmt_real(nb.distance)));
        }
    }
    s
}

impl GenArgs {
    pub fn to_spec(&self) -> Result<ProcessSpec> {
        let family: Option<Family> = self.family.as_deref().map(str::parse).transpose()?;
        let mut spec = match &self.config {
            Some(path) => ProcessSpec::from_config_str(&fs::read_to_string(path).map_err(Error::Read)?)?,
            None => {
                let family = family.unwrap_or(Family::SwissRollTrajectories);
                let t = if family == Family::InterleavedPair { 2 } else { 6 };
                ProcessSpec::new(family, t, 100)
            }
        };
        if let Some(family) = family {
            spec.family = family;
        }
        if let Some(t) = self.trajectories {
            spec.trajectories = t;
        }
        if let Some(m) = self.m {
            spec.points_per_trajectory = m;
        }
        if let Some(d) = self.dim {
            spec.ambient_dim = d;
        }
        if let Some(noise) = self.noise {
            spec.noise_sigma = noise;
        }
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(p) = &self.params {
            spec.params = Some(p.clone());
        }
        Ok(spec)
    }
}

/// Generates a dataset and writes it as CSV.
pub fn gen(args: &GenArgs) -> Result<TrajectoryDataset> {
    let spec = args.to_spec()?;
    let dataset = synth::generate(&spec)?;
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(Error::Write)?;
            let mut w = std::io::BufWriter::new(file);
            write_csv(&dataset, &mut w)?;
            w.flush().map_err(Error::Write)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_csv(&dataset, stdout.lock())?;
        }
    }
    Ok(dataset)
}

/// Parses arguments, dispatches, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => RunConfig::from_args(args).and_then(|cfg| run(&cfg)).map(|summary| {
            print!("{}", summary.render());
        }),
        Command::Gen(args) => gen(args).map(|_| ()),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
