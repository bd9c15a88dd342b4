//! Command-line front end. Every flag may also come from a `--config` file
//! (`key = value`, keys named like the long flags); the command line wins.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use substat_core::experiments::{Process, Target};
use substat_core::simulate::DEFAULT_RATE;
use substat_core::{
    fit_theta_with, select_bandwidth, simulate_poisson_beta, simulate_thomas, Bandwidth, FitConfig,
    IntensityEstimator, PoissonBetaModel, RngStream, Subspace, ThomasModel, Window,
};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::grid::{export_svg, intensity_grid, write_grid};
use crate::pipeline::{run_application_pipeline, write_report, ApplyOptions};
use crate::points::{ingest_csv, read_pattern, write_pattern, Ingested, RegionSpec};
use crate::runner::{parse_criterion, plan_from_config, run_experiment, write_result, RayonExecutor};

#[derive(Debug, Parser)]
#[command(name = "substat", version, about = "Intensity estimation for point patterns invariant along a direction")]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key = value` file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a Poisson or Thomas pattern and write it as CSV.
    Simulate(SimulateArgs),
    /// Evaluate an intensity estimate on a grid.
    EstimateIntensity(EstimateArgs),
    /// Estimate the invariance direction for one or more bandwidths.
    FitSubspace(FitArgs),
    /// Choose a bandwidth by leave-one-out likelihood.
    SelectBandwidth(BandwidthArgs),
    /// Run a Monte Carlo table.
    Experiment(ExperimentArgs),
    /// Keep the points inside a rectangle and shift them to the origin.
    Ingest(IngestArgs),
    /// Direction fits and likelihood gains over several bandwidths.
    Apply(ApplyArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Point CSV with `x,y` header.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Study rectangle `x_min,x_max,y_min,y_max`; without it the file's
    /// `# window` line is used.
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
}

#[derive(Debug, Args)]
struct ThetaArgs {
    /// Direction in radians.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "theta_deg")]
    theta: Option<f64>,
    /// Direction in degrees.
    #[arg(long, allow_hyphen_values = true)]
    theta_deg: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// poisson or thomas
    #[arg(long)]
    process: Option<String>,
    /// Beta shape of the height profile.
    #[arg(long)]
    a: Option<f64>,
    /// Window width.
    #[arg(long)]
    z: Option<f64>,
    /// Window height.
    #[arg(long)]
    omega: Option<f64>,
    /// Expected points per unit width.
    #[arg(long)]
    rate: Option<f64>,
    /// Mean offspring per parent.
    #[arg(long)]
    gamma: Option<f64>,
    /// Offspring displacement standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    /// Extra width on each side of the window where parents may fall.
    #[arg(long)]
    parent_buffer: Option<f64>,
    /// Stream index under the master seed.
    #[arg(long)]
    replication: Option<u64>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// substationary, kernel-2d or stationary
    #[arg(long)]
    estimator: Option<String>,
    #[command(flatten)]
    theta: ThetaArgs,
    #[arg(long)]
    h: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    resolution: Option<usize>,
    /// Also render the grid as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitOptions {
    /// Coarse search angles over the half turn.
    #[arg(long)]
    grid_points: Option<usize>,
    /// leave-one-out or plug-in
    #[arg(long)]
    criterion: Option<String>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Bandwidths, comma separated.
    #[arg(long, value_delimiter = ',')]
    h: Option<Vec<f64>>,
    #[command(flatten)]
    fit: FitOptions,
    /// Write the coarse search trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BandwidthArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    theta: ThetaArgs,
    /// Candidate bandwidths, comma separated.
    #[arg(long, value_delimiter = ',')]
    candidates: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// table1 or table2
    target: String,
    #[arg(long)]
    replications: Option<usize>,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
}

#[derive(Debug, Args)]
struct ApplyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Bandwidths, comma separated.
    #[arg(long, value_delimiter = ',')]
    h: Option<Vec<f64>>,
    /// Gains below this count as ignorable.
    #[arg(long)]
    threshold: Option<f64>,
    #[command(flatten)]
    fit: FitOptions,
    /// Directory for the horizontal-direction grids, one file per bandwidth.
    #[arg(long)]
    grid_dir: Option<PathBuf>,
    /// Grid points for the exported estimates.
    #[arg(long)]
    resolution: Option<usize>,
}

struct Ctx {
    cfg: Config,
    seed: u64,
    threads: usize,
    out: Option<PathBuf>,
}

impl Ctx {
    fn writer(&self) -> Result<Box<dyn Write>> {
        match &self.out {
            Some(p) => Ok(Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?))),
            None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        }
    }

    fn emit(&self, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
        let path = self.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
        let mut w = self.writer()?;
        f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }

    fn required<T: std::str::FromStr>(&self, cli: Option<T>, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.cfg.pick(cli, key)?.ok_or_else(|| Error::Usage(format!("missing --{key}")))
    }

    fn pattern(&self, input: InputArgs) -> Result<Ingested> {
        let path: PathBuf = self.required(input.input, "input")?;
        let region = self.cfg.pick(input.region, "region")?.map(|r| r.parse::<RegionSpec>()).transpose()?;
        read_pattern(path, region.as_ref())
    }

    fn theta(&self, t: ThetaArgs) -> Result<Option<Subspace>> {
        match (t.theta, t.theta_deg) {
            (Some(r), _) => return Ok(Some(Subspace::new(r))),
            (_, Some(d)) => return Ok(Some(Subspace::from_degrees(d))),
            _ => {}
        }
        if let Some(r) = self.cfg.get("theta")? {
            return Ok(Some(Subspace::new(r)));
        }
        Ok(self.cfg.get("theta-deg")?.map(Subspace::from_degrees))
    }

    fn fit_config(&self, f: FitOptions) -> Result<FitConfig> {
        let mut cfg = FitConfig::default();
        if let Some(n) = self.cfg.pick(f.grid_points, "grid-points")? {
            cfg.grid_points = n;
        }
        if let Some(c) = self.cfg.pick(f.criterion, "criterion")? {
            cfg.criterion = parse_criterion(&c)?;
        }
        Ok(cfg)
    }

    fn bandwidths(&self, cli: Option<Vec<f64>>, key: &str) -> Result<Vec<Bandwidth>> {
        let hs = self.cfg.pick_list(cli, key)?.ok_or_else(|| Error::Usage(format!("missing --{key}")))?;
        Ok(hs.into_iter().map(Bandwidth::new).collect::<std::result::Result<_, _>>()?)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let ctx = Ctx {
        seed: cfg.pick(cli.seed, "seed")?.unwrap_or(0),
        threads: cfg.pick(cli.threads, "threads")?.unwrap_or(0),
        out: cfg.pick(cli.out, "out")?,
        cfg,
    };
    match cli.command {
        Command::Simulate(a) => simulate(&ctx, a),
        Command::EstimateIntensity(a) => estimate(&ctx, a),
        Command::FitSubspace(a) => fit(&ctx, a),
        Command::SelectBandwidth(a) => bandwidth(&ctx, a),
        Command::Experiment(a) => experiment(&ctx, a),
        Command::Ingest(a) => ingest(&ctx, a),
        Command::Apply(a) => apply(&ctx, a),
    }
}

fn simulate(ctx: &Ctx, a: SimulateArgs) -> Result<()> {
    let c = &ctx.cfg;
    let process: Process = c.pick(a.process, "process")?.unwrap_or_else(|| "poisson".into()).parse()?;
    let shape: f64 = ctx.required(a.a, "a")?;
    let z: f64 = ctx.required(a.z, "z")?;
    let omega = c.pick(a.omega, "omega")?.unwrap_or(1.0);
    let rate = c.pick(a.rate, "rate")?.unwrap_or(DEFAULT_RATE);
    let rep = c.pick(a.replication, "replication")?.unwrap_or(0);
    let base = PoissonBetaModel::with_rate(shape, Window::new(z, omega)?, rate)?;
    let stream = RngStream::new(ctx.seed, rep);
    let mut meta = vec![("process", process.name().to_string()), ("a", shape.to_string()), ("rate", rate.to_string())];
    let pattern = match process {
        Process::Poisson => simulate_poisson_beta(&base, stream),
        Process::Thomas => {
            let gamma = c.pick(a.gamma, "gamma")?.unwrap_or(5.0);
            let sigma = c.pick(a.sigma, "sigma")?.unwrap_or(0.02);
            let buffer = c.pick(a.parent_buffer, "parent-buffer")?.unwrap_or(0.0);
            let m = ThomasModel::new(base, gamma, sigma)?.with_parent_buffer(buffer)?;
            meta.push(("gamma", gamma.to_string()));
            meta.push(("sigma", sigma.to_string()));
            simulate_thomas(&m, stream)
        }
    };
    meta.push(("seed", ctx.seed.to_string()));
    meta.push(("replication", rep.to_string()));
    ctx.emit(|w| write_pattern(w, &pattern, &meta))
}

fn estimate(ctx: &Ctx, a: EstimateArgs) -> Result<()> {
    let pat = ctx.pattern(a.input)?.pattern;
    let kind = ctx.cfg.pick(a.estimator, "estimator")?.unwrap_or_else(|| "substationary".into());
    let h = || -> Result<Bandwidth> { Ok(Bandwidth::new(ctx.required(a.h, "h")?)?) };
    let est = match kind.as_str() {
        "substationary" | "substat" => {
            let theta = ctx.theta(a.theta)?.unwrap_or(Subspace::HORIZONTAL);
            IntensityEstimator::substationary(&pat, theta, h()?)
        }
        "kernel-2d" | "kernel_2d" | "2d" => IntensityEstimator::kernel_2d(&pat, h()?),
        "stationary" => IntensityEstimator::stationary(&pat),
        other => return Err(Error::Usage(format!("unknown estimator {other:?}"))),
    };
    let default_res = if matches!(est, IntensityEstimator::Kernel2d(_)) { 64 } else { 512 };
    let res = ctx.cfg.pick(a.resolution, "resolution")?.unwrap_or(default_res);
    let grid = intensity_grid(&est, res, Some(ctx.seed))?;
    if let Some(svg) = ctx.cfg.pick(a.svg, "svg")? {
        export_svg(&grid, svg)?;
    }
    ctx.emit(|w| write_grid(w, &grid))
}

fn fit(ctx: &Ctx, a: FitArgs) -> Result<()> {
    let pat = ctx.pattern(a.input)?.pattern;
    let hs = ctx.bandwidths(a.h, "h")?;
    let cfg = ctx.fit_config(a.fit)?;
    let pool = RayonExecutor::new(ctx.threads)?;
    let fits = pool.install(|| {
        use rayon::prelude::*;
        hs.par_iter().map(|&h| fit_theta_with(&pat, h, &cfg)).collect::<std::result::Result<Vec<_>, _>>()
    })?;
    if let Some(path) = ctx.cfg.pick(a.trace, "trace")? {
        let path: PathBuf = path;
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut wtr = csv::Writer::from_writer(BufWriter::new(file));
        let mut body = || -> io::Result<()> {
            wtr.write_record(["h", "theta_rad", "theta_deg", "loglik"])?;
            for f in &fits {
                for (t, ll) in &f.trace {
                    wtr.write_record([f.h.get().to_string(), t.theta().to_string(), t.degrees().to_string(), ll.to_string()])?;
                }
            }
            wtr.flush()
        };
        body().map_err(|e| Error::io(&path, e))?;
    }
    ctx.emit(|w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["h", "theta_rad", "theta_deg", "loglik", "degenerate"])?;
        for f in &fits {
            wtr.write_record([
                f.h.get().to_string(),
                f.theta_hat.theta().to_string(),
                f.theta_hat.degrees().to_string(),
                f.loglik.to_string(),
                f.degenerate.to_string(),
            ])?;
        }
        wtr.flush()
    })
}

fn bandwidth(ctx: &Ctx, a: BandwidthArgs) -> Result<()> {
    let pat = ctx.pattern(a.input)?.pattern;
    let theta = ctx.theta(a.theta)?.unwrap_or(Subspace::HORIZONTAL);
    let candidates = ctx.bandwidths(a.candidates, "candidates")?;
    let sel = select_bandwidth(&pat, theta, &candidates)?;
    ctx.emit(|w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["h", "cv_score", "selected"])?;
        for (h, s) in &sel.scores {
            wtr.write_record([h.get().to_string(), s.to_string(), (*h == sel.h).to_string()])?;
        }
        wtr.flush()
    })
}

fn experiment(ctx: &Ctx, a: ExperimentArgs) -> Result<()> {
    let target: Target = a.target.parse()?;
    let plan = plan_from_config(target, &ctx.cfg, Some(ctx.seed), a.replications)?;
    let result = run_experiment(&plan, ctx.threads)?;
    ctx.emit(|w| write_result(w, &result))
}

fn ingest(ctx: &Ctx, a: IngestArgs) -> Result<()> {
    let path: PathBuf = ctx.required(a.input, "input")?;
    let raw: String = ctx.required(a.region, "region")?;
    let region: RegionSpec = raw.parse()?;
    let got = ingest_csv(&path, &region)?;
    if got.pattern.is_empty() {
        eprintln!("warning: no points of {} fall inside the region", path.display());
    }
    eprintln!("kept {} dropped {}", got.pattern.len(), got.dropped);
    let meta = [
        ("source", path.display().to_string()),
        ("region", raw.replace(' ', "")),
        ("dropped", got.dropped.to_string()),
    ];
    ctx.emit(|w| write_pattern(w, &got.pattern, &meta))
}

fn apply(ctx: &Ctx, a: ApplyArgs) -> Result<()> {
    let pat = ctx.pattern(a.input)?.pattern;
    let hs = ctx.bandwidths(a.h, "h")?;
    let mut opts = ApplyOptions { fit: ctx.fit_config(a.fit)?, ..ApplyOptions::default() };
    if let Some(t) = ctx.cfg.pick(a.threshold, "threshold")? {
        opts.threshold = t;
    }
    if let Some(r) = ctx.cfg.pick(a.resolution, "resolution")? {
        opts.grid_resolution = r;
    }
    let pool = RayonExecutor::new(ctx.threads)?;
    let report = pool.install(|| run_application_pipeline(&pat, &hs, &opts))?;
    if let Some(dir) = ctx.cfg.pick(a.grid_dir, "grid-dir")? {
        let dir: PathBuf = dir;
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (row, grid) in report.rows.iter().zip(&report.grids) {
            let path = dir.join(format!("horizontal_h{}.csv", row.h.get()));
            write_to(&path, |w| write_grid(w, grid))?;
        }
    }
    ctx.emit(|w| write_report(w, &report))
}

fn write_to(path: &Path, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}
