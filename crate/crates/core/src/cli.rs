//! Command-line front end. [`run`] parses arguments, dispatches and maps
//! errors to exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage error or invalid argument |
//! | 2 | stepsize predicate violated |
//! | 3 | I/O or malformed PGM |
//! | 4 | unknown experiment |

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::image::{phantom, read_pgm, write_pgm, GrayImage, ImageGrid, PgmFormat};
use crate::problems::{
    deblur_spec, experiment, psnr, tv_spec, DeblurConfig, DeblurModel, ExperimentParams,
    ExperimentSpec, L1Noise, StartChoice, TvConfig, TvModel, KNOWN_EXPERIMENTS,
};
use crate::saddle::{sharpness_grid, GridBox};
use crate::solver::{solve_many, IterateTrace, Regime};
use crate::trace::{meta_entries, parse_key_values, sidecar_path, write_key_values, CsvTrace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_STEPSIZE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_UNKNOWN: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::StepsizeViolation(_) => EXIT_STEPSIZE,
        Error::Io(_) | Error::Pgm { .. } => EXIT_IO,
        Error::UnknownExperiment { .. } => EXIT_UNKNOWN,
        _ => EXIT_USAGE,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wcpd",
    version,
    about = "Primal-dual splitting for weakly convex saddle problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a named experiment and write its trace.
    Solve(SolveArgs),
    /// Tabulate H - mu * dist over a box for a scalar example.
    Sharpness(SharpnessArgs),
    /// Image restoration and PGM utilities.
    #[command(subcommand)]
    Image(ImageCommand),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// One of example1..example4, example4-variant, l1, l1wc.
    pub experiment: String,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// dual-first or primal-first.
    #[arg(long)]
    pub regime: Option<String>,
    /// zeros, random, inside, outside or warm.
    #[arg(long)]
    pub start: Option<String>,
    /// Problem dimension (sparse recovery).
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of measurements (sparse recovery).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub density: Option<f64>,
    /// Constant noise level; see also --noise-uniform.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Relative uniform noise range.
    #[arg(long, conflicts_with = "noise")]
    pub noise_uniform: Option<f64>,
    /// Number of independent random starts, solved concurrently.
    #[arg(long, default_value_t = 1)]
    pub starts: usize,
    /// Trace CSV; `<out>.meta` receives the run metadata.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SharpnessArgs {
    pub example: String,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Half-width of the square box; defaults to the example's box.
    #[arg(long)]
    pub half: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// CSV of `x,y,value`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Ascii,
    Binary,
}

impl From<FormatArg> for PgmFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Ascii => PgmFormat::Ascii,
            FormatArg::Binary => PgmFormat::Binary,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum ImageCommand {
    /// Total-variation denoising of a noisy copy of the input.
    Tv(TvArgs),
    /// Deblurring of a blurred, noisy copy of the input.
    Deblur(DeblurArgs),
    /// Re-encode a PGM file.
    Convert {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Binary)]
        format: FormatArg,
    },
    /// Write the synthetic test image.
    Phantom {
        output: PathBuf,
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, value_enum, default_value_t = FormatArg::Binary)]
        format: FormatArg,
    },
}

#[derive(Debug, Args)]
pub struct TvArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// convex, wc1, wc2, wc3 or wc4.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Standard deviation of the added Gaussian noise.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Scalar target of the wc1 model.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Also save the noisy image.
    #[arg(long)]
    pub noisy_out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DeblurArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// convex or wc.
    #[arg(long)]
    pub model: Option<String>,
    /// Blur kernel standard deviation in pixels.
    #[arg(long)]
    pub std: Option<f64>,
    /// Noise level of the observation.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Also save the blurred observation.
    #[arg(long)]
    pub noisy_out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

struct ConfigFile(BTreeMap<String, String>);

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Ok(ConfigFile(parse_key_values(&fs::read_to_string(p)?)?)),
            None => Ok(ConfigFile(BTreeMap::new())),
        }
    }

    /// Fills `slot` from the file when the flag was not given.
    fn fill<T: FromStr>(&mut self, slot: &mut Option<T>, key: &str) -> Result<()> {
        if let Some(raw) = self.0.remove(key) {
            if slot.is_none() {
                let v = raw.parse().map_err(|_| {
                    Error::InvalidArgument(format!("config: bad value '{raw}' for {key}"))
                })?;
                *slot = Some(v);
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<()> {
        match self.0.keys().next() {
            Some(k) => Err(Error::InvalidArgument(format!("config: unknown key '{k}'"))),
            None => Ok(()),
        }
    }
}

fn merge_solve(args: &mut SolveArgs) -> Result<()> {
    let mut c = ConfigFile::load(args.config.as_deref())?;
    c.fill(&mut args.iters, "iters")?;
    c.fill(&mut args.seed, "seed")?;
    c.fill(&mut args.sigma, "sigma")?;
    c.fill(&mut args.tau, "tau")?;
    c.fill(&mut args.theta, "theta")?;
    c.fill(&mut args.regime, "regime")?;
    c.fill(&mut args.start, "start")?;
    c.fill(&mut args.n, "n")?;
    c.fill(&mut args.m, "m")?;
    c.fill(&mut args.density, "density")?;
    c.fill(&mut args.noise, "noise")?;
    c.fill(&mut args.noise_uniform, "noise-uniform")?;
    c.fill(&mut args.out, "out")?;
    c.finish()
}

fn merge_tv(args: &mut TvArgs) -> Result<()> {
    let mut c = ConfigFile::load(args.config.as_deref())?;
    c.fill(&mut args.model, "model")?;
    c.fill(&mut args.lambda, "lambda")?;
    c.fill(&mut args.noise, "noise")?;
    c.fill(&mut args.target, "target")?;
    c.fill(&mut args.seed, "seed")?;
    c.fill(&mut args.sigma, "sigma")?;
    c.fill(&mut args.iters, "iters")?;
    c.finish()
}

fn merge_deblur(args: &mut DeblurArgs) -> Result<()> {
    let mut c = ConfigFile::load(args.config.as_deref())?;
    c.fill(&mut args.model, "model")?;
    c.fill(&mut args.std, "std")?;
    c.fill(&mut args.eps, "eps")?;
    c.fill(&mut args.seed, "seed")?;
    c.fill(&mut args.sigma, "sigma")?;
    c.fill(&mut args.iters, "iters")?;
    c.finish()
}

/// `trace.csv` with index 2 becomes `trace.2.csv`.
pub fn indexed_path(path: &Path, index: usize) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{index}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{index}"),
    };
    path.with_file_name(name)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into())
}

fn summary(spec: &ExperimentSpec, index: Option<usize>, t: &IterateTrace) -> String {
    let row = t.last_row();
    let start = index.map(|i| format!(" start={i}")).unwrap_or_default();
    format!(
        "experiment={}{start} iterations={} halt={} dist={} objective={}",
        spec.name,
        t.meta.iterations,
        t.halt,
        fmt_opt(row.dist),
        fmt_opt(row.objective)
    )
}

fn cmd_solve(mut args: SolveArgs, out: &mut dyn Write) -> Result<()> {
    merge_solve(&mut args)?;
    if !KNOWN_EXPERIMENTS.contains(&args.experiment.as_str()) {
        return Err(Error::UnknownExperiment {
            name: args.experiment.clone(),
            known: KNOWN_EXPERIMENTS.join(", "),
        });
    }
    if args.starts == 0 {
        return Err(Error::InvalidArgument("--starts must be at least 1".into()));
    }
    let start = args
        .start
        .as_deref()
        .map(StartChoice::from_str)
        .transpose()?;
    let noise = match (args.noise, args.noise_uniform) {
        (Some(c), _) => Some(L1Noise::Constant(c)),
        (None, Some(r)) => Some(L1Noise::UniformScaled(r)),
        (None, None) => None,
    };
    let params = ExperimentParams {
        seed: args.seed,
        start,
        n: args.n,
        m: args.m,
        density: args.density,
        noise,
        sigma: args.sigma,
    };
    let mut spec = experiment(&args.experiment, &params)?;
    if spec.randomized() && args.seed.is_none() {
        return Err(Error::InvalidArgument(format!(
            "{} is randomized; pass --seed",
            spec.name
        )));
    }
    if let Some(t) = args.tau {
        spec.steps.tau = t;
    }
    if let Some(t) = args.theta {
        spec.steps.theta = t;
    }
    if let Some(r) = &args.regime {
        spec.regime = r.parse::<Regime>()?;
    }
    if let Some(n) = args.iters {
        spec.iters = n;
    }
    spec.validate()?;

    let starts = (0..args.starts)
        .map(|i| spec.start_point(i))
        .collect::<Result<Vec<_>>>()?;
    let paths: Vec<Option<PathBuf>> = (0..args.starts)
        .map(|i| {
            args.out.as_ref().map(|p| {
                if args.starts == 1 {
                    p.clone()
                } else {
                    indexed_path(p, i)
                }
            })
        })
        .collect();
    for path in paths.iter().flatten() {
        let mut entries = vec![("experiment".to_string(), spec.name.clone())];
        entries.extend(meta_entries(&crate::solver::TraceMeta {
            regime: spec.regime,
            steps: spec.steps,
            seed: spec.seed,
            iterations: spec.iters,
        }));
        entries.push(("iters".into(), spec.iters.to_string()));
        entries.push(("start".into(), format!("{:?}", spec.start)));
        entries.extend(spec.notes.iter().cloned());
        write_key_values(BufWriter::new(File::create(sidecar_path(path))?), &entries)?;
    }

    let results = solve_many(
        &spec.problem,
        &spec.steps,
        spec.regime,
        &starts,
        &spec.options(),
        |i| {
            paths[i]
                .as_deref()
                .map(CsvTrace::create)
                .transpose()
                .map_err(Error::from)
        },
    );
    for (i, r) in results.into_iter().enumerate() {
        let t = r?;
        let index = (args.starts > 1).then_some(i);
        writeln!(out, "{}", summary(&spec, index, &t))?;
    }
    Ok(())
}

impl<W: Write> crate::solver::Observer for Option<CsvTrace<W>> {
    fn on_row(&mut self, row: &crate::solver::TraceRow) -> Result<()> {
        match self {
            Some(c) => c.on_row(row),
            None => Ok(()),
        }
    }
}

fn cmd_sharpness(args: SharpnessArgs, out: &mut dyn Write) -> Result<()> {
    let spec = experiment(&args.example, &ExperimentParams::default())?;
    let (Some(default_mu), Some(default_box)) = (spec.mu, spec.sharpness_box) else {
        return Err(Error::Unsupported(format!(
            "{} is not a scalar example",
            spec.name
        )));
    };
    let mu = args.mu.unwrap_or(default_mu);
    let domain = args
        .half
        .map(|h| GridBox::square(-h, h))
        .unwrap_or(default_box);
    let grid = sharpness_grid(&spec.problem, mu, &domain, args.step)?;
    if let Some(path) = &args.out {
        grid.write_csv(BufWriter::new(File::create(path)?))?;
    }
    let (min, (wx, wy)) = grid.min();
    writeln!(
        out,
        "example={} mu={mu} points={} min={min:.6e} witness=({wx:.6},{wy:.6})",
        spec.name,
        grid.values.len()
    )?;
    Ok(())
}

fn load_grid(path: &Path) -> Result<ImageGrid> {
    ImageGrid::try_from(&read_pgm(path)?)
}

fn save_grid(path: &Path, n: usize, pixels: &ndarray::Array1<f64>) -> Result<()> {
    write_pgm(
        path,
        &ImageGrid {
            n,
            pixels: pixels.clone(),
        }
        .to_gray(255),
        PgmFormat::Binary,
    )
}

fn run_image(
    spec: &ExperimentSpec,
    output: &Path,
    noisy_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<()> {
    spec.validate()?;
    let ctx = spec.image.as_ref().expect("image specs carry their images");
    if let Some(p) = noisy_out {
        save_grid(p, ctx.side, &ctx.observed)?;
    }
    let t = spec.run(0, ())?;
    save_grid(output, ctx.side, &t.x)?;
    let model = spec
        .notes
        .iter()
        .find(|(k, _)| k == "model")
        .map(|(_, v)| v.as_str())
        .unwrap_or("-");
    writeln!(
        out,
        "model={model} psnr_noisy={:.4} psnr_out={:.4} iterations={}",
        psnr(ctx.clean.view(), ctx.observed.view())?,
        psnr(ctx.clean.view(), t.x.view())?,
        t.meta.iterations
    )?;
    Ok(())
}

fn need_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| Error::InvalidArgument("noise is randomized; pass --seed".into()))
}

fn cmd_image(cmd: ImageCommand, out: &mut dyn Write) -> Result<()> {
    match cmd {
        ImageCommand::Tv(mut a) => {
            merge_tv(&mut a)?;
            let model = a
                .model
                .as_deref()
                .map(TvModel::from_str)
                .transpose()?
                .unwrap_or(TvModel::Convex);
            let mut cfg = TvConfig::new(model, need_seed(a.seed)?);
            cfg.lambda = a.lambda;
            cfg.wc1_target = a.target;
            cfg.noise_sigma = a.noise.unwrap_or(cfg.noise_sigma);
            cfg.sigma = a.sigma.unwrap_or(cfg.sigma);
            cfg.iters = a.iters.unwrap_or(cfg.iters);
            let img = load_grid(&a.input)?;
            let spec = tv_spec(&img, &cfg)?;
            run_image(&spec, &a.output, a.noisy_out.as_deref(), out)
        }
        ImageCommand::Deblur(mut a) => {
            merge_deblur(&mut a)?;
            let model = a
                .model
                .as_deref()
                .map(DeblurModel::from_str)
                .transpose()?
                .unwrap_or(DeblurModel::Convex);
            let mut cfg = DeblurConfig::new(model, need_seed(a.seed)?);
            cfg.std = a.std.unwrap_or(cfg.std);
            cfg.eps_noise = a.eps.unwrap_or(cfg.eps_noise);
            cfg.sigma = a.sigma.unwrap_or(cfg.sigma);
            cfg.iters = a.iters.unwrap_or(cfg.iters);
            let img = load_grid(&a.input)?;
            let spec = deblur_spec(&img, &cfg)?;
            run_image(&spec, &a.output, a.noisy_out.as_deref(), out)
        }
        ImageCommand::Convert {
            input,
            output,
            format,
        } => {
            let img: GrayImage = read_pgm(&input)?;
            write_pgm(&output, &img, format.into())?;
            writeln!(
                out,
                "wrote {}x{} maxval={}",
                img.width, img.height, img.maxval
            )?;
            Ok(())
        }
        ImageCommand::Phantom {
            output,
            size,
            format,
        } => {
            let img = phantom(size)?;
            write_pgm(&output, &img.to_gray(255), format.into())?;
            writeln!(out, "wrote {size}x{size} phantom")?;
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Sharpness(a) => cmd_sharpness(a, out),
        Command::Image(c) => cmd_image(c, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("wcpd").chain(args.iter().copied()),
            &mut o,
            &mut e,
        );
        (
            code,
            String::from_utf8(o).unwrap(),
            String::from_utf8(e).unwrap(),
        )
    }

    #[test]
    fn indexed_names() {
        assert_eq!(
            indexed_path(Path::new("/t/trace.csv"), 2),
            PathBuf::from("/t/trace.2.csv")
        );
        assert_eq!(
            indexed_path(Path::new("trace"), 0),
            PathBuf::from("trace.0")
        );
    }

    #[test]
    fn exit_codes() {
        assert_eq!(call(&["--help"]).0, EXIT_OK);
        assert_eq!(call(&["solve"]).0, EXIT_USAGE);
        let (code, _, err) = call(&["solve", "nope"]);
        assert_eq!(code, EXIT_UNKNOWN);
        assert!(err.contains("example3"));
        assert_eq!(
            call(&["solve", "example3"]).0,
            EXIT_USAGE,
            "seed is required"
        );
        assert_eq!(
            call(&["solve", "example3", "--seed", "1", "--sigma", "5"]).0,
            EXIT_STEPSIZE
        );
        assert_eq!(
            call(&["image", "convert", "/nonexistent/a.pgm", "/tmp/b.pgm"]).0,
            EXIT_IO
        );
    }

    #[test]
    fn sharpness_summary() {
        let (code, out, _) = call(&["sharpness", "example3", "--mu", "1", "--step", "0.05"]);
        assert_eq!(code, 0);
        assert!(out.contains("min=0.000000e0"), "{out}");
    }
}
