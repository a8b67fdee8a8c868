use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lsrecon::config::{preset, SolverConfig, PRESETS};
use lsrecon::contour::Contour;
use lsrecon::metrics::compare;
use lsrecon::pointcloud::{shape_from_name, Gap, Shape, ShapeRecipe};
use lsrecon::solver::{grid_for, run, write_trace};
use lsrecon::{Error, PointCloud};

#[derive(Parser)]
#[command(name = "lsrecon", version, about = "Level-set reconstruction of curves and surfaces from point clouds")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic point cloud from an analytic shape.
    Generate(GenerateArgs),
    /// Reconstruct a curve or surface from a point cloud.
    Reconstruct(ReconstructArgs),
    /// Compare a contour with an analytic shape or another contour.
    Evaluate(EvaluateArgs),
    /// List presets, or print one as a config file.
    Presets { name: Option<String> },
}

#[derive(Args, Clone)]
struct ShapeArgs {
    /// circle, ellipse, square, pentagon, hexagon, flower, cylinder, torus, box-rail
    #[arg(long)]
    shape: String,
    /// Comma-separated center coordinates.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    center: Vec<f64>,
    #[arg(long)]
    radius: Option<f64>,
    /// Ellipse semi-axes, torus major,minor radii, or flower amplitude.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Square edge, or cylinder height.
    #[arg(long)]
    edge: Option<f64>,
    #[arg(long)]
    petals: Option<usize>,
    /// Box-rail extents along x,y,z.
    #[arg(long, value_delimiter = ',')]
    size: Option<Vec<f64>>,
    /// Rotation in radians.
    #[arg(long, default_value_t = 0.0)]
    rotation: f64,
}

impl ShapeArgs {
    fn build(&self) -> Result<Shape, Error> {
        let pair = |v: &Option<Vec<f64>>, what: &str| -> Result<Option<[f64; 2]>, Error> {
            match v.as_deref() {
                None => Ok(None),
                Some([a]) => Ok(Some([*a, 0.0])),
                Some([a, b]) => Ok(Some([*a, *b])),
                Some(_) => Err(Error::InvalidParameter(format!("--{what} takes one or two values"))),
            }
        };
        let size = match self.size.as_deref() {
            None => None,
            Some([a, b, c]) => Some([*a, *b, *c]),
            Some(_) => return Err(Error::InvalidParameter("--size takes three values".into())),
        };
        shape_from_name(
            &self.shape,
            &self.center,
            self.radius,
            pair(&self.radii, "radii")?,
            self.edge,
            self.petals,
            size,
            self.rotation,
        )
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gaussian noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// `corners:R` or `interval:START:END` (repeatable).
    #[arg(long)]
    gaps: Vec<String>,
    /// Output cloud; a `.json` sidecar with the recipe is written next to it.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value = "clean-2d")]
    preset: String,
    /// Config file applied on top of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value` overrides, applied last.
    #[arg(long = "set")]
    sets: Vec<String>,
    /// `key=v1,v2,...`: one run per value in `<out>/<key>=<v>/`.
    #[arg(long)]
    sweep: Option<String>,
    /// Also write the final level set and distance field dumps.
    #[arg(long)]
    dump: bool,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Contour file (CSV or OBJ).
    #[arg(long)]
    contour: PathBuf,
    /// Second contour to compare against.
    #[arg(long, conflicts_with = "shape")]
    reference: Option<PathBuf>,
    #[command(flatten)]
    shape: Option<ShapeArgs>,
    /// Sampling step along both sets.
    #[arg(long, default_value_t = 0.25)]
    spacing: f64,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Divergence { .. } | Error::SingularPointwise { .. } => 3,
            Error::Io(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        msg: msg.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Generate(a) => generate(&a),
        Command::Reconstruct(a) => reconstruct(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Presets { name } => presets(name.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn parse_gap(s: &str) -> Result<Gap, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| usage(format!("bad number `{t}` in gap `{s}`")));
    match parts.as_slice() {
        ["corners", r] => Ok(Gap::Corners { radius: num(r)? }),
        ["interval", a, b] => Ok(Gap::Interval {
            start: num(a)?,
            end: num(b)?,
        }),
        _ => Err(usage(format!("gap `{s}` is not corners:R or interval:START:END"))),
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn generate(a: &GenerateArgs) -> Result<(), Failure> {
    let shape = a.shape.build()?;
    let gaps = a.gaps.iter().map(|g| parse_gap(g)).collect::<Result<Vec<_>, _>>()?;
    let recipe = ShapeRecipe::new(shape, a.count)
        .with_gaps(gaps)
        .with_noise(a.sigma, a.seed);
    let cloud = recipe.generate()?;
    cloud.save(&a.out)?;
    let mut meta = serde_json::to_value(&recipe).map_err(|e| usage(e.to_string()))?;
    meta["points"] = cloud.len().into();
    let text = serde_json::to_string_pretty(&meta).map_err(|e| usage(e.to_string()))?;
    std::fs::write(sidecar_path(&a.out), text + "\n").map_err(Error::from)?;
    println!("wrote {} points to {}", cloud.len(), a.out.display());
    Ok(())
}

fn load_config(a: &ReconstructArgs) -> Result<SolverConfig, Failure> {
    let mut cfg = preset(&a.preset)?;
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).map_err(Error::from)?;
        cfg.apply_text(&text)?;
    }
    for kv in &a.sets {
        cfg.apply_override(kv)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn reconstruct(a: &ReconstructArgs) -> Result<(), Failure> {
    let cloud = PointCloud::load(&a.input)?;
    let cfg = load_config(a)?;
    let Some(sweep) = &a.sweep else {
        return reconstruct_one(a, &cloud, &cfg, &a.out);
    };
    let (key, values) = sweep
        .split_once('=')
        .ok_or_else(|| usage(format!("sweep `{sweep}` is not key=v1,v2,...")))?;
    let mut jobs = Vec::new();
    for v in values.split(',').filter(|v| !v.is_empty()) {
        let mut c = cfg.clone();
        c.set(key, v)?;
        c.validate()?;
        jobs.push((a.out.join(format!("{key}={v}")), c));
    }
    let results: Vec<Result<(), Failure>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(dir, c)| s.spawn(|| reconstruct_one(a, &cloud, c, dir)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    });
    let mut worst: Option<Failure> = None;
    for ((dir, _), r) in jobs.iter().zip(results) {
        if let Err(f) = r {
            eprintln!("{}: {}", dir.display(), f.msg);
            if worst.as_ref().is_none_or(|w| f.code > w.code) {
                worst = Some(f);
            }
        }
    }
    worst.map_or(Ok(()), Err)
}

fn reconstruct_one(a: &ReconstructArgs, cloud: &PointCloud, cfg: &SolverConfig, out: &Path) -> Result<(), Failure> {
    let spec = grid_for(cloud, cfg)?;
    let result = run(cloud, &spec, cfg)?;
    std::fs::create_dir_all(out).map_err(Error::from)?;
    let mut artifacts = Vec::new();
    let mut write = |name: &str, f: &dyn Fn(&Path) -> Result<(), Error>| -> Result<(), Failure> {
        f(&out.join(name))?;
        artifacts.push(name.to_string());
        Ok(())
    };
    if spec.dim() == 2 {
        write("contour.csv", &|p| result.contour.save(p))?;
        write("contour.svg", &|p| {
            let file = std::fs::File::create(p)?;
            result.contour.write_svg(std::io::BufWriter::new(file), spec.dims(), Some(cloud))?;
            Ok(())
        })?;
    } else {
        write("contour.obj", &|p| result.contour.save(p))?;
    }
    write("energy.csv", &|p| {
        let file = std::fs::File::create(p)?;
        write_trace(std::io::BufWriter::new(file), &result.trace)?;
        Ok(())
    })?;
    write("config.txt", &|p| Ok(std::fs::write(p, cfg.to_text())?))?;
    if a.dump {
        write("psi.dump", &|p| result.state.psi.save_dump(p))?;
    }

    let final_energy = result.trace.last().map_or(f64::NAN, |r| r.total());
    let mut m = String::new();
    let _ = writeln!(m, "input: {}", a.input.display());
    match &a.config {
        Some(c) => {
            let _ = writeln!(m, "preset: {}", a.preset);
            let _ = writeln!(m, "config: {}", c.display());
        }
        None => {
            let _ = writeln!(m, "preset: {}", a.preset);
        }
    }
    let _ = writeln!(m, "output: {}", out.display());
    let _ = writeln!(m, "artifacts: {}", artifacts.join(", "));
    let _ = writeln!(m, "grid: {}", spec.dims().iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x"));
    let _ = writeln!(m, "iterations: {}", result.state.iteration);
    match result.converged_at {
        Some(k) => {
            let _ = writeln!(m, "converged_at: {k}");
        }
        None => {
            let _ = writeln!(m, "converged_at: none");
        }
    }
    let _ = writeln!(m, "final_energy: {final_energy}");
    let _ = writeln!(m, "components: {}", result.contour.component_count());
    let _ = writeln!(m, "seconds: {:.3}", result.seconds);
    std::fs::write(out.join("manifest"), m).map_err(Error::from)?;
    println!(
        "{}: {} iterations, energy {:.6e}, {} component(s)",
        out.display(),
        result.state.iteration,
        final_energy,
        result.contour.component_count()
    );
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> Result<(), Failure> {
    if !(a.spacing > 0.0) {
        return Err(usage("--spacing must be positive"));
    }
    let contour = Contour::load(&a.contour).map_err(|e| Failure {
        code: 4,
        msg: e.to_string(),
    })?;
    let samples = contour.sample(a.spacing);
    if samples.is_empty() {
        return Err(Failure {
            code: 4,
            msg: format!("{} holds no contour", a.contour.display()),
        });
    }
    let reference: Vec<[f64; 3]> = match (&a.reference, &a.shape) {
        (Some(path), _) => Contour::load(path)
            .map_err(|e| Failure {
                code: 4,
                msg: e.to_string(),
            })?
            .sample(a.spacing),
        (None, Some(s)) => s
            .build()?
            .dense_samples(a.spacing)
            .into_iter()
            .map(|v| {
                let mut p = [0.0; 3];
                p[..v.len()].copy_from_slice(&v);
                p
            })
            .collect(),
        (None, None) => return Err(usage("evaluate needs --reference or --shape")),
    };
    let c = compare(&samples, &reference).ok_or_else(|| Failure {
        code: 4,
        msg: "reference holds no points".into(),
    })?;
    println!("hausdorff: {}", c.hausdorff);
    println!("chamfer: {}", c.chamfer);
    println!("components: {}", contour.component_count());
    Ok(())
}

fn presets(name: Option<&str>) -> Result<(), Failure> {
    match name {
        Some(n) => print!("{}", preset(n)?.to_text()),
        None => {
            for (n, what) in PRESETS {
                println!("{n:<20} {what}");
            }
        }
    }
    Ok(())
}
