use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use billiards::billiard::{shoot, Tolerances};
use billiards::cylinder::cylinder_of;
use billiards::experiments::{
    lemma26_property_test, stable_classification_check, stable_samples, theorem1_verify, theorem3_scan, ExperimentConfig, ExperimentReport,
};
use billiards::fold::{build_cover, pullback_check};
use billiards::io::json::document;
use billiards::io::svg::{cover_scene, render, surface_scene, tile_heatmap, unfolding_strip, RenderScene};
use billiards::search::AngleWindow;
use billiards::surface::build_surface;
use billiards::tiles::{rotation_functional, tile_membership, tile_sample, TileGrid};
use billiards::unfold::{clearance, closed_word, closing_direction, period_element, unfold_chain};
use billiards::{detect_periodic, embed_triangle, AngleValue, BoundaryPoint, CombType, Execution, Polygon, TriangleShape};

use crate::IoFailure;

#[derive(Parser, Debug)]
#[command(name = "billiards", version, about = "Periodic billiards in rational triangles")]
pub struct Cli {
    /// Cap on worker threads; 1 runs sequentially.
    #[arg(long, global = true, env = "BILLIARDS_WORKERS")]
    pub workers: Option<usize>,
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate a billiard shot.
    Shoot(ShotArgs),
    /// Detect a periodic orbit and its cylinder.
    Orbit(ShotArgs),
    /// Sample an orbit tile over triangle moduli.
    Tile(TileArgs),
    /// Unfold a word along the triangle.
    Unfold(UnfoldArgs),
    /// Build the fold covering for an isosceles base angle.
    Cover(CoverArgs),
    /// Run a verification harness.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Write an SVG scene.
    #[command(subcommand)]
    Render(Render),
}

#[derive(Args, Debug, Clone)]
pub struct ShapeArg {
    /// Two base angles `θ1,θ2`: `a/b` is (a/b)π, a decimal is radians; or `square`.
    #[arg(long)]
    pub shape: String,
}

#[derive(Args, Debug, Clone)]
pub struct ShotArgs {
    #[command(flatten)]
    pub shape: ShapeArg,
    /// Start on the boundary as `edge:t`.
    #[arg(long)]
    pub start: String,
    /// Direction: `a/b` is (a/b)π, a decimal is radians.
    #[arg(long)]
    pub dir: String,
    #[arg(long, default_value_t = 40)]
    pub max_hits: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct TileArgs {
    /// Combinatorial type, e.g. `3132`.
    #[arg(long)]
    pub word: String,
    /// Centre of a square window on the isosceles diagonal (radians).
    #[arg(long)]
    pub center: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub half_width: f64,
    #[arg(long, default_value_t = 40)]
    pub grid: usize,
    /// Also report membership for this shape.
    #[arg(long)]
    pub shape: Option<String>,
    /// Also write the heatmap.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct UnfoldArgs {
    #[command(flatten)]
    pub shape: ShapeArg,
    #[arg(long)]
    pub word: String,
    /// Start parameter on the first edge, for a clearance evaluation.
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub dir: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct CoverArgs {
    /// Base angle `a/b`.
    #[arg(long)]
    pub base: String,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[arg(long)]
    pub angles: Option<usize>,
    #[arg(long)]
    pub max_hits: Option<usize>,
    /// Direction window `lo,hi` in radians.
    #[arg(long)]
    pub window: Option<String>,
    /// Compare types up to reversal only.
    #[arg(long)]
    pub linear: bool,
}

#[derive(Subcommand, Debug)]
pub enum Experiment {
    Theorem1 {
        #[arg(long)]
        base: String,
        #[arg(long)]
        starts: Option<usize>,
        #[command(flatten)]
        grid: GridArgs,
    },
    Theorem3 {
        #[arg(long)]
        base: String,
        /// Base coordinate measured from the centre, in (−1/2, 1/2).
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    Stable {
        #[arg(long)]
        base: String,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    Lemma26 {
        #[command(flatten)]
        shape: ShapeArg,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum Render {
    /// Unfolding strip of a shot.
    Strip {
        #[command(flatten)]
        shot: ShotArgs,
        #[arg(long)]
        svg: PathBuf,
    },
    /// Copies of the surface around its apex points.
    Surface {
        #[command(flatten)]
        shape: ShapeArg,
        #[arg(long)]
        svg: PathBuf,
    },
    /// Source and target of the fold covering.
    Cover {
        #[arg(long)]
        base: String,
        #[arg(long)]
        svg: PathBuf,
    },
    /// Viewport only.
    Empty {
        #[arg(long)]
        svg: PathBuf,
    },
}

pub enum Outcome {
    Ok,
    Violation(usize),
}

pub fn run_with_workers(cli: &Cli) -> Result<Outcome> {
    let exec = match cli.workers {
        Some(0) => bail!("--workers must be positive"),
        Some(1) => Execution::Sequential,
        _ => Execution::Parallel,
    };
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.workers.filter(|&n| n > 1) {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().context("building worker pool")?;
        return pool.install(|| run(cli, exec));
    }
    run(cli, exec)
}

fn parse_angle(s: &str) -> Result<AngleValue> {
    s.parse::<AngleValue>().map_err(|e| anyhow!("bad angle `{s}`: {e}"))
}

fn parse_polygon(s: &str) -> Result<(Polygon, Option<TriangleShape>)> {
    if s.eq_ignore_ascii_case("square") {
        return Ok((Polygon::unit_square(), None));
    }
    let (a, b) = s.split_once(',').ok_or_else(|| anyhow!("shape must be `θ1,θ2` or `square`, got `{s}`"))?;
    let t = embed_triangle(parse_angle(a)?, parse_angle(b)?)?;
    Ok((t.polygon().clone(), Some(t)))
}

fn isosceles(base: &str) -> Result<TriangleShape> {
    let a = parse_angle(base)?;
    Ok(embed_triangle(a, a)?)
}

fn parse_start(s: &str) -> Result<BoundaryPoint> {
    let (e, t) = s.split_once(':').ok_or_else(|| anyhow!("start must be `edge:t`, got `{s}`"))?;
    Ok(BoundaryPoint::new(e.trim().parse().context("edge index")?, t.trim().parse().context("edge parameter")?))
}

fn parse_window(s: &str) -> Result<AngleWindow> {
    let (a, b) = s.split_once(',').ok_or_else(|| anyhow!("window must be `lo,hi`"))?;
    Ok(AngleWindow::new(a.trim().parse()?, b.trim().parse()?))
}

fn emit(cli: &Cli, kind: &str, data: &serde_json::Value) -> Result<()> {
    let text = document(kind, data)?;
    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(|e| IoFailure(e, p.display().to_string()).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_svg(scene: &RenderScene, path: &Path) -> Result<()> {
    render(scene, path).map_err(|e| IoFailure(e, path.display().to_string()).into())
}

fn apply_grid(cfg: &mut ExperimentConfig, g: &GridArgs) -> Result<()> {
    if let Some(n) = g.angles {
        cfg.angle_grid = n;
    }
    if let Some(h) = g.max_hits {
        cfg.max_hits = h;
    }
    if let Some(w) = &g.window {
        cfg.angle_window = parse_window(w)?;
    }
    cfg.cyclic = !g.linear;
    Ok(())
}

fn report(cli: &Cli, r: &ExperimentReport) -> Result<Outcome> {
    emit(cli, "experiment", &serde_json::to_value(r)?)?;
    Ok(if r.violations.is_empty() { Outcome::Ok } else { Outcome::Violation(r.violations.len()) })
}

fn run(cli: &Cli, exec: Execution) -> Result<Outcome> {
    match &cli.command {
        Command::Shoot(a) => {
            let (p, _) = parse_polygon(&a.shape.shape)?;
            let tr = shoot(&p, parse_start(&a.start)?, parse_angle(&a.dir)?.radians(), a.max_hits)?;
            emit(cli, "trajectory", &serde_json::to_value(&tr)?)?;
        }
        Command::Orbit(a) => {
            let (p, _) = parse_polygon(&a.shape.shape)?;
            let o = detect_periodic(&p, parse_start(&a.start)?, parse_angle(&a.dir)?.radians(), a.max_hits, a.tol)?;
            let data = match o {
                Some(o) => {
                    let cyl = cylinder_of(&p, &o).ok();
                    json!({
                        "periodic": true,
                        "period": o.period,
                        "length": o.length(),
                        "word": o.word,
                        "comb_type": o.comb_type(false),
                        "cyclic_type": o.comb_type(true),
                        "cylinder": cyl,
                        "trajectory": o.trajectory,
                    })
                }
                None => json!({ "periodic": false }),
            };
            emit(cli, "orbit", &data)?;
        }
        Command::Tile(a) => {
            let c: CombType = a.word.parse().map_err(|e| anyhow!("bad word `{}`: {e}", a.word))?;
            let grid = match a.center {
                Some(c) => TileGrid::centered(c, a.half_width, a.grid),
                None => TileGrid::square(0.01, PI / 2.0, a.grid),
            };
            let r = tile_sample(&c, grid, exec)?;
            let membership = match &a.shape {
                Some(s) => Some(tile_membership(&parse_polygon(s)?.0, &c)),
                None => None,
            };
            if let Some(path) = &a.svg {
                write_svg(&tile_heatmap(&r), path)?;
            }
            emit(cli, "tile", &json!({ "report": r, "membership": membership }))?;
        }
        Command::Unfold(a) => {
            let (p, _) = parse_polygon(&a.shape.shape)?;
            let word = billiards::comb_type::parse_word(&a.word).map_err(|e| anyhow!("bad word: {e}"))?;
            let chain = unfold_chain(&p, &word)?;
            let closed = closed_word(&word);
            let clear = match (a.x, &a.dir) {
                (Some(x), Some(d)) => Some(clearance(&p, &closed, x, parse_angle(d)?.radians())?),
                _ => None,
            };
            let data = json!({
                "chain": chain,
                "closed_word": closed,
                "closing_direction": closing_direction(&p, &word).ok(),
                "period_element": period_element(&p, &closed),
                "rotation_functional": rotation_functional(&closed).ok(),
                "clearance": clear,
            });
            emit(cli, "unfold", &data)?;
        }
        Command::Cover(a) => {
            let t = isosceles(&a.base)?;
            let c = build_cover(&t)?;
            let pb = pullback_check(&c, a.samples, cli.seed);
            if let Some(path) = &a.svg {
                write_svg(&cover_scene(&c), path)?;
            }
            let data = json!({
                "base": t.theta1(),
                "degree": c.degree,
                "genus": [c.source.genus, c.target.genus],
                "copies": [c.source.copies.len(), c.target.copies.len()],
                "euler_characteristic": [c.source.euler_characteristic(), c.target.euler_characteristic()],
                "cone_points": [c.source.cone_points, c.target.cone_points],
                "pullback": pb,
            });
            emit(cli, "cover", &data)?;
        }
        Command::Experiment(e) => return experiment(cli, e, exec),
        Command::Render(r) => {
            let (scene, svg, name) = match r {
                Render::Strip { shot, svg } => {
                    let (p, _) = parse_polygon(&shot.shape.shape)?;
                    let tr = shoot(&p, parse_start(&shot.start)?, parse_angle(&shot.dir)?.radians(), shot.max_hits)?;
                    (unfolding_strip(&p, &tr)?, svg, "strip")
                }
                Render::Surface { shape, svg } => (surface_scene(&build_surface(&parse_polygon(&shape.shape)?.0)?), svg, "surface"),
                Render::Cover { base, svg } => (cover_scene(&build_cover(&isosceles(base)?)?), svg, "cover"),
                Render::Empty { svg } => (RenderScene::empty(), svg, "empty"),
            };
            write_svg(&scene, svg)?;
            emit(cli, "render", &json!({ "scene": name, "svg": svg.display().to_string(), "layers": scene.layers.len() }))?;
        }
    }
    Ok(Outcome::Ok)
}

fn experiment(cli: &Cli, e: &Experiment, exec: Execution) -> Result<Outcome> {
    match e {
        Experiment::Theorem1 { base, starts, grid } => {
            let mut cfg = ExperimentConfig::theorem1_default(isosceles(base)?);
            if let Some(n) = starts {
                cfg.start_params = (0..*n).map(|i| (i as f64 + 0.5) / *n as f64).collect();
            }
            apply_grid(&mut cfg, grid)?;
            cfg.seed = cli.seed;
            cfg.execution = exec;
            report(cli, &theorem1_verify(&cfg)?)
        }
        Experiment::Theorem3 { base, x, grid } => {
            let mut cfg = ExperimentConfig::theorem3_default(isosceles(base)?, *x);
            apply_grid(&mut cfg, grid)?;
            cfg.seed = cli.seed;
            cfg.execution = exec;
            report(cli, &theorem3_scan(&cfg)?)
        }
        Experiment::Stable { base, x, grid } => {
            let mut cfg = ExperimentConfig::theorem3_default(isosceles(base)?, *x);
            apply_grid(&mut cfg, grid)?;
            cfg.seed = cli.seed;
            cfg.execution = exec;
            let samples = stable_samples(&cfg);
            report(cli, &stable_classification_check(&cfg, &samples)?)
        }
        Experiment::Lemma26 { shape, trials, grid } => {
            let (p, _) = parse_polygon(&shape.shape)?;
            let placeholder = embed_triangle(AngleValue::rational(1, 3)?, AngleValue::rational(1, 3)?)?;
            let mut cfg = ExperimentConfig::theorem1_default(placeholder);
            cfg.angle_window = AngleWindow::new(0.05, PI - 0.05);
            cfg.angle_grid = 48;
            cfg.max_hits = 16;
            apply_grid(&mut cfg, grid)?;
            cfg.seed = cli.seed;
            cfg.execution = exec;
            cfg.tolerances = Tolerances::default();
            report(cli, &lemma26_property_test(&p, *trials, &cfg))
        }
    }
}
