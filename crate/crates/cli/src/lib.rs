//! Command-line surface of airfoil-kit.
//!
//! Exit codes: 0 success, 1 usage or invalid argument, 2 data or I/O error, 3 numerical
//! failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use airfoil_kit::io::{self as kio, CaseRecord, DataFormat};
use airfoil_kit::mesh::{assemble_cgrid, block_mesh_dict, write_mesh, MeshParams};
use airfoil_kit::metrics::{evaluate, EvalCase};
use airfoil_kit::naca::{
    generate_airfoil, sample_design_space, CaseSpec, Designation, Spacing, DEFAULT_SURFACE_POINTS,
};
use airfoil_kit::pipeline::{
    build_features, carve_validation, radius_graph, select, split_dataset, subsample, CaseMeta, Normalizer, Task,
    TaskSplit, DEFAULT_MAX_NEIGHBORS, DEFAULT_RADIUS, DEFAULT_SUBSAMPLE, TARGET_WIDTH,
};
use airfoil_kit::post::{analyze_case, boundary_layer_profile, Side, SimulationCloud, DEFAULT_GRADIENT_NEIGHBORS};
use airfoil_kit::spatial::KdTree;
use airfoil_kit::synthetic::{impose_power_law, mesh_cloud, PowerLawLayer};
use airfoil_kit::{Error, Result};

pub const THREADS_ENV: &str = "AIRFOIL_KIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "airfoil-kit", version, about = "NACA airfoil datasets: geometry, meshes, forces and evaluation")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format for written data files.
    #[arg(long, global = true, default_value = "text", value_parser = parse_format)]
    format: DataFormat,
    #[command(subcommand)]
    command: Command,
}

fn parse_format(s: &str) -> std::result::Result<DataFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Surface coordinates of one section.
    Generate(GenerateArgs),
    /// Random cases from the design space, as CSV.
    Sample(SampleArgs),
    /// C-grid mesh of a case.
    Mesh(MeshArgs),
    /// Forces and surface coefficients of a case.
    Postprocess(PostArgs),
    /// Boundary-layer profiles of a case.
    Profiles(ProfileArgs),
    /// Train/test split of a dataset.
    Split(SplitArgs),
    /// Radius graph on a subsample of a case.
    Graph(GraphArgs),
    /// Score predictions against a dataset.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    series: u8,
    /// Designation digits, comma separated: m,p,xx or l,p,q,xx.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    digits: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_SURFACE_POINTS)]
    n_points: usize,
    #[arg(long, default_value = "cosine", value_parser = ["cosine", "uniform"])]
    spacing: String,
    #[arg(long)]
    closed_te: bool,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    count: usize,
}

#[derive(Debug, Args)]
struct MeshArgs {
    /// Case metadata file.
    #[arg(long)]
    case: PathBuf,
    /// Mesh parameters as JSON; missing fields take their defaults.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Also write the block dictionary.
    #[arg(long)]
    dict: bool,
    /// Write a case directory with an analytic boundary-layer flow on the mesh nodes.
    #[arg(long)]
    emit_case: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PostArgs {
    #[arg(long)]
    case: PathBuf,
    /// Node table whose flow fields replace those of the case.
    #[arg(long)]
    pred: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GRADIENT_NEIGHBORS)]
    neighbors: usize,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[arg(long)]
    case: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6,0.8")]
    x: Vec<f64>,
    #[arg(long, default_value = "upper", value_parser = ["upper", "lower"])]
    side: String,
    /// Wall distance covered by each profile, m.
    #[arg(long, default_value_t = 0.05)]
    max_dist: f64,
    #[arg(long, default_value_t = 101)]
    samples: usize,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long, value_parser = ["full", "scarce", "reynolds", "aoa"])]
    task: String,
    /// Case list as written by `sample`.
    #[arg(long, conflicts_with = "dataset", required_unless_present = "dataset")]
    cases: Option<PathBuf>,
    /// Directory of case directories; also fits a normalizer on the training cases.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Fraction of the training cases moved to a validation set.
    #[arg(long)]
    validation: Option<f64>,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[arg(long)]
    case: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    radius: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_NEIGHBORS)]
    max_nb: usize,
    #[arg(long, default_value_t = DEFAULT_SUBSAMPLE)]
    n: usize,
    /// Stream of the subsample draw, usually the case index.
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    split: PathBuf,
    /// Prediction per test case: `DIR/<id>/nodes.*` or `DIR/<id>.csv|bin`.
    #[arg(long)]
    pred_dir: PathBuf,
    /// Ground-truth case directories `DIR/<id>`; defaults to the directory holding the split.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Target normalizer; otherwise fitted on the training cases found in the dataset.
    #[arg(long)]
    normalizer: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GRADIENT_NEIGHBORS)]
    neighbors: usize,
}

struct Ctx<'a> {
    seed: u64,
    out: Option<PathBuf>,
    format: DataFormat,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) | Error::Domain(_) => 1,
        _ if e.is_numeric() => 3,
        _ => 2,
    }
}

fn configure_threads(err: &mut dyn Write) {
    let Ok(v) = std::env::var(THREADS_ENV) else { return };
    match v.trim().parse::<usize>() {
        // Building the global pool fails once it exists; the first setting wins.
        Ok(n) => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Err(_) => {
            let _ = writeln!(err, "warning: ignoring {THREADS_ENV}={v:?}");
        }
    }
}

/// Run the command line `argv` (program name first) and return the exit code.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    configure_threads(stderr);
    let mut ctx = Ctx { seed: cli.seed, out: cli.out, format: cli.format, stdout, stderr };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(&mut ctx, a),
        Command::Sample(a) => cmd_sample(&mut ctx, a),
        Command::Mesh(a) => cmd_mesh(&mut ctx, a),
        Command::Postprocess(a) => cmd_postprocess(&mut ctx, a),
        Command::Profiles(a) => cmd_profiles(&mut ctx, a),
        Command::Split(a) => cmd_split(&mut ctx, a),
        Command::Graph(a) => cmd_graph(&mut ctx, a),
        Command::Evaluate(a) => cmd_evaluate(&mut ctx, a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(ctx.stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io { path: path.to_path_buf(), source: e }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// Write `text` to the `--out` file, or to stdout when none was given.
fn emit(ctx: &mut Ctx, text: &str) -> Result<()> {
    match &ctx.out {
        Some(p) => write_file(p, text),
        None => ctx.stdout.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>"))),
    }
}

fn require_out(ctx: &Ctx, what: &str) -> Result<PathBuf> {
    ctx.out.clone().ok_or_else(|| Error::Parameter(format!("{what} needs --out")))
}

fn xy_table(points: &[airfoil_kit::Vec2]) -> String {
    let mut s = String::from("x,y\n");
    for p in points {
        let _ = writeln!(s, "{},{}", p.x, p.y);
    }
    s
}

fn cmd_generate(ctx: &mut Ctx, a: GenerateArgs) -> Result<()> {
    let airfoil = Designation::from_digits(a.series, &a.digits)?;
    let spacing = if a.spacing == "uniform" { Spacing::Uniform } else { Spacing::Cosine };
    let g = generate_airfoil(&airfoil.params()?, a.n_points, spacing, a.closed_te)?;
    match ctx.out.clone() {
        Some(dir) => {
            create_dir(&dir)?;
            write_file(&dir.join("upper.csv"), &xy_table(&g.upper))?;
            write_file(&dir.join("lower.csv"), &xy_table(&g.lower))?;
            write_file(&dir.join("camber.csv"), &xy_table(&g.camber))
        }
        None => {
            let text = format!("# upper\n{}# lower\n{}", xy_table(&g.upper), xy_table(&g.lower));
            emit(ctx, &text)
        }
    }
}

const SAMPLE_HEADER: &str = "name,series,d1,d2,d3,d4,u_inf,aoa_deg,reynolds";

fn cmd_sample(ctx: &mut Ctx, a: SampleArgs) -> Result<()> {
    let mut s = format!("{SAMPLE_HEADER}\n");
    for c in sample_design_space(ctx.seed, a.count) {
        let mut d: Vec<String> = c.airfoil.digits().iter().map(f64::to_string).collect();
        d.resize(4, String::new());
        let _ = writeln!(s, "{},{},{},{},{},{}", c.name, c.airfoil.series(), d.join(","), c.u_inf, c.aoa_deg(), c.reynolds);
    }
    emit(ctx, &s)
}

fn parse_sample_csv(path: &Path) -> Result<Vec<CaseRecord>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(SAMPLE_HEADER) {
        return Err(Error::Data(format!("{}: expected header {SAMPLE_HEADER}", path.display())));
    }
    let mut out = Vec::new();
    for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let bad = |col: &str| Error::Data(format!("{}: row {row}, column {col}: cannot parse", path.display()));
        if f.len() != 9 {
            return Err(Error::Data(format!("{}: row {row}: expected 9 fields", path.display())));
        }
        let num = |i: usize, col: &str| f[i].trim().parse::<f64>().map_err(|_| bad(col));
        let mut digits = Vec::new();
        for (i, col) in ["d1", "d2", "d3", "d4"].iter().enumerate() {
            if !f[2 + i].trim().is_empty() {
                digits.push(num(2 + i, col)?);
            }
        }
        out.push(CaseRecord {
            name: f[0].trim().to_string(),
            series: f[1].trim().parse().map_err(|_| bad("series"))?,
            digits,
            u_inf: num(6, "u_inf")?,
            aoa_deg: num(7, "aoa_deg")?,
            reynolds: num(8, "reynolds")?,
        });
    }
    Ok(out)
}

fn read_record(path: &Path) -> Result<CaseSpec> {
    kio::read_json::<CaseRecord>(path)?.to_spec()
}

fn cmd_mesh(ctx: &mut Ctx, a: MeshArgs) -> Result<()> {
    let out = require_out(ctx, "mesh")?;
    let spec = read_record(&a.case)?;
    let params: MeshParams = match &a.params {
        Some(p) => kio::read_json(p)?,
        None => MeshParams::default(),
    };
    let geometry = generate_airfoil(&spec.airfoil.params()?, DEFAULT_SURFACE_POINTS, Spacing::Cosine, true)?;
    let mesh = assemble_cgrid(&geometry, &params, spec.aoa)?;
    write_mesh(&mesh, &out, ctx.format)?;
    if a.dict {
        write_file(&out.join("blockMeshDict"), &block_mesh_dict(&mesh))?;
    }
    if let Some(dir) = &a.emit_case {
        let mut cloud = mesh_cloud(&mesh, &geometry, &spec)?;
        impose_power_law(&mut cloud, &PowerLawLayer::default());
        kio::write_case(dir, &cloud, &spec, ctx.format)?;
    }
    let _ = writeln!(ctx.stderr, "{} nodes, {} cells", mesh.nodes.len(), mesh.n_cells());
    Ok(())
}

fn load_with_prediction(case: &Path, pred: Option<&Path>) -> Result<SimulationCloud> {
    let (cloud, _) = kio::read_case(case)?;
    let Some(pred) = pred else { return Ok(cloud) };
    let p = kio::read_node_table(pred)?;
    if p.positions != cloud.positions {
        return Err(Error::Data(format!("{}: prediction nodes differ from the case nodes", pred.display())));
    }
    cloud.with_fields(p.velocity, p.pressure, p.nu_t)
}

fn cmd_postprocess(ctx: &mut Ctx, a: PostArgs) -> Result<()> {
    let out = require_out(ctx, "postprocess")?;
    let cloud = load_with_prediction(&a.case, a.pred.as_deref())?;
    let tree = KdTree::new(&cloud.positions);
    let res = analyze_case(&cloud, &tree, a.neighbors)?;
    create_dir(&out)?;
    kio::write_json(&out.join("forces.json"), &res.forces)?;
    let mut s = String::from("s,x,y,c_p,c_tau,c_tau_magnitude\n");
    for c in &res.coefficients {
        let _ = writeln!(s, "{},{},{},{},{},{}", c.s, c.x, c.y, c.cp, c.c_tau, c.c_tau_magnitude);
    }
    write_file(&out.join("surface.csv"), &s)?;
    let fallback = res.surface.gradient_fallback.iter().filter(|f| **f).count();
    if fallback > 0 {
        let _ = writeln!(ctx.stderr, "warning: {fallback} surface nodes used the one-sided gradient fallback");
    }
    Ok(())
}

fn cmd_profiles(ctx: &mut Ctx, a: ProfileArgs) -> Result<()> {
    let out = require_out(ctx, "profiles")?;
    let side: Side = a.side.parse()?;
    let (cloud, _) = kio::read_case(&a.case)?;
    let tree = KdTree::new(&cloud.positions);
    let dist = airfoil_kit::post::surface_chain(&cloud)?;
    create_dir(&out)?;
    for &x0 in &a.x {
        let prof = boundary_layer_profile(&cloud, &tree, &dist, x0, side, a.max_dist, a.samples)?;
        let mut s = String::from("d,u_over_uinf,v_over_uinf,nu_t_over_nu\n");
        for p in &prof.samples {
            let _ = writeln!(s, "{},{},{},{}", p.d, p.u, p.v, p.nu_t_ratio);
        }
        write_file(&out.join(format!("profile_{}_{x0:.3}.csv", a.side)), &s)?;
    }
    Ok(())
}

/// Case directories (those holding `case.json`) directly below `dir`, by name.
fn dataset_cases(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.join(kio::CASE_FILE).is_file() {
            let id = path.file_name().unwrap().to_string_lossy().into_owned();
            out.insert(id, path);
        }
    }
    Ok(out)
}

fn fit_target_normalizer(dirs: &[&PathBuf]) -> Result<Normalizer> {
    let mut tables = Vec::with_capacity(dirs.len());
    for d in dirs {
        let (cloud, spec) = kio::read_case(d)?;
        tables.push(build_features(&cloud, &spec)?.flat_targets());
    }
    let refs: Vec<&[f64]> = tables.iter().map(Vec::as_slice).collect();
    Normalizer::fit(&refs, TARGET_WIDTH)
}

fn cmd_split(ctx: &mut Ctx, a: SplitArgs) -> Result<()> {
    let task: Task = a.task.parse()?;
    let (metas, dirs) = match (&a.cases, &a.dataset) {
        (Some(p), _) => {
            let metas = parse_sample_csv(p)?
                .iter()
                .map(|r| Ok(CaseMeta::from(&r.to_spec()?)))
                .collect::<Result<Vec<_>>>()?;
            (metas, None)
        }
        (None, Some(d)) => {
            let dirs = dataset_cases(d)?;
            let mut metas = Vec::with_capacity(dirs.len());
            for (id, path) in &dirs {
                let spec = read_record(&path.join(kio::CASE_FILE))?;
                metas.push(CaseMeta { id: id.clone(), reynolds: spec.reynolds, aoa_deg: spec.aoa_deg() });
            }
            (metas, Some(dirs))
        }
        (None, None) => return Err(Error::Parameter("split needs --cases or --dataset".into())),
    };
    let mut split = split_dataset(&metas, task, ctx.seed)?;
    if let Some(f) = a.validation {
        split = carve_validation(&split, f)?;
    }
    let mut json = serde_json::to_string_pretty(&split).map_err(|e| Error::Data(e.to_string()))?;
    json.push('\n');
    emit(ctx, &json)?;
    if let (Some(dirs), Some(out)) = (dirs, &ctx.out) {
        let train: Vec<&PathBuf> = split.train_ids.iter().map(|id| &dirs[id]).collect();
        kio::write_json(&out.with_file_name("normalizer.json"), &fit_target_normalizer(&train)?)?;
    }
    Ok(())
}

fn cmd_graph(ctx: &mut Ctx, a: GraphArgs) -> Result<()> {
    let out = match &ctx.out {
        Some(p) => p.clone(),
        None => a.case.join("graph"),
    };
    let (cloud, _) = kio::read_case(&a.case)?;
    let sub = subsample(cloud.len(), a.n, ctx.seed, a.stream);
    if sub.exhausted {
        let _ = writeln!(ctx.stderr, "warning: case has {} nodes, fewer than the requested {}", cloud.len(), a.n);
    }
    let part = select(&cloud, &sub.indices);
    let graph = radius_graph(&part.positions, a.radius, a.max_nb)?;
    create_dir(&out)?;
    let mut nodes = String::from("node\n");
    for i in &sub.indices {
        let _ = writeln!(nodes, "{i}");
    }
    write_file(&out.join("subsample.csv"), &nodes)?;
    let mut edges = String::from("source,target\n");
    for (s, t) in &graph.edges {
        let _ = writeln!(edges, "{s},{t}");
    }
    write_file(&out.join("edges.csv"), &edges)
}

fn prediction_path(dir: &Path, id: &str) -> Result<PathBuf> {
    let sub = dir.join(id);
    if sub.is_dir() {
        return kio::find_node_table(&sub);
    }
    for ext in ["csv", "bin"] {
        let p = dir.join(format!("{id}.{ext}"));
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(Error::Data(format!("{}: no prediction for case {id}", dir.display())))
}

fn cmd_evaluate(ctx: &mut Ctx, a: EvaluateArgs) -> Result<()> {
    let out = require_out(ctx, "evaluate")?;
    let split: TaskSplit = kio::read_json(&a.split)?;
    let dataset = match &a.dataset {
        Some(d) => d.clone(),
        None => a.split.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let dirs = dataset_cases(&dataset)?;
    let lookup = |id: &String| {
        dirs.get(id).ok_or_else(|| Error::Data(format!("{}: case {id} not found", dataset.display())))
    };
    let norm = match &a.normalizer {
        Some(p) => kio::read_json(p)?,
        None => {
            let train: Vec<&PathBuf> = split.train_ids.iter().filter_map(|id| dirs.get(id)).collect();
            if train.is_empty() {
                return Err(Error::Data("no training case available to fit the normalizer; pass --normalizer".into()));
            }
            fit_target_normalizer(&train)?
        }
    };
    let mut truths = Vec::with_capacity(split.test_ids.len());
    let mut preds = Vec::with_capacity(split.test_ids.len());
    for id in &split.test_ids {
        let (truth, _) = kio::read_case(lookup(id)?)?;
        let p = kio::read_node_table(&prediction_path(&a.pred_dir, id)?)?;
        preds.push(truth.with_fields(p.velocity.clone(), p.pressure.clone(), p.nu_t.clone()).and_then(|c| {
            if p.positions != truth.positions {
                Err(Error::Data(format!("case {id}: prediction nodes differ from the truth")))
            } else {
                Ok(c)
            }
        })?);
        truths.push(truth);
    }
    let cases: Vec<EvalCase> = split
        .test_ids
        .iter()
        .zip(truths.iter().zip(&preds))
        .map(|(id, (t, p))| EvalCase { name: id, truth: t, prediction: p })
        .collect();
    let report = evaluate(&cases, &norm, a.neighbors)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    kio::write_json(&out, &report)?;
    write_file(&out.with_file_name("mse_table.csv"), &report.mse_table_csv())?;
    write_file(&out.with_file_name("coefficient_table.csv"), &report.coefficient_table_csv())?;
    write_file(&out.with_file_name("coefficient_scatter.csv"), &report.scatter_csv())
}
