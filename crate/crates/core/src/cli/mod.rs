//! The `vekit` command line.
//!
//! Every command writes its result to `out` and timings or progress to
//! `err`, and returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | the input has errors (diagnostics, mapping failures, oracle mismatch) |
//! | 2 | usage error |
//! | 3 | I/O or simulation failure |

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::runtime::{parse_script, InputBinding, RuntimeError, SimConfig, Simulation};
use crate::scene_format::{
    format_number as num, import_dotscene, parse_properties, parse_scenes, serialize_scenes, validate_with_assets,
    Diagnostic, FormatError, SceneDocument,
};
use crate::scene_graph::{SceneError, World};
use crate::spatial::workload::{random_boxes, random_frustum};
use crate::spatial::{build_index, Aabb, BruteForce, IndexKind, ObjectId, QueryStats, SpatialIndex};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DIAGNOSTICS: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "vekit", version, about = "Scene validation, conversion, simulation and culling checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scene file and print one diagnostic per line.
    Validate { scene: PathBuf },
    /// Print the instantiated node tree of a scene.
    Inspect {
        scene: PathBuf,
        /// Scene to instantiate; defaults to the first one.
        #[arg(long = "scene")]
        name: Option<String>,
    },
    /// Convert a plain DotScene plus a properties sidecar. Mesh files named
    /// in the sidecar resolve against the input's directory.
    Convert {
        input: PathBuf,
        properties: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the frame loop on a scene with an input script.
    Simulate(SimulateArgs),
    /// Compare an index's frustum culling against a linear scan.
    Cullbench(CullbenchArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub scene: PathBuf,
    #[arg(long)]
    pub script: PathBuf,
    #[arg(long)]
    pub frames: u64,
    #[arg(long, default_value_t = 1.0 / 60.0)]
    pub dt: f64,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Key binding file; the built-in bindings are used without it.
    #[arg(long)]
    pub bindings: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub stride: u64,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["scene", "random"])))]
pub struct CullbenchArgs {
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Number of random boxes to generate instead of reading a scene.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long)]
    pub index: IndexKind,
    #[arg(long)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    execute(cli.command, out, err)
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match command {
        Command::Validate { scene } => validate(&scene, out),
        Command::Inspect { scene, name } => inspect(&scene, name.as_deref(), out),
        Command::Convert { input, properties, output } => convert(&input, &properties, &output, out),
        Command::Simulate(args) => simulate(&args, out),
        Command::Cullbench(args) => cullbench(&args, out, err),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "vekit: {}", failure.message);
            failure.code
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn runtime(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_RUNTIME, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::runtime(e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::runtime(format!("cannot read {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read(path)?).map_err(|_| Failure::runtime(format!("{} is not UTF-8", path.display())))
}

fn base_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Diagnostics for a document that failed to parse.
fn format_diagnostics(e: &FormatError) -> Vec<Diagnostic> {
    match e {
        FormatError::InvalidDocument(d) | FormatError::Mapping(d) => d.clone(),
        FormatError::Syntax { line, column, message } => {
            vec![Diagnostic::error(format!("{line}:{column}"), "syntax", message.clone())]
        }
        FormatError::Schema { path, code, message } => vec![Diagnostic::error(path.clone(), code, message.clone())],
        FormatError::Value { path, message } => vec![Diagnostic::error(path.clone(), "bad-value", message.clone())],
        FormatError::Properties { line, message } => {
            vec![Diagnostic::error(format!("line {line}"), "properties", message.clone())]
        }
    }
}

fn print_diagnostics(out: &mut dyn Write, diags: &[Diagnostic]) -> Result<bool, Failure> {
    for d in diags {
        writeln!(out, "{d}")?;
    }
    Ok(diags.iter().any(Diagnostic::is_error))
}

fn load_document(path: &Path, out: &mut dyn Write) -> Result<Result<SceneDocument, u8>, Failure> {
    match parse_scenes(&read(path)?) {
        Ok(doc) => Ok(Ok(doc)),
        Err(e) => {
            print_diagnostics(out, &format_diagnostics(&e))?;
            Ok(Err(EXIT_DIAGNOSTICS))
        }
    }
}

fn validate(path: &Path, out: &mut dyn Write) -> CmdResult {
    let doc = match load_document(path, out)? {
        Ok(doc) => doc,
        Err(code) => return Ok(code),
    };
    let failed = print_diagnostics(out, &validate_with_assets(&doc, base_dir(path)))?;
    Ok(if failed { EXIT_DIAGNOSTICS } else { EXIT_OK })
}

fn instantiate(doc: &SceneDocument, name: &str, base: &Path, out: &mut dyn Write) -> Result<Result<World, u8>, Failure> {
    match World::instantiate_with_assets(doc, name, base) {
        Ok(w) => Ok(Ok(w)),
        Err(SceneError::ValidationFailed(diags)) => {
            print_diagnostics(out, &diags)?;
            Ok(Err(EXIT_DIAGNOSTICS))
        }
        Err(SceneError::UnknownScene(n)) => Err(Failure::usage(format!("no scene named '{n}'"))),
        Err(e) => Err(Failure::runtime(e.to_string())),
    }
}

fn inspect(path: &Path, name: Option<&str>, out: &mut dyn Write) -> CmdResult {
    let doc = match load_document(path, out)? {
        Ok(doc) => doc,
        Err(code) => return Ok(code),
    };
    let name = match name {
        Some(n) => n.to_string(),
        None => match doc.scenes.first() {
            Some(s) => s.name.clone(),
            None => return Err(Failure::usage("document has no scenes")),
        },
    };
    let world = match instantiate(&doc, &name, base_dir(path), out)? {
        Ok(w) => w,
        Err(code) => return Ok(code),
    };
    out.write_all(describe_world(&name, &world).map_err(|e| Failure::runtime(e.to_string()))?.as_bytes())?;
    Ok(EXIT_OK)
}

fn describe_world(name: &str, world: &World) -> Result<String, SceneError> {
    let mut s = String::new();
    let g = world.physics.gravity();
    let _ = writeln!(
        s,
        "scene {name}: {} nodes, {} bodies, {} actors, {} characters, gravity {} {} {}",
        world.len(),
        world.physics.len(),
        world.actors().len(),
        world.character_spawns().len(),
        num(g.x),
        num(g.y),
        num(g.z)
    );
    let mut stack: Vec<(usize, _)> = world.roots().iter().rev().map(|r| (0, *r)).collect();
    while let Some((depth, id)) = stack.pop() {
        let node = world.node(id)?;
        let p = world.world_transform(id)?.position;
        let _ = write!(s, "{}{} {} at {} {} {}", "  ".repeat(depth), id, node.name, num(p.x), num(p.y), num(p.z));
        let a = &node.attachments;
        if let Some(e) = &a.entity {
            let _ = write!(s, " entity={}", e.mesh_file);
        }
        if let Some(b) = a.body.and_then(|b| world.physics.body(b)) {
            let _ = write!(s, " body={}:{:?}:group{}", b.id, b.kind, b.group);
        }
        if world.character_spawns().iter().any(|c| c.node == id) {
            s.push_str(" character");
        }
        if a.light.is_some() {
            s.push_str(" light");
        }
        if let Some(c) = &a.camera {
            let _ = write!(s, " camera={}->{}", c.source, c.target);
        }
        for sound in &a.sounds {
            let _ = write!(s, " sound={}", sound.file);
        }
        s.push('\n');
        stack.extend(node.children.iter().rev().map(|c| (depth + 1, *c)));
    }
    for &actor in world.actors() {
        if let Some(b) = world.physics.body(actor) {
            let p = b.pose.position;
            let _ = writeln!(s, "actor {} {:?} group{} at {} {} {}", b.id, b.kind, b.group, num(p.x), num(p.y), num(p.z));
        }
    }
    Ok(s)
}

fn convert(input: &Path, properties: &Path, output: &Path, out: &mut dyn Write) -> CmdResult {
    let source = read(input)?;
    let props = match parse_properties(&read_text(properties)?) {
        Ok(p) => p,
        Err(e) => {
            print_diagnostics(out, &format_diagnostics(&e))?;
            return Ok(EXIT_DIAGNOSTICS);
        }
    };
    let outcome = match import_dotscene(&source, &props) {
        Ok(o) => o,
        Err(e) => {
            print_diagnostics(out, &format_diagnostics(&e))?;
            return Ok(EXIT_DIAGNOSTICS);
        }
    };
    if print_diagnostics(out, &outcome.diagnostics)? {
        return Ok(EXIT_DIAGNOSTICS);
    }
    let bytes = match serialize_scenes(&outcome.document) {
        Ok(b) => b,
        Err(e) => {
            print_diagnostics(out, &format_diagnostics(&e))?;
            return Ok(EXIT_DIAGNOSTICS);
        }
    };
    std::fs::write(output, &bytes).map_err(|e| Failure::runtime(format!("cannot write {}: {e}", output.display())))?;
    let reparsed = match parse_scenes(&bytes) {
        Ok(d) => d,
        Err(e) => {
            print_diagnostics(out, &format_diagnostics(&e))?;
            return Ok(EXIT_DIAGNOSTICS);
        }
    };
    let failed = print_diagnostics(out, &validate_with_assets(&reparsed, base_dir(input)))?;
    Ok(if failed { EXIT_DIAGNOSTICS } else { EXIT_OK })
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let config = SimConfig { dt: args.dt, frames: args.frames, trace_stride: args.stride, seed: 0 };
    config.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let doc = match load_document(&args.scene, out)? {
        Ok(doc) => doc,
        Err(code) => return Ok(code),
    };
    let script = match parse_script(&read_text(&args.script)?) {
        Ok(s) => s,
        Err(e) => {
            writeln!(out, "ERROR {} script {e}", args.script.display())?;
            return Ok(EXIT_DIAGNOSTICS);
        }
    };
    let binding = match &args.bindings {
        None => InputBinding::default(),
        Some(path) => match InputBinding::parse(&read_text(path)?) {
            Ok(b) => b,
            Err(e) => {
                writeln!(out, "ERROR {} bindings {e}", path.display())?;
                return Ok(EXIT_DIAGNOSTICS);
            }
        },
    };
    let mut sim = match Simulation::from_document(&doc, base_dir(&args.scene)) {
        Ok(sim) => sim,
        Err(RuntimeError::Scene(SceneError::ValidationFailed(diags))) => {
            print_diagnostics(out, &diags)?;
            return Ok(EXIT_DIAGNOSTICS);
        }
        Err(e) => return Err(Failure::runtime(e.to_string())),
    };
    sim.binding = binding;
    let trace = sim.run(&script, &config).map_err(|e| Failure::runtime(e.to_string()))?;
    for warning in &trace.warnings {
        writeln!(out, "WARNING {warning}")?;
    }
    if let Some(path) = &args.trace {
        std::fs::write(path, trace.to_text())
            .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    writeln!(out, "DIGEST {}", trace.digest())?;
    Ok(EXIT_OK)
}

/// Per-trial culling result of one index compared against the linear scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CullTrial {
    pub visible: usize,
    pub nodes_visited: usize,
    pub brute_visited: usize,
    pub agrees: bool,
}

/// Builds `kind` over `objects` and checks `trials` seeded frustums against
/// [`BruteForce`].
pub fn cull_trials(
    kind: IndexKind,
    objects: &[(ObjectId, Aabb)],
    trials: usize,
    seed: u64,
) -> Result<Vec<CullTrial>, crate::spatial::SpatialError> {
    let index = build_index(kind, objects)?;
    let brute = BruteForce::build(objects)?;
    let region = objects
        .iter()
        .map(|(_, b)| *b)
        .reduce(|a, b| a.union(&b))
        .unwrap_or(Aabb::new(glam::DVec3::ZERO, glam::DVec3::ONE));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..trials)
        .map(|_| {
            let frustum = random_frustum(&mut rng, &region);
            let (mut stats, mut brute_stats) = (QueryStats::default(), QueryStats::default());
            let got = index.query_frustum_counted(&frustum, &mut stats);
            let expected = brute.query_frustum_counted(&frustum, &mut brute_stats);
            CullTrial {
                visible: got.len(),
                nodes_visited: stats.nodes_visited,
                brute_visited: brute_stats.nodes_visited,
                agrees: got == expected,
            }
        })
        .collect())
}

fn cullbench(args: &CullbenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let objects = match (&args.scene, args.random) {
        (Some(path), None) => {
            let doc = match load_document(path, out)? {
                Ok(doc) => doc,
                Err(code) => return Ok(code),
            };
            let Some(first) = doc.scenes.first() else { return Err(Failure::usage("document has no scenes")) };
            let world = match instantiate(&doc, &first.name, base_dir(path), out)? {
                Ok(w) => w,
                Err(code) => return Ok(code),
            };
            world.bounded_nodes().into_iter().map(|(id, b)| (id.0, b)).collect()
        }
        (None, Some(n)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            random_boxes(&mut rng, n, 100.0)
        }
        _ => return Err(Failure::usage("give exactly one of --scene and --random")),
    };
    let started = Instant::now();
    let trials = cull_trials(args.index, &objects, args.trials, args.seed.wrapping_add(1))
        .map_err(|e| Failure::runtime(e.to_string()))?;
    let elapsed = started.elapsed();
    writeln!(out, "index {} objects {} trials {} seed {}", args.index, objects.len(), args.trials, args.seed)?;
    for (i, t) in trials.iter().enumerate() {
        writeln!(
            out,
            "trial {i} visible {} visited {} brute {} {}",
            t.visible,
            t.nodes_visited,
            t.brute_visited,
            if t.agrees { "ok" } else { "MISMATCH" }
        )?;
    }
    let agreeing = trials.iter().filter(|t| t.agrees).count();
    writeln!(out, "agreement {agreeing}/{}", trials.len())?;
    writeln!(
        err,
        "{} trials in {:.3} ms ({:.3} ms per trial)",
        trials.len(),
        elapsed.as_secs_f64() * 1e3,
        elapsed.as_secs_f64() * 1e3 / trials.len().max(1) as f64
    )?;
    Ok(if agreeing == trials.len() { EXIT_OK } else { EXIT_DIAGNOSTICS })
}

#[cfg(test)]
mod tests;
