//! Command-line interface: `extract`, `simulate`, `bench` and `convert`.
//!
//! Exit codes are 0 on success, 1 for usage errors and 2 for input that
//! cannot be read or parsed.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::{format_summary, run_bench, summarize, write_csv, BenchCase, BenchConfig};
use crate::extraction::{ExtractionConfig, StopRule};
use crate::io::{parse_carmen_log, render_svg, CarmenOptions, IoError, MapFile, ScanFile, SvgStyle};
use crate::methods::{run_method, Method};
use crate::optimization::OptimizerOptions;
use crate::scan::{Pose2, Scan};
use crate::sensor_model::ConstantVariance;
use crate::simulator::{simulate_case, SimConfig, CORPUS_VERTEX_COUNTS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ple", version, about = "Polyline maps from 2-D laser range scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract a polyline map from one scan.
    Extract(ExtractArgs),
    /// Write simulated scans of random polygonal rooms with their ground truth.
    Simulate(SimulateArgs),
    /// Run methods over a corpus and report per-scan metrics as CSV.
    Bench(BenchArgs),
    /// Convert a CARMEN log into JSON scan files.
    Convert(ConvertArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Scan file (.json) or CARMEN log (any other extension).
    input: PathBuf,
    /// Force the CARMEN reader regardless of the file extension.
    #[arg(long)]
    carmen: bool,
    /// Range assumed for CARMEN FLASER records, meters.
    #[arg(long, default_value_t = 80.0)]
    flaser_max_range: f64,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Record of a CARMEN log to use, counted from 0.
    #[arg(long, conflicts_with = "seed")]
    scan_index: Option<usize>,
    /// Pick a CARMEN record at random with this seed instead of the first.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "ple")]
    method: Method,
    /// Vertex budget J.
    #[arg(long, conflicts_with = "stop_rmse")]
    max_vertices: Option<usize>,
    /// Longest gap between neighboring endpoints that still gets connected, meters.
    #[arg(long, default_value_t = 1.0)]
    lmax: f64,
    /// Residual charged for rays that lose their segment, meters.
    #[arg(long, default_value_t = 0.5)]
    drm: f64,
    /// Ignore readings beyond this range, meters.
    #[arg(long)]
    rmax: Option<f64>,
    /// Stop at the smallest map whose RMSE stays at or below this, meters
    /// (ple and ple+ only).
    #[arg(long)]
    stop_rmse: Option<f64>,
    /// Also draw scan and map to this SVG file.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Map output; standard output if absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn polygon_vertices(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if CORPUS_VERTEX_COUNTS.contains(&n) {
        Ok(n)
    } else {
        Err(format!("must be one of {CORPUS_VERTEX_COUNTS:?}"))
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Vertices per polygon; cycles through all supported counts if absent.
    #[arg(long, value_parser = polygon_vertices)]
    polygon_vertices: Option<usize>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Range noise standard deviation, meters.
    #[arg(long, default_value_t = 0.03)]
    sigma_r: f64,
    /// Bearing noise standard deviation, degrees.
    #[arg(long, default_value_t = 0.2)]
    sigma_angle_deg: f64,
    /// Rays per scan.
    #[arg(long, default_value_t = 360)]
    rays: usize,
    /// Directory receiving scan_NNNN.json and truth_NNNN.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of scan_*.json files, with optional matching truth_*.json.
    #[arg(long, required_unless_present_any = ["carmen", "simulate"])]
    corpus: Option<PathBuf>,
    /// CARMEN log whose records form the corpus.
    #[arg(long, conflicts_with = "corpus")]
    carmen: Option<PathBuf>,
    /// Simulate this many scans in memory instead of reading files.
    #[arg(long, conflicts_with_all = ["corpus", "carmen"])]
    simulate: Option<usize>,
    /// Seed of the simulated corpus, or of the record sample of a log.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use a random sample of this many log records.
    #[arg(long, requires = "carmen")]
    sample: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "ple,ple+,vvl,ief,sam")]
    methods: Vec<Method>,
    /// Vertex budgets.
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
    budgets: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    lmax: f64,
    #[arg(long, default_value_t = 0.5)]
    drm: f64,
    /// CSV output; standard output if absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Worker threads; defaults to PLE_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Directory receiving scan_NNNN.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// Failure of a command after its arguments were accepted.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn input_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| input_err(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::Input(e.to_string())),
    }
}

fn read_scan_file(path: &Path) -> Result<(ScanFile, Scan), Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_err(path, e))?;
    let file = ScanFile::from_json(&text).map_err(|e| input_err(path, e))?;
    let scan = file.to_scan().map_err(|e| input_err(path, e))?;
    Ok((file, scan))
}

fn is_json(input: &InputArgs) -> bool {
    !input.carmen && input.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Scans and sensor poses of a CARMEN log, with the skipped-line count.
fn read_carmen(input: &InputArgs, err: &mut dyn Write) -> Result<Vec<(Scan, Pose2)>, Failure> {
    let path = &input.input;
    let file = fs::File::open(path).map_err(|e| input_err(path, e))?;
    let opts = CarmenOptions {
        flaser_max_range: input.flaser_max_range,
    };
    let log = parse_carmen_log(BufReader::new(file), &opts).map_err(|e| input_err(path, e))?;
    if log.skipped > 0 {
        let _ = writeln!(err, "warning: skipped {} malformed laser lines", log.skipped);
    }
    Ok(log.records.iter().map(|r| (r.to_scan(), r.laser_pose)).collect())
}

fn extract_cmd(args: ExtractArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    if args.stop_rmse.is_some() && !matches!(args.method, Method::Ple | Method::PlePlus) {
        return Err(Failure::Usage("--stop-rmse applies to ple and ple+ only".into()));
    }
    let scan = if is_json(&args.input) {
        if args.scan_index.is_some() || args.seed.is_some() {
            return Err(Failure::Usage("--scan-index and --seed select CARMEN records".into()));
        }
        read_scan_file(&args.input.input)?.1
    } else {
        let mut scans = read_carmen(&args.input, err)?;
        if scans.is_empty() {
            return Err(input_err(&args.input.input, "no laser records"));
        }
        let index = match (args.scan_index, args.seed) {
            (Some(i), _) => i,
            (None, Some(seed)) => ChaCha8Rng::seed_from_u64(seed).random_range(0..scans.len()),
            (None, None) => 0,
        };
        if index >= scans.len() {
            return Err(Failure::Usage(format!("--scan-index {index} but the log has {} records", scans.len())));
        }
        scans.swap_remove(index).0
    };
    let config = ExtractionConfig {
        r_max: args.rmax,
        l_max: args.lmax,
        max_vertices: args.max_vertices.unwrap_or(10),
        d_rm: args.drm,
        stop: args.stop_rmse.map_or(StopRule::VertexCount, StopRule::MaxRmse),
    };
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let map = run_method(
        args.method,
        &scan,
        &config,
        &ConstantVariance::default(),
        &OptimizerOptions::default(),
    )
    .map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(svg) = &args.svg {
        fs::write(svg, render_svg(&scan, &map, &SvgStyle::default())).map_err(|e| input_err(svg, e))?;
    }
    write_output(args.output.as_deref(), &(MapFile::from_map(&map).to_json() + "\n"), out)
}

fn simulate_cmd(args: SimulateArgs, err: &mut dyn Write) -> Result<(), Failure> {
    let base = SimConfig {
        sigma_r: args.sigma_r,
        sigma_angle: args.sigma_angle_deg.to_radians(),
        ray_count: args.rays,
        ..SimConfig::default()
    };
    fs::create_dir_all(&args.out_dir).map_err(|e| input_err(&args.out_dir, e))?;
    for i in 0..args.count {
        let n = args
            .polygon_vertices
            .unwrap_or(CORPUS_VERTEX_COUNTS[i % CORPUS_VERTEX_COUNTS.len()]);
        let config = SimConfig {
            n_vertices: n,
            ..base.clone()
        };
        let case = simulate_case(&config, args.seed, i as u64).map_err(|e| Failure::Usage(e.to_string()))?;
        let scan = ScanFile::from_scan(&case.scan, Pose2::default());
        let truth = MapFile::from_map(&case.truth.to_map());
        for (name, text) in [("scan", scan.to_json()), ("truth", truth.to_json())] {
            let path = args.out_dir.join(format!("{name}_{i:04}.json"));
            fs::write(&path, text + "\n").map_err(|e| input_err(&path, e))?;
        }
    }
    let _ = writeln!(err, "wrote {} scan/truth pairs to {}", args.count, args.out_dir.display());
    Ok(())
}

fn corpus_from_dir(dir: &Path) -> Result<Vec<BenchCase>, Failure> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| input_err(dir, e))?
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.starts_with("scan_") && n.ends_with(".json"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let (file, scan) = read_scan_file(&dir.join(&name))?;
            let truth_path = dir.join(name.replacen("scan_", "truth_", 1));
            let truth = if truth_path.exists() {
                let text = fs::read_to_string(&truth_path).map_err(|e| input_err(&truth_path, e))?;
                let map = MapFile::from_json(&text)
                    .and_then(|m| m.to_map())
                    .map_err(|e| input_err(&truth_path, e))?;
                map.polylines().first().map(|l| l.vertices().to_vec())
            } else {
                None
            };
            Ok(BenchCase {
                id: name.trim_end_matches(".json").to_string(),
                scan,
                truth,
                sensor: file.pose.position(),
            })
        })
        .collect()
}

fn bench_cmd(args: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let cases: Vec<BenchCase> = if let Some(dir) = &args.corpus {
        corpus_from_dir(dir)?
    } else if let Some(log) = &args.carmen {
        let input = InputArgs {
            input: log.clone(),
            carmen: true,
            flaser_max_range: CarmenOptions::default().flaser_max_range,
        };
        let scans = read_carmen(&input, err)?;
        let mut picked: Vec<usize> = (0..scans.len()).collect();
        if let Some(k) = args.sample {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            picked = rand::seq::index::sample(&mut rng, scans.len(), k.min(scans.len())).into_vec();
            picked.sort_unstable();
        }
        picked
            .into_iter()
            .map(|i| BenchCase {
                id: format!("record_{i:04}"),
                scan: scans[i].0.clone(),
                truth: None,
                sensor: scans[i].1.position(),
            })
            .collect()
    } else {
        let count = args.simulate.unwrap_or(0);
        crate::simulator::corpus(&SimConfig::default(), count, args.seed)
            .map_err(|e| Failure::Usage(e.to_string()))?
            .into_iter()
            .enumerate()
            .map(|(i, c)| BenchCase {
                id: format!("sim_{i:04}"),
                truth: Some(c.truth.vertices().to_vec()),
                scan: c.scan,
                sensor: crate::geometry::Point2::ORIGIN,
            })
            .collect()
    };
    let with_area = !cases.is_empty() && cases.iter().all(|c| c.truth.is_some());
    if !with_area && !cases.is_empty() {
        let _ = writeln!(err, "note: ground truth missing, area error column omitted");
    }
    let config = BenchConfig {
        methods: args.methods,
        budgets: args.budgets,
        extraction: ExtractionConfig {
            l_max: args.lmax,
            d_rm: args.drm,
            ..ExtractionConfig::default()
        },
        threads: args.threads,
        ..BenchConfig::default()
    };
    config.extraction.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let rows = run_bench(&cases, &config).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut csv = Vec::new();
    write_csv(&rows, with_area, &mut csv).map_err(|e| Failure::Input(e.to_string()))?;
    write_output(args.output.as_deref(), &String::from_utf8_lossy(&csv), out)?;
    if !rows.is_empty() {
        let _ = write!(err, "{}", format_summary(&summarize(&rows)));
    }
    Ok(())
}

fn convert_cmd(args: ConvertArgs, err: &mut dyn Write) -> Result<(), Failure> {
    let scans = read_carmen(&args.input, err)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| input_err(&args.out_dir, e))?;
    for (i, (scan, pose)) in scans.iter().enumerate() {
        let path = args.out_dir.join(format!("scan_{i:04}.json"));
        fs::write(&path, ScanFile::from_scan(scan, *pose).to_json() + "\n").map_err(|e| input_err(&path, e))?;
    }
    let _ = writeln!(err, "wrote {} scans to {}", scans.len(), args.out_dir.display());
    Ok(())
}

/// Runs the command line `args` (including the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
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
    let result = match cli.command {
        Command::Extract(a) => extract_cmd(a, out, err),
        Command::Simulate(a) => simulate_cmd(a, err),
        Command::Bench(a) => bench_cmd(a, out, err),
        Command::Convert(a) => convert_cmd(a, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

/// Runs the process command line against standard output and error.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
