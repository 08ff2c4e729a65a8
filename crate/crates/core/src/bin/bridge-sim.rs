use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use bridgesim::config::SimConfig;
use bridgesim::experiments::{run_experiment, ExperimentError, ExperimentName};
use bridgesim::perception::{
    detect_boxes, read_cloud_csv, read_ply, write_cloud_csv, write_ply, Box3D, Roi2D,
};
use bridgesim::scene::{gen_scene, SceneSpec};
use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "bridge-sim",
    version,
    about = "Motion bridge and box-fitting simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, or `all`, and write its tables and reports.
    Run {
        #[arg(long)]
        experiment: String,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic scene with ground truth and RoIs.
    GenScene {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit boxes to a point cloud given RoIs.
    Detect {
        /// `.ply` or `.csv` cloud, camera frame, meters.
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        rois: PathBuf,
        /// Scene spec supplying intrinsics, catalog and camera pose.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Write detections here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] bridgesim::config::ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Perception(#[from] bridgesim::perception::PerceptionError),
    #[error("{0:#}")]
    Io(anyhow::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Experiment(ExperimentError::Unknown(_)) => "unknown_experiment",
            CliError::Experiment(ExperimentError::Output { .. }) => "output",
            CliError::Experiment(_) => "experiment",
            CliError::Perception(_) => "perception",
            CliError::Io(_) => "io",
        }
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct Detection<'a> {
    roi_index: usize,
    category: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    box3d: Option<&'a Box3D>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let file = File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(CliError::Io)?;
    serde_json::from_reader(BufReader::new(file))
        .with_context(|| format!("cannot parse {}", path.display()))
        .map_err(CliError::Io)
}

fn write_file(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>,
) -> Result<(), CliError> {
    let run = || -> anyhow::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        write(&mut w)?;
        w.flush()?;
        Ok(())
    };
    run()
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(CliError::Io)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

fn run(
    experiment: &str,
    seed: Option<u64>,
    config: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let mut cfg = match config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if experiment == "all" {
        for name in ExperimentName::ALL {
            run_experiment(name, &cfg)?.write_to(&cfg, &out.join(name.as_str()))?;
            eprintln!("{name}: done");
        }
    } else {
        let name: ExperimentName = experiment.parse()?;
        let output = run_experiment(name, &cfg)?;
        output.write_to(&cfg, out)?;
        let _ = write!(std::io::stdout().lock(), "{}", output.summary);
    }
    Ok(())
}

fn load_spec(spec: Option<&Path>) -> Result<SceneSpec, CliError> {
    let spec: SceneSpec = match spec {
        Some(path) => read_json(path)?,
        None => SceneSpec::default(),
    };
    spec.validate()?;
    Ok(spec)
}

fn gen(spec: Option<&Path>, seed: u64, out: &Path) -> Result<(), CliError> {
    let spec = load_spec(spec)?;
    let scene = gen_scene(&spec, seed)?;
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create {}", out.display()))
        .map_err(CliError::Io)?;
    write_file(&out.join("cloud.ply"), |w| Ok(write_ply(&scene.cloud, w)?))?;
    write_file(&out.join("cloud.csv"), |w| {
        Ok(write_cloud_csv(&scene.cloud, w)?)
    })?;
    write_json(&out.join("rois.json"), &scene.rois)?;
    write_json(&out.join("ground_truth.json"), &scene.ground_truth)?;
    write_json(&out.join("catalog.json"), &spec.catalog)?;
    let _ = writeln!(
        std::io::stdout().lock(),
        "{} points, {} objects",
        scene.cloud.len(),
        scene.ground_truth.len()
    );
    Ok(())
}

fn detect(
    cloud: &Path,
    rois: &Path,
    spec: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let spec = load_spec(spec)?;
    let file = File::open(cloud)
        .with_context(|| format!("cannot open {}", cloud.display()))
        .map_err(CliError::Io)?;
    let reader = BufReader::new(file);
    let points = match cloud.extension().and_then(|e| e.to_str()) {
        Some("ply") => read_ply(reader)?,
        Some("csv") => read_cloud_csv(reader)?,
        _ => {
            return Err(CliError::Usage(format!(
                "{}: expected a .ply or .csv cloud",
                cloud.display()
            )))
        }
    };
    let rois: Vec<Roi2D> = read_json(rois)?;
    let params = bridgesim::perception::DetectParams {
        down: spec.camera_pose().gravity(),
        ..Default::default()
    };
    let found = detect_boxes(&points, &rois, &spec.intrinsics, &spec.catalog, &params);
    let records: Vec<Detection> = found
        .iter()
        .map(|d| Detection {
            roi_index: d.roi_index,
            category: &d.category,
            box3d: d.result.as_ref().ok(),
            failure: d.result.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    match out {
        Some(path) => write_json(path, &records),
        None => {
            let text = serde_json::to_string_pretty(&records).expect("detections serialize");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return report(&CliError::Usage(e.to_string().trim_end().to_string())),
    };
    let result = match &cli.command {
        Command::Run {
            experiment,
            seed,
            config,
            out,
        } => run(experiment, *seed, config.as_deref(), out),
        Command::GenScene { spec, seed, out } => gen(spec.as_deref(), *seed, out),
        Command::Detect {
            cloud,
            rois,
            spec,
            out,
        } => detect(cloud, rois, spec.as_deref(), out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    let record = ErrorRecord {
        error: ErrorBody {
            kind: e.kind(),
            message: e.to_string(),
        },
    };
    eprintln!(
        "{}",
        serde_json::to_string(&record).expect("error record serializes")
    );
    ExitCode::from(if matches!(e, CliError::Usage(_)) {
        2
    } else {
        1
    })
}
