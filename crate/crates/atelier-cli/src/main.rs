//! atelier command line: batch runs of the art pipelines plus exhibition
//! tooling.
//!
//! Exit codes: 0 success, 1 pipeline/validation failure, 2 invalid
//! configuration or usage.

mod config;
mod pipelines;

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use atelier::canvas::{sketchify, to_svg};
use atelier::exhibition::{
    build_manifest, load_entry, validate_label, validate_print, ExhibitEntry,
};

use config::{load_config, Config, PIPELINE_NAMES};
use pipelines::{Common, RunOutput};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or usage; exits with status 2.
    Config(String),
    /// A pipeline module failed; exits with status 1.
    Module {
        module: String,
        op: String,
        message: String,
    },
    /// Filesystem trouble outside any module; exits with status 1.
    Io(String),
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    pub fn module(module: &str, op: &str, message: String) -> Self {
        CliError::Module {
            module: module.to_string(),
            op: op.to_string(),
            message,
        }
    }

    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid config: {msg}"),
            CliError::Module { module, op, message } => {
                write!(f, "error in {module}::{op}: {message}")
            }
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "atelier", version, about = "Generative data-art engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output SVG path (overrides the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override; falls back to config `seed`, then $ATELIER_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Apply (or adjust) the hand-drawn filter with this roughness.
    #[arg(long, value_name = "0..1")]
    sketch_roughness: Option<f64>,
    /// Override any config field, e.g. --set faces.grid.rows=20
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Chernoff-style face grid from a CSV table.
    Faces(RunArgs),
    /// L-system turtle drawing.
    Lsystem(RunArgs),
    /// Iterated function system attractor.
    Ifs(RunArgs),
    /// Diffusion-limited aggregation cluster.
    Dla(RunArgs),
    /// Dense pixel bar chart.
    Pixelbars(RunArgs),
    /// Audio spectrum strip.
    Soundscape(RunArgs),
    /// Validate every exhibit entry descriptor in a directory.
    ValidateExhibit {
        /// Directory of entry descriptor JSON files.
        dir: PathBuf,
    },
    /// Build the print manifest and label cards from validated entries.
    Manifest {
        /// Directory of entry descriptor JSON files.
        dir: PathBuf,
        /// Exhibition title for the manifest.
        #[arg(long)]
        title: String,
        /// Where to write manifest.json and the label cards (default: dir).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Manifest timestamp (RFC 3339); defaults to the current UTC time.
        #[arg(long)]
        timestamp: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Faces(args) => run_pipeline("faces", args),
        Command::Lsystem(args) => run_pipeline("lsystem", args),
        Command::Ifs(args) => run_pipeline("ifs", args),
        Command::Dla(args) => run_pipeline("dla", args),
        Command::Pixelbars(args) => run_pipeline("pixelbars", args),
        Command::Soundscape(args) => run_pipeline("soundscape", args),
        Command::ValidateExhibit { dir } => validate_exhibit(dir),
        Command::Manifest {
            dir,
            title,
            out_dir,
            timestamp,
        } => build_manifest_cmd(dir, title, out_dir.as_deref(), timestamp.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("atelier: {e}");
            e.exit_code()
        }
    }
}

fn run_pipeline(which: &'static str, args: &RunArgs) -> Result<ExitCode, CliError> {
    let (config, base) = load_config(&args.config, &args.sets, args.seed, args.sketch_roughness)?;

    let selected = config.selected_pipelines();
    if selected.len() != 1 {
        return Err(CliError::config(format!(
            "exactly one pipeline section required, found [{}] (choose one of {})",
            selected.join(", "),
            PIPELINE_NAMES.join(", ")
        )));
    }
    if selected[0] != which {
        return Err(CliError::config(format!(
            "subcommand `{which}` but config selects `{}`",
            selected[0]
        )));
    }

    let seed = resolve_seed(&config, args.seed)?;
    let common = Common {
        seed,
        author: config.author.clone(),
    };

    // --out resolves against the working directory like any CLI path;
    // the config's own `output` resolves against the config file.
    let output = match &args.out {
        Some(out) => out.clone(),
        None => {
            let configured = config.output.clone().ok_or_else(|| {
                CliError::config("no output path: set `output` or pass --out".to_string())
            })?;
            if configured.is_absolute() {
                configured
            } else {
                base.join(configured)
            }
        }
    };

    let RunOutput { scene, sidecars } = match which {
        "faces" => pipelines::run_faces(config.faces.as_ref().unwrap(), &common, &base)?,
        "lsystem" => pipelines::run_lsystem(config.lsystem.as_ref().unwrap(), &common, &base)?,
        "ifs" => pipelines::run_ifs(config.ifs.as_ref().unwrap(), &common, &base)?,
        "dla" => pipelines::run_dla(config.dla.as_ref().unwrap(), &common, &base)?,
        "pixelbars" => pipelines::run_pixelbars(config.pixelbars.as_ref().unwrap(), &common, &base)?,
        "soundscape" => {
            pipelines::run_soundscape(config.soundscape.as_ref().unwrap(), &common, &base)?
        }
        _ => unreachable!("subcommands are exhaustive"),
    };

    let scene = match &config.sketch {
        Some(style) => {
            let mut style = *style;
            if style.seed == 0 {
                style.seed = seed; // sketch seed 0 means "use the pipeline seed"
            }
            sketchify(&scene, &style).map_err(|e| {
                CliError::module("canvas", "sketchify", e.to_string())
            })?
        }
        None => scene,
    };

    let svg = to_svg(&scene).map_err(|e| CliError::module("canvas", "to_svg", e.to_string()))?;
    write_atomic(&output, &svg)?;
    println!("wrote {}", output.display());

    for sidecar in sidecars {
        let path = sidecar_path(&output, sidecar.suffix);
        write_atomic(&path, &sidecar.bytes)?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn resolve_seed(config: &Config, flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    if let Some(seed) = config.seed {
        return Ok(seed);
    }
    match std::env::var("ATELIER_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|_| CliError::config(format!("ATELIER_SEED `{v}` is not a u64"))),
        Err(_) => Ok(0),
    }
}

fn sidecar_path(output: &Path, suffix: &str) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_string());
    output.with_file_name(format!("{stem}.{suffix}"))
}

/// Write via a temp file in the target directory plus rename, so the
/// output path never holds a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .map_err(|e| CliError::Io(format!("cannot create temp file in `{}`: {e}", dir.display())))?;
    tmp.write_all(bytes)
        .map_err(|e| CliError::Io(format!("cannot write `{}`: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("cannot finalize `{}`: {e}", path.display())))?;
    Ok(())
}

fn entry_descriptors(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let reader = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("cannot read `{}`: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = reader
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|ext| ext == "json")
                && p.file_name().is_none_or(|n| n != "manifest.json")
        })
        .collect();
    paths.sort();
    Ok(paths)
}

fn load_entries(dir: &Path) -> Result<Vec<ExhibitEntry>, CliError> {
    let paths = entry_descriptors(dir)?;
    if paths.is_empty() {
        return Err(CliError::config(format!(
            "no entry descriptors (*.json) in `{}`",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| load_entry(p).map_err(|e| CliError::Io(e.to_string())))
        .collect()
}

fn validate_exhibit(dir: &Path) -> Result<ExitCode, CliError> {
    let entries = load_entries(dir)?;
    let mut violations = 0usize;
    for entry in &entries {
        let title = &entry.label.title;
        for v in validate_label(&entry.label) {
            println!("{title}: {v}");
            violations += 1;
        }
        match validate_print(entry) {
            Ok(found) => {
                for v in found {
                    println!("{title}: {v}");
                    violations += 1;
                }
            }
            Err(e) => {
                println!("{title}: {e}");
                violations += 1;
            }
        }
    }
    if violations == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("atelier: {violations} violation(s) across {} entries", entries.len());
        Ok(ExitCode::from(1))
    }
}

fn build_manifest_cmd(
    dir: &Path,
    title: &str,
    out_dir: Option<&Path>,
    timestamp: Option<&str>,
) -> Result<ExitCode, CliError> {
    let entries = load_entries(dir)?;
    let generated_at = match timestamp {
        Some(t) => t.to_string(),
        None => chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let output = build_manifest(&entries, title, &generated_at).map_err(|e| match e {
        atelier::exhibition::ExhibitError::ValidationFailed { report } => {
            for line in &report {
                println!("{line}");
            }
            CliError::module("exhibition", "build_manifest", "entries failed validation".into())
        }
        other => CliError::module("exhibition", "build_manifest", other.to_string()),
    })?;

    let out_dir = out_dir.unwrap_or(dir);
    write_atomic(&out_dir.join("manifest.json"), &output.json)?;
    println!("wrote {}", out_dir.join("manifest.json").display());
    for (i, card) in output.cards.iter().enumerate() {
        let name = format!("label_{:02}_{}.txt", i + 1, slug(&card.title));
        let path = out_dir.join(name);
        write_atomic(&path, card.text.as_bytes())?;
        println!("wrote {}", path.display());
    }
    println!(
        "manifest `{}` with {} entries at {}",
        title,
        output.manifest.entries.len(),
        output.manifest.generated_at
    );
    Ok(ExitCode::SUCCESS)
}

fn slug(title: &str) -> String {
    let mut out = String::new();
    for ch in title.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    let trimmed = out.trim_end_matches('-');
    if trimmed.is_empty() {
        "untitled".to_string()
    } else {
        trimmed.to_string()
    }
}
