//! Command-line front end. Exit codes: 0 success, 1 processing error,
//! 2 usage error.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use crate::cloud::{ClassLabel, PointCloud};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::eval::{evaluate, render_report};
use crate::features::{compute_features, dump_features};
use crate::fusion::{fuse, render_diagnostics, render_transform, FusionResult};
use crate::io::{load_point_cloud, save_point_cloud, Format};
use crate::rulepipe::annotate;
use crate::segment::{clean_building_points, extract_ground, ground_postprocess, smooth_labels};
use crate::synth::{generate_synthetic_scene, SceneSpec};
use crate::transform::apply_transform;

#[derive(Parser)]
#[command(
    name = "terrafuse",
    about = "Point cloud annotation, evaluation, and terrain fusion",
    version
)]
struct Cli {
    /// Pipeline configuration file (TOML); missing keys take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GroundSource {
    /// Use the label property stored in the input file.
    FromFile,
    /// Extract ground geometrically.
    Auto,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-point geometric features and dump them as text.
    Features {
        input: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the rule-based annotation pipeline and write a labeled cloud.
    Annotate {
        input: PathBuf,
        /// Labeled output cloud; defaults to "<input stem>_labeled.ply".
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Where the ground class comes from. Defaults to from-file when
        /// the input carries labels, auto otherwise.
        #[arg(long, value_enum)]
        ground_labels: Option<GroundSource>,
    },
    /// Compare a predicted labeling against truth and print the metrics table.
    Evaluate { pred: PathBuf, truth: PathBuf },
    /// Register a UAV cloud onto a reference cloud and remove the overlap.
    Fuse {
        uav: PathBuf,
        bing: PathBuf,
        /// Output directory; defaults to "fusion_out".
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Skip the semantic ground-border refinement stage.
        #[arg(long)]
        no_semantic: bool,
    },
    /// Generate a synthetic labeled scene from a scene spec (TOML).
    Synth {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

pub fn run(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };

    let config = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return fail("config", &e),
    };
    if cli.print_config {
        print!("{}", config.dump());
        return 0;
    }
    let command = match cli.command {
        Some(c) => c,
        None => {
            eprintln!("error: a subcommand is required; see --help");
            return 2;
        }
    };

    let outcome = match command {
        Command::Features { input, output } => cmd_features(&input, output.as_deref(), &config),
        Command::Annotate {
            input,
            output,
            ground_labels,
        } => cmd_annotate(&input, output.as_deref(), ground_labels, &config),
        Command::Evaluate { pred, truth } => cmd_evaluate(&pred, &truth),
        Command::Fuse {
            uav,
            bing,
            output,
            no_semantic,
        } => cmd_fuse(&uav, &bing, output.as_deref(), no_semantic, &config),
        Command::Synth { spec, output } => cmd_synth(&spec, &output),
    };
    match outcome {
        Ok(()) => 0,
        Err((stage, e)) => fail(stage, &e),
    }
}

fn fail(stage: &str, e: &crate::Error) -> i32 {
    eprintln!("error [{stage}]: {e}");
    1
}

type CmdResult = std::result::Result<(), (&'static str, crate::Error)>;

fn stage<T>(name: &'static str, r: Result<T>) -> std::result::Result<T, (&'static str, crate::Error)> {
    r.map_err(|e| (name, e))
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::from_file(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn load(path: &Path) -> Result<PointCloud> {
    load_point_cloud(path, Format::from_path(path))
}

fn cmd_features(input: &Path, output: Option<&Path>, config: &PipelineConfig) -> CmdResult {
    let cloud = stage("load", load(input))?;
    let features = stage("features", compute_features(&cloud, &config.features))?;
    let text = dump_features(&features);
    match output {
        Some(p) => stage("write", std::fs::write(p, text).map_err(Into::into))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn ground_ids(
    cloud: &PointCloud,
    source: Option<GroundSource>,
    config: &PipelineConfig,
) -> Result<Vec<usize>> {
    let source = source.unwrap_or(if cloud.labels.is_some() {
        GroundSource::FromFile
    } else {
        GroundSource::Auto
    });
    match source {
        GroundSource::FromFile => match cloud.labels.as_ref() {
            Some(labels) => Ok((0..cloud.len())
                .filter(|&i| labels[i] == ClassLabel::Ground)
                .collect()),
            None => Err(crate::Error::MissingProperty(
                "label (required by --ground-labels from-file)".into(),
            )),
        },
        GroundSource::Auto => {
            let ids = extract_ground(cloud, &config.ground)?;
            Ok(if config.stages.ground_postprocess {
                ground_postprocess(cloud, &ids, config.rules.cc_link, config.rules.cc_min_points)
            } else {
                ids
            })
        }
    }
}

fn cmd_annotate(
    input: &Path,
    output: Option<&Path>,
    source: Option<GroundSource>,
    config: &PipelineConfig,
) -> CmdResult {
    let cloud = stage("load", load(input))?;
    let gids = stage("ground", ground_ids(&cloud, source, config))?;
    let mut result = stage(
        "annotate",
        annotate(&cloud, &gids, &config.rules, &config.features),
    )?;
    let mut labels = result.cloud.labels.take().expect("annotate labels");
    if config.stages.smooth {
        labels = stage("smooth", smooth_labels(&result.cloud, &labels, &config.smoothing))?;
    }
    if config.stages.clean {
        labels = stage(
            "clean",
            clean_building_points(&result.cloud, &labels, &config.smoothing),
        )?;
    }
    result.cloud.labels = Some(labels);

    let out = output.map(Path::to_path_buf).unwrap_or_else(|| {
        let stem = input.file_stem().unwrap_or_default().to_string_lossy();
        input.with_file_name(format!("{stem}_labeled.ply"))
    });
    stage(
        "write",
        save_point_cloud(&result.cloud, &out, Format::from_path(&out)),
    )?;
    let trace_path = out.with_file_name(format!(
        "{}.trace.txt",
        out.file_name().unwrap_or_default().to_string_lossy()
    ));
    stage(
        "write",
        std::fs::write(&trace_path, result.trace.render()).map_err(Into::into),
    )?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {} and {}", out.display(), trace_path.display());
    Ok(())
}

fn cmd_evaluate(pred_path: &Path, truth_path: &Path) -> CmdResult {
    let pred = stage("load", load(pred_path))?;
    let truth = stage("load", load(truth_path))?;
    let pl = stage(
        "evaluate",
        pred.labels
            .clone()
            .ok_or_else(|| crate::Error::MissingProperty("label (prediction)".into())),
    )?;
    let tl = stage(
        "evaluate",
        truth
            .labels
            .clone()
            .ok_or_else(|| crate::Error::MissingProperty("label (truth)".into())),
    )?;
    let report = stage("evaluate", evaluate(&pl, &tl))?;
    print!("{}", render_report(&report));
    Ok(())
}

fn cmd_fuse(
    uav_path: &Path,
    bing_path: &Path,
    output: Option<&Path>,
    no_semantic: bool,
    config: &PipelineConfig,
) -> CmdResult {
    let uav = stage("load", load(uav_path))?;
    let bing = stage("load", load(bing_path))?;
    let mut opts = config.fusion.clone();
    if no_semantic {
        opts.semantic = false;
    }
    let FusionResult {
        transform,
        trimmed_bing,
        diagnostics,
    } = stage("fuse", fuse(&uav, &bing, None, &opts))?;

    let dir = output.unwrap_or_else(|| Path::new("fusion_out"));
    stage("write", std::fs::create_dir_all(dir).map_err(Into::into))?;
    stage(
        "write",
        std::fs::write(dir.join("transform.txt"), render_transform(&transform)).map_err(Into::into),
    )?;
    stage(
        "write",
        std::fs::write(dir.join("diagnostics.txt"), render_diagnostics(&diagnostics))
            .map_err(Into::into),
    )?;
    let moved = apply_transform(&uav, &transform);
    stage(
        "write",
        save_point_cloud(&moved, &dir.join("uav_transformed.ply"), Format::PlyAscii),
    )?;
    if trimmed_bing.is_empty() {
        eprintln!("warning: overlap removal left no reference points; bing_trimmed.ply not written");
    } else {
        stage(
            "write",
            save_point_cloud(&trimmed_bing, &dir.join("bing_trimmed.ply"), Format::PlyAscii),
        )?;
    }
    for w in &diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote fusion outputs to {}", dir.display());
    Ok(())
}

fn cmd_synth(spec_path: &Path, output: &Path) -> CmdResult {
    let text = stage("load", std::fs::read_to_string(spec_path).map_err(Into::into))?;
    let spec: SceneSpec = stage(
        "load",
        toml::from_str(&text).map_err(|e| crate::Error::Config(e.to_string())),
    )?;
    let cloud = stage("synth", generate_synthetic_scene(&spec))?;
    stage(
        "write",
        save_point_cloud(&cloud, output, Format::from_path(output)),
    )?;
    println!("wrote {} points to {}", cloud.len(), output.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_strs(args: &[&str]) -> i32 {
        let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        run(&owned)
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run_strs(&["terrafuse", "frobnicate"]), 2);
    }

    #[test]
    fn missing_subcommand_is_usage_error() {
        assert_eq!(run_strs(&["terrafuse"]), 2);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run_strs(&["terrafuse", "--help"]), 0);
    }

    #[test]
    fn missing_input_is_processing_error() {
        assert_eq!(run_strs(&["terrafuse", "features", "/nonexistent.ply"]), 1);
    }

    #[test]
    fn print_config_exits_zero() {
        assert_eq!(run_strs(&["terrafuse", "--print-config"]), 0);
    }
}
