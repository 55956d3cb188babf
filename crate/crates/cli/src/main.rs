//! Command-line front end for the Sparse-TDA pipeline.
//!
//! Exit codes: 0 success, 2 configuration error, 3 convergence error,
//! 4 I/O or input-parse error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sparse_tda::diagram::PersistenceDiagram;
use sparse_tda::error::Error;
use sparse_tda::pimage::{rasterize, PiGrid, WeightSpec};
use sparse_tda::pipeline::{load_manifest, run_pipeline, sweep_s, LoadedDataset};
use sparse_tda::selector::FeatureSelector;
use sparse_tda::sublevel::{sublevel_pd0, Connectivity, ScalarField};

#[derive(Parser)]
#[command(
    name = "sparse-tda",
    about = "Persistence images, QR-pivot pixel selection, and SVM classification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the manifest's classifier and write reports and model artifacts.
    Run {
        /// Dataset manifest (JSON).
        manifest: PathBuf,
        /// Number of seeded repeats.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        /// Override the manifest's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for report.json, report.csv, and artifacts.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Evaluate the sparse pipeline across several pixel counts.
    SweepS {
        /// Dataset manifest (JSON).
        manifest: PathBuf,
        /// Comma-separated pixel counts, e.g. 10,20,50.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for sweep.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compute the 0-dimensional sublevel-set diagram of a scalar field.
    Pd {
        /// Scalar field file (.csv or .pgm).
        field: PathBuf,
        /// Grid adjacency for 2-D fields.
        #[arg(long, default_value_t = 4)]
        connectivity: u8,
        /// Output diagram path (.pd).
        #[arg(long)]
        out: PathBuf,
    },
    /// Rasterize one diagram into a persistence image.
    Pi {
        /// Input diagram (.pd).
        diagram: PathBuf,
        /// Manifest supplying PI parameters and the reference diagrams that
        /// fix the weighting normalizer and grid domain.
        #[arg(long)]
        config: PathBuf,
        /// Output image path (.csv or .pgm).
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the contents of a fitted selector file.
    InspectSelector {
        /// Selector file (.stda).
        file: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Validation(_) | Error::DegenerateNormalizer(_) => 2,
        Error::Convergence { .. } => 3,
        Error::Io(_) | Error::Parse { .. } => 4,
    }
}

fn read_field(path: &Path) -> Result<ScalarField, Error> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "csv" => ScalarField::read_csv(path),
        "pgm" => ScalarField::read_pgm(path),
        other => Err(Error::config(format!(
            "unsupported field extension `{other}` (expected csv or pgm)"
        ))),
    }
}

fn connectivity_from(flag: u8) -> Result<Connectivity, Error> {
    match flag {
        4 => Ok(Connectivity::Four),
        8 => Ok(Connectivity::Eight),
        other => Err(Error::config(format!("connectivity {other} must be 4 or 8"))),
    }
}

fn dataset_with_seed(manifest: &Path, seed: Option<u64>) -> Result<LoadedDataset, Error> {
    let mut ds = load_manifest(manifest)?;
    if let Some(seed) = seed {
        ds.manifest.split.seed = seed;
    }
    Ok(ds)
}

fn cmd_run(manifest: &Path, repeats: usize, seed: Option<u64>, out: &Path) -> Result<(), Error> {
    let ds = dataset_with_seed(manifest, seed)?;
    std::fs::create_dir_all(out)?;
    let output = run_pipeline(&ds, repeats)?;
    std::fs::write(out.join("report.json"), output.report.to_json())?;
    std::fs::write(out.join("report.csv"), output.report.to_csv())?;
    if let Some(selector) = &output.selector {
        selector.save(out.join("selector.stda"))?;
    }
    if let Some(model) = &output.svm_model {
        model.save(out.join("model.stdm"))?;
    }
    let agg = &output.report.aggregate;
    println!(
        "{} repeats: accuracy {:.2}% +- {:.2}, training time {:.3} s +- {:.3}",
        agg.successful_repeats,
        agg.accuracy_mean_pct,
        agg.accuracy_std_pct,
        agg.time_mean_s,
        agg.time_std_s
    );
    for failure in &output.report.failures {
        eprintln!("repeat {} failed: {}", failure.repeat, failure.error);
    }
    println!("wrote {}", out.join("report.json").display());
    Ok(())
}

fn cmd_sweep(
    manifest: &Path,
    values: &[usize],
    repeats: usize,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), Error> {
    let ds = dataset_with_seed(manifest, seed)?;
    std::fs::create_dir_all(out)?;
    let sweep = sweep_s(&ds, values, repeats)?;
    std::fs::write(out.join("sweep.csv"), sweep.to_csv())?;
    for row in &sweep.rows {
        println!(
            "s = {:>5}: accuracy {:6.2}% +- {:5.2}, time {:.3} s, energy {:.6}",
            row.s, row.accuracy_mean_pct, row.accuracy_std_pct, row.time_mean_s, row.energy
        );
    }
    println!("wrote {}", out.join("sweep.csv").display());
    Ok(())
}

fn cmd_pd(field: &Path, connectivity: u8, out: &Path) -> Result<(), Error> {
    let conn = connectivity_from(connectivity)?;
    let field_data = read_field(field)?;
    let diagram = sublevel_pd0(&field_data, conn);
    diagram.write_file(out)?;
    println!(
        "wrote {} ({} finite points, {} essential)",
        out.display(),
        diagram.points.len(),
        diagram.essential.len()
    );
    Ok(())
}

fn cmd_pi(diagram_path: &Path, config: &Path, out: &Path) -> Result<(), Error> {
    let ds = load_manifest(config)?;
    // The manifest's full diagram list fixes the normalizer and domain.
    let weight = WeightSpec::fit(ds.manifest.pi_params.weighting, &ds.diagrams)?;
    let transformed: Vec<_> = ds.diagrams.iter().map(|d| d.to_birth_persistence()).collect();
    let (res_x, res_y) = ds.manifest.pi_params.resolution;
    let sigma = ds.manifest.pi_params.sigma;
    let grid = PiGrid::from_training(&transformed, res_x, res_y, sigma)?;
    let diagram = PersistenceDiagram::read_file(diagram_path)?;
    let pi = rasterize(&diagram.to_birth_persistence(), &grid, &weight, sigma);
    let ext = out
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "csv" => pi.write_csv(out)?,
        "pgm" => pi.write_pgm(out)?,
        other => {
            return Err(Error::config(format!(
                "unsupported image extension `{other}` (expected csv or pgm)"
            )))
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_inspect(file: &Path) -> Result<(), Error> {
    let selector = FeatureSelector::load(file)?;
    println!("pixels:           {}", selector.pixel_count());
    println!("rank (r_o):       {}", selector.rank);
    println!("selected pixels:  {}", selector.s);
    println!("energy at s:      {:.6}", selector.energy(selector.s));
    let shown = selector.s.min(16);
    println!(
        "first {shown} pivots:  {:?}",
        &selector.pivots[..shown]
    );
    let top = selector.singular_values.len().min(8);
    println!(
        "top singular values: {:?}",
        &selector.singular_values[..top]
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            manifest,
            repeats,
            seed,
            out,
        } => cmd_run(manifest, *repeats, *seed, out),
        Command::SweepS {
            manifest,
            values,
            repeats,
            seed,
            out,
        } => cmd_sweep(manifest, values, *repeats, *seed, out),
        Command::Pd {
            field,
            connectivity,
            out,
        } => cmd_pd(field, *connectivity, out),
        Command::Pi { diagram, config, out } => cmd_pi(diagram, config, out),
        Command::InspectSelector { file } => cmd_inspect(file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
