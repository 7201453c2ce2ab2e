//! Command-line surface of the texture-scoring pipeline.
//!
//! Every command prints a machine-readable `key=value` result block on
//! stdout. Exit codes: 0 success, 2 usage or input error, 3 numeric failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tacoma",
    about = "GLCM texture scoring: feature masks, random forests, co-training, separation simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a feature mask from representative image patches.
    Mask {
        /// Directory of patch PGM files (read in sorted filename order).
        #[arg(long)]
        patches: PathBuf,
        /// Spatial relationship, e.g. ne3, se1, e2.
        #[arg(long)]
        rel: String,
        /// Gray levels to quantize to.
        #[arg(long)]
        levels: u16,
        /// Output mask file (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Accepted for interface uniformity; mask building is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Extract masked GLCM feature rows for every manifest image.
    Extract {
        /// Manifest CSV (path,label); image paths resolve relative to it.
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated mask files, one per relationship.
        #[arg(long)]
        mask: String,
        /// Comma-separated relationships matching --mask, e.g. ne3,se1.
        #[arg(long)]
        rel: String,
        /// Gray levels; must match every mask.
        #[arg(long)]
        levels: u16,
        /// Output feature table.
        #[arg(long)]
        out: PathBuf,
        /// Divide counts by the total pair count per image.
        #[arg(long)]
        normalize: bool,
        /// Accepted for interface uniformity; extraction is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a random forest on a feature table.
    Train {
        #[arg(long)]
        features: PathBuf,
        /// Ensemble size; the reference grid is {50, 100, 200, 500}.
        #[arg(long, default_value_t = 200)]
        trees: usize,
        /// Candidate features per split: 0.5sqrt, sqrt, 2sqrt, or an integer.
        #[arg(long, default_value = "sqrt")]
        mtry: String,
        #[arg(long)]
        seed: u64,
        /// Output model file (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Class count; defaults to max label + 1.
        #[arg(long)]
        classes: Option<usize>,
    },
    /// Score a feature table with a trained model.
    Score {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Optional per-row prediction CSV (row,label,predicted,margin).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accepted for interface uniformity; scoring is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Out-of-bag error of a forest trained on a feature table.
    Oob {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 200)]
        trees: usize,
        #[arg(long, default_value = "sqrt")]
        mtry: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        classes: Option<usize>,
    },
    /// Back-project a model's top features to salient pixels of one image.
    Salient {
        /// Input image (PGM).
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Mask file the model's features were extracted with.
        #[arg(long)]
        mask: PathBuf,
        /// Number of top-ranked features to back-project.
        #[arg(long, default_value_t = 20)]
        k: usize,
        /// Overlay output (PGM, salient pixels set to white).
        #[arg(long)]
        out_overlay: PathBuf,
        /// Optional coordinate listing, one "x y" per line, sorted.
        #[arg(long)]
        out_coords: Option<PathBuf>,
        /// Accepted for interface uniformity; back-projection is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Margin-based co-training over a two-view feature split.
    Cotrain {
        #[arg(long)]
        features: PathBuf,
        /// natural (per-relationship blocks) or thin:J (random J-way split).
        #[arg(long)]
        split: String,
        #[arg(long, default_value_t = 2)]
        m1: usize,
        #[arg(long, default_value_t = 2)]
        m2: usize,
        #[arg(long, default_value_t = 50)]
        trees: usize,
        #[arg(long, default_value = "sqrt")]
        mtry: String,
        #[arg(long)]
        seed: u64,
        /// Experiment mode: keep this many stratified labeled rows and treat
        /// the rest as unlabeled, reporting errors against the held truth.
        #[arg(long)]
        labeled: Option<usize>,
        #[arg(long)]
        classes: Option<usize>,
        /// Optional inferred-label CSV (row,label,round,by,margin).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Self-training: one classifier labels its own most confident rows.
    Selftrain {
        #[arg(long)]
        features: PathBuf,
        /// Rows transferred per round.
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        trees: usize,
        #[arg(long, default_value = "sqrt")]
        mtry: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        labeled: Option<usize>,
        #[arg(long)]
        classes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Separation, Bayes error and ratio-of-separation of a Gaussian mixture.
    Simulate {
        /// Covariance: identity, tridiag:RHO, or ar1:RHO.
        #[arg(long)]
        cov: String,
        /// Dimension.
        #[arg(long)]
        p: usize,
        /// Center difference: "ones" or comma-separated values.
        #[arg(long, default_value = "ones")]
        u: String,
        /// Feature subset: first:K or comma-separated 0-based indices.
        #[arg(long)]
        subset: String,
        /// Monte-Carlo trials of random thinned splits (0 disables).
        #[arg(long, default_value_t = 0)]
        mc_trials: usize,
        /// Partition count for the Monte-Carlo splits.
        #[arg(long, default_value_t = 2)]
        j: usize,
        /// Threshold slack: fraction reported below 1/J - epsilon.
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long)]
        seed: u64,
        /// Optional report file with all fields plus raw gamma samples.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the synthetic blob-texture corpus.
    Synth {
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Images per class.
        #[arg(long, default_value_t = 50)]
        per_class: usize,
        /// Square image side length.
        #[arg(long, default_value_t = 128)]
        size: usize,
    },
    /// Error as a function of training-set size over seeded replicates.
    LearningCurve {
        #[arg(long)]
        features: PathBuf,
        /// Training sizes to sweep.
        #[arg(long, default_value = "10,30,100,160")]
        sizes: String,
        /// Seeded replicates per size.
        #[arg(long, default_value_t = 20)]
        replicates: usize,
        /// Held-out fraction (stratified).
        #[arg(long, default_value_t = 0.2)]
        test_fraction: f64,
        #[arg(long, default_value_t = 200)]
        trees: usize,
        #[arg(long, default_value = "sqrt")]
        mtry: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        classes: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mask {
            patches,
            rel,
            levels,
            out,
            ..
        } => commands::mask(&patches, &rel, levels, &out),
        Command::Extract {
            manifest,
            mask,
            rel,
            levels,
            out,
            normalize,
            ..
        } => commands::extract(&manifest, &mask, &rel, levels, &out, normalize),
        Command::Train {
            features,
            trees,
            mtry,
            seed,
            out,
            classes,
        } => commands::train(&features, trees, &mtry, seed, &out, classes),
        Command::Score {
            features,
            model,
            out,
            ..
        } => commands::score(&features, &model, out.as_deref()),
        Command::Oob {
            features,
            trees,
            mtry,
            seed,
            classes,
        } => commands::oob(&features, trees, &mtry, seed, classes),
        Command::Salient {
            image,
            model,
            mask,
            k,
            out_overlay,
            out_coords,
            ..
        } => commands::salient(
            &image,
            &model,
            &mask,
            k,
            &out_overlay,
            out_coords.as_deref(),
        ),
        Command::Cotrain {
            features,
            split,
            m1,
            m2,
            trees,
            mtry,
            seed,
            labeled,
            classes,
            out,
        } => commands::cotrain(
            &features,
            &split,
            m1,
            m2,
            trees,
            &mtry,
            seed,
            labeled,
            classes,
            out.as_deref(),
        ),
        Command::Selftrain {
            features,
            m,
            trees,
            mtry,
            seed,
            labeled,
            classes,
            out,
        } => commands::selftrain(
            &features,
            m,
            trees,
            &mtry,
            seed,
            labeled,
            classes,
            out.as_deref(),
        ),
        Command::Simulate {
            cov,
            p,
            u,
            subset,
            mc_trials,
            j,
            epsilon,
            seed,
            out,
        } => commands::simulate(
            &cov,
            p,
            &u,
            &subset,
            mc_trials,
            j,
            epsilon,
            seed,
            out.as_deref(),
        ),
        Command::Synth {
            out,
            seed,
            per_class,
            size,
        } => commands::synth(&out, seed, per_class, size),
        Command::LearningCurve {
            features,
            sizes,
            replicates,
            test_fraction,
            trees,
            mtry,
            seed,
            classes,
        } => commands::learning_curve(
            &features,
            &sizes,
            replicates,
            test_fraction,
            trees,
            &mtry,
            seed,
            classes,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_numeric() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
