//! Command implementations: thin wrappers over the library operations plus
//! the on-disk formats.

use std::fs;
use std::path::{Path, PathBuf};

use tacoma_core::cotrain::{
    self, natural_split, stratified_sample, thin_split, FeatureSplit, SemiParams, SemiResult,
    Unlabeled,
};
use tacoma_core::forest::{margin, oob_error, train_forest, Forest, ForestParams, MtrySpec};
use tacoma_core::glcm::{apply_mask_with, compute_glcm, SpatialRelationship};
use tacoma_core::mask::{build_mask, FeatureMask};
use tacoma_core::raster::{quantize, read_pgm, write_pgm, GrayImage};
use tacoma_core::rng::{seeded, sub_seed};
use tacoma_core::salience::{render_overlay, top_salient};
use tacoma_core::synth::{synth_corpus, SynthConfig};
use tacoma_core::tables::{
    parse_manifest, render_manifest, FeatureBlock, FeatureTable, ManifestEntry,
};
use tacoma_core::theory::{mc_gamma, ratio_of_separation, CovKind, MixtureSpec};
use tacoma_core::{Error, RealDataset, Result};

// Sub-seed streams so each randomized stage draws independently.
const STREAM_LABELED_SAMPLE: u64 = 1;
const STREAM_SPLIT: u64 = 2;
const STREAM_SEMI: u64 = 3;
const STREAM_BASELINE: u64 = 4;

pub fn mask(patches_dir: &Path, rel: &str, levels: u16, out: &Path) -> Result<()> {
    let rel: SpatialRelationship = rel.parse()?;
    let mut paths: Vec<PathBuf> = fs::read_dir(patches_dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "pgm"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no .pgm patches in {}",
            patches_dir.display()
        )));
    }
    let mut quantized = Vec::with_capacity(paths.len());
    for path in &paths {
        let image = read_pgm(&fs::read(path)?)?;
        quantized.push(quantize(&image, levels)?);
    }
    let mask = build_mask(&quantized, rel)?;
    fs::write(out, mask.to_json())?;
    println!("command=mask");
    println!("relationship={rel}");
    println!("levels={levels}");
    println!("patch_count={}", mask.patch_count());
    println!("mask_size={}", mask.len());
    println!("mask_id={}", mask.id());
    println!("out={}", out.display());
    Ok(())
}

pub fn extract(
    manifest_path: &Path,
    mask_arg: &str,
    rel_arg: &str,
    levels: u16,
    out: &Path,
    normalize: bool,
) -> Result<()> {
    let rels: Vec<SpatialRelationship> = rel_arg
        .split(',')
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let mask_paths: Vec<&str> = mask_arg.split(',').collect();
    if mask_paths.len() != rels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} masks for {} relationships",
            mask_paths.len(),
            rels.len()
        )));
    }
    let mut masks = Vec::with_capacity(mask_paths.len());
    for (path, rel) in mask_paths.iter().zip(&rels) {
        let mask = FeatureMask::from_json(&fs::read_to_string(path)?)?;
        if mask.relationship() != *rel {
            return Err(Error::InvalidArgument(format!(
                "mask {path} was built for {} but --rel names {rel}",
                mask.relationship()
            )));
        }
        if mask.levels() != levels {
            return Err(Error::InvalidArgument(format!(
                "mask {path} uses {} levels but --levels is {levels}",
                mask.levels()
            )));
        }
        masks.push(mask);
    }

    let entries = parse_manifest(&fs::read_to_string(manifest_path)?)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for entry in &entries {
        let path = base.join(&entry.path);
        let image = read_pgm(&fs::read(&path).map_err(|e| {
            Error::InvalidArgument(format!("cannot read image {}: {e}", path.display()))
        })?)?;
        let quantized = quantize(&image, levels)?;
        for (mask, rel) in masks.iter().zip(&rels) {
            let glcm = compute_glcm(&quantized, *rel);
            values.extend(apply_mask_with::<f64>(&glcm, mask, normalize)?.values);
        }
        labels.push(entry.label);
    }

    let mut blocks = Vec::new();
    let mut start = 0usize;
    for (mask, rel) in masks.iter().zip(&rels) {
        blocks.push(FeatureBlock {
            relationship: *rel,
            start,
            end: start + mask.len(),
            mask_id: mask.id(),
        });
        start += mask.len();
    }
    let table = FeatureTable::new(blocks, labels, values)?;
    fs::write(out, table.render())?;
    println!("command=extract");
    println!("images={}", entries.len());
    println!("features={}", table.feature_count());
    println!("normalize={normalize}");
    println!("out={}", out.display());
    Ok(())
}

fn load_table(path: &Path) -> Result<FeatureTable> {
    FeatureTable::parse(&fs::read_to_string(path)?)
}

fn forest_params(table_p: usize, trees: usize, mtry: &str, seed: u64) -> Result<ForestParams> {
    let mtry: MtrySpec = mtry.parse()?;
    Ok(ForestParams {
        n_trees: trees,
        mtry: mtry.resolve(table_p),
        seed,
    })
}

pub fn train(
    features: &Path,
    trees: usize,
    mtry: &str,
    seed: u64,
    out: &Path,
    classes: Option<usize>,
) -> Result<()> {
    let table = load_table(features)?;
    let (data, _) = table.labeled_dataset(classes)?;
    let params = forest_params(data.feature_count(), trees, mtry, seed)?;
    let forest = train_forest(&data, &params)?;
    fs::write(out, forest.to_json())?;
    println!("command=train");
    println!("rows={}", data.len());
    println!("features={}", data.feature_count());
    println!("classes={}", data.class_count());
    println!("trees={}", params.n_trees);
    println!("mtry={}", params.mtry);
    println!("seed={seed}");
    println!("out={}", out.display());
    Ok(())
}

pub fn score(features: &Path, model: &Path, out: Option<&Path>) -> Result<()> {
    let table = load_table(features)?;
    let forest: Forest<f64> = Forest::from_json(&fs::read_to_string(model)?)?;
    if table.feature_count() != forest.feature_count() {
        return Err(Error::DimensionMismatch(format!(
            "table has {} features, model expects {}",
            table.feature_count(),
            forest.feature_count()
        )));
    }
    let mut lines = String::from("row,label,predicted,margin\n");
    let mut correct = 0usize;
    let mut labeled = 0usize;
    for i in 0..table.len() {
        let tally = forest.predict_votes(table.row(i))?;
        let predicted = forest.predict_class(table.row(i))?;
        let mg = margin(&tally);
        let label_text = match table.labels[i] {
            Some(l) => {
                labeled += 1;
                if l == predicted {
                    correct += 1;
                }
                l.to_string()
            }
            None => "?".to_string(),
        };
        lines.push_str(&format!("{i},{label_text},{predicted},{mg}\n"));
    }
    if let Some(path) = out {
        fs::write(path, &lines)?;
    }
    println!("command=score");
    println!("rows={}", table.len());
    println!("labeled={labeled}");
    if labeled > 0 {
        println!("accuracy={}", correct as f64 / labeled as f64);
    }
    if let Some(path) = out {
        println!("out={}", path.display());
    }
    Ok(())
}

pub fn oob(
    features: &Path,
    trees: usize,
    mtry: &str,
    seed: u64,
    classes: Option<usize>,
) -> Result<()> {
    let table = load_table(features)?;
    let (data, _) = table.labeled_dataset(classes)?;
    let params = forest_params(data.feature_count(), trees, mtry, seed)?;
    let forest = train_forest(&data, &params)?;
    let report = oob_error(&forest, &data)?;
    println!("command=oob");
    println!("rows={}", data.len());
    println!("trees={}", params.n_trees);
    println!("mtry={}", params.mtry);
    println!("seed={seed}");
    println!("oob_error={}", report.error_rate);
    println!("evaluated={}", report.evaluated);
    println!("skipped={}", report.skipped);
    Ok(())
}

pub fn salient(
    image_path: &Path,
    model_path: &Path,
    mask_path: &Path,
    k: usize,
    out_overlay: &Path,
    out_coords: Option<&Path>,
) -> Result<()> {
    let image = read_pgm(&fs::read(image_path)?)?;
    let forest: Forest<f64> = Forest::from_json(&fs::read_to_string(model_path)?)?;
    let mask = FeatureMask::from_json(&fs::read_to_string(mask_path)?)?;
    let quantized = quantize(&image, mask.levels())?;
    let map = top_salient(&quantized, mask.relationship(), &forest, &mask, k)?;
    let overlay = render_overlay(&image, &map)?;
    fs::write(out_overlay, write_pgm(&overlay))?;
    if let Some(path) = out_coords {
        fs::write(path, map.coords_text())?;
    }
    println!("command=salient");
    println!("requested_k={k}");
    println!("effective_k={}", map.source_features.len());
    println!("flagged={}", map.pixels.len());
    println!("out_overlay={}", out_overlay.display());
    if let Some(path) = out_coords {
        println!("out_coords={}", path.display());
    }
    Ok(())
}

/// Labeled/unlabeled pools for the semi-supervised commands. In experiment
/// mode (`--labeled N`) the table must be fully labeled; the held-back rows
/// keep their truth for error reporting.
struct SemiPools {
    labeled: RealDataset,
    unlabeled: Unlabeled<f64>,
    /// Original table rows of the unlabeled pool.
    unlabeled_rows: Vec<usize>,
    /// Truth for the unlabeled pool (experiment mode only).
    truth: Option<Vec<usize>>,
}

fn semi_pools(
    table: &FeatureTable,
    labeled: Option<usize>,
    classes: Option<usize>,
    seed: u64,
) -> Result<SemiPools> {
    match labeled {
        Some(n) => {
            if table.labels.iter().any(Option::is_none) {
                return Err(Error::InvalidArgument(
                    "--labeled experiment mode needs a fully labeled feature table".into(),
                ));
            }
            let (all, _) = table.labeled_dataset(classes)?;
            let mut rng = seeded(sub_seed(seed, STREAM_LABELED_SAMPLE, 0));
            let keep = stratified_sample(all.labels(), n, &mut rng)?;
            let keep_set: std::collections::BTreeSet<usize> = keep.iter().copied().collect();
            let rest: Vec<usize> = (0..all.len()).filter(|i| !keep_set.contains(i)).collect();
            let labeled_data = all.select_rows(&keep)?;
            let mut u_values = Vec::new();
            let mut truth = Vec::new();
            for &i in &rest {
                u_values.extend_from_slice(all.row(i));
                truth.push(all.labels()[i]);
            }
            Ok(SemiPools {
                labeled: labeled_data,
                unlabeled: Unlabeled::new(u_values, table.feature_count())?,
                unlabeled_rows: rest,
                truth: Some(truth),
            })
        }
        None => {
            let (labeled_data, _) = table.labeled_dataset(classes)?;
            let (unlabeled, unlabeled_rows) = table.unlabeled_rows()?;
            Ok(SemiPools {
                labeled: labeled_data,
                unlabeled,
                unlabeled_rows,
                truth: None,
            })
        }
    }
}

fn parse_split(spec: &str, table: &FeatureTable, seed: u64) -> Result<FeatureSplit> {
    if spec == "natural" {
        return natural_split(&table.block_ranges());
    }
    if let Some(j_text) = spec.strip_prefix("thin:") {
        let j: usize = j_text
            .parse()
            .map_err(|_| Error::Format(format!("bad partition count in split {spec:?}")))?;
        let split = thin_split(table.feature_count(), j, sub_seed(seed, STREAM_SPLIT, 0))?;
        return if j == 2 {
            Ok(split)
        } else {
            split.pick_two(sub_seed(seed, STREAM_SPLIT, 1))
        };
    }
    Err(Error::Format(format!(
        "split must be \"natural\" or \"thin:J\", got {spec:?}"
    )))
}

fn write_inferred(path: &Path, result: &SemiResult<f64>, rows: &[usize]) -> Result<()> {
    let mut text = String::from("row,label,round,by,margin\n");
    for rec in &result.inferred {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            rows[rec.row], rec.label, rec.round, rec.by, rec.margin
        ));
    }
    fs::write(path, text)?;
    Ok(())
}

fn report_semi(
    command: &str,
    result: &SemiResult<f64>,
    pools: &SemiPools,
    baseline_seed: u64,
) -> Result<()> {
    println!("command={command}");
    println!("labeled_rows={}", pools.labeled.len());
    println!("unlabeled_rows={}", pools.unlabeled.len());
    println!("rounds={}", result.rounds.len());
    println!("transferred={}", result.inferred.len());
    if let Some(truth) = &pools.truth {
        let err = result.error_against(&pools.unlabeled, truth)?;
        println!("final_error={err}");
        // Supervised baseline: one forest on the same labeled pool over all
        // features, scored on the same held-back rows.
        let params = ForestParams {
            n_trees: result.classifier.params().n_trees,
            mtry: MtrySpec::Sqrt.resolve(pools.labeled.feature_count()),
            seed: baseline_seed,
        };
        let baseline = train_forest(&pools.labeled, &params)?;
        let mut wrong = 0usize;
        for (i, &t) in truth.iter().enumerate() {
            if baseline.predict_class(pools.unlabeled.row(i))? != t {
                wrong += 1;
            }
        }
        let sup = wrong as f64 / truth.len().max(1) as f64;
        println!("supervised_error={sup}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cotrain(
    features: &Path,
    split_spec: &str,
    m1: usize,
    m2: usize,
    trees: usize,
    mtry: &str,
    seed: u64,
    labeled: Option<usize>,
    classes: Option<usize>,
    out: Option<&Path>,
) -> Result<()> {
    let table = load_table(features)?;
    let pools = semi_pools(&table, labeled, classes, seed)?;
    let split = parse_split(split_spec, &table, seed)?;
    let params = SemiParams {
        n_trees: trees,
        mtry: mtry.parse()?,
        seed: sub_seed(seed, STREAM_SEMI, 0),
    };
    let result = cotrain::cotrain(&pools.labeled, &pools.unlabeled, &split, &params, m1, m2)?;
    if let Some(path) = out {
        write_inferred(path, &result, &pools.unlabeled_rows)?;
    }
    report_semi(
        "cotrain",
        &result,
        &pools,
        sub_seed(seed, STREAM_BASELINE, 0),
    )?;
    println!("split={split_spec}");
    println!("m1={m1}");
    println!("m2={m2}");
    println!("seed={seed}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn selftrain(
    features: &Path,
    m: usize,
    trees: usize,
    mtry: &str,
    seed: u64,
    labeled: Option<usize>,
    classes: Option<usize>,
    out: Option<&Path>,
) -> Result<()> {
    let table = load_table(features)?;
    let pools = semi_pools(&table, labeled, classes, seed)?;
    let params = SemiParams {
        n_trees: trees,
        mtry: mtry.parse()?,
        seed: sub_seed(seed, STREAM_SEMI, 0),
    };
    let result = cotrain::self_train(&pools.labeled, &pools.unlabeled, &params, m)?;
    if let Some(path) = out {
        write_inferred(path, &result, &pools.unlabeled_rows)?;
    }
    report_semi(
        "selftrain",
        &result,
        &pools,
        sub_seed(seed, STREAM_BASELINE, 0),
    )?;
    println!("m={m}");
    println!("seed={seed}");
    Ok(())
}

fn parse_cov(spec: &str) -> Result<CovKind> {
    if spec == "identity" {
        return Ok(CovKind::Identity);
    }
    if let Some(rho) = spec.strip_prefix("tridiag:") {
        let rho: f64 = rho
            .parse()
            .map_err(|_| Error::Format(format!("bad off-diagonal in {spec:?}")))?;
        return Ok(CovKind::Tridiagonal(rho));
    }
    if let Some(rho) = spec.strip_prefix("ar1:") {
        let rho: f64 = rho
            .parse()
            .map_err(|_| Error::Format(format!("bad decay in {spec:?}")))?;
        return Ok(CovKind::Ar1(rho));
    }
    Err(Error::Format(format!(
        "covariance must be identity, tridiag:RHO or ar1:RHO, got {spec:?}"
    )))
}

fn parse_center(spec: &str, p: usize) -> Result<Vec<f64>> {
    if spec == "ones" {
        return Ok(vec![1.0; p]);
    }
    let values: Vec<f64> = spec
        .split(',')
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Format(format!("bad center value {s:?}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != p {
        return Err(Error::InvalidArgument(format!(
            "center difference has {} entries for dimension {p}",
            values.len()
        )));
    }
    Ok(values)
}

fn parse_subset(spec: &str, p: usize) -> Result<Vec<usize>> {
    if let Some(k) = spec.strip_prefix("first:") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::Format(format!("bad subset size in {spec:?}")))?;
        if k == 0 || k > p {
            return Err(Error::InvalidArgument(format!(
                "subset size {k} outside [1, {p}]"
            )));
        }
        return Ok((0..k).collect());
    }
    let indices: Vec<usize> = spec
        .split(',')
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Format(format!("bad subset index {s:?}")))
        })
        .collect::<Result<_>>()?;
    Ok(indices)
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    cov: &str,
    p: usize,
    u: &str,
    subset: &str,
    mc_trials: usize,
    j: usize,
    epsilon: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let kind = parse_cov(cov)?;
    let sigma = tacoma_core::theory::make_cov::<f64>(kind, p)?;
    let center = parse_center(u, p)?;
    let subset_idx = parse_subset(subset, p)?;
    let report = ratio_of_separation(&center, &sigma, &subset_idx)?;

    let mut block = String::new();
    block.push_str("command=simulate\n");
    block.push_str(&format!("cov={cov}\n"));
    block.push_str(&format!("p={p}\n"));
    block.push_str(&format!("subset={subset}\n"));
    block.push_str(&format!("s_full={}\n", report.s_full));
    block.push_str(&format!("s_subset={}\n", report.s_subset));
    block.push_str(&format!("gamma={}\n", report.gamma));
    block.push_str(&format!("bayes_full={}\n", report.bayes_full));
    block.push_str(&format!("bayes_subset={}\n", report.bayes_subset));
    block.push_str(&format!("lambda_min_inv={}\n", report.lambda_min_inv));
    block.push_str(&format!("positive_definite={}\n", report.positive_definite));

    let mc = if mc_trials > 0 {
        let spec = MixtureSpec::balanced(center, sigma)?;
        let mc = mc_gamma(&spec, j, mc_trials, seed, epsilon)?;
        block.push_str(&format!("mc_trials={mc_trials}\n"));
        block.push_str(&format!("mc_j={j}\n"));
        block.push_str(&format!("mc_threshold={}\n", mc.threshold));
        block.push_str(&format!("mc_gamma_min={}\n", mc.min));
        block.push_str(&format!("mc_gamma_median={}\n", mc.median));
        block.push_str(&format!("mc_frac_below={}\n", mc.frac_below));
        Some(mc)
    } else {
        None
    };

    print!("{block}");
    if let Some(path) = out {
        let mut text = block;
        if let Some(mc) = &mc {
            for (t, g) in mc.samples.iter().enumerate() {
                text.push_str(&format!("sample={t},{g}\n"));
            }
        }
        fs::write(path, text)?;
        println!("out={}", path.display());
    }
    Ok(())
}

pub fn synth(out: &Path, seed: u64, per_class: usize, size: usize) -> Result<()> {
    let mut config = SynthConfig::default_with_seed(seed);
    config.width = size;
    config.height = size;
    let classes = config.class_count();
    config.per_class = vec![per_class; classes];
    let corpus = synth_corpus(&config)?;

    fs::create_dir_all(out)?;
    let patches_dir = out.join("patches");
    fs::create_dir_all(&patches_dir)?;
    let mut entries = Vec::with_capacity(corpus.images.len());
    let mut per_class_index = vec![0usize; classes];
    for ((image, &label), mask) in corpus
        .images
        .iter()
        .zip(&corpus.labels)
        .zip(&corpus.blob_masks)
    {
        let idx = per_class_index[label];
        per_class_index[label] += 1;
        let name = format!("class{label}_{idx:03}.pgm");
        fs::write(out.join(&name), write_pgm(image))?;
        let mask_pixels: Vec<u8> = mask.iter().map(|&m| if m { 255 } else { 0 }).collect();
        let mask_image = GrayImage::new(image.width(), image.height(), mask_pixels)?;
        fs::write(
            out.join(format!("class{label}_{idx:03}.mask.pgm")),
            write_pgm(&mask_image),
        )?;
        entries.push(ManifestEntry {
            path: name,
            label: Some(label),
        });
    }
    for (i, patch) in corpus.patches.iter().enumerate() {
        fs::write(
            patches_dir.join(format!("class{}.pgm", i + 1)),
            write_pgm(patch),
        )?;
    }
    fs::write(out.join("manifest.csv"), render_manifest(&entries))?;

    println!("command=synth");
    println!("images={}", corpus.images.len());
    println!("classes={classes}");
    println!("per_class={per_class}");
    println!("size={size}");
    println!("seed={seed}");
    println!("patches={}", corpus.patches.len());
    println!("manifest={}", out.join("manifest.csv").display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn learning_curve(
    features: &Path,
    sizes: &str,
    replicates: usize,
    test_fraction: f64,
    trees: usize,
    mtry: &str,
    seed: u64,
    classes: Option<usize>,
) -> Result<()> {
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Format(format!("bad size {s:?}")))
        })
        .collect::<Result<_>>()?;
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("no training sizes given".into()));
    }
    if replicates == 0 {
        return Err(Error::InvalidArgument(
            "replicate count must be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&test_fraction) || test_fraction == 0.0 {
        return Err(Error::InvalidArgument(
            "test fraction must lie in (0, 1)".into(),
        ));
    }
    let table = load_table(features)?;
    let (all, _) = table.labeled_dataset(classes)?;
    let n_test = ((all.len() as f64) * test_fraction).round().max(1.0) as usize;
    let pool_size = all.len() - n_test;
    if let Some(&too_big) = sizes.iter().find(|&&s| s > pool_size) {
        return Err(Error::InvalidArgument(format!(
            "training size {too_big} exceeds the {pool_size}-row pool"
        )));
    }
    let mtry_spec: MtrySpec = mtry.parse()?;

    println!("command=learning-curve");
    println!(
        "sizes={}",
        sizes
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    println!("replicates={replicates}");
    println!("test_rows={n_test}");
    println!("seed={seed}");

    let mut per_size_errors: Vec<Vec<f64>> = vec![Vec::new(); sizes.len()];
    for r in 0..replicates {
        let mut rng = seeded(sub_seed(seed, r as u64, 0));
        let test_idx = stratified_sample(all.labels(), n_test, &mut rng)?;
        let test_set: std::collections::BTreeSet<usize> = test_idx.iter().copied().collect();
        let pool: Vec<usize> = (0..all.len()).filter(|i| !test_set.contains(i)).collect();
        let test = all.select_rows(&test_idx)?;
        let pool_data = all.select_rows(&pool)?;
        for (si, &size) in sizes.iter().enumerate() {
            let mut sample_rng = seeded(sub_seed(seed, r as u64, 1 + si as u64));
            let train_idx = stratified_sample(pool_data.labels(), size, &mut sample_rng)?;
            let train_data = pool_data.select_rows(&train_idx)?;
            let params = ForestParams {
                n_trees: trees,
                mtry: mtry_spec.resolve(train_data.feature_count()),
                seed: sub_seed(seed, r as u64, 1000 + si as u64),
            };
            let forest = train_forest(&train_data, &params)?;
            let err = forest.error_on(&test)?;
            println!("point={r},{size},{err}");
            per_size_errors[si].push(err);
        }
    }
    for (si, &size) in sizes.iter().enumerate() {
        let mut errs = per_size_errors[si].clone();
        errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if errs.len() % 2 == 1 {
            errs[errs.len() / 2]
        } else {
            0.5 * (errs[errs.len() / 2 - 1] + errs[errs.len() / 2])
        };
        println!("median={size},{median}");
    }
    Ok(())
}
