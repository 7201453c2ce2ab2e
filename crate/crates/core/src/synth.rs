//! Deterministic synthetic textured-image corpus: class-dependent blob
//! darkness and density on a bright noisy background, with ground-truth
//! blob masks for salience validation.
//!
//! Class 0 is the definite-negative analog and carries no blobs; blob count
//! and darkness increase strictly with class index. Blobs are filled discs
//! with Gaussian-perturbed darkness so the dark-dark co-occurrence entries
//! carry the class signal.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::GrayImage;
use crate::rng::{derive_seed, seeded};

/// Blob generation parameters for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassBlobs {
    /// Inclusive range of blob counts per image.
    pub count: (u32, u32),
    /// Uniform radius range in pixels.
    pub radius: (f64, f64),
    /// Mean gray value of blob interiors (lower is darker).
    pub gray: f64,
}

/// Full corpus configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub width: usize,
    pub height: usize,
    /// Images per class; the length fixes the class count.
    pub per_class: Vec<usize>,
    /// Per-class blob parameters, aligned with `per_class`.
    pub blobs: Vec<ClassBlobs>,
    /// Uniform background gray range (bright).
    pub background: (u8, u8),
    /// Per-image brightness shift drawn from `[-jitter, +jitter]`,
    /// applied to the background only.
    pub brightness_jitter: u8,
    /// Per-blob standard deviation of the mean gray value.
    pub blob_gray_sd: f64,
    /// Per-pixel noise inside blobs.
    pub pixel_noise_sd: f64,
    /// Side length of the representative patch cropped per nonzero class.
    pub patch_size: usize,
    pub seed: u64,
}

impl SynthConfig {
    /// The default corpus: 128x128 images, four classes, 50 images each.
    pub fn default_with_seed(seed: u64) -> Self {
        SynthConfig {
            width: 128,
            height: 128,
            per_class: vec![50, 50, 50, 50],
            blobs: vec![
                ClassBlobs {
                    count: (0, 0),
                    radius: (0.0, 0.0),
                    gray: 255.0,
                },
                ClassBlobs {
                    count: (3, 5),
                    radius: (5.0, 8.0),
                    gray: 150.0,
                },
                ClassBlobs {
                    count: (7, 10),
                    radius: (4.5, 6.5),
                    gray: 95.0,
                },
                ClassBlobs {
                    count: (14, 20),
                    radius: (3.5, 5.5),
                    gray: 40.0,
                },
            ],
            background: (215, 250),
            brightness_jitter: 12,
            blob_gray_sd: 10.0,
            pixel_noise_sd: 4.0,
            patch_size: 48,
            seed,
        }
    }

    pub fn class_count(&self) -> usize {
        self.per_class.len()
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument(
                "image dimensions must be positive".into(),
            ));
        }
        if self.per_class.len() < 2 {
            return Err(Error::InvalidArgument(
                "corpus needs at least two classes".into(),
            ));
        }
        if self.blobs.len() != self.per_class.len() {
            return Err(Error::InvalidArgument(
                "blob parameter count must match class count".into(),
            ));
        }
        if self.per_class.contains(&0) {
            return Err(Error::InvalidArgument(
                "every class needs at least one image".into(),
            ));
        }
        if self.blobs[0].count != (0, 0) {
            return Err(Error::InvalidArgument(
                "class 0 is the definite negative and must have zero blobs".into(),
            ));
        }
        let limit = self.width.min(self.height) as f64;
        for (c, blob) in self.blobs.iter().enumerate() {
            if blob.count.0 > blob.count.1 || blob.radius.0 > blob.radius.1 {
                return Err(Error::InvalidArgument(format!(
                    "class {c} ranges are inverted"
                )));
            }
            if blob.radius.1 >= limit {
                return Err(Error::InvalidArgument(format!(
                    "class {c} blob radius {} must stay below the image size {limit}",
                    blob.radius.1
                )));
            }
        }
        for c in 2..self.blobs.len() {
            let prev = &self.blobs[c - 1];
            let cur = &self.blobs[c];
            if cur.count.0 <= prev.count.0 || cur.count.1 <= prev.count.1 {
                return Err(Error::InvalidArgument(format!(
                    "blob density must increase strictly with class (class {c})"
                )));
            }
            if cur.gray >= prev.gray {
                return Err(Error::InvalidArgument(format!(
                    "blob darkness must increase strictly with class (class {c})"
                )));
            }
        }
        if self.background.0 > self.background.1 {
            return Err(Error::InvalidArgument(
                "background range is inverted".into(),
            ));
        }
        if self.patch_size == 0 || self.patch_size > self.width || self.patch_size > self.height {
            return Err(Error::InvalidArgument(
                "patch size must fit inside the image".into(),
            ));
        }
        Ok(())
    }
}

/// A generated corpus; images are ordered class-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub images: Vec<GrayImage>,
    pub labels: Vec<usize>,
    /// Per-image ground truth: true exactly at pixels inside a blob.
    pub blob_masks: Vec<Vec<bool>>,
    /// One representative patch per nonzero class, cropped around the first
    /// blob of that class's first image.
    pub patches: Vec<GrayImage>,
}

/// Generates the corpus; bit-identical output for a given config.
pub fn synth_corpus(config: &SynthConfig) -> Result<SynthCorpus> {
    config.validate()?;
    let mut jobs: Vec<(usize, usize)> = Vec::new(); // (class, global index)
    let mut global = 0usize;
    for (class, &count) in config.per_class.iter().enumerate() {
        for _ in 0..count {
            jobs.push((class, global));
            global += 1;
        }
    }

    let generated: Vec<Generated> = jobs
        .par_iter()
        .map(|&(class, index)| generate_image(config, class, index))
        .collect();

    let mut images = Vec::with_capacity(generated.len());
    let mut labels = Vec::with_capacity(generated.len());
    let mut blob_masks = Vec::with_capacity(generated.len());
    let mut first_centers: Vec<Option<(usize, usize)>> = vec![None; config.class_count()];
    let mut first_image: Vec<Option<usize>> = vec![None; config.class_count()];
    for (i, ((class, _), (image, mask, center))) in jobs.iter().zip(generated).enumerate() {
        if first_image[*class].is_none() {
            first_image[*class] = Some(i);
            first_centers[*class] = center;
        }
        images.push(image);
        labels.push(*class);
        blob_masks.push(mask);
    }

    let mut patches = Vec::new();
    for class in 1..config.class_count() {
        let img_idx = first_image[class].expect("every class has images");
        let center = first_centers[class].unwrap_or((config.width / 2, config.height / 2));
        patches.push(crop(&images[img_idx], center, config.patch_size));
    }

    Ok(SynthCorpus {
        images,
        labels,
        blob_masks,
        patches,
    })
}

/// (image, blob mask, first blob center).
type Generated = (GrayImage, Vec<bool>, Option<(usize, usize)>);

fn generate_image(config: &SynthConfig, class: usize, index: usize) -> Generated {
    let mut rng = seeded(derive_seed(config.seed, index as u64));
    let (w, h) = (config.width, config.height);
    let jitter = config.brightness_jitter as i32;
    let shift: i32 = if jitter > 0 {
        rng.gen_range(-jitter..=jitter)
    } else {
        0
    };
    let (lo, hi) = (config.background.0 as i32, config.background.1 as i32);
    let mut pixels: Vec<u8> = (0..w * h)
        .map(|_| (rng.gen_range(lo..=hi) + shift).clamp(0, 255) as u8)
        .collect();
    let mut mask = vec![false; w * h];
    let mut first_center = None;

    let params = &config.blobs[class];
    if params.count.1 > 0 {
        let n_blobs = rng.gen_range(params.count.0..=params.count.1);
        let gray_dist = Normal::new(0.0, config.blob_gray_sd).expect("valid sd");
        let noise_dist = Normal::new(0.0, config.pixel_noise_sd).expect("valid sd");
        for _ in 0..n_blobs {
            let cx = rng.gen_range(0.0..w as f64);
            let cy = rng.gen_range(0.0..h as f64);
            let radius = if params.radius.1 > params.radius.0 {
                rng.gen_range(params.radius.0..=params.radius.1)
            } else {
                params.radius.0
            };
            if first_center.is_none() {
                first_center = Some((cx as usize, cy as usize));
            }
            let blob_gray = (params.gray + gray_dist.sample(&mut rng)).clamp(0.0, 200.0);
            let x0 = (cx - radius).floor().max(0.0) as usize;
            let x1 = ((cx + radius).ceil() as usize).min(w - 1);
            let y0 = (cy - radius).floor().max(0.0) as usize;
            let y1 = ((cy + radius).ceil() as usize).min(h - 1);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let dx = x as f64 + 0.5 - cx;
                    let dy = y as f64 + 0.5 - cy;
                    if dx * dx + dy * dy <= radius * radius {
                        let v = (blob_gray + noise_dist.sample(&mut rng)).clamp(0.0, 200.0);
                        pixels[y * w + x] = v as u8;
                        mask[y * w + x] = true;
                    }
                }
            }
        }
    }
    let image = GrayImage::new(w, h, pixels).expect("dimensions validated");
    (image, mask, first_center)
}

/// Crops a square window centered at `center`, clamped to the image bounds.
fn crop(image: &GrayImage, center: (usize, usize), size: usize) -> GrayImage {
    let x0 = center.0.saturating_sub(size / 2).min(image.width() - size);
    let y0 = center.1.saturating_sub(size / 2).min(image.height() - size);
    let mut pixels = Vec::with_capacity(size * size);
    for y in y0..y0 + size {
        for x in x0..x0 + size {
            pixels.push(image.get(x, y));
        }
    }
    GrayImage::new(size, size, pixels).expect("crop fits")
}
