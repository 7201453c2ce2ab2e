//! Back-projection of important GLCM entries to the image pixels that
//! realize them, and overlay rendering.
//!
//! A GLCM entry `(a, b)` is realized by ordered pixel pairs
//! `(x, x + offset)` with levels `a` and `b`; both endpoints of every such
//! pair count as salient for that entry.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::forest::{importance_ranking, Forest};
use crate::glcm::{offset_of, SpatialRelationship};
use crate::mask::FeatureMask;
use crate::raster::{GrayImage, QuantizedImage};
use crate::scalar::Scalar;

/// Pixels flagged salient for a set of GLCM entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SalienceMap {
    pub width: usize,
    pub height: usize,
    /// Flagged positions as `(x, y)`, ordered lexicographically.
    pub pixels: BTreeSet<(u32, u32)>,
    /// The GLCM entries that produced the map.
    pub source_features: Vec<(u16, u16)>,
}

impl SalienceMap {
    /// Flagged coordinates as text, one `x y` per line, sorted.
    pub fn coords_text(&self) -> String {
        let mut out = String::new();
        for &(x, y) in &self.pixels {
            out.push_str(&format!("{x} {y}\n"));
        }
        out
    }
}

/// Collects both endpoints of every pixel pair realizing one of the given
/// GLCM entries. Entries outside `[1, levels]^2` are a caller bug.
pub fn salient_pixels(
    image: &QuantizedImage,
    rel: SpatialRelationship,
    features: &[(u16, u16)],
) -> SalienceMap {
    let n = image.levels() as usize;
    for &(a, b) in features {
        assert!(
            a >= 1 && a <= image.levels() && b >= 1 && b <= image.levels(),
            "feature ({a}, {b}) outside [1, {}]^2",
            image.levels()
        );
    }
    let mut wanted = vec![false; n * n];
    for &(a, b) in features {
        wanted[(a as usize - 1) * n + (b as usize - 1)] = true;
    }
    let (dx, dy) = offset_of(rel);
    let (w, h) = (image.width() as i64, image.height() as i64);
    let mut pixels = BTreeSet::new();
    for y in 0..h {
        for x in 0..w {
            let (px, py) = (x + dx, y + dy);
            if px < 0 || py < 0 || px >= w || py >= h {
                continue;
            }
            let a = image.get(x as usize, y as usize) as usize;
            let b = image.get(px as usize, py as usize) as usize;
            if wanted[(a - 1) * n + (b - 1)] {
                pixels.insert((x as u32, y as u32));
                pixels.insert((px as u32, py as u32));
            }
        }
    }
    SalienceMap {
        width: image.width(),
        height: image.height(),
        pixels,
        source_features: features.to_vec(),
    }
}

/// Back-projects the `k` most important forest features through the mask's
/// row-major index order. `k` larger than the mask clamps to the mask size;
/// the effective count is `source_features.len()` of the result.
pub fn top_salient<F: Scalar>(
    image: &QuantizedImage,
    rel: SpatialRelationship,
    forest: &Forest<F>,
    mask: &FeatureMask,
    k: usize,
) -> Result<SalienceMap> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "feature count k must be at least 1".into(),
        ));
    }
    if forest.feature_count() != mask.len() {
        return Err(Error::DimensionMismatch(format!(
            "forest expects {} features but mask has {}",
            forest.feature_count(),
            mask.len()
        )));
    }
    if mask.levels() != image.levels() {
        return Err(Error::DimensionMismatch(format!(
            "mask has {} levels but image has {}",
            mask.levels(),
            image.levels()
        )));
    }
    let take = k.min(mask.len());
    let features: Vec<(u16, u16)> = importance_ranking(forest)
        .into_iter()
        .take(take)
        .map(|(index, _)| mask.indices()[index])
        .collect();
    Ok(salient_pixels(image, rel, &features))
}

/// Copies the image with every flagged pixel set to white (255).
pub fn render_overlay(image: &GrayImage, map: &SalienceMap) -> Result<GrayImage> {
    if image.width() != map.width || image.height() != map.height {
        return Err(Error::DimensionMismatch(format!(
            "overlay {}x{} onto image {}x{}",
            map.width,
            map.height,
            image.width(),
            image.height()
        )));
    }
    let mut out = image.clone();
    for &(x, y) in &map.pixels {
        out.set(x as usize, y as usize, 255);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glcm::Direction;
    use crate::raster::QuantizedImage;

    fn rel(direction: Direction, distance: u32) -> SpatialRelationship {
        SpatialRelationship::new(direction, distance).unwrap()
    }

    fn hand_image() -> QuantizedImage {
        QuantizedImage::new(3, 3, 3, vec![1, 2, 3, 2, 3, 3, 3, 1, 2]).unwrap()
    }

    #[test]
    fn empty_feature_list_flags_nothing() {
        let map = salient_pixels(&hand_image(), rel(Direction::E, 1), &[]);
        assert!(map.pixels.is_empty());
    }

    #[test]
    fn constant_image_flags_all_pair_members() {
        let img = QuantizedImage::new(4, 1, 3, vec![2; 4]).unwrap();
        let map = salient_pixels(&img, rel(Direction::E, 1), &[(2, 2)]);
        // every pixel participates in at least one (left or right) pair
        assert_eq!(map.pixels.len(), 4);
    }

    #[test]
    fn hand_image_feature_23_endpoints() {
        let map = salient_pixels(&hand_image(), rel(Direction::E, 1), &[(2, 3)]);
        let expect: BTreeSet<(u32, u32)> = [(1, 0), (2, 0), (0, 1), (1, 1)].into_iter().collect();
        assert_eq!(map.pixels, expect);
    }

    #[test]
    fn union_of_feature_sets_is_union_of_maps() {
        let img = hand_image();
        let r = rel(Direction::E, 1);
        let a = salient_pixels(&img, r, &[(2, 3)]);
        let b = salient_pixels(&img, r, &[(3, 1)]);
        let both = salient_pixels(&img, r, &[(2, 3), (3, 1)]);
        let union: BTreeSet<(u32, u32)> = a.pixels.union(&b.pixels).copied().collect();
        assert_eq!(both.pixels, union);
    }

    #[test]
    fn pixel_count_bounded_by_twice_pair_count() {
        let img = hand_image();
        let r = rel(Direction::E, 1);
        let g = crate::glcm::compute_glcm(&img, r);
        for feature in [(1u16, 2u16), (2, 3), (3, 3), (3, 1)] {
            let map = salient_pixels(&img, r, &[feature]);
            assert!(map.pixels.len() as u64 <= 2 * g.count(feature.0, feature.1));
        }
    }

    #[test]
    fn overlay_sets_flagged_pixels_white() {
        let base = crate::raster::GrayImage::new(3, 3, vec![10; 9]).unwrap();
        let img = hand_image();
        let map = salient_pixels(&img, rel(Direction::E, 1), &[(2, 3)]);
        let over = render_overlay(&base, &map).unwrap();
        assert_eq!(over.get(1, 0), 255);
        assert_eq!(over.get(0, 0), 10);
        // idempotent
        assert_eq!(render_overlay(&over, &map).unwrap(), over);
        // empty map leaves the image unchanged
        let empty = salient_pixels(&img, rel(Direction::E, 1), &[]);
        assert_eq!(render_overlay(&base, &empty).unwrap(), base);
    }

    #[test]
    fn overlay_rejects_dimension_mismatch() {
        let base = crate::raster::GrayImage::new(2, 2, vec![0; 4]).unwrap();
        let map = salient_pixels(&hand_image(), rel(Direction::E, 1), &[(2, 3)]);
        assert!(render_overlay(&base, &map).is_err());
    }

    #[test]
    fn coords_text_is_sorted() {
        let map = salient_pixels(&hand_image(), rel(Direction::E, 1), &[(2, 3)]);
        assert_eq!(map.coords_text(), "0 1\n1 0\n1 1\n2 0\n");
    }

    #[test]
    fn top_salient_composes_ranking_and_backprojection() {
        use crate::forest::{train_forest, Dataset, ForestParams};
        use crate::glcm::apply_mask;
        use crate::mask::FeatureMask;

        // Two image families: level-2 horizontal stripes vs level-3 stripes.
        let r = rel(Direction::E, 1);
        let mask = FeatureMask::from_indices(3, r, [(1, 1), (2, 2), (3, 3)], 1).unwrap();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut images = Vec::new();
        for i in 0..12 {
            let level = if i % 2 == 0 { 2u16 } else { 3 };
            let mut pixels = vec![1u16; 16];
            // a run of `level` pixels whose length varies a little
            for px in pixels.iter_mut().take(2 + (i % 3)) {
                *px = level;
            }
            let img = QuantizedImage::new(4, 4, 3, pixels).unwrap();
            let g = crate::glcm::compute_glcm(&img, r);
            rows.extend(apply_mask::<f64>(&g, &mask).unwrap().values);
            labels.push(i % 2);
            images.push(img);
        }
        let data = Dataset::new(rows, 3, labels, 2).unwrap();
        let forest = train_forest(
            &data,
            &ForestParams {
                n_trees: 30,
                mtry: 3,
                seed: 1,
            },
        )
        .unwrap();

        let full = top_salient(&images[0], r, &forest, &mask, 3).unwrap();
        let direct = salient_pixels(&images[0], r, &[(1, 1), (2, 2), (3, 3)]);
        assert_eq!(full.pixels, direct.pixels);
        // k beyond the mask clamps
        let clamped = top_salient(&images[0], r, &forest, &mask, 99).unwrap();
        assert_eq!(clamped.source_features.len(), 3);
        // k=1 equals direct back-projection of the single top feature
        let top1 = top_salient(&images[0], r, &forest, &mask, 1).unwrap();
        let by_hand = salient_pixels(&images[0], r, &[top1.source_features[0]]);
        assert_eq!(top1.pixels, by_hand.pixels);
    }
}
