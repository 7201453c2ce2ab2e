//! Feature-mask construction from representative image patches.
//!
//! Each patch contributes the set of GLCM entries whose count strictly
//! exceeds the patch's entry median; the mask is the union over patches.
//! One mask is built per relationship and applied to every training and
//! scoring image afterward.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::glcm::{compute_glcm, Glcm, SpatialRelationship};
use crate::raster::QuantizedImage;

/// The set of surviving GLCM indices for one relationship.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    levels: u16,
    relationship: SpatialRelationship,
    /// Surviving `(a, b)` entries, 1-based, sorted row-major.
    indices: Vec<(u16, u16)>,
    patch_count: usize,
}

impl FeatureMask {
    /// Builds a mask from explicit indices (mostly for tests and file IO).
    pub fn from_indices(
        levels: u16,
        relationship: SpatialRelationship,
        indices: impl IntoIterator<Item = (u16, u16)>,
        patch_count: usize,
    ) -> Result<Self> {
        let set: BTreeSet<(u16, u16)> = indices.into_iter().collect();
        if let Some(&(a, b)) = set
            .iter()
            .find(|&&(a, b)| a < 1 || a > levels || b < 1 || b > levels)
        {
            return Err(Error::InvalidArgument(format!(
                "mask index ({a}, {b}) outside [1, {levels}]^2"
            )));
        }
        Ok(Self {
            levels,
            relationship,
            indices: set.into_iter().collect(),
            patch_count,
        })
    }

    pub fn levels(&self) -> u16 {
        self.levels
    }

    pub fn relationship(&self) -> SpatialRelationship {
        self.relationship
    }

    /// Surviving indices in row-major `(a, b)` order; feature `j` of every
    /// extracted vector corresponds to `indices()[j]`.
    pub fn indices(&self) -> &[(u16, u16)] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn patch_count(&self) -> usize {
        self.patch_count
    }

    /// Short content hash identifying this mask in file headers.
    pub fn id(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.levels.to_le_bytes());
        hasher.update(self.relationship.to_string().as_bytes());
        for &(a, b) in &self.indices {
            hasher.update(a.to_le_bytes());
            hasher.update(b.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Serializes to the canonical mask-file JSON (byte-stable for equal
    /// inputs: indices are sorted and field order is fixed).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mask serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mask: FeatureMask =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("mask file: {e}")))?;
        // Re-validate: files may come from elsewhere.
        FeatureMask::from_indices(
            mask.levels,
            mask.relationship,
            mask.indices,
            mask.patch_count,
        )
    }
}

/// Median over all `levels^2` entries, zeros included.
///
/// Even entry counts use the lower-median convention (the `n/2`-th smallest,
/// 1-based), so a constant matrix thresholds to an empty survivor set under
/// the strict `>` rule.
pub fn entry_median(glcm: &Glcm) -> f64 {
    let mut entries: Vec<u64> = glcm.counts().to_vec();
    entries.sort_unstable();
    let n = entries.len();
    let idx = if n.is_multiple_of(2) {
        n / 2 - 1
    } else {
        n / 2
    };
    entries[idx] as f64
}

/// Indices surviving thresholding at the patch's entry median (strict `>`).
pub fn patch_index_set(patch_glcm: &Glcm) -> BTreeSet<(u16, u16)> {
    let tau = entry_median(patch_glcm);
    let n = patch_glcm.levels();
    let mut set = BTreeSet::new();
    for a in 1..=n {
        for b in 1..=n {
            if patch_glcm.count(a, b) as f64 > tau {
                set.insert((a, b));
            }
        }
    }
    set
}

/// Builds the mask as the union of per-patch survivor sets.
pub fn build_mask(patches: &[QuantizedImage], rel: SpatialRelationship) -> Result<FeatureMask> {
    if patches.is_empty() {
        return Err(Error::InvalidArgument(
            "mask needs at least one patch".into(),
        ));
    }
    let levels = patches[0].levels();
    if let Some(p) = patches.iter().find(|p| p.levels() != levels) {
        return Err(Error::InvalidArgument(format!(
            "patches quantized to different level counts: {} vs {}",
            levels,
            p.levels()
        )));
    }
    let mut union = BTreeSet::new();
    for patch in patches {
        union.extend(patch_index_set(&compute_glcm(patch, rel)));
    }
    FeatureMask::from_indices(levels, rel, union, patches.len())
}
