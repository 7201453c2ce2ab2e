//! Spatial relationships and gray-level co-occurrence matrices.
//!
//! A spatial relationship pairs a compass direction with an interaction
//! distance; the GLCM of an image under a relationship counts, for every
//! ordered pair of gray levels `(a, b)`, how many pixel pairs `(p, p + offset)`
//! carry those levels. Matrices are directed: opposite directions yield
//! transposes of each other, not the same matrix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::raster::QuantizedImage;
use crate::scalar::Scalar;

/// The eight compass directions of the relationship set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    NE,
    SE,
    NW,
    SW,
    S,
    N,
    E,
    W,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::NE,
        Direction::SE,
        Direction::NW,
        Direction::SW,
        Direction::S,
        Direction::N,
        Direction::E,
        Direction::W,
    ];

    /// Unit step as `(dx, dy)`: columns grow rightward, rows grow downward.
    pub fn unit(self) -> (i64, i64) {
        match self {
            Direction::E => (1, 0),
            Direction::W => (-1, 0),
            Direction::S => (0, 1),
            Direction::N => (0, -1),
            Direction::NE => (1, -1),
            Direction::SE => (1, 1),
            Direction::NW => (-1, -1),
            Direction::SW => (-1, 1),
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::E => Direction::W,
            Direction::W => Direction::E,
            Direction::S => Direction::N,
            Direction::N => Direction::S,
            Direction::NE => Direction::SW,
            Direction::SW => Direction::NE,
            Direction::SE => Direction::NW,
            Direction::NW => Direction::SE,
        }
    }

    fn code(self) -> &'static str {
        match self {
            Direction::NE => "ne",
            Direction::SE => "se",
            Direction::NW => "nw",
            Direction::SW => "sw",
            Direction::S => "s",
            Direction::N => "n",
            Direction::E => "e",
            Direction::W => "w",
        }
    }
}

/// A (direction, distance) pair; distance is the number of unit steps, so a
/// diagonal relationship at distance `d` has offset `(±d, ±d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpatialRelationship {
    pub direction: Direction,
    pub distance: u32,
}

impl SpatialRelationship {
    pub fn new(direction: Direction, distance: u32) -> Result<Self> {
        if distance == 0 {
            return Err(Error::InvalidArgument(
                "relationship distance must be at least 1".into(),
            ));
        }
        Ok(Self {
            direction,
            distance,
        })
    }

    /// Opposite-direction relationship at the same distance.
    pub fn opposite(self) -> Self {
        Self {
            direction: self.direction.opposite(),
            distance: self.distance,
        }
    }
}

/// Pixel offset `(dx, dy)` realized by a relationship.
pub fn offset_of(rel: SpatialRelationship) -> (i64, i64) {
    let (ux, uy) = rel.direction.unit();
    (ux * rel.distance as i64, uy * rel.distance as i64)
}

impl fmt::Display for SpatialRelationship {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.direction.code(), self.distance)
    }
}

impl FromStr for SpatialRelationship {
    type Err = Error;

    /// Parses compass strings such as "ne3", "se1", "e2".
    fn from_str(s: &str) -> Result<Self> {
        let split = s
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(|| Error::Format(format!("relationship {s:?} has no distance digits")))?;
        let (dir, dist) = s.split_at(split);
        let direction = match dir {
            "ne" => Direction::NE,
            "se" => Direction::SE,
            "nw" => Direction::NW,
            "sw" => Direction::SW,
            "s" => Direction::S,
            "n" => Direction::N,
            "e" => Direction::E,
            "w" => Direction::W,
            other => {
                return Err(Error::Format(format!(
                    "unknown direction {other:?} in relationship {s:?}"
                )))
            }
        };
        let distance: u32 = dist
            .parse()
            .map_err(|_| Error::Format(format!("bad distance in relationship {s:?}")))?;
        SpatialRelationship::new(direction, distance)
    }
}

impl Serialize for SpatialRelationship {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SpatialRelationship {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Co-occurrence counts of an image under one spatial relationship.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glcm {
    levels: u16,
    relationship: SpatialRelationship,
    counts: Vec<u64>,
}

impl Glcm {
    pub fn levels(&self) -> u16 {
        self.levels
    }

    pub fn relationship(&self) -> SpatialRelationship {
        self.relationship
    }

    /// Count for source level `a` and target level `b` (both 1-based).
    pub fn count(&self, a: u16, b: u16) -> u64 {
        debug_assert!(a >= 1 && a <= self.levels && b >= 1 && b <= self.levels);
        self.counts[(a as usize - 1) * self.levels as usize + (b as usize - 1)]
    }

    /// All counts, row-major by `(a, b)`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Transposed matrix under the opposite-direction relationship.
    pub fn transposed(&self) -> Glcm {
        let n = self.levels as usize;
        let mut counts = vec![0u64; n * n];
        for a in 0..n {
            for b in 0..n {
                counts[b * n + a] = self.counts[a * n + b];
            }
        }
        Glcm {
            levels: self.levels,
            relationship: self.relationship.opposite(),
            counts,
        }
    }
}

/// Counts ordered pixel pairs `(p, p + offset)` per gray-level pair.
///
/// Out-of-bounds partners are skipped; an image too small to contain any
/// pair yields the all-zero matrix. The total count therefore equals
/// `(width - |dx|) * (height - |dy|)` whenever both factors are positive.
pub fn compute_glcm(image: &QuantizedImage, rel: SpatialRelationship) -> Glcm {
    let n = image.levels() as usize;
    let (dx, dy) = offset_of(rel);
    let (w, h) = (image.width() as i64, image.height() as i64);
    let mut counts = vec![0u64; n * n];

    let x_range = range_for(w, dx);
    let y_range = range_for(h, dy);
    let pixels = image.pixels();
    let stride = image.width() as i64;
    for y in y_range.clone() {
        let row = y * stride;
        let partner_row = (y + dy) * stride;
        for x in x_range.clone() {
            let a = pixels[(row + x) as usize] as usize;
            let b = pixels[(partner_row + x + dx) as usize] as usize;
            counts[(a - 1) * n + (b - 1)] += 1;
        }
    }
    Glcm {
        levels: image.levels(),
        relationship: rel,
        counts,
    }
}

/// Source coordinates along one axis whose partner at displacement `d`
/// stays in `[0, extent)`.
fn range_for(extent: i64, d: i64) -> std::ops::Range<i64> {
    if d >= 0 {
        0..(extent - d).max(0)
    } else {
        (-d).min(extent)..extent
    }
}

/// GLCM entries selected by a mask, in the mask's row-major `(a, b)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<F> {
    pub values: Vec<F>,
    /// Identifier of the producing mask and relationship.
    pub provenance: String,
}

/// Selects the masked entries of a GLCM as a flat feature vector.
pub fn apply_mask<F: Scalar>(glcm: &Glcm, mask: &FeatureMask) -> Result<FeatureVector<F>> {
    apply_mask_with(glcm, mask, false)
}

/// As [`apply_mask`], optionally dividing counts by the total pair count
/// (images with zero pairs yield all-zero features). Normalization is for
/// corpora of heterogeneous image sizes; raw counts are the default.
pub fn apply_mask_with<F: Scalar>(
    glcm: &Glcm,
    mask: &FeatureMask,
    normalize: bool,
) -> Result<FeatureVector<F>> {
    if mask.levels() != glcm.levels() {
        return Err(Error::DimensionMismatch(format!(
            "mask has {} levels but GLCM has {}",
            mask.levels(),
            glcm.levels()
        )));
    }
    let scale = if normalize {
        let total = glcm.total();
        if total == 0 {
            0.0
        } else {
            1.0 / total as f64
        }
    } else {
        1.0
    };
    let values = mask
        .indices()
        .iter()
        .map(|&(a, b)| F::of_f64(glcm.count(a, b) as f64 * scale))
        .collect();
    Ok(FeatureVector {
        values,
        provenance: format!("{}:{}", mask.id(), glcm.relationship()),
    })
}
