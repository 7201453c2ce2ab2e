//! On-disk tabular formats: the feature table and the image manifest.
//!
//! Feature table (`tacoma-features-v1`): a CSV with a two-line header.
//! Line 1 is the format version, line 2 records the relationship block
//! boundaries and the identity of the mask each block was extracted with:
//!
//! ```text
//! tacoma-features-v1
//! blocks,ne3:0:412:184f00f2331de6a1,se1:412:799:aa10b2cc91d00e3f
//! 0,12,0,3,...
//! ?,7,1,0,...
//! ```
//!
//! Rows are `label,value,...` with `?` marking unlabeled rows. The manifest
//! is a two-column CSV `path,label` with the same label convention; paths
//! must not contain commas and resolve relative to the manifest location.

use crate::cotrain::Unlabeled;
use crate::error::{Error, Result};
use crate::forest::Dataset;
use crate::glcm::SpatialRelationship;

pub const FEATURES_VERSION: &str = "tacoma-features-v1";

/// One contiguous block of columns extracted under a single relationship.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureBlock {
    pub relationship: SpatialRelationship,
    pub start: usize,
    pub end: usize,
    pub mask_id: String,
}

/// A parsed feature table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub blocks: Vec<FeatureBlock>,
    /// Per-row label; `None` for unlabeled rows.
    pub labels: Vec<Option<usize>>,
    values: Vec<f64>,
    p: usize,
}

impl FeatureTable {
    pub fn new(
        blocks: Vec<FeatureBlock>,
        labels: Vec<Option<usize>>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let p = validate_blocks(&blocks)?;
        if values.len() != labels.len() * p {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} rows of {p} columns",
                values.len(),
                labels.len()
            )));
        }
        Ok(Self {
            blocks,
            labels,
            values,
            p,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    /// Column ranges per block, for natural splits.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        self.blocks.iter().map(|b| b.start..b.end).collect()
    }

    /// Labeled rows as a dataset plus their original row indices.
    /// `class_count` defaults to `max label + 1`.
    pub fn labeled_dataset(
        &self,
        class_count: Option<usize>,
    ) -> Result<(Dataset<f64>, Vec<usize>)> {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut indices = Vec::new();
        for (i, label) in self.labels.iter().enumerate() {
            if let Some(l) = label {
                rows.extend_from_slice(self.row(i));
                labels.push(*l);
                indices.push(i);
            }
        }
        if labels.is_empty() {
            return Err(Error::InvalidArgument(
                "feature table has no labeled rows".into(),
            ));
        }
        let classes = class_count.unwrap_or_else(|| labels.iter().max().unwrap() + 1);
        Ok((Dataset::new(rows, self.p, labels, classes)?, indices))
    }

    /// Unlabeled rows plus their original row indices.
    pub fn unlabeled_rows(&self) -> Result<(Unlabeled<f64>, Vec<usize>)> {
        let mut rows = Vec::new();
        let mut indices = Vec::new();
        for (i, label) in self.labels.iter().enumerate() {
            if label.is_none() {
                rows.extend_from_slice(self.row(i));
                indices.push(i);
            }
        }
        Ok((Unlabeled::new(rows, self.p)?, indices))
    }

    /// Renders the canonical text form.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(FEATURES_VERSION);
        out.push('\n');
        out.push_str("blocks");
        for block in &self.blocks {
            out.push_str(&format!(
                ",{}:{}:{}:{}",
                block.relationship, block.start, block.end, block.mask_id
            ));
        }
        out.push('\n');
        for i in 0..self.len() {
            match self.labels[i] {
                Some(l) => out.push_str(&l.to_string()),
                None => out.push('?'),
            }
            for v in self.row(i) {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let version = lines
            .next()
            .ok_or_else(|| Error::Format("empty feature table".into()))?;
        if version.trim() != FEATURES_VERSION {
            return Err(Error::Format(format!(
                "feature table version {version:?}, expected {FEATURES_VERSION:?}"
            )));
        }
        let block_line = lines
            .next()
            .ok_or_else(|| Error::Format("feature table missing block header".into()))?;
        let mut parts = block_line.split(',');
        if parts.next() != Some("blocks") {
            return Err(Error::Format(
                "second header line must start with \"blocks\"".into(),
            ));
        }
        let mut blocks = Vec::new();
        for part in parts {
            let fields: Vec<&str> = part.split(':').collect();
            if fields.len() != 4 {
                return Err(Error::Format(format!(
                    "block {part:?} must be rel:start:end:mask_id"
                )));
            }
            blocks.push(FeatureBlock {
                relationship: fields[0].parse()?,
                start: fields[1]
                    .parse()
                    .map_err(|_| Error::Format(format!("bad block start in {part:?}")))?,
                end: fields[2]
                    .parse()
                    .map_err(|_| Error::Format(format!("bad block end in {part:?}")))?,
                mask_id: fields[3].to_string(),
            });
        }
        let p = validate_blocks(&blocks)?;

        let mut labels = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let label_field = fields.next().expect("split yields at least one field");
            labels.push(parse_label(label_field, lineno + 3)?);
            let mut count = 0usize;
            for field in fields {
                let v: f64 = field.parse().map_err(|_| {
                    Error::Format(format!("line {}: bad feature value {field:?}", lineno + 3))
                })?;
                if !v.is_finite() {
                    return Err(Error::Format(format!(
                        "line {}: non-finite feature value",
                        lineno + 3
                    )));
                }
                values.push(v);
                count += 1;
            }
            if count != p {
                return Err(Error::Format(format!(
                    "line {}: {count} features, header declares {p}",
                    lineno + 3
                )));
            }
        }
        FeatureTable::new(blocks, labels, values)
    }
}

fn validate_blocks(blocks: &[FeatureBlock]) -> Result<usize> {
    if blocks.is_empty() {
        return Err(Error::Format(
            "feature table needs at least one block".into(),
        ));
    }
    let mut expected_start = 0usize;
    for block in blocks {
        if block.start != expected_start || block.end <= block.start {
            return Err(Error::Format(format!(
                "blocks must tile the columns contiguously; found {}:{} expecting start {}",
                block.start, block.end, expected_start
            )));
        }
        expected_start = block.end;
    }
    Ok(expected_start)
}

fn parse_label(field: &str, lineno: usize) -> Result<Option<usize>> {
    if field == "?" {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| Error::Format(format!("line {lineno}: bad label {field:?}")))
}

/// One manifest row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    /// `None` for rows marked `?` (unlabeled).
    pub label: Option<usize>,
}

/// Parses a `path,label` manifest.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .map(|(_, l)| l.trim())
        .ok_or_else(|| Error::Format("empty manifest".into()))?;
    if header != "path,label" {
        return Err(Error::Format(format!(
            "manifest header {header:?}, expected \"path,label\""
        )));
    }
    let mut entries = Vec::new();
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let (path, label) = line.rsplit_once(',').ok_or_else(|| {
            Error::Format(format!(
                "line {}: manifest row needs path,label",
                lineno + 1
            ))
        })?;
        if path.contains(',') {
            return Err(Error::Format(format!(
                "line {}: paths with commas are not supported",
                lineno + 1
            )));
        }
        if path.is_empty() {
            return Err(Error::Format(format!("line {}: empty path", lineno + 1)));
        }
        entries.push(ManifestEntry {
            path: path.to_string(),
            label: parse_label(label, lineno + 1)?,
        });
    }
    if entries.is_empty() {
        return Err(Error::Format("manifest lists no images".into()));
    }
    Ok(entries)
}

/// Renders a manifest in canonical form.
pub fn render_manifest(entries: &[ManifestEntry]) -> String {
    let mut out = String::from("path,label\n");
    for entry in entries {
        out.push_str(&entry.path);
        out.push(',');
        match entry.label {
            Some(l) => out.push_str(&l.to_string()),
            None => out.push('?'),
        }
        out.push('\n');
    }
    out
}
