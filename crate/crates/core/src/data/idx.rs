//! Big-endian IDX files (the MNIST distribution format).
//!
//! Layout: a 4-byte magic (`0x00000803` for rank-3 u8 image tensors,
//! `0x00000801` for rank-1 u8 label vectors), one big-endian u32 per
//! dimension, then the raw bytes.

use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::DataError;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_file(path: &Path) -> Result<Vec<u8>, DataError> {
    fs::read(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path, header_len: usize) -> Result<u32, DataError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| DataError::Truncated {
            path: path.to_path_buf(),
            expected: header_len as u64,
            actual: bytes.len() as u64,
        })
}

/// Parses the header and returns `(dims, payload)` after checking the magic
/// and that the payload length matches the product of the dims exactly.
fn parse<'a>(
    bytes: &'a [u8],
    path: &Path,
    magic: u32,
) -> Result<(Vec<usize>, &'a [u8]), DataError> {
    let rank = (magic & 0xff) as usize;
    let header_len = 4 + 4 * rank;
    let found = be_u32(bytes, 0, path, header_len)?;
    if found != magic {
        return Err(DataError::BadMagic {
            path: path.to_path_buf(),
            expected: magic,
            found,
        });
    }
    let dims = (0..rank)
        .map(|k| be_u32(bytes, 4 + 4 * k, path, header_len).map(|d| d as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let payload_len: usize = dims.iter().product();
    let expected = (header_len + payload_len) as u64;
    if bytes.len() as u64 != expected {
        return Err(DataError::Truncated {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len() as u64,
        });
    }
    Ok((dims, &bytes[header_len..]))
}

/// Loads an image/label file pair. Pixels are scaled to `[0, 1]` by `/255`
/// and each image is flattened row-major.
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<Dataset, DataError> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let image_bytes = read_file(images_path)?;
    let label_bytes = read_file(labels_path)?;

    let (image_dims, pixels) = parse(&image_bytes, images_path, IDX_IMAGES_MAGIC)?;
    let (label_dims, labels) = parse(&label_bytes, labels_path, IDX_LABELS_MAGIC)?;
    if image_dims[0] != label_dims[0] {
        return Err(DataError::CountMismatch {
            images: image_dims[0],
            labels: label_dims[0],
        });
    }
    let dim = image_dims[1] * image_dims[2];
    let labels: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
    let classes = labels.iter().max().map_or(0, |&m| m + 1).max(10);
    let features = pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    Dataset::new(features, labels, dim, classes)
}
