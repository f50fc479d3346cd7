//! MNIST-style IDX files: big-endian magic and dimensions, then raw bytes.

use std::path::Path;

use super::{DataError, Dataset};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], offset: usize, what: &'static str) -> Result<u32, DataError> {
    let chunk = bytes.get(offset..offset + 4).ok_or(DataError::Truncated {
        what,
        needed: offset + 4,
        have: bytes.len(),
    })?;
    Ok(u32::from_be_bytes(chunk.try_into().expect("four bytes")))
}

/// Parses an image file and a label file into one dataset.
///
/// Each pixel becomes `byte / 255`; images are flattened row-major and keep
/// their file order. The class count is `max label + 1`.
pub fn load_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let img = std::fs::read(images.as_ref())?;
    let lab = std::fs::read(labels.as_ref())?;
    let mut ds = parse_idx(&img, &lab)?;
    ds.provenance = format!(
        "{} + {}",
        images.as_ref().display(),
        labels.as_ref().display()
    );
    Ok(ds)
}

pub(crate) fn parse_idx(img: &[u8], lab: &[u8]) -> Result<Dataset, DataError> {
    let magic = be_u32(img, 0, "image header")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(DataError::BadMagic {
            found: magic,
            expected: IDX_IMAGES_MAGIC,
        });
    }
    let magic = be_u32(lab, 0, "label header")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(DataError::BadMagic {
            found: magic,
            expected: IDX_LABELS_MAGIC,
        });
    }
    let n_images = be_u32(img, 4, "image header")? as usize;
    let rows = be_u32(img, 8, "image header")? as usize;
    let cols = be_u32(img, 12, "image header")? as usize;
    let n_labels = be_u32(lab, 4, "label header")? as usize;
    if n_images != n_labels {
        return Err(DataError::CountMismatch {
            images: n_images,
            labels: n_labels,
        });
    }
    let dim = rows * cols;
    let needed = 16 + n_images * dim;
    if img.len() < needed {
        return Err(DataError::Truncated {
            what: "image payload",
            needed,
            have: img.len(),
        });
    }
    if lab.len() < 8 + n_labels {
        return Err(DataError::Truncated {
            what: "label payload",
            needed: 8 + n_labels,
            have: lab.len(),
        });
    }
    let features: Vec<f64> = img[16..needed].iter().map(|&b| b as f64 / 255.0).collect();
    let labels: Vec<usize> = lab[8..8 + n_labels].iter().map(|&b| b as usize).collect();
    let classes = labels.iter().copied().max().map_or(1, |m| m + 1);
    Dataset::new(features, dim, labels, classes, "idx")
}

/// Encodes a dataset of byte-valued pixels back into IDX image/label buffers.
pub fn encode_idx(pixels: &[u8], rows: usize, cols: usize, labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut img = Vec::with_capacity(16 + pixels.len());
    img.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    img.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    img.extend_from_slice(&(rows as u32).to_be_bytes());
    img.extend_from_slice(&(cols as u32).to_be_bytes());
    img.extend_from_slice(pixels);
    let mut lab = Vec::with_capacity(8 + labels.len());
    lab.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    lab.extend_from_slice(labels);
    (img, lab)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_two_by_two() {
        let (img, lab) = encode_idx(&[0, 255, 51, 128], 2, 2, &[3]);
        let ds = parse_idx(&img, &lab).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.dim(), 4);
        assert_eq!(ds.x(0), &[0.0, 1.0, 51.0 / 255.0, 128.0 / 255.0]);
        assert_eq!(ds.labels(), &[3]);
        assert_eq!(ds.classes(), 4);
    }

    #[test]
    fn wrong_magic() {
        let (mut img, lab) = encode_idx(&[0; 4], 2, 2, &[0]);
        img[3] = 0x01;
        assert!(matches!(
            parse_idx(&img, &lab),
            Err(DataError::BadMagic {
                found: 0x801,
                expected: 0x803
            })
        ));
        let (img, mut lab) = encode_idx(&[0; 4], 2, 2, &[0]);
        lab[3] = 0x03;
        assert!(matches!(
            parse_idx(&img, &lab),
            Err(DataError::BadMagic { .. })
        ));
    }

    #[test]
    fn full_size_header_and_truncation() {
        let pixels: Vec<u8> = (0..10 * 28 * 28).map(|i| (i % 256) as u8).collect();
        let labels: Vec<u8> = (0..10).collect();
        let (img, lab) = encode_idx(&pixels, 28, 28, &labels);
        let ds = parse_idx(&img, &lab).unwrap();
        assert_eq!((ds.len(), ds.dim()), (10, 784));
        assert_eq!(ds.x(9)[783], pixels[10 * 784 - 1] as f64 / 255.0);

        let short = &img[..img.len() - 1];
        assert!(matches!(
            parse_idx(short, &lab),
            Err(DataError::Truncated {
                what: "image payload",
                needed: 7856,
                have: 7855
            })
        ));
    }

    #[test]
    fn count_mismatch() {
        let (img, _) = encode_idx(&[0; 8], 2, 2, &[0, 1]);
        let (_, lab) = encode_idx(&[0; 4], 2, 2, &[0]);
        assert!(matches!(
            parse_idx(&img, &lab),
            Err(DataError::CountMismatch {
                images: 2,
                labels: 1
            })
        ));
    }
}
