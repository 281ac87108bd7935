use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

use super::dataset::{split_balanced, Dataset, Split, Splits, Task};
use super::pca::{pca_apply, pca_fit, PcaModel};
use crate::{Error, Result};

pub const DATA_DIR_ENV: &str = "HQCNN_DATA_DIR";

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;
const PIXELS: usize = 784;

/// `$HQCNN_DATA_DIR`, else `./data`.
pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV).map_or_else(|| PathBuf::from("data"), PathBuf::from)
}

fn gunzip_if_needed(bytes: &[u8]) -> Result<Vec<u8>> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(bytes)
            .read_to_end(&mut out)
            .map_err(|e| Error::Data(format!("gzip: {e}")))?;
        Ok(out)
    } else {
        Ok(bytes.to_vec())
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Data("truncated IDX header".into()))
}

/// `(rows, cols, pixels)` with one `rows·cols` chunk per image.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, Vec<Vec<u8>>)> {
    let bytes = gunzip_if_needed(bytes)?;
    let magic = be_u32(&bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Data(format!("bad IDX image magic {magic:#010x}")));
    }
    let count = be_u32(&bytes, 4)? as usize;
    let rows = be_u32(&bytes, 8)? as usize;
    let cols = be_u32(&bytes, 12)? as usize;
    let size = rows * cols;
    let payload = &bytes[16..];
    if payload.len() < count * size {
        return Err(Error::Data(format!(
            "IDX images: {} payload bytes for {count} images of {rows}x{cols}",
            payload.len()
        )));
    }
    let images = (0..count)
        .map(|i| payload[i * size..(i + 1) * size].to_vec())
        .collect();
    Ok((rows, cols, images))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let bytes = gunzip_if_needed(bytes)?;
    let magic = be_u32(&bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(Error::Data(format!("bad IDX label magic {magic:#010x}")));
    }
    let count = be_u32(&bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() < count {
        return Err(Error::Data(format!(
            "IDX labels: {} bytes for {count} labels",
            payload.len()
        )));
    }
    Ok(payload[..count].to_vec())
}

/// Digit-0/1 images as pixel intensities in [0,1].
pub fn load_mnist_idx(images: &[u8], labels: &[u8]) -> Result<Dataset> {
    let (rows, cols, images) = parse_idx_images(images)?;
    let labels = parse_idx_labels(labels)?;
    if images.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    if !images.is_empty() && rows * cols != PIXELS {
        return Err(Error::Data(format!(
            "expected 28x28 images, got {rows}x{cols}"
        )));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (img, &label) in images.iter().zip(&labels) {
        if label <= 1 {
            x.push(img.iter().map(|&p| p as f64 / 255.0).collect());
            y.push(label as f64);
        }
    }
    Dataset::new(x, y, Split::All, Task::Classification)
}

/// CSV with 784 pixel columns (0..=255) followed by the label; other digits are skipped.
pub fn load_mnist_csv<R: Read>(reader: R) -> Result<Dataset> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (line_no, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::Data(format!("csv line {}: {e}", line_no + 1)))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Data(format!("csv line {}: {e}", line_no + 1)))?;
        if values.len() != PIXELS + 1 {
            return Err(Error::Data(format!(
                "csv line {}: {} columns, expected {}",
                line_no + 1,
                values.len(),
                PIXELS + 1
            )));
        }
        let label = values[PIXELS];
        if label == 0.0 || label == 1.0 {
            x.push(values[..PIXELS].iter().map(|p| p / 255.0).collect());
            y.push(label);
        }
    }
    Dataset::new(x, y, Split::All, Task::Classification)
}

fn find(dir: &Path, stems: &[&str]) -> Option<PathBuf> {
    for base in [dir.to_path_buf(), dir.join("mnist")] {
        for stem in stems {
            for ext in ["", ".gz"] {
                let p = base.join(format!("{stem}{ext}"));
                if p.is_file() {
                    return Some(p);
                }
            }
        }
    }
    None
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Loads digits 0/1 from `dir` (or `dir/mnist`).
///
/// IDX training files are preferred; `mnist01.csv[.gz]` is the fallback.
pub fn load_mnist_dir(dir: &Path) -> Result<Dataset> {
    let images = find(dir, &["train-images-idx3-ubyte", "train-images.idx3-ubyte"]);
    let labels = find(dir, &["train-labels-idx1-ubyte", "train-labels.idx1-ubyte"]);
    if let (Some(i), Some(l)) = (images, labels) {
        return load_mnist_idx(&read(&i)?, &read(&l)?);
    }
    let csv = find(dir, &["mnist01.csv"])
        .ok_or_else(|| Error::Data(format!("no MNIST files under {}", dir.display())))?;
    load_mnist_csv(gunzip_if_needed(&read(&csv)?)?.as_slice())
}

/// Balanced split followed by PCA fitted on the training rows.
pub fn mnist_splits(
    raw: &Dataset,
    components: usize,
    sizes: (usize, usize, usize),
    seed: u64,
) -> Result<(Splits, PcaModel)> {
    let s = split_balanced(raw, sizes, seed)?;
    let pca = pca_fit(&s.train.x, components)?;
    let project = |d: &Dataset| -> Dataset {
        Dataset {
            x: pca_apply(&pca, &d.x),
            ..d.clone()
        }
    };
    let splits = Splits {
        train: project(&s.train),
        val: project(&s.val),
        test: project(&s.test),
    };
    Ok((splits, pca))
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::GzEncoder;
    use flate2::Compression;
    use std::io::Write;

    fn idx_images(images: &[Vec<u8>]) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend(IMAGE_MAGIC.to_be_bytes());
        b.extend((images.len() as u32).to_be_bytes());
        b.extend(28u32.to_be_bytes());
        b.extend(28u32.to_be_bytes());
        for img in images {
            b.extend(img);
        }
        b
    }

    fn idx_labels(labels: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend(LABEL_MAGIC.to_be_bytes());
        b.extend((labels.len() as u32).to_be_bytes());
        b.extend(labels);
        b
    }

    #[test]
    fn empty_image_file() {
        let (_, _, imgs) = parse_idx_images(&idx_images(&[])).unwrap();
        assert!(imgs.is_empty());
        assert!(load_mnist_idx(&idx_images(&[]), &idx_labels(&[]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn header_errors() {
        let mut bad = idx_labels(&[1, 0]);
        bad[3] = 0x03;
        assert!(parse_idx_labels(&bad).is_err());
        let img: Vec<u8> = (0..784).map(|i| (i % 256) as u8).collect();
        assert!(load_mnist_idx(
            &idx_images(std::slice::from_ref(&img)),
            &idx_labels(&[0, 1])
        )
        .is_err());
        let mut truncated = idx_images(&[img]);
        truncated.truncate(100);
        assert!(parse_idx_images(&truncated).is_err());
    }

    #[test]
    fn two_image_fixture() {
        let a: Vec<u8> = (0..784).map(|i| (i % 256) as u8).collect();
        let b: Vec<u8> = (0..784).map(|i| (255 - i % 256) as u8).collect();
        let c = vec![7u8; 784];
        let images = idx_images(&[a.clone(), c, b.clone()]);
        let labels = idx_labels(&[1, 7, 0]);
        let mut gz = GzEncoder::new(Vec::new(), Compression::fast());
        gz.write_all(&images).unwrap();
        let gz = gz.finish().unwrap();
        for img_bytes in [&images, &gz] {
            let d = load_mnist_idx(img_bytes, &labels).unwrap();
            assert_eq!(d.y, vec![1.0, 0.0]);
            for (row, src) in d.x.iter().zip([&a, &b]) {
                for (v, &p) in row.iter().zip(src.iter()) {
                    assert_eq!(*v, p as f64 / 255.0);
                }
            }
        }
    }

    #[test]
    fn csv_rows() {
        let mut text = String::new();
        for label in [0, 3, 1] {
            let px: Vec<String> = (0..784).map(|i| ((i * label) % 256).to_string()).collect();
            text += &format!("{},{label}\n", px.join(","));
        }
        let d = load_mnist_csv(text.as_bytes()).unwrap();
        assert_eq!(d.y, vec![0.0, 1.0]);
        assert_eq!(d.x[1][5], 5.0 / 255.0);
        assert!(load_mnist_csv("1,2,3\n".as_bytes()).is_err());
    }
}
