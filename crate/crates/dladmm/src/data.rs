//! Synthetic problem generation, salt-and-pepper corruption, patch
//! decomposition for grayscale images, and all file formats.
//!
//! Randomness comes from ChaCha8, a counter-based generator with 2^64
//! independent streams; each sample column draws from its own stream, so
//! generation order (or parallelism) can never change the data.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone)]
pub struct Dataset {
    pub a: Matrix,
    /// Observations, one sample per column.
    pub x: Matrix,
    pub z_true: Option<Matrix>,
    pub e_true: Option<Matrix>,
    pub density: f64,
    pub seed: u64,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.x.cols()
    }

    pub fn has_ground_truth(&self) -> bool {
        self.z_true.is_some() && self.e_true.is_some()
    }
}

/// Gaussian dictionary with entries N(0, 1/d), columns rescaled to unit
/// l2 norm exactly.
pub fn gen_dictionary(m: usize, d: usize, seed: u64) -> Result<Matrix> {
    if m < 1 || d < 1 {
        return Err(Error::Argument("dictionary dimensions must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, (1.0 / d as f64).sqrt()).unwrap();
    let mut a = Matrix::from_fn(m, d, |_, _| normal.sample(&mut rng));
    for j in 0..d {
        let norm = a.column_norm(j);
        if norm == 0.0 {
            // astronomically unlikely; keep the column deterministic anyway
            a.set(0, j, 1.0);
            continue;
        }
        for i in 0..m {
            a.set(i, j, a.get(i, j) / norm);
        }
    }
    Ok(a)
}

fn sparse_column(rows: usize, density: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    (0..rows)
        .map(|_| {
            if rng.gen::<f64>() < density {
                normal.sample(rng)
            } else {
                0.0
            }
        })
        .collect()
}

/// Bernoulli(density) times standard normal, entry by entry.
pub fn gen_sparse(rows: usize, cols: usize, density: f64, seed: u64) -> Result<Matrix> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Argument("density must be in (0, 1]".into()));
    }
    let mut out = Matrix::zeros(rows, cols);
    for j in 0..cols {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        let col = sparse_column(rows, density, &mut rng);
        for i in 0..rows {
            out.set(i, j, col[i]);
        }
    }
    Ok(out)
}

/// Full synthetic dataset: X = A Z* + E* exactly, ground truth retained.
/// Stream layout: dictionary on the seed itself, sample j uses streams
/// 2j+1 (Z column) and 2j+2 (E column).
pub fn gen_dataset(m: usize, d: usize, n_samples: usize, density: f64, seed: u64) -> Result<Dataset> {
    if n_samples < 1 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Argument("density must be in (0, 1]".into()));
    }
    let a = gen_dictionary(m, d, seed)?;
    let mut z = Matrix::zeros(d, n_samples);
    let mut e = Matrix::zeros(m, n_samples);
    for j in 0..n_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2 * j as u64 + 1);
        for (i, v) in sparse_column(d, density, &mut rng).into_iter().enumerate() {
            z.set(i, j, v);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2 * j as u64 + 2);
        for (i, v) in sparse_column(m, density, &mut rng).into_iter().enumerate() {
            e.set(i, j, v);
        }
    }
    let x = a.matmul(&z)?.add(&e)?;
    Ok(Dataset {
        a,
        x,
        z_true: Some(z),
        e_true: Some(e),
        density,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major pixels.
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Dim(format!(
                "{}x{} image needs {} pixels, got {}",
                width,
                height,
                width * height,
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Matrix view scaled to [0,1], for PSNR against reconstructions.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.height, self.width, |i, j| {
            self.get(j, i) as f64 / 255.0
        })
    }
}

/// Each pixel independently replaced by 0 or 255 (equal odds) with the
/// given probability.
pub fn salt_pepper(img: &GrayImage, rate: f64, seed: u64) -> Result<GrayImage> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Argument("noise rate must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = img
        .pixels
        .iter()
        .map(|&p| {
            if rng.gen::<f64>() < rate {
                if rng.gen::<bool>() {
                    255
                } else {
                    0
                }
            } else {
                p
            }
        })
        .collect();
    GrayImage::new(img.width, img.height, pixels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchLayout {
    pub patch: usize,
    /// Patch grid dimensions on the cropped region.
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Pixels dropped at the right/bottom edges.
    pub crop_right: usize,
    pub crop_bottom: usize,
}

impl PatchLayout {
    pub fn cropped_width(&self) -> usize {
        self.grid_cols * self.patch
    }

    pub fn cropped_height(&self) -> usize {
        self.grid_rows * self.patch
    }
}

/// Non-overlapping patches, vectorized column-major into the columns of a
/// (patch^2) x (num_patches) matrix with values scaled to [0,1]. Column
/// order is row-major over the patch grid.
pub fn patchify(img: &GrayImage, patch: usize) -> Result<(Matrix, PatchLayout)> {
    if patch < 1 || patch > img.width || patch > img.height {
        return Err(Error::Argument(format!(
            "patch size {patch} does not fit a {}x{} image",
            img.width, img.height
        )));
    }
    let grid_cols = img.width / patch;
    let grid_rows = img.height / patch;
    let layout = PatchLayout {
        patch,
        grid_rows,
        grid_cols,
        crop_right: img.width - grid_cols * patch,
        crop_bottom: img.height - grid_rows * patch,
    };
    let mut out = Matrix::zeros(patch * patch, grid_rows * grid_cols);
    for pr in 0..grid_rows {
        for pc in 0..grid_cols {
            let col = pr * grid_cols + pc;
            for px in 0..patch {
                for py in 0..patch {
                    // column-major within the patch
                    let row = px * patch + py;
                    let v = img.get(pc * patch + px, pr * patch + py) as f64 / 255.0;
                    out.set(row, col, v);
                }
            }
        }
    }
    Ok((out, layout))
}

/// Inverse of patchify on the crop region; values rescaled to [0,255],
/// rounded half-up and clamped.
pub fn unpatchify(patches: &Matrix, layout: &PatchLayout) -> Result<GrayImage> {
    let patch = layout.patch;
    if patches.rows() != patch * patch || patches.cols() != layout.grid_rows * layout.grid_cols {
        return Err(Error::Dim(format!(
            "patch matrix {}x{} does not match layout",
            patches.rows(),
            patches.cols()
        )));
    }
    let width = layout.cropped_width();
    let height = layout.cropped_height();
    let mut pixels = vec![0u8; width * height];
    for pr in 0..layout.grid_rows {
        for pc in 0..layout.grid_cols {
            let col = pr * layout.grid_cols + pc;
            for px in 0..patch {
                for py in 0..patch {
                    let row = px * patch + py;
                    let v = (patches.get(row, col) * 255.0).round().clamp(0.0, 255.0);
                    let x = pc * patch + px;
                    let y = pr * patch + py;
                    pixels[y * width + x] = v as u8;
                }
            }
        }
    }
    GrayImage::new(width, height, pixels)
}

// --- matrix text format: "rows cols" header, then one line per row ---

pub fn write_matrix(m: &Matrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{} {}", m.rows(), m.cols()).unwrap();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{:.17e}", m.get(i, j))).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty matrix file".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected 'rows cols' header, got '{header}'"),
        });
    }
    let rows: usize = dims[0].parse().map_err(|e| Error::Parse {
        line: 1,
        msg: format!("rows: {e}"),
    })?;
    let cols: usize = dims[1].parse().map_err(|e| Error::Parse {
        line: 1,
        msg: format!("cols: {e}"),
    })?;
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let (idx, line) = lines.next().ok_or(Error::Parse {
            line: r + 2,
            msg: "unexpected end of file".into(),
        })?;
        let mut count = 0;
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("'{tok}': {e}"),
            })?;
            data.push(v);
            count += 1;
        }
        if count != cols {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected {cols} entries, found {count}"),
            });
        }
    }
    Matrix::from_vec(rows, cols, data)
}

// --- PGM (P2 ascii / P5 binary), maxval 255; P5 on write ---

pub fn write_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path)?;
    let mut pos = 0usize;
    let mut next_token = |bytes: &[u8]| -> Result<String> {
        // skip whitespace and '#' comments
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = next_token(&bytes)?;
    if magic != "P2" && magic != "P5" {
        return Err(Error::Format(format!("not a PGM file (magic '{magic}')")));
    }
    let width: usize = next_token(&bytes)?
        .parse()
        .map_err(|_| Error::Format("bad PGM width".into()))?;
    let height: usize = next_token(&bytes)?
        .parse()
        .map_err(|_| Error::Format("bad PGM height".into()))?;
    let maxval: usize = next_token(&bytes)?
        .parse()
        .map_err(|_| Error::Format("bad PGM maxval".into()))?;
    if maxval != 255 {
        return Err(Error::Format(format!("unsupported PGM maxval {maxval}")));
    }
    let count = width * height;
    let pixels = if magic == "P5" {
        // exactly one whitespace byte separates maxval from the raster
        pos += 1;
        if bytes.len() < pos + count {
            return Err(Error::Format("truncated PGM pixel data".into()));
        }
        bytes[pos..pos + count].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(count);
        for _ in 0..count {
            let v: usize = next_token(&bytes)?
                .parse()
                .map_err(|_| Error::Format("bad PGM pixel value".into()))?;
            if v > 255 {
                return Err(Error::Format(format!("pixel value {v} out of range")));
            }
            pixels.push(v as u8);
        }
        pixels
    };
    GrayImage::new(width, height, pixels)
}

// --- dataset directory: A.mat, X.mat, Z.mat, E.mat, meta ---

pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_matrix(&ds.a, &dir.join("A.mat"))?;
    write_matrix(&ds.x, &dir.join("X.mat"))?;
    if let Some(z) = &ds.z_true {
        write_matrix(z, &dir.join("Z.mat"))?;
    }
    if let Some(e) = &ds.e_true {
        write_matrix(e, &dir.join("E.mat"))?;
    }
    let meta = format!(
        "m={}\nd={}\nn={}\ndensity={}\nseed={}\n",
        ds.a.rows(),
        ds.a.cols(),
        ds.x.cols(),
        ds.density,
        ds.seed
    );
    std::fs::write(dir.join("meta"), meta)?;
    Ok(())
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let a = read_matrix(&dir.join("A.mat"))?;
    let x = read_matrix(&dir.join("X.mat"))?;
    let z_true = dir.join("Z.mat").exists().then(|| read_matrix(&dir.join("Z.mat"))).transpose()?;
    let e_true = dir.join("E.mat").exists().then(|| read_matrix(&dir.join("E.mat"))).transpose()?;
    if z_true.is_some() != e_true.is_some() {
        return Err(Error::Format(
            "dataset has ground truth for only one of Z and E".into(),
        ));
    }
    let meta_text = std::fs::read_to_string(dir.join("meta"))?;
    let meta: HashMap<&str, &str> = meta_text
        .lines()
        .filter_map(|l| l.split_once('='))
        .collect();
    let density = meta
        .get("density")
        .and_then(|v| v.parse().ok())
        .unwrap_or(0.0);
    let seed = meta.get("seed").and_then(|v| v.parse().ok()).unwrap_or(0);
    Ok(Dataset {
        a,
        x,
        z_true,
        e_true,
        density,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dictionary_columns_are_unit() {
        let a = gen_dictionary(30, 12, 5).unwrap();
        for j in 0..12 {
            assert!((a.column_norm(j) - 1.0).abs() < 1e-12);
        }
        let a = gen_dictionary(7, 1, 5).unwrap();
        assert!((a.column_norm(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dictionary_prenormalization_variance() {
        // re-derive the raw entries and check their spread
        let m = 200;
        let d = 64;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let normal = Normal::new(0.0, (1.0 / d as f64).sqrt()).unwrap();
        let raw: Vec<f64> = (0..m * d).map(|_| normal.sample(&mut rng)).collect();
        let var = raw.iter().map(|v| v * v).sum::<f64>() / raw.len() as f64;
        let expect = 1.0 / d as f64;
        assert!((var - expect).abs() < 0.2 * expect, "var {var} vs {expect}");
    }

    #[test]
    fn sparse_density_statistics() {
        let density = 0.1;
        let z = gen_sparse(100, 100, density, 7).unwrap();
        let nnz = z.data().iter().filter(|v| **v != 0.0).count() as f64;
        let frac = nnz / 10_000.0;
        let sigma = (density * (1.0 - density) / 10_000.0f64).sqrt();
        assert!((frac - density).abs() <= 3.0 * sigma, "fraction {frac}");
        // density = 1 is fully dense
        let z = gen_sparse(10, 10, 1.0, 7).unwrap();
        assert!(z.data().iter().all(|v| *v != 0.0));
        // vanishing density gives the zero matrix (seeded)
        let z = gen_sparse(10, 10, 1e-9, 7).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        assert!(gen_sparse(3, 3, 0.0, 1).is_err());
    }

    #[test]
    fn dataset_construction_identity() {
        let ds = gen_dataset(20, 10, 6, 0.2, 11).unwrap();
        let recon = ds
            .a
            .matmul(ds.z_true.as_ref().unwrap())
            .unwrap()
            .add(ds.e_true.as_ref().unwrap())
            .unwrap();
        assert_eq!(recon.data(), ds.x.data());
        // same seed, same dataset
        let ds2 = gen_dataset(20, 10, 6, 0.2, 11).unwrap();
        assert_eq!(ds.x.data(), ds2.x.data());
        // zero estimate sits at 10 log10(2) dB
        let v = crate::diagnostics::nmse(
            &Matrix::zeros(10, 6),
            &Matrix::zeros(20, 6),
            ds.z_true.as_ref().unwrap(),
            ds.e_true.as_ref().unwrap(),
        )
        .unwrap();
        assert!((v - 10.0 * 2.0f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn salt_pepper_rates() {
        let img = GrayImage::new(40, 40, vec![128; 1600]).unwrap();
        let clean = salt_pepper(&img, 0.0, 1).unwrap();
        assert_eq!(clean, img);
        let full = salt_pepper(&img, 1.0, 1).unwrap();
        assert!(full.pixels.iter().all(|p| *p == 0 || *p == 255));
        let rate = 0.1;
        let noisy = salt_pepper(&img, rate, 2).unwrap();
        let frac = noisy.pixels.iter().filter(|p| **p != 128).count() as f64 / 1600.0;
        let sigma = (rate * (1.0 - rate) / 1600.0f64).sqrt();
        assert!((frac - rate).abs() <= 3.0 * sigma, "corrupted fraction {frac}");
    }

    #[test]
    fn patchify_single_patch() {
        let img = GrayImage::new(16, 16, (0..256).map(|v| v as u8).collect()).unwrap();
        let (p, layout) = patchify(&img, 16).unwrap();
        assert_eq!(p.rows(), 256);
        assert_eq!(p.cols(), 1);
        assert_eq!(layout.crop_right, 0);
        let back = unpatchify(&p, &layout).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn patchify_grid_layout_hand_indexed() {
        // 32x48 image, patch 16: 3x2 patch grid, 6 columns row-major
        let width = 32;
        let height = 48;
        // encode the source patch id in every pixel of that patch
        let mut pixels = vec![0u8; width * height];
        for y in 0..height {
            for x in 0..width {
                let pr = y / 16;
                let pc = x / 16;
                pixels[y * width + x] = (pr * 2 + pc) as u8 * 10;
            }
        }
        let img = GrayImage::new(width, height, pixels).unwrap();
        let (p, layout) = patchify(&img, 16).unwrap();
        assert_eq!((p.rows(), p.cols()), (256, 6));
        assert_eq!((layout.grid_rows, layout.grid_cols), (3, 2));
        for col in 0..6 {
            let expect = col as f64 * 10.0 / 255.0;
            for row in 0..256 {
                assert!((p.get(row, col) - expect).abs() < 1e-12);
            }
        }
        // column-major vectorization within a patch: pixel (x=1, y=0) of a
        // patch lands at row 1*16+0
        let mut pixels = vec![0u8; 256];
        pixels[0 * 16 + 1] = 200; // (x=1, y=0)
        let img = GrayImage::new(16, 16, pixels).unwrap();
        let (p, _) = patchify(&img, 16).unwrap();
        assert!((p.get(16, 0) - 200.0 / 255.0).abs() < 1e-12);
    }

    #[test]
    fn patchify_round_trip_with_crop() {
        let width = 37;
        let height = 22;
        let pixels: Vec<u8> = (0..width * height).map(|v| (v * 7 % 256) as u8).collect();
        let img = GrayImage::new(width, height, pixels).unwrap();
        let (p, layout) = patchify(&img, 8).unwrap();
        assert_eq!(layout.crop_right, 37 - 32);
        assert_eq!(layout.crop_bottom, 22 - 16);
        let back = unpatchify(&p, &layout).unwrap();
        for y in 0..layout.cropped_height() {
            for x in 0..layout.cropped_width() {
                assert_eq!(back.get(x, y), img.get(x, y));
            }
        }
        assert!(patchify(&img, 64).is_err());
    }

    #[test]
    fn matrix_io_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mat");
        let m = Matrix::from_fn(5, 3, |i, j| ((i * 3 + j) as f64 * 0.123).sin() * 1e3);
        write_matrix(&m, &path).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(m.data(), back.data());

        let one = Matrix::from_vec(1, 1, vec![42.0]).unwrap();
        write_matrix(&one, &path).unwrap();
        assert_eq!(read_matrix(&path).unwrap().get(0, 0), 42.0);

        std::fs::write(&path, "").unwrap();
        assert!(read_matrix(&path).is_err());
        std::fs::write(&path, "2 2\n1.0 2.0\n3.0\n").unwrap();
        match read_matrix(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn pgm_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        let img = GrayImage::new(9, 4, (0..36).map(|v| (v * 7) as u8).collect()).unwrap();
        write_pgm(&img, &path).unwrap();
        assert_eq!(read_pgm(&path).unwrap(), img);

        // ascii variant with a comment
        std::fs::write(&path, "P2\n# one white pixel\n1 1\n255\n255\n").unwrap();
        let one = read_pgm(&path).unwrap();
        assert_eq!(one.pixels, vec![255]);

        std::fs::write(&path, "P6\n1 1\n255\n").unwrap();
        assert!(read_pgm(&path).is_err());
        std::fs::write(&path, "P5\n4 4\n255\nab").unwrap();
        assert!(read_pgm(&path).is_err());
        std::fs::write(&path, "P5\n1 1\n65535\n").unwrap();
        assert!(read_pgm(&path).is_err());
    }

    #[test]
    fn dataset_dir_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = gen_dataset(8, 4, 5, 0.3, 77).unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        let back = read_dataset(dir.path()).unwrap();
        assert_eq!(back.a.data(), ds.a.data());
        assert_eq!(back.x.data(), ds.x.data());
        assert!(back.has_ground_truth());
        assert_eq!(back.seed, 77);
        assert_eq!(back.density, 0.3);
    }
}
