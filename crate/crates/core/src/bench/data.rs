//! Bundled synthetic datasets and their portable binary grid format.
//!
//! A grid file is the ASCII line `AXGRID1 <rows> <cols>\n` followed by
//! `rows * cols` little-endian `u16` values in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const IMAGE_DATASET: &str = "images64";
pub const SIGNAL_DATASET: &str = "pulse4096";
pub const IMAGE_SIDE: usize = 64;
pub const SIGNAL_LEN: usize = 4096;

/// Row-major grid of unsigned samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u16>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, data: Vec<u16>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} values for a {rows}x{cols} grid", data.len())));
        }
        Ok(Grid { rows, cols, data })
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> u16 {
        self.data[r * self.cols + c]
    }

    /// Sample at `(r, c)` with out-of-range coordinates clamped to the border.
    #[inline]
    pub fn clamped(&self, r: isize, c: isize) -> u16 {
        let r = r.clamp(0, self.rows as isize - 1) as usize;
        let c = c.clamp(0, self.cols as isize - 1) as usize;
        self.at(r, c)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("AXGRID1 {} {}\n", self.rows, self.cols).into_bytes();
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Parse { line: 1, msg: m.to_string() };
        let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| bad("missing header"))?;
        let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not text"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 || fields[0] != "AXGRID1" {
            return Err(bad("expected `AXGRID1 <rows> <cols>`"));
        }
        let rows: usize = fields[1].parse().map_err(|_| bad("bad row count"))?;
        let cols: usize = fields[2].parse().map_err(|_| bad("bad column count"))?;
        let body = &bytes[nl + 1..];
        if body.len() != 2 * rows * cols {
            return Err(bad("payload length disagrees with header"));
        }
        let data = body.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect();
        Grid::new(rows, cols, data)
    }
}

/// Smooth gradient with a bright rectangle and a dark disc plus uniform noise.
pub fn synthetic_image(seed: u64, variant: usize) -> Grid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = IMAGE_SIDE;
    let mut data = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let (x, y) = (c as f64 / n as f64, r as f64 / n as f64);
            let mut v = match variant % 2 {
                0 => 40.0 + 150.0 * x + 40.0 * y,
                _ => 200.0 - 120.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt() * 2.0,
            };
            if (16..40).contains(&r) && (20..50).contains(&c) {
                v += 45.0;
            }
            if ((r as f64 - 46.0).powi(2) + (c as f64 - 14.0).powi(2)).sqrt() < 9.0 {
                v -= 60.0;
            }
            v += rng.gen_range(-12.0..12.0);
            data.push(v.round().clamp(0.0, 255.0) as u16);
        }
    }
    Grid::new(n, n, data).expect("square image")
}

/// Pulse train: noisy baseline with slow wander, sharp spikes at random
/// intervals, each followed by a broad secondary bump.
pub fn synthetic_signal(seed: u64) -> Vec<u16> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s: Vec<f64> = (0..SIGNAL_LEN)
        .map(|n| 30.0 + 8.0 * (n as f64 * 2.0 * std::f64::consts::PI / 1500.0).sin())
        .collect();
    let mut at = rng.gen_range(60..160);
    while at + 80 < SIGNAL_LEN {
        let amp: f64 = rng.gen_range(120.0..170.0);
        for d in -6i64..=6 {
            let k = (at as i64 + d) as usize;
            s[k] += amp * (1.0 - d.abs() as f64 / 7.0);
        }
        let bump: f64 = rng.gen_range(20.0..35.0);
        for d in 0..40usize {
            let phase = d as f64 / 40.0 * std::f64::consts::PI;
            s[at + 30 + d] += bump * phase.sin();
        }
        at += rng.gen_range(180..300);
    }
    s.iter()
        .map(|v| (v + rng.gen_range(-4.0..4.0)).round().clamp(0.0, 255.0) as u16)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSeeds {
    pub images: u64,
    pub signal: u64,
}

impl Default for DatasetSeeds {
    fn default() -> Self {
        DatasetSeeds {
            images: 0x1a6e_0001,
            signal: 0x5167_0001,
        }
    }
}

/// Registered evaluation data: two test images and one pulse signal.
#[derive(Debug, Clone)]
pub struct Datasets {
    pub seeds: DatasetSeeds,
    pub images: Vec<Grid>,
    pub signal: Vec<u16>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatasetManifest {
    seeds: DatasetSeeds,
    files: Vec<(String, String)>,
}

impl Datasets {
    pub fn generate(seeds: DatasetSeeds) -> Self {
        Datasets {
            seeds,
            images: (0..2).map(|i| synthetic_image(seeds.images.wrapping_add(i as u64), i)).collect(),
            signal: synthetic_signal(seeds.signal),
        }
    }

    pub fn images(&self, id: &str) -> Result<&[Grid]> {
        if id == IMAGE_DATASET && !self.images.is_empty() {
            Ok(&self.images)
        } else {
            Err(Error::DatasetMissing(id.to_string()))
        }
    }

    pub fn signal(&self, id: &str) -> Result<&[u16]> {
        if id == SIGNAL_DATASET && !self.signal.is_empty() {
            Ok(&self.signal)
        } else {
            Err(Error::DatasetMissing(id.to_string()))
        }
    }

    /// Writes every dataset as a grid file plus `datasets.json` with the seeds.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        for (i, img) in self.images.iter().enumerate() {
            let name = format!("{IMAGE_DATASET}_{i}.grid");
            fs::write(dir.join(&name), img.to_bytes())?;
            files.push((IMAGE_DATASET.to_string(), name));
        }
        let sig = Grid::new(1, self.signal.len(), self.signal.clone())?;
        let name = format!("{SIGNAL_DATASET}.grid");
        fs::write(dir.join(&name), sig.to_bytes())?;
        files.push((SIGNAL_DATASET.to_string(), name));
        let manifest = DatasetManifest { seeds: self.seeds, files };
        let mut f = fs::File::create(dir.join("datasets.json"))?;
        writeln!(f, "{}", serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: DatasetManifest = serde_json::from_str(&fs::read_to_string(dir.join("datasets.json"))?)?;
        let mut images = Vec::new();
        let mut signal = Vec::new();
        for (id, file) in &manifest.files {
            let g = Grid::from_bytes(&fs::read(dir.join(file))?)?;
            match id.as_str() {
                IMAGE_DATASET => images.push(g),
                SIGNAL_DATASET => signal = g.data,
                other => return Err(Error::DatasetMissing(other.to_string())),
            }
        }
        Ok(Datasets {
            seeds: manifest.seeds,
            images,
            signal,
        })
    }
}
