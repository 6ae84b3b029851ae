use std::io::{Read, Write};
use std::path::Path;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::block::{QuantumSystem, QuantumTransferOperator};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"QPM1";

/// Raw operator file: `QPM1`, rows and cols as u64, then `h`, `Re z`,
/// `Im z` and the row-major entries as little-endian f64 pairs.
pub fn write_matrix<W: Write>(mut w: W, op: &QuantumTransferOperator) -> Result<()> {
    let m = &op.matrix;
    w.write_all(MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for v in [op.h, op.z.re, op.z.im] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(16 * m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            buf.extend_from_slice(&m[(r, c)].re.to_le_bytes());
            buf.extend_from_slice(&m[(r, c)].im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MatrixFile {
    pub h: f64,
    pub z: Complex64,
    pub matrix: Mat<Complex64>,
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<MatrixFile> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 44 || &bytes[..4] != MAGIC {
        return Err(Error::Io("not a QPM1 matrix file".into()));
    }
    let u = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (rows, cols) = (u(4) as usize, u(12) as usize);
    if bytes.len() != 44 + 16 * rows * cols {
        return Err(Error::Io(format!("{rows}x{cols} matrix file has {} bytes", bytes.len())));
    }
    let matrix = Mat::from_fn(rows, cols, |i, j| {
        let o = 44 + 16 * (i * cols + j);
        Complex64::new(f(o), f(o + 8))
    });
    Ok(MatrixFile { h: f(20), z: Complex64::new(f(28), f(36)), matrix })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSidecar {
    pub index: usize,
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    pub rank: usize,
}

/// JSON description accompanying a matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub h: f64,
    pub z: [f64; 2],
    pub dim: usize,
    pub ranks: Vec<usize>,
    pub charts: Vec<ChartSidecar>,
    /// `(target, source)` pairs.
    pub blocks: Vec<(usize, usize)>,
    pub grids: Vec<(usize, usize)>,
}

impl Sidecar {
    pub fn new(system: &QuantumSystem, op: &QuantumTransferOperator) -> Self {
        Sidecar {
            h: op.h,
            z: [op.z.re, op.z.im],
            dim: op.dim(),
            ranks: op.ranks.clone(),
            charts: system
                .projectors
                .iter()
                .map(|p| ChartSidecar { index: p.chart, center: p.center, semi_axes: p.semi_axes, rank: p.rank })
                .collect(),
            blocks: op.blocks.clone(),
            grids: system.kernels.iter().map(|k| k.grid_size()).collect(),
        }
    }
}

/// Writes `<stem>.qpm` and `<stem>.json` into `dir`; returns both paths.
pub fn save_operator(dir: &Path, stem: &str, system: &QuantumSystem, op: &QuantumTransferOperator) -> Result<[std::path::PathBuf; 2]> {
    let bin = dir.join(format!("{stem}.qpm"));
    let side = dir.join(format!("{stem}.json"));
    let mut f = std::io::BufWriter::new(std::fs::File::create(&bin)?);
    write_matrix(&mut f, op)?;
    f.flush()?;
    std::fs::write(&side, serde_json::to_string_pretty(&Sidecar::new(system, op))?)?;
    Ok([bin, side])
}
