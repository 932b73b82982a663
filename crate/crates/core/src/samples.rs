//! Row-major `n x d` sample matrices and their on-disk layouts.

use std::io::{self, Read, Write};

use crate::error::{LabError, Result};

/// Magic bytes opening the binary sample layout.
pub const BINARY_MAGIC: &[u8; 4] = b"DDL1";

#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LabError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[j]).collect()
    }

    /// Samples projected onto a unit direction.
    pub fn project(&self, direction: &[f64]) -> Vec<f64> {
        self.iter_rows()
            .map(|r| r.iter().zip(direction).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.cols];
        for r in self.iter_rows() {
            for (acc, v) in m.iter_mut().zip(r) {
                *acc += v;
            }
        }
        let n = self.rows as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Unbiased sample covariance, row-major `d x d`.
    pub fn covariance(&self) -> Vec<f64> {
        let d = self.cols;
        let mean = self.mean();
        let mut c = vec![0.0; d * d];
        for r in self.iter_rows() {
            for i in 0..d {
                let di = r[i] - mean[i];
                for j in 0..=i {
                    c[i * d + j] += di * (r[j] - mean[j]);
                }
            }
        }
        let denom = (self.rows as f64 - 1.0).max(1.0);
        for i in 0..d {
            for j in 0..=i {
                let v = c[i * d + j] / denom;
                c[i * d + j] = v;
                c[j * d + i] = v;
            }
        }
        c
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// CSV layout: header `x1,...,xd`, one row per sample.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header: Vec<String> = (1..=self.cols).map(|j| format!("x{j}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for r in self.iter_rows() {
            let line: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Little-endian binary layout: `DDL1`, `u32 n`, `u32 d`, then `n * d`
    /// `f64` values in row-major order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        let rows = u32::try_from(self.rows)
            .map_err(|_| LabError::InvalidArgument("row count exceeds u32".into()))?;
        let cols = u32::try_from(self.cols)
            .map_err(|_| LabError::InvalidArgument("column count exceeds u32".into()))?;
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&rows.to_le_bytes())?;
        out.write_all(&cols.to_le_bytes())?;
        for v in &self.data {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(LabError::InvalidArgument(format!(
                "bad magic bytes {magic:?}, expected DDL1"
            )));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let rows = u32::from_le_bytes(word) as usize;
        input.read_exact(&mut word)?;
        let cols = u32::from_le_bytes(word) as usize;
        let mut data = Vec::with_capacity(rows * cols);
        let mut buf = [0u8; 8];
        for _ in 0..rows * cols {
            input.read_exact(&mut buf)?;
            data.push(f64::from_le_bytes(buf));
        }
        Self::from_vec(rows, cols, data)
    }
}
