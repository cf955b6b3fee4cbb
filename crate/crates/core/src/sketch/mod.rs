//! Seed-defined sparse embedding matrices.
//!
//! A [`Sketch`] is an implicit `m x n` matrix `Π` with exactly `s` nonzeros of
//! magnitude `1/sqrt(s)` in every column. Nothing is materialized: the
//! nonzeros of column `j` are recomputed from hash functions on demand, so the
//! whole matrix is described by its [`SketchSpec`].
//!
//! Three constructions are provided:
//!
//! * [`SketchKind::Tz`]: `s = 1`, one `±1` per column at a pairwise
//!   independent row (CountSketch).
//! * [`SketchKind::OsnapBlock`]: rows split into `s` blocks of `m/s`; column
//!   `j` gets one `±1/sqrt(s)` in each block at row `t*(m/s) + h(j, t)`.
//! * [`SketchKind::OsnapGlobal`]: `s` distinct rows per column anywhere in
//!   `[0, m)`, drawn by a partial Fisher–Yates shuffle driven by a per-column
//!   k-wise independent stream.

mod apply;
mod params;
mod turnstile;

pub use params::{recommend_params, ParamConstants, SketchParams};
pub use turnstile::SketchState;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashkit::KWiseHash;
use crate::matio::{DenseMatrix, SparseMatrixCSC};
use crate::rng::{mix, mix3};

const POSITION_TAG: u64 = 0x01;
const SIGN_TAG: u64 = 0x02;
const STREAM_TAG: u64 = 0x03;

/// Sign hashes are always at least 4-wise independent.
const MIN_SIGN_DEGREE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SketchKind {
    Tz,
    OsnapGlobal,
    OsnapBlock,
}

impl fmt::Display for SketchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SketchKind::Tz => "tz",
            SketchKind::OsnapGlobal => "osnap-global",
            SketchKind::OsnapBlock => "osnap-block",
        })
    }
}

impl FromStr for SketchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tz" | "countsketch" => Ok(SketchKind::Tz),
            "osnap-global" | "osnap_global" | "osnap" => Ok(SketchKind::OsnapGlobal),
            "osnap-block" | "osnap_block" | "block" => Ok(SketchKind::OsnapBlock),
            other => Err(Error::param(format!("unknown sketch kind '{other}'"))),
        }
    }
}

/// Everything needed to reconstruct a sketch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchSpec {
    pub kind: SketchKind,
    /// Rows of `Π` (embedding dimension).
    pub m: usize,
    /// Columns of `Π` (ambient dimension).
    pub n: usize,
    /// Nonzeros per column.
    pub s: usize,
    /// Independence degree of the position hashes. Sign hashes use
    /// `max(independence_k, 4)`.
    pub independence_k: usize,
    pub seed: u64,
}

impl SketchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::param(format!(
                "sketch dimensions must be positive, got m={} n={}",
                self.m, self.n
            )));
        }
        if self.s == 0 || self.s > self.m {
            return Err(Error::param(format!(
                "need 1 <= s <= m, got s={} m={}",
                self.s, self.m
            )));
        }
        if self.independence_k < 2 {
            return Err(Error::param("independence degree must be at least 2"));
        }
        match self.kind {
            SketchKind::Tz if self.s != 1 => Err(Error::param(format!(
                "the tz sketch has s = 1, got s={}",
                self.s
            ))),
            SketchKind::OsnapBlock if !self.m.is_multiple_of(self.s) => Err(Error::param(format!(
                "block sketch needs s to divide m, got m={} s={}",
                self.m, self.s
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sketch {
    spec: SketchSpec,
    /// Unused for `OsnapGlobal`, which draws per-column streams instead.
    position_hash: Option<KWiseHash>,
    sign_hash: KWiseHash,
    scale: f64,
}

impl Sketch {
    /// Builds the hash functions for `spec`. No matrix is materialized.
    pub fn new(spec: SketchSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n as u64;
        let s = spec.s as u64;
        let m = spec.m as u64;
        let position_seed = mix(spec.seed, POSITION_TAG);
        let sign_seed = mix(spec.seed, SIGN_TAG);
        let k = spec.independence_k;
        let slots = n
            .checked_mul(s)
            .ok_or_else(|| Error::param("n * s overflows"))?;
        let position_hash = match spec.kind {
            SketchKind::Tz => Some(KWiseHash::new(k, n, m, position_seed)?),
            SketchKind::OsnapBlock => Some(KWiseHash::new(k, slots, m / s, position_seed)?),
            SketchKind::OsnapGlobal => None,
        };
        let sign_hash = KWiseHash::new(k.max(MIN_SIGN_DEGREE), slots, 2, sign_seed)?;
        Ok(Sketch {
            spec,
            position_hash,
            sign_hash,
            scale: 1.0 / (spec.s as f64).sqrt(),
        })
    }

    pub fn spec(&self) -> &SketchSpec {
        &self.spec
    }

    pub fn rows(&self) -> usize {
        self.spec.m
    }

    pub fn cols(&self) -> usize {
        self.spec.n
    }

    /// Nonzeros `(row, value)` of column `j`, ascending by row.
    ///
    /// Panics if `j >= n`.
    pub fn column_nonzeros(&self, j: usize) -> Vec<(usize, f64)> {
        let mut buf = Vec::with_capacity(self.spec.s);
        self.column_nonzeros_into(j, &mut buf);
        buf
    }

    /// Allocation-free form of [`Sketch::column_nonzeros`]; `buf` is cleared first.
    pub fn column_nonzeros_into(&self, j: usize, buf: &mut Vec<(usize, f64)>) {
        assert!(
            j < self.spec.n,
            "column {j} outside sketch with n={}",
            self.spec.n
        );
        buf.clear();
        let s = self.spec.s;
        let base = (j * s) as u64;
        match self.spec.kind {
            SketchKind::Tz => {
                let h = self.position_hash.as_ref().unwrap();
                buf.push((
                    h.eval(j as u64) as usize,
                    self.sign_hash.eval_sign(j as u64),
                ));
            }
            SketchKind::OsnapBlock => {
                let h = self.position_hash.as_ref().unwrap();
                let block = self.spec.m / s;
                for t in 0..s {
                    let slot = base + t as u64;
                    let row = t * block + h.eval(slot) as usize;
                    buf.push((row, self.sign_hash.eval_sign(slot) * self.scale));
                }
            }
            SketchKind::OsnapGlobal => {
                self.global_rows(j, buf);
                for (t, entry) in buf.iter_mut().enumerate() {
                    entry.1 = self.sign_hash.eval_sign(base + t as u64) * self.scale;
                }
                buf.sort_unstable_by_key(|&(r, _)| r);
            }
        }
    }

    /// `s` distinct rows for column `j` by a partial Fisher–Yates shuffle of
    /// `[0, m)`; step `t` swaps position `t` with `t + (stream(t) mod (m - t))`.
    fn global_rows(&self, j: usize, buf: &mut Vec<(usize, f64)>) {
        let SketchSpec { m, s, .. } = self.spec;
        let stream = KWiseHash::new(
            self.spec.independence_k,
            s as u64,
            m as u64,
            mix3(self.spec.seed, STREAM_TAG, j as u64),
        )
        .expect("validated spec");
        // Sparse view of the permuted array: only displaced positions are stored.
        let mut displaced: Vec<(usize, usize)> = Vec::with_capacity(2 * s);
        let lookup = |d: &[(usize, usize)], i: usize| {
            d.iter().find(|&&(k, _)| k == i).map_or(i, |&(_, v)| v)
        };
        for t in 0..s {
            let pick = t + (stream.eval_field(t as u64) % (m - t) as u64) as usize;
            let at_pick = lookup(&displaced, pick);
            let at_t = lookup(&displaced, t);
            set(&mut displaced, pick, at_t);
            set(&mut displaced, t, at_pick);
            buf.push((at_pick, 0.0));
        }
    }

    /// Explicit `m x n` matrix in CSC form.
    pub fn to_csc(&self) -> SparseMatrixCSC {
        let mut col_ptr = Vec::with_capacity(self.spec.n + 1);
        let mut row_idx = Vec::with_capacity(self.spec.n * self.spec.s);
        let mut values = Vec::with_capacity(self.spec.n * self.spec.s);
        col_ptr.push(0);
        let mut buf = Vec::new();
        for j in 0..self.spec.n {
            self.column_nonzeros_into(j, &mut buf);
            for &(r, w) in &buf {
                row_idx.push(r);
                values.push(w);
            }
            col_ptr.push(row_idx.len());
        }
        SparseMatrixCSC::from_parts(self.spec.m, self.spec.n, col_ptr, row_idx, values)
            .expect("sketch columns are canonical")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.to_csc().to_dense()
    }
}

fn set(d: &mut Vec<(usize, usize)>, key: usize, value: usize) {
    match d.iter_mut().find(|(k, _)| *k == key) {
        Some(entry) => entry.1 = value,
        None => d.push((key, value)),
    }
}

/// Free-function form of [`Sketch::new`].
pub fn build_sketch(spec: SketchSpec) -> Result<Sketch> {
    Sketch::new(spec)
}
