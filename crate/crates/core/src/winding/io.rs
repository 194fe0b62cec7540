//! Little-endian binary container for an [`AssembledFoilSystem`], so a
//! netlist can reference a pre-assembled field element by file name.
//!
//! Layout: magic `FOILSYS1`, `u64` turn count, then `K` and `M` as CSR
//! (`rows cols nnz`, row pointers, column indices, values), then `x`, `X`
//! (column-major), `G`, `G_e` and `c` as length-prefixed `f64` arrays with
//! their shapes.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::AssembledFoilSystem;
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"FOILSYS1";

fn put_u64(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u64).to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, v: &[f64]) {
    put_u64(out, v.len());
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn put_csr(out: &mut Vec<u8>, a: &CsrMatrix) {
    put_u64(out, a.n_rows());
    put_u64(out, a.n_cols());
    put_u64(out, a.nnz());
    a.row_ptr().iter().for_each(|&p| put_u64(out, p));
    a.col_idx().iter().for_each(|&c| put_u64(out, c));
    put_f64s(out, a.values());
}

fn put_dense(out: &mut Vec<u8>, a: &DenseMatrix) {
    put_u64(out, a.nrows());
    put_u64(out, a.ncols());
    put_f64s(out, a.as_slice());
}

pub fn write_system(sys: &AssembledFoilSystem) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    put_u64(&mut out, sys.turns);
    put_csr(&mut out, &sys.stiffness);
    put_csr(&mut out, &sys.mass);
    put_f64s(&mut out, &sys.distribution);
    put_dense(&mut out, &sys.coupling);
    put_dense(&mut out, &sys.conductance);
    put_dense(&mut out, &sys.conductance_consistent);
    put_f64s(&mut out, sys.c.as_slice());
    out
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| Error::Validation("truncated foil system file".into()))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<usize> {
        let b = self.take(8)?;
        let v = u64::from_le_bytes(b.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::Validation("size field overflows".into()))
    }

    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.u64()?;
        let bytes = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::Validation("size field overflows".into()))?,
        )?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn csr(&mut self) -> Result<CsrMatrix> {
        let (rows, cols, nnz) = (self.u64()?, self.u64()?, self.u64()?);
        let row_ptr = (0..=rows).map(|_| self.u64()).collect::<Result<Vec<_>>>()?;
        let col_idx = (0..nnz).map(|_| self.u64()).collect::<Result<Vec<_>>>()?;
        let values = self.f64s()?;
        if values.len() != nnz || row_ptr.last() != Some(&nnz) {
            return Err(Error::Validation("inconsistent sparse block".into()));
        }
        let mut trips = Vec::with_capacity(nnz);
        for i in 0..rows {
            let (a, b) = (row_ptr[i], row_ptr[i + 1]);
            if a > b || b > nnz {
                return Err(Error::Validation("inconsistent sparse block".into()));
            }
            for k in a..b {
                if col_idx[k] >= cols {
                    return Err(Error::Validation("column index out of range".into()));
                }
                trips.push((i, col_idx[k], values[k]));
            }
        }
        let a = CsrMatrix::from_triplets(rows, cols, &trips);
        if a.nnz() != nnz {
            return Err(Error::Validation("sparse block is not canonical".into()));
        }
        Ok(a)
    }

    fn dense(&mut self) -> Result<DenseMatrix> {
        let (r, c) = (self.u64()?, self.u64()?);
        let v = self.f64s()?;
        if v.len() != r * c {
            return Err(Error::Validation("dense block size mismatch".into()));
        }
        Ok(DMatrix::from_vec(r, c, v))
    }
}

pub fn read_system(data: &[u8]) -> Result<AssembledFoilSystem> {
    let mut rd = Reader { data, pos: 0 };
    if rd.take(8)? != MAGIC {
        return Err(Error::Validation("not a foil system file".into()));
    }
    let turns = rd.u64()?;
    let sys = AssembledFoilSystem {
        turns,
        stiffness: rd.csr()?,
        mass: rd.csr()?,
        distribution: rd.f64s()?,
        coupling: rd.dense()?,
        conductance: rd.dense()?,
        conductance_consistent: rd.dense()?,
        c: DVector::from_vec(rd.f64s()?),
        source_fields: None,
    };
    if rd.pos != data.len() {
        return Err(Error::Validation(
            "trailing bytes in foil system file".into(),
        ));
    }
    sys.validate()?;
    Ok(sys)
}

pub fn save_system(sys: &AssembledFoilSystem, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_system(sys))?;
    Ok(())
}

pub fn load_system(path: impl AsRef<Path>) -> Result<AssembledFoilSystem> {
    read_system(&std::fs::read(path)?)
}
