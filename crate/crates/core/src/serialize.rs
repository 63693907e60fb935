//! Serde helpers rendering complex scalars as `[re, im]` pairs, the wire
//! format used by every JSON emitter in the workspace.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::ser::{SerializeSeq, Serializer};

pub fn complex<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(2))?;
    seq.serialize_element(&z.re)?;
    seq.serialize_element(&z.im)?;
    seq.end()
}

pub fn complex_seq<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Row-major flattening of a complex matrix into `[re, im]` pairs.
pub fn complex_matrix<S: Serializer>(m: &Array2<C64>, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(m.len()))?;
    for z in m.iter() {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}
