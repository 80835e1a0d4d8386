//! JSON wire representation: complex scalars as `[re, im]`, matrices as row-major nested
//! arrays of complex scalars, vectors as flat arrays of complex scalars.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{ComplexMatrix, ComplexVector};

pub type WireComplex = [f64; 2];
pub type WireMatrix = Vec<Vec<WireComplex>>;

pub fn complex_to_wire(z: Complex64) -> WireComplex {
    [z.re, z.im]
}

pub fn complex_from_wire(w: WireComplex) -> Complex64 {
    Complex64::new(w[0], w[1])
}

pub fn matrix_to_wire(m: &ComplexMatrix) -> WireMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| complex_to_wire(m[(i, j)])).collect())
        .collect()
}

pub fn matrix_from_wire(rows: &WireMatrix) -> Result<ComplexMatrix, String> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err("matrix has no rows".into());
    }
    let ncols = rows[0].len();
    if ncols == 0 {
        return Err("matrix has no columns".into());
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(format!("row {bad} has {} entries, expected {ncols}", rows[bad].len()));
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |i, j| complex_from_wire(rows[i][j])))
}

pub fn vector_to_wire(v: &ComplexVector) -> Vec<WireComplex> {
    v.iter().map(|z| complex_to_wire(*z)).collect()
}

pub fn vector_from_wire(v: &[WireComplex]) -> ComplexVector {
    ComplexVector::from_iterator(v.len(), v.iter().map(|w| complex_from_wire(*w)))
}

/// `#[serde(with = "wire::complex")]`
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        complex_to_wire(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        WireComplex::deserialize(d).map(complex_from_wire)
    }
}

/// `#[serde(with = "wire::complex_vec")]` for `Vec<Complex64>`.
pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| complex_to_wire(*z)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<WireComplex>::deserialize(d)?.into_iter().map(complex_from_wire).collect())
    }
}

/// `#[serde(with = "wire::matrix")]`
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_wire(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        let rows = WireMatrix::deserialize(d)?;
        matrix_from_wire(&rows).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "wire::matrix_list")]`
pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[ComplexMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_wire).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ComplexMatrix>, D::Error> {
        Vec::<WireMatrix>::deserialize(d)?
            .iter()
            .map(|m| matrix_from_wire(m).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// `#[serde(with = "wire::vector")]`
pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &ComplexVector, s: S) -> Result<S::Ok, S::Error> {
        vector_to_wire(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexVector, D::Error> {
        Ok(vector_from_wire(&Vec::<WireComplex>::deserialize(d)?))
    }
}
