//! JSON encoding of complex matrices: an array of rows, each entry `[re, im]`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{make_hermitian, ComplexMatrix, HermitianOperator};
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// Row-major nested representation used on the wire.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn to_rows(m: &ComplexMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn from_rows(rows: &MatrixRows) -> Result<ComplexMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    for row in rows {
        if row.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: row.len(),
            });
        }
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let [re, im] = rows[r][c];
        Complex64::new(re, im)
    }))
}

/// `#[serde(with = "json::hermitian")]` adapter; validates on read.
pub mod hermitian {
    use super::*;

    pub fn serialize<S: Serializer>(h: &HermitianOperator, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_rows(h.matrix()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<HermitianOperator, D::Error> {
        let rows = MatrixRows::deserialize(d)?;
        let m = from_rows(&rows).map_err(serde::de::Error::custom)?;
        make_hermitian(&m, Tolerances::DEFAULT.hermiticity).map_err(serde::de::Error::custom)
    }
}

/// Optional variant of [`hermitian`].
pub mod hermitian_opt {
    use super::*;

    pub fn serialize<S: Serializer>(h: &Option<HermitianOperator>, s: S) -> std::result::Result<S::Ok, S::Error> {
        h.as_ref().map(|h| to_rows(h.matrix())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<HermitianOperator>, D::Error> {
        let rows = Option::<MatrixRows>::deserialize(d)?;
        rows.map(|rows| {
            let m = from_rows(&rows).map_err(serde::de::Error::custom)?;
            make_hermitian(&m, Tolerances::DEFAULT.hermiticity).map_err(serde::de::Error::custom)
        })
        .transpose()
    }
}
