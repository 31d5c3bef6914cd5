use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{c, ComplexMatrix, HermitianOperator, SubsystemShape};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Wire form of an operator: `{"dims": [...], "re": [[...]], "im": [[...]]}`,
/// row-major.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Same layout for a general (non-Hermitian) square matrix such as a
/// correction unitary; `dims` is `[n]`.
pub type ComplexMatrixJson = MatrixJson;

impl MatrixJson {
    pub fn from_matrix<T: Real>(m: &ComplexMatrix<T>, dims: Vec<usize>) -> Self {
        let re = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re.as_f64()).collect()).collect();
        let im = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].im.as_f64()).collect()).collect();
        Self { dims, re, im }
    }

    pub fn to_matrix<T: Real>(&self) -> Result<ComplexMatrix<T>> {
        let n = self.re.len();
        if self.im.len() != n {
            return Err(Error::Schema("\"re\" and \"im\" have different row counts".into()));
        }
        for (rr, ri) in self.re.iter().zip(&self.im) {
            if rr.len() != n || ri.len() != n {
                return Err(Error::Schema(format!("matrix rows must all have length {n}")));
            }
        }
        let total: usize = self.dims.iter().product();
        if total != n {
            return Err(Error::Schema(format!("dims {:?} do not multiply to {n}", self.dims)));
        }
        Ok(ComplexMatrix::from_fn(n, n, |i, j| c(T::lit(self.re[i][j]), T::lit(self.im[i][j]))))
    }
}

impl<T: Real> HermitianOperator<T> {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(self.matrix(), self.shape().dims().to_vec())
    }

    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        let shape = SubsystemShape::new(j.dims.clone()).map_err(|e| Error::Schema(e.to_string()))?;
        Self::new(j.to_matrix()?, shape)
    }
}

impl<T: Real> Serialize for HermitianOperator<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for HermitianOperator<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        Self::from_json(&j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{phi_plus, ket_from_complex};

    #[test]
    fn roundtrip_is_exact() {
        let v = ket_from_complex::<f64>(&[(1.0, 0.0), (0.3, -0.7), (0.1, 0.2), (-0.4, 0.0)]);
        let h = HermitianOperator::projector(&v, SubsystemShape::bipartite(2, 2)).unwrap();
        let text = serde_json::to_string(&h).unwrap();
        let back: HermitianOperator<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn wire_layout() {
        let h = HermitianOperator::projector(&phi_plus::<f64>(2), SubsystemShape::bipartite(2, 2)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&h).unwrap();
        assert_eq!(v["dims"], serde_json::json!([2, 2]));
        assert!((v["re"][0][3].as_f64().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(v["im"][1][1], serde_json::json!(0.0));
    }

    #[test]
    fn schema_errors() {
        let bad = r#"{"dims":[3],"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<HermitianOperator<f64>>(bad).is_err());
        let ragged = r#"{"dims":[2],"re":[[1,0],[0]],"im":[[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<HermitianOperator<f64>>(ragged).is_err());
        let asym = r#"{"dims":[2],"re":[[1,1],[0,1]],"im":[[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<HermitianOperator<f64>>(asym).is_err());
    }
}
