//! `{layout: [{label, dim}], re: [[..]], im: [[..]]}` state files.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{QError, QResult};
use crate::hermitian::CMatrix;
use crate::layout::{Part, SystemLayout};
use crate::real::Real;
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub layout: Vec<Part>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl<T: Real> From<&DensityMatrix<T>> for StateJson {
    fn from(s: &DensityMatrix<T>) -> Self {
        let n = s.dim();
        let m = s.matrix();
        let row = |i: usize, f: &dyn Fn(Complex<T>) -> T| (0..n).map(|j| f(m[(i, j)]).as_f64()).collect();
        StateJson {
            layout: s.layout().parts().to_vec(),
            re: (0..n).map(|i| row(i, &|z| z.re)).collect(),
            im: (0..n).map(|i| row(i, &|z| z.im)).collect(),
        }
    }
}

impl StateJson {
    pub fn to_state<T: Real>(&self) -> QResult<DensityMatrix<T>> {
        let layout = SystemLayout::try_from(self.layout.clone())?;
        let n = layout.total_dim();
        if self.re.len() != n || self.im.len() != n || self.re.iter().chain(&self.im).any(|r| r.len() != n) {
            return Err(QError::Json(format!("expected {n}x{n} re/im arrays")));
        }
        let m = CMatrix::from_fn(n, n, |i, j| Complex::new(T::c(self.re[i][j]), T::c(self.im[i][j])));
        DensityMatrix::new(m, layout)
    }
}

pub fn state_to_json<T: Real>(s: &DensityMatrix<T>) -> String {
    serde_json::to_string(&StateJson::from(s)).expect("serialisable")
}

pub fn state_from_json<T: Real>(text: &str) -> QResult<DensityMatrix<T>> {
    let j: StateJson = serde_json::from_str(text).map_err(|e| QError::Json(e.to_string()))?;
    j.to_state()
}
