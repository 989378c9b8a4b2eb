use crate::error::{Error, Result};
use crate::hermitian::{eig_hermitian, hermiticity_defect, outer, trace, CMatrix, CVector, EigenSystem, C64};

/// Tolerance for the trace, Hermiticity and positivity checks on a state.
pub const STATE_TOL: f64 = 1e-10;

/// A `d×d` Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "shape {}x{} is not a non-empty square",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = hermiticity_defect(&m);
        if defect > STATE_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = trace(&m);
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let es = eig_hermitian(&m)?;
        let min = es.values().last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("min eigenvalue {min:e}")));
        }
        Ok(DensityMatrix(m))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix(CMatrix::identity(d, d).map(|z| z / d as f64))
    }

    pub fn diagonal(p: &[f64]) -> Result<Self> {
        let v = CVector::from_iterator(p.len(), p.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(CMatrix::from_diagonal(&v))
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("state vector norm {n}")));
        }
        Ok(DensityMatrix(outer(psi, psi)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn eigen(&self) -> Result<EigenSystem> {
        eig_hermitian(&self.0)
    }
}

impl AsRef<CMatrix> for DensityMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_trace_and_negative_spectrum() {
        let m = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidState(_))));
        assert!(DensityMatrix::diagonal(&[1.2, -0.2]).is_err());
        assert!(DensityMatrix::diagonal(&[0.7, 0.3]).is_ok());
    }

    #[test]
    fn pure_state_is_projector() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CVector::from_vec(vec![C64::new(s, 0.0), C64::new(0.0, s)]);
        let rho = DensityMatrix::pure(&psi).unwrap();
        let sq = rho.matrix() * rho.matrix();
        assert!((sq - rho.matrix()).iter().all(|z| z.norm() < 1e-15));
    }
}
