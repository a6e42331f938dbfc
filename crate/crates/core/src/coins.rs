//! Coin operators and coin-space measurement bases.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{OperatorMatrix, SpaceShape, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "dim", rename_all = "lowercase")]
pub enum CoinKind {
    Identity(usize),
    /// `F_d` with entries `e^{+2πi·jk/d}/√d`.
    Fourier(usize),
    Hadamard,
    /// `2/d·J − I`.
    Grover(usize),
}

impl CoinKind {
    pub fn dim(&self) -> usize {
        match *self {
            CoinKind::Identity(d) | CoinKind::Fourier(d) | CoinKind::Grover(d) => d,
            CoinKind::Hadamard => 2,
        }
    }

    /// Parses the `coin_kind` names used in protocol files.
    pub fn from_name(name: &str, dim: usize) -> Result<Self> {
        match name {
            "identity" => Ok(CoinKind::Identity(dim)),
            "fourier" => Ok(CoinKind::Fourier(dim)),
            "grover" => Ok(CoinKind::Grover(dim)),
            "hadamard" if dim == 2 => Ok(CoinKind::Hadamard),
            "hadamard" => Err(Error::InvalidDimension {
                dim,
                reason: "hadamard coin is 2-dimensional",
            }),
            other => Err(Error::InvalidStep(format!("unknown coin kind {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CoinKind::Identity(_) => "identity",
            CoinKind::Fourier(_) => "fourier",
            CoinKind::Hadamard => "hadamard",
            CoinKind::Grover(_) => "grover",
        }
    }
}

impl fmt::Display for CoinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.dim())
    }
}

/// `e^{2πi·p/d}`, with `p` reduced mod `d` first so large exponents stay exact.
pub(crate) fn root_of_unity(p: usize, d: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (p % d) as f64 / d as f64)
}

pub fn make_coin(kind: CoinKind) -> Result<OperatorMatrix> {
    let d = kind.dim();
    if d == 0 {
        return Err(Error::InvalidDimension {
            dim: 0,
            reason: "coin dimension must be at least 1",
        });
    }
    let mat = match kind {
        CoinKind::Identity(_) => DMatrix::identity(d, d),
        CoinKind::Fourier(_) => {
            let s = 1.0 / (d as f64).sqrt();
            DMatrix::from_fn(d, d, |j, k| root_of_unity(j * k, d) * s)
        }
        CoinKind::Hadamard => {
            let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            DMatrix::from_row_slice(2, 2, &[s, s, s, -s])
        }
        CoinKind::Grover(_) => {
            let off = 2.0 / d as f64;
            DMatrix::from_fn(d, d, |j, k| {
                Complex64::new(if j == k { off - 1.0 } else { off }, 0.0)
            })
        }
    };
    OperatorMatrix::from_matrix(mat)
}

/// `|f_j⟩ = (1/√d) Σ_k e^{2πi·jk/d} |k⟩` for `j = 0..d`.
pub fn fourier_basis(d: usize) -> Result<Vec<StateVector>> {
    let f = make_coin(CoinKind::Fourier(d))?;
    let shape = SpaceShape::new(vec![d])?;
    (0..d)
        .map(|j| StateVector::new(shape.clone(), f.matrix().column(j).iter().copied().collect()))
        .collect()
}

/// Complex conjugates of [`fourier_basis`]; `conj(|f_j⟩) = |f_{−j mod d}⟩`.
/// Measuring in this basis reproduces expansion coefficients written with the
/// positive-exponent phase instead of the inner-product phase.
pub fn conjugate_fourier_basis(d: usize) -> Result<Vec<StateVector>> {
    let shape = SpaceShape::new(vec![d])?;
    fourier_basis(d)?
        .into_iter()
        .map(|v| StateVector::new(shape.clone(), v.amps().iter().map(|z| z.conj()).collect()))
        .collect()
}

pub fn computational_basis(d: usize) -> Result<Vec<StateVector>> {
    let shape = SpaceShape::new(vec![d])?;
    (0..d)
        .map(|k| crate::hilbert::basis_state(&shape, &[k]))
        .collect()
}

/// Maps a phase into `(−π, π]`.
pub fn normalize_phase(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}
