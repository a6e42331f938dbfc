//! State vectors and operators over composite (tensor-product) spaces.
//!
//! Subsystems are ordered and flattened row-major, so for dims `[10, 3, 3]`
//! the ket `|p, c1, c2⟩` lives at flat index `p * 9 + c1 * 3 + c2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type ComplexAmp = Complex64;

/// Equality, unitarity and probability tolerance.
pub const TOLERANCE: f64 = 1e-10;

/// Branches at or below this probability are treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SpaceShape {
    dims: Vec<usize>,
}

impl SpaceShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::ZeroDimension(pos));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    /// Total dimension; the empty shape is the one-dimensional scalar space.
    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn flat_index(&self, indices: &[usize]) -> Result<usize> {
        if indices.len() != self.dims.len() {
            return Err(Error::RankMismatch {
                expected: self.dims.len(),
                found: indices.len(),
            });
        }
        let mut flat = 0;
        for (subsystem, (&index, &dim)) in indices.iter().zip(&self.dims).enumerate() {
            if index >= dim {
                return Err(Error::IndexOutOfRange {
                    subsystem,
                    index,
                    dim,
                });
            }
            flat = flat * dim + index;
        }
        Ok(flat)
    }

    /// Inverse of [`flat_index`](Self::flat_index). Panics if `flat` is out of range.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        assert!(flat < self.total(), "flat index {flat} out of range");
        let mut rest = flat;
        let mut out = vec![0; self.dims.len()];
        for (slot, &dim) in out.iter_mut().zip(&self.dims).rev() {
            *slot = rest % dim;
            rest /= dim;
        }
        out
    }

    pub fn concat(&self, other: &SpaceShape) -> SpaceShape {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SpaceShape { dims }
    }

    /// The shape left after removing one subsystem.
    pub fn without(&self, subsystem: usize) -> Result<SpaceShape> {
        if subsystem >= self.dims.len() {
            return Err(Error::IndexOutOfRange {
                subsystem,
                index: subsystem,
                dim: self.dims.len(),
            });
        }
        let mut dims = self.dims.clone();
        dims.remove(subsystem);
        Ok(SpaceShape { dims })
    }
}

impl TryFrom<Vec<usize>> for SpaceShape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        SpaceShape::new(dims)
    }
}

impl From<SpaceShape> for Vec<usize> {
    fn from(shape: SpaceShape) -> Self {
        shape.dims
    }
}

fn check_finite<'a>(values: impl IntoIterator<Item = &'a Complex64>) -> Result<()> {
    match values
        .into_iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    shape: SpaceShape,
    amps: DVector<Complex64>,
}

impl StateVector {
    pub fn new(shape: SpaceShape, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != shape.total() {
            return Err(Error::LengthMismatch {
                expected: shape.total(),
                found: amps.len(),
            });
        }
        check_finite(&amps)?;
        Ok(Self {
            shape,
            amps: DVector::from_vec(amps),
        })
    }

    pub(crate) fn from_dvector(shape: SpaceShape, amps: DVector<Complex64>) -> Self {
        debug_assert_eq!(shape.total(), amps.len());
        Self { shape, amps }
    }

    pub fn zeros(shape: SpaceShape) -> Self {
        let n = shape.total();
        Self {
            shape,
            amps: DVector::zeros(n),
        }
    }

    pub fn shape(&self) -> &SpaceShape {
        &self.shape
    }

    pub fn amps(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amp(&self, indices: &[usize]) -> Result<Complex64> {
        Ok(self.amps[self.shape.flat_index(indices)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= TOLERANCE
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm: self.norm() })
        }
    }

    /// Returns a unit-norm copy. Never applied implicitly by other operations.
    pub fn normalize(&self) -> Result<StateVector> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scale(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> StateVector {
        Self {
            shape: self.shape.clone(),
            amps: &self.amps * factor,
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        same_shape(&self.shape, &other.shape)?;
        Ok(Self {
            shape: self.shape.clone(),
            amps: &self.amps + &other.amps,
        })
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        same_shape(&self.shape, &other.shape)?;
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Nonzero amplitudes (modulus above `cutoff`) with their multi-indices.
    pub fn support(&self, cutoff: f64) -> Vec<(Vec<usize>, Complex64)> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > cutoff)
            .map(|(i, z)| (self.shape.multi_index(i), *z))
            .collect()
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        Self {
            shape: self.shape.concat(&other.shape),
            amps: self.amps.kronecker(&other.amps),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    dims: Vec<usize>,
    amps: Vec<[f64; 2]>,
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateRepr {
            dims: self.shape.dims.clone(),
            amps: self.amps.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = StateRepr::deserialize(deserializer)?;
        let shape = SpaceShape::new(repr.dims).map_err(serde::de::Error::custom)?;
        let amps = repr
            .amps
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        StateVector::new(shape, amps).map_err(serde::de::Error::custom)
    }
}

/// Square operator acting on a composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    shape: SpaceShape,
    mat: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn new(shape: SpaceShape, mat: DMatrix<Complex64>) -> Result<Self> {
        let n = shape.total();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::ShapeMismatch {
                expected: vec![n, n],
                found: vec![mat.nrows(), mat.ncols()],
            });
        }
        check_finite(mat.iter())?;
        Ok(Self { shape, mat })
    }

    /// Single-subsystem operator from a square matrix.
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Result<Self> {
        let shape = SpaceShape::new(vec![mat.nrows()])?;
        Self::new(shape, mat)
    }

    pub fn identity(shape: SpaceShape) -> Self {
        let n = shape.total();
        Self {
            shape,
            mat: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(shape: SpaceShape) -> Self {
        let n = shape.total();
        Self {
            shape,
            mat: DMatrix::zeros(n, n),
        }
    }

    /// `|row⟩⟨col|` summed over the given entries; repeated entries accumulate.
    pub fn from_entries(
        shape: SpaceShape,
        entries: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self> {
        let n = shape.total();
        let mut mat = DMatrix::zeros(n, n);
        for (row, col, value) in entries {
            if row >= n || col >= n {
                return Err(Error::IndexOutOfRange {
                    subsystem: 0,
                    index: row.max(col),
                    dim: n,
                });
            }
            mat[(row, col)] += value;
        }
        Self::new(shape, mat)
    }

    pub fn shape(&self) -> &SpaceShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        Self {
            shape: self.shape.clone(),
            mat: self.mat.adjoint(),
        }
    }

    /// Operator product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &OperatorMatrix) -> Result<OperatorMatrix> {
        same_shape(&self.shape, &rhs.shape)?;
        Ok(Self {
            shape: self.shape.clone(),
            mat: &self.mat * &rhs.mat,
        })
    }

    pub fn scale(&self, factor: Complex64) -> OperatorMatrix {
        Self {
            shape: self.shape.clone(),
            mat: &self.mat * factor,
        }
    }

    /// `max |(U U†)_ij − δ_ij|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim();
        max_abs_entry(&(&self.mat * self.mat.adjoint() - DMatrix::identity(n, n)))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> Result<f64> {
        same_shape(&self.shape, &other.shape)?;
        Ok(max_abs_entry(&(&self.mat - &other.mat)))
    }
}

pub(crate) fn max_abs_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn same_shape(a: &SpaceShape, b: &SpaceShape) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: a.dims.clone(),
            found: b.dims.clone(),
        })
    }
}

/// Unit vector at the given multi-index.
pub fn basis_state(shape: &SpaceShape, indices: &[usize]) -> Result<StateVector> {
    let flat = shape.flat_index(indices)?;
    let mut state = StateVector::zeros(shape.clone());
    state.amps[flat] = Complex64::new(1.0, 0.0);
    Ok(state)
}

/// Kronecker product in the given order; the result's shape concatenates
/// the operand shapes.
pub fn kron(ops: &[&OperatorMatrix]) -> Result<OperatorMatrix> {
    let (first, rest) = ops.split_first().ok_or(Error::EmptyKron)?;
    Ok(rest.iter().fold((*first).clone(), |acc, op| OperatorMatrix {
        shape: acc.shape.concat(&op.shape),
        mat: acc.mat.kronecker(&op.mat),
    }))
}

pub fn apply(op: &OperatorMatrix, state: &StateVector) -> Result<StateVector> {
    same_shape(&op.shape, &state.shape)?;
    Ok(StateVector {
        shape: state.shape.clone(),
        amps: &op.mat * &state.amps,
    })
}

/// `⟨x|y⟩`, conjugate-linear in `x`.
pub fn inner(x: &StateVector, y: &StateVector) -> Result<Complex64> {
    same_shape(&x.shape, &y.shape)?;
    Ok(x.amps.dotc(&y.amps))
}

/// Contracts one subsystem of `state` with `⟨v|`, leaving the un-normalized
/// state on the remaining subsystems.
pub fn partial_inner(
    state: &StateVector,
    subsystem: usize,
    v: &StateVector,
) -> Result<StateVector> {
    let rest = state.shape.without(subsystem)?;
    let dim = state.shape.dims[subsystem];
    if v.shape.dims != [dim] {
        return Err(Error::ShapeMismatch {
            expected: vec![dim],
            found: v.shape.dims.clone(),
        });
    }
    // Row-major: flat = outer * (dim * inner) + i * inner + k.
    let inner_size: usize = state.shape.dims[subsystem + 1..].iter().product();
    let outer_size: usize = state.shape.dims[..subsystem].iter().product();
    let mut out = DVector::zeros(rest.total());
    for outer in 0..outer_size {
        for i in 0..dim {
            let weight = v.amps[i].conj();
            if weight == Complex64::new(0.0, 0.0) {
                continue;
            }
            let base = (outer * dim + i) * inner_size;
            for k in 0..inner_size {
                out[outer * inner_size + k] += weight * state.amps[base + k];
            }
        }
    }
    Ok(StateVector::from_dvector(rest, out))
}

/// Outcome of projecting one subsystem onto a basis vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub probability: f64,
    /// Renormalized post-measurement state; `None` for an impossible outcome.
    pub residual: Option<StateVector>,
}

pub fn project_subsystem(
    state: &StateVector,
    subsystem: usize,
    basis_vector: &StateVector,
) -> Result<Projection> {
    basis_vector.ensure_normalized()?;
    let unnormalized = partial_inner(state, subsystem, basis_vector)?;
    let probability = unnormalized.norm_sqr();
    let residual = if probability > ZERO_PROBABILITY {
        Some(unnormalized.normalize()?)
    } else {
        None
    };
    Ok(Projection {
        probability,
        residual,
    })
}

/// `|⟨x|y⟩|²` for normalized states.
pub fn fidelity(x: &StateVector, y: &StateVector) -> Result<f64> {
    x.ensure_normalized()?;
    y.ensure_normalized()?;
    Ok(inner(x, y)?.norm_sqr())
}
