//! Teleportation protocol engine.
//!
//! Alice prepares `|start⟩ ⊗ (Σ a_k|k⟩) ⊗ |0⟩`, the walk runs, Alice measures
//! the position in the computational basis and coin₁ in a chosen basis, and
//! Bob applies the tabulated recovery to what is left on coin₂.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::coins::{conjugate_fourier_basis, fourier_basis, CoinKind};
use crate::error::{Error, Result};
use crate::graphshift::ShiftVariant;
use crate::hilbert::{
    apply, basis_state, fidelity, inner, partial_inner, OperatorMatrix, SpaceShape, StateVector,
    TOLERANCE, ZERO_PROBABILITY,
};
use crate::walk::{evolve, WalkStep};

/// How Alice's coin₁ outcome amplitudes are formed from the Fourier basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementConvention {
    /// Outcome `j` has amplitude `⟨f_j|ψ⟩`.
    InnerProduct,
    /// Outcome `j` has the positive-phase expansion coefficient, i.e. the
    /// amplitude `⟨conj(f_j)|ψ⟩`.
    PaperExpansion,
}

impl MeasurementConvention {
    pub const BOTH: [MeasurementConvention; 2] = [
        MeasurementConvention::InnerProduct,
        MeasurementConvention::PaperExpansion,
    ];

    pub fn basis(self, d: usize) -> Result<Vec<StateVector>> {
        match self {
            MeasurementConvention::InnerProduct => fourier_basis(d),
            MeasurementConvention::PaperExpansion => conjugate_fourier_basis(d),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeasurementConvention::InnerProduct => "inner-product",
            MeasurementConvention::PaperExpansion => "paper-expansion",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolSpec {
    pub name: String,
    /// `[positions, d1, d2]`.
    pub shape: SpaceShape,
    pub start_vertex: usize,
    pub steps: Vec<WalkStep>,
    pub coin1_basis_name: String,
    pub coin1_basis: Vec<StateVector>,
    /// `(position outcome, coin₁ outcome) → operator on Bob's coin`.
    pub recovery_table: BTreeMap<(usize, usize), OperatorMatrix>,
}

impl ProtocolSpec {
    pub fn positions(&self) -> usize {
        self.shape.dims()[0]
    }

    pub fn input_dim(&self) -> usize {
        self.shape.dims()[1]
    }

    pub fn bob_dim(&self) -> usize {
        self.shape.dims()[2]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProtocol(msg));
        if self.shape.rank() != 3 {
            return bad(format!(
                "expected [positions, d1, d2], got {:?}",
                self.shape.dims()
            ));
        }
        if self.start_vertex >= self.positions() {
            return bad(format!(
                "start vertex {} outside {} positions",
                self.start_vertex,
                self.positions()
            ));
        }
        for step in &self.steps {
            step.validate(&self.shape)?;
        }
        let d1 = self.input_dim();
        if self.coin1_basis.len() != d1 {
            return bad(format!(
                "coin1 basis has {} vectors for dimension {d1}",
                self.coin1_basis.len()
            ));
        }
        for (j, x) in self.coin1_basis.iter().enumerate() {
            if x.shape().dims() != [d1] {
                return bad(format!("coin1 basis vector {j} has the wrong shape"));
            }
            for (k, y) in self.coin1_basis.iter().enumerate() {
                let want = if j == k { 1.0 } else { 0.0 };
                if (inner(x, y)? - Complex64::new(want, 0.0)).norm() > TOLERANCE {
                    return bad("coin1 basis is not orthonormal".to_string());
                }
            }
        }
        for (&(p, j), op) in &self.recovery_table {
            if op.shape().dims() != [self.bob_dim()] {
                return bad(format!(
                    "recovery for ({p}, {j}) is {0}x{0}, Bob's space has dimension {1}",
                    op.dim(),
                    self.bob_dim()
                ));
            }
            if p >= self.positions() || j >= d1 {
                return bad(format!("recovery key ({p}, {j}) is not a measurement outcome"));
            }
        }
        Ok(())
    }

    /// `Σ a_k |k⟩` on the first coin's space.
    pub fn payload(&self, a: &[Complex64]) -> Result<StateVector> {
        let payload = StateVector::new(SpaceShape::new(vec![self.input_dim()])?, a.to_vec())?;
        payload.ensure_normalized()?;
        Ok(payload)
    }

    /// `|start⟩ ⊗ (Σ a_k|k⟩) ⊗ |0⟩`. The amplitudes must already be normalized.
    pub fn prepare_initial(&self, a: &[Complex64]) -> Result<StateVector> {
        let payload = self.payload(a)?;
        let position = basis_state(&SpaceShape::new(vec![self.positions()])?, &[self.start_vertex])?;
        let bob = basis_state(&SpaceShape::new(vec![self.bob_dim()])?, &[0])?;
        Ok(position.tensor(&payload).tensor(&bob))
    }

    /// Final state without the normalization check, used for basis-input sweeps.
    fn evolve_input(&self, payload: &StateVector) -> Result<StateVector> {
        let position = basis_state(&SpaceShape::new(vec![self.positions()])?, &[self.start_vertex])?;
        let bob = basis_state(&SpaceShape::new(vec![self.bob_dim()])?, &[0])?;
        evolve(&position.tensor(payload).tensor(&bob), &self.steps)
    }

    pub fn evolve(&self, a: &[Complex64]) -> Result<StateVector> {
        evolve(&self.prepare_initial(a)?, &self.steps)
    }

    /// Bob's un-normalized coin₂ state on the branch `(position, coin1_outcome)`.
    pub fn branch(
        &self,
        final_state: &StateVector,
        position: usize,
        coin1_outcome: usize,
    ) -> Result<StateVector> {
        let pos = basis_state(&SpaceShape::new(vec![self.positions()])?, &[position])?;
        let basis = self.coin1_basis.get(coin1_outcome).ok_or_else(|| {
            Error::InvalidProtocol(format!("coin1 outcome {coin1_outcome} out of range"))
        })?;
        partial_inner(&partial_inner(final_state, 0, &pos)?, 0, basis)
    }

    pub fn run_outcome(
        &self,
        a: &[Complex64],
        position: usize,
        coin1_outcome: usize,
    ) -> Result<OutcomeRecord> {
        let payload = self.payload(a)?;
        let final_state = self.evolve(a)?;
        self.record(&final_state, &payload, position, coin1_outcome)
    }

    /// Every `(position, coin₁ outcome)` branch, position-major.
    pub fn run_all(&self, a: &[Complex64]) -> Result<Vec<OutcomeRecord>> {
        let payload = self.payload(a)?;
        let final_state = self.evolve(a)?;
        let mut out = Vec::with_capacity(self.positions() * self.input_dim());
        for p in 0..self.positions() {
            for j in 0..self.input_dim() {
                out.push(self.record(&final_state, &payload, p, j)?);
            }
        }
        Ok(out)
    }

    fn record(
        &self,
        final_state: &StateVector,
        payload: &StateVector,
        position: usize,
        coin1_outcome: usize,
    ) -> Result<OutcomeRecord> {
        let branch = self.branch(final_state, position, coin1_outcome)?;
        let probability = branch.norm_sqr();
        let possible = probability > ZERO_PROBABILITY;
        let bob_state = if possible {
            Some(branch.normalize()?)
        } else {
            None
        };
        let recovery = self.recovery_table.get(&(position, coin1_outcome));
        let mut rec = OutcomeRecord {
            position_outcome: position,
            coin1_outcome_index: coin1_outcome,
            probability,
            possible,
            bob_state: bob_state.clone(),
            has_recovery: recovery.is_some(),
            recovery_unitary: recovery.map(|r| r.is_unitary(TOLERANCE)),
            recovered_state: None,
            fidelity_vs_input: None,
        };
        if let (Some(r), Some(bob)) = (recovery, bob_state) {
            let out = apply(r, &bob)?;
            if out.norm_sqr() > ZERO_PROBABILITY {
                let out = out.normalize()?;
                if out.shape() == payload.shape() {
                    rec.fidelity_vs_input = Some(fidelity(&out, payload)?);
                }
                rec.recovered_state = Some(out);
            } else {
                rec.fidelity_vs_input = Some(0.0);
            }
        }
        Ok(rec)
    }

    /// Linear map from input amplitudes to Bob's un-normalized state on one
    /// branch: column `k` is the branch state for input `e_k`.
    pub fn conditional_map(&self, position: usize, coin1_outcome: usize) -> Result<DMatrix<Complex64>> {
        let d1 = self.input_dim();
        let shape = SpaceShape::new(vec![d1])?;
        let mut m = DMatrix::zeros(self.bob_dim(), d1);
        for k in 0..d1 {
            let final_state = self.evolve_input(&basis_state(&shape, &[k])?)?;
            let branch = self.branch(&final_state, position, coin1_outcome)?;
            m.set_column(k, branch.amps());
        }
        Ok(m)
    }
}

/// One measurement branch of a protocol run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeRecord {
    pub position_outcome: usize,
    pub coin1_outcome_index: usize,
    pub probability: f64,
    /// False when the branch probability is at or below the zero cutoff.
    pub possible: bool,
    pub bob_state: Option<StateVector>,
    pub has_recovery: bool,
    pub recovery_unitary: Option<bool>,
    pub recovered_state: Option<StateVector>,
    /// `None` when no recovery is tabulated or the branch is impossible.
    pub fidelity_vs_input: Option<f64>,
}

/// `(|0⟩⟨1| + |1⟩⟨0| + |2⟩⟨1|)`, the base recovery matrix of the built-in scenario.
pub fn paper_recovery_base() -> DMatrix<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mut r = DMatrix::zeros(3, 3);
    r[(0, 1)] = one;
    r[(1, 0)] = one;
    r[(2, 1)] = one;
    r
}

/// Diagonal phase corrections `P1`, `P2` with exponents taken as written.
pub fn paper_phase_correction(which: usize) -> DMatrix<Complex64> {
    let (t0, t1) = match which {
        1 => (-2.0 * PI / 3.0, -4.0 * PI / 3.0),
        2 => (-4.0 * PI / 3.0, -8.0 * PI / 3.0),
        _ => panic!("phase correction index must be 1 or 2"),
    };
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::from_polar(1.0, t0),
        Complex64::from_polar(1.0, t1),
        Complex64::new(1.0, 0.0),
    ]))
}

/// Recovery table: `(1, f0) ↦ R`, `(1, f1) ↦ R·P1`, `(1, f2) ↦ R·P2`.
pub fn paper_recovery_table() -> BTreeMap<(usize, usize), OperatorMatrix> {
    let r = paper_recovery_base();
    let rows = [
        r.clone(),
        &r * paper_phase_correction(1),
        &r * paper_phase_correction(2),
    ];
    rows.into_iter()
        .enumerate()
        .map(|(j, m)| ((1, j), OperatorMatrix::from_matrix(m).expect("3x3")))
        .collect()
}

/// The two-step, two-qutrit-coin scenario on the 10-vertex graph, starting at
/// vertex 1 and measuring coin₁ with the given convention.
pub fn paper_protocol_with(variant: ShiftVariant, convention: MeasurementConvention) -> ProtocolSpec {
    let graph = variant.graph();
    ProtocolSpec {
        name: format!("paper:{variant}"),
        shape: SpaceShape::new(vec![10, 3, 3]).expect("static shape"),
        start_vertex: 1,
        steps: vec![
            WalkStep::new(1, CoinKind::Identity(3), graph.clone()),
            WalkStep::new(2, CoinKind::Fourier(3), graph),
        ],
        coin1_basis_name: match convention {
            MeasurementConvention::InnerProduct => "fourier".to_string(),
            MeasurementConvention::PaperExpansion => "fourier-conjugate".to_string(),
        },
        coin1_basis: convention.basis(3).expect("d = 3"),
        recovery_table: paper_recovery_table(),
    }
}

pub fn paper_protocol(variant: ShiftVariant) -> ProtocolSpec {
    paper_protocol_with(variant, MeasurementConvention::InnerProduct)
}

/// Normalized amplitude vector with i.i.d. complex Gaussian entries.
pub fn random_amplitudes<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// `count` seeded random inputs, reproducible for a given seed.
pub fn seeded_inputs(seed: u64, count: usize, d: usize) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_amplitudes(&mut rng, d)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolRun {
    #[serde(serialize_with = "crate::report::serialize_amps")]
    pub input: Vec<Complex64>,
    pub norm_after_walk: f64,
    pub outcomes: Vec<OutcomeRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeAggregate {
    pub position_outcome: usize,
    pub coin1_outcome_index: usize,
    pub runs: usize,
    pub mean_probability: f64,
    /// Over runs where the branch was possible and a recovery is tabulated.
    pub mean_fidelity: Option<f64>,
    pub min_fidelity: Option<f64>,
}

pub fn run_input(spec: &ProtocolSpec, a: &[Complex64]) -> Result<ProtocolRun> {
    let final_state = spec.evolve(a)?;
    Ok(ProtocolRun {
        input: a.to_vec(),
        norm_after_walk: final_state.norm(),
        outcomes: spec.run_all(a)?,
    })
}

pub fn aggregate(runs: &[ProtocolRun]) -> Vec<OutcomeAggregate> {
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    first
        .outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let probs: Vec<f64> = runs.iter().map(|r| r.outcomes[i].probability).collect();
            let fids: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.outcomes[i].fidelity_vs_input)
                .collect();
            OutcomeAggregate {
                position_outcome: o.position_outcome,
                coin1_outcome_index: o.coin1_outcome_index,
                runs: runs.len(),
                mean_probability: probs.iter().sum::<f64>() / probs.len() as f64,
                mean_fidelity: (!fids.is_empty()).then(|| fids.iter().sum::<f64>() / fids.len() as f64),
                min_fidelity: fids.iter().copied().reduce(f64::min),
            }
        })
        .collect()
}
