//! Multi-coin walk steps on `position ⊗ coin₁ ⊗ coin₂ ⊗ …`.
//!
//! A step tosses one coin and then moves the walker along the edges whose
//! label equals that coin's value; the other coins are spectators.
//! [`step_operator`] materializes the step as a dense matrix built from
//! Kronecker terms, while [`apply_step`] pushes amplitudes along edges
//! directly. The two are independent routes to the same map.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::coins::{make_coin, CoinKind};
use crate::error::{Error, Result};
use crate::graphshift::EdgeLabeledGraph;
use crate::hilbert::{apply, kron, OperatorMatrix, SpaceShape, StateVector};

#[derive(Clone, Debug, PartialEq)]
pub struct WalkStep {
    /// Subsystem index of the coin tossed in this step (1 = first coin).
    pub active_coin: usize,
    pub coin: CoinKind,
    pub graph: EdgeLabeledGraph,
}

impl WalkStep {
    pub fn new(active_coin: usize, coin: CoinKind, graph: EdgeLabeledGraph) -> Self {
        Self {
            active_coin,
            coin,
            graph,
        }
    }

    pub fn validate(&self, shape: &SpaceShape) -> Result<()> {
        let dims = shape.dims();
        if dims.len() < 2 {
            return Err(Error::InvalidStep(format!(
                "shape {dims:?} has no coin subsystem"
            )));
        }
        if self.active_coin == 0 || self.active_coin >= dims.len() {
            return Err(Error::InvalidStep(format!(
                "active coin {} is not a coin subsystem of {dims:?}",
                self.active_coin
            )));
        }
        let coin_dim = dims[self.active_coin];
        if self.coin.dim() != coin_dim {
            return Err(Error::InvalidStep(format!(
                "coin {} does not fit subsystem {} of dimension {coin_dim}",
                self.coin, self.active_coin
            )));
        }
        if self.graph.n_vertices() != dims[0] || self.graph.n_labels() != coin_dim {
            return Err(Error::InvalidStep(format!(
                "graph with {} vertices and {} labels does not fit position {} / coin {coin_dim}",
                self.graph.n_vertices(),
                self.graph.n_labels(),
                dims[0]
            )));
        }
        Ok(())
    }
}

fn single(dim: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Result<OperatorMatrix> {
    let one = Complex64::new(1.0, 0.0);
    OperatorMatrix::from_entries(
        SpaceShape::new(vec![dim])?,
        entries.into_iter().map(|(r, c)| (r, c, one)),
    )
}

/// Dense `U = S_embedded · C_embedded` for one step.
pub fn step_operator(shape: &SpaceShape, step: &WalkStep) -> Result<OperatorMatrix> {
    step.validate(shape)?;
    let dims = shape.dims();
    let identities: Vec<OperatorMatrix> = dims
        .iter()
        .map(|&d| SpaceShape::new(vec![d]).map(OperatorMatrix::identity))
        .collect::<Result<_>>()?;

    let coin = make_coin(step.coin)?;
    let coin_factors: Vec<&OperatorMatrix> = (0..dims.len())
        .map(|i| if i == step.active_coin { &coin } else { &identities[i] })
        .collect();
    let coin_embedded = kron(&coin_factors)?;

    // Σ_edges |dst⟩⟨src| ⊗ … ⊗ |label⟩⟨label| ⊗ …
    let mut shift = OperatorMatrix::zeros(shape.clone());
    for e in step.graph.edges() {
        let hop = single(dims[0], [(e.dst, e.src)])?;
        let label = single(dims[step.active_coin], [(e.label, e.label)])?;
        let factors: Vec<&OperatorMatrix> = (0..dims.len())
            .map(|i| match i {
                0 => &hop,
                i if i == step.active_coin => &label,
                i => &identities[i],
            })
            .collect();
        let term = kron(&factors)?;
        shift = OperatorMatrix::new(shape.clone(), shift.matrix() + term.matrix())?;
    }
    shift.compose(&coin_embedded)
}

/// Applies one step by tossing the coin on its subsystem and then moving
/// each amplitude along the matching edges.
pub fn apply_step(state: &StateVector, step: &WalkStep) -> Result<StateVector> {
    let shape = state.shape().clone();
    step.validate(&shape)?;
    let coin = make_coin(step.coin)?;
    let active = step.active_coin;
    let zero = Complex64::new(0.0, 0.0);

    let mut tossed = vec![zero; shape.total()];
    for (flat, &amp) in state.amps().iter().enumerate() {
        if amp == zero {
            continue;
        }
        let mut idx = shape.multi_index(flat);
        let from = idx[active];
        for to in 0..coin.dim() {
            idx[active] = to;
            tossed[shape.flat_index(&idx)?] += coin.entry(to, from) * amp;
        }
    }

    let mut targets: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for e in step.graph.edges() {
        targets.entry((e.src, e.label)).or_default().push(e.dst);
    }
    let mut moved = vec![zero; shape.total()];
    for (flat, &amp) in tossed.iter().enumerate() {
        if amp == zero {
            continue;
        }
        let mut idx = shape.multi_index(flat);
        if let Some(dsts) = targets.get(&(idx[0], idx[active])) {
            for &dst in dsts {
                idx[0] = dst;
                moved[shape.flat_index(&idx)?] += amp;
            }
        }
    }
    StateVector::new(shape, moved)
}

/// Applies `steps` in order, `steps[0]` first.
pub fn evolve(initial: &StateVector, steps: &[WalkStep]) -> Result<StateVector> {
    steps
        .iter()
        .try_fold(initial.clone(), |state, step| apply_step(&state, step))
}

/// Dense product `U_n ⋯ U_1` of the materialized step operators.
pub fn evolution_operator(shape: &SpaceShape, steps: &[WalkStep]) -> Result<OperatorMatrix> {
    steps
        .iter()
        .try_fold(OperatorMatrix::identity(shape.clone()), |acc, step| {
            step_operator(shape, step)?.compose(&acc)
        })
}

/// Evolution through the dense operator route.
pub fn evolve_dense(initial: &StateVector, steps: &[WalkStep]) -> Result<StateVector> {
    apply(&evolution_operator(initial.shape(), steps)?, initial)
}
