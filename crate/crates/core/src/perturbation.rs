use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::extended::{ExtendedPair, GroupedWeights};
use crate::multimeasure::{build_measure_with_budget, MultiSpectralMeasure, NodePattern, DEFAULT_ATOM_BUDGET};
use crate::operator::{spectral_decompose_default, HermitianOperator, SpectralDecomposition};

/// A pair `(H₀, V)` with both spectral decompositions and caches of the
/// multilinear measures built so far, in `f64` and in double-double.
#[derive(Debug)]
pub struct Perturbation {
    h0: HermitianOperator,
    v: HermitianOperator,
    h1: HermitianOperator,
    d0: SpectralDecomposition,
    d1: SpectralDecomposition,
    budget: u128,
    measures: Mutex<BTreeMap<usize, Arc<MultiSpectralMeasure>>>,
    extended: Mutex<Option<Arc<ExtendedPair>>>,
    weights: Mutex<BTreeMap<(usize, NodePattern), Arc<GroupedWeights>>>,
}

impl Perturbation {
    pub fn new(h0: HermitianOperator, v: HermitianOperator) -> Result<Self> {
        if h0.dim() != v.dim() {
            return Err(Error::DimensionMismatch { expected: h0.dim(), found: v.dim() });
        }
        let h1 = h0.add(&v)?;
        let d0 = spectral_decompose_default(&h0)?;
        let d1 = spectral_decompose_default(&h1)?;
        Ok(Perturbation {
            h0,
            v,
            h1,
            d0,
            d1,
            budget: DEFAULT_ATOM_BUDGET,
            measures: Mutex::new(BTreeMap::new()),
            extended: Mutex::new(None),
            weights: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self.measures = Mutex::new(BTreeMap::new());
        self.weights = Mutex::new(BTreeMap::new());
        self
    }

    pub fn budget(&self) -> u128 {
        self.budget
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn v(&self) -> &HermitianOperator {
        &self.v
    }

    /// `H₀ + V`.
    pub fn h1(&self) -> &HermitianOperator {
        &self.h1
    }

    pub fn initial(&self) -> &SpectralDecomposition {
        &self.d0
    }

    pub fn perturbed(&self) -> &SpectralDecomposition {
        &self.d1
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// `m_{p,H₀,V}`, built on first use.
    pub fn measure(&self, p: usize) -> Result<Arc<MultiSpectralMeasure>> {
        if let Some(m) = self.measures.lock().expect("measure cache poisoned").get(&p) {
            return Ok(Arc::clone(m));
        }
        let m = Arc::new(build_measure_with_budget(&self.d0, &self.v, p, self.budget)?);
        self.measures.lock().expect("measure cache poisoned").insert(p, Arc::clone(&m));
        Ok(m)
    }

    /// Refined eigendata of the pair, built on first use.
    pub fn extended(&self) -> Result<Arc<ExtendedPair>> {
        let mut slot = self.extended.lock().expect("extended cache poisoned");
        if let Some(e) = slot.as_ref() {
            return Ok(Arc::clone(e));
        }
        let e = Arc::new(ExtendedPair::new(&self.h0, &self.v)?);
        *slot = Some(Arc::clone(&e));
        Ok(e)
    }

    /// Double-double weights of `m_{p,H₀,V}` grouped under `pattern`.
    pub fn grouped_weights(&self, p: usize, pattern: NodePattern) -> Result<Arc<GroupedWeights>> {
        if let Some(w) = self.weights.lock().expect("weight cache poisoned").get(&(p, pattern)) {
            return Ok(Arc::clone(w));
        }
        let w = Arc::new(self.extended()?.grouped_weights(p, pattern, self.budget)?);
        self.weights.lock().expect("weight cache poisoned").insert((p, pattern), Arc::clone(&w));
        Ok(w)
    }
}
