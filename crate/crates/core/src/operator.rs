//! Hermitian matrices, their spectral decompositions, and the functional
//! calculus built on them.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::divdiff::{default_merge_tol, FunctionSpec};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// A square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Accepts `m` if `|m_ij − conj(m_ji)| ≤ 1e-12·max|m_ij|` and stores the
    /// exactly Hermitian part `(m + m*)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(Error::domain("operator dimension must be positive"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tolerance = 1e-12 * scale;
        let adjoint = m.adjoint();
        let asymmetry = m.iter().zip(adjoint.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if asymmetry > tolerance {
            return Err(Error::NotHermitian { asymmetry, tolerance });
        }
        let matrix = (&m + adjoint).scale(0.5);
        Ok(HermitianOperator { matrix })
    }

    pub fn from_parts(re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> Result<Self> {
        let n = re.len();
        let check = |rows: &[Vec<f64>]| -> Result<()> {
            if rows.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: rows.len() });
            }
            match rows.iter().find(|r| r.len() != n) {
                Some(r) => Err(Error::NotSquare { rows: n, cols: r.len() }),
                None => Ok(()),
            }
        };
        check(re)?;
        if let Some(im) = im {
            check(im)?;
        }
        let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(re[i][j], im.map_or(0.0, |im| im[i][j])));
        Self::new(m)
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_parts(rows, None)
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len().max(1);
        let m = CMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(d.get(i).copied().unwrap_or(0.0), 0.0) } else { Complex64::new(0.0, 0.0) });
        HermitianOperator { matrix: m }
    }

    pub fn scalar(value: f64) -> Self {
        Self::from_diagonal(&[value])
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianOperator { matrix: CMatrix::zeros(dim.max(1), dim.max(1)) }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOperator { matrix: CMatrix::identity(dim.max(1), dim.max(1)) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(HermitianOperator { matrix: &self.matrix + &other.matrix })
    }

    /// `self + t·other`.
    pub fn add_scaled(&self, other: &HermitianOperator, t: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(HermitianOperator { matrix: &self.matrix + other.matrix.scale(t) })
    }

    pub fn scale(&self, c: f64) -> Self {
        HermitianOperator { matrix: self.matrix.scale(c) }
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| z.norm() == 0.0)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        match raw_eigen(self) {
            Ok((values, _)) => values.iter().map(|v| v.abs()).fold(0.0, f64::max),
            Err(_) => schatten_norm(&self.matrix, f64::INFINITY).unwrap_or(f64::NAN),
        }
    }

    /// All eigenvalues with multiplicity, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut values = raw_eigen(self)?.0;
        values.sort_by(|a, b| a.total_cmp(b));
        Ok(values)
    }

    /// Eigenvalues recomputed as Rayleigh quotients `u* H u` of the computed
    /// eigenvectors, ascending. Their error is quadratic in the eigenvector
    /// error, so they vary more smoothly under small changes of `H`.
    pub fn rayleigh_eigenvalues(&self) -> Result<Vec<f64>> {
        let (_, vectors) = raw_eigen(self)?;
        let hv = &self.matrix * &vectors;
        let mut values: Vec<f64> = (0..self.dim())
            .map(|i| vectors.column(i).iter().zip(hv.column(i).iter()).map(|(u, w)| (u.conj() * w).re).sum())
            .collect();
        values.sort_by(|a, b| a.total_cmp(b));
        Ok(values)
    }

    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        spectral_decompose_default(self)
    }

    /// `trace(self^k)`, real for Hermitian input.
    pub fn trace_power(&self, k: u32) -> f64 {
        if k == 0 {
            return self.dim() as f64;
        }
        let mut m = self.matrix.clone();
        for _ in 1..k {
            m = &m * &self.matrix;
        }
        trace(&m).re
    }
}

/// Eigenvalues (distinct after clustering) with orthogonal projections.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    multiplicities: Vec<usize>,
    bases: Vec<CMatrix>,
    dim: usize,
}

impl SpectralDecomposition {
    /// Strictly increasing distinct eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Orthonormal eigenvectors of eigenvalue `i` as columns of a `dim × m_i` matrix.
    pub fn basis(&self, i: usize) -> &CMatrix {
        &self.bases[i]
    }

    pub fn bases(&self) -> &[CMatrix] {
        &self.bases
    }

    /// `P_i = U_i U_i*`.
    pub fn projection(&self, i: usize) -> CMatrix {
        &self.bases[i] * self.bases[i].adjoint()
    }

    pub fn projections(&self) -> Vec<CMatrix> {
        (0..self.len()).map(|i| self.projection(i)).collect()
    }

    /// `Σ c_i P_i`.
    pub fn combine(&self, coefficients: &[Complex64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (u, c) in self.bases.iter().zip(coefficients) {
            let scaled = u.map(|x| x * c);
            out += scaled * u.adjoint();
        }
        out
    }

    /// Smallest and largest eigenvalue.
    pub fn range(&self) -> (f64, f64) {
        (self.eigenvalues[0], self.eigenvalues[self.eigenvalues.len() - 1])
    }
}

fn raw_eigen(h: &HermitianOperator) -> Result<(Vec<f64>, CMatrix)> {
    let eig = h
        .matrix
        .clone()
        .try_symmetric_eigen(EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNonConvergence { dim: h.dim(), iterations: EIGEN_MAX_ITER })?;
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

/// Eigendecomposition with eigenvalues closer than `cluster_tol` merged.
///
/// Consecutive sorted eigenvalues whose gap is at most `cluster_tol` form a
/// cluster; the cluster value is the mean of its members and its projection
/// is the sum of theirs.
pub fn spectral_decompose(h: &HermitianOperator, cluster_tol: f64) -> Result<SpectralDecomposition> {
    if !(cluster_tol >= 0.0) {
        return Err(Error::domain("cluster tolerance must be nonnegative"));
    }
    let (values, vectors) = raw_eigen(h)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if values[i] - values[*g.last().unwrap()] <= cluster_tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let dim = h.dim();
    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut multiplicities = Vec::with_capacity(groups.len());
    let mut bases = Vec::with_capacity(groups.len());
    for g in groups {
        eigenvalues.push(g.iter().map(|&i| values[i]).sum::<f64>() / g.len() as f64);
        multiplicities.push(g.len());
        bases.push(CMatrix::from_fn(dim, g.len(), |r, c| vectors[(r, g[c])]));
    }
    Ok(SpectralDecomposition { eigenvalues, multiplicities, bases, dim })
}

/// Uses the cluster tolerance `1e-9·(spectral diameter + 1)`.
pub fn spectral_decompose_default(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    let (values, _) = raw_eigen(h)?;
    spectral_decompose(h, default_merge_tol(&values))
}

/// `Σ f(λ_i) P_i`.
pub fn apply_function(d: &SpectralDecomposition, f: &FunctionSpec) -> Result<CMatrix> {
    let values = d.eigenvalues.iter().map(|&x| f.eval(x)).collect::<Result<Vec<_>>>()?;
    Ok(d.combine(&values))
}

/// `(zI − H)^{-k}`.
pub fn resolvent(d: &SpectralDecomposition, z: Complex64, k: u32) -> Result<CMatrix> {
    apply_function(d, &FunctionSpec::resolvent_power(z, k)?)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Number of eigenvalues strictly below `t`, with multiplicity.
pub fn counting_function(d: &SpectralDecomposition, t: f64) -> usize {
    d.eigenvalues.iter().zip(&d.multiplicities).filter(|(&l, _)| l < t).map(|(_, &m)| m).sum()
}

/// Schatten `p`-norm; `p = ∞` gives the operator norm.
pub fn schatten_norm(m: &CMatrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain(format!("Schatten exponent must be at least 1, got {p}")));
    }
    let sv = m.clone().svd(false, false).singular_values;
    if p.is_infinite() {
        return Ok(sv.iter().copied().fold(0.0, f64::max));
    }
    Ok(sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// `‖M‖_p + ‖M‖`.
pub fn schatten_operator_norm(m: &CMatrix, p: f64) -> Result<f64> {
    Ok(schatten_norm(m, p)? + schatten_norm(m, f64::INFINITY)?)
}
