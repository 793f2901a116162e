//! Finite-dimensional block algebras `M_{d_1} (+) ... (+) M_{d_K}`, their
//! elements, normal states, POVMs and PVMs.

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigh, frobenius, hermitian_part, hermiticity_residual, max_abs};
use crate::scalar::{re, CMat, Real, C};
use crate::tol::Tolerances;

/// Direct sum of full complex matrix blocks, described by the block sizes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BlockAlgebra {
    dims: Vec<usize>,
}

impl BlockAlgebra {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Validation("block algebra needs at least one block".into()));
        }
        if let Some(k) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Validation(format!("block {k} has dimension 0")));
        }
        Ok(Self { dims })
    }

    /// `M_d` as a single block.
    pub fn full(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    /// Sum of block sizes (dimension of the Hilbert space the algebra acts on).
    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }
}

/// An element `x = (x_1, ..., x_K)` of a block algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Element<T: Real> {
    blocks: Vec<CMat<T>>,
}

impl<T: Real> Element<T> {
    pub fn from_blocks(blocks: Vec<CMat<T>>) -> Self {
        Self { blocks }
    }

    /// Builds an element from real row-major block entries.
    pub fn from_real_rows(rows: &[Vec<Vec<f64>>]) -> Self {
        let blocks = rows
            .iter()
            .map(|b| {
                let d = b.len();
                CMat::from_fn(d, d, |r, c| re(T::lit(b[r][c])))
            })
            .collect();
        Self { blocks }
    }

    /// Block-diagonal element with the given real diagonals.
    pub fn from_diagonals(diags: &[Vec<f64>]) -> Self {
        let blocks = diags
            .iter()
            .map(|d| CMat::from_fn(d.len(), d.len(), |r, c| if r == c { re(T::lit(d[r])) } else { C::new(T::zero(), T::zero()) }))
            .collect();
        Self { blocks }
    }

    pub fn zeros(alg: &BlockAlgebra) -> Self {
        Self { blocks: alg.dims.iter().map(|&d| CMat::zeros(d, d)).collect() }
    }

    pub fn identity(alg: &BlockAlgebra) -> Self {
        Self { blocks: alg.dims.iter().map(|&d| CMat::identity(d, d)).collect() }
    }

    pub fn blocks(&self) -> &[CMat<T>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMat<T> {
        &self.blocks[k]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut CMat<T> {
        &mut self.blocks[k]
    }

    pub fn into_blocks(self) -> Vec<CMat<T>> {
        self.blocks
    }

    pub fn check_shape(&self, alg: &BlockAlgebra) -> Result<()> {
        if self.blocks.len() != alg.num_blocks() {
            return Err(Error::Shape(format!(
                "element has {} blocks, algebra has {}",
                self.blocks.len(),
                alg.num_blocks()
            )));
        }
        for (k, (b, &d)) in self.blocks.iter().zip(&alg.dims).enumerate() {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::Shape(format!(
                    "block {k} is {}x{}, expected {d}x{d}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(())
    }

    /// Algebra whose block sizes match this element (square blocks assumed).
    pub fn algebra(&self) -> Result<BlockAlgebra> {
        BlockAlgebra::new(self.blocks.iter().map(|b| b.nrows()).collect())
    }

    pub fn adjoint(&self) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }

    pub fn hermitian_part(&self) -> Self {
        Self { blocks: self.blocks.iter().map(hermitian_part).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        self.scale_complex(re(s))
    }

    pub fn scale_complex(&self, s: C<T>) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b * s).collect() }
    }

    pub fn map_blocks(&self, f: impl Fn(&CMat<T>) -> CMat<T>) -> Self {
        Self { blocks: self.blocks.iter().map(f).collect() }
    }

    /// Frobenius norm over all blocks.
    pub fn frobenius(&self) -> T {
        self.blocks
            .iter()
            .fold(T::zero(), |acc, b| acc + frobenius(b).powi(2))
            .sqrt()
    }

    /// Largest entry modulus over all blocks.
    pub fn max_abs(&self) -> T {
        self.blocks.iter().fold(T::zero(), |acc, b| acc.max(max_abs(b)))
    }

    pub fn trace(&self) -> C<T> {
        self.blocks.iter().fold(C::new(T::zero(), T::zero()), |acc, b| acc + b.trace())
    }

    pub fn hermiticity_residual(&self) -> T {
        self.blocks.iter().fold(T::zero(), |acc, b| acc.max(hermiticity_residual(b)))
    }

    /// `xy - yx`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Integer power by repeated multiplication (`x^0 = 1`).
    pub fn pow(&self, k: usize) -> Self {
        let mut out = self.map_blocks(|b| CMat::identity(b.nrows(), b.ncols()));
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Sum of a non-empty family of same-shaped elements.
    pub fn sum<'a>(items: impl IntoIterator<Item = &'a Self>) -> Option<Self>
    where
        T: 'a,
    {
        let mut it = items.into_iter();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, x| &acc + x))
    }
}

macro_rules! blockwise_op {
    ($tr:ident, $f:ident, $body:expr) => {
        impl<'a, T: Real> $tr<&'a Element<T>> for &'a Element<T> {
            type Output = Element<T>;
            fn $f(self, rhs: &'a Element<T>) -> Element<T> {
                debug_assert_eq!(self.blocks.len(), rhs.blocks.len());
                Element { blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| $body(a, b)).collect() }
            }
        }
    };
}

blockwise_op!(Add, add, |a: &CMat<T>, b: &CMat<T>| a + b);
blockwise_op!(Sub, sub, |a: &CMat<T>, b: &CMat<T>| a - b);
blockwise_op!(Mul, mul, |a: &CMat<T>, b: &CMat<T>| a * b);

impl<T: Real> Neg for &Element<T> {
    type Output = Element<T>;
    fn neg(self) -> Element<T> {
        self.scale(-T::one())
    }
}

/// A normal state `phi(x) = sum_k Tr(rho_k x_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct State<T: Real> {
    densities: Vec<CMat<T>>,
}

impl<T: Real> State<T> {
    /// Validates and symmetrises the density blocks.
    pub fn new(alg: &BlockAlgebra, densities: Vec<CMat<T>>, tol: &Tolerances) -> Result<Self> {
        let raw = Element::from_blocks(densities);
        raw.check_shape(alg)?;
        let herm = raw.hermiticity_residual();
        if herm.into_f64() > tol.cert_tol {
            return Err(Error::Validation(format!("state density not Hermitian (residual {herm})")));
        }
        let sym = raw.hermitian_part();
        for (k, b) in sym.blocks().iter().enumerate() {
            let lam = eigh(b)?.min();
            if lam.into_f64() < -tol.psd_tol {
                return Err(Error::Validation(format!(
                    "state density block {k} has eigenvalue {lam} < -psd_tol"
                )));
            }
        }
        let tr = sym.trace().re;
        if (tr.into_f64() - 1.0).abs() > tol.cert_tol {
            return Err(Error::Validation(format!("state densities have total trace {tr}, expected 1")));
        }
        Ok(Self { densities: sym.into_blocks() })
    }

    /// Normalised trace `Tr(x) / total_dim`.
    pub fn normalized_trace(alg: &BlockAlgebra) -> Self {
        let w = T::one() / T::lit(alg.total_dim() as f64);
        Self { densities: alg.dims.iter().map(|&d| CMat::identity(d, d) * re(w)).collect() }
    }

    /// State with diagonal densities given by non-negative weights summing to 1.
    pub fn from_diagonal_weights(alg: &BlockAlgebra, weights: &[Vec<f64>], tol: &Tolerances) -> Result<Self> {
        Self::new(alg, Element::<T>::from_diagonals(weights).into_blocks(), tol)
    }

    /// Vector state `x -> <x xi, xi>` for a unit vector given blockwise.
    pub fn vector_state(alg: &BlockAlgebra, xi: &[crate::scalar::CVec<T>], tol: &Tolerances) -> Result<Self> {
        let dens = xi.iter().map(|v| v * v.adjoint()).collect();
        Self::new(alg, dens, tol)
    }

    pub fn densities(&self) -> &[CMat<T>] {
        &self.densities
    }

    pub fn check_shape(&self, alg: &BlockAlgebra) -> Result<()> {
        Element::from_blocks(self.densities.clone()).check_shape(alg)
    }

    fn check_element(&self, x: &Element<T>) -> Result<()> {
        if x.blocks.len() != self.densities.len()
            || x.blocks.iter().zip(&self.densities).any(|(b, r)| b.shape() != r.shape())
        {
            return Err(Error::Shape("element and state have different block shapes".into()));
        }
        Ok(())
    }

    pub fn eval(&self, x: &Element<T>) -> Result<C<T>> {
        self.check_element(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &Element<T>) -> C<T> {
        self.densities
            .iter()
            .zip(&x.blocks)
            .fold(C::new(T::zero(), T::zero()), |acc, (r, b)| acc + (r * b).trace())
    }

    /// `phi(x^* x)`, the squared seminorm `||x||_phi^2`.
    pub fn norm_sq(&self, x: &Element<T>) -> Result<T> {
        self.check_element(x)?;
        Ok(self.norm_sq_unchecked(x))
    }

    pub(crate) fn norm_sq_unchecked(&self, x: &Element<T>) -> T {
        let v = self
            .densities
            .iter()
            .zip(&x.blocks)
            .fold(T::zero(), |acc, (r, b)| acc + (r * b.adjoint() * b).trace().re);
        v.max(T::zero())
    }
}

/// Validation record for a candidate POVM.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PovmDiagnostics<T: Real> {
    pub is_valid: bool,
    /// `max(0, -lambda_min)` over all elements and blocks.
    pub max_negativity: T,
    /// `max(0, lambda_max - 1)` over all elements and blocks.
    pub max_excess: T,
    /// Largest entry of `sum_i a_i - 1`.
    pub sum_residual: T,
    /// Largest entry of `a_i - a_i^*`.
    pub hermiticity_residual: T,
}

/// Checks the POVM conditions at the configured tolerances. Residuals are
/// exact maxima over outputs and blocks.
pub fn validate_povm<T: Real>(
    alg: &BlockAlgebra,
    elements: &[Element<T>],
    tol: &Tolerances,
) -> Result<PovmDiagnostics<T>> {
    if elements.is_empty() {
        return Err(Error::Shape("POVM needs at least one element".into()));
    }
    for (i, a) in elements.iter().enumerate() {
        a.check_shape(alg).map_err(|e| Error::Shape(format!("element {i}: {e}")))?;
    }
    let mut negativity = T::zero();
    let mut excess = T::zero();
    let mut herm = T::zero();
    for a in elements {
        herm = herm.max(a.hermiticity_residual());
        for b in a.blocks() {
            let e = eigh(b)?;
            negativity = negativity.max(-e.min());
            excess = excess.max(e.max() - T::one());
        }
    }
    let sum = Element::sum(elements).expect("non-empty");
    let sum_residual = (&sum - &Element::identity(alg)).max_abs();
    let is_valid = negativity.into_f64() <= tol.psd_tol
        && excess.into_f64() <= tol.psd_tol
        && sum_residual.into_f64() <= tol.cert_tol
        && herm.into_f64() <= tol.cert_tol;
    Ok(PovmDiagnostics {
        is_valid,
        max_negativity: negativity,
        max_excess: excess,
        sum_residual,
        hermiticity_residual: herm,
    })
}

/// A validated POVM; elements are stored symmetrised.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm<T: Real> {
    alg: BlockAlgebra,
    elements: Vec<Element<T>>,
    diagnostics: PovmDiagnostics<T>,
}

impl<T: Real> Povm<T> {
    pub fn new(alg: &BlockAlgebra, elements: Vec<Element<T>>, tol: &Tolerances) -> Result<Self> {
        let diagnostics = validate_povm(alg, &elements, tol)?;
        if !diagnostics.is_valid {
            return Err(Error::Validation(format!(
                "not a POVM: negativity {}, excess {}, sum residual {}, hermiticity residual {}",
                diagnostics.max_negativity,
                diagnostics.max_excess,
                diagnostics.sum_residual,
                diagnostics.hermiticity_residual
            )));
        }
        let elements = elements.iter().map(Element::hermitian_part).collect();
        Ok(Self { alg: alg.clone(), elements, diagnostics })
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.alg
    }

    pub fn n(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Element<T>] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Element<T> {
        &self.elements[i]
    }

    pub fn diagnostics(&self) -> &PovmDiagnostics<T> {
        &self.diagnostics
    }

    /// `max_i ||a_i^2 - a_i||_F`.
    pub fn idempotency_residual(&self) -> T {
        self.elements
            .iter()
            .fold(T::zero(), |acc, a| acc.max((&(a * a) - a).frobenius()))
    }
}

/// A POVM made of projections.
#[derive(Clone, Debug, PartialEq)]
pub struct Pvm<T: Real> {
    povm: Povm<T>,
    idempotency_residual: T,
}

impl<T: Real> Pvm<T> {
    pub fn new(alg: &BlockAlgebra, elements: Vec<Element<T>>, tol: &Tolerances) -> Result<Self> {
        Self::from_povm(Povm::new(alg, elements, tol)?, tol)
    }

    pub fn from_povm(povm: Povm<T>, tol: &Tolerances) -> Result<Self> {
        let idempotency_residual = povm.idempotency_residual();
        if idempotency_residual.into_f64() > tol.cert_tol {
            return Err(Error::Validation(format!(
                "not a PVM: idempotency residual {idempotency_residual}"
            )));
        }
        Ok(Self { povm, idempotency_residual })
    }

    pub fn as_povm(&self) -> &Povm<T> {
        &self.povm
    }

    pub fn into_povm(self) -> Povm<T> {
        self.povm
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        self.povm.algebra()
    }

    pub fn n(&self) -> usize {
        self.povm.n()
    }

    pub fn elements(&self) -> &[Element<T>] {
        self.povm.elements()
    }

    pub fn element(&self, i: usize) -> &Element<T> {
        self.povm.element(i)
    }

    pub fn idempotency_residual(&self) -> T {
        self.idempotency_residual
    }
}

/// `phi(x^* x)`.
pub fn phi_norm_sq<T: Real>(phi: &State<T>, x: &Element<T>) -> Result<T> {
    phi.norm_sq(x)
}

/// `phi(|xy - yx|^2)`.
pub fn commutator_phi_norm_sq<T: Real>(phi: &State<T>, x: &Element<T>, y: &Element<T>) -> Result<T> {
    phi.check_element(x)?;
    phi.check_element(y)?;
    Ok(phi.norm_sq_unchecked(&x.commutator(y)))
}

/// `1 - phi(sum_i a_i^2)`.
pub fn defect<T: Real>(phi: &State<T>, a: &Povm<T>) -> Result<T> {
    let mut s = T::zero();
    for x in a.elements() {
        s += phi.eval(&(x * x))?.re;
    }
    Ok(T::one() - s)
}

/// Central element `(c_1 1_{d_1}, ..., c_K 1_{d_K})`.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterValue<T: Real> {
    pub values: Vec<C<T>>,
}

impl<T: Real> CenterValue<T> {
    pub fn to_element(&self, alg: &BlockAlgebra) -> Element<T> {
        Element::from_blocks(
            alg.dims()
                .iter()
                .zip(&self.values)
                .map(|(&d, &c)| CMat::identity(d, d) * c)
                .collect(),
        )
    }
}

/// Centre-valued trace `E(x)_k = Tr(x_k) / d_k`.
pub fn center_valued_trace<T: Real>(alg: &BlockAlgebra, x: &Element<T>) -> Result<CenterValue<T>> {
    x.check_shape(alg)?;
    Ok(CenterValue {
        values: x
            .blocks()
            .iter()
            .zip(alg.dims())
            .map(|(b, &d)| b.trace() / re(T::lit(d as f64)))
            .collect(),
    })
}

/// One eigenvalue cluster: representative value and an orthonormal basis of
/// the clustered eigenspace (columns).
#[derive(Clone, Debug)]
pub struct Cluster<T: Real> {
    pub value: T,
    pub basis: CMat<T>,
}

/// Per-block eigenvalue clusters of a Hermitian element, sorted by
/// decreasing representative value.
#[derive(Clone, Debug)]
pub struct SpectralClusters<T: Real> {
    pub blocks: Vec<Vec<Cluster<T>>>,
}

impl<T: Real> SpectralClusters<T> {
    /// `sum_clusters value * B B^H` per block.
    pub fn reconstruct(&self) -> Element<T> {
        Element::from_blocks(
            self.blocks
                .iter()
                .map(|cl| {
                    let d = cl.first().map(|c| c.basis.nrows()).unwrap_or(0);
                    cl.iter().fold(CMat::zeros(d, d), |acc, c| acc + &c.basis * c.basis.adjoint() * re(c.value))
                })
                .collect(),
        )
    }
}

/// Groups the sorted spectrum of each block greedily: a new cluster starts
/// whenever the gap to the previous eigenvalue exceeds `cluster_tol`. The
/// representative value is the cluster mean.
pub fn spectral_clusters<T: Real>(h: &Element<T>, cluster_tol: f64, herm_tol: f64) -> Result<SpectralClusters<T>> {
    let herm = h.hermiticity_residual();
    if herm.into_f64() > herm_tol {
        return Err(Error::Validation(format!("spectral_clusters: input not Hermitian (residual {herm})")));
    }
    let gap = T::lit(cluster_tol);
    let mut blocks = Vec::with_capacity(h.blocks().len());
    for b in h.blocks() {
        let e = eigh(b)?;
        let d = e.values.len();
        let mut clusters = Vec::new();
        let mut start = 0;
        for j in 1..=d {
            if j == d || e.values[j - 1] - e.values[j] > gap {
                let len = j - start;
                let mean = e.values[start..j].iter().fold(T::zero(), |a, &v| a + v) / T::lit(len as f64);
                clusters.push(Cluster { value: mean, basis: e.vectors.columns(start, len).into_owned() });
                start = j;
            }
        }
        blocks.push(clusters);
    }
    Ok(SpectralClusters { blocks })
}
