//! Repairing almost-commuting PVM pairs.
//!
//! Given PVMs `p` and `q` whose commutators are small in `phi`-seminorm, the
//! POVM `a_i = sum_j q_j p_i q_j` lives in the commutant of `{q_j}`, which is
//! itself a direct sum of full matrix blocks (one per range of `q_j` inside
//! each ambient block). Rounding `a` there gives a PVM commuting with `q`.

use serde::Serialize;

use crate::algebra::{commutator_phi_norm_sq, BlockAlgebra, Element, Povm, Pvm, State};
use crate::error::{Error, Result};
use crate::linalg::{eigh, frobenius, hermitian_part, projector_basis};
use crate::orthogonalizer::{orthogonalize, OrthReport};
use crate::scalar::{CMat, Real};
use crate::tol::Tolerances;

/// `sum_{i,j} ||[p_i, q_j]||_phi^2`.
pub fn commutation_defect<T: Real>(phi: &State<T>, p: &Pvm<T>, q: &Pvm<T>) -> Result<T> {
    if p.algebra() != q.algebra() {
        return Err(Error::Shape("PVMs live on different algebras".into()));
    }
    let mut total = T::zero();
    for pi in p.elements() {
        for qj in q.elements() {
            total += commutator_phi_norm_sq(phi, pi, qj)?;
        }
    }
    Ok(total)
}

/// The commutant `(+)_{k,j} M_{rank q_j|_k}` of a PVM `q`, with orthonormal
/// range bases for every non-zero `q_j` block.
#[derive(Clone, Debug)]
pub struct CommutantAlgebra<T: Real> {
    pub algebra: BlockAlgebra,
    /// `(ambient block, output index)` of every sub block.
    pub origin: Vec<(usize, usize)>,
    /// Range basis of each sub block, `d_k x rank`.
    pub bases: Vec<CMat<T>>,
}

impl<T: Real> CommutantAlgebra<T> {
    /// Builds range bases from a single eigendecomposition of
    /// `sum_j (j + 1) q_j` so that bases of different outputs are exactly
    /// orthogonal.
    pub fn from_pvm(q: &Pvm<T>, tol: &Tolerances) -> Result<Self> {
        let alg = q.algebra();
        let mut dims = Vec::new();
        let mut origin = Vec::new();
        let mut bases = Vec::new();
        for (k, &d) in alg.dims().iter().enumerate() {
            let mut h = CMat::<T>::zeros(d, d);
            for (j, qj) in q.elements().iter().enumerate() {
                h += qj.block(k) * crate::scalar::re(T::lit((j + 1) as f64));
            }
            let e = eigh(&h)?;
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); q.n()];
            for (col, &v) in e.values.iter().enumerate() {
                let label = v.into_f64().round();
                if (v.into_f64() - label).abs() > 0.5 - tol.psd_tol.max(1e-12) || label < 1.0 || label > q.n() as f64 {
                    return Err(Error::Precondition(format!(
                        "block {k}: q is not a PVM (label eigenvalue {v})"
                    )));
                }
                groups[label as usize - 1].push(col);
            }
            for (j, cols) in groups.iter().enumerate() {
                if cols.is_empty() {
                    continue;
                }
                let raw = CMat::from_fn(d, cols.len(), |r, c| e.vectors[(r, cols[c])]);
                let proj = hermitian_part(&(&raw * raw.adjoint()));
                let b = projector_basis(&proj, cols.len());
                // pivoted Gram-Schmidt on an exact projector keeps the span
                let drift = frobenius(&(&b * b.adjoint() - &proj));
                if drift.into_f64() > 1e-8 {
                    return Err(Error::Numerical(format!("block {k}, output {j}: range basis drift {drift}")));
                }
                dims.push(cols.len());
                origin.push((k, j));
                bases.push(b);
            }
        }
        Ok(Self { algebra: BlockAlgebra::new(dims)?, origin, bases })
    }

    /// `x -> (B_s^* x B_s)_s`, i.e. the commutant coordinates of `sum_j q_j x q_j`.
    pub fn compress(&self, x: &Element<T>) -> Element<T> {
        Element::from_blocks(
            self.origin
                .iter()
                .zip(&self.bases)
                .map(|(&(k, _), b)| hermitian_part(&(b.adjoint() * x.block(k) * b)))
                .collect(),
        )
    }

    /// `y -> sum_s B_s y_s B_s^*` in the ambient algebra.
    pub fn embed(&self, ambient: &BlockAlgebra, y: &Element<T>) -> Element<T> {
        let mut out = Element::zeros(ambient);
        for (s, (&(k, _), b)) in self.origin.iter().zip(&self.bases).enumerate() {
            *out.block_mut(k) += b * y.block(s) * b.adjoint();
        }
        out.hermitian_part()
    }

    /// `B_s^* rho_k B_s`; total trace is preserved because the `B_s` of one
    /// ambient block form a unitary.
    pub fn restrict_state(&self, phi: &State<T>, tol: &Tolerances) -> Result<State<T>> {
        let dens = self
            .origin
            .iter()
            .zip(&self.bases)
            .map(|(&(k, _), b)| hermitian_part(&(b.adjoint() * &phi.densities()[k] * b)))
            .collect();
        State::new(&self.algebra, dens, tol)
    }
}

/// `a_i = sum_j q_j p_i q_j` in commutant coordinates.
#[derive(Clone, Debug)]
pub struct CompressedPovm<T: Real> {
    pub commutant: CommutantAlgebra<T>,
    pub a: Povm<T>,
    pub phi_restricted: State<T>,
    pub epsilon_c: T,
    /// `sum_i ||p_i - a_i||_phi^2`.
    pub distance: T,
    /// `1 - phi(sum_i a_i^2)`.
    pub defect: T,
    /// `|epsilon_c - distance - defect|`.
    pub identity_residual: T,
    /// `sum_i Im phi(a_i p_i)`. Does not enter the identity; zero when `phi`
    /// is tracial, generally non-zero otherwise.
    pub imaginary_part: T,
}

pub fn compress_povm<T: Real>(p: &Pvm<T>, q: &Pvm<T>, phi: &State<T>, tol: &Tolerances) -> Result<CompressedPovm<T>> {
    let alg = p.algebra();
    if q.algebra() != alg {
        return Err(Error::Shape("PVMs live on different algebras".into()));
    }
    phi.check_shape(alg)?;
    let commutant = CommutantAlgebra::from_pvm(q, tol)?;
    let compressed: Vec<Element<T>> = p.elements().iter().map(|x| commutant.compress(x)).collect();
    let a = Povm::new(&commutant.algebra, compressed, tol)?;
    let phi_restricted = commutant.restrict_state(phi, tol)?;

    let epsilon_c = commutation_defect(phi, p, q)?;
    let mut distance = T::zero();
    let mut squares = T::zero();
    let mut imaginary_part = T::zero();
    for (pi, ai) in p.elements().iter().zip(a.elements()) {
        let amb = commutant.embed(alg, ai);
        distance += phi.norm_sq(&(pi - &amb))?;
        squares += phi.eval(&(&amb * &amb))?.re;
        imaginary_part += phi.eval(&(&amb * pi))?.im;
    }
    let defect = T::one() - squares;
    Ok(CompressedPovm {
        commutant,
        a,
        phi_restricted,
        epsilon_c,
        distance,
        defect,
        identity_residual: (epsilon_c - distance - defect).abs(),
        imaginary_part,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RepairCertificates<T: Real> {
    /// `max_{i,j} ||[p'_i, q_j]||_F`.
    pub commutation_residual: T,
    pub identity_residual: T,
    pub imaginary_part: T,
}

#[derive(Clone, Debug)]
pub struct RepairReport<T: Real> {
    pub epsilon_c: T,
    /// Rounding of the compressed POVM inside the commutant.
    pub inner: OrthReport<T>,
    pub pvm_repaired: Pvm<T>,
    /// `sum_i ||p_i - p'_i||_phi^2`.
    pub error: T,
    pub certificates: RepairCertificates<T>,
}

impl<T: Real> RepairReport<T> {
    /// `error <= 10 epsilon_c + slack`.
    pub fn bound_holds(&self, slack: f64) -> bool {
        self.error <= T::lit(10.0) * self.epsilon_c + T::lit(slack)
    }
}

/// Replaces `p` by a PVM that commutes exactly with `q`.
pub fn repair<T: Real>(phi: &State<T>, p: &Pvm<T>, q: &Pvm<T>, tol: &Tolerances) -> Result<RepairReport<T>> {
    tol.validate()?;
    let alg = p.algebra();
    let c = compress_povm(p, q, phi, tol)?;
    let inner = orthogonalize(&c.commutant.algebra, &c.phi_restricted, &c.a, tol)?;
    let repaired: Vec<Element<T>> = inner.pvm.elements().iter().map(|y| c.commutant.embed(alg, y)).collect();
    let pvm_repaired = Pvm::new(alg, repaired, tol)?;
    let mut error = T::zero();
    let mut commutation_residual = T::zero();
    for (pi, ri) in p.elements().iter().zip(pvm_repaired.elements()) {
        error += phi.norm_sq(&(pi - ri))?;
        for qj in q.elements() {
            commutation_residual = commutation_residual.max(ri.commutator(qj).frobenius());
        }
    }
    Ok(RepairReport {
        epsilon_c: c.epsilon_c,
        inner,
        pvm_repaired,
        error,
        certificates: RepairCertificates {
            commutation_residual,
            identity_residual: c.identity_residual,
            imaginary_part: c.imaginary_part,
        },
    })
}
