//! Rounding a POVM to a PVM in a finite block algebra.
//!
//! Three stages:
//!
//! 1. [`select_projections`] picks projections `q_i` commuting with `a_i`
//!    with `sum_i E(q_i) = 1` that maximise `phi(sum_i q_i a_i)`.
//! 2. The block column `x = (q_1 a_1^{1/2}, ..., q_n a_n^{1/2})` is polar
//!    decomposed with an isometry `u` whose range is exactly
//!    `diag(q_1, ..., q_n)` ([`complete_polar`]).
//! 3. `p_i = u^* diag(0, .., q_i, .., 0) u` is the output PVM.
//!
//! The error `sum_i phi(|a_i - p_i|^2)` is at most nine times the defect
//! `1 - phi(sum_i a_i^2)`; [`OrthReport`] carries the residuals that certify
//! each step.

use std::cmp::Ordering;

use log::warn;
use serde::Serialize;

use crate::algebra::{defect, spectral_clusters, BlockAlgebra, Element, Povm, Pvm, State};
use crate::error::{Error, Result};
use crate::linalg::{complement_basis, frobenius, hermitian_part, projector_basis, projector_rank, sqrt_clipped, svd};
use crate::scalar::{re, CMat, CVec, Real};
use crate::tol::Tolerances;

/// Output of the projection selection.
#[derive(Clone, Debug)]
pub struct SelectionResult<T: Real> {
    /// Projections `q_i`, each commuting with `a_i`.
    pub q: Vec<Element<T>>,
    /// `Re phi(sum_i q_i a_i)`, evaluated directly.
    pub value: T,
    /// Sum of the selected item scores (the linear program optimum).
    pub lp_value: T,
    /// `ranks[i][k]`: rank of `q_i` in block `k`.
    pub ranks: Vec<Vec<usize>>,
    /// `max_i ||q_i a_i - a_i q_i||_F`.
    pub commutation_residual: T,
    /// Number of scores below `-cert_tol` that were clipped to zero.
    pub clipped_scores: usize,
}

impl<T: Real> SelectionResult<T> {
    /// Per block `k`, `sum_i rank(q_i)`.
    pub fn rank_sums(&self, num_blocks: usize) -> Vec<usize> {
        (0..num_blocks).map(|k| self.ranks.iter().map(|r| r[k]).sum()).collect()
    }
}

struct Item<T: Real> {
    output: usize,
    lambda: T,
    index: usize,
    score: T,
    vector: CVec<T>,
}

fn item_order<T: Real>(a: &Item<T>, b: &Item<T>) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then(a.output.cmp(&b.output))
        .then(b.lambda.partial_cmp(&a.lambda).unwrap_or(Ordering::Equal))
        .then(a.index.cmp(&b.index))
}

fn check_inputs<T: Real>(alg: &BlockAlgebra, phi: &State<T>, a: &Povm<T>, tol: &Tolerances) -> Result<()> {
    tol.validate()?;
    phi.check_shape(alg)?;
    if a.algebra() != alg {
        return Err(Error::Shape(format!("POVM lives in {:?}, expected {:?}", a.algebra().dims(), alg.dims())));
    }
    Ok(())
}

/// Maximises `phi(sum_i x_i a_i)` over `0 <= x_i <= 1`, `[x_i, a_i] = 0`,
/// `sum_i E(x_i) = 1`, returning an optimal vertex made of projections.
///
/// Within block `k`, an `x_i` commuting with `a_i` is block diagonal over
/// the eigenspaces of `a_i`. On an eigenspace with value `lambda` and basis
/// `B` the objective is `Tr(lambda B^* rho_k B y)`, so the eigenvectors of
/// `lambda B^* rho_k B` are independent `[0, 1]` items with their
/// eigenvalue as score. The only coupling is the rank budget `d_k`, hence the
/// optimum takes the `d_k` best items.
pub fn select_projections<T: Real>(
    alg: &BlockAlgebra,
    phi: &State<T>,
    a: &Povm<T>,
    tol: &Tolerances,
) -> Result<SelectionResult<T>> {
    check_inputs(alg, phi, a, tol)?;
    let n = a.n();
    let mut q = vec![Element::zeros(alg); n];
    let mut ranks = vec![vec![0usize; alg.num_blocks()]; n];
    let mut lp_value = T::zero();
    let mut clipped = 0usize;
    let neg_tol = T::lit(-tol.cert_tol);

    let clusters = a
        .elements()
        .iter()
        .map(|x| spectral_clusters(x, tol.cluster_gap(1.0), tol.cert_tol))
        .collect::<Result<Vec<_>>>()?;

    for (k, &d) in alg.dims().iter().enumerate() {
        let rho = &phi.densities()[k];
        let mut pool: Vec<Item<T>> = Vec::with_capacity(n * d);
        for (i, cl) in clusters.iter().enumerate() {
            let mut index = 0;
            for c in &cl.blocks[k] {
                let compressed = c.basis.adjoint() * rho * &c.basis * re(c.value);
                let e = crate::linalg::eigh(&compressed)?;
                for (j, &s) in e.values.iter().enumerate() {
                    let mut score = s;
                    if score < T::zero() {
                        if score < neg_tol {
                            clipped += 1;
                            warn!("clipping score {score} of output {i} in block {k} to 0");
                        }
                        score = T::zero();
                    }
                    pool.push(Item {
                        output: i,
                        lambda: c.value,
                        index,
                        score,
                        vector: &c.basis * e.vectors.column(j),
                    });
                    index += 1;
                }
            }
        }
        debug_assert_eq!(pool.len(), n * d);
        pool.sort_by(item_order);
        for item in pool.iter().take(d) {
            let qi = q[item.output].block_mut(k);
            *qi += &item.vector * item.vector.adjoint();
            ranks[item.output][k] += 1;
            lp_value += item.score;
        }
    }

    let q: Vec<Element<T>> = q.iter().map(Element::hermitian_part).collect();
    let mut value = T::zero();
    let mut commutation_residual = T::zero();
    for (qi, ai) in q.iter().zip(a.elements()) {
        value += phi.eval(&(qi * ai))?.re;
        commutation_residual = commutation_residual.max(qi.commutator(ai).frobenius());
    }
    Ok(SelectionResult { q, value, lp_value, ranks, commutation_residual, clipped_scores: clipped })
}

/// A map `H -> H^n` stored blockwise: block `k` is `(n d_k) x d_k`, with
/// rows `i d_k .. (i+1) d_k` holding the `i`-th component.
#[derive(Clone, Debug, PartialEq)]
pub struct StackedColumn<T: Real> {
    pub n: usize,
    pub blocks: Vec<CMat<T>>,
}

impl<T: Real> StackedColumn<T> {
    /// Stacks `(x_1, ..., x_n)` with all `x_i` in the same algebra.
    pub fn stack(alg: &BlockAlgebra, parts: &[Element<T>]) -> Self {
        let n = parts.len();
        let blocks = alg
            .dims()
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                let mut m = CMat::zeros(n * d, d);
                for (i, p) in parts.iter().enumerate() {
                    m.view_mut((i * d, 0), (d, d)).copy_from(p.block(k));
                }
                m
            })
            .collect();
        Self { n, blocks }
    }

    /// The `i`-th component in block `k`.
    pub fn slot(&self, i: usize, k: usize) -> CMat<T> {
        let d = self.blocks[k].ncols();
        self.blocks[k].view((i * d, 0), (d, d)).into_owned()
    }

    /// `x^* x`, an element of the base algebra.
    pub fn gram(&self) -> Element<T> {
        Element::from_blocks(self.blocks.iter().map(|b| hermitian_part(&(b.adjoint() * b))).collect())
    }

    /// `x^* diag(0, .., t, .., 0) x` with `t` in slot `i`.
    pub fn compress(&self, i: usize, t: &Element<T>) -> Element<T> {
        Element::from_blocks(
            (0..self.blocks.len())
                .map(|k| {
                    let s = self.slot(i, k);
                    hermitian_part(&(s.adjoint() * t.block(k) * &s))
                })
                .collect(),
        )
    }
}

/// Polar part of a block column together with the numerical rank used.
#[derive(Clone, Debug)]
pub struct PolarCompletion<T: Real> {
    pub u: StackedColumn<T>,
    /// Numerical rank of `x` per block.
    pub ranks: Vec<usize>,
    /// `max_k ||x_k - Q_k x_k||_F`, distance of `x` from the target range.
    pub range_residual: T,
}

/// Polar decomposition `x = u |x|` with `u^* u = 1` and
/// `u u^* = diag(q_1, ..., q_n)`.
///
/// Per block, the target range gets a deterministic orthonormal basis `Y`;
/// `x = Y (Y^* x)` reduces everything to a square `d x d` matrix whose SVD
/// gives the polar part `U_r V_r^*` on the numerical support. The kernel of
/// `x` is paired with the unused part of the target range, both bases built
/// by pivoted Gram-Schmidt and matched in order.
pub fn complete_polar<T: Real>(
    alg: &BlockAlgebra,
    x: &StackedColumn<T>,
    targets: &[Element<T>],
    tol: &Tolerances,
) -> Result<PolarCompletion<T>> {
    let n = targets.len();
    if x.n != n || x.blocks.len() != alg.num_blocks() {
        return Err(Error::Shape(format!(
            "block column has {} components over {} blocks; expected {n} over {}",
            x.n,
            x.blocks.len(),
            alg.num_blocks()
        )));
    }
    for t in targets {
        t.check_shape(alg)?;
    }
    let mut blocks = Vec::with_capacity(alg.num_blocks());
    let mut ranks = Vec::with_capacity(alg.num_blocks());
    let mut range_residual = T::zero();
    for (k, &d) in alg.dims().iter().enumerate() {
        if x.blocks[k].shape() != (n * d, d) {
            return Err(Error::Shape(format!("block {k} of x has shape {:?}, expected ({}, {d})", x.blocks[k].shape(), n * d)));
        }
        let target_ranks: Vec<usize> = targets.iter().map(|t| projector_rank(t.block(k))).collect();
        let total: usize = target_ranks.iter().sum();
        if total != d {
            return Err(Error::Precondition(format!(
                "block {k}: target projections have total rank {total}, but the domain has dimension {d}"
            )));
        }
        for (i, t) in targets.iter().enumerate() {
            let b = t.block(k);
            let idem = frobenius(&(b * b - b));
            if idem.into_f64() > tol.cert_tol.max(tol.psd_tol) * 10.0 {
                return Err(Error::Precondition(format!("block {k}: target {i} is not a projection (residual {idem})")));
            }
        }
        let mut y = CMat::zeros(n * d, d);
        let mut col = 0;
        for (i, t) in targets.iter().enumerate() {
            let basis = projector_basis(&hermitian_part(t.block(k)), target_ranks[i]);
            y.view_mut((i * d, col), (d, target_ranks[i])).copy_from(&basis);
            col += target_ranks[i];
        }
        let xk = &x.blocks[k];
        let reduced = y.adjoint() * xk;
        let res = frobenius(&(xk - &y * &reduced));
        range_residual = range_residual.max(res);
        let scale = frobenius(xk).max(T::one());
        if res.into_f64() > tol.cert_tol * scale.into_f64() {
            return Err(Error::Precondition(format!(
                "block {k}: x leaves the target range (residual {res})"
            )));
        }

        let s = svd(&reduced)?;
        let smax = s.sigma.first().copied().unwrap_or_else(T::zero);
        let cutoff = smax * T::lit(tol.rank_tol);
        let r = s.sigma.iter().filter(|&&v| smax > T::zero() && v > cutoff).count();
        let ur = s.u.columns(0, r).into_owned();
        let vr = s.v.columns(0, r).into_owned();
        let mut inner = &ur * vr.adjoint();
        if r < d {
            let v_perp = complement_basis(&vr);
            let w_perp = complement_basis(&ur);
            inner += w_perp * v_perp.adjoint();
        }
        blocks.push(&y * inner);
        ranks.push(r);
    }
    Ok(PolarCompletion { u: StackedColumn { n, blocks }, ranks, range_residual })
}

/// Residuals backing the bound `error <= 9 defect`.
#[derive(Clone, Debug, Serialize)]
pub struct OrthCertificates<T: Real> {
    /// `max_i ||p_i^2 - p_i||_F`.
    pub idempotency: T,
    /// Largest entry of `sum_i p_i - 1`.
    pub sum_residual: T,
    /// `||u^* u - 1||_F` (max over blocks).
    pub isometry_residual: T,
    /// `||u u^* - diag(q_i)||_F` (max over blocks).
    pub range_residual: T,
    /// `max_i || |x| p_i |x| - q_i a_i ||_F`.
    pub midpoint_residual: T,
    /// Largest eigenvalue clip applied before taking `a_i^{1/2}`.
    pub sqrt_clip: T,
    /// `max_i ||[q_i, a_i]||_F`.
    pub selection_commutation: T,
    /// `sum_i phi((1 - q_i) a_i^2)`.
    pub term_first: T,
    /// `sum_i ||(1 - |x|) p_i |x|||_phi^2`.
    pub term_second: T,
    /// `sum_i phi(q_i (a_i - a_i^2))`, the bound used for the second term.
    pub term_second_bound: T,
    /// `phi((1 - |x|)^2)`.
    pub term_third: T,
}

#[derive(Clone, Debug)]
pub struct OrthReport<T: Real> {
    /// `1 - phi(sum_i a_i^2)`.
    pub defect: T,
    pub pvm: Pvm<T>,
    /// `sum_i phi(|a_i - p_i|^2)`.
    pub error: T,
    /// `error / defect`, absent when the defect is not positive.
    pub ratio: Option<T>,
    pub selection: SelectionResult<T>,
    pub certificates: OrthCertificates<T>,
}

impl<T: Real> OrthReport<T> {
    /// `phi(sum_i a_i^2)`.
    pub fn sum_of_squares(&self) -> T {
        T::one() - self.defect
    }

    /// `error <= 9 defect + slack`.
    pub fn main_bound_holds(&self, slack: f64) -> bool {
        self.error <= T::lit(9.0) * self.defect + T::lit(slack)
    }

    /// `phi(sum_i a_i^2) >= (1 - sqrt(error))^2 - slack`.
    pub fn converse_holds(&self, slack: f64) -> bool {
        let s = T::one() - self.error.max(T::zero()).sqrt();
        self.sum_of_squares() >= s * s - T::lit(slack)
    }
}

/// Rounds the POVM `a` to a PVM and certifies the result.
pub fn orthogonalize<T: Real>(alg: &BlockAlgebra, phi: &State<T>, a: &Povm<T>, tol: &Tolerances) -> Result<OrthReport<T>> {
    check_inputs(alg, phi, a, tol)?;
    let eps = defect(phi, a)?;
    let selection = select_projections(alg, phi, a, tol)?;

    let mut sqrt_clip = T::zero();
    let mut parts = Vec::with_capacity(a.n());
    for (ai, qi) in a.elements().iter().zip(&selection.q) {
        let mut roots = Vec::with_capacity(alg.num_blocks());
        for b in ai.blocks() {
            let (r, clip) = sqrt_clipped(b, T::zero(), T::one())?;
            sqrt_clip = sqrt_clip.max(clip);
            roots.push(r);
        }
        parts.push(qi * &Element::from_blocks(roots));
    }
    let x = StackedColumn::stack(alg, &parts);
    let polar = complete_polar(alg, &x, &selection.q, tol)?;
    let u = &polar.u;

    let p: Vec<Element<T>> = selection.q.iter().enumerate().map(|(i, qi)| u.compress(i, qi)).collect();
    let pvm = Pvm::new(alg, p, tol)?;

    let one = Element::identity(alg);
    let mut isometry_residual = T::zero();
    let mut range_residual = T::zero();
    for (k, ub) in u.blocks.iter().enumerate() {
        let d = alg.dims()[k];
        isometry_residual = isometry_residual.max(frobenius(&(ub.adjoint() * ub - CMat::identity(d, d))));
        let mut target = CMat::zeros(a.n() * d, a.n() * d);
        for (i, qi) in selection.q.iter().enumerate() {
            target.view_mut((i * d, i * d), (d, d)).copy_from(qi.block(k));
        }
        range_residual = range_residual.max(frobenius(&(ub * ub.adjoint() - target)));
    }

    let abs_x = Element::from_blocks(
        x.gram()
            .blocks()
            .iter()
            .map(|g| sqrt_clipped(g, T::zero(), T::one()).map(|r| r.0))
            .collect::<Result<Vec<_>>>()?,
    );
    let one_minus_abs = &one - &abs_x;
    let mut midpoint = T::zero();
    let mut error = T::zero();
    let mut term_first = T::zero();
    let mut term_second = T::zero();
    let mut term_second_bound = T::zero();
    for ((ai, pi), qi) in a.elements().iter().zip(pvm.elements()).zip(&selection.q) {
        let qa = qi * ai;
        midpoint = midpoint.max((&(&(&abs_x * pi) * &abs_x) - &qa).frobenius());
        error += phi.norm_sq(&(ai - pi))?;
        let a2 = ai * ai;
        term_first += phi.eval(&(&(&one - qi) * &a2))?.re;
        term_second += phi.norm_sq(&(&(&one_minus_abs * pi) * &abs_x))?;
        term_second_bound += phi.eval(&(qi * &(ai - &a2)))?.re;
    }
    let term_third = phi.norm_sq(&one_minus_abs)?;

    let sum = Element::sum(pvm.elements()).expect("non-empty");
    let certificates = OrthCertificates {
        idempotency: pvm.idempotency_residual(),
        sum_residual: (&sum - &one).max_abs(),
        isometry_residual,
        range_residual,
        midpoint_residual: midpoint,
        sqrt_clip,
        selection_commutation: selection.commutation_residual,
        term_first,
        term_second,
        term_second_bound,
        term_third,
    };
    let ratio = if eps > T::zero() { Some(error / eps) } else { None };
    Ok(OrthReport { defect: eps, pvm, error, ratio, selection, certificates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Exhaustive minimum of `sum_i phi(|a_i - p_i|^2)` over all PVMs of an
    /// abelian algebra `C^m` (each coordinate assigned to one output).
    fn abelian_min_error(a: &[Vec<f64>], weights: &[f64]) -> f64 {
        let n = a.len();
        let m = weights.len();
        let mut best = f64::INFINITY;
        for code in 0..n.pow(m as u32) {
            let mut c = code;
            let mut err = 0.0;
            for j in 0..m {
                let owner = c % n;
                c /= n;
                for (i, ai) in a.iter().enumerate() {
                    let p = if i == owner { 1.0 } else { 0.0 };
                    err += weights[j] * (ai[j] - p).powi(2);
                }
            }
            best = best.min(err);
        }
        best
    }

    #[test]
    fn pvm_input_is_fixed() {
        let alg = BlockAlgebra::full(2).unwrap();
        let a = Povm::new(
            &alg,
            vec![Element::<f64>::from_diagonals(&[vec![1.0, 0.0]]), Element::from_diagonals(&[vec![0.0, 1.0]])],
            &tol(),
        )
        .unwrap();
        let phi = State::normalized_trace(&alg);
        let sel = select_projections(&alg, &phi, &a, &tol()).unwrap();
        assert!((sel.value - 1.0).abs() < 1e-15);
        assert_eq!(sel.ranks, vec![vec![1], vec![1]]);
        for (q, x) in sel.q.iter().zip(a.elements()) {
            assert!((q - x).frobenius() < 1e-14);
        }
        let rep = orthogonalize(&alg, &phi, &a, &tol()).unwrap();
        assert!(rep.error.abs() < 1e-14);
        assert!(rep.ratio.is_none());
        for (p, x) in rep.pvm.elements().iter().zip(a.elements()) {
            assert!((p - x).frobenius() < 1e-14);
        }
    }

    #[test]
    fn linfty2_selection_and_rounding() {
        let (alg, a, phi) = gen::linfty2_family::<f64>(0.1, &tol()).unwrap();
        let sel = select_projections(&alg, &phi, &a, &tol()).unwrap();
        // enumerated by hand: scores 0.9 / 0 in block 0, 0.05 / 0.05 in block 1
        assert!((sel.value - 0.95).abs() < 1e-15);
        assert!((sel.lp_value - 0.95).abs() < 1e-15);
        assert_eq!(sel.ranks, vec![vec![1, 1], vec![0, 0]]);
        let rep = orthogonalize(&alg, &phi, &a, &tol()).unwrap();
        assert!((rep.defect - 0.05).abs() < 1e-15);
        assert!((rep.error - 0.05).abs() < 1e-12);
        assert!((rep.ratio.unwrap() - 1.0).abs() < 1e-10);
        let oracle = abelian_min_error(&[vec![1.0, 0.5], vec![0.0, 0.5]], &[0.9, 0.1]);
        assert!((oracle - 0.05).abs() < 1e-15);
        assert!((rep.error - oracle).abs() < 1e-10);
    }

    #[test]
    fn counterexample_selection_splits() {
        for delta in [0.001, 0.01] {
            let (alg, a, phi) = gen::paper_counterexample::<f64>(delta, &tol()).unwrap();
            let eps = defect(&phi, &a).unwrap();
            assert!(eps <= 6.0 * delta);
            let sel = select_projections(&alg, &phi, &a, &tol()).unwrap();
            assert!(sel.value >= 1.0 - eps - 1e-9);
            let nonzero = sel.q.iter().filter(|q| q.frobenius() > 0.5).count();
            assert!(nonzero >= 2);
            let rep = orthogonalize(&alg, &phi, &a, &tol()).unwrap();
            assert!(rep.main_bound_holds(1e-12));
        }
    }

    #[test]
    fn polar_examples() {
        let t = tol();
        let alg = BlockAlgebra::full(2).unwrap();
        let one = Element::<f64>::identity(&alg);
        // x = diag(0.6, 0): the kernel e2 pairs with e2
        let x = StackedColumn::stack(&alg, &[Element::from_diagonals(&[vec![0.6, 0.0]])]);
        let u = complete_polar(&alg, &x, &[one.clone()], &t).unwrap();
        assert_eq!(u.ranks, vec![1]);
        assert!(frobenius(&(&u.u.blocks[0] - CMat::identity(2, 2))) < 1e-15);

        // unitary x returns itself
        let s = 0.5f64.sqrt();
        let rot = Element::from_real_rows(&[vec![vec![s, -s], vec![s, s]]]);
        let u = complete_polar(&alg, &StackedColumn::stack(&alg, &[rot.clone()]), &[one.clone()], &t).unwrap();
        assert!(frobenius(&(&u.u.blocks[0] - rot.block(0))) < 1e-14);

        // zero on a one-dimensional block
        let c1 = BlockAlgebra::full(1).unwrap();
        let u = complete_polar(&c1, &StackedColumn::stack(&c1, &[Element::<f64>::zeros(&c1)]), &[Element::identity(&c1)], &t).unwrap();
        assert!((u.u.blocks[0][(0, 0)].re - 1.0).abs() < 1e-15);

        // rank sum violation names the block
        let bad = complete_polar(&alg, &x, &[Element::from_diagonals(&[vec![1.0, 0.0]])], &t);
        match bad {
            Err(Error::Precondition(msg)) => assert!(msg.contains("block 0")),
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn random_instances_satisfy_bounds() {
        let t = tol();
        for seed in 0..40u64 {
            let dims = vec![1 + (seed as usize % 4), 1 + (seed as usize / 4) % 3];
            let alg = BlockAlgebra::new(dims).unwrap();
            let n = 1 + seed as usize % 5;
            let a = gen::random_povm_near_pvm::<f64>(seed, &alg, n, 0.2, &t).unwrap();
            let phi = gen::random_state::<f64>(seed + 1000, &alg, if seed % 3 == 0 { Some(1) } else { None }, &t).unwrap();
            let rep = orthogonalize(&alg, &phi, &a, &t).unwrap();
            assert!(rep.main_bound_holds(1e-7), "seed {seed}: error {} defect {}", rep.error, rep.defect);
            assert!(rep.converse_holds(1e-7));
            let c = &rep.certificates;
            assert!(c.midpoint_residual < 1e-7, "seed {seed}: midpoint {}", c.midpoint_residual);
            assert!(c.term_first <= rep.defect + 1e-7);
            assert!(c.term_second <= c.term_second_bound + 1e-7);
            assert!(c.term_second_bound <= rep.defect + 1e-7);
            assert!(c.term_third <= rep.defect + 1e-7);
            assert!(c.idempotency < 1e-8);
            assert!(rep.selection.value >= 1.0 - rep.defect - 1e-9);
            assert_eq!(rep.selection.rank_sums(alg.num_blocks()), alg.dims().to_vec());
        }
    }

    #[test]
    fn single_precision_smoke() {
        let mut t = tol();
        t.cert_tol = 1e-4;
        t.psd_tol = 1e-4;
        t.cluster_tol = 1e-5;
        let (alg, a, phi) = gen::linfty2_family::<f32>(0.1, &t).unwrap();
        let rep = orthogonalize(&alg, &phi, &a, &t).unwrap();
        assert!((rep.error - 0.05).abs() < 1e-5);
    }
}
