//! Rounding inside the algebra generated by the POVM, so that the output
//! commutes with every operator that commutes with all `a_i`.
//!
//! The generated algebra `N` is recovered from its commutant: a generic
//! Hermitian element of `N'` splits each ambient block into irreducible
//! `N`-modules, and the intertwiners in `N'` identify equivalent copies. In
//! the resulting basis `W^* a_i W = (+)_k (a_i)_k (x) 1_{m_k}`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::algebra::{BlockAlgebra, Element, Povm, Pvm, State};
use crate::error::{Error, Result};
use crate::gen;
use crate::linalg::{eigh, frobenius, hermitian_part, projector_basis, svd};
use crate::orthogonalizer::{orthogonalize, OrthReport};
use crate::scalar::{re, CMat, Real, C};
use crate::tol::Tolerances;

/// `N ~= (+)_k M_{d_k}` acting with multiplicity `m_k`.
#[derive(Clone, Debug)]
pub struct GeneratedAlgebra<T: Real> {
    /// `(+)_k M_{d_k}` over all ambient blocks.
    pub sub: BlockAlgebra,
    /// Multiplicity `m_k` of each sub block.
    pub multiplicities: Vec<usize>,
    /// Ambient block containing each sub block.
    pub ambient_block: Vec<usize>,
    /// Unitary change of basis per ambient block; columns ordered so that
    /// `W^* x W = (+)_k x_k (x) 1_{m_k}`.
    pub change_of_basis: Vec<CMat<T>>,
    /// Basis of the commutant of the family inside the ambient algebra.
    pub commutant_basis: Vec<Element<T>>,
    /// `max_i ||W^* a_i W - (+)_k (a_i)_k (x) 1_{m_k}||_F`.
    pub residual: T,
    /// Number of generic elements tried before the decomposition verified.
    pub attempts: usize,
    /// `copies[s][l]`: isometry onto the `l`-th copy of sub block `s`.
    copies: Vec<Vec<CMat<T>>>,
}

impl<T: Real> GeneratedAlgebra<T> {
    /// Sub-algebra coordinates of an element of `N` (read off the first copy).
    pub fn compress(&self, x: &Element<T>) -> Element<T> {
        Element::from_blocks(
            self.copies
                .iter()
                .zip(&self.ambient_block)
                .map(|(c, &k)| hermitian_part(&(c[0].adjoint() * x.block(k) * &c[0])))
                .collect(),
        )
    }

    /// `W ((+)_k y_k (x) 1_{m_k}) W^*`.
    pub fn embed(&self, ambient: &BlockAlgebra, y: &Element<T>) -> Element<T> {
        let mut out = Element::zeros(ambient);
        for (s, copies) in self.copies.iter().enumerate() {
            let k = self.ambient_block[s];
            for b in copies {
                *out.block_mut(k) += b * y.block(s) * b.adjoint();
            }
        }
        out.hermitian_part()
    }

    /// Restriction of `phi` to `N`: partial trace over the multiplicity
    /// index, `rho~_k = sum_l B_l^* rho B_l`.
    pub fn restrict_state(&self, phi: &State<T>, tol: &Tolerances) -> Result<State<T>> {
        let dens = self
            .copies
            .iter()
            .zip(&self.ambient_block)
            .map(|(copies, &k)| {
                let rho = &phi.densities()[k];
                let d = copies[0].ncols();
                hermitian_part(&copies.iter().fold(CMat::zeros(d, d), |acc, b| acc + b.adjoint() * rho * b))
            })
            .collect();
        State::new(&self.sub, dens, tol)
    }

    /// `max_{j,i} ||[b_j, x_i]||_F` over the commutant basis.
    pub fn commutant_residual(&self, xs: &[Element<T>]) -> T {
        let mut worst = T::zero();
        for b in &self.commutant_basis {
            for x in xs {
                worst = worst.max(b.commutator(x).frobenius());
            }
        }
        worst
    }
}

/// Column-major `vec` of the commutator map `y -> y a - a y`.
fn commutator_operator<T: Real>(a: &CMat<T>) -> CMat<T> {
    let d = a.nrows();
    let id = CMat::<T>::identity(d, d);
    a.transpose().kronecker(&id) - id.kronecker(a)
}

fn unvec<T: Real>(v: &[C<T>], d: usize) -> CMat<T> {
    CMat::from_column_slice(d, d, v)
}

/// Basis of `{y : [y, a_i] = 0 for all i}` in `M_d`.
fn commutant_basis<T: Real>(blocks: &[&CMat<T>], tol: &Tolerances) -> Result<Vec<CMat<T>>> {
    let d = blocks[0].nrows();
    let n = blocks.len();
    let mut l = CMat::<T>::zeros(n * d * d, d * d);
    for (i, a) in blocks.iter().enumerate() {
        l.view_mut((i * d * d, 0), (d * d, d * d)).copy_from(&commutator_operator(a));
    }
    let s = svd(&l)?;
    let smax = s.sigma.first().copied().unwrap_or_else(T::zero).into_f64();
    let cut = T::lit(tol.cluster_tol * smax.max(1.0));
    let mut out = Vec::new();
    for (j, &sv) in s.sigma.iter().enumerate() {
        if sv <= cut {
            let col: Vec<C<T>> = s.v.column(j).iter().copied().collect();
            out.push(unvec(&col, d));
        }
    }
    // SVD only returns min(rows, cols) vectors; rows >= cols here so V is full.
    Ok(out)
}

struct Irrep<T: Real> {
    basis: CMat<T>,
    key: usize,
}

fn leading_index<T: Real>(basis: &CMat<T>) -> usize {
    let p = basis * basis.adjoint();
    let mut best = 0;
    let mut best_v = T::zero();
    for i in 0..p.nrows() {
        let v = p[(i, i)].re;
        if v > best_v * T::lit(1.0 + 1e-9) {
            best_v = v;
            best = i;
        }
    }
    best
}

/// One ambient block: sub-block copies as `(class -> list of copy bases)`.
fn decompose_block<T: Real>(
    elems: &[&CMat<T>],
    commutant: &[CMat<T>],
    seed: u64,
    tol: &Tolerances,
) -> Result<Option<Vec<Vec<CMat<T>>>>> {
    let d = elems[0].nrows();
    let mut rng = gen::rng(seed);
    let mut h = CMat::<T>::zeros(d, d);
    for y in commutant {
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        let herm = hermitian_part(y);
        let anti = (y - y.adjoint()) * C::new(T::zero(), T::lit(-0.5));
        h += herm * re(T::lit(g1)) + anti * re(T::lit(g2));
    }
    let e = eigh(&h)?;
    let radius = e.max().abs().max(e.min().abs()).into_f64();
    let gap = T::lit(tol.cluster_gap(radius).max(1e-6 * radius));
    let mut spaces: Vec<Irrep<T>> = Vec::new();
    let mut start = 0;
    for j in 1..=d {
        if j == d || e.values[j - 1] - e.values[j] > gap {
            let raw = e.vectors.columns(start, j - start).into_owned();
            let basis = projector_basis(&hermitian_part(&(&raw * raw.adjoint())), j - start);
            let key = leading_index(&basis);
            spaces.push(Irrep { basis, key });
            start = j;
        }
    }

    let scale = commutant.iter().fold(T::one(), |acc, y| acc.max(frobenius(y)));
    let thresh = T::lit(1e-6) * scale;
    // each eigenspace must carry only scalars from the commutant
    for s in &spaces {
        let m = s.basis.ncols();
        for y in commutant {
            let c = s.basis.adjoint() * y * &s.basis;
            let mean = c.trace() / re(T::lit(m as f64));
            if frobenius(&(c - CMat::identity(m, m) * mean)) > thresh {
                return Ok(None);
            }
        }
    }

    // group equivalent modules via non-zero intertwiners
    let ns = spaces.len();
    let mut class: Vec<usize> = (0..ns).collect();
    fn find(c: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while c[r] != r {
            r = c[r];
        }
        c[i] = r;
        r
    }
    for s in 0..ns {
        for t in (s + 1)..ns {
            let linked = commutant
                .iter()
                .any(|y| frobenius(&(spaces[s].basis.adjoint() * y * &spaces[t].basis)) > thresh);
            if linked {
                let (a, b) = (find(&mut class, s), find(&mut class, t));
                class[b.max(a)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for s in 0..ns {
        let root = find(&mut class, s);
        groups.entry(root).or_default().push(s);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    for g in groups.iter_mut() {
        g.sort_by_key(|&s| (spaces[s].key, s));
    }
    groups.sort_by_key(|g| (spaces[g[0]].key, g[0]));

    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        let reference = &spaces[g[0]].basis;
        let dim = reference.ncols();
        let mut copies = vec![reference.clone()];
        for &t in &g[1..] {
            let bt = &spaces[t].basis;
            if bt.ncols() != dim {
                return Ok(None);
            }
            let best = commutant
                .iter()
                .map(|y| bt.adjoint() * y * reference)
                .max_by(|a, b| frobenius(a).partial_cmp(&frobenius(b)).unwrap_or(std::cmp::Ordering::Equal))
                .ok_or_else(|| Error::Numerical("empty commutant".into()))?;
            let s = svd(&best)?;
            let v = &s.u * s.v.adjoint();
            copies.push(bt * v);
        }
        out.push(copies);
    }
    Ok(Some(out))
}

/// Decomposes the algebra generated by a Hermitian family (together with the
/// ambient central projections) as `(+)_k M_{d_k} (x) 1_{m_k}`.
pub fn decompose_generated_algebra<T: Real>(
    alg: &BlockAlgebra,
    elements: &[Element<T>],
    tol: &Tolerances,
) -> Result<GeneratedAlgebra<T>> {
    tol.validate()?;
    if elements.is_empty() {
        return Err(Error::Shape("need at least one element".into()));
    }
    for x in elements {
        x.check_shape(alg)?;
        let h = x.hermiticity_residual();
        if h.into_f64() > tol.cert_tol {
            return Err(Error::Validation(format!("element not Hermitian (residual {h})")));
        }
    }
    let elements: Vec<Element<T>> = elements.iter().map(Element::hermitian_part).collect();

    let mut dims = Vec::new();
    let mut mults = Vec::new();
    let mut ambient_block = Vec::new();
    let mut change = Vec::new();
    let mut comm_basis = Vec::new();
    let mut all_copies = Vec::new();
    let mut attempts_used = 0;
    for (k, &d) in alg.dims().iter().enumerate() {
        let blocks: Vec<&CMat<T>> = elements.iter().map(|x| x.block(k)).collect();
        let commutant = commutant_basis(&blocks, tol)?;
        if commutant.is_empty() {
            return Err(Error::Numerical(format!("block {k}: commutant is empty (identity missing)")));
        }
        let mut found = None;
        for attempt in 0..tol.barrier.max_iters.max(1) {
            let seed = tol.seed.wrapping_add((k as u64) << 32).wrapping_add(attempt as u64);
            if let Some(groups) = decompose_block(&blocks, &commutant, seed, tol)? {
                let mult_sq: usize = groups.iter().map(|g| g.len() * g.len()).sum();
                if mult_sq != commutant.len() {
                    continue;
                }
                let (w, res) = assemble(&groups, &blocks, d);
                if res.into_f64() <= 10.0 * tol.cert_tol {
                    attempts_used = attempts_used.max(attempt + 1);
                    found = Some((groups, w, res));
                    break;
                }
            }
        }
        let (groups, w, _) = found.ok_or_else(|| {
            Error::Numerical(format!("block {k}: generated algebra decomposition did not verify in {} attempts", tol.barrier.max_iters))
        })?;
        for g in &groups {
            dims.push(g[0].ncols());
            mults.push(g.len());
            ambient_block.push(k);
        }
        change.push(w);
        for y in commutant {
            let mut el = Element::zeros(alg);
            *el.block_mut(k) = y;
            comm_basis.push(el);
        }
        all_copies.extend(groups);
    }
    let sub = BlockAlgebra::new(dims)?;
    let mut out = GeneratedAlgebra {
        sub,
        multiplicities: mults,
        ambient_block,
        change_of_basis: change,
        commutant_basis: comm_basis,
        residual: T::zero(),
        attempts: attempts_used,
        copies: all_copies,
    };
    let mut residual = T::zero();
    for x in &elements {
        residual = residual.max((&out.embed(alg, &out.compress(x)) - x).frobenius());
    }
    out.residual = residual;
    Ok(out)
}

/// Builds `W` and the block-diagonalisation residual for one ambient block.
fn assemble<T: Real>(groups: &[Vec<CMat<T>>], elems: &[&CMat<T>], d: usize) -> (CMat<T>, T) {
    let mut w = CMat::<T>::zeros(d, d);
    let mut col = 0;
    for g in groups {
        for r in 0..g[0].ncols() {
            for b in g {
                w.set_column(col, &b.column(r));
                col += 1;
            }
        }
    }
    let mut residual = T::zero();
    for a in elems {
        let conj = w.adjoint() * *a * &w;
        let mut target = CMat::<T>::zeros(d, d);
        let mut off = 0;
        for g in groups {
            let small = g[0].adjoint() * *a * &g[0];
            let blk = small.kronecker(&CMat::identity(g.len(), g.len()));
            let n = blk.nrows();
            target.view_mut((off, off), (n, n)).copy_from(&blk);
            off += n;
        }
        residual = residual.max(frobenius(&(conj - target)));
    }
    (w, residual)
}

/// Rounding report for [`orthogonalize_symmetry_preserving`].
#[derive(Clone, Debug)]
pub struct SymmetricReport<T: Real> {
    /// Report of the rounding inside `(+)_k M_{d_k}`.
    pub inner: OrthReport<T>,
    pub decomposition: GeneratedAlgebra<T>,
    /// Output PVM in the ambient algebra.
    pub pvm: Pvm<T>,
    pub defect: T,
    pub error: T,
    pub certificates: SymmetryCertificates<T>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryCertificates<T: Real> {
    /// `max_{j,i} ||[b_j, p_i]||_F` over the computed commutant basis.
    pub commutant_residual: T,
    /// Block-diagonalisation residual of the input family.
    pub decomposition_residual: T,
    /// `|defect - inner defect|`, consistency of the restricted state.
    pub defect_consistency: T,
}

/// Rounds `a` inside the algebra it generates; the resulting `p_i` commute
/// with every operator of the ambient algebra that commutes with all `a_i`.
pub fn orthogonalize_symmetry_preserving<T: Real>(
    alg: &BlockAlgebra,
    phi: &State<T>,
    a: &Povm<T>,
    tol: &Tolerances,
) -> Result<SymmetricReport<T>> {
    phi.check_shape(alg)?;
    if a.algebra() != alg {
        return Err(Error::Shape("POVM and algebra differ".into()));
    }
    let dec = decompose_generated_algebra(alg, a.elements(), tol)?;
    let compressed: Vec<Element<T>> = a.elements().iter().map(|x| dec.compress(x)).collect();
    let sub_povm = Povm::new(&dec.sub, compressed, tol)?;
    let sub_phi = dec.restrict_state(phi, tol)?;
    let inner = orthogonalize(&dec.sub, &sub_phi, &sub_povm, tol)?;
    let p: Vec<Element<T>> = inner.pvm.elements().iter().map(|x| dec.embed(alg, x)).collect();
    let pvm = Pvm::new(alg, p, tol)?;
    let defect = crate::algebra::defect(phi, a)?;
    let mut error = T::zero();
    for (x, p) in a.elements().iter().zip(pvm.elements()) {
        error += phi.norm_sq(&(x - p))?;
    }
    let certificates = SymmetryCertificates {
        commutant_residual: dec.commutant_residual(pvm.elements()),
        decomposition_residual: dec.residual,
        defect_consistency: (defect - inner.defect).abs(),
    };
    Ok(SymmetricReport { inner, decomposition: dec, pvm, defect, error, certificates })
}
