//! Seeded instance generators.
//!
//! All randomness comes from ChaCha8 seeded with a `u64`, so a
//! `(generator, seed, parameters)` triple always produces the same instance
//! on every platform. Gaussian entries are drawn in `f64` and converted.

use nalgebra::ComplexField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{BlockAlgebra, Element, Povm, Pvm, State};
use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::scalar::{re, CMat, Real, C};
use crate::tol::Tolerances;

/// Name recorded in instance metadata for the PRNG used here.
pub const PRNG_NAME: &str = "chacha8";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Ginibre matrix with `E|g_ij|^2 = 1`.
pub fn ginibre<T: Real, R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMat::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            m[(r, c)] = C::new(T::lit(a * s), T::lit(b * s));
        }
    }
    m
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn haar_unitary<T: Real, R: Rng>(rng: &mut R, d: usize) -> CMat<T> {
    let g = ginibre::<T, R>(rng, d, d);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let m = z.modulus();
        if m > T::zero() {
            let phase = z / re(m);
            let col = q.column(j) * phase;
            q.set_column(j, &col);
        }
    }
    q
}

/// Random Hermitian matrix with operator norm 1 (zero if `d == 0`).
pub fn random_hermitian<T: Real, R: Rng>(rng: &mut R, d: usize) -> Result<CMat<T>> {
    let g = ginibre::<T, R>(rng, d, d);
    let h = (&g + g.adjoint()) * re(T::lit(0.5));
    let e = eigh(&h)?;
    let norm = e.max().abs().max(e.min().abs());
    Ok(if norm > T::zero() { h / re(norm) } else { h })
}

/// `exp(i theta h)` for Hermitian `h`.
pub fn unitary_exp<T: Real>(h: &CMat<T>, theta: T) -> Result<CMat<T>> {
    let e = eigh(h)?;
    let n = e.values.len();
    let mut scaled = e.vectors.clone();
    for (c, &v) in e.values.iter().enumerate() {
        let phase = C::new(T::zero(), theta * v).exp();
        for r in 0..n {
            scaled[(r, c)] *= phase;
        }
    }
    Ok(&scaled * e.vectors.adjoint())
}

/// PVM in `M_d` whose projections are spanned by the columns of `u`,
/// column `j` going to output `pattern[j]`.
fn pvm_from_pattern<T: Real>(u: &CMat<T>, pattern: &[usize], n: usize) -> Vec<CMat<T>> {
    let d = u.nrows();
    let mut out = vec![CMat::zeros(d, d); n];
    for (j, &i) in pattern.iter().enumerate() {
        let col = u.column(j);
        out[i] += &col * col.adjoint();
    }
    out
}

fn random_pattern<R: Rng>(rng: &mut R, d: usize, n: usize) -> Vec<usize> {
    (0..d).map(|_| rng.random_range(0..n)).collect()
}

/// Random PVM with `n` outputs: Haar basis per block, each basis vector
/// assigned to a uniformly random output.
pub fn random_pvm<T: Real>(seed: u64, alg: &BlockAlgebra, n: usize, tol: &Tolerances) -> Result<Pvm<T>> {
    if n == 0 {
        return Err(Error::InvalidParam("number of outputs must be positive".into()));
    }
    let mut rng = rng(seed);
    let mut elems = vec![Element::zeros(alg); n];
    for (k, &d) in alg.dims().iter().enumerate() {
        let u = haar_unitary::<T, _>(&mut rng, d);
        let pattern = random_pattern(&mut rng, d, n);
        for (i, p) in pvm_from_pattern(&u, &pattern, n).into_iter().enumerate() {
            *elems[i].block_mut(k) = p;
        }
    }
    Pvm::new(alg, elems, tol)
}

/// Random POVM near a PVM: `a_i = s^{-1/2} (p_i + delta h_i + gamma) s^{-1/2}`
/// with `gamma` the smallest shift making every term positive and `s` the sum
/// of the shifted terms.
pub fn random_povm_near_pvm<T: Real>(
    seed: u64,
    alg: &BlockAlgebra,
    n: usize,
    delta: f64,
    tol: &Tolerances,
) -> Result<Povm<T>> {
    if n == 0 {
        return Err(Error::InvalidParam("number of outputs must be positive".into()));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParam(format!("perturbation delta must be non-negative, got {delta}")));
    }
    let mut rng = rng(seed);
    let mut elems = vec![Element::zeros(alg); n];
    for (k, &d) in alg.dims().iter().enumerate() {
        let u = haar_unitary::<T, _>(&mut rng, d);
        let pattern = random_pattern(&mut rng, d, n);
        let mut terms = Vec::with_capacity(n);
        for p in pvm_from_pattern(&u, &pattern, n) {
            let h = random_hermitian::<T, _>(&mut rng, d)?;
            terms.push(p + h * re(T::lit(delta)));
        }
        let mut gamma = T::zero();
        for t in &terms {
            gamma = gamma.max(-eigh(t)?.min());
        }
        let id = CMat::<T>::identity(d, d);
        let shifted: Vec<CMat<T>> = terms.iter().map(|t| t + &id * re(gamma)).collect();
        let s = shifted.iter().fold(CMat::zeros(d, d), |acc, t| acc + t);
        let se = eigh(&s)?;
        if se.min() <= T::zero() {
            return Err(Error::Numerical("POVM normaliser is singular".into()));
        }
        let s_inv_half = se.map(|v| T::one() / v.sqrt());
        for (i, t) in shifted.iter().enumerate() {
            let a = &s_inv_half * t * &s_inv_half;
            *elems[i].block_mut(k) = (&a + a.adjoint()) * re(T::lit(0.5));
        }
    }
    Povm::new(alg, elems, tol)
}

/// Random state. `rank = Some(1)` gives a vector state; otherwise each block
/// density is `G G^*` with `G` Ginibre of width `min(rank, d_k)`.
pub fn random_state<T: Real>(seed: u64, alg: &BlockAlgebra, rank: Option<usize>, tol: &Tolerances) -> Result<State<T>> {
    let mut rng = rng(seed);
    let mut dens = Vec::with_capacity(alg.num_blocks());
    for &d in alg.dims() {
        let r = rank.map_or(d, |r| r.clamp(1, d));
        let g = ginibre::<T, _>(&mut rng, d, r);
        dens.push(&g * g.adjoint());
    }
    let total = dens.iter().fold(T::zero(), |acc, r| acc + r.trace().re);
    let dens = dens.into_iter().map(|r| {
        let r = r / re(total);
        (&r + r.adjoint()) * re(T::lit(0.5))
    });
    State::new(alg, dens.collect(), tol)
}

/// The three-outcome POVM in `M_2` with no common eigenvector, under the
/// normalised trace.
pub fn paper_counterexample<T: Real>(delta: f64, tol: &Tolerances) -> Result<(BlockAlgebra, Povm<T>, State<T>)> {
    if !(delta > 0.0 && delta <= 0.1) {
        return Err(Error::InvalidParam(format!("delta must lie in (0, 0.1], got {delta}")));
    }
    let alg = BlockAlgebra::full(2)?;
    let s = 1.0 / (1.0 + 6.0 * delta);
    let r3 = 3f64.sqrt() * delta;
    let a1 = vec![vec![s * (1.0 + 4.0 * delta), 0.0], vec![0.0, 0.0]];
    let a2 = vec![vec![s * delta, s * r3], vec![s * r3, s * (1.0 + 3.0 * delta)]];
    let a3 = vec![vec![s * delta, -s * r3], vec![-s * r3, s * 3.0 * delta]];
    let elems = [a1, a2, a3].into_iter().map(|b| Element::from_real_rows(&[b])).collect();
    let povm = Povm::new(&alg, elems, tol)?;
    Ok((alg.clone(), povm, State::normalized_trace(&alg)))
}

/// `l_inf^2` with `a_1 = (1, 1/2)`, `a_2 = (0, 1/2)` and
/// `phi(x, y) = (1 - c) x + c y`.
pub fn linfty2_family<T: Real>(c: f64, tol: &Tolerances) -> Result<(BlockAlgebra, Povm<T>, State<T>)> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidParam(format!("c must lie in (0, 1), got {c}")));
    }
    let alg = BlockAlgebra::new(vec![1, 1])?;
    let a1 = Element::from_diagonals(&[vec![1.0], vec![0.5]]);
    let a2 = Element::from_diagonals(&[vec![0.0], vec![0.5]]);
    let povm = Povm::new(&alg, vec![a1, a2], tol)?;
    let phi = State::from_diagonal_weights(&alg, &[vec![1.0 - c], vec![c]], tol)?;
    Ok((alg, povm, phi))
}

/// A pair of PVMs `(p, q)` that almost commute.
///
/// Without perturbation (`seed = None`) the algebra must be `M_2`:
/// `q = (e11, e22)` and `p` is `q` rotated by the real angle `theta`.
/// With a seed, `p` (`n` outputs) and `q` (`m` outputs) are diagonal in a
/// common Haar basis and `p` is then conjugated by `exp(i theta h)` for a
/// random Hermitian `h` of operator norm 1.
pub fn rotated_pvm_pair<T: Real>(
    theta: f64,
    alg: &BlockAlgebra,
    n: usize,
    m: usize,
    seed: Option<u64>,
    tol: &Tolerances,
) -> Result<(Pvm<T>, Pvm<T>)> {
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_4 + 1e-15) {
        return Err(Error::InvalidParam(format!("theta must lie in (0, pi/4], got {theta}")));
    }
    if alg.dims().iter().any(|&d| d > 16) {
        return Err(Error::InvalidParam("block dimensions must be at most 16".into()));
    }
    match seed {
        None => {
            if alg.dims() != [2] {
                return Err(Error::InvalidParam("the unperturbed rotated pair lives in M_2".into()));
            }
            let (c, s) = (theta.cos(), theta.sin());
            let q = vec![
                Element::from_diagonals(&[vec![1.0, 0.0]]),
                Element::from_diagonals(&[vec![0.0, 1.0]]),
            ];
            let p = vec![
                Element::from_real_rows(&[vec![vec![c * c, c * s], vec![c * s, s * s]]]),
                Element::from_real_rows(&[vec![vec![s * s, -c * s], vec![-c * s, c * c]]]),
            ];
            Ok((Pvm::new(alg, p, tol)?, Pvm::new(alg, q, tol)?))
        }
        Some(seed) => {
            if n == 0 || m == 0 {
                return Err(Error::InvalidParam("number of outputs must be positive".into()));
            }
            let mut rng = rng(seed);
            let mut p = vec![Element::zeros(alg); n];
            let mut q = vec![Element::zeros(alg); m];
            for (k, &d) in alg.dims().iter().enumerate() {
                let u = haar_unitary::<T, _>(&mut rng, d);
                let pp = random_pattern(&mut rng, d, n);
                let qp = random_pattern(&mut rng, d, m);
                let h = random_hermitian::<T, _>(&mut rng, d)?;
                let v = unitary_exp(&h, T::lit(theta))?;
                for (i, b) in pvm_from_pattern(&u, &pp, n).into_iter().enumerate() {
                    let r = &v * b * v.adjoint();
                    *p[i].block_mut(k) = (&r + r.adjoint()) * re(T::lit(0.5));
                }
                for (j, b) in pvm_from_pattern(&u, &qp, m).into_iter().enumerate() {
                    *q[j].block_mut(k) = b;
                }
            }
            Ok((Pvm::new(alg, p, tol)?, Pvm::new(alg, q, tol)?))
        }
    }
}

/// `n` random positive functionals. Diagonal families have i.i.d. uniform
/// `[0, 1)` diagonals; otherwise `a_i = w_i G G^* / ||G G^*||` with a random
/// width for `G` and a weight `w_i` in `[0.5, 2)`.
pub fn random_functionals<T: Real>(seed: u64, alg: &BlockAlgebra, n: usize, diagonal: bool) -> Result<Vec<Element<T>>> {
    if n == 0 {
        return Err(Error::InvalidParam("family must be non-empty".into()));
    }
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let w: f64 = rng.random_range(0.5..2.0);
        let mut blocks = Vec::with_capacity(alg.num_blocks());
        for &d in alg.dims() {
            if diagonal {
                let diag: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                blocks.push(CMat::from_fn(d, d, |r, c| {
                    if r == c {
                        re(T::lit(w * diag[r]))
                    } else {
                        C::new(T::zero(), T::zero())
                    }
                }));
            } else {
                let width = rng.random_range(1..=d);
                let g = ginibre::<T, _>(&mut rng, d, width);
                let a = &g * g.adjoint();
                let e = eigh(&a)?;
                let a = if e.max() > T::zero() { a / re(e.max()) } else { a };
                let a = (&a + a.adjoint()) * re(T::lit(0.5 * w));
                blocks.push(a);
            }
        }
        out.push(Element::from_blocks(blocks));
    }
    Ok(out)
}

/// Random POVM (not necessarily close to a PVM): normalised random positive
/// elements `s^{-1/2} b_i s^{-1/2}`.
pub fn random_povm<T: Real>(seed: u64, alg: &BlockAlgebra, n: usize, tol: &Tolerances) -> Result<Povm<T>> {
    let b = random_functionals::<T>(seed, alg, n, false)?;
    let mut elems = vec![Element::zeros(alg); n];
    for k in 0..alg.num_blocks() {
        let s = b.iter().fold(CMat::zeros(alg.dims()[k], alg.dims()[k]), |acc, x| acc + x.block(k));
        let d = s.nrows();
        // a small multiple of the identity keeps the normaliser invertible
        let s = s + CMat::identity(d, d) * re(T::lit(1e-3));
        let inv = eigh(&s)?.map(|v| T::one() / v.sqrt());
        for (i, x) in b.iter().enumerate() {
            let xi = x.block(k) + CMat::identity(d, d) * re(T::lit(1e-3 / n as f64));
            let a = &inv * xi * &inv;
            *elems[i].block_mut(k) = (&a + a.adjoint()) * re(T::lit(0.5));
        }
    }
    Povm::new(alg, elems, tol)
}
