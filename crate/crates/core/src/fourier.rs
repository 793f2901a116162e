//! PVMs with `n` outputs are the same thing as unitaries of order `n`:
//! `u = sum_k w^k p_k` and `p_j = (1/n) sum_k w^{-jk} u^k` with
//! `w = exp(2 pi i / n)`.

use serde::Serialize;

use crate::algebra::{BlockAlgebra, Element, Pvm, State};
use crate::commute::{repair, RepairReport};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use crate::tol::Tolerances;

fn root_of_unity<T: Real>(k: i64, n: usize) -> C<T> {
    let angle = 2.0 * std::f64::consts::PI * (k.rem_euclid(n as i64) as f64) / n as f64;
    C::new(T::lit(angle.cos()), T::lit(angle.sin()))
}

/// `u = sum_{k=1}^n exp(2 pi i k / n) p_k`.
pub fn pvm_to_unitary<T: Real>(p: &Pvm<T>) -> Element<T> {
    let n = p.n();
    let mut u = Element::zeros(p.algebra());
    for (idx, pk) in p.elements().iter().enumerate() {
        u = &u + &pk.scale_complex(root_of_unity((idx + 1) as i64, n));
    }
    u
}

/// `u, u^2, ..., u^n`.
fn powers<T: Real>(u: &Element<T>, n: usize) -> Vec<Element<T>> {
    let mut out = Vec::with_capacity(n);
    let mut cur = u.clone();
    for _ in 0..n {
        let next = &cur * u;
        out.push(cur);
        cur = next;
    }
    out
}

/// Checks `u^* u = 1` and `u^n = 1` within `cert_tol`.
pub fn check_order<T: Real>(alg: &BlockAlgebra, u: &Element<T>, n: usize, tol: &Tolerances) -> Result<()> {
    u.check_shape(alg)?;
    if n == 0 {
        return Err(Error::InvalidParam("order must be positive".into()));
    }
    let one = Element::identity(alg);
    let unitarity = (&(&u.adjoint() * u) - &one).frobenius();
    if unitarity.into_f64() > tol.cert_tol {
        return Err(Error::Precondition(format!("not unitary: ||u^* u - 1||_F = {unitarity}")));
    }
    let order = (&u.pow(n) - &one).frobenius();
    if order.into_f64() > tol.cert_tol {
        return Err(Error::Precondition(format!("u^{n} differs from 1 by {order} (Frobenius)")));
    }
    Ok(())
}

/// `p_j = (1/n) sum_{k=1}^n exp(-2 pi i j k / n) u^k`, `j = 1..n`.
pub fn unitary_to_pvm<T: Real>(alg: &BlockAlgebra, u: &Element<T>, n: usize, tol: &Tolerances) -> Result<Pvm<T>> {
    check_order(alg, u, n, tol)?;
    let pw = powers(u, n);
    let inv_n = T::one() / T::lit(n as f64);
    let p = (1..=n)
        .map(|j| {
            let mut acc = Element::zeros(alg);
            for (idx, uk) in pw.iter().enumerate() {
                let k = (idx + 1) as i64;
                acc = &acc + &uk.scale_complex(root_of_unity(-(j as i64) * k, n));
            }
            acc.scale(inv_n).hermitian_part()
        })
        .collect();
    Pvm::new(alg, p, tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitaryPairTerms<T: Real> {
    /// `(1/nm) sum_{i<=n, j<=m} ||[u^i, v^j]||_phi^2`.
    pub lhs: T,
    /// `(1/m) sum_{j<=m} ||v^j - v'^j||_phi^2`.
    pub rhs_error: T,
    /// Largest term with `i = n` or `j = m`; these vanish since `u^n = v^m = 1`.
    pub top_power_terms: T,
    /// `||[v', u]||_F`.
    pub commutator_residual: T,
}

#[derive(Clone, Debug)]
pub struct UnitaryRepair<T: Real> {
    pub v_repaired: Element<T>,
    pub terms: UnitaryPairTerms<T>,
    /// Underlying PVM repair (`p` from `v`, `q` from `u`).
    pub repair: RepairReport<T>,
}

impl<T: Real> UnitaryRepair<T> {
    /// `rhs_error <= 10 lhs + slack`.
    pub fn bound_holds(&self, slack: f64) -> bool {
        self.terms.rhs_error <= T::lit(10.0) * self.terms.lhs + T::lit(slack)
    }
}

/// Replaces `v` (order `m`) by a unitary of order `m` commuting with `u` (order `n`).
pub fn repair_unitary_pair<T: Real>(
    alg: &BlockAlgebra,
    phi: &State<T>,
    u: &Element<T>,
    n: usize,
    v: &Element<T>,
    m: usize,
    tol: &Tolerances,
) -> Result<UnitaryRepair<T>> {
    phi.check_shape(alg)?;
    let q = unitary_to_pvm(alg, u, n, tol)?;
    let p = unitary_to_pvm(alg, v, m, tol)?;
    let rep = repair(phi, &p, &q, tol)?;
    let v_repaired = pvm_to_unitary(&rep.pvm_repaired);

    let up = powers(u, n);
    let vp = powers(v, m);
    let vrp = powers(&v_repaired, m);
    let mut lhs = T::zero();
    let mut top = T::zero();
    for (i, ui) in up.iter().enumerate() {
        for (j, vj) in vp.iter().enumerate() {
            let t = phi.norm_sq(&ui.commutator(vj))?;
            lhs += t;
            if i + 1 == n || j + 1 == m {
                top = top.max(t);
            }
        }
    }
    lhs /= T::lit((n * m) as f64);
    let mut rhs_error = T::zero();
    for (vj, wj) in vp.iter().zip(&vrp) {
        rhs_error += phi.norm_sq(&(vj - wj))?;
    }
    rhs_error /= T::lit(m as f64);
    let commutator_residual = v_repaired.commutator(u).frobenius();
    Ok(UnitaryRepair {
        v_repaired,
        terms: UnitaryPairTerms { lhs, rhs_error, top_power_terms: top, commutator_residual },
        repair: rep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commute::commutation_defect;
    use crate::gen;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag_c(d: &[C<f64>]) -> Element<f64> {
        let n = d.len();
        Element::from_blocks(vec![crate::scalar::CMat::from_fn(n, n, |r, c| if r == c { d[r] } else { C::new(0.0, 0.0) })])
    }

    #[test]
    fn small_examples() {
        let m1 = BlockAlgebra::full(1).unwrap();
        let one = Pvm::new(&m1, vec![Element::<f64>::identity(&m1)], &tol()).unwrap();
        assert!((&pvm_to_unitary(&one) - &Element::identity(&m1)).frobenius() < 1e-15);

        let m2 = BlockAlgebra::full(2).unwrap();
        let p = Pvm::new(
            &m2,
            vec![Element::<f64>::from_diagonals(&[vec![1.0, 0.0]]), Element::from_diagonals(&[vec![0.0, 1.0]])],
            &tol(),
        )
        .unwrap();
        let u = pvm_to_unitary(&p);
        assert!((&u - &Element::from_diagonals(&[vec![-1.0, 1.0]])).frobenius() < 1e-15);
        let back = unitary_to_pvm(&m2, &u, 2, &tol()).unwrap();
        for (a, b) in back.elements().iter().zip(p.elements()) {
            assert!((a - b).frobenius() < 1e-15);
        }

        let m4 = BlockAlgebra::full(4).unwrap();
        let std: Vec<Element<f64>> = (0..4)
            .map(|i| Element::from_diagonals(&[(0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()]))
            .collect();
        let u4 = pvm_to_unitary(&Pvm::new(&m4, std, &tol()).unwrap());
        let expect = diag_c(&[C::new(0.0, 1.0), C::new(-1.0, 0.0), C::new(0.0, -1.0), C::new(1.0, 0.0)]);
        assert!((&u4 - &expect).frobenius() < 1e-15);

        let m3 = BlockAlgebra::full(3).unwrap();
        let p3 = unitary_to_pvm(&m3, &Element::<f64>::identity(&m3), 3, &tol()).unwrap();
        assert!(p3.element(0).frobenius() < 1e-15);
        assert!(p3.element(1).frobenius() < 1e-15);
        assert!((p3.element(2) - &Element::identity(&m3)).frobenius() < 1e-15);
    }

    #[test]
    fn wrong_order_rejected() {
        let m2 = BlockAlgebra::full(2).unwrap();
        let u = Element::<f64>::from_diagonals(&[vec![-1.0, 1.0]]);
        assert!(matches!(unitary_to_pvm(&m2, &u, 3, &tol()), Err(Error::Precondition(_))));
    }

    #[test]
    fn random_roundtrip() {
        for seed in 0..10u64 {
            let alg = BlockAlgebra::new(vec![3, 2]).unwrap();
            let n = 1 + (seed % 5) as usize;
            let p = gen::random_pvm::<f64>(seed, &alg, n, &tol()).unwrap();
            let u = pvm_to_unitary(&p);
            assert!((&u.pow(n) - &Element::identity(&alg)).frobenius() < 1e-10);
            let back = unitary_to_pvm(&alg, &u, n, &tol()).unwrap();
            for (a, b) in back.elements().iter().zip(p.elements()) {
                assert!((a - b).frobenius() < 1e-10);
            }
            assert!(back.idempotency_residual() < 1e-9);
        }
    }

    #[test]
    fn rotated_pair_through_unitaries() {
        let m2 = BlockAlgebra::full(2).unwrap();
        let (p, q) = gen::rotated_pvm_pair::<f64>(0.1, &m2, 2, 2, None, &tol()).unwrap();
        let phi = State::normalized_trace(&m2);
        let u = pvm_to_unitary(&q);
        let v = pvm_to_unitary(&p);
        // v = 1 - 2 p_1 for the order-2 correspondence
        let one = Element::identity(&m2);
        assert!((&v - &(&one - &p.element(0).scale(2.0))).frobenius() < 1e-15);
        let r = repair_unitary_pair(&m2, &phi, &u, 2, &v, 2, &tol()).unwrap();
        assert!(r.terms.commutator_residual < 1e-9);
        assert!(r.bound_holds(1e-9));
        assert!(r.terms.top_power_terms < 1e-28);
        // Parseval: both sides equal the PVM quantities
        let eps = commutation_defect(&phi, &p, &q).unwrap();
        assert!((r.terms.lhs - eps).abs() < 1e-12);
        assert!((r.terms.rhs_error - r.repair.error).abs() < 1e-12);
    }

    #[test]
    fn random_unitary_pairs() {
        for seed in 0..10u64 {
            let alg = BlockAlgebra::full(4).unwrap();
            let (n, m) = (1 + (seed % 3) as usize, 2 + (seed % 2) as usize);
            let (p, q) = gen::rotated_pvm_pair::<f64>(0.05, &alg, m, n, Some(seed), &tol()).unwrap();
            let phi = gen::random_state::<f64>(seed + 7, &alg, None, &tol()).unwrap();
            let u = pvm_to_unitary(&q);
            let v = pvm_to_unitary(&p);
            let r = repair_unitary_pair(&alg, &phi, &u, n, &v, m, &tol()).unwrap();
            let eps = commutation_defect(&phi, &p, &q).unwrap();
            assert!((r.terms.lhs - eps).abs() < 1e-10);
            assert!((r.terms.rhs_error - r.repair.error).abs() < 1e-10);
            assert!(r.terms.commutator_residual < 1e-9);
            assert!(r.bound_holds(1e-7));
        }
        let alg = BlockAlgebra::full(2).unwrap();
        let v = gen::random_pvm::<f64>(1, &alg, 3, &tol()).unwrap();
        let vu = pvm_to_unitary(&v);
        let r = repair_unitary_pair(&alg, &State::normalized_trace(&alg), &Element::identity(&alg), 1, &vu, 3, &tol()).unwrap();
        assert!((&r.v_repaired - &vu).frobenius() < 1e-12);
    }
}
