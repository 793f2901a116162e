//! Minimal trace majorant of a family of positive functionals and the dual
//! POVM:
//!
//! `min { Tr z : z >= a_i for all i } = max { sum_i Tr(a_i t_i) : t a POVM }`.
//!
//! Solved blockwise with a log-det barrier. On the central path
//! `t_i = mu (z - a_i)^{-1}` sums to the identity and
//! `z - sum_i t_i a_i = n mu`, so the gap is `n mu dim`.

use log::{debug, warn};
use nalgebra::{Cholesky, ComplexField};
use serde::{Deserialize, Serialize};

use crate::algebra::{BlockAlgebra, Element};
use crate::error::{Error, Result};
use crate::linalg::{eigh, frobenius, hermitian_part};
use crate::scalar::{re, CMat, Real};
use crate::tol::Tolerances;

/// Positive functionals `x -> sum_k Tr((a_i)_k x_k)`.
#[derive(Clone, Debug)]
pub struct FunctionalFamily<T: Real> {
    alg: BlockAlgebra,
    elements: Vec<Element<T>>,
}

impl<T: Real> FunctionalFamily<T> {
    pub fn new(alg: &BlockAlgebra, elements: Vec<Element<T>>, tol: &Tolerances) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Precondition("functional family is empty".into()));
        }
        let mut out = Vec::with_capacity(elements.len());
        for (i, a) in elements.iter().enumerate() {
            a.check_shape(alg)?;
            let h = a.hermiticity_residual();
            if h.into_f64() > tol.cert_tol {
                return Err(Error::Precondition(format!("functional {i} is not Hermitian (residual {h})")));
            }
            for (k, b) in a.blocks().iter().enumerate() {
                let lo = eigh(b)?.min();
                if lo.into_f64() < -tol.psd_tol {
                    return Err(Error::Precondition(format!(
                        "functional {i} is not positive: block {k} has eigenvalue {lo}"
                    )));
                }
            }
            out.push(a.hermitian_part());
        }
        Ok(Self { alg: alg.clone(), elements: out })
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

    /// `sum_i Tr a_i`.
    pub fn total_trace(&self) -> T {
        self.elements.iter().fold(T::zero(), |acc, a| acc + a.trace().re)
    }

    /// `max(1, sum_i Tr a_i)`, the scale for gap tolerances.
    pub fn scale(&self) -> f64 {
        self.total_trace().into_f64().max(1.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MajorantResiduals<T: Real> {
    /// `min_i lambda_min(z - a_i)`.
    pub feasibility: T,
    /// `||sum_i t_i - 1||_F`.
    pub povm_sum: T,
    /// `max_i ||t_i (z - a_i)||_F`.
    pub slackness: T,
    /// `||z - sum_i t_i a_i||_F`.
    pub reconstruction: T,
}

/// Central-path residuals at the last accepted Newton point, before the
/// dual is renormalised.
#[derive(Clone, Debug, Serialize)]
pub struct CentralPath<T: Real> {
    /// `||mu sum_i (z - a_i)^{-1} - 1||_F`, worst block.
    pub gradient: T,
    /// `||z - sum_i t_i a_i - n mu||_F`, worst block.
    pub identity: T,
    pub newton_steps: usize,
}

#[derive(Clone, Debug)]
pub struct MajorantSolution<T: Real> {
    pub z: Element<T>,
    /// Dual POVM.
    pub t: Vec<Element<T>>,
    /// `Tr z`.
    pub primal: T,
    /// `sum_i Tr(a_i t_i)`.
    pub dual: T,
    pub gap: T,
    pub mu_final: T,
    pub residuals: MajorantResiduals<T>,
    /// Absent for closed-form solutions.
    pub central_path: Option<CentralPath<T>>,
}

impl<T: Real> MajorantSolution<T> {
    /// Assembles a candidate solution from `z`, `t` and the barrier weight,
    /// recomputing objective values and residuals.
    pub fn from_parts(f: &FunctionalFamily<T>, z: Element<T>, t: Vec<Element<T>>, mu_final: T) -> Result<Self> {
        z.check_shape(f.algebra())?;
        if t.len() != f.n() {
            return Err(Error::Shape(format!("{} dual elements for {} functionals", t.len(), f.n())));
        }
        for ti in &t {
            ti.check_shape(f.algebra())?;
        }
        let (primal, dual) = objective_terms(f, &z, &t);
        let residuals = residuals(f, &z, &t)?;
        Ok(Self { z, t, primal, dual, gap: primal - dual, mu_final, residuals, central_path: None })
    }
}

fn residuals<T: Real>(f: &FunctionalFamily<T>, z: &Element<T>, t: &[Element<T>]) -> Result<MajorantResiduals<T>> {
    let alg = f.algebra();
    let one = Element::identity(alg);
    let mut feasibility: Option<T> = None;
    let mut slackness = T::zero();
    let mut recon = z.clone();
    for (a, ti) in f.elements().iter().zip(t) {
        let s = z - a;
        for b in s.blocks() {
            let lo = eigh(b)?.min();
            feasibility = Some(feasibility.map_or(lo, |v: T| v.min(lo)));
        }
        slackness = slackness.max((ti * &s).frobenius());
        recon = &recon - &(ti * a);
    }
    let sum = Element::sum(t).unwrap_or_else(|| Element::zeros(alg));
    Ok(MajorantResiduals {
        feasibility: feasibility.unwrap_or_else(T::zero),
        povm_sum: (&sum - &one).frobenius(),
        slackness,
        reconstruction: recon.frobenius(),
    })
}

fn objective_terms<T: Real>(f: &FunctionalFamily<T>, z: &Element<T>, t: &[Element<T>]) -> (T, T) {
    let primal = z.trace().re;
    let dual = f.elements().iter().zip(t).fold(T::zero(), |acc, (a, ti)| acc + (a * ti).trace().re);
    (primal, dual)
}

struct BlockState<T: Real> {
    z: CMat<T>,
    steps: usize,
}

struct Barrier<'a, T: Real> {
    a: &'a [CMat<T>],
    /// Largest eigenvalue of `z` above which the stopping rule tightens.
    z_scale: T,
    newton_tol: T,
    max_iters: usize,
}

fn inverse_if_pd<T: Real>(s: &CMat<T>) -> Option<(CMat<T>, T)> {
    let ch = Cholesky::new(hermitian_part(s))?;
    let logdet = ch.l_dirty().diagonal().iter().fold(T::zero(), |acc, v| acc + v.re.ln()) * T::lit(2.0);
    Some((hermitian_part(&ch.inverse()), logdet))
}

impl<T: Real> Barrier<'_, T> {
    fn value(&self, z: &CMat<T>, mu: T) -> Option<T> {
        let mut f = z.trace().re;
        for a in self.a {
            let (_, ld) = inverse_if_pd(&(z - a))?;
            f -= mu * ld;
        }
        Some(f)
    }

    /// Gradient `1 - mu sum_i S_i^{-1}` and the inverses.
    fn gradient(&self, z: &CMat<T>, mu: T) -> Result<(CMat<T>, Vec<CMat<T>>)> {
        let d = z.nrows();
        let mut g = CMat::<T>::identity(d, d);
        let mut invs = Vec::with_capacity(self.a.len());
        for a in self.a {
            let (inv, _) = inverse_if_pd(&(z - a))
                .ok_or_else(|| Error::Numerical("barrier iterate left the feasible region".into()))?;
            g -= &inv * re(mu);
            invs.push(inv);
        }
        Ok((hermitian_part(&g), invs))
    }

    fn stop_tol(&self, z: &CMat<T>) -> T {
        let zn = eigh(z).map(|e| e.max()).unwrap_or_else(|_| T::one()) * self.z_scale;
        self.newton_tol / zn.max(T::one())
    }

    /// Newton's method at fixed `mu` until `||G||_F <= target`. A stall is
    /// accepted when the gradient is already below `fallback`.
    fn center(&self, st: &mut BlockState<T>, mu: T, target: T, fallback: T) -> Result<T> {
        let d = st.z.nrows();
        let mut best = T::max_value().unwrap_or_else(|| T::lit(f64::MAX));
        let mut stalls = 0;
        loop {
            let (g, invs) = self.gradient(&st.z, mu)?;
            let gn = frobenius(&g);
            if gn <= target {
                return Ok(gn);
            }
            if gn < best * T::lit(0.5) {
                best = gn;
                stalls = 0;
            } else {
                stalls += 1;
            }
            if stalls > 50 {
                if gn <= fallback {
                    return Ok(gn);
                }
                return Err(Error::Solver(format!("Newton stalled at mu = {mu} with gradient norm {gn}")));
            }
            if st.steps >= self.max_iters {
                return Err(Error::Solver(format!(
                    "no convergence in {} Newton steps (mu = {mu}, gradient norm {gn})",
                    self.max_iters
                )));
            }
            st.steps += 1;

            let mut k = CMat::<T>::zeros(d * d, d * d);
            for inv in &invs {
                k += inv.transpose().kronecker(inv) * re(mu);
            }
            let rhs = CMat::from_iterator(d * d, 1, g.iter().map(|v| -*v));
            let x = match Cholesky::new(hermitian_part(&k)) {
                Some(ch) => ch.solve(&rhs),
                None => {
                    // ill-conditioned Hessian: pseudo-inverse on the resolved spectrum
                    let e = eigh(&k)?;
                    let top = e.max();
                    e.map(|v| if v > top * T::default_epsilon() * T::lit(1e3) { T::one() / v } else { T::zero() }) * rhs
                }
            };
            let delta = hermitian_part(&CMat::from_column_slice(d, d, x.as_slice()));
            let dec2 = -(&g * &delta).trace().re;
            let f0 = self.value(&st.z, mu).ok_or_else(|| Error::Numerical("infeasible barrier iterate".into()))?;
            let mut alpha = T::one();
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &st.z + &delta * re(alpha);
                if let Some(f1) = self.value(&cand, mu) {
                    let negligible = dec2 <= T::lit(1e-13) * f0.abs().max(T::one());
                    if negligible || f1 <= f0 - T::lit(0.25) * alpha * dec2 {
                        st.z = hermitian_part(&cand);
                        accepted = true;
                        break;
                    }
                }
                alpha *= T::lit(0.5);
            }
            if !accepted {
                stalls = usize::MAX / 2;
            }
        }
    }
}

/// Solves `min Tr z` subject to `z >= a_i` and recovers the dual POVM.
pub fn minimal_majorant<T: Real>(alg: &BlockAlgebra, f: &FunctionalFamily<T>, tol: &Tolerances) -> Result<MajorantSolution<T>> {
    tol.validate()?;
    if f.algebra() != alg {
        return Err(Error::Shape("functional family lives on another algebra".into()));
    }
    let n = f.n();
    let bp = &tol.barrier;
    let total_dim = alg.total_dim() as f64;

    // work with a_i / s so that the largest eigenvalue is at most 1
    let mut s = 0.0f64;
    for a in f.elements() {
        for b in a.blocks() {
            s = s.max(eigh(b)?.max().into_f64());
        }
    }
    if s <= 0.0 {
        s = 1.0;
    }
    let inv_s = T::lit(1.0 / s);
    let gap_tol = bp.gap_tol * f.scale();
    // the central-path gap is n mu dim; aim below the unscaled tolerance so
    // the primal is accurate in absolute terms, not just relative to scale
    let mu_target = 0.5 * bp.gap_tol / (n as f64 * s * total_dim);

    let mut zs = Vec::with_capacity(alg.num_blocks());
    let mut ts = vec![Vec::with_capacity(alg.num_blocks()); n];
    let mut worst_grad = T::zero();
    let mut worst_identity = T::zero();
    let mut steps = 0;
    let mut mu_final = 0.0;
    for (k, &d) in alg.dims().iter().enumerate() {
        let a: Vec<CMat<T>> = f.elements().iter().map(|x| x.block(k) * re(inv_s)).collect();
        // same start in every block (largest eigenvalue is 1 after scaling)
        // so all blocks share one mu schedule
        let z0 = CMat::<T>::identity(d, d) * re(T::lit(2.0));
        let mut mu = bp.mu0_scale * 2.0;
        let barrier = Barrier { a: &a, z_scale: T::lit(s), newton_tol: T::lit(bp.newton_tol), max_iters: bp.max_iters };
        let mut st = BlockState { z: z0, steps: 0 };
        let grad = loop {
            let m = T::lit(mu);
            let target = barrier.stop_tol(&st.z);
            let last = mu <= mu_target;
            // polish the final centre well below the stopping rule so the
            // renormalised dual stays on the central path
            let g = if last {
                barrier.center(&mut st, m, target * T::lit(1e-5), target)?
            } else {
                barrier.center(&mut st, m, target, target * T::lit(1e3))?
            };
            if last {
                break g;
            }
            // land on the target instead of overshooting it; smaller mu only
            // costs precision
            mu = (mu * bp.mu_shrink).max(mu_target);
        };
        debug!("block {k}: {} Newton steps, final mu {mu:e}, gradient {grad}", st.steps);
        steps += st.steps;
        mu_final = mu * s;

        let m = T::lit(mu);
        let (_, invs) = barrier.gradient(&st.z, m)?;
        let z = &st.z * re(T::lit(s));
        let t_raw: Vec<CMat<T>> = invs.iter().map(|inv| inv * re(m)).collect();
        let mut ident = &z - CMat::identity(d, d) * re(T::lit(n as f64 * mu * s));
        for (ti, ai) in t_raw.iter().zip(f.elements()) {
            ident -= ti * ai.block(k);
        }
        worst_grad = worst_grad.max(grad);
        worst_identity = worst_identity.max(frobenius(&ident));

        // exact POVM: conjugate by (sum_i t_i)^{-1/2}
        let sum = t_raw.iter().fold(CMat::<T>::zeros(d, d), |acc, t| acc + t);
        let e = eigh(&sum)?;
        if e.min() <= T::zero() {
            return Err(Error::Solver(format!("block {k}: dual sum is singular")));
        }
        let r = e.map(|v| T::one() / v.sqrt());
        for (i, ti) in t_raw.iter().enumerate() {
            ts[i].push(hermitian_part(&(&r * ti * &r)));
        }
        zs.push(z);
    }
    let z = Element::from_blocks(zs);
    let t: Vec<Element<T>> = ts.into_iter().map(Element::from_blocks).collect();
    let (primal, dual) = objective_terms(f, &z, &t);
    let gap = primal - dual;
    if gap.into_f64() > gap_tol {
        warn!("duality gap {gap} exceeds tolerance {gap_tol:e}");
    }
    let residuals = residuals(f, &z, &t)?;
    Ok(MajorantSolution {
        z,
        t,
        primal,
        dual,
        gap,
        mu_final: T::lit(mu_final),
        residuals,
        central_path: Some(CentralPath { gradient: worst_grad, identity: worst_identity, newton_steps: steps }),
    })
}

/// Closed form for diagonal families: `z` is the entrywise maximum and `t_i`
/// the indicator of the coordinates where `i` attains it (lowest index on ties).
pub fn commuting_majorant_oracle<T: Real>(alg: &BlockAlgebra, f: &FunctionalFamily<T>, tol: &Tolerances) -> Result<MajorantSolution<T>> {
    if f.algebra() != alg {
        return Err(Error::Shape("functional family lives on another algebra".into()));
    }
    let n = f.n();
    let mut zs = Vec::with_capacity(alg.num_blocks());
    let mut ts = vec![Vec::with_capacity(alg.num_blocks()); n];
    for (k, &d) in alg.dims().iter().enumerate() {
        let mut z = CMat::<T>::zeros(d, d);
        let mut t = vec![CMat::<T>::zeros(d, d); n];
        for r in 0..d {
            let mut best = 0;
            for (i, a) in f.elements().iter().enumerate() {
                let b = a.block(k);
                for c in 0..d {
                    if c != r && b[(r, c)].modulus().into_f64() > tol.cert_tol {
                        return Err(Error::Precondition(format!("functional {i} is not diagonal in block {k}")));
                    }
                }
                if b[(r, r)].re > f.elements()[best].block(k)[(r, r)].re {
                    best = i;
                }
            }
            z[(r, r)] = re(f.elements()[best].block(k)[(r, r)].re);
            t[best][(r, r)] = re(T::one());
        }
        zs.push(z);
        for (i, ti) in t.into_iter().enumerate() {
            ts[i].push(ti);
        }
    }
    let z = Element::from_blocks(zs);
    let t: Vec<Element<T>> = ts.into_iter().map(Element::from_blocks).collect();
    let (primal, dual) = objective_terms(f, &z, &t);
    let residuals = residuals(f, &z, &t)?;
    Ok(MajorantSolution { z, t, primal, dual, gap: primal - dual, mu_final: T::zero(), residuals, central_path: None })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), measured, threshold, pass: measured <= threshold }
    }

    pub fn at_least(name: &str, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), measured, threshold, pass: measured >= threshold }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateDiagnostics {
    pub checks: Vec<Check>,
}

impl CertificateDiagnostics {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Recomputes every certificate of `sol` from scratch.
///
/// Only `t_i (z - a_i) = 0` is checked; the mirrored relation
/// `(z - a_i) t_i = 0` is its adjoint for Hermitian data.
pub fn verify_majorant_certificate<T: Real>(
    alg: &BlockAlgebra,
    f: &FunctionalFamily<T>,
    sol: &MajorantSolution<T>,
    tol: &Tolerances,
) -> Result<CertificateDiagnostics> {
    if f.algebra() != alg {
        return Err(Error::Shape("functional family lives on another algebra".into()));
    }
    sol.z.check_shape(alg)?;
    if sol.t.len() != f.n() {
        return Err(Error::Shape(format!("{} dual elements for {} functionals", sol.t.len(), f.n())));
    }
    for t in &sol.t {
        t.check_shape(alg)?;
    }
    let n = f.n() as f64;
    let scale = f.scale();
    let dim = alg.total_dim() as f64;
    let res = residuals(f, &sol.z, &sol.t)?;
    let mut t_min = f64::INFINITY;
    for t in &sol.t {
        for b in t.blocks() {
            t_min = t_min.min(eigh(b)?.min().into_f64());
        }
    }
    let (primal, dual) = objective_terms(f, &sol.z, &sol.t);
    let gap = (primal - dual).into_f64();
    let mu = sol.mu_final.into_f64().max(0.0);
    let primal = primal.into_f64();
    let slack = tol.cert_tol * scale;
    Ok(CertificateDiagnostics {
        checks: vec![
            Check::at_least("feasibility", res.feasibility.into_f64(), -tol.psd_tol),
            Check::at_least("dual_psd", t_min, -tol.psd_tol),
            Check::at_most("povm_sum", res.povm_sum.into_f64(), tol.cert_tol),
            Check::at_least("weak_duality", gap, -slack),
            Check::at_most("gap", gap, tol.barrier.gap_tol * scale),
            Check::at_most("slackness", res.slackness.into_f64(), (n * mu * primal.max(0.0)).sqrt() + slack),
            Check::at_most("reconstruction", res.reconstruction.into_f64(), n * mu * dim.sqrt() + slack),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn family(alg: &BlockAlgebra, els: Vec<Element<f64>>) -> FunctionalFamily<f64> {
        FunctionalFamily::new(alg, els, &tol()).unwrap()
    }

    #[test]
    fn single_functional() {
        let alg = BlockAlgebra::full(3).unwrap();
        let a = gen::random_functionals::<f64>(4, &alg, 1, false).unwrap();
        let f = family(&alg, a.clone());
        let sol = minimal_majorant(&alg, &f, &tol()).unwrap();
        let gap_tol = 1e-6 * f.scale();
        assert!((&sol.z - &a[0]).frobenius() <= gap_tol);
        assert!((&sol.t[0] - &Element::identity(&alg)).frobenius() < 1e-9);
        assert!((sol.primal - a[0].trace().re).abs() <= gap_tol);
        assert!(verify_majorant_certificate(&alg, &f, &sol, &tol()).unwrap().passed());
    }

    #[test]
    fn diagonal_pair_matches_oracle() {
        let alg = BlockAlgebra::full(2).unwrap();
        let f = family(&alg, vec![Element::from_diagonals(&[vec![1.0, 0.0]]), Element::from_diagonals(&[vec![0.0, 1.0]])]);
        let sol = minimal_majorant(&alg, &f, &tol()).unwrap();
        let oracle = commuting_majorant_oracle(&alg, &f, &tol()).unwrap();
        assert_eq!(oracle.primal, 2.0);
        assert!((sol.primal - 2.0).abs() <= 1e-6 * f.scale());
        assert!((&sol.z - &oracle.z).frobenius() < 1e-4);
        assert!((&sol.t[0] - &oracle.t[0]).frobenius() < 1e-4);
        assert!(sol.gap >= -1e-9 && sol.gap <= 1e-6 * f.scale());
        let cp = sol.central_path.as_ref().unwrap();
        assert!(cp.gradient <= 1e-7);
        assert!(cp.identity <= 1e-6);
    }

    #[test]
    fn oracle_examples() {
        let alg = BlockAlgebra::full(2).unwrap();
        let f = family(&alg, vec![Element::from_diagonals(&[vec![3.0, 1.0]]), Element::from_diagonals(&[vec![2.0, 2.0]])]);
        let o = commuting_majorant_oracle(&alg, &f, &tol()).unwrap();
        assert_eq!(o.z, Element::from_diagonals(&[vec![3.0, 2.0]]));
        assert_eq!(o.t[0], Element::from_diagonals(&[vec![1.0, 0.0]]));
        assert_eq!(o.t[1], Element::from_diagonals(&[vec![0.0, 1.0]]));
        assert_eq!(o.primal, 5.0);
        assert_eq!(o.gap, 0.0);
        // ties go to the lowest index
        let g = family(&alg, vec![Element::from_diagonals(&[vec![1.0, 1.0]]), Element::from_diagonals(&[vec![1.0, 0.5]])]);
        let o = commuting_majorant_oracle(&alg, &g, &tol()).unwrap();
        assert_eq!(o.t[0], Element::identity(&alg));
        let offdiag = family(&alg, vec![Element::from_real_rows(&[vec![vec![1.0, 0.5], vec![0.5, 1.0]]])]);
        assert!(matches!(commuting_majorant_oracle(&alg, &offdiag, &tol()), Err(Error::Precondition(_))));
    }

    #[test]
    fn rejects_non_positive() {
        let alg = BlockAlgebra::full(2).unwrap();
        let r = FunctionalFamily::new(&alg, vec![Element::<f64>::from_diagonals(&[vec![1.0, -0.1]])], &tol());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn two_projections_at_45_degrees() {
        let alg = BlockAlgebra::full(2).unwrap();
        let a1 = Element::from_diagonals(&[vec![1.0, 0.0]]);
        let a2 = Element::from_real_rows(&[vec![vec![0.5, 0.5], vec![0.5, 0.5]]]);
        let f = family(&alg, vec![a1.clone(), a2.clone()]);
        let sol = minimal_majorant(&alg, &f, &tol()).unwrap();

        // upper bound: refining grid over real symmetric z = [[x, y], [y, w]];
        // for fixed (y, w) the smallest feasible x is explicit
        let min_x = |y: f64, w: f64| {
            if w <= 0.5 {
                return f64::INFINITY;
            }
            (1.0 + y * y / w).max(0.5 + (y - 0.5) * (y - 0.5) / (w - 0.5))
        };
        let (mut cy, mut cw, mut h) = (0.0, 1.0, 0.5);
        let mut upper = min_x(cy, cw) + cw;
        for _ in 0..200 {
            for i in -8..=8 {
                for l in -8..=8 {
                    let (y, w) = (cy + h * i as f64 / 8.0, cw + h * l as f64 / 8.0);
                    let v = min_x(y, w) + w;
                    if v < upper {
                        (upper, cy, cw) = (v, y, w);
                    }
                }
            }
            h *= 0.8;
        }
        let x = min_x(cy, cw);
        let z = Element::from_real_rows(&[vec![vec![x, cy], vec![cy, cw]]]);
        assert!(eigh((&z - &a1).block(0)).unwrap().min() > -1e-12);
        assert!(eigh((&z - &a2).block(0)).unwrap().min() > -1e-12);
        // lower bound: two-outcome projective POVMs at angle a
        let mut lower: f64 = 0.0;
        for k in 0..=20000 {
            let ang = std::f64::consts::PI * k as f64 / 20000.0;
            let (c, s) = (ang.cos(), ang.sin());
            let t1 = Element::from_real_rows(&[vec![vec![c * c, c * s], vec![c * s, s * s]]]);
            let t2 = &Element::identity(&alg) - &t1;
            lower = lower.max((&a1 * &t1).trace().re + (&a2 * &t2).trace().re);
        }
        let v = 1.0 + 0.5f64.sqrt();
        assert!(lower <= v + 1e-12 && upper >= v - 1e-12);
        assert!(upper - lower < 1e-6, "{upper} {lower}");
        assert!((sol.primal - v).abs() <= 1e-6 * f.scale());
        assert!(sol.dual <= upper + 1e-9);
        assert!(verify_majorant_certificate(&alg, &f, &sol, &tol()).unwrap().passed());
    }

    #[test]
    fn tampering_is_detected() {
        let alg = BlockAlgebra::full(2).unwrap();
        let f = family(&alg, vec![Element::from_diagonals(&[vec![1.0, 0.0]]), Element::from_diagonals(&[vec![0.0, 1.0]])]);
        let sol = minimal_majorant(&alg, &f, &tol()).unwrap();
        let mut bad = sol.clone();
        bad.z = bad.z.scale(0.5);
        let diag = verify_majorant_certificate(&alg, &f, &bad, &tol()).unwrap();
        assert!(diag.failed().any(|c| c.name == "feasibility"));

        let mut half = sol.clone();
        half.t = half.t.iter().map(|t| t.scale(0.5)).collect();
        let diag = verify_majorant_certificate(&alg, &f, &half, &tol()).unwrap();
        let c = diag.checks.iter().find(|c| c.name == "povm_sum").unwrap();
        assert!(!c.pass);
        assert!((c.measured - 0.5 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn random_families_certify() {
        for seed in 0..12u64 {
            let alg = if seed % 2 == 0 { BlockAlgebra::new(vec![3, 2]).unwrap() } else { BlockAlgebra::full(4).unwrap() };
            let n = 1 + (seed % 4) as usize;
            let f = family(&alg, gen::random_functionals(seed, &alg, n, seed % 3 == 0).unwrap());
            let sol = minimal_majorant(&alg, &f, &tol()).unwrap();
            let diag = verify_majorant_certificate(&alg, &f, &sol, &tol()).unwrap();
            assert!(diag.passed(), "seed {seed}: {:?}", diag.failed().collect::<Vec<_>>());
            for trial in 0..20 {
                let t = gen::random_povm::<f64>(seed * 100 + trial, &alg, n, &tol()).unwrap();
                let v: f64 = f.elements().iter().zip(t.elements()).map(|(a, t)| (a * t).trace().re).sum();
                assert!(v <= sol.primal + 1e-9);
            }
        }
    }
}
