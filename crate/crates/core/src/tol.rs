//! Numerical tolerance configuration shared by every operation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interior-point parameters for the minimal majorant solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    /// Initial barrier weight relative to `Tr(z0) / dim`.
    pub mu0_scale: f64,
    /// Factor applied to the barrier weight after each centering phase.
    pub mu_shrink: f64,
    /// Centering stops once `||1 - sum_i mu (z - a_i)^-1||_F` drops below
    /// this value (divided by `max(1, ||z||)`).
    pub newton_tol: f64,
    /// Relative duality gap target; the absolute target is
    /// `gap_tol * max(1, sum_i Tr a_i)`.
    pub gap_tol: f64,
    /// Maximum number of Newton steps across the whole solve.
    pub max_iters: usize,
}

impl Default for BarrierParams {
    fn default() -> Self {
        Self {
            mu0_scale: 1.0,
            mu_shrink: 0.25,
            newton_tol: 1e-7,
            gap_tol: 1e-6,
            max_iters: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Eigenvalue grouping gap, relative to `max(1, spectral radius)`.
    pub cluster_tol: f64,
    /// Singular values below `rank_tol * sigma_max` count as zero.
    pub rank_tol: f64,
    /// Allowed negativity of positive operators.
    pub psd_tol: f64,
    /// Residual threshold for certificates and structural identities.
    pub cert_tol: f64,
    /// Seed for the generic commutant element used when decomposing the
    /// algebra generated by a POVM.
    pub seed: u64,
    pub barrier: BarrierParams,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cluster_tol: 1e-8,
            rank_tol: 1e-10,
            psd_tol: 1e-9,
            cert_tol: 1e-9,
            seed: 0x5eed,
            barrier: BarrierParams::default(),
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cluster_tol", self.cluster_tol),
            ("rank_tol", self.rank_tol),
            ("psd_tol", self.psd_tol),
            ("cert_tol", self.cert_tol),
            ("mu0_scale", self.barrier.mu0_scale),
            ("newton_tol", self.barrier.newton_tol),
            ("gap_tol", self.barrier.gap_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        let s = self.barrier.mu_shrink;
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Validation(format!("mu_shrink must lie in (0,1), got {s}")));
        }
        if self.barrier.max_iters == 0 {
            return Err(Error::Validation("max_iters must be positive".into()));
        }
        Ok(())
    }

    /// Sets a single field from its textual `key=value` form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: &dyn std::fmt::Display| Error::InvalidParam(format!("{key}={value}: {e}"));
        let float = || value.trim().parse::<f64>().map_err(|e| bad(&e));
        match key.trim() {
            "cluster_tol" => self.cluster_tol = float()?,
            "rank_tol" => self.rank_tol = float()?,
            "psd_tol" => self.psd_tol = float()?,
            "cert_tol" => self.cert_tol = float()?,
            "seed" => self.seed = value.trim().parse().map_err(|e| bad(&e))?,
            "mu0_scale" => self.barrier.mu0_scale = float()?,
            "mu_shrink" => self.barrier.mu_shrink = float()?,
            "newton_tol" => self.barrier.newton_tol = float()?,
            "gap_tol" => self.barrier.gap_tol = float()?,
            "max_iters" => self.barrier.max_iters = value.trim().parse().map_err(|e| bad(&e))?,
            other => return Err(Error::InvalidParam(format!("unknown tolerance key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a comma separated `key=val,key=val` list.
    pub fn apply_overrides(&mut self, list: &str) -> Result<()> {
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidParam(format!("expected key=val, got `{item}`")))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Absolute clustering gap for a spectrum of the given radius.
    pub fn cluster_gap(&self, spectral_radius: f64) -> f64 {
        self.cluster_tol * spectral_radius.max(1.0)
    }
}
