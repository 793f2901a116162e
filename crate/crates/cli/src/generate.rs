//! Instance generation from a JSON spec, and the random instance family used
//! by `sweep`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use povmround::{gen, BlockAlgebra, Povm64, State64, Tolerances};

use crate::error::CliError;
use crate::format::{elements_to_repr, matrix_to_repr, InstanceFile, Metadata, PvmPairRepr};

/// XORed into the instance seed to seed the state of composite instances.
pub const STATE_SEED_SALT: u64 = 0xa5a5_a5a5_a5a5_a5a5;

const MAX_BLOCK_DIM: usize = 16;

fn m2() -> Vec<usize> {
    vec![2]
}

fn two() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenSpec {
    RandomPovmNearPvm {
        dims: Vec<usize>,
        n: usize,
        delta: f64,
        #[serde(default)]
        state_rank: Option<usize>,
    },
    RandomState {
        dims: Vec<usize>,
        #[serde(default)]
        rank: Option<usize>,
    },
    PaperCounterexample {
        delta: f64,
    },
    Linfty2Family {
        c: f64,
    },
    /// Without `perturbed`, the closed-form rotation of `(e11, e22)` in `M_2`
    /// with the normalised trace.
    RotatedPvmPair {
        theta: f64,
        #[serde(default = "m2")]
        dims: Vec<usize>,
        #[serde(default = "two")]
        n: usize,
        #[serde(default = "two")]
        m: usize,
        #[serde(default)]
        perturbed: bool,
        #[serde(default)]
        state_rank: Option<usize>,
    },
    RandomFunctionals {
        dims: Vec<usize>,
        n: usize,
        #[serde(default)]
        diagonal: bool,
    },
}

impl GenSpec {
    pub fn name(&self) -> &'static str {
        match self {
            GenSpec::RandomPovmNearPvm { .. } => "random_povm_near_pvm",
            GenSpec::RandomState { .. } => "random_state",
            GenSpec::PaperCounterexample { .. } => "paper_counterexample",
            GenSpec::Linfty2Family { .. } => "linfty2_family",
            GenSpec::RotatedPvmPair { .. } => "rotated_pvm_pair",
            GenSpec::RandomFunctionals { .. } => "random_functionals",
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }
}

fn invalid(e: povmround::Error) -> CliError {
    CliError::Parse { location: "params".into(), message: e.to_string() }
}

fn algebra(dims: &[usize]) -> Result<BlockAlgebra, CliError> {
    if let Some(&d) = dims.iter().find(|&&d| d > MAX_BLOCK_DIM) {
        return Err(CliError::Parse {
            location: "params.dims".into(),
            message: format!("block dimension {d} exceeds {MAX_BLOCK_DIM}"),
        });
    }
    BlockAlgebra::new(dims.to_vec()).map_err(|e| CliError::Parse { location: "params.dims".into(), message: e.to_string() })
}

fn with_state(file: &mut InstanceFile, phi: &State64) {
    file.state = Some(phi.densities().iter().map(matrix_to_repr).collect());
}

/// Builds the instance for `(spec, seed)`; the same pair always yields the
/// same file.
pub fn generate(spec: &GenSpec, seed: u64, tol: &Tolerances) -> Result<InstanceFile, CliError> {
    let metadata = Metadata {
        seed: Some(seed),
        generator: spec.name().into(),
        prng: gen::PRNG_NAME.into(),
        params: serde_json::to_value(spec).expect("spec serialises"),
    };
    let state_seed = seed ^ STATE_SEED_SALT;
    match spec {
        GenSpec::RandomPovmNearPvm { dims, n, delta, state_rank } => {
            let alg = algebra(dims)?;
            let a = gen::random_povm_near_pvm::<f64>(seed, &alg, *n, *delta, tol).map_err(invalid)?;
            let phi = gen::random_state::<f64>(state_seed, &alg, *state_rank, tol).map_err(invalid)?;
            let mut file = InstanceFile::new(&alg, metadata);
            file.povm = Some(elements_to_repr(a.elements()));
            with_state(&mut file, &phi);
            Ok(file)
        }
        GenSpec::RandomState { dims, rank } => {
            let alg = algebra(dims)?;
            let phi = gen::random_state::<f64>(seed, &alg, *rank, tol).map_err(invalid)?;
            let mut file = InstanceFile::new(&alg, metadata);
            with_state(&mut file, &phi);
            Ok(file)
        }
        GenSpec::PaperCounterexample { delta } => {
            let (alg, a, phi) = gen::paper_counterexample::<f64>(*delta, tol).map_err(invalid)?;
            let mut file = InstanceFile::new(&alg, metadata);
            file.povm = Some(elements_to_repr(a.elements()));
            with_state(&mut file, &phi);
            Ok(file)
        }
        GenSpec::Linfty2Family { c } => {
            let (alg, a, phi) = gen::linfty2_family::<f64>(*c, tol).map_err(invalid)?;
            let mut file = InstanceFile::new(&alg, metadata);
            file.povm = Some(elements_to_repr(a.elements()));
            with_state(&mut file, &phi);
            Ok(file)
        }
        GenSpec::RotatedPvmPair { theta, dims, n, m, perturbed, state_rank } => {
            let alg = algebra(dims)?;
            let (p, q, phi) = if *perturbed {
                let (p, q) = gen::rotated_pvm_pair::<f64>(*theta, &alg, *n, *m, Some(seed), tol).map_err(invalid)?;
                (p, q, gen::random_state::<f64>(state_seed, &alg, *state_rank, tol).map_err(invalid)?)
            } else {
                let (p, q) = gen::rotated_pvm_pair::<f64>(*theta, &alg, *n, *m, None, tol).map_err(invalid)?;
                (p, q, State64::normalized_trace(&alg))
            };
            let mut file = InstanceFile::new(&alg, metadata);
            file.pvm_pair = Some(PvmPairRepr { p: elements_to_repr(p.elements()), q: elements_to_repr(q.elements()) });
            with_state(&mut file, &phi);
            Ok(file)
        }
        GenSpec::RandomFunctionals { dims, n, diagonal } => {
            let alg = algebra(dims)?;
            let f = gen::random_functionals::<f64>(seed, &alg, *n, *diagonal).map_err(invalid)?;
            let mut file = InstanceFile::new(&alg, metadata);
            file.functionals = Some(elements_to_repr(&f));
            Ok(file)
        }
    }
}

fn default_count() -> usize {
    100
}
fn default_block() -> usize {
    8
}
fn default_total() -> usize {
    12
}
fn default_blocks() -> usize {
    3
}
fn default_min_n() -> usize {
    1
}
fn default_max_n() -> usize {
    5
}
fn default_delta() -> f64 {
    0.3
}
fn default_rank1() -> f64 {
    0.25
}

/// Random rounding instances for `sweep`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_block")]
    pub max_block_dim: usize,
    #[serde(default = "default_total")]
    pub max_total_dim: usize,
    #[serde(default = "default_blocks")]
    pub max_blocks: usize,
    #[serde(default = "default_min_n")]
    pub min_outputs: usize,
    #[serde(default = "default_max_n")]
    pub max_outputs: usize,
    /// Perturbation size is uniform in `[0, max_delta)`.
    #[serde(default = "default_delta")]
    pub max_delta: f64,
    /// Probability of a rank-one (vector) state.
    #[serde(default = "default_rank1")]
    pub rank1_fraction: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: &str| Err(CliError::Parse { location: field.into(), message: msg.into() });
        if self.max_block_dim == 0 || self.max_block_dim > MAX_BLOCK_DIM {
            return bad("max_block_dim", "must lie in 1..=16");
        }
        if self.max_total_dim == 0 || self.max_blocks == 0 {
            return bad("max_total_dim", "dimensions must be positive");
        }
        if self.min_outputs == 0 || self.min_outputs > self.max_outputs {
            return bad("min_outputs", "need 1 <= min_outputs <= max_outputs");
        }
        if !(self.max_delta >= 0.0 && self.max_delta.is_finite()) {
            return bad("max_delta", "must be a non-negative number");
        }
        if !(0.0..=1.0).contains(&self.rank1_fraction) {
            return bad("rank1_fraction", "must lie in [0, 1]");
        }
        Ok(())
    }
}

/// One sweep instance: random block structure, near-PVM POVM and state.
pub fn sweep_instance(
    seed: u64,
    cfg: &SweepConfig,
    tol: &Tolerances,
) -> povmround::Result<(BlockAlgebra, Povm64, State64)> {
    let mut rng = gen::rng(seed ^ STATE_SEED_SALT.rotate_left(17));
    let blocks = rng.random_range(1..=cfg.max_blocks);
    let mut dims = Vec::with_capacity(blocks);
    let mut left = cfg.max_total_dim;
    for _ in 0..blocks {
        if left == 0 {
            break;
        }
        let d = rng.random_range(1..=cfg.max_block_dim.min(left));
        dims.push(d);
        left -= d;
    }
    let n = rng.random_range(cfg.min_outputs..=cfg.max_outputs);
    let delta = if cfg.max_delta > 0.0 { rng.random_range(0.0..cfg.max_delta) } else { 0.0 };
    let rank = rng.random_bool(cfg.rank1_fraction).then_some(1);
    let alg = BlockAlgebra::new(dims)?;
    let a = gen::random_povm_near_pvm::<f64>(seed, &alg, n, delta, tol)?;
    let phi = gen::random_state::<f64>(seed ^ STATE_SEED_SALT, &alg, rank, tol)?;
    Ok((alg, a, phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing_and_determinism() {
        let tol = Tolerances::default();
        let spec = GenSpec::parse(r#"{"kind": "random_povm_near_pvm", "dims": [3, 2], "n": 3, "delta": 0.1}"#).unwrap();
        let a = generate(&spec, 7, &tol).unwrap().to_json();
        let b = generate(&spec, 7, &tol).unwrap().to_json();
        assert_eq!(a, b);
        assert_ne!(a, generate(&spec, 8, &tol).unwrap().to_json());
        InstanceFile::parse(&a).unwrap().decode(&tol).unwrap();
    }

    #[test]
    fn fixed_instances() {
        let tol = Tolerances::default();
        let file = generate(&GenSpec::Linfty2Family { c: 0.1 }, 0, &tol).unwrap();
        assert_eq!(file.dims, vec![1, 1]);
        let povm = file.povm.as_ref().unwrap();
        assert_eq!(povm[0], vec![vec![vec![[1.0, 0.0]]], vec![vec![[0.5, 0.0]]]]);
        assert_eq!(povm[1], vec![vec![vec![[0.0, 0.0]]], vec![vec![[0.5, 0.0]]]]);
        let state = file.state.as_ref().unwrap();
        assert_eq!(state[0][0][0][0], 0.9);
        assert_eq!(state[1][0][0][0], 0.1);

        let file = generate(&GenSpec::PaperCounterexample { delta: 0.01 }, 0, &tol).unwrap();
        let a1 = &file.povm.as_ref().unwrap()[0][0];
        assert!((a1[0][0][0] - (1.0 + 4.0 * 0.01) / (1.0 + 6.0 * 0.01)).abs() < 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        let tol = Tolerances::default();
        assert!(matches!(generate(&GenSpec::PaperCounterexample { delta: 0.5 }, 0, &tol), Err(CliError::Parse { .. })));
        let big = GenSpec::RandomState { dims: vec![17], rank: None };
        assert!(matches!(generate(&big, 0, &tol), Err(CliError::Parse { .. })));
    }

    #[test]
    fn sweep_instances_respect_limits() {
        let tol = Tolerances::default();
        let cfg = SweepConfig::default();
        for seed in 0..50 {
            let (alg, a, _) = sweep_instance(seed, &cfg, &tol).unwrap();
            assert!(alg.total_dim() <= 12 && alg.dims().iter().all(|&d| d <= 8));
            assert!((1..=5).contains(&a.n()));
        }
    }
}
