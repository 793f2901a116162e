//! Versioned JSON instance and report files.
//!
//! Complex matrices are nested row-major arrays of `[re, im]` pairs and an
//! algebra element is a list of such matrices, one per block. Floats are
//! written as shortest round-trip decimals, so `load(save(x)) == x` exactly.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use povmround::{
    BlockAlgebra, CMat, Check, Element64, FunctionalFamily64, MajorantSolution64, Povm64, Pvm64, State64, Tolerances, C,
};

use crate::error::CliError;

pub const INSTANCE_VERSION: &str = "povmround-instance/1";
pub const REPORT_VERSION: &str = "povmround-report/1";

pub type MatrixRepr = Vec<Vec<[f64; 2]>>;
pub type ElementRepr = Vec<MatrixRepr>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvmPairRepr {
    /// PVM to be repaired.
    pub p: Vec<ElementRepr>,
    /// Reference PVM the output must commute with.
    pub q: Vec<ElementRepr>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionRepr {
    pub z: ElementRepr,
    pub t: Vec<ElementRepr>,
    pub mu_final: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub generator: String,
    #[serde(default)]
    pub prng: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: String,
    pub dims: Vec<usize>,
    /// Density matrices, one per block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<ElementRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub povm: Option<Vec<ElementRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pvm_pair: Option<PvmPairRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functionals: Option<Vec<ElementRepr>>,
    /// Candidate majorant solution, checked by `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub majorant_solution: Option<SolutionRepr>,
    #[serde(default)]
    pub metadata: Metadata,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub version: String,
    pub command: String,
    /// `sha256:<hex>` of the input file bytes.
    pub input_digest: String,
    pub tolerances: Tolerances,
    /// Metadata of the input instance (generator, seed, parameters).
    pub instance_metadata: Value,
    pub result: Value,
    pub duration_ms: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ReportFile {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

pub fn matrix_to_repr(m: &CMat<f64>) -> MatrixRepr {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

pub fn element_to_repr(x: &Element64) -> ElementRepr {
    x.blocks().iter().map(matrix_to_repr).collect()
}

pub fn elements_to_repr(xs: &[Element64]) -> Vec<ElementRepr> {
    xs.iter().map(element_to_repr).collect()
}

fn parse_err(path: &str, message: impl Into<String>) -> CliError {
    CliError::Parse { location: path.to_string(), message: message.into() }
}

pub fn matrix_from_repr(m: &MatrixRepr, d: usize, path: &str) -> Result<CMat<f64>, CliError> {
    if m.len() != d {
        return Err(parse_err(path, format!("expected {d} rows, found {}", m.len())));
    }
    let mut out = CMat::zeros(d, d);
    for (r, row) in m.iter().enumerate() {
        if row.len() != d {
            return Err(parse_err(&format!("{path}[{r}]"), format!("expected {d} entries, found {}", row.len())));
        }
        for (c, z) in row.iter().enumerate() {
            if !(z[0].is_finite() && z[1].is_finite()) {
                return Err(parse_err(&format!("{path}[{r}][{c}]"), "entry is not finite"));
            }
            out[(r, c)] = C::new(z[0], z[1]);
        }
    }
    Ok(out)
}

pub fn element_from_repr(x: &ElementRepr, alg: &BlockAlgebra, path: &str) -> Result<Element64, CliError> {
    if x.len() != alg.num_blocks() {
        return Err(parse_err(path, format!("expected {} blocks, found {}", alg.num_blocks(), x.len())));
    }
    let blocks = x
        .iter()
        .zip(alg.dims())
        .enumerate()
        .map(|(k, (m, &d))| matrix_from_repr(m, d, &format!("{path}[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Element64::from_blocks(blocks))
}

fn elements_from_repr(xs: &[ElementRepr], alg: &BlockAlgebra, path: &str) -> Result<Vec<Element64>, CliError> {
    xs.iter().enumerate().map(|(i, x)| element_from_repr(x, alg, &format!("{path}[{i}]"))).collect()
}

/// An instance with every object decoded and validated.
#[derive(Clone, Debug)]
pub struct Instance {
    pub algebra: BlockAlgebra,
    pub state: Option<State64>,
    pub povm: Option<Povm64>,
    pub pvm_pair: Option<(Pvm64, Pvm64)>,
    pub functionals: Option<FunctionalFamily64>,
    pub solution: Option<MajorantSolution64>,
    pub metadata: Metadata,
}

impl Instance {
    pub fn require_state(&self) -> Result<&State64, CliError> {
        self.state.as_ref().ok_or_else(|| parse_err("state", "this command needs a state"))
    }

    pub fn require_povm(&self) -> Result<&Povm64, CliError> {
        self.povm.as_ref().ok_or_else(|| parse_err("povm", "this command needs a POVM"))
    }

    pub fn require_pvm_pair(&self) -> Result<&(Pvm64, Pvm64), CliError> {
        self.pvm_pair.as_ref().ok_or_else(|| parse_err("pvm_pair", "this command needs a PVM pair"))
    }

    pub fn require_functionals(&self) -> Result<&FunctionalFamily64, CliError> {
        self.functionals.as_ref().ok_or_else(|| parse_err("functionals", "this command needs a functional family"))
    }
}

fn validated<T>(r: povmround::Result<T>, path: &str) -> Result<T, CliError> {
    r.map_err(|e| parse_err(path, e.to_string()))
}

impl InstanceFile {
    pub fn new(alg: &BlockAlgebra, metadata: Metadata) -> Self {
        Self {
            version: INSTANCE_VERSION.into(),
            dims: alg.dims().to_vec(),
            state: None,
            povm: None,
            pvm_pair: None,
            functionals: None,
            majorant_solution: None,
            metadata,
        }
    }

    /// Parses JSON text; syntax errors carry the line and column.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serialises");
        s.push('\n');
        s
    }

    /// Decodes and validates every object in the file.
    pub fn decode(&self, tol: &Tolerances) -> Result<Instance, CliError> {
        if self.version != INSTANCE_VERSION {
            return Err(parse_err("version", format!("unsupported version `{}`, expected `{INSTANCE_VERSION}`", self.version)));
        }
        let alg = validated(BlockAlgebra::new(self.dims.clone()), "dims")?;
        let state = match &self.state {
            Some(s) => {
                let e = element_from_repr(s, &alg, "state")?;
                Some(validated(State64::new(&alg, e.into_blocks(), tol), "state")?)
            }
            None => None,
        };
        let povm = match &self.povm {
            Some(p) => Some(validated(Povm64::new(&alg, elements_from_repr(p, &alg, "povm")?, tol), "povm")?),
            None => None,
        };
        let pvm_pair = match &self.pvm_pair {
            Some(pair) => {
                let p = validated(Pvm64::new(&alg, elements_from_repr(&pair.p, &alg, "pvm_pair.p")?, tol), "pvm_pair.p")?;
                let q = validated(Pvm64::new(&alg, elements_from_repr(&pair.q, &alg, "pvm_pair.q")?, tol), "pvm_pair.q")?;
                Some((p, q))
            }
            None => None,
        };
        let functionals = match &self.functionals {
            Some(f) => Some(validated(
                FunctionalFamily64::new(&alg, elements_from_repr(f, &alg, "functionals")?, tol),
                "functionals",
            )?),
            None => None,
        };
        let solution = match &self.majorant_solution {
            Some(sol) => {
                let f = functionals
                    .as_ref()
                    .ok_or_else(|| parse_err("majorant_solution", "a solution needs a functional family"))?;
                let z = element_from_repr(&sol.z, &alg, "majorant_solution.z")?;
                let t = elements_from_repr(&sol.t, &alg, "majorant_solution.t")?;
                Some(validated(MajorantSolution64::from_parts(f, z, t, sol.mu_final), "majorant_solution")?)
            }
            None => None,
        };
        Ok(Instance { algebra: alg, state, povm, pvm_pair, functionals, solution, metadata: self.metadata.clone() })
    }
}
