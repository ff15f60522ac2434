//! JSON encodings of operators, certificates, distributions, processes and
//! interactions.
//!
//! Operator matrices are written in the basis where the first listed site is
//! the most significant digit. On input the sites may be listed in any order;
//! the matrix is permuted into the canonical (sorted) order used by the core
//! library. On output sites are always canonical.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qw1_core::classical::{ClassicalDistribution, StationaryProcess};
use qw1_core::lattice::Interaction;
use qw1_core::{DensityMatrix, HermitianOperator, Matrix, Region, Site, TransportCertificate, C64};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<Vec<Vec<i64>>>,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl OperatorJson {
    pub fn from_operator(h: &HermitianOperator) -> Self {
        let n = h.dim();
        let m = h.matrix().as_slice();
        let row = |i: usize, f: fn(&C64) -> f64| (0..n).map(|j| f(&m[i * n + j])).collect::<Vec<f64>>();
        OperatorJson {
            q: Some(h.region().q()),
            sites: Some(h.region().sites().iter().map(|s| s.coords().to_vec()).collect()),
            re: (0..n).map(|i| row(i, |z| z.re)).collect(),
            im: (0..n).map(|i| row(i, |z| z.im)).collect(),
        }
    }

    /// Builds the operator, taking `q` and `sites` from `defaults` when absent.
    pub fn to_operator_with(&self, defaults: Option<(usize, &[Vec<i64>])>) -> Result<HermitianOperator, CliError> {
        let q = self
            .q
            .or(defaults.map(|d| d.0))
            .ok_or_else(|| CliError::input("operator is missing \"q\""))?;
        let listed: Vec<Vec<i64>> = match (&self.sites, defaults) {
            (Some(s), _) => s.clone(),
            (None, Some((_, s))) => s.to_vec(),
            (None, None) => return Err(CliError::input("operator is missing \"sites\"")),
        };
        if let (Some(own), Some((_, outer))) = (&self.sites, defaults) {
            let mut a = own.clone();
            let mut b = outer.to_vec();
            a.sort();
            b.sort();
            if a != b {
                return Err(CliError::input("operator sites differ from the enclosing term's sites"));
            }
        }
        let region = Region::new(listed.iter().cloned().map(Site::new).collect(), q)?;
        if region.len() != listed.len() {
            return Err(CliError::input("operator sites contain duplicates"));
        }
        let n = region.dim();
        if self.re.len() != n || self.re.iter().any(|r| r.len() != n) {
            return Err(CliError::input(format!("\"re\" must be a {n}x{n} matrix")));
        }
        let has_im = !self.im.is_empty();
        if has_im && (self.im.len() != n || self.im.iter().any(|r| r.len() != n)) {
            return Err(CliError::input(format!("\"im\" must be a {n}x{n} matrix or omitted")));
        }
        let listed_matrix = Matrix::from_fn(n, |i, j| {
            C64::new(self.re[i][j], if has_im { self.im[i][j] } else { 0.0 })
        });
        let perm = canonical_permutation(&listed, region.sites(), q);
        let m = Matrix::from_fn(n, |i, j| listed_matrix.as_slice()[perm[i] * n + perm[j]]);
        Ok(HermitianOperator::new(region, m)?)
    }

    pub fn to_operator(&self) -> Result<HermitianOperator, CliError> {
        self.to_operator_with(None)
    }
}

/// `perm[c]` is the listed-order index of canonical basis index `c`.
fn canonical_permutation(listed: &[Vec<i64>], canonical: &[Site], q: usize) -> Vec<usize> {
    let n_sites = listed.len();
    let pos: Vec<usize> = canonical
        .iter()
        .map(|s| listed.iter().position(|l| l.as_slice() == s.coords()).expect("same site set"))
        .collect();
    let dim = q.pow(n_sites as u32);
    (0..dim)
        .map(|c| {
            let mut digits = vec![0usize; n_sites];
            let mut rest = c;
            for k in (0..n_sites).rev() {
                digits[pos[k]] = rest % q;
                rest /= q;
            }
            digits.iter().fold(0, |acc, &d| acc * q + d)
        })
        .collect()
}

pub fn operator_to_value(h: &HermitianOperator) -> Value {
    serde_json::to_value(OperatorJson::from_operator(h)).expect("operator serializes")
}

pub fn parse_operator(v: &Value) -> Result<HermitianOperator, CliError> {
    let j: OperatorJson = serde_json::from_value(v.clone()).map_err(|e| CliError::input(format!("operator: {e}")))?;
    j.to_operator()
}

pub fn parse_state(v: &Value) -> Result<DensityMatrix, CliError> {
    Ok(DensityMatrix::new(parse_operator(v)?)?)
}

/// A family is a JSON array of states, or an object with a `"states"` array.
pub fn parse_family(v: &Value) -> Result<Vec<DensityMatrix>, CliError> {
    let items = match v {
        Value::Array(a) => a,
        Value::Object(o) => match o.get("states") {
            Some(Value::Array(a)) => a,
            _ => return Err(CliError::input("family object needs a \"states\" array")),
        },
        _ => return Err(CliError::input("family must be an array of states")),
    };
    items
        .iter()
        .enumerate()
        .map(|(k, s)| parse_state(s).map_err(|e| e.context(&format!("family member {k}"))))
        .collect()
}

#[derive(Serialize)]
struct PieceJson {
    site: Vec<i64>,
    op: OperatorJson,
}

#[derive(Serialize)]
struct CertificateJson {
    primal: f64,
    dual: f64,
    gap: f64,
    iterations: usize,
    converged: bool,
    witness: OperatorJson,
    witness_lipschitz: f64,
    decomposition: Vec<PieceJson>,
}

pub fn certificate_to_value(c: &TransportCertificate) -> Value {
    let j = CertificateJson {
        primal: c.primal_value,
        dual: c.dual_value,
        gap: c.gap,
        iterations: c.iterations,
        converged: c.converged,
        witness: OperatorJson::from_operator(&c.dual_witness),
        witness_lipschitz: c.witness_lipschitz,
        decomposition: c
            .decomposition
            .iter()
            .map(|(s, op)| PieceJson {
                site: s.coords().to_vec(),
                op: OperatorJson::from_operator(op),
            })
            .collect(),
    };
    serde_json::to_value(j).expect("certificate serializes")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionJson {
    pub q: usize,
    pub sites: Vec<Vec<i64>>,
    pub probs: Vec<f64>,
}

pub fn parse_distribution(v: &Value) -> Result<ClassicalDistribution, CliError> {
    let j: DistributionJson =
        serde_json::from_value(v.clone()).map_err(|e| CliError::input(format!("distribution: {e}")))?;
    let region = Region::new(j.sites.into_iter().map(Site::new).collect(), j.q)?;
    Ok(ClassicalDistribution::new(region, j.probs)?)
}

pub fn distribution_to_value(mu: &ClassicalDistribution) -> Value {
    serde_json::to_value(DistributionJson {
        q: mu.region().q(),
        sites: mu.region().sites().iter().map(|s| s.coords().to_vec()).collect(),
        probs: mu.probs().to_vec(),
    })
    .expect("distribution serializes")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProcessJson {
    Markov {
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
        pi: Vec<f64>,
    },
    Iid {
        p: Vec<f64>,
    },
}

pub fn parse_process(v: &Value) -> Result<StationaryProcess, CliError> {
    let j: ProcessJson = serde_json::from_value(v.clone()).map_err(|e| CliError::input(format!("process: {e}")))?;
    Ok(match j {
        ProcessJson::Markov { p, pi } => StationaryProcess::markov(p, pi)?,
        ProcessJson::Iid { p } => StationaryProcess::iid(p)?,
    })
}

pub fn process_to_value(p: &StationaryProcess) -> Value {
    let j = match p {
        StationaryProcess::Markov { transition, pi } => ProcessJson::Markov {
            p: transition.clone(),
            pi: pi.clone(),
        },
        StationaryProcess::Iid { p } => ProcessJson::Iid { p: p.clone() },
    };
    serde_json::to_value(j).expect("process serializes")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub sites: Vec<Vec<i64>>,
    pub op: OperatorJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InteractionJson {
    pub d: usize,
    pub q: usize,
    pub terms: Vec<TermJson>,
}

pub fn parse_interaction(v: &Value) -> Result<Interaction, CliError> {
    let j: InteractionJson =
        serde_json::from_value(v.clone()).map_err(|e| CliError::input(format!("interaction: {e}")))?;
    let mut terms = Vec::with_capacity(j.terms.len());
    for (k, t) in j.terms.iter().enumerate() {
        if t.sites.iter().any(|s| s.len() != j.d) {
            return Err(CliError::input(format!("term {k}: site coordinates must have length d = {}", j.d)));
        }
        let op = t
            .op
            .to_operator_with(Some((j.q, &t.sites)))
            .map_err(|e| e.context(&format!("term {k}")))?;
        if op.region().q() != j.q {
            return Err(CliError::input(format!("term {k}: local dimension differs from q = {}", j.q)));
        }
        terms.push(op);
    }
    Ok(Interaction::new(j.d, j.q, terms)?)
}

pub fn interaction_to_value(phi: &Interaction) -> Value {
    let j = InteractionJson {
        d: phi.d(),
        q: phi.q(),
        terms: phi
            .terms()
            .iter()
            .map(|t| {
                let mut op = OperatorJson::from_operator(t);
                let sites = op.sites.take().unwrap_or_default();
                op.q = None;
                TermJson { sites, op }
            })
            .collect(),
    };
    serde_json::to_value(j).expect("interaction serializes")
}
