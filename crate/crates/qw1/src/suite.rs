//! Seeded batch runs of the inequality checkers.
//!
//! Sample `i` of checker `c` draws from a generator seeded by a fixed mix of
//! the run seed, the checker's position in [`CHECKERS`] and `i`, and uses
//! `sizes[i % sizes.len()]` sites. Samples may run on several threads; the
//! report lists them in (checker, index) order regardless.

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use qw1_core::bounds::{CheckResult, Verifier};
use qw1_core::classical::{self, diagonal_embed, hamming_w1, ClassicalDistribution, StationaryProcess};
use qw1_core::lattice::{self, Interaction, TRANSLATION_INVARIANCE_NOTE};
use qw1_core::random::{
    diag_dirichlet, dirichlet, full_rank_product, gue_hamiltonian, haar_pure, hs_mixed, rng_from_seed, traceless,
    SeededRng,
};
use qw1_core::solver::{w1_distance, w1_norm};
use qw1_core::{DensityMatrix, Error, Region, Result, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    Entropy,
    Transport,
    Lattice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Entropy,
    Transport,
    Lattice,
}

impl Suite {
    pub fn from_name(s: &str) -> Option<Suite> {
        match s {
            "all" => Some(Suite::All),
            "entropy" => Some(Suite::Entropy),
            "transport" => Some(Suite::Transport),
            "lattice" => Some(Suite::Lattice),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Entropy => "entropy",
            Suite::Transport => "transport",
            Suite::Lattice => "lattice",
        }
    }

    fn includes(self, g: Group) -> bool {
        match self {
            Suite::All => true,
            Suite::Entropy => g == Group::Entropy,
            Suite::Transport => g == Group::Transport,
            Suite::Lattice => g == Group::Lattice,
        }
    }
}

type Instance = fn(&Verifier, &mut SeededRng, usize) -> Result<Vec<CheckResult>>;

pub struct Checker {
    pub name: &'static str,
    pub group: Group,
    run: Instance,
}

pub const CHECKERS: &[Checker] = &[
    Checker { name: "entropy_continuity", group: Group::Entropy, run: entropy_continuity },
    Checker { name: "marton", group: Group::Entropy, run: marton },
    Checker { name: "marton_k", group: Group::Entropy, run: marton_k },
    Checker { name: "gaussian_concentration", group: Group::Entropy, run: gaussian },
    Checker { name: "poincare", group: Group::Entropy, run: poincare },
    Checker { name: "w1_sandwich", group: Group::Transport, run: sandwich },
    Checker { name: "local_bound", group: Group::Transport, run: local_bound },
    Checker { name: "superadditivity", group: Group::Transport, run: superadditivity },
    Checker { name: "triangle", group: Group::Transport, run: triangle },
    Checker { name: "diagonal_recovery", group: Group::Transport, run: diagonal_recovery },
    Checker { name: "pressure_bound", group: Group::Lattice, run: pressure_bound },
    Checker { name: "lipschitz_r_norm", group: Group::Lattice, run: lipschitz_r_norm },
    Checker { name: "w1_gibbs_entropy", group: Group::Lattice, run: w1_gibbs_entropy },
    Checker { name: "poincare_lattice", group: Group::Lattice, run: poincare_lattice },
    Checker { name: "specific_entropy_continuity", group: Group::Lattice, run: specific_entropy },
];

pub fn checker(name: &str) -> Option<(usize, &'static Checker)> {
    CHECKERS.iter().enumerate().find(|(_, c)| c.name == name)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn sample_seed(seed: u64, checker: usize, index: usize) -> u64 {
    splitmix(seed ^ splitmix(((checker as u64) << 32) | index as u64))
}

#[derive(Clone, Debug)]
pub struct SampleRecord {
    pub checker: &'static str,
    pub index: usize,
    pub seed: u64,
    pub sites: usize,
    pub outcome: std::result::Result<Vec<CheckResult>, Error>,
}

impl SampleRecord {
    pub fn passed(&self) -> bool {
        matches!(&self.outcome, Ok(rs) if rs.iter().all(|r| r.pass))
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
    pub sizes: Vec<usize>,
    pub verifier: Verifier,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub config: SuiteConfig,
    pub records: Vec<SampleRecord>,
}

/// Runs `samples` instances of one checker, in index order.
pub fn run_checker(
    name: &str,
    seed: u64,
    samples: usize,
    sizes: &[usize],
    verifier: &Verifier,
) -> std::result::Result<Vec<SampleRecord>, Error> {
    let (id, c) = checker(name).ok_or_else(|| Error::InvalidInput(format!("unknown checker {name}")))?;
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidInput("sizes must be a nonempty list of positive site counts".into()));
    }
    Ok((0..samples)
        .into_par_iter()
        .map(|i| {
            let s = sample_seed(seed, id, i);
            let n = sizes[i % sizes.len()];
            let mut rng = rng_from_seed(s);
            SampleRecord {
                checker: c.name,
                index: i,
                seed: s,
                sites: n,
                outcome: (c.run)(verifier, &mut rng, n),
            }
        })
        .collect())
}

pub fn run(cfg: &SuiteConfig) -> std::result::Result<Report, Error> {
    let mut records = Vec::new();
    for c in CHECKERS.iter().filter(|c| cfg.suite.includes(c.group)) {
        records.extend(run_checker(c.name, cfg.seed, cfg.samples, &cfg.sizes, &cfg.verifier)?);
    }
    Ok(Report {
        config: cfg.clone(),
        records,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckerSummary {
    pub name: &'static str,
    pub samples: usize,
    pub checks: usize,
    pub failures: usize,
    pub errors: usize,
    pub min_slack: Option<f64>,
}

impl Report {
    pub fn summary(&self) -> Vec<CheckerSummary> {
        let mut out: Vec<CheckerSummary> = Vec::new();
        for c in CHECKERS.iter().filter(|c| self.config.suite.includes(c.group)) {
            let mut s = CheckerSummary {
                name: c.name,
                samples: 0,
                checks: 0,
                failures: 0,
                errors: 0,
                min_slack: None,
            };
            for r in self.records.iter().filter(|r| r.checker == c.name) {
                s.samples += 1;
                match &r.outcome {
                    Ok(results) => {
                        for res in results {
                            s.checks += 1;
                            if !res.pass {
                                s.failures += 1;
                            }
                            s.min_slack = Some(s.min_slack.map_or(res.slack, |m: f64| m.min(res.slack)));
                        }
                    }
                    Err(_) => s.errors += 1,
                }
            }
            out.push(s);
        }
        out
    }

    pub fn failures(&self) -> usize {
        self.summary().iter().map(|s| s.failures + s.errors).sum()
    }

    pub fn has_nonconvergence(&self) -> bool {
        self.records
            .iter()
            .any(|r| matches!(r.outcome, Err(Error::MaxIterExceeded { .. })))
    }

    pub fn to_value(&self) -> Value {
        let cfg = &self.config;
        let summary: Vec<Value> = self
            .summary()
            .iter()
            .map(|s| {
                json!({
                    "name": s.name,
                    "samples": s.samples,
                    "checks": s.checks,
                    "failures": s.failures,
                    "errors": s.errors,
                    "min_slack": s.min_slack,
                })
            })
            .collect();
        let records: Vec<Value> = self.records.iter().map(record_to_value).collect();
        let mut notes = Vec::new();
        if cfg.suite.includes(Group::Lattice) {
            notes.push(TRANSLATION_INVARIANCE_NOTE);
        }
        json!({
            "suite": cfg.suite.name(),
            "seed": cfg.seed,
            "samples": cfg.samples,
            "sizes": cfg.sizes,
            "config": solver_config_value(&cfg.verifier.cfg),
            "tolerance_override": cfg.verifier.tolerance,
            "versions": {"qw1": env!("CARGO_PKG_VERSION")},
            "total_failures": self.failures(),
            "summary": summary,
            "notes": notes,
            "records": records,
        })
    }

    pub fn human_summary(&self) -> String {
        let mut s = format!(
            "suite {} seed {} samples {} sizes {:?}\n",
            self.config.suite.name(),
            self.config.seed,
            self.config.samples,
            self.config.sizes
        );
        for c in self.summary() {
            let slack = c.min_slack.map_or("n/a".to_string(), |v| format!("{v:.3e}"));
            s.push_str(&format!(
                "{:<30} samples {:>5}  checks {:>5}  failures {:>3}  errors {:>3}  min slack {}\n",
                c.name, c.samples, c.checks, c.failures, c.errors, slack
            ));
        }
        s.push_str(&format!("total failures: {}\n", self.failures()));
        s
    }
}

pub fn solver_config_value(cfg: &SolverConfig) -> Value {
    json!({
        "tol_gap": cfg.tol_gap,
        "max_iter": cfg.max_iter,
        "admm_rho": cfg.admm_rho,
        "adapt": cfg.adapt,
        "dim_cap": qw1_core::region::dim_cap(),
    })
}

pub fn check_to_value(r: &CheckResult) -> Value {
    let mut obs = Map::new();
    for (k, v) in &r.observations {
        obs.insert(k.clone(), json!(v));
    }
    json!({
        "name": r.name,
        "lhs": r.lhs,
        "rhs": r.rhs,
        "slack": r.slack,
        "tolerance": r.tolerance_used,
        "pass": r.pass,
        "inputs_digest": r.inputs_digest,
        "observations": obs,
    })
}

fn record_to_value(r: &SampleRecord) -> Value {
    let mut v = json!({
        "checker": r.checker,
        "index": r.index,
        "seed": r.seed,
        "sites": r.sites,
    });
    let o = v.as_object_mut().expect("object");
    match &r.outcome {
        Ok(results) => {
            o.insert("results".into(), Value::Array(results.iter().map(check_to_value).collect()));
        }
        Err(e) => {
            o.insert("error".into(), json!(e.to_string()));
        }
    }
    v
}

fn chain(n: usize, q: usize) -> Result<Region> {
    Region::chain(0, n, q)
}

/// A pair of states on `region` drawn from one of several ensembles, including
/// nearby pairs so that small distances are exercised.
pub fn random_pair(rng: &mut SeededRng, region: &Region) -> Result<(DensityMatrix, DensityMatrix)> {
    Ok(match rng.random_range(0..4) {
        0 => (hs_mixed(rng, region), hs_mixed(rng, region)),
        1 => (haar_pure(rng, region)?, hs_mixed(rng, region)),
        2 => (diag_dirichlet(rng, region)?, diag_dirichlet(rng, region)?),
        _ => {
            let sigma = hs_mixed(rng, region);
            let eps = 0.1 * rng.random::<f64>();
            let other = hs_mixed(rng, region);
            let rho = sigma.op().scale(1.0 - eps).add(&other.op().scale(eps))?;
            (DensityMatrix::new(rho)?, sigma)
        }
    })
}

fn entropy_continuity(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let (rho, sigma) = random_pair(rng, &chain(n, 2)?)?;
    let cert = w1_distance(&rho, &sigma, &v.cfg)?;
    cert.ensure_converged()?;
    Ok(vec![
        v.check_entropy_continuity(&rho, &sigma, &cert)?,
        v.check_entropy_continuity_old(&rho, &sigma, &cert)?,
    ])
}

fn marton(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let r = chain(n, 2)?;
    let sigma = full_rank_product(rng, &r, 0.05)?;
    let rho = if rng.random::<bool>() { hs_mixed(rng, &r) } else { haar_pure(rng, &r)? };
    let cert = w1_distance(&rho, &sigma.to_density(), &v.cfg)?;
    cert.ensure_converged()?;
    Ok(vec![v.check_marton(&rho, &sigma, &cert)?])
}

fn marton_k(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let (block, k) = if n >= 2 && n % 2 == 0 && rng.random::<bool>() { (2, n / 2) } else { (1, n) };
    let base = chain(block, 2)?;
    let sigma = full_rank_product(rng, &base, 0.05)?.to_density();
    let target = chain(block * k, 2)?;
    let rho = hs_mixed(rng, &target);
    let sigma_k = qw1_core::bounds::tensor_power_onto(&sigma, k, &target)?;
    let cert = w1_distance(&rho, &sigma_k, &v.cfg)?;
    cert.ensure_converged()?;
    Ok(vec![v.check_marton_k(&rho, &sigma, k, &cert)?])
}

fn gaussian(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let r = chain(n, 2)?;
    let h = gue_hamiltonian(rng, &r).scale(2.0 * rng.random::<f64>());
    let omega = full_rank_product(rng, &r, 0.05)?;
    Ok(vec![v.check_gaussian_concentration(&h, &omega)?])
}

fn poincare(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let r = chain(n, 2)?;
    let h = gue_hamiltonian(rng, &r);
    let omega = full_rank_product(rng, &r, 0.05)?;
    Ok(vec![v.check_poincare(&h, &omega)?])
}

fn sandwich(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let delta = traceless(rng, &chain(n, 2)?);
    let cert = w1_norm(&delta, &v.cfg)?;
    cert.ensure_converged()?;
    Ok(vec![v.check_w1_sandwich(&cert, &delta)?])
}

fn local_bound(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let r = chain(n, 2)?;
    let k = rng.random_range(1..=n);
    let sub = Region::new(r.sites()[..k].to_vec(), 2)?;
    let rest = r.difference(&sub);
    let rho = hs_mixed(rng, &r);
    let sigma = if rest.is_empty() {
        hs_mixed(rng, &r)
    } else {
        hs_mixed(rng, &sub).tensor(&rho.partial_trace(&rest)?)?
    };
    let delta = rho.difference(&sigma)?;
    let cert = w1_norm(&delta, &v.cfg)?;
    cert.ensure_converged()?;
    Ok(vec![v.check_local_bound(&cert, &delta, &sub)?])
}

fn superadditivity(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let n = n.max(2);
    let r = chain(n, 2)?;
    let (rho, sigma) = random_pair(rng, &r)?;
    let k = rng.random_range(1..n);
    let left = Region::new(r.sites()[..k].to_vec(), 2)?;
    let right = r.difference(&left);
    let joint = w1_distance(&rho, &sigma, &v.cfg)?;
    let a = w1_distance(&rho.partial_trace(&left)?, &sigma.partial_trace(&left)?, &v.cfg)?;
    let b = w1_distance(&rho.partial_trace(&right)?, &sigma.partial_trace(&right)?, &v.cfg)?;
    for c in [&joint, &a, &b] {
        c.ensure_converged()?;
    }
    Ok(vec![v.check_superadditivity(&joint, &[&a, &b])?])
}

fn triangle(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let r = chain(n, 2)?;
    let (rho, sigma) = random_pair(rng, &r)?;
    let tau = hs_mixed(rng, &r);
    let rt = w1_distance(&rho, &tau, &v.cfg)?;
    let rs = w1_distance(&rho, &sigma, &v.cfg)?;
    let st = w1_distance(&sigma, &tau, &v.cfg)?;
    for c in [&rt, &rs, &st] {
        c.ensure_converged()?;
    }
    Ok(vec![v.check_triangle(&rt, &rs, &st)?])
}

/// `|W1(diag μ, diag ν) - W1_Hamming(μ, ν)|`, with the exact classical value
/// as the reference.
pub fn diagonal_recovery_check(v: &Verifier, mu: &ClassicalDistribution, nu: &ClassicalDistribution) -> Result<CheckResult> {
    let classical = hamming_w1(mu, nu)?;
    let cert = w1_distance(&diagonal_embed(mu), &diagonal_embed(nu), &v.cfg)?;
    cert.ensure_converged()?;
    let diff = (cert.primal_value - classical.value).abs();
    let digest = qw1_core::digest::InputDigest::new()
        .label("diagonal_recovery")
        .f64s(mu.probs())
        .f64s(nu.probs())
        .finish();
    Ok(CheckResult::new("diagonal_recovery", diff, 0.0, v.tolerance(classical.value), digest)
        .observe("classical", classical.value)
        .observe("quantum_primal", cert.primal_value)
        .observe("quantum_dual", cert.dual_value))
}

fn diagonal_recovery(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let q = if n <= 2 && rng.random::<bool>() { 3 } else { 2 };
    let r = chain(n, q)?;
    let mu = ClassicalDistribution::new(r.clone(), dirichlet(rng, r.dim()))?;
    let nu = ClassicalDistribution::new(r.clone(), dirichlet(rng, r.dim()))?;
    Ok(vec![diagonal_recovery_check(v, &mu, &nu)?])
}

/// Random one-dimensional qubit interaction with a one-site and a two-site term.
pub fn random_interaction(rng: &mut SeededRng) -> Result<Interaction> {
    let one = gue_hamiltonian(rng, &chain(1, 2)?).scale(rng.random::<f64>());
    let two = gue_hamiltonian(rng, &chain(2, 2)?).scale(rng.random::<f64>());
    Interaction::new(1, 2, vec![one, two])
}

fn random_ising(rng: &mut SeededRng) -> Result<Interaction> {
    let j = rng.random_range(-1.0..1.0);
    let h = rng.random_range(-1.0..1.0);
    Interaction::ising_1d(j, h)
}

fn pressure_bound(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let phi = random_ising(rng)?;
    Ok(vec![v.check_pressure_bound(&phi, &chain(2 * n + 2, 2)?)?])
}

fn lipschitz_r_norm(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let phi = random_interaction(rng)?;
    Ok(vec![v.check_lipschitz_r_norm(&phi, &chain(n, 2)?)?])
}

fn w1_gibbs_entropy(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let phi = random_interaction(rng)?;
    let r = chain(n, 2)?;
    let omega = lattice::gibbs_local(&phi, &r)?;
    let rho = if rng.random::<bool>() {
        hs_mixed(rng, &r)
    } else {
        let eps = rng.random::<f64>();
        DensityMatrix::new(omega.op().scale(1.0 - eps).add(&hs_mixed(rng, &r).op().scale(eps))?)?
    };
    let cert = w1_distance(&rho, &omega, &v.cfg)?;
    cert.ensure_converged()?;
    Ok(vec![v.check_w1_gibbs_entropy(&rho, &phi, &cert)?])
}

fn poincare_lattice(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let phi = random_interaction(rng)?;
    let r = chain(n, 2)?;
    let omega = full_rank_product(rng, &r, 0.05)?;
    Ok(vec![v.check_poincare_lattice(&phi, &r, &omega)?])
}

fn random_markov(rng: &mut SeededRng) -> Result<StationaryProcess> {
    let a: f64 = rng.random_range(0.05..0.95);
    let b: f64 = rng.random_range(0.05..0.95);
    StationaryProcess::markov(vec![vec![1.0 - a, a], vec![b, 1.0 - b]], vec![b / (a + b), a / (a + b)])
}

/// Box-marginal family `a = 1..=a_max` of a process, as diagonal states.
pub fn process_family(p: &StationaryProcess, a_max: usize) -> Result<Vec<DensityMatrix>> {
    (1..=a_max).map(|a| Ok(diagonal_embed(&classical::marginal(p, a)?))).collect()
}

/// Box-marginal family `a = 1..=a_max` of the product state `τ^{⊗Z}`.
pub fn product_family(tau: &DensityMatrix, a_max: usize) -> Result<Vec<DensityMatrix>> {
    (1..=a_max)
        .map(|a| {
            let target = Region::centered_box(1, a, tau.region().q())?;
            qw1_core::bounds::tensor_power_onto(tau, 2 * a, &target)
        })
        .collect()
}

fn specific_entropy(v: &Verifier, rng: &mut SeededRng, n: usize) -> Result<Vec<CheckResult>> {
    let (rho, sigma) = if rng.random::<bool>() {
        let a_max = n.clamp(1, 2);
        let p = random_markov(rng)?;
        let q = StationaryProcess::iid(dirichlet(rng, 2))?;
        (process_family(&p, a_max)?, process_family(&q, a_max)?)
    } else {
        let one = chain(1, 2)?;
        let (s, t) = random_pair(rng, &one)?;
        (product_family(&s, 1)?, product_family(&t, 1)?)
    };
    let certs = rho
        .iter()
        .zip(&sigma)
        .map(|(r, s)| {
            let c = w1_distance(r, s, &v.cfg)?;
            c.ensure_converged()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![v.check_specific_entropy_continuity(&rho, &sigma, &certs)?])
}
