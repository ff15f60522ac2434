use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use qw1_core::bounds::Verifier;
use qw1_core::classical::{dbar_sequence, is_nondecreasing, StationaryProcess};
use qw1_core::lattice::{self, Interaction, TciGrid};
use qw1_core::solver::{partial_dependence, w1_distance, w1_norm, PartialDependence};
use qw1_core::{DensityMatrix, Region, Site, SolverConfig};

use crate::error::{CliError, ErrorKind, EXIT_INPUT, EXIT_NONCONVERGENCE, EXIT_OK};
use crate::format::{self, certificate_to_value, operator_to_value};
use crate::manifest::{read_input, InputFile, RunManifest};
use crate::suite::{self, solver_config_value, Suite, SuiteConfig};

/// Result of a command: the machine-readable record, a short human summary,
/// an optional CSV table and the exit code.
#[derive(Clone, Debug)]
pub struct Output {
    pub value: Value,
    pub human: String,
    pub csv: Option<String>,
    pub exit: i32,
    pub manifest: RunManifest,
}

impl Output {
    fn new(manifest: RunManifest, mut value: Value, human: String, exit: i32) -> Self {
        value
            .as_object_mut()
            .expect("outputs are objects")
            .insert("manifest".into(), json!(manifest.hash()));
        Output {
            value,
            human,
            csv: None,
            exit,
            manifest,
        }
    }

    fn with_csv(mut self, header: &str, rows: Vec<String>) -> Self {
        let mut s = format!("# manifest {}\n{header}\n", self.manifest.hash());
        for r in rows {
            s.push_str(&r);
            s.push('\n');
        }
        self.csv = Some(s);
        self
    }

    pub fn json_text(&self) -> String {
        serde_json::to_string_pretty(&self.value).expect("output serializes") + "\n"
    }
}

#[derive(Clone, Debug)]
pub struct SolverOpts {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl SolverOpts {
    pub fn config(&self) -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig::default();
        if let Some(t) = self.tol {
            cfg.tol_gap = t;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn exit_for(converged: bool) -> i32 {
    if converged {
        EXIT_OK
    } else {
        EXIT_NONCONVERGENCE
    }
}

pub fn w1(files: &[PathBuf], opts: &SolverOpts) -> Result<Output, CliError> {
    let cfg = opts.config()?;
    let inputs: Vec<InputFile> = files.iter().map(|p| read_input(p)).collect::<Result<_, _>>()?;
    let cert = match inputs.as_slice() {
        [delta] => {
            let d = format::parse_operator(&delta.value).map_err(|e| e.context(&delta.path))?;
            w1_norm(&d, &cfg)?
        }
        [rho, sigma] => {
            let r = format::parse_state(&rho.value).map_err(|e| e.context(&rho.path))?;
            let s = format::parse_state(&sigma.value).map_err(|e| e.context(&sigma.path))?;
            w1_distance(&r, &s, &cfg)?
        }
        _ => return Err(CliError::input("w1 takes one traceless operator or two states")),
    };
    let manifest = RunManifest::new("w1", &inputs.iter().collect::<Vec<_>>(), solver_config_value(&cfg));
    let human = format!(
        "W1 in [{:.10}, {:.10}]  gap {:.3e}  iterations {}  converged {}",
        cert.dual_value, cert.primal_value, cert.gap, cert.iterations, cert.converged
    );
    Ok(Output::new(manifest, certificate_to_value(&cert), human, exit_for(cert.converged)))
}

fn parse_site(s: &str) -> Result<Site, CliError> {
    let coords = s
        .split(',')
        .map(|c| c.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::input(format!("cannot parse site {s:?}; expected comma-separated integers")))?;
    Ok(Site::new(coords))
}

fn dependence_value(p: &PartialDependence) -> Value {
    json!({
        "site": p.site.coords(),
        "value": p.value,
        "lower": p.lower,
        "iterations": p.iterations,
        "converged": p.converged,
    })
}

pub fn lipschitz(file: &Path, site: Option<&str>, all_sites: bool, opts: &SolverOpts) -> Result<Output, CliError> {
    let cfg = opts.config()?;
    let input = read_input(file)?;
    let h = format::parse_operator(&input.value).map_err(|e| e.context(&input.path))?;
    let sites: Vec<Site> = match (site, all_sites) {
        (Some(_), true) => return Err(CliError::input("--site and --all-sites are exclusive")),
        (Some(s), false) => {
            let x = parse_site(s)?;
            if !h.region().contains(&x) {
                return Err(CliError::input(format!("site {s} is outside the operator's region")));
            }
            vec![x]
        }
        (None, _) => h.region().sites().to_vec(),
    };
    let profile = sites
        .iter()
        .map(|x| partial_dependence(&h, x, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let converged = profile.iter().all(|p| p.converged);
    let mut value = json!({
        "sites": profile.iter().map(dependence_value).collect::<Vec<_>>(),
    });
    let mut human = String::new();
    for p in &profile {
        human.push_str(&format!("site {:?}: {:.10} (lower {:.10})\n", p.site.coords(), p.value, p.lower));
    }
    if site.is_none() {
        let upper = profile.iter().map(|p| p.value).fold(0.0, f64::max);
        let lower = profile.iter().map(|p| p.lower).fold(0.0, f64::max);
        let o = value.as_object_mut().expect("object");
        o.insert("lipschitz".into(), json!(upper));
        o.insert("lipschitz_lower".into(), json!(lower));
        human.push_str(&format!("Lipschitz constant: {upper:.10}"));
    }
    let config = json!({"solver": solver_config_value(&cfg), "site": site, "all_sites": site.is_none()});
    let manifest = RunManifest::new("lipschitz", &[&input], config);
    Ok(Output::new(manifest, value, human.trim_end().to_string(), exit_for(converged)))
}

fn read_interaction(file: &Path) -> Result<(InputFile, Interaction), CliError> {
    let input = read_input(file)?;
    let phi = format::parse_interaction(&input.value).map_err(|e| e.context(&input.path))?;
    Ok((input, phi))
}

pub fn gibbs(file: &Path, half_width: usize) -> Result<Output, CliError> {
    let (input, phi) = read_interaction(file)?;
    let region = Region::centered_box(phi.d(), half_width, phi.q())?;
    let h = lattice::local_hamiltonian(&phi, &region)?;
    let omega = lattice::gibbs_local(&phi, &region)?;
    let log_z = lattice::log_partition(&phi, &region)?;
    let n = region.len() as f64;
    let energy = omega.expect(&h)?;
    let entropy = omega.entropy()?;
    let value = json!({
        "box": half_width,
        "sites": region.len(),
        "log_partition": log_z,
        "pressure": log_z / n,
        "energy": energy,
        "entropy": entropy,
        "state": operator_to_value(omega.op()),
    });
    let human = format!(
        "box {half_width} ({} sites): ln Z = {log_z:.12}, pressure = {:.12}, energy = {energy:.12}, entropy = {entropy:.12}",
        region.len(),
        log_z / n
    );
    let manifest = RunManifest::new("gibbs", &[&input], json!({"box": half_width}));
    Ok(Output::new(manifest, value, human, EXIT_OK))
}

pub fn pressure(file: &Path, boxes: &[usize], chains: &[usize]) -> Result<Output, CliError> {
    let (input, phi) = read_interaction(file)?;
    if chains.is_empty() && boxes.is_empty() {
        return Err(CliError::input("give --box half-widths or --sizes chain lengths"));
    }
    if !chains.is_empty() && phi.d() != 1 {
        return Err(CliError::input("--sizes chain lengths need a one-dimensional interaction"));
    }
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for &a in boxes {
        let r = Region::centered_box(phi.d(), a, phi.q())?;
        let p = lattice::pressure(&phi, &r)?;
        entries.push(json!({"box": a, "sites": r.len(), "pressure": p}));
        rows.push(format!("box,{a},{},{p}", r.len()));
    }
    for &n in chains {
        let r = Region::chain(0, n, phi.q())?;
        let p = lattice::pressure(&phi, &r)?;
        entries.push(json!({"chain": n, "sites": n, "pressure": p}));
        rows.push(format!("chain,{n},{n},{p}"));
    }
    let energy = phi.uniform_energy_density();
    let value = json!({
        "entries": entries,
        "uniform_energy_density": energy,
        "ln_q": (phi.q() as f64).ln(),
    });
    let human = rows
        .iter()
        .map(|r| {
            let f: Vec<&str> = r.split(',').collect();
            format!("{} {:>3}  sites {:>3}  pressure {}", f[0], f[1], f[2], f[3])
        })
        .collect::<Vec<_>>()
        .join("\n");
    let manifest = RunManifest::new("pressure", &[&input], json!({"box": boxes, "sizes": chains}));
    Ok(Output::new(manifest, value, human, EXIT_OK).with_csv("shape,size,sites,pressure", rows))
}

#[derive(Clone, Debug, Default)]
pub struct TciArgs {
    pub interaction: Option<PathBuf>,
    pub r: Option<f64>,
    pub phi_r: Option<f64>,
    pub q: Option<usize>,
    pub n: Option<usize>,
    pub grid: Option<usize>,
}

pub fn tci(args: &TciArgs) -> Result<Output, CliError> {
    let mut inputs = Vec::new();
    let (phi_r, q, n, r) = match (&args.interaction, args.phi_r) {
        (Some(file), None) => {
            let (input, phi) = read_interaction(file)?;
            let r = args.r.ok_or_else(|| CliError::input("--r is required with an interaction file"))?;
            if !(r >= 0.0) {
                return Err(CliError::input("--r must be nonnegative"));
            }
            if args.q.is_some_and(|q| q != phi.q()) {
                return Err(CliError::input("--q differs from the interaction's local dimension"));
            }
            inputs.push(input);
            (phi.phi_r_norm(r), phi.q(), args.n.unwrap_or(phi.neighborhood_size()), Some(r))
        }
        (None, Some(x)) => {
            let q = args.q.ok_or_else(|| CliError::input("--q is required with --phi-r"))?;
            let n = args.n.ok_or_else(|| CliError::input("--N is required with --phi-r"))?;
            (x, q, n, None)
        }
        (Some(_), Some(_)) => return Err(CliError::input("give either an interaction file or --phi-r, not both")),
        (None, None) => return Err(CliError::input("tci needs an interaction file or --phi-r")),
    };
    let mut grid = TciGrid::default();
    if let Some(s) = args.grid {
        grid.steps = s;
    }
    let c = lattice::tci_constants(phi_r, n, q, grid)?;
    let value = json!({
        "phi_r": phi_r,
        "r": r,
        "q": q,
        "N": n,
        "grid_steps": grid.steps,
        "t_max": grid.t_max,
        "M": c.m,
        "t_star": c.t_star.is_finite().then_some(c.t_star),
        "kappa": c.kappa,
        "c": c.c,
        "valid": c.valid,
        "suggested_t": c.suggested.map(|s| s.0),
        "suggested_value": c.suggested.map(|s| s.1),
        "suggested_is_better": c.suggested_is_better,
    });
    let human = format!(
        "‖Φ‖_r = {phi_r}, q = {q}, N = {n}: M = {:.12e}, κ = {:.12}, c = {}",
        c.m,
        c.kappa,
        c.c.map_or("none (κ <= 0)".to_string(), |v| format!("{v:.12}"))
    );
    let config = json!({"phi_r": phi_r, "r": r, "q": q, "N": n, "grid": grid.steps});
    let manifest = RunManifest::new("tci", &inputs.iter().collect::<Vec<_>>(), config);
    Ok(Output::new(manifest, value, human, EXIT_OK))
}

fn read_process(file: &Path) -> Result<(InputFile, StationaryProcess), CliError> {
    let input = read_input(file)?;
    let p = format::parse_process(&input.value).map_err(|e| e.context(&input.path))?;
    Ok((input, p))
}

pub fn dbar(a: &Path, b: &Path, a_max: usize) -> Result<Output, CliError> {
    let (ia, pa) = read_process(a)?;
    let (ib, pb) = read_process(b)?;
    if a_max == 0 {
        return Err(CliError::input("--a-max must be at least 1"));
    }
    let seq = dbar_sequence(&pa, &pb, a_max)?;
    let mono = is_nondecreasing(&seq, 1e-12);
    let sup = seq.iter().copied().fold(0.0, f64::max);
    let a_list: Vec<usize> = (1..=a_max).collect();
    let value = json!({
        "a": a_list,
        "sites": a_list.iter().map(|a| 2 * a).collect::<Vec<_>>(),
        "dbar": seq,
        "nondecreasing": mono,
        "sup": sup,
    });
    let rows: Vec<String> = seq.iter().enumerate().map(|(k, v)| format!("{},{},{v}", k + 1, 2 * (k + 1))).collect();
    let human = seq
        .iter()
        .enumerate()
        .map(|(k, v)| format!("a = {}  sites {:>2}  W1/|Λ| = {v:.12}", k + 1, 2 * (k + 1)))
        .chain([format!("nondecreasing: {mono}")])
        .collect::<Vec<_>>()
        .join("\n");
    let manifest = RunManifest::new("dbar", &[&ia, &ib], json!({"a_max": a_max}));
    Ok(Output::new(manifest, value, human, EXIT_OK).with_csv("a,sites,dbar", rows))
}

pub enum ScalingInput<'a> {
    Families(&'a Path, &'a Path),
    Processes(&'a Path, &'a Path),
}

pub fn scaling(input: ScalingInput<'_>, a_max: Option<usize>, opts: &SolverOpts) -> Result<Output, CliError> {
    let cfg = opts.config()?;
    let (inputs, rho, sigma, dbar): (Vec<InputFile>, Vec<DensityMatrix>, Vec<DensityMatrix>, Option<Vec<f64>>) =
        match input {
            ScalingInput::Families(a, b) => {
                let ia = read_input(a)?;
                let ib = read_input(b)?;
                let mut rho = format::parse_family(&ia.value).map_err(|e| e.context(&ia.path))?;
                let mut sigma = format::parse_family(&ib.value).map_err(|e| e.context(&ib.path))?;
                if let Some(m) = a_max {
                    rho.truncate(m);
                    sigma.truncate(m);
                }
                (vec![ia, ib], rho, sigma, None)
            }
            ScalingInput::Processes(a, b) => {
                let (ia, pa) = read_process(a)?;
                let (ib, pb) = read_process(b)?;
                let m = a_max.ok_or_else(|| CliError::input("--a-max is required with --process"))?;
                if m == 0 {
                    return Err(CliError::input("--a-max must be at least 1"));
                }
                let rho = suite::process_family(&pa, m)?;
                let sigma = suite::process_family(&pb, m)?;
                let d = dbar_sequence(&pa, &pb, m)?;
                (vec![ia, ib], rho, sigma, Some(d))
            }
        };
    if rho.is_empty() {
        return Err(CliError::input("families are empty"));
    }
    let seq = lattice::w1_specific_sequence(&rho, &sigma, &cfg)?;
    let converged: Vec<bool> = seq.certificates.iter().map(|c| c.converged).collect();
    let tol = 2.0 * cfg.tol_gap;
    let mono = is_nondecreasing(&seq.values, tol);
    let a_list: Vec<usize> = (1..=seq.values.len()).collect();
    let sites: Vec<usize> = rho.iter().map(|r| r.region().len()).collect();
    let lower_bound = seq.lower.iter().copied().fold(0.0, f64::max);
    let mut value = json!({
        "a": a_list,
        "sites": sites,
        "w1_per_site": seq.values,
        "lower_per_site": seq.lower,
        "converged": converged,
        "nondecreasing": mono,
        "monotonicity_tolerance": tol,
        "extrapolation": {
            "method": "supremum of the finite-volume values; the sequence is superadditive so the limit is at least every entry",
            "lower_bound": lower_bound,
            "estimate": seq.values.last().copied(),
            "volumes": seq.values.len(),
        },
        "note": seq.note,
    });
    let mut header = "a,sites,w1_per_site,lower_per_site".to_string();
    let mut rows: Vec<String> = (0..seq.values.len())
        .map(|k| format!("{},{},{},{}", k + 1, sites[k], seq.values[k], seq.lower[k]))
        .collect();
    if let Some(d) = &dbar {
        let max_dev = d
            .iter()
            .zip(&seq.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let o = value.as_object_mut().expect("object");
        o.insert("dbar".into(), json!(d));
        o.insert("max_abs_deviation_from_dbar".into(), json!(max_dev));
        header.push_str(",dbar");
        for (row, v) in rows.iter_mut().zip(d) {
            row.push_str(&format!(",{v}"));
        }
    }
    let human = rows.join("\n") + &format!("\nnondecreasing: {mono}");
    let config = json!({"solver": solver_config_value(&cfg), "a_max": a_max, "process": dbar.is_some()});
    let manifest = RunManifest::new("scaling", &inputs.iter().collect::<Vec<_>>(), config);
    let all_converged = converged.iter().all(|&c| c);
    let exit = if !all_converged {
        EXIT_NONCONVERGENCE
    } else if !mono {
        EXIT_INPUT
    } else {
        EXIT_OK
    };
    Ok(Output::new(manifest, value, human, exit).with_csv(&header, rows))
}

pub struct VerifyArgs {
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
    pub sizes: Vec<usize>,
}

pub fn verify(args: &VerifyArgs, opts: &SolverOpts) -> Result<Output, CliError> {
    let cfg = opts.config()?;
    let suite = Suite::from_name(&args.suite).ok_or_else(|| {
        CliError::input(format!("unknown suite {:?}; expected all, entropy, transport or lattice", args.suite))
    })?;
    if args.sizes.is_empty() || args.sizes.iter().any(|&n| n == 0 || n > 3) {
        return Err(CliError::input("--sizes must list site counts between 1 and 3"));
    }
    let sc = SuiteConfig {
        suite,
        seed: args.seed,
        samples: args.samples,
        sizes: args.sizes.clone(),
        verifier: Verifier::new(cfg.clone()),
    };
    let report = suite::run(&sc)?;
    let exit = if report.has_nonconvergence() {
        EXIT_NONCONVERGENCE
    } else if report.failures() > 0 {
        EXIT_INPUT
    } else {
        EXIT_OK
    };
    let config = json!({
        "solver": solver_config_value(&cfg),
        "suite": suite.name(),
        "seed": args.seed,
        "samples": args.samples,
        "sizes": args.sizes,
    });
    let manifest = RunManifest::new("verify", &[], config);
    Ok(Output::new(manifest, report.to_value(), report.human_summary().trim_end().to_string(), exit))
}

/// Applies `QW1_DIM_CAP` when set.
pub fn apply_dim_cap_env() -> Result<(), CliError> {
    match std::env::var("QW1_DIM_CAP") {
        Ok(s) => {
            let cap: usize = s
                .trim()
                .parse()
                .map_err(|_| CliError::input(format!("QW1_DIM_CAP={s:?} is not a positive integer")))?;
            if cap == 0 {
                return Err(CliError::input("QW1_DIM_CAP must be positive"));
            }
            qw1_core::region::set_dim_cap(cap);
            Ok(())
        }
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(CliError::input(format!("QW1_DIM_CAP: {e}"))),
    }
}

pub fn is_nonconvergence(e: &CliError) -> bool {
    e.kind == ErrorKind::NonConvergence
}
