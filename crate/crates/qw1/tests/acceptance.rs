//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are fixed below.

use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use qw1::commands::{self, ScalingInput, SolverOpts, TciArgs};
use qw1::format::{certificate_to_value, process_to_value};
use qw1::suite::{self, diagonal_recovery_check, process_family, product_family};
use qw1_core::bounds::{CheckResult, Verifier};
use qw1_core::classical::{dbar_sequence, is_nondecreasing, ClassicalDistribution, StationaryProcess};
use qw1_core::entropy::h2;
use qw1_core::lattice::{self, tci_constants, tci_objective, Interaction, TciGrid};
use qw1_core::operator::pauli_z;
use qw1_core::random::{dirichlet, hs_mixed, rng_from_seed, traceless};
use qw1_core::solver::{w1_distance, w1_norm};
use qw1_core::{DensityMatrix, HermitianOperator, ProductState, Region, SolverConfig};

const GAP_REL_TOL: f64 = 1e-4;
const RUNTIME_LIMIT_S: f64 = 600.0;
const RECOVERY_TOL: f64 = 1e-4;
const ENTROPY_TOL: f64 = 1e-6;
const ANALYTIC_DIGITS_10: f64 = 1e-10;
const ANALYTIC_DIGITS_12: f64 = 1e-12;
const ISING_LIMIT_TOL: f64 = 2e-2;
const OPEN_CHAIN_TOL: f64 = 1e-9;
const PRESSURE_SLACK_TOL: f64 = 1e-6;
const TCI_GRID_POINTS: usize = 1_000_000;
const TCI_TOL: f64 = 1e-6;
const PERIODIC_EXTRA: f64 = 1e-9;
const SEED: u64 = 20240521;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn chain(n: usize) -> Region {
    Region::chain(0, n, 2).unwrap()
}

/// Criterion 1 as a JSON report; also reused by the determinism check.
fn gap_report() -> Value {
    let cfg = SolverConfig::default();
    let mut rows = Vec::new();
    for (n, count) in [(2usize, 100usize), (3, 30)] {
        for i in 0..count {
            let seed = SEED + (n as u64) * 1000 + i as u64;
            let d = traceless(&mut rng_from_seed(seed), &chain(n));
            let c = w1_norm(&d, &cfg).unwrap();
            let cert = certificate_to_value(&c);
            rows.push(json!({
                "sites": n,
                "seed": seed,
                "primal": cert["primal"],
                "dual": cert["dual"],
                "iterations": cert["iterations"],
                "converged": cert["converged"],
                "relative_gap": (c.primal_value - c.dual_value) / c.primal_value.max(f64::MIN_POSITIVE),
            }));
        }
    }
    json!({"criterion": 1, "instances": rows})
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let report = gap_report();
    let secs = start.elapsed().as_secs_f64();
    let rows = report["instances"].as_array().unwrap();
    let worst = rows
        .iter()
        .map(|r| r["relative_gap"].as_f64().unwrap())
        .fold(0.0, f64::max);
    let all_converged = rows.iter().all(|r| r["converged"] == json!(true));
    let max_iter = rows.iter().map(|r| r["iterations"].as_u64().unwrap()).max().unwrap();
    verdict(
        all_converged && worst <= GAP_REL_TOL && secs <= RUNTIME_LIMIT_S,
        format!(
            "{} instances, all converged = {all_converged}, worst relative gap {worst:.2e} (<= {GAP_REL_TOL:e}), max iterations {max_iter}, {secs:.1} s",
            rows.len()
        ),
    )
}

fn criterion_2() -> Verdict {
    let v = Verifier::default();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [2usize, 3] {
        for i in 0..50u64 {
            let mut rng = rng_from_seed(SEED ^ (n as u64) << 20 ^ i);
            let r = chain(n);
            let mu = ClassicalDistribution::new(r.clone(), dirichlet(&mut rng, r.dim())).unwrap();
            let nu = ClassicalDistribution::new(r.clone(), dirichlet(&mut rng, r.dim())).unwrap();
            let res = diagonal_recovery_check(&v, &mu, &nu).unwrap();
            worst = worst.max(res.lhs);
            count += 1;
        }
    }
    verdict(
        worst <= RECOVERY_TOL,
        format!("{count} pairs on 2 and 3 bits, max |quantum - classical| = {worst:.2e} (<= {RECOVERY_TOL:e})"),
    )
}

fn batch(names: &[&str], samples: usize, verifier: &Verifier) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        let recs = suite::run_checker(name, SEED, samples, &[1, 2, 3], verifier).unwrap();
        let errors: Vec<String> = recs
            .iter()
            .filter_map(|r| r.outcome.as_ref().err().map(|e| format!("#{}: {e}", r.index)))
            .collect();
        let results: Vec<&CheckResult> = recs.iter().filter_map(|r| r.outcome.as_ref().ok()).flatten().collect();
        let failures = results.iter().filter(|r| !r.pass).count();
        let min_slack = results.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        ok &= failures == 0 && errors.is_empty();
        parts.push(format!(
            "{name}: {} instances, {failures} failures, {} errors, min slack {min_slack:.2e}",
            recs.len(),
            errors.len()
        ));
        for e in errors.iter().take(3) {
            parts.push(format!("  {e}"));
        }
    }
    (ok, parts.join("; "))
}

fn criterion_3() -> Verdict {
    let (ok, detail) = batch(
        &["w1_sandwich", "local_bound", "superadditivity", "triangle"],
        500,
        &Verifier::default(),
    );
    verdict(ok, format!("tolerance 3*tol_gap*scale; {detail}"))
}

fn criterion_4() -> Verdict {
    let v = Verifier::default().with_tolerance(ENTROPY_TOL);
    let (ok, detail) = batch(&["entropy_continuity"], 500, &v);
    let r = chain(1);
    let rho = DensityMatrix::diagonal(&r, &[1.0, 0.0]).unwrap();
    let sigma = DensityMatrix::maximally_mixed(&r);
    let cert = w1_distance(&rho, &sigma, &SolverConfig::default()).unwrap();
    let res = v.check_entropy_continuity(&rho, &sigma, &cert).unwrap();
    let expected = h2(0.5) + 3f64.ln() / 2.0 - 2f64.ln();
    let analytic = (res.slack - expected).abs() <= ANALYTIC_DIGITS_10 && expected > 0.0;
    verdict(
        ok && analytic && res.pass,
        format!(
            "{detail}; one-qubit case slack {:.12} vs h2(1/2) + ln3/2 - ln2 = {expected:.12}",
            res.slack
        ),
    )
}

fn criterion_5() -> Verdict {
    let (ok, detail) = batch(&["marton", "marton_k"], 200, &Verifier::default());
    verdict(ok, detail)
}

fn criterion_6() -> Verdict {
    let v = Verifier::default();
    let (ok, detail) = batch(&["gaussian_concentration", "poincare"], 200, &v);
    let r = chain(1);
    let h = HermitianOperator::new(r.clone(), pauli_z()).unwrap();
    let omega = ProductState::new(vec![DensityMatrix::maximally_mixed(&r)]).unwrap();
    let res = v.check_gaussian_concentration(&h, &omega).unwrap();
    let lhs_ok = (res.lhs - 1f64.cosh().ln()).abs() <= ANALYTIC_DIGITS_12;
    let rhs_ok = (res.rhs - 2.0).abs() <= ANALYTIC_DIGITS_12;
    verdict(
        ok && lhs_ok && rhs_ok && res.pass,
        format!("{detail}; scalar case lhs {:.14} (ln cosh 1), rhs {:.14} (2)", res.lhs, res.rhs),
    )
}

fn criterion_7() -> Verdict {
    let phi = Interaction::ising_1d(0.5, 0.0).unwrap();
    let limit = (2.0 * 0.5f64.cosh()).ln();
    let mut errors = Vec::new();
    let mut worst_exact: f64 = 0.0;
    for n in 4..=12usize {
        let p = lattice::pressure(&phi, &chain(n)).unwrap();
        let exact = 2f64.ln() + (n as f64 - 1.0) / n as f64 * 0.5f64.cosh().ln();
        worst_exact = worst_exact.max((p - exact).abs());
        errors.push((p - limit).abs());
    }
    let monotone = errors.windows(2).all(|w| w[1] <= w[0]);
    let last = *errors.last().unwrap();
    verdict(
        monotone && last <= ISING_LIMIT_TOL && worst_exact <= OPEN_CHAIN_TOL,
        format!(
            "errors vs ln(2cosh 0.5) decrease monotonically = {monotone}, |P12 - limit| = {last:.3e} (<= {ISING_LIMIT_TOL:e}), max deviation from open-chain formula {worst_exact:.1e}"
        ),
    )
}

fn criterion_8() -> Verdict {
    let v = Verifier::default();
    let mut min_slack = f64::INFINITY;
    for j in [0.1, 0.5, 1.0] {
        for h in [0.0, 0.3] {
            let phi = Interaction::ising_1d(j, h).unwrap();
            let res = v.check_pressure_bound(&phi, &chain(8)).unwrap();
            min_slack = min_slack.min(res.slack);
        }
    }
    verdict(
        min_slack >= -PRESSURE_SLACK_TOL,
        format!("6 Ising models at n = 8, min slack {min_slack:.6}"),
    )
}

fn fekete_pairs() -> Vec<(StationaryProcess, StationaryProcess)> {
    vec![
        (StationaryProcess::symmetric_flip(0.1).unwrap(), StationaryProcess::iid(vec![0.5, 0.5]).unwrap()),
        (
            StationaryProcess::markov(vec![vec![0.7, 0.3], vec![0.6, 0.4]], vec![2.0 / 3.0, 1.0 / 3.0]).unwrap(),
            StationaryProcess::iid(vec![0.4, 0.6]).unwrap(),
        ),
        (StationaryProcess::symmetric_flip(0.8).unwrap(), StationaryProcess::iid(vec![0.9, 0.1]).unwrap()),
    ]
}

fn criterion_9() -> Verdict {
    let cfg = SolverConfig::default();
    let tol = 2.0 * cfg.tol_gap;
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b) in fekete_pairs() {
        let seq = lattice::w1_specific_sequence(
            &process_family(&a, 3).unwrap(),
            &process_family(&b, 3).unwrap(),
            &cfg,
        )
        .unwrap();
        let dbar = dbar_sequence(&a, &b, 3).unwrap();
        let mono = is_nondecreasing(&seq.values, tol);
        let dev = seq.values.iter().zip(&dbar).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        ok &= mono && dev <= tol;
        parts.push(format!(
            "[{}] nondecreasing {mono}, max |w1 - dbar| {dev:.1e}",
            seq.values.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", ")
        ));
    }
    verdict(ok, format!("tolerance {tol:e}; {}", parts.join("; ")))
}

fn grid_oracle(phi_r: f64, q: usize) -> f64 {
    let h = TciGrid::default().t_max / TCI_GRID_POINTS as f64;
    (0..=TCI_GRID_POINTS)
        .map(|i| tci_objective(i as f64 * h, phi_r, q))
        .fold(f64::INFINITY, f64::min)
}

fn criterion_10() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for phi_r in [0.005, 0.01, 0.05] {
        for q in [2usize, 3] {
            let oracle = grid_oracle(phi_r, q);
            for n in [2usize, 3, 5] {
                let c = tci_constants(phi_r, n, q, TciGrid::default()).unwrap();
                worst = worst.max((c.m - oracle).abs());
                let nf = n as f64;
                let kappa = 1.0 - (2.0 * nf - 1.0) * (nf - 1.0) * c.m;
                ok &= (c.kappa - kappa).abs() <= 1e-12;
            }
        }
    }
    let k1 = tci_constants(0.01, 1, 2, TciGrid::default()).unwrap();
    let n1 = k1.kappa == 1.0;
    verdict(
        ok && worst <= TCI_TOL && n1,
        format!("18 triples, max |M - grid oracle| = {worst:.2e} (<= {TCI_TOL:e}); N = 1 gives kappa = {}", k1.kappa),
    )
}

fn criterion_11() -> Verdict {
    let a = 3;
    let b = 1;
    let bound = 2.0 * (2 * b) as f64 / (2 * a) as f64 + PERIODIC_EXTRA;
    let mut blocks: Vec<(&str, DensityMatrix)> = Vec::new();
    let tau = hs_mixed(&mut rng_from_seed(SEED), &chain(1));
    blocks.push(("product", product_family(&tau, a).unwrap().pop().unwrap()));
    for (name, p) in [
        ("markov 0.1", StationaryProcess::symmetric_flip(0.1).unwrap()),
        (
            "markov asym",
            StationaryProcess::markov(vec![vec![0.7, 0.3], vec![0.6, 0.4]], vec![2.0 / 3.0, 1.0 / 3.0]).unwrap(),
        ),
    ] {
        blocks.push((name, process_family(&p, a).unwrap().pop().unwrap()));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, block) in blocks {
        let approx = lattice::periodic_approx_marginal(&block, b).unwrap();
        let target = Region::centered_box(1, b, 2).unwrap();
        let exact = block.partial_trace(&target).unwrap();
        let dist = approx.op().sub(exact.op()).unwrap().trace_norm();
        ok &= dist <= bound;
        parts.push(format!("{name}: {dist:.3e}"));
    }
    verdict(ok, format!("bound {bound:.6}; {}", parts.join(", ")))
}

fn cli_reports(dir: &Path) -> (String, String) {
    let (a, b) = &fekete_pairs()[1];
    let pa = dir.join("a.json");
    let pb = dir.join("b.json");
    std::fs::write(&pa, process_to_value(a).to_string()).unwrap();
    std::fs::write(&pb, process_to_value(b).to_string()).unwrap();
    let opts = SolverOpts {
        tol: None,
        max_iter: None,
    };
    let scaling = commands::scaling(ScalingInput::Processes(&pa, &pb), Some(3), &opts).unwrap();
    let tci = commands::tci(&TciArgs {
        phi_r: Some(0.01),
        q: Some(2),
        n: Some(3),
        ..Default::default()
    })
    .unwrap();
    (scaling.json_text(), tci.json_text())
}

fn criterion_12() -> Verdict {
    let dir = tempfile::TempDir::new().unwrap();
    let r1a = serde_json::to_string_pretty(&gap_report()).unwrap();
    let r1b = serde_json::to_string_pretty(&gap_report()).unwrap();
    let (s_a, t_a) = cli_reports(dir.path());
    let (s_b, t_b) = cli_reports(dir.path());
    let same = [r1a == r1b, s_a == s_b, t_a == t_b];
    verdict(
        same.iter().all(|&x| x),
        format!(
            "byte-identical reports: criterion 1 {} ({} bytes), 9 {} ({} bytes), 10 {} ({} bytes)",
            same[0],
            r1a.len(),
            same[1],
            s_a.len(),
            same[2],
            t_a.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 12] = [
        ("duality gap on random 2- and 3-qubit operators", criterion_1),
        ("diagonal recovery of Hamming transport", criterion_2),
        ("sandwich, local bound, superadditivity, triangle", criterion_3),
        ("entropy continuity", criterion_4),
        ("Marton and k-fold Marton inequalities", criterion_5),
        ("Gaussian concentration and Poincare", criterion_6),
        ("1D Ising pressure convergence", criterion_7),
        ("pressure bound on Ising family", criterion_8),
        ("monotone specific W1 matches dbar", criterion_9),
        ("TCI constants vs grid oracle", criterion_10),
        ("periodic approximation", criterion_11),
        ("determinism of JSON reports", criterion_12),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        if !v.pass {
            failed += 1;
        }
        println!(
            "{tag} criterion {:>2}: {name} [{:.1} s] {}",
            k + 1,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
