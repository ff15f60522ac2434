//! Comparisons against independent reference computations that live only here.

use qw1_core::classical::{self, hamming_w1, ClassicalDistribution, StationaryProcess};
use qw1_core::lattice::{self, tci_constants, tci_objective, Interaction, TciGrid};
use qw1_core::matrix::eigh;
use qw1_core::operator::{pauli_x, pauli_y, pauli_z};
use qw1_core::random::{dirichlet, rng_from_seed, traceless};
use qw1_core::solver::{lipschitz_constant, partial_dependence, w1_norm};
use qw1_core::{HermitianOperator, Matrix, Region, SolverConfig};

// ---------------------------------------------------------------------------
// W1 primal oracle: projected subgradient descent in the Pauli basis.
//
// A traceless qubit operator is Δ = Σ_s c_s σ_s over non-identity Pauli
// strings s. A piece with Tr_x Δ^(x) = 0 contains only strings that act
// nontrivially on x, so feasible decompositions are splittings of each c_s
// among the sites in the support of s.

fn pauli(k: usize) -> Matrix {
    match k {
        0 => Matrix::identity(2),
        1 => pauli_x(),
        2 => pauli_y(),
        _ => pauli_z(),
    }
}

fn pauli_string(labels: &[usize]) -> Matrix {
    labels[1..]
        .iter()
        .fold(pauli(labels[0]), |acc, &k| acc.kron(&pauli(k)))
}

fn labels_of(idx: usize, n: usize) -> Vec<usize> {
    (0..n).map(|p| (idx >> (2 * (n - 1 - p))) & 3).collect()
}

fn sign_matrix(m: &Matrix) -> Matrix {
    let (vals, vecs) = eigh(m);
    let s: Vec<f64> = vals.iter().map(|v| v.signum() * (v.abs() > 1e-13) as i32 as f64).collect();
    Matrix::from_spectrum(&s, &vecs)
}

fn trace_norm(m: &Matrix) -> f64 {
    eigh(m).0.iter().map(|v| v.abs()).sum()
}

fn oracle_primal(delta: &HermitianOperator, iters: usize) -> f64 {
    let n = delta.region().len();
    let dim = 1usize << n;
    let strings: Vec<(Vec<usize>, Matrix, f64)> = (1..(1usize << (2 * n)))
        .map(|idx| {
            let l = labels_of(idx, n);
            let p = pauli_string(&l);
            let c = delta.matrix().inner(&p) / dim as f64;
            (l, p, c)
        })
        .filter(|(_, _, c)| c.abs() > 1e-15)
        .collect();
    // a[s][x]: share of string s assigned to site x (zero unless x in support).
    let mut a: Vec<Vec<f64>> = strings
        .iter()
        .map(|(l, _, c)| {
            let k = l.iter().filter(|&&v| v != 0).count() as f64;
            l.iter().map(|&v| if v != 0 { c / k } else { 0.0 }).collect()
        })
        .collect();
    let pieces = |a: &Vec<Vec<f64>>| -> Vec<Matrix> {
        (0..n)
            .map(|x| {
                let mut m = Matrix::zeros(dim);
                for (s, (_, p, _)) in strings.iter().enumerate() {
                    if a[s][x] != 0.0 {
                        m.axpy(a[s][x], p);
                    }
                }
                m
            })
            .collect()
    };
    let value = |ps: &[Matrix]| 0.5 * ps.iter().map(trace_norm).sum::<f64>();
    let mut best = value(&pieces(&a));
    for it in 0..iters {
        let ps = pieces(&a);
        let v = value(&ps);
        best = best.min(v);
        let signs: Vec<Matrix> = ps.iter().map(sign_matrix).collect();
        let step = 0.5 / (1.0 + it as f64).sqrt() / dim as f64;
        for (s, (l, p, _)) in strings.iter().enumerate() {
            let supp: Vec<usize> = (0..n).filter(|&x| l[x] != 0).collect();
            let g: Vec<f64> = supp.iter().map(|&x| 0.5 * signs[x].inner(p)).collect();
            let mean = g.iter().sum::<f64>() / g.len() as f64;
            for (k, &x) in supp.iter().enumerate() {
                a[s][x] -= step * (g[k] - mean);
            }
        }
    }
    best
}

#[test]
fn w1_certificate_brackets_independent_primal() {
    let cfg = SolverConfig::default();
    for (n, seeds) in [(2usize, 0..6u64), (3, 100..102)] {
        let r = Region::chain(0, n, 2).unwrap();
        for seed in seeds {
            let d = traceless(&mut rng_from_seed(seed), &r);
            let cert = w1_norm(&d, &cfg).unwrap();
            assert!(cert.converged);
            let oracle = oracle_primal(&d, 4000);
            // The oracle is a feasible primal value, so it upper-bounds the certified dual.
            assert!(cert.dual_value <= oracle + 1e-9, "seed {seed}: dual {} oracle {oracle}", cert.dual_value);
            assert!(
                oracle <= cert.primal_value * (1.0 + 5e-3),
                "seed {seed}: oracle {oracle} primal {}",
                cert.primal_value
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Lipschitz oracles: grid search over diagonal approximants.

fn grid_dependence_diag(h_diag: &[f64], q: usize, n: usize, x: usize, lo: f64, hi: f64, step: f64) -> f64 {
    // For diagonal H the optimal approximant can be taken diagonal; each
    // configuration of the other sites is an independent 1-D problem.
    let rest = q.pow(n as u32 - 1);
    let mut worst: f64 = 0.0;
    for r in 0..rest {
        let mut digits = Vec::with_capacity(n);
        let mut k = r;
        for _ in 0..n - 1 {
            digits.push(k % q);
            k /= q;
        }
        digits.reverse();
        let vals: Vec<f64> = (0..q)
            .map(|v| {
                let mut full = digits.clone();
                full.insert(x, v);
                h_diag[full.iter().fold(0, |acc, &d| acc * q + d)]
            })
            .collect();
        let mut best = f64::INFINITY;
        let mut c = lo;
        while c <= hi {
            let m = vals.iter().map(|v| (v - c).abs()).fold(0.0, f64::max);
            best = best.min(2.0 * m);
            c += step;
        }
        worst = worst.max(best);
    }
    worst
}

#[test]
fn zz_dependence_matches_grid() {
    let r = Region::chain(0, 2, 2).unwrap();
    let z = pauli_z();
    let h = HermitianOperator::new(r.clone(), z.kron(&z)).unwrap();
    let diag: Vec<f64> = h.matrix().diag().iter().map(|c| c.re).collect();
    for (p, x) in r.sites().iter().enumerate() {
        let oracle = grid_dependence_diag(&diag, 2, 2, p, -2.0, 2.0, 1e-3);
        let v = partial_dependence(&h, x, &SolverConfig::default()).unwrap().value;
        assert!((v - oracle).abs() <= 1e-3, "{v} vs {oracle}");
    }
}

#[test]
fn field_sum_lipschitz_matches_grid() {
    let r = Region::chain(0, 3, 2).unwrap();
    let phi = Interaction::ising_1d(0.0, 1.0).unwrap();
    let h = lattice::local_hamiltonian(&phi, &r).unwrap();
    let diag: Vec<f64> = h.matrix().diag().iter().map(|c| c.re).collect();
    let oracle = (0..3)
        .map(|x| grid_dependence_diag(&diag, 2, 3, x, -4.0, 4.0, 1e-3))
        .fold(0.0, f64::max);
    let v = lipschitz_constant(&h, &SolverConfig::default()).unwrap();
    assert!((v - oracle).abs() <= 1e-3);
    assert!((v - 2.0).abs() <= 1e-6);
}

#[test]
fn ising_dependence_on_three_sites_matches_grid() {
    let r = Region::chain(-1, 3, 2).unwrap();
    let phi = Interaction::ising_1d(1.0, 0.0).unwrap();
    let h = lattice::local_hamiltonian(&phi, &r).unwrap();
    let diag: Vec<f64> = h.matrix().diag().iter().map(|c| c.re).collect();
    let oracle = grid_dependence_diag(&diag, 2, 3, 1, -3.0, 3.0, 1e-3);
    let seq = lattice::phi_lipschitz_sequence(&phi, &[2, 3], &SolverConfig::default()).unwrap();
    for p in &seq {
        assert!((p.value - oracle).abs() <= 1e-3);
        assert!(p.value <= 2.0 * phi.phi_r_norm(0.0) + 1e-9);
    }
}

// ---------------------------------------------------------------------------
// Classical oracle: successive shortest paths on the Hamming graph, where
// configurations differing in one site are joined by unit-cost arcs.

fn min_cost_flow_hamming(mu: &[f64], nu: &[f64], q: usize, n: usize) -> f64 {
    let dim = mu.len();
    let mut excess: Vec<f64> = mu.iter().zip(nu).map(|(a, b)| a - b).collect();
    // Residual flow on arcs (u, v); both directions have cost 1, and flow on
    // the reverse arc can be cancelled at cost -1.
    let mut flow = vec![vec![0.0f64; dim]; dim];
    let neighbors = |u: usize| -> Vec<usize> {
        (0..dim)
            .filter(|&v| classical::hamming_distance(u, v, q, n) == 1)
            .collect()
    };
    let adj: Vec<Vec<usize>> = (0..dim).map(neighbors).collect();
    let mut cost = 0.0;
    loop {
        let Some(s) = (0..dim).find(|&u| excess[u] > 1e-14) else {
            break;
        };
        // Bellman-Ford from s over residual arcs.
        let mut dist = vec![f64::INFINITY; dim];
        let mut prev = vec![usize::MAX; dim];
        dist[s] = 0.0;
        for _ in 0..dim {
            let mut changed = false;
            for u in 0..dim {
                if !dist[u].is_finite() {
                    continue;
                }
                for &v in &adj[u] {
                    let c = if flow[v][u] > 1e-15 { -1.0 } else { 1.0 };
                    if dist[u] + c < dist[v] - 1e-12 {
                        dist[v] = dist[u] + c;
                        prev[v] = u;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let t = (0..dim)
            .filter(|&v| excess[v] < -1e-14 && dist[v].is_finite())
            .min_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap())
            .expect("deficit reachable");
        let mut amount = excess[s].min(-excess[t]);
        let mut v = t;
        while v != s {
            let u = prev[v];
            if flow[v][u] > 1e-15 {
                amount = amount.min(flow[v][u]);
            }
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = prev[v];
            if flow[v][u] > 1e-15 {
                flow[v][u] -= amount;
                cost -= amount;
            } else {
                flow[u][v] += amount;
                cost += amount;
            }
            v = u;
        }
        excess[s] -= amount;
        excess[t] += amount;
    }
    cost
}

#[test]
fn hamming_transport_matches_min_cost_flow() {
    for (q, n) in [(2usize, 1usize), (2, 2), (2, 3), (3, 1), (3, 2)] {
        let r = Region::chain(0, n, q).unwrap();
        for seed in 0..15u64 {
            let mut rng = rng_from_seed(1000 * q as u64 + 10 * n as u64 + seed);
            let mut a = dirichlet(&mut rng, r.dim());
            let b = dirichlet(&mut rng, r.dim());
            if seed % 3 == 0 {
                // Sparse supports exercise degenerate pivots.
                for (i, p) in a.iter_mut().enumerate() {
                    if i % 2 == 1 {
                        *p = 0.0;
                    }
                }
                let s: f64 = a.iter().sum();
                a.iter_mut().for_each(|p| *p /= s);
            }
            let mu = ClassicalDistribution::new(r.clone(), a.clone()).unwrap();
            let nu = ClassicalDistribution::new(r.clone(), b.clone()).unwrap();
            let t = hamming_w1(&mu, &nu).unwrap();
            let oracle = min_cost_flow_hamming(&a, &b, q, n);
            assert!((t.value - oracle).abs() <= 1e-10, "q={q} n={n} seed={seed}: {} vs {oracle}", t.value);
            assert!((t.value - t.dual_value).abs() <= 1e-10);
        }
    }
}

#[test]
fn iid_window_matches_product_formula() {
    let p = StationaryProcess::iid(vec![0.3, 0.7]).unwrap();
    let m = classical::marginal(&p, 2).unwrap();
    for (idx, v) in m.probs().iter().enumerate() {
        let ones = (idx as u32).count_ones() as i32;
        let expected = 0.7f64.powi(ones) * 0.3f64.powi(4 - ones);
        assert!((v - expected).abs() < 1e-15);
    }
}

// ---------------------------------------------------------------------------
// TCI constants against a dense grid with step 1e-5 on [0, 50].

#[test]
fn tci_minimum_matches_dense_grid() {
    for &(phi_r, n, q) in &[(0.01, 3usize, 2usize), (0.05, 2, 3), (0.005, 5, 2)] {
        let steps = 5_000_000usize;
        let h = 50.0 / steps as f64;
        let oracle = (0..=steps)
            .map(|i| tci_objective(i as f64 * h, phi_r, q))
            .fold(f64::INFINITY, f64::min);
        let c = tci_constants(phi_r, n, q, TciGrid::default()).unwrap();
        assert!((c.m - oracle).abs() <= 1e-6, "{} vs {oracle}", c.m);
        assert!(c.m <= oracle + 1e-12);
        let nf = n as f64;
        assert!((c.kappa - (1.0 - (2.0 * nf - 1.0) * (nf - 1.0) * oracle)).abs() <= 1e-5);
    }
}

// ---------------------------------------------------------------------------
// Transfer matrix for the open Ising chain with a field.

fn transfer_matrix_log_partition(j: f64, h: f64, n: usize) -> f64 {
    // Z = Σ_s exp(-J Σ s_i s_{i+1} - h Σ s_i) with spins ±1.
    let spins = [1.0, -1.0];
    let mut v: Vec<f64> = spins.iter().map(|&s: &f64| (-h * s).exp()).collect();
    for _ in 1..n {
        v = spins
            .iter()
            .map(|&t| {
                spins
                    .iter()
                    .zip(&v)
                    .map(|(&s, &w)| w * (-j * s * t - h * t).exp())
                    .sum()
            })
            .collect();
    }
    v.iter().sum::<f64>().ln()
}

#[test]
fn ising_pressure_matches_transfer_matrix() {
    for &(j, h) in &[(0.5, 0.0), (1.0, 0.3), (-0.7, 0.2)] {
        let phi = Interaction::ising_1d(j, h).unwrap();
        for n in [2usize, 5, 9] {
            let r = Region::chain(0, n, 2).unwrap();
            let p = lattice::pressure(&phi, &r).unwrap();
            let oracle = transfer_matrix_log_partition(j, h, n) / n as f64;
            assert!((p - oracle).abs() < 1e-12, "J={j} h={h} n={n}");
        }
    }
    // Largest eigenvalue of the zero-field transfer matrix is 2 cosh J.
    let phi = Interaction::ising_1d(0.5, 0.0).unwrap();
    let p = lattice::pressure(&phi, &Region::chain(0, 12, 2).unwrap()).unwrap();
    assert!((p - (2.0 * 0.5f64.cosh()).ln()).abs() < 2e-2);
}

// ---------------------------------------------------------------------------
// Periodic approximation of a diagonal Markov block against the classical
// mixture formula evaluated configuration by configuration.

#[test]
fn periodic_markov_block_matches_classical_mixture() {
    let proc = StationaryProcess::markov(vec![vec![0.8, 0.2], vec![0.4, 0.6]], vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
    let a = 2usize;
    let b = 1usize;
    let block = classical::marginal(&proc, a).unwrap();
    let rho = classical::diagonal_embed(&block);
    let out = lattice::periodic_approx_marginal(&rho, b).unwrap();
    assert!(out.matrix().is_diagonal());
    let law = block.probs();
    let n_block = 2 * a;
    let prob_of = |cells: &[(usize, usize)]| -> f64 {
        // Probability that block positions take given values, marginalizing the rest.
        (0..law.len())
            .filter(|&idx| {
                cells
                    .iter()
                    .all(|&(pos, val)| (idx >> (n_block - 1 - pos)) & 1 == val)
            })
            .map(|idx| law[idx])
            .sum()
    };
    for cfg in 0..4usize {
        let y_vals = [(cfg >> 1) & 1, cfg & 1];
        let mut total = 0.0;
        for x in -(a as i64)..a as i64 {
            // Target sites y = -1, 0 fall into blocks k with local coordinate y - x - 2ak.
            let mut groups: Vec<(i64, Vec<(usize, usize)>)> = Vec::new();
            for (t, y) in [-1i64, 0].iter().enumerate() {
                let k = (y - x + a as i64).div_euclid(2 * a as i64);
                let local = y - x - 2 * a as i64 * k;
                let pos = (local + a as i64) as usize;
                match groups.iter_mut().find(|g| g.0 == k) {
                    Some(g) => g.1.push((pos, y_vals[t])),
                    None => groups.push((k, vec![(pos, y_vals[t])])),
                }
            }
            total += groups.iter().map(|g| prob_of(&g.1)).product::<f64>();
        }
        total /= (2 * a) as f64;
        assert!((out.matrix()[(cfg, cfg)].re - total).abs() < 1e-14);
    }
}
