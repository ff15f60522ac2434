//! Exact Hamming-cost optimal transport on `[q]^Λ`, stationary processes on
//! `Z`, and the Ornstein d-bar window sequence.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::operator::DensityMatrix;
use crate::region::{Region, Site};

/// Largest support (on either side) accepted by [`hamming_w1`].
pub const MAX_SUPPORT: usize = 4096;
/// Largest window length `2a` accepted by [`marginal`].
pub const MAX_WINDOW: usize = 12;

const PROB_TOL: f64 = 1e-12;
const REDUCED_COST_TOL: f64 = 1e-12;
const DEGENERATE_STREAK: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDistribution {
    region: Region,
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(region: Region, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != region.dim() {
            return Err(Error::RegionMismatch(format!(
                "{} probabilities for dimension {}",
                probs.len(),
                region.dim()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvalidInput(format!("negative or NaN probability {p}")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidInput(format!("probabilities sum to {s}")));
        }
        Ok(ClassicalDistribution { region, probs })
    }

    pub fn uniform(region: &Region) -> Self {
        let d = region.dim();
        ClassicalDistribution {
            region: region.clone(),
            probs: vec![1.0 / d as f64; d],
        }
    }

    /// Point mass on the configuration with the given digits (canonical site order).
    pub fn point(region: &Region, config: &[usize]) -> Result<Self> {
        if config.len() != region.len() || config.iter().any(|&c| c >= region.q()) {
            return Err(Error::InvalidInput("configuration does not fit the region".into()));
        }
        let mut probs = vec![0.0; region.dim()];
        probs[encode(config, region.q())] = 1.0;
        Ok(ClassicalDistribution {
            region: region.clone(),
            probs,
        })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn shannon_entropy(&self) -> f64 {
        crate::entropy::shannon(&self.probs)
    }

    /// Marginal on a subregion.
    pub fn marginal(&self, keep: &Region) -> Result<Self> {
        let pos = self.region.positions_of(keep)?;
        let q = self.region.q();
        let n = self.region.len();
        let mut out = vec![0.0; keep.dim()];
        let mut digits = vec![0usize; n];
        for (idx, &p) in self.probs.iter().enumerate() {
            decode_into(idx, q, &mut digits);
            let j = pos.iter().fold(0, |acc, &k| acc * q + digits[k]);
            out[j] += p;
        }
        Ok(ClassicalDistribution {
            region: keep.clone(),
            probs: out,
        })
    }

    /// Independent joint distribution on the union of two disjoint regions.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if !self.region.is_disjoint(&other.region) {
            return Err(Error::RegionOverlap);
        }
        let region = self.region.union(&other.region)?;
        let q = region.q();
        let pa = region.positions_of(&self.region)?;
        let pb = region.positions_of(&other.region)?;
        let mut probs = vec![0.0; region.dim()];
        let mut digits = vec![0usize; region.len()];
        for (idx, p) in probs.iter_mut().enumerate() {
            decode_into(idx, q, &mut digits);
            let ia = pa.iter().fold(0, |acc, &k| acc * q + digits[k]);
            let ib = pb.iter().fold(0, |acc, &k| acc * q + digits[k]);
            *p = self.probs[ia] * other.probs[ib];
        }
        Ok(ClassicalDistribution { region, probs })
    }

    /// Same distribution on a region with the same size and `q`, site by site in canonical order.
    pub fn relabel(&self, target: &Region) -> Result<Self> {
        if target.len() != self.region.len() || target.q() != self.region.q() {
            return Err(Error::RegionMismatch("relabel target has a different shape".into()));
        }
        Ok(ClassicalDistribution {
            region: target.clone(),
            probs: self.probs.clone(),
        })
    }
}

/// `Σ_x μ(x) |x⟩⟨x|`.
pub fn diagonal_embed(mu: &ClassicalDistribution) -> DensityMatrix {
    DensityMatrix::diagonal(&mu.region, &mu.probs).expect("validated distribution")
}

fn encode(digits: &[usize], q: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * q + d)
}

fn decode_into(mut idx: usize, q: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = idx % q;
        idx /= q;
    }
}

/// Number of positions at which two configurations (given as indices) differ.
pub fn hamming_distance(x: usize, y: usize, q: usize, n: usize) -> usize {
    let (mut x, mut y) = (x, y);
    let mut h = 0;
    for _ in 0..n {
        if x % q != y % q {
            h += 1;
        }
        x /= q;
        y /= q;
    }
    h
}

/// Optimal coupling with its optimality certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct HammingTransport {
    pub value: f64,
    /// `Σ_x u(x) μ(x) + Σ_y v(y) ν(y)` for the returned potentials.
    pub dual_value: f64,
    /// Nonzero entries `(x, y, π(x, y))` in configuration indices.
    pub coupling: Vec<(usize, usize, f64)>,
    /// Potentials on the support of `μ` and `ν`, satisfying `u(x) + v(y) <= h(x, y)`.
    pub row_potentials: Vec<(usize, f64)>,
    pub col_potentials: Vec<(usize, f64)>,
    pub pivots: usize,
}

/// Hamming-cost optimal transport between two distributions on the same region.
pub fn hamming_w1(mu: &ClassicalDistribution, nu: &ClassicalDistribution) -> Result<HammingTransport> {
    if mu.region != nu.region {
        return Err(Error::RegionMismatch("distributions live on different regions".into()));
    }
    let q = mu.region.q();
    let n = mu.region.len();
    let rows: Vec<usize> = (0..mu.probs.len()).filter(|&i| mu.probs[i] > 0.0).collect();
    let cols: Vec<usize> = (0..nu.probs.len()).filter(|&j| nu.probs[j] > 0.0).collect();
    if rows.len() > MAX_SUPPORT || cols.len() > MAX_SUPPORT {
        return Err(Error::SizeCap(format!(
            "supports of size {} and {} exceed {MAX_SUPPORT}",
            rows.len(),
            cols.len()
        )));
    }
    let supply: Vec<f64> = rows.iter().map(|&i| mu.probs[i]).collect();
    let demand: Vec<f64> = cols.iter().map(|&j| nu.probs[j]).collect();
    let cost = |a: usize, b: usize| hamming_distance(rows[a], cols[b], q, n) as f64;
    let sol = transportation_simplex(&supply, &demand, &cost);

    let coupling = sol
        .basis
        .iter()
        .filter(|c| c.flow > 0.0)
        .map(|c| (rows[c.row], cols[c.col], c.flow))
        .collect::<Vec<_>>();
    let value = sol.basis.iter().map(|c| c.flow * cost(c.row, c.col)).sum();
    let dual_value = supply.iter().zip(&sol.u).map(|(a, u)| a * u).sum::<f64>()
        + demand.iter().zip(&sol.v).map(|(b, v)| b * v).sum::<f64>();
    Ok(HammingTransport {
        value,
        dual_value,
        coupling,
        row_potentials: rows.iter().copied().zip(sol.u).collect(),
        col_potentials: cols.iter().copied().zip(sol.v).collect(),
        pivots: sol.pivots,
    })
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    row: usize,
    col: usize,
    flow: f64,
}

struct SimplexSolution {
    basis: Vec<Cell>,
    u: Vec<f64>,
    v: Vec<f64>,
    pivots: usize,
}

/// Transportation simplex on the complete bipartite graph, started from the
/// northwest-corner rule. The basis is a spanning tree on `m + k` nodes
/// (rows first, then columns).
fn transportation_simplex(
    supply: &[f64],
    demand: &[f64],
    cost: &dyn Fn(usize, usize) -> f64,
) -> SimplexSolution {
    let m = supply.len();
    let k = demand.len();
    let mut basis = northwest_corner(supply, demand);
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; k];
    let mut pivots = 0;
    let mut degenerate = 0;

    loop {
        let adj = adjacency(&basis, m, k);
        potentials(&basis, &adj, m, cost, &mut u, &mut v);

        let bland = degenerate >= DEGENERATE_STREAK;
        let mut entering: Option<(usize, usize)> = None;
        let mut best = -REDUCED_COST_TOL;
        'scan: for i in 0..m {
            for j in 0..k {
                let r = cost(i, j) - u[i] - v[j];
                if r < best {
                    entering = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = r;
                }
            }
        }
        let Some((ei, ej)) = entering else {
            break;
        };

        // Tree path from column ej back to row ei; its cells alternate -θ, +θ, ...
        let path = tree_path(&basis, &adj, m + ej, ei, m);
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (step, &cell) in path.iter().enumerate() {
            if step % 2 == 0 {
                let c = basis[cell];
                let better = c.flow < theta
                    || (c.flow == theta && (c.row, c.col) < (basis[leave].row, basis[leave].col));
                if better {
                    theta = c.flow;
                    leave = cell;
                }
            }
        }
        for (step, &cell) in path.iter().enumerate() {
            if step % 2 == 0 {
                basis[cell].flow -= theta;
            } else {
                basis[cell].flow += theta;
            }
        }
        basis[leave] = Cell {
            row: ei,
            col: ej,
            flow: theta,
        };
        if theta > 0.0 {
            degenerate = 0;
        } else {
            degenerate += 1;
        }
        pivots += 1;
    }
    for c in basis.iter_mut() {
        if c.flow < 0.0 {
            c.flow = 0.0;
        }
    }
    SimplexSolution { basis, u, v, pivots }
}

fn northwest_corner(supply: &[f64], demand: &[f64]) -> Vec<Cell> {
    let (m, k) = (supply.len(), demand.len());
    let mut ra = supply.to_vec();
    let mut rb = demand.to_vec();
    let mut basis = Vec::with_capacity(m + k - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = ra[i].min(rb[j]).max(0.0);
        basis.push(Cell { row: i, col: j, flow: x });
        ra[i] -= x;
        rb[j] -= x;
        if i == m - 1 && j == k - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == k - 1 || ra[i] <= rb[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    // Absorb rounding residue so both marginals are met as closely as possible.
    if let Some(last) = basis.last_mut() {
        last.flow += ra[m - 1].max(0.0).min(rb[k - 1].max(0.0));
    }
    basis
}

fn adjacency(basis: &[Cell], m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); m + k];
    for (idx, c) in basis.iter().enumerate() {
        adj[c.row].push(idx);
        adj[m + c.col].push(idx);
    }
    adj
}

fn other_end(c: &Cell, node: usize, m: usize) -> usize {
    if node < m {
        m + c.col
    } else {
        c.row
    }
}

fn potentials(
    basis: &[Cell],
    adj: &[Vec<usize>],
    m: usize,
    cost: &dyn Fn(usize, usize) -> f64,
    u: &mut [f64],
    v: &mut [f64],
) {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    u[0] = 0.0;
    seen[0] = true;
    queue.push_back(0);
    while let Some(node) = queue.pop_front() {
        for &idx in &adj[node] {
            let c = &basis[idx];
            let next = other_end(c, node, m);
            if seen[next] {
                continue;
            }
            seen[next] = true;
            if next < m {
                u[next] = cost(c.row, c.col) - v[c.col];
            } else {
                v[next - m] = cost(c.row, c.col) - u[c.row];
            }
            queue.push_back(next);
        }
    }
}

/// Basis cells on the tree path from `from` to `to`, in order starting at `from`.
fn tree_path(basis: &[Cell], adj: &[Vec<usize>], from: usize, to: usize, m: usize) -> Vec<usize> {
    let nodes = adj.len();
    let mut parent: Vec<Option<usize>> = vec![None; nodes];
    let mut seen = vec![false; nodes];
    let mut queue = VecDeque::new();
    seen[from] = true;
    queue.push_back(from);
    while let Some(node) = queue.pop_front() {
        if node == to {
            break;
        }
        for &idx in &adj[node] {
            let next = other_end(&basis[idx], node, m);
            if !seen[next] {
                seen[next] = true;
                parent[next] = Some(idx);
                queue.push_back(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = to;
    while node != from {
        let idx = parent[node].expect("basis is a spanning tree");
        path.push(idx);
        node = other_end(&basis[idx], node, m);
    }
    path.reverse();
    path
}

/// Stationary process on `Z` with values in `[q]`.
#[derive(Clone, Debug, PartialEq)]
pub enum StationaryProcess {
    Iid { p: Vec<f64> },
    Markov { transition: Vec<Vec<f64>>, pi: Vec<f64> },
}

impl StationaryProcess {
    pub fn iid(p: Vec<f64>) -> Result<Self> {
        check_stochastic(&p, "iid law")?;
        Ok(StationaryProcess::Iid { p })
    }

    pub fn markov(transition: Vec<Vec<f64>>, pi: Vec<f64>) -> Result<Self> {
        let q = pi.len();
        check_stochastic(&pi, "initial vector")?;
        if transition.len() != q {
            return Err(Error::InvalidInput("transition matrix size differs from pi".into()));
        }
        for row in &transition {
            if row.len() != q {
                return Err(Error::InvalidInput("transition matrix is not square".into()));
            }
            check_stochastic(row, "transition row")?;
        }
        for j in 0..q {
            let s: f64 = (0..q).map(|i| pi[i] * transition[i][j]).sum();
            if (s - pi[j]).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "pi is not stationary: (πP)_{j} = {s}, π_{j} = {}",
                    pi[j]
                )));
            }
        }
        Ok(StationaryProcess::Markov { transition, pi })
    }

    /// Two-state chain that flips with probability `flip`.
    pub fn symmetric_flip(flip: f64) -> Result<Self> {
        Self::markov(
            vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]],
            vec![0.5, 0.5],
        )
    }

    pub fn q(&self) -> usize {
        match self {
            StationaryProcess::Iid { p } => p.len(),
            StationaryProcess::Markov { pi, .. } => pi.len(),
        }
    }

    fn initial(&self) -> &[f64] {
        match self {
            StationaryProcess::Iid { p } => p,
            StationaryProcess::Markov { pi, .. } => pi,
        }
    }

    fn step(&self, from: usize, to: usize) -> f64 {
        match self {
            StationaryProcess::Iid { p } => p[to],
            StationaryProcess::Markov { transition, .. } => transition[from][to],
        }
    }

    /// Law of `n` consecutive values, first value most significant.
    pub fn window_law(&self, n: usize) -> Vec<f64> {
        let q = self.q();
        let mut probs = self.initial().to_vec();
        for _ in 1..n {
            let mut next = Vec::with_capacity(probs.len() * q);
            for (idx, &p) in probs.iter().enumerate() {
                let last = idx % q;
                for s in 0..q {
                    next.push(p * self.step(last, s));
                }
            }
            probs = next;
        }
        probs
    }
}

fn check_stochastic(p: &[f64], what: &str) -> Result<()> {
    if p.len() < 2 {
        return Err(Error::InvalidInput(format!("{what} needs at least two states")));
    }
    if p.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidInput(format!("{what} has a negative entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidInput(format!("{what} sums to {s}")));
    }
    Ok(())
}

/// Window `Λ_a = {-a, ..., a-1}` on `Z`.
pub fn window(a: usize, q: usize) -> Result<Region> {
    if a == 0 {
        return Err(Error::InvalidInput("window half-width must be at least 1".into()));
    }
    if 2 * a > MAX_WINDOW || (q as u128).pow(2 * a as u32) > MAX_SUPPORT as u128 {
        return Err(Error::SizeCap(format!("window of {} sites with q = {q}", 2 * a)));
    }
    Region::new((-(a as i64)..a as i64).map(Site::d1).collect(), q)
}

/// Marginal of the process on `Λ_a`.
pub fn marginal(proc: &StationaryProcess, a: usize) -> Result<ClassicalDistribution> {
    let region = window(a, proc.q())?;
    let probs = proc.window_law(2 * a);
    Ok(ClassicalDistribution { region, probs })
}

/// `W1(μ_{Λ_a}, ν_{Λ_a}) / |Λ_a|` for `a = 1, ..., a_max`.
pub fn dbar_sequence(mu: &StationaryProcess, nu: &StationaryProcess, a_max: usize) -> Result<Vec<f64>> {
    if mu.q() != nu.q() {
        return Err(Error::InvalidInput("processes have different alphabets".into()));
    }
    if a_max > MAX_WINDOW / 2 {
        return Err(Error::SizeCap(format!("a_max = {a_max} exceeds {}", MAX_WINDOW / 2)));
    }
    (1..=a_max)
        .map(|a| {
            let t = hamming_w1(&marginal(mu, a)?, &marginal(nu, a)?)?;
            Ok(t.value / (2 * a) as f64)
        })
        .collect()
}

/// `true` when every step is `>= -tol`.
pub fn is_nondecreasing(values: &[f64], tol: f64) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] - tol)
}
