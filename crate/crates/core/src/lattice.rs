//! Translation-invariant interactions on `Z^d` and their finite-volume
//! quantities.
//!
//! An [`Interaction`] is stored as a list of generator terms whose supports
//! are normalized so that the smallest site is the origin; all other
//! translates are implied. Terms with the same normalized support are merged.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::operator::{pauli_z, DensityMatrix, HermitianOperator};
use crate::region::{Region, Site};
use crate::solver::{partial_dependence, w1_norm, PartialDependence, SolverConfig, TransportCertificate};

const COMMUTE_TOL: f64 = 1e-12;
const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Interaction {
    d: usize,
    q: usize,
    terms: Vec<HermitianOperator>,
    range: i64,
    commuting: bool,
}

impl Interaction {
    pub fn new(d: usize, q: usize, terms: Vec<HermitianOperator>) -> Result<Self> {
        if d == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        let mut merged: Vec<HermitianOperator> = Vec::new();
        for t in terms {
            let r = t.region();
            if r.is_empty() {
                return Err(Error::InvalidInput("interaction term with empty support".into()));
            }
            if r.q() != q {
                return Err(Error::InvalidInput(format!("term has q = {}, expected {q}", r.q())));
            }
            if r.spatial_dim() != d {
                return Err(Error::UnsupportedDimension(r.spatial_dim()));
            }
            let shift = r.sites()[0].negate();
            let t = t.relabel(&r.translate(&shift))?;
            match merged.iter_mut().find(|m| m.region() == t.region()) {
                Some(m) => *m = m.add(&t)?,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.matrix().max_abs() > 0.0);
        merged.sort_by(|a, b| {
            (a.region().len(), a.region().sites()).cmp(&(b.region().len(), b.region().sites()))
        });
        let range = merged
            .iter()
            .map(|t| diameter(t.region()))
            .max()
            .unwrap_or(0);
        let mut phi = Interaction {
            d,
            q,
            terms: merged,
            range,
            commuting: true,
        };
        phi.commuting = phi.check_commuting()?;
        Ok(phi)
    }

    pub fn zero(d: usize, q: usize) -> Self {
        Interaction {
            d,
            q,
            terms: Vec::new(),
            range: 0,
            commuting: true,
        }
    }

    /// `Φ({0}) = h Z`, `Φ({0, 1}) = J Z ⊗ Z`, so `H = J Σ Z_i Z_{i+1} + h Σ Z_i`.
    pub fn ising_1d(j: f64, h: f64) -> Result<Self> {
        let z = pauli_z();
        let one = Region::chain(0, 1, 2)?;
        let two = Region::chain(0, 2, 2)?;
        Interaction::new(
            1,
            2,
            vec![
                HermitianOperator::new(one, z.scale(h))?,
                HermitianOperator::new(two, z.kron(&z).scale(j))?,
            ],
        )
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn terms(&self) -> &[HermitianOperator] {
        &self.terms
    }

    /// Largest sup-norm diameter of a generator support.
    pub fn range(&self) -> i64 {
        self.range
    }

    /// Whether all overlapping translates of all terms commute.
    pub fn is_commuting(&self) -> bool {
        self.commuting
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|t| t.matrix().is_diagonal())
    }

    fn check_commuting(&self) -> Result<bool> {
        for (i, a) in self.terms.iter().enumerate() {
            for b in &self.terms[i..] {
                for shift in shifts(self.d, self.range) {
                    let moved = b.region().translate(&shift);
                    if a.region().is_disjoint(&moved) {
                        continue;
                    }
                    let u = a.region().union(&moved)?;
                    let x = a.embed(&u)?.into_matrix();
                    let y = b.relabel(&moved)?.embed(&u)?.into_matrix();
                    let comm = x.mul(&y).sub(&y.mul(&x));
                    let scale = x.max_abs().max(y.max_abs()).max(1.0);
                    if comm.max_abs() > COMMUTE_TOL * scale * scale {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Number of sites that interact with the origin, counting the origin:
    /// `N = |∪ {X ∋ 0 : Φ(X) ≠ 0}|`.
    pub fn neighborhood_size(&self) -> usize {
        self.neighborhood(&Site::origin(self.d)).len().max(1)
    }

    fn neighborhood(&self, x: &Site) -> Vec<Site> {
        let mut sites: Vec<Site> = Vec::new();
        for t in &self.terms {
            for s in t.region().sites() {
                let shift = x.translate(&s.negate());
                for y in t.region().sites() {
                    sites.push(y.translate(&shift));
                }
            }
        }
        sites.sort();
        sites.dedup();
        sites
    }

    /// `‖Φ‖_r = Σ_{X ∋ 0} e^{r(|X|-1)} ‖Φ(X)‖_∞`. A generator with support `S`
    /// has `|S|` translates containing the origin.
    pub fn phi_r_norm(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let n = t.region().len() as f64;
                n * (r * (n - 1.0)).exp() * t.op_norm()
            })
            .sum()
    }

    /// `ω(E_Φ)` for the maximally mixed state `ω`.
    pub fn uniform_energy_density(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.trace() / t.dim() as f64)
            .sum()
    }

    /// Translates of the generators that fit in `region`, as `(term index, placed support)`.
    fn placements(&self, region: &Region) -> Vec<(usize, Region)> {
        let mut out = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            for b in region.sites() {
                let placed = t.region().translate(b);
                if placed.is_subset_of(region) {
                    out.push((i, placed));
                }
            }
        }
        out
    }

    fn check_region(&self, region: &Region) -> Result<()> {
        if region.q() != self.q {
            return Err(Error::RegionMismatch(format!(
                "region has q = {}, interaction has q = {}",
                region.q(),
                self.q
            )));
        }
        if !region.is_empty() && region.spatial_dim() != self.d {
            return Err(Error::UnsupportedDimension(region.spatial_dim()));
        }
        Ok(())
    }
}

fn diameter(r: &Region) -> i64 {
    let s = r.sites();
    let mut d = 0;
    for a in s {
        for b in s {
            d = d.max(a.dist_inf(b));
        }
    }
    d
}

fn shifts(d: usize, range: i64) -> Vec<Site> {
    let side = (2 * range + 1) as usize;
    let total = side.pow(d as u32);
    (0..total)
        .map(|mut k| {
            let mut c = vec![0i64; d];
            for v in c.iter_mut().rev() {
                *v = (k % side) as i64 - range;
                k /= side;
            }
            Site::new(c)
        })
        .collect()
}

/// `H^Φ_Λ = Σ_{X ⊆ Λ} Φ(X)` with open boundary conditions.
pub fn local_hamiltonian(phi: &Interaction, region: &Region) -> Result<HermitianOperator> {
    phi.check_region(region)?;
    if let Some(diag) = diagonal_hamiltonian(phi, region)? {
        return HermitianOperator::from_diag(region, &diag);
    }
    let mut m = Matrix::zeros(region.dim());
    for (i, placed) in phi.placements(region) {
        let op = phi.terms[i].relabel(&placed)?.embed(region)?;
        m = m.add(op.matrix());
    }
    HermitianOperator::new(region.clone(), m)
}

/// Diagonal of `H^Φ_Λ` when every term is diagonal, without forming a matrix.
pub fn diagonal_hamiltonian(phi: &Interaction, region: &Region) -> Result<Option<Vec<f64>>> {
    phi.check_region(region)?;
    if !phi.is_diagonal() {
        return Ok(None);
    }
    let q = region.q();
    let n = region.len();
    let dim = region.dim();
    let mut diag = vec![0.0; dim];
    let mut digits = vec![0usize; n];
    let placements: Vec<(Vec<f64>, Vec<usize>)> = phi
        .placements(region)
        .into_iter()
        .map(|(i, placed)| {
            let values = phi.terms[i].matrix().diag().iter().map(|z| z.re).collect();
            let pos = placed.sites().iter().map(|s| region.position(s).unwrap()).collect();
            (values, pos)
        })
        .collect();
    for (idx, e) in diag.iter_mut().enumerate() {
        let mut k = idx;
        for dgt in digits.iter_mut().rev() {
            *dgt = k % q;
            k /= q;
        }
        for (values, pos) in &placements {
            let local = pos.iter().fold(0, |acc, &p| acc * q + digits[p]);
            *e += values[local];
        }
    }
    Ok(Some(diag))
}

fn spectrum_of(phi: &Interaction, region: &Region) -> Result<Vec<f64>> {
    match diagonal_hamiltonian(phi, region)? {
        Some(d) => Ok(d),
        None => Ok(local_hamiltonian(phi, region)?.eigenvalues()),
    }
}

fn log_sum_exp_neg(values: &[f64]) -> f64 {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = values.iter().map(|&e| (-(e - min)).exp()).sum();
    s.ln() - min
}

/// `ln Tr e^{-H^Φ_Λ}`.
pub fn log_partition(phi: &Interaction, region: &Region) -> Result<f64> {
    if region.is_empty() {
        return Ok(0.0);
    }
    Ok(log_sum_exp_neg(&spectrum_of(phi, region)?))
}

/// Finite-volume pressure `ln Tr e^{-H^Φ_Λ} / |Λ|`.
pub fn pressure(phi: &Interaction, region: &Region) -> Result<f64> {
    if region.is_empty() {
        return Err(Error::InvalidInput("pressure needs a nonempty region".into()));
    }
    Ok(log_partition(phi, region)? / region.len() as f64)
}

/// Pressures on the boxes `Λ_a`.
pub fn pressure_sequence(phi: &Interaction, a_list: &[usize]) -> Result<Vec<f64>> {
    a_list
        .iter()
        .map(|&a| pressure(phi, &Region::centered_box(phi.d, a, phi.q)?))
        .collect()
}

/// Local Gibbs state `e^{-H}/Tr e^{-H}` with open boundary conditions.
pub fn gibbs_local(phi: &Interaction, region: &Region) -> Result<DensityMatrix> {
    if let Some(diag) = diagonal_hamiltonian(phi, region)? {
        let lz = log_sum_exp_neg(&diag);
        let p: Vec<f64> = diag.iter().map(|&e| (-e - lz).exp()).collect();
        return DensityMatrix::diagonal(region, &p);
    }
    let h = local_hamiltonian(phi, region)?;
    let spec = h.eig();
    let lz = log_sum_exp_neg(&spec.eigenvalues);
    let m = spec.map(|e| (-e - lz).exp());
    DensityMatrix::new(HermitianOperator::new(region.clone(), m)?)
}

/// `Tr[ρ H^Φ_Λ] / |Λ|` for a state on a box `Λ`.
pub fn specific_energy_pairing(rho: &DensityMatrix, phi: &Interaction) -> Result<f64> {
    let region = rho.region();
    if !is_box(region) {
        return Err(Error::RegionMismatch("state is not supported on a box".into()));
    }
    let h = local_hamiltonian(phi, region)?;
    Ok(rho.expect(&h)? / region.len() as f64)
}

fn is_box(r: &Region) -> bool {
    if r.is_empty() {
        return false;
    }
    let d = r.spatial_dim();
    let mut count: u128 = 1;
    for k in 0..d {
        let lo = r.sites().iter().map(|s| s.coords()[k]).min().unwrap();
        let hi = r.sites().iter().map(|s| s.coords()[k]).max().unwrap();
        count *= (hi - lo + 1) as u128;
    }
    count == r.len() as u128
}

/// `∂_x H^Φ_Λ`, evaluated on the union of the supports of the terms that
/// contain `x`; the remaining terms do not act on `x` and drop out.
pub fn site_dependence(
    phi: &Interaction,
    region: &Region,
    x: &Site,
    cfg: &SolverConfig,
) -> Result<PartialDependence> {
    phi.check_region(region)?;
    if !region.contains(x) {
        return Err(Error::RegionMismatch(format!("site {x:?} not in region")));
    }
    let touching: Vec<(usize, Region)> = phi
        .placements_touching(region, x)
        .into_iter()
        .collect();
    let mut sites: Vec<Site> = vec![x.clone()];
    for (_, placed) in &touching {
        sites.extend(placed.sites().iter().cloned());
    }
    sites.sort();
    sites.dedup();
    let support = Region::new(sites, phi.q)?;
    let mut m = Matrix::zeros(support.dim());
    for (i, placed) in &touching {
        m = m.add(phi.terms[*i].relabel(placed)?.embed(&support)?.matrix());
    }
    let h = HermitianOperator::new(support, m)?;
    partial_dependence(&h, x, cfg)
}

impl Interaction {
    fn placements_touching(&self, region: &Region, x: &Site) -> Vec<(usize, Region)> {
        let mut out = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            for s in t.region().sites() {
                let shift = x.translate(&s.negate());
                let placed = t.region().translate(&shift);
                if placed.is_subset_of(region) {
                    out.push((i, placed));
                }
            }
        }
        out
    }
}

/// `∂_0 H^Φ_{Λ_a}` for each `a` in `a_list`.
pub fn phi_lipschitz_sequence(
    phi: &Interaction,
    a_list: &[usize],
    cfg: &SolverConfig,
) -> Result<Vec<PartialDependence>> {
    let origin = Site::origin(phi.d);
    a_list
        .iter()
        .map(|&a| {
            if a == 0 {
                return Err(Error::InvalidInput("box half-width must be at least 1".into()));
            }
            let region = Region::centered_box(phi.d, a, phi.q)?;
            site_dependence(phi, &region, &origin, cfg)
        })
        .collect()
}

/// `‖Φ‖_L`, computed on a box that contains every term touching the origin.
pub fn phi_lipschitz(phi: &Interaction, cfg: &SolverConfig) -> Result<PartialDependence> {
    let a = phi.range as usize + 1;
    let region = Region::centered_box(phi.d, a, phi.q)?;
    site_dependence(phi, &region, &Site::origin(phi.d), cfg)
}

/// Constants of the high-temperature transportation-cost inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct TciConstants {
    pub m: f64,
    /// Minimizer of the objective; infinite when `‖Φ‖_r = 0`.
    pub t_star: f64,
    pub kappa: f64,
    /// `4N²/(1-e^{-κ})²` when `κ > 0`.
    pub c: Option<f64>,
    pub valid: bool,
    /// The closed-form choice `t = ln(1/‖Φ‖_r)/(π + ln q / 2)` and its objective value.
    pub suggested: Option<(f64, f64)>,
    /// Whether the closed-form choice beat the numerical minimizer.
    pub suggested_is_better: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TciGrid {
    pub t_max: f64,
    pub steps: usize,
}

impl Default for TciGrid {
    fn default() -> Self {
        TciGrid {
            t_max: 50.0,
            steps: 1_000_000,
        }
    }
}

/// Objective whose infimum over `t >= 0` defines `M`.
pub fn tci_objective(t: f64, phi_r: f64, q: usize) -> f64 {
    let s = (1.0 + t * t).sqrt();
    let qf = q as f64;
    (phi_r.exp() + 1.0) * s * phi_r * qf.powf((3.0 + s) / 2.0) * (phi_r * (2.0 + s / 2.0)).exp()
        + 2.0 * phi_r * (2.0 * phi_r).exp()
        + 4.0 * (-PI * t).exp()
}

pub fn tci_constants(phi_r: f64, n: usize, q: usize, grid: TciGrid) -> Result<TciConstants> {
    if !(phi_r >= 0.0) || n == 0 || q < 2 || grid.steps == 0 || !(grid.t_max > 0.0) {
        return Err(Error::InvalidInput("tci_constants needs phi_r >= 0, N >= 1, q >= 2 and a nonempty grid".into()));
    }
    let (m, t_star, suggested, suggested_is_better) = if phi_r == 0.0 {
        (0.0, f64::INFINITY, None, false)
    } else {
        let f = |t: f64| tci_objective(t, phi_r, q);
        let h = grid.t_max / grid.steps as f64;
        let mut best_i = 0;
        let mut best = f(0.0);
        for i in 1..=grid.steps {
            let v = f(i as f64 * h);
            if v < best {
                best = v;
                best_i = i;
            }
        }
        let lo = (best_i as f64 - 1.0).max(0.0) * h;
        let hi = ((best_i + 1) as f64 * h).min(grid.t_max);
        let (mut t, mut v) = golden_section(&f, lo, hi, 1e-10);
        if best < v {
            t = best_i as f64 * h;
            v = best;
        }
        let ts = (1.0 / phi_r).ln() / (PI + (q as f64).ln() / 2.0);
        let suggested = (ts > 0.0).then(|| (ts, f(ts)));
        let mut better = false;
        if let Some((ts, vs)) = suggested {
            if vs < v {
                t = ts;
                v = vs;
                better = true;
            }
        }
        (v, t, suggested, better)
    };
    let nf = n as f64;
    let kappa = 1.0 - (2.0 * nf - 1.0) * (nf - 1.0) * m;
    let valid = kappa > 0.0;
    let c = valid.then(|| 4.0 * nf * nf / (1.0 - (-kappa).exp()).powi(2));
    Ok(TciConstants {
        m,
        t_star,
        kappa,
        c,
        valid,
        suggested,
        suggested_is_better,
    })
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// Marginal on `Λ_b` of the periodic approximation built from a state on `Λ_a`
/// (one spatial dimension): the uniform mixture over `x ∈ Λ_a` of the shifted
/// products of copies of `ρ_{Λ_a}` placed on the blocks `Λ_a + 2ak`.
pub fn periodic_approx_marginal(rho_block: &DensityMatrix, b: usize) -> Result<DensityMatrix> {
    let region = rho_block.region();
    if region.is_empty() || region.spatial_dim() != 1 {
        return Err(Error::UnsupportedDimension(if region.is_empty() { 0 } else { region.spatial_dim() }));
    }
    let q = region.q();
    let n = region.len();
    if n % 2 != 0 || *region != Region::centered_box(1, n / 2, q)? {
        return Err(Error::RegionMismatch("block state must live on a box Λ_a".into()));
    }
    if b == 0 {
        return Err(Error::InvalidInput("target box half-width must be at least 1".into()));
    }
    let a = (n / 2) as i64;
    let target = Region::centered_box(1, b, q).map_err(|e| match e {
        Error::DimensionCap { .. } => Error::SizeCap(format!("target box of {} sites", 2 * b)),
        other => other,
    })?;
    let mut acc = Matrix::zeros(target.dim());
    for x in -a..a {
        // Group target sites by the block they fall into.
        let mut blocks: Vec<(i64, Vec<Site>, Vec<Site>)> = Vec::new();
        for y in target.sites() {
            let y = y.coords()[0];
            let k = (y - x + a).div_euclid(2 * a);
            let local = y - x - 2 * a * k;
            match blocks.iter_mut().find(|blk| blk.0 == k) {
                Some(blk) => {
                    blk.1.push(Site::d1(local));
                    blk.2.push(Site::d1(y));
                }
                None => blocks.push((k, vec![Site::d1(local)], vec![Site::d1(y)])),
            }
        }
        let mut component: Option<DensityMatrix> = None;
        for (_, local, actual) in blocks {
            let keep = Region::new(local, q)?;
            let piece = rho_block.partial_trace(&keep)?.relabel(&Region::new(actual, q)?)?;
            component = Some(match component {
                None => piece,
                Some(c) => c.tensor(&piece)?,
            });
        }
        let component = component.expect("target box is nonempty");
        acc = acc.add(component.matrix());
    }
    let mixed = acc.scale(1.0 / (2 * a) as f64);
    DensityMatrix::new(HermitianOperator::new(target, mixed)?)
}

/// Per-volume W1 values of two families of box marginals.
#[derive(Clone, Debug)]
pub struct SpecificSequence {
    /// `primal / |Λ_a|` for `a = 1, 2, ...`.
    pub values: Vec<f64>,
    /// `dual / |Λ_a|`.
    pub lower: Vec<f64>,
    pub certificates: Vec<TransportCertificate>,
    /// Compatibility of the finite families was verified; translation
    /// invariance of an infinite extension cannot be checked from them.
    pub note: &'static str,
}

pub const TRANSLATION_INVARIANCE_NOTE: &str =
    "marginal families checked for mutual consistency; translation invariance of the infinite-volume states is assumed, not verified";

/// Checks that `family[k]` lives on `Λ_{k+1}` and that consecutive members are
/// related by partial trace.
pub fn check_family(name: &str, family: &[DensityMatrix]) -> Result<()> {
    for (k, rho) in family.iter().enumerate() {
        let a = k + 1;
        let r = rho.region();
        let d = if r.is_empty() { 1 } else { r.spatial_dim() };
        let expected = Region::centered_box(d, a, r.q())?;
        if *r != expected {
            return Err(Error::RegionMismatch(format!(
                "{name} family member {k} is not supported on the box of half-width {a}"
            )));
        }
        if k > 0 {
            let reduced = rho.partial_trace(family[k - 1].region())?;
            let deviation = reduced.matrix().sub(family[k - 1].matrix()).max_abs();
            if !(deviation <= CONSISTENCY_TOL) {
                return Err(Error::InconsistentMarginals {
                    family: String::from(name),
                    a: a - 1,
                    b: a,
                    deviation,
                });
            }
        }
    }
    Ok(())
}

/// `‖ρ_{Λ_a} - σ_{Λ_a}‖_W1 / |Λ_a|` for `a = 1, ..., len`.
pub fn w1_specific_sequence(
    rho: &[DensityMatrix],
    sigma: &[DensityMatrix],
    cfg: &SolverConfig,
) -> Result<SpecificSequence> {
    if rho.len() != sigma.len() {
        return Err(Error::InvalidInput("families have different lengths".into()));
    }
    check_family("rho", rho)?;
    check_family("sigma", sigma)?;
    let mut values = Vec::with_capacity(rho.len());
    let mut lower = Vec::with_capacity(rho.len());
    let mut certificates = Vec::with_capacity(rho.len());
    for (r, s) in rho.iter().zip(sigma) {
        let cert = w1_norm(&r.difference(s)?, cfg)?;
        let vol = r.region().len() as f64;
        values.push(cert.primal_value / vol);
        lower.push(cert.dual_value / vol);
        certificates.push(cert);
    }
    Ok(SpecificSequence {
        values,
        lower,
        certificates,
        note: TRANSLATION_INVARIANCE_NOTE,
    })
}
