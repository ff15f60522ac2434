//! Executable checks of the inequalities relating W1, Lipschitz constants,
//! entropies and pressures.
//!
//! Every check returns a [`CheckResult`] with signed slack `rhs - lhs`. Where
//! a side of an inequality involves a solver output, the bound that enters is
//! chosen so that solver inaccuracy can only make the slack smaller:
//!
//! | check | solver quantity | bound used |
//! |---|---|---|
//! | entropy continuity (both forms) | `W1` on the right | primal, dual recorded |
//! | Gaussian concentration, Poincaré | `∂_x H` on the right | upper, lower recorded |
//! | Marton, k-fold Marton | `W1` on the left | primal, dual recorded |
//! | sandwich | `W1` between the two bounds | dual below, primal above |
//! | local bound | `W1` on the left | primal |
//! | superadditivity | joint on the right, parts on the left | dual / primal |
//! | triangle | one side on the left, two on the right | dual / primal |
//! | pressure bound | `‖Φ‖_L` on the right | lower |
//! | w1-Gibbs entropy bound | `W1` on the right | primal, dual recorded |
//!
//! For the continuity and concentration checks the verdict follows the
//! convention above and the stricter evaluation is attached as an observation.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

#[allow(unused_imports)]
use num_traits::Float;

use crate::digest::InputDigest;
use crate::entropy::{continuity_rhs, g};
use crate::error::{Error, Result};
use crate::lattice::{self, Interaction};
use crate::operator::{DensityMatrix, HermitianOperator, ProductState};
use crate::region::Region;
use crate::solver::{lipschitz_profile, SolverConfig, TransportCertificate};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance_used: f64,
    pub inputs_digest: String,
    pub pass: bool,
    /// Auxiliary named values that do not enter the verdict.
    pub observations: Vec<(String, f64)>,
}

impl CheckResult {
    pub fn new(name: &str, lhs: f64, rhs: f64, tolerance: f64, inputs_digest: String) -> Self {
        let slack = rhs - lhs;
        CheckResult {
            name: name.into(),
            lhs,
            rhs,
            slack,
            tolerance_used: tolerance,
            inputs_digest,
            pass: slack >= -tolerance,
            observations: Vec::new(),
        }
    }

    pub fn observe(mut self, key: &str, value: f64) -> Self {
        self.observations.push((key.into(), value));
        self
    }

    pub fn observation(&self, key: &str) -> Option<f64> {
        self.observations.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// Solver settings and tolerance policy shared by the checks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Verifier {
    pub cfg: SolverConfig,
    /// Overrides the default `max(1e-9, 3 tol_gap scale)`.
    pub tolerance: Option<f64>,
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn same_region(a: &Region, b: &Region, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::RegionMismatch(format!("{what}: regions differ")));
    }
    Ok(())
}

fn cert_region(cert: &TransportCertificate) -> &Region {
    cert.dual_witness.region()
}

fn digest_states(label: &str, states: &[&DensityMatrix]) -> String {
    states
        .iter()
        .fold(InputDigest::new().label(label), |d, s| d.operator(s.op()))
        .finish()
}

impl Verifier {
    pub fn new(cfg: SolverConfig) -> Self {
        Verifier { cfg, tolerance: None }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn tolerance(&self, scale: f64) -> f64 {
        self.tolerance
            .unwrap_or_else(|| (3.0 * self.cfg.tol_gap * scale.abs().max(1.0)).max(1e-9))
    }

    fn dependence_bounds(&self, h: &HermitianOperator) -> Result<(Vec<f64>, Vec<f64>)> {
        let profile = lipschitz_profile(h, &self.cfg)?;
        Ok((
            profile.iter().map(|p| p.value).collect(),
            profile.iter().map(|p| p.lower.max(0.0)).collect(),
        ))
    }

    /// `|S(ρ) - S(σ)|/|Λ| <= h2(w) + w ln(q²-1)` with `w = W1/|Λ|`.
    pub fn check_entropy_continuity(
        &self,
        rho: &DensityMatrix,
        sigma: &DensityMatrix,
        cert: &TransportCertificate,
    ) -> Result<CheckResult> {
        same_region(rho.region(), sigma.region(), "entropy continuity")?;
        same_region(rho.region(), cert_region(cert), "entropy continuity certificate")?;
        let n = rho.region().len() as f64;
        let q = rho.region().q();
        let lhs = (rho.entropy()? - sigma.entropy()?).abs() / n;
        let w = cert.primal_value / n;
        let rhs = continuity_rhs(w, q);
        let rhs_dual = continuity_rhs(cert.dual_value / n, q);
        let tol = self.tolerance(rhs);
        Ok(CheckResult::new("entropy_continuity", lhs, rhs, tol, digest_states("entropy_continuity", &[rho, sigma]))
            .observe("w_per_site", w)
            .observe("monotone_branch", flag(w <= crate::entropy::phi_monotone_end(q)))
            .observe("rhs_from_dual", rhs_dual)
            .observe("pass_from_dual", flag(rhs_dual - lhs >= -tol)))
    }

    /// `|S(ρ) - S(σ)| <= g(W) + W ln(q²|Λ|)`.
    pub fn check_entropy_continuity_old(
        &self,
        rho: &DensityMatrix,
        sigma: &DensityMatrix,
        cert: &TransportCertificate,
    ) -> Result<CheckResult> {
        same_region(rho.region(), sigma.region(), "entropy continuity")?;
        same_region(rho.region(), cert_region(cert), "entropy continuity certificate")?;
        let n = rho.region().len() as f64;
        let q = rho.region().q() as f64;
        let lhs = (rho.entropy()? - sigma.entropy()?).abs();
        let w = cert.primal_value;
        let rhs = g(w) + w * (q * q * n).ln();
        let new_rhs = n * continuity_rhs(w / n, rho.region().q());
        let wd = cert.dual_value;
        let rhs_dual = g(wd) + wd * (q * q * n).ln();
        let tol = self.tolerance(rhs);
        Ok(CheckResult::new("entropy_continuity_old", lhs, rhs, tol, digest_states("entropy_continuity_old", &[rho, sigma]))
            .observe("new_rhs_scaled", new_rhs)
            .observe("new_bound_tighter", flag(new_rhs <= rhs))
            .observe("rhs_from_dual", rhs_dual))
    }

    /// `ln Tr e^{H + ln ω} <= Tr[ωH] + ½ Σ_x (∂_x H)²` for a full-rank product `ω`.
    pub fn check_gaussian_concentration(
        &self,
        h: &HermitianOperator,
        omega: &ProductState,
    ) -> Result<CheckResult> {
        same_region(h.region(), omega.region(), "Gaussian concentration")?;
        let ln_omega = omega.log()?;
        let rho = omega.to_density();
        let spec = h.add(&ln_omega)?.eigenvalues();
        let max = spec.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lhs = max + spec.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        let mean = rho.expect(h)?;
        let (upper, lower) = self.dependence_bounds(h)?;
        let rhs = mean + 0.5 * upper.iter().map(|d| d * d).sum::<f64>();
        let rhs_lower = mean + 0.5 * lower.iter().map(|d| d * d).sum::<f64>();
        let tol = self.tolerance(rhs);
        let digest = InputDigest::new().label("gaussian").operator(h).operator(rho.op()).finish();
        Ok(CheckResult::new("gaussian_concentration", lhs, rhs, tol, digest)
            .observe("rhs_from_lower_dependence", rhs_lower)
            .observe("pass_from_lower_dependence", flag(rhs_lower - lhs >= -tol)))
    }

    /// `Var_ω H <= Σ_x (∂_x H)²` for a product `ω`.
    pub fn check_poincare(&self, h: &HermitianOperator, omega: &ProductState) -> Result<CheckResult> {
        same_region(h.region(), omega.region(), "Poincaré")?;
        let rho = omega.to_density();
        let lhs = rho.variance(h)?;
        let (upper, lower) = self.dependence_bounds(h)?;
        let rhs: f64 = upper.iter().map(|d| d * d).sum();
        let rhs_lower: f64 = lower.iter().map(|d| d * d).sum();
        let tol = self.tolerance(rhs);
        let digest = InputDigest::new().label("poincare").operator(h).operator(rho.op()).finish();
        Ok(CheckResult::new("poincare", lhs, rhs, tol, digest)
            .observe("rhs_from_lower_dependence", rhs_lower)
            .observe("pass_from_lower_dependence", flag(rhs_lower - lhs >= -tol)))
    }

    /// Per-volume Poincaré check for a local Hamiltonian:
    /// `Var_ω H_Λ / |Λ| <= Σ_x (∂_x H_Λ)² / |Λ|`, with `‖Φ‖_L²` recorded.
    pub fn check_poincare_lattice(
        &self,
        phi: &Interaction,
        region: &Region,
        omega: &ProductState,
    ) -> Result<CheckResult> {
        same_region(region, omega.region(), "lattice Poincaré")?;
        let h = lattice::local_hamiltonian(phi, region)?;
        let n = region.len() as f64;
        let lhs = omega.to_density().variance(&h)? / n;
        let mut rhs = 0.0;
        for x in region.sites() {
            let d = lattice::site_dependence(phi, region, x, &self.cfg)?.value;
            rhs += d * d;
        }
        rhs /= n;
        let l = lattice::phi_lipschitz(phi, &self.cfg)?;
        let tol = self.tolerance(rhs);
        let digest = InputDigest::new().label("poincare_lattice").operator(&h).operator(omega.to_density().op()).finish();
        Ok(CheckResult::new("poincare_lattice", lhs, rhs, tol, digest)
            .observe("phi_lipschitz_squared", l.value * l.value))
    }

    /// `W1(ρ, σ)² <= (|Λ|/2) S(ρ‖σ)` for a product `σ`.
    pub fn check_marton(
        &self,
        rho: &DensityMatrix,
        sigma: &ProductState,
        cert: &TransportCertificate,
    ) -> Result<CheckResult> {
        same_region(rho.region(), sigma.region(), "Marton")?;
        same_region(rho.region(), cert_region(cert), "Marton certificate")?;
        let s = sigma.to_density();
        let n = rho.region().len() as f64;
        let lhs = cert.primal_value * cert.primal_value;
        let rhs = 0.5 * n * rho.rel_entropy(&s)?;
        let tol = self.tolerance(lhs);
        Ok(CheckResult::new("marton", lhs, rhs, tol, digest_states("marton", &[rho, &s]))
            .observe("lhs_from_dual", cert.dual_value * cert.dual_value))
    }

    /// `W1(ρ, σ^{⊗k})² <= 2k|Λ|² S(ρ‖σ^{⊗k})`. The copies of `Λ` are
    /// consecutive blocks of the canonical site list of `ρ`.
    pub fn check_marton_k(
        &self,
        rho_k: &DensityMatrix,
        sigma: &DensityMatrix,
        k: usize,
        cert: &TransportCertificate,
    ) -> Result<CheckResult> {
        let sigma_k = tensor_power_onto(sigma, k, rho_k.region())?;
        same_region(rho_k.region(), cert_region(cert), "k-fold Marton certificate")?;
        let n = sigma.region().len() as f64;
        let lhs = cert.primal_value * cert.primal_value;
        let rhs = 2.0 * k as f64 * n * n * rho_k.rel_entropy(&sigma_k)?;
        let tol = self.tolerance(lhs);
        Ok(CheckResult::new("marton_k", lhs, rhs, tol, digest_states("marton_k", &[rho_k, sigma]))
            .observe("k", k as f64)
            .observe("lhs_from_dual", cert.dual_value * cert.dual_value))
    }

    /// `½‖Δ‖₁ <= W1 <= (|Λ|/2)‖Δ‖₁`; the reported sides are the tighter of the two.
    pub fn check_w1_sandwich(&self, cert: &TransportCertificate, delta: &HermitianOperator) -> Result<CheckResult> {
        same_region(delta.region(), cert_region(cert), "sandwich")?;
        let t = delta.trace_norm();
        let n = delta.region().len() as f64;
        let low = 0.5 * t;
        let high = 0.5 * n * t;
        let lower_slack = cert.dual_value - low;
        let upper_slack = high - cert.primal_value;
        let (lhs, rhs) = if lower_slack <= upper_slack {
            (low, cert.dual_value)
        } else {
            (cert.primal_value, high)
        };
        let tol = self.tolerance(high);
        let digest = InputDigest::new().label("sandwich").operator(delta).finish();
        Ok(CheckResult::new("w1_sandwich", lhs, rhs, tol, digest)
            .observe("lower_slack", lower_slack)
            .observe("upper_slack", upper_slack))
    }

    /// `W1 <= (q²-1)/q² |Λ'| ‖Δ‖₁` when `Tr_{Λ'} Δ = 0`.
    pub fn check_local_bound(
        &self,
        cert: &TransportCertificate,
        delta: &HermitianOperator,
        sub: &Region,
    ) -> Result<CheckResult> {
        same_region(delta.region(), cert_region(cert), "local bound")?;
        if !sub.is_subset_of(delta.region()) || sub.is_empty() {
            return Err(Error::RegionMismatch("local-bound subregion is not a nonempty subset".into()));
        }
        let rest = delta.region().difference(sub);
        let residual = if rest.is_empty() {
            delta.trace().abs()
        } else {
            delta.partial_trace(&rest)?.matrix().max_abs()
        };
        if residual > 1e-10 * delta.trace_norm().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "partial trace over the subregion is not zero (max entry {residual:e})"
            )));
        }
        let q = delta.region().q() as f64;
        let rhs = (q * q - 1.0) / (q * q) * sub.len() as f64 * delta.trace_norm();
        let lhs = cert.primal_value;
        let tol = self.tolerance(rhs);
        let digest = InputDigest::new().label("local_bound").operator(delta).finish();
        Ok(CheckResult::new("local_bound", lhs, rhs, tol, digest).observe("subregion_size", sub.len() as f64))
    }

    /// `W1(joint) >= Σ W1(marginals)` for marginals on disjoint subregions.
    pub fn check_superadditivity(
        &self,
        joint: &TransportCertificate,
        marginals: &[&TransportCertificate],
    ) -> Result<CheckResult> {
        let mut seen = Region::empty(cert_region(joint).q());
        for m in marginals {
            let r = cert_region(m);
            if !r.is_subset_of(cert_region(joint)) || !r.is_disjoint(&seen) {
                return Err(Error::RegionMismatch(
                    "marginal certificates must live on disjoint subregions of the joint region".into(),
                ));
            }
            seen = seen.union(r)?;
        }
        let lhs: f64 = marginals.iter().map(|m| m.primal_value).sum();
        let rhs = joint.dual_value;
        let tol = self.tolerance(rhs);
        let digest = marginals
            .iter()
            .fold(InputDigest::new().label("superadditivity").operator(&joint.dual_witness), |d, m| {
                d.f64s(&[m.primal_value, m.dual_value])
            })
            .f64s(&[joint.primal_value, joint.dual_value])
            .finish();
        Ok(CheckResult::new("superadditivity", lhs, rhs, tol, digest)
            .observe("joint_primal", joint.primal_value)
            .observe("additivity_defect", joint.primal_value - lhs))
    }

    /// `W1(ρ, τ) <= W1(ρ, σ) + W1(σ, τ)`.
    pub fn check_triangle(
        &self,
        rho_tau: &TransportCertificate,
        rho_sigma: &TransportCertificate,
        sigma_tau: &TransportCertificate,
    ) -> Result<CheckResult> {
        let r = cert_region(rho_tau);
        same_region(r, cert_region(rho_sigma), "triangle")?;
        same_region(r, cert_region(sigma_tau), "triangle")?;
        let lhs = rho_tau.dual_value;
        let rhs = rho_sigma.primal_value + sigma_tau.primal_value;
        let tol = self.tolerance(rhs);
        let digest = InputDigest::new()
            .label("triangle")
            .f64s(&[
                rho_tau.primal_value,
                rho_tau.dual_value,
                rho_sigma.primal_value,
                rho_sigma.dual_value,
                sigma_tau.primal_value,
                sigma_tau.dual_value,
            ])
            .finish();
        Ok(CheckResult::new("triangle", lhs, rhs, tol, digest))
    }

    /// `ln Tr e^{-H_Λ}/|Λ| <= ln q + ‖Φ‖_L²/2 - ω(E_Φ)`, a finite-volume proxy for
    /// the infinite-volume pressure bound.
    pub fn check_pressure_bound(&self, phi: &Interaction, region: &Region) -> Result<CheckResult> {
        let lhs = lattice::pressure(phi, region)?;
        let l = lattice::phi_lipschitz(phi, &self.cfg)?;
        let l_low = l.lower.max(0.0);
        let energy = phi.uniform_energy_density();
        let rhs = (phi.q() as f64).ln() + 0.5 * l_low * l_low - energy;
        let tol = self.tolerance(rhs);
        let digest = phi
            .terms()
            .iter()
            .fold(InputDigest::new().label("pressure_bound"), |d, t| d.operator(t))
            .f64s(&[region.len() as f64])
            .finish();
        Ok(CheckResult::new("pressure_bound", lhs, rhs, tol, digest)
            .observe("phi_lipschitz_upper", l.value)
            .observe("phi_lipschitz_lower", l_low)
            .observe("uniform_energy", energy)
            .observe("volume", region.len() as f64)
            .observe("finite_volume_proxy", 1.0))
    }

    /// Entropy continuity at every volume of two consistent box families;
    /// the result carries the smallest slack.
    pub fn check_specific_entropy_continuity(
        &self,
        rho: &[DensityMatrix],
        sigma: &[DensityMatrix],
        certs: &[TransportCertificate],
    ) -> Result<CheckResult> {
        if rho.len() != sigma.len() || rho.len() != certs.len() {
            return Err(Error::InvalidInput("families and certificates differ in length".into()));
        }
        lattice::check_family("rho", rho)?;
        lattice::check_family("sigma", sigma)?;
        let mut worst: Option<(usize, CheckResult)> = None;
        for (k, ((r, s), c)) in rho.iter().zip(sigma).zip(certs).enumerate() {
            let res = self.check_entropy_continuity(r, s, c)?;
            if worst.as_ref().map_or(true, |(_, w)| res.slack < w.slack) {
                worst = Some((k, res));
            }
        }
        let digest = digest_states(
            "specific_entropy_continuity",
            &rho.iter().chain(sigma).collect::<Vec<_>>(),
        );
        match worst {
            None => Ok(CheckResult::new("specific_entropy_continuity", 0.0, 0.0, self.tolerance(0.0), digest)),
            Some((k, w)) => {
                let mut out = CheckResult::new("specific_entropy_continuity", w.lhs, w.rhs, w.tolerance_used, digest);
                out.observations = vec![
                    ("worst_volume_index".into(), (k + 1) as f64),
                    ("volumes".into(), rho.len() as f64),
                    ("consistency_verified".into(), 1.0),
                    ("translation_invariance_assumed".into(), 1.0),
                ];
                Ok(out)
            }
        }
    }

    /// `S(ρ‖ω^Φ_Λ)/|Λ| <= φ_q(w) + 2 w ‖Φ‖_0` with `w = W1(ρ, ω^Φ_Λ)/|Λ|`.
    pub fn check_w1_gibbs_entropy(
        &self,
        rho: &DensityMatrix,
        phi: &Interaction,
        cert: &TransportCertificate,
    ) -> Result<CheckResult> {
        same_region(rho.region(), cert_region(cert), "w1-Gibbs certificate")?;
        let omega = lattice::gibbs_local(phi, rho.region())?;
        let n = rho.region().len() as f64;
        let q = rho.region().q();
        let lhs = rho.rel_entropy(&omega)? / n;
        let r0 = phi.phi_r_norm(0.0);
        let w = cert.primal_value / n;
        let rhs = continuity_rhs(w, q) + 2.0 * w * r0;
        let wd = cert.dual_value / n;
        let rhs_dual = continuity_rhs(wd, q) + 2.0 * wd * r0;
        let tol = self.tolerance(rhs);
        Ok(CheckResult::new("w1_gibbs_entropy", lhs, rhs, tol, digest_states("w1_gibbs_entropy", &[rho, &omega]))
            .observe("w_per_site", w)
            .observe("phi_r0", r0)
            .observe("rhs_from_dual", rhs_dual))
    }

    /// `∂_x H^Φ_Λ <= 2‖Φ‖_0` at every site of `region`; reports the largest dependence.
    pub fn check_lipschitz_r_norm(&self, phi: &Interaction, region: &Region) -> Result<CheckResult> {
        let mut lhs: f64 = 0.0;
        for x in region.sites() {
            lhs = lhs.max(lattice::site_dependence(phi, region, x, &self.cfg)?.value);
        }
        let rhs = 2.0 * phi.phi_r_norm(0.0);
        let tol = self.tolerance(rhs);
        let digest = phi
            .terms()
            .iter()
            .fold(InputDigest::new().label("lipschitz_r_norm"), |d, t| d.operator(t))
            .f64s(&[region.len() as f64])
            .finish();
        Ok(CheckResult::new("lipschitz_r_norm", lhs, rhs, tol, digest))
    }
}

/// `σ^{⊗k}` placed on consecutive blocks of the canonical site list of `target`.
pub fn tensor_power_onto(sigma: &DensityMatrix, k: usize, target: &Region) -> Result<DensityMatrix> {
    let block = sigma.region().len();
    if k == 0 || target.len() != k * block || target.q() != sigma.region().q() {
        return Err(Error::RegionMismatch(format!(
            "target of {} sites cannot hold {k} copies of {block} sites",
            target.len()
        )));
    }
    let mut acc: Option<DensityMatrix> = None;
    for c in 0..k {
        let sites = target.sites()[c * block..(c + 1) * block].to_vec();
        let copy = sigma.relabel(&Region::new(sites, target.q())?)?;
        acc = Some(match acc {
            None => copy,
            Some(a) => a.tensor(&copy)?,
        });
    }
    Ok(acc.expect("k >= 1"))
}
