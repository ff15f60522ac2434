use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::partial::dependence_raw;
use super::spectral::{op_norm, soft_threshold, trace_norm};
use super::{SolverConfig, TransportCertificate};
use crate::error::{Error, Result};
use crate::matrix::{eigh, Matrix, SiteAverager};
use crate::operator::{DensityMatrix, HermitianOperator};
use crate::region::Region;

const CHECK_EVERY: usize = 10;
const TRACE_TOL: f64 = 1e-10;

/// Projection onto the affine set `{Z : Tr_x Z_x = 0, Σ_x Z_x = Δ}`.
struct Constraint<'a> {
    avgs: &'a [SiteAverager],
    delta: &'a Matrix,
}

impl Constraint<'_> {
    fn traceless_on(&self, x: usize, m: &Matrix) -> Matrix {
        self.avgs[x].complement(m)
    }

    /// `S(M) = Σ_x P_x(M)`. On traceless operators its spectrum is `{1, ..., n}`.
    fn normal_op(&self, m: &Matrix) -> Matrix {
        let mut out = m.scale(self.avgs.len() as f64);
        for a in self.avgs {
            out = out.sub(&a.average(m));
        }
        out
    }

    /// Conjugate gradients on `S(M) = b`; exact after at most `n` steps.
    fn solve_normal(&self, b: &Matrix) -> Matrix {
        let mut x = Matrix::zeros(b.dim());
        let mut r = b.clone();
        let mut p = r.clone();
        let mut rr = r.inner(&r);
        let stop = 1e-30 * rr.max(1e-300);
        for _ in 0..self.avgs.len() + 4 {
            if rr <= stop {
                break;
            }
            let sp = self.normal_op(&p);
            let alpha = rr / p.inner(&sp);
            x.axpy(alpha, &p);
            r.axpy(-alpha, &sp);
            let rr_new = r.inner(&r);
            let beta = rr_new / rr;
            rr = rr_new;
            let mut next = r.clone();
            next.axpy(beta, &p);
            p = next;
        }
        x
    }

    /// Returns the projected pieces and the multiplier `M` of the sum constraint.
    fn project(&self, y: &[Matrix]) -> (Vec<Matrix>, Matrix) {
        let mut b = self.delta.clone();
        for (x, yx) in y.iter().enumerate() {
            b = b.sub(&self.traceless_on(x, yx));
        }
        let m = self.solve_normal(&b);
        let z = y
            .iter()
            .enumerate()
            .map(|(x, yx)| self.traceless_on(x, &yx.add(&m)))
            .collect();
        (z, m)
    }
}

fn half_sum_trace_norms(z: &[Matrix]) -> f64 {
    0.5 * z.iter().map(trace_norm).sum::<f64>()
}

/// Quantum W1 norm `½ min Σ_x ‖Δ^(x)‖_1` over decompositions with `Tr_x Δ^(x) = 0`.
///
/// Returns a certificate even when `max_iter` is exhausted; check
/// [`TransportCertificate::converged`].
pub fn w1_norm(delta: &HermitianOperator, cfg: &SolverConfig) -> Result<TransportCertificate> {
    cfg.validate()?;
    let region = delta.region();
    if region.is_empty() {
        return Err(Error::InvalidInput("W1 norm needs at least one site".into()));
    }
    let scale = delta.trace_norm();
    let tr = delta.trace();
    if tr.abs() > TRACE_TOL * scale.max(1.0) {
        return Err(Error::NotTraceless { trace: tr });
    }
    let delta = delta.traceless_part();
    let n = region.len();

    if scale <= 1e-300 {
        return Ok(zero_certificate(region));
    }
    if n == 1 {
        return Ok(single_site(&delta, scale));
    }

    let avgs: Vec<SiteAverager> = (0..n)
        .map(|p| SiteAverager::new(region.q(), n, p))
        .collect();
    // Solve for Δ normalized to trace norm 2 and rescale at the end.
    let unit = 0.5 * scale;
    let dn = delta.matrix().scale(1.0 / unit);
    let cons = Constraint {
        avgs: &avgs,
        delta: &dn,
    };
    let dim = dn.dim();

    let (mut z, _) = cons.project(&alloc::vec![Matrix::zeros(dim); n]);
    let mut u = alloc::vec![Matrix::zeros(dim); n];
    let mut rho = cfg.admm_rho;

    let mut best_primal = half_sum_trace_norms(&z);
    let mut best_z = z.clone();
    let mut best_dual = 0.0f64;
    let mut best_h = Matrix::zeros(dim);
    let mut best_lip = 1.0f64;
    let done = |p: f64, d: f64| p - d <= cfg.tol_gap * p.max(1.0);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let tau = 0.5 / rho;
        let y: Vec<Matrix> = z
            .iter()
            .zip(&u)
            .map(|(zx, ux)| soft_threshold(&zx.sub(ux), tau).add(ux))
            .collect();
        let (z_new, m) = cons.project(&y);
        let mut r_prim = 0.0f64;
        let mut r_dual = 0.0f64;
        for x in 0..n {
            let ux = y[x].sub(&z_new[x]);
            // d_x - z_x = y_x - u_x_old - z_x
            r_prim += ux.sub(&u[x]).frobenius().powi(2);
            r_dual += z_new[x].sub(&z[x]).frobenius().powi(2);
            u[x] = ux;
        }
        let r_prim = r_prim.sqrt();
        let r_dual = rho * r_dual.sqrt();
        z = z_new;

        if iterations % CHECK_EVERY == 0 || iterations == cfg.max_iter {
            let primal = half_sum_trace_norms(&z);
            if primal < best_primal {
                best_primal = primal;
                best_z = z.clone();
            }
            // Multiplier of the sum constraint: P_x(ρM) = -ρ P_x(U_x), so
            // ∂_x(ρM) <= 2ρ‖U_x‖_∞ and also <= 2‖P_x(ρM)‖_∞.
            let h = m.scale(rho);
            let lip = (0..n)
                .map(|x| {
                    let a = 2.0 * rho * op_norm(&u[x]);
                    let b = 2.0 * op_norm(&cons.traceless_on(x, &h));
                    a.min(b)
                })
                .fold(0.0, f64::max);
            if lip > 0.0 {
                let dual = dn.inner(&h) / lip;
                if dual > best_dual {
                    best_dual = dual;
                    best_h = h;
                    best_lip = lip;
                }
            }
            if done(best_primal, best_dual) {
                converged = true;
                break;
            }
        }
        if cfg.adapt && iterations % CHECK_EVERY == 0 {
            if r_prim > 10.0 * r_dual {
                rho *= 2.0;
                u.iter_mut().for_each(|ux| ux.scale_mut(0.5));
            } else if r_dual > 10.0 * r_prim {
                rho *= 0.5;
                u.iter_mut().for_each(|ux| ux.scale_mut(2.0));
            }
        }
    }

    if !converged && best_dual > 0.0 {
        // Tighten the witness normalization with the dependence solver.
        let refined = (0..n)
            .map(|x| {
                dependence_raw(&best_h, &avgs[x], false, cfg, &[]).upper
            })
            .fold(0.0, f64::max);
        if refined > 0.0 && refined < best_lip {
            best_dual *= best_lip / refined;
            best_lip = refined;
        }
        converged = done(best_primal, best_dual);
    }

    let mut witness = best_h.scale(1.0 / best_lip);
    witness.symmetrize();
    let witness = HermitianOperator::from_parts(region.clone(), witness);
    let decomposition = region
        .sites()
        .iter()
        .cloned()
        .zip(best_z.iter().map(|zx| HermitianOperator::from_parts(region.clone(), zx.scale(unit))))
        .collect();
    let primal_value = best_primal * unit;
    let dual_value = (best_dual * unit).min(primal_value);
    Ok(TransportCertificate {
        primal_value,
        dual_value,
        gap: primal_value - dual_value,
        iterations,
        converged,
        decomposition,
        dual_witness: witness,
        witness_lipschitz: 1.0,
    })
}

fn zero_certificate(region: &Region) -> TransportCertificate {
    TransportCertificate {
        primal_value: 0.0,
        dual_value: 0.0,
        gap: 0.0,
        iterations: 0,
        converged: true,
        decomposition: region
            .sites()
            .iter()
            .map(|s| (s.clone(), HermitianOperator::zeros(region)))
            .collect(),
        dual_witness: HermitianOperator::zeros(region),
        witness_lipschitz: 0.0,
    }
}

/// One site: the norm is `‖Δ‖_1 / 2`, witnessed by the positive spectral projector.
fn single_site(delta: &HermitianOperator, scale: f64) -> TransportCertificate {
    let region = delta.region();
    let (vals, vecs) = eigh(delta.matrix());
    let proj: Vec<f64> = vals.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
    let witness = HermitianOperator::from_parts(region.clone(), Matrix::from_spectrum(&proj, &vecs));
    let value = 0.5 * scale;
    let dual = delta.pairing(&witness).unwrap_or(value).min(value);
    TransportCertificate {
        primal_value: value,
        dual_value: dual,
        gap: value - dual,
        iterations: 0,
        converged: true,
        decomposition: alloc::vec![(region.sites()[0].clone(), delta.clone())],
        dual_witness: witness,
        witness_lipschitz: 1.0,
    }
}

/// `W1(ρ, σ) = ‖ρ - σ‖_W1`.
pub fn w1_distance(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    cfg: &SolverConfig,
) -> Result<TransportCertificate> {
    w1_norm(&rho.difference(sigma)?, cfg)
}

/// `Tr[Δ H] / max(1, ‖H‖_L)`: a lower bound on `‖Δ‖_W1` for any `H`.
pub fn dual_pair_value(
    delta: &HermitianOperator,
    h: &HermitianOperator,
    cfg: &SolverConfig,
) -> Result<f64> {
    let tr = delta.trace();
    if tr.abs() > TRACE_TOL * delta.trace_norm().max(1.0) {
        return Err(Error::NotTraceless { trace: tr });
    }
    let pairing = delta.pairing(h)?;
    let lip = super::lipschitz_constant(h, cfg)?;
    Ok(pairing / lip.max(1.0))
}
