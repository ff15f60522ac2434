use alloc::format;
use alloc::vec::Vec;


use super::spectral::{op_norm, prox_op_norm, trace_norm};
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::matrix::{eigvalsh, Matrix, SiteAverager};
use crate::operator::HermitianOperator;
use crate::region::Site;

const CHECK_EVERY: usize = 10;

/// Certified bracket for `∂_x H`.
#[derive(Clone, Debug)]
pub struct PartialDependence {
    pub site: Site,
    /// Upper bound, attained by `witness`: `2‖H - witness ⊗ I_x‖_∞ = value`.
    pub value: f64,
    /// Lower bound from a dual point `Y` with `Tr_x Y = 0`, `‖Y‖_1 <= 1`.
    pub lower: f64,
    /// Operator on the region without `x`.
    pub witness: HermitianOperator,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct RawDependence {
    pub upper: f64,
    pub lower: f64,
    /// Best approximant, already lifted to the full register.
    pub approximant: Matrix,
    pub iterations: usize,
    pub converged: bool,
}

fn spectral_width(m: &Matrix) -> (f64, f64) {
    let ev = eigvalsh(m);
    (ev[0], ev[ev.len() - 1])
}

/// ADMM for `min_K ‖G - K‖_∞` over `K` in the range of the site average.
///
/// `hints` are extra candidate approximants (lifted to the full register).
pub(crate) fn dependence_raw(
    h: &Matrix,
    avg: &SiteAverager,
    single_site: bool,
    cfg: &SolverConfig,
    hints: &[Matrix],
) -> RawDependence {
    let n = h.dim();
    let e_h = avg.average(h);
    let g = h.sub(&e_h);
    let s = op_norm(&g);
    if s <= 1e-300 {
        return RawDependence {
            upper: 0.0,
            lower: 0.0,
            approximant: e_h,
            iterations: 0,
            converged: true,
        };
    }
    let (lo, hi) = spectral_width(h);
    if single_site {
        // A is a multiple of the identity; the midpoint of the spectrum is optimal.
        let mut a = Matrix::identity(n);
        a.scale_mut(0.5 * (lo + hi));
        return RawDependence {
            upper: hi - lo,
            lower: hi - lo,
            approximant: a,
            iterations: 0,
            converged: true,
        };
    }

    // Candidates expressed as K = (A - E h)/s in the normalized problem.
    let gn = g.scale(1.0 / s);
    let mut best_upper = 1.0; // A = E h
    let mut best_k = Matrix::zeros(n);
    let consider = |a: &Matrix, best_upper: &mut f64, best_k: &mut Matrix| {
        let k = a.sub(&e_h).scale(1.0 / s);
        let v = op_norm(&gn.sub(&k));
        if v < *best_upper {
            *best_upper = v;
            *best_k = k;
        }
    };
    let mut mid = Matrix::identity(n);
    mid.scale_mut(0.5 * (lo + hi));
    consider(&mid, &mut best_upper, &mut best_k);
    for a in hints {
        consider(a, &mut best_upper, &mut best_k);
    }
    let mut best_lower = 0.0f64;

    let mut rho = cfg.admm_rho;
    let mut k = best_k.clone();
    let mut u = Matrix::zeros(n);
    let mut iterations = 0;
    let mut converged = false;
    let done = |upper: f64, lower: f64| (upper - lower) * s <= cfg.tol_gap * (upper * s).max(1.0);
    if done(best_upper, best_lower) {
        converged = true;
    }
    while !converged && iterations < cfg.max_iter {
        iterations += 1;
        let v = gn.sub(&k).sub(&u);
        let w = prox_op_norm(&v, 1.0 / rho);
        let k_new = avg.average(&gn.sub(&w).sub(&u));
        let resid = w.add(&k_new).sub(&gn);
        u = u.add(&resid);
        let r_prim = resid.frobenius();
        let r_dual = rho * k_new.sub(&k).frobenius();
        k = k_new;

        if iterations % CHECK_EVERY == 0 || iterations == cfg.max_iter {
            let upper = op_norm(&gn.sub(&k));
            if upper < best_upper {
                best_upper = upper;
                best_k = k.clone();
            }
            let y = avg.complement(&u);
            let tn = trace_norm(&y);
            if tn > 0.0 {
                let lower = gn.inner(&y).abs() / tn;
                best_lower = best_lower.max(lower);
            }
            if done(best_upper, best_lower) {
                converged = true;
            }
        }
        if cfg.adapt && iterations % CHECK_EVERY == 0 {
            if r_prim > 10.0 * r_dual {
                rho *= 2.0;
                u.scale_mut(0.5);
            } else if r_dual > 10.0 * r_prim {
                rho *= 0.5;
                u.scale_mut(2.0);
            }
        }
    }
    let mut approximant = e_h;
    approximant.axpy(s, &best_k);
    RawDependence {
        upper: 2.0 * s * best_upper,
        lower: (2.0 * s * best_lower).min(2.0 * s * best_upper),
        approximant,
        iterations,
        converged,
    }
}

/// `∂_x H = 2 min_{A on Λ∖x} ‖H - A ⊗ I_x‖_∞` with a certified bracket.
pub fn partial_dependence(
    h: &HermitianOperator,
    x: &Site,
    cfg: &SolverConfig,
) -> Result<PartialDependence> {
    cfg.validate()?;
    let region = h.region();
    let pos = region
        .position(x)
        .ok_or_else(|| Error::RegionMismatch(format!("site {x:?} not in region")))?;
    let avg = SiteAverager::new(region.q(), region.len(), pos);
    let raw = dependence_raw(h.matrix(), &avg, region.len() == 1, cfg, &[]);
    let q = region.q() as f64;
    let reduced = avg.trace_out(&raw.approximant).scale(1.0 / q);
    Ok(PartialDependence {
        site: x.clone(),
        value: raw.upper,
        lower: raw.lower,
        witness: HermitianOperator::from_parts(region.without(x), reduced),
        iterations: raw.iterations,
        converged: raw.converged,
    })
}

/// `∂_x H` for every site, in canonical site order.
pub fn lipschitz_profile(h: &HermitianOperator, cfg: &SolverConfig) -> Result<Vec<PartialDependence>> {
    h.region()
        .sites()
        .iter()
        .map(|x| partial_dependence(h, x, cfg))
        .collect()
}

/// `‖H‖_L = max_x ∂_x H` (certified upper bound).
pub fn lipschitz_constant(h: &HermitianOperator, cfg: &SolverConfig) -> Result<f64> {
    Ok(lipschitz_profile(h, cfg)?
        .iter()
        .map(|p| p.value)
        .fold(0.0, f64::max))
}
