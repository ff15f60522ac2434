//! Spectral proximal operators.

use alloc::vec::Vec;

use crate::matrix::{eigh, eigvalsh, Matrix};

/// Eigenvalue soft-thresholding: the proximal map of `tau ‖·‖_1`.
pub(crate) fn soft_threshold(m: &Matrix, tau: f64) -> Matrix {
    m.spectral_map(|v| {
        if v > tau {
            v - tau
        } else if v < -tau {
            v + tau
        } else {
            0.0
        }
    })
}

/// Proximal map of `lambda ‖·‖_∞`: clips the spectrum at the level `t` with
/// `Σ max(|v_i| - t, 0) = lambda` (Moreau identity with the trace-norm ball).
pub(crate) fn prox_op_norm(m: &Matrix, lambda: f64) -> Matrix {
    let (vals, vecs) = if m.is_diagonal() {
        (Vec::new(), None)
    } else {
        let (v, u) = eigh(m);
        (v, Some(u))
    };
    let vals = match vecs {
        Some(_) => vals,
        None => m.diag().iter().map(|z| z.re).collect(),
    };
    let t = clip_level(&vals, lambda);
    let clipped: Vec<f64> = vals.iter().map(|v| v.clamp(-t, t)).collect();
    match vecs {
        Some(u) => Matrix::from_spectrum(&clipped, &u),
        None => Matrix::from_diag(&clipped),
    }
}

/// Level `t >= 0` with `Σ max(|v_i| - t, 0) = lambda`, or 0 if `Σ|v_i| <= lambda`.
fn clip_level(vals: &[f64], lambda: f64) -> f64 {
    let mut a: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    let total: f64 = a.iter().sum();
    if total <= lambda {
        return 0.0;
    }
    let mut cum = 0.0;
    for (k, &v) in a.iter().enumerate() {
        cum += v;
        let t = (cum - lambda) / (k + 1) as f64;
        let next = a.get(k + 1).copied().unwrap_or(0.0);
        if t >= next {
            return t.max(0.0);
        }
    }
    0.0
}

pub(crate) fn trace_norm(m: &Matrix) -> f64 {
    eigvalsh(m).iter().map(|v| v.abs()).sum()
}

pub(crate) fn op_norm(m: &Matrix) -> f64 {
    let ev = eigvalsh(m);
    match (ev.first(), ev.last()) {
        (Some(a), Some(b)) => a.abs().max(b.abs()),
        _ => 0.0,
    }
}
