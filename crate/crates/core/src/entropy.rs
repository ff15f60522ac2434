//! Scalar entropy functions (natural logarithms throughout).

#[allow(unused_imports)]
use num_traits::Float;

/// `-Σ p ln p` with `0 ln 0 = 0`.
pub fn shannon(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Binary entropy `-t ln t - (1-t) ln(1-t)` on `[0, 1]`.
pub fn h2(t: f64) -> f64 {
    let xlx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
    -xlx(t) - xlx(1.0 - t)
}

/// `g(t) = (t+1) ln(t+1) - t ln t` for `t >= 0`.
pub fn g(t: f64) -> f64 {
    let tlt = if t <= 0.0 { 0.0 } else { t * t.ln() };
    (t + 1.0) * (t + 1.0).ln() - tlt
}

/// `φ_q(t) = h2(t) + t ln(q^2 - 1)`; increasing on `[0, 1 - 1/q^2]`.
pub fn phi_q(t: f64, q: usize) -> f64 {
    let q2 = (q * q) as f64;
    h2(t) + t * (q2 - 1.0).ln()
}

/// Upper end of the increasing branch of [`phi_q`].
pub fn phi_monotone_end(q: usize) -> f64 {
    1.0 - 1.0 / (q * q) as f64
}

/// Entropy-per-site bound evaluated at an upper bound `w_ub` of the W1
/// distance per site: `φ_q(w_ub)` on the increasing branch, otherwise `ln q`,
/// which already dominates any entropy difference per site.
pub fn continuity_rhs(w_ub: f64, q: usize) -> f64 {
    if w_ub <= phi_monotone_end(q) {
        phi_q(w_ub.max(0.0), q)
    } else {
        (q as f64).ln()
    }
}
