//! Seeded sampling of states and Hamiltonians.
//!
//! Every sampler draws from a `ChaCha8Rng` seeded with the [`RandomSpec`] 64-bit
//! seed, so an identical [`RandomSpec`] always yields an identical sample.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::Result;
use crate::matrix::{Matrix, C64};
use crate::operator::{DensityMatrix, HermitianOperator, ProductState};
use crate::region::Region;

/// Generator used by every seeded sampler.
pub type SeededRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ensemble {
    HaarPure,
    HsMixed,
    DiagDirichlet,
    GueHamiltonian,
}

impl Ensemble {
    pub fn name(self) -> &'static str {
        match self {
            Ensemble::HaarPure => "haar_pure",
            Ensemble::HsMixed => "hs_mixed",
            Ensemble::DiagDirichlet => "diag_dirichlet",
            Ensemble::GueHamiltonian => "gue_hamiltonian",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "haar_pure" => Some(Ensemble::HaarPure),
            "hs_mixed" => Some(Ensemble::HsMixed),
            "diag_dirichlet" => Some(Ensemble::DiagDirichlet),
            "gue_hamiltonian" => Some(Ensemble::GueHamiltonian),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomSpec {
    pub seed: u64,
    pub ensemble: Ensemble,
    pub region: Region,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sample {
    State(DensityMatrix),
    Hamiltonian(HermitianOperator),
}

impl Sample {
    pub fn into_state(self) -> Option<DensityMatrix> {
        match self {
            Sample::State(s) => Some(s),
            Sample::Hamiltonian(_) => None,
        }
    }

    pub fn into_hamiltonian(self) -> Option<HermitianOperator> {
        match self {
            Sample::Hamiltonian(h) => Some(h),
            Sample::State(_) => None,
        }
    }
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sample(spec: &RandomSpec) -> Result<Sample> {
    let mut rng = rng_from_seed(spec.seed);
    let r = &spec.region;
    Ok(match spec.ensemble {
        Ensemble::HaarPure => Sample::State(haar_pure(&mut rng, r)?),
        Ensemble::HsMixed => Sample::State(hs_mixed(&mut rng, r)),
        Ensemble::DiagDirichlet => Sample::State(diag_dirichlet(&mut rng, r)?),
        Ensemble::GueHamiltonian => Sample::Hamiltonian(gue_hamiltonian(&mut rng, r)),
    })
}

fn gaussian_c64<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

fn ginibre<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    Matrix::from_fn(n, |_, _| gaussian_c64(rng))
}

/// Uniformly distributed pure state.
pub fn haar_pure<R: Rng>(rng: &mut R, region: &Region) -> Result<DensityMatrix> {
    let psi: Vec<C64> = (0..region.dim()).map(|_| gaussian_c64(rng)).collect();
    DensityMatrix::pure(region, &psi)
}

/// Hilbert-Schmidt measure: `G G† / Tr[G G†]` with Ginibre `G`.
pub fn hs_mixed<R: Rng>(rng: &mut R, region: &Region) -> DensityMatrix {
    let g = ginibre(rng, region.dim());
    let w = g.mul(&g.adjoint());
    let tr = w.trace().re;
    let op = HermitianOperator::from_parts(region.clone(), w.scale(1.0 / tr));
    DensityMatrix::from_op_unchecked(op)
}

/// Diagonal state with Dirichlet(1, ..., 1) weights.
pub fn diag_dirichlet<R: Rng>(rng: &mut R, region: &Region) -> Result<DensityMatrix> {
    let probs = dirichlet(rng, region.dim());
    DensityMatrix::diagonal(region, &probs)
}

pub fn dirichlet<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    p
}

/// GUE sample rescaled to unit operator norm.
pub fn gue_hamiltonian<R: Rng>(rng: &mut R, region: &Region) -> HermitianOperator {
    let g = ginibre(rng, region.dim());
    let mut h = g.add(&g.adjoint()).scale(0.5);
    h.symmetrize();
    let op = HermitianOperator::from_parts(region.clone(), h);
    let norm = op.op_norm();
    if norm > 0.0 {
        op.scale(1.0 / norm)
    } else {
        op
    }
}

/// Random traceless operator with unit trace norm.
pub fn traceless<R: Rng>(rng: &mut R, region: &Region) -> HermitianOperator {
    let d = gue_hamiltonian(rng, region).traceless_part();
    let n = d.trace_norm();
    if n > 0.0 {
        d.scale(1.0 / n)
    } else {
        d
    }
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn haar_unitary<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let g = ginibre(rng, n);
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| (0..n).map(|i| g[(i, j)]).collect()).collect();
    for j in 0..n {
        for k in 0..j {
            let proj: C64 = (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..n {
                let v = cols[k][i];
                cols[j][i] -= proj * v;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|z| *z /= norm);
    }
    Matrix::from_fn(n, |i, j| cols[j][i])
}

/// Product of independent full-rank single-site states, each mixed with the
/// maximally mixed state so that eigenvalues stay at least `floor / q`.
pub fn full_rank_product<R: Rng>(rng: &mut R, region: &Region, floor: f64) -> Result<ProductState> {
    let mut factors = Vec::with_capacity(region.len());
    for s in region.sites() {
        let single = region.single(s);
        let base = hs_mixed(rng, &single);
        let mixed = base
            .op()
            .scale(1.0 - floor)
            .add(&HermitianOperator::identity(&single).scale(floor / single.dim() as f64))?;
        factors.push(DensityMatrix::new(mixed)?);
    }
    ProductState::new(factors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(seed: u64, ensemble: Ensemble, n: usize) -> RandomSpec {
        RandomSpec {
            seed,
            ensemble,
            region: Region::chain(0, n, 2).unwrap(),
        }
    }

    #[test]
    fn same_seed_same_sample() {
        for e in [
            Ensemble::HaarPure,
            Ensemble::HsMixed,
            Ensemble::DiagDirichlet,
            Ensemble::GueHamiltonian,
        ] {
            assert_eq!(sample(&spec(7, e, 2)).unwrap(), sample(&spec(7, e, 2)).unwrap());
            assert_ne!(sample(&spec(7, e, 2)).unwrap(), sample(&spec(8, e, 2)).unwrap());
        }
    }

    #[test]
    fn dirichlet_normalized() {
        let s = sample(&spec(3, Ensemble::DiagDirichlet, 3)).unwrap().into_state().unwrap();
        assert!((s.op().trace() - 1.0).abs() < 1e-14);
        assert!(s.matrix().is_diagonal());
    }

    #[test]
    fn gue_unit_norm() {
        let h = sample(&spec(5, Ensemble::GueHamiltonian, 2)).unwrap().into_hamiltonian().unwrap();
        assert!((h.op_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_states_are_pure() {
        let s = sample(&spec(11, Ensemble::HaarPure, 2)).unwrap().into_state().unwrap();
        assert!(s.entropy().unwrap() < 1e-9);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = haar_unitary(&mut rng_from_seed(1), 3);
        let p = u.mul(&u.adjoint());
        assert!(p.sub(&Matrix::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for e in [Ensemble::HaarPure, Ensemble::GueHamiltonian] {
            assert_eq!(Ensemble::from_name(e.name()), Some(e));
        }
        assert_eq!(Ensemble::from_name("nope"), None);
    }
}
