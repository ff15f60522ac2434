//! Self-adjoint operators and density matrices on labeled spin registers.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{eigh, eigvalsh, LegSplit, Matrix, SiteAverager, C64};
use crate::region::{Region, Site};

/// Relative Hermiticity tolerance applied at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues above this (in magnitude) are treated as nonzero in support checks.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Eigenvalues in `[-CLIP_TOL, 0]` are clipped to zero before taking logarithms.
pub const CLIP_TOL: f64 = 1e-10;

pub fn pauli_x() -> Matrix {
    Matrix::from_vec(
        2,
        alloc::vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    )
}

pub fn pauli_y() -> Matrix {
    Matrix::from_vec(
        2,
        alloc::vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
    )
}

pub fn pauli_z() -> Matrix {
    Matrix::from_diag(&[1.0, -1.0])
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl Spectrum {
    pub fn reconstruct(&self) -> Matrix {
        Matrix::from_spectrum(&self.eigenvalues, &self.eigenvectors)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let v: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        Matrix::from_spectrum(&v, &self.eigenvectors)
    }
}

/// A dense self-adjoint operator on the Hilbert space of a [`Region`].
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    region: Region,
    matrix: Matrix,
}

impl HermitianOperator {
    /// Validates dimensions and Hermiticity, then stores the exactly
    /// symmetrized matrix.
    pub fn new(region: Region, mut matrix: Matrix) -> Result<Self> {
        if matrix.dim() != region.dim() {
            return Err(Error::RegionMismatch(format!(
                "matrix dimension {} does not match region dimension {}",
                matrix.dim(),
                region.dim()
            )));
        }
        let scale = matrix.max_abs();
        let dev = matrix.hermitian_deviation();
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation: dev });
        }
        matrix.symmetrize();
        Ok(HermitianOperator { region, matrix })
    }

    /// Internal constructor for matrices Hermitian by construction.
    pub(crate) fn from_parts(region: Region, mut matrix: Matrix) -> Self {
        debug_assert_eq!(matrix.dim(), region.dim());
        matrix.symmetrize();
        HermitianOperator { region, matrix }
    }

    pub fn zeros(region: &Region) -> Self {
        HermitianOperator {
            matrix: Matrix::zeros(region.dim()),
            region: region.clone(),
        }
    }

    pub fn identity(region: &Region) -> Self {
        HermitianOperator {
            matrix: Matrix::identity(region.dim()),
            region: region.clone(),
        }
    }

    pub fn from_diag(region: &Region, diag: &[f64]) -> Result<Self> {
        HermitianOperator::new(region.clone(), Matrix::from_diag(diag))
    }

    /// A single-site operator.
    pub fn on_site(site: Site, q: usize, matrix: Matrix) -> Result<Self> {
        HermitianOperator::new(Region::new(alloc::vec![site], q)?, matrix)
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    fn same_region(&self, other: &HermitianOperator) -> Result<()> {
        if self.region != other.region {
            return Err(Error::RegionMismatch(format!(
                "{:?} vs {:?}",
                self.region.sites(),
                other.region.sites()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<Self> {
        self.same_region(other)?;
        Ok(HermitianOperator {
            region: self.region.clone(),
            matrix: self.matrix.add(&other.matrix),
        })
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<Self> {
        self.same_region(other)?;
        Ok(HermitianOperator {
            region: self.region.clone(),
            matrix: self.matrix.sub(&other.matrix),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianOperator {
            region: self.region.clone(),
            matrix: self.matrix.scale(s),
        }
    }

    /// `Tr[self · other]`.
    pub fn pairing(&self, other: &HermitianOperator) -> Result<f64> {
        self.same_region(other)?;
        Ok(self.matrix.inner(&other.matrix))
    }

    /// Subtracts `Tr[A]/dim · I`.
    pub fn traceless_part(&self) -> Self {
        let mut m = self.matrix.clone();
        m.add_identity(-self.trace() / self.dim() as f64);
        HermitianOperator::from_parts(self.region.clone(), m)
    }

    /// Tensor product on the union of two disjoint regions, with legs
    /// permuted into canonical order.
    pub fn tensor(&self, other: &HermitianOperator) -> Result<Self> {
        if self.region.q() != other.region.q() {
            return Err(Error::RegionMismatch("local dimensions differ".into()));
        }
        if !self.region.is_disjoint(&other.region) {
            return Err(Error::RegionOverlap);
        }
        let joint = self.region.union(&other.region)?;
        let k = self.matrix.kron(&other.matrix);
        // Listed order: sites of `self` then sites of `other`.
        let listed: Vec<&Site> = self.region.sites().iter().chain(other.region.sites()).collect();
        let n = listed.len();
        let q = joint.q();
        // canonical position c holds the site listed at old[c]
        let old: Vec<usize> = joint
            .sites()
            .iter()
            .map(|s| listed.iter().position(|t| *t == s).expect("site in union"))
            .collect();
        let dim = joint.dim();
        let map: Vec<usize> = (0..dim)
            .map(|idx| {
                let mut rem = idx;
                let mut old_idx = 0usize;
                for c in (0..n).rev() {
                    let digit = rem % q;
                    rem /= q;
                    old_idx += digit * q.pow((n - 1 - old[c]) as u32);
                }
                old_idx
            })
            .collect();
        let m = Matrix::from_fn(dim, |i, j| k[(map[i], map[j])]);
        Ok(HermitianOperator::from_parts(joint, m))
    }

    /// Partial trace onto the sites of `keep`.
    pub fn partial_trace(&self, keep: &Region) -> Result<Self> {
        if !keep.is_subset_of(&self.region) {
            return Err(Error::RegionMismatch(format!(
                "{:?} is not a subset of {:?}",
                keep.sites(),
                self.region.sites()
            )));
        }
        let pos = self.region.positions_of(keep)?;
        let split = LegSplit::new(self.region.q(), self.region.len(), &pos);
        Ok(HermitianOperator::from_parts(
            keep.clone(),
            split.trace_rest(&self.matrix),
        ))
    }

    /// `self ⊗ I` on a larger region.
    pub fn embed(&self, ambient: &Region) -> Result<Self> {
        if !self.region.is_subset_of(ambient) {
            return Err(Error::RegionMismatch(format!(
                "{:?} is not a subset of {:?}",
                self.region.sites(),
                ambient.sites()
            )));
        }
        if self.region == *ambient {
            return Ok(self.clone());
        }
        let pos = ambient.positions_of(&self.region)?;
        let split = LegSplit::new(ambient.q(), ambient.len(), &pos);
        Ok(HermitianOperator::from_parts(
            ambient.clone(),
            split.embed(&self.matrix),
        ))
    }

    /// Moves the operator onto another region with the same number of sites;
    /// the i-th canonical site of `self` maps to the i-th site of `target`.
    pub fn relabel(&self, target: &Region) -> Result<Self> {
        if target.len() != self.region.len() || target.q() != self.region.q() {
            return Err(Error::RegionMismatch("relabel needs regions of equal shape".into()));
        }
        Ok(HermitianOperator {
            region: target.clone(),
            matrix: self.matrix.clone(),
        })
    }

    /// Conjugation `U A U^†` by a unitary on the full register.
    pub fn conjugate(&self, unitary: &Matrix) -> Result<Self> {
        if unitary.dim() != self.dim() {
            return Err(Error::RegionMismatch("unitary dimension mismatch".into()));
        }
        let m = unitary.mul(&self.matrix).mul(&unitary.adjoint());
        Ok(HermitianOperator::from_parts(self.region.clone(), m))
    }

    pub fn eig(&self) -> Spectrum {
        let (eigenvalues, eigenvectors) = eigh(&self.matrix);
        Spectrum {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.matrix)
    }

    /// `Σ |λ_i|`.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|v| v.abs()).sum()
    }

    /// `max |λ_i|`.
    pub fn op_norm(&self) -> f64 {
        let ev = self.eigenvalues();
        match (ev.first(), ev.last()) {
            (Some(a), Some(b)) => a.abs().max(b.abs()),
            _ => 0.0,
        }
    }

    pub fn exp(&self) -> Self {
        HermitianOperator::from_parts(self.region.clone(), self.matrix.spectral_map(f64::exp))
    }

    /// Matrix logarithm; requires the minimum eigenvalue to exceed `1e-14`.
    pub fn log(&self) -> Result<Self> {
        let spec = self.eig();
        let min = spec.eigenvalues.first().copied().unwrap_or(1.0);
        if min <= 1e-14 {
            return Err(Error::NonPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        Ok(HermitianOperator::from_parts(self.region.clone(), spec.map(f64::ln)))
    }

    /// Conditional expectation that replaces site `x` by the maximally mixed
    /// state: `Ψ_x(H) = (I_x/q) ⊗ Tr_x H`.
    pub fn cond_expectation(&self, x: &Site) -> Result<Self> {
        let p = self
            .region
            .position(x)
            .ok_or_else(|| Error::RegionMismatch(format!("site {x:?} not in region")))?;
        let avg = SiteAverager::new(self.region.q(), self.region.len(), p);
        Ok(HermitianOperator::from_parts(self.region.clone(), avg.average(&self.matrix)))
    }
}

/// Positive semidefinite unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    /// Checks unit trace (within `1e-10`) and positivity (min eigenvalue `>= -1e-10`).
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvariantViolation(format!("density matrix trace {tr}")));
        }
        let min = op.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -CLIP_TOL {
            return Err(Error::InvariantViolation(format!(
                "density matrix has eigenvalue {min:e}"
            )));
        }
        Ok(DensityMatrix { op })
    }

    pub(crate) fn from_op_unchecked(op: HermitianOperator) -> Self {
        DensityMatrix { op }
    }

    pub fn maximally_mixed(region: &Region) -> Self {
        let d = region.dim() as f64;
        DensityMatrix {
            op: HermitianOperator::identity(region).scale(1.0 / d),
        }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(region: &Region, psi: &[C64]) -> Result<Self> {
        if psi.len() != region.dim() {
            return Err(Error::RegionMismatch("state vector dimension".into()));
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        let n = psi.len();
        let m = Matrix::from_fn(n, |i, j| psi[i] * psi[j].conj() / norm);
        Ok(DensityMatrix {
            op: HermitianOperator::from_parts(region.clone(), m),
        })
    }

    /// Diagonal state `Σ_x p(x) |x⟩⟨x|`.
    pub fn diagonal(region: &Region, probs: &[f64]) -> Result<Self> {
        DensityMatrix::new(HermitianOperator::from_diag(region, probs)?)
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn region(&self) -> &Region {
        self.op.region()
    }

    pub fn matrix(&self) -> &Matrix {
        self.op.matrix()
    }

    pub fn partial_trace(&self, keep: &Region) -> Result<Self> {
        Ok(DensityMatrix {
            op: self.op.partial_trace(keep)?,
        })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        Ok(DensityMatrix {
            op: self.op.tensor(&other.op)?,
        })
    }

    pub fn relabel(&self, target: &Region) -> Result<Self> {
        Ok(DensityMatrix {
            op: self.op.relabel(target)?,
        })
    }

    /// `ρ - σ` as a traceless operator.
    pub fn difference(&self, other: &DensityMatrix) -> Result<HermitianOperator> {
        self.op.sub(&other.op)
    }

    /// Expectation `Tr[ρ H]`.
    pub fn expect(&self, h: &HermitianOperator) -> Result<f64> {
        self.op.pairing(h)
    }

    /// Clipped spectrum; eigenvalues below `-1e-10` are an invariant violation.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        clip_spectrum(self.op.eigenvalues())
    }

    /// Von Neumann entropy `-Tr[ρ ln ρ]` in nats.
    pub fn entropy(&self) -> Result<f64> {
        Ok(crate::entropy::shannon(&self.probabilities()?))
    }

    /// Relative entropy `Tr[ρ (ln ρ - ln σ)]`; `+∞` when the support of `ρ`
    /// is not contained in that of `σ`.
    pub fn rel_entropy(&self, sigma: &DensityMatrix) -> Result<f64> {
        self.op.same_region(&sigma.op)?;
        let s_rho = self.entropy()?;
        let spec = sigma.op.eig();
        clip_spectrum(spec.eigenvalues.clone())?;
        let n = self.op.dim();
        let u = &spec.eigenvectors;
        let rho = self.op.matrix();
        let mut cross = 0.0;
        let mut outside = 0.0;
        for (k, &s) in spec.eigenvalues.iter().enumerate() {
            // ⟨v_k|ρ|v_k⟩
            let mut w = 0.0;
            for i in 0..n {
                let vi = u[(i, k)].conj();
                if vi.norm_sqr() == 0.0 {
                    continue;
                }
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..n {
                    acc += rho[(i, j)] * u[(j, k)];
                }
                w += (vi * acc).re;
            }
            if s > SUPPORT_TOL {
                cross += w * s.ln();
            } else {
                outside += w;
            }
        }
        if outside > SUPPORT_TOL {
            return Ok(f64::INFINITY);
        }
        Ok((-s_rho - cross).max(0.0))
    }

    /// `Tr[ρ (H - Tr[ρH])^2]`.
    pub fn variance(&self, h: &HermitianOperator) -> Result<f64> {
        self.op.same_region(h)?;
        let mean = self.expect(h)?;
        let mut c = h.matrix().clone();
        c.add_identity(-mean);
        let sq = c.mul(&c);
        Ok(self.op.matrix().trace_product(&sq).max(0.0))
    }
}

fn clip_spectrum(mut ev: Vec<f64>) -> Result<Vec<f64>> {
    for v in ev.iter_mut() {
        if *v < 0.0 {
            if *v < -CLIP_TOL {
                return Err(Error::InvariantViolation(format!(
                    "eigenvalue {v:e} below clipping threshold"
                )));
            }
            *v = 0.0;
        }
    }
    Ok(ev)
}

/// A product state given explicitly by its single-site factors.
#[derive(Clone, Debug)]
pub struct ProductState {
    factors: Vec<DensityMatrix>,
    region: Region,
}

impl ProductState {
    pub fn new(factors: Vec<DensityMatrix>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::NotProduct("no factors".into()))?;
        let q = first.region().q();
        let mut sites = Vec::with_capacity(factors.len());
        for f in &factors {
            if f.region().len() != 1 {
                return Err(Error::NotProduct(format!(
                    "factor on {} sites",
                    f.region().len()
                )));
            }
            if f.region().q() != q {
                return Err(Error::NotProduct("factors with different q".into()));
            }
            sites.push(f.region().sites()[0].clone());
        }
        let region = Region::new(sites, q).map_err(|e| match e {
            Error::InvalidInput(m) => Error::NotProduct(m),
            other => other,
        })?;
        let mut factors = factors;
        factors.sort_by(|a, b| a.region().sites()[0].cmp(&b.region().sites()[0]));
        Ok(ProductState { factors, region })
    }

    /// Identical copies of a single-site state on every site of `region`.
    pub fn uniform(region: &Region, factor: &DensityMatrix) -> Result<Self> {
        let mut fs = Vec::with_capacity(region.len());
        for s in region.sites() {
            fs.push(factor.relabel(&region.single(s))?);
        }
        ProductState::new(fs)
    }

    pub fn factors(&self) -> &[DensityMatrix] {
        &self.factors
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn to_density(&self) -> DensityMatrix {
        let mut it = self.factors.iter();
        let mut acc = it.next().expect("nonempty").clone();
        for f in it {
            acc = acc.tensor(f).expect("disjoint single-site factors");
        }
        acc
    }

    /// Smallest eigenvalue over all factors.
    pub fn min_eigenvalue(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.op().eigenvalues()[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `ln ω = Σ_x ln ω_x ⊗ I`; requires full rank.
    pub fn log(&self) -> Result<HermitianOperator> {
        let mut acc = HermitianOperator::zeros(&self.region);
        for f in &self.factors {
            let l = f.op().log().map_err(|_| Error::NotFullRank {
                min_eigenvalue: f.op().eigenvalues()[0],
            })?;
            acc = acc.add(&l.embed(&self.region)?)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn q2(sites: &[i64]) -> Region {
        Region::new(sites.iter().map(|&s| Site::d1(s)).collect(), 2).unwrap()
    }

    fn op(sites: &[i64], m: Matrix) -> HermitianOperator {
        HermitianOperator::new(q2(sites), m).unwrap()
    }

    #[test]
    fn tensor_of_identities() {
        let a = HermitianOperator::identity(&q2(&[0]));
        let b = HermitianOperator::identity(&q2(&[1]));
        assert_eq!(a.tensor(&b).unwrap(), HermitianOperator::identity(&q2(&[0, 1])));
    }

    #[test]
    fn tensor_diagonal_kronecker() {
        let a = op(&[0], pauli_z());
        let b = op(&[1], pauli_z());
        let t = a.tensor(&b).unwrap();
        let d: Vec<f64> = t.matrix().diag().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn tensor_reorders_legs() {
        // Z on site 1 tensored with X on site 0 must equal X ⊗ Z in canonical order.
        let z1 = op(&[1], pauli_z());
        let x0 = op(&[0], pauli_x());
        let t = z1.tensor(&x0).unwrap();
        assert_eq!(t.matrix(), &pauli_x().kron(&pauli_z()));
    }

    #[test]
    fn tensor_overlap_rejected() {
        let a = op(&[0], pauli_z());
        assert_eq!(a.tensor(&a), Err(Error::RegionOverlap));
    }

    #[test]
    fn partial_trace_identity() {
        let i4 = HermitianOperator::identity(&q2(&[0, 1]));
        let r = i4.partial_trace(&q2(&[0])).unwrap();
        assert_eq!(r.matrix(), &Matrix::identity(2).scale(2.0));
        assert!(matches!(
            i4.partial_trace(&q2(&[5])),
            Err(Error::RegionMismatch(_))
        ));
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let psi = [C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)];
        let bell = DensityMatrix::pure(&q2(&[0, 1]), &psi).unwrap();
        let m = bell.partial_trace(&q2(&[1])).unwrap();
        assert!(m.matrix().sub(&Matrix::identity(2).scale(0.5)).max_abs() < 1e-15);
    }

    #[test]
    fn embed_then_trace() {
        let a = op(&[1], pauli_x().add(&pauli_z()));
        let big = q2(&[0, 1, 2]);
        let e = a.embed(&big).unwrap();
        let back = e.partial_trace(a.region()).unwrap();
        assert!(back.matrix().sub(&a.matrix().scale(4.0)).max_abs() < 1e-14);
        assert!((e.op_norm() - a.op_norm()).abs() < 1e-12);
    }

    #[test]
    fn norms() {
        let z = op(&[0], pauli_z());
        assert!((z.trace_norm() - 2.0).abs() < 1e-15);
        assert!((z.op_norm() - 1.0).abs() < 1e-15);
        assert_eq!(HermitianOperator::zeros(&q2(&[0])).trace_norm(), 0.0);
    }

    #[test]
    fn exp_and_log() {
        let r = q2(&[0]);
        let z = HermitianOperator::zeros(&r);
        assert_eq!(z.exp(), HermitianOperator::identity(&r));
        let a = HermitianOperator::from_diag(&r, &[core::f64::consts::LN_2, 0.0]).unwrap();
        let e = a.exp();
        assert!((e.matrix()[(0, 0)].re - 2.0).abs() < 1e-15);
        assert!((e.matrix()[(1, 1)].re - 1.0).abs() < 1e-15);
        assert!(matches!(z.log(), Err(Error::NonPositiveDefinite { .. })));
    }

    #[test]
    fn entropies() {
        let r = q2(&[0, 1]);
        let mm = DensityMatrix::maximally_mixed(&r);
        assert!((mm.entropy().unwrap() - 2.0 * core::f64::consts::LN_2).abs() < 1e-14);
        let pure = DensityMatrix::diagonal(&r, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(pure.entropy().unwrap(), 0.0);
        assert!(pure.rel_entropy(&mm).unwrap() > 0.0);
        assert_eq!(mm.rel_entropy(&pure).unwrap(), f64::INFINITY);
        assert!(mm.rel_entropy(&mm).unwrap().abs() < 1e-12);
    }

    #[test]
    fn conditional_expectation_factorwise() {
        let r = q2(&[0, 1]);
        let x = Site::d1(0);
        let id = HermitianOperator::identity(&r);
        assert!(id.cond_expectation(&x).unwrap().sub(&id).unwrap().matrix().max_abs() < 1e-15);
        let z0 = op(&[0], pauli_z()).embed(&r).unwrap();
        assert!(z0.cond_expectation(&x).unwrap().matrix().max_abs() < 1e-15);
        let zz = op(&[0, 1], pauli_z().kron(&pauli_z()));
        assert!(zz.cond_expectation(&x).unwrap().matrix().max_abs() < 1e-15);
        let z1 = op(&[1], pauli_z()).embed(&r).unwrap();
        assert_eq!(z1.cond_expectation(&x).unwrap(), z1);
    }

    #[test]
    fn variance_examples() {
        let r = q2(&[0]);
        let mm = DensityMatrix::maximally_mixed(&r);
        assert!(mm.variance(&HermitianOperator::identity(&r)).unwrap().abs() < 1e-15);
        assert!((mm.variance(&op(&[0], pauli_z())).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = Matrix::from_vec(2, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(
            HermitianOperator::new(q2(&[0]), m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn product_state_validation() {
        let a = DensityMatrix::maximally_mixed(&q2(&[0]));
        let two = DensityMatrix::maximally_mixed(&q2(&[0, 1]));
        assert!(matches!(ProductState::new(vec![two]), Err(Error::NotProduct(_))));
        assert!(matches!(ProductState::new(vec![a.clone(), a]), Err(Error::NotProduct(_))));
    }
}
