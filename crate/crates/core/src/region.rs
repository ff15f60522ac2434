//! Lattice sites and finite regions.
//!
//! A [`Region`] is a canonically ordered (lexicographic) set of sites together
//! with the local dimension `q`. Operators on a region use the basis in which
//! the first listed site is the most significant digit.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

/// Default cap on the Hilbert dimension `q^|sites|`.
pub const DEFAULT_DIM_CAP: usize = 1 << 14;

static DIM_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DIM_CAP);

/// Current Hilbert dimension cap.
pub fn dim_cap() -> usize {
    DIM_CAP.load(Ordering::Relaxed)
}

/// Override the Hilbert dimension cap for the whole process.
pub fn set_dim_cap(cap: usize) {
    DIM_CAP.store(cap.max(1), Ordering::Relaxed);
}

/// A lattice site in `Z^d`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site(Vec<i64>);

impl Site {
    pub fn new(coords: Vec<i64>) -> Self {
        Site(coords)
    }

    /// Site of a one-dimensional chain.
    pub fn d1(x: i64) -> Self {
        Site(alloc::vec![x])
    }

    pub fn origin(d: usize) -> Self {
        Site(alloc::vec![0; d])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn translate(&self, by: &Site) -> Site {
        Site(self.0.iter().zip(&by.0).map(|(a, b)| a + b).collect())
    }

    pub fn negate(&self) -> Site {
        Site(self.0.iter().map(|a| -a).collect())
    }

    /// Chebyshev distance.
    pub fn dist_inf(&self, other: &Site) -> i64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// A finite, canonically ordered set of sites with local dimension `q`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Region {
    sites: Vec<Site>,
    q: usize,
}

impl Region {
    /// Builds a region, sorting the sites. Duplicates, mixed spatial
    /// dimensions, `q < 2` and dimensions beyond the cap are rejected.
    pub fn new(mut sites: Vec<Site>, q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidInput(format!("local dimension q = {q} < 2")));
        }
        sites.sort();
        for w in sites.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidInput(format!("duplicate site {:?}", w[0])));
            }
        }
        if let Some(first) = sites.first() {
            let d = first.dim();
            if sites.iter().any(|s| s.dim() != d) {
                return Err(Error::InvalidInput("sites of mixed spatial dimension".into()));
            }
        }
        let region = Region { sites, q };
        region.check_cap()?;
        Ok(region)
    }

    /// The empty region (Hilbert dimension one).
    pub fn empty(q: usize) -> Self {
        Region { sites: Vec::new(), q }
    }

    /// One-dimensional chain `{start, ..., start + n - 1}`.
    pub fn chain(start: i64, n: usize, q: usize) -> Result<Self> {
        Region::new((0..n as i64).map(|i| Site::d1(start + i)).collect(), q)
    }

    /// The box `{x : -a <= x_i < a}` in `Z^d`.
    pub fn centered_box(d: usize, a: usize, q: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        let side = 2 * a;
        let count = (side as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
        let dim = (q as u128).checked_pow(count.min(u32::MAX as u128) as u32);
        if dim.map_or(true, |v| v > dim_cap() as u128) {
            return Err(Error::DimensionCap {
                dim: dim.unwrap_or(u128::MAX),
                cap: dim_cap(),
            });
        }
        let mut sites = Vec::with_capacity(count as usize);
        let mut idx = alloc::vec![0usize; d];
        loop {
            sites.push(Site(idx.iter().map(|&i| i as i64 - a as i64).collect()));
            let mut k = d;
            loop {
                if k == 0 {
                    return Region::new(sites, q);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < side {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn check_cap(&self) -> Result<()> {
        let dim = (self.q as u128).checked_pow(self.sites.len() as u32);
        match dim {
            Some(v) if v <= dim_cap() as u128 => Ok(()),
            _ => Err(Error::DimensionCap {
                dim: dim.unwrap_or(u128::MAX),
                cap: dim_cap(),
            }),
        }
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Hilbert space dimension `q^|sites|`.
    pub fn dim(&self) -> usize {
        self.q.pow(self.sites.len() as u32)
    }

    /// Spatial dimension of the sites (0 for the empty region).
    pub fn spatial_dim(&self) -> usize {
        self.sites.first().map_or(0, Site::dim)
    }

    pub fn position(&self, site: &Site) -> Option<usize> {
        self.sites.binary_search(site).ok()
    }

    pub fn contains(&self, site: &Site) -> bool {
        self.position(site).is_some()
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.q == other.q && self.sites.iter().all(|s| other.contains(s))
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.sites.iter().all(|s| !other.contains(s))
    }

    pub fn union(&self, other: &Region) -> Result<Region> {
        if self.q != other.q {
            return Err(Error::RegionMismatch("local dimensions differ".into()));
        }
        let mut sites = self.sites.clone();
        sites.extend(other.sites.iter().filter(|s| !self.contains(s)).cloned());
        Region::new(sites, self.q)
    }

    /// Sites of `self` not in `other`.
    pub fn difference(&self, other: &Region) -> Region {
        Region {
            sites: self
                .sites
                .iter()
                .filter(|s| !other.contains(s))
                .cloned()
                .collect(),
            q: self.q,
        }
    }

    /// The region with one site removed.
    pub fn without(&self, site: &Site) -> Region {
        Region {
            sites: self.sites.iter().filter(|s| *s != site).cloned().collect(),
            q: self.q,
        }
    }

    pub fn single(&self, site: &Site) -> Region {
        Region {
            sites: alloc::vec![site.clone()],
            q: self.q,
        }
    }

    pub fn translate(&self, by: &Site) -> Region {
        Region {
            sites: self.sites.iter().map(|s| s.translate(by)).collect(),
            q: self.q,
        }
    }

    /// Positions (in `self`) of the sites of `sub`.
    pub(crate) fn positions_of(&self, sub: &Region) -> Result<Vec<usize>> {
        sub.sites
            .iter()
            .map(|s| {
                self.position(s)
                    .ok_or_else(|| Error::RegionMismatch(format!("site {s:?} not in region")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_ordering_makes_regions_equal() {
        let a = Region::new(alloc::vec![Site::d1(2), Site::d1(0)], 2).unwrap();
        let b = Region::new(alloc::vec![Site::d1(0), Site::d1(2)], 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), 4);
    }

    #[test]
    fn duplicates_and_small_q_rejected() {
        assert!(Region::new(alloc::vec![Site::d1(1), Site::d1(1)], 2).is_err());
        assert!(Region::new(alloc::vec![Site::d1(1)], 1).is_err());
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            Region::chain(0, 15, 2),
            Err(Error::DimensionCap { .. })
        ));
        assert!(Region::chain(0, 14, 2).is_ok());
    }

    #[test]
    fn centered_box_layout() {
        let b = Region::centered_box(1, 2, 2).unwrap();
        let xs: Vec<i64> = b.sites().iter().map(|s| s.coords()[0]).collect();
        assert_eq!(xs, alloc::vec![-2, -1, 0, 1]);
        let b2 = Region::centered_box(2, 1, 2).unwrap();
        assert_eq!(b2.len(), 4);
        assert!(b2.contains(&Site::new(alloc::vec![-1, 0])));
    }
}
