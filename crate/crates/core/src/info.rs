//! Differential entropies and mutual informations of jointly Gaussian
//! variables, computed from log-determinants of principal submatrices.
//!
//! All quantities are in bits. The time-sharing variable is a single
//! constant symbol in the Gaussian evaluation, so `h(. | Q) = h(.)`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::linalg;

/// `log2(2 pi e) / 2`: the per-dimension constant of a Gaussian entropy.
pub const EPSILON_BITS: f64 = 2.047_095_585_180_641_6;

/// Relative ridge added to the diagonal of every submatrix before taking
/// its determinant: `RIDGE_REL * trace / dim`.
pub const RIDGE_REL: f64 = 1e-12;

/// Determinants at or below this value (after the ridge) are singular.
pub const SINGULAR_DET: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum InfoError {
    #[error("variable sets overlap")]
    OverlappingSets,
    #[error("covariance submatrix is singular")]
    SingularSubmatrix,
    #[error("variable set is empty")]
    EmptySet,
    #[error("variable {0} listed twice")]
    DuplicateVariable(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("covariance matrix is not square, symmetric and finite")]
    InvalidMatrix,
}

/// `Gamma(x) = log2(x) / 2`.
pub fn gamma(x: f64) -> f64 {
    0.5 * libm::log2(x)
}

/// A named symmetric covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Covariance {
    names: Vec<String>,
    data: Vec<f64>,
}

impl Covariance {
    /// Builds a covariance from row-major entries. The matrix must be square,
    /// finite and symmetric within `1e-9` relative to its largest entry.
    pub fn new(names: Vec<String>, data: Vec<f64>) -> Result<Self, InfoError> {
        let n = names.len();
        if n == 0 || data.len() != n * n || data.iter().any(|v| !v.is_finite()) {
            return Err(InfoError::InvalidMatrix);
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(InfoError::DuplicateVariable(name.clone()));
            }
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v))).max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if libm::fabs(data[i * n + j] - data[j * n + i]) > 1e-9 * scale {
                    return Err(InfoError::InvalidMatrix);
                }
            }
        }
        Ok(Self { names, data })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim() + j]
    }

    pub fn entry(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.get(self.index_of(a)?, self.index_of(b)?))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn ridge(&self) -> f64 {
        RIDGE_REL * self.trace() / self.dim() as f64
    }

    /// Resolves variable names into a [`VarSet`].
    pub fn var_set<S: AsRef<str>>(&self, names: &[S]) -> Result<VarSet, InfoError> {
        let mut idx = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            idx.push(self.index_of(n).ok_or_else(|| InfoError::UnknownVariable(n.to_string()))?);
        }
        VarSet::new(idx).map_err(|e| match e {
            InfoError::DuplicateVariable(i) => {
                let i: usize = i.parse().unwrap_or(0);
                InfoError::DuplicateVariable(self.names[i].clone())
            }
            other => other,
        })
    }

    /// `log2 det` of the ridged principal submatrix on `set`.
    pub fn log2_det(&self, set: &VarSet) -> Result<f64, InfoError> {
        let k = set.len();
        let n = self.dim();
        let ridge = self.ridge();
        let mut buf = [0.0f64; 64];
        let mut heap;
        let sub: &mut [f64] = if k <= 8 {
            &mut buf[..k * k]
        } else {
            heap = alloc::vec![0.0; k * k];
            &mut heap
        };
        for (r, &i) in set.indices().iter().enumerate() {
            if i >= n {
                return Err(InfoError::UnknownVariable(i.to_string()));
            }
            for (c, &j) in set.indices().iter().enumerate() {
                sub[r * k + c] = self.get(i, j);
            }
            sub[r * k + r] += ridge;
        }
        match linalg::log2_abs_det(sub, k) {
            Some((l, s)) if s > 0.0 && l > libm::log2(SINGULAR_DET) => Ok(l),
            _ => Err(InfoError::SingularSubmatrix),
        }
    }
}

/// An ordered, duplicate-free, nonempty set of variable indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(Vec<usize>);

impl VarSet {
    pub fn new(indices: Vec<usize>) -> Result<Self, InfoError> {
        if indices.is_empty() {
            return Err(InfoError::EmptySet);
        }
        for (k, i) in indices.iter().enumerate() {
            if indices[..k].contains(i) {
                return Err(InfoError::DuplicateVariable(i.to_string()));
            }
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.0.iter().all(|i| !other.0.contains(i))
    }

    /// Ordered union; `None` when the sets overlap.
    pub fn disjoint_union(&self, other: &VarSet) -> Option<VarSet> {
        if !self.is_disjoint(other) {
            return None;
        }
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Some(VarSet(v))
    }

    /// Union that tolerates overlap (used by the chain-rule checks).
    pub fn union(&self, other: &VarSet) -> VarSet {
        let mut v = self.0.clone();
        for i in &other.0 {
            if !v.contains(i) {
                v.push(*i);
            }
        }
        VarSet(v)
    }

    fn mask(&self) -> Option<u32> {
        let mut m = 0u32;
        for &i in &self.0 {
            if i >= 16 {
                return None;
            }
            m |= 1 << i;
        }
        Some(m)
    }
}

/// Entropy `h(S) = |S| eps + Gamma(det Sigma_S)`, in bits.
pub fn entropy(sigma: &Covariance, set: &VarSet) -> Result<f64, InfoError> {
    Ok(set.len() as f64 * EPSILON_BITS + 0.5 * sigma.log2_det(set)?)
}

/// `I(L;R) = 0.5 log2(det Sigma_L det Sigma_R / det Sigma_{L u R})`.
pub fn mutual_information(sigma: &Covariance, left: &VarSet, right: &VarSet) -> Result<f64, InfoError> {
    let joint = left.disjoint_union(right).ok_or(InfoError::OverlappingSets)?;
    Ok(0.5 * (sigma.log2_det(left)? + sigma.log2_det(right)? - sigma.log2_det(&joint)?))
}

/// Sign of a mutual-information term in a bound's right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// A signed term `+/- I(left; right)` over a concrete covariance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MiTerm {
    pub left: VarSet,
    pub right: VarSet,
    pub sign: Sign,
}

impl MiTerm {
    pub fn new(left: VarSet, right: VarSet, sign: Sign) -> Result<Self, InfoError> {
        if !left.is_disjoint(&right) {
            return Err(InfoError::OverlappingSets);
        }
        Ok(Self { left, right, sign })
    }
}

/// Signed sum of mutual informations. May be negative.
pub fn evaluate_terms(sigma: &Covariance, terms: &[MiTerm]) -> Result<f64, InfoError> {
    let mut cache = EntropyCache::new(sigma);
    terms.iter().try_fold(0.0, |acc, t| Ok(acc + t.sign.factor() * cache.mutual_information(&t.left, &t.right)?))
}

/// Memoizes log-determinants by variable subset; catalogs reuse the same
/// few dozen subsets many times.
pub struct EntropyCache<'a> {
    sigma: &'a Covariance,
    table: Vec<f64>,
}

impl<'a> EntropyCache<'a> {
    pub fn new(sigma: &'a Covariance) -> Self {
        let table = if sigma.dim() <= 12 { alloc::vec![f64::NAN; 1 << sigma.dim()] } else { Vec::new() };
        Self { sigma, table }
    }

    pub fn log2_det(&mut self, set: &VarSet) -> Result<f64, InfoError> {
        match set.mask() {
            Some(m) if (m as usize) < self.table.len() => {
                let slot = &mut self.table[m as usize];
                if slot.is_nan() {
                    *slot = self.sigma.log2_det(set)?;
                }
                Ok(*slot)
            }
            _ => self.sigma.log2_det(set),
        }
    }

    pub fn mutual_information(&mut self, left: &VarSet, right: &VarSet) -> Result<f64, InfoError> {
        let joint = left.disjoint_union(right).ok_or(InfoError::OverlappingSets)?;
        Ok(0.5 * (self.log2_det(left)? + self.log2_det(right)? - self.log2_det(&joint)?))
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn epsilon_constant() {
        let expected = 0.5 * libm::log2(2.0 * core::f64::consts::PI * core::f64::consts::E);
        assert!((EPSILON_BITS - expected).abs() < 1e-15);
    }

    #[test]
    fn scalar_unit_variance_entropy() {
        let c = Covariance::new(names(&["X"]), vec![1.0]).unwrap();
        let s = c.var_set(&["X"]).unwrap();
        let h = entropy(&c, &s).unwrap();
        assert!((h - 2.047_095_585).abs() < 1e-9);
    }

    #[test]
    fn identity_pair_entropy() {
        let c = Covariance::new(names(&["A", "B"]), vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let s = c.var_set(&["A", "B"]).unwrap();
        assert!((entropy(&c, &s).unwrap() - 2.0 * EPSILON_BITS).abs() < 1e-11);
    }

    #[test]
    fn entropy_of_variance_five() {
        let c = Covariance::new(names(&["W"]), vec![5.0]).unwrap();
        let h = entropy(&c, &c.var_set(&["W"]).unwrap()).unwrap();
        // eps + 0.5 log2 5, evaluated by hand: 2.0470956 + 1.1609640
        assert!((h - 3.208_059_631).abs() < 1e-8, "{h}");
    }

    #[test]
    fn correlated_pair_mi_is_half_bit() {
        // W ~ N(0,1), U = U~ + W with var(U~) = 1: det = 1*2 - 1 = 1
        let c = Covariance::new(names(&["W", "U"]), vec![1.0, 1.0, 1.0, 2.0]).unwrap();
        let w = c.var_set(&["W"]).unwrap();
        let u = c.var_set(&["U"]).unwrap();
        assert!((mutual_information(&c, &w, &u).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn independent_mi_vanishes() {
        let c = Covariance::new(names(&["W", "U"]), vec![3.0, 0.0, 0.0, 7.0]).unwrap();
        let w = c.var_set(&["W"]).unwrap();
        let u = c.var_set(&["U"]).unwrap();
        assert!(mutual_information(&c, &w, &u).unwrap().abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let c = Covariance::new(names(&["A", "B"]), vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let a = c.var_set(&["A"]).unwrap();
        assert_eq!(mutual_information(&c, &a, &a), Err(InfoError::OverlappingSets));
        // rank-one matrix: only the ridge keeps it off zero, det ~ 2e-12
        let ab = c.var_set(&["A", "B"]).unwrap();
        assert!(c.log2_det(&ab).unwrap() < -35.0);
        let z = Covariance::new(names(&["Z"]), vec![0.0]).unwrap();
        assert_eq!(entropy(&z, &z.var_set(&["Z"]).unwrap()), Err(InfoError::SingularSubmatrix));
        assert_eq!(c.var_set(&["C"]), Err(InfoError::UnknownVariable("C".into())));
        assert_eq!(c.var_set(&["A", "A"]), Err(InfoError::DuplicateVariable("A".into())));
        assert_eq!(VarSet::new(vec![]), Err(InfoError::EmptySet));
        assert_eq!(Covariance::new(names(&["A", "B"]), vec![1.0, 2.0, 0.0, 1.0]), Err(InfoError::InvalidMatrix));
    }

    #[test]
    fn evaluate_terms_sums_signs() {
        let c = Covariance::new(names(&["W", "U"]), vec![1.0, 1.0, 1.0, 2.0]).unwrap();
        let w = c.var_set(&["W"]).unwrap();
        let u = c.var_set(&["U"]).unwrap();
        assert_eq!(evaluate_terms(&c, &[]).unwrap(), 0.0);
        let plus = MiTerm::new(w.clone(), u.clone(), Sign::Plus).unwrap();
        let minus = MiTerm::new(u.clone(), w.clone(), Sign::Minus).unwrap();
        assert!((evaluate_terms(&c, &[plus.clone(), plus.clone()]).unwrap() - 1.0).abs() < 1e-10);
        assert!(evaluate_terms(&c, &[plus, minus]).unwrap().abs() < 1e-12);
        assert_eq!(MiTerm::new(w.clone(), w, Sign::Plus), Err(InfoError::OverlappingSets));
    }
}
