//! Symbolic rate-bound catalogs and their numeric instantiation.
//!
//! Each catalog is kept as plain text, one bound per line, in the order the
//! bounds were derived (decoder 1, then 2, then 3):
//!
//! ```text
//! 2: R21+R22 <= I(U1,U2;Y2) + I(U1;U2) - I(W;U1) - I(W;U2)
//! ```
//!
//! The leading number is the decoding receiver. Time-sharing conditioning is
//! dropped throughout, so `I(A;B|Q)` is written `I(A;B)`.

use alloc::borrow::ToOwned;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::{Decoding, ModelVariant, Sharing};
use crate::info::{Covariance, EntropyCache, InfoError, Sign, VarSet};
use crate::polytope::{self, Halfspace, HalfspaceSystem};

const CMS2: &str = "\
1: R11 <= I(W;U1,V1,Y1)
1: R11+R21 <= I(W,U1;V1,Y1)
1: R11+R31 <= I(W,V1;U1,Y1) + I(W;V1) - I(W,U1,U2;V1)
1: R11+R21+R31 <= I(W,U1,V1;Y1) + I(W,U1;V1) - I(W,U1,U2;V1)
2: R21 <= I(U1;U2,Y2) - I(W;U1)
2: R22 <= I(U2;U1,Y2) - I(W;U2)
2: R21+R22 <= I(U1,U2;Y2) + I(U1;U2) - I(W;U1) - I(W;U2)
3: R31 <= I(V1;V3,Y3) - I(W,U1,U2;V1)
3: R33 <= I(V3;V1,Y3) - I(W,U1,U2;V3)
3: R31+R33 <= I(V1,V3;Y3) + I(V1;V3) - I(W,U1,U2;V3) - I(W,U1,U2;V1)
";

const PMS2: &str = "\
1: R11 <= I(W;U1,V1,Y1)
1: R11+R21 <= I(W,U1;V1,Y1)
1: R11+R31 <= I(W,V1;U1,Y1)
1: R11+R21+R31 <= I(W,U1,V1;Y1) + I(W,U1;V1) - I(W;V1)
2: R21 <= I(U1;U2,Y2) - I(W;U1)
2: R22 <= I(U2;U1,Y2) - I(W;U2)
2: R21+R22 <= I(U1,U2;Y2) + I(U1;U2) - I(W;U1) - I(W;U2)
3: R31 <= I(V1;V3,Y3) - I(W;V1)
3: R33 <= I(V3;V1,Y3) - I(W;V3)
3: R31+R33 <= I(V1,V3;Y3) + I(V1;V3) - I(W;V3) - I(W;V1)
";

// Bound 12 prints its last positive term as "I(W0,W1)" and bound 24 as
// "I(W0,U0) - -I(...)"; both are read as the mutual informations I(W0;W1)
// and I(W0;U0) with a single minus, matching bounds 3, 8, 9 and 20.
const CMS1: &str = "\
1: R10 <= I(W0;W1,U0,V0,Y1)
1: R11 <= I(W1;W0,U0,V0,Y1)
1: R10+R11 <= I(W0,W1;U0,V0,Y1) + I(W0;W1)
1: R10+R20 <= I(W0,U0;W1,V0,Y1) + I(W0;U0) - I(W0,W1;U0)
1: R10+R30 <= I(W0,V0;W1,U0,Y1) + I(W0;V0) - I(W0,W1,U0,U2;V0)
1: R11+R20 <= I(W1,U0;W0,V0,Y1) + I(W1;U0) - I(W0,W1;U0)
1: R11+R30 <= I(W1,V0;W0,U0,Y1) + I(W1;V0) - I(W0,W1,U0,U2;V0)
1: R10+R11+R20 <= I(W0,W1,U0;V0,Y1) + I(W0,W1;U0) + I(W0;W1) - I(W0,W1;U0)
1: R10+R11+R30 <= I(W0,W1,V0;U0,Y1) + I(W0,W1;V0) + I(W0;W1) - I(W0,W1,U0,U2;V0)
1: R10+R20+R30 <= I(W0,U0,V0;W1,Y1) + I(W0,U0;V0) + I(W0;U0) - I(W0,W1;U0) - I(W0,W1,U0,U2;V0)
1: R11+R20+R30 <= I(W1,U0,V0;W0,Y1) + I(W1,U0;V0) + I(W1;U0) - I(W0,W1;U0) - I(W0,W1,U0,U2;V0)
1: R10+R11+R20+R30 <= I(W0,W1,U0,V0;Y1) + I(W0,W1,U0;V0) + I(W0,W1;U0) + I(W0;W1) - I(W0,W1;U0) - I(W0,W1,U0,U2;V0)
2: R20 <= I(U0;W0,U2,V0,Y2) - I(W0,W1;U0)
2: R22 <= I(U2;W0,U0,V0,Y2) - I(W0,W1;U2)
2: R20+R22 <= I(U0,U2;W0,V0,Y2) + I(U0;U2) - I(W0,W1;U0) - I(W0,W1;U2)
2: R10+R20 <= I(W0,U0;U2,V0,Y2) + I(W0;U0) - I(W0,W1;U0)
2: R10+R22 <= I(W0,U2;U0,V0,Y2) + I(W0;U2) - I(W0,W1;U2)
2: R20+R30 <= I(U0,V0;W0,U2,Y2) + I(U0;V0) - I(W0,W1;U0) - I(W0,W1,U0,U2;V0)
2: R22+R30 <= I(U2,V0;W0,U0,Y2) + I(U2;V0) - I(W0,W1;U2) - I(W0,W1,U0,U2;V0)
2: R10+R20+R22 <= I(W0,U0,U2;V0,Y2) + I(W0,U0;U2) + I(W0;U0) - I(W0,W1;U0) - I(W0,W1;U2)
2: R10+R20+R30 <= I(W0,U0,V0;U2,Y2) + I(W0,U0;V0) + I(W0;U0) - I(W0,W1;U0) - I(W0,W1,U0,U2;V0)
2: R10+R22+R30 <= I(W0,U2,V0;U0,Y2) + I(W0,U2;V0) + I(W0;U2) - I(W0,W1;U2) - I(W0,W1,U0,U2;V0)
2: R20+R22+R30 <= I(U0,U2,V0;W0,Y2) + I(U0,U2;V0) + I(U0;U2) - I(W0,W1;U0) - I(W0,W1;U2) - I(W0,W1,U0,U2;V0)
2: R10+R20+R22+R30 <= I(W0,U0,U2,V0;Y2) + I(W0,U0,U2;V0) + I(W0,U0;U2) + I(W0;U0) - I(W0,W1;U0) - I(W0,W1;U2) - I(W0,W1,U0,U2;V0)
3: R30 <= I(V0;W0,U0,V3,Y3) - I(W0,W1,U0,U2;V0)
3: R33 <= I(V3;W0,U0,V0,Y3) - I(W0,W1,U0,U2;V3)
3: R30+R33 <= I(V0,V3;W0,U0,Y3) + I(V0;V3) - I(W0,W1,U0,U2;V0) - I(W0,W1,U0,U2;V3)
3: R10+R30 <= I(W0,V0;U0,V3,Y3) + I(W0;V0) - I(W0,W1,U0,U2;V0)
3: R10+R33 <= I(W0,V3;U0,V0,Y3) + I(W0;V3) - I(W0,W1,U0,U2;V3)
3: R20+R30 <= I(U0,V0;W0,V3,Y3) + I(U0;V0) - I(W0,W1;U0) - I(W0,W1,U0,U2;V0)
3: R20+R33 <= I(U0,V3;W0,V0,Y3) + I(U0;V3) - I(W0,W1;U0) - I(W0,W1,U0,U2;V3)
3: R10+R20+R30 <= I(W0,U0,V0;V3,Y3) + I(W0,U0;V0) + I(W0;U0) - I(W0,W1;U0) - I(W0,W1,U0,U2;V0)
3: R10+R20+R33 <= I(W0,U0,V3;V0,Y3) + I(W0,U0;V3) + I(W0;U0) - I(W0,W1;U0) - I(W0,W1,U0,U2;V3)
3: R10+R30+R33 <= I(W0,V0,V3;U0,Y3) + I(W0,V0;V3) + I(W0;V0) - I(W0,W1,U0,U2;V0) - I(W0,W1,U0,U2;V3)
3: R20+R30+R33 <= I(U0,V0,V3;W0,Y3) + I(U0,V0;V3) + I(U0;V0) - I(W0,W1;U0) - I(W0,W1,U0,U2;V0) - I(W0,W1,U0,U2;V3)
3: R10+R20+R30+R33 <= I(W0,U0,V0,V3;Y3) + I(W0,U0,V0;V3) + I(W0,U0;V0) + I(W0;U0) - I(W0,W1;U0) - I(W0,W1,U0,U2;V0) - I(W0,W1,U0,U2;V3)
";

/// The primary-only variant of the six-auxiliary catalog is the cumulative
/// one with every binning penalty against the third user's auxiliaries
/// taken with respect to the primary's codewords alone.
fn pms1_text() -> String {
    CMS1.replace("I(W0,W1,U0,U2;", "I(W0,W1;")
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("catalog line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("variable {0} is not present in the covariance")]
    MissingVariable(String),
    #[error(transparent)]
    Info(#[from] InfoError),
}

/// `+/- I(left; right)` over variable names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicTerm {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub sign: Sign,
}

impl fmt::Display for SymbolicTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        write!(f, "{s}I({};{})", self.left.join(","), self.right.join(","))
    }
}

/// `sum_{r : coeffs[r] = 1} R_r <= sum of terms`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateBound {
    /// 1-based position in the original derivation order.
    pub index: usize,
    /// Receiver whose decoding produces this bound.
    pub receiver: u8,
    /// 0/1 coefficient per split rate of the owning catalog.
    pub coeffs: Vec<u8>,
    pub terms: Vec<SymbolicTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCatalog {
    pub variant: ModelVariant,
    pub split_rates: Vec<String>,
    pub bounds: Vec<RateBound>,
    /// Split-rate indices summed into `R1`, `R2`, `R3`.
    pub recombination: [Vec<usize>; 3],
}

pub fn catalog_for(variant: ModelVariant) -> BoundCatalog {
    let (rates, groups): (&[&str], [&[&str]; 3]) = match variant.decoding {
        Decoding::Variant2 => (&["R11", "R21", "R22", "R31", "R33"], [&["R11"], &["R21", "R22"], &["R31", "R33"]]),
        Decoding::Variant1 => (
            &["R10", "R11", "R20", "R22", "R30", "R33"],
            [&["R10", "R11"], &["R20", "R22"], &["R30", "R33"]],
        ),
    };
    let text = match (variant.sharing, variant.decoding) {
        (Sharing::Cms, Decoding::Variant2) => CMS2.to_owned(),
        (Sharing::Pms, Decoding::Variant2) => PMS2.to_owned(),
        (Sharing::Cms, Decoding::Variant1) => CMS1.to_owned(),
        (Sharing::Pms, Decoding::Variant1) => pms1_text(),
    };
    BoundCatalog::parse(variant, rates, groups, &text).expect("built-in catalog parses")
}

fn parse_names(s: &str, line: usize) -> Result<Vec<String>, CatalogError> {
    let names: Vec<String> = s.split(',').map(|n| n.trim().to_string()).collect();
    if names.iter().any(|n| n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')) {
        return Err(CatalogError::Parse { line, msg: alloc::format!("bad variable list `{s}`") });
    }
    Ok(names)
}

fn parse_terms(s: &str, line: usize) -> Result<Vec<SymbolicTerm>, CatalogError> {
    let err = |msg: &str| CatalogError::Parse { line, msg: msg.to_string() };
    let mut terms = Vec::new();
    let mut rest = s.trim();
    let mut first = true;
    while !rest.is_empty() {
        let sign = if let Some(r) = rest.strip_prefix('+') {
            rest = r.trim_start();
            Sign::Plus
        } else if let Some(r) = rest.strip_prefix('-') {
            rest = r.trim_start();
            Sign::Minus
        } else if first {
            Sign::Plus
        } else {
            return Err(err("expected + or - between terms"));
        };
        first = false;
        let body = rest.strip_prefix("I(").ok_or_else(|| err("expected I("))?;
        let close = body.find(')').ok_or_else(|| err("unclosed I("))?;
        let (l, r) = body[..close].split_once(';').ok_or_else(|| err("mutual information needs `;`"))?;
        let left = parse_names(l, line)?;
        let right = parse_names(r, line)?;
        if left.iter().any(|n| right.contains(n)) {
            return Err(err("overlapping variable sets"));
        }
        terms.push(SymbolicTerm { left, right, sign });
        rest = body[close + 1..].trim_start();
    }
    Ok(terms)
}

impl BoundCatalog {
    /// Parses catalog text (see the module docs). Blank lines and `#`
    /// comments are skipped.
    pub fn parse(
        variant: ModelVariant,
        split_rates: &[&str],
        groups: [&[&str]; 3],
        text: &str,
    ) -> Result<Self, CatalogError> {
        let rates: Vec<String> = split_rates.iter().map(|s| s.to_string()).collect();
        let index_of = |name: &str, line: usize| {
            rates
                .iter()
                .position(|r| r == name)
                .ok_or_else(|| CatalogError::Parse { line, msg: alloc::format!("unknown rate {name}") })
        };
        let mut recombination: [Vec<usize>; 3] = Default::default();
        for (g, names) in groups.iter().enumerate() {
            for n in names.iter() {
                recombination[g].push(index_of(n, 0)?);
            }
        }
        let mut bounds = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |msg: &str| CatalogError::Parse { line, msg: msg.to_string() };
            let (rx, body) = body.split_once(':').ok_or_else(|| err("missing receiver tag"))?;
            let receiver: u8 = rx.trim().parse().map_err(|_| err("bad receiver tag"))?;
            let (lhs, rhs) = body.split_once("<=").ok_or_else(|| err("missing <="))?;
            let mut coeffs = vec![0u8; rates.len()];
            for r in lhs.split('+') {
                let i = index_of(r.trim(), line)?;
                if coeffs[i] != 0 {
                    return Err(err("rate repeated on left-hand side"));
                }
                coeffs[i] = 1;
            }
            let terms = parse_terms(rhs, line)?;
            bounds.push(RateBound { index: bounds.len() + 1, receiver, coeffs, terms });
        }
        Ok(Self { variant, split_rates: rates, bounds, recombination })
    }

    /// Every variable name referenced by some term, in first-use order.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for b in &self.bounds {
            for t in &b.terms {
                for n in t.left.iter().chain(&t.right) {
                    if !out.contains(n) {
                        out.push(n.clone());
                    }
                }
            }
        }
        out
    }

    /// Sets the rates in `drop_rates` to zero and removes the variables in
    /// `drop_vars` from every term. Terms left with an empty side vanish
    /// (the mutual information with a constant is zero) and bounds left with
    /// no rate disappear. Original indices are preserved.
    pub fn restrict(&self, drop_rates: &[&str], drop_vars: &[&str]) -> Self {
        let keep: Vec<usize> =
            (0..self.split_rates.len()).filter(|&i| !drop_rates.contains(&self.split_rates[i].as_str())).collect();
        let remap = |i: usize| keep.iter().position(|&k| k == i);
        let bounds = self
            .bounds
            .iter()
            .filter_map(|b| {
                let coeffs: Vec<u8> = keep.iter().map(|&i| b.coeffs[i]).collect();
                if coeffs.iter().all(|&c| c == 0) {
                    return None;
                }
                let terms = b
                    .terms
                    .iter()
                    .filter_map(|t| {
                        let strip = |v: &Vec<String>| -> Vec<String> {
                            v.iter().filter(|n| !drop_vars.contains(&n.as_str())).cloned().collect()
                        };
                        let (left, right) = (strip(&t.left), strip(&t.right));
                        (!left.is_empty() && !right.is_empty()).then_some(SymbolicTerm { left, right, sign: t.sign })
                    })
                    .collect();
                Some(RateBound { index: b.index, receiver: b.receiver, coeffs, terms })
            })
            .collect();
        let recombination = self.recombination.clone().map(|g| g.into_iter().filter_map(remap).collect());
        Self { variant: self.variant, split_rates: keep.iter().map(|&i| self.split_rates[i].clone()).collect(), bounds, recombination }
    }

    /// Resolves variable names against a covariance's ordering.
    pub fn compile(&self, names: &[String]) -> Result<CompiledCatalog, CatalogError> {
        let resolve = |v: &[String]| -> Result<VarSet, CatalogError> {
            let idx = v
                .iter()
                .map(|n| names.iter().position(|m| m == n).ok_or_else(|| CatalogError::MissingVariable(n.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(VarSet::new(idx)?)
        };
        let mut rows = Vec::with_capacity(self.bounds.len());
        for b in &self.bounds {
            let mut terms = Vec::with_capacity(b.terms.len());
            for t in &b.terms {
                terms.push((resolve(&t.left)?, resolve(&t.right)?, t.sign));
            }
            rows.push((b.coeffs.iter().map(|&c| c as f64).collect(), terms));
        }
        Ok(CompiledCatalog { dim: self.split_rates.len(), names: names.to_vec(), rows, rate_names: self.split_rates.clone() })
    }

    pub fn instantiate(&self, sigma: &Covariance) -> Result<Instantiation, CatalogError> {
        self.compile(sigma.names())?.evaluate(sigma)
    }
}

impl fmt::Display for BoundCatalog {
    /// One bound per line: `bound k: R.. <= +I(..) -I(..)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bounds {
            let lhs: Vec<&str> =
                b.coeffs.iter().zip(&self.split_rates).filter(|(c, _)| **c != 0).map(|(_, n)| n.as_str()).collect();
            write!(f, "bound {}: {} <=", b.index, lhs.join("+"))?;
            if b.terms.is_empty() {
                write!(f, " 0")?;
            }
            for t in &b.terms {
                write!(f, " {t}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A catalog with names resolved to covariance indices, ready to evaluate
/// against many covariances sharing the same variable order.
#[derive(Clone, Debug)]
pub struct CompiledCatalog {
    dim: usize,
    names: Vec<String>,
    rows: Vec<(Vec<f64>, Vec<(VarSet, VarSet, Sign)>)>,
    rate_names: Vec<String>,
}

/// Negative right-hand sides down to this are treated as round-off and
/// clamped to zero; anything lower makes the draw vacuous.
pub const RHS_ZERO_TOL: f64 = 1e-12;

impl CompiledCatalog {
    pub fn evaluate(&self, sigma: &Covariance) -> Result<Instantiation, CatalogError> {
        if sigma.names() != self.names.as_slice() {
            return Err(CatalogError::MissingVariable("covariance variable order changed".into()));
        }
        let mut cache = EntropyCache::new(sigma);
        let mut sys = HalfspaceSystem::new(self.dim);
        let mut rhs = Vec::with_capacity(self.rows.len());
        for (coeffs, terms) in &self.rows {
            let mut b = 0.0;
            for (l, r, s) in terms {
                b += s.factor() * cache.mutual_information(l, r)?;
            }
            rhs.push(b);
            if b < -RHS_ZERO_TOL {
                return Ok(Instantiation::Empty);
            }
            sys.push(Halfspace::new(coeffs.clone(), b.max(0.0))).map_err(|_| CatalogError::Info(InfoError::InvalidMatrix))?;
        }
        Ok(Instantiation::Polytope(RatePolytope { rate_names: self.rate_names.clone(), system: sys.with_nonnegativity() }))
    }

    pub fn bound_count(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instantiation {
    Polytope(RatePolytope),
    /// Some bound has a negative right-hand side, so no nonnegative rate
    /// tuple satisfies the catalog.
    Empty,
}

impl Instantiation {
    pub fn polytope(self) -> Option<RatePolytope> {
        match self {
            Instantiation::Polytope(p) => Some(p),
            Instantiation::Empty => None,
        }
    }
}

/// A polyhedron over named rates, nonnegativity included.
#[derive(Clone, Debug, PartialEq)]
pub struct RatePolytope {
    pub rate_names: Vec<String>,
    pub system: HalfspaceSystem,
}

impl RatePolytope {
    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    /// Right-hand side of the first row that bounds exactly the given rate
    /// set from above.
    pub fn rhs_of(&self, rates: &[&str]) -> Option<f64> {
        let want: Vec<f64> = self.rate_names.iter().map(|n| if rates.contains(&n.as_str()) { 1.0 } else { 0.0 }).collect();
        self.system.rows().iter().find(|r| r.a == want).map(|r| r.b)
    }
}

/// Projects a split-rate polytope onto the per-user totals.
///
/// The last member of each group is rewritten as `total - others`, the
/// remaining members are eliminated by Fourier-Motzkin, and redundant rows
/// are pruned. A group with no members pins its total to zero.
pub fn project_to_totals(poly: &RatePolytope, recombination: &[Vec<usize>; 3]) -> RatePolytope {
    RatePolytope {
        rate_names: ["R1", "R2", "R3"].iter().map(|s| s.to_string()).collect(),
        system: polytope::prune_redundant(&eliminate_to_totals(poly, recombination)),
    }
}

/// [`project_to_totals`] without the final pruning pass: same polyhedron,
/// possibly with redundant rows.
pub fn eliminate_to_totals(poly: &RatePolytope, recombination: &[Vec<usize>; 3]) -> HalfspaceSystem {
    let n = poly.dim();
    // new coordinates: [R1, R2, R3, eliminated split rates...]
    let mut extra: Vec<usize> = Vec::new();
    let mut last_of = [None; 3];
    for (g, members) in recombination.iter().enumerate() {
        if let Some((&last, rest)) = members.split_last() {
            last_of[g] = Some(last);
            extra.extend_from_slice(rest);
        }
    }
    let pos_of = |i: usize| extra.iter().position(|&e| e == i).map(|p| 3 + p);
    let dim = 3 + extra.len();
    let mut sys = HalfspaceSystem::new(dim);
    for row in poly.system.rows() {
        let mut a = vec![0.0; dim];
        for (g, members) in recombination.iter().enumerate() {
            let Some(last) = last_of[g] else { continue };
            let cl = row.a[last];
            a[g] = cl;
            for &m in members.iter().filter(|&&m| m != last) {
                a[pos_of(m).expect("member is an extra coordinate")] = row.a[m] - cl;
            }
        }
        debug_assert!((0..n).all(|i| recombination.iter().any(|g| g.contains(&i)) || row.a[i] == 0.0));
        sys.push(Halfspace::new(a, row.b)).expect("finite row");
    }
    for g in 0..3 {
        if last_of[g].is_none() {
            let mut a = vec![0.0; dim];
            a[g] = 1.0;
            sys.push(Halfspace::new(a.clone(), 0.0)).expect("finite row");
            a[g] = -1.0;
            sys.push(Halfspace::new(a, 0.0)).expect("finite row");
        }
    }
    if extra.is_empty() {
        sys.cleaned()
    } else {
        polytope::project_out(&sys, &(3..dim).collect::<Vec<_>>())
    }
}
