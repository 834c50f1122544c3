//! Small-dimension polyhedra: Fourier-Motzkin projection, vertex
//! enumeration, redundancy pruning, support functions, and 2D/3D point-set
//! hulls. Everything is floating point with per-operation tolerances.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::linalg;
use crate::lp::{self, LpOutcome};

/// Feasibility slack for vertex candidates.
pub const FEAS_TOL: f64 = 1e-9;
/// Vertices closer than this (max-norm) are merged.
pub const DEDUP_TOL: f64 = 1e-8;
/// Normalized rows closer than this are treated as the same direction.
pub const MERGE_TOL: f64 = 1e-12;
/// Systems with more rows than this get an LP redundancy pass before any
/// vertex enumeration; enumeration cost grows as `rows^dim`.
pub const LP_PRUNE_AT: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PolytopeError {
    #[error("row has {got} coefficients, system has dimension {want}")]
    DimensionMismatch { want: usize, got: usize },
    #[error("non-finite halfspace entry")]
    NonFinite,
    #[error("polyhedron is unbounded in the requested direction")]
    Unbounded,
    #[error("polyhedron is empty")]
    Empty,
}

/// `a . x <= b`
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Halfspace {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Self { a, b }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.a, x)
    }

    pub fn is_trivial(&self) -> bool {
        self.a.iter().all(|&v| v == 0.0)
    }

    /// Scales so the largest coefficient magnitude is 1. Rows with no
    /// nonzero coefficient are left alone.
    pub fn normalized(mut self) -> Self {
        let m = self.a.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
        if m > 0.0 {
            for v in &mut self.a {
                *v /= m;
            }
            self.b /= m;
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalfspaceSystem {
    dim: usize,
    rows: Vec<Halfspace>,
}

impl HalfspaceSystem {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "halfspace system needs dimension >= 1");
        Self { dim, rows: Vec::new() }
    }

    pub fn from_rows(dim: usize, rows: Vec<Halfspace>) -> Result<Self, PolytopeError> {
        let mut s = Self::new(dim);
        for r in rows {
            s.push(r)?;
        }
        Ok(s)
    }

    /// The box `lo <= x_i <= hi`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        let mut s = Self::new(dim);
        for i in 0..dim {
            let mut a = vec![0.0; dim];
            a[i] = 1.0;
            s.rows.push(Halfspace::new(a.clone(), hi));
            a[i] = -1.0;
            s.rows.push(Halfspace::new(a, -lo));
        }
        s
    }

    pub fn push(&mut self, row: Halfspace) -> Result<(), PolytopeError> {
        if row.a.len() != self.dim {
            return Err(PolytopeError::DimensionMismatch { want: self.dim, got: row.a.len() });
        }
        if !row.b.is_finite() || row.a.iter().any(|v| !v.is_finite()) {
            return Err(PolytopeError::NonFinite);
        }
        self.rows.push(row);
        Ok(())
    }

    /// Appends `-x_i <= 0` for every coordinate.
    pub fn with_nonnegativity(mut self) -> Self {
        for i in 0..self.dim {
            let mut a = vec![0.0; self.dim];
            a[i] = -1.0;
            self.rows.push(Halfspace::new(a, 0.0));
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Halfspace] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.rows.iter().all(|r| r.eval(x) <= r.b + tol * (1.0 + libm::fabs(r.b)))
    }

    /// Normalizes every row, drops trivially satisfied ones, keeps a single
    /// witness of trivial infeasibility, and merges parallel rows (keeping
    /// the tighter right-hand side).
    pub fn cleaned(&self) -> Self {
        let rows = clean_rows(self.rows.iter().cloned().map(|r| (r, 0u128)).collect(), self.dim);
        Self { dim: self.dim, rows: rows.into_iter().map(|(r, _)| r).collect() }
    }
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(p, q)| p * q).sum()
}

fn clean_rows(rows: Vec<(Halfspace, u128)>, dim: usize) -> Vec<(Halfspace, u128)> {
    let mut out: Vec<(Halfspace, u128)> = Vec::with_capacity(rows.len());
    let mut infeasible = false;
    for (r, h) in rows {
        let r = r.normalized();
        if r.is_trivial() {
            if r.b < -FEAS_TOL && !infeasible {
                infeasible = true;
                out.push((Halfspace::new(vec![0.0; dim], r.b), h));
            }
            continue;
        }
        let dup = out.iter_mut().find(|(o, _)| {
            !o.is_trivial() && o.a.iter().zip(&r.a).all(|(p, q)| libm::fabs(p - q) <= MERGE_TOL)
        });
        match dup {
            Some((o, oh)) => {
                if r.b < o.b {
                    o.b = r.b;
                    *oh = h;
                }
            }
            None => out.push((r, h)),
        }
    }
    out
}

/// Result of eliminating one variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Elimination {
    /// Projection onto the remaining coordinates (original order, the
    /// eliminated one removed).
    pub system: HalfspaceSystem,
    /// The eliminated variable had no upper bound among the input rows.
    pub unbounded_above: bool,
    /// The eliminated variable had no lower bound among the input rows.
    pub unbounded_below: bool,
}

/// Fourier-Motzkin elimination of coordinate `var`.
pub fn fm_eliminate(sys: &HalfspaceSystem, var: usize) -> Elimination {
    assert!(var < sys.dim, "fm_eliminate: variable index out of range");
    assert!(sys.dim >= 2, "fm_eliminate: cannot eliminate the last coordinate");
    let rows = seed_history(sys);
    let above = rows.iter().any(|(r, _)| r.a[var] > 0.0);
    let below = rows.iter().any(|(r, _)| r.a[var] < 0.0);
    let rows = eliminate(rows, sys.dim, var, 1);
    Elimination {
        system: HalfspaceSystem { dim: sys.dim - 1, rows: rows.into_iter().map(|(r, _)| r).collect() },
        unbounded_above: !above,
        unbounded_below: !below,
    }
}

/// Eliminates several coordinates (any order of `vars`) with Chernikov's
/// history rule: after `k` eliminations a row combining more than `k + 1`
/// original rows is redundant and is dropped.
pub fn project_out(sys: &HalfspaceSystem, vars: &[usize]) -> HalfspaceSystem {
    let mut order: Vec<usize> = vars.to_vec();
    order.sort_unstable();
    order.dedup();
    assert!(order.len() < sys.dim, "project_out: must keep at least one coordinate");
    assert!(order.last().is_none_or(|&v| v < sys.dim), "project_out: variable index out of range");
    let mut rows = seed_history(sys);
    let mut dim = sys.dim;
    for (k, &v) in order.iter().rev().enumerate() {
        rows = eliminate(rows, dim, v, k + 1);
        dim -= 1;
        if rows.len() > LP_PRUNE_AT {
            rows = drop_redundant_lp(rows);
        }
    }
    HalfspaceSystem { dim, rows: rows.into_iter().map(|(r, _)| r).collect() }
}

fn seed_history(sys: &HalfspaceSystem) -> Vec<(Halfspace, u128)> {
    let track = sys.rows.len() <= 128;
    let rows = sys
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.clone(), if track { 1u128 << i } else { 0 }))
        .collect();
    clean_rows(rows, sys.dim)
}

fn eliminate(rows: Vec<(Halfspace, u128)>, dim: usize, var: usize, step: usize) -> Vec<(Halfspace, u128)> {
    let mut zero = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (mut r, h) in rows {
        let c = r.a[var];
        if libm::fabs(c) <= MERGE_TOL {
            r.a[var] = 0.0;
            zero.push((r, h));
        } else if c > 0.0 {
            pos.push((r, h));
        } else {
            neg.push((r, h));
        }
    }
    let mut out = zero;
    for (p, hp) in &pos {
        for (n, hn) in &neg {
            let h = hp | hn;
            if h != 0 && (h.count_ones() as usize) > step + 1 {
                continue;
            }
            let (cp, cn) = (p.a[var], -n.a[var]);
            let a: Vec<f64> = p.a.iter().zip(&n.a).map(|(x, y)| cn * x + cp * y).collect();
            let mut r = Halfspace::new(a, cn * p.b + cp * n.b);
            r.a[var] = 0.0;
            out.push((r, h));
        }
    }
    for (r, _) in &mut out {
        r.a.remove(var);
    }
    clean_rows(out, dim - 1)
}

/// Removes rows implied by the remaining ones, one at a time, using
/// `max a_i.x` over the other rows. Rows are kept whenever the LP is
/// inconclusive, and an infeasible system is returned unchanged.
fn drop_redundant_lp(mut rows: Vec<(Halfspace, u128)>) -> Vec<(Halfspace, u128)> {
    let mut i = 0;
    while i < rows.len() {
        let others: Vec<&Halfspace> = rows.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, (r, _))| r).collect();
        let (r, _) = &rows[i];
        match lp::maximize(&others, &r.a) {
            LpOutcome::Optimal(v) if v <= r.b + FEAS_TOL * (1.0 + libm::fabs(r.b)) => {
                rows.remove(i);
            }
            LpOutcome::Infeasible => return rows,
            _ => i += 1,
        }
    }
    rows
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All basic feasible points: every `dim`-subset of rows is solved and the
/// solution kept when it satisfies every row within [`FEAS_TOL`]. Singular
/// subsets are skipped. Points within [`DEDUP_TOL`] are merged, keeping the
/// lexicographically smallest. The result is sorted lexicographically.
pub fn enumerate_vertices(sys: &HalfspaceSystem) -> Vec<Vec<f64>> {
    let d = sys.dim;
    let rows: Vec<&Halfspace> = sys.rows.iter().filter(|r| !r.is_trivial()).collect();
    if sys.rows.iter().any(|r| r.is_trivial() && r.b < -FEAS_TOL) {
        return Vec::new();
    }
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut m = vec![0.0; d * d];
    let mut x = vec![0.0; d];
    for_each_combination(rows.len(), d, |pick| {
        for (r, &i) in pick.iter().enumerate() {
            m[r * d..(r + 1) * d].copy_from_slice(&rows[i].a);
            x[r] = rows[i].b;
        }
        if !linalg::solve_in_place(&mut m, &mut x, d) {
            return;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return;
        }
        if rows.iter().all(|r| r.eval(&x) <= r.b + FEAS_TOL * (1.0 + libm::fabs(r.b))) {
            found.push(x.clone());
        }
    });
    dedup_points(found)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn dedup_points(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for p in &mut pts {
        for v in p.iter_mut() {
            if *v == 0.0 {
                *v = 0.0;
            }
        }
    }
    pts.sort_by(|a, b| lex_cmp(a, b));
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    for p in pts {
        let near = out.iter().any(|q| q.iter().zip(&p).all(|(a, b)| libm::fabs(a - b) <= DEDUP_TOL));
        if !near {
            out.push(p);
        }
    }
    out
}

/// Affine rank of a point set.
fn affine_rank(points: &[&Vec<f64>], dim: usize) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let scale = points.iter().flat_map(|p| p.iter()).fold(1.0f64, |m, v| m.max(libm::fabs(*v)));
    let rows = points.len() - 1;
    let mut m = Vec::with_capacity(rows * dim);
    for p in &points[1..] {
        for j in 0..dim {
            m.push(p[j] - points[0][j]);
        }
    }
    linalg::rank(&mut m, rows, dim, 1e-7 * scale)
}

/// True when the recession cone `{d : A d <= 0}` is `{0}`.
pub fn is_bounded(sys: &HalfspaceSystem) -> bool {
    recession_directions(sys).is_empty()
}

/// Nonzero vertices of `{A d <= 0, -1 <= d <= 1}`.
fn recession_directions(sys: &HalfspaceSystem) -> Vec<Vec<f64>> {
    let mut cone = HalfspaceSystem::cube(sys.dim, -1.0, 1.0);
    for r in sys.rows.iter().filter(|r| !r.is_trivial()) {
        cone.rows.push(Halfspace::new(r.a.clone(), 0.0).normalized());
    }
    enumerate_vertices(&cone).into_iter().filter(|v| v.iter().any(|x| libm::fabs(*x) > 1e-7)).collect()
}

/// Drops rows that do not define a facet. Expects a bounded system.
///
/// For a full-dimensional polytope a row is kept iff the vertices tight on
/// it have affine rank `dim - 1`. Otherwise a row is dropped when the
/// system without it is still bounded and all of its vertices satisfy the
/// row.
pub fn prune_redundant(sys: &HalfspaceSystem) -> HalfspaceSystem {
    let mut sys = sys.cleaned();
    if sys.rows.len() > LP_PRUNE_AT {
        let rows = drop_redundant_lp(sys.rows.into_iter().map(|r| (r, 0u128)).collect());
        sys.rows = rows.into_iter().map(|(r, _)| r).collect();
    }
    let verts = enumerate_vertices(&sys);
    if verts.is_empty() {
        return sys;
    }
    let d = sys.dim;
    let all: Vec<&Vec<f64>> = verts.iter().collect();
    if affine_rank(&all, d) == d {
        let mut kept: Vec<Halfspace> = Vec::new();
        let mut seen: Vec<Vec<usize>> = Vec::new();
        for r in &sys.rows {
            let tight: Vec<usize> = (0..verts.len())
                .filter(|&i| libm::fabs(r.eval(&verts[i]) - r.b) <= 10.0 * FEAS_TOL * (1.0 + libm::fabs(r.b)))
                .collect();
            if tight.is_empty() {
                continue;
            }
            let pts: Vec<&Vec<f64>> = tight.iter().map(|&i| &verts[i]).collect();
            if affine_rank(&pts, d) + 1 == d && !seen.contains(&tight) {
                seen.push(tight);
                kept.push(r.clone());
            }
        }
        return HalfspaceSystem { dim: d, rows: kept };
    }
    let mut rows = sys.rows.clone();
    let mut i = 0;
    while i < rows.len() {
        let candidate = rows.remove(i);
        let rest = HalfspaceSystem { dim: d, rows: rows.clone() };
        let redundant = is_bounded(&rest) && {
            let vs = enumerate_vertices(&rest);
            !vs.is_empty() && vs.iter().all(|v| candidate.eval(v) <= candidate.b + FEAS_TOL * (1.0 + libm::fabs(candidate.b)))
        };
        if !redundant {
            rows.insert(i, candidate);
            i += 1;
        }
    }
    HalfspaceSystem { dim: d, rows }
}

/// `max { direction . x : x in sys }`.
pub fn support(sys: &HalfspaceSystem, direction: &[f64]) -> Result<f64, PolytopeError> {
    if direction.len() != sys.dim {
        return Err(PolytopeError::DimensionMismatch { want: sys.dim, got: direction.len() });
    }
    if direction.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let verts = enumerate_vertices(sys);
    if verts.is_empty() {
        return Err(PolytopeError::Empty);
    }
    if recession_directions(sys).iter().any(|d| dot(d, direction) > FEAS_TOL) {
        return Err(PolytopeError::Unbounded);
    }
    Ok(support_of_points(&verts, direction))
}

pub fn support_of_points<P: AsRef<[f64]>>(points: &[P], direction: &[f64]) -> f64 {
    points.iter().map(|p| dot(p.as_ref(), direction)).fold(f64::NEG_INFINITY, f64::max)
}

/// The 26 nonzero directions of `{-1, 0, 1}^3`, normalized.
pub fn cube_directions() -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(26);
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -1i32..=1 {
                if (i, j, k) == (0, 0, 0) {
                    continue;
                }
                let n = libm::sqrt((i * i + j * j + k * k) as f64);
                out.push([i as f64 / n, j as f64 / n, k as f64 / n]);
            }
        }
    }
    out
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull by Andrew's monotone chain, counterclockwise, starting from
/// the lexicographically smallest point, collinear points removed.
pub fn hull2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| lex_cmp(a, b));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn canon(p: [f64; 3]) -> [f64; 3] {
    p.map(|v| if v == 0.0 { 0.0 } else { v })
}

/// Exact coordinatewise maxima (no tolerance), sorted lexicographically.
/// Duplicates collapse to one point.
///
/// Associative: `pareto_exact(pareto_exact(A) + B) == pareto_exact(A + B)`,
/// which is what makes parallel accumulation order-independent.
pub fn pareto_exact(points: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let mut pts: Vec<[f64; 3]> = points.iter().map(|&p| canon(p)).collect();
    assert!(pts.iter().all(|p| p.iter().all(|v| !v.is_nan())), "pareto: NaN coordinate");
    // x desc, then y desc, then z desc: anything that can dominate a point
    // comes before it.
    pts.sort_by(|a, b| lex_cmp(b, a));
    pts.dedup();
    let mut stair: BTreeMap<Key, f64> = BTreeMap::new();
    let mut out = Vec::new();
    for p in pts {
        let dominated = stair.range(Key(p[1])..).next().is_some_and(|(_, &z)| z >= p[2]);
        if dominated {
            continue;
        }
        let stale: Vec<Key> = stair.range(..=Key(p[1])).rev().take_while(|(_, &z)| z <= p[2]).map(|(k, _)| *k).collect();
        for k in stale {
            stair.remove(&k);
        }
        stair.insert(Key(p[1]), p[2]);
        out.push(p);
    }
    out.sort_by(|a, b| lex_cmp(a, b));
    out
}

/// Maximal points with tolerance: `p` is dropped when some other point `q`
/// has `q_i >= p_i - tol` everywhere and exceeds `p` by more than `tol`
/// somewhere. Of a cluster of points equal within `tol`, the
/// lexicographically greatest survives. Sorted lexicographically.
pub fn pareto3d(points: &[[f64; 3]], tol: f64) -> Vec<[f64; 3]> {
    let exact = pareto_exact(points);
    if tol <= 0.0 || exact.len() <= 1 {
        return exact;
    }
    let n = exact.len();
    let mut by_axis: [Vec<usize>; 3] = core::array::from_fn(|_| (0..n).collect());
    for (k, order) in by_axis.iter_mut().enumerate() {
        order.sort_by(|&i, &j| exact[i][k].total_cmp(&exact[j][k]).then(i.cmp(&j)));
    }
    let mut rank = [vec![0usize; n], vec![0usize; n], vec![0usize; n]];
    for k in 0..3 {
        for (r, &i) in by_axis[k].iter().enumerate() {
            rank[k][i] = r;
        }
    }
    let beats = |q: &[f64; 3], p: &[f64; 3]| -> bool {
        if !(0..3).all(|i| q[i] >= p[i] - tol) {
            return false;
        }
        if (0..3).any(|i| q[i] > p[i] + tol) {
            return true;
        }
        lex_cmp(q, p) == Ordering::Greater
    };
    let mut keep = vec![true; n];
    for (pi, p) in exact.iter().enumerate() {
        'axes: for k in 0..3 {
            let r = rank[k][pi];
            let order = &by_axis[k];
            for &qi in order[..r].iter().rev() {
                if exact[qi][k] < p[k] - tol {
                    break;
                }
                if beats(&exact[qi], p) {
                    keep[pi] = false;
                    break 'axes;
                }
            }
            for &qi in &order[r + 1..] {
                if exact[qi][k] > p[k] + tol {
                    break;
                }
                if beats(&exact[qi], p) {
                    keep[pi] = false;
                    break 'axes;
                }
            }
        }
    }
    exact.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect()
}

/// Nonnegative rate triples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud3 {
    points: Vec<[f64; 3]>,
}

impl PointCloud3 {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rejects points with a coordinate below zero or non-finite.
    pub fn from_points(points: Vec<[f64; 3]>) -> Option<Self> {
        points.iter().all(|p| p.iter().all(|v| v.is_finite() && *v >= 0.0)).then_some(Self { points })
    }

    pub fn push(&mut self, p: [f64; 3]) -> bool {
        if p.iter().all(|v| v.is_finite() && *v >= 0.0) {
            self.points.push(canon(p));
            true
        } else {
            false
        }
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<[f64; 3]> {
        self.points
    }
}
