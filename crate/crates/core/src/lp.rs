//! Linear programs `max c.x  s.t.  A x <= b` with free `x` in a handful of
//! dimensions, solved through the dual `min b.y  s.t.  A^T y = c, y >= 0`.
//! The dual tableau has one row per primal coordinate, so each pivot costs
//! `O(dim * rows)`. Two-phase simplex with Bland's rule.

use alloc::vec;
use alloc::vec::Vec;

use crate::polytope::Halfspace;

const PIVOT_EPS: f64 = 1e-11;
const PHASE1_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(f64),
    Unbounded,
    Infeasible,
    /// Iteration cap hit (numerical cycling).
    Stalled,
}

struct Tableau {
    /// `m` rows of `cols + 1` entries, the last being the right-hand side.
    t: Vec<f64>,
    m: usize,
    cols: usize,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.at(pr, pc);
        for c in 0..w {
            self.t[pr * w + c] /= p;
        }
        for r in 0..self.m {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                self.t[r * w + c] -= f * self.t[pr * w + c];
            }
        }
        self.basis[pr] = pc;
    }

    /// Minimizes `cost . z` over columns `< allowed`. `Err(())` when
    /// unbounded, `Ok(false)` when the iteration cap is hit.
    fn minimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool, ()> {
        let cap = 50 * (self.cols + self.m) + 100;
        for _ in 0..cap {
            let duals: Vec<f64> = self.basis.iter().map(|&b| cost[b]).collect();
            let entering = (0..allowed).find(|&c| {
                if self.basis.contains(&c) {
                    return false;
                }
                let reduced = cost[c] - (0..self.m).map(|r| duals[r] * self.at(r, c)).sum::<f64>();
                reduced < -PIVOT_EPS
            });
            let Some(pc) = entering else { return Ok(true) };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, pc);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    let better = match best {
                        None => true,
                        Some((br, bv)) => ratio < bv || (ratio == bv && self.basis[r] < self.basis[br]),
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            let Some((pr, _)) = best else { return Err(()) };
            self.pivot(pr, pc);
        }
        Ok(false)
    }
}

/// `max c.x` over `rows`.
pub fn maximize(rows: &[&Halfspace], c: &[f64]) -> LpOutcome {
    let d = c.len();
    let n = rows.len();
    let cols = n + d;
    let w = cols + 1;
    let mut t = vec![0.0; d * w];
    for j in 0..d {
        let s = if c[j] < 0.0 { -1.0 } else { 1.0 };
        for (i, r) in rows.iter().enumerate() {
            t[j * w + i] = s * r.a[j];
        }
        t[j * w + n + j] = 1.0;
        t[j * w + cols] = s * c[j];
    }
    let mut tab = Tableau { t, m: d, cols, basis: (n..n + d).collect() };

    let mut phase1 = vec![0.0; cols];
    for v in &mut phase1[n..] {
        *v = 1.0;
    }
    match tab.minimize(&phase1, cols) {
        Err(()) => return LpOutcome::Stalled,
        Ok(false) => return LpOutcome::Stalled,
        Ok(true) => {}
    }
    let scale = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let residual: f64 = (0..d).filter(|&r| tab.basis[r] >= n).map(|r| tab.rhs(r)).sum();
    if residual > PHASE1_TOL * scale {
        // c is not a nonnegative combination of the rows
        return LpOutcome::Unbounded;
    }
    for r in 0..d {
        if tab.basis[r] >= n {
            if let Some(pc) = (0..n).find(|&k| libm::fabs(tab.at(r, k)) > PIVOT_EPS && !tab.basis.contains(&k)) {
                tab.pivot(r, pc);
            }
        }
    }

    let mut phase2 = vec![0.0; cols];
    for (i, r) in rows.iter().enumerate() {
        phase2[i] = r.b;
    }
    match tab.minimize(&phase2, n) {
        Err(()) => LpOutcome::Infeasible,
        Ok(false) => LpOutcome::Stalled,
        Ok(true) => LpOutcome::Optimal((0..d).map(|r| phase2[tab.basis[r]] * tab.rhs(r)).sum()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs(a: &[f64], b: f64) -> Halfspace {
        Halfspace::new(a.to_vec(), b)
    }

    #[test]
    fn unit_square() {
        let rows = [hs(&[1.0, 0.0], 1.0), hs(&[0.0, 1.0], 2.0), hs(&[-1.0, 0.0], 0.0), hs(&[0.0, -1.0], 0.0)];
        let r: Vec<&Halfspace> = rows.iter().collect();
        assert_eq!(maximize(&r, &[1.0, 1.0]), LpOutcome::Optimal(3.0));
        assert_eq!(maximize(&r, &[-1.0, 0.0]), LpOutcome::Optimal(0.0));
        assert_eq!(maximize(&r[..3], &[0.0, -1.0]), LpOutcome::Unbounded);
    }

    #[test]
    fn infeasible_and_degenerate() {
        let rows = [hs(&[1.0], -1.0), hs(&[-1.0], -1.0)];
        let r: Vec<&Halfspace> = rows.iter().collect();
        assert_eq!(maximize(&r, &[1.0]), LpOutcome::Infeasible);
        // many rows through one vertex
        let rows: Vec<Halfspace> = (0..20)
            .map(|k| {
                let t = k as f64 * 0.05;
                hs(&[1.0, t, 1.0 - t], 1.0)
            })
            .chain([hs(&[-1.0, 0.0, 0.0], 0.0), hs(&[0.0, -1.0, 0.0], 0.0), hs(&[0.0, 0.0, -1.0], 0.0)])
            .collect();
        let r: Vec<&Halfspace> = rows.iter().collect();
        let LpOutcome::Optimal(v) = maximize(&r, &[1.0, 1.0, 1.0]) else { panic!() };
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }
}
