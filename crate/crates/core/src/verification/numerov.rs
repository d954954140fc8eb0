//! Forward eigenvalue solver for `−ψ″ + Vψ = Eψ` on a sampled potential.
//!
//! Eigenvalues are bracketed by node counting (the outward Numerov solution
//! from `ψ(x_min) = 0` has as many nodes as there are levels below `E`),
//! then refined on the discrete Wronskian between the outward solution and
//! an inward one started from `ψ(x_max) = 0`, matched at the right classical
//! turning point.

use crate::error::{Error, Result};
use crate::numerics::Grid;

/// Absolute floor of the energy bisection.
pub const ENERGY_FLOOR: f64 = 1e-10;
/// Edge values of `|V|` above this fraction of `max|V|` are rejected.
pub const TAIL_FRACTION: f64 = 1e-2;

const RESCALE: f64 = 1e150;

struct Numerov<'a> {
    v: &'a [f64],
    h2: f64,
}

impl Numerov<'_> {
    fn weight(&self, i: usize, e: f64) -> f64 {
        1.0 - self.h2 / 12.0 * (self.v[i] - e)
    }

    fn step(&self, prev: f64, cur: f64, i_prev: usize, i: usize, i_next: usize, e: f64) -> f64 {
        let g = self.v[i] - e;
        (2.0 * cur * (1.0 + 5.0 * self.h2 / 12.0 * g) - prev * self.weight(i_prev, e)) / self.weight(i_next, e)
    }

    /// Nodes of the outward solution over the whole grid.
    fn nodes(&self, e: f64) -> usize {
        let n = self.v.len();
        let (mut prev, mut cur) = (0.0, 1e-30);
        let mut count = 0;
        for i in 1..n - 1 {
            let next = self.step(prev, cur, i - 1, i, i + 1, e);
            if next == 0.0 || (next < 0.0) != (cur < 0.0) {
                count += 1;
            }
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE {
                prev /= RESCALE;
                cur /= RESCALE;
            }
        }
        count
    }

    /// Outward values at `m`, `m + 1`.
    fn outward(&self, e: f64, m: usize) -> (f64, f64) {
        let (mut prev, mut cur) = (0.0, 1e-30);
        for i in 1..=m {
            let next = self.step(prev, cur, i - 1, i, i + 1, e);
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE {
                prev /= RESCALE;
                cur /= RESCALE;
            }
        }
        (prev, cur)
    }

    /// Inward values at `m`, `m + 1`.
    fn inward(&self, e: f64, m: usize) -> (f64, f64) {
        let n = self.v.len();
        let (mut prev, mut cur) = (0.0, 1e-30);
        for i in (m + 1..n - 1).rev() {
            let next = self.step(prev, cur, i + 1, i, i - 1, e);
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE {
                prev /= RESCALE;
                cur /= RESCALE;
            }
        }
        (cur, prev)
    }

    fn turning_point(&self, e: f64) -> usize {
        let n = self.v.len();
        let m = self.v.iter().rposition(|&v| v < e).unwrap_or(n / 2);
        m.clamp(2, n - 3)
    }

    /// Discrete Wronskian of the outward and inward solutions, unit-scaled.
    fn mismatch(&self, e: f64) -> f64 {
        let m = self.turning_point(e);
        let (o0, o1) = self.outward(e, m);
        let (i0, i1) = self.inward(e, m);
        let so = o0.abs() + o1.abs();
        let si = i0.abs() + i1.abs();
        (o1 * i0 - o0 * i1) / (so * si)
    }

    /// Root of the mismatch in `[lo, hi]`, where exactly one level lies.
    fn refine(&self, mut lo: f64, mut hi: f64, target: usize) -> f64 {
        let mut f_lo = self.mismatch(lo);
        let f_hi = self.mismatch(hi);
        let use_wronskian = f_lo.is_finite() && f_hi.is_finite() && f_lo * f_hi < 0.0;
        while hi - lo > ENERGY_FLOOR {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let below = if use_wronskian {
                let f = self.mismatch(mid);
                let below = f * f_lo > 0.0;
                if below {
                    f_lo = f;
                }
                below
            } else {
                self.nodes(mid) <= target
            };
            if below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// The `count` lowest eigenvalues of `−ψ″ + Vψ = Eψ`, ascending.
pub fn numerov_eigenvalues(v: &[f64], grid: &Grid, count: usize) -> Result<Vec<f64>> {
    if v.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: v.len(),
        });
    }
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tail = v[0].abs().max(v[v.len() - 1].abs());
    if peak > 0.0 && tail > TAIL_FRACTION * peak {
        return Err(Error::NonDecayedTail { tail });
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let solver = Numerov {
        v,
        h2: grid.spacing() * grid.spacing(),
    };
    let v_min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let top = -ENERGY_FLOOR;
    let available = if v_min < top { solver.nodes(top) } else { 0 };
    if available < count {
        return Err(Error::NotEnoughStates {
            found: available,
            requested: count,
        });
    }
    let mut levels = Vec::with_capacity(count);
    for target in 0..count {
        // bracket with nodes(lo) = target and nodes(hi) = target + 1
        let (mut lo, mut n_lo) = (v_min, 0);
        let (mut hi, mut n_hi) = (top, available);
        while !(n_lo == target && n_hi == target + 1) && hi - lo > ENERGY_FLOOR {
            let mid = 0.5 * (lo + hi);
            let nodes = solver.nodes(mid);
            if nodes <= target {
                lo = mid;
                n_lo = nodes;
            } else {
                hi = mid;
                n_hi = nodes;
            }
        }
        levels.push(solver.refine(lo, hi, target));
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        grid.points().into_iter().map(f).collect()
    }

    #[test]
    fn single_well() {
        let g = Grid::new(-10.0, 10.0, 2001).unwrap();
        let v = sampled(&g, |x| -2.0 / x.cosh().powi(2));
        let e = numerov_eigenvalues(&v, &g, 1).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-4, "{e:?}");
    }

    #[test]
    fn two_soliton_levels() {
        let g = Grid::new(-10.0, 10.0, 2001).unwrap();
        let v = sampled(&g, |x| -6.0 / x.cosh().powi(2));
        let e = numerov_eigenvalues(&v, &g, 2).unwrap();
        assert!((e[0] + 4.0).abs() < 1e-4 && (e[1] + 1.0).abs() < 1e-4, "{e:?}");
        assert!(matches!(
            numerov_eigenvalues(&v, &g, 3),
            Err(Error::NotEnoughStates { found: 2, requested: 3 })
        ));
    }

    #[test]
    fn free_space_has_no_levels() {
        let g = Grid::new(-5.0, 5.0, 101).unwrap();
        let v = vec![0.0; g.len()];
        assert!(matches!(
            numerov_eigenvalues(&v, &g, 1),
            Err(Error::NotEnoughStates { found: 0, .. })
        ));
        assert_eq!(numerov_eigenvalues(&v, &g, 0).unwrap(), Vec::<f64>::new());
    }

    #[test]
    fn undecayed_tail_rejected() {
        let g = Grid::new(-1.0, 1.0, 101).unwrap();
        let v = sampled(&g, |x| -2.0 / x.cosh().powi(2));
        assert!(matches!(numerov_eigenvalues(&v, &g, 1), Err(Error::NonDecayedTail { .. })));
    }

    #[test]
    fn harmonic_box_against_closed_form() {
        // deep truncated oscillator: levels −W + (2n + 1)
        let g = Grid::new(-12.0, 12.0, 4801).unwrap();
        let v = sampled(&g, |x| (x * x - 40.0).min(0.0));
        let e = numerov_eigenvalues(&v, &g, 3).unwrap();
        for (n, got) in e.iter().enumerate() {
            let want = -40.0 + (2 * n + 1) as f64;
            assert!((got - want).abs() < 1e-5, "n={n}: {got}");
        }
    }
}
