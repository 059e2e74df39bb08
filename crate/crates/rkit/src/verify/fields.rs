//! Seeded test-field generators for the verification suite.
//!
//! Random fields are sums of 1–5 Gaussian bumps multiplied by a smoothstep
//! window that vanishes identically near the grid boundary: smooth,
//! Lipschitz-controlled profiles with exact zero padding, so integer-cell
//! translations stay inside the support margin. Bump parameters live in
//! continuum coordinates, which lets the same profile be resampled at any
//! spacing for grid-refinement comparisons.

use crate::grid::{Field1D, Field2D, Grid1D, Grid2D};
use crate::Result;
use rand::Rng;

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// One Gaussian bump `height * exp(-((x-center)/width)²)`.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

/// Sum of bumps restricted to a window `[lo, hi]` by a C¹ ramp of width
/// `ramp`; identically zero outside the window.
#[derive(Debug, Clone)]
pub struct BumpProfile {
    pub bumps: Vec<Bump>,
    pub lo: f64,
    pub hi: f64,
    pub ramp: f64,
}

impl BumpProfile {
    /// Seeded random profile supported inside `[lo, hi]`.
    pub fn random(rng: &mut impl Rng, lo: f64, hi: f64) -> Self {
        let span = hi - lo;
        let count = rng.gen_range(1..=5);
        let bumps = (0..count)
            .map(|_| Bump {
                center: lo + span * rng.gen_range(0.25..0.75),
                width: span * rng.gen_range(0.02..0.12),
                height: rng.gen_range(0.2..2.0),
            })
            .collect();
        BumpProfile { bumps, lo, hi, ramp: span / 8.0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        let window = smoothstep((x - self.lo) / self.ramp) * smoothstep((self.hi - x) / self.ramp);
        if window == 0.0 {
            return 0.0;
        }
        let sum: f64 = self
            .bumps
            .iter()
            .map(|b| {
                let t = (x - b.center) / b.width;
                b.height * (-t * t).exp()
            })
            .sum();
        sum * window
    }

    pub fn sample(&self, grid: Grid1D) -> Result<Field1D> {
        Field1D::sample(grid, |x| self.eval(x))
    }

    /// Upper bound on the derivative of the windowed profile.
    pub fn lipschitz_bound(&self) -> f64 {
        let peak: f64 = self.bumps.iter().map(|b| b.height).sum();
        let slope: f64 = self
            .bumps
            .iter()
            .map(|b| b.height * (2.0f64).sqrt() * (-0.5f64).exp() / b.width)
            .sum();
        slope + peak * 1.5 / self.ramp
    }
}

/// Separable 2D bump profile with windows in both axes.
#[derive(Debug, Clone)]
pub struct BumpProfile2D {
    pub x: BumpProfile,
    pub y: BumpProfile,
    pub cross: Vec<(Bump, Bump)>,
}

impl BumpProfile2D {
    pub fn random(rng: &mut impl Rng, xlo: f64, xhi: f64, ylo: f64, yhi: f64) -> Self {
        let count = rng.gen_range(1..=4);
        let cross = (0..count)
            .map(|_| {
                (
                    Bump {
                        center: xlo + (xhi - xlo) * rng.gen_range(0.25..0.75),
                        width: (xhi - xlo) * rng.gen_range(0.04..0.15),
                        height: rng.gen_range(0.3..1.5),
                    },
                    Bump {
                        center: ylo + (yhi - ylo) * rng.gen_range(0.25..0.75),
                        width: (yhi - ylo) * rng.gen_range(0.08..0.3),
                        height: 1.0,
                    },
                )
            })
            .collect();
        BumpProfile2D {
            x: BumpProfile { bumps: Vec::new(), lo: xlo, hi: xhi, ramp: (xhi - xlo) / 8.0 },
            y: BumpProfile { bumps: Vec::new(), lo: ylo, hi: yhi, ramp: (yhi - ylo) / 8.0 },
            cross,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if x <= self.x.lo || x >= self.x.hi || y <= self.y.lo || y >= self.y.hi {
            return 0.0;
        }
        let wx = smoothstep((x - self.x.lo) / self.x.ramp) * smoothstep((self.x.hi - x) / self.x.ramp);
        let wy = smoothstep((y - self.y.lo) / self.y.ramp) * smoothstep((self.y.hi - y) / self.y.ramp);
        if wx == 0.0 || wy == 0.0 {
            return 0.0;
        }
        let sum: f64 = self
            .cross
            .iter()
            .map(|(bx, by)| {
                let tx = (x - bx.center) / bx.width;
                let ty = (y - by.center) / by.width;
                bx.height * (-tx * tx - ty * ty).exp()
            })
            .sum();
        sum * wx * wy
    }

    pub fn sample(&self, grid: Grid2D) -> Result<Field2D> {
        Field2D::sample(grid, |x, y| self.eval(x, y))
    }
}

/// Nonnegative piecewise-linear profile with compact support: knots at
/// continuum positions, zero at both ends.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    pub knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    /// Random multi-peak profile on `[lo, hi]` with `peaks >= 2` local
    /// maxima of distinct heights, so level multiplicities genuinely vary.
    pub fn random_peaks(rng: &mut impl Rng, lo: f64, hi: f64, peaks: usize) -> Self {
        let peaks = peaks.max(2);
        let interior = 2 * peaks - 1;
        let mut xs: Vec<f64> = (0..interior)
            .map(|_| lo + (hi - lo) * rng.gen_range(0.05..0.95))
            .collect();
        xs.sort_unstable_by(f64::total_cmp);
        // Enforce a minimal gap so slopes stay bounded.
        let min_gap = (hi - lo) * 0.02;
        for i in 1..xs.len() {
            if xs[i] - xs[i - 1] < min_gap {
                xs[i] = xs[i - 1] + min_gap;
            }
        }
        let mut knots = vec![(lo, 0.0)];
        for (k, &x) in xs.iter().enumerate() {
            let y = if k % 2 == 0 {
                rng.gen_range(1.0..2.0) + 0.1 * k as f64
            } else {
                rng.gen_range(0.1..0.6)
            };
            knots.push((x, y));
        }
        knots.push((hi, 0.0));
        PiecewiseLinear { knots }
    }

    /// The symmetric tent of height `half_width` on `[center-half_width,
    /// center+half_width]` (slopes exactly ±1).
    pub fn tent(center: f64, half_width: f64) -> Self {
        PiecewiseLinear {
            knots: vec![
                (center - half_width, 0.0),
                (center, half_width),
                (center + half_width, 0.0),
            ],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0].0 || x >= k[k.len() - 1].0 {
            return 0.0;
        }
        let mut i = 0;
        while k[i + 1].0 < x {
            i += 1;
        }
        let (x0, y0) = k[i];
        let (x1, y1) = k[i + 1];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn sample(&self, grid: Grid1D) -> Result<Field1D> {
        Field1D::sample(grid, |x| self.eval(x))
    }
}

/// Centered grid shifted by an irregular fraction of a cell, so samples of
/// an even function take pairwise-distinct values. Symmetric sampling would
/// duplicate every value, and duplicate merges concentrate each level drop
/// of a coupled rearrangement into a single cell gap, masking the
/// support-doubling that the continuum object exhibits.
pub fn offset_grid(half: f64, h: f64) -> Result<Grid1D> {
    let n = ((2.0 * half / h).round() as usize).max(2);
    Grid1D::new(-half + 0.5 * h + 0.31 * h, h, n)
}

/// `exp(-x²)` sampled on an offset grid over `[-half, half]`.
pub fn offset_gaussian(half: f64, h: f64) -> Result<Field1D> {
    Field1D::sample(offset_grid(half, h)?, |x| (-x * x).exp())
}

pub fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// The cubic-nonlinearity ground-state profile of mass `alpha`:
/// `a sech(bx)` with `b = alpha/4`, `a² = 2b²`; its energy is `-alpha³/96`.
pub fn cubic_soliton(alpha: f64) -> impl Fn(f64) -> f64 {
    let b = alpha / 4.0;
    let a = (2.0 * b * b).sqrt();
    move |x: f64| a * sech(b * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bump_profile_vanishes_at_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = BumpProfile::random(&mut rng, -8.0, 8.0);
        assert_eq!(p.eval(-8.0), 0.0);
        assert_eq!(p.eval(8.0), 0.0);
        assert_eq!(p.eval(-9.0), 0.0);
        assert!(p.eval(0.0) >= 0.0);
    }

    #[test]
    fn bump_sampling_is_grid_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = BumpProfile::random(&mut rng, -8.0, 8.0);
        let coarse = p.sample(Grid1D::centered(0.25, 64).unwrap()).unwrap();
        let fine = p.sample(Grid1D::centered(0.125, 128).unwrap()).unwrap();
        // Every other fine cell center is offset by h/4 from a coarse center.
        assert!(coarse.values().iter().any(|v| *v > 0.0));
        assert!(fine.values().iter().any(|v| *v > 0.0));
    }

    #[test]
    fn piecewise_linear_tent() {
        let t = PiecewiseLinear::tent(2.0, 2.0);
        assert_eq!(t.eval(2.0), 2.0);
        assert_eq!(t.eval(0.0), 0.0);
        assert_eq!(t.eval(3.0), 1.0);
    }

    #[test]
    fn offset_gaussian_has_distinct_values() {
        let u = offset_gaussian(8.0, 0.05).unwrap();
        let mut vals = u.values().to_vec();
        vals.sort_unstable_by(f64::total_cmp);
        let dupes = vals.windows(2).filter(|w| w[0] == w[1]).count();
        assert_eq!(dupes, 0);
    }

    #[test]
    fn soliton_mass_matches_alpha() {
        let grid = Grid1D::symmetric_domain(120.0, 0.05).unwrap();
        let u = Field1D::sample(grid, cubic_soliton(1.0)).unwrap();
        assert!((u.mass() - 1.0).abs() < 1e-6);
    }
}
