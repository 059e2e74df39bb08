//! Uniform-grid function representation, quadrature, norms, finite-difference
//! derivatives, and level-set measurement.
//!
//! Fields are cell-centered samples: cell `i` sits at `x0 + i*h` and carries
//! measure `h`, so every "integral" here is an exact weighted sum over the
//! samples. Measure-theoretic quantities (`lp_norm`, `quadrature`) are
//! computed by summing terms in a value-sorted order, which makes them exact
//! functions of the value multiset: permuting the samples cannot change the
//! result by even one bit. Derivative seminorms use forward differences with
//! zero extension at both ends, the discrete stand-in for functions that
//! vanish at infinity.

use crate::error::{Error, Result};

/// Sum a set of terms independently of their original order.
///
/// Terms are sorted by total order and accumulated with Neumaier
/// compensation. Two inputs with equal multisets of terms produce
/// bit-identical results.
pub(crate) fn multiset_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what })
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter { what: "p", value: p });
    }
    Ok(())
}

/// One-dimensional uniform grid of cell centers `x0 + i*h`, `i = 0..n-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x0: f64,
    h: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x0: f64, h: f64, n: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter { what: "h", value: h });
        }
        if !x0.is_finite() {
            return Err(Error::NonFinite { what: "grid origin" });
        }
        if n == 0 {
            return Err(Error::InvalidParameter { what: "n", value: 0.0 });
        }
        Ok(Grid1D { x0, h, n })
    }

    /// Grid of `n` cells whose centers are symmetric about 0.
    pub fn centered(h: f64, n: usize) -> Result<Self> {
        let x0 = -0.5 * (n as f64 - 1.0) * h;
        Grid1D::new(x0, h, n)
    }

    /// Grid tiling `[-half, half]` with spacing `h` (cell-centered).
    pub fn symmetric_domain(half: f64, h: f64) -> Result<Self> {
        if !(half.is_finite() && half > 0.0) {
            return Err(Error::InvalidParameter { what: "half", value: half });
        }
        let n = ((2.0 * half / h).round() as usize).max(1);
        Grid1D::centered(h, n)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    /// Total length covered by the cells.
    pub fn length(&self) -> f64 {
        self.n as f64 * self.h
    }
}

/// Sampled function on a [`Grid1D`]. Values must be finite; rearrangement
/// kernels additionally require them nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field1D {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch {
                reason: format!("{} values on a {}-cell grid", values.len(), grid.n()),
            });
        }
        check_finite(&values, "field values")?;
        Ok(Field1D { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        let values = vec![0.0; grid.n()];
        Field1D { grid, values }
    }

    /// Sample `f` at the cell centers.
    pub fn sample(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n()).map(|i| f(grid.center(i))).collect();
        Field1D::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// Pointwise modulus, same grid.
    pub fn modulus(&self) -> Field1D {
        Field1D {
            grid: self.grid,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `h * sum |u_i|^p`, the p-th power integral.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        let h = self.h();
        let terms = self.values.iter().map(|v| h * pow_abs(*v, p)).collect();
        Ok(multiset_sum(terms))
    }

    /// Squared L2 norm (the mass `||u||^2`).
    pub fn mass(&self) -> f64 {
        self.lp_norm(2.0).expect("p = 2 is always valid")
    }

    /// `sum h * |du/h|^p` over forward differences, with one extra difference
    /// to 0 beyond each end (zero extension).
    pub fn gradient_seminorm(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        if self.n() < 2 {
            return Err(Error::DegenerateAxis { axis: 0, len: self.n() });
        }
        let h = self.h();
        let mut terms = Vec::with_capacity(self.n() + 1);
        let mut prev = 0.0;
        for &v in &self.values {
            terms.push(h * pow_abs((v - prev) / h, p));
            prev = v;
        }
        terms.push(h * pow_abs(prev / h, p));
        Ok(multiset_sum(terms))
    }

    /// `h * #{i : u_i > t}`, the super-level cell-counting measure.
    pub fn measure_above(&self, t: f64) -> f64 {
        self.count_above(t) as f64 * self.h()
    }

    pub fn count_above(&self, t: f64) -> usize {
        self.values.iter().filter(|v| **v > t).count()
    }

    /// Level-set measures at the given strictly increasing positive levels.
    pub fn distribution_profile(&self, levels: &[f64]) -> Result<DistributionProfile> {
        if levels.is_empty()
            || levels[0] <= 0.0
            || levels.windows(2).any(|w| w[1] <= w[0])
            || levels.iter().any(|l| !l.is_finite())
        {
            return Err(Error::LevelsNotIncreasing);
        }
        let measures = levels.iter().map(|l| self.measure_above(*l)).collect();
        DistributionProfile::new(levels.to_vec(), measures)
    }

    /// `h * sum phi(u_i)`. Requires `phi(0) = 0` so the implicit zero
    /// extension outside the grid contributes nothing.
    pub fn quadrature(&self, phi: impl Fn(f64) -> f64) -> Result<f64> {
        let at_zero = phi(0.0);
        if at_zero != 0.0 {
            return Err(Error::NonZeroPhiAtZero { value: at_zero });
        }
        let h = self.h();
        let terms = self.values.iter().map(|v| h * phi(*v)).collect();
        Ok(multiset_sum(terms))
    }

    /// Shift the sample array by `cells` (positive = rightward), padding with
    /// zeros. Values moved past the boundary must already be zero, otherwise
    /// the shift is rejected.
    pub fn shift_cells(&self, cells: i64) -> Result<Field1D> {
        let n = self.n();
        let k = cells.unsigned_abs() as usize;
        if k >= n {
            return Err(Error::InvalidParameter { what: "shift", value: cells as f64 });
        }
        let dropped: &[f64] = if cells >= 0 {
            &self.values[n - k..]
        } else {
            &self.values[..k]
        };
        if dropped.iter().any(|v| *v != 0.0) {
            return Err(Error::InvalidParameter { what: "shift out of zero padding", value: cells as f64 });
        }
        let mut values = vec![0.0; n];
        if cells >= 0 {
            values[k..].copy_from_slice(&self.values[..n - k]);
        } else {
            values[..n - k].copy_from_slice(&self.values[k..]);
        }
        Ok(Field1D { grid: self.grid, values })
    }
}

fn pow_abs(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v.abs()
    } else if p == 2.0 {
        v * v
    } else {
        v.abs().powf(p)
    }
}

/// Two-dimensional uniform grid; `x` is the first (line) axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    x0: f64,
    y0: f64,
    hx: f64,
    hy: f64,
    nx: usize,
    ny: usize,
}

impl Grid2D {
    pub fn new(x0: f64, y0: f64, hx: f64, hy: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(hx.is_finite() && hx > 0.0) {
            return Err(Error::InvalidParameter { what: "hx", value: hx });
        }
        if !(hy.is_finite() && hy > 0.0) {
            return Err(Error::InvalidParameter { what: "hy", value: hy });
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::NonFinite { what: "grid origin" });
        }
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter { what: "nx*ny", value: 0.0 });
        }
        Ok(Grid2D { x0, y0, hx, hy, nx, ny })
    }

    /// Grid with cell centers symmetric about the origin in both axes.
    pub fn centered(hx: f64, hy: f64, nx: usize, ny: usize) -> Result<Self> {
        let x0 = -0.5 * (nx as f64 - 1.0) * hx;
        let y0 = -0.5 * (ny as f64 - 1.0) * hy;
        Grid2D::new(x0, y0, hx, hy, nx, ny)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn y0(&self) -> f64 {
        self.y0
    }
    pub fn hx(&self) -> f64 {
        self.hx
    }
    pub fn hy(&self) -> f64 {
        self.hy
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    pub fn y_center(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy
    }

    /// Per-cell measure.
    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    /// The grid of one line `x -> u(x, y_j)`.
    pub fn line_grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.x0, self.hx, self.nx)
    }
}

/// Axis selector for 2D difference operators. `X` is the line axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Sampled function on a [`Grid2D`], row-major: line `j` occupies
/// `values[j*nx .. (j+1)*nx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl Field2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nx() * grid.ny() {
            return Err(Error::GridMismatch {
                reason: format!(
                    "{} values on a {}x{} grid",
                    values.len(),
                    grid.nx(),
                    grid.ny()
                ),
            });
        }
        check_finite(&values, "field values")?;
        Ok(Field2D { grid, values })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        let values = vec![0.0; grid.nx() * grid.ny()];
        Field2D { grid, values }
    }

    pub fn sample(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.nx() * grid.ny());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                values.push(f(grid.x_center(i), grid.y_center(j)));
            }
        }
        Field2D::new(grid, values)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn line_values(&self, j: usize) -> &[f64] {
        let nx = self.grid.nx();
        &self.values[j * nx..(j + 1) * nx]
    }

    pub fn modulus(&self) -> Field2D {
        Field2D {
            grid: self.grid,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        let a = self.grid.cell_area();
        let terms = self.values.iter().map(|v| a * pow_abs(*v, p)).collect();
        Ok(multiset_sum(terms))
    }

    pub fn mass(&self) -> f64 {
        self.lp_norm(2.0).expect("p = 2 is always valid")
    }

    pub fn quadrature(&self, phi: impl Fn(f64) -> f64) -> Result<f64> {
        let at_zero = phi(0.0);
        if at_zero != 0.0 {
            return Err(Error::NonZeroPhiAtZero { value: at_zero });
        }
        let a = self.grid.cell_area();
        let terms = self.values.iter().map(|v| a * phi(*v)).collect();
        Ok(multiset_sum(terms))
    }

    pub fn measure_above(&self, t: f64) -> f64 {
        self.count_above(t) as f64 * self.grid.cell_area()
    }

    pub fn count_above(&self, t: f64) -> usize {
        self.values.iter().filter(|v| **v > t).count()
    }

    /// Forward-difference seminorm along `axis` with zero extension,
    /// approximating the axis-partial p-integral.
    pub fn gradient_seminorm(&self, p: f64, axis: Axis) -> Result<f64> {
        check_p(p)?;
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let (hx, hy) = (self.grid.hx(), self.grid.hy());
        let mut terms = Vec::new();
        match axis {
            Axis::X => {
                if nx < 2 {
                    return Err(Error::DegenerateAxis { axis: 0, len: nx });
                }
                let cell = hx * hy;
                for j in 0..ny {
                    let line = self.line_values(j);
                    let mut prev = 0.0;
                    for &v in line {
                        terms.push(cell * pow_abs((v - prev) / hx, p));
                        prev = v;
                    }
                    terms.push(cell * pow_abs(prev / hx, p));
                }
            }
            Axis::Y => {
                if ny < 2 {
                    return Err(Error::DegenerateAxis { axis: 1, len: ny });
                }
                let cell = hx * hy;
                for i in 0..nx {
                    let mut prev = 0.0;
                    for j in 0..ny {
                        let v = self.values[j * nx + i];
                        terms.push(cell * pow_abs((v - prev) / hy, p));
                        prev = v;
                    }
                    terms.push(cell * pow_abs(prev / hy, p));
                }
            }
        }
        Ok(multiset_sum(terms))
    }

    /// Sum of the seminorms over both axes (the full p-Dirichlet integrand).
    pub fn full_gradient_seminorm(&self, p: f64) -> Result<f64> {
        Ok(self.gradient_seminorm(p, Axis::X)? + self.gradient_seminorm(p, Axis::Y)?)
    }
}

/// The level-set measure map `t -> measure{u > t}`.
///
/// Measures are cell counts times the spacing, so they are exact multiples of
/// `h` and non-increasing in the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionProfile {
    thresholds: Vec<f64>,
    measures: Vec<f64>,
}

impl DistributionProfile {
    pub fn new(thresholds: Vec<f64>, measures: Vec<f64>) -> Result<Self> {
        if thresholds.len() != measures.len() {
            return Err(Error::GridMismatch {
                reason: "thresholds and measures differ in length".into(),
            });
        }
        if thresholds.is_empty()
            || thresholds[0] <= 0.0
            || thresholds.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::LevelsNotIncreasing);
        }
        if measures.windows(2).any(|w| w[1] > w[0]) || measures.iter().any(|m| *m < 0.0) {
            return Err(Error::InvalidParameter { what: "measures", value: f64::NAN });
        }
        Ok(DistributionProfile { thresholds, measures })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(values: &[f64], h: f64) -> Field1D {
        Field1D::new(Grid1D::new(0.0, h, values.len()).unwrap(), values.to_vec()).unwrap()
    }

    #[test]
    fn lp_norm_zero_field() {
        let u = Field1D::zeros(Grid1D::new(0.0, 0.3, 17).unwrap());
        assert_eq!(u.lp_norm(2.0).unwrap(), 0.0);
    }

    #[test]
    fn lp_norm_direct_sum() {
        let u = field(&[1.0, 2.0], 0.5);
        assert_eq!(u.lp_norm(2.0).unwrap(), 2.5);
    }

    #[test]
    fn lp_norm_rejects_p_below_one() {
        let u = field(&[1.0], 1.0);
        assert!(matches!(u.lp_norm(0.5), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn lp_norm_gaussian_matches_analytic() {
        let grid = Grid1D::symmetric_domain(8.0, 0.01).unwrap();
        let u = Field1D::sample(grid, |x| (-x * x).exp()).unwrap();
        let exact = (std::f64::consts::PI / 2.0).sqrt();
        assert!((u.lp_norm(2.0).unwrap() - exact).abs() < 1e-6);
    }

    #[test]
    fn gradient_constant_field_boundary_jumps_only() {
        let c = 1.7;
        let h = 0.25;
        let p = 3.0;
        let u = field(&[c, c, c], h);
        let expected = 2.0 * h * (c / h).powf(p);
        assert!((u.gradient_seminorm(p).unwrap() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn gradient_tent() {
        let u = field(&[0.0, 1.0, 0.0], 1.0);
        assert_eq!(u.gradient_seminorm(2.0).unwrap(), 2.0);
    }

    #[test]
    fn gradient_gaussian_matches_analytic() {
        let grid = Grid1D::symmetric_domain(8.0, 0.01).unwrap();
        let u = Field1D::sample(grid, |x| (-x * x).exp()).unwrap();
        let exact = (2.0 * std::f64::consts::PI).sqrt() / 2.0;
        assert!((u.gradient_seminorm(2.0).unwrap() - exact).abs() < 1e-3);
    }

    #[test]
    fn gradient_single_cell_is_degenerate() {
        let u = field(&[1.0], 1.0);
        assert!(matches!(u.gradient_seminorm(2.0), Err(Error::DegenerateAxis { .. })));
    }

    #[test]
    fn distribution_counts_cells() {
        let u = field(&[3.0, 1.0, 2.0], 1.0);
        let prof = u.distribution_profile(&[0.5, 1.5, 2.5]).unwrap();
        assert_eq!(prof.measures(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn distribution_zero_field() {
        let u = Field1D::zeros(Grid1D::new(0.0, 1.0, 5).unwrap());
        let prof = u.distribution_profile(&[0.1, 1.0]).unwrap();
        assert_eq!(prof.measures(), &[0.0, 0.0]);
    }

    #[test]
    fn distribution_rejects_unsorted_levels() {
        let u = field(&[1.0], 1.0);
        assert!(u.distribution_profile(&[1.0, 0.5]).is_err());
        assert!(u.distribution_profile(&[0.0, 0.5]).is_err());
    }

    #[test]
    fn distribution_gaussian_level_width() {
        let grid = Grid1D::symmetric_domain(8.0, 0.01).unwrap();
        let u = Field1D::sample(grid, |x| (-x * x).exp()).unwrap();
        let measured = u.measure_above(0.5);
        let exact = 2.0 * (2.0f64.ln()).sqrt();
        assert!((measured - exact).abs() <= 2.0 * 0.01);
    }

    #[test]
    fn quadrature_identity() {
        let u = field(&[1.0, 2.0, 3.0], 1.0);
        assert_eq!(u.quadrature(|s| s).unwrap(), 6.0);
    }

    #[test]
    fn quadrature_square_matches_lp() {
        let u = field(&[0.3, 1.4, 0.9, 2.2], 0.7);
        assert_eq!(u.quadrature(|s| s * s).unwrap(), u.lp_norm(2.0).unwrap());
    }

    #[test]
    fn quadrature_rejects_nonvanishing_phi() {
        let u = field(&[1.0], 1.0);
        assert!(matches!(
            u.quadrature(|s| s + 1.0),
            Err(Error::NonZeroPhiAtZero { .. })
        ));
    }

    #[test]
    fn quadrature_gaussian_quartic_minus_square() {
        let grid = Grid1D::symmetric_domain(8.0, 0.01).unwrap();
        let u = Field1D::sample(grid, |x| (-x * x).exp()).unwrap();
        // integral of exp(-4x^2) - exp(-2x^2)
        let exact = (std::f64::consts::PI / 4.0).sqrt() - (std::f64::consts::PI / 2.0).sqrt();
        let got = u.quadrature(|s| s.powi(4) - s * s).unwrap();
        assert!((got - exact).abs() < 1e-6);
    }

    #[test]
    fn lp_norm_is_permutation_invariant_to_the_bit() {
        let values = [0.13, 2.7, 0.0061, 1.9, 0.44, 3.2, 0.9];
        let mut permuted = values;
        permuted.reverse();
        permuted.swap(1, 4);
        let a = field(&values, 0.37).lp_norm(2.5).unwrap();
        let b = field(&permuted, 0.37).lp_norm(2.5).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn gradient_is_translation_invariant_to_the_bit() {
        let mut values = vec![0.0; 32];
        for (i, v) in values.iter_mut().enumerate().take(12).skip(4) {
            *v = ((i - 4) as f64 * 0.7).sin().abs() + 0.1;
        }
        let u = field(&values, 0.2);
        let shifted = u.shift_cells(9).unwrap();
        let a = u.gradient_seminorm(2.5).unwrap();
        let b = shifted.gradient_seminorm(2.5).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn shift_out_of_padding_is_rejected() {
        let u = field(&[1.0, 0.0, 0.0], 1.0);
        assert!(u.shift_cells(-1).is_err());
        assert!(u.shift_cells(2).is_ok());
    }

    #[test]
    fn field2d_lines_are_contiguous() {
        let grid = Grid2D::new(0.0, 0.0, 1.0, 1.0, 3, 2).unwrap();
        let u = Field2D::new(grid, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(u.line_values(0), &[1.0, 2.0, 3.0]);
        assert_eq!(u.line_values(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn field2d_gradient_axes() {
        let grid = Grid2D::new(0.0, 0.0, 1.0, 1.0, 2, 2).unwrap();
        let u = Field2D::new(grid, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        // Along x: per line, jumps 0->1 and 1->0 plus flat interior: 2 lines * 2.
        assert_eq!(u.gradient_seminorm(2.0, Axis::X).unwrap(), 4.0);
        assert_eq!(u.gradient_seminorm(2.0, Axis::Y).unwrap(), 4.0);
    }

    #[test]
    fn rejects_non_finite_values() {
        let grid = Grid1D::new(0.0, 1.0, 2).unwrap();
        assert!(Field1D::new(grid, vec![1.0, f64::NAN]).is_err());
    }
}
