//! Scalar functional `I[u] = 1/2 ∫|∇u|² - ∫F(u)` and two-component
//! functional `J[u,v] = 1/2 ∫(|∇u|² + |∇v|²) - ∫G(u², v²)`, with built-in
//! nonlinearity families, Euler–Lagrange residuals, and an explicit
//! coercivity constant.
//!
//! Exponent ranges are enforced at construction against the mass-subcritical
//! ceiling of the stated dimension: power `F` needs `1 < p < 1 + 4/N`, the
//! `G` exponents stay below the `2/N` growth ceiling of its partial
//! derivatives.

use crate::error::{Error, Result};
use crate::grid::{Field1D, Field2D};
use serde::Serialize;

/// Built-in scalar nonlinearity families.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityKind {
    /// `F(s) = |s|^{p+1} / (p+1)`, `f(s) = |s|^{p-1} s`.
    Power { p: f64 },
    /// User-supplied samples of `F` with linear interpolation; `f` is the
    /// piecewise-constant slope.
    Tabulated { s: Vec<f64>, big_f: Vec<f64> },
}

/// A scalar nonlinearity together with the dimension its growth was
/// validated for.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    kind: NonlinearityKind,
    dim: usize,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::InvalidSpec { reason: format!("dimension {dim} not supported") })
    }
}

impl NonlinearitySpec {
    /// Mass-subcritical power nonlinearity: requires `1 < p < 1 + 4/dim`.
    pub fn power(p: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let ceiling = 1.0 + 4.0 / dim as f64;
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidParameter { what: "p", value: p });
        }
        if p >= ceiling {
            return Err(Error::Supercritical { exponent: p, ceiling });
        }
        Ok(NonlinearitySpec { kind: NonlinearityKind::Power { p }, dim })
    }

    /// Tabulated `F` on ascending sample points starting at `(0, 0)`.
    pub fn tabulated(points: Vec<(f64, f64)>, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if points.len() < 2 {
            return Err(Error::InvalidSpec { reason: "tabulated F needs at least two points".into() });
        }
        if points[0] != (0.0, 0.0) {
            return Err(Error::InvalidSpec { reason: "tabulated F must start at (0, 0)".into() });
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0)
            || points.iter().any(|(s, f)| !s.is_finite() || !f.is_finite())
        {
            return Err(Error::InvalidSpec { reason: "tabulated F needs finite, strictly increasing s".into() });
        }
        let (s, big_f) = points.into_iter().unzip();
        Ok(NonlinearitySpec { kind: NonlinearityKind::Tabulated { s, big_f }, dim })
    }

    /// The identically-zero nonlinearity (pure kinetic energy).
    pub fn zero(dim: usize) -> Result<Self> {
        NonlinearitySpec::tabulated(vec![(0.0, 0.0), (1e12, 0.0)], dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    /// Largest tabulated sample point, if any.
    pub fn tabulated_max(&self) -> Option<f64> {
        match &self.kind {
            NonlinearityKind::Power { .. } => None,
            NonlinearityKind::Tabulated { s, .. } => s.last().copied(),
        }
    }

    /// `F(s)`.
    pub fn big_f(&self, s: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::Power { p } => s.abs().powf(p + 1.0) / (p + 1.0),
            NonlinearityKind::Tabulated { s: xs, big_f } => {
                let a = s.abs();
                let k = segment_index(xs, a);
                let t = (a - xs[k]) / (xs[k + 1] - xs[k]);
                big_f[k] + t * (big_f[k + 1] - big_f[k])
            }
        }
    }

    /// `f(s) = F'(s)`, extended odd.
    pub fn f(&self, s: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::Power { p } => s.signum() * s.abs().powf(*p),
            NonlinearityKind::Tabulated { s: xs, big_f } => {
                let a = s.abs();
                let k = segment_index(xs, a);
                let slope = (big_f[k + 1] - big_f[k]) / (xs[k + 1] - xs[k]);
                s.signum() * slope
            }
        }
    }

    fn check_range(&self, max_abs: f64) -> Result<()> {
        if let Some(max_s) = self.tabulated_max() {
            if max_abs > max_s {
                return Err(Error::RangeExceeded { value: max_abs, max: max_s });
            }
        }
        Ok(())
    }
}

fn segment_index(xs: &[f64], a: f64) -> usize {
    match xs.binary_search_by(|x| x.total_cmp(&a)) {
        Ok(k) => k.min(xs.len() - 2),
        Err(k) => k.saturating_sub(1).min(xs.len() - 2),
    }
}

/// Polynomial two-component coupling
/// `G(s1, s2) = a1 s1^r1 + a2 s2^r2 + beta s1^g1 s2^g2`,
/// constrained so that `g_j = ∂G/∂s_j` are nonnegative, nondecreasing, and
/// below the `2/N` growth ceiling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledGSpec {
    pub a1: f64,
    pub r1: f64,
    pub a2: f64,
    pub r2: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    dim: usize,
}

impl CoupledGSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: usize,
        a1: f64,
        r1: f64,
        a2: f64,
        r2: f64,
        beta: f64,
        gamma1: f64,
        gamma2: f64,
    ) -> Result<Self> {
        check_dim(dim)?;
        let ceiling = 1.0 + 2.0 / dim as f64;
        for (name, v) in [("a1", a1), ("a2", a2), ("beta", beta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidSpec { reason: format!("{name} must be finite and >= 0, got {v}") });
            }
        }
        for (a, r, name) in [(a1, r1, "r1"), (a2, r2, "r2")] {
            if a > 0.0 {
                if !(r.is_finite() && r > 1.0) {
                    return Err(Error::InvalidSpec { reason: format!("{name} must exceed 1, got {r}") });
                }
                if r >= ceiling {
                    return Err(Error::Supercritical { exponent: r, ceiling });
                }
            }
        }
        if beta > 0.0 {
            if !(gamma1.is_finite() && gamma2.is_finite() && gamma1 >= 1.0 && gamma2 >= 1.0) {
                return Err(Error::InvalidSpec {
                    reason: format!("coupling exponents must be >= 1, got ({gamma1}, {gamma2})"),
                });
            }
            let total = gamma1 + gamma2;
            if total >= ceiling {
                return Err(Error::Supercritical { exponent: total, ceiling });
            }
        }
        Ok(CoupledGSpec { a1, r1, a2, r2, beta, gamma1, gamma2, dim })
    }

    /// The default coupled family used by the verification suite:
    /// quartic self-interaction in each component plus a quadratic-product
    /// coupling (`G(s1,s2) = (s1² + s2²)/4 + beta s1 s2`).
    pub fn default_coupled(dim: usize, beta: f64) -> Result<Self> {
        CoupledGSpec::new(dim, 0.25, 2.0, 0.25, 2.0, beta, 1.0, 1.0)
    }

    /// Decoupled variant of [`CoupledGSpec::default_coupled`].
    pub fn decoupled(dim: usize) -> Result<Self> {
        CoupledGSpec::default_coupled(dim, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn g(&self, s1: f64, s2: f64) -> f64 {
        let mut total = 0.0;
        if self.a1 > 0.0 {
            total += self.a1 * s1.powf(self.r1);
        }
        if self.a2 > 0.0 {
            total += self.a2 * s2.powf(self.r2);
        }
        if self.beta > 0.0 {
            total += self.beta * s1.powf(self.gamma1) * s2.powf(self.gamma2);
        }
        total
    }

    /// `∂G/∂s1`.
    pub fn g1(&self, s1: f64, s2: f64) -> f64 {
        let mut total = 0.0;
        if self.a1 > 0.0 {
            total += self.a1 * self.r1 * s1.powf(self.r1 - 1.0);
        }
        if self.beta > 0.0 {
            total += self.beta * self.gamma1 * s1.powf(self.gamma1 - 1.0) * s2.powf(self.gamma2);
        }
        total
    }

    /// `∂G/∂s2`.
    pub fn g2(&self, s1: f64, s2: f64) -> f64 {
        let mut total = 0.0;
        if self.a2 > 0.0 {
            total += self.a2 * self.r2 * s2.powf(self.r2 - 1.0);
        }
        if self.beta > 0.0 {
            total += self.beta * self.gamma2 * s1.powf(self.gamma1) * s2.powf(self.gamma2 - 1.0);
        }
        total
    }
}

/// Kinetic/potential split of a functional value; `total = kinetic - potential`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyValue {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

impl EnergyValue {
    fn from_parts(kinetic: f64, potential: f64) -> Self {
        EnergyValue { kinetic, potential, total: kinetic - potential }
    }
}

/// `I[u] = 1/2 ∫|∇u|² - ∫F(u)` for a 1D field.
pub fn scalar_energy_1d(u: &Field1D, spec: &NonlinearitySpec) -> Result<EnergyValue> {
    spec.check_range(u.values().iter().fold(0.0f64, |m, v| m.max(v.abs())))?;
    let kinetic = 0.5 * u.gradient_seminorm(2.0)?;
    let potential = u.quadrature(|s| spec.big_f(s))?;
    Ok(EnergyValue::from_parts(kinetic, potential))
}

/// `I[u]` for a 2D field (both axes in the kinetic term).
pub fn scalar_energy_2d(u: &Field2D, spec: &NonlinearitySpec) -> Result<EnergyValue> {
    spec.check_range(u.values().iter().fold(0.0f64, |m, v| m.max(v.abs())))?;
    let kinetic = 0.5 * u.full_gradient_seminorm(2.0)?;
    let potential = u.quadrature(|s| spec.big_f(s))?;
    Ok(EnergyValue::from_parts(kinetic, potential))
}

fn check_same_grid_1d(u: &Field1D, v: &Field1D) -> Result<()> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch { reason: "fields must share one grid".into() });
    }
    Ok(())
}

/// `J[u,v] = 1/2 ∫(|∇u|² + |∇v|²) - ∫G(u², v²)` on a shared 1D grid.
pub fn system_energy_1d(u: &Field1D, v: &Field1D, spec: &CoupledGSpec) -> Result<EnergyValue> {
    check_same_grid_1d(u, v)?;
    let kinetic = 0.5 * (u.gradient_seminorm(2.0)? + v.gradient_seminorm(2.0)?);
    let h = u.h();
    let terms = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| h * spec.g(a * a, b * b))
        .collect();
    let potential = crate::grid::multiset_sum(terms);
    Ok(EnergyValue::from_parts(kinetic, potential))
}

/// `J[u,v]` on a shared 2D grid.
pub fn system_energy_2d(u: &Field2D, v: &Field2D, spec: &CoupledGSpec) -> Result<EnergyValue> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch { reason: "fields must share one grid".into() });
    }
    let kinetic = 0.5 * (u.full_gradient_seminorm(2.0)? + v.full_gradient_seminorm(2.0)?);
    let area = u.grid().cell_area();
    let terms = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| area * spec.g(a * a, b * b))
        .collect();
    let potential = crate::grid::multiset_sum(terms);
    Ok(EnergyValue::from_parts(kinetic, potential))
}

/// Discrete L² norm of `-Δu + mu*u - f(u)` over interior cells
/// (second-difference Laplacian).
pub fn euler_lagrange_residual_1d(u: &Field1D, mu: f64, spec: &NonlinearitySpec) -> Result<f64> {
    if u.n() < 3 {
        return Err(Error::DegenerateAxis { axis: 0, len: u.n() });
    }
    let h = u.h();
    let vals = u.values();
    let mut sum_sq = 0.0;
    for i in 1..u.n() - 1 {
        let lap = (vals[i + 1] - 2.0 * vals[i] + vals[i - 1]) / (h * h);
        let r = -lap + mu * vals[i] - spec.f(vals[i]);
        sum_sq += h * r * r;
    }
    Ok(sum_sq.sqrt())
}

/// Component residuals of the coupled stationarity system
/// `-Δu + mu*u = 2u g1(u², v²)`, `-Δv + nu*v = 2v g2(u², v²)`.
///
/// `G` is a function of the squared moduli, so the variational derivative of
/// the potential carries the chain-rule factor `2u` (resp. `2v`).
pub fn system_el_residual_1d(
    u: &Field1D,
    v: &Field1D,
    mu: f64,
    nu: f64,
    spec: &CoupledGSpec,
) -> Result<(f64, f64)> {
    check_same_grid_1d(u, v)?;
    if u.n() < 3 {
        return Err(Error::DegenerateAxis { axis: 0, len: u.n() });
    }
    let h = u.h();
    let (uv, vv) = (u.values(), v.values());
    let mut su = 0.0;
    let mut sv = 0.0;
    for i in 1..u.n() - 1 {
        let lap_u = (uv[i + 1] - 2.0 * uv[i] + uv[i - 1]) / (h * h);
        let lap_v = (vv[i + 1] - 2.0 * vv[i] + vv[i - 1]) / (h * h);
        let s1 = uv[i] * uv[i];
        let s2 = vv[i] * vv[i];
        let ru = -lap_u + mu * uv[i] - 2.0 * uv[i] * spec.g1(s1, s2);
        let rv = -lap_v + nu * vv[i] - 2.0 * vv[i] * spec.g2(s1, s2);
        su += h * ru * ru;
        sv += h * rv * rv;
    }
    Ok((su.sqrt(), sv.sqrt()))
}

/// Sobolev-interpolation constants for the discrete zero-extended gradient.
/// Conservative upper bounds; validated numerically by the suite.
fn gagliardo_nirenberg_constant(dim: usize) -> f64 {
    match dim {
        1 => 4.0,
        _ => 16.0,
    }
}

/// Explicit constant `C` such that
/// `1/4 (||∇u||² + ||∇v||²) <= J[u,v] + C` for all pairs with masses `<= r_bound`.
///
/// Built from the epsilon-split `G <= C_lin (s1 + s2) + eps (s1^l + s2^l)`
/// with `l = 1 + 2/N`, the interpolation bound
/// `||u||_l^l <= C(N) mass^{2/N} ||∇u||²`, and an epsilon chosen so the
/// superlinear part absorbs at most an eighth of the kinetic term.
pub fn coercivity_bound(spec: &CoupledGSpec, r_bound: f64) -> Result<f64> {
    if !(r_bound.is_finite() && r_bound > 0.0) {
        return Err(Error::InvalidParameter { what: "r_bound", value: r_bound });
    }
    let dim = spec.dim() as f64;
    let l_exp = 1.0 + 2.0 / dim;
    let c_n = gagliardo_nirenberg_constant(spec.dim());
    let eps = 1.0 / (8.0 * c_n * r_bound.powf(4.0 / dim));

    // Linear coefficient for one power term a*s^r split against eps_t*s^l:
    // below the crossover s* the term is bounded by a*s*^{r-1} * s.
    let linear_coeff = |a: f64, r: f64, eps_t: f64| -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        let s_star = (a / eps_t).powf(1.0 / (l_exp - r));
        a * s_star.powf(r - 1.0)
    };

    // The coupling term is dominated by beta * 2^(g-1) * (s1^g + s2^g).
    let gsum = self_coupling_exponent(spec);
    let a_c = if spec.beta > 0.0 { spec.beta * 2.0f64.powf(gsum - 1.0) } else { 0.0 };

    let lin1 = linear_coeff(spec.a1, spec.r1, eps / 2.0) + linear_coeff(a_c, gsum, eps / 2.0);
    let lin2 = linear_coeff(spec.a2, spec.r2, eps / 2.0) + linear_coeff(a_c, gsum, eps / 2.0);
    Ok(2.0 * r_bound * lin1.max(lin2))
}

fn self_coupling_exponent(spec: &CoupledGSpec) -> f64 {
    if spec.beta > 0.0 {
        spec.gamma1 + spec.gamma2
    } else {
        2.0
    }
}

/// Numerically certify that `g1, g2` are nonnegative and nondecreasing in
/// both arguments on a lattice over `[0, s_max]²`.
pub fn certify_g4(spec: &CoupledGSpec, s_max: f64, lattice: usize) -> Result<()> {
    let step = s_max / (lattice.max(2) - 1) as f64;
    let at = |k: usize| k as f64 * step;
    for j in 0..lattice {
        for i in 0..lattice {
            for (name, g) in [("g1", spec.g1(at(i), at(j))), ("g2", spec.g2(at(i), at(j)))] {
                if !(g.is_finite() && g >= 0.0) {
                    return Err(Error::InvalidSpec {
                        reason: format!("{name}({}, {}) = {g} violates nonnegativity", at(i), at(j)),
                    });
                }
            }
            if i > 0 {
                if spec.g1(at(i), at(j)) < spec.g1(at(i - 1), at(j))
                    || spec.g2(at(i), at(j)) < spec.g2(at(i - 1), at(j))
                {
                    return Err(Error::InvalidSpec { reason: "g_j decreasing in s1".into() });
                }
            }
            if j > 0 {
                if spec.g1(at(i), at(j)) < spec.g1(at(i), at(j - 1))
                    || spec.g2(at(i), at(j)) < spec.g2(at(i), at(j - 1))
                {
                    return Err(Error::InvalidSpec { reason: "g_j decreasing in s2".into() });
                }
            }
        }
    }
    Ok(())
}

/// Numerically certify strict superadditivity
/// `G(s1, 0) + G(0, s2) < G(s1, s2)` on a positive lattice (needs `beta > 0`).
pub fn certify_g5(spec: &CoupledGSpec, s_max: f64, lattice: usize) -> Result<()> {
    if spec.beta <= 0.0 {
        return Err(Error::InvalidSpec { reason: "superadditivity needs beta > 0".into() });
    }
    let step = s_max / lattice as f64;
    for j in 1..=lattice {
        for i in 1..=lattice {
            let (s1, s2) = (i as f64 * step, j as f64 * step);
            if spec.g(s1, 0.0) + spec.g(0.0, s2) >= spec.g(s1, s2) {
                return Err(Error::InvalidSpec {
                    reason: format!("G({s1},0) + G(0,{s2}) not below G({s1},{s2})"),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    #[test]
    fn power_spec_enforces_subcritical_range() {
        assert!(NonlinearitySpec::power(3.0, 1).is_ok());
        assert!(matches!(NonlinearitySpec::power(5.0, 1), Err(Error::Supercritical { .. })));
        assert!(matches!(NonlinearitySpec::power(3.0, 2), Err(Error::Supercritical { .. })));
        assert!(NonlinearitySpec::power(1.0, 1).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_differentiates() {
        let spec = NonlinearitySpec::tabulated(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 2.0)], 1).unwrap();
        assert_eq!(spec.big_f(0.5), 1.0);
        assert_eq!(spec.f(0.5), 2.0);
        assert_eq!(spec.f(1.5), 0.0);
        assert_eq!(spec.f(-0.5), -2.0);
    }

    #[test]
    fn scalar_energy_zero_field() {
        let spec = NonlinearitySpec::power(3.0, 1).unwrap();
        let u = Field1D::zeros(Grid1D::centered(0.1, 64).unwrap());
        let e = scalar_energy_1d(&u, &spec).unwrap();
        assert_eq!(e.total, 0.0);
    }

    #[test]
    fn scalar_energy_gaussian_oracle() {
        let spec = NonlinearitySpec::power(3.0, 1).unwrap();
        let grid = Grid1D::symmetric_domain(8.0, 0.01).unwrap();
        let u = Field1D::sample(grid, |x| (-x * x).exp()).unwrap();
        let e = scalar_energy_1d(&u, &spec).unwrap();
        let kinetic = (2.0 * std::f64::consts::PI).sqrt() / 4.0;
        let potential = 0.25 * (std::f64::consts::PI / 4.0).sqrt();
        assert!((e.kinetic - kinetic).abs() < 1e-3);
        assert!((e.potential - potential).abs() < 1e-6);
        assert!((e.total - (kinetic - potential)).abs() < 1e-3);
    }

    #[test]
    fn scalar_energy_soliton_closed_form() {
        // a sech(bx) with a² = 2b² has I = -(mass)³/96, mass = 2a²/b = 4b.
        let spec = NonlinearitySpec::power(3.0, 1).unwrap();
        let b: f64 = 0.5;
        let a = (2.0 * b * b).sqrt();
        let grid = Grid1D::symmetric_domain(40.0, 0.01).unwrap();
        let u = Field1D::sample(grid, |x| a * sech(b * x)).unwrap();
        let mass = u.mass();
        let expected = -mass.powi(3) / 96.0;
        let e = scalar_energy_1d(&u, &spec).unwrap();
        assert!((e.total - expected).abs() < 1e-3 * expected.abs());
    }

    #[test]
    fn system_energy_decouples_when_beta_zero() {
        let spec = CoupledGSpec::decoupled(1).unwrap();
        let grid = Grid1D::symmetric_domain(8.0, 0.05).unwrap();
        let u = Field1D::sample(grid, |x| (-x * x).exp()).unwrap();
        let v = Field1D::sample(grid, |x| 0.7 * (-(x - 1.0) * (x - 1.0)).exp()).unwrap();
        let j = system_energy_1d(&u, &v, &spec).unwrap();
        // Decoupled branches are quartic with coefficient 1/4, i.e. p = 3 power F.
        let p3 = NonlinearitySpec::power(3.0, 1).unwrap();
        let iu = scalar_energy_1d(&u, &p3).unwrap();
        let iv = scalar_energy_1d(&v, &p3).unwrap();
        assert!((j.total - (iu.total + iv.total)).abs() < 1e-12 * j.total.abs().max(1.0));
    }

    #[test]
    fn system_energy_zero_component_uses_single_branch() {
        let spec = CoupledGSpec::default_coupled(1, 0.5).unwrap();
        let grid = Grid1D::symmetric_domain(8.0, 0.05).unwrap();
        let u = Field1D::sample(grid, |x| (-x * x).exp()).unwrap();
        let zero = Field1D::zeros(grid);
        let j = system_energy_1d(&u, &zero, &spec).unwrap();
        let p3 = NonlinearitySpec::power(3.0, 1).unwrap();
        let iu = scalar_energy_1d(&u, &p3).unwrap();
        let expected = iu.total + 0.5 * zero.gradient_seminorm(2.0).unwrap();
        assert!((j.total - expected).abs() < 1e-12);
    }

    #[test]
    fn system_energy_pure_coupling_gaussian_oracle() {
        // G = s1 s2 only; u = v = exp(-x²) gives potential = ∫exp(-4x²) = sqrt(pi)/2.
        let spec = CoupledGSpec::new(1, 0.0, 2.0, 0.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        let grid = Grid1D::symmetric_domain(8.0, 0.01).unwrap();
        let u = Field1D::sample(grid, |x| (-x * x).exp()).unwrap();
        let j = system_energy_1d(&u, &u, &spec).unwrap();
        let exact = std::f64::consts::PI.sqrt() / 2.0;
        assert!((j.potential - exact).abs() < 1e-6);
    }

    #[test]
    fn residual_zero_field_is_zero() {
        let spec = NonlinearitySpec::power(3.0, 1).unwrap();
        let u = Field1D::zeros(Grid1D::centered(0.1, 32).unwrap());
        assert_eq!(euler_lagrange_residual_1d(&u, 0.7, &spec).unwrap(), 0.0);
    }

    #[test]
    fn residual_soliton_truncation_order() {
        // -u'' + b²u = u³ for u = a sech(bx), a² = 2b².
        let spec = NonlinearitySpec::power(3.0, 1).unwrap();
        let b = 1.0;
        let a = (2.0f64).sqrt();
        let grid = Grid1D::symmetric_domain(30.0, 0.01).unwrap();
        let u = Field1D::sample(grid, |x| a * sech(b * x)).unwrap();
        let res = euler_lagrange_residual_1d(&u, b * b, &spec).unwrap();
        assert!(res > 0.0 && res <= 1e-2, "residual {res}");
        // Halving h shrinks the residual by about four.
        let fine = Grid1D::symmetric_domain(30.0, 0.005).unwrap();
        let uf = Field1D::sample(fine, |x| a * sech(b * x)).unwrap();
        let res_f = euler_lagrange_residual_1d(&uf, b * b, &spec).unwrap();
        assert!(res_f < 0.5 * res);
    }

    #[test]
    fn residual_nonzero_for_random_field() {
        let spec = NonlinearitySpec::power(3.0, 1).unwrap();
        let grid = Grid1D::centered(0.1, 64).unwrap();
        let u = Field1D::sample(grid, |x| (x * 1.3).sin().abs() * (-0.1 * x * x).exp()).unwrap();
        assert!(euler_lagrange_residual_1d(&u, 1.0, &spec).unwrap() > 0.0);
    }

    #[test]
    fn system_residual_decouples_to_scalar() {
        let gspec = CoupledGSpec::decoupled(1).unwrap();
        let p3 = NonlinearitySpec::power(3.0, 1).unwrap();
        let grid = Grid1D::symmetric_domain(10.0, 0.05).unwrap();
        let u = Field1D::sample(grid, |x| (-x * x).exp()).unwrap();
        let v = Field1D::sample(grid, |x| 0.5 * (-0.5 * x * x).exp()).unwrap();
        let (ru, rv) = system_el_residual_1d(&u, &v, 0.3, 0.9, &gspec).unwrap();
        let su = euler_lagrange_residual_1d(&u, 0.3, &p3).unwrap();
        let sv = euler_lagrange_residual_1d(&v, 0.9, &p3).unwrap();
        assert!((ru - su).abs() <= 1e-12 * su.max(1.0));
        assert!((rv - sv).abs() <= 1e-12 * sv.max(1.0));
    }

    #[test]
    fn system_residual_zero_pair() {
        let gspec = CoupledGSpec::default_coupled(1, 0.5).unwrap();
        let z = Field1D::zeros(Grid1D::centered(0.1, 16).unwrap());
        let (ru, rv) = system_el_residual_1d(&z, &z, 1.0, 1.0, &gspec).unwrap();
        assert_eq!((ru, rv), (0.0, 0.0));
    }

    #[test]
    fn coercivity_zero_g_is_zero() {
        let spec = CoupledGSpec::new(1, 0.0, 2.0, 0.0, 2.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(coercivity_bound(&spec, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn coercivity_monotone_in_mass_cap() {
        let spec = CoupledGSpec::default_coupled(1, 0.5).unwrap();
        let mut prev = 0.0;
        for &r in &[0.5, 1.0, 2.0, 4.0, 8.0] {
            let c = coercivity_bound(&spec, r).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn g4_and_g5_certified_for_default_spec() {
        let spec = CoupledGSpec::default_coupled(1, 0.5).unwrap();
        certify_g4(&spec, 4.0, 50).unwrap();
        certify_g5(&spec, 4.0, 50).unwrap();
        let decoupled = CoupledGSpec::decoupled(1).unwrap();
        assert!(certify_g5(&decoupled, 4.0, 10).is_err());
    }

    #[test]
    fn gspec_rejects_supercritical_exponents() {
        assert!(matches!(
            CoupledGSpec::new(1, 1.0, 3.0, 0.0, 2.0, 0.0, 1.0, 1.0),
            Err(Error::Supercritical { .. })
        ));
        assert!(matches!(
            CoupledGSpec::new(2, 0.25, 2.0, 0.25, 2.0, 0.5, 1.0, 1.0),
            Err(Error::Supercritical { .. })
        ));
    }

    #[test]
    fn scalar_energy_translation_invariant_bit_exact() {
        let spec = NonlinearitySpec::power(3.0, 1).unwrap();
        let grid = Grid1D::centered(0.1, 128).unwrap();
        let mut vals = vec![0.0; 128];
        for (i, v) in vals.iter_mut().enumerate().take(80).skip(40) {
            *v = ((i as f64) * 0.17).sin().abs();
        }
        let u = Field1D::new(grid, vals).unwrap();
        let shifted = u.shift_cells(17).unwrap();
        let a = scalar_energy_1d(&u, &spec).unwrap();
        let b = scalar_energy_1d(&shifted, &spec).unwrap();
        assert_eq!(a.total.to_bits(), b.total.to_bits());
    }

    #[test]
    fn energy_decreases_under_steiner_for_fixed_mass() {
        let spec = NonlinearitySpec::power(3.0, 1).unwrap();
        let h = 0.05;
        let grid = Grid1D::symmetric_domain(10.0, h).unwrap();
        let u = Field1D::sample(grid, |x| {
            ((-(x - 2.0) * (x - 2.0)).exp() + 0.5 * (-2.0 * (x + 1.0) * (x + 1.0)).exp()).abs()
        })
        .unwrap();
        let star = crate::rearrange::symmetric_rearrangement_1d(&u, Default::default()).unwrap();
        let eu = scalar_energy_1d(&u, &spec).unwrap();
        let es = scalar_energy_1d(&star, &spec).unwrap();
        // Potential is exactly preserved (same multiset), kinetic contracts.
        assert_eq!(eu.potential.to_bits(), es.potential.to_bits());
        assert!(es.total <= eu.total + h);
    }

    #[test]
    fn tabulated_range_error() {
        let spec = NonlinearitySpec::tabulated(vec![(0.0, 0.0), (1.0, 1.0)], 1).unwrap();
        let u = Field1D::new(Grid1D::centered(1.0, 3).unwrap(), vec![0.0, 2.0, 0.0]).unwrap();
        assert!(matches!(scalar_energy_1d(&u, &spec), Err(Error::RangeExceeded { .. })));
    }
}
