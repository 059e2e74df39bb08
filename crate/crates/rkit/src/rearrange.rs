//! Rearrangement kernels on sampled fields.
//!
//! All kernels are multiset permutations of the input samples, so
//! equimeasurability holds exactly at the cell-counting level:
//!
//! * [`decreasing_rearrangement`] sorts the samples non-increasing on a grid
//!   starting at 0 — the discrete inverse of the distribution function.
//! * [`symmetric_rearrangement_1d`] places the sorted samples around the
//!   origin, largest first, alternating sides (right first on ties).
//! * [`steiner_rearrangement`] applies the 1D symmetric rearrangement to
//!   every line of a 2D field independently.
//! * [`schwarz_rearrangement_2d`] sorts cells by distance of their center
//!   from the origin instead of per-line.
//! * [`coupled_rearrangement_1d`] merges the two input multisets per line
//!   and places the union symmetrically: the super-level measure of the
//!   output at every height is the exact sum of the inputs' measures.
//!
//! [`multiplicity`] counts level crossings of the piecewise-linear
//! interpolant through the samples; levels equal to a sample are rejected so
//! the count is unambiguous.

use crate::error::{Error, Result};
use crate::grid::{Field1D, Field2D, Grid1D, Grid2D};

/// Tie-breaking convention for cells at equal distance from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// The cell on the positive side receives the larger value first.
    #[default]
    RightFirst,
}

/// Deterministic placement convention: identical inputs yield bit-identical
/// outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlacementRule {
    pub tie_break: TieBreak,
}

/// A level query for [`multiplicity`]. The level must be positive and must
/// not collide with any sampled value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplicityQuery {
    pub level: f64,
}

fn check_nonnegative(values: &[f64], what: &'static str) -> Result<()> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        return Err(Error::NegativeValues { what, min });
    }
    Ok(())
}

/// Cell-filling order for a centered grid of `n` cells: indices sorted by
/// increasing |center|, the right cell first at each tied distance.
pub(crate) fn placement_order(n: usize, rule: PlacementRule) -> Vec<usize> {
    let TieBreak::RightFirst = rule.tie_break;
    let mut order = Vec::with_capacity(n);
    if n % 2 == 1 {
        let mid = (n - 1) / 2;
        order.push(mid);
        for k in 1..=mid {
            order.push(mid + k);
            order.push(mid - k);
        }
    } else {
        for k in 0..n / 2 {
            order.push(n / 2 + k);
            order.push(n / 2 - 1 - k);
        }
    }
    order
}

fn sorted_desc(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    values
}

/// Place `sorted` (non-increasing) on a centered grid of matching size.
fn place_symmetric(sorted: &[f64], h: f64, rule: PlacementRule) -> Result<Field1D> {
    let n = sorted.len();
    let grid = Grid1D::centered(h, n)?;
    let mut values = vec![0.0; n];
    for (rank, &idx) in placement_order(n, rule).iter().enumerate() {
        values[idx] = sorted[rank];
    }
    Field1D::new(grid, values)
}

/// Sort the samples non-increasing on the same spacing, translated so the
/// domain starts at 0. Exactly equimeasurable with the input.
pub fn decreasing_rearrangement(f: &Field1D) -> Result<Field1D> {
    check_nonnegative(f.values(), "decreasing rearrangement input")?;
    let h = f.h();
    let sorted = sorted_desc(f.values().to_vec());
    let grid = Grid1D::new(0.5 * h, h, f.n())?;
    Field1D::new(grid, sorted)
}

/// Symmetric-decreasing rearrangement of one line: the value multiset is
/// preserved exactly and the output is non-increasing in |x| on each side.
pub fn symmetric_rearrangement_1d(f: &Field1D, rule: PlacementRule) -> Result<Field1D> {
    check_nonnegative(f.values(), "symmetric rearrangement input")?;
    place_symmetric(&sorted_desc(f.values().to_vec()), f.h(), rule)
}

/// Apply [`symmetric_rearrangement_1d`] to every line of `u` independently.
/// Per-line equimeasurability is exact.
pub fn steiner_rearrangement(u: &Field2D, rule: PlacementRule) -> Result<Field2D> {
    check_nonnegative(u.values(), "Steiner rearrangement input")?;
    let g = u.grid();
    let out_grid = Grid2D::new(
        -0.5 * (g.nx() as f64 - 1.0) * g.hx(),
        g.y0(),
        g.hx(),
        g.hy(),
        g.nx(),
        g.ny(),
    )?;
    let order = placement_order(g.nx(), rule);
    let mut values = vec![0.0; g.nx() * g.ny()];
    for j in 0..g.ny() {
        let sorted = sorted_desc(u.line_values(j).to_vec());
        let line = &mut values[j * g.nx()..(j + 1) * g.nx()];
        for (rank, &idx) in order.iter().enumerate() {
            line[idx] = sorted[rank];
        }
    }
    Field2D::new(out_grid, values)
}

/// In one dimension the radial rearrangement coincides with the symmetric
/// rearrangement.
pub fn schwarz_rearrangement_1d(u: &Field1D, rule: PlacementRule) -> Result<Field1D> {
    symmetric_rearrangement_1d(u, rule)
}

/// Radial rearrangement of a 2D field: samples sorted non-increasing and
/// assigned to cells in order of increasing distance of the cell center from
/// the origin. Requires square cells.
pub fn schwarz_rearrangement_2d(u: &Field2D, rule: PlacementRule) -> Result<Field2D> {
    check_nonnegative(u.values(), "Schwarz rearrangement input")?;
    let g = u.grid();
    if g.hx() != g.hy() {
        return Err(Error::UnsupportedGrid {
            reason: format!("Schwarz rearrangement needs hx = hy (got {} and {})", g.hx(), g.hy()),
        });
    }
    let TieBreak::RightFirst = rule.tie_break;
    let (nx, ny) = (g.nx(), g.ny());
    let out_grid = Grid2D::centered(g.hx(), g.hy(), nx, ny)?;
    // Integer doubled-center coordinates make distance ties exact.
    let mut cells: Vec<(i64, i64, i64, usize)> = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let dx = 2 * i as i64 - (nx as i64 - 1);
            let dy = 2 * j as i64 - (ny as i64 - 1);
            cells.push((dx * dx + dy * dy, -dx, -dy, j * nx + i));
        }
    }
    cells.sort_unstable();
    let sorted = sorted_desc(u.values().to_vec());
    let mut values = vec![0.0; nx * ny];
    for (rank, &(_, _, _, idx)) in cells.iter().enumerate() {
        values[idx] = sorted[rank];
    }
    Field2D::new(out_grid, values)
}

/// Coupled rearrangement of two lines: the output value multiset is the
/// exact multiset union of the inputs (length `n_u + n_v`) placed
/// symmetric-decreasing about 0, so the super-level measure identity
/// `measure{u*v > t} = measure{u > t} + measure{v > t}` holds for every `t`
/// at the cell-counting level.
pub fn coupled_rearrangement_1d(
    u: &Field1D,
    v: &Field1D,
    rule: PlacementRule,
) -> Result<Field1D> {
    if u.h() != v.h() {
        return Err(Error::GridMismatch {
            reason: format!("coupled rearrangement needs equal spacing (got {} and {})", u.h(), v.h()),
        });
    }
    check_nonnegative(u.values(), "coupled rearrangement input")?;
    check_nonnegative(v.values(), "coupled rearrangement input")?;
    let mut merged = Vec::with_capacity(u.n() + v.n());
    merged.extend_from_slice(u.values());
    merged.extend_from_slice(v.values());
    place_symmetric(&sorted_desc(merged), u.h(), rule)
}

/// Per-line coupled rearrangement of two 2D fields sharing line structure.
pub fn coupled_rearrangement_2d(
    u: &Field2D,
    v: &Field2D,
    rule: PlacementRule,
) -> Result<Field2D> {
    let (gu, gv) = (u.grid(), v.grid());
    if gu.hx() != gv.hx() || gu.hy() != gv.hy() || gu.ny() != gv.ny() {
        return Err(Error::GridMismatch {
            reason: "coupled rearrangement needs equal hx, hy, and line count".into(),
        });
    }
    check_nonnegative(u.values(), "coupled rearrangement input")?;
    check_nonnegative(v.values(), "coupled rearrangement input")?;
    let nx = gu.nx() + gv.nx();
    let out_grid = Grid2D::new(
        -0.5 * (nx as f64 - 1.0) * gu.hx(),
        gu.y0(),
        gu.hx(),
        gu.hy(),
        nx,
        gu.ny(),
    )?;
    let order = placement_order(nx, rule);
    let mut values = vec![0.0; nx * gu.ny()];
    for j in 0..gu.ny() {
        let mut merged = Vec::with_capacity(nx);
        merged.extend_from_slice(u.line_values(j));
        merged.extend_from_slice(v.line_values(j));
        let sorted = sorted_desc(merged);
        let line = &mut values[j * nx..(j + 1) * nx];
        for (rank, &idx) in order.iter().enumerate() {
            line[idx] = sorted[rank];
        }
    }
    Field2D::new(out_grid, values)
}

/// Number of solutions of `interpolant(x) = level` for the piecewise-linear
/// interpolant through the samples, i.e. the count of strict sign changes of
/// `f - level` across consecutive samples. Compactly supported profiles
/// (zero boundary samples) therefore count their outer crossings.
pub fn multiplicity(f: &Field1D, query: MultiplicityQuery) -> Result<usize> {
    let level = query.level;
    if !(level.is_finite() && level > 0.0) {
        return Err(Error::InvalidParameter { what: "level", value: level });
    }
    if f.values().iter().any(|v| *v == level) {
        return Err(Error::AmbiguousLevel { level });
    }
    let count = f
        .values()
        .windows(2)
        .filter(|w| (w[0] - level) * (w[1] - level) < 0.0)
        .count();
    Ok(count)
}

/// Pointwise soft truncation `(f - s)_+` on the same grid.
pub fn truncate_shift(f: &Field1D, s: f64) -> Result<Field1D> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::InvalidParameter { what: "s", value: s });
    }
    let values = f.values().iter().map(|v| (v - s).max(0.0)).collect();
    Field1D::new(*f.grid(), values)
}

/// Sorted bit patterns of the samples; two fields are exactly equimeasurable
/// iff these agree.
pub fn value_multiset(values: &[f64]) -> Vec<u64> {
    let mut bits: Vec<u64> = values.iter().map(|v| v.to_bits()).collect();
    bits.sort_unstable();
    bits
}
