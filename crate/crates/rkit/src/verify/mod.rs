//! The inequality harness: seeded, deterministic check suites producing
//! machine-readable pass/fail reports with margins.
//!
//! Each suite family is a pure function of the [`SuiteConfig`]; families may
//! run on a thread pool, but every family is sequential inside, so the
//! report set is byte-identical regardless of `jobs`. Reports are sorted by
//! `check_id` before they are returned.

pub mod checks;
pub mod fields;

use std::collections::BTreeMap;

use crate::energy::CoupledGSpec;
use crate::error::{Error, Result};
use crate::grid::{Field1D, Field2D, Grid1D, Grid2D};
use crate::minimize::FlowConfig;
use crate::rearrange::{
    coupled_rearrangement_2d, steiner_rearrangement, PlacementRule,
};
use checks::SystemChainMode;
use fields::{BumpProfile, BumpProfile2D, PiecewiseLinear};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// One verified inequality: compared quantities, margin, tolerance, verdict.
///
/// For non-strict checks `pass` means `margin >= -tolerance`; strict checks
/// additionally require a recorded refinement margin above tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub grid_h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement_margin: Option<f64>,
    pub metadata: BTreeMap<String, String>,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1e-300);
    (a - b).abs() / scale
}

impl CheckReport {
    /// `lhs <= rhs` within `tolerance`; margin is `rhs - lhs`.
    pub fn inequality(id: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64, grid_h: f64) -> Self {
        let margin = rhs - lhs;
        CheckReport {
            check_id: id.into(),
            lhs,
            rhs,
            margin,
            tolerance,
            pass: margin >= -tolerance,
            grid_h,
            refinement_margin: None,
            metadata: BTreeMap::new(),
        }
    }

    /// `lhs == rhs` to relative tolerance; margin is the negated relative
    /// difference so the `margin >= -tolerance` rule applies unchanged.
    pub fn equality(id: impl Into<String>, lhs: f64, rhs: f64, rel_tol: f64, grid_h: f64) -> Self {
        let diff = rel_diff(lhs, rhs);
        CheckReport {
            check_id: id.into(),
            lhs,
            rhs,
            margin: -diff,
            tolerance: rel_tol,
            pass: diff <= rel_tol,
            grid_h,
            refinement_margin: None,
            metadata: BTreeMap::new(),
        }
    }

    /// `lhs == rhs` to absolute tolerance.
    pub fn equality_abs(id: impl Into<String>, lhs: f64, rhs: f64, abs_tol: f64, grid_h: f64) -> Self {
        let diff = (lhs - rhs).abs();
        CheckReport {
            check_id: id.into(),
            lhs,
            rhs,
            margin: -diff,
            tolerance: abs_tol,
            pass: diff <= abs_tol,
            grid_h,
            refinement_margin: None,
            metadata: BTreeMap::new(),
        }
    }

    /// Exact structural check: `mismatches` must be zero.
    pub fn exact_count(id: impl Into<String>, mismatches: usize, grid_h: f64) -> Self {
        CheckReport {
            check_id: id.into(),
            lhs: mismatches as f64,
            rhs: 0.0,
            margin: -(mismatches as f64),
            tolerance: 0.0,
            pass: mismatches == 0,
            grid_h,
            refinement_margin: None,
            metadata: BTreeMap::new(),
        }
    }

    /// Strict inequality `lhs < rhs`: passes only when the margin exceeds
    /// the tolerance at this spacing and at the recorded refinement.
    pub fn strict(
        id: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        grid_h: f64,
        refinement_margin: f64,
    ) -> Self {
        let margin = rhs - lhs;
        CheckReport {
            check_id: id.into(),
            lhs,
            rhs,
            margin,
            tolerance,
            pass: margin > tolerance && refinement_margin > tolerance,
            grid_h,
            refinement_margin: Some(refinement_margin),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    /// Slack before the verdict flips; used to pick the worst field when
    /// aggregating a batch under one check id.
    fn headroom(&self) -> f64 {
        match self.refinement_margin {
            Some(rm) => (self.margin - self.tolerance).min(rm - self.tolerance),
            None => self.margin + self.tolerance,
        }
    }
}

/// Deterministic suite parameters. `h` scales the random-field grids; the
/// minimization-backed suites size their own domains from the masses they
/// test.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub field_count: usize,
    pub p_list: Vec<f64>,
    pub h: f64,
    pub strict_delta_rule: String,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 7,
            field_count: 200,
            p_list: vec![1.0, 2.0, 2.5, 3.0, 4.0],
            h: 0.0625,
            strict_delta_rule: "strict pass requires margin > tolerance at h and at h/2".into(),
        }
    }
}

pub(crate) fn derive_seed(seed: u64, label: &str) -> u64 {
    label
        .bytes()
        .fold(seed ^ 0x9E37_79B9_7F4A_7C15, |acc, b| (acc ^ b as u64).wrapping_mul(0x100_0000_01B3))
}

/// Suite selector matching the CLI `--suite` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Prop1,
    Lemma1,
    Lemma3,
    Lemma2,
    Thm1,
    Duff,
    Lemma10,
    Subadd,
    SystemSubadd,
    All,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Suite> {
        Some(match name {
            "prop1" => Suite::Prop1,
            "lemma1" => Suite::Lemma1,
            "lemma3" => Suite::Lemma3,
            "lemma2" => Suite::Lemma2,
            "thm1" => Suite::Thm1,
            "duff" => Suite::Duff,
            "lemma10" => Suite::Lemma10,
            "subadd" => Suite::Subadd,
            "system-subadd" => Suite::SystemSubadd,
            "all" => Suite::All,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Prop1 => "prop1",
            Suite::Lemma1 => "lemma1",
            Suite::Lemma3 => "lemma3",
            Suite::Lemma2 => "lemma2",
            Suite::Thm1 => "thm1",
            Suite::Duff => "duff",
            Suite::Lemma10 => "lemma10",
            Suite::Subadd => "subadd",
            Suite::SystemSubadd => "system-subadd",
            Suite::All => "all",
        }
    }

    fn families(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Prop1,
                Suite::Lemma1,
                Suite::Lemma3,
                Suite::Lemma2,
                Suite::Thm1,
                Suite::Duff,
                Suite::Lemma10,
                Suite::Subadd,
                Suite::SystemSubadd,
            ],
            s => vec![s],
        }
    }
}

/// Execute the selected suite; reports come back sorted by `check_id` and
/// are independent of `jobs`.
pub fn run_suite(cfg: &SuiteConfig, suite: Suite, jobs: usize) -> Result<Vec<CheckReport>> {
    let families = suite.families();
    let run = |family: &Suite| -> Result<Vec<CheckReport>> {
        match family {
            Suite::Prop1 => suite_prop1(cfg),
            Suite::Lemma1 => suite_lemma1(cfg),
            Suite::Lemma3 => suite_lemma3(cfg),
            Suite::Lemma2 => suite_lemma2(cfg),
            Suite::Thm1 => suite_thm1(cfg),
            Suite::Duff => suite_duff(cfg),
            Suite::Lemma10 => suite_lemma10(cfg),
            Suite::Subadd => suite_subadd(cfg),
            Suite::SystemSubadd => suite_system_subadd(cfg),
            Suite::All => unreachable!("families() expands All"),
        }
    };
    let grouped: Vec<Vec<CheckReport>> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config { reason: format!("thread pool: {e}") })?;
        pool.install(|| families.par_iter().map(run).collect::<Result<Vec<_>>>())?
    } else {
        families.iter().map(run).collect::<Result<Vec<_>>>()?
    };
    let mut reports: Vec<CheckReport> = grouped.into_iter().flatten().collect();
    reports.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(reports)
}

/// Run every suite.
pub fn run_all(cfg: &SuiteConfig, jobs: usize) -> Result<Vec<CheckReport>> {
    run_suite(cfg, Suite::All, jobs)
}

pub fn suite_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

/// Merge per-field report batches: one report per check id, carrying the
/// worst-field quantities and batch counts.
fn aggregate(batches: Vec<Vec<CheckReport>>) -> Vec<CheckReport> {
    let mut by_id: BTreeMap<String, (CheckReport, usize, usize)> = BTreeMap::new();
    for rep in batches.into_iter().flatten() {
        let failed = usize::from(!rep.pass);
        match by_id.get_mut(&rep.check_id) {
            None => {
                by_id.insert(rep.check_id.clone(), (rep, 1, failed));
            }
            Some((worst, count, fails)) => {
                *count += 1;
                *fails += failed;
                if rep.headroom() < worst.headroom() {
                    *worst = rep;
                }
            }
        }
    }
    by_id
        .into_values()
        .map(|(mut rep, count, fails)| {
            if count > 1 {
                rep.metadata.insert("fields".into(), format!("{count}"));
                rep.metadata.insert("failures".into(), format!("{fails}"));
                rep.pass = rep.pass && fails == 0;
            }
            rep
        })
        .collect()
}

// ---------------------------------------------------------------------------
// suite families

fn field_grid_2d(cfg: &SuiteConfig) -> Result<Grid2D> {
    let hx = 2.0 * cfg.h;
    let hy = 8.0 * cfg.h;
    let nx = ((16.0 / hx).round() as usize).max(8);
    let ny = ((8.0 / hy).round() as usize).max(4);
    Grid2D::centered(hx, hy, nx, ny)
}

fn suite_prop1(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "prop1"));
    let grid = field_grid_2d(cfg)?;
    let count = (cfg.field_count / 5).max(4);
    let mut batches = Vec::with_capacity(count);
    for _ in 0..count {
        let profile = BumpProfile2D::random(&mut rng, -8.0, 8.0, -4.0, 4.0);
        let u = profile.sample(grid)?;
        batches.push(checks::check_prop1(&u, &cfg.p_list, cfg)?);
    }
    let mut reports = aggregate(batches);

    let sym = Grid2D::centered(2.0 * cfg.h, 2.0 * cfg.h, 64, 64)?;
    let gauss = Field2D::sample(sym, |x, y| (-x * x - y * y).exp())?;
    let star = steiner_rearrangement(&gauss, PlacementRule::default())?;
    let mismatches = gauss
        .values()
        .iter()
        .zip(star.values())
        .filter(|(a, b)| a.to_bits() != b.to_bits())
        .count();
    reports.push(CheckReport::exact_count(
        "prop1.canonical_gaussian_fixed",
        mismatches,
        sym.hx(),
    ));
    Ok(reports)
}

fn suite_lemma1(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "lemma1"));
    let grid = Grid1D::symmetric_domain(8.0, cfg.h)?;
    let max_shift = ((1.2 / cfg.h) as i64).max(1);
    let mut batches = Vec::with_capacity(cfg.field_count);
    for _ in 0..cfg.field_count {
        let u = BumpProfile::random(&mut rng, -6.5, -0.5).sample(grid)?;
        let v = BumpProfile::random(&mut rng, 0.5, 6.5).sample(grid)?;
        let s = rng.gen_range(0.1..0.6) * u.max_value().max(v.max_value()).max(1e-9);
        let shifts = (rng.gen_range(-max_shift..=max_shift), rng.gen_range(-max_shift..=max_shift));
        batches.push(checks::check_lemma1(&u, &v, s, shifts, cfg)?);
    }
    Ok(aggregate(batches))
}

fn suite_lemma3(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "lemma3"));
    let grid = Grid1D::symmetric_domain(8.0, cfg.h)?;
    let mut batches = Vec::with_capacity(cfg.field_count);
    for i in 0..cfg.field_count {
        let u = BumpProfile::random(&mut rng, -7.0, 7.0).sample(grid)?;
        let v = BumpProfile::random(&mut rng, -7.0, 7.0).sample(grid)?;
        let levels_seed = derive_seed(cfg.seed, &format!("lemma3.levels.{i}"));
        batches.push(checks::check_lemma3(&u, &v, &cfg.p_list, levels_seed, cfg)?);
    }
    let mut reports = aggregate(batches);

    // Equal even symmetric-decreasing inputs: the merged profile is the
    // half-argument dilation, pointwise within h * Lip.
    let sym = Grid1D::centered(cfg.h, ((16.0 / cfg.h) as usize).max(4))?;
    let g = Field1D::sample(sym, |x| (-x * x).exp())?;
    let w = crate::rearrange::coupled_rearrangement_1d(&g, &g, PlacementRule::default())?;
    let lip = (2.0f64).sqrt() * (-0.5f64).exp();
    let mut sup = 0.0f64;
    for i in 0..w.n() {
        let x = w.grid().center(i);
        sup = sup.max((w.values()[i] - (-(x / 2.0) * (x / 2.0)).exp()).abs());
    }
    reports.push(CheckReport::inequality(
        "lemma3.profile_doubling",
        sup,
        cfg.h * lip,
        1e-9,
        cfg.h,
    ));
    Ok(reports)
}

fn suite_lemma2(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "lemma2"));
    let grid = Grid1D::symmetric_domain(8.0, cfg.h)?;
    let fine = Grid1D::symmetric_domain(8.0, 0.5 * cfg.h)?;
    let count = (cfg.field_count / 2).max(4);
    let mut batches = Vec::with_capacity(count);
    for _ in 0..count {
        let pu = BumpProfile::random(&mut rng, -7.0, 7.0);
        let pv = BumpProfile::random(&mut rng, -7.0, 7.0);
        let u = pu.sample(grid)?;
        let v = pv.sample(grid)?;
        let uf = pu.sample(fine)?;
        let vf = pv.sample(fine)?;
        batches.push(checks::check_lemma2_thm1(
            &u,
            &v,
            Some((&uf, &vf)),
            &cfg.p_list,
            "lemma2",
            cfg,
        )?);
    }
    let mut reports = aggregate(batches);

    // One 2D coupled pair: per-axis contraction of the per-line merge.
    let g2 = field_grid_2d(cfg)?;
    let mut rng2 = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "lemma2.2d"));
    let u2 = BumpProfile2D::random(&mut rng2, -8.0, 8.0, -4.0, 4.0).sample(g2)?;
    let v2 = BumpProfile2D::random(&mut rng2, -8.0, 8.0, -4.0, 4.0).sample(g2)?;
    let w2 = coupled_rearrangement_2d(&u2, &v2, PlacementRule::default())?;
    for axis in [crate::grid::Axis::X, crate::grid::Axis::Y] {
        let lhs = w2.gradient_seminorm(2.0, axis)?;
        let rhs = u2.gradient_seminorm(2.0, axis)? + v2.gradient_seminorm(2.0, axis)?;
        let label = if axis == crate::grid::Axis::X { "x" } else { "y" };
        reports.push(CheckReport::inequality(
            format!("lemma2.coupled2d.grad_{label}.p2"),
            lhs,
            rhs,
            g2.hx() * rhs.abs().max(1.0),
            g2.hx(),
        ));
    }
    Ok(reports)
}

fn suite_thm1(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let h = cfg.h.min(0.02);
    let coarse = fields::offset_grid(8.0, h)?;
    let fine = fields::offset_grid(8.0, 0.5 * h)?;
    let gauss = |g: Grid1D| Field1D::sample(g, |x| (-x * x).exp());
    let sech_profile = |g: Grid1D| Field1D::sample(g, |x| fields::sech(0.7 * x));

    let mut reports = Vec::new();
    let u = gauss(coarse)?;
    let uf = gauss(fine)?;
    let batch_a = checks::check_lemma2_thm1(&u, &u, Some((&uf, &uf)), &cfg.p_list, "thm1", cfg)?;

    // Equal Gaussians, p = 2: the half-argument dilation identity forces the
    // gradient ratio to one quarter.
    let w = crate::rearrange::coupled_rearrangement_1d(&u, &u, PlacementRule::default())?;
    let lhs = w.gradient_seminorm(2.0)?;
    let rhs = 2.0 * u.gradient_seminorm(2.0)?;
    reports.push(CheckReport::equality_abs(
        "thm1.gaussian_ratio.p2",
        lhs / rhs,
        0.25,
        0.02,
        h,
    ));

    let v = sech_profile(coarse)?;
    let vf = sech_profile(fine)?;
    let batch_b = checks::check_lemma2_thm1(&u, &v, Some((&uf, &vf)), &cfg.p_list, "thm1", cfg)?;

    reports.extend(aggregate(vec![batch_a, batch_b]));
    Ok(reports)
}

fn suite_duff(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let h = cfg.h.min(0.02);
    let mut reports = Vec::new();

    let mono_grid = Grid1D::new(0.5 * h, h, (3.0 / h) as usize)?;
    let mono = Field1D::sample(mono_grid, |x| 3.0 - 0.9 * x)?;
    reports.extend(checks::check_duff(&mono, None, &cfg.p_list, false, "duff.monotone", cfg)?);

    let tent_grid = Grid1D::new(0.5 * h, h, (4.0 / h) as usize)?;
    let tent = PiecewiseLinear::tent(2.0, 2.0).sample(tent_grid)?;
    reports.extend(checks::check_duff(&tent, None, &cfg.p_list, false, "duff.tent", cfg)?);
    for &p in &cfg.p_list {
        let lhs = checks::pl_decreasing_gradient_integral(&tent, p);
        reports.push(CheckReport::equality_abs(
            format!("duff.tent.closed_form.p{p}"),
            lhs,
            4.0 * 0.5f64.powf(p),
            4.0 * h,
            h,
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "duff"));
    let grid = Grid1D::symmetric_domain(5.0, h)?;
    let fine = Grid1D::symmetric_domain(5.0, 0.5 * h)?;
    let count = (cfg.field_count / 5).max(4);
    let mut batches = Vec::with_capacity(count);
    for _ in 0..count {
        let peaks = rng.gen_range(2..=3);
        let profile = PiecewiseLinear::random_peaks(&mut rng, -4.0, 4.0, peaks);
        let f = profile.sample(grid)?;
        let ff = profile.sample(fine)?;
        batches.push(checks::check_duff(&f, Some(&ff), &cfg.p_list, true, "duff.random", cfg)?);
    }
    reports.extend(aggregate(batches));
    Ok(reports)
}

fn suite_lemma10(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let grid = Grid1D::centered(cfg.h, ((16.0 / cfg.h) as usize).max(8))?;
    let fine = Grid1D::centered(0.5 * cfg.h, ((32.0 / cfg.h) as usize).max(16))?;
    let sample4 = |g: Grid1D| -> Result<[Field1D; 4]> {
        Ok([
            Field1D::sample(g, |x| (-x * x).exp())?,
            Field1D::sample(g, |x| 0.8 * (-0.5 * x * x).exp())?,
            Field1D::sample(g, |x| 0.6 * (-(x - 0.5) * (x - 0.5)).exp())?,
            Field1D::sample(g, |x| 0.9 * (-2.0 * x * x).exp())?,
        ])
    };
    let [u, v, phi, psi] = sample4(grid)?;
    let [uf, vf, phif, psif] = sample4(fine)?;

    let mut reports = Vec::new();
    let decoupled = CoupledGSpec::decoupled(1)?;
    reports.push(checks::check_lemma10(&u, &v, &phi, &psi, &decoupled, "lemma10.decoupled", cfg)?);

    let coupled = CoupledGSpec::default_coupled(1, 1.0)?;
    let at_h = checks::check_lemma10(&u, &v, &phi, &psi, &coupled, "lemma10.coupled_overlap", cfg)?;
    let at_h2 = checks::check_lemma10(&uf, &vf, &phif, &psif, &coupled, "tmp", cfg)?;
    reports.push(CheckReport::strict(
        "lemma10.coupled_overlap_strict",
        at_h.lhs,
        at_h.rhs,
        1e-6 * at_h.rhs.abs().max(1.0),
        cfg.h,
        at_h2.margin,
    ));
    reports.push(at_h);

    // First pair supported left, second pair supported right.
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "lemma10.disjoint"));
    let u2 = BumpProfile::random(&mut rng, -7.0, -0.5).sample(grid)?;
    let v2 = BumpProfile::random(&mut rng, -7.0, -0.5).sample(grid)?;
    let phi2 = BumpProfile::random(&mut rng, 0.5, 7.0).sample(grid)?;
    let psi2 = BumpProfile::random(&mut rng, 0.5, 7.0).sample(grid)?;
    reports.push(checks::check_lemma10(
        &u2,
        &v2,
        &phi2,
        &psi2,
        &coupled,
        "lemma10.disjoint_pairs",
        cfg,
    )?);
    Ok(reports)
}

fn subadd_flow_config(h: f64) -> FlowConfig {
    let mut cfg = FlowConfig::default_for(h);
    cfg.energy_tol = 1e-10;
    cfg.max_iter = 150_000;
    cfg
}

fn suite_subadd(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let spec = crate::energy::NonlinearitySpec::power(3.0, 1)?;
    let h = 0.0625;
    let grid = Grid1D::symmetric_domain(40.0, h)?;
    let _ = cfg;
    checks::check_subadditivity(&spec, 1.0, 1.0, &grid, &subadd_flow_config(h))
}

fn suite_system_subadd(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let h = 0.1;
    let grid = Grid1D::symmetric_domain(30.0, h)?;
    let flow = subadd_flow_config(h);
    let coupled = CoupledGSpec::default_coupled(1, 0.5)?;
    let decoupled = CoupledGSpec::decoupled(1)?;

    let mut reports = checks::check_system_subadditivity(
        &coupled,
        ((1.0, 0.0), (0.0, 1.0)),
        &grid,
        &flow,
        SystemChainMode::Strict,
    )?;
    reports.extend(checks::check_system_subadditivity(
        &decoupled,
        ((1.0, 0.0), (0.0, 1.0)),
        &grid,
        &flow,
        SystemChainMode::DecoupledEquality,
    )?);
    reports.push(checks::validate_coercivity(
        &coupled,
        1.0,
        500,
        derive_seed(cfg.seed, "lemma9"),
    )?);
    reports.extend(checks::check_g_conditions(&coupled, 4.0));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [
            Suite::Prop1,
            Suite::Lemma1,
            Suite::Lemma3,
            Suite::Lemma2,
            Suite::Thm1,
            Suite::Duff,
            Suite::Lemma10,
            Suite::Subadd,
            Suite::SystemSubadd,
            Suite::All,
        ] {
            assert_eq!(Suite::parse(s.name()), Some(s));
        }
        assert_eq!(Suite::parse("bogus"), None);
    }

    #[test]
    fn strict_report_requires_both_margins() {
        let ok = CheckReport::strict("t", 0.0, 1.0, 1e-6, 0.1, 0.9);
        assert!(ok.pass);
        let bad_refinement = CheckReport::strict("t", 0.0, 1.0, 1e-6, 0.1, 0.0);
        assert!(!bad_refinement.pass);
        let bad_margin = CheckReport::strict("t", 1.0, 1.0, 1e-6, 0.1, 0.9);
        assert!(!bad_margin.pass);
    }

    #[test]
    fn equality_report_uses_relative_scale() {
        let rep = CheckReport::equality("t", 1e6, 1e6 + 1e-7, 1e-12, 0.1);
        assert!(rep.pass);
        let rep = CheckReport::equality("t", 1.0, 1.1, 1e-12, 0.1);
        assert!(!rep.pass);
    }

    #[test]
    fn fast_suites_pass_with_small_config() {
        let cfg = SuiteConfig { field_count: 8, h: 0.125, ..Default::default() };
        for suite in [Suite::Prop1, Suite::Lemma1, Suite::Lemma3, Suite::Lemma2] {
            let reports = run_suite(&cfg, suite, 1).unwrap();
            assert!(!reports.is_empty());
            for r in &reports {
                assert!(r.pass, "{}: margin {} tol {}", r.check_id, r.margin, r.tolerance);
            }
        }
    }

    #[test]
    fn reports_sorted_and_deterministic_across_jobs() {
        let cfg = SuiteConfig { field_count: 6, h: 0.125, ..Default::default() };
        let a = run_suite(&cfg, Suite::Lemma3, 1).unwrap();
        let b = run_suite(&cfg, Suite::Lemma3, 4).unwrap();
        let ser_a = serde_json::to_string(&a).unwrap();
        let ser_b = serde_json::to_string(&b).unwrap();
        assert_eq!(ser_a, ser_b);
        let mut ids: Vec<&str> = a.iter().map(|r| r.check_id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        ids.sort_unstable();
        assert_eq!(ids, sorted);
    }
}
