//! Executable counterparts of the rearrangement and energy inequalities.
//!
//! Exact-class checks (equimeasurability, p-integral additivity, translation
//! and truncation identities) compare value multisets bitwise or quantities
//! to 1e-12 relative. Approximate-class checks (gradient contractions, the
//! multiplicity-weighted rearrangement bound, energy chains) carry an
//! h-scaled tolerance, and every strict claim records a second margin on a
//! half-spacing grid: a single-grid strict margin can be discretization
//! noise, refinement evidence is the honest discrete analogue.

use std::collections::BTreeMap;

use crate::energy::{
    certify_g4, certify_g5, coercivity_bound, scalar_energy_1d, system_energy_1d, CoupledGSpec,
    NonlinearitySpec,
};
use crate::error::{Error, Result};
use crate::grid::{multiset_sum, Axis, Field1D, Field2D, Grid1D};
use crate::minimize::{minimize_scalar, minimize_system, ConstraintSpec, FlowConfig, MinimizeResult};
use crate::rearrange::{
    coupled_rearrangement_1d, multiplicity, steiner_rearrangement, symmetric_rearrangement_1d,
    truncate_shift, value_multiset, MultiplicityQuery, PlacementRule,
};
use crate::verify::fields::BumpProfile;
use crate::verify::{CheckReport, SuiteConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fmt_p(p: f64) -> String {
    format!("{p}")
}

fn count_bit_mismatches(a: &[f64], b: &[f64]) -> usize {
    if a.len() != b.len() {
        return a.len().max(b.len());
    }
    a.iter().zip(b).filter(|(x, y)| x.to_bits() != y.to_bits()).count()
}

fn multiset_mismatches(a: &[f64], b: &[f64]) -> usize {
    let (ma, mb) = (value_multiset(a), value_multiset(b));
    if ma.len() != mb.len() {
        return ma.len().max(mb.len());
    }
    ma.iter().zip(&mb).filter(|(x, y)| x != y).count()
}

/// Well-known facts about the per-line rearrangement: full-dimensional
/// equimeasurability, preservation of integrals of monotone integrands, and
/// per-axis gradient contraction.
pub fn check_prop1(u: &Field2D, p_list: &[f64], _cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let star = steiner_rearrangement(u, PlacementRule::default())?;
    let h = u.grid().hx();
    let mut reports = Vec::new();

    reports.push(CheckReport::exact_count(
        "prop1.i.equimeasurable",
        multiset_mismatches(u.values(), star.values()),
        h,
    ));

    for &p in p_list {
        let a = u.lp_norm(p)?;
        let b = star.lp_norm(p)?;
        reports.push(CheckReport::equality(
            format!("prop1.ii.phi_power.p{}", fmt_p(p)),
            b,
            a,
            1e-12,
            h,
        ));
    }
    // A genuinely mixed monotone pair: phi = phi1 + phi2 with phi1 = s^3
    // increasing and phi2 = -s decreasing.
    let mixed = |s: f64| s * s * s - s;
    reports.push(CheckReport::equality(
        "prop1.ii.phi_mixed",
        star.quadrature(mixed)?,
        u.quadrature(mixed)?,
        1e-12,
        h,
    ));

    for &p in p_list {
        let lhs_x = star.gradient_seminorm(p, Axis::X)?;
        let rhs_x = u.gradient_seminorm(p, Axis::X)?;
        reports.push(CheckReport::inequality(
            format!("prop1.iii.grad_x.p{}", fmt_p(p)),
            lhs_x,
            rhs_x,
            h * rhs_x.abs().max(1.0),
            h,
        ));
        let lhs_y = star.gradient_seminorm(p, Axis::Y)?;
        let rhs_y = u.gradient_seminorm(p, Axis::Y)?;
        reports.push(CheckReport::inequality(
            format!("prop1.iii.grad_y.p{}", fmt_p(p)),
            lhs_y,
            rhs_y,
            1e-9 * rhs_y.abs().max(1.0),
            h,
        ));
    }
    Ok(reports)
}

/// Structural identities of the coupled rearrangement: translation
/// invariance, the disjoint-support identity, and commutation with soft
/// truncation. All three are bit-exact at the multiset level.
pub fn check_lemma1(
    u: &Field1D,
    v: &Field1D,
    s: f64,
    shifts: (i64, i64),
    _cfg: &SuiteConfig,
) -> Result<Vec<CheckReport>> {
    let rule = PlacementRule::default();
    let h = u.h();
    let mut reports = Vec::new();

    let w = coupled_rearrangement_1d(u, v, rule)?;

    let shifted_u = u.shift_cells(shifts.0)?;
    let shifted_v = v.shift_cells(shifts.1)?;
    let w_shifted = coupled_rearrangement_1d(&shifted_u, &shifted_v, rule)?;
    reports.push(
        CheckReport::exact_count(
            "lemma1.i.translation",
            count_bit_mismatches(w.values(), w_shifted.values()),
            h,
        )
        .with_meta("shifts", format!("{},{}", shifts.0, shifts.1)),
    );

    let overlap = u
        .values()
        .iter()
        .zip(v.values())
        .any(|(a, b)| *a != 0.0 && *b != 0.0);
    if overlap {
        reports.push(
            CheckReport::exact_count("lemma1.ii.disjoint_support", 0, h)
                .with_meta("skipped", "support-overlap"),
        );
    } else {
        if u.grid() != v.grid() {
            return Err(Error::GridMismatch {
                reason: "disjoint-support identity needs a common grid".into(),
            });
        }
        let sum_values: Vec<f64> = u.values().iter().zip(v.values()).map(|(a, b)| a + b).collect();
        let sum_field = Field1D::new(*u.grid(), sum_values)?;
        let sum_star = symmetric_rearrangement_1d(&sum_field, rule)?;
        // The coupled output carries n extra zero cells; compare multisets
        // after padding.
        let mut padded = sum_star.values().to_vec();
        padded.extend(std::iter::repeat(0.0).take(w.n() - sum_star.n()));
        reports.push(CheckReport::exact_count(
            "lemma1.ii.disjoint_support",
            multiset_mismatches(w.values(), &padded),
            h,
        ));
    }

    let truncate_then_couple =
        coupled_rearrangement_1d(&truncate_shift(u, s)?, &truncate_shift(v, s)?, rule)?;
    let couple_then_truncate = truncate_shift(&w, s)?;
    reports.push(
        CheckReport::exact_count(
            "lemma1.iii.truncation",
            count_bit_mismatches(truncate_then_couple.values(), couple_then_truncate.values()),
            h,
        )
        .with_meta("s", format!("{s}")),
    );
    Ok(reports)
}

/// Measure and integral additivity of the coupled rearrangement:
/// distribution additivity at seeded levels (exact integer counts) and
/// p-integral additivity to 1e-12 relative.
pub fn check_lemma3(
    u: &Field1D,
    v: &Field1D,
    p_list: &[f64],
    levels_seed: u64,
    _cfg: &SuiteConfig,
) -> Result<Vec<CheckReport>> {
    let rule = PlacementRule::default();
    let h = u.h();
    let w = coupled_rearrangement_1d(u, v, rule)?;
    let mut reports = Vec::new();

    for &p in p_list {
        reports.push(CheckReport::equality(
            format!("lemma3.lp_additivity.p{}", fmt_p(p)),
            w.lp_norm(p)?,
            u.lp_norm(p)? + v.lp_norm(p)?,
            1e-12,
            h,
        ));
    }

    let top = u.max_value().max(v.max_value());
    let mut mismatches = 0usize;
    if top > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(levels_seed);
        for _ in 0..64 {
            let t = top * rng.gen_range(1e-6..1.0);
            if w.count_above(t) != u.count_above(t) + v.count_above(t) {
                mismatches += 1;
            }
        }
    }
    reports.push(CheckReport::exact_count(
        "lemma3.distribution_additivity",
        mismatches,
        h,
    ));

    let phi = |s: f64| s / (1.0 + s);
    reports.push(CheckReport::equality(
        "lemma3.quadrature_additivity",
        w.quadrature(phi)?,
        u.quadrature(phi)? + v.quadrature(phi)?,
        1e-12,
        h,
    ));
    Ok(reports)
}

/// Positive and unimodal along the grid: the sampled form of "positive,
/// even, non-increasing in |x|" that the strict gradient inequality assumes.
fn qualifies_for_strict(f: &Field1D) -> (bool, bool) {
    let vals = f.values();
    let positive = vals.iter().all(|v| *v > 0.0);
    let peak = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let unimodal = vals.windows(2).enumerate().all(|(i, w)| {
        if i < peak {
            w[1] >= w[0]
        } else {
            w[1] <= w[0]
        }
    });
    (positive, unimodal)
}

/// Gradient contraction of the coupled rearrangement; when both inputs
/// qualify (positive, unimodal) and a half-spacing resample is supplied, the
/// strict variant is reported with its refinement margin.
pub fn check_lemma2_thm1(
    u: &Field1D,
    v: &Field1D,
    refined: Option<(&Field1D, &Field1D)>,
    p_list: &[f64],
    id_prefix: &str,
    _cfg: &SuiteConfig,
) -> Result<Vec<CheckReport>> {
    let rule = PlacementRule::default();
    let h = u.h();
    let w = coupled_rearrangement_1d(u, v, rule)?;
    let (pos_u, uni_u) = qualifies_for_strict(u);
    let (pos_v, uni_v) = qualifies_for_strict(v);
    let qualifying = pos_u && uni_u && pos_v && uni_v;
    let mut reports = Vec::new();

    for &p in p_list {
        let lhs = w.gradient_seminorm(p)?;
        let rhs = u.gradient_seminorm(p)? + v.gradient_seminorm(p)?;
        let mut rep = CheckReport::inequality(
            format!("{id_prefix}.coupled_grad.p{}", fmt_p(p)),
            lhs,
            rhs,
            h * rhs.abs().max(1.0),
            h,
        );
        if !qualifying {
            rep = rep.with_meta("strict_variant", "downgraded: inputs not positive unimodal");
        }
        reports.push(rep);
    }

    if qualifying {
        if let Some((uf, vf)) = refined {
            let wf = coupled_rearrangement_1d(uf, vf, rule)?;
            for &p in p_list {
                let lhs = w.gradient_seminorm(p)?;
                let rhs = u.gradient_seminorm(p)? + v.gradient_seminorm(p)?;
                let lhs_f = wf.gradient_seminorm(p)?;
                let rhs_f = uf.gradient_seminorm(p)? + vf.gradient_seminorm(p)?;
                reports.push(
                    CheckReport::strict(
                        format!("{id_prefix}.strict.p{}", fmt_p(p)),
                        lhs,
                        rhs,
                        1e-6 * rhs.abs().max(1.0),
                        h,
                        rhs_f - lhs_f,
                    )
                    .with_meta("positive", "true")
                    .with_meta("unimodal", "true"),
                );
            }
        }
    }
    Ok(reports)
}

/// Exact p-integral of the derivative of the decreasing rearrangement of the
/// piecewise-linear interpolant through the samples.
///
/// Between consecutive distinct sample values the distribution function is
/// linear with slope `-B`, `B = sum of h/|dv|` over the segments spanning
/// the band, so the rearrangement contributes `(band width) * B^(1-p)`.
/// Summing the sorted samples' forward differences instead would double the
/// local slope wherever a value appears with multiplicity, inflating the
/// integral by up to `2^(p-1)`.
pub fn pl_decreasing_gradient_integral(f: &Field1D, p: f64) -> f64 {
    let vals = f.values();
    let h = f.h();
    let mut distinct = vals.to_vec();
    distinct.sort_unstable_by(f64::total_cmp);
    distinct.dedup();
    let mut total = 0.0;
    for band in distinct.windows(2) {
        let (lo, hi) = (band[0], band[1]);
        let mut b = 0.0;
        for seg in vals.windows(2) {
            let (mn, mx) = if seg[0] <= seg[1] { (seg[0], seg[1]) } else { (seg[1], seg[0]) };
            if mn <= lo && mx >= hi {
                b += h / (mx - mn);
            }
        }
        if b > 0.0 {
            total += (hi - lo) * b.powf(1.0 - p);
        }
    }
    total
}

/// Multiplicity-weighted derivative integral `sum h |slope / N_f(mid)|^p`
/// over the interpolant's segments. Returns the integral and the number of
/// midpoint levels that had to be perturbed off a sample collision.
pub fn duff_rhs(f: &Field1D, p: f64) -> Result<(f64, usize)> {
    let vals = f.values();
    let h = f.h();
    let max = vals.iter().cloned().fold(0.0f64, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = (max - min).max(f64::MIN_POSITIVE);
    let mut sorted = vals.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let collides = |level: f64| sorted.binary_search_by(|v| v.total_cmp(&level)).is_ok();

    let mut total = 0.0;
    let mut perturbed = 0usize;
    for seg in vals.windows(2) {
        let dv = seg[1] - seg[0];
        // Segments below resolution contribute nothing and their midpoint
        // cannot hold a perturbed level; skip them.
        if dv.abs() <= 1e-6 * range {
            continue;
        }
        let mut level = 0.5 * (seg[0] + seg[1]);
        let mut tries = 0;
        while collides(level) && tries < 16 {
            level += 1e-9 * range;
            tries += 1;
        }
        if tries > 0 {
            perturbed += 1;
        }
        let n = multiplicity(f, MultiplicityQuery { level })?;
        debug_assert!(n >= 1);
        total += h * (dv.abs() / h / n as f64).powf(p);
    }
    Ok((total, perturbed))
}

/// The decreasing-rearrangement derivative bound: equality cases (p = 1, or
/// monotone/symmetric profiles) within an h-scaled tolerance, strict cases
/// with a refinement margin. `id_prefix` distinguishes profile families.
pub fn check_duff(
    f: &Field1D,
    refined: Option<&Field1D>,
    p_list: &[f64],
    expect_strict: bool,
    id_prefix: &str,
    _cfg: &SuiteConfig,
) -> Result<Vec<CheckReport>> {
    let min = f.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        return Err(Error::NegativeValues { what: "duff input", min });
    }
    let h = f.h();
    let mut reports = Vec::new();
    for &p in p_list {
        let lhs = pl_decreasing_gradient_integral(f, p);
        let (rhs, perturbed) = duff_rhs(f, p)?;
        let strict_case = expect_strict && p > 1.0;
        let mut rep = if strict_case {
            let fr = refined.ok_or_else(|| Error::Config {
                reason: "strict variant needs a half-spacing resample".into(),
            })?;
            let lhs_f = pl_decreasing_gradient_integral(fr, p);
            let (rhs_f, _) = duff_rhs(fr, p)?;
            CheckReport::strict(
                format!("{id_prefix}.strict.p{}", fmt_p(p)),
                lhs,
                rhs,
                1e-4 * rhs.abs().max(1.0),
                h,
                rhs_f - lhs_f,
            )
        } else {
            CheckReport::equality_abs(
                format!("{id_prefix}.equality.p{}", fmt_p(p)),
                lhs,
                rhs,
                h * rhs.abs().max(1.0),
                h,
            )
        };
        if perturbed > 0 {
            rep = rep.with_meta("perturbed_levels", format!("{perturbed}"));
        }
        reports.push(rep);
    }
    Ok(reports)
}

fn coupled_potential(u: &Field1D, v: &Field1D, spec: &CoupledGSpec) -> f64 {
    let h = u.h();
    let terms = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| h * spec.g(a * a, b * b))
        .collect();
    multiset_sum(terms)
}

/// Superadditivity of the coupled potential under component-wise coupled
/// rearrangement. Exact equality when the coupling vanishes; a genuine gain
/// when the coupling is active and the pairs overlap.
pub fn check_lemma10(
    u: &Field1D,
    v: &Field1D,
    phi: &Field1D,
    psi: &Field1D,
    spec: &CoupledGSpec,
    id: &str,
    _cfg: &SuiteConfig,
) -> Result<CheckReport> {
    let top = [u, v, phi, psi]
        .iter()
        .map(|f| f.max_value())
        .fold(0.0f64, f64::max);
    certify_g4(spec, (top * top).max(1.0), 50)?;
    let rule = PlacementRule::default();
    let w1 = coupled_rearrangement_1d(u, phi, rule)?;
    let w2 = coupled_rearrangement_1d(v, psi, rule)?;
    let lhs = coupled_potential(u, v, spec) + coupled_potential(phi, psi, spec);
    let rhs = coupled_potential(&w1, &w2, spec);
    Ok(CheckReport::inequality(
        id,
        lhs,
        rhs,
        1e-12 * rhs.abs().max(1.0),
        u.h(),
    ))
}

fn refined_grid(grid: &Grid1D) -> Result<Grid1D> {
    Grid1D::symmetric_domain(0.5 * grid.length(), 0.5 * grid.h())
}

fn refined_cfg(cfg: &FlowConfig) -> FlowConfig {
    let mut c = cfg.clone();
    c.tau *= 0.5;
    c
}

struct ScalarChain {
    e_a: f64,
    e_b: f64,
    e_ab: f64,
    i_w: f64,
    mass_w: f64,
    converged: bool,
}

fn scalar_chain(
    spec: &NonlinearitySpec,
    alpha: f64,
    beta: f64,
    grid: &Grid1D,
    cfg: &FlowConfig,
) -> Result<ScalarChain> {
    let run = |mass: f64| -> Result<MinimizeResult<Field1D>> {
        minimize_scalar(spec, &ConstraintSpec::scalar(mass), grid, cfg)
    };
    let ra = run(alpha)?;
    let rb = run(beta)?;
    let rab = run(alpha + beta)?;
    let w = coupled_rearrangement_1d(&ra.fields[0], &rb.fields[0], PlacementRule::default())?;
    let i_w = scalar_energy_1d(&w, spec)?.total;
    Ok(ScalarChain {
        e_a: ra.energy.total,
        e_b: rb.energy.total,
        e_ab: rab.energy.total,
        i_w,
        mass_w: w.mass(),
        converged: ra.converged && rb.converged && rab.converged,
    })
}

/// The strict subadditivity chain `E_{a+b} <= I[u*v] < E_a + E_b` built from
/// computed minimizers, with the mass identity of the glued state and
/// refinement margins for the strict links.
pub fn check_subadditivity(
    spec: &NonlinearitySpec,
    alpha: f64,
    beta: f64,
    grid: &Grid1D,
    cfg: &FlowConfig,
) -> Result<Vec<CheckReport>> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::InvalidParameter { what: "alpha, beta must be positive", value: alpha.min(beta) });
    }
    let h = grid.h();
    let prefix = format!("subadd.a{alpha}.b{beta}");
    let coarse = scalar_chain(spec, alpha, beta, grid, cfg)?;
    let fine = scalar_chain(spec, alpha, beta, &refined_grid(grid)?, &refined_cfg(cfg))?;
    let energy_slack = 1e-5 + 30.0 * cfg.energy_tol;
    let strict_delta = 1e-3;

    let mut reports = vec![
        CheckReport::equality(
            format!("{prefix}.mass_identity"),
            coarse.mass_w,
            alpha + beta,
            1e-12,
            h,
        ),
        CheckReport::inequality(
            format!("{prefix}.chain_lower"),
            coarse.e_ab,
            coarse.i_w,
            energy_slack,
            h,
        ),
        CheckReport::strict(
            format!("{prefix}.chain_strict"),
            coarse.i_w,
            coarse.e_a + coarse.e_b,
            strict_delta,
            h,
            fine.e_a + fine.e_b - fine.i_w,
        ),
        CheckReport::strict(
            format!("{prefix}.strict_subadditivity"),
            coarse.e_ab,
            coarse.e_a + coarse.e_b,
            strict_delta,
            h,
            fine.e_a + fine.e_b - fine.e_ab,
        ),
    ];
    if !(coarse.converged && fine.converged) {
        for rep in &mut reports {
            rep.pass = false;
            rep.metadata.insert("inconclusive".into(), "flow did not converge".into());
        }
    }
    Ok(reports)
}

/// What the two-component chain should exhibit for the given spec/masses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemChainMode {
    /// Active coupling (or overlapping mass splits): strict inequality.
    Strict,
    /// Decoupled spec with disjoint mass splits: equality within tolerance.
    DecoupledEquality,
}

struct SystemChain {
    e_1: f64,
    e_2: f64,
    e_sum: f64,
    j_w: f64,
    mass_w1: f64,
    mass_w2: f64,
    converged: bool,
}

fn system_chain(
    spec: &CoupledGSpec,
    masses: ((f64, f64), (f64, f64)),
    grid: &Grid1D,
    cfg: &FlowConfig,
) -> Result<SystemChain> {
    let ((a1, b1), (a2, b2)) = masses;
    let r1 = minimize_system(spec, &ConstraintSpec::pair(a1, b1), grid, cfg)?;
    let r2 = minimize_system(spec, &ConstraintSpec::pair(a2, b2), grid, cfg)?;
    let r12 = minimize_system(spec, &ConstraintSpec::pair(a1 + a2, b1 + b2), grid, cfg)?;
    let rule = PlacementRule::default();
    let w1 = coupled_rearrangement_1d(&r1.fields[0], &r2.fields[0], rule)?;
    let w2 = coupled_rearrangement_1d(&r1.fields[1], &r2.fields[1], rule)?;
    let j_w = system_energy_1d(&w1, &w2, spec)?.total;
    Ok(SystemChain {
        e_1: r1.energy.total,
        e_2: r2.energy.total,
        e_sum: r12.energy.total,
        j_w,
        mass_w1: w1.mass(),
        mass_w2: w2.mass(),
        converged: r1.converged && r2.converged && r12.converged,
    })
}

/// Two-component subadditivity via component-wise coupled rearrangement,
/// plus negativity of all computed energies.
pub fn check_system_subadditivity(
    spec: &CoupledGSpec,
    masses: ((f64, f64), (f64, f64)),
    grid: &Grid1D,
    cfg: &FlowConfig,
    mode: SystemChainMode,
) -> Result<Vec<CheckReport>> {
    let ((a1, b1), (a2, b2)) = masses;
    let h = grid.h();
    let prefix = format!("system_subadd.{a1},{b1}+{a2},{b2}");
    let coarse = system_chain(spec, masses, grid, cfg)?;
    let fine = system_chain(spec, masses, &refined_grid(grid)?, &refined_cfg(cfg))?;
    let energy_slack = 1e-5 + 30.0 * cfg.energy_tol;
    let strict_delta = 1e-3;

    let mut reports = vec![
        CheckReport::equality(
            format!("{prefix}.mass_identity_u"),
            coarse.mass_w1,
            a1 + a2,
            1e-12,
            h,
        ),
        CheckReport::equality(
            format!("{prefix}.mass_identity_v"),
            coarse.mass_w2,
            b1 + b2,
            1e-12,
            h,
        ),
        CheckReport::inequality(
            format!("{prefix}.chain_lower"),
            coarse.e_sum,
            coarse.j_w,
            energy_slack,
            h,
        ),
    ];
    match mode {
        SystemChainMode::Strict => {
            reports.push(CheckReport::strict(
                format!("{prefix}.chain_strict"),
                coarse.j_w,
                coarse.e_1 + coarse.e_2,
                strict_delta,
                h,
                fine.e_1 + fine.e_2 - fine.j_w,
            ));
            reports.push(CheckReport::strict(
                format!("{prefix}.strict_subadditivity"),
                coarse.e_sum,
                coarse.e_1 + coarse.e_2,
                strict_delta,
                h,
                fine.e_1 + fine.e_2 - fine.e_sum,
            ));
        }
        SystemChainMode::DecoupledEquality => {
            reports.push(CheckReport::equality_abs(
                format!("{prefix}.decoupled_equality"),
                coarse.e_sum,
                coarse.e_1 + coarse.e_2,
                1e-4,
                h,
            ));
        }
    }
    // Negativity of every computed constrained energy, persisting under
    // refinement.
    for (label, coarse_e, fine_e) in [
        ("e_first", coarse.e_1, fine.e_1),
        ("e_second", coarse.e_2, fine.e_2),
        ("e_sum", coarse.e_sum, fine.e_sum),
    ] {
        reports.push(CheckReport::strict(
            format!("{prefix}.negativity.{label}"),
            coarse_e,
            0.0,
            1e-4,
            h,
            -fine_e,
        ));
    }
    if !(coarse.converged && fine.converged) {
        for rep in &mut reports {
            rep.pass = false;
            rep.metadata.insert("inconclusive".into(), "flow did not converge".into());
        }
    }
    Ok(reports)
}

/// Validate the returned coercivity constant on seeded random constrained
/// pairs: `1/4 (|∇u|² + |∇v|²) <= J[u,v] + C` for all pairs with masses in
/// `(0, r_bound]`.
pub fn validate_coercivity(
    spec: &CoupledGSpec,
    r_bound: f64,
    pairs: usize,
    seed: u64,
) -> Result<CheckReport> {
    let c = coercivity_bound(spec, r_bound)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Grid1D::symmetric_domain(8.0, 0.0625)?;
    let mut worst_lhs = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let mut u = BumpProfile::random(&mut rng, -8.0, 8.0).sample(grid)?;
        let mut v = BumpProfile::random(&mut rng, -8.0, 8.0).sample(grid)?;
        for f in [&mut u, &mut v] {
            let target = r_bound * rng.gen_range(0.05..1.0);
            let mass = f.mass();
            if mass > 0.0 {
                let scale = (target / mass).sqrt();
                f.values_mut().iter_mut().for_each(|x| *x *= scale);
            }
        }
        let grads = u.gradient_seminorm(2.0)? + v.gradient_seminorm(2.0)?;
        let j = system_energy_1d(&u, &v, spec)?.total;
        worst_lhs = worst_lhs.max(0.25 * grads - j);
    }
    Ok(CheckReport::inequality(
        "system_subadd.lemma9_coercivity",
        worst_lhs,
        c,
        1e-9 * c.abs().max(1.0),
        grid.h(),
    )
    .with_meta("pairs", format!("{pairs}"))
    .with_meta("constant", format!("{c}")))
}

/// Lattice certification reports for the coupling monotonicity and strict
/// superadditivity conditions.
pub fn check_g_conditions(spec: &CoupledGSpec, s_max: f64) -> Vec<CheckReport> {
    let g4 = certify_g4(spec, s_max, 50);
    let g5 = certify_g5(spec, s_max, 50);
    vec![
        CheckReport::exact_count("system_subadd.g4_lattice", usize::from(g4.is_err()), 0.0)
            .with_meta("s_max", format!("{s_max}")),
        CheckReport::exact_count("system_subadd.g5_lattice", usize::from(g5.is_err()), 0.0)
            .with_meta("s_max", format!("{s_max}")),
    ]
}

/// Per-check metadata map type re-exported for callers assembling reports.
pub type Metadata = BTreeMap<String, String>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    fn tent_field(h: f64) -> Field1D {
        let grid = Grid1D::new(0.5 * h, h, (4.0 / h) as usize).unwrap();
        Field1D::sample(grid, |x| x.min(4.0 - x).max(0.0)).unwrap()
    }

    #[test]
    fn pl_integral_tent_equals_closed_form() {
        // Tent on [0,4] with unit slopes: integral of |(f#)'|^p = 4 (1/2)^p.
        let f = tent_field(0.01);
        for p in [1.0, 2.0, 3.0] {
            let lhs = pl_decreasing_gradient_integral(&f, p);
            let expected = 4.0 * 0.5f64.powf(p);
            assert!(
                (lhs - expected).abs() < 0.02,
                "p = {p}: {lhs} vs {expected}"
            );
        }
    }

    #[test]
    fn duff_rhs_tent_matches_closed_form() {
        let f = tent_field(0.01);
        for p in [1.0, 2.0, 3.0] {
            let (rhs, _) = duff_rhs(&f, p).unwrap();
            let expected = 4.0 * 0.5f64.powf(p);
            assert!((rhs - expected).abs() < 0.02, "p = {p}: {rhs} vs {expected}");
        }
    }

    #[test]
    fn duff_equality_for_strictly_monotone_profile() {
        let h = 0.01;
        let grid = Grid1D::new(0.5 * h, h, 300).unwrap();
        let f = Field1D::sample(grid, |x| 3.0 - 0.9 * x).unwrap();
        for p in [1.0, 2.0, 3.0] {
            let lhs = pl_decreasing_gradient_integral(&f, p);
            let (rhs, _) = duff_rhs(&f, p).unwrap();
            assert!((lhs - rhs).abs() <= 1e-9 * rhs, "p = {p}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn duff_strict_for_two_bump_profile() {
        use crate::verify::fields::PiecewiseLinear;
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let profile = PiecewiseLinear::random_peaks(&mut rng, 0.0, 8.0, 2);
        let h = 0.02;
        let grid = Grid1D::new(0.5 * h - 1.0, h, 500).unwrap();
        let f = profile.sample(grid).unwrap();
        for p in [2.0, 3.0] {
            let lhs = pl_decreasing_gradient_integral(&f, p);
            let (rhs, _) = duff_rhs(&f, p).unwrap();
            assert!(lhs < rhs - 1e-3 * rhs, "p = {p}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn lemma10_equality_when_decoupled() {
        let spec = CoupledGSpec::decoupled(1).unwrap();
        let grid = Grid1D::centered(0.1, 128).unwrap();
        let u = Field1D::sample(grid, |x| (-x * x).exp()).unwrap();
        let v = Field1D::sample(grid, |x| 0.8 * (-0.5 * x * x).exp()).unwrap();
        let phi = Field1D::sample(grid, |x| 0.6 * (-(x - 1.0) * (x - 1.0)).exp()).unwrap();
        let psi = Field1D::sample(grid, |x| 0.9 * (-2.0 * x * x).exp()).unwrap();
        let cfg = SuiteConfig::default();
        let rep = check_lemma10(&u, &v, &phi, &psi, &spec, "t", &cfg).unwrap();
        assert!(rep.pass);
        assert!(rep.margin.abs() <= rep.tolerance);
    }

    #[test]
    fn lemma10_strict_gain_when_coupled_overlapping() {
        let spec = CoupledGSpec::default_coupled(1, 1.0).unwrap();
        let grid = Grid1D::centered(0.1, 128).unwrap();
        let u = Field1D::sample(grid, |x| (-x * x).exp()).unwrap();
        let v = Field1D::sample(grid, |x| 0.8 * (-0.5 * x * x).exp()).unwrap();
        let phi = Field1D::sample(grid, |x| 0.6 * (-(x - 0.5) * (x - 0.5)).exp()).unwrap();
        let psi = Field1D::sample(grid, |x| 0.9 * (-2.0 * x * x).exp()).unwrap();
        let cfg = SuiteConfig::default();
        let rep = check_lemma10(&u, &v, &phi, &psi, &spec, "t", &cfg).unwrap();
        assert!(rep.pass && rep.margin > 1e-3);
    }

    #[test]
    fn coercivity_validates_on_random_pairs() {
        let spec = CoupledGSpec::default_coupled(1, 0.5).unwrap();
        let rep = validate_coercivity(&spec, 1.0, 100, 5).unwrap();
        assert!(rep.pass, "margin {}", rep.margin);
    }
}
