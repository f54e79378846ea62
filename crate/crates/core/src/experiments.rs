//! Self-judging numerical checks of the spectral theorems.
//!
//! Every check returns an [`ExperimentReport`] whose evidence is enough to
//! recompute the verdict by hand. Checks are deterministic: the only
//! randomness is a seeded ChaCha8 stream for probe vectors.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigensolver::{
    build_pencil, canonical_sign, classify_vector, rayleigh_quotient, smallest_eigenpairs,
    EigenResult, SignClass, DEFAULT_GAP_THRESHOLD, DEFAULT_REL_THRESHOLD, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::grid::{build_grid, component_restriction, Domain, Grid};
use crate::linalg::{dot, norm_inf, symmetric_eigenvalues, Matrix};
use crate::measure::{MeasureAtom, SignedMeasure};
use crate::operator::seminorm_sq;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize),
    serde(rename_all = "snake_case")
)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// One point of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SweepRow {
    pub parameter: f64,
    pub lambda1: f64,
    pub lambda2: Option<f64>,
    pub gap: Option<f64>,
    pub residual1: f64,
    /// Extremes of the first eigenvector over the whole grid.
    pub min_v: f64,
    pub max_v: f64,
}

impl SweepRow {
    pub fn from_result(parameter: f64, r: &EigenResult) -> Self {
        let v = &r.vectors[0];
        SweepRow {
            parameter,
            lambda1: r.lambdas[0],
            lambda2: r.lambdas.get(1).copied(),
            gap: r.gap,
            residual1: r.residuals[0],
            min_v: v.iter().copied().fold(f64::INFINITY, f64::min),
            max_v: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExperimentReport {
    pub name: String,
    pub verdict: Verdict,
    pub evidence: Vec<(String, f64)>,
    /// Numeric inputs of the check, flattened.
    pub parameters: Vec<(String, Vec<f64>)>,
    pub tolerances: Vec<(String, f64)>,
    pub rows: Vec<SweepRow>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    fn new(name: &str) -> Self {
        ExperimentReport {
            name: name.to_string(),
            verdict: Verdict::Inconclusive,
            evidence: Vec::new(),
            parameters: Vec::new(),
            tolerances: Vec::new(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn ev(&mut self, label: impl Into<String>, value: f64) {
        self.evidence.push((label.into(), value));
    }

    fn flag(&mut self, label: impl Into<String>, ok: bool) {
        self.ev(label, if ok { 1.0 } else { 0.0 });
    }

    fn param(&mut self, label: &str, values: &[f64]) {
        self.parameters.push((label.to_string(), values.to_vec()));
    }

    fn domain_param(&mut self, label: &str, d: &Domain) {
        let flat: Vec<f64> = d.intervals().iter().flat_map(|&(a, b)| [a, b]).collect();
        self.param(label, &flat);
    }

    fn tol(&mut self, label: &str, value: f64) {
        self.tolerances.push((label.to_string(), value));
    }

    /// Evidence value by label.
    pub fn get(&self, label: &str) -> Option<f64> {
        self.evidence
            .iter()
            .find(|(l, _)| l == label)
            .map(|&(_, v)| v)
    }
}

/// `mu+ - mu-` with `s_bar` at the top plus order, which is admissible
/// whenever any threshold is.
pub fn admissible_measure(plus: &[MeasureAtom], minus: &[MeasureAtom]) -> Result<SignedMeasure> {
    let top = plus
        .iter()
        .filter(|a| a.weight > 0.0)
        .map(|a| a.s)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Err(Error::Structural(
            "mu+ needs an atom of positive order and weight".into(),
        ));
    }
    SignedMeasure::new(plus, minus, top)
}

/// `delta_{s_plus} - delta_{s_minus}`.
pub fn dirac_measure(s_plus: f64, s_minus: f64) -> Result<SignedMeasure> {
    admissible_measure(
        &[MeasureAtom::new(s_plus, 1.0)],
        &[MeasureAtom::new(s_minus, 1.0)],
    )
}

fn solve(grid: &Grid, measure: &SignedMeasure, k: usize) -> Result<EigenResult> {
    let pencil = build_pencil(grid, measure)?;
    smallest_eigenpairs(&pencil, k.min(grid.len()), DEFAULT_TOL)
}

fn l2_inner(h: f64, u: &[f64], v: &[f64]) -> f64 {
    h * dot(u, v)
}

fn l2_norm(h: f64, u: &[f64]) -> f64 {
    libm::sqrt(l2_inner(h, u, u))
}

/// Sign class of the first eigenvector, flagged degenerate inside a cluster.
fn first_vector_class(r: &EigenResult, rel_threshold: f64) -> SignClass {
    if r.gap.is_some_and(|g| g <= DEFAULT_GAP_THRESHOLD) {
        return SignClass::Degenerate;
    }
    let mut v = r.vectors[0].clone();
    canonical_sign(&mut v);
    classify_vector(&v, rel_threshold)
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn check_descending_in(list: &[f64], lo: f64, hi: f64, what: &str) -> Result<()> {
    if list.is_empty() {
        return Err(Error::Domain(format!("{what} is empty")));
    }
    if let Some(x) = list.iter().find(|&&x| !(x > lo && x < hi)) {
        return Err(Error::Domain(format!(
            "{what} entry {x} outside ({lo}, {hi})"
        )));
    }
    if !strictly_decreasing(list) {
        return Err(Error::Domain(format!("{what} must be strictly decreasing")));
    }
    Ok(())
}

/// `sin` of the largest principal angle between `span p` and `span q` in the
/// `h`-weighted `L²` inner product. Both sets must be orthonormal there.
fn subspace_sine(h: f64, p: &[Vec<f64>], q: &[Vec<f64>]) -> Result<f64> {
    let m = p.len();
    let mut resid: Vec<Vec<f64>> = Vec::with_capacity(m);
    for v in p {
        let mut r = v.clone();
        for w in q {
            let c = l2_inner(h, v, w);
            for (ri, wi) in r.iter_mut().zip(w) {
                *ri -= c * wi;
            }
        }
        resid.push(r);
    }
    let gram = Matrix::from_fn(m, |i, j| l2_inner(h, &resid[i], &resid[j]));
    let top = symmetric_eigenvalues(&gram)?.last().copied().unwrap_or(0.0);
    Ok(libm::sqrt(top.max(0.0)))
}

// ---------------------------------------------------------------------------
// localization

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum MinusFamily {
    /// `mu-_eps = delta_eps`.
    Dirac,
    /// `mu-_eps = w delta_0 + (1 - w) delta_eps`.
    TwoAtom { zero_weight: f64 },
}

impl MinusFamily {
    fn atoms(self, eps: f64) -> Result<Vec<MeasureAtom>> {
        match self {
            MinusFamily::Dirac => Ok(vec![MeasureAtom::new(eps, 1.0)]),
            MinusFamily::TwoAtom { zero_weight } => {
                if !(0.0..1.0).contains(&zero_weight) {
                    return Err(Error::Domain(format!(
                        "zero_weight {zero_weight} outside [0, 1)"
                    )));
                }
                Ok(vec![
                    MeasureAtom::new(0.0, zero_weight),
                    MeasureAtom::new(eps, 1.0 - zero_weight),
                ])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationParams {
    pub domain: Domain,
    pub h: f64,
    pub plus: Vec<MeasureAtom>,
    pub family: MinusFamily,
    pub eps_list: Vec<f64>,
    pub tol_conv: f64,
    pub tol_vec: f64,
}

/// Solves with `mu-_eps` for each `eps` and compares with the `delta_0`
/// reference problem.
///
/// Each eigenvector keeps its own normalization (`h vᵀA⁻v = 1`); the
/// reference one is `L²`-normalized. Signs are aligned by the `L²` inner
/// product. When the reference eigenvalue sits in a cluster the vector
/// distance is measured to the span of the two reference vectors instead.
pub fn localization_sweep(p: &LocalizationParams) -> Result<ExperimentReport> {
    let top = p.plus.iter().map(|a| a.s).fold(f64::NEG_INFINITY, f64::max);
    check_descending_in(&p.eps_list, 0.0, top, "eps_list")?;
    let grid = build_grid(&p.domain, p.h)?;
    let h = grid.h();

    let mut rep = ExperimentReport::new("localization");
    rep.domain_param("domain", &p.domain);
    rep.param("h", &[p.h]);
    rep.param("plus_s", &p.plus.iter().map(|a| a.s).collect::<Vec<_>>());
    rep.param(
        "plus_w",
        &p.plus.iter().map(|a| a.weight).collect::<Vec<_>>(),
    );
    if let MinusFamily::TwoAtom { zero_weight } = p.family {
        rep.param("zero_weight", &[zero_weight]);
    }
    rep.param("eps_list", &p.eps_list);
    rep.tol("tol_conv", p.tol_conv);
    rep.tol("tol_vec", p.tol_vec);

    let reference = solve(
        &grid,
        &admissible_measure(&p.plus, &[MeasureAtom::new(0.0, 1.0)])?,
        2,
    )?;
    let lambda0 = reference.lambdas[0];
    let clustered = reference.gap.is_some_and(|g| g <= DEFAULT_GAP_THRESHOLD);
    let u0 = &reference.vectors[0];
    let u0_norm = l2_norm(h, u0);
    rep.ev("lambda0", lambda0);
    if let Some(g) = reference.gap {
        rep.ev("lambda0_gap", g);
    }
    rep.flag("lambda0_clustered", clustered);
    if clustered {
        rep.notes.push(
            "reference eigenvalue is clustered; vectors compared by subspace distance".into(),
        );
    }

    let mut abs_errs = Vec::with_capacity(p.eps_list.len());
    let mut dists = Vec::with_capacity(p.eps_list.len());
    for (i, &eps) in p.eps_list.iter().enumerate() {
        let m = admissible_measure(&p.plus, &p.family.atoms(eps)?)?;
        let r = solve(&grid, &m, 2)?;
        let le = r.lambdas[0];
        let ue = &r.vectors[0];
        let dist = if clustered {
            let n = l2_norm(h, ue);
            let unit: Vec<f64> = ue.iter().map(|x| x / n).collect();
            subspace_sine(h, &[unit], &reference.vectors[..2])?
        } else {
            let sigma = if l2_inner(h, ue, u0) < 0.0 { -1.0 } else { 1.0 };
            let diff: Vec<f64> = ue.iter().zip(u0).map(|(a, b)| a - sigma * b).collect();
            l2_norm(h, &diff) / u0_norm
        };
        let abs_err = libm::fabs(le - lambda0);
        rep.ev(format!("eps[{i}]"), eps);
        rep.ev(format!("lambda_eps[{i}]"), le);
        rep.ev(format!("abs_err[{i}]"), abs_err);
        rep.ev(format!("rel_err[{i}]"), abs_err / lambda0);
        rep.ev(format!("l2_dist[{i}]"), dist);
        rep.rows.push(SweepRow::from_result(eps, &r));
        abs_errs.push(abs_err);
        dists.push(dist);
    }
    let tail = &abs_errs[abs_errs.len().saturating_sub(3)..];
    let trend = strictly_decreasing(tail);
    let final_rel = abs_errs[abs_errs.len() - 1] / lambda0;
    let final_dist = dists[dists.len() - 1];
    rep.flag("tail_strictly_decreasing", trend);
    rep.ev("final_rel_err", final_rel);
    rep.ev("final_l2_dist", final_dist);
    rep.verdict = Verdict::from_bool(trend && final_rel < p.tol_conv && final_dist < p.tol_vec);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// connected domains

#[derive(Debug, Clone, PartialEq)]
pub struct SimplicityParams {
    pub domain: Domain,
    pub h: f64,
    pub s_minus: f64,
    pub rel_threshold: f64,
    pub gap_threshold: f64,
    /// Largest `s_minus` for which a failure counts as a failure; above it
    /// the check leaves the small-order regime and reports inconclusive.
    pub small_s_max: f64,
}

impl SimplicityParams {
    pub fn new(domain: Domain, h: f64, s_minus: f64) -> Self {
        SimplicityParams {
            domain,
            h,
            s_minus,
            rel_threshold: DEFAULT_REL_THRESHOLD,
            gap_threshold: DEFAULT_GAP_THRESHOLD,
            small_s_max: 0.25,
        }
    }
}

fn require_connected(domain: &Domain, what: &str) -> Result<()> {
    if domain.num_components() != 1 {
        return Err(Error::Precondition(format!(
            "{what} needs a connected domain, got {} intervals",
            domain.num_components()
        )));
    }
    Ok(())
}

fn check_order_open(s: f64, hi: f64, what: &str) -> Result<()> {
    if !(s > 0.0 && s < hi) {
        return Err(Error::Domain(format!("{what} = {s} outside (0, {hi})")));
    }
    Ok(())
}

pub fn simplicity_positivity_check(p: &SimplicityParams) -> Result<ExperimentReport> {
    require_connected(&p.domain, "simplicity_positivity")?;
    check_order_open(p.s_minus, 1.0, "s_minus")?;
    let grid = build_grid(&p.domain, p.h)?;
    let r = solve(&grid, &dirac_measure(1.0, p.s_minus)?, 2)?;

    let mut rep = ExperimentReport::new("simplicity_positivity");
    rep.domain_param("domain", &p.domain);
    rep.param("h", &[p.h]);
    rep.param("s_minus", &[p.s_minus]);
    rep.tol("rel_threshold", p.rel_threshold);
    rep.tol("gap_threshold", p.gap_threshold);
    rep.tol("small_s_max", p.small_s_max);

    let class = first_vector_class(&r, p.rel_threshold);
    let gap = r.gap.unwrap_or(f64::NAN);
    let mut v = r.vectors[0].clone();
    canonical_sign(&mut v);
    let inf = norm_inf(&v);
    let min_rel = v.iter().copied().fold(f64::INFINITY, f64::min) / inf;
    rep.ev("lambda1", r.lambdas[0]);
    rep.ev("lambda2", r.lambdas.get(1).copied().unwrap_or(f64::NAN));
    rep.ev("gap", gap);
    rep.ev("residual1", r.residuals[0]);
    rep.ev("min_v_over_max_abs", min_rel);
    let positive = class == SignClass::Positive;
    let simple = gap > p.gap_threshold;
    rep.flag("one_signed", positive);
    rep.flag("simple", simple);
    rep.rows.push(SweepRow::from_result(p.s_minus, &r));
    rep.verdict = if positive && simple {
        Verdict::Pass
    } else if p.s_minus > p.small_s_max {
        rep.notes.push(format!(
            "s_minus = {} is outside the small-order regime",
            p.s_minus
        ));
        Verdict::Inconclusive
    } else {
        Verdict::Fail
    };
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryParams {
    pub domain: Domain,
    pub h: f64,
    pub s_minus: f64,
    pub rel_threshold: f64,
    /// Width of the boundary layer as a fraction of `|Ω|`.
    pub layer_fraction: f64,
}

/// Outcome of [`boundary_growth_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryGrowth {
    pub slope_left: f64,
    pub slope_right: f64,
    pub c0: f64,
    /// `min v(x) / (c0 dist(x, ∂Ω))` over the boundary layer.
    pub min_ratio: f64,
    pub nodes_checked: usize,
    pub holds: bool,
}

/// Tests `v(x) ≥ c0 dist(x, ∂Ω)` on `dist ≤ layer` for a profile sampled at
/// increasing `xs` inside `(a, b)`. The boundary slopes come from the two
/// nodes nearest each endpoint and `c0` is half the smaller one.
pub fn boundary_growth_profile(
    xs: &[f64],
    v: &[f64],
    (a, b): (f64, f64),
    layer: f64,
) -> Result<BoundaryGrowth> {
    let n = xs.len();
    if n < 2 || v.len() != n {
        return Err(Error::Shape {
            expected: n.max(2),
            found: v.len(),
        });
    }
    let slope_left = (v[1] - v[0]) / (xs[1] - xs[0]);
    let slope_right = (v[n - 2] - v[n - 1]) / (xs[n - 1] - xs[n - 2]);
    let c0 = 0.5 * slope_left.min(slope_right);
    let mut min_ratio = f64::INFINITY;
    let mut count = 0;
    for (&x, &vx) in xs.iter().zip(v) {
        let d = (x - a).min(b - x);
        if d <= layer {
            count += 1;
            min_ratio = min_ratio.min(vx / (c0 * d));
        }
    }
    let holds = c0 > 0.0 && count > 0 && min_ratio >= 1.0;
    Ok(BoundaryGrowth {
        slope_left,
        slope_right,
        c0,
        min_ratio,
        nodes_checked: count,
        holds,
    })
}

pub fn boundary_growth_check(p: &BoundaryParams) -> Result<ExperimentReport> {
    require_connected(&p.domain, "boundary_growth")?;
    check_order_open(p.s_minus, 1.0, "s_minus")?;
    let grid = build_grid(&p.domain, p.h)?;
    let r = solve(&grid, &dirac_measure(1.0, p.s_minus)?, 2)?;

    let mut rep = ExperimentReport::new("boundary_growth");
    rep.domain_param("domain", &p.domain);
    rep.param("h", &[p.h]);
    rep.param("s_minus", &[p.s_minus]);
    rep.tol("rel_threshold", p.rel_threshold);
    rep.tol("layer_fraction", p.layer_fraction);
    rep.ev("lambda1", r.lambdas[0]);
    rep.rows.push(SweepRow::from_result(p.s_minus, &r));

    let class = first_vector_class(&r, p.rel_threshold);
    rep.flag("one_signed", class == SignClass::Positive);
    if class != SignClass::Positive {
        rep.notes
            .push("first eigenvector is not one-signed; the growth bound does not apply".into());
        rep.verdict = Verdict::Inconclusive;
        return Ok(rep);
    }
    let mut v = r.vectors[0].clone();
    canonical_sign(&mut v);
    let (a, b) = p.domain.intervals()[0];
    let g = boundary_growth_profile(&grid.coordinates(), &v, (a, b), p.layer_fraction * (b - a))?;
    rep.ev("slope_left", g.slope_left);
    rep.ev("slope_right", g.slope_right);
    rep.ev("c0", g.c0);
    rep.ev("min_ratio", g.min_ratio);
    rep.ev("nodes_checked", g.nodes_checked as f64);
    rep.verdict = Verdict::from_bool(g.holds);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// disconnected domains

#[derive(Debug, Clone, PartialEq)]
pub struct SignChangeParams {
    pub domain: Domain,
    pub h: f64,
    pub s_list: Vec<f64>,
    pub rel_threshold: f64,
}

fn dominant_signs(v: &[f64], grid: &Grid, rel_threshold: f64) -> (Vec<(f64, f64)>, bool, bool) {
    let cut = rel_threshold * norm_inf(v);
    let mut pos = false;
    let mut neg = false;
    let mut profile = Vec::with_capacity(grid.num_components());
    for j in 0..grid.num_components() {
        let part = &v[grid.component_range(j)];
        let lo = part.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = part.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        pos |= hi > -lo && hi > cut;
        neg |= -lo > hi && -lo > cut;
        profile.push((lo, hi));
    }
    (profile, pos, neg)
}

/// `min_± ‖R v ∓ v‖_∞ / ‖v‖_∞` for the lattice reflection `R`.
fn symmetry_defect(grid: &Grid, v: &[f64]) -> Option<f64> {
    let perm = grid.reflection()?;
    let inf = norm_inf(v);
    let even = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| libm::fabs(v[j] - v[i]))
        .fold(0.0, f64::max);
    let odd = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| libm::fabs(v[j] + v[i]))
        .fold(0.0, f64::max);
    Some(even.min(odd) / inf)
}

/// The first eigenvector on a disconnected domain must change sign, with a
/// positive-dominant and a negative-dominant component, for every order.
pub fn sign_change_check(p: &SignChangeParams) -> Result<ExperimentReport> {
    if p.domain.num_components() < 2 {
        return Err(Error::Precondition(
            "sign_change needs at least two intervals".into(),
        ));
    }
    if p.s_list.is_empty() {
        return Err(Error::Domain("s_list is empty".into()));
    }
    for &s in &p.s_list {
        check_order_open(s, 1.0, "s_minus")?;
    }
    let grid = build_grid(&p.domain, p.h)?;
    let mut rep = ExperimentReport::new("sign_change");
    rep.domain_param("domain", &p.domain);
    rep.param("h", &[p.h]);
    rep.param("s_list", &p.s_list);
    rep.tol("rel_threshold", p.rel_threshold);

    let mut all = true;
    for (i, &s) in p.s_list.iter().enumerate() {
        let pencil = build_pencil(&grid, &dirac_measure(1.0, s)?)?;
        let r = smallest_eigenpairs(&pencil, 2.min(grid.len()), DEFAULT_TOL)?;
        let class = first_vector_class(&r, p.rel_threshold);
        let mut v = r.vectors[0].clone();
        canonical_sign(&mut v);
        let (profile, pos, neg) = dominant_signs(&v, &grid, p.rel_threshold);
        let ok = class == SignClass::SignChanging && pos && neg;
        all &= ok;
        rep.ev(format!("s[{i}]"), s);
        rep.ev(format!("lambda1[{i}]"), r.lambdas[0]);
        rep.ev(format!("gap[{i}]"), r.gap.unwrap_or(f64::NAN));
        for (j, (lo, hi)) in profile.iter().enumerate() {
            rep.ev(format!("min_v[{i}][{j}]"), *lo);
            rep.ev(format!("max_v[{i}][{j}]"), *hi);
        }
        if let Some(d) = symmetry_defect(&grid, &v) {
            rep.ev(format!("symmetry_defect[{i}]"), d);
            let perm = grid.reflection().unwrap_or_default();
            let reflected: Vec<f64> = perm.iter().map(|&j| v[j]).collect();
            let rq = rayleigh_quotient(&pencil, &reflected)?;
            rep.ev(
                format!("reflected_rq_rel_diff[{i}]"),
                libm::fabs(rq - r.lambdas[0]) / r.lambdas[0],
            );
        }
        rep.flag(format!("sign_changing[{i}]"), ok);
        rep.rows.push(SweepRow::from_result(s, &r));
    }
    rep.verdict = Verdict::from_bool(all);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnionParams {
    pub omega1: Domain,
    pub omega2: Domain,
    pub h: f64,
    pub s_minus: f64,
    /// Required gap `min λ(Ω_j) - λ(Ω₁∪Ω₂)` in units of `λ(Ω₁∪Ω₂) Σ residuals`.
    pub inequality_factor: f64,
    /// Required excess of every scanned Rayleigh quotient, same units.
    pub rayleigh_factor: f64,
    pub scan_points: usize,
    /// Relative tolerance of the classical equality in the `delta_0` contrast run.
    pub contrast_tol: f64,
}

impl UnionParams {
    pub fn new(omega1: Domain, omega2: Domain, h: f64, s_minus: f64) -> Self {
        UnionParams {
            omega1,
            omega2,
            h,
            s_minus,
            inequality_factor: 100.0,
            rayleigh_factor: 10.0,
            scan_points: 91,
            contrast_tol: 1e-12,
        }
    }
}

struct Split {
    union: Grid,
    parts: [Grid; 2],
}

fn split_grids(omega1: &Domain, omega2: &Domain, h: f64) -> Result<Split> {
    let whole = omega1.union(omega2)?;
    let union = build_grid(&whole, h)?;
    Ok(Split {
        union,
        parts: [build_grid(omega1, h)?, build_grid(omega2, h)?],
    })
}

/// Strict inequality `λ(Ω₁∪Ω₂) < min λ(Ω_j)` for a nonlocal right-hand side,
/// and the failure of every zero-extended nonnegative mix of the component
/// eigenfunctions to be an eigenfunction of the union.
pub fn union_inequality_check(p: &UnionParams) -> Result<ExperimentReport> {
    check_order_open(p.s_minus, 1.0, "s_minus")?;
    if p.scan_points < 2 {
        return Err(Error::Domain("scan_points must be at least 2".into()));
    }
    let g = split_grids(&p.omega1, &p.omega2, p.h)?;
    let mut rep = ExperimentReport::new("union_inequality");
    rep.domain_param("omega1", &p.omega1);
    rep.domain_param("omega2", &p.omega2);
    rep.param("h", &[p.h]);
    rep.param("s_minus", &[p.s_minus]);
    rep.param("scan_points", &[p.scan_points as f64]);
    rep.tol("inequality_factor", p.inequality_factor);
    rep.tol("rayleigh_factor", p.rayleigh_factor);
    rep.tol("contrast_tol", p.contrast_tol);

    let m = dirac_measure(1.0, p.s_minus)?;
    let union_pencil = build_pencil(&g.union, &m)?;
    let ru = smallest_eigenpairs(&union_pencil, 2.min(g.union.len()), DEFAULT_TOL)?;
    let r1 = solve(&g.parts[0], &m, 1)?;
    let r2 = solve(&g.parts[1], &m, 1)?;
    let (lu, l1, l2) = (ru.lambdas[0], r1.lambdas[0], r2.lambdas[0]);
    let res_sum = ru.residuals[0] + r1.residuals[0] + r2.residuals[0];
    let unit = lu * res_sum;
    let gap = l1.min(l2) - lu;
    rep.ev("lambda_union", lu);
    rep.ev("lambda_omega1", l1);
    rep.ev("lambda_omega2", l2);
    rep.ev("component_rel_diff", libm::fabs(l1 - l2) / l1.min(l2));
    rep.ev("residual_sum", res_sum);
    rep.ev("strict_gap", gap);
    rep.ev("strict_gap_in_residual_units", gap / unit);
    let strict = gap > p.inequality_factor * unit;
    rep.flag("strict_inequality", strict);
    rep.rows.push(SweepRow::from_result(p.s_minus, &ru));

    let lift = |j: usize, r: &EigenResult| -> Result<Vec<f64>> {
        let mut v = r.vectors[0].clone();
        canonical_sign(&mut v);
        g.union.zero_extend(&g.parts[j], &v)
    };
    let e1 = lift(0, &r1)?;
    let e2 = lift(1, &r2)?;
    rep.flag("omega1_vector_nonnegative", e1.iter().all(|&x| x >= 0.0));
    rep.flag("omega2_vector_nonnegative", e2.iter().all(|&x| x >= 0.0));
    let mut min_excess = f64::INFINITY;
    let mut argmin = 0.0;
    for i in 0..p.scan_points {
        let theta = (i as f64) * (PI / 2.0) / ((p.scan_points - 1) as f64);
        let (c, s) = (libm::cos(theta), libm::sin(theta));
        let w: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| c * a + s * b).collect();
        let excess = rayleigh_quotient(&union_pencil, &w)? - lu;
        if i == 0 {
            rep.ev("rq_excess_omega1", excess);
        }
        if i == p.scan_points - 1 {
            rep.ev("rq_excess_omega2", excess);
        }
        if excess < min_excess {
            min_excess = excess;
            argmin = theta;
        }
    }
    rep.ev("rq_min_excess", min_excess);
    rep.ev("rq_argmin_theta", argmin);
    rep.ev("rq_min_excess_in_residual_units", min_excess / unit);
    let not_eigen = min_excess > p.rayleigh_factor * unit;
    rep.flag("mixtures_not_eigenfunctions", not_eigen);

    // classical contrast: delta_0 on the right decouples the components
    let classical = dirac_measure(1.0, 0.0)?;
    let cu = solve(&g.union, &classical, 1)?.lambdas[0];
    let c1 = solve(&g.parts[0], &classical, 1)?.lambdas[0];
    let c2 = solve(&g.parts[1], &classical, 1)?.lambdas[0];
    let contrast = libm::fabs(cu - c1.min(c2)) / c1.min(c2);
    rep.ev("classical_lambda_union", cu);
    rep.ev("classical_min_component", c1.min(c2));
    rep.ev("classical_rel_diff", contrast);
    let equal = contrast <= p.contrast_tol;
    rep.flag("classical_equality", equal);

    rep.verdict = Verdict::from_bool(strict && not_eigen && equal);
    Ok(rep)
}

/// What a simplicity scan expects of the relative gap `γ(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapExpectation {
    /// `γ` strictly decreasing along the list and below the threshold at its end.
    Degenerate { gap_threshold: f64 },
    /// `γ ≥ gap_floor` at every order.
    Simple { gap_floor: f64 },
}

fn require_two_components(domain: &Domain) -> Result<()> {
    if domain.num_components() != 2 {
        return Err(Error::Domain(format!(
            "simplicity scan needs exactly two intervals, got {}",
            domain.num_components()
        )));
    }
    Ok(())
}

fn gap_scan(domain: &Domain, s_list: &[f64], h: f64) -> Result<Vec<SweepRow>> {
    require_two_components(domain)?;
    check_descending_in(s_list, 0.0, 1.0, "s_list")?;
    let grid = build_grid(domain, h)?;
    s_list
        .iter()
        .map(|&s| {
            Ok(SweepRow::from_result(
                s,
                &solve(&grid, &dirac_measure(1.0, s)?, 2)?,
            ))
        })
        .collect()
}

fn gaps_of(rows: &[SweepRow]) -> Vec<f64> {
    rows.iter().map(|r| r.gap.unwrap_or(f64::NAN)).collect()
}

/// Relative gap `γ(s) = (λ₂ - λ₁)/λ₁` along a decreasing list of orders.
pub fn simplicity_scan(
    domain: &Domain,
    s_list: &[f64],
    h: f64,
    expect: GapExpectation,
) -> Result<ExperimentReport> {
    let rows = gap_scan(domain, s_list, h)?;
    let gaps = gaps_of(&rows);
    let mut rep = ExperimentReport::new("simplicity_scan");
    rep.domain_param("domain", domain);
    rep.param("h", &[h]);
    rep.param("s_list", s_list);
    for (i, g) in gaps.iter().enumerate() {
        rep.ev(format!("gap[{i}]"), *g);
    }
    let ok = match expect {
        GapExpectation::Degenerate { gap_threshold } => {
            rep.tol("gap_threshold", gap_threshold);
            let trend = strictly_decreasing(&gaps);
            let last = gaps[gaps.len() - 1];
            rep.flag("strictly_decreasing", trend);
            rep.ev("final_gap", last);
            trend && last < gap_threshold
        }
        GapExpectation::Simple { gap_floor } => {
            rep.tol("gap_floor", gap_floor);
            let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
            rep.ev("min_gap", lo);
            lo >= gap_floor
        }
    };
    rep.rows = rows;
    rep.verdict = Verdict::from_bool(ok);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyParams {
    pub symmetric: Domain,
    pub asymmetric: Domain,
    pub s_list: Vec<f64>,
    pub h: f64,
    pub gap_threshold: f64,
    pub gap_floor: f64,
}

/// Symmetric pair: `γ` decreasing with `γ(min s)` below `gap_threshold`.
/// Asymmetric pair: `γ ≥ gap_floor` everywhere, and above the symmetric
/// gap at the smallest order.
pub fn simplicity_dichotomy(p: &DichotomyParams) -> Result<ExperimentReport> {
    let sym = gap_scan(&p.symmetric, &p.s_list, p.h)?;
    let asym = gap_scan(&p.asymmetric, &p.s_list, p.h)?;
    let gs = gaps_of(&sym);
    let ga = gaps_of(&asym);
    let mut rep = ExperimentReport::new("simplicity_scan");
    rep.domain_param("symmetric", &p.symmetric);
    rep.domain_param("asymmetric", &p.asymmetric);
    rep.param("h", &[p.h]);
    rep.param("s_list", &p.s_list);
    rep.tol("gap_threshold", p.gap_threshold);
    rep.tol("gap_floor", p.gap_floor);
    for (i, (a, b)) in gs.iter().zip(&ga).enumerate() {
        rep.ev(format!("gap_symmetric[{i}]"), *a);
        rep.ev(format!("gap_asymmetric[{i}]"), *b);
    }
    let last = gs[gs.len() - 1];
    let trend = strictly_decreasing(&gs);
    let small = last < p.gap_threshold;
    let floor = ga.iter().copied().fold(f64::INFINITY, f64::min);
    let ordered = last < floor;
    rep.flag("symmetric_strictly_decreasing", trend);
    rep.flag("symmetric_final_below_threshold", small);
    rep.ev("asymmetric_min_gap", floor);
    rep.flag("asymmetric_above_floor", floor >= p.gap_floor);
    rep.flag("ordering", ordered);
    let mut rows = sym;
    rows.extend(asym);
    rep.rows = rows;
    rep.verdict = Verdict::from_bool(trend && small && floor >= p.gap_floor && ordered);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// classical limit

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalParams {
    pub domain: Domain,
    pub h: f64,
    pub equality_tol: f64,
    pub cluster_tol: f64,
    pub angle_tol: f64,
    pub gap_threshold: f64,
}

impl ClassicalParams {
    pub fn new(domain: Domain, h: f64) -> Self {
        ClassicalParams {
            domain,
            h,
            equality_tol: 1e-12,
            cluster_tol: 1e-10,
            angle_tol: 1e-6,
            gap_threshold: DEFAULT_GAP_THRESHOLD,
        }
    }
}

/// With `mu+ = delta_1`, `mu- = delta_0` the union spectrum is the union of
/// the component spectra: `λ₁` is the smallest component value, and the
/// first eigenvalue is simple iff the two smallest component values differ.
pub fn classical_limit_oracle(p: &ClassicalParams) -> Result<ExperimentReport> {
    let grid = build_grid(&p.domain, p.h)?;
    let m = dirac_measure(1.0, 0.0)?;
    let ru = solve(&grid, &m, 2)?;
    let mut rep = ExperimentReport::new("classical_limit");
    rep.domain_param("domain", &p.domain);
    rep.param("h", &[p.h]);
    rep.tol("equality_tol", p.equality_tol);
    rep.tol("cluster_tol", p.cluster_tol);
    rep.tol("angle_tol", p.angle_tol);
    rep.tol("gap_threshold", p.gap_threshold);

    let mut comps: Vec<(f64, usize, Grid, EigenResult)> = Vec::new();
    for j in 0..grid.num_components() {
        let sub = component_restriction(&grid, j)?;
        let r = solve(&sub, &m, 1)?;
        rep.ev(format!("lambda_component[{j}]"), r.lambdas[0]);
        comps.push((r.lambdas[0], j, sub, r));
    }
    comps.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let lu = ru.lambdas[0];
    let lmin = comps[0].0;
    let rel = libm::fabs(lu - lmin) / lmin;
    rep.ev("lambda_union", lu);
    rep.ev("min_component_rel_diff", rel);
    let mut ok = rel <= p.equality_tol;
    rep.flag("union_equals_min", ok);

    if comps.len() >= 2 && ru.lambdas.len() >= 2 {
        let union_gap = (ru.lambdas[1] - lu) / lu;
        rep.ev("union_gap", union_gap);
        let coincide = libm::fabs(comps[1].0 - comps[0].0) <= p.cluster_tol * comps[0].0;
        rep.flag("components_coincide", coincide);
        if coincide {
            let q = [
                grid.zero_extend(&comps[0].2, &comps[0].3.vectors[0])?,
                grid.zero_extend(&comps[1].2, &comps[1].3.vectors[0])?,
            ];
            let angle = subspace_sine(grid.h(), &ru.vectors[..2], &q)?;
            rep.ev("subspace_sine", angle);
            let degenerate = union_gap <= p.cluster_tol;
            rep.flag("union_degenerate", degenerate);
            ok &= degenerate && angle < p.angle_tol;
        } else {
            let simple = union_gap > p.gap_threshold;
            rep.flag("union_simple", simple);
            ok &= simple;
        }
    }
    rep.rows.push(SweepRow::from_result(p.h, &ru));
    rep.verdict = Verdict::from_bool(ok);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// seminorm lemmas

#[derive(Debug, Clone, PartialEq)]
pub struct SeminormParams {
    pub domain: Domain,
    /// Successive entries are compared as one refinement each.
    pub h_list: Vec<f64>,
    pub s_pairs: Vec<(f64, f64)>,
    pub eps_list: Vec<f64>,
    pub probes: usize,
    pub modes: usize,
    pub seed: u64,
    pub ratio_band: (f64, f64),
    /// Bound on the final defect, relative to `‖u‖²`.
    pub defect_tol: f64,
}

/// Smooth probe vectors: per component, random combinations of the first
/// `modes` Dirichlet sine modes. The coefficients depend only on the seed,
/// so the same functions are sampled at every `h`.
pub fn probe_vectors(grid: &Grid, probes: usize, modes: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps = grid.domain().num_components();
    let coeffs: Vec<f64> = (0..probes * comps * modes)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let mut out = Vec::with_capacity(probes);
    for p in 0..probes {
        let v: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|n| {
                let (a, b) = grid.domain().intervals()[n.component];
                let t = (n.x - a) / (b - a);
                (0..modes)
                    .map(|m| {
                        let c = coeffs[(p * comps + n.component) * modes + m];
                        c * libm::sin((m + 1) as f64 * PI * t)
                    })
                    .sum()
            })
            .collect();
        out.push(v);
    }
    out
}

/// `max_u [u]_{s1} / [u]_{s2}` over the probes.
pub fn embedding_constant(grid: &Grid, probes: &[Vec<f64>], s1: f64, s2: f64) -> Result<f64> {
    let mut best: f64 = 0.0;
    for u in probes {
        let num = seminorm_sq(grid, u, s1)?;
        let den = seminorm_sq(grid, u, s2)?;
        let ratio = if s1.to_bits() == s2.to_bits() {
            1.0
        } else {
            libm::sqrt(num / den)
        };
        best = best.max(ratio);
    }
    Ok(best)
}

pub fn seminorm_lemma_checks(p: &SeminormParams) -> Result<ExperimentReport> {
    if p.h_list.is_empty() || p.s_pairs.is_empty() || p.eps_list.is_empty() {
        return Err(Error::Domain(
            "h_list, s_pairs and eps_list must be nonempty".into(),
        ));
    }
    if p.probes == 0 || p.modes == 0 {
        return Err(Error::Domain("probes and modes must be positive".into()));
    }
    for &(s1, s2) in &p.s_pairs {
        if !(0.0..=1.0).contains(&s1) || !(0.0..=1.0).contains(&s2) || s1 > s2 {
            return Err(Error::Domain(format!(
                "pair ({s1}, {s2}) needs 0 ≤ s1 ≤ s2 ≤ 1"
            )));
        }
    }
    check_descending_in(&p.eps_list, 0.0, 1.0, "eps_list")?;

    let mut rep = ExperimentReport::new("seminorm_lemmas");
    rep.domain_param("domain", &p.domain);
    rep.param("h_list", &p.h_list);
    rep.param(
        "s_pairs",
        &p.s_pairs
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .collect::<Vec<_>>(),
    );
    rep.param("eps_list", &p.eps_list);
    rep.param("probes", &[p.probes as f64]);
    rep.param("modes", &[p.modes as f64]);
    rep.param("seed", &[p.seed as f64]);
    rep.tol("ratio_lo", p.ratio_band.0);
    rep.tol("ratio_hi", p.ratio_band.1);
    rep.tol("defect_tol", p.defect_tol);

    let grids: Vec<Grid> = p
        .h_list
        .iter()
        .map(|&h| build_grid(&p.domain, h))
        .collect::<Result<_>>()?;
    let mut ok = true;

    for (q, &(s1, s2)) in p.s_pairs.iter().enumerate() {
        let mut consts = Vec::with_capacity(grids.len());
        for (i, g) in grids.iter().enumerate() {
            let probes = probe_vectors(g, p.probes, p.modes, p.seed);
            let c = embedding_constant(g, &probes, s1, s2)?;
            rep.ev(format!("C[{q}][{i}]"), c);
            ok &= c.is_finite();
            consts.push(c);
        }
        for i in 1..consts.len() {
            let ratio = consts[i] / consts[i - 1];
            rep.ev(format!("C_ratio[{q}][{i}]"), ratio);
            ok &= ratio >= p.ratio_band.0 && ratio <= p.ratio_band.1;
        }
    }

    let classical = dirac_measure(1.0, 0.0)?;
    for (i, g) in grids.iter().enumerate() {
        let r = solve(g, &classical, 1)?;
        let u = &r.vectors[0];
        let l2 = l2_inner(g.h(), u, u);
        let mut defects = Vec::with_capacity(p.eps_list.len());
        for (e, &eps) in p.eps_list.iter().enumerate() {
            let d = libm::fabs(seminorm_sq(g, u, eps)? - l2);
            rep.ev(format!("defect[{i}][{e}]"), d);
            defects.push(d);
        }
        let last = defects[defects.len() - 1];
        rep.ev(format!("final_defect_rel[{i}]"), last / l2);
        let trend = strictly_decreasing(&defects);
        rep.flag(format!("defect_decreasing[{i}]"), trend);
        ok &= trend && last < p.defect_tol * l2;
    }
    rep.verdict = Verdict::from_bool(ok);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// discretization anchors

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorParams {
    pub domain: Domain,
    pub h: f64,
    /// Relative tolerance against `2(1 - cos(πh/L))/h²`.
    pub discrete_tol: f64,
    /// Relative tolerance against `(π/L)²`.
    pub continuum_tol: f64,
}

/// Classical Dirichlet pencil on one interval of length `L` against the
/// closed-form discrete and continuum first eigenvalues.
pub fn classical_anchor_check(p: &AnchorParams) -> Result<ExperimentReport> {
    require_connected(&p.domain, "classical_anchor")?;
    let grid = build_grid(&p.domain, p.h)?;
    let r = solve(&grid, &dirac_measure(1.0, 0.0)?, 2)?;
    let (a, b) = p.domain.intervals()[0];
    let len = b - a;
    let h = grid.h();
    let discrete = 2.0 * (1.0 - libm::cos(PI * h / len)) / (h * h);
    let continuum = (PI / len) * (PI / len);
    let l1 = r.lambdas[0];
    let mut rep = ExperimentReport::new("classical_anchor");
    rep.domain_param("domain", &p.domain);
    rep.param("h", &[p.h]);
    rep.tol("discrete_tol", p.discrete_tol);
    rep.tol("continuum_tol", p.continuum_tol);
    rep.ev("lambda1", l1);
    rep.ev("closed_form_discrete", discrete);
    rep.ev("closed_form_continuum", continuum);
    let rd = libm::fabs(l1 - discrete) / discrete;
    let rc = libm::fabs(l1 - continuum) / continuum;
    rep.ev("rel_err_discrete", rd);
    rep.ev("rel_err_continuum", rc);
    rep.rows.push(SweepRow::from_result(p.h, &r));
    rep.verdict = Verdict::from_bool(rd < p.discrete_tol && rc < p.continuum_tol);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorLimitParams {
    pub domain: Domain,
    pub h: f64,
    pub s_list: Vec<f64>,
    /// Spacings `h` for the symbol study, refined by halving.
    pub symbol_h_list: Vec<f64>,
    pub xi: f64,
    pub min_order: f64,
}

/// Exact endpoint matrices, and the convergence order of the stencil
/// symbol to `(2πξ)^{2s}`.
pub fn operator_limits_check(p: &OperatorLimitParams) -> Result<ExperimentReport> {
    use crate::operator::{assemble_single, fourier_symbol};
    if p.symbol_h_list.len() < 2 || p.s_list.is_empty() {
        return Err(Error::Domain(
            "operator_limits needs at least two spacings and one order".into(),
        ));
    }
    let grid = build_grid(&p.domain, p.h)?;
    let n = grid.len();
    let nodes = grid.nodes();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let a0 = assemble_single(&grid, 0.0)?;
    let a1 = assemble_single(&grid, 1.0)?;
    let mut dev0: f64 = 0.0;
    let mut dev1: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            let lap = match nodes[i].k.abs_diff(nodes[j].k) {
                0 => 2.0 * inv_h2,
                1 => -inv_h2,
                _ => 0.0,
            };
            dev0 = dev0.max(libm::fabs(a0.get(i, j) - id));
            dev1 = dev1.max(libm::fabs(a1.get(i, j) - lap));
        }
    }
    let mut rep = ExperimentReport::new("operator_limits");
    rep.domain_param("domain", &p.domain);
    rep.param("h", &[p.h]);
    rep.param("s_list", &p.s_list);
    rep.param("symbol_h_list", &p.symbol_h_list);
    rep.param("xi", &[p.xi]);
    rep.tol("min_order", p.min_order);
    rep.ev("identity_max_deviation", dev0);
    rep.ev("laplacian_max_deviation", dev1);
    let mut ok = dev0 == 0.0 && dev1 == 0.0;
    for (q, &s) in p.s_list.iter().enumerate() {
        let exact = libm::pow(2.0 * PI * p.xi, 2.0 * s);
        let mut errs = Vec::with_capacity(p.symbol_h_list.len());
        for (i, &h) in p.symbol_h_list.iter().enumerate() {
            let e = libm::fabs(fourier_symbol(s, h, p.xi)? - exact);
            rep.ev(format!("symbol_err[{q}][{i}]"), e);
            errs.push(e);
        }
        let mut lowest = f64::INFINITY;
        for i in 1..errs.len() {
            let order = libm::log(errs[i - 1] / errs[i])
                / libm::log(p.symbol_h_list[i - 1] / p.symbol_h_list[i]);
            lowest = lowest.min(order);
        }
        rep.ev(format!("min_observed_order[{q}]"), lowest);
        ok &= lowest >= p.min_order;
    }
    rep.verdict = Verdict::from_bool(ok);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleParams {
    pub domain: Domain,
    pub h: f64,
    pub s_list: Vec<f64>,
    pub quad_points: usize,
    /// Nodes skipped next to each endpoint.
    pub skip: usize,
    pub rel_tol: f64,
}

/// `A_s u` against the singular-integral quadrature for the tent function
/// `u(x) = dist(x, ∂Ω) / max dist`.
pub fn oracle_crosscheck(p: &OracleParams) -> Result<ExperimentReport> {
    use crate::operator::{assemble_single, brute_force_apply};
    require_connected(&p.domain, "oracle_crosscheck")?;
    let grid = build_grid(&p.domain, p.h)?;
    if grid.len() <= 2 * p.skip {
        return Err(Error::Resolution(
            "no nodes left after skipping the boundary nodes".into(),
        ));
    }
    let (a, b) = p.domain.intervals()[0];
    let half = 0.5 * (b - a);
    let u: Vec<f64> = grid
        .coordinates()
        .iter()
        .map(|&x| (x - a).min(b - x) / half)
        .collect();
    let mut rep = ExperimentReport::new("oracle_crosscheck");
    rep.domain_param("domain", &p.domain);
    rep.param("h", &[p.h]);
    rep.param("s_list", &p.s_list);
    rep.param("quad_points", &[p.quad_points as f64]);
    rep.param("skip", &[p.skip as f64]);
    rep.tol("rel_tol", p.rel_tol);
    let mut ok = !p.s_list.is_empty();
    for (q, &s) in p.s_list.iter().enumerate() {
        let stencil = assemble_single(&grid, s)?.apply(&u)?;
        let oracle = brute_force_apply(&grid, &u, s, p.quad_points)?;
        let worst = (p.skip..grid.len() - p.skip)
            .map(|i| libm::fabs(stencil[i] - oracle[i]) / libm::fabs(oracle[i]))
            .fold(0.0, f64::max);
        rep.ev(format!("max_rel_diff[{q}]"), worst);
        ok &= worst < p.rel_tol;
    }
    rep.verdict = Verdict::from_bool(ok);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::{smallest_eigenpairs, DEFAULT_TOL};

    fn unit() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    fn pair() -> Domain {
        Domain::new(&[(-2.0, -1.0), (1.0, 2.0)]).unwrap()
    }

    fn loc(eps_list: Vec<f64>, h: f64) -> LocalizationParams {
        LocalizationParams {
            domain: unit(),
            h,
            plus: vec![MeasureAtom::new(1.0, 1.0)],
            family: MinusFamily::Dirac,
            eps_list,
            tol_conv: 0.05,
            tol_vec: 0.05,
        }
    }

    #[test]
    fn localization_approaches_classical_value() {
        let rep = localization_sweep(&loc(vec![0.2, 0.1, 0.05, 0.025], 1.0 / 128.0)).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.evidence);
        let l0 = rep.get("lambda0").unwrap();
        assert!((l0 - PI * PI).abs() / (PI * PI) < 1e-3);
        assert_eq!(rep.rows.len(), 4);
    }

    #[test]
    fn tiny_eps_is_close() {
        let rep = localization_sweep(&loc(vec![0.001], 1.0 / 64.0)).unwrap();
        assert!(rep.get("final_rel_err").unwrap() < 0.01);
    }

    #[test]
    fn single_eps_matches_direct_solve() {
        let h = 1.0 / 64.0;
        let rep = localization_sweep(&loc(vec![0.3], h)).unwrap();
        let grid = build_grid(&unit(), h).unwrap();
        let pencil = build_pencil(&grid, &dirac_measure(1.0, 0.3).unwrap()).unwrap();
        let r = smallest_eigenpairs(&pencil, 2, DEFAULT_TOL).unwrap();
        assert_eq!(rep.get("lambda_eps[0]").unwrap(), r.lambdas[0]);
        assert_eq!(rep.rows[0], SweepRow::from_result(0.3, &r));
    }

    #[test]
    fn localization_rejects_bad_lists() {
        assert!(matches!(
            localization_sweep(&loc(vec![], 0.05)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            localization_sweep(&loc(vec![0.1, 0.2], 0.05)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            localization_sweep(&loc(vec![0.1, -0.1], 0.05)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn tightened_tolerance_fails() {
        let mut p = loc(vec![0.2, 0.1, 0.05], 1.0 / 32.0);
        p.tol_conv = 1e-9;
        assert_eq!(localization_sweep(&p).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn two_atom_family_runs() {
        let mut p = loc(vec![0.2, 0.1, 0.05], 1.0 / 64.0);
        p.family = MinusFamily::TwoAtom { zero_weight: 0.5 };
        let rep = localization_sweep(&p).unwrap();
        assert!(rep.get("final_rel_err").unwrap() < 0.05);
        p.family = MinusFamily::TwoAtom { zero_weight: 1.0 };
        assert!(localization_sweep(&p).is_err());
    }

    #[test]
    fn positivity_on_unit_interval() {
        let rep =
            simplicity_positivity_check(&SimplicityParams::new(unit(), 1.0 / 128.0, 0.1)).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.get("gap").unwrap() > 0.5);
    }

    #[test]
    fn positivity_needs_connected_domain() {
        let r = simplicity_positivity_check(&SimplicityParams::new(pair(), 0.125, 0.1));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn positivity_outside_small_regime_is_not_a_failure() {
        let mut p = SimplicityParams::new(unit(), 1.0 / 64.0, 0.4);
        p.gap_threshold = 1e6;
        assert_eq!(
            simplicity_positivity_check(&p).unwrap().verdict,
            Verdict::Inconclusive
        );
        p.s_minus = 0.1;
        assert_eq!(
            simplicity_positivity_check(&p).unwrap().verdict,
            Verdict::Fail
        );
    }

    #[test]
    fn sign_change_on_two_intervals() {
        let p = SignChangeParams {
            domain: pair(),
            h: 1.0 / 32.0,
            s_list: vec![0.5, 0.1],
            rel_threshold: 1e-6,
        };
        let rep = sign_change_check(&p).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.evidence);
        assert!(rep.get("symmetry_defect[0]").unwrap() < 1e-8);
        assert!(rep.get("reflected_rq_rel_diff[0]").unwrap() < 1e-10);
    }

    #[test]
    fn sign_change_needs_two_components() {
        let p = SignChangeParams {
            domain: unit(),
            h: 1.0 / 32.0,
            s_list: vec![0.5],
            rel_threshold: 1e-6,
        };
        assert!(matches!(sign_change_check(&p), Err(Error::Precondition(_))));
    }

    #[test]
    fn union_is_strictly_below() {
        let p = UnionParams::new(
            Domain::interval(-2.0, -1.0).unwrap(),
            Domain::interval(1.0, 2.0).unwrap(),
            1.0 / 32.0,
            0.5,
        );
        let rep = union_inequality_check(&p).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.evidence);
        assert!(rep.get("component_rel_diff").unwrap() < 1e-10);
        assert_eq!(rep.get("classical_rel_diff").unwrap(), 0.0);
    }

    #[test]
    fn union_rejects_overlap() {
        let p = UnionParams::new(
            Domain::interval(0.0, 1.0).unwrap(),
            Domain::interval(0.5, 2.0).unwrap(),
            0.05,
            0.5,
        );
        assert!(matches!(union_inequality_check(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn asymmetric_scan_is_simple() {
        let d = Domain::new(&[(0.5, 1.5), (-0.75, -0.25)]).unwrap();
        let rep = simplicity_scan(
            &d,
            &[0.5, 0.2, 0.05],
            1.0 / 64.0,
            GapExpectation::Simple { gap_floor: 5e-2 },
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn scan_preconditions() {
        let d = Domain::new(&[(0.5, 1.5), (-1.5, -0.5)]).unwrap();
        let e = GapExpectation::Simple { gap_floor: 0.0 };
        assert!(simplicity_scan(&d, &[0.5, 0.0], 0.05, e).is_err());
        assert!(simplicity_scan(&unit(), &[0.5], 0.05, e).is_err());
        assert!(simplicity_scan(&d, &[0.1, 0.5], 0.05, e).is_err());
    }

    #[test]
    fn classical_oracle_examples() {
        let rep = classical_limit_oracle(&ClassicalParams::new(pair(), 1.0 / 32.0)).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.evidence);
        assert!(rep.get("subspace_sine").unwrap() < 1e-6);

        let d = Domain::new(&[(0.0, 1.0), (2.0, 4.0)]).unwrap();
        let rep = classical_limit_oracle(&ClassicalParams::new(d, 1.0 / 64.0)).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!((rep.get("lambda_union").unwrap() - PI * PI / 4.0).abs() < 1e-3);
        assert!(rep.get("union_simple").unwrap() == 1.0);

        let rep = classical_limit_oracle(&ClassicalParams::new(unit(), 1.0 / 16.0)).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    fn seminorm_params() -> SeminormParams {
        SeminormParams {
            domain: unit(),
            h_list: vec![1.0 / 32.0, 1.0 / 64.0],
            s_pairs: vec![(0.0, 1.0), (0.3, 0.3)],
            eps_list: vec![0.2, 0.1, 0.05, 0.01],
            probes: 40,
            modes: 8,
            seed: 7,
            ratio_band: (0.8, 1.25),
            defect_tol: 1e-2,
        }
    }

    #[test]
    fn seminorm_lemmas_hold() {
        let rep = seminorm_lemma_checks(&seminorm_params()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.evidence);
        assert_eq!(rep.get("C[1][0]").unwrap(), 1.0);
        // Poincaré: [u]_0 / [u]_1 ≤ 1/π
        assert!(rep.get("C[0][1]").unwrap() <= 1.0 / PI + 1e-3);
    }

    #[test]
    fn probes_are_seeded() {
        let g = build_grid(&unit(), 0.1).unwrap();
        assert_eq!(probe_vectors(&g, 3, 4, 1), probe_vectors(&g, 3, 4, 1));
        assert_ne!(probe_vectors(&g, 3, 4, 1), probe_vectors(&g, 3, 4, 2));
    }

    #[test]
    fn boundary_growth_examples() {
        let p = BoundaryParams {
            domain: unit(),
            h: 1.0 / 128.0,
            s_minus: 0.1,
            rel_threshold: 1e-6,
            layer_fraction: 0.1,
        };
        assert_eq!(boundary_growth_check(&p).unwrap().verdict, Verdict::Pass);

        let xs: Vec<f64> = (1..128).map(|i| i as f64 / 128.0).collect();
        let sine: Vec<f64> = xs.iter().map(|x| (PI * x).sin()).collect();
        let g = boundary_growth_profile(&xs, &sine, (0.0, 1.0), 0.1).unwrap();
        assert!(g.holds);
        // one-sided difference at h: π cos(3πh/2)
        assert!((g.slope_left - PI).abs() < 1e-2);

        let flat: Vec<f64> = xs.iter().map(|x| x * x * (1.0 - x) * (1.0 - x)).collect();
        assert!(
            !boundary_growth_profile(&xs, &flat, (0.0, 1.0), 0.1)
                .unwrap()
                .holds
        );

        let p = BoundaryParams {
            domain: pair(),
            ..p
        };
        assert!(matches!(
            boundary_growth_check(&p),
            Err(Error::Precondition(_))
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn loosening_tolerances_keeps_a_pass(tol in 1e-4f64..0.2, widen in 1.0f64..10.0) {
            let mut p = loc(vec![0.2, 0.1, 0.05], 1.0 / 32.0);
            p.tol_conv = tol;
            p.tol_vec = tol;
            let tight = localization_sweep(&p).unwrap();
            p.tol_conv = tol * widen;
            p.tol_vec = tol * widen;
            let loose = localization_sweep(&p).unwrap();
            proptest::prop_assert_eq!(&tight.evidence, &loose.evidence);
            proptest::prop_assert!(tight.verdict != Verdict::Pass || loose.verdict == Verdict::Pass);
        }

        #[test]
        fn union_reports_are_reproducible(s in 0.05f64..0.95) {
            let p = UnionParams::new(
                Domain::interval(-1.5, -0.5).unwrap(),
                Domain::interval(0.5, 1.0).unwrap(),
                1.0 / 16.0,
                s,
            );
            let a = union_inequality_check(&p).unwrap();
            let b = union_inequality_check(&p).unwrap();
            let bits = |r: &ExperimentReport| r.evidence.iter().map(|(_, v)| v.to_bits()).collect::<Vec<_>>();
            proptest::prop_assert_eq!(bits(&a), bits(&b));
            proptest::prop_assert!(a.get("strict_gap").unwrap() > 0.0);
        }
    }

    #[test]
    fn anchor_limits_and_oracle() {
        let rep = classical_anchor_check(&AnchorParams {
            domain: unit(),
            h: 1.0 / 128.0,
            discrete_tol: 1e-4,
            continuum_tol: 1e-3,
        })
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.evidence);

        let rep = operator_limits_check(&OperatorLimitParams {
            domain: Domain::new(&[(-1.0, -0.3), (0.2, 1.0)]).unwrap(),
            h: 1.0 / 32.0,
            s_list: vec![0.25, 0.5, 0.75],
            symbol_h_list: (4..=10).map(|e| libm::pow(2.0, -(e as f64))).collect(),
            xi: 1.0,
            min_order: 1.9,
        })
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.evidence);

        let rep = oracle_crosscheck(&OracleParams {
            domain: Domain::interval(-1.0, 1.0).unwrap(),
            h: 1.0 / 32.0,
            s_list: vec![0.5],
            quad_points: 64,
            skip: 2,
            rel_tol: 0.05,
        })
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.evidence);
    }

    #[test]
    fn admissible_threshold() {
        let m = dirac_measure(1.0, 0.3).unwrap();
        assert_eq!(m.s_bar(), Some(1.0));
        assert!(dirac_measure(0.5, 0.7).is_err());
        assert!(admissible_measure(&[MeasureAtom::new(0.0, 1.0)], &[]).is_err());
    }
}
