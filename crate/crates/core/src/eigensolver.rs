//! The symmetric-definite pencil `A⁺ v = λ A⁻ v`.
//!
//! Solved densely: Cholesky `A⁻ = L Lᵀ`, eigen-decomposition of
//! `L⁻¹ A⁺ L⁻ᵀ`, back-substitution. When no entry of either matrix couples
//! two groups of grid components, each group is solved on its own; the
//! merged spectrum is the same and congruent groups give bit-identical
//! eigenvalues.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{
    self, backward_substitute_transpose, cholesky, congruence_reduce, norm2, norm_inf,
};
use crate::measure::SignedMeasure;
use crate::operator::{assemble_superposed, OperatorMatrix};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_REL_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_GAP_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct Pencil {
    a_plus: OperatorMatrix,
    a_minus: OperatorMatrix,
    grid: Grid,
    measure: SignedMeasure,
}

impl Pencil {
    pub fn a_plus(&self) -> &OperatorMatrix {
        &self.a_plus
    }

    pub fn a_minus(&self) -> &OperatorMatrix {
        &self.a_minus
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn measure(&self) -> &SignedMeasure {
        &self.measure
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }
}

/// Smallest generalized eigenpairs with diagnostics.
///
/// Vectors satisfy `h vᵢᵀ A⁻ vⱼ = δᵢⱼ` and carry the canonical sign (largest
/// magnitude entry positive, ties to the lowest index).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EigenResult {
    pub lambdas: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub vectors: Vec<Vec<f64>>,
    /// `‖A⁺v - λA⁻v‖₂ / ‖A⁺v‖₂` per pair.
    pub residuals: Vec<f64>,
    /// `(λ₂ - λ₁) / λ₁` when at least two pairs were computed.
    pub gap: Option<f64>,
    /// `(min v₁, max v₁)` over the nodes of each grid component.
    pub sign_profile: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize),
    serde(rename_all = "snake_case")
)]
pub enum SignClass {
    Positive,
    Negative,
    SignChanging,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize),
    serde(rename_all = "snake_case")
)]
pub enum Simplicity {
    Simple,
    NearDegenerate,
}

pub fn build_pencil(grid: &Grid, measure: &SignedMeasure) -> Result<Pencil> {
    if measure.s_bar().is_none() {
        return Err(Error::Structural(
            "measure has not been validated against a threshold s_bar".into(),
        ));
    }
    if measure.minus().is_empty() {
        return Err(Error::Structural(
            "mu- is empty; the right-hand side would vanish".into(),
        ));
    }
    if measure.plus().is_empty() {
        return Err(Error::Structural("mu+ is empty".into()));
    }
    let a_plus = assemble_superposed(grid, measure.plus())?;
    let a_minus = assemble_superposed(grid, measure.minus())?;
    if cholesky(a_plus.entries()).is_err() {
        return Err(Error::Numerical(
            "A+ failed the positive-definiteness probe".into(),
        ));
    }
    Ok(Pencil {
        a_plus,
        a_minus,
        grid: grid.clone(),
        measure: measure.clone(),
    })
}

/// Flips `v` so that its largest-magnitude entry (lowest index on ties) is positive.
pub fn canonical_sign(v: &mut [f64]) {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, x) in v.iter().enumerate() {
        let a = libm::fabs(*x);
        if a > best_abs {
            best_abs = a;
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Groups of grid components that no matrix entry couples, in component order.
fn decoupled_blocks(pencil: &Pencil) -> Vec<Vec<usize>> {
    let grid = &pencil.grid;
    let m = grid.num_components();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let nodes = grid.nodes();
    let coupled = |p: usize, q: usize| -> bool {
        let rp = grid.component_range(p);
        let rq = grid.component_range(q);
        let lo = nodes[rq.start].k.abs_diff(nodes[rp.end - 1].k) as usize;
        let hi = nodes[rq.end - 1].k.abs_diff(nodes[rp.start].k) as usize;
        [pencil.a_plus.coefficients(), pencil.a_minus.coefficients()]
            .iter()
            .any(|c| c[lo..=hi].iter().any(|&x| x != 0.0))
    };
    for p in 0..m {
        for q in (p + 1)..m {
            if coupled(p, q) {
                let (a, b) = (find(&mut parent, p), find(&mut parent, q));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut root_of_block: Vec<usize> = Vec::new();
    for j in 0..m {
        let r = find(&mut parent, j);
        let pos = match root_of_block.iter().position(|&x| x == r) {
            Some(p) => p,
            None => {
                root_of_block.push(r);
                blocks.push(Vec::new());
                blocks.len() - 1
            }
        };
        blocks[pos].extend(grid.component_range(j));
    }
    blocks
}

struct Candidate {
    lambda: f64,
    block: usize,
    order: usize,
    vector: Vec<f64>,
}

pub fn smallest_eigenpairs(pencil: &Pencil, k: usize, tol: f64) -> Result<EigenResult> {
    let n = pencil.n();
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "requested k = {k} eigenpairs from a pencil of size {n}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "solver tolerance {tol} must be positive"
        )));
    }
    let h = pencil.grid.h();
    let a_plus = pencil.a_plus.entries();
    let a_minus = pencil.a_minus.entries();

    let mut candidates: Vec<Candidate> = Vec::new();
    for (b, idx) in decoupled_blocks(pencil).iter().enumerate() {
        let ap = a_plus.submatrix(idx);
        let am = a_minus.submatrix(idx);
        let l = cholesky(&am).map_err(|e| match e {
            Error::Definiteness(m) => {
                Error::Definiteness(format!("A- is not positive definite: {m}"))
            }
            other => other,
        })?;
        let c = congruence_reduce(&ap, &l);
        let (values, vectors) = linalg::symmetric_eigen(&c)?;
        for (order, (lambda, mut y)) in values.into_iter().zip(vectors).take(k).enumerate() {
            backward_substitute_transpose(&l, &mut y);
            let mut full = vec![0.0; n];
            for (&i, &val) in idx.iter().zip(&y) {
                full[i] = val;
            }
            // the dense QL value is only accurate to eps·‖C‖; the Rayleigh
            // quotient of the computed vector is accurate to eps·λ
            let refined = pencil.a_plus.energy(&full)? / pencil.a_minus.energy(&full)?;
            let lambda = if refined.is_finite() { refined } else { lambda };
            candidates.push(Candidate {
                lambda,
                block: b,
                order,
                vector: full,
            });
        }
    }
    candidates.sort_by(|x, y| {
        x.lambda
            .total_cmp(&y.lambda)
            .then(x.block.cmp(&y.block))
            .then(x.order.cmp(&y.order))
    });
    candidates.truncate(k);

    let scale = 1.0 / libm::sqrt(h);
    let mut lambdas = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for cand in candidates {
        let mut v: Vec<f64> = cand.vector.iter().map(|x| x * scale).collect();
        canonical_sign(&mut v);
        let av = a_plus.matvec(&v);
        let bv = a_minus.matvec(&v);
        let r: Vec<f64> = av
            .iter()
            .zip(&bv)
            .map(|(a, b)| a - cand.lambda * b)
            .collect();
        let res = norm2(&r) / norm2(&av);
        if !(res <= tol) {
            return Err(Error::Numerical(format!(
                "residual {res:e} of eigenpair {} exceeds tolerance {tol:e}",
                lambdas.len()
            )));
        }
        lambdas.push(cand.lambda);
        vectors.push(v);
        residuals.push(res);
    }
    if !(lambdas[0] > 0.0) {
        return Err(Error::Numerical(format!(
            "first eigenvalue {} is not positive",
            lambdas[0]
        )));
    }
    let gap = (lambdas.len() >= 2).then(|| (lambdas[1] - lambdas[0]) / lambdas[0]);
    let grid = &pencil.grid;
    let sign_profile = (0..grid.num_components())
        .map(|j| {
            let part = &vectors[0][grid.component_range(j)];
            let lo = part.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = part.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect();
    Ok(EigenResult {
        lambdas,
        vectors,
        residuals,
        gap,
        sign_profile,
    })
}

/// `uᵀA⁺u / uᵀA⁻u`, both forms evaluated without cancellation.
pub fn rayleigh_quotient(pencil: &Pencil, u: &[f64]) -> Result<f64> {
    if u.len() != pencil.n() {
        return Err(Error::Shape {
            expected: pencil.n(),
            found: u.len(),
        });
    }
    if u.iter().all(|&x| x == 0.0) {
        return Err(Error::Domain("Rayleigh quotient of the zero vector".into()));
    }
    Ok(pencil.a_plus.energy(u)? / pencil.a_minus.energy(u)?)
}

/// Sign pattern of a vector as given (no sign flip).
pub fn classify_vector(v: &[f64], rel_threshold: f64) -> SignClass {
    let inf = norm_inf(v);
    if !(inf > 0.0) {
        return SignClass::Degenerate;
    }
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = rel_threshold * inf;
    let has_neg = lo < -cut;
    let has_pos = hi > cut;
    match (has_neg, has_pos) {
        (false, true) => SignClass::Positive,
        (true, false) => SignClass::Negative,
        (true, true) => SignClass::SignChanging,
        (false, false) => SignClass::Degenerate,
    }
}

/// Classifies the first eigenvector after the canonical sign flip.
pub fn sign_classification(result: &EigenResult, rel_threshold: f64) -> SignClass {
    match result.vectors.first() {
        Some(v) => {
            let mut v = v.clone();
            canonical_sign(&mut v);
            classify_vector(&v, rel_threshold)
        }
        None => SignClass::Degenerate,
    }
}

pub fn simplicity_diagnostic(result: &EigenResult, gap_threshold: f64) -> Result<Simplicity> {
    if result.lambdas.len() < 2 {
        return Err(Error::Domain(
            "simplicity needs at least two eigenvalues".into(),
        ));
    }
    let gap = (result.lambdas[1] - result.lambdas[0]) / result.lambdas[0];
    Ok(if gap > gap_threshold {
        Simplicity::Simple
    } else {
        Simplicity::NearDegenerate
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Domain};
    use crate::measure::{combine, make_dirac, MeasureAtom, Part};
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn dirac_pair(sp: f64, sm: f64) -> SignedMeasure {
        combine(
            &make_dirac(sp, Part::Plus).unwrap(),
            &make_dirac(sm, Part::Minus).unwrap(),
            0.5f64.max(sm + 1e-3).min(sp),
        )
        .unwrap()
    }

    fn result_with(lambdas: Vec<f64>, v: Vec<f64>) -> EigenResult {
        EigenResult {
            lambdas,
            vectors: vec![v],
            residuals: vec![0.0],
            gap: None,
            sign_profile: vec![],
        }
    }

    #[test]
    fn classical_pencil_shape() {
        let g = build_grid(&Domain::interval(0.0, 1.0).unwrap(), 0.125).unwrap();
        let p = build_pencil(&g, &dirac_pair(1.0, 0.0)).unwrap();
        assert_eq!(
            p.a_minus().entries(),
            &crate::linalg::Matrix::identity(g.len())
        );
        assert_eq!(p.a_plus().get(0, 1), -64.0);
    }

    #[test]
    fn empty_minus_is_structural() {
        let g = build_grid(&Domain::interval(0.0, 1.0).unwrap(), 0.125).unwrap();
        let half = make_dirac(1.0, Part::Plus).unwrap();
        assert!(matches!(build_pencil(&g, &half), Err(Error::Structural(_))));
    }

    #[test]
    fn unit_interval_first_two() {
        let h = 1.0 / 512.0;
        let g = build_grid(&Domain::interval(0.0, 1.0).unwrap(), h).unwrap();
        let p = build_pencil(&g, &dirac_pair(1.0, 0.0)).unwrap();
        let r = smallest_eigenpairs(&p, 2, DEFAULT_TOL).unwrap();
        assert!((r.lambdas[0] - PI * PI).abs() < 1e-3);
        let closed = |m: f64| 2.0 * (1.0 - (m * PI * h).cos()) / (h * h);
        assert_relative_eq!(r.lambdas[0], closed(1.0), max_relative = 1e-9);
        assert_relative_eq!(r.lambdas[1], closed(2.0), max_relative = 1e-9);
        assert!((r.lambdas[1] - 4.0 * PI * PI).abs() < 4e-3);
        assert!((r.gap.unwrap() - 3.0).abs() < 1e-3);
        let v = &r.vectors[0];
        assert_relative_eq!(
            p.a_minus().bilinear(v, v).unwrap(),
            1.0,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            rayleigh_quotient(&p, v).unwrap(),
            r.lambdas[0],
            max_relative = 1e-10
        );
    }

    #[test]
    fn k_out_of_range() {
        let g = build_grid(&Domain::interval(0.0, 1.0).unwrap(), 0.125).unwrap();
        let p = build_pencil(&g, &dirac_pair(1.0, 0.0)).unwrap();
        assert!(matches!(
            smallest_eigenpairs(&p, 0, 1e-8),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            smallest_eigenpairs(&p, 8, 1e-8),
            Err(Error::Domain(_))
        ));
        assert!(smallest_eigenpairs(&p, 7, 1e-8).is_ok());
    }

    #[test]
    fn rayleigh_homogeneity_and_zero() {
        let g = build_grid(&Domain::interval(-1.0, 1.0).unwrap(), 1.0 / 32.0).unwrap();
        let p = build_pencil(&g, &dirac_pair(1.0, 0.3)).unwrap();
        let u: Vec<f64> = g
            .coordinates()
            .iter()
            .map(|x| 1.0 - x * x + 0.1 * x)
            .collect();
        let u2: Vec<f64> = u.iter().map(|x| 2.0 * x).collect();
        assert_relative_eq!(
            rayleigh_quotient(&p, &u).unwrap(),
            rayleigh_quotient(&p, &u2).unwrap(),
            max_relative = 1e-14
        );
        assert!(matches!(
            rayleigh_quotient(&p, &vec![0.0; g.len()]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn positive_on_symmetric_interval() {
        let g = build_grid(&Domain::interval(-1.0, 1.0).unwrap(), 1.0 / 64.0).unwrap();
        let p = build_pencil(&g, &dirac_pair(1.0, 0.5)).unwrap();
        let r = smallest_eigenpairs(&p, 2, DEFAULT_TOL).unwrap();
        assert!(r.lambdas[0] > 0.0);
        assert!(r.vectors[0].iter().all(|&x| x > 0.0));
        assert_eq!(
            sign_classification(&r, DEFAULT_REL_THRESHOLD),
            SignClass::Positive
        );
    }

    #[test]
    fn classification_examples() {
        let xs: Vec<f64> = (1..32).map(|i| i as f64 / 32.0).collect();
        let s1 = result_with(vec![1.0], xs.iter().map(|x| (PI * x).sin()).collect());
        assert_eq!(sign_classification(&s1, 1e-6), SignClass::Positive);
        let s2 = result_with(vec![1.0], xs.iter().map(|x| (2.0 * PI * x).sin()).collect());
        assert_eq!(sign_classification(&s2, 1e-6), SignClass::SignChanging);
        let mut v: Vec<f64> = xs.iter().map(|x| (PI * x).sin()).collect();
        let inf = norm_inf(&v);
        v[3] = -1e-12 * inf;
        assert_eq!(
            sign_classification(&result_with(vec![1.0], v.clone()), 1e-6),
            SignClass::Positive
        );
        // the canonical flip turns a negative bump positive
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert_eq!(
            sign_classification(&result_with(vec![1.0], neg.clone()), 1e-6),
            SignClass::Positive
        );
        assert_eq!(classify_vector(&neg, 1e-6), SignClass::Negative);
        assert_eq!(classify_vector(&[0.0, 0.0], 1e-6), SignClass::Degenerate);
    }

    #[test]
    fn simplicity_examples() {
        let r = result_with(vec![1.0, 4.0], vec![1.0]);
        assert_eq!(simplicity_diagnostic(&r, 0.01).unwrap(), Simplicity::Simple);
        let r = result_with(vec![1.0, 1.0 + 1e-9], vec![1.0]);
        assert_eq!(
            simplicity_diagnostic(&r, DEFAULT_GAP_THRESHOLD).unwrap(),
            Simplicity::NearDegenerate
        );
        assert!(simplicity_diagnostic(&result_with(vec![1.0], vec![1.0]), 0.01).is_err());
    }

    #[test]
    fn canonical_sign_ties_go_to_lowest_index() {
        let mut v = vec![-1.0, 0.5, 1.0];
        canonical_sign(&mut v);
        assert_eq!(v, vec![1.0, -0.5, -1.0]);
    }

    #[test]
    fn superposed_plus_matches_weighted_sum() {
        let g = build_grid(&Domain::interval(0.0, 1.0).unwrap(), 1.0 / 32.0).unwrap();
        let m = SignedMeasure::new(
            &[MeasureAtom::new(0.8, 0.5), MeasureAtom::new(1.0, 2.0)],
            &[MeasureAtom::new(0.2, 1.0)],
            0.5,
        )
        .unwrap();
        let p = build_pencil(&g, &m).unwrap();
        let a08 = crate::operator::assemble_single(&g, 0.8).unwrap();
        let a1 = crate::operator::assemble_single(&g, 1.0).unwrap();
        for i in 0..g.len() {
            for j in 0..g.len() {
                assert_relative_eq!(
                    p.a_plus().get(i, j),
                    0.5 * a08.get(i, j) + 2.0 * a1.get(i, j),
                    max_relative = 1e-14
                );
            }
        }
    }

    #[test]
    fn decoupled_components_solve_separately() {
        let d = Domain::new(&[(-2.0, -1.0), (1.0, 2.0)]).unwrap();
        let g = build_grid(&d, 1.0 / 32.0).unwrap();
        let classical = build_pencil(&g, &dirac_pair(1.0, 0.0)).unwrap();
        assert_eq!(decoupled_blocks(&classical).len(), 2);
        let r = smallest_eigenpairs(&classical, 2, DEFAULT_TOL).unwrap();
        assert_eq!(r.lambdas[0], r.lambdas[1]);
        let coupled = build_pencil(&g, &dirac_pair(1.0, 0.3)).unwrap();
        assert_eq!(decoupled_blocks(&coupled).len(), 1);
    }
}
