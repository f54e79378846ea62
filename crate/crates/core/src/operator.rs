//! Discrete fractional Laplacians on a [`Grid`] and their superpositions.
//!
//! `(-Δ)^s` is discretized by centered fractional differences
//!
//! ```text
//! (-Δ)^s_h u_i = h^{-2s} Σ_k g_k u_{i-k},   g_k = (-1)^k Γ(2s+1) / (Γ(s-k+1) Γ(s+k+1))
//! ```
//!
//! applied to the zero extension of `u`. Dropping exterior unknowns turns the
//! bi-infinite Toeplitz operator into a principal submatrix, so every
//! assembled matrix is symmetric positive semidefinite, equals the identity
//! at `s = 0` and the 3-point Laplacian at `s = 1`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{dot, Matrix};
use crate::measure::{canonicalize, MeasureAtom, SignedMeasure};
use crate::quadrature::gauss_legendre_on;

/// The normalizing constant `c_{N,s}` of the singular-integral definition,
/// for `0 < s < 1`.
pub fn cns_constant(n: u32, s: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("dimension N must be at least 1".into()));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!(
            "c_(N,s) needs 0 < s < 1, got s = {s}"
        )));
    }
    let nf = n as f64;
    let num = libm::pow(2.0, 2.0 * s - 1.0) * libm::tgamma((nf + 2.0 * s) / 2.0);
    let den = libm::pow(PI, nf / 2.0) * libm::tgamma(2.0 - s);
    Ok(num / den * s * (1.0 - s))
}

fn check_order(s: f64) -> Result<()> {
    if s.is_finite() && (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "fractional order s = {s} outside [0, 1]"
        )))
    }
}

/// Weights `g_0..=g_K` of the centered fractional difference.
///
/// `g_0` is a Gamma ratio; the rest follow from `g_{k+1} = g_k (k - s) / (k + s + 1)`,
/// which never forms a large Gamma value.
pub fn stencil_weights(s: f64, k_max: usize) -> Result<Vec<f64>> {
    check_order(s)?;
    if k_max == 0 {
        return Err(Error::Domain("stencil length K must be at least 1".into()));
    }
    let mut g = vec![0.0; k_max + 1];
    if s == 0.0 {
        g[0] = 1.0;
        return Ok(g);
    }
    if s == 1.0 {
        g[0] = 2.0;
        g[1] = -1.0;
        return Ok(g);
    }
    let g0 = libm::tgamma(2.0 * s + 1.0) / libm::pow(libm::tgamma(s + 1.0), 2.0);
    g[0] = g0;
    for k in 0..k_max {
        let kf = k as f64;
        g[k + 1] = g[k] * (kf - s) / (kf + s + 1.0);
    }
    Ok(g)
}

/// `h^{-2s}`, exact at the endpoints.
fn lattice_scale(h: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if s == 1.0 {
        1.0 / (h * h)
    } else {
        libm::pow(h, -2.0 * s)
    }
}

/// Toeplitz coefficients `c_d` for `d = 0..=span + 1` and row sums `Σ_j A_ij`.
///
/// Off the diagonal every `c_d` is nonpositive, and the stencil sums to zero
/// on the whole lattice for `s > 0`. Each row sum therefore equals the mass
/// that the stencil puts on exterior lattice points. That mass is a sum of
/// positive terms, and on the two unbounded rays it has the closed form
/// `Σ_{d≥D} |g_d| = |g_D| (D + s) / (2s)`. So the row sums carry no
/// cancellation.
#[derive(Debug, Clone, PartialEq)]
struct Stencil {
    coefficients: Vec<f64>,
    row_sums: Vec<f64>,
}

fn ray_mass(g: &[f64], s: f64, d: usize) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        libm::fabs(g[d]) * (d as f64 + s) / (2.0 * s)
    }
}

fn single_stencil(grid: &Grid, s: f64) -> Result<Stencil> {
    let span = grid.lattice_span().max(1);
    let scale = lattice_scale(grid.h(), s);
    let g = stencil_weights(s, span + 1)?;
    let nodes = grid.nodes();
    let mut row_sums = Vec::with_capacity(nodes.len());
    if let (Some(first), Some(last)) = (nodes.first(), nodes.last()) {
        let gaps: Vec<(i64, i64)> = (1..grid.num_components())
            .map(|j| {
                (
                    nodes[grid.component_range(j - 1).end - 1].k + 1,
                    nodes[grid.component_range(j).start].k - 1,
                )
            })
            .collect();
        for n in nodes {
            let mut ext = ray_mass(&g, s, (n.k - first.k + 1) as usize)
                + ray_mass(&g, s, (last.k - n.k + 1) as usize);
            for &(a, b) in &gaps {
                for m in a..=b {
                    ext += libm::fabs(g[n.k.abs_diff(m) as usize]);
                }
            }
            let own = if s == 0.0 { 1.0 } else { 0.0 };
            row_sums.push(scale * (own + ext));
        }
    }
    Ok(Stencil {
        coefficients: g.into_iter().map(|x| scale * x).collect(),
        row_sums,
    })
}

/// Σ w · (stencil of s), accumulated in ascending `s`.
fn superposed_stencil(grid: &Grid, atoms: &[MeasureAtom]) -> Result<Stencil> {
    let span = grid.lattice_span().max(1);
    let mut acc = Stencil {
        coefficients: vec![0.0; span + 2],
        row_sums: vec![0.0; grid.len()],
    };
    for a in atoms {
        let single = single_stencil(grid, a.s)?;
        for (c, g) in acc.coefficients.iter_mut().zip(single.coefficients) {
            *c += a.weight * g;
        }
        for (r, x) in acc.row_sums.iter_mut().zip(single.row_sums) {
            *r += a.weight * x;
        }
    }
    Ok(acc)
}

/// `h uᵀ A u` as `h (Σ r_i u_i² + Σ_{i<j} |A_ij| (u_i - u_j)²)`, a sum of
/// nonnegative terms.
fn stable_energy(grid: &Grid, stencil: &Stencil, u: &[f64]) -> Result<f64> {
    if u.len() != grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            found: u.len(),
        });
    }
    let nodes = grid.nodes();
    let c = &stencil.coefficients;
    let mut total = 0.0;
    for (i, ni) in nodes.iter().enumerate() {
        let mut pairs = 0.0;
        for (nj, uj) in nodes[i + 1..].iter().zip(&u[i + 1..]) {
            let d = u[i] - uj;
            pairs -= c[ni.k.abs_diff(nj.k) as usize] * d * d;
        }
        total += stencil.row_sums[i] * u[i] * u[i] + pairs;
    }
    Ok(grid.h() * total)
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    Single { s: f64 },
    Superposed { atoms: Vec<MeasureAtom> },
}

/// Symmetric matrix of a discrete `(-Δ)^s` or of a superposition over atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: Matrix,
    stencil: Stencil,
    kind: OperatorKind,
    grid: Grid,
}

impl OperatorMatrix {
    fn from_stencil(grid: &Grid, stencil: Stencil, kind: OperatorKind) -> Self {
        let nodes = grid.nodes();
        let c = &stencil.coefficients;
        let entries = Matrix::from_fn(nodes.len(), |i, j| {
            c[nodes[i].k.abs_diff(nodes[j].k) as usize]
        });
        OperatorMatrix {
            entries,
            stencil,
            kind,
            grid: grid.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.n()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    /// Matrix entry as a function of lattice distance.
    pub fn coefficients(&self) -> &[f64] {
        &self.stencil.coefficients
    }

    /// `Σ_j A_ij` per row, evaluated without cancellation.
    pub fn row_sums(&self) -> &[f64] {
        &self.stencil.row_sums
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n() {
            return Err(Error::Shape {
                expected: self.n(),
                found: u.len(),
            });
        }
        Ok(self.entries.matvec(u))
    }

    /// `h uᵀ A v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        if v.len() != self.n() {
            return Err(Error::Shape {
                expected: self.n(),
                found: v.len(),
            });
        }
        Ok(self.h() * dot(&self.apply(u)?, v))
    }

    /// `h uᵀ A u`, accurate to a few ulps relative to the result.
    pub fn energy(&self, u: &[f64]) -> Result<f64> {
        stable_energy(&self.grid, &self.stencil, u)
    }

    /// One row per line, entries space-separated, shortest round-trip form.
    pub fn to_dense_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n() {
            for (j, v) in self.entries.row(i).iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v:?}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn assemble_single(grid: &Grid, s: f64) -> Result<OperatorMatrix> {
    let st = single_stencil(grid, s)?;
    Ok(OperatorMatrix::from_stencil(
        grid,
        st,
        OperatorKind::Single { s },
    ))
}

/// `Σ w A_s` over the atoms (canonicalized first: sorted by `s`, duplicates merged).
pub fn assemble_superposed(grid: &Grid, atoms: &[MeasureAtom]) -> Result<OperatorMatrix> {
    let atoms = canonicalize(atoms)?;
    if atoms.is_empty() {
        return Err(Error::Domain(
            "superposition needs at least one atom of positive weight".into(),
        ));
    }
    let st = superposed_stencil(grid, &atoms)?;
    Ok(OperatorMatrix::from_stencil(
        grid,
        st,
        OperatorKind::Superposed { atoms },
    ))
}

fn toeplitz_form(grid: &Grid, coefficients: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
    for w in [u, v] {
        if w.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                found: w.len(),
            });
        }
    }
    let nodes = grid.nodes();
    let mut total = 0.0;
    for (i, ni) in nodes.iter().enumerate() {
        let row: f64 = nodes
            .iter()
            .zip(v)
            .map(|(nj, vj)| coefficients[ni.k.abs_diff(nj.k) as usize] * vj)
            .sum();
        total += u[i] * row;
    }
    Ok(grid.h() * total)
}

/// Discrete squared seminorm `[u]²_{s,h} = h uᵀ A_s u`.
pub fn seminorm_sq(grid: &Grid, u: &[f64], s: f64) -> Result<f64> {
    stable_energy(grid, &single_stencil(grid, s)?, u)
}

/// Discrete bilinear form `<u, v>_s = h uᵀ A_s v`.
pub fn inner_product(grid: &Grid, u: &[f64], v: &[f64], s: f64) -> Result<f64> {
    let st = single_stencil(grid, s)?;
    toeplitz_form(grid, &st.coefficients, u, v)
}

/// `‖u‖²_{X+} = Σ_{plus atoms} w [u]²_{s,h}`.
pub fn xplus_norm_sq(grid: &Grid, u: &[f64], measure: &SignedMeasure) -> Result<f64> {
    let mut total = 0.0;
    for a in measure.plus() {
        total += a.weight * seminorm_sq(grid, u, a.s)?;
    }
    Ok(total)
}

/// Symbol `h^{-2s} (4 sin²(π ξ h))^s` of the stencil on the infinite lattice.
pub fn fourier_symbol(s: f64, h: f64, xi: f64) -> Result<f64> {
    check_order(s)?;
    if !(h > 0.0) {
        return Err(Error::Domain(format!("h = {h} must be positive")));
    }
    let sn = libm::sin(PI * xi * h);
    Ok(lattice_scale(h, s) * libm::pow(4.0 * sn * sn, s))
}

/// Independent evaluation of `c_{1,s} ∫ (2u(x) - u(x+y) - u(x-y)) / |y|^{1+2s} dy`
/// at every node, for the piecewise-linear zero extension of `u`.
///
/// The `y` range is split into `(0, h]` (second-order Taylor term with the
/// local 3-point curvature), `[h, R]` (Gauss–Legendre with `quad_points`
/// nodes per lattice cell) and `[R, ∞)` where `u(x ± y) = 0` and the
/// integral is closed form.
pub fn brute_force_apply(grid: &Grid, u: &[f64], s: f64, quad_points: usize) -> Result<Vec<f64>> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!(
            "the quadrature oracle needs 0 < s < 1, got s = {s}"
        )));
    }
    if quad_points < 64 {
        return Err(Error::Domain(format!("quad_points = {quad_points} < 64")));
    }
    if u.len() != grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            found: u.len(),
        });
    }
    let nodes = grid.nodes();
    if nodes.is_empty() {
        return Ok(Vec::new());
    }
    let h = grid.h();
    let c = cns_constant(1, s)?;
    let k_lo = nodes[0].k - 1;
    let k_hi = nodes[nodes.len() - 1].k + 1;
    let mut lattice = vec![0.0; (k_hi - k_lo + 1) as usize];
    for (n, &v) in nodes.iter().zip(u) {
        lattice[(n.k - k_lo) as usize] = v;
    }
    let at = |k: i64| -> f64 {
        if k < k_lo || k > k_hi {
            0.0
        } else {
            lattice[(k - k_lo) as usize]
        }
    };
    let (t, w) = gauss_legendre_on(quad_points, 0.0, 1.0);
    let mut out = Vec::with_capacity(nodes.len());
    for (n, &ux) in nodes.iter().zip(u) {
        let k = n.k;
        let curvature = (at(k + 1) - 2.0 * ux + at(k - 1)) / (h * h);
        let near = -curvature * libm::pow(h, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);

        let cells = (k - k_lo).max(k_hi - k);
        let mut mid = 0.0;
        for p in 1..cells {
            let (r0, r1) = (at(k + p), at(k + p + 1));
            let (l0, l1) = (at(k - p), at(k - p - 1));
            let mut cell = 0.0;
            for (ti, wi) in t.iter().zip(&w) {
                let y = (p as f64 + ti) * h;
                let right = (1.0 - ti) * r0 + ti * r1;
                let left = (1.0 - ti) * l0 + ti * l1;
                cell += wi * (2.0 * ux - right - left) / libm::pow(y, 1.0 + 2.0 * s);
            }
            mid += h * cell;
        }
        let r = cells as f64 * h;
        let tail = 2.0 * ux * libm::pow(r, -2.0 * s) / (2.0 * s);
        out.push(c * 2.0 * (near + mid + tail));
    }
    Ok(out)
}
