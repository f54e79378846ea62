//! Finitely-atomic signed measures on the order interval `[0, 1]`.
//!
//! A measure is stored as two nonnegative atom lists, `plus` and `minus`.
//! Continuous densities are realized as Gauss–Legendre atoms when they are
//! loaded, so every downstream operator is a finite weighted sum.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

/// One Dirac component `weight · δ_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasureAtom {
    pub s: f64,
    #[cfg_attr(feature = "serde", serde(rename = "w"))]
    pub weight: f64,
}

impl MeasureAtom {
    pub fn new(s: f64, weight: f64) -> Self {
        MeasureAtom { s, weight }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Plus,
    Minus,
}

/// `mu = mu+ - mu-` with the threshold `s_bar` of the structural condition.
///
/// `s_bar` is `None` for a half-built measure (one part only, as returned by
/// [`make_dirac`] or [`from_density`]); [`combine`] and [`SignedMeasure::new`]
/// validate the structural condition and set it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SignedMeasure {
    plus: Vec<MeasureAtom>,
    minus: Vec<MeasureAtom>,
    s_bar: Option<f64>,
}

/// Sorts by `s`, drops zero weights and merges bit-identical orders.
pub(crate) fn canonicalize(atoms: &[MeasureAtom]) -> Result<Vec<MeasureAtom>> {
    let mut out: Vec<MeasureAtom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        if !(a.s.is_finite() && (0.0..=1.0).contains(&a.s)) {
            return Err(Error::Domain(format!(
                "atom order s = {} outside [0, 1]",
                a.s
            )));
        }
        if !a.weight.is_finite() || a.weight < 0.0 {
            return Err(Error::Domain(format!(
                "atom at s = {} has weight {}; weights must be finite and nonnegative",
                a.s, a.weight
            )));
        }
        if a.weight > 0.0 {
            out.push(*a);
        }
    }
    // weight as a secondary key makes the merged sums independent of input order
    out.sort_by(|x, y| x.s.total_cmp(&y.s).then(x.weight.total_cmp(&y.weight)));
    let mut merged: Vec<MeasureAtom> = Vec::with_capacity(out.len());
    for a in out {
        match merged.last_mut() {
            Some(last) if last.s.to_bits() == a.s.to_bits() => last.weight += a.weight,
            _ => merged.push(a),
        }
    }
    Ok(merged)
}

fn check_structure(plus: &[MeasureAtom], minus: &[MeasureAtom], s_bar: f64) -> Result<()> {
    if !(s_bar > 0.0 && s_bar <= 1.0) {
        return Err(Error::Domain(format!("s_bar = {s_bar} outside (0, 1]")));
    }
    let top: f64 = plus.iter().filter(|a| a.s >= s_bar).map(|a| a.weight).sum();
    if !(top > 0.0) {
        return Err(Error::Structural(format!(
            "mu+ has no mass on [s_bar, 1] = [{s_bar}, 1]"
        )));
    }
    if let Some(a) = minus.iter().find(|a| a.s >= s_bar) {
        return Err(Error::Structural(format!(
            "mu- atom (s = {}, w = {}) lies in [s_bar, 1] = [{s_bar}, 1]",
            a.s, a.weight
        )));
    }
    Ok(())
}

impl SignedMeasure {
    /// Builds and validates a full measure.
    pub fn new(plus: &[MeasureAtom], minus: &[MeasureAtom], s_bar: f64) -> Result<Self> {
        let plus = canonicalize(plus)?;
        let minus = canonicalize(minus)?;
        check_structure(&plus, &minus, s_bar)?;
        Ok(SignedMeasure {
            plus,
            minus,
            s_bar: Some(s_bar),
        })
    }

    /// A one-sided measure; the structural condition is checked later by
    /// [`combine`].
    pub fn one_part(atoms: &[MeasureAtom], part: Part) -> Result<Self> {
        let atoms = canonicalize(atoms)?;
        let (plus, minus) = match part {
            Part::Plus => (atoms, Vec::new()),
            Part::Minus => (Vec::new(), atoms),
        };
        Ok(SignedMeasure {
            plus,
            minus,
            s_bar: None,
        })
    }

    pub fn plus(&self) -> &[MeasureAtom] {
        &self.plus
    }

    pub fn minus(&self) -> &[MeasureAtom] {
        &self.minus
    }

    pub fn s_bar(&self) -> Option<f64> {
        self.s_bar
    }

    pub fn plus_mass(&self) -> f64 {
        self.plus.iter().map(|a| a.weight).sum()
    }

    pub fn minus_mass(&self) -> f64 {
        self.minus.iter().map(|a| a.weight).sum()
    }

    /// Same measure with every `mu-` weight multiplied by `factor > 0`.
    pub fn scale_minus(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Domain(format!(
                "scale factor {factor} must be positive"
            )));
        }
        let mut out = self.clone();
        for a in &mut out.minus {
            a.weight *= factor;
        }
        Ok(out)
    }
}

pub fn make_dirac(s: f64, part: Part) -> Result<SignedMeasure> {
    if !(s.is_finite() && (0.0..=1.0).contains(&s)) {
        return Err(Error::Domain(format!("Dirac order s = {s} outside [0, 1]")));
    }
    if part == Part::Minus && s >= 1.0 {
        return Err(Error::Domain(
            "a mu- atom at s = 1 violates the structural condition for every s_bar".into(),
        ));
    }
    SignedMeasure::one_part(&[MeasureAtom::new(s, 1.0)], part)
}

/// Realizes `density(s) ds` on `support` as `n_quad` Gauss–Legendre atoms.
pub fn from_density<F>(
    density: F,
    support: (f64, f64),
    n_quad: usize,
    part: Part,
) -> Result<SignedMeasure>
where
    F: Fn(f64) -> f64,
{
    let (a, b) = support;
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::Domain(format!(
            "density support [{a}, {b}] is not a subinterval of [0, 1]"
        )));
    }
    if n_quad == 0 {
        return Err(Error::Domain("n_quad must be at least 1".into()));
    }
    let (nodes, weights) = gauss_legendre_on(n_quad, a, b);
    let mut atoms = vec![];
    for (s, w) in nodes.into_iter().zip(weights) {
        let d = density(s);
        if !d.is_finite() || d < 0.0 {
            return Err(Error::Domain(format!(
                "density sample {d} at s = {s} is negative or not finite"
            )));
        }
        atoms.push(MeasureAtom::new(s, d * w));
    }
    SignedMeasure::one_part(&atoms, part)
}

/// Merges a plus-only and a minus-only measure and validates the structural
/// condition at `s_bar`.
pub fn combine(
    plus_part: &SignedMeasure,
    minus_part: &SignedMeasure,
    s_bar: f64,
) -> Result<SignedMeasure> {
    if !plus_part.minus.is_empty() {
        return Err(Error::Domain("plus_part carries mu- atoms".into()));
    }
    if !minus_part.plus.is_empty() {
        return Err(Error::Domain("minus_part carries mu+ atoms".into()));
    }
    SignedMeasure::new(&plus_part.plus, &minus_part.minus, s_bar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn dirac_examples() {
        let m = make_dirac(1.0, Part::Plus).unwrap();
        assert_eq!(m.plus(), &[MeasureAtom::new(1.0, 1.0)]);
        assert!(m.minus().is_empty());

        let m = make_dirac(0.0, Part::Minus).unwrap();
        assert!(m.plus().is_empty());
        assert_eq!(m.minus(), &[MeasureAtom::new(0.0, 1.0)]);

        assert!(matches!(make_dirac(1.5, Part::Plus), Err(Error::Domain(_))));
        assert!(matches!(
            make_dirac(1.0, Part::Minus),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            make_dirac(-0.1, Part::Minus),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn density_masses() {
        let m = from_density(|_| 1.0, (0.0, 1.0), 8, Part::Plus).unwrap();
        assert_relative_eq!(m.plus_mass(), 1.0, epsilon = 1e-15);
        let m = from_density(|s| 2.0 * s, (0.0, 1.0), 4, Part::Minus).unwrap();
        assert_relative_eq!(m.minus_mass(), 1.0, epsilon = 1e-15);
        let m = from_density(|_| 1.0, (0.0, 0.1), 2, Part::Minus).unwrap();
        assert_relative_eq!(m.minus_mass(), 0.1, epsilon = 1e-15);
        assert_eq!(m.minus().len(), 2);
    }

    #[test]
    fn density_rejects_negative_samples() {
        let r = from_density(|s| s - 0.5, (0.0, 1.0), 4, Part::Plus);
        assert!(matches!(r, Err(Error::Domain(_))));
        assert!(from_density(|_| 1.0, (0.0, 1.0), 0, Part::Plus).is_err());
        assert!(from_density(|_| 1.0, (0.5, 1.5), 3, Part::Plus).is_err());
    }

    #[test]
    fn combine_examples() {
        let p1 = make_dirac(1.0, Part::Plus).unwrap();
        let m0 = make_dirac(0.0, Part::Minus).unwrap();
        let m = combine(&p1, &m0, 0.5).unwrap();
        assert_eq!(m.s_bar(), Some(0.5));

        let p03 = make_dirac(0.3, Part::Plus).unwrap();
        assert!(matches!(combine(&p03, &m0, 0.5), Err(Error::Structural(_))));

        let m07 = make_dirac(0.7, Part::Minus).unwrap();
        match combine(&p1, &m07, 0.5) {
            Err(Error::Structural(msg)) => assert!(msg.contains("0.7")),
            other => panic!("expected structural error, got {other:?}"),
        }
        // swapped arguments
        assert!(combine(&m0, &p1, 0.5).is_err());
    }

    #[test]
    fn minus_atom_at_s_bar_is_rejected() {
        let p1 = make_dirac(1.0, Part::Plus).unwrap();
        let m = make_dirac(0.5, Part::Minus).unwrap();
        assert!(matches!(combine(&p1, &m, 0.5), Err(Error::Structural(_))));
    }

    #[test]
    fn duplicates_merge_and_zero_weights_drop() {
        let m = SignedMeasure::one_part(
            &[
                MeasureAtom::new(0.0, 0.5),
                MeasureAtom::new(0.3, 0.0),
                MeasureAtom::new(0.0, 0.5),
            ],
            Part::Minus,
        )
        .unwrap();
        assert_eq!(m.minus(), &[MeasureAtom::new(0.0, 1.0)]);
    }

    fn atoms(max_len: usize) -> impl Strategy<Value = Vec<MeasureAtom>> {
        prop::collection::vec(
            (
                prop::sample::select(vec![0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0]),
                0.0f64..3.0,
            )
                .prop_map(|(s, w)| MeasureAtom::new(s, w)),
            0..max_len,
        )
    }

    proptest! {
        #[test]
        fn accepted_iff_structural_condition(plus in atoms(6), minus in atoms(6), s_bar in 0.05f64..1.0) {
            let expected = plus.iter().filter(|a| a.s >= s_bar).map(|a| a.weight).sum::<f64>() > 0.0
                && minus.iter().all(|a| a.weight == 0.0 || a.s < s_bar);
            let got = SignedMeasure::new(&plus, &minus, s_bar);
            prop_assert_eq!(got.is_ok(), expected);
        }

        #[test]
        fn canonical_form_is_order_insensitive(mut plus in atoms(8)) {
            let a = SignedMeasure::one_part(&plus, Part::Plus).unwrap();
            plus.reverse();
            let b = SignedMeasure::one_part(&plus, Part::Plus).unwrap();
            prop_assert_eq!(a.plus(), b.plus());
            prop_assert!(a.plus().windows(2).all(|p| p[0].s < p[1].s));
        }

        #[test]
        fn merging_preserves_mass(plus in atoms(8)) {
            // weights drawn from a dyadic grid make the sums exact in any order
            let plus: Vec<_> = plus.iter().map(|a| MeasureAtom::new(a.s, (a.weight * 8.0).floor() / 8.0)).collect();
            let m = SignedMeasure::one_part(&plus, Part::Plus).unwrap();
            let raw: f64 = plus.iter().map(|a| a.weight).sum();
            prop_assert_eq!(m.plus_mass(), raw);
        }
    }
}
