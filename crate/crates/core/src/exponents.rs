//! The three exponent expressions α, κ, ε as functions of the six weights.
//!
//! Each exponent is a minimum over a list of top-level terms; each term is an
//! affine part plus zero or more nested minima over weight variables. The
//! terms are written out by hand below, one constructor call per term, in the
//! order of the original estimate ledger. Tags (`alpha/term3`, ...) are
//! 1-based positions in that list.

use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::minplus::{AffineForm, MinPlusExpr, Weight, WeightVector};
use crate::rational::Rational;

use Weight::{Dt, Dtt, Id, TDt, TT, T};

/// Number of flattened leaves per exponent.
pub const ALPHA_LEAVES: usize = 17;
pub const KAPPA_LEAVES: usize = 17;
pub const EPSILON_LEAVES: usize = 42;

/// SHA-256 of [`render_ledger`]; changes whenever any term changes.
pub const LEDGER_PIN: &str = "b9dceb2f7a6c615e2ac833be7963f4af3c201e5187e4fcb6829fafe45202bc02";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Exponent {
    Alpha,
    Kappa,
    Epsilon,
}

impl Exponent {
    pub const ALL: [Exponent; 3] = [Exponent::Alpha, Exponent::Kappa, Exponent::Epsilon];

    pub fn name(self) -> &'static str {
        match self {
            Exponent::Alpha => "alpha",
            Exponent::Kappa => "kappa",
            Exponent::Epsilon => "epsilon",
        }
    }

    /// Top-level terms, in ledger order.
    pub fn terms(self) -> Vec<MinPlusExpr> {
        match self {
            Exponent::Alpha => alpha_terms(),
            Exponent::Kappa => kappa_terms(),
            Exponent::Epsilon => epsilon_terms(),
        }
    }

    pub fn build(self) -> MinPlusExpr {
        MinPlusExpr::min(self.terms())
    }

    pub fn leaf_count(self) -> usize {
        match self {
            Exponent::Alpha => ALPHA_LEAVES,
            Exponent::Kappa => KAPPA_LEAVES,
            Exponent::Epsilon => EPSILON_LEAVES,
        }
    }

    /// Flattened leaves, each tagged with its originating term.
    pub fn leaves(self) -> Vec<LedgerLeaf> {
        let mut out = Vec::new();
        for (t, term) in self.terms().iter().enumerate() {
            let forms = term.flat_leaves();
            let single = forms.len() == 1;
            for (k, form) in forms.into_iter().enumerate() {
                out.push(LedgerLeaf { exponent: self, term: t + 1, leaf: if single { None } else { Some(k + 1) }, form });
            }
        }
        out
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One affine leaf of a flattened exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerLeaf {
    pub exponent: Exponent,
    /// 1-based term position.
    pub term: usize,
    /// 1-based leaf position inside the term; `None` for single-leaf terms.
    pub leaf: Option<usize>,
    pub form: AffineForm,
}

impl LedgerLeaf {
    /// `alpha/term3` or `kappa/term1.4`.
    pub fn tag(&self) -> String {
        match self.leaf {
            None => format!("{}/term{}", self.exponent, self.term),
            Some(k) => format!("{}/term{}.{}", self.exponent, self.term, k),
        }
    }

    /// Tag of the enclosing term, without the leaf suffix.
    pub fn term_tag(&self) -> String {
        format!("{}/term{}", self.exponent, self.term)
    }
}

fn affine(c: i64, terms: &[(Weight, i64)]) -> MinPlusExpr {
    MinPlusExpr::leaf(AffineForm::from_terms(Rational::int(c), terms))
}

fn plus(parts: Vec<MinPlusExpr>) -> MinPlusExpr {
    MinPlusExpr::sum(parts)
}

fn min_of(vars: &[Weight]) -> MinPlusExpr {
    MinPlusExpr::min_vars(vars)
}

pub fn alpha_terms() -> Vec<MinPlusExpr> {
    vec![
        // 2
        affine(2, &[]),
        // 2 - 2c_Tdt + c_id + c_dtt
        affine(2, &[(TDt, -2), (Id, 1), (Dtt, 1)]),
        // 1 - c_id + c_Tdt
        affine(1, &[(Id, -1), (TDt, 1)]),
        // 1 - c_id + c_dt
        affine(1, &[(Id, -1), (Dt, 1)]),
        // 2 - c_TT + min{c_dt, c_id, c_TT}
        plus(vec![affine(2, &[(TT, -1)]), min_of(&[Dt, Id, TT])]),
        // 2 - c_T + c_id
        affine(2, &[(T, -1), (Id, 1)]),
        // 2 - c_TT + min{c_dt, c_id, c_T}
        plus(vec![affine(2, &[(TT, -1)]), min_of(&[Dt, Id, T])]),
        // 2 - 2c_TT + c_T + min{c_dt, c_id, c_TT}
        plus(vec![affine(2, &[(TT, -2), (T, 1)]), min_of(&[Dt, Id, TT])]),
        // 2 - 2c_T + c_id + min{c_dt, c_id, c_T}
        plus(vec![affine(2, &[(T, -2), (Id, 1)]), min_of(&[Dt, Id, T])]),
    ]
}

pub fn kappa_terms() -> Vec<MinPlusExpr> {
    vec![
        // 2 - 2c_TT + min{c_dt, c_id, c_TT} + min{c_dt, c_Tdt}
        plus(vec![affine(2, &[(TT, -2)]), min_of(&[Dt, Id, TT]), min_of(&[Dt, TDt])]),
        // 2 - 2c_T + min{c_dt, c_id, c_T} + min{c_dt, c_Tdt}
        plus(vec![affine(2, &[(T, -2)]), min_of(&[Dt, Id, T]), min_of(&[Dt, TDt])]),
        // 2 - 2c_T + c_id + min{c_dt, c_Tdt}
        plus(vec![affine(2, &[(T, -2), (Id, 1)]), min_of(&[Dt, TDt])]),
        // 2 - 2c_TT + min{c_dt, c_id, c_T}
        plus(vec![affine(2, &[(TT, -2)]), min_of(&[Dt, Id, T])]),
    ]
}

pub fn epsilon_terms() -> Vec<MinPlusExpr> {
    vec![
        // 2 - 2c_Tdt + c_id + min{c_dtt, c_dt, c_Tdt}
        plus(vec![affine(2, &[(TDt, -2), (Id, 1)]), min_of(&[Dtt, Dt, TDt])]),
        // 2 - c_Tdt + c_id
        affine(2, &[(TDt, -1), (Id, 1)]),
        // 2 - c_Tdt + c_dt + min{c_dt - 1, c_Tdt - 1}
        plus(vec![
            affine(2, &[(TDt, -1), (Dt, 1)]),
            MinPlusExpr::min(vec![affine(-1, &[(Dt, 1)]), affine(-1, &[(TDt, 1)])]),
        ]),
        // -2c_TT + c_T + min{c_dt, c_dtt, c_id, c_TT}
        plus(vec![affine(0, &[(TT, -2), (T, 1)]), min_of(&[Dt, Dtt, Id, TT])]),
        // -2c_T + c_id + min{c_dt, c_dtt, c_id, c_T}
        plus(vec![affine(0, &[(T, -2), (Id, 1)]), min_of(&[Dt, Dtt, Id, T])]),
        // -2c_Tdt + c_dt + min{c_dtt, c_dt, c_Tdt}
        plus(vec![affine(0, &[(TDt, -2), (Dt, 1)]), min_of(&[Dtt, Dt, TDt])]),
        // -2c_TT + min{c_dt, c_id, c_TT} + min{c_dt, c_dtt, c_id, c_T}
        plus(vec![affine(0, &[(TT, -2)]), min_of(&[Dt, Id, TT]), min_of(&[Dt, Dtt, Id, T])]),
        // -1 - 2c_T + c_id + min{c_dt, c_Tdt}
        plus(vec![affine(-1, &[(T, -2), (Id, 1)]), min_of(&[Dt, TDt])]),
        // -2 - 2c_T + c_dt + min{c_dt, c_dtt, c_id, c_T}
        plus(vec![affine(-2, &[(T, -2), (Dt, 1)]), min_of(&[Dt, Dtt, Id, T])]),
        // -2 - 2c_TT + c_Tdt + min{c_dt, c_dtt, c_id, c_TT}
        plus(vec![affine(-2, &[(TT, -2), (TDt, 1)]), min_of(&[Dt, Dtt, Id, TT])]),
        // -2 - 2c_Tdt + c_dtt + min{c_dtt, c_dt, c_Tdt}
        plus(vec![affine(-2, &[(TDt, -2), (Dtt, 1)]), min_of(&[Dtt, Dt, TDt])]),
    ]
}

pub fn build_alpha() -> MinPlusExpr {
    Exponent::Alpha.build()
}

pub fn build_kappa() -> MinPlusExpr {
    Exponent::Kappa.build()
}

pub fn build_epsilon() -> MinPlusExpr {
    Exponent::Epsilon.build()
}

/// `(c_id, c_T, c_dt, c_Tdt, c_TT, c_dtt) = (5, 5/3, 20/3, 17/3, 0, 25/3)`.
pub fn reference_weights() -> WeightVector {
    WeightVector::new([
        Rational::int(5),
        Rational::frac(5, 3),
        Rational::frac(20, 3),
        Rational::frac(17, 3),
        Rational::int(0),
        Rational::frac(25, 3),
    ])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExponentTriple {
    pub alpha: Rational,
    pub kappa: Rational,
    pub epsilon: Rational,
}

impl ExponentTriple {
    pub fn get(&self, e: Exponent) -> &Rational {
        match e {
            Exponent::Alpha => &self.alpha,
            Exponent::Kappa => &self.kappa,
            Exponent::Epsilon => &self.epsilon,
        }
    }
}

pub fn evaluate_exponents(w: &WeightVector) -> ExponentTriple {
    ExponentTriple {
        alpha: build_alpha().evaluate(w),
        kappa: build_kappa().evaluate(w),
        epsilon: build_epsilon().evaluate(w),
    }
}

/// The first flattened leaf attaining the minimum of `e` at `w`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Argmin {
    pub tag: String,
    pub form: String,
    pub value: Rational,
}

pub fn argmin_leaf(e: Exponent, w: &WeightVector) -> Argmin {
    let mut best: Option<(Rational, LedgerLeaf)> = None;
    for leaf in e.leaves() {
        let v = leaf.form.evaluate(w);
        if best.as_ref().map_or(true, |(b, _)| v < *b) {
            best = Some((v, leaf));
        }
    }
    let (value, leaf) = best.expect("exponents are nonempty");
    Argmin { tag: leaf.tag(), form: leaf.form.to_string(), value }
}

/// One line per top-level term, `tag: expression`, for all three exponents.
pub fn render_ledger() -> String {
    let mut out = String::new();
    for e in Exponent::ALL {
        for (i, t) in e.terms().iter().enumerate() {
            out.push_str(&format!("{}/term{}: {}\n", e, i + 1, t));
        }
    }
    out
}

pub fn ledger_hash() -> String {
    let digest = Sha256::digest(render_ledger().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::frac(p, q)
    }

    // Independent brute force: every leaf at `w`, minimum by sorting.
    fn brute(e: Exponent, w: &WeightVector) -> Rational {
        let mut vals: Vec<Rational> = e.build().normalize().flat_leaves().iter().map(|f| f.evaluate(w)).collect();
        vals.sort();
        vals[0].clone()
    }

    #[test]
    fn term_and_leaf_counts() {
        assert_eq!(alpha_terms().len(), 9);
        assert_eq!(kappa_terms().len(), 4);
        assert_eq!(epsilon_terms().len(), 11);
        for e in Exponent::ALL {
            assert_eq!(e.build().flat_len(), e.leaf_count(), "{e}");
            assert_eq!(e.leaves().len(), e.leaf_count(), "{e}");
        }
    }

    #[test]
    fn reference_triple() {
        let t = evaluate_exponents(&reference_weights());
        assert_eq!(t, ExponentTriple { alpha: r(5, 3), kappa: r(11, 3), epsilon: r(2, 3) });
    }

    #[test]
    fn reference_weight_entries() {
        let w = reference_weights();
        assert_eq!(*w.c_tt(), Rational::zero());
        assert_eq!(*w.c_dtt(), r(25, 3));
        assert_eq!(*w.c_id(), Rational::int(5));
    }

    #[test]
    fn zero_weights() {
        let z = WeightVector::zero();
        assert_eq!(evaluate_exponents(&z), ExponentTriple { alpha: r(1, 1), kappa: r(2, 1), epsilon: r(-2, 1) });
        for e in Exponent::ALL {
            assert_eq!(e.build().evaluate(&z), brute(e, &z));
        }
    }

    #[test]
    fn alpha_never_exceeds_two() {
        let ws = [WeightVector::zero(), reference_weights(), WeightVector::splat(Rational::int(100))];
        for w in &ws {
            assert!(build_alpha().evaluate(w) <= Rational::int(2));
        }
        assert!(alpha_terms()[0].flat_leaves()[0].is_constant());
    }

    #[test]
    fn all_tens_matches_brute_force() {
        let w = WeightVector::splat(Rational::int(10));
        let t = evaluate_exponents(&w);
        for e in Exponent::ALL {
            assert_eq!(*t.get(e), brute(e, &w));
        }
    }

    #[test]
    fn minimizing_leaves_at_reference_weights() {
        let w = reference_weights();
        let a = argmin_leaf(Exponent::Alpha, &w);
        assert_eq!((a.tag.as_str(), a.form.as_str()), ("alpha/term3", "1 - c_id + c_Tdt"));
        assert_eq!(a.value, r(5, 3));
        let k = argmin_leaf(Exponent::Kappa, &w);
        assert_eq!((k.tag.as_str(), k.form.as_str()), ("kappa/term4.3", "2 + c_T - 2c_TT"));
        assert_eq!(k.value, r(11, 3));
        let e = argmin_leaf(Exponent::Epsilon, &w);
        assert_eq!((e.tag.as_str(), e.form.as_str()), ("epsilon/term11.3", "-2 - c_Tdt + c_dtt"));
        assert_eq!(e.value, r(2, 3));
        // Each argmin is unique.
        for ex in Exponent::ALL {
            let m = argmin_leaf(ex, &w).value;
            let hits = ex.leaves().iter().filter(|l| l.form.evaluate(&w) == m).count();
            assert_eq!(hits, 1, "{ex}");
        }
    }

    #[test]
    fn bumping_c_id_recomputes() {
        let mut w = reference_weights();
        w[Weight::Id] += Rational::one();
        assert_eq!(build_alpha().evaluate(&w), brute(Exponent::Alpha, &w));
        // 1 - 6 + 17/3 = 2/3 now binds.
        assert_eq!(build_alpha().evaluate(&w), r(2, 3));
    }

    #[test]
    fn ledger_rendering_is_pinned() {
        let text = render_ledger();
        println!("{text}");
        assert_eq!(text.lines().count(), 24);
        assert!(text.starts_with("alpha/term1: 2\n"));
        assert_eq!(ledger_hash(), LEDGER_PIN);
    }
}
