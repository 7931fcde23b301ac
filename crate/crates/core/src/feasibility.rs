//! Weight requirements as an affine inequality system, decided exactly by
//! Fourier–Motzkin elimination.
//!
//! Every row is stored in the folded form `Σ a_i x_i + b  (> | ≥)  0`. Each
//! row also records the nonnegative combination of *input* rows it was
//! derived from, so an infeasible run can hand back a replayable certificate:
//! the recorded multipliers applied to the input rows cancel every variable
//! and leave a false constant inequality.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::Exponent;
use crate::minplus::{AffineForm, Weight, WeightVector, NUM_WEIGHTS};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    #[serde(rename = ">")]
    Greater,
    #[serde(rename = ">=")]
    GreaterEq,
}

impl Relation {
    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Greater)
    }

    pub fn holds(self, value: &Rational) -> bool {
        match self {
            Relation::Greater => value.is_positive(),
            Relation::GreaterEq => !value.is_negative(),
        }
    }

    fn combine(self, other: Relation) -> Relation {
        if self.is_strict() || other.is_strict() {
            Relation::Greater
        } else {
            Relation::GreaterEq
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Greater => ">",
            Relation::GreaterEq => ">=",
        })
    }
}

/// `Σ coeffs[i]·x_i + constant  relation  0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Inequality {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
    pub relation: Relation,
}

impl Inequality {
    pub fn new(coeffs: Vec<Rational>, constant: Rational, relation: Relation) -> Self {
        Self { coeffs, constant, relation }
    }

    /// `form(w) relation rhs`, folded to `form(w) - rhs relation 0`.
    pub fn from_affine(form: &AffineForm, relation: Relation, rhs: &Rational) -> Self {
        Self {
            coeffs: form.coeffs.to_vec(),
            constant: &form.constant - rhs,
            relation,
        }
    }

    pub fn value(&self, point: &[Rational]) -> Rational {
        let mut acc = self.constant.clone();
        for (a, x) in self.coeffs.iter().zip(point) {
            if !a.is_zero() {
                acc += a * x;
            }
        }
        acc
    }

    pub fn holds_at(&self, point: &[Rational]) -> bool {
        self.relation.holds(&self.value(point))
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    /// For a constant row: whether `constant relation 0` is false.
    pub fn is_contradiction(&self) -> bool {
        self.is_constant() && !self.relation.holds(&self.constant)
    }

    fn scaled(&self, k: &Rational) -> (Vec<Rational>, Rational) {
        (self.coeffs.iter().map(|a| a * k).collect(), &self.constant * k)
    }
}

/// A row together with its label and derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub tag: String,
    pub ineq: Inequality,
    /// Whether the margin maximization treats this row as analytic (strict
    /// in the plain system; shifted by the margin variable otherwise).
    pub analytic: bool,
    /// Input-row index → nonnegative multiplier.
    pub origin: BTreeMap<usize, Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub vars: Vec<String>,
    pub rows: Vec<Constraint>,
    /// Tags of the input rows the `origin` maps refer to.
    pub source_tags: Vec<String>,
    /// The input rows themselves, for certificate replay.
    pub sources: Vec<Inequality>,
}

impl ConstraintSystem {
    /// A fresh system; each row is its own origin.
    pub fn new(vars: Vec<String>, rows: Vec<(String, Inequality, bool)>) -> Result<Self> {
        let n = vars.len();
        let mut out = Vec::with_capacity(rows.len());
        for (i, (tag, ineq, analytic)) in rows.into_iter().enumerate() {
            if ineq.coeffs.len() > n {
                if let Some(j) = (n..ineq.coeffs.len()).find(|&j| !ineq.coeffs[j].is_zero()) {
                    return Err(Error::UndeclaredVariable { index: i, var: format!("x{j}") });
                }
            }
            let mut ineq = ineq;
            ineq.coeffs.resize(n, Rational::zero());
            out.push(Constraint { tag, ineq, analytic, origin: BTreeMap::from([(i, Rational::one())]) });
        }
        Ok(Self {
            vars,
            source_tags: out.iter().map(|c| c.tag.clone()).collect(),
            sources: out.iter().map(|c| c.ineq.clone()).collect(),
            rows: out,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Whether `var` occurs with a nonzero coefficient anywhere.
    pub fn mentions(&self, var: usize) -> bool {
        self.rows.iter().any(|r| !r.ineq.coeffs[var].is_zero())
    }

    pub fn contradiction(&self) -> Option<&Constraint> {
        self.rows.iter().find(|r| r.ineq.is_contradiction())
    }

    /// Append a row that becomes a new input row.
    pub fn push(&mut self, tag: impl Into<String>, mut ineq: Inequality, analytic: bool) {
        ineq.coeffs.resize(self.vars.len(), Rational::zero());
        let idx = self.sources.len();
        let tag = tag.into();
        self.sources.push(ineq.clone());
        self.source_tags.push(tag.clone());
        self.rows.push(Constraint { tag, ineq, analytic, origin: BTreeMap::from([(idx, Rational::one())]) });
    }
}

/// Thresholds of the requirement system. Defaults: α > 1, κ > 3, ε > 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Requirements {
    pub alpha_min: Rational,
    pub kappa_min: Rational,
    pub epsilon_min: Rational,
    /// Adds the margin variable `m` after the six weights.
    pub margin: bool,
}

impl Default for Requirements {
    fn default() -> Self {
        Self {
            alpha_min: Rational::int(1),
            kappa_min: Rational::int(3),
            epsilon_min: Rational::zero(),
            margin: false,
        }
    }
}

impl Requirements {
    pub fn with_margin() -> Self {
        Self { margin: true, ..Self::default() }
    }

    fn threshold(&self, e: Exponent) -> &Rational {
        match e {
            Exponent::Alpha => &self.alpha_min,
            Exponent::Kappa => &self.kappa_min,
            Exponent::Epsilon => &self.epsilon_min,
        }
    }
}

pub const MARGIN_VAR: &str = "m";

/// One row per flattened leaf of α, κ, ε, then `c_dt - c_Tdt + 1 > 0`, then
/// `c_S ≥ 0` for all six weights.
pub fn compile_requirements(req: &Requirements) -> ConstraintSystem {
    let mut vars: Vec<String> = Weight::ALL.iter().map(|w| w.name().to_string()).collect();
    if req.margin {
        vars.push(MARGIN_VAR.to_string());
    }
    let nvars = vars.len();

    let analytic_row = |form: &AffineForm, rhs: &Rational| -> Inequality {
        let mut ineq = Inequality::from_affine(form, Relation::Greater, rhs);
        ineq.coeffs.resize(nvars, Rational::zero());
        if req.margin {
            ineq.relation = Relation::GreaterEq;
            ineq.coeffs[NUM_WEIGHTS] = Rational::int(-1);
        }
        ineq
    };

    let mut rows = Vec::new();
    for e in Exponent::ALL {
        for leaf in e.leaves() {
            rows.push((leaf.tag(), analytic_row(&leaf.form, req.threshold(e)), true));
        }
    }
    let time_order = AffineForm::from_terms(Rational::int(1), &[(Weight::Dt, 1), (Weight::TDt, -1)]);
    rows.push(("time-order".to_string(), analytic_row(&time_order, &Rational::zero()), true));
    for w in Weight::ALL {
        let ineq = Inequality::from_affine(&AffineForm::var(w), Relation::GreaterEq, &Rational::zero());
        rows.push((format!("nonneg/{}", w.name()), ineq, false));
    }
    ConstraintSystem::new(vars, rows).expect("compiled rows only use declared variables")
}

/// Point in the weight space, widened with `m` when the system carries it.
pub fn weights_point(sys: &ConstraintSystem, w: &WeightVector, margin: Option<&Rational>) -> Vec<Rational> {
    let mut p: Vec<Rational> = w.0.to_vec();
    p.resize(sys.vars.len(), Rational::zero());
    if let (Some(m), Some(i)) = (margin, sys.var_index(MARGIN_VAR)) {
        p[i] = m.clone();
    }
    p
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowCheck {
    pub tag: String,
    pub margin: Rational,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointCheck {
    pub feasible: bool,
    pub rows: Vec<RowCheck>,
    /// Smallest row value over the analytic rows (`None` if there are none).
    pub min_analytic_margin: Option<Rational>,
}

impl PointCheck {
    pub fn failing(&self) -> impl Iterator<Item = &RowCheck> {
        self.rows.iter().filter(|r| !r.holds)
    }
}

pub fn check_point(sys: &ConstraintSystem, point: &[Rational]) -> PointCheck {
    let mut rows = Vec::with_capacity(sys.rows.len());
    let mut min_analytic: Option<Rational> = None;
    for c in &sys.rows {
        let v = c.ineq.value(point);
        if c.analytic {
            min_analytic = Some(match min_analytic {
                Some(m) => m.min(v.clone()),
                None => v.clone(),
            });
        }
        rows.push(RowCheck { tag: c.tag.clone(), holds: c.ineq.relation.holds(&v), margin: v });
    }
    PointCheck { feasible: rows.iter().all(|r| r.holds), rows, min_analytic_margin: min_analytic }
}

// -- elimination -------------------------------------------------------------

/// Positive scale factor making the first nonzero coefficient ±1 (or the
/// constant ±1 for constant rows). Parallel rows then share a key.
fn normalizer(coeffs: &[Rational], constant: &Rational) -> Rational {
    coeffs
        .iter()
        .find(|a| !a.is_zero())
        .or(if constant.is_zero() { None } else { Some(constant) })
        .map(|a| a.abs().recip())
        .unwrap_or_else(Rational::one)
}

/// True if `a` implies `b`, for rows with identical coefficient vectors.
fn tighter(a: &Inequality, b: &Inequality) -> bool {
    a.constant < b.constant || (a.constant == b.constant && (a.relation.is_strict() || !b.relation.is_strict()))
}

/// Keeps, for every coefficient direction, only the tightest row. Constant
/// rows share the zero direction, so at most one survives and it is the most
/// violated one.
pub fn prune_parallel(rows: Vec<Constraint>) -> Vec<Constraint> {
    let mut slot: HashMap<Vec<Rational>, usize> = HashMap::new();
    let mut out: Vec<Constraint> = Vec::new();
    for r in rows {
        match slot.get(&r.ineq.coeffs) {
            Some(&i) => {
                if tighter(&r.ineq, &out[i].ineq) && r.ineq != out[i].ineq {
                    out[i] = r;
                }
            }
            None => {
                slot.insert(r.ineq.coeffs.clone(), out.len());
                out.push(r);
            }
        }
    }
    out
}

fn combine_origins(
    a: &BTreeMap<usize, Rational>,
    ka: &Rational,
    b: &BTreeMap<usize, Rational>,
    kb: &Rational,
) -> BTreeMap<usize, Rational> {
    let mut out: BTreeMap<usize, Rational> = a.iter().map(|(&i, m)| (i, m * ka)).collect();
    for (&i, m) in b {
        *out.entry(i).or_insert_with(Rational::zero) += m * kb;
    }
    out
}

fn normalized(coeffs: Vec<Rational>, constant: Rational, relation: Relation, origin: BTreeMap<usize, Rational>, tag: String, analytic: bool) -> Constraint {
    let k = normalizer(&coeffs, &constant);
    let coeffs: Vec<Rational> = coeffs.iter().map(|a| a * &k).collect();
    let constant = &constant * &k;
    let origin = origin.into_iter().map(|(i, m)| (i, m * &k)).collect();
    Constraint { tag, ineq: Inequality { coeffs, constant, relation }, analytic, origin }
}

/// Project out `var`: rows not mentioning it pass through; every pair of a
/// lower and an upper bound on it yields one combined row. A point satisfies
/// the result iff it extends to a point satisfying `sys`.
pub fn fourier_motzkin_eliminate(sys: &ConstraintSystem, var: usize) -> ConstraintSystem {
    assert!(var < sys.vars.len(), "variable index out of range");
    let mut keep = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for r in &sys.rows {
        let a = &r.ineq.coeffs[var];
        if a.is_zero() {
            keep.push(r.clone());
        } else if a.is_positive() {
            lower.push(r);
        } else {
            upper.push(r);
        }
    }
    for lo in &lower {
        for up in &upper {
            // lo: a x + p ≥ 0 with a > 0; up: -b x + q ≥ 0 with b > 0.
            let ka = up.ineq.coeffs[var].abs();
            let kb = lo.ineq.coeffs[var].clone();
            let (c1, k1) = lo.ineq.scaled(&ka);
            let (c2, k2) = up.ineq.scaled(&kb);
            let mut coeffs: Vec<Rational> = c1.into_iter().zip(c2).map(|(x, y)| x + y).collect();
            coeffs[var] = Rational::zero();
            let origin = combine_origins(&lo.origin, &ka, &up.origin, &kb);
            keep.push(normalized(
                coeffs,
                k1 + k2,
                lo.ineq.relation.combine(up.ineq.relation),
                origin,
                format!("fm({}|{})", lo.tag, up.tag),
                lo.analytic || up.analytic,
            ));
        }
    }
    ConstraintSystem {
        vars: sys.vars.clone(),
        rows: prune_parallel(keep),
        source_tags: sys.source_tags.clone(),
        sources: sys.sources.clone(),
    }
}

// -- certificates and witnesses ---------------------------------------------

/// Nonnegative combination of input rows that sums to a false constant
/// inequality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    /// `(input row index, tag, multiplier)`.
    pub combination: Vec<(usize, String, Rational)>,
    /// The derived constant and relation: `constant relation 0` is false.
    pub constant: Rational,
    pub relation: Relation,
}

impl Certificate {
    fn from_row(sys: &ConstraintSystem, row: &Constraint) -> Self {
        Self {
            combination: row
                .origin
                .iter()
                .filter(|(_, m)| !m.is_zero())
                .map(|(&i, m)| (i, sys.source_tags[i].clone(), m.clone()))
                .collect(),
            constant: row.ineq.constant.clone(),
            relation: row.ineq.relation,
        }
    }

    /// Multiply out the recorded combination over `sources`. Returns the
    /// resulting row; a valid certificate yields a contradiction.
    pub fn replay(&self, sources: &[Inequality]) -> Inequality {
        let n = sources.first().map_or(0, |s| s.coeffs.len());
        let mut coeffs = vec![Rational::zero(); n];
        let mut constant = Rational::zero();
        let mut relation = Relation::GreaterEq;
        for (i, _, m) in &self.combination {
            let s = &sources[*i];
            for (c, a) in coeffs.iter_mut().zip(&s.coeffs) {
                *c += m * a;
            }
            constant += m * &s.constant;
            if m.is_positive() && s.relation.is_strict() {
                relation = Relation::Greater;
            }
        }
        Inequality { coeffs, constant, relation }
    }

    /// Replays and checks: all multipliers nonnegative, all coefficients
    /// cancel, constant inequality false.
    pub fn verify(&self, sources: &[Inequality]) -> bool {
        if self.combination.iter().any(|(_, _, m)| m.is_negative()) {
            return false;
        }
        let row = self.replay(sources);
        row.is_contradiction()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityResult {
    Witness(Vec<Rational>),
    Certificate(Certificate),
}

impl FeasibilityResult {
    pub fn witness(&self) -> Option<&[Rational]> {
        match self {
            FeasibilityResult::Witness(w) => Some(w),
            FeasibilityResult::Certificate(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.witness().is_some()
    }
}

/// Residual interval for one variable after substituting already-fixed ones.
#[derive(Default)]
struct Bounds {
    lower: Option<(Rational, bool)>,
    upper: Option<(Rational, bool)>,
}

impl Bounds {
    fn tighten_lower(&mut self, v: Rational, strict: bool) {
        let replace = match &self.lower {
            None => true,
            Some((cur, cs)) => v > *cur || (v == *cur && strict && !cs),
        };
        if replace {
            self.lower = Some((v, strict));
        }
    }

    fn tighten_upper(&mut self, v: Rational, strict: bool) {
        let replace = match &self.upper {
            None => true,
            Some((cur, cs)) => v < *cur || (v == *cur && strict && !cs),
        };
        if replace {
            self.upper = Some((v, strict));
        }
    }

    /// Midpoint of a two-sided interval, one step inside a one-sided one,
    /// zero when unconstrained.
    fn pick(&self) -> Rational {
        match (&self.lower, &self.upper) {
            (Some((lo, _)), Some((hi, _))) => (lo + hi) / Rational::int(2),
            (Some((lo, _)), None) => lo + Rational::one(),
            (None, Some((hi, _))) => hi - Rational::one(),
            (None, None) => Rational::zero(),
        }
    }
}

fn bounds_for(sys: &ConstraintSystem, var: usize, point: &[Rational]) -> Bounds {
    let mut b = Bounds::default();
    for r in &sys.rows {
        let a = &r.ineq.coeffs[var];
        if a.is_zero() {
            continue;
        }
        // a x + rest (rel) 0, with x itself zero in `point`.
        let mut rest = r.ineq.constant.clone();
        for (j, (c, x)) in r.ineq.coeffs.iter().zip(point).enumerate() {
            if j != var && !c.is_zero() {
                rest += c * x;
            }
        }
        let bound = -rest / a;
        let strict = r.ineq.relation.is_strict();
        if a.is_positive() {
            b.tighten_lower(bound, strict);
        } else {
            b.tighten_upper(bound, strict);
        }
    }
    b
}

/// Stages of an elimination run: `stages[k]` is the system after the first
/// `k` variables of `order` are gone.
struct Elimination {
    order: Vec<usize>,
    stages: Vec<ConstraintSystem>,
}

fn eliminate_in_order(sys: &ConstraintSystem, order: &[usize]) -> std::result::Result<Elimination, Certificate> {
    if let Some(bad) = sys.contradiction() {
        return Err(Certificate::from_row(sys, bad));
    }
    let mut stages = vec![sys.clone()];
    for &v in order {
        let next = fourier_motzkin_eliminate(stages.last().expect("nonempty"), v);
        if let Some(bad) = next.contradiction() {
            return Err(Certificate::from_row(&next, bad));
        }
        stages.push(next);
    }
    Ok(Elimination { order: order.to_vec(), stages })
}

impl Elimination {
    /// Back-substitute from the last eliminated variable to the first.
    /// `fixed` holds values for variables that were never eliminated.
    fn back_substitute(&self, mut point: Vec<Rational>) -> Vec<Rational> {
        for (k, &v) in self.order.iter().enumerate().rev() {
            point[v] = Rational::zero();
            let b = bounds_for(&self.stages[k], v, &point);
            point[v] = b.pick();
        }
        point
    }
}

/// Decide feasibility. Variables are eliminated in reverse declaration
/// order; the witness is rebuilt by back-substitution (midpoints of the
/// residual intervals) and re-checked before it is returned.
pub fn find_feasible_point(sys: &ConstraintSystem) -> Result<FeasibilityResult> {
    let order: Vec<usize> = (0..sys.vars.len()).rev().collect();
    match eliminate_in_order(sys, &order) {
        Err(cert) => {
            if !cert.verify(&sys.sources) {
                return Err(Error::Internal("certificate does not replay to a contradiction".into()));
            }
            Ok(FeasibilityResult::Certificate(cert))
        }
        Ok(elim) => {
            let point = elim.back_substitute(vec![Rational::zero(); sys.vars.len()]);
            let check = check_point(sys, &point);
            if !check.feasible {
                let bad: Vec<String> = check.failing().map(|r| r.tag.clone()).collect();
                return Err(Error::Internal(format!("witness fails rows {bad:?}")));
            }
            Ok(FeasibilityResult::Witness(point))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MarginResult {
    /// `point` covers every declared variable, `m` included.
    Optimal { margin: Rational, point: Vec<Rational> },
    Unbounded,
    Infeasible { certificate: Certificate },
}

/// Largest `m` such that every analytic row exceeds its threshold by at
/// least `m` while the weights stay nonnegative. Expects a system compiled
/// with [`Requirements::with_margin`] (or any system whose last variable is
/// `m`).
pub fn maximize_margin(sys: &ConstraintSystem) -> Result<MarginResult> {
    let m = sys
        .var_index(MARGIN_VAR)
        .ok_or_else(|| Error::InvalidParameter("system has no margin variable".into()))?;
    let order: Vec<usize> = (0..sys.vars.len()).rev().filter(|&v| v != m).collect();
    let elim = match eliminate_in_order(sys, &order) {
        Ok(e) => e,
        Err(cert) => return Ok(MarginResult::Infeasible { certificate: cert }),
    };
    let last = elim.stages.last().expect("nonempty");
    let b = bounds_for(last, m, &vec![Rational::zero(); sys.vars.len()]);
    let Some((best, strict)) = b.upper.clone() else {
        return Ok(MarginResult::Unbounded);
    };
    if strict {
        return Err(Error::Internal("margin bound is strict; supremum not attained".into()));
    }
    let mut point = vec![Rational::zero(); sys.vars.len()];
    point[m] = best.clone();
    let point = elim.back_substitute(point);
    let check = check_point(sys, &point);
    if !check.feasible {
        let bad: Vec<String> = check.failing().map(|r| r.tag.clone()).collect();
        return Err(Error::Internal(format!("margin witness fails rows {bad:?}")));
    }
    Ok(MarginResult::Optimal { margin: best, point })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{evaluate_exponents, reference_weights};

    fn r(p: i64, q: i64) -> Rational {
        Rational::frac(p, q)
    }

    fn row(coeffs: &[i64], c: i64, rel: Relation) -> Inequality {
        Inequality::new(coeffs.iter().map(|&a| Rational::int(a)).collect(), Rational::int(c), rel)
    }

    fn one_var(rows: Vec<Inequality>) -> ConstraintSystem {
        ConstraintSystem::new(
            vec!["x".into()],
            rows.into_iter().enumerate().map(|(i, q)| (format!("r{i}"), q, true)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn compiled_row_counts() {
        let sys = compile_requirements(&Requirements::default());
        assert_eq!(sys.len(), 17 + 17 + 42 + 1 + 6);
        assert_eq!(sys.rows.iter().filter(|r| r.analytic).count(), 77);
        assert_eq!(sys.vars.len(), 6);
        let with_m = compile_requirements(&Requirements::with_margin());
        assert_eq!(with_m.len(), sys.len());
        assert_eq!(with_m.vars.last().map(String::as_str), Some("m"));
        assert!(with_m.rows.iter().filter(|r| !r.analytic).all(|r| r.ineq.coeffs[6].is_zero()));
    }

    #[test]
    fn two_leaf_min_gives_two_rows() {
        // ε's third term is a two-leaf minimum.
        let sys = compile_requirements(&Requirements::default());
        let n = sys.rows.iter().filter(|r| r.tag.starts_with("epsilon/term3.")).count();
        assert_eq!(n, 2);
    }

    #[test]
    fn reference_point_passes_with_margin_two_thirds() {
        let sys = compile_requirements(&Requirements::default());
        let p = weights_point(&sys, &reference_weights(), None);
        let chk = check_point(&sys, &p);
        assert!(chk.feasible);
        assert_eq!(chk.min_analytic_margin, Some(r(2, 3)));
        let binding: Vec<&str> = chk
            .rows
            .iter()
            .filter(|c| c.margin == r(2, 3))
            .map(|c| c.tag.as_str())
            .collect();
        assert_eq!(binding, vec!["alpha/term3", "kappa/term4.3", "epsilon/term11.3"]);
    }

    #[test]
    fn zero_point_fails_alpha_term3() {
        let sys = compile_requirements(&Requirements::default());
        let chk = check_point(&sys, &weights_point(&sys, &WeightVector::zero(), None));
        assert!(!chk.feasible);
        let a3 = chk.rows.iter().find(|c| c.tag == "alpha/term3").unwrap();
        assert!(!a3.holds);
        assert_eq!(a3.margin, Rational::zero());
        assert_eq!(evaluate_exponents(&WeightVector::zero()).alpha, Rational::int(1));
    }

    #[test]
    fn shifted_reference_point_matches_per_leaf_oracle() {
        let sys = compile_requirements(&Requirements::default());
        let mut w = reference_weights();
        for x in w.0.iter_mut() {
            *x += Rational::one();
        }
        let chk = check_point(&sys, &weights_point(&sys, &w, None));
        // Oracle: evaluate each exponent's leaves directly.
        let t = evaluate_exponents(&w);
        let expect = t.alpha > Rational::int(1)
            && t.kappa > Rational::int(3)
            && t.epsilon.is_positive()
            && (w.c_dt() - w.c_tdt() + Rational::one()).is_positive();
        assert_eq!(chk.feasible, expect);
    }

    #[test]
    fn eliminate_interval_nonempty() {
        // x > 1, -x + 3 >= 0  →  2 > 0
        let sys = one_var(vec![row(&[1], -1, Relation::Greater), row(&[-1], 3, Relation::GreaterEq)]);
        let p = fourier_motzkin_eliminate(&sys, 0);
        assert!(!p.mentions(0));
        assert_eq!(p.len(), 1);
        assert!(p.rows[0].ineq.is_constant());
        assert!(!p.rows[0].ineq.is_contradiction());
        assert!(p.rows[0].ineq.relation.is_strict());
        let res = find_feasible_point(&sys).unwrap();
        let x = &res.witness().unwrap()[0];
        assert_eq!(*x, r(2, 1));
    }

    #[test]
    fn eliminate_interval_empty() {
        // x > 1, -x + 1 > 0  →  0 > 0
        let sys = one_var(vec![row(&[1], -1, Relation::Greater), row(&[-1], 1, Relation::Greater)]);
        let p = fourier_motzkin_eliminate(&sys, 0);
        let bad = p.contradiction().expect("false constant row");
        assert!(bad.ineq.constant.is_zero());
        match find_feasible_point(&sys).unwrap() {
            FeasibilityResult::Certificate(c) => {
                assert!(c.verify(&sys.sources));
                assert_eq!(c.combination.len(), 2);
            }
            other => panic!("expected certificate, got {other:?}"),
        }
    }

    #[test]
    fn closed_point_interval() {
        // x >= 2, -x + 2 >= 0 → x = 2
        let sys = one_var(vec![row(&[1], -2, Relation::GreaterEq), row(&[-1], 2, Relation::GreaterEq)]);
        assert_eq!(find_feasible_point(&sys).unwrap().witness().unwrap()[0], Rational::int(2));
    }

    #[test]
    fn one_sided_intervals_step_inside() {
        let sys = one_var(vec![row(&[-1], 5, Relation::Greater)]);
        assert_eq!(find_feasible_point(&sys).unwrap().witness().unwrap()[0], Rational::int(4));
        let sys = one_var(vec![row(&[1], -5, Relation::Greater)]);
        assert_eq!(find_feasible_point(&sys).unwrap().witness().unwrap()[0], Rational::int(6));
    }

    #[test]
    fn requirement_system_is_feasible() {
        let sys = compile_requirements(&Requirements::default());
        let res = find_feasible_point(&sys).unwrap();
        let w = res.witness().expect("feasible");
        assert!(check_point(&sys, w).feasible);
    }

    #[test]
    fn crafted_contradiction_names_both_rows() {
        let mut sys = compile_requirements(&Requirements::default());
        let t = Weight::T.index();
        let mut neg = vec![Rational::zero(); 6];
        neg[t] = Rational::int(-1);
        sys.push("extra/neg_c_T", Inequality::new(neg, Rational::zero(), Relation::Greater), false);
        match find_feasible_point(&sys).unwrap() {
            FeasibilityResult::Certificate(c) => {
                assert!(c.verify(&sys.sources));
                let tags: Vec<&str> = c.combination.iter().map(|(_, t, _)| t.as_str()).collect();
                assert!(tags.contains(&"extra/neg_c_T"), "{tags:?}");
            }
            other => panic!("expected certificate, got {other:?}"),
        }
        // On its own the crafted pair is the whole certificate.
        let mut pair = ConstraintSystem::new(sys.vars.clone(), vec![]).unwrap();
        let mut pos = vec![Rational::zero(); 6];
        pos[t] = Rational::one();
        pair.push("nonneg/c_T", Inequality::new(pos, Rational::zero(), Relation::GreaterEq), false);
        pair.push("extra/neg_c_T", sys.sources.last().unwrap().clone(), false);
        match find_feasible_point(&pair).unwrap() {
            FeasibilityResult::Certificate(c) => {
                assert!(c.verify(&pair.sources));
                let tags: Vec<&str> = c.combination.iter().map(|(_, t, _)| t.as_str()).collect();
                assert_eq!(tags, vec!["nonneg/c_T", "extra/neg_c_T"]);
            }
            other => panic!("expected certificate, got {other:?}"),
        }
    }

    #[test]
    fn single_constraint_margin() {
        // c_id - 1 >= m, 2 - c_id >= 0  →  m* = 1
        let vars = vec!["c_id".to_string(), "m".to_string()];
        let sys = ConstraintSystem::new(
            vars,
            vec![
                ("a".into(), row(&[1, -1], -1, Relation::GreaterEq), true),
                ("b".into(), row(&[-1, 0], 2, Relation::GreaterEq), false),
            ],
        )
        .unwrap();
        match maximize_margin(&sys).unwrap() {
            MarginResult::Optimal { margin, point } => {
                assert_eq!(margin, Rational::int(1));
                assert_eq!(point, vec![Rational::int(2), Rational::int(1)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn margin_is_at_least_reference_and_at_most_one() {
        let sys = compile_requirements(&Requirements::with_margin());
        match maximize_margin(&sys).unwrap() {
            MarginResult::Optimal { margin, point } => {
                assert!(margin >= r(2, 3));
                assert!(margin <= Rational::one());
                let plain = compile_requirements(&Requirements::default());
                let chk = check_point(&plain, &point[..6]);
                assert_eq!(chk.min_analytic_margin, Some(margin));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn undeclared_variable_rejected() {
        let err = ConstraintSystem::new(vec!["x".into()], vec![("a".into(), row(&[0, 1], 0, Relation::Greater), true)]);
        assert!(matches!(err, Err(Error::UndeclaredVariable { index: 0, .. })));
    }
}
