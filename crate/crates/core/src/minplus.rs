//! Affine forms over the six energy weights and min-plus expressions built
//! from them.
//!
//! An expression is a tree of finite sums and finite minima whose leaves are
//! affine forms. Because `+` distributes over `min`, every such tree equals a
//! single flat minimum of affine forms; [`MinPlusExpr::normalize`] computes
//! that flat form without pruning anything.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// The six weight variables, in their fixed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weight {
    Id,
    T,
    Dt,
    TDt,
    TT,
    Dtt,
}

impl Weight {
    pub const ALL: [Weight; 6] = [Weight::Id, Weight::T, Weight::Dt, Weight::TDt, Weight::TT, Weight::Dtt];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Serialized name.
    pub fn name(self) -> &'static str {
        match self {
            Weight::Id => "c_id",
            Weight::T => "c_T",
            Weight::Dt => "c_dt",
            Weight::TDt => "c_Tdt",
            Weight::TT => "c_TT",
            Weight::Dtt => "c_dtt",
        }
    }
}

pub const NUM_WEIGHTS: usize = 6;

/// Values for the six weights `c_S`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "NamedWeights", into = "NamedWeights")]
pub struct WeightVector(pub [Rational; NUM_WEIGHTS]);

impl WeightVector {
    pub fn new(values: [Rational; NUM_WEIGHTS]) -> Self {
        Self(values)
    }

    pub fn zero() -> Self {
        Self(std::array::from_fn(|_| Rational::zero()))
    }

    pub fn splat(v: Rational) -> Self {
        Self(std::array::from_fn(|_| v.clone()))
    }

    pub fn get(&self, w: Weight) -> &Rational {
        &self.0[w.index()]
    }

    pub fn c_id(&self) -> &Rational {
        self.get(Weight::Id)
    }
    pub fn c_t(&self) -> &Rational {
        self.get(Weight::T)
    }
    pub fn c_dt(&self) -> &Rational {
        self.get(Weight::Dt)
    }
    pub fn c_tdt(&self) -> &Rational {
        self.get(Weight::TDt)
    }
    pub fn c_tt(&self) -> &Rational {
        self.get(Weight::TT)
    }
    pub fn c_dtt(&self) -> &Rational {
        self.get(Weight::Dtt)
    }

    /// Parse six whitespace- or comma-separated rationals in the fixed order.
    pub fn parse_list<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        let parts: Vec<&str> = items
            .iter()
            .flat_map(|s| s.as_ref().split(|c: char| c == ',' || c.is_whitespace()))
            .filter(|s| !s.is_empty())
            .collect();
        if parts.len() != NUM_WEIGHTS {
            return Err(Error::Parse(format!("expected {NUM_WEIGHTS} weights, got {}", parts.len())));
        }
        let mut out = Self::zero();
        for (slot, p) in out.0.iter_mut().zip(parts) {
            *slot = p.parse()?;
        }
        Ok(out)
    }
}

impl Index<Weight> for WeightVector {
    type Output = Rational;
    fn index(&self, w: Weight) -> &Rational {
        &self.0[w.index()]
    }
}

impl IndexMut<Weight> for WeightVector {
    fn index_mut(&mut self, w: Weight) -> &mut Rational {
        &mut self.0[w.index()]
    }
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct NamedWeights {
    c_id: Rational,
    c_T: Rational,
    c_dt: Rational,
    c_Tdt: Rational,
    c_TT: Rational,
    c_dtt: Rational,
}

impl From<NamedWeights> for WeightVector {
    fn from(n: NamedWeights) -> Self {
        Self([n.c_id, n.c_T, n.c_dt, n.c_Tdt, n.c_TT, n.c_dtt])
    }
}

impl From<WeightVector> for NamedWeights {
    #[allow(non_snake_case)]
    fn from(w: WeightVector) -> Self {
        let [c_id, c_T, c_dt, c_Tdt, c_TT, c_dtt] = w.0;
        Self { c_id, c_T, c_dt, c_Tdt, c_TT, c_dtt }
    }
}

/// `constant + Σ coeffs[i] · c_i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineForm {
    pub constant: Rational,
    pub coeffs: [Rational; NUM_WEIGHTS],
}

impl AffineForm {
    pub fn constant(c: Rational) -> Self {
        Self { constant: c, coeffs: std::array::from_fn(|_| Rational::zero()) }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    /// The bare variable `c_S`.
    pub fn var(w: Weight) -> Self {
        let mut f = Self::zero();
        f.coeffs[w.index()] = Rational::one();
        f
    }

    /// Build from a constant and `(weight, coefficient)` pairs; repeated
    /// weights accumulate.
    pub fn from_terms(constant: Rational, terms: &[(Weight, i64)]) -> Self {
        let mut f = Self::constant(constant);
        for &(w, c) in terms {
            f.coeffs[w.index()] += Rational::int(c);
        }
        f
    }

    pub fn coeff(&self, w: Weight) -> &Rational {
        &self.coeffs[w.index()]
    }

    pub fn evaluate(&self, w: &WeightVector) -> Rational {
        let mut acc = self.constant.clone();
        for (c, x) in self.coeffs.iter().zip(w.0.iter()) {
            if !c.is_zero() {
                acc += c * x;
            }
        }
        acc
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self {
            constant: &self.constant * k,
            coeffs: std::array::from_fn(|i| &self.coeffs[i] * k),
        }
    }

    pub fn shift(&self, k: &Rational) -> Self {
        Self { constant: &self.constant + k, coeffs: self.coeffs.clone() }
    }
}

impl Add<&AffineForm> for &AffineForm {
    type Output = AffineForm;
    fn add(self, rhs: &AffineForm) -> AffineForm {
        AffineForm {
            constant: &self.constant + &rhs.constant,
            coeffs: std::array::from_fn(|i| &self.coeffs[i] + &rhs.coeffs[i]),
        }
    }
}

impl Sub<&AffineForm> for &AffineForm {
    type Output = AffineForm;
    fn sub(self, rhs: &AffineForm) -> AffineForm {
        AffineForm {
            constant: &self.constant - &rhs.constant,
            coeffs: std::array::from_fn(|i| &self.coeffs[i] - &rhs.coeffs[i]),
        }
    }
}

impl Neg for &AffineForm {
    type Output = AffineForm;
    fn neg(self) -> AffineForm {
        self.scale(&Rational::int(-1))
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, first: &mut bool, coeff: &Rational, name: &str) -> fmt::Result {
    let neg = coeff.is_negative();
    let mag = coeff.abs();
    if *first {
        if neg {
            write!(f, "-")?;
        }
    } else {
        write!(f, " {} ", if neg { '-' } else { '+' })?;
    }
    *first = false;
    if name.is_empty() {
        write!(f, "{mag}")
    } else if mag == Rational::one() {
        write!(f, "{name}")
    } else if mag.is_integer() {
        write!(f, "{mag}{name}")
    } else {
        write!(f, "({mag}){name}")
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.constant.is_zero() {
            write_term(f, &mut first, &self.constant, "")?;
        }
        for w in Weight::ALL {
            let c = self.coeff(w);
            if !c.is_zero() {
                write_term(f, &mut first, c, w.name())?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Node {
    Leaf(AffineForm),
    Sum(Vec<MinPlusExpr>),
    Min(Vec<MinPlusExpr>),
}

/// Expression tree of sums and minima over affine forms. Never empty.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MinPlusExpr(Node);

/// Read-only view of one node, for code that walks the tree.
pub enum ExprView<'a> {
    Leaf(&'a AffineForm),
    Sum(&'a [MinPlusExpr]),
    Min(&'a [MinPlusExpr]),
}

impl MinPlusExpr {
    pub fn leaf(form: AffineForm) -> Self {
        Self(Node::Leaf(form))
    }

    pub fn constant(c: Rational) -> Self {
        Self::leaf(AffineForm::constant(c))
    }

    pub fn var(w: Weight) -> Self {
        Self::leaf(AffineForm::var(w))
    }

    pub fn try_sum(parts: Vec<MinPlusExpr>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyExpression("sum"));
        }
        Ok(Self(Node::Sum(parts)))
    }

    pub fn try_min(parts: Vec<MinPlusExpr>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyExpression("min"));
        }
        Ok(Self(Node::Min(parts)))
    }

    /// Sum node. Panics on an empty list; use [`Self::try_sum`] for
    /// untrusted input.
    pub fn sum(parts: Vec<MinPlusExpr>) -> Self {
        Self::try_sum(parts).expect("sum of zero subexpressions")
    }

    /// Min node. Panics on an empty list; use [`Self::try_min`] for
    /// untrusted input.
    pub fn min(parts: Vec<MinPlusExpr>) -> Self {
        Self::try_min(parts).expect("min of zero subexpressions")
    }

    /// Minimum over bare weight variables, e.g. `min{c_dt, c_id, c_TT}`.
    pub fn min_vars(vars: &[Weight]) -> Self {
        Self::min(vars.iter().map(|&w| Self::var(w)).collect())
    }

    pub fn view(&self) -> ExprView<'_> {
        match &self.0 {
            Node::Leaf(f) => ExprView::Leaf(f),
            Node::Sum(p) => ExprView::Sum(p),
            Node::Min(p) => ExprView::Min(p),
        }
    }

    /// Exact value at `w`, computed on the tree as written.
    pub fn evaluate(&self, w: &WeightVector) -> Rational {
        match &self.0 {
            Node::Leaf(f) => f.evaluate(w),
            Node::Sum(parts) => parts.iter().map(|p| p.evaluate(w)).sum(),
            Node::Min(parts) => parts
                .iter()
                .map(|p| p.evaluate(w))
                .reduce(Rational::min)
                .expect("nonempty"),
        }
    }

    /// Leaves of the flat normal form, in deterministic order: minima
    /// concatenate, sums take the cartesian product left to right.
    pub fn flat_leaves(&self) -> Vec<AffineForm> {
        match &self.0 {
            Node::Leaf(f) => vec![f.clone()],
            Node::Min(parts) => parts.iter().flat_map(|p| p.flat_leaves()).collect(),
            Node::Sum(parts) => {
                let mut acc = vec![AffineForm::zero()];
                for p in parts {
                    let rhs = p.flat_leaves();
                    acc = acc
                        .iter()
                        .flat_map(|a| rhs.iter().map(move |b| a + b))
                        .collect();
                }
                acc
            }
        }
    }

    /// Flat minimum of affine forms, pointwise equal to `self`.
    pub fn normalize(&self) -> MinPlusExpr {
        Self(Node::Min(self.flat_leaves().into_iter().map(Self::leaf).collect()))
    }

    /// True for a single MIN node whose children are all leaves.
    pub fn is_flat(&self) -> bool {
        match &self.0 {
            Node::Min(parts) => parts.iter().all(|p| matches!(p.0, Node::Leaf(_))),
            _ => false,
        }
    }

    /// Number of leaves in the normal form, without building it.
    pub fn flat_len(&self) -> usize {
        match &self.0 {
            Node::Leaf(_) => 1,
            Node::Min(parts) => parts.iter().map(|p| p.flat_len()).sum(),
            Node::Sum(parts) => parts.iter().map(|p| p.flat_len()).product(),
        }
    }
}

/// Drop leaves that are syntactically dominated: same coefficient vector as
/// an earlier-kept leaf with a constant no smaller. Preserves the minimum
/// pointwise. First occurrence order is kept.
pub fn prune_dominated(leaves: &[AffineForm]) -> Vec<AffineForm> {
    let mut best: std::collections::HashMap<&[Rational; NUM_WEIGHTS], usize> = Default::default();
    let mut out: Vec<AffineForm> = Vec::new();
    for f in leaves {
        match best.get(&f.coeffs) {
            Some(&i) => {
                if f.constant < out[i].constant {
                    out[i].constant = f.constant.clone();
                }
            }
            None => {
                best.insert(&f.coeffs, out.len());
                out.push(f.clone());
            }
        }
    }
    out
}

impl Add for MinPlusExpr {
    type Output = MinPlusExpr;
    fn add(self, rhs: MinPlusExpr) -> MinPlusExpr {
        let mut parts = match self.0 {
            Node::Sum(p) => p,
            other => vec![MinPlusExpr(other)],
        };
        match rhs.0 {
            Node::Sum(p) => parts.extend(p),
            other => parts.push(MinPlusExpr(other)),
        }
        MinPlusExpr(Node::Sum(parts))
    }
}

impl From<AffineForm> for MinPlusExpr {
    fn from(f: AffineForm) -> Self {
        Self::leaf(f)
    }
}

impl fmt::Display for MinPlusExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Node::Leaf(a) => write!(f, "{a}"),
            Node::Sum(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            Node::Min(parts) => {
                write!(f, "min{{")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

impl fmt::Debug for MinPlusExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
