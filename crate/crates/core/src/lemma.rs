//! Constants, smallness conditions and an adversarial stress test for the
//! exponential decay lemma
//!
//! ```text
//! f(t) + λ∫_τ^t f ≤ C(1 + λ^α(t−τ)) f(τ)
//!                  + C(λ² + λ^β(t−τ) + λ^κ(t−τ)²) ∫_τ^t f + h(t)·O(f)
//! ⟹  f(t) ≤ A ε e^{−t/a},   a = 2C/λ,  A = 30C.
//! ```
//!
//! All verdicts are rigorous: fractional powers of `λ` are validated
//! enclosures and exponentials are compared through rational bounds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::enclosure::{self, Enclosure};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Fractional bits of the trace grid, relative to `ε`.
const GRID_BITS: i64 = 320;

/// Significant bits of the exponential envelope.
const ENVELOPE_BITS: u32 = 256;

/// Largest `k` tried when searching for `λ = 2^{-k}`.
pub const MAX_LAMBDA_EXPONENT: u32 = 64;

/// Parameters of the lemma that do not depend on `λ` or `ε`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaShape {
    #[serde(rename = "C")]
    pub c: Rational,
    pub gamma: Rational,
    pub alpha: Rational,
    pub beta: Rational,
    pub kappa: Rational,
    /// Constant in front of the nonlinear remainder.
    pub c_tilde: Rational,
}

impl LemmaShape {
    /// Validates `C ≥ 1`, `γ ∈ (0,1]`, `α > 1`, `β > 2`, `κ > 3`, `C̃ ≥ 0`.
    pub fn new(
        c: Rational,
        gamma: Rational,
        alpha: Rational,
        beta: Rational,
        kappa: Rational,
        c_tilde: Rational,
    ) -> Result<Self> {
        let bad = |what: &str, v: &Rational| Err(Error::InvalidParameter(format!("{what} out of range: {v}")));
        if c < Rational::one() {
            return bad("C", &c);
        }
        if !gamma.is_positive() || gamma > Rational::one() {
            return bad("gamma", &gamma);
        }
        if alpha <= Rational::int(1) {
            return bad("alpha", &alpha);
        }
        if beta <= Rational::int(2) {
            return bad("beta", &beta);
        }
        if kappa <= Rational::int(3) {
            return bad("kappa", &kappa);
        }
        if c_tilde.is_negative() {
            return bad("C_tilde", &c_tilde);
        }
        Ok(Self { c, gamma, alpha, beta, kappa, c_tilde })
    }

    /// `C̃` defaults to `C`.
    pub fn with_default_ctilde(c: Rational, gamma: Rational, alpha: Rational, beta: Rational, kappa: Rational) -> Result<Self> {
        let ct = c.clone();
        Self::new(c, gamma, alpha, beta, kappa, ct)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaParams {
    #[serde(flatten)]
    pub shape: LemmaShape,
    pub lambda: Rational,
    pub epsilon: Rational,
}

impl LemmaParams {
    pub fn new(shape: LemmaShape, lambda: Rational, epsilon: Rational) -> Result<Self> {
        if !lambda.is_positive() {
            return Err(Error::InvalidParameter(format!("lambda must be positive: {lambda}")));
        }
        if epsilon.is_negative() {
            return Err(Error::InvalidParameter(format!("epsilon must be nonnegative: {epsilon}")));
        }
        Ok(Self { shape, lambda, epsilon })
    }

    pub fn with_epsilon(&self, epsilon: Rational) -> Result<Self> {
        Self::new(self.shape.clone(), self.lambda.clone(), epsilon)
    }

    fn c(&self) -> &Rational {
        &self.shape.c
    }
}

/// `(a, A) = (2C/λ, 30C)`.
pub fn lemma_constants(c: &Rational, lambda: &Rational) -> (Rational, Rational) {
    assert!(lambda.is_positive());
    (Rational::int(2) * c / lambda, Rational::int(30) * c)
}

/// `γ²λ² / (10⁴ C³)`.
pub fn epsilon_threshold(c: &Rational, gamma: &Rational, lambda: &Rational) -> Rational {
    gamma * gamma * lambda * lambda / (Rational::int(10_000) * c.pow(3))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GammaCheck {
    /// `γ²/4 − Aε`, positive iff `(Aε)^{1/2} < γ/2`.
    pub sup_residual: Rational,
    /// `γ²/4 − 4a²Aε`, positive iff `2a(Aε)^{1/2} < γ/2`.
    pub integral_residual: Rational,
    pub sup_ok: bool,
    pub integral_ok: bool,
}

impl GammaCheck {
    pub fn ok(&self) -> bool {
        self.sup_ok && self.integral_ok
    }

    pub fn failing(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !self.sup_ok {
            v.push("sup");
        }
        if !self.integral_ok {
            v.push("integral");
        }
        v
    }
}

/// Both square-root comparisons, squared and decided exactly.
pub fn gamma_accumulation_check(p: &LemmaParams) -> GammaCheck {
    let (a, big_a) = lemma_constants(p.c(), &p.lambda);
    let quarter_g2 = &p.shape.gamma * &p.shape.gamma / Rational::int(4);
    let a_eps = &big_a * &p.epsilon;
    let sup_residual = &quarter_g2 - &a_eps;
    let integral_residual = &quarter_g2 - Rational::int(4) * &a * &a * &a_eps;
    GammaCheck {
        sup_ok: sup_residual.is_positive(),
        integral_ok: integral_residual.is_positive(),
        sup_residual,
        integral_residual,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Barrier {
    /// Enclosure of the left-hand side.
    pub lhs: Enclosure,
    pub bound: Rational,
    /// `bound − lhs.hi`: a rigorous lower bound on the true residual.
    pub residual: Rational,
    pub residual_approx: f64,
    pub ok: bool,
}

impl Barrier {
    fn new(lhs: Enclosure, bound: Rational) -> Self {
        let residual = &bound - &lhs.hi;
        Self { ok: residual.is_positive(), residual_approx: residual.to_f64(), lhs, bound, residual }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarrierCheck {
    pub barrier1: Barrier,
    pub barrier2: Barrier,
}

impl BarrierCheck {
    pub fn ok(&self) -> bool {
        self.barrier1.ok && self.barrier2.ok
    }
}

pub fn barrier_check(p: &LemmaParams) -> BarrierCheck {
    barrier_check_with(p, &enclosure::default_rel_width())
}

/// Barrier inequalities with enclosures of relative width `rel`:
///
/// ```text
/// 8C²λ^{α−1} + 120C³(λ + λ^{β−2} + λ^{κ−3}) + C̃ε^{1/2} < C/2
/// 80C²λ^{α−1} + 1200C³(λ + λ^{β−2} + λ^{κ−3}) + 10C̃ε^{1/2} < 10C
/// ```
pub fn barrier_check_with(p: &LemmaParams, rel: &Rational) -> BarrierCheck {
    let s = &p.shape;
    let c = &s.c;
    let lam = &p.lambda;
    let one = Rational::one();
    let pa = enclosure::pow(lam, &(&s.alpha - &one), rel);
    let pb = enclosure::pow(lam, &(&s.beta - Rational::int(2)), rel);
    let pk = enclosure::pow(lam, &(&s.kappa - Rational::int(3)), rel);
    let root_eps = enclosure::sqrt(&p.epsilon, rel);
    let powers = Enclosure::exact(lam.clone()).add(&pb).add(&pk);
    let c2 = c * c;
    let c3 = &c2 * c;
    let lhs = |k: i64| {
        let k = Rational::int(k);
        pa.scale(&(Rational::int(8) * &c2 * &k))
            .add(&powers.scale(&(Rational::int(120) * &c3 * &k)))
            .add(&root_eps.scale(&(&s.c_tilde * &k)))
    };
    BarrierCheck {
        barrier1: Barrier::new(lhs(1), c / Rational::int(2)),
        barrier2: Barrier::new(lhs(10), Rational::int(10) * c),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub params: LemmaParams,
    pub a: Rational,
    #[serde(rename = "A")]
    pub big_a: Rational,
    pub eps_threshold: Rational,
    pub below_threshold: bool,
    pub gamma_check: GammaCheck,
    pub barriers: BarrierCheck,
}

impl LemmaReport {
    pub fn ok(&self) -> bool {
        self.below_threshold && self.gamma_check.ok() && self.barriers.ok()
    }
}

pub fn lemma_report(p: &LemmaParams) -> LemmaReport {
    let (a, big_a) = lemma_constants(p.c(), &p.lambda);
    let eps_threshold = epsilon_threshold(p.c(), &p.shape.gamma, &p.lambda);
    LemmaReport {
        params: p.clone(),
        a,
        big_a,
        below_threshold: p.epsilon < eps_threshold,
        eps_threshold,
        gamma_check: gamma_accumulation_check(p),
        barriers: barrier_check(p),
    }
}

/// Parameters at `λ = 2^{-k}` and `ε` half the threshold.
pub fn params_at_power(shape: &LemmaShape, k: u32) -> LemmaParams {
    let lambda = Rational::pow2(-(k as i64));
    let eps = epsilon_threshold(&shape.c, &shape.gamma, &lambda) / Rational::int(2);
    LemmaParams { shape: shape.clone(), lambda, epsilon: eps }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibleLambda {
    /// `λ* = 2^{-exponent}`.
    pub exponent: u32,
    pub lambda: Rational,
    pub epsilon: Rational,
    pub barriers: BarrierCheck,
}

/// Largest `λ = 2^{-k}`, `0 ≤ k ≤ 64`, whose barrier check passes with
/// `ε = threshold/2`. Every barrier term grows with `λ`, so the predicate is
/// monotone in `k` and bisection applies.
pub fn find_admissible_lambda(shape: &LemmaShape) -> Result<AdmissibleLambda> {
    let check = |k: u32| barrier_check(&params_at_power(shape, k));
    let done = |k: u32, barriers: BarrierCheck| {
        let p = params_at_power(shape, k);
        AdmissibleLambda { exponent: k, lambda: p.lambda, epsilon: p.epsilon, barriers }
    };
    let first = check(0);
    if first.ok() {
        return Ok(done(0, first));
    }
    let last = check(MAX_LAMBDA_EXPONENT);
    if !last.ok() {
        return Err(Error::NoAdmissibleLambda { max_exponent: MAX_LAMBDA_EXPONENT });
    }
    let (mut lo, mut hi, mut best) = (0u32, MAX_LAMBDA_EXPONENT, last);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let b = check(mid);
        if b.ok() {
            hi = mid;
            best = b;
        } else {
            lo = mid;
        }
    }
    Ok(done(hi, best))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    Linear,
    Quadratic,
}

impl std::str::FromStr for TraceMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "quadratic" => Ok(Self::Quadratic),
            _ => Err(Error::Parse(format!("unknown trace mode {s:?}"))),
        }
    }
}

/// Pointwise-maximal grid function consistent with the discretized lemma
/// hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversarialTrace {
    pub mode: TraceMode,
    pub delta: Rational,
    pub horizon: Rational,
    pub a: Rational,
    pub big_a: Rational,
    pub values: Vec<Rational>,
    /// Rational lower bounds on `Aε e^{−t_k/a}`.
    pub envelope: Vec<Rational>,
    /// `h_k` used in quadratic mode.
    pub h: Option<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceSummary {
    pub mode: TraceMode,
    pub delta: Rational,
    pub horizon: Rational,
    pub steps: usize,
    /// `f_k ≤ envelope_k` at every grid point, decided exactly.
    pub bound_holds: bool,
    pub first_violation: Option<usize>,
    pub max_ratio: f64,
    pub min_margin: f64,
    pub max_h: Option<f64>,
}

impl AdversarialTrace {
    pub fn time(&self, k: usize) -> Rational {
        &self.delta * &Rational::int(k as i64)
    }

    pub fn first_violation(&self) -> Option<usize> {
        self.values.iter().zip(&self.envelope).position(|(f, e)| f > e)
    }

    pub fn bound_holds(&self) -> bool {
        self.first_violation().is_none()
    }

    /// `f_k / (Aε e^{−t_k/a})` in floating point.
    pub fn ratios(&self) -> Vec<f64> {
        let eps = self.values[0].to_f64();
        let aeps = self.big_a.to_f64() * eps;
        (0..self.values.len())
            .map(|k| {
                if aeps == 0.0 {
                    0.0
                } else {
                    let x = self.time(k).to_f64() / self.a.to_f64();
                    self.values[k].to_f64() * x.exp() / aeps
                }
            })
            .collect()
    }

    pub fn summary(&self) -> TraceSummary {
        let ratios = self.ratios();
        let eps = self.values[0].to_f64();
        let aeps = self.big_a.to_f64() * eps;
        let a = self.a.to_f64();
        let min_margin = (0..self.values.len())
            .map(|k| aeps * (-self.time(k).to_f64() / a).exp() - self.values[k].to_f64())
            .fold(f64::INFINITY, f64::min);
        TraceSummary {
            mode: self.mode,
            delta: self.delta.clone(),
            horizon: self.horizon.clone(),
            steps: self.values.len() - 1,
            bound_holds: self.bound_holds(),
            first_violation: self.first_violation(),
            max_ratio: ratios.iter().cloned().fold(0.0, f64::max),
            min_margin,
            max_h: self.h.as_ref().map(|h| h.iter().map(Rational::to_f64).fold(0.0, f64::max)),
        }
    }

    /// CSV with header `t,f,bound,ratio`.
    pub fn to_csv(&self) -> String {
        let ratios = self.ratios();
        let aeps = self.big_a.to_f64() * self.values[0].to_f64();
        let a = self.a.to_f64();
        let mut out = String::from("t,f,bound,ratio\n");
        for (k, f) in self.values.iter().enumerate() {
            let t = self.time(k).to_f64();
            out.push_str(&format!("{:e},{:e},{:e},{:e}\n", t, f.to_f64(), aeps * (-t / a).exp(), ratios[k]));
        }
        out
    }
}

/// Lower endpoints of `λ^α, λ^β, λ^κ` (used for values) and upper
/// endpoints (used for the monotonicity test).
struct Powers {
    lo: [Rational; 3],
    hi: [Rational; 3],
}

impl Powers {
    fn new(p: &LemmaParams) -> Self {
        let rel = enclosure::default_rel_width();
        let s = &p.shape;
        let e = [&s.alpha, &s.beta, &s.kappa].map(|x| enclosure::pow(&p.lambda, x, &rel));
        Self { lo: e.clone().map(|x| x.lo), hi: e.map(|x| x.hi) }
    }
}

/// `C(λ² + λ^β s + λ^κ s²)`.
fn p_coeff(c: &Rational, lambda: &Rational, pb: &Rational, pk: &Rational, s: &Rational) -> Rational {
    c * (lambda * lambda + pb * s + pk * s * s)
}

/// Scale rationals to integers over their least common denominator.
fn common_scale(xs: &[&Rational]) -> (Vec<BigInt>, BigInt) {
    let q = xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints = xs.iter().map(|x| x.numer() * (&q / x.denom())).collect();
    (ints, q)
}

/// Trace values live on the grid `ε·2^{-GRID_BITS}`, so `f_0 = ε` exactly
/// and the linear trace is exactly homogeneous in `ε`.
fn grid_unit(eps: &Rational) -> Rational {
    eps * &Rational::pow2(-GRID_BITS)
}

fn to_grid(x: &Rational, unit: &Rational) -> BigInt {
    (x / unit).floor()
}

/// Discretize the hypothesis on the grid `t_k = kΔ` with trapezoid integrals
/// and build the greedy maximal trace starting from `f_0 = ε`.
///
/// For `j < k`, with `s = t_k − t_j`, `P = C(λ² + λ^β s + λ^κ s²)` and
/// `S = f_j/2 + Σ_{j<i<k} f_i`, the constraint rearranges to
///
/// ```text
/// f_k (1 + (λ − P)Δ/2 − C̃h_k) ≤ C(1 + λ^α s) f_j + (P − λ)Δ S
/// ```
///
/// with the `C̃h_k` term present only in quadratic mode, where
/// `h_k = max_{j<k} f_j^{1/2} + Δ Σ_{j<k} f_j^{1/2}`. The lower enclosure
/// endpoints of the powers are used, which only shrinks the right-hand side,
/// so the returned values satisfy the constraints for the true powers.
/// Each `f_k` is the minimum bound rounded down to the grid `ε·2^{-320}`.
pub fn adversarial_trace(p: &LemmaParams, delta: &Rational, horizon: &Rational, mode: TraceMode) -> Result<AdversarialTrace> {
    if !delta.is_positive() {
        return Err(Error::InvalidParameter(format!("delta must be positive: {delta}")));
    }
    if horizon.is_negative() {
        return Err(Error::InvalidParameter(format!("horizon must be nonnegative: {horizon}")));
    }
    let steps = horizon / delta;
    if !steps.is_integer() {
        return Err(Error::InvalidParameter(format!("horizon {horizon} is not a multiple of delta {delta}")));
    }
    let n: usize = usize::try_from(steps.numer()).map_err(|_| Error::InvalidParameter("too many steps".into()))?;
    let c = p.c();
    let lam = &p.lambda;
    let half = Rational::frac(1, 2);
    let one = Rational::one();
    let pw = Powers::new(p);
    let non_monotone = || Error::NonMonotone { lambda: lam.to_string(), delta: delta.to_string() };

    // Per-lag coefficients c1 = C(1 + λ^α s), c2 = (P − λ)Δ, den = 1 + (λ − P)Δ/2.
    let mut coeffs: Vec<Rational> = Vec::with_capacity(3 * n);
    for d in 1..=n {
        let s = delta * &Rational::int(d as i64);
        let p_lo = p_coeff(c, lam, &pw.lo[1], &pw.lo[2], &s);
        let p_hi = p_coeff(c, lam, &pw.hi[1], &pw.hi[2], &s);
        if !(&one + (lam - &p_hi) * delta * &half).is_positive() {
            return Err(non_monotone());
        }
        coeffs.push(c * (&one + &pw.lo[0] * &s));
        coeffs.push((&p_lo - lam) * delta);
        coeffs.push(&one + (lam - &p_lo) * delta * &half);
    }
    let (ints, q) = common_scale(&coeffs.iter().collect::<Vec<_>>());
    let lag = |d: usize| (&ints[3 * (d - 1)], &ints[3 * (d - 1) + 1], &ints[3 * (d - 1) + 2]);

    let (a, big_a) = lemma_constants(c, lam);
    if p.epsilon.is_zero() {
        return Ok(AdversarialTrace {
            mode,
            delta: delta.clone(),
            horizon: horizon.clone(),
            envelope: vec![Rational::zero(); n + 1],
            a,
            big_a,
            values: vec![Rational::zero(); n + 1],
            h: (mode == TraceMode::Quadratic).then(|| vec![Rational::zero(); n + 1]),
        });
    }
    let scale_back = grid_unit(&p.epsilon);
    let eps_grid = BigInt::one() << GRID_BITS as u64;
    let sqrt_bits = 64;
    let sqrt_lo = |x: &Rational| -> Rational {
        enclosure::sqrt(x, &Rational::pow2(-(sqrt_bits as i64) - 4)).lo.floor_bits(sqrt_bits)
    };

    let mut f: Vec<Rational> = vec![Rational::from(eps_grid.clone()) * &scale_back];
    let mut grid: Vec<BigInt> = vec![eps_grid.clone()];
    // prefix[i] = Σ_{l<i} F_l
    let mut prefix: Vec<BigInt> = vec![BigInt::zero(), eps_grid];
    let mut h_vals = Vec::new();
    let (mut root_max, mut root_sum) = (Rational::zero(), Rational::zero());
    if mode == TraceMode::Quadratic {
        h_vals.push(Rational::zero());
    }
    let two = BigInt::from(2);
    for k in 1..=n {
        // Extra left coefficient x = C̃h_k = xn/xd.
        let (xn, xd) = if mode == TraceMode::Quadratic {
            let r = sqrt_lo(&f[k - 1]);
            root_sum += &r;
            root_max = root_max.max(r);
            let h = &root_max + delta * &root_sum;
            let x = &p.shape.c_tilde * &h;
            h_vals.push(h);
            (x.numer().clone(), x.denom().clone())
        } else {
            (BigInt::zero(), BigInt::one())
        };
        // Candidate j: F_k ≤ N_j·xd / (2 L_d), L_d = Dn_d·xd − Q·xn.
        let mut best: Option<(BigInt, BigInt)> = None;
        for j in 0..k {
            let d = k - j;
            let (c1, c2, dn) = lag(d);
            let l = if mode == TraceMode::Quadratic { dn * &xd - &q * &xn } else { dn.clone() };
            if !l.is_positive() {
                return Err(non_monotone());
            }
            let s2 = &grid[j] + (&prefix[k] - &prefix[j + 1]) * &two;
            let num = c1 * &grid[j] * &two + c2 * s2;
            let better = match &best {
                None => true,
                Some((bn, bl)) => &num * bl < bn * &l,
            };
            if better {
                best = Some((num, l));
            }
        }
        let (num, l) = best.expect("k ≥ 1 has a constraint");
        if num.is_negative() {
            return Err(Error::Internal(format!("no nonnegative trace value at step {k}")));
        }
        let fk = (num * &xd).div_floor(&(l * &two));
        prefix.push(&prefix[k] + &fk);
        f.push(Rational::from(fk.clone()) * &scale_back);
        grid.push(fk);
    }

    let trace = AdversarialTrace {
        mode,
        delta: delta.clone(),
        horizon: horizon.clone(),
        envelope: envelope(&big_a, &p.epsilon, delta, &a, n),
        a,
        big_a,
        values: f,
        h: (mode == TraceMode::Quadratic).then_some(h_vals),
    };
    verify_trace(p, &trace, &pw.lo)?;
    Ok(trace)
}

/// Lower bounds `Aε·L_k ≤ Aε e^{−kΔ/a}`, with `L_k` built from one upper
/// bound on `e^{Δ/a}` and rounded down at every step.
fn envelope(big_a: &Rational, eps: &Rational, delta: &Rational, a: &Rational, n: usize) -> Vec<Rational> {
    let up = enclosure::exp(&(delta / a), &enclosure::default_rel_width()).hi;
    let step = up.recip().floor_bits(ENVELOPE_BITS);
    let aeps = big_a * eps;
    let mut l = Rational::one();
    let mut out = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        out.push((&aeps * &l).floor_bits(ENVELOPE_BITS));
        l = (&l * &step).floor_bits(ENVELOPE_BITS);
    }
    out
}

/// Re-check every grid constraint in its original (unrearranged) form
///
/// ```text
/// f_k + λ I ≤ C(1 + λ^α s) f_j + P I + C̃ h_k f_k,
/// I = Δ((f_j + f_k)/2 + Σ_{j<i<k} f_i),
/// ```
///
/// multiplied through by `2^E` and a common denominator so the test is an
/// exact integer comparison.
fn verify_trace(p: &LemmaParams, tr: &AdversarialTrace, lo: &[Rational; 3]) -> Result<()> {
    let f = &tr.values;
    let n = f.len() - 1;
    let c = p.c();
    let lam = &p.lambda;
    if p.epsilon.is_zero() {
        return Ok(());
    }
    let unit = grid_unit(&p.epsilon);
    let grid: Vec<BigInt> = f.iter().map(|v| to_grid(v, &unit)).collect();
    for (v, g) in f.iter().zip(&grid) {
        if *v != Rational::from(g.clone()) * &unit {
            return Err(Error::Internal("trace value off grid".into()));
        }
    }
    // Per lag: u = (λ − P)Δ/2 multiplies J = F_j + F_k + 2ΣF_i, v = C(1 + λ^α s).
    let mut coeffs = Vec::with_capacity(2 * n);
    for d in 1..=n {
        let s = &tr.delta * &Rational::int(d as i64);
        coeffs.push((lam - p_coeff(c, lam, &lo[1], &lo[2], &s)) * &tr.delta / Rational::int(2));
        coeffs.push(c * (Rational::one() + &lo[0] * &s));
    }
    let (ints, q) = common_scale(&coeffs.iter().collect::<Vec<_>>());
    let mut prefix = vec![BigInt::zero()];
    for g in &grid {
        let next = prefix.last().unwrap() + g;
        prefix.push(next);
    }
    let two = BigInt::from(2);
    for k in 1..=n {
        let (xn, xd) = match &tr.h {
            Some(h) => {
                let x = &p.shape.c_tilde * &h[k];
                (x.numer().clone(), x.denom().clone())
            }
            None => (BigInt::zero(), BigInt::one()),
        };
        let fk_term = (&xd - &xn) * &q * &grid[k];
        for j in 0..k {
            let d = k - j;
            let (u, v) = (&ints[2 * (d - 1)], &ints[2 * (d - 1) + 1]);
            let jj = &grid[j] + &grid[k] + (&prefix[k] - &prefix[j + 1]) * &two;
            let lhs = &fk_term + (u * jj - v * &grid[j]) * &xd;
            if lhs.is_positive() {
                return Err(Error::Internal(format!("trace constraint ({j}, {k}) violated")));
            }
        }
    }
    Ok(())
}
