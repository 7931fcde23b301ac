//! Validated enclosures of real numbers by pairs of rationals.
//!
//! Every operation rounds outward: the true value always lies in
//! `[lo, hi]`. Endpoints are kept dyadic with a bounded number of
//! significant bits so repeated arithmetic does not blow up.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::rational::Rational;

/// Default relative width target for reported enclosures.
pub fn default_rel_width() -> Rational {
    Rational::new(1, BigInt::from(10u32).pow(30)).expect("nonzero")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
}

impl Enclosure {
    pub fn exact(x: Rational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi, "inverted enclosure");
        Self { lo, hi }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    /// `width ≤ rel · min(|lo|, |hi|)`, or exact.
    pub fn meets(&self, rel: &Rational) -> bool {
        let w = self.width();
        if w.is_zero() {
            return true;
        }
        let mag = self.lo.abs().min(self.hi.abs());
        w <= rel * &mag
    }

    pub fn midpoint_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / Rational::int(2)).to_f64()
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    /// Multiply by a nonnegative rational.
    pub fn scale(&self, k: &Rational) -> Enclosure {
        assert!(!k.is_negative(), "scale by negative factor");
        Enclosure { lo: &self.lo * k, hi: &self.hi * k }
    }

    /// Product of two enclosures of nonnegative numbers.
    pub fn mul_nonneg(&self, other: &Enclosure) -> Enclosure {
        assert!(!self.lo.is_negative() && !other.lo.is_negative());
        Enclosure { lo: &self.lo * &other.lo, hi: &self.hi * &other.hi }
    }

    /// Round endpoints outward to `bits` significant bits.
    pub fn round_out(&self, bits: u32) -> Enclosure {
        Enclosure { lo: self.lo.floor_bits(bits), hi: self.hi.ceil_bits(bits) }
    }
}

/// `x^(1/q)` for `x ≥ 0`, with `s` fractional bits:
/// `[⌊x·2^{sq}⌋^{1/q} / 2^s, (⌊…⌋^{1/q} + 1) / 2^s]`.
fn root_with_bits(x: &Rational, q: u32, s: u64) -> Enclosure {
    let scaled: BigInt = (x.numer() << (s * q as u64)) / x.denom();
    let r = scaled.nth_root(q);
    let scale = Rational::pow2(-(s as i64));
    let lo = Rational::from(r.clone()) * &scale;
    let exact = num_traits::pow(r.clone(), q as usize) * x.denom() == (x.numer() << (s * q as u64));
    let hi = if exact { lo.clone() } else { Rational::from(r + BigInt::one()) * &scale };
    Enclosure { lo, hi }
}

/// Enclosure of `x^(1/q)` for rational `x ≥ 0` and integer `q ≥ 1`.
pub fn root(x: &Rational, q: u32, rel: &Rational) -> Enclosure {
    assert!(q >= 1);
    assert!(!x.is_negative(), "root of negative number");
    if x.is_zero() || q == 1 {
        return Enclosure::exact(x.clone());
    }
    // Bits needed: -log2(rel) plus the magnitude of the result.
    let rel_bits = (-rel.log2_floor()).max(1) + 8;
    let mag = -x.log2_floor() / q as i64 + 2;
    let mut s = (rel_bits + mag.max(0)) as u64;
    loop {
        let e = root_with_bits(x, q, s);
        if e.meets(rel) {
            return e;
        }
        s *= 2;
    }
}

pub fn sqrt(x: &Rational, rel: &Rational) -> Enclosure {
    root(x, 2, rel)
}

/// `e^z` for `|z| ≤ 1/2` via Taylor series, remainder `≤ 2|z|^N / N!`.
fn exp_small(z: &Rational, bits: u32) -> Enclosure {
    debug_assert!(z.abs() <= Rational::frac(1, 2));
    let tol = Rational::pow2(-(bits as i64) - 4);
    let mut term = Rational::one();
    let mut sum = Rational::one();
    let mut n: i64 = 0;
    loop {
        n += 1;
        term = (&term * z / Rational::int(n)).truncate_bits(bits + 16);
        sum += &term;
        // Remaining tail bounded by 2|term|·|z|/(n+1) ≤ |term|.
        if term.abs() <= tol {
            break;
        }
    }
    // Truncation error per step ≤ 2^{-(bits+15)}·|prev term| summed over ≤ n
    // steps, plus the tail; both dominated by 2·tol + n·2^{-(bits+15)}.
    let slack = &tol * &Rational::int(2) + Rational::pow2(-(bits as i64) - 15) * Rational::int(n + 1);
    Enclosure::new(&sum - &slack, &sum + &slack).round_out(bits + 8)
}

/// Enclosure of `e^x` for rational `x`, relative width about `2^{-bits}`.
pub fn exp_bits(x: &Rational, bits: u32) -> Enclosure {
    if x.is_zero() {
        return Enclosure::exact(Rational::one());
    }
    // x = z · 2^k with |z| ≤ 1/2.
    let k = (x.abs().log2_floor() + 2).max(0);
    let z = x * &Rational::pow2(-k);
    let work = bits + 2 * k as u32 + 16;
    let mut e = exp_small(&z, work);
    for _ in 0..k {
        e = e.mul_nonneg(&e).round_out(work);
    }
    e
}

pub fn exp(x: &Rational, rel: &Rational) -> Enclosure {
    let mut bits = ((-rel.log2_floor()).max(1) + 8) as u32;
    loop {
        let e = exp_bits(x, bits);
        if e.meets(rel) {
            return e;
        }
        bits *= 2;
    }
}

/// `ln(1+z)/(1-z) = 2 atanh z` for `0 ≤ z < 1/3`.
fn atanh2_small(z: &Rational, bits: u32) -> Enclosure {
    let z2 = z * z;
    let tol = Rational::pow2(-(bits as i64) - 4);
    let mut power = z.clone();
    let mut sum = Rational::zero();
    let mut k: i64 = 0;
    loop {
        let term = (&power / Rational::int(2 * k + 1)).truncate_bits(bits + 16);
        sum += &term;
        power = (&power * &z2).truncate_bits(bits + 16);
        k += 1;
        // Tail ≤ power / ((2k+1)(1 - z²)) ≤ 2·power.
        if power <= tol {
            break;
        }
    }
    let slack = &power * &Rational::int(2) + Rational::pow2(-(bits as i64) - 15) * Rational::int(2 * k + 2);
    let two = Rational::int(2);
    Enclosure::new((&sum - &slack) * &two, (&sum + &slack) * &two)
}

/// Enclosure of `ln 2`.
pub fn ln2(bits: u32) -> Enclosure {
    atanh2_small(&Rational::frac(1, 3), bits)
}

/// Enclosure of `ln x` for rational `x > 0`, absolute width about
/// `2^{-bits}` (times the binary exponent of `x`).
pub fn ln_bits(x: &Rational, bits: u32) -> Enclosure {
    assert!(x.is_positive(), "log of nonpositive number");
    let e = x.log2_floor();
    let m = x * &Rational::pow2(-e); // m in [1, 2)
    let z = (&m - &Rational::one()) / (&m + &Rational::one());
    let lm = atanh2_small(&z, bits);
    let l2 = ln2(bits + 64);
    let scaled = if e >= 0 {
        l2.scale(&Rational::int(e))
    } else {
        let k = Rational::int(-e);
        Enclosure::new(-(&l2.hi * &k), -(&l2.lo * &k))
    };
    lm.add(&scaled).round_out(bits + 32)
}

/// Enclosure of `x^p` for rational `x > 0` and rational exponent `p`.
///
/// Integer exponents are exact. Exponents with small denominators go through
/// an exact integer root; anything else through `exp(p · ln x)`.
pub fn pow(x: &Rational, p: &Rational, rel: &Rational) -> Enclosure {
    assert!(x.is_positive(), "power of nonpositive base");
    if p.is_integer() {
        let e: i32 = i32::try_from(p.numer()).expect("integer exponent fits in i32");
        return Enclosure::exact(x.pow(e));
    }
    let q = p.denom();
    let n = p.numer();
    if q.bits() <= 10 && n.bits() <= 14 {
        let q32: u32 = u32::try_from(q).expect("small denominator");
        let n32: i32 = i32::try_from(n).expect("small numerator");
        let base = x.pow(n32.abs());
        let base = if n32 < 0 { base.recip() } else { base };
        return root(&base, q32, rel);
    }
    let mut bits = ((-rel.log2_floor()).max(1) + 16) as u32;
    loop {
        let l = ln_bits(x, bits + 32);
        let (a, b) = if p.is_positive() { (&l.lo * p, &l.hi * p) } else { (&l.hi * p, &l.lo * p) };
        let lo = exp_bits(&a, bits).lo;
        let hi = exp_bits(&b, bits).hi;
        let e = Enclosure::new(lo, hi);
        if e.meets(rel) {
            return e;
        }
        bits *= 2;
    }
}
