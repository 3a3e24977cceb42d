//! Nonnegative binary floating point on top of `BigUint`: a `bits`-bit
//! mantissa and an `i64` exponent, truncating after every operation. All
//! results are bit-reproducible on any platform.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Extra fractional bits used inside `exp` and `ln`.
const GUARD: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Real {
    /// Zero, or exactly `bits` bits long.
    mant: BigUint,
    exp: i64,
}

impl Real {
    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let len = self.mant.bits();
        let top = if len > 60 { &self.mant >> (len - 60) } else { self.mant.clone() };
        let shift = self.exp + len as i64 - top.bits() as i64;
        let m = top.to_u64().unwrap() as f64;
        if shift > 2000 {
            f64::INFINITY
        } else if shift < -2000 {
            0.0
        } else {
            m * 2f64.powi(shift as i32)
        }
    }

    /// `floor(self · 2^frac_bits)`.
    pub fn to_fixed(&self, frac_bits: u32) -> BigUint {
        let s = self.exp + frac_bits as i64;
        if s >= 0 {
            &self.mant << (s as u64)
        } else {
            &self.mant >> ((-s) as u64)
        }
    }
}

/// Arithmetic context: mantissa width plus a cached `ln 2`.
#[derive(Clone, Debug)]
pub struct Arith {
    bits: u32,
    /// `ln 2` with `bits + GUARD` fractional bits.
    ln2: BigUint,
    ops: u64,
}

impl Arith {
    pub fn new(bits: u32) -> Self {
        let bits = bits.max(16);
        let w = bits + GUARD;
        let one = BigUint::one() << w;
        let third = &one / 3u32;
        let ln2 = atanh_fixed(&third, w) << 1u32;
        Arith { bits, ln2, ops: 0 }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Number of rounding operations performed so far.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// Worst-case accumulated relative error so far, `ops · 2^{1-bits}`.
    pub fn error_budget(&self) -> f64 {
        self.ops as f64 * 2f64.powi(1 - self.bits as i32)
    }

    fn norm(&mut self, mant: BigUint, exp: i64) -> Real {
        self.ops += 1;
        if mant.is_zero() {
            return Real { mant, exp: 0 };
        }
        let len = mant.bits() as i64;
        let b = self.bits as i64;
        if len > b {
            Real { mant: mant >> ((len - b) as u64), exp: exp + len - b }
        } else {
            Real { mant: mant << ((b - len) as u64), exp: exp - (b - len) }
        }
    }

    pub fn zero(&self) -> Real {
        Real { mant: BigUint::zero(), exp: 0 }
    }

    pub fn one(&mut self) -> Real {
        self.from_u128(1)
    }

    pub fn from_u128(&mut self, x: u128) -> Real {
        self.norm(BigUint::from(x), 0)
    }

    pub fn from_ratio(&mut self, num: u128, den: u128) -> Real {
        assert!(den > 0, "zero denominator");
        let shift = self.bits as u64 + 2 + 128;
        let q = (BigUint::from(num) << shift) / BigUint::from(den);
        self.norm(q, -(shift as i64))
    }

    /// Exact conversion of a nonnegative finite double.
    pub fn from_f64(&mut self, x: f64) -> Real {
        assert!(x >= 0.0 && x.is_finite(), "from_f64 needs a nonnegative finite value, got {x}");
        if x == 0.0 {
            return self.zero();
        }
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), raw_exp - 1075) };
        self.norm(BigUint::from(m), e)
    }

    pub fn mul(&mut self, a: &Real, b: &Real) -> Real {
        self.norm(&a.mant * &b.mant, a.exp + b.exp)
    }

    pub fn div(&mut self, a: &Real, b: &Real) -> Real {
        assert!(!b.is_zero(), "division by zero");
        let shift = self.bits as u64 + 2;
        let q = (&a.mant << shift) / &b.mant;
        self.norm(q, a.exp - b.exp - shift as i64)
    }

    pub fn add(&mut self, a: &Real, b: &Real) -> Real {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        let (hi, lo) = if a.exp >= b.exp { (a, b) } else { (b, a) };
        let gap = (hi.exp - lo.exp) as u64;
        if gap > self.bits as u64 + 2 {
            // `lo` is below the last kept bit of the sum.
            self.ops += 1;
            return hi.clone();
        }
        self.norm((&hi.mant << gap) + &lo.mant, lo.exp)
    }

    /// `max(a - b, 0)`.
    pub fn sub(&mut self, a: &Real, b: &Real) -> Real {
        if b.is_zero() {
            return a.clone();
        }
        if cmp(a, b) != Ordering::Greater {
            return self.zero();
        }
        if a.exp - b.exp > self.bits as i64 + 2 {
            self.ops += 1;
            return a.clone();
        }
        let base = a.exp.min(b.exp);
        let x = &a.mant << ((a.exp - base) as u64);
        let y = &b.mant << ((b.exp - base) as u64);
        self.norm(x - y, base)
    }

    /// `e^x` for `x ≥ 0`.
    pub fn exp(&mut self, x: &Real) -> Real {
        let w = self.bits + GUARD;
        let xf = x.to_fixed(w);
        let (k, r) = xf.div_rem(&self.ln2);
        let k = k.to_i64().expect("exponent argument too large");
        // Taylor series of e^{r / 2^s}, then square s times.
        let s = 8u32;
        let r = r >> s;
        let one = BigUint::one() << w;
        let mut sum = one.clone();
        let mut term = one;
        let mut i = 1u32;
        loop {
            term = (&term * &r) >> w;
            term /= i;
            if term.is_zero() {
                break;
            }
            sum += &term;
            i += 1;
        }
        for _ in 0..s {
            sum = (&sum * &sum) >> w;
        }
        self.norm(sum, k - w as i64)
    }

    /// `e^{±x}` for a magnitude `x ≥ 0`.
    pub fn exp_signed(&mut self, negative: bool, x: &Real) -> Real {
        let e = self.exp(x);
        if negative {
            let one = self.one();
            self.div(&one, &e)
        } else {
            e
        }
    }

    /// `ln x` for `x ≥ 1`; arguments below 1 give 0.
    pub fn ln(&mut self, x: &Real) -> Real {
        assert!(!x.is_zero(), "ln of zero");
        let w = self.bits + GUARD;
        let len = x.mant.bits() as i64;
        // x = y · 2^k with y in [1, 2).
        let k = x.exp + len - 1;
        if k < 0 {
            // Only reachable when rounding pushed an argument of 1 just below it.
            return self.zero();
        }
        let y = if len - 1 > w as i64 { &x.mant >> ((len - 1 - w as i64) as u64) } else { &x.mant << ((w as i64 - len + 1) as u64) };
        let one = BigUint::one() << w;
        let z = ((&y - &one) << w) / (&y + &one);
        let ln_y = atanh_fixed(&z, w) << 1u32;
        let total = ln_y + &self.ln2 * BigUint::from(k as u64);
        self.norm(total, -(w as i64))
    }

    /// `(x - y)` for signed magnitudes: returns `(negative, |x - y|)`.
    pub fn signed_diff(&mut self, x: &Real, y: &Real) -> (bool, Real) {
        match cmp(x, y) {
            Ordering::Less => (true, self.sub(y, x)),
            _ => (false, self.sub(x, y)),
        }
    }
}

pub fn cmp(a: &Real, b: &Real) -> Ordering {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => return Ordering::Equal,
        (true, false) => return Ordering::Less,
        (false, true) => return Ordering::Greater,
        _ => {}
    }
    let ta = a.exp + a.mant.bits() as i64;
    let tb = b.exp + b.mant.bits() as i64;
    if ta != tb {
        return ta.cmp(&tb);
    }
    let base = a.exp.min(b.exp);
    let x = &a.mant << ((a.exp - base) as u64);
    let y = &b.mant << ((b.exp - base) as u64);
    x.cmp(&y)
}

/// `atanh(z)` in fixed point with `w` fractional bits, `0 ≤ z < 1/2`.
fn atanh_fixed(z: &BigUint, w: u32) -> BigUint {
    let z2 = (z * z) >> w;
    let mut power = z.clone();
    let mut sum = z.clone();
    let mut j = 1u32;
    loop {
        power = (&power * &z2) >> w;
        let term = &power / (2 * j + 1);
        if term.is_zero() {
            break;
        }
        sum += term;
        j += 1;
    }
    sum
}

/// Signed fixed-point accumulator for sums of estimator terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixed(pub BigInt);

impl Fixed {
    pub fn zero() -> Self {
        Fixed(BigInt::zero())
    }

    pub fn of(r: &Real, frac_bits: u32) -> Self {
        Fixed(BigInt::from_biguint(Sign::Plus, r.to_fixed(frac_bits)))
    }

    pub fn to_f64(&self, frac_bits: u32) -> f64 {
        let len = self.0.bits();
        let (top, shift) = if len > 60 { (&self.0 >> (len - 60), len as i64 - 60) } else { (self.0.clone(), 0) };
        top.to_f64().unwrap() * 2f64.powi((shift - frac_bits as i64) as i32)
    }
}
