//! Shared exact/float arithmetic helpers.
//!
//! Everything level-indexed in this crate is exact big-rational arithmetic;
//! the helpers here keep that usable at scale. The two workhorses are
//! [`unit_fraction_sum`] (pairwise summation of unit fractions without
//! intermediate gcd reduction) and [`BigRatio`] (an unreduced rational that
//! can hold a million-term Birkhoff sum and still compare and convert
//! cheaply).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Int = BigInt;
pub type Rat = BigRational;

/// Representative of `x` in `[0, 1)`.
pub fn mod1(x: &Rat) -> Rat {
    let f = x.floor();
    x - f
}

/// Circle norm ‖x‖ = distance from x to the nearest integer, in `[0, 1/2]`.
pub fn circle_norm(x: &Rat) -> Rat {
    let f = mod1(x);
    let c = Rat::one() - &f;
    if f <= c {
        f
    } else {
        c
    }
}

pub fn rat_from_u64(n: u64, d: u64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn rat_from_i64(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

/// Exact dyadic rational equal to the given finite f64.
pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

/// f64 value of num/den, robust to operands far outside f64 range.
pub fn big_ratio_to_f64(num: &Int, den: &Int) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    if den.is_zero() {
        return f64::INFINITY * if num.is_negative() { -1.0 } else { 1.0 };
    }
    let sign = if num.is_negative() != den.is_negative() {
        -1.0
    } else {
        1.0
    };
    let n = num.magnitude();
    let d = den.magnitude();
    let en = n.bits() as i64;
    let ed = d.bits() as i64;
    // Top 63 bits of each operand; the ratio of the heads carries full
    // f64 precision, the exponents are reapplied afterwards.
    let head = |x: &num_bigint::BigUint, e: i64| -> f64 {
        if e <= 63 {
            x.to_f64().unwrap()
        } else {
            (x >> (e - 63) as u64).to_f64().unwrap()
        }
    };
    let nh = head(n, en);
    let dh = head(d, ed);
    let shift = (en - 63).max(0) - (ed - 63).max(0);
    if shift > 2000 {
        return sign * f64::INFINITY;
    }
    if shift < -2000 {
        return 0.0;
    }
    sign * (nh / dh) * 2f64.powi(shift as i32)
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    big_ratio_to_f64(x.numer(), x.denom())
}

/// Natural log of a positive big integer.
pub fn ln_big(x: &Int) -> f64 {
    assert!(x.is_positive(), "ln of non-positive integer");
    let m = x.magnitude();
    let e = m.bits() as i64;
    if e <= 63 {
        (m.to_f64().unwrap()).ln()
    } else {
        let head = (m >> (e - 63) as u64).to_f64().unwrap();
        head.ln() + (e - 63) as f64 * std::f64::consts::LN_2
    }
}

/// Unreduced rational. Birkhoff sums over 10^4+ terms have denominators with
/// tens of thousands of digits; reducing them is pointless, but comparisons
/// by cross-multiplication stay cheap.
#[derive(Debug, Clone)]
pub struct BigRatio {
    pub num: Int,
    pub den: Int,
}

impl BigRatio {
    pub fn new(num: Int, den: Int) -> Self {
        assert!(!den.is_zero());
        if den.is_negative() {
            BigRatio {
                num: -num,
                den: -den,
            }
        } else {
            BigRatio { num, den }
        }
    }

    pub fn zero() -> Self {
        BigRatio {
            num: Int::zero(),
            den: Int::one(),
        }
    }

    pub fn from_rat(x: &Rat) -> Self {
        BigRatio::new(x.numer().clone(), x.denom().clone())
    }

    pub fn to_f64(&self) -> f64 {
        big_ratio_to_f64(&self.num, &self.den)
    }

    /// Reduced form. Only call on values of moderate size.
    pub fn to_rat(&self) -> Rat {
        Rat::new(self.num.clone(), self.den.clone())
    }

    pub fn cmp_ratio(&self, other: &BigRatio) -> std::cmp::Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }

    pub fn cmp_rat(&self, other: &Rat) -> std::cmp::Ordering {
        (&self.num * other.denom()).cmp(&(other.numer() * &self.den))
    }

    pub fn mul_int(&self, k: &Int) -> BigRatio {
        BigRatio::new(&self.num * k, self.den.clone())
    }

    pub fn mul_rat(&self, k: &Rat) -> BigRatio {
        BigRatio::new(&self.num * k.numer(), &self.den * k.denom())
    }

    pub fn add(&self, other: &BigRatio) -> BigRatio {
        BigRatio::new(
            &self.num * &other.den + &other.num * &self.den,
            &self.den * &other.den,
        )
    }

    pub fn sub(&self, other: &BigRatio) -> BigRatio {
        BigRatio::new(
            &self.num * &other.den - &other.num * &self.den,
            &self.den * &other.den,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

/// Σ 1/k_i as an unreduced fraction, by pairwise (balanced) combination.
/// All k_i must be nonzero.
pub fn unit_fraction_sum(ks: &[Int]) -> BigRatio {
    fn rec(ks: &[Int]) -> (Int, Int) {
        match ks.len() {
            0 => (Int::zero(), Int::one()),
            1 => (Int::one(), ks[0].clone()),
            len => {
                let (a, b) = ks.split_at(len / 2);
                let (n1, d1) = rec(a);
                let (n2, d2) = rec(b);
                (&n1 * &d2 + &n2 * &d1, d1 * d2)
            }
        }
    }
    let (num, den) = rec(ks);
    BigRatio::new(num, den)
}

/// Compensated (Neumaier) accumulator for nonnegative f64 series.
#[derive(Debug, Clone, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum { sum: 0.0, c: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// ⌈a/b⌉ for positive b.
pub fn ceil_div(a: &Int, b: &Int) -> Int {
    assert!(b.is_positive());
    let (q, r) = num_integer::Integer::div_rem(a, b);
    if r.is_zero() || a.is_negative() {
        q
    } else {
        q + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod1_and_norm() {
        let x = rat_from_i64(7, 3);
        assert_eq!(mod1(&x), rat_from_i64(1, 3));
        assert_eq!(circle_norm(&x), rat_from_i64(1, 3));
        assert_eq!(circle_norm(&rat_from_i64(3, 4)), rat_from_i64(1, 4));
        assert_eq!(circle_norm(&rat_from_i64(-3, 4)), rat_from_i64(1, 4));
        assert!(circle_norm(&Rat::zero()).is_zero());
    }

    #[test]
    fn unit_fractions_match_sequential() {
        let ks: Vec<Int> = (1..=50u32).map(Int::from).collect();
        let s = unit_fraction_sum(&ks).to_rat();
        let mut expect = Rat::zero();
        for k in &ks {
            expect += Rat::new(Int::one(), k.clone());
        }
        assert_eq!(s, expect);
    }

    #[test]
    fn unit_fractions_random_lists() {
        use proptest::prelude::*;
        use proptest::test_runner::{Config, TestRunner};
        let mut runner = TestRunner::new(Config::with_cases(50));
        runner
            .run(&proptest::collection::vec(1i64..1_000_000, 1..60), |ks| {
                let ks: Vec<Int> = ks.into_iter().map(Int::from).collect();
                let s = unit_fraction_sum(&ks).to_rat();
                let mut expect = Rat::zero();
                for k in &ks {
                    expect += Rat::new(Int::one(), k.clone());
                }
                prop_assert_eq!(s, expect);
                Ok(())
            })
            .unwrap();
    }

    #[test]
    fn big_ratio_f64_roundtrip() {
        let x = rat_from_i64(-355, 113);
        assert!((rat_to_f64(&x) + 3.14159292).abs() < 1e-7);
        // values far beyond f64 range
        let huge = Int::from(10u32).pow(500);
        let r = BigRatio::new(huge.clone() * 3, huge);
        assert!((r.to_f64() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ln_big_large() {
        let x = Int::from(10u32).pow(100);
        assert!((ln_big(&x) - 100.0 * 10f64.ln()).abs() < 1e-9);
    }
}
