//! Exact nonnegative rational arithmetic on `u128`.
//!
//! The oracle's guardrails (tiny n, mu and window sizes) keep every
//! numerator and denominator far below the overflow boundary; checked
//! operations turn a violated guardrail into a loud failure instead of a
//! silently wrong probability.

use std::ops::{Add, Mul, Sub};

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Reduced nonnegative fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac {
    num: u128,
    den: u128,
}

impl Frac {
    pub const ZERO: Frac = Frac { num: 0, den: 1 };
    pub const ONE: Frac = Frac { num: 1, den: 1 };

    pub fn new(num: u128, den: u128) -> Frac {
        assert!(den != 0, "fraction denominator must be nonzero");
        if num == 0 {
            return Frac::ZERO;
        }
        let g = gcd(num, den);
        Frac {
            num: num / g,
            den: den / g,
        }
    }

    pub fn num(&self) -> u128 {
        self.num
    }

    pub fn den(&self) -> u128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Add for Frac {
    type Output = Frac;

    fn add(self, rhs: Frac) -> Frac {
        let g = gcd(self.den, rhs.den);
        let den = (self.den / g)
            .checked_mul(rhs.den)
            .expect("oracle arithmetic overflow");
        let a = self
            .num
            .checked_mul(rhs.den / g)
            .expect("oracle arithmetic overflow");
        let b = rhs
            .num
            .checked_mul(self.den / g)
            .expect("oracle arithmetic overflow");
        Frac::new(a.checked_add(b).expect("oracle arithmetic overflow"), den)
    }
}

impl Sub for Frac {
    type Output = Frac;

    fn sub(self, rhs: Frac) -> Frac {
        let g = gcd(self.den, rhs.den);
        let den = (self.den / g)
            .checked_mul(rhs.den)
            .expect("oracle arithmetic overflow");
        let a = self
            .num
            .checked_mul(rhs.den / g)
            .expect("oracle arithmetic overflow");
        let b = rhs
            .num
            .checked_mul(self.den / g)
            .expect("oracle arithmetic overflow");
        Frac::new(a.checked_sub(b).expect("fraction subtraction underflow"), den)
    }
}

impl Mul for Frac {
    type Output = Frac;

    fn mul(self, rhs: Frac) -> Frac {
        // cross-reduce before multiplying to delay overflow
        let g1 = gcd(self.num, rhs.den);
        let g2 = gcd(rhs.num, self.den);
        let num = (self.num / g1)
            .checked_mul(rhs.num / g2)
            .expect("oracle arithmetic overflow");
        let den = (self.den / g2)
            .checked_mul(rhs.den / g1)
            .expect("oracle arithmetic overflow");
        Frac::new(num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_reduces() {
        let half = Frac::new(2, 4);
        assert_eq!((half.num(), half.den()), (1, 2));
        let third = Frac::new(1, 3);
        let sum = half + third;
        assert_eq!((sum.num(), sum.den()), (5, 6));
        let prod = half * third;
        assert_eq!((prod.num(), prod.den()), (1, 6));
        assert_eq!((sum - third), half);
        assert_eq!(Frac::new(0, 7), Frac::ZERO);
    }

    #[test]
    fn to_f64_is_exact_for_dyadics() {
        assert_eq!(Frac::new(50, 256).to_f64(), 0.1953125);
    }
}
