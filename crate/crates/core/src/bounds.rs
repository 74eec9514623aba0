//! Outward-rounded fixed-point enclosures of rational values.
//!
//! A [`Bounds`] holds integers `lo <= hi` with `lo / 2^64 <= x <= hi / 2^64` for the
//! enclosed exact value `x`. Sums of enclosures enclose the exact sum, so
//! long partial-sum traces can be followed without growing denominators while
//! every strict inequality decided from them remains a proof about the exact value.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::rational::Rational;

pub const FRAC_BITS: u32 = 64;

/// Terms of magnitude `2^36` or more are rejected, so sums of up to `2^26` admitted
/// terms stay inside `i128`.
const LIMIT: i128 = 1 << 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("value outside the fixed-point range")]
pub struct RangeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Bounds {
    pub lo: i128,
    pub hi: i128,
}

impl Bounds {
    pub const ZERO: Bounds = Bounds { lo: 0, hi: 0 };

    /// The tightest enclosure of `x` on the `2^-64` grid.
    #[inline]
    pub fn of(x: &Rational) -> Result<Bounds, RangeError> {
        if let Some((num, den)) = x.as_small() {
            let mag = (num.unsigned_abs() as u128) << FRAC_BITS;
            let d = den as u128;
            let q = mag / d;
            if q >= LIMIT as u128 {
                return Err(RangeError);
            }
            let exact = q * d == mag;
            let q = q as i128;
            return Ok(if num >= 0 {
                Bounds {
                    lo: q,
                    hi: if exact { q } else { q + 1 },
                }
            } else {
                Bounds {
                    lo: if exact { -q } else { -q - 1 },
                    hi: -q,
                }
            });
        }
        let scaled = x.numer() << FRAC_BITS;
        let den = BigInt::from(x.denom());
        let (q, r) = scaled.div_mod_floor(&den);
        let lo = q.to_i128().ok_or(RangeError)?;
        if !(-LIMIT..LIMIT).contains(&lo) {
            return Err(RangeError);
        }
        let hi = if r == BigInt::from(0) { lo } else { lo + 1 };
        Ok(Bounds { lo, hi })
    }

    #[inline]
    pub fn exact_zero(&self) -> bool {
        self.lo == 0 && self.hi == 0
    }

    #[inline]
    pub fn add(self, o: Bounds) -> Bounds {
        Bounds {
            lo: self.lo + o.lo,
            hi: self.hi + o.hi,
        }
    }

    #[inline]
    pub fn sub(self, o: Bounds) -> Bounds {
        Bounds {
            lo: self.lo - o.hi,
            hi: self.hi - o.lo,
        }
    }

    #[inline]
    pub fn neg(self) -> Bounds {
        Bounds {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    pub fn width(&self) -> i128 {
        self.hi - self.lo
    }

    pub fn lo_rational(&self) -> Rational {
        fixed_to_rational(self.lo)
    }

    pub fn hi_rational(&self) -> Rational {
        fixed_to_rational(self.hi)
    }

    /// Midpoint of the enclosure as an exact dyadic rational.
    pub fn mid_rational(&self) -> Rational {
        let num = BigInt::from(self.lo) + BigInt::from(self.hi);
        let den = BigInt::from(1u8) << (FRAC_BITS + 1);
        Rational::from_bigints(num, den).expect("nonzero")
    }

    /// Certainly greater than the threshold.
    #[inline]
    pub fn gt(&self, t: &Threshold) -> bool {
        self.lo > t.ceil
    }

    /// Certainly less than the threshold.
    #[inline]
    pub fn lt(&self, t: &Threshold) -> bool {
        self.hi < t.floor
    }

    /// Certainly at least the threshold.
    #[inline]
    pub fn ge(&self, t: &Threshold) -> bool {
        self.lo >= t.ceil
    }

    /// Certainly at most the threshold.
    #[inline]
    pub fn le(&self, t: &Threshold) -> bool {
        self.hi <= t.floor
    }
}

/// Exact `⌊2^64/d⌋` and its remainder for `d, d+1, d+2, …`.
///
/// Past `2^22` consecutive quotients differ by `≈ 2^64/d²`, and that difference
/// moves by at most 2 per step, so each step reuses the previous difference and
/// corrects it against the exact remainder. No division is needed.
#[derive(Debug, Clone, Copy)]
pub struct ReciprocalWalk {
    d: u64,
    q: i128,
    r: i128,
    step: i64,
}

const WALK_DIRECT_BELOW: u64 = 1 << 22;
const ONE: i128 = 1 << FRAC_BITS;

impl ReciprocalWalk {
    pub fn new(d: u64) -> Self {
        assert!(d > 0, "zero denominator");
        let q = ONE / d as i128;
        let step = if d < u64::MAX {
            (q - ONE / (d as i128 + 1)) as i64
        } else {
            0
        };
        ReciprocalWalk {
            d,
            q,
            r: ONE - q * d as i128,
            step,
        }
    }

    /// Enclosure of `1/d` on the grid.
    #[inline]
    pub fn bounds(&self) -> Bounds {
        Bounds {
            lo: self.q,
            hi: self.q + (self.r != 0) as i128,
        }
    }

    #[inline]
    pub fn advance(&mut self) {
        let d = self.d + 1;
        if d < WALK_DIRECT_BELOW {
            *self = Self::new(d);
            return;
        }
        // here q < 2^42 and r < d, so everything fits i64;
        // 2^64 = q·(d−1) + r gives 2^64 − (q−k)·d = r − q + k·d
        let (q, di) = (self.q as i64, d as i64);
        let mut k = self.step;
        let mut r = self.r as i64 - q + k * di;
        while r < 0 {
            k += 1;
            r += di;
        }
        while r >= di {
            k -= 1;
            r -= di;
        }
        *self = ReciprocalWalk {
            d,
            q: (q - k) as i128,
            r: r as i128,
            step: k,
        };
    }
}

pub fn fixed_to_rational(v: i128) -> Rational {
    let den = BigInt::from(1u8) << FRAC_BITS;
    Rational::from_bigints(BigInt::from(v), den).expect("nonzero")
}

/// A rational comparison level, rounded down and up onto the fixed-point grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    pub floor: i128,
    pub ceil: i128,
}

impl Threshold {
    pub fn new(x: &Rational) -> Result<Threshold, RangeError> {
        let b = Bounds::of(x)?;
        Ok(Threshold {
            floor: b.lo,
            ceil: b.hi,
        })
    }

    /// A threshold given directly on the grid.
    pub fn fixed(v: i128) -> Threshold {
        Threshold { floor: v, ceil: v }
    }
}
