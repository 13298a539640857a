//! The named subsets of `[0, 1)` used by the return-time and entrance
//! arguments for the default process (`b = 17/30`, `w = 1/15`).
//!
//! All are stored half-open; the closed versions differ by null sets.

use crate::rat::{rat, Interval, Rat};

/// Basic set `[0, 3/30]`.
pub fn s0() -> Interval {
    Interval::of(Rat::zero(), rat(3, 30))
}

/// `[0, 1/45]`.
pub fn t0() -> Interval {
    Interval::of(Rat::zero(), rat(1, 45))
}

/// `[119/120, 1)`.
pub fn t1() -> Interval {
    Interval::of(rat(119, 120), Rat::one())
}

/// `[24/30, 119/120]`.
pub fn t2() -> Interval {
    Interval::of(rat(24, 30), rat(119, 120))
}

/// `[12/30, 24/30]`.
pub fn t3() -> Interval {
    Interval::of(rat(12, 30), rat(24, 30))
}

/// `[3/30, 12/30]`.
pub fn t4() -> Interval {
    Interval::of(rat(3, 30), rat(12, 30))
}

/// `T2 ∪ T1 = [24/30, 1)`.
pub fn t2_t1() -> Interval {
    Interval::of(rat(24, 30), Rat::one())
}
