//! The uniform ergodicity constants `(C, ρ)`.

use num_bigint::BigInt;
use serde::Serialize;

use crate::kernel::sets;
use crate::rat::{rat, Interval, Rat};

/// Precision of the dyadic bracket around `ρ₁^{1/N₁}`.
pub const ROOT_BITS: u32 = 128;

/// Inputs and outputs of the contraction argument. `rho` is an upper bound
/// of `ρ₁^{1/N₁}` on a grid of spacing `2^-ROOT_BITS`, `rho_lower` the grid
/// point just below it.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CertifiedRate {
    pub s0: Interval,
    pub n0: u32,
    pub beta0: Rat,
    pub alpha1: Rat,
    pub alpha2: Rat,
    pub rho1: Rat,
    pub n1: u32,
    pub rho: Rat,
    pub rho_lower: Rat,
    pub c: Rat,
}

impl CertifiedRate {
    pub fn rho_f64(&self) -> f64 {
        self.rho.to_f64()
    }

    pub fn c_f64(&self) -> f64 {
        self.c.to_f64()
    }

    /// `1 - ρ₁`, which is far below double precision resolution near 1.
    pub fn one_minus_rho1(&self) -> Rat {
        Rat::one() - &self.rho1
    }

    /// `1 - ρ`, from the upper bound (so a lower bound on the true gap).
    pub fn one_minus_rho(&self) -> Rat {
        Rat::one() - &self.rho
    }
}

/// Smallest `k / 2^bits` whose `n`-th power is at least `r`, for `0 < r < 1`.
/// Returns `(lower, upper)` with `lower^n < r <= upper^n`.
pub fn dyadic_root_bracket(r: &Rat, n: i32, bits: u32) -> (Rat, Rat) {
    assert!(r.is_positive() && *r < Rat::one() && n >= 1);
    let scale = BigInt::from(1) << bits;
    let at = |k: &BigInt| Rat::from_big(k.clone(), scale.clone());
    // invariant: at(lo)^n < r <= at(hi)^n
    let mut lo = BigInt::from(0);
    let mut hi = scale.clone();
    while &hi - &lo > BigInt::from(1) {
        let mid: BigInt = (&lo + &hi) >> 1;
        if at(&mid).pow(n) >= *r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (at(&lo), at(&hi))
}

/// Constants from the stated lower bounds: `β₀ = 1/(3⁵·2⁹)`,
/// `α₁ = β₀²/2` (reaching `S₀` in `N₀ = 15` steps), `α₂ = 1/4` (meeting
/// inside `S₀`), `ρ₁ = 1 - α₁²α₂`, `N₁ = N₀ + 1`, `ρ = ρ₁^{1/N₁}`,
/// `C = 1/ρ`.
pub fn certified_params() -> CertifiedRate {
    let beta0 = rat(1, 3i64.pow(5) * 2i64.pow(9));
    let alpha1 = &beta0 * &beta0 / Rat::from_int(2);
    let alpha2 = rat(1, 4);
    let rho1 = Rat::one() - &alpha1 * &alpha1 * &alpha2;
    let n0 = 15;
    let n1 = n0 + 1;
    let (rho_lower, rho) = dyadic_root_bracket(&rho1, n1 as i32, ROOT_BITS);
    let c = rho.recip();
    CertifiedRate {
        s0: sets::s0(),
        n0,
        beta0,
        alpha1,
        alpha2,
        rho1,
        n1,
        rho,
        rho_lower,
        c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stated_constants() {
        let r = certified_params();
        assert_eq!(r.beta0, rat(1, 124_416));
        assert_eq!(r.alpha1, rat(1, 30_958_682_112));
        assert!((r.alpha1.to_f64() - 3e-11).abs() < 0.3e-11);
        assert_eq!(r.one_minus_rho1(), &r.alpha1 * &r.alpha1 / Rat::from_int(4));
        assert_eq!(r.n0, 15);
        assert_eq!(r.n1, 16);
    }

    #[test]
    fn root_is_bracketed_strictly_below_one() {
        let r = certified_params();
        assert!(r.rho1.is_positive() && r.rho1 < Rat::one());
        assert!(r.rho < Rat::one());
        assert!(r.rho.pow(16) >= r.rho1);
        assert!(r.rho_lower.pow(16) < r.rho1);
        assert!(r.c > Rat::one());
        // 1 - ρ is close to (1 - ρ₁)/16
        let ratio = (r.one_minus_rho() * Rat::from_int(16) / r.one_minus_rho1()).to_f64();
        assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn bracket_of_a_perfect_power() {
        let (lo, hi) = dyadic_root_bracket(&rat(1, 16), 4, 10);
        assert_eq!(hi, rat(1, 2));
        assert_eq!(lo, rat(511, 1024));
    }
}
