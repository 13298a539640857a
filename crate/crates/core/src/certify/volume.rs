//! Distribution of weighted sums of i.i.d. uniforms.

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::rat::Rat;

/// `P(Σ c_i ω_i < t)` with `ω_i` i.i.d. uniform on `[0, s]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolytopeSpec {
    coeffs: Vec<Rat>,
    width: Rat,
    threshold: Rat,
}

impl PolytopeSpec {
    pub const MAX_DIM: usize = 16;

    pub fn new(coeffs: Vec<Rat>, width: Rat, threshold: Rat) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > Self::MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "dimension {} outside 1..={}",
                coeffs.len(),
                Self::MAX_DIM
            )));
        }
        if coeffs.iter().any(|c| !c.is_positive()) || !width.is_positive() {
            return Err(Error::InvalidParameter(
                "coefficients and box width must be positive".into(),
            ));
        }
        Ok(PolytopeSpec { coeffs, width, threshold })
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn width(&self) -> &Rat {
        &self.width
    }

    pub fn threshold(&self) -> &Rat {
        &self.threshold
    }

    pub fn with_threshold(&self, threshold: Rat) -> Self {
        PolytopeSpec { threshold, ..self.clone() }
    }

    /// Largest value of the weighted sum, `s Σ c_i`.
    pub fn support_max(&self) -> Rat {
        &self.width * self.coeffs.iter().sum::<Rat>()
    }

    /// Every threshold at which the CDF changes polynomial piece:
    /// `s Σ_{j in J} c_j` over all subsets `J`.
    pub fn knots(&self) -> Vec<Rat> {
        let d = self.coeffs.len();
        let mut out: Vec<Rat> = (0u32..1 << d)
            .map(|mask| &self.width * subset_sum(&self.coeffs, mask))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

fn subset_sum(coeffs: &[Rat], mask: u32) -> Rat {
    coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, c)| c)
        .sum()
}

/// Inclusion–exclusion over the box vertices:
/// `Vol = (d! Π c_i)^{-1} Σ_J (-1)^{|J|} max(0, t - s Σ_{j in J} c_j)^d`,
/// divided by the box volume `s^d`.
pub fn box_simplex_prob(spec: &PolytopeSpec) -> Rat {
    let t = &spec.threshold;
    if !t.is_positive() {
        return Rat::zero();
    }
    if *t >= spec.support_max() {
        return Rat::one();
    }
    let d = spec.coeffs.len();
    let mut acc = Rat::zero();
    for mask in 0u32..1 << d {
        let slack = (t - &spec.width * subset_sum(&spec.coeffs, mask)).positive_part();
        if slack.is_zero() {
            continue;
        }
        let term = slack.pow(d as i32);
        if mask.count_ones() % 2 == 0 {
            acc += &term;
        } else {
            acc -= &term;
        }
    }
    let factorial: i64 = (1..=d as i64).product();
    let prod: Rat = spec.coeffs.iter().fold(Rat::one(), |p, c| p * c);
    acc / (Rat::from_int(factorial) * prod * spec.width.pow(d as i32))
}

/// The three-step noise aggregate `a²ω1 + aω2 + ω3` of a kernel with
/// slope `a` and noise width `w`, at threshold 0.
pub fn three_step_noise(kernel: &Kernel) -> PolytopeSpec {
    let a = kernel.slope();
    PolytopeSpec::new(
        vec![a * a, a.clone(), Rat::one()],
        kernel.width().clone(),
        Rat::zero(),
    )
    .expect("positive slope and width")
}

/// CDF of `ω1/4 + ω2/2 + ω3` for the kernel's noise (coefficients follow
/// the kernel slope in general).
pub fn omega_sum_cdf(kernel: &Kernel, t: &Rat) -> Rat {
    box_simplex_prob(&three_step_noise(kernel).with_threshold(t.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn spec(t: Rat) -> PolytopeSpec {
        PolytopeSpec::new(vec![rat(1, 4), rat(1, 2), Rat::one()], rat(1, 15), t).unwrap()
    }

    #[test]
    fn reference_volumes() {
        assert_eq!(box_simplex_prob(&spec(rat(1, 180))), rat(1, 1296));
        assert_eq!(box_simplex_prob(&spec(rat(1, 60))), rat(1, 48));
        assert_eq!(box_simplex_prob(&spec(rat(1, 120))), rat(1, 384));
    }

    #[test]
    fn degenerate_thresholds() {
        assert_eq!(box_simplex_prob(&spec(Rat::zero())), Rat::zero());
        assert_eq!(box_simplex_prob(&spec(rat(-1, 5))), Rat::zero());
        assert_eq!(box_simplex_prob(&spec(rat(7, 60))), Rat::one());
        assert_eq!(box_simplex_prob(&spec(Rat::one())), Rat::one());
    }

    #[test]
    fn clipped_vertex() {
        let k = Kernel::default();
        assert_eq!(omega_sum_cdf(&k, &rat(11, 360)), rat(67, 576));
        assert_eq!(omega_sum_cdf(&k, &rat(1, 180)), rat(1, 1296));
        assert_eq!(omega_sum_cdf(&k, &Rat::zero()), Rat::zero());
        assert_eq!(omega_sum_cdf(&k, &rat(7, 60)), Rat::one());
    }

    #[test]
    fn one_dimensional_is_uniform() {
        let s = PolytopeSpec::new(vec![rat(2, 1)], rat(1, 3), rat(1, 2)).unwrap();
        assert_eq!(box_simplex_prob(&s), rat(3, 4));
    }

    #[test]
    fn formula_is_continuous_at_the_top() {
        // the inclusion–exclusion sum itself reaches 1 at the top of the support
        let s = spec(rat(7, 60) - rat(1, 1_000_000_000));
        let p = box_simplex_prob(&s);
        assert!(p < Rat::one() && p > rat(999_999, 1_000_000));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(PolytopeSpec::new(vec![], rat(1, 15), Rat::zero()).is_err());
        assert!(PolytopeSpec::new(vec![Rat::zero()], rat(1, 15), Rat::zero()).is_err());
        assert!(PolytopeSpec::new(vec![Rat::one()], Rat::zero(), Rat::zero()).is_err());
    }

    #[test]
    fn knots_cover_vertices() {
        let knots = spec(Rat::zero()).knots();
        assert_eq!(knots.first(), Some(&Rat::zero()));
        assert_eq!(knots.last(), Some(&rat(7, 60)));
        assert_eq!(knots.len(), 8);
    }
}
