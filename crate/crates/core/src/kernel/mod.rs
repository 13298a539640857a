//! The transition kernel `K(x, ·)`: the law of `g(x) + ξ mod 1` with
//! `g(x) = a*x + b mod 1` and `ξ` uniform on `[0, w]`.

pub mod density;
pub mod mc;
pub mod sets;
pub mod ulam;

use crate::error::{Error, Result};
use crate::exact_map::{mod1_affine, PwAffineMap};
use crate::rat::{rat, Interval, Rat};

use density::PwConstDensity;

/// Uniform noise on `[0, width]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NoiseModel {
    width: Rat,
}

impl NoiseModel {
    pub fn new(width: Rat) -> Result<Self> {
        if !width.is_positive() || width > Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "noise width {width} must lie in (0, 1]"
            )));
        }
        Ok(NoiseModel { width })
    }

    pub fn width(&self) -> &Rat {
        &self.width
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { width: rat(1, 15) }
    }
}

/// A noisy mod-1 affine map. Exact parameters plus cached doubles for the
/// simulation paths.
#[derive(Clone, Debug)]
pub struct Kernel {
    slope: Rat,
    offset: Rat,
    noise: NoiseModel,
    map: PwAffineMap,
    slope_f: f64,
    offset_f: f64,
    width_f: f64,
}

impl PartialEq for Kernel {
    fn eq(&self, other: &Self) -> bool {
        self.slope == other.slope && self.offset == other.offset && self.noise == other.noise
    }
}

impl Default for Kernel {
    /// `a = 1/2`, `b = 17/30`, `w = 1/15`.
    fn default() -> Self {
        Kernel::new(rat(1, 2), rat(17, 30), NoiseModel::default()).expect("default kernel")
    }
}

impl Kernel {
    pub fn new(slope: Rat, offset: Rat, noise: NoiseModel) -> Result<Self> {
        let map = mod1_affine(&slope, &offset)?;
        Ok(Kernel {
            slope_f: slope.to_f64(),
            offset_f: offset.to_f64(),
            width_f: noise.width().to_f64(),
            slope,
            offset,
            noise,
            map,
        })
    }

    /// Slope 1/2 with the given offset and noise width.
    pub fn with_params(offset: Rat, width: Rat) -> Result<Self> {
        Kernel::new(rat(1, 2), offset, NoiseModel::new(width)?)
    }

    pub fn slope(&self) -> &Rat {
        &self.slope
    }

    pub fn offset(&self) -> &Rat {
        &self.offset
    }

    pub fn width(&self) -> &Rat {
        self.noise.width()
    }

    pub fn width_f64(&self) -> f64 {
        self.width_f
    }

    pub fn map(&self) -> &PwAffineMap {
        &self.map
    }

    /// The unperturbed map `g`.
    pub fn g(&self, x: &Rat) -> Result<Rat> {
        self.map.eval(x)
    }

    fn check_noise(&self, omega: &Rat) -> Result<()> {
        if omega.is_negative() || omega > self.width() {
            return Err(Error::Domain(format!(
                "noise value {omega} is outside [0, {}]",
                self.width()
            )));
        }
        Ok(())
    }

    /// `g(x) + ω mod 1`, exactly.
    pub fn step_sample(&self, x: &Rat, omega: &Rat) -> Result<Rat> {
        self.check_noise(omega)?;
        Ok((self.g(x)? + omega).frac())
    }

    /// Checked double-precision step.
    pub fn step_sample_f64(&self, x: f64, omega: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(format!("{x} is not in [0, 1)")));
        }
        if !(0.0..=self.width_f).contains(&omega) {
            return Err(Error::Domain(format!("noise value {omega} is out of range")));
        }
        Ok(self.step_unchecked(x, omega))
    }

    /// Hot-path step for simulation; `a*x + b + ω` reduced mod 1.
    #[inline]
    pub fn step_unchecked(&self, x: f64, omega: f64) -> f64 {
        let v = self.slope_f * x + self.offset_f + omega;
        let r = v - v.floor();
        // v - floor(v) can round up to 1.0 only for tiny negative v
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    }

    /// `g` in double precision.
    #[inline]
    pub fn g_f64(&self, x: f64) -> f64 {
        self.step_unchecked(x, 0.0)
    }

    /// Density `1/w` on the arc `[g(x), g(x) + w) mod 1`.
    pub fn one_step_density(&self, x: &Rat) -> Result<PwConstDensity> {
        let start = self.g(x)?;
        Ok(PwConstDensity::from_arcs(&[(start, self.width().clone(), self.width().recip())]))
    }

    /// `K(x, J)` exactly.
    pub fn one_step_prob(&self, x: &Rat, target: &Interval) -> Result<Rat> {
        let start = self.g(x)?;
        Ok(target.arc_overlap(&start, self.width()) / self.width())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_map::mod1_affine;

    #[test]
    fn step_examples() {
        let k = Kernel::default();
        assert_eq!(k.step_sample(&Rat::zero(), &Rat::zero()).unwrap(), rat(17, 30));
        assert_eq!(k.step_sample(&rat(24, 30), &rat(2, 30)).unwrap(), rat(1, 30));
        assert!(k.step_sample(&rat(1, 2), &rat(3, 30)).is_err());
        assert!(k.step_sample(&Rat::one(), &Rat::zero()).is_err());
        assert!(k.step_sample_f64(0.5, 0.1).is_err());
        assert!(k.step_sample_f64(1.0, 0.0).is_err());
    }

    #[test]
    fn zero_noise_is_the_map() {
        let k = Kernel::default();
        let g = mod1_affine(&rat(1, 2), &rat(17, 30)).unwrap();
        for i in 0..300 {
            let x = rat(i, 300);
            assert_eq!(k.step_sample(&x, &Rat::zero()).unwrap(), g.eval(&x).unwrap());
        }
    }

    #[test]
    fn noise_width_validated() {
        assert!(NoiseModel::new(Rat::zero()).is_err());
        assert!(NoiseModel::new(rat(3, 2)).is_err());
        assert!(NoiseModel::new(Rat::one()).is_ok());
    }

    #[test]
    fn one_step_prob_examples() {
        let k = Kernel::default();
        let s0 = sets::s0();
        assert_eq!(k.one_step_prob(&rat(24, 30), &s0).unwrap(), rat(1, 2));
        assert_eq!(k.one_step_prob(&rat(1, 3), &Interval::unit()).unwrap(), Rat::one());
    }
}
