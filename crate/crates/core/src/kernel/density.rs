//! Piecewise-constant probability densities on `[0, 1)` with rational
//! breakpoints, and plain cell-mass vectors on a uniform grid.

use std::fmt;

use crate::error::{Error, Result};
use crate::rat::{Interval, Rat};

/// Density with value `values[i]` on `[breaks[i], breaks[i+1])`.
/// `breaks` starts at 0, ends at 1, is strictly increasing, and adjacent
/// pieces never share a value.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PwConstDensity {
    breaks: Vec<Rat>,
    values: Vec<Rat>,
}

impl PwConstDensity {
    pub fn uniform() -> Self {
        PwConstDensity {
            breaks: vec![Rat::zero(), Rat::one()],
            values: vec![Rat::one()],
        }
    }

    pub fn new(breaks: Vec<Rat>, values: Vec<Rat>) -> Result<Self> {
        let ok = breaks.len() == values.len() + 1
            && breaks.first().is_some_and(Rat::is_zero)
            && breaks.last() == Some(&Rat::one())
            && breaks.windows(2).all(|w| w[0] < w[1])
            && values.iter().all(|v| !v.is_negative());
        if !ok {
            return Err(Error::InvalidParameter(
                "density needs increasing breaks from 0 to 1 and nonnegative values".into(),
            ));
        }
        Ok(Self::canonical(breaks, values))
    }

    fn canonical(breaks: Vec<Rat>, values: Vec<Rat>) -> Self {
        let mut b = vec![breaks[0].clone()];
        let mut v: Vec<Rat> = Vec::with_capacity(values.len());
        for (i, val) in values.into_iter().enumerate() {
            if v.last() == Some(&val) {
                *b.last_mut().unwrap() = breaks[i + 1].clone();
            } else {
                v.push(val);
                b.push(breaks[i + 1].clone());
            }
        }
        PwConstDensity { breaks: b, values: v }
    }

    /// Superposition of arcs `(start, len, height)`: height `h` on
    /// `[start, start + len) mod 1`, with `len` in `[0, 1]`.
    pub fn from_arcs(arcs: &[(Rat, Rat, Rat)]) -> Self {
        let mut cuts = vec![Rat::zero(), Rat::one()];
        for (start, len, _) in arcs {
            cuts.push(start.frac());
            cuts.push((start + len).frac());
        }
        cuts.sort();
        cuts.dedup();
        let values = cuts
            .windows(2)
            .map(|w| {
                arcs.iter()
                    .filter(|(start, len, _)| {
                        let len_one = *len >= Rat::one();
                        len_one || (&w[0] - start).frac() < *len
                    })
                    .map(|(_, _, h)| h.clone())
                    .sum()
            })
            .collect();
        Self::canonical(cuts, values)
    }

    pub fn pieces(&self) -> impl Iterator<Item = (&Rat, &Rat, &Rat)> {
        self.breaks
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (&w[0], &w[1], v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mass(&self) -> Rat {
        self.pieces().map(|(lo, hi, v)| (hi - lo) * v).sum()
    }

    pub fn mass_on(&self, set: &Interval) -> Rat {
        self.pieces()
            .map(|(lo, hi, v)| crate::rat::overlap(lo, hi, &set.lo, &set.hi) * v)
            .sum()
    }

    /// `∫ |p - q|`, exactly.
    pub fn tv(&self, other: &PwConstDensity) -> Rat {
        let mut cuts: Vec<Rat> = self.breaks.iter().chain(&other.breaks).cloned().collect();
        cuts.sort();
        cuts.dedup();
        let mut total = Rat::zero();
        let (mut i, mut j) = (0, 0);
        for w in cuts.windows(2) {
            while self.breaks[i + 1] <= w[0] {
                i += 1;
            }
            while other.breaks[j + 1] <= w[0] {
                j += 1;
            }
            total += &((&self.values[i] - &other.values[j]).abs() * (&w[1] - &w[0]));
        }
        total
    }

    /// Exact masses of the `m` uniform cells, rounded to doubles.
    pub fn to_cells(&self, m: usize) -> Vec<f64> {
        (0..m)
            .map(|i| {
                let cell = Interval::of(Rat::new(i as i64, m as i64), Rat::new(i as i64 + 1, m as i64));
                self.mass_on(&cell).to_f64()
            })
            .collect()
    }

    /// CSV with header `lo,hi,value_exact,value_float`.
    pub fn to_csv(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PwConstDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lo,hi,value_exact,value_float")?;
        for (lo, hi, v) in self.pieces() {
            writeln!(f, "{lo},{hi},{v},{}", v.to_f64())?;
        }
        Ok(())
    }
}

/// Cell-mass vectors on a uniform grid of `m` cells.
pub mod cells {
    use crate::error::{Error, Result};

    pub fn uniform(m: usize) -> Vec<f64> {
        vec![1.0 / m as f64; m]
    }

    pub fn point_mass(m: usize, cell: usize) -> Vec<f64> {
        let mut d = vec![0.0; m];
        d[cell] = 1.0;
        d
    }

    /// Cell containing `x` in `[0, 1)`.
    pub fn cell_of(m: usize, x: f64) -> usize {
        ((x * m as f64) as usize).min(m - 1)
    }

    pub fn mass(d: &[f64]) -> f64 {
        d.iter().sum()
    }

    /// `Σ |a_i - b_i|`, summed left to right.
    pub fn tv(a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::InvalidParameter(format!(
                "grids differ: {} vs {} cells",
                a.len(),
                b.len()
            )));
        }
        Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
    }

    /// Mass of cells `[lo_cell, hi_cell)`.
    pub fn mass_between(d: &[f64], lo_cell: usize, hi_cell: usize) -> f64 {
        d[lo_cell..hi_cell].iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Kernel;
    use crate::rat::rat;

    #[test]
    fn one_step_density_at_zero() {
        let d = Kernel::default().one_step_density(&Rat::zero()).unwrap();
        let pieces: Vec<_> = d.pieces().map(|(l, h, v)| (l.clone(), h.clone(), v.clone())).collect();
        assert_eq!(
            pieces,
            vec![
                (Rat::zero(), rat(17, 30), Rat::zero()),
                (rat(17, 30), rat(19, 30), Rat::from_int(15)),
                (rat(19, 30), Rat::one(), Rat::zero()),
            ]
        );
        assert_eq!(d.mass(), Rat::one());
    }

    #[test]
    fn one_step_density_wraps() {
        let d = Kernel::default().one_step_density(&rat(24, 30)).unwrap();
        let pieces: Vec<_> = d.pieces().map(|(l, h, v)| (l.clone(), h.clone(), v.clone())).collect();
        assert_eq!(
            pieces,
            vec![
                (Rat::zero(), rat(1, 30), Rat::from_int(15)),
                (rat(1, 30), rat(29, 30), Rat::zero()),
                (rat(29, 30), Rat::one(), Rat::from_int(15)),
            ]
        );
        assert_eq!(d.mass(), Rat::one());
    }

    #[test]
    fn full_width_noise_gives_uniform() {
        let k = Kernel::with_params(rat(17, 30), Rat::one()).unwrap();
        for i in 0..30 {
            assert_eq!(k.one_step_density(&rat(i, 30)).unwrap(), PwConstDensity::uniform());
        }
    }

    #[test]
    fn tv_examples() {
        let u = PwConstDensity::uniform();
        let d = Kernel::default().one_step_density(&Rat::zero()).unwrap();
        assert_eq!(u.tv(&u), Rat::zero());
        assert_eq!(u.tv(&d), rat(56, 30));
        assert_eq!(d.tv(&u), rat(56, 30));
        let e = Kernel::default().one_step_density(&rat(24, 30)).unwrap();
        assert_eq!(d.tv(&e), Rat::from_int(2));
    }

    #[test]
    fn cell_tv_rejects_mismatched_grids() {
        assert!(cells::tv(&cells::uniform(30), &cells::uniform(60)).is_err());
        let t = cells::tv(&cells::uniform(30), &cells::point_mass(30, 3)).unwrap();
        assert!((t - 2.0 * 29.0 / 30.0).abs() < 1e-14);
    }

    #[test]
    fn to_cells_preserves_mass() {
        let d = Kernel::default().one_step_density(&rat(24, 30)).unwrap();
        let c = d.to_cells(30);
        assert_eq!(c[0], 0.5);
        assert_eq!(c[29], 0.5);
        assert!((cells::mass(&c) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn new_validates() {
        assert!(PwConstDensity::new(vec![Rat::zero(), Rat::one()], vec![rat(-1, 2)]).is_err());
        assert!(PwConstDensity::new(vec![Rat::zero(), rat(1, 2)], vec![Rat::one()]).is_err());
        let d = PwConstDensity::new(
            vec![Rat::zero(), rat(1, 2), Rat::one()],
            vec![Rat::one(), Rat::one()],
        )
        .unwrap();
        assert_eq!(d, PwConstDensity::uniform());
    }
}
