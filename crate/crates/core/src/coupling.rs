//! An explicit Markovian coupling of two copies of the chain.
//!
//! Both coordinates consume the same noise value `ω`. When the pair is
//! close (`0 <= a(y - x) <= w`, region S1), the first coordinate is shifted
//! by `a(y - x)` inside the noise window, reducing the shifted noise by `w`
//! when it overshoots. The shift makes `h1 = h2` exactly whenever
//! `ω + a(y - x) <= w`, while each coordinate still moves by a uniform
//! noise on the window. Region S3 is the mirror image for `h2`.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::density::PwConstDensity;
use crate::kernel::mc::{shard_rng, sharded_fold, Seed};
use crate::kernel::Kernel;
use crate::rat::Rat;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize)]
pub enum Region {
    S1,
    S2,
    S3,
    S4,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Coordinate {
    First,
    Second,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoupledPair {
    pub x: Rat,
    pub y: Rat,
}

impl CoupledPair {
    pub fn is_diagonal(&self) -> bool {
        self.x == self.y
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct MeetingReport {
    /// First step index with equal coordinates, or `None` if the run was
    /// censored at `nmax`.
    pub tau: Option<usize>,
    pub steps: usize,
    pub seed: u64,
}

fn check_state(x: &Rat) -> Result<()> {
    if x.is_negative() || *x >= Rat::one() {
        return Err(Error::Domain(format!("{x} is not in [0, 1)")));
    }
    Ok(())
}

pub fn region_of(kernel: &Kernel, x: &Rat, y: &Rat) -> Region {
    let w = kernel.width();
    let d = kernel.slope() * (y - x);
    if !d.is_negative() {
        if &d <= w {
            Region::S1
        } else {
            Region::S2
        }
    } else if &(-d) <= w {
        Region::S3
    } else {
        Region::S4
    }
}

/// `(h1(x, y, ω), h2(x, y, ω))`.
pub fn coupled_step(kernel: &Kernel, x: &Rat, y: &Rat, omega: &Rat) -> Result<CoupledPair> {
    check_state(x)?;
    check_state(y)?;
    let w = kernel.width();
    if omega.is_negative() || omega > w {
        return Err(Error::Domain(format!("noise value {omega} is outside [0, {w}]")));
    }
    let gx = kernel.g(x)?;
    let gy = kernel.g(y)?;
    let shifted = |g: &Rat, shift: Rat| {
        let s = omega + shift;
        if &s <= w {
            (g + s).frac()
        } else {
            (g + s - w).frac()
        }
    };
    let plain = |g: &Rat| (g + omega).frac();
    let pair = match region_of(kernel, x, y) {
        Region::S1 => CoupledPair {
            x: shifted(&gx, kernel.slope() * (y - x)),
            y: plain(&gy),
        },
        Region::S3 => CoupledPair {
            x: plain(&gx),
            y: shifted(&gy, kernel.slope() * (x - y)),
        },
        Region::S2 | Region::S4 => CoupledPair {
            x: plain(&gx),
            y: plain(&gy),
        },
    };
    Ok(pair)
}

/// `λ{ω : h1(x, y, ω) = h2(x, y, ω)}` for `ω` uniform on `[0, w]`.
pub fn meet_prob_exact(kernel: &Kernel, x: &Rat, y: &Rat) -> Result<Rat> {
    check_state(x)?;
    check_state(y)?;
    let w = kernel.width();
    match region_of(kernel, x, y) {
        Region::S1 | Region::S3 => {
            let shift = (kernel.slope() * (y - x)).abs();
            if *w == Rat::one() {
                // the overshoot branch differs by w = 1, i.e. not at all mod 1
                Ok(Rat::one())
            } else {
                Ok((w - shift).positive_part() / w)
            }
        }
        Region::S2 | Region::S4 => {
            if kernel.g(x)? == kernel.g(y)? {
                Ok(Rat::one())
            } else {
                Ok(Rat::zero())
            }
        }
    }
}

/// Exact law of one coordinate of the coupled step, assembled case by case
/// from the coupling's definition.
pub fn marginal_density(
    kernel: &Kernel,
    x: &Rat,
    y: &Rat,
    which: Coordinate,
) -> Result<PwConstDensity> {
    check_state(x)?;
    check_state(y)?;
    let w = kernel.width();
    let h = w.recip();
    let region = region_of(kernel, x, y);
    let (own, shift) = match (which, region) {
        (Coordinate::First, Region::S1) => (x, Some(kernel.slope() * (y - x))),
        (Coordinate::Second, Region::S3) => (y, Some(kernel.slope() * (x - y))),
        (Coordinate::First, _) => (x, None),
        (Coordinate::Second, _) => (y, None),
    };
    let g = kernel.g(own)?;
    let arcs = match shift {
        // ω in [0, w - z]: g + z + ω covers [g + z, g + w]
        // ω in (w - z, w]: g + z + ω - w covers (g, g + z]
        Some(z) => vec![(&g + &z, w - &z, h.clone()), (g, z, h)],
        None => vec![(g, w.clone(), h)],
    };
    Ok(PwConstDensity::from_arcs(&arcs))
}

struct FloatCoupling {
    slope: f64,
    width: f64,
}

impl FloatCoupling {
    fn new(kernel: &Kernel) -> Self {
        FloatCoupling {
            slope: kernel.slope().to_f64(),
            width: kernel.width_f64(),
        }
    }

    /// Advances the pair; returns true when the step lands on the diagonal.
    /// Meeting is the algebraic case-a event, never a numeric comparison.
    fn step(&self, kernel: &Kernel, x: &mut f64, y: &mut f64, omega: f64) -> bool {
        let d = self.slope * (*y - *x);
        let w = self.width;
        if d >= 0.0 && d <= w {
            let s = omega + d;
            if s <= w {
                *y = kernel.step_unchecked(*y, omega);
                *x = *y;
                return true;
            }
            let v = kernel.g_f64(*x) + s - w;
            *x = v - v.floor();
            *y = kernel.step_unchecked(*y, omega);
        } else if d < 0.0 && -d <= w {
            let s = omega - d;
            if s <= w {
                *x = kernel.step_unchecked(*x, omega);
                *y = *x;
                return true;
            }
            let v = kernel.g_f64(*y) + s - w;
            *y = v - v.floor();
            *x = kernel.step_unchecked(*x, omega);
        } else {
            *x = kernel.step_unchecked(*x, omega);
            *y = kernel.step_unchecked(*y, omega);
        }
        false
    }
}

fn run_coupled<R: Rng>(
    kernel: &Kernel,
    x0: f64,
    y0: f64,
    nmax: usize,
    rng: &mut R,
    mut record: Option<&mut Vec<(f64, f64)>>,
) -> Option<usize> {
    let fc = FloatCoupling::new(kernel);
    let (mut x, mut y) = (x0, y0);
    let mut tau = (x == y).then_some(0);
    for n in 1..=nmax {
        let omega = kernel.draw_noise(rng);
        if tau.is_some() {
            x = kernel.step_unchecked(x, omega);
            y = x;
        } else if fc.step(kernel, &mut x, &mut y, omega) {
            tau = Some(n);
        }
        if let Some(path) = record.as_deref_mut() {
            path.push((x, y));
        } else if tau.is_some() {
            break;
        }
    }
    tau
}

/// One coupled run from `(x0, y0)` using stream 0 of `seed`.
pub fn simulate_coupled(kernel: &Kernel, x0: f64, y0: f64, nmax: usize, seed: Seed) -> MeetingReport {
    let mut rng = shard_rng(seed, 0);
    MeetingReport {
        tau: run_coupled(kernel, x0, y0, nmax, &mut rng, None),
        steps: nmax,
        seed: seed.0,
    }
}

/// The full sequence of pairs of one coupled run, `nmax` entries.
pub fn coupled_path(kernel: &Kernel, x0: f64, y0: f64, nmax: usize, seed: Seed) -> Vec<(f64, f64)> {
    let mut rng = shard_rng(seed, 0);
    let mut path = Vec::with_capacity(nmax);
    run_coupled(kernel, x0, y0, nmax, &mut rng, Some(&mut path));
    path
}

/// Meeting-time counts over many runs; censored runs are keyed `-1`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MeetingHistogram {
    pub counts: BTreeMap<i64, u64>,
    pub runs: usize,
}

impl MeetingHistogram {
    pub fn count(&self, tau: i64) -> u64 {
        self.counts.get(&tau).copied().unwrap_or(0)
    }

    pub fn frequency(&self, tau: i64) -> f64 {
        self.count(tau) as f64 / self.runs as f64
    }
}

impl fmt::Display for MeetingHistogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tau,count")?;
        for (tau, count) in &self.counts {
            writeln!(f, "{tau},{count}")?;
        }
        Ok(())
    }
}

/// `runs` independent coupled runs under the sharded-seed contract.
pub fn meeting_histogram(
    kernel: &Kernel,
    x0: f64,
    y0: f64,
    nmax: usize,
    runs: usize,
    seed: Seed,
) -> MeetingHistogram {
    let counts = sharded_fold(
        runs,
        seed,
        BTreeMap::new,
        |acc: &mut BTreeMap<i64, u64>, rng| {
            let tau = run_coupled(kernel, x0, y0, nmax, rng, None).map_or(-1, |t| t as i64);
            *acc.entry(tau).or_insert(0) += 1;
        },
        |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        },
    );
    MeetingHistogram { counts, runs }
}
