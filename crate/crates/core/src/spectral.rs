//! Stationary law, mixing curves and band diagnostics on the Ulam chain.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::density::cells;
use crate::kernel::ulam::UlamChain;
use crate::rat::Rat;

/// Total variation values below this are treated as underflow.
pub const TV_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug, Serialize)]
pub struct Stationary {
    pub density: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn normalize(d: &mut [f64]) {
    let s = cells::mass(d);
    d.iter_mut().for_each(|p| *p /= s);
}

/// Operator iterated by [`stationary_with`].
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerScheme {
    /// `d -> dQ`.
    Plain,
    /// `d -> d(I + Q + Q²)/3`. Same fixed points as `Q`, but the slowly
    /// decaying modes of this chain rotate with period close to 3 and are
    /// nearly annihilated by the average.
    #[default]
    PeriodAveraged,
}

/// Power iteration started from `start`, normalized in L¹ every step, until
/// the residual `tv(dQ, d)` is at most `tol`.
pub fn stationary_with(
    chain: &UlamChain,
    start: &[f64],
    tol: f64,
    maxiter: usize,
    scheme: PowerScheme,
) -> Result<Stationary> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let mut d = chain.propagate(start, 0)?;
    let mut residual = f64::INFINITY;
    for it in 0..=maxiter {
        let d1 = chain.step(&d);
        residual = cells::tv(&d1, &d)?;
        if residual <= tol {
            return Ok(Stationary { density: d, residual, iterations: it });
        }
        d = match scheme {
            PowerScheme::Plain => d1,
            PowerScheme::PeriodAveraged => {
                let d2 = chain.step(&d1);
                d.iter()
                    .zip(&d1)
                    .zip(&d2)
                    .map(|((a, b), c)| (a + b + c) / 3.0)
                    .collect()
            }
        };
        normalize(&mut d);
    }
    Err(Error::Convergence { iterations: maxiter, residual })
}

/// Period-averaged power iteration from `start`.
pub fn stationary_from(chain: &UlamChain, start: &[f64], tol: f64, maxiter: usize) -> Result<Stationary> {
    stationary_with(chain, start, tol, maxiter, PowerScheme::PeriodAveraged)
}

/// Period-averaged power iteration from the uniform vector.
pub fn stationary(chain: &UlamChain, tol: f64, maxiter: usize) -> Result<Stationary> {
    stationary_from(chain, &cells::uniform(chain.m()), tol, maxiter)
}

/// Mixing curves of a family of initial vectors: at each `n`, the largest
/// distance to `reference` and the largest pairwise distance.
#[derive(Clone, Debug, Serialize)]
pub struct DecaySeries {
    pub m: usize,
    pub initials: Vec<String>,
    pub seed: Option<u64>,
    pub n: Vec<usize>,
    pub tv_to_stationary: Vec<f64>,
    pub tv_pairwise: Vec<f64>,
    /// Per-initial distance to the reference, indexed like `initials`.
    pub per_initial: Vec<Vec<f64>>,
}

impl DecaySeries {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,tv_to_stationary,tv_pairwise\n");
        for k in 0..self.n.len() {
            let _ = writeln!(s, "{},{:e},{:e}", self.n[k], self.tv_to_stationary[k], self.tv_pairwise[k]);
        }
        s
    }

    /// Largest increase between consecutive steps over both curves.
    pub fn max_increase(&self) -> f64 {
        [&self.tv_to_stationary, &self.tv_pairwise]
            .iter()
            .flat_map(|v| v.windows(2).map(|w| w[1] - w[0]))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Propagates every initial vector `nmax` steps and records distances.
pub fn decay_curve(
    chain: &UlamChain,
    initials: &[(String, Vec<f64>)],
    reference: &[f64],
    nmax: usize,
) -> Result<DecaySeries> {
    if nmax < 1 {
        return Err(Error::InvalidParameter("nmax must be at least 1".into()));
    }
    if initials.is_empty() {
        return Err(Error::InvalidParameter("need at least one initial vector".into()));
    }
    let mut ds: Vec<Vec<f64>> = initials
        .iter()
        .map(|(_, d)| chain.propagate(d, 0))
        .collect::<Result<_>>()?;
    let mut series = DecaySeries {
        m: chain.m(),
        initials: initials.iter().map(|(name, _)| name.clone()).collect(),
        seed: None,
        n: Vec::with_capacity(nmax + 1),
        tv_to_stationary: Vec::with_capacity(nmax + 1),
        tv_pairwise: Vec::with_capacity(nmax + 1),
        per_initial: vec![Vec::with_capacity(nmax + 1); initials.len()],
    };
    for n in 0..=nmax {
        if n > 0 {
            ds = ds.iter().map(|d| chain.step(d)).collect();
        }
        let mut to_ref = 0.0f64;
        for (i, d) in ds.iter().enumerate() {
            let t = cells::tv(d, reference)?;
            series.per_initial[i].push(t);
            to_ref = to_ref.max(t);
        }
        let mut pair = 0.0f64;
        for i in 0..ds.len() {
            for j in i + 1..ds.len() {
                pair = pair.max(cells::tv(&ds[i], &ds[j])?);
            }
        }
        series.n.push(n);
        series.tv_to_stationary.push(to_ref);
        series.tv_pairwise.push(pair);
    }
    Ok(series)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModulusEstimate {
    /// Per-step decay factor of the pairwise distance.
    pub rate: f64,
    /// Root mean square residual of the log-linear fit.
    pub residual: f64,
    /// Per-step factor from a fit on every third step only.
    pub rate_3step: f64,
    pub burnin: usize,
    pub window: usize,
    /// True when the distance underflowed inside the window and `rate` is an
    /// upper bound from the last resolvable step.
    pub truncated: bool,
}

/// Least squares slope and RMS residual of `ys` against `xs`.
fn log_linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - my - slope * (x - mx);
            r * r
        })
        .sum();
    (slope, (rss / n).sqrt())
}

/// Geometric-fit estimate of the decay factor of the distance between the
/// point masses at cells `0` and `m/2`, over steps
/// `burnin ..= burnin + window`.
pub fn second_modulus(chain: &UlamChain, burnin: usize, window: usize) -> Result<ModulusEstimate> {
    if window < 10 {
        return Err(Error::InvalidParameter(format!("window {window} must be at least 10")));
    }
    let m = chain.m();
    let mut a = cells::point_mass(m, 0);
    let mut b = cells::point_mass(m, m / 2);
    for _ in 0..burnin {
        a = chain.step(&a);
        b = chain.step(&b);
    }
    let mut tvs = Vec::with_capacity(window + 1);
    for k in 0..=window {
        if k > 0 {
            a = chain.step(&a);
            b = chain.step(&b);
        }
        let t = cells::tv(&a, &b)?;
        if t < TV_FLOOR {
            break;
        }
        tvs.push(t);
    }
    if tvs.is_empty() {
        return Err(Error::WindowTooLate { step: burnin });
    }
    let truncated = tvs.len() <= window;
    if truncated && tvs.len() < 3 {
        // underflow almost immediately: bound the factor by the drop below the floor
        let k = tvs.len() as f64;
        let rate = (TV_FLOOR / tvs[tvs.len() - 1]).powf(1.0 / k).min(1.0);
        return Ok(ModulusEstimate {
            rate,
            residual: 0.0,
            rate_3step: rate,
            burnin,
            window,
            truncated,
        });
    }
    let xs: Vec<f64> = (0..tvs.len()).map(|k| k as f64).collect();
    let ys: Vec<f64> = tvs.iter().map(|t| t.ln()).collect();
    let (slope, residual) = log_linear_fit(&xs, &ys);
    let thirds: Vec<usize> = (0..tvs.len()).step_by(3).collect();
    let rate_3step = if thirds.len() >= 2 {
        let x3: Vec<f64> = thirds.iter().map(|&k| k as f64).collect();
        let y3: Vec<f64> = thirds.iter().map(|&k| ys[k]).collect();
        log_linear_fit(&x3, &y3).0.exp()
    } else {
        slope.exp()
    };
    Ok(ModulusEstimate {
        rate: slope.exp(),
        residual,
        rate_3step,
        burnin,
        window,
        truncated,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Band {
    pub start_cell: usize,
    pub cells: usize,
    /// Left end; a band that wraps past 0 has `hi > 1`.
    pub lo: Rat,
    pub hi: Rat,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandReport {
    pub bands: Vec<Band>,
    pub total: f64,
    pub max_len: Rat,
    pub m: usize,
}

impl BandReport {
    pub fn csv_header() -> &'static str {
        "band_index,lo,hi,mass"
    }

    pub fn csv_rows(&self) -> String {
        let mut s = String::new();
        for (i, b) in self.bands.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{:e}", i, b.lo, b.hi, b.mass);
        }
        s
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}", Self::csv_header(), self.csv_rows())
    }
}

fn window_mass(d: &[f64], start: usize, len: usize) -> f64 {
    let m = d.len();
    (start..start + len).map(|c| d[c % m]).sum()
}

/// Greedy choice of three disjoint windows of at most `max_len` (rounded
/// down to whole cells) capturing the most mass; windows may wrap around 0.
/// Ties go to the leftmost start cell.
pub fn band_report(d: &[f64], max_len: &Rat) -> Result<BandReport> {
    if !max_len.is_positive() || *max_len > Rat::new(1, 3) {
        return Err(Error::InvalidParameter(format!("band length {max_len} must be in (0, 1/3]")));
    }
    let m = d.len();
    let cap = (max_len * Rat::from_int(m as i64)).floor_i64() as usize;
    if cap == 0 {
        return Err(Error::InvalidParameter(format!(
            "band length {max_len} is shorter than one of {m} cells"
        )));
    }
    let mut taken = vec![false; m];
    let mut bands = Vec::with_capacity(3);
    for _ in 0..3 {
        let mut best: Option<(usize, f64)> = None;
        for s in 0..m {
            if (s..s + cap).any(|c| taken[c % m]) {
                continue;
            }
            let mass = window_mass(d, s, cap);
            if best.is_none_or(|(_, bm)| mass > bm) {
                best = Some((s, mass));
            }
        }
        let Some((s, mass)) = best else { break };
        (s..s + cap).for_each(|c| taken[c % m] = true);
        let mm = m as i64;
        bands.push(Band {
            start_cell: s,
            cells: cap,
            lo: Rat::new(s as i64, mm),
            hi: Rat::new((s + cap) as i64, mm),
            mass,
        });
    }
    let total = bands.iter().map(|b| b.mass).sum();
    Ok(BandReport { bands, total, max_len: max_len.clone(), m })
}

/// `tv(d_n, d_{n+3}) / max(tv(d_n, d_{n+1}), 1e-15)`.
pub fn cyclicity_score(d0: &[f64], d1: &[f64], d2: &[f64], d3: &[f64]) -> Result<f64> {
    if d2.len() != d0.len() {
        return Err(Error::InvalidParameter("vectors must share one grid".into()));
    }
    Ok(cells::tv(d0, d3)? / cells::tv(d0, d1)?.max(1e-15))
}
