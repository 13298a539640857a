//! Exact transition probabilities and their extrema over intervals.

use num_bigint::BigInt;

use super::volume::{box_simplex_prob, three_step_noise, PolytopeSpec};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::rat::{Interval, Rat};

/// An extremum value. When `exact` is false the value is a rigorous
/// one-sided bound (below for an infimum, above for a supremum) from an
/// irrational critical point bracketed to width 2^-96.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Bound {
    pub value: Rat,
    pub at: Rat,
    pub exact: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Extremes {
    pub inf: Bound,
    pub sup: Bound,
}

/// `g(g(x) + ω1) + ω2` never wraps for any noise: `a x + b + w < 1` and
/// `a(a x + b + w) + b + w < 1`.
fn check_no_early_wrap(kernel: &Kernel, x: &Rat) -> Result<()> {
    if x.is_negative() || *x >= Rat::one() {
        return Err(Error::Domain(format!("{x} is not in [0, 1)")));
    }
    let (a, b, w) = (kernel.slope(), kernel.offset(), kernel.width());
    let one = Rat::one();
    let first = a * x + b + w;
    let second = a * &first + b + w;
    if first >= one || second >= one {
        return Err(Error::UnsupportedRegion(format!(
            "from x = {x} the first two noisy steps can wrap; closed form does not apply"
        )));
    }
    Ok(())
}

/// `a³x + (a² + a + 1)b`, the noise-free part of the third iterate before
/// reduction.
fn three_step_base(kernel: &Kernel, x: &Rat) -> Rat {
    let (a, b) = (kernel.slope(), kernel.offset());
    let a2 = a * a;
    &a2 * a * x + (&a2 + a + Rat::one()) * b
}

fn three_step_prob_unchecked(kernel: &Kernel, noise: &PolytopeSpec, x: &Rat, target: &Interval) -> Rat {
    let base = three_step_base(kernel, x);
    let top = &base + noise.support_max();
    let cdf = |t: Rat| box_simplex_prob(&noise.with_threshold(t));
    let mut total = Rat::zero();
    for k in base.floor_i64()..=top.floor_i64() {
        let shift = Rat::from_int(k) - &base;
        total += &(cdf(&target.hi + &shift) - cdf(&target.lo + &shift));
    }
    total
}

/// `K³(x, J)`, exactly, for starting points whose first two noisy steps
/// cannot wrap around.
pub fn three_step_interval_prob(kernel: &Kernel, x: &Rat, target: &Interval) -> Result<Rat> {
    check_no_early_wrap(kernel, x)?;
    Ok(three_step_prob_unchecked(kernel, &three_step_noise(kernel), x, target))
}

/// Exact-coefficient cubic `c0 + c1 x + c2 x² + c3 x³`.
#[derive(Clone, Debug)]
struct Cubic([Rat; 4]);

impl Cubic {
    /// Lagrange interpolation through four distinct points.
    fn interpolate(xs: &[Rat; 4], ys: &[Rat; 4]) -> Self {
        let mut c = [Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero()];
        for i in 0..4 {
            // basis polynomial prod_{j != i} (x - x_j) / (x_i - x_j)
            let mut basis = vec![Rat::one()];
            let mut denom = Rat::one();
            for j in (0..4).filter(|&j| j != i) {
                let mut next = vec![Rat::zero(); basis.len() + 1];
                for (k, bk) in basis.iter().enumerate() {
                    next[k + 1] += bk;
                    next[k] -= &(bk * &xs[j]);
                }
                basis = next;
                denom *= &(&xs[i] - &xs[j]);
            }
            let scale = &ys[i] / &denom;
            for k in 0..4 {
                c[k] += &(&basis[k] * &scale);
            }
        }
        Cubic(c)
    }

    #[cfg(test)]
    fn eval(&self, x: &Rat) -> Rat {
        let mut acc = self.0[3].clone();
        for k in (0..3).rev() {
            acc = acc * x + &self.0[k];
        }
        acc
    }

    fn deriv(&self, x: &Rat) -> Rat {
        let three = Rat::from_int(3);
        let two = Rat::from_int(2);
        (&three * &self.0[3] * x + &two * &self.0[2]) * x + &self.0[1]
    }

    /// Enclosure of the values on `[lo, hi]` by interval Horner.
    fn enclose(&self, lo: &Rat, hi: &Rat) -> (Rat, Rat) {
        let mut acc = (self.0[3].clone(), self.0[3].clone());
        for k in (0..3).rev() {
            let prods = [&acc.0 * lo, &acc.0 * hi, &acc.1 * lo, &acc.1 * hi];
            let mn = prods.iter().min().unwrap().clone();
            let mx = prods.iter().max().unwrap().clone();
            acc = (mn + &self.0[k], mx + &self.0[k]);
        }
        acc
    }
}

fn rational_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let exact = |n: &BigInt| {
        let s = n.sqrt();
        (&s * &s == *n).then_some(s)
    };
    Some(Rat::from_big(exact(r.numer())?, exact(r.denom())?))
}

enum Critical {
    Rational(Rat),
    /// A bracket `[lo, hi]` around an irrational root of the derivative.
    Bracket(Rat, Rat),
}

/// Roots of the derivative strictly inside `(lo, hi)`.
fn critical_points(p: &Cubic, lo: &Rat, hi: &Rat) -> Vec<Critical> {
    let three = Rat::from_int(3);
    let two = Rat::from_int(2);
    let qa = &three * &p.0[3];
    let qb = &two * &p.0[2];
    let qc = p.0[1].clone();
    let inside = |x: &Rat| lo < x && x < hi;
    if qa.is_zero() {
        if qb.is_zero() {
            return Vec::new();
        }
        let x = -(&qc / &qb);
        return if inside(&x) { vec![Critical::Rational(x)] } else { Vec::new() };
    }
    let disc = &qb * &qb - Rat::from_int(4) * &qa * &qc;
    if disc.is_negative() {
        return Vec::new();
    }
    if let Some(s) = rational_sqrt(&disc) {
        return [(-&qb + &s), (-&qb - &s)]
            .into_iter()
            .map(|n| n / (&two * &qa))
            .filter(inside)
            .map(Critical::Rational)
            .collect();
    }
    // irrational roots: bracket each sign change of the derivative between
    // the pieces cut at the derivative's own vertex
    let vertex = -(&qb / (&two * &qa));
    let mut cuts = vec![lo.clone()];
    if inside(&vertex) {
        cuts.push(vertex);
    }
    cuts.push(hi.clone());
    let eps = Rat::from_big(BigInt::from(1), BigInt::from(1) << 96);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (mut a, mut b) = (w[0].clone(), w[1].clone());
        let (fa, fb) = (p.deriv(&a), p.deriv(&b));
        if fa.is_zero() || fb.is_zero() || fa.is_positive() == fb.is_positive() {
            continue;
        }
        let rising = fb.is_positive();
        while &b - &a > eps {
            let mid = (&a + &b) / Rat::from_int(2);
            let fm = p.deriv(&mid);
            if fm.is_zero() {
                a = mid.clone();
                b = mid;
                break;
            }
            if fm.is_positive() == rising {
                b = mid;
            } else {
                a = mid;
            }
        }
        out.push(Critical::Bracket(a, b));
    }
    out
}

/// Points of the closed interval `I` between which `x -> K³(x, J)` is a
/// single cubic: the endpoints of `I` and every `x` at which an argument of
/// the noise CDF crosses one of its knots. Sorted, without repeats.
pub fn three_step_cuts(kernel: &Kernel, starts: &Interval, target: &Interval) -> Result<Vec<Rat>> {
    check_no_early_wrap(kernel, &starts.lo)?;
    // the wrap conditions are monotone in x, so the closed right end decides
    let (a, b, w) = (kernel.slope(), kernel.offset(), kernel.width());
    let first = a * &starts.hi + b + w;
    if first >= Rat::one() || a * &first + b + w >= Rat::one() {
        return Err(Error::UnsupportedRegion(format!(
            "starts {starts} reach the region where early steps wrap"
        )));
    }
    let noise = three_step_noise(kernel);
    let a3 = a * a * a;
    let c0 = three_step_base(kernel, &Rat::zero());
    let base_lo = three_step_base(kernel, &starts.lo);
    let base_hi = three_step_base(kernel, &starts.hi) + noise.support_max();
    let mut cuts = vec![starts.lo.clone(), starts.hi.clone()];
    for k in base_lo.floor_i64() - 1..=base_hi.floor_i64() + 1 {
        for edge in [&target.lo, &target.hi] {
            for knot in noise.knots() {
                // edge + k - base(x) = knot
                let x = (edge + Rat::from_int(k) - &c0 - knot) / &a3;
                if starts.lo < x && x < starts.hi {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort();
    cuts.dedup();
    Ok(cuts)
}

/// Infimum and supremum of `x -> K³(x, J)` over the closed interval `I`.
///
/// The function is continuous and piecewise cubic in `x` (see
/// [`three_step_cuts`]). Each piece is recovered by exact interpolation and
/// optimized over its endpoints and the roots of its derivative.
pub fn three_step_extremes(kernel: &Kernel, starts: &Interval, target: &Interval) -> Result<Extremes> {
    let cuts = three_step_cuts(kernel, starts, target)?;
    let noise = three_step_noise(kernel);
    let eval = |x: &Rat| three_step_prob_unchecked(kernel, &noise, x, target);

    let mut inf: Option<Bound> = None;
    let mut sup: Option<Bound> = None;
    let mut offer = |value: Rat, value_hi: Rat, at: Rat, exact: bool| {
        if inf.as_ref().is_none_or(|b| value < b.value) {
            inf = Some(Bound { value: value.clone(), at: at.clone(), exact });
        }
        if sup.as_ref().is_none_or(|b| value_hi > b.value) {
            sup = Some(Bound { value: value_hi, at, exact });
        }
    };
    for x in &cuts {
        let v = eval(x);
        offer(v.clone(), v, x.clone(), true);
    }
    for w in cuts.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let step = (hi - lo) / Rat::from_int(3);
        let xs = [lo.clone(), lo + &step, hi - &step, hi.clone()];
        let ys = xs.clone().map(|x| eval(&x));
        let cubic = Cubic::interpolate(&xs, &ys);
        for crit in critical_points(&cubic, lo, hi) {
            match crit {
                Critical::Rational(x) => {
                    let v = eval(&x);
                    offer(v.clone(), v, x, true);
                }
                Critical::Bracket(l, h) => {
                    let (vl, vh) = cubic.enclose(&l, &h);
                    offer(vl, vh, l, false);
                }
            }
        }
    }
    Ok(Extremes {
        inf: inf.expect("at least one candidate"),
        sup: sup.expect("at least one candidate"),
    })
}

/// `inf_{x in I} K(x, J)` over the closure of `I`, exactly.
///
/// On each branch of `g`, `K(x, J)` is piecewise linear in `x` with kinks
/// where either end of the noise arc crosses an end of `J`; limits at branch
/// ends are taken with the branch's own affine formula.
pub fn min_one_step_prob(kernel: &Kernel, starts: &Interval, target: &Interval) -> Result<Rat> {
    let w = kernel.width();
    let prob = |y: &Rat| target.arc_overlap(y, w) / w;
    if starts.lo >= Rat::one() {
        return Err(Error::Domain(format!("{starts} has no points in [0, 1)")));
    }
    let edges = [
        target.lo.clone(),
        target.hi.clone(),
        &target.lo - w,
        &target.hi - w,
    ];
    let mut best: Option<Rat> = None;
    for br in kernel.map().branches() {
        let lo = br.lo.clone().max(starts.lo.clone());
        let hi = br.hi.clone().min(starts.hi.clone());
        if lo > hi || (lo == hi && lo == br.hi) {
            continue;
        }
        let mut xs = vec![lo.clone(), hi.clone()];
        let (y_lo, y_hi) = (br.apply(&lo), br.apply(&hi));
        for e in &edges {
            for k in (y_lo.clone() - e).floor_i64()..=(y_hi.clone() - e).floor_i64() + 1 {
                let x = (e + Rat::from_int(k) - &br.intercept) / &br.slope;
                if lo < x && x < hi {
                    xs.push(x);
                }
            }
        }
        for x in xs {
            let p = prob(&br.apply(&x));
            if best.as_ref().is_none_or(|b| &p < b) {
                best = Some(p);
            }
        }
    }
    best.ok_or_else(|| Error::Domain(format!("{starts} has no points in [0, 1)")))
}

/// Product of the stage infima of a chain of one-step moves `I_k -> J_k`.
/// A certified lower bound on `K^n(x, J_last)` for `x` in `I_first`.
pub fn chain_bound(kernel: &Kernel, stages: &[(Interval, Interval)]) -> Result<Rat> {
    if stages.is_empty() {
        return Err(Error::InvalidParameter("a chain needs at least one stage".into()));
    }
    for (k, pair) in stages.windows(2).enumerate() {
        if !pair[1].0.covers(&pair[0].1) {
            return Err(Error::InvalidParameter(format!(
                "stage {} lands in {} which is not inside the next start set {}",
                k,
                pair[0].1,
                pair[1].0
            )));
        }
    }
    stages
        .iter()
        .map(|(i, j)| min_one_step_prob(kernel, i, j))
        .try_fold(Rat::one(), |acc, p| Ok(acc * p?))
}
