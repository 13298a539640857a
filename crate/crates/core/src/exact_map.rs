//! Piecewise-affine maps of the circle `[0, 1)` with exact rational branches.
//!
//! A [`PwAffineMap`] is an ordered list of half-open branches `[lo, hi)`
//! that partition `[0, 1)`. Each branch is orientation preserving (positive
//! slope) and maps its domain into `[0, 1)`, so `x -> a*x + b mod 1`, its
//! iterates and compositions all stay inside the class.

use std::fmt;

use crate::error::{Error, Result};
use crate::rat::{Interval, Rat};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Branch {
    pub lo: Rat,
    pub hi: Rat,
    pub slope: Rat,
    pub intercept: Rat,
}

impl Branch {
    /// The affine part, evaluated without any domain check.
    pub fn apply(&self, x: &Rat) -> Rat {
        &self.slope * x + &self.intercept
    }

    fn same_affine(&self, other: &Branch) -> bool {
        self.slope == other.slope && self.intercept == other.intercept
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PwAffineMap {
    branches: Vec<Branch>,
}

impl PwAffineMap {
    /// Validates the partition and image invariants, then merges adjacent
    /// branches that share an affine part.
    pub fn from_branches(branches: Vec<Branch>) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidParameter(msg));
        let Some(first) = branches.first() else {
            return invalid("a map needs at least one branch".into());
        };
        if !first.lo.is_zero() {
            return invalid(format!("first branch starts at {}, not 0", first.lo));
        }
        if branches.last().map(|b| b.hi.clone()) != Some(Rat::one()) {
            return invalid("last branch must end at 1".into());
        }
        for w in branches.windows(2) {
            if w[0].hi != w[1].lo {
                return invalid(format!("gap or overlap at {} / {}", w[0].hi, w[1].lo));
            }
        }
        for b in &branches {
            if b.lo >= b.hi {
                return invalid(format!("empty branch [{}, {})", b.lo, b.hi));
            }
            if !b.slope.is_positive() {
                return invalid(format!("branch slope {} is not positive", b.slope));
            }
            if b.apply(&b.lo).is_negative() || b.apply(&b.hi) > Rat::one() {
                return invalid(format!("branch on [{}, {}) leaves [0, 1)", b.lo, b.hi));
            }
        }
        Ok(Self::canonical(branches))
    }

    fn canonical(branches: Vec<Branch>) -> Self {
        let mut merged: Vec<Branch> = Vec::with_capacity(branches.len());
        for b in branches {
            match merged.last_mut() {
                Some(prev) if prev.same_affine(&b) => prev.hi = b.hi,
                _ => merged.push(b),
            }
        }
        PwAffineMap { branches: merged }
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Interior branch boundaries, in increasing order.
    pub fn breakpoints(&self) -> Vec<Rat> {
        self.branches.iter().skip(1).map(|b| b.lo.clone()).collect()
    }

    pub fn identity() -> Self {
        mod1_affine(&Rat::one(), &Rat::zero()).expect("identity is valid")
    }

    /// Index of the branch whose domain contains `x`.
    pub fn branch_index(&self, x: &Rat) -> Result<usize> {
        if x.is_negative() || *x >= Rat::one() {
            return Err(Error::Domain(format!("{x} is not in [0, 1)")));
        }
        Ok(self.branches.partition_point(|b| &b.hi <= x))
    }

    pub fn eval(&self, x: &Rat) -> Result<Rat> {
        let i = self.branch_index(x)?;
        Ok(self.branches[i].apply(x))
    }

    /// Double-precision evaluation for exploratory orbits. The branch is
    /// located by comparing against rounded breakpoints.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let i = self
            .branches
            .partition_point(|b| b.hi.to_f64() <= x)
            .min(self.branches.len() - 1);
        let b = &self.branches[i];
        let y = b.slope.to_f64() * x + b.intercept.to_f64();
        y - y.floor()
    }

    pub fn branch_table(&self) -> BranchTable {
        BranchTable {
            rows: self.branches.clone(),
        }
    }
}

/// `x -> a*x + b mod 1` on `[0, 1)`, split at the points where `a*x + b`
/// crosses an integer.
pub fn mod1_affine(a: &Rat, b: &Rat) -> Result<PwAffineMap> {
    if !a.is_positive() {
        return Err(Error::InvalidParameter(format!("slope {a} must be positive")));
    }
    if b.is_negative() || *b >= Rat::one() {
        return Err(Error::InvalidParameter(format!("offset {b} must lie in [0, 1)")));
    }
    let one = Rat::one();
    let mut branches = Vec::new();
    let mut lo = Rat::zero();
    let mut k = 0i64;
    while lo < one {
        // next wrap point: a*x + b = k + 1
        let wrap = (Rat::from_int(k + 1) - b) / a;
        let hi = wrap.min(one.clone());
        branches.push(Branch {
            lo: lo.clone(),
            hi: hi.clone(),
            slope: a.clone(),
            intercept: b - Rat::from_int(k),
        });
        lo = hi;
        k += 1;
    }
    PwAffineMap::from_branches(branches)
}

/// `outer ∘ inner`.
pub fn compose(outer: &PwAffineMap, inner: &PwAffineMap) -> PwAffineMap {
    let cuts = outer.breakpoints();
    let mut out = Vec::new();
    for b in &inner.branches {
        let y_lo = b.apply(&b.lo);
        let y_hi = b.apply(&b.hi);
        let mut edges = vec![b.lo.clone()];
        for p in cuts.iter().filter(|p| &y_lo < *p && *p < &y_hi) {
            edges.push((p - &b.intercept) / &b.slope);
        }
        edges.push(b.hi.clone());
        for w in edges.windows(2) {
            let y0 = b.apply(&w[0]);
            let o = &outer.branches[outer.branch_index(&y0).expect("inner image lies in [0, 1)")];
            out.push(Branch {
                lo: w[0].clone(),
                hi: w[1].clone(),
                slope: &o.slope * &b.slope,
                intercept: &o.slope * &b.intercept + &o.intercept,
            });
        }
    }
    PwAffineMap::canonical(out)
}

/// `n`-fold composition `f ∘ ... ∘ f`.
pub fn iterate(f: &PwAffineMap, n: usize) -> Result<PwAffineMap> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "iterate needs n >= 1; use PwAffineMap::identity() for n = 0".into(),
        ));
    }
    let mut acc = f.clone();
    for _ in 1..n {
        acc = compose(f, &acc);
    }
    Ok(acc)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FixedSet {
    Point(Rat),
    /// A whole branch on which the map is the identity.
    Interval(Interval),
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FixedPoints(pub Vec<FixedSet>);

impl FixedPoints {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &Rat) -> bool {
        self.0.iter().any(|s| match s {
            FixedSet::Point(p) => p == x,
            FixedSet::Interval(i) => i.contains(x),
        })
    }

    pub fn points(&self) -> impl Iterator<Item = &Rat> {
        self.0.iter().filter_map(|s| match s {
            FixedSet::Point(p) => Some(p),
            FixedSet::Interval(_) => None,
        })
    }
}

pub fn fixed_points(f: &PwAffineMap) -> FixedPoints {
    let one = Rat::one();
    let mut out = Vec::new();
    for b in &f.branches {
        if b.slope == one {
            if b.intercept.is_zero() {
                out.push(FixedSet::Interval(Interval::of(b.lo.clone(), b.hi.clone())));
            }
        } else {
            let x = &b.intercept / (&one - &b.slope);
            if b.lo <= x && x < b.hi {
                out.push(FixedSet::Point(x));
            }
        }
    }
    FixedPoints(out)
}

/// Exact orbit `x_1, ..., x_n` of `x0`.
pub fn orbit(f: &PwAffineMap, x0: &Rat, n: usize) -> Result<Vec<Rat>> {
    let mut x = x0.clone();
    f.branch_index(&x)?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        x = f.eval(&x)?;
        out.push(x.clone());
    }
    Ok(out)
}

/// Largest orbit length for which [`rotation_average`] is used in certified
/// output; longer runs should go through [`rotation_average_f64`].
pub const EXACT_ROTATION_LIMIT: usize = 10_000;

/// `(1/n) * #{1 <= k <= n : f^k(x0) in set}`, exactly.
pub fn rotation_average(f: &PwAffineMap, x0: &Rat, n: usize, set: &Interval) -> Result<Rat> {
    if n == 0 {
        return Err(Error::InvalidParameter("orbit length must be positive".into()));
    }
    let mut x = x0.clone();
    f.branch_index(&x)?;
    let mut hits = 0i64;
    for _ in 0..n {
        x = f.eval(&x)?;
        if set.contains(&x) {
            hits += 1;
        }
    }
    Ok(Rat::new(hits, n as i64))
}

/// Floating-point rotation average, for exploration beyond
/// [`EXACT_ROTATION_LIMIT`]. Never used for certified claims.
pub fn rotation_average_f64(f: &PwAffineMap, x0: f64, n: usize, set: &Interval) -> f64 {
    let mut x = x0;
    let mut hits = 0usize;
    for _ in 0..n {
        x = f.eval_f64(x);
        if set.contains_f64(x) {
            hits += 1;
        }
    }
    hits as f64 / n as f64
}

/// Lossless listing of a map's branches. `Display` renders CSV with header
/// `lo,hi,slope,intercept`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BranchTable {
    pub rows: Vec<Branch>,
}

impl BranchTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl fmt::Display for BranchTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lo,hi,slope,intercept")?;
        for b in &self.rows {
            writeln!(f, "{},{},{},{}", b.lo, b.hi, b.slope, b.intercept)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn g(b: Rat) -> PwAffineMap {
        mod1_affine(&rat(1, 2), &b).unwrap()
    }

    fn intercepts(f: &PwAffineMap) -> Vec<Rat> {
        f.branches().iter().map(|b| b.intercept.clone()).collect()
    }

    #[test]
    fn base_map_has_two_branches() {
        let f = g(rat(17, 30));
        assert_eq!(f.breakpoints(), vec![rat(26, 30)]);
        assert_eq!(intercepts(&f), vec![rat(17, 30), rat(-13, 30)]);
        assert!(f.branches().iter().all(|b| b.slope == rat(1, 2)));
    }

    #[test]
    fn breakpoint_moves_with_offset() {
        assert_eq!(g(rat(19, 30)).breakpoints(), vec![rat(22, 30)]);
    }

    #[test]
    fn identity_is_one_branch() {
        let id = PwAffineMap::identity();
        assert_eq!(id.branches().len(), 1);
        assert_eq!(id.eval(&rat(5, 7)).unwrap(), rat(5, 7));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(mod1_affine(&Rat::zero(), &rat(1, 2)).is_err());
        assert!(mod1_affine(&rat(-1, 2), &rat(1, 2)).is_err());
        assert!(mod1_affine(&rat(1, 2), &Rat::one()).is_err());
        assert!(mod1_affine(&rat(1, 2), &rat(-1, 30)).is_err());
    }

    #[test]
    fn steep_map_wraps_several_times() {
        let f = mod1_affine(&Rat::from_int(3), &rat(1, 10)).unwrap();
        assert_eq!(f.breakpoints(), vec![rat(3, 10), rat(19, 30), rat(29, 30)]);
        assert_eq!(f.eval(&rat(1, 2)).unwrap(), rat(6, 10));
    }

    #[test]
    fn second_iterate_matches_closed_form() {
        let b = rat(17, 30);
        let f2 = iterate(&g(b.clone()), 2).unwrap();
        assert_eq!(f2.breakpoints(), vec![rat(18, 30), rat(26, 30)]);
        let base = rat(3, 2) * &b;
        assert_eq!(
            intercepts(&f2),
            vec![base.clone(), &base - Rat::one(), &base - rat(1, 2)]
        );
    }

    #[test]
    fn third_iterate_matches_closed_form() {
        let b = rat(17, 30);
        let f3 = iterate(&g(b.clone()), 3).unwrap();
        assert_eq!(f3.breakpoints(), vec![rat(2, 30), rat(18, 30), rat(26, 30)]);
        let base = rat(7, 4) * &b;
        assert_eq!(
            intercepts(&f3),
            vec![
                base.clone(),
                &base - Rat::one(),
                &base - rat(1, 2),
                &base - rat(1, 4)
            ]
        );
        assert!(f3.branches().iter().all(|br| br.slope == rat(1, 8)));
    }

    #[test]
    fn compose_with_identity_is_noop() {
        let f = iterate(&g(rat(17, 30)), 3).unwrap();
        assert_eq!(compose(&PwAffineMap::identity(), &f), f);
        assert_eq!(compose(&f, &PwAffineMap::identity()), f);
        assert_eq!(iterate(&f, 1).unwrap(), f);
        assert!(iterate(&f, 0).is_err());
    }

    #[test]
    fn eval_examples() {
        let f = g(rat(17, 30));
        assert_eq!(f.eval(&Rat::zero()).unwrap(), rat(17, 30));
        assert_eq!(f.eval(&rat(26, 30)).unwrap(), Rat::zero());
        assert!(f.eval(&Rat::one()).is_err());
        assert!(f.eval(&rat(-1, 5)).is_err());
    }

    #[test]
    fn near_four_periodicity() {
        let f4 = iterate(&g(rat(17, 30)), 4).unwrap();
        for eps in [rat(1, 200), rat(1, 1000), rat(1, 5000)] {
            let x = rat(26, 30) - &eps;
            assert_eq!(f4.eval(&x).unwrap(), rat(26, 30) - eps / Rat::from_int(16));
        }
    }

    #[test]
    fn fixed_point_observations() {
        let f3 = iterate(&g(rat(19, 30)), 3).unwrap();
        assert!(fixed_points(&f3).contains(&rat(13, 105)));
        let f3 = iterate(&g(rat(4, 7)), 3).unwrap();
        assert!(fixed_points(&f3).contains(&Rat::zero()));
        assert_eq!(f3.eval(&Rat::zero()).unwrap(), Rat::zero());
        let f4 = iterate(&g(rat(17, 30)), 4).unwrap();
        assert!(fixed_points(&f4).is_empty());
    }

    #[test]
    fn identity_fixes_everything() {
        let fp = fixed_points(&PwAffineMap::identity());
        assert_eq!(fp.0, vec![FixedSet::Interval(Interval::unit())]);
        assert!(fp.contains(&rat(1, 3)));
    }

    #[test]
    fn rotation_on_period_three_orbit() {
        let f = g(rat(19, 30));
        let orbit = orbit(&f, &rat(13, 105), 3).unwrap();
        assert_eq!(orbit, vec![rat(73, 105), rat(103, 105), rat(13, 105)]);
        let wrap_set = Interval::of(rat(22, 30), Rat::one());
        assert_eq!(rotation_average(&f, &rat(13, 105), 300, &wrap_set).unwrap(), rat(1, 3));
    }

    #[test]
    fn rotation_on_constant_orbit() {
        let set = Interval::of(rat(1, 2), Rat::one());
        let avg = rotation_average(&PwAffineMap::identity(), &rat(3, 4), 17, &set).unwrap();
        assert_eq!(avg, Rat::one());
    }

    #[test]
    fn rotation_below_one_third_for_base_map() {
        let f = g(rat(17, 30));
        let wrap_set = Interval::of(rat(26, 30), Rat::one());
        let avg = rotation_average(&f, &Rat::zero(), EXACT_ROTATION_LIMIT, &wrap_set).unwrap();
        assert!(avg < rat(1, 3), "rotation average {avg}");
        let fast = rotation_average_f64(&f, 0.0, EXACT_ROTATION_LIMIT, &wrap_set);
        // orbits hug the breakpoint 26/30, so rounding changes branch choices;
        // only the qualitative answer is shared
        assert!(fast < 1.0 / 3.0, "{fast}");
    }

    #[test]
    fn branch_table_rows() {
        let b = rat(17, 30);
        assert_eq!(g(b.clone()).branch_table().len(), 2);
        assert_eq!(iterate(&g(b), 2).unwrap().branch_table().len(), 3);
        let table = PwAffineMap::identity().branch_table();
        assert_eq!(table.to_string(), "lo,hi,slope,intercept\n0/1,1/1,1/1,0/1\n");
    }

    #[test]
    fn from_branches_validates() {
        let br = |lo: Rat, hi: Rat, s: Rat, c: Rat| Branch { lo, hi, slope: s, intercept: c };
        // gap
        assert!(PwAffineMap::from_branches(vec![
            br(Rat::zero(), rat(1, 3), Rat::one(), Rat::zero()),
            br(rat(1, 2), Rat::one(), Rat::one(), Rat::zero()),
        ])
        .is_err());
        // image escapes [0, 1)
        assert!(PwAffineMap::from_branches(vec![br(
            Rat::zero(),
            Rat::one(),
            Rat::one(),
            rat(1, 2)
        )])
        .is_err());
        // adjacent identical pieces merge
        let f = PwAffineMap::from_branches(vec![
            br(Rat::zero(), rat(1, 3), Rat::one(), Rat::zero()),
            br(rat(1, 3), Rat::one(), Rat::one(), Rat::zero()),
        ])
        .unwrap();
        assert_eq!(f, PwAffineMap::identity());
    }
}
