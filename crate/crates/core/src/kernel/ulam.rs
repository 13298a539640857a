//! Ulam discretization of the kernel on `m` uniform cells.
//!
//! Entry `(i, j)` is the probability that one step started from a point
//! drawn uniformly in cell `i` lands in cell `j`. On each affine piece of a
//! cell, `g(x)` is uniform on some `[y0, y1)`, so `g(x) + ξ` has the
//! trapezoidal law of a sum of two independent uniforms, whose CDF is
//! piecewise quadratic. Entries are evaluated from that CDF in exact
//! rationals; the double-precision matrix is derived from them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::Kernel;
use crate::error::{Error, Result};
use crate::rat::Rat;

#[derive(Clone, Debug)]
pub struct UlamChain {
    m: usize,
    exact_rows: Vec<Vec<(usize, Rat)>>,
    // CSR
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
    // CSC, for gather-style products with a fixed summation order
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    cvals: Vec<f64>,
}

/// `max(u, 0)^2 / 2`
fn ramp2(u: Rat) -> Rat {
    if u.is_positive() {
        &u * &u / Rat::from_int(2)
    } else {
        Rat::zero()
    }
}

/// CDF at `t` of `Y + ξ`, `Y ~ U[y0, y1)`, `ξ ~ U[0, w)`.
fn trapezoid_cdf(t: &Rat, y0: &Rat, y1: &Rat, w: &Rat) -> Rat {
    let a = t - y0;
    let b = t - y1;
    let num = ramp2(a.clone()) - ramp2(b.clone()) - ramp2(a - w) + ramp2(b - w);
    num / ((y1 - y0) * w)
}

fn exact_row(kernel: &Kernel, m: usize, i: usize) -> Vec<(usize, Rat)> {
    let mm = m as i64;
    let cell_lo = Rat::new(i as i64, mm);
    let cell_hi = Rat::new(i as i64 + 1, mm);
    let mut cuts = vec![cell_lo.clone()];
    cuts.extend(
        kernel
            .map()
            .breakpoints()
            .into_iter()
            .filter(|p| &cell_lo < p && p < &cell_hi),
    );
    cuts.push(cell_hi);

    let w = kernel.width();
    let mut row: BTreeMap<usize, Rat> = BTreeMap::new();
    for piece in cuts.windows(2) {
        let branch = &kernel.map().branches()[kernel.map().branch_index(&piece[0]).expect("cell in [0,1)")];
        let y0 = branch.apply(&piece[0]);
        let y1 = branch.apply(&piece[1]);
        let weight = (&piece[1] - &piece[0]) * Rat::from_int(mm);
        let top = &y1 + w;
        let k_lo = (&y0 * Rat::from_int(mm)).floor_i64();
        let k_hi = (&top * Rat::from_int(mm)).ceil().floor_i64();
        let mut prev = trapezoid_cdf(&Rat::new(k_lo, mm), &y0, &y1, w);
        for k in k_lo..k_hi {
            let next = trapezoid_cdf(&Rat::new(k + 1, mm), &y0, &y1, w);
            let p = &next - &prev;
            if !p.is_zero() {
                let j = k.rem_euclid(mm) as usize;
                *row.entry(j).or_insert_with(Rat::zero) += &(&weight * &p);
            }
            prev = next;
        }
    }
    row.into_iter().filter(|(_, p)| !p.is_zero()).collect()
}

impl Kernel {
    /// Ulam chain on `m` cells; `m` must be a positive multiple of 30 so the
    /// map's breakpoint and the named sets fall on cell edges.
    pub fn build_ulam(&self, m: usize) -> Result<UlamChain> {
        if m == 0 || !m.is_multiple_of(30) {
            return Err(Error::InvalidParameter(format!(
                "cell count {m} must be a positive multiple of 30"
            )));
        }
        let exact_rows: Vec<Vec<(usize, Rat)>> =
            (0..m).into_par_iter().map(|i| exact_row(self, m, i)).collect();
        Ok(UlamChain::from_exact(m, exact_rows))
    }
}

impl UlamChain {
    fn from_exact(m: usize, exact_rows: Vec<Vec<(usize, Rat)>>) -> Self {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for row in &exact_rows {
            for (j, p) in row {
                col_idx.push(*j);
                vals.push(p.to_f64());
            }
            row_ptr.push(col_idx.len());
        }
        let mut col_count = vec![0usize; m];
        for &j in &col_idx {
            col_count[j] += 1;
        }
        let mut col_ptr = vec![0usize; m + 1];
        for j in 0..m {
            col_ptr[j + 1] = col_ptr[j] + col_count[j];
        }
        let mut fill = col_ptr.clone();
        let mut row_idx = vec![0usize; col_idx.len()];
        let mut cvals = vec![0.0; col_idx.len()];
        for i in 0..m {
            for k in row_ptr[i]..row_ptr[i + 1] {
                let j = col_idx[k];
                row_idx[fill[j]] = i;
                cvals[fill[j]] = vals[k];
                fill[j] += 1;
            }
        }
        UlamChain {
            m,
            exact_rows,
            row_ptr,
            col_idx,
            vals,
            col_ptr,
            row_idx,
            cvals,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn exact_row(&self, i: usize) -> &[(usize, Rat)] {
        &self.exact_rows[i]
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.vals[r])
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.iter().position(|&c| c == j).map_or(0.0, |k| vals[k])
    }

    pub fn exact_entry(&self, i: usize, j: usize) -> Rat {
        self.exact_rows[i]
            .iter()
            .find(|(c, _)| *c == j)
            .map_or_else(Rat::zero, |(_, p)| p.clone())
    }

    pub fn exact_row_sum(&self, i: usize) -> Rat {
        self.exact_rows[i].iter().map(|(_, p)| p).sum()
    }

    /// One step `d -> dQ`. Each output cell sums its column in increasing
    /// row order.
    pub fn step(&self, d: &[f64]) -> Vec<f64> {
        assert_eq!(d.len(), self.m, "vector length must match the chain");
        (0..self.m)
            .into_par_iter()
            .map(|j| {
                let r = self.col_ptr[j]..self.col_ptr[j + 1];
                self.row_idx[r.clone()]
                    .iter()
                    .zip(&self.cvals[r])
                    .map(|(&i, &p)| d[i] * p)
                    .sum()
            })
            .collect()
    }

    /// `d0 Q^n`.
    pub fn propagate(&self, d0: &[f64], n: usize) -> Result<Vec<f64>> {
        if d0.len() != self.m {
            return Err(Error::InvalidParameter(format!(
                "vector has {} cells, chain has {}",
                d0.len(),
                self.m
            )));
        }
        if d0.iter().any(|&p| p < 0.0) || (d0.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(
                "initial vector must be a probability vector".into(),
            ));
        }
        let mut d = d0.to_vec();
        for _ in 0..n {
            d = self.step(&d);
        }
        Ok(d)
    }

    /// `d0, d0 Q, ..., d0 Q^n`.
    pub fn trajectory(&self, d0: &[f64], n: usize) -> Result<Vec<Vec<f64>>> {
        let mut out = vec![self.propagate(d0, 0)?];
        for k in 0..n {
            let next = self.step(&out[k]);
            out.push(next);
        }
        Ok(out)
    }

    /// Sparse triplet CSV `row,col,value`.
    pub fn triplet_csv(&self) -> String {
        let mut s = String::from("row,col,value\n");
        for i in 0..self.m {
            let (cols, vals) = self.row(i);
            for (j, v) in cols.iter().zip(vals) {
                let _ = writeln!(s, "{i},{j},{v:e}");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::density::cells;
    use crate::rat::rat;

    #[test]
    fn rejects_unaligned_grid() {
        let k = Kernel::default();
        assert!(k.build_ulam(1000).is_err());
        assert!(k.build_ulam(0).is_err());
        assert!(k.build_ulam(45).is_err());
    }

    #[test]
    fn rows_sum_to_one_exactly() {
        let q = Kernel::default().build_ulam(30).unwrap();
        for i in 0..30 {
            assert_eq!(q.exact_row_sum(i), Rat::one(), "row {i}");
            let (_, vals) = q.row(i);
            assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn row_support_is_short() {
        let m = 30;
        let q = Kernel::default().build_ulam(m).unwrap();
        let bound = m.div_ceil(15) + 2;
        for i in 0..m {
            assert!(q.exact_row(i).len() <= bound, "row {i}: {:?}", q.exact_row(i));
        }
    }

    #[test]
    fn full_width_noise_gives_rank_one_chain() {
        let k = Kernel::with_params(rat(17, 30), Rat::one()).unwrap();
        let q = k.build_ulam(30).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                assert_eq!(q.exact_entry(i, j), rat(1, 30));
            }
        }
    }

    #[test]
    fn first_row_by_hand() {
        // cell [0, 1/30): g(x) uniform on [17/30, 35/60), plus U[0, 2/30)
        let q = Kernel::default().build_ulam(30).unwrap();
        let row: Vec<(usize, Rat)> = q.exact_row(0).to_vec();
        assert_eq!(
            row,
            vec![(17, rat(3, 8)), (18, rat(1, 2)), (19, rat(1, 8))]
        );
    }

    #[test]
    fn propagate_conserves_mass() {
        let q = Kernel::default().build_ulam(60).unwrap();
        let d0 = cells::point_mass(60, 7);
        assert_eq!(q.propagate(&d0, 0).unwrap(), d0);
        let d = q.propagate(&d0, 100).unwrap();
        assert!((cells::mass(&d) - 1.0).abs() < 1e-10);
        assert!(q.propagate(&vec![0.5; 60], 1).is_err());
        assert!(q.propagate(&cells::uniform(30), 1).is_err());
    }

    #[test]
    fn triplets_have_header() {
        let q = Kernel::default().build_ulam(30).unwrap();
        let csv = q.triplet_csv();
        assert!(csv.starts_with("row,col,value\n0,17,"));
        assert_eq!(csv.lines().count(), q.nnz() + 1);
    }
}
