//! The catalog of lower-bound claims behind the ergodicity proof, each
//! recomputed exactly and compared with its stated value.

use std::fmt::Write as _;

use serde::Serialize;

use super::bounds::{chain_bound, min_one_step_prob, three_step_extremes, Bound};
use super::volume::{box_simplex_prob, three_step_noise};
use crate::coupling::meet_prob_exact;
use crate::error::Result;
use crate::kernel::sets::{s0, t0, t1, t2, t2_t1, t3, t4};
use crate::kernel::Kernel;
use crate::rat::{rat, Rat};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Mc,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtLeast,
    Equal,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Mc => "mc",
        }
    }
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::AtLeast => "at_least",
            Relation::Equal => "equal",
        }
    }
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Informational => "informational",
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize)]
#[serde(untagged)]
pub enum Computed {
    Exact(Rat),
    Mc { estimate: f64, lcb: f64 },
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct BoundClaim {
    pub claim_id: String,
    pub description: String,
    #[serde(rename = "paper_bound")]
    pub bound: Rat,
    pub computed: Computed,
    pub method: Method,
    pub relation: Relation,
    pub verdict: Verdict,
}

impl BoundClaim {
    fn exact(id: &str, description: &str, bound: Rat, computed: Rat, relation: Relation) -> Self {
        let ok = match relation {
            Relation::AtLeast => computed >= bound,
            Relation::Equal => computed == bound,
        };
        BoundClaim {
            claim_id: id.into(),
            description: description.into(),
            bound,
            computed: Computed::Exact(computed),
            method: Method::Exact,
            relation,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        }
    }

    /// A Monte Carlo claim passes when its lower confidence bound clears the
    /// stated bound less `margin`.
    pub fn monte_carlo(id: &str, description: &str, bound: Rat, estimate: f64, lcb: f64, margin: f64) -> Self {
        let ok = lcb >= bound.to_f64() - margin;
        BoundClaim {
            claim_id: id.into(),
            description: description.into(),
            bound,
            computed: Computed::Mc { estimate, lcb },
            method: Method::Mc,
            relation: Relation::AtLeast,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        }
    }

    fn informational(mut self) -> Self {
        self.verdict = Verdict::Informational;
        self
    }

    pub fn computed_exact(&self) -> Option<&Rat> {
        match &self.computed {
            Computed::Exact(r) => Some(r),
            Computed::Mc { .. } => None,
        }
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

/// A lower bound usable in a product: an infimum that is either exact or
/// already rounded downward.
fn lower(b: &Bound) -> Rat {
    b.value.clone()
}

/// The claim catalog for the default kernel.
pub fn verify_all() -> Vec<BoundClaim> {
    verify_all_with(&Kernel::default()).expect("default kernel satisfies every precondition")
}

/// The claim catalog evaluated for `kernel` on the fixed sets
/// `S₀, T₀, ..., T₄`. Kernels for which the three-step closed form does
/// not apply on `S₀` are rejected with an unsupported-region error.
pub fn verify_all_with(kernel: &Kernel) -> Result<Vec<BoundClaim>> {
    let ((c1, c2), (c4_chain, c3_chain)) = rayon::join(
        || (min_one_step_prob(kernel, &t1(), &s0()), min_one_step_prob(kernel, &t2(), &s0())),
        || {
            (
                chain_bound(kernel, &[(t4(), t3()), (t3(), t2_t1()), (t2_t1(), s0())]),
                chain_bound(kernel, &[(t3(), t2_t1()), (t2_t1(), s0())]),
            )
        },
    );
    let (c1, c2, c3, c4) = (c1?, c2?, c3_chain?, c4_chain?);

    let ((hit_t1, to_t0), (tail, ret)) = rayon::join(
        || (three_step_extremes(kernel, &t0(), &t1()), three_step_extremes(kernel, &s0(), &t0())),
        || (three_step_extremes(kernel, &s0(), &t1()), three_step_extremes(kernel, &s0(), &s0())),
    );
    let (hit_t1, to_t0, tail, ret) = (hit_t1?, to_t0?, tail?, ret?);

    let omega0 = box_simplex_prob(&three_step_noise(kernel).with_threshold(rat(1, 180)));

    // K⁴(x, S₀) >= K³(x, T₁) · inf_{T₁} K(·, S₀) on T₀
    let four_step = lower(&hit_t1.inf) * &c1;
    // K⁷(x, S₀) >= K³(x, T₀) · inf_{T₀} K⁴(·, S₀) on S₀
    let beta0 = lower(&to_t0.inf) * &four_step;
    let alpha0 = lower(&ret.inf);

    let stated_alpha0 = rat(383, 384);
    let stated_beta0 = rat(1, 124_416);

    // every start outside S₀ reaches it in at most 3 steps, then stays in
    // the basic-set return chain for the remaining steps
    let entrance = [
        alpha0.pow(5),
        &c1 * beta0.pow(2),
        &c2 * beta0.pow(2),
        &c3 * alpha0.pow(2) * &beta0,
        &c4 * alpha0.pow(4),
    ];
    let fifteen = entrance.iter().min().expect("five cases").clone();

    let meet = meet_grid_min(kernel)?;

    use Relation::{AtLeast, Equal};
    Ok(vec![
        BoundClaim::exact("C1", "inf over T1 of K(x, S0)", rat(1, 2), c1.clone(), AtLeast),
        BoundClaim::exact("C2", "inf over T2 of K(x, S0)", rat(1, 2), c2.clone(), AtLeast),
        BoundClaim::exact("C3", "K^2(x, S0) on T3 via T2 u T1", rat(1, 4), c3, AtLeast),
        BoundClaim::exact("C4", "K^3(x, S0) on T4 via T3 and T2 u T1", rat(1, 8), c4, AtLeast),
        BoundClaim::exact(
            "C5",
            "P(w1/4 + w2/2 + w3 < 1/180)",
            rat(1, 1296),
            omega0,
            Equal,
        ),
        BoundClaim::exact("C6", "K^4(x, S0) on T0 via T1", rat(1, 2592), four_step, AtLeast),
        BoundClaim::exact("C7", "inf over S0 of K^3(x, T0)", rat(1, 48), lower(&to_t0.inf), AtLeast),
        BoundClaim::exact("C8", "sup over S0 of K^3(x, T1)", rat(1, 384), tail.sup.value.clone(), Equal),
        BoundClaim::exact("C9", "inf over S0 of K^3(x, S0)", stated_alpha0, alpha0.clone(), AtLeast)
            .informational(),
        BoundClaim::exact("C10", "inf over S0 of K^7(x, S0)", stated_beta0.clone(), beta0.clone(), AtLeast),
        BoundClaim::exact(
            "C11a",
            "inf over S0 of K^12(x, S0), with the exact return constant",
            alpha0.pow(4),
            alpha0.pow(4),
            AtLeast,
        ),
        BoundClaim::exact(
            "C11b",
            "inf over S0 of K^13(x, S0), with the exact return constant",
            alpha0.pow(2) * &stated_beta0,
            alpha0.pow(2) * &beta0,
            AtLeast,
        ),
        BoundClaim::exact(
            "C11c",
            "inf over S0 of K^14(x, S0)",
            stated_beta0.pow(2),
            beta0.pow(2),
            AtLeast,
        ),
        BoundClaim::exact(
            "C12",
            "inf over [0,1) of K^15(x, S0)",
            stated_beta0.pow(2) / Rat::from_int(2),
            fifteen,
            AtLeast,
        ),
        BoundClaim::exact("C13", "coupled one-step meeting probability on S0 x S0", rat(1, 4), meet, AtLeast),
    ])
}

/// Smallest exact meeting probability over the grid `{k/300 : k = 0..=30}²`
/// of the closed basic set.
fn meet_grid_min(kernel: &Kernel) -> Result<Rat> {
    let pts: Vec<Rat> = (0..=30).map(|k| rat(k, 300)).collect();
    let mut best: Option<Rat> = None;
    for x in &pts {
        for y in &pts {
            // the closed right end 3/30 lies in [0, 1), so g is defined there
            let p = meet_prob_exact(kernel, x, y)?;
            if best.as_ref().is_none_or(|b| &p < b) {
                best = Some(p);
            }
        }
    }
    Ok(best.expect("non-empty grid"))
}

pub fn any_failed(claims: &[BoundClaim]) -> bool {
    claims.iter().any(BoundClaim::failed)
}

pub fn to_json(claims: &[BoundClaim]) -> String {
    serde_json::to_string_pretty(claims).expect("claims serialize")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV twin of the JSON report. `computed` holds the exact value, or the
/// estimate for Monte Carlo claims with its bound in `lcb`.
pub fn to_csv(claims: &[BoundClaim]) -> String {
    let mut s = String::from("claim_id,description,paper_bound,computed,lcb,method,relation,verdict\n");
    for c in claims {
        let (computed, lcb) = match &c.computed {
            Computed::Exact(r) => (r.to_string(), String::new()),
            Computed::Mc { estimate, lcb } => (format!("{estimate:e}"), format!("{lcb:e}")),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            csv_field(&c.claim_id),
            csv_field(&c.description),
            c.bound,
            computed,
            lcb,
            c.method.as_str(),
            c.relation.as_str(),
            c.verdict.as_str(),
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_verdicts() {
        let claims = verify_all();
        assert!(claims.len() >= 13);
        for c in &claims {
            let expected = if c.claim_id == "C9" { Verdict::Informational } else { Verdict::Pass };
            assert_eq!(c.verdict, expected, "{c:?}");
        }
        let c9 = claims.iter().find(|c| c.claim_id == "C9").unwrap();
        assert_eq!(c9.computed_exact(), Some(&rat(737, 768)));
        assert!(!any_failed(&claims));
    }

    #[test]
    fn chained_values() {
        let claims = verify_all();
        let get = |id: &str| claims.iter().find(|c| c.claim_id == id).unwrap().computed_exact().unwrap().clone();
        assert_eq!(get("C5"), rat(1, 1296));
        assert_eq!(get("C6"), rat(1, 2592));
        assert_eq!(get("C8"), rat(1, 384));
        assert_eq!(get("C13"), rat(1, 4));
        assert!(get("C10") >= rat(1, 124_416));
        assert_eq!(get("C10"), get("C7") * rat(1, 2592));
    }

    #[test]
    fn report_is_deterministic() {
        assert_eq!(to_json(&verify_all()), to_json(&verify_all()));
    }

    #[test]
    fn json_shape() {
        let v: serde_json::Value = serde_json::from_str(&to_json(&verify_all())).unwrap();
        let first = &v[0];
        assert_eq!(first["claim_id"], "C1");
        assert_eq!(first["paper_bound"], "1/2");
        assert_eq!(first["computed"], "1/2");
        assert_eq!(first["method"], "exact");
        assert_eq!(first["verdict"], "pass");
    }

    #[test]
    fn csv_twin() {
        let claims = verify_all();
        let csv = to_csv(&claims);
        assert_eq!(csv.lines().count(), claims.len() + 1);
        assert!(csv.contains("C9,\"inf over S0 of K^3(x, S0)\",383/384,737/768,,exact,at_least,informational"));
    }

    #[test]
    fn monte_carlo_verdicts() {
        let ok = BoundClaim::monte_carlo("M", "d", rat(1, 2), 0.51, 0.49, 0.02);
        assert_eq!(ok.verdict, Verdict::Pass);
        let bad = BoundClaim::monte_carlo("M", "d", rat(1, 2), 0.45, 0.40, 0.02);
        assert!(bad.failed());
        let v = serde_json::to_value(&bad).unwrap();
        assert_eq!(v["computed"]["lcb"], 0.40);
    }
}
