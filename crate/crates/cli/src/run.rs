//! Executes a [`RunPlan`] and renders its artifacts.

use std::fmt::Write as _;

use circmix_core::certify::{self, claims, CertifiedRate};
use circmix_core::coupling::{meet_prob_exact, meeting_histogram};
use circmix_core::exact_map::{
    fixed_points, iterate, rotation_average, rotation_average_f64, FixedSet, EXACT_ROTATION_LIMIT,
};
use circmix_core::kernel::density::cells;
use circmix_core::kernel::mc::shard_rng;
use circmix_core::spectral::{band_report, cyclicity_score, decay_curve, second_modulus, stationary};
use circmix_core::{Error, Interval, Kernel, Rat, Seed, UlamChain};
use serde_json::{json, Value};

use crate::args::{Command, Format, RunPlan};
use crate::output::Dest;

/// Largest power-iteration count before giving up.
const MAX_POWER_ITERATIONS: usize = 1_000_000;

#[derive(Debug)]
pub enum RunError {
    /// Bad parameter combination discovered while running (exit 2).
    Usage(String),
    /// A computation could not be completed (exit 1).
    Compute(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Domain(_) | Error::ParseRational(_) => {
                RunError::Usage(e.to_string())
            }
            Error::UnsupportedRegion(_) | Error::Convergence { .. } | Error::WindowTooLate { .. } => {
                RunError::Compute(e.to_string())
            }
        }
    }
}

/// Rendered artifacts plus whether certification failed.
pub struct Outcome {
    pub artifacts: Vec<(Dest, String)>,
    pub certification_failed: bool,
}

impl Outcome {
    fn single(dest: Dest, body: String) -> Self {
        Outcome { artifacts: vec![(dest, body)], certification_failed: false }
    }
}

fn csv_doc(header: &str, sections: &[String]) -> String {
    let mut s = format!("# {header}\n");
    s.push_str(&sections.join("\n"));
    s
}

fn json_doc(header: &str, mut body: Value) -> String {
    let obj = body.as_object_mut().expect("json body is an object");
    obj.insert("header".into(), Value::String(header.to_string()));
    let mut s = serde_json::to_string_pretty(&body).expect("json serializes");
    s.push('\n');
    s
}

fn render(plan: &RunPlan, sections: &[String], body: Value) -> String {
    let header = plan.header();
    match plan.format {
        Format::Csv => csv_doc(&header, sections),
        Format::Json => json_doc(&header, body),
    }
}

fn check_state(x: &Rat, flag: &str) -> Result<(), RunError> {
    if x.is_negative() || *x >= Rat::one() {
        return Err(RunError::Usage(format!("{flag} {x} must lie in [0, 1)")));
    }
    Ok(())
}

pub fn execute(plan: &RunPlan) -> Result<Outcome, RunError> {
    let dest = Dest::for_plan(plan);
    let kernel = plan.kernel();
    match &plan.command {
        Command::Map(a) => {
            let f = iterate(kernel.map(), plan.n)?;
            let want_table = a.table || (!a.fixed_points && a.orbit.is_none());
            let mut sections = Vec::new();
            let mut body = json!({});
            if want_table {
                sections.push(f.branch_table().to_string());
                body["branches"] = Value::Array(
                    f.branches()
                        .iter()
                        .map(|b| {
                            json!({
                                "lo": b.lo, "hi": b.hi, "slope": b.slope, "intercept": b.intercept
                            })
                        })
                        .collect(),
                );
            }
            if a.fixed_points {
                let fp = fixed_points(&f);
                let mut s = String::from("kind,lo,hi\n");
                let mut items = Vec::new();
                for set in &fp.0 {
                    let (kind, lo, hi) = match set {
                        FixedSet::Point(p) => ("point", p, p),
                        FixedSet::Interval(i) => ("interval", &i.lo, &i.hi),
                    };
                    let _ = writeln!(s, "{kind},{lo},{hi}");
                    items.push(json!({"kind": kind, "lo": lo, "hi": hi}));
                }
                sections.push(s);
                body["fixed_points"] = Value::Array(items);
            }
            if let Some(x0) = &a.orbit {
                check_state(x0, "--orbit")?;
                let arc = match &a.arc {
                    Some((lo, hi)) => Interval::of(lo.clone(), hi.clone()),
                    None => wrap_set(&kernel),
                };
                let g = kernel.map();
                let float = rotation_average_f64(g, x0.to_f64(), a.orbit_len, &arc);
                let exact = if a.orbit_len <= EXACT_ROTATION_LIMIT {
                    Some(rotation_average(g, x0, a.orbit_len, &arc)?)
                } else {
                    None
                };
                let exact_str = exact.as_ref().map(Rat::to_string).unwrap_or_default();
                sections.push(format!(
                    "x0,orbit_len,arc_lo,arc_hi,average_exact,average\n{x0},{},{},{},{exact_str},{float:e}\n",
                    a.orbit_len, arc.lo, arc.hi
                ));
                body["rotation"] = json!({
                    "x0": x0, "orbit_len": a.orbit_len, "arc_lo": arc.lo, "arc_hi": arc.hi,
                    "average_exact": exact, "average": float
                });
            }
            Ok(Outcome::single(dest, render(plan, &sections, body)))
        }
        Command::Simulate(a) => {
            check_state(&a.x0, "--x0")?;
            let x0 = a.x0.to_f64();
            let (sections, body) = match &a.target {
                Some((lo, hi)) => {
                    let target = Interval::of(lo.clone(), hi.clone());
                    let est = kernel.kn_prob_mc(x0, &target, plan.n, plan.samples, Seed(plan.seed));
                    let csv = format!(
                        "estimate,lower_bound,std_error,hits,samples\n{:e},{:e},{:e},{},{}\n",
                        est.estimate, est.lower_bound, est.std_error, est.hits, est.samples
                    );
                    (vec![csv], json!({ "estimate": est }))
                }
                None => {
                    let mut csv = String::from("path,step,x\n");
                    let mut paths = Vec::with_capacity(plan.samples);
                    for p in 0..plan.samples {
                        let mut rng = shard_rng(Seed(plan.seed), p as u64);
                        let mut x = x0;
                        let mut path = vec![x];
                        let _ = writeln!(csv, "{p},0,{x:e}");
                        for step in 1..=plan.n {
                            x = kernel.step_unchecked(x, kernel.draw_noise(&mut rng));
                            let _ = writeln!(csv, "{p},{step},{x:e}");
                            path.push(x);
                        }
                        paths.push(path);
                    }
                    (vec![csv], json!({ "paths": paths }))
                }
            };
            Ok(Outcome::single(dest, render(plan, &sections, body)))
        }
        Command::Ulam(a) => {
            let chain = kernel.build_ulam(plan.m)?;
            let (sections, body) = if a.propagate {
                let start = match &a.x0 {
                    Some(x) => {
                        check_state(x, "--x0")?;
                        cells::point_mass(plan.m, cells::cell_of(plan.m, x.to_f64()))
                    }
                    None => cells::uniform(plan.m),
                };
                let d = chain.propagate(&start, plan.n)?;
                (vec![density_csv(&d)], json!({ "density": d }))
            } else {
                let triplets: Vec<Value> = (0..chain.m())
                    .flat_map(|i| {
                        let (cols, vals) = chain.row(i);
                        cols.iter().zip(vals).map(move |(j, v)| json!([i, j, v])).collect::<Vec<_>>()
                    })
                    .collect();
                (
                    vec![chain.triplet_csv()],
                    json!({ "m": chain.m(), "nnz": chain.nnz(), "triplets": triplets }),
                )
            };
            Ok(Outcome::single(dest, render(plan, &sections, body)))
        }
        Command::Couple(a) => {
            check_state(&a.x0, "--x0")?;
            check_state(&a.y0, "--y0")?;
            let exact = meet_prob_exact(&kernel, &a.x0, &a.y0)?;
            let hist = meeting_histogram(&kernel, a.x0.to_f64(), a.y0.to_f64(), plan.n, plan.samples, Seed(plan.seed));
            let sections = vec![
                format!("meet_prob_exact,one_step_frequency\n{exact},{:e}\n", hist.frequency(1)),
                hist.to_string(),
            ];
            let counts: serde_json::Map<String, Value> =
                hist.counts.iter().map(|(t, c)| (t.to_string(), json!(c))).collect();
            let body = json!({
                "meet_prob_exact": exact,
                "one_step_frequency": hist.frequency(1),
                "runs": hist.runs,
                "histogram": counts,
            });
            Ok(Outcome::single(dest, render(plan, &sections, body)))
        }
        Command::Certify => {
            let report = certify::verify_all_with(&kernel)?;
            let rate = certify::certified_params();
            let sections = vec![claims::to_csv(&report), rate_csv(&rate)];
            let body = json!({
                "claims": report,
                "rate": rate,
                "rate_float": { "rho": rate.rho_f64(), "c": rate.c_f64() },
            });
            Ok(Outcome {
                artifacts: vec![(dest, render(plan, &sections, body))],
                certification_failed: claims::any_failed(&report),
            })
        }
        Command::Spectrum(a) => {
            let chain = kernel.build_ulam(plan.m)?;
            let st = stationary(&chain, a.tol, MAX_POWER_ITERATIONS)?;
            let m = plan.m;
            let initials = vec![
                ("uniform".to_string(), cells::uniform(m)),
                ("cell0".to_string(), cells::point_mass(m, 0)),
                (format!("cell{}", m / 3), cells::point_mass(m, m / 3)),
                (format!("cell{}", 2 * m / 3), cells::point_mass(m, 2 * m / 3)),
            ];
            let series = decay_curve(&chain, &initials, &st.density, plan.n)?;
            let est = second_modulus(&chain, a.burnin, a.window)?;
            let summary = format!(
                "stationary_residual,stationary_iterations,rate,rate_3step,fit_residual,truncated\n\
                 {:e},{},{:e},{:e},{:e},{}\n",
                st.residual, st.iterations, est.rate, est.rate_3step, est.residual, est.truncated
            );
            let body = json!({
                "stationary": { "residual": st.residual, "iterations": st.iterations, "density": st.density },
                "modulus": est,
                "decay": series,
            });
            Ok(Outcome::single(dest, render(plan, &[summary, series.to_csv()], body)))
        }
        Command::ReproduceLm(a) => reproduce_lm(plan, &kernel, a, dest),
    }
}

/// `{x : a x + b >= 1}`, where one step of `g` wraps around.
fn wrap_set(kernel: &Kernel) -> Interval {
    let lo = (Rat::one() - kernel.offset()) / kernel.slope();
    let lo = if lo.is_negative() { Rat::zero() } else { lo };
    if lo >= Rat::one() {
        Interval::of(Rat::one(), Rat::one())
    } else {
        Interval::of(lo, Rat::one())
    }
}

fn density_csv(d: &[f64]) -> String {
    let m = d.len() as i64;
    let mut s = String::from("cell,lo,hi,mass\n");
    for (i, p) in d.iter().enumerate() {
        let i = i as i64;
        let _ = writeln!(s, "{i},{},{},{p:e}", Rat::new(i, m), Rat::new(i + 1, m));
    }
    s
}

fn rate_csv(rate: &CertifiedRate) -> String {
    let mut s = String::from("quantity,value\n");
    let rows: [(&str, String); 11] = [
        ("s0_lo", rate.s0.lo.to_string()),
        ("s0_hi", rate.s0.hi.to_string()),
        ("n0", rate.n0.to_string()),
        ("beta0", rate.beta0.to_string()),
        ("alpha1", rate.alpha1.to_string()),
        ("alpha2", rate.alpha2.to_string()),
        ("rho1", rate.rho1.to_string()),
        ("n1", rate.n1.to_string()),
        ("rho_upper", rate.rho.to_string()),
        ("rho_lower", rate.rho_lower.to_string()),
        ("c", rate.c.to_string()),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

fn reproduce_lm(
    plan: &RunPlan,
    kernel: &Kernel,
    a: &crate::args::ReproduceArgs,
    dest: Dest,
) -> Result<Outcome, RunError> {
    let chain: UlamChain = kernel.build_ulam(plan.m)?;
    let m = plan.m;
    let traj = chain.trajectory(&cells::uniform(m), plan.n + 3)?;
    let mut bands_csv = String::from("n,band_index,lo,hi,mass\n");
    let mut totals_csv = String::from("n,total,cyclicity\n");
    let mut snapshots = Vec::with_capacity(plan.n);
    for n in 1..=plan.n {
        let report = band_report(&traj[n], &a.band)?;
        let cyc = cyclicity_score(&traj[n], &traj[n + 1], &traj[n + 2], &traj[n + 3])?;
        for line in report.csv_rows().lines() {
            let _ = writeln!(bands_csv, "{n},{line}");
        }
        let _ = writeln!(totals_csv, "{n},{:e},{cyc:e}", report.total);
        snapshots.push(json!({ "n": n, "report": report, "cyclicity": cyc }));
    }
    let st = stationary(&chain, 1e-10, MAX_POWER_ITERATIONS)?;
    let initials = vec![
        ("uniform".to_string(), cells::uniform(m)),
        ("cell0".to_string(), cells::point_mass(m, 0)),
    ];
    let series = decay_curve(&chain, &initials, &st.density, a.horizon.max(1))?;
    let header = plan.header();
    let stationary_line = format!(
        "stationary_residual,stationary_iterations\n{:e},{}\n",
        st.residual, st.iterations
    );
    match plan.format {
        Format::Json => {
            let body = json!({
                "bands": snapshots,
                "stationary": { "residual": st.residual, "iterations": st.iterations },
                "decay": series,
            });
            Ok(Outcome::single(dest, json_doc(&header, body)))
        }
        Format::Csv => {
            let bands = csv_doc(&header, &[bands_csv, totals_csv]);
            let decay = csv_doc(&header, &[stationary_line, series.to_csv()]);
            let decay_dest = match &a.decay_out {
                Some(p) => Dest::File(p.clone()),
                None => dest.sibling("decay"),
            };
            if dest == Dest::Stdout && decay_dest == Dest::Stdout {
                return Ok(Outcome::single(dest, format!("{bands}\n{decay}")));
            }
            Ok(Outcome {
                artifacts: vec![(dest, bands), (decay_dest, decay)],
                certification_failed: false,
            })
        }
    }
}
