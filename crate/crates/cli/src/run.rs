//! Subcommand execution: resolve the potential, call into the library,
//! assemble result JSON and an exit code.

use std::path::Path;

use serde_json::{json, Value};

use witten_core::criterion::{full_check, SamplingPlan};
use witten_core::error::{Error, Result};
use witten_core::families;
use witten_core::limitpoly::{
    limit_polynomial, local_min_scan, no_local_min_certificate, LimitStatus, ScalingSequence,
};
use witten_core::localization::{build_partition, build_partition_with_centers, verify_partition};
use witten_core::poly::Polynomial;
use witten_core::potential::Potential;
use witten_core::sampling;
use witten_core::spectral::{
    assemble_witten, box_stability_probe, ims_identity_check, lanczos_smallest,
    lanczos_smallest_shift_invert, m_tau, maximal_estimate_probe, BoxStabilityVerdict, Grid,
    TestBump,
};

use crate::args::{Command, PotentialArgs};

pub struct CommandOutcome {
    pub config: Value,
    pub results: Value,
    pub verdict: String,
    pub exit_code: i32,
}

const SEQ_DESCRIPTOR: &str = "y=v/j^a,tau=j^b,h=j^-c";

fn load_potential(args: &PotentialArgs) -> Result<(Potential, Value)> {
    let poly: Polynomial = if let Some(delta) = args.potential.strip_prefix("vdelta:") {
        let d: f64 = delta
            .parse()
            .map_err(|_| Error::invalid(format!("bad delta in `{}`", args.potential)))?;
        families::v_delta(d)
    } else if let Some(delta) = args.potential.strip_prefix("phidelta:") {
        let d: f64 = delta
            .parse()
            .map_err(|_| Error::invalid(format!("bad delta in `{}`", args.potential)))?;
        families::phi_delta(d)
    } else {
        let text = std::fs::read_to_string(&args.potential)?;
        serde_json::from_str(&text)?
    };
    let config = json!({"potential": args.potential, "k": args.k});
    let pot = Potential::new(poly, args.k)?;
    Ok((pot, config))
}

pub fn execute(cmd: &Command, seed: u64, out: Option<&Path>) -> Result<CommandOutcome> {
    match cmd {
        Command::CheckCriterion {
            potential,
            delta1,
            delta2,
            plan,
        } => {
            let (pot, mut config) = load_potential(potential)?;
            let plan = match plan {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    serde_json::from_str::<SamplingPlan>(&text)?
                }
                None => SamplingPlan::default_for(&pot, seed),
            };
            config["delta1"] = json!(delta1);
            config["delta2"] = json!(delta2);
            config["plan"] = serde_json::to_value(&plan)?;
            let report = full_check(&pot, *delta1, *delta2, &plan)?;
            let verdict = if report.holds_on_samples {
                "criterion_holds_on_samples".to_string()
            } else {
                format!(
                    "criterion_fails_on_samples: {}",
                    report
                        .failing_conditions
                        .iter()
                        .map(|c| format!("{c:?}").to_lowercase())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            };
            let exit_code = if report.holds_on_samples { 0 } else { 2 };
            Ok(CommandOutcome {
                config,
                results: serde_json::to_value(&report)?,
                verdict,
                exit_code,
            })
        }

        Command::LimitPoly {
            potential,
            seq,
            v,
            a,
            b,
            c,
            j,
            tol,
            ctilde,
            cert_box,
            cert_samples,
        } => {
            let (pot, mut config) = load_potential(potential)?;
            if seq.replace(' ', "") != SEQ_DESCRIPTOR {
                return Err(Error::invalid(format!(
                    "unsupported sequence descriptor `{seq}`; only `{SEQ_DESCRIPTOR}`"
                )));
            }
            let sequence = ScalingSequence::new(v.clone(), *a, *b, *c)?;
            config["seq"] = json!(SEQ_DESCRIPTOR);
            config["sequence"] = serde_json::to_value(&sequence)?;
            config["j"] = json!(j);
            config["tol"] = json!(tol);
            config["ctilde"] = json!(ctilde);
            let limit = limit_polynomial(pot.polynomial(), &sequence, j, *tol)?;
            let mut results = json!({ "limit": serde_json::to_value(&limit)? });
            if let Some(q) = &limit.q {
                let samples = sampling::grid_points(cert_box, *cert_samples);
                let cert = no_local_min_certificate(q, *ctilde, &samples)?;
                let scan = local_min_scan(q, cert_box, 41)?;
                results["certificate"] = serde_json::to_value(&cert)?;
                results["grid_scan_minimum"] = json!(scan);
            }
            let (verdict, exit_code) = match limit.status {
                LimitStatus::Converged => ("limit_converged".to_string(), 0),
                LimitStatus::Diverged => ("limit_diverged".to_string(), 2),
                LimitStatus::Indeterminate => ("limit_indeterminate".to_string(), 2),
            };
            Ok(CommandOutcome {
                config,
                results,
                verdict,
                exit_code,
            })
        }

        Command::Partition {
            potential,
            r#box,
            eps,
            r,
            res,
        } => {
            let (pot, mut config) = load_potential(potential)?;
            config["box"] = json!(r#box);
            config["eps"] = json!(eps);
            config["r"] = json!(r);
            config["res"] = json!(res);
            let part = build_partition(&pot, r#box, *eps, *r, *res)?;
            let check = verify_partition(&part, &pot, *eps)?;
            if let Some(path) = out {
                write_partition_csv(&part, &path.with_extension("csv"))?;
            }
            let results = json!({
                "grid": serde_json::to_value(&part.grid)?,
                "centers": part.centers,
                "radii": part.radii,
                "num_bumps": part.num_bumps(),
                "overlap_bound": part.overlap_bound,
                "check": serde_json::to_value(&check)?,
            });
            Ok(CommandOutcome {
                config,
                results,
                verdict: format!(
                    "partition_ok: {} bumps, overlap {}, normalization error {:.3e}",
                    part.num_bumps(),
                    check.overlap,
                    check.normalization_error
                ),
                exit_code: 0,
            })
        }

        Command::Spectrum {
            potential,
            tau,
            r#box,
            res,
            count,
            tol,
            max_iter,
            direct,
        } => {
            let (pot, mut config) = load_potential(potential)?;
            config["tau"] = json!(tau);
            config["box"] = json!(r#box);
            config["res"] = json!(res);
            config["count"] = json!(count);
            config["tol"] = json!(tol);
            config["method"] = json!(if *direct { "direct" } else { "shift_invert" });
            let grid = Grid::new(r#box.clone(), vec![*res; r#box.len()])?;
            let a = assemble_witten(&pot, *tau, &grid)?;
            let iters = if *max_iter == 0 {
                if *direct {
                    2 * a.num_nonzeros().max(grid.num_unknowns())
                } else {
                    600
                }
            } else {
                *max_iter
            };
            let spec = if *direct {
                lanczos_smallest(&a, *count, *tol, iters, seed)?
            } else {
                lanczos_smallest_shift_invert(&a, *count, *tol, iters, seed)?
            };
            if let Some(path) = out {
                write_spectrum_csv(&spec, path)?;
            }
            let all = spec.all_converged();
            Ok(CommandOutcome {
                config,
                results: serde_json::to_value(&spec)?,
                verdict: if all {
                    format!("spectrum_converged: {count} eigenvalues")
                } else {
                    "spectrum_partial: unconverged entries flagged".to_string()
                },
                exit_code: if all { 0 } else { 2 },
            })
        }

        Command::ProbeCompactness {
            potential,
            tau,
            lambda,
            boxes,
            h,
        } => {
            let (pot, mut config) = load_potential(potential)?;
            config["tau"] = json!(tau);
            config["lambda"] = json!(lambda);
            config["boxes"] = json!(boxes);
            config["h"] = json!(h);
            let report = box_stability_probe(&pot, *tau, *lambda, boxes, *h, seed)?;
            let (verdict, exit_code) = match report.verdict {
                BoxStabilityVerdict::Stabilizes => {
                    (format!("counts_stabilize: {:?}", report.counts), 0)
                }
                BoxStabilityVerdict::Grows => (format!("counts_grow: {:?}", report.counts), 2),
                BoxStabilityVerdict::Indeterminate => {
                    (format!("counts_indeterminate: {:?}", report.counts), 2)
                }
            };
            Ok(CommandOutcome {
                config,
                results: serde_json::to_value(&report)?,
                verdict,
                exit_code,
            })
        }

        Command::ImsCheck {
            potential,
            tau,
            r#box,
            res,
            r,
            eps,
            centers,
            bump_center,
            bump_radius,
        } => {
            let (pot, mut config) = load_potential(potential)?;
            config["tau"] = json!(tau);
            config["box"] = json!(r#box);
            config["res"] = json!(res);
            config["r"] = json!(r);
            config["eps"] = json!(eps);
            config["bump_center"] = json!(bump_center);
            config["bump_radius"] = json!(bump_radius);
            let part = match centers {
                Some(cs) => {
                    config["centers"] = json!(cs);
                    build_partition_with_centers(&pot, r#box, *eps, *r, *res, cs.clone())?
                }
                None => build_partition(&pot, r#box, *eps, *r, *res)?,
            };
            let grid = Grid::new(r#box.clone(), vec![res - 2; r#box.len()])?;
            let u = TestBump {
                center: bump_center.clone(),
                radius: *bump_radius,
            }
            .on_grid(&grid)?;
            let residual = ims_identity_check(&pot, *tau, &part, &u)?;
            Ok(CommandOutcome {
                config,
                results: json!({
                    "residual": residual,
                    "num_bumps": part.num_bumps(),
                    "overlap_bound": part.overlap_bound,
                }),
                verdict: format!("ims_residual: {residual:.3e}"),
                exit_code: 0,
            })
        }

        Command::MaximalEstimate {
            potential,
            tau,
            r#box,
            res,
            centers,
            bump_radius,
        } => {
            let (pot, mut config) = load_potential(potential)?;
            let bumps: Vec<TestBump> = match centers {
                Some(cs) => cs
                    .iter()
                    .map(|c| TestBump {
                        center: c.clone(),
                        radius: *bump_radius,
                    })
                    .collect(),
                None => default_bump_lattice(r#box, *bump_radius),
            };
            config["tau"] = json!(tau);
            config["box"] = json!(r#box);
            config["res"] = json!(res);
            config["bump_radius"] = json!(bump_radius);
            config["centers"] = json!(bumps.iter().map(|b| b.center.clone()).collect::<Vec<_>>());
            let grid = Grid::new(r#box.clone(), vec![*res; r#box.len()])?;
            let mut per_tau = Vec::new();
            let mut overall: f64 = 0.0;
            for &t in tau {
                let rep = maximal_estimate_probe(&pot, t, &bumps, &grid)?;
                overall = overall.max(rep.max_ratio);
                per_tau.push(serde_json::to_value(&rep)?);
            }
            Ok(CommandOutcome {
                config,
                results: json!({"per_tau": per_tau, "max_ratio": overall}),
                verdict: format!("maximal_estimate_max_ratio: {overall:.6}"),
                exit_code: 0,
            })
        }

        Command::Mtau { tau, tau0, c } => {
            let m = m_tau(*tau, *tau0, *c)?;
            let ratio_sq = (m * tau / tau0).powi(2);
            Ok(CommandOutcome {
                config: json!({"tau": tau, "tau0": tau0, "c": c}),
                results: json!({
                    "m": m,
                    "ratio_sq": ratio_sq,
                    "lower_bound": 1.0 - 1.0 / (2.0 * c),
                    "upper_bound": 1.0,
                }),
                verdict: format!("m_tau: {m}"),
                exit_code: 0,
            })
        }
    }
}

fn default_bump_lattice(box_bounds: &[[f64; 2]], radius: f64) -> Vec<TestBump> {
    // 3^n lattice at half-box fractions {-0.5, 0, 0.5}.
    let axes: Vec<Vec<f64>> = box_bounds
        .iter()
        .map(|b| {
            let mid = (b[0] + b[1]) / 2.0;
            let half = (b[1] - b[0]) / 2.0;
            vec![mid - 0.5 * half, mid, mid + 0.5 * half]
        })
        .collect();
    let mut centers: Vec<Vec<f64>> = vec![vec![]];
    for axis in &axes {
        let mut next = Vec::new();
        for c in &centers {
            for &v in axis {
                let mut cc = c.clone();
                cc.push(v);
                next.push(cc);
            }
        }
        centers = next;
    }
    centers
        .into_iter()
        .map(|center| TestBump { center, radius })
        .collect()
}

fn write_spectrum_csv(spec: &witten_core::spectral::SpectrumResult, path: &Path) -> Result<()> {
    let mut text = String::from("index,eigenvalue,residual,converged\n");
    for (i, ev) in spec.eigenvalues.iter().enumerate() {
        text.push_str(&format!(
            "{i},{ev:.17e},{:.6e},{}\n",
            spec.residuals[i], spec.converged[i]
        ));
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn write_partition_csv(
    part: &witten_core::localization::PartitionOfUnity,
    path: &Path,
) -> Result<()> {
    let n = part.grid.dimension();
    let mut header = String::from("node_index");
    for d in 0..n {
        header.push_str(&format!(",x{}", d + 1));
    }
    header.push_str(",mu,phi\n");
    let mut text = header;
    for mu in 0..part.num_bumps() {
        for &(idx, v) in &part.phi[mu] {
            let node = part.grid.node(idx);
            let coords: Vec<String> = node.iter().map(|x| format!("{x:.12e}")).collect();
            text.push_str(&format!("{idx},{},{mu},{v:.17e}\n", coords.join(",")));
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}
