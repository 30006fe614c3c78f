use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rtorsion::analytic::{analytic_torsion_circle, CircleModel};
use rtorsion::bundle::{check_flatness, kt_class, FlatBundle};
use rtorsion::complex::validate;
use rtorsion::corpus::{content_hash, corpus_get, corpus_list};
use rtorsion::euler::{act_in, loop_modify, spray_difference_in, H1Basis, Spray};
use rtorsion::io::{bundle_to_value, complex_to_json, parse_complex, spray_to_value, to_json_17, LoadedBundle};
use rtorsion::subdivide::barycentric_subdivide;
use rtorsion::suite::{run_suite, SuiteOptions, COVERAGE, DEFAULT_SEED, SUITES};
use rtorsion::torsion::{assemble, base_change_ratio, ft_torsion, spray_change_ratio, t_comb, S_EXPONENT};
use rtorsion::{CellId, Complex, Scalar};
use serde_json::{json, Value};

use crate::input::{self, Loaded};
use crate::output::{self, emit};
use crate::{AnalyticCommand, Cli, Command, CorpusCommand, EulerCommand, Inputs, SuiteCommand, TorsionCommand};

const COMPARE_TOL: f64 = 1e-9;
const ANALYTIC_TOL: f64 = 1e-6;
const KT_TOL: f64 = 1e-12;

/// Runs in the arithmetic the flags ask for: `--exact` keeps rational
/// bundles rational, otherwise everything is converted to `f64`.
macro_rules! with_bundle {
    ($loaded:expr, $exact:expr, |$b:ident| $body:expr) => {
        match (&$loaded, $exact) {
            (LoadedBundle::Exact(q), true) => {
                let $b = q;
                $body
            }
            (other, _) => {
                let f = other.to_f64();
                let $b = &f;
                $body
            }
        }
    };
}

pub fn run(cli: &Cli) -> Result<bool> {
    let (exact, json) = (cli.exact, cli.json);
    match &cli.command {
        Command::Validate(inputs) => validate_cmd(inputs, exact, json),
        Command::Chi(inputs) => {
            let c = input::complex(inputs)?;
            let cells: Vec<usize> = (0..=c.dimension()).map(|d| c.count(d)).collect();
            emit(&json!({"complex": c.name(), "dimension": c.dimension(), "cells": cells, "euler_characteristic": c.euler_characteristic()}), json);
            Ok(true)
        }
        Command::Homology { inputs, degree } => {
            let c = input::complex(inputs)?;
            let degrees: Vec<usize> = match degree {
                Some(d) => vec![*d],
                None => (0..=c.dimension()).collect(),
            };
            let mut out = serde_json::Map::new();
            out.insert("complex".into(), json!(c.name()));
            for d in degrees {
                let h = c.integral_homology(d)?;
                out.insert(format!("H{d}"), json!({"betti": h.betti, "torsion": h.torsion, "group": group_name(h.betti, &h.torsion)}));
            }
            emit(&Value::Object(out), json);
            Ok(true)
        }
        Command::Subdivide { inputs, rounds, out } => {
            let l = input::load(inputs, exact)?;
            let v = with_bundle!(l.bundle, exact, |b| subdivide_cmd(&l.complex, b, &l.spray, *rounds)?);
            write_or_emit(v, out.as_deref(), json)
        }
        Command::Transport { inputs, path, from } => {
            let l = input::load(inputs, exact)?;
            let start = from.map(CellId).unwrap_or(l.complex.base_vertex());
            let p = l.complex.path(start, input::steps(path)?)?;
            let v = with_bundle!(l.bundle, exact, |b| {
                let t = b.transport(&p)?;
                json!({"from": p.start.0, "to": p.end.0, "steps": p.len(), "matrix": output::matrix(&t), "det": output::entry(&t.det())})
            });
            emit(&v, json);
            Ok(true)
        }
        Command::Kt { inputs, loop_ } => {
            let l = input::load(inputs, exact)?;
            let v = with_bundle!(l.bundle, exact, |b| match loop_ {
                Some(s) => {
                    let g = input::closed_loop(&l.complex, s)?;
                    let class = H1Basis::new(&l.complex)?.class_of_loop(&g)?;
                    json!({"loop_class": class.coords, "moduli": class.moduli, "value": b.kt_evaluate(&g)?})
                }
                None => {
                    let k = kt_class(&l.complex, b)?;
                    let tol = cli.tol.unwrap_or(KT_TOL);
                    json!({"moduli": k.moduli, "values": k.values, "unimodular": k.is_zero(tol), "tolerance": tol})
                }
            });
            emit(&v, json);
            Ok(true)
        }
        Command::Euler(e) => euler_cmd(e, exact, json),
        Command::Torsion(TorsionCommand::Compute(inputs)) => {
            let l = input::load(inputs, exact)?;
            let r = with_bundle!(l.bundle, exact, |b| ft_torsion(&l.complex, b, &l.spray)?);
            if json {
                println!("{}", to_json_17(&r, true));
            } else {
                let mut v = serde_json::to_value(&r)?;
                let obj = v.as_object_mut().unwrap();
                obj.remove("spectra");
                obj.insert("ft_metric".into(), json!(r.ft_metric.value));
                obj.insert("harmonic_metric".into(), json!(r.harmonic_metric.value));
                emit(&v, false);
            }
            Ok(true)
        }
        Command::Torsion(TorsionCommand::Compare { inputs, beta, u, base_change }) => {
            let l = input::load(inputs, exact)?;
            let tol = cli.tol.unwrap_or(COMPARE_TOL);
            let mut v = with_bundle!(l.bundle, exact, |b| compare_cmd(&l, b, beta.as_deref(), u.as_deref(), base_change.as_deref(), exact)?);
            let (ratio, expected) = (v["ratio"].as_f64().unwrap(), v["expected"].as_f64().unwrap());
            let err = (ratio - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
            let pass = err <= tol;
            let obj = v.as_object_mut().unwrap();
            obj.insert("relative_error".into(), json!(err));
            obj.insert("tolerance".into(), json!(tol));
            obj.insert("pass".into(), json!(pass));
            emit(&v, json);
            Ok(pass)
        }
        Command::Analytic(AnalyticCommand::Circle { holonomy, circumference, truncation }) => {
            let h = match input::matrix(holonomy, false)? {
                Ok(q) => q.to_f64(),
                Err(f) => f,
            };
            analytic_cmd(h, *circumference, *truncation, cli.tol.unwrap_or(ANALYTIC_TOL), json)
        }
        Command::Suite(SuiteCommand::List) => {
            let v = json!({"suites": SUITES, "coverage": COVERAGE.iter().map(|(inv, s)| json!({"invariant": inv, "suite": s})).collect::<Vec<_>>()});
            if json {
                emit(&v, true);
            } else {
                for s in SUITES {
                    let covered: Vec<&str> = COVERAGE.iter().filter(|&&(_, x)| x == s).map(|(i, _)| *i).collect();
                    println!("{s:20} {}", covered.join(", "));
                }
            }
            Ok(true)
        }
        Command::Suite(SuiteCommand::Run { name, property, seed }) => {
            let opts = SuiteOptions { exact, tol: cli.tol, only: property.clone(), seed: seed.unwrap_or(DEFAULT_SEED) };
            let report = run_suite(name, &opts)?;
            if json {
                println!("{}", to_json_17(&report, true));
            } else {
                for p in &report.properties {
                    let measured: Vec<String> = p.measured.iter().map(|(k, v)| format!("{k}={v:.3e}")).collect();
                    println!("{} {:4} {} [{}]", if p.pass { "PASS" } else { "FAIL" }, p.index, p.id, measured.join(" "));
                    if !p.pass {
                        if let Some(note) = &p.note {
                            println!("     note: {note}");
                        }
                        if let Some(r) = &p.repro {
                            println!("     repro: {r}");
                        }
                    }
                }
                println!("{} {}: {} passed, {} failed ({} mode, seed {:#x})", report.status, report.suite, report.passed, report.failed, report.mode, report.seed);
            }
            Ok(report.all_passed())
        }
        Command::Corpus(CorpusCommand::List) => {
            let list = corpus_list();
            if json {
                println!("{}", to_json_17(&list, true));
            } else {
                for c in list {
                    println!("{:16} dim {} chi {:3} cells {:3} {}", c.name, c.dimension, c.euler_characteristic, c.cells, &c.content_hash[..16]);
                }
            }
            Ok(true)
        }
        Command::Corpus(CorpusCommand::Get { name, out }) => {
            let e = corpus_get(name)?;
            let v = json!({
                "name": e.name,
                "content_hash": content_hash(&e.complex),
                "complex": e.complex.to_description(),
                "bundle": e.bundle.as_ref().map(bundle_to_value),
                "spray": spray_to_value(&e.spray),
            });
            write_or_emit(v, out.as_deref(), json)
        }
    }
}

fn group_name(betti: usize, torsion: &[u64]) -> String {
    let mut parts = Vec::new();
    match betti {
        0 => {}
        1 => parts.push("Z".to_string()),
        b => parts.push(format!("Z^{b}")),
    }
    parts.extend(torsion.iter().map(|t| format!("Z/{t}")));
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn validate_cmd(inputs: &Inputs, exact: bool, json: bool) -> Result<bool> {
    let desc = match (&inputs.complex, &inputs.corpus) {
        (Some(p), _) => parse_complex(&input::read(p)?)?,
        _ => input::complex(inputs)?.to_description(),
    };
    let report = validate(&desc);
    let mut v = json!({"name": desc.name, "valid": report.is_valid(), "violations": report.violations});
    let mut ok = report.is_valid();
    if ok && (inputs.bundle.is_some() || inputs.corpus.is_some()) {
        let l = input::load(inputs, exact)?;
        let flat = with_bundle!(l.bundle, exact, |b| check_flatness(&l.complex, b)?);
        ok &= flat.passed;
        v["flat"] = json!(flat.passed);
        v["flatness"] = serde_json::to_value(&flat)?;
    }
    if !json {
        if let Some(list) = v["violations"].as_array() {
            for viol in list {
                println!("violation: {}", viol["message"].as_str().unwrap_or_default());
            }
        }
        v.as_object_mut().unwrap().remove("violations");
        if let Some(f) = v.as_object_mut().unwrap().remove("flatness") {
            let worst = f["deviations"].as_array().into_iter().flatten().filter_map(|d| d["deviation"].as_f64()).fold(0.0, f64::max);
            v["max_flatness_deviation"] = json!(worst);
        }
    }
    emit(&v, json);
    Ok(ok)
}

fn subdivide_cmd<F: Scalar>(c: &Complex, b: &FlatBundle<F>, s: &Spray, rounds: usize) -> Result<Value> {
    let (mut k, mut bb, mut ss) = (c.clone(), b.clone(), s.clone());
    for _ in 0..rounds {
        let sd = barycentric_subdivide(&k, &bb, &ss)?;
        (k, bb, ss) = (sd.complex, sd.bundle, sd.spray);
    }
    let cells: Vec<usize> = (0..=k.dimension()).map(|d| k.count(d)).collect();
    Ok(json!({
        "rounds": rounds,
        "cells": cells,
        "euler_characteristic": k.euler_characteristic(),
        "complex": k.to_description(),
        "bundle": bundle_to_value(&bb),
        "spray": spray_to_value(&ss),
    }))
}

/// Prints `v`, or writes its complex/bundle/spray parts as files in `dir`.
fn write_or_emit(mut v: Value, dir: Option<&Path>, json: bool) -> Result<bool> {
    let Some(dir) = dir else {
        if !json {
            // files are the useful form of these objects; keep text output short
            let obj = v.as_object_mut().unwrap();
            for key in ["complex", "bundle", "spray"] {
                obj.remove(key);
            }
            obj.insert("note".into(), json!("use --json or --out DIR for the complex, bundle and spray"));
        }
        emit(&v, json);
        return Ok(true);
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let obj = v.as_object_mut().unwrap();
    let mut written = Vec::new();
    for key in ["complex", "bundle", "spray"] {
        if let Some(part) = obj.remove(key) {
            if part.is_null() {
                continue;
            }
            let path = dir.join(format!("{key}.json"));
            let text = if key == "complex" { complex_to_json(&rtorsion::Complex::from_description(&serde_json::from_value(part)?)?) } else { serde_json::to_string_pretty(&part)? };
            fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            written.push(path.display().to_string());
        }
    }
    obj.insert("written".into(), json!(written));
    emit(&v, json);
    Ok(true)
}

fn euler_cmd(cmd: &EulerCommand, exact: bool, json: bool) -> Result<bool> {
    let v = match cmd {
        EulerCommand::Diff { inputs, beta } => {
            let l = input::load(inputs, exact)?;
            let beta = input::spray_file(&l.complex, beta)?;
            let h1 = H1Basis::new(&l.complex)?;
            let u = spray_difference_in(&h1, &l.complex, &l.spray, &beta)?;
            json!({"class": u.coords, "moduli": u.moduli})
        }
        EulerCommand::Act { inputs, u } => {
            let l = input::load(inputs, exact)?;
            let h1 = H1Basis::new(&l.complex)?;
            let u = h1.class(input::coords(u)?)?;
            let s = act_in(&h1, &l.complex, &u, &l.spray)?;
            json!({"class": u.coords, "moduli": u.moduli, "spray": spray_to_value(&s)})
        }
        EulerCommand::LoopModify { inputs, loop_ } => {
            let l = input::load(inputs, exact)?;
            let g = input::closed_loop(&l.complex, loop_)?;
            let h1 = H1Basis::new(&l.complex)?;
            let s = loop_modify(&l.complex, &l.spray, &g)?;
            let d = spray_difference_in(&h1, &l.complex, &l.spray, &s)?;
            json!({
                "loop_class": h1.class_of_loop(&g)?.coords,
                "euler_characteristic": l.complex.euler_characteristic(),
                "difference": d.coords,
                "moduli": d.moduli,
                "spray": spray_to_value(&s),
            })
        }
    };
    emit(&v, json);
    Ok(true)
}

fn compare_cmd<F: Scalar>(l: &Loaded, b: &FlatBundle<F>, beta: Option<&Path>, u: Option<&str>, base_change: Option<&str>, exact: bool) -> Result<Value> {
    let c = &l.complex;
    if let Some(m) = base_change {
        let s: rtorsion::Mat<F> = match input::matrix(m, exact)? {
            Ok(q) => convert(&q)?,
            Err(f) => convert(&f)?,
        };
        let ratio = base_change_ratio(c, b, &l.spray, &s)?;
        let chi = c.euler_characteristic();
        let expected = s.det().magnitude().powf(-2.0 * chi as f64);
        return Ok(json!({"change": "base", "ratio": ratio, "expected": expected, "law": "|det S|^(-2 chi)", "euler_characteristic": chi}));
    }
    let h1 = H1Basis::new(c)?;
    let (beta, u) = match (beta, u) {
        (Some(p), _) => {
            let s = input::spray_file(c, p)?;
            let u = spray_difference_in(&h1, c, &l.spray, &s)?;
            (s, u)
        }
        (None, Some(coords)) => {
            let u = h1.class(input::coords(coords)?)?;
            (act_in(&h1, c, &u, &l.spray)?, u)
        }
        _ => bail!("torsion compare needs one of --beta, --u or --base-change"),
    };
    let ratio = spray_change_ratio(c, b, &l.spray, &beta)?;
    let det = b.transport(&h1.representative(c, &u)?)?.det();
    let expected = det.magnitude().powi(S_EXPONENT);
    Ok(json!({"change": "spray", "class": u.coords, "moduli": u.moduli, "ratio": ratio, "expected": expected, "law": format!("|det rho(u)|^{S_EXPONENT}")}))
}

/// Converts a parsed matrix into the working scalar (floats only reach here
/// in floating mode).
fn convert<A: Scalar, B: Scalar>(m: &rtorsion::Mat<A>) -> Result<rtorsion::Mat<B>> {
    let data = m.row_major().iter().map(|x| x.to_rational().map(|r| B::from_rational(&r))).collect::<Option<Vec<B>>>().context("matrix entry is not finite")?;
    Ok(rtorsion::Mat::from_row_major(m.nrows(), m.ncols(), data))
}

fn analytic_cmd(h: rtorsion::FMat, circumference: f64, truncation: usize, tol: f64, json: bool) -> Result<bool> {
    let model = CircleModel::new(h.clone(), circumference)?;
    let an = analytic_torsion_circle(&model, truncation)?;
    let circle = corpus_get("circle-1cell")?;
    let edge = circle.complex.cells_of_dim(1)[0];
    let bundle = FlatBundle::new(&circle.complex, h.nrows(), [(edge, h)].into())?;
    let (t, _) = t_comb(&assemble(&circle.complex, &bundle, &circle.spray)?)?;
    let rel = |x: f64| (x - t).abs() / t;
    let pass = an.det.discrepancy <= tol;
    let mut v = json!({
        "rank": an.rank,
        "circumference": an.circumference,
        "acyclic": an.acyclic,
        "closed_form_det": an.det.closed_form,
        "truncated_det": an.det.truncated,
        "truncation": an.det.truncation,
        "discrepancy": an.det.discrepancy,
        "t_an": an.t_an,
        "t_an_truncated": an.t_an_truncated,
        "anomaly_corrected": an.anomaly_corrected,
        "t_comb": t,
        "raw_relative_gap": rel(an.t_an),
        "corrected_relative_gap": rel(an.anomaly_corrected),
        "tolerance": tol,
        "pass": pass,
    });
    if json {
        v["harmonic_dims"] = json!(an.harmonic_dims);
    }
    emit(&v, json);
    Ok(pass)
}
