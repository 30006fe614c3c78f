use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rtorsion::bundle::FlatBundle;
use rtorsion::corpus::corpus_get;
use rtorsion::euler::{canonical_spray, Spray};
use rtorsion::io::{load_bundle, load_complex, load_spray, parse_matrix_rows, parse_steps, LoadedBundle};
use rtorsion::{Complex, EdgePath, FMat, QMat, Step};

use crate::Inputs;

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Inline JSON, or the contents of a file when prefixed with `@`.
pub fn inline(arg: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(p) => read(Path::new(p)),
        None => Ok(arg.to_string()),
    }
}

pub struct Loaded {
    pub complex: Complex,
    pub bundle: LoadedBundle,
    pub spray: Spray,
}

pub fn complex(inputs: &Inputs) -> Result<Complex> {
    match (&inputs.complex, &inputs.corpus) {
        (Some(p), _) => load_complex(&read(p)?).with_context(|| format!("loading complex {}", p.display())),
        (None, Some(name)) => Ok(corpus_get(name)?.complex),
        (None, None) => bail!("one of --complex FILE or --corpus NAME is required"),
    }
}

pub fn load(inputs: &Inputs, exact: bool) -> Result<Loaded> {
    let entry = match (&inputs.complex, &inputs.corpus) {
        (None, Some(name)) => Some(corpus_get(name)?),
        _ => None,
    };
    let complex = match &entry {
        Some(e) => e.complex.clone(),
        None => self::complex(inputs)?,
    };
    let bundle = match (&inputs.bundle, &entry) {
        (Some(p), _) => load_bundle(&complex, &read(p)?, exact).with_context(|| format!("loading bundle {}", p.display()))?,
        (None, Some(e)) if e.bundle.is_some() => LoadedBundle::Exact(e.bundle.clone().unwrap()),
        _ => LoadedBundle::Exact(FlatBundle::trivial(&complex, 1)),
    };
    let spray = match (&inputs.spray, &entry) {
        (Some(p), _) => spray_file(&complex, p)?,
        (None, Some(e)) => e.spray.clone(),
        (None, None) => canonical_spray(&complex),
    };
    Ok(Loaded { complex, bundle, spray })
}

pub fn spray_file(complex: &Complex, p: &Path) -> Result<Spray> {
    load_spray(complex, &read(p)?).with_context(|| format!("loading spray {}", p.display()))
}

pub fn steps(arg: &str) -> Result<Vec<Step>> {
    Ok(parse_steps(&inline(arg)?)?)
}

pub fn closed_loop(complex: &Complex, arg: &str) -> Result<EdgePath> {
    let p = complex.path(complex.base_vertex(), steps(arg)?)?;
    if !p.is_closed() {
        bail!("loop must return to the base vertex {}", complex.base_vertex());
    }
    Ok(p)
}

pub fn coords(arg: &str) -> Result<Vec<i64>> {
    let arg = arg.trim().trim_start_matches('[').trim_end_matches(']');
    if arg.trim().is_empty() {
        return Ok(vec![]);
    }
    arg.split(',').map(|s| s.trim().parse::<i64>().with_context(|| format!("bad coordinate {s:?}"))).collect()
}

pub fn matrix(arg: &str, exact: bool) -> Result<std::result::Result<QMat, FMat>> {
    Ok(parse_matrix_rows(&inline(arg)?, exact)?)
}
