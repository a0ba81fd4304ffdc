//! Resolving command-line operands: model sources, formulas and formula files.
//! An operand starting with `@` names a built-in artifact instead of a file.

use std::io::Read as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use itl_core::countermodels::{artifact, ARTIFACT_NAMES};
use itl_core::formula::{parse_formula, parse_formula_list};
use itl_core::model::parse_model;
use itl_core::{Formula, Model};

fn named(name: &str) -> Result<itl_core::countermodels::NamedArtifact> {
    artifact(name).ok_or_else(|| anyhow!("unknown artifact `{name}` (known: {})", ARTIFACT_NAMES.join(", ")))
}

fn read_source(path: &str) -> Result<String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).context("reading standard input")?;
        return Ok(text);
    }
    std::fs::read_to_string(Path::new(path)).with_context(|| format!("reading `{path}`"))
}

/// `@name` for a named model, `-` for standard input, otherwise a file path.
pub fn load_model(source: &str) -> Result<Model> {
    if let Some(name) = source.strip_prefix('@') {
        let a = named(name)?;
        return a
            .model()
            .cloned()
            .ok_or_else(|| anyhow!("artifact `{name}` is a {}, not a model", a.kind()));
    }
    let text = read_source(source)?;
    parse_model(&text).with_context(|| format!("parsing model `{source}`"))
}

/// `@name` for a named formula, otherwise formula text.
pub fn load_formula(text: &str) -> Result<Formula> {
    if let Some(name) = text.strip_prefix('@') {
        let a = named(name)?;
        return a
            .formula()
            .cloned()
            .ok_or_else(|| anyhow!("artifact `{name}` is a {}, not a formula", a.kind()));
    }
    parse_formula(text).with_context(|| format!("parsing formula `{text}`"))
}

/// One formula per line, `#` comments.
pub fn load_formula_file(path: &str) -> Result<Vec<Formula>> {
    let text = read_source(path)?;
    let formulas = parse_formula_list(&text).map_err(|(line, e)| anyhow!("{path}:{line}: {e}"))?;
    if formulas.is_empty() {
        bail!("`{path}` contains no formulas");
    }
    Ok(formulas)
}

/// Either a single operand or a formula file, whichever was given.
pub fn load_formulas(formula: Option<&str>, file: Option<&str>) -> Result<Vec<Formula>> {
    match (formula, file) {
        (Some(f), None) => Ok(vec![load_formula(f)?]),
        (None, Some(path)) => load_formula_file(path),
        _ => bail!("give exactly one of a formula or --formula-file"),
    }
}

/// Parses `w1,w2`.
pub fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `w1,w2`, found `{s}`"))?;
    Ok((a.trim().to_string(), b.trim().to_string()))
}
