//! Resolving command-line arguments to spaces, structures and elements.

use std::fs;
use std::path::Path;

use simgroup::element::ElementDoc;
use simgroup::{fixtures, BallAddress, Element, GroupAutomaton, Space, Structure};

use crate::error::{CliError, Result};

/// Read a file, or `None` when no such file exists.
fn read_if_file(arg: &str) -> Result<Option<String>> {
    let path = Path::new(arg);
    if !path.is_file() {
        return Ok(None);
    }
    fs::read_to_string(path).map(Some).map_err(|source| CliError::Io { path: arg.to_string(), source })
}

fn builtin_name(arg: &str) -> &str {
    let base = Path::new(arg).file_name().and_then(|f| f.to_str()).unwrap_or(arg);
    base.strip_suffix(".json").unwrap_or(base)
}

/// A space from a file, or a built-in name (`binary`, `golden-mean.json`, `v3-2`, ...).
pub fn space(arg: &str) -> Result<Space> {
    match read_if_file(arg)? {
        Some(text) => Space::parse(&text).map_err(|e| CliError::input(arg, e)),
        None => fixtures::by_name(builtin_name(arg)).ok_or_else(|| CliError::NotFound(arg.to_string())),
    }
}

pub fn automaton(arg: &str) -> Result<GroupAutomaton> {
    match read_if_file(arg)? {
        Some(text) => GroupAutomaton::parse(&text).map_err(|e| CliError::input(arg, e)),
        None if builtin_name(arg) == "klein-four" => Ok(fixtures::klein_four()),
        None => Err(CliError::NotFound(arg.to_string())),
    }
}

pub fn structure(space_arg: &str, automaton_arg: Option<&str>) -> Result<Structure> {
    let sp = space(space_arg)?;
    match automaton_arg {
        None => Ok(Structure::canonical(sp)),
        Some(a) => Ok(Structure::decorated(sp, automaton(a)?)?),
    }
}

fn element_text(arg: &str) -> Result<String> {
    if let Some(text) = read_if_file(arg)? {
        return Ok(text);
    }
    match builtin_name(arg) {
        "s" => Ok(fixtures::ELEMENT_S.to_string()),
        "g0" => Ok(fixtures::ELEMENT_G0.to_string()),
        _ => Err(CliError::NotFound(arg.to_string())),
    }
}

/// Elements together with the structure they live in. Without `--space`,
/// the space named inside the first element file is used.
pub fn elements(
    args: &[String],
    space_arg: Option<&str>,
    automaton_arg: Option<&str>,
) -> Result<(Structure, Vec<Element>)> {
    let mut docs = Vec::new();
    for a in args {
        let text = element_text(a)?;
        let doc: ElementDoc = serde_json::from_str(&text).map_err(|e| CliError::Json { path: a.clone(), source: e })?;
        docs.push((a, doc));
    }
    let space_name = match space_arg {
        Some(s) => s.to_string(),
        None => docs
            .first()
            .map(|(_, d)| d.space.clone())
            .filter(|s| !s.is_empty())
            .ok_or_else(|| CliError::Usage("the element names no space; pass --space".into()))?,
    };
    let st = structure(&space_name, automaton_arg)?;
    let elems = docs
        .into_iter()
        .map(|(a, d)| st.element_from_doc(&d).map_err(|e| CliError::input(a, e)))
        .collect::<Result<Vec<_>>>()?;
    Ok((st, elems))
}

pub fn address(arg: &str) -> Result<BallAddress> {
    arg.parse().map_err(|e| CliError::input(arg, e))
}
