//! `path=value` edits applied to a scenario document before validation.

use std::fmt;
use std::str::FromStr;

use serde_json::Value;

use super::catalog::builtin_catalog;
use super::error::{ErrorCode, ScenarioError};

/// One dotted-path assignment.
///
/// Path segments are object keys, array indices, or the `label`/`name` of an
/// array element. Paths starting with `catalog.<section>.<name>` edit a copy
/// of that catalog entry placed in the scenario's `profiles`, so the builtin
/// entry stays untouched and the change shows up in the report provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: String,
    pub value: Value,
}

impl Override {
    pub fn new(path: impl Into<String>, value: Value) -> Self {
        Override {
            path: path.into(),
            value,
        }
    }
}

impl FromStr for Override {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (path, raw) = s.split_once('=').ok_or_else(|| {
            ScenarioError::new(
                ErrorCode::InvalidOverride,
                "",
                format!("expected path=value, got '{s}'"),
            )
        })?;
        let path = path.trim();
        if path.is_empty() || path.split('.').any(str::is_empty) {
            return Err(ScenarioError::new(
                ErrorCode::InvalidOverride,
                path,
                "empty path segment",
            ));
        }
        let raw = raw.trim();
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        Ok(Override::new(path, value))
    }
}

impl fmt::Display for Override {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::String(s) => write!(f, "{}={}", self.path, s),
            v => write!(f, "{}={}", self.path, v),
        }
    }
}

fn invalid(path: &str, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::new(ErrorCode::InvalidOverride, path, msg)
}

/// An element matches by `label`, `name`, or, when unlabelled, by the
/// profile it references (the default fleet label).
fn element_matches(item: &Value, seg: &str) -> bool {
    let field = |k: &str| item.get(k).and_then(Value::as_str);
    if field("label") == Some(seg) || field("name") == Some(seg) {
        return true;
    }
    field("label").is_none() && field("device").and_then(|d| d.split('@').next()) == Some(seg)
}

fn step<'a>(node: &'a mut Value, seg: &str, full: &str) -> Result<&'a mut Value, ScenarioError> {
    match node {
        Value::Object(map) => map
            .get_mut(seg)
            .ok_or_else(|| invalid(full, format!("no field '{seg}'"))),
        Value::Array(items) => {
            if let Ok(i) = seg.parse::<usize>() {
                let len = items.len();
                return items
                    .get_mut(i)
                    .ok_or_else(|| invalid(full, format!("index {i} out of range ({len} items)")));
            }
            items
                .iter_mut()
                .find(|item| element_matches(item, seg))
                .ok_or_else(|| invalid(full, format!("no element labelled '{seg}'")))
        }
        _ => Err(invalid(full, format!("cannot descend into '{seg}'"))),
    }
}

fn set_at(
    root: &mut Value,
    segments: &[&str],
    value: Value,
    full: &str,
) -> Result<(), ScenarioError> {
    let (last, parents) = segments.split_last().expect("non-empty path");
    let mut node = root;
    for seg in parents {
        node = step(node, seg, full)?;
    }
    match node {
        Value::Object(map) => {
            map.insert((*last).to_string(), value);
            Ok(())
        }
        Value::Array(_) => {
            *step(node, last, full)? = value;
            Ok(())
        }
        _ => Err(invalid(full, format!("cannot set '{last}' on a scalar"))),
    }
}

fn shadow_catalog_entry<'a>(
    doc: &'a mut Value,
    section: &str,
    name: &str,
    full: &str,
) -> Result<&'a mut Value, ScenarioError> {
    let root = doc
        .as_object_mut()
        .ok_or_else(|| invalid(full, "document is not an object"))?;
    let profiles = root
        .entry("profiles")
        .or_insert_with(|| Value::Object(Default::default()))
        .as_object_mut()
        .ok_or_else(|| invalid(full, "'profiles' is not an object"))?;
    let list = profiles
        .entry(section)
        .or_insert_with(|| Value::Array(Vec::new()))
        .as_array_mut()
        .ok_or_else(|| invalid(full, format!("'profiles.{section}' is not a list")))?;
    let pos = list
        .iter()
        .position(|e| e.get("name").and_then(Value::as_str) == Some(name));
    let pos = match pos {
        Some(p) => p,
        None => {
            let catalog = serde_json::to_value(builtin_catalog()).expect("catalog serializes");
            let entry = catalog
                .get(section)
                .and_then(Value::as_array)
                .ok_or_else(|| invalid(full, format!("unknown catalog section '{section}'")))?
                .iter()
                .find(|e| e.get("name").and_then(Value::as_str) == Some(name))
                .cloned()
                .ok_or_else(|| invalid(full, format!("no catalog entry '{section}.{name}'")))?;
            list.push(entry);
            list.len() - 1
        }
    };
    Ok(&mut list[pos])
}

/// Applies `overrides` in order to a parsed document.
pub fn apply_overrides(doc: &mut Value, overrides: &[Override]) -> Result<(), ScenarioError> {
    for o in overrides {
        let segments: Vec<&str> = o.path.split('.').collect();
        if segments.first() == Some(&"catalog") {
            if segments.len() < 4 {
                return Err(invalid(
                    &o.path,
                    "expected catalog.<section>.<name>.<field>",
                ));
            }
            let entry = shadow_catalog_entry(doc, segments[1], segments[2], &o.path)?;
            set_at(entry, &segments[3..], o.value.clone(), &o.path)?;
            if let Some(obj) = entry.as_object_mut() {
                let was = obj
                    .get("provenance")
                    .and_then(Value::as_str)
                    .filter(|p| !p.starts_with("override"))
                    .map(str::to_string);
                let note = match was {
                    Some(w) => format!("override {o} (catalog: {w})"),
                    None => format!("override {o}"),
                };
                obj.insert("provenance".into(), Value::String(note));
            }
        } else {
            set_at(doc, &segments, o.value.clone(), &o.path)?;
        }
    }
    Ok(())
}
