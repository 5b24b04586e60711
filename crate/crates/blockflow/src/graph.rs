//! The controller model and its JSON file format.
//!
//! ```json
//! {
//!   "step_size": 0.001,
//!   "configuration": {},
//!   "blocks": [
//!     {"name": "c", "library": "stdblocks", "label": "Constant", "parameters": {"value": 1.0}},
//!     {"name": "g", "library": "stdblocks", "label": "Gain", "parameters": {"k": 2.0}}
//!   ],
//!   "connections": [{"from": "c.0", "to": "g.0"}]
//! }
//! ```

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use blockflow_core::Parameters;
use blockflow_runtime::json::ParamObject;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDescriptor {
    pub name: String,
    pub library: String,
    pub label: String,
    pub parameters: Parameters,
}

/// `block.port`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Endpoint {
    pub block: String,
    pub port: usize,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.block, self.port)
    }
}

impl FromStr for Endpoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("'{s}' is not of the form block.port");
        let (block, port) = s.rsplit_once('.').ok_or_else(bad)?;
        if block.is_empty() {
            return Err(bad());
        }
        Ok(Endpoint {
            block: block.to_owned(),
            port: port.parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Connection {
    pub from: Endpoint,
    pub to: Endpoint,
}

impl fmt::Display for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphModel {
    pub step_size: f64,
    pub configuration: Parameters,
    pub blocks: Vec<BlockDescriptor>,
    pub connections: Vec<Connection>,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read '{}': {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}:{column}: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", .problems.join("; "))]
    Invalid { problems: Vec<String> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    step_size: f64,
    #[serde(default)]
    configuration: ParamObject,
    blocks: Vec<RawBlock>,
    #[serde(default)]
    connections: Vec<RawConnection>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    name: String,
    library: String,
    label: String,
    #[serde(default)]
    parameters: ParamObject,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConnection {
    from: String,
    to: String,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

pub fn load_graph(path: &Path) -> Result<GraphModel, GraphError> {
    let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_graph(&text, path)
}

/// Parses and structurally checks a graph document. `origin` only labels
/// error messages.
pub fn parse_graph(text: &str, origin: &Path) -> Result<GraphModel, GraphError> {
    let raw: RawGraph = serde_json::from_str(text).map_err(|e| GraphError::Parse {
        path: origin.to_owned(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;

    let mut problems = Vec::new();
    if !(raw.step_size.is_finite() && raw.step_size > 0.0) {
        problems.push(format!("stepSize must be positive (step_size: {})", raw.step_size));
    }
    let mut names = HashSet::new();
    for b in &raw.blocks {
        if !valid_name(&b.name) {
            problems.push(format!(
                "invalid block name '{}': use letters, digits, '_' or '-'",
                b.name
            ));
        }
        if !names.insert(b.name.as_str()) {
            problems.push(format!("duplicate block name '{}'", b.name));
        }
        if b.library.is_empty() || b.label.is_empty() {
            problems.push(format!("block '{}' needs a library and a label", b.name));
        }
    }
    let mut connections = Vec::with_capacity(raw.connections.len());
    for c in &raw.connections {
        let ends = (c.from.parse::<Endpoint>(), c.to.parse::<Endpoint>());
        let (from, to) = match ends {
            (Ok(from), Ok(to)) => (from, to),
            (from, to) => {
                problems.extend(from.err().into_iter().chain(to.err()).map(|e| format!("connection: {e}")));
                continue;
            }
        };
        let connection = Connection { from, to };
        for end in [&connection.from, &connection.to] {
            if !names.contains(end.block.as_str()) {
                problems.push(format!("connection {connection}: no block named '{}'", end.block));
            }
        }
        connections.push(connection);
    }
    if !problems.is_empty() {
        return Err(GraphError::Invalid { problems });
    }

    Ok(GraphModel {
        step_size: raw.step_size,
        configuration: raw.configuration.to_parameters(),
        blocks: raw
            .blocks
            .into_iter()
            .map(|b| BlockDescriptor {
                name: b.name,
                library: b.library,
                label: b.label,
                parameters: b.parameters.to_parameters(),
            })
            .collect(),
        connections,
    })
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_owned(),
        None => message.to_owned(),
    }
}

impl GraphModel {
    pub fn block(&self, name: &str) -> Option<&BlockDescriptor> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.name == name)
    }

    /// Writes the model in the graph file format.
    pub fn to_json(&self) -> Result<String, String> {
        let raw = RawGraph {
            step_size: self.step_size,
            configuration: ParamObject::from_parameters(&self.configuration),
            blocks: self
                .blocks
                .iter()
                .map(|b| RawBlock {
                    name: b.name.clone(),
                    library: b.library.clone(),
                    label: b.label.clone(),
                    parameters: ParamObject::from_parameters(&b.parameters),
                })
                .collect(),
            connections: self
                .connections
                .iter()
                .map(|c| RawConnection {
                    from: c.from.to_string(),
                    to: c.to.to_string(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use blockflow_core::ParamValue;

    fn parse(text: &str) -> Result<GraphModel, GraphError> {
        parse_graph(text, Path::new("model.json"))
    }

    #[test]
    fn minimal_model() {
        let m = parse(
            r#"{"step_size": 0.01, "blocks": [
                {"name": "c", "library": "stdblocks", "label": "Constant", "parameters": {"value": 1.0}},
                {"name": "out", "library": "stdblocks", "label": "CsvSink", "parameters": {"path": "x.csv"}}],
               "connections": [{"from": "c.0", "to": "out.0"}]}"#,
        )
        .unwrap();
        assert_eq!(m.blocks.len(), 2);
        assert_eq!(m.connections.len(), 1);
        assert_eq!(m.connections[0].to, Endpoint { block: "out".into(), port: 0 });
        assert_eq!(m.blocks[0].parameters.get("value"), Some(&ParamValue::Float(1.0)));
    }

    #[test]
    fn dangling_endpoint_names_the_block() {
        let err = parse(
            r#"{"step_size": 0.01, "blocks": [{"name": "p", "library": "l", "label": "x"}],
               "connections": [{"from": "ctrl.0", "to": "p.0"}]}"#,
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "connection ctrl.0 -> p.0: no block named 'ctrl'");
    }

    #[test]
    fn zero_step_size() {
        let err = parse(r#"{"step_size": 0, "blocks": []}"#).unwrap_err();
        assert!(err.to_string().contains("stepSize must be positive"), "{err}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse("{\n  \"step_size\": 0.01,\n  \"blocks\": [,]\n}").unwrap_err();
        match err {
            GraphError::Parse { line, column, .. } => assert_eq!((line, column), (3, 14)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn structural_problems_are_collected() {
        let err = parse(
            r#"{"step_size": -1, "blocks": [
                {"name": "a", "library": "l", "label": "x"},
                {"name": "a", "library": "l", "label": "x"},
                {"name": "b.c", "library": "l", "label": "x"}],
               "connections": [{"from": "a", "to": "a.0"}]}"#,
        )
        .unwrap_err();
        let GraphError::Invalid { problems } = err else { panic!() };
        assert_eq!(problems.len(), 4, "{problems:?}");
        assert!(problems.contains(&"duplicate block name 'a'".to_owned()));
    }

    #[test]
    fn duplicate_parameters_and_unknown_keys_are_rejected() {
        let dup = r#"{"step_size": 1, "blocks": [{"name": "a", "library": "l", "label": "x",
                      "parameters": {"k": 1, "k": 2}}]}"#;
        assert!(parse(dup).unwrap_err().to_string().contains("duplicate parameter 'k'"));
        let extra = r#"{"step_size": 1, "blocks": [], "stepsize": 2}"#;
        assert!(parse(extra).unwrap_err().to_string().contains("unknown field"));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"step_size": 0.5, "configuration": {"mode": "sim"}, "blocks": [
            {"name": "c", "library": "stdblocks", "label": "Constant", "parameters": {"value": [1, 2]}},
            {"name": "g", "library": "stdblocks", "label": "Gain", "parameters": {"k": 3}}],
            "connections": [{"from": "c.0", "to": "g.0"}]}"#;
        let m = parse(text).unwrap();
        assert_eq!(parse(&m.to_json().unwrap()).unwrap(), m);
    }
}
