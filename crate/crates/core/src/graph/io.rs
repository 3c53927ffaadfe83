use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MultipartiteGraph;
use crate::error::{Error, Result};

/// On-disk graph formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GraphFormat {
    /// `{"k":..,"parts":[[..]],"edges":[[u,v],..],"name":..}` with sorted parts,
    /// ascending pairs and lexicographically sorted edges.
    #[default]
    Json,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(GraphFormat::Json),
            other => Err(Error::Parse(format!("unknown graph format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub k: usize,
    pub parts: Vec<Vec<usize>>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl From<&MultipartiteGraph> for GraphDoc {
    fn from(g: &MultipartiteGraph) -> Self {
        GraphDoc {
            k: g.k(),
            parts: g.parts().to_vec(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
            name: g.name().map(str::to_owned),
        }
    }
}

impl TryFrom<GraphDoc> for MultipartiteGraph {
    type Error = Error;

    fn try_from(doc: GraphDoc) -> Result<Self> {
        if doc.k != doc.parts.len() {
            return Err(Error::Precondition(format!(
                "declared k = {} but {} parts given",
                doc.k,
                doc.parts.len()
            )));
        }
        let g = MultipartiteGraph::new(doc.parts, doc.edges.into_iter().map(|[u, v]| (u, v)))?;
        Ok(match doc.name {
            Some(name) => g.with_name(name),
            None => g,
        })
    }
}

pub fn load_graph<R: Read>(mut source: R, format: GraphFormat) -> Result<MultipartiteGraph> {
    match format {
        GraphFormat::Json => {
            let mut text = String::new();
            source.read_to_string(&mut text)?;
            let doc: GraphDoc = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            doc.try_into()
        }
    }
}

/// Writes the canonical single-line document followed by a newline.
pub fn save_graph<W: Write>(mut sink: W, g: &MultipartiteGraph, format: GraphFormat) -> Result<()> {
    match format {
        GraphFormat::Json => {
            let text = serde_json::to_string(&GraphDoc::from(g)).expect("graph document serializes");
            writeln!(sink, "{text}")?;
        }
    }
    Ok(())
}
