//! Network, partition and program inputs named on the command line.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

use netreinforce::graph::{build_hypercube, build_path, Network, NodeId};
use netreinforce::graphml::parse_graphml_named;
use netreinforce::partition::{partition_hypercube, singleton_partition, Partition};
use netreinforce::program::{Flood, PathForwarding};
use netreinforce::sweep::Partitioner;

use crate::Failure;

/// A file path, or one of the generator specs `path:N` and `hypercube:Q:D[:wrap]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Path(usize),
    Hypercube { q: usize, d: usize, wrap: bool },
    File(String),
}

impl Source {
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Failure::usage(format!("`{s}` in `{spec}` is not a number")))
        };
        match parts.as_slice() {
            ["path", n] => Ok(Source::Path(num(n)?)),
            ["hypercube", q, d] => Ok(Source::Hypercube {
                q: num(q)?,
                d: num(d)?,
                wrap: false,
            }),
            ["hypercube", q, d, wrap] => Ok(Source::Hypercube {
                q: num(q)?,
                d: num(d)?,
                wrap: match *wrap {
                    "wrap" | "true" | "1" => true,
                    "nowrap" | "false" | "0" => false,
                    other => return Err(Failure::usage(format!("bad wrap flag `{other}`"))),
                },
            }),
            ["path" | "hypercube", ..] => {
                Err(Failure::usage(format!("malformed generator spec `{spec}`")))
            }
            _ => Ok(Source::File(spec.to_owned())),
        }
    }

    pub fn load(&self) -> Result<Network> {
        match self {
            Source::Path(n) => Ok(build_path(*n)?),
            Source::Hypercube { q, d, wrap } => Ok(build_hypercube(*q, *d, *wrap)?),
            Source::File(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
                let is_json = Path::new(path)
                    .extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("json"));
                let g = if is_json {
                    Network::from_json(&text)
                } else {
                    parse_graphml_named(&text, Some(path))
                };
                g.with_context(|| format!("in {path}"))
            }
        }
    }
}

pub fn load_network(spec: &str) -> Result<(Source, Network)> {
    let source = Source::parse(spec)?;
    let g = source.load()?;
    Ok((source, g))
}

/// How regions are chosen when no partition file is given.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Partitioner(Partitioner),
    Singleton,
    Whole,
    /// Subcubes of side `h`; the input must be a hypercube generator.
    Hypercube(usize),
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "singleton" => Ok(Method::Singleton),
            "whole" => Ok(Method::Whole),
            _ => {
                if let Some(h) = s.strip_prefix("hypercube:") {
                    return h
                        .parse()
                        .map(Method::Hypercube)
                        .map_err(|_| format!("bad subcube side `{h}`"));
                }
                s.parse::<Partitioner>().map(Method::Partitioner).map_err(|e| {
                    format!("{e}; also singleton, whole, hypercube:H")
                })
            }
        }
    }
}

pub fn choose_partition(
    source: &Source,
    g: &Network,
    file: Option<&str>,
    method: Method,
    max_region: Option<usize>,
) -> Result<Partition> {
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        return Partition::from_json(&text, g.node_count()).with_context(|| format!("in {path}"));
    }
    match method {
        Method::Singleton => Ok(singleton_partition(g)),
        Method::Whole => Ok(Partition::whole(g)?),
        Method::Hypercube(h) => match source {
            Source::Hypercube { q, d, .. } => Ok(partition_hypercube(*q, *d, h)?),
            _ => Err(Failure::usage("hypercube partitioning needs a hypercube:Q:D input")),
        },
        Method::Partitioner(p) => {
            let r = max_region
                .ok_or_else(|| Failure::usage("--max-region is required for this method"))?;
            Ok(p.partition(g, r)?)
        }
    }
}

/// `flood`, `flood:NODE` or `paths:FILE`.
pub enum ProgramSpec {
    Flood(Flood),
    Paths(PathForwarding),
}

impl ProgramSpec {
    pub fn parse(spec: &str, g: &Network) -> Result<Self> {
        if spec == "flood" {
            return Ok(ProgramSpec::Flood(Flood { source: NodeId(0) }));
        }
        if let Some(node) = spec.strip_prefix("flood:") {
            return Ok(ProgramSpec::Flood(Flood {
                source: resolve_node(g, &Value::String(node.to_owned()))?,
            }));
        }
        if let Some(path) = spec.strip_prefix("paths:") {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let routes: Vec<Vec<Value>> =
                serde_json::from_str(&text).with_context(|| format!("in {path}"))?;
            let routes = routes
                .iter()
                .map(|r| r.iter().map(|v| resolve_node(g, v)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            return Ok(ProgramSpec::Paths(PathForwarding::new(g, routes)?));
        }
        Err(Failure::usage(format!(
            "unknown program `{spec}` (flood, flood:NODE, paths:FILE)"
        )))
    }

    /// Rounds after which the program has nothing left to do.
    pub fn default_rounds(&self, g: &Network) -> usize {
        match self {
            ProgramSpec::Flood(_) => g.node_count().saturating_sub(1).max(1),
            ProgramSpec::Paths(p) => p.horizon().max(1),
        }
    }
}

/// A node named by label or by numeric id.
fn resolve_node(g: &Network, v: &Value) -> Result<NodeId> {
    let found = match v {
        Value::Number(n) => n.as_u64().map(|i| NodeId(i as usize)),
        Value::String(s) => g
            .node_by_label(s)
            .or_else(|| s.parse::<usize>().ok().map(NodeId)),
        _ => None,
    };
    match found {
        Some(id) if id.0 < g.node_count() => Ok(id),
        _ => bail!("unknown node {v}"),
    }
}

pub fn parse_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t.split_once("..") {
                Some((a, b)) => {
                    let a: usize = a.parse().map_err(|_| format!("bad range `{t}`"))?;
                    let b: usize = b.parse().map_err(|_| format!("bad range `{t}`"))?;
                    Ok((a..=b).collect())
                }
                None => t.parse().map(|x| vec![x]).map_err(|_| format!("bad number `{t}`")),
            }
        })
        .collect::<std::result::Result<Vec<Vec<usize>>, String>>()
        .map(|v| v.concat())
}
