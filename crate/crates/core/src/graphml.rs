//! Reader for the GraphML subset used by topology datasets such as the
//! Internet Topology Zoo.
//!
//! Only `graph`, `node` and `edge` elements are interpreted. Undirected edges
//! (per `edgedefault` or a per-edge `directed="false"`) become two opposing
//! arcs. Self-loops are dropped and parallel edges collapsed. Node indices
//! follow document order and the `id` attribute becomes the node label.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{Network, Origin};

pub fn parse_graphml(text: &str) -> Result<Network> {
    parse_graphml_named(text, None)
}

/// Same as [`parse_graphml`], recording `source` in the network origin.
pub fn parse_graphml_named(text: &str, source: Option<&str>) -> Result<Network> {
    let doc = roxmltree::Document::parse(text).map_err(|e| {
        let pos = e.pos();
        Error::Xml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    let line_of = |node: &roxmltree::Node| doc.text_pos_at(node.range().start).row;

    let graph = doc
        .descendants()
        .find(|n| n.has_tag_name("graph"))
        .ok_or(Error::GraphMl {
            line: 1,
            message: "no <graph> element".into(),
        })?;
    let undirected_default = match graph.attribute("edgedefault") {
        Some("undirected") => true,
        Some("directed") | None => false,
        Some(other) => {
            return Err(Error::GraphMl {
                line: line_of(&graph),
                message: format!("unknown edgedefault `{other}`"),
            })
        }
    };

    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut labels = Vec::new();
    for node in graph.children().filter(|n| n.has_tag_name("node")) {
        let id = node.attribute("id").ok_or(Error::GraphMl {
            line: line_of(&node),
            message: "node without id".into(),
        })?;
        if ids.insert(id, labels.len()).is_some() {
            return Err(Error::GraphMl {
                line: line_of(&node),
                message: format!("duplicate node id `{id}`"),
            });
        }
        labels.push(id.to_string());
    }
    if labels.is_empty() {
        return Err(Error::GraphMl {
            line: line_of(&graph),
            message: "graph has no nodes".into(),
        });
    }

    let mut arcs = Vec::new();
    let mut any_undirected = false;
    for edge in graph.children().filter(|n| n.has_tag_name("edge")) {
        let line = line_of(&edge);
        let endpoint = |attr: &str| -> Result<usize> {
            let name = edge.attribute(attr).ok_or(Error::GraphMl {
                line,
                message: format!("edge without {attr}"),
            })?;
            ids.get(name).copied().ok_or(Error::UnknownNode {
                line,
                node: name.to_string(),
            })
        };
        let (u, v) = (endpoint("source")?, endpoint("target")?);
        let undirected = match edge.attribute("directed") {
            Some("true") => false,
            Some("false") => true,
            _ => undirected_default,
        };
        arcs.push((u, v));
        if undirected {
            any_undirected = true;
            arcs.push((v, u));
        }
    }

    let n = labels.len();
    Ok(Network::from_arcs_lenient(n, arcs)?
        .with_labels(labels)?
        .with_origin(Origin {
            source: source.map(str::to_string),
            undirected: any_undirected,
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeId;

    const PAIR: &str = r#"<?xml version="1.0"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <graph edgedefault="undirected">
    <node id="a"/><node id="b"/>
    <edge source="a" target="b"/>
  </graph>
</graphml>"#;

    #[test]
    fn smallest_undirected() {
        let g = parse_graphml(PAIR).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.arcs(), &[(NodeId(0), NodeId(1)), (NodeId(1), NodeId(0))]);
        assert_eq!(g.label(NodeId(1)), Some("b"));
    }

    #[test]
    fn dangling_reference() {
        let text = PAIR.replace(r#"target="b""#, r#"target="zz""#);
        match parse_graphml(&text) {
            Err(Error::UnknownNode { node, line }) => {
                assert_eq!(node, "zz");
                assert_eq!(line, 5);
            }
            other => panic!("expected reference error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_xml_reports_line() {
        let text = "<graphml>\n<graph>\n<node id='a'>\n</graph>";
        match parse_graphml(text) {
            Err(Error::Xml { line, .. }) => assert!(line >= 3),
            other => panic!("expected xml error, got {other:?}"),
        }
    }

    #[test]
    fn self_loops_and_parallel_edges() {
        let text = r#"<graphml><graph edgedefault="undirected">
            <node id="x"/><node id="y"/>
            <edge source="x" target="x"/>
            <edge source="x" target="y"/><edge source="y" target="x"/>
        </graph></graphml>"#;
        let g = parse_graphml(text).unwrap();
        assert_eq!(g.arc_count(), 2);
    }

    #[test]
    fn directed_default_and_override() {
        let text = r#"<graphml><graph edgedefault="directed">
            <node id="0"/><node id="1"/><node id="2"/>
            <edge source="0" target="1"/>
            <edge source="1" target="2" directed="false"/>
        </graph></graphml>"#;
        let g = parse_graphml(text).unwrap();
        assert_eq!(g.arc_count(), 3);
        assert!(g.has_arc(NodeId(0), NodeId(1)));
        assert!(!g.has_arc(NodeId(1), NodeId(0)));
        assert!(g.has_arc(NodeId(2), NodeId(1)));
    }

    #[test]
    fn empty_graph_is_an_error() {
        let text = r#"<graphml><graph edgedefault="undirected"></graph></graphml>"#;
        assert!(parse_graphml(text).is_err());
    }

    #[test]
    fn deterministic() {
        assert_eq!(parse_graphml(PAIR).unwrap(), parse_graphml(PAIR).unwrap());
    }
}
