use std::fmt::Write as _;

use crate::analysis::{csv_field, weighted_degree, CommunityPartition, WeightedGraph};
use crate::error::{Error, Result};

pub const GEXF_NAMESPACE: &str = "http://www.gexf.net/1.2draft";

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn check(g: &WeightedGraph, p: &CommunityPartition) -> Result<()> {
    if p.assignment.len() != g.n() {
        return Err(Error::Validation(format!(
            "partition covers {} vertices, graph has {}",
            p.assignment.len(),
            g.n()
        )));
    }
    Ok(())
}

/// GEXF 1.2 document. Nodes carry latitude, longitude, weighted degree and
/// community; every retained off-diagonal pair becomes one undirected edge.
/// Self-loops appear only through the weighted degree.
pub fn gexf_document(g: &WeightedGraph, partition: &CommunityPartition) -> Result<String> {
    check(g, partition)?;
    let wd = weighted_degree(g);
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(s, "<gexf xmlns=\"{GEXF_NAMESPACE}\" version=\"1.2\">");
    s.push_str("  <meta>\n    <creator>stationcast</creator>\n    <description>learned station graph</description>\n  </meta>\n");
    s.push_str("  <graph mode=\"static\" defaultedgetype=\"undirected\">\n");
    s.push_str("    <attributes class=\"node\">\n");
    for (id, title, ty) in [
        (0, "latitude", "double"),
        (1, "longitude", "double"),
        (2, "wd", "double"),
        (3, "community", "integer"),
    ] {
        let _ = writeln!(s, "      <attribute id=\"{id}\" title=\"{title}\" type=\"{ty}\"/>");
    }
    s.push_str("    </attributes>\n    <nodes>\n");
    for (i, st) in g.stations.iter().enumerate() {
        let _ = writeln!(
            s,
            "      <node id=\"{}\" label=\"{}\">",
            xml_escape(&st.station_id),
            xml_escape(&st.name)
        );
        s.push_str("        <attvalues>\n");
        let values = [
            st.latitude.to_string(),
            st.longitude.to_string(),
            wd[i].to_string(),
            partition.assignment[i].to_string(),
        ];
        for (k, v) in values.iter().enumerate() {
            let _ = writeln!(s, "          <attvalue for=\"{k}\" value=\"{v}\"/>");
        }
        s.push_str("        </attvalues>\n      </node>\n");
    }
    s.push_str("    </nodes>\n    <edges>\n");
    for (e, (i, j, w)) in g.edges().into_iter().enumerate() {
        let _ = writeln!(
            s,
            "      <edge id=\"{e}\" source=\"{}\" target=\"{}\" weight=\"{w}\"/>",
            xml_escape(&g.stations[i].station_id),
            xml_escape(&g.stations[j].station_id)
        );
    }
    s.push_str("    </edges>\n  </graph>\n</gexf>\n");
    Ok(s)
}

/// `station_id,name,lat,lon,wd,community`.
pub fn vertex_csv(g: &WeightedGraph, partition: &CommunityPartition) -> Result<String> {
    check(g, partition)?;
    let wd = weighted_degree(g);
    let mut s = String::from("station_id,name,lat,lon,wd,community\n");
    for (i, st) in g.stations.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            csv_field(&st.station_id),
            csv_field(&st.name),
            st.latitude,
            st.longitude,
            wd[i],
            partition.assignment[i]
        );
    }
    Ok(s)
}

/// `src,dst,weight` over retained off-diagonal pairs.
pub fn edge_csv(g: &WeightedGraph) -> String {
    let mut s = String::from("src,dst,weight\n");
    for (i, j, w) in g.edges() {
        let _ = writeln!(
            s,
            "{},{},{w}",
            csv_field(&g.stations[i].station_id),
            csv_field(&g.stations[j].station_id)
        );
    }
    s
}
