use serde::{Deserialize, Serialize};

use super::{ClassifyError, Result, Trajectory};
use crate::surface::CombinatorialSurface;

/// Snaps coordinate samples to their nearest nodes and joins consecutive
/// distinct nodes by shortest paths. Samples farther than `radius` (default
/// three median edge lengths) from every node are kept but logged.
pub fn snap_trace(
    id: &str,
    points: &[Vec<f64>],
    s: &CombinatorialSurface,
    radius: Option<f64>,
) -> Result<Trajectory> {
    if !s.has_coords() {
        return Err(ClassifyError::NoCoordinates);
    }
    let radius = radius.or_else(|| s.median_edge_length().map(|m| 3.0 * m)).unwrap_or(f64::INFINITY);
    let mut stops: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let n = s.nearest_node(p).ok_or(ClassifyError::NoCoordinates)?;
        let q = s.position(n).unwrap();
        let d = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if d > radius {
            log::warn!("trace {id}: sample {i} is {d:.3} from the nearest node (radius {radius:.3})");
        }
        if stops.last() != Some(&n) {
            stops.push(n);
        }
    }
    if stops.len() < 2 {
        return Err(ClassifyError::TooShort { id: id.to_string() });
    }
    let mut nodes = vec![stops[0]];
    for w in stops.windows(2) {
        nodes.extend_from_slice(&s.shortest_path(w[0], w[1])?[1..]);
    }
    Ok(Trajectory::new(id, nodes))
}

/// One JSONL record: node ids or coordinate samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceInput {
    Nodes { id: String, nodes: Vec<usize> },
    Points { id: String, points: Vec<Vec<f64>> },
}

/// Reads JSONL trajectories; coordinate traces are snapped to the surface.
/// Blank lines and `#` comments are skipped.
pub fn read_trajectories(text: &str, s: &CombinatorialSurface) -> Result<Vec<Trajectory>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rec: TraceInput =
            serde_json::from_str(line).map_err(|e| ClassifyError::Parse { line: i + 1, msg: e.to_string() })?;
        let t = match rec {
            TraceInput::Nodes { id, nodes } => Trajectory::new(id, nodes),
            TraceInput::Points { id, points } => snap_trace(&id, &points, s, None)?,
        };
        t.validate(s)?;
        out.push(t);
    }
    Ok(out)
}

pub fn write_trajectories(trajs: &[Trajectory]) -> String {
    let mut out = String::new();
    for t in trajs {
        out.push_str(&serde_json::to_string(t).expect("trajectory serializes"));
        out.push('\n');
    }
    out
}
