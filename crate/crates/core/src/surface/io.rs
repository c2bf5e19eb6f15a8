//! Text formats for meshes and 1-cochains.
//!
//! Mesh:
//!
//! ```text
//! surf v=<V> f=<F>
//! n <id> [x y [z]]
//! t <a> <b> <c>
//! hole <n0> <n1> ... <nk>
//! ```
//!
//! Cochain:
//!
//! ```text
//! c1 <surface-hash>
//! e <u> <v> <value>
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Floats are written
//! in shortest round-trip form.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{build_surface, check_len, Cochain1, CombinatorialSurface, Result, SurfaceError};

fn parse_err(line: usize, msg: impl Into<String>) -> SurfaceError {
    SurfaceError::Parse { line, msg: msg.into() }
}

fn field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} '{tok}'")))
}

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            None
        } else {
            Some((i + 1, l.split_whitespace().collect()))
        }
    })
}

pub fn write_mesh(s: &CombinatorialSurface) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "surf v={} f={}", s.n_nodes(), s.n_faces());
    for n in 0..s.n_nodes() {
        match s.position(n) {
            Some(p) if s.coord_dim() == 3 => {
                let _ = writeln!(out, "n {n} {} {} {}", p[0], p[1], p[2]);
            }
            Some(p) => {
                let _ = writeln!(out, "n {n} {} {}", p[0], p[1]);
            }
            None => {
                let _ = writeln!(out, "n {n}");
            }
        }
    }
    for f in s.faces() {
        let _ = writeln!(out, "t {} {} {}", f[0], f[1], f[2]);
    }
    for l in s.hole_loops() {
        out.push_str("hole");
        for n in l {
            let _ = write!(out, " {n}");
        }
        out.push('\n');
    }
    out
}

pub fn read_mesh(text: &str) -> Result<CombinatorialSurface> {
    let mut it = lines(text);
    let (hline, header) = it.next().ok_or_else(|| parse_err(1, "empty mesh file"))?;
    if header.first() != Some(&"surf") {
        return Err(parse_err(hline, "expected 'surf' header"));
    }
    let mut n_nodes = None;
    let mut n_faces = None;
    for tok in &header[1..] {
        if let Some(v) = tok.strip_prefix("v=") {
            n_nodes = Some(field::<usize>(Some(v), hline, "node count")?);
        } else if let Some(f) = tok.strip_prefix("f=") {
            n_faces = Some(field::<usize>(Some(f), hline, "face count")?);
        } else {
            return Err(parse_err(hline, format!("unknown header field '{tok}'")));
        }
    }
    let n_nodes = n_nodes.ok_or_else(|| parse_err(hline, "header lacks v="))?;
    let n_faces = n_faces.ok_or_else(|| parse_err(hline, "header lacks f="))?;

    let mut coords: Vec<Option<Vec<f64>>> = vec![None; n_nodes];
    let mut any_coords = false;
    let mut faces = Vec::with_capacity(n_faces);
    let mut holes = Vec::new();
    for (ln, toks) in it {
        match toks[0] {
            "n" => {
                let id: usize = field(toks.get(1).copied(), ln, "node id")?;
                if id >= n_nodes {
                    return Err(parse_err(ln, format!("node {id} exceeds v={n_nodes}")));
                }
                if toks.len() > 2 {
                    let p = toks[2..]
                        .iter()
                        .map(|t| field::<f64>(Some(t), ln, "coordinate"))
                        .collect::<Result<Vec<_>>>()?;
                    coords[id] = Some(p);
                    any_coords = true;
                }
            }
            "t" => {
                if toks.len() != 4 {
                    return Err(parse_err(ln, "triangle needs three nodes"));
                }
                let a = field(Some(toks[1]), ln, "node id")?;
                let b = field(Some(toks[2]), ln, "node id")?;
                let c = field(Some(toks[3]), ln, "node id")?;
                faces.push([a, b, c]);
            }
            "hole" => {
                let l = toks[1..]
                    .iter()
                    .map(|t| field::<usize>(Some(t), ln, "node id"))
                    .collect::<Result<Vec<_>>>()?;
                holes.push(l);
            }
            other => return Err(parse_err(ln, format!("unknown record '{other}'"))),
        }
    }
    if faces.len() != n_faces {
        return Err(parse_err(hline, format!("header says f={n_faces}, found {}", faces.len())));
    }
    let coords = if any_coords {
        let mut out = Vec::with_capacity(n_nodes);
        for (id, c) in coords.into_iter().enumerate() {
            out.push(c.ok_or_else(|| parse_err(0, format!("node {id} has no coordinates")))?);
        }
        Some(out)
    } else {
        None
    };
    let s = build_surface(&faces, coords, if holes.is_empty() { None } else { Some(holes) })?;
    if s.n_nodes() != n_nodes {
        return Err(parse_err(hline, format!("header says v={n_nodes}, faces use {}", s.n_nodes())));
    }
    Ok(s)
}

/// Writes one line per canonical edge. Surfaces with several edges between
/// the same node pair cannot be written in this format.
pub fn write_cochain1(s: &CombinatorialSurface, w: &Cochain1) -> Result<String> {
    check_len(w.len(), s.n_edges())?;
    let mut out = String::new();
    let _ = writeln!(out, "c1 {}", s.hash());
    for (e, &[u, v]) in s.edges().iter().enumerate() {
        s.directed_edge(u, v)?;
        let _ = writeln!(out, "e {u} {v} {}", w[e]);
    }
    Ok(out)
}

pub fn read_cochain1(s: &CombinatorialSurface, text: &str) -> Result<Cochain1> {
    let mut it = lines(text);
    let (hline, header) = it.next().ok_or_else(|| parse_err(1, "empty cochain file"))?;
    if header.len() != 2 || header[0] != "c1" {
        return Err(parse_err(hline, "expected 'c1 <hash>' header"));
    }
    let hash = s.hash();
    if header[1] != hash {
        return Err(parse_err(hline, format!("cochain is for surface {}, not {hash}", header[1])));
    }
    let mut values = vec![f64::NAN; s.n_edges()];
    let mut seen = vec![false; s.n_edges()];
    for (ln, toks) in it {
        if toks[0] != "e" || toks.len() != 4 {
            return Err(parse_err(ln, "expected 'e <u> <v> <value>'"));
        }
        let u: usize = field(Some(toks[1]), ln, "node id")?;
        let v: usize = field(Some(toks[2]), ln, "node id")?;
        let x: f64 = field(Some(toks[3]), ln, "value")?;
        if u >= v {
            return Err(parse_err(ln, "edge must be written with u < v"));
        }
        let d = s.directed_edge(u, v).map_err(|e| parse_err(ln, e.to_string()))?;
        if seen[d.edge] {
            return Err(parse_err(ln, format!("edge ({u}, {v}) repeated")));
        }
        seen[d.edge] = true;
        values[d.edge] = x;
    }
    if let Some(e) = seen.iter().position(|x| !x) {
        let [u, v] = s.edges()[e];
        return Err(parse_err(0, format!("edge ({u}, {v}) has no value")));
    }
    Ok(Cochain1::from_values(values))
}
