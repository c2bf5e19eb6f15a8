use std::collections::{HashMap, VecDeque};

use super::{
    BoundaryLoop, CombinatorialSurface, DirectedEdge, Incidence, PairSlot, Result, SurfaceError,
};

/// Node cycles naming the boundary loops that are holes. Matching is by
/// node set, so the listed order and direction do not matter.
pub type HoleMarks = Vec<Vec<usize>>;

type EdgeKey = (usize, usize, u8);

pub(super) fn build_surface(
    faces: &[[usize; 3]],
    coords: Option<Vec<Vec<f64>>>,
    hole_marks: Option<HoleMarks>,
) -> Result<CombinatorialSurface> {
    if faces.is_empty() {
        return Err(SurfaceError::NoFaces);
    }
    let n_nodes = faces.iter().flatten().max().map_or(0, |m| m + 1);
    let (coord_dim, coords) = match coords {
        Some(points) => {
            if points.len() != n_nodes {
                return Err(SurfaceError::CoordCount { got: points.len(), expected: n_nodes });
            }
            let dim = points.first().map_or(2, Vec::len);
            let mut out = Vec::with_capacity(points.len());
            for p in &points {
                if p.len() != dim || !(2..=3).contains(&p.len()) {
                    return Err(SurfaceError::CoordDim(p.len()));
                }
                out.push([p[0], p[1], p.get(2).copied().unwrap_or(0.0)]);
            }
            (dim, Some(out))
        }
        None => (0, None),
    };
    let mut surface = assemble(n_nodes, faces.to_vec(), None, coords, coord_dim)?;
    classify_loops(&mut surface, hole_marks)?;
    Ok(surface)
}

fn classify_loops(s: &mut CombinatorialSurface, marks: Option<HoleMarks>) -> Result<()> {
    if let Some(marks) = marks {
        let keys: Vec<Vec<usize>> = s.loops.iter().map(|l| sorted(&l.nodes)).collect();
        for (index, mark) in marks.iter().enumerate() {
            let want = sorted(mark);
            let hit = keys.iter().position(|k| *k == want);
            match hit {
                Some(i) => s.loops[i].is_hole = true,
                None => return Err(SurfaceError::UnknownHoleMark { index }),
            }
        }
        let unmarked = s.loops.iter().filter(|l| !l.is_hole).count();
        if unmarked > 1 {
            return Err(SurfaceError::TooManyOuterLoops { unmarked });
        }
        return Ok(());
    }
    if s.loops.len() < 2 {
        return Ok(());
    }
    let Some(coords) = s.coords.as_ref() else {
        return Err(SurfaceError::AmbiguousOuterLoop { loops: s.loops.len() });
    };
    let extent = |l: &BoundaryLoop| {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &n in &l.nodes {
            for k in 0..3 {
                lo[k] = lo[k].min(coords[n][k]);
                hi[k] = hi[k].max(coords[n][k]);
            }
        }
        (0..3).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>()
    };
    let mut outer = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, l) in s.loops.iter().enumerate() {
        let e = extent(l);
        if e > best {
            best = e;
            outer = i;
        }
    }
    for (i, l) in s.loops.iter_mut().enumerate() {
        l.is_hole = i != outer;
    }
    Ok(())
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut out = v.to_vec();
    out.sort_unstable();
    out
}

/// Assembles and validates the incidence structure. `edge_tags` separates
/// distinct edges that join the same node pair (needed for double covers);
/// all loops come back unmarked.
pub(super) fn assemble(
    n_nodes: usize,
    faces: Vec<[usize; 3]>,
    edge_tags: Option<&[[u8; 3]]>,
    coords: Option<Vec<[f64; 3]>>,
    coord_dim: usize,
) -> Result<CombinatorialSurface> {
    if faces.is_empty() {
        return Err(SurfaceError::NoFaces);
    }
    for (fi, f) in faces.iter().enumerate() {
        for &n in f {
            if n >= n_nodes {
                return Err(SurfaceError::NodeOutOfRange { face: fi, node: n, n_nodes });
            }
        }
        if f[0] == f[1] || f[0] == f[2] {
            return Err(SurfaceError::DegenerateFace { face: fi, node: f[0] });
        }
        if f[1] == f[2] {
            return Err(SurfaceError::DegenerateFace { face: fi, node: f[1] });
        }
    }
    let key_of = |fi: usize, i: usize| -> EdgeKey {
        let a = faces[fi][i];
        let b = faces[fi][(i + 1) % 3];
        let tag = edge_tags.map_or(0, |t| t[fi][i]);
        (a.min(b), a.max(b), tag)
    };
    let mut keys: Vec<EdgeKey> = (0..faces.len())
        .flat_map(|fi| (0..3).map(move |i| (fi, i)))
        .map(|(fi, i)| key_of(fi, i))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let edges: Vec<[usize; 2]> = keys.iter().map(|k| [k.0, k.1]).collect();

    let mut incident: Vec<Vec<(usize, bool)>> = vec![Vec::new(); edges.len()];
    let mut face_edges = Vec::with_capacity(faces.len());
    for (fi, f) in faces.iter().enumerate() {
        let mut fe = [DirectedEdge { edge: 0, forward: true }; 3];
        for i in 0..3 {
            let e = keys.binary_search(&key_of(fi, i)).expect("key present");
            let forward = f[i] < f[(i + 1) % 3];
            fe[i] = DirectedEdge { edge: e, forward };
            incident[e].push((fi, forward));
        }
        face_edges.push(fe);
    }

    let mut edge_faces = vec![[None, None]; edges.len()];
    for (e, inc) in incident.iter().enumerate() {
        let [u, v] = edges[e];
        if inc.len() > 2 {
            return Err(SurfaceError::NonManifoldEdge { u, v, count: inc.len() });
        }
        if inc.len() == 2 && inc[0].1 == inc[1].1 {
            let (u, v) = if inc[0].1 { (u, v) } else { (v, u) };
            return Err(SurfaceError::InconsistentOrientation {
                u,
                v,
                first: inc[0].0,
                second: inc[1].0,
            });
        }
        for &(f, forward) in inc {
            edge_faces[e][if forward { 0 } else { 1 }] = Some(f);
        }
    }

    let mut pair_index = HashMap::with_capacity(edges.len());
    for (e, [u, v]) in edges.iter().enumerate() {
        pair_index
            .entry((*u, *v))
            .and_modify(|slot| *slot = PairSlot::Multiple)
            .or_insert(PairSlot::Single(e));
    }

    let mut stars: Vec<Vec<Incidence>> = vec![Vec::new(); n_nodes];
    for (e, &[u, v]) in edges.iter().enumerate() {
        stars[u].push(Incidence { neighbor: v, edge: e, outgoing: true });
        stars[v].push(Incidence { neighbor: u, edge: e, outgoing: false });
    }
    let mut star_offsets = Vec::with_capacity(n_nodes + 1);
    let mut star = Vec::with_capacity(2 * edges.len());
    star_offsets.push(0);
    for (node, list) in stars.iter_mut().enumerate() {
        if list.is_empty() {
            return Err(SurfaceError::IsolatedNode { node });
        }
        list.sort_unstable_by_key(|inc| (inc.neighbor, inc.edge));
        star.extend_from_slice(list);
        star_offsets.push(star.len());
    }

    check_vertex_fans(n_nodes, &faces, &face_edges)?;

    let mut surface = CombinatorialSurface {
        n_nodes,
        coord_dim,
        coords,
        faces,
        face_edges,
        edges,
        edge_faces,
        pair_index,
        loops: Vec::new(),
        star_offsets,
        star,
    };
    check_connected(&surface)?;
    surface.loops = extract_loops(&surface);

    let chi = surface.euler_characteristic();
    let b = surface.loops.len() as i64;
    let twice_genus = 2 - b - chi;
    if twice_genus < 0 || twice_genus % 2 != 0 {
        return Err(SurfaceError::EulerMismatch { chi, boundaries: surface.loops.len() });
    }
    Ok(surface)
}

/// Every node's incident faces must chain into one fan (open or closed)
/// through shared edges.
fn check_vertex_fans(
    n_nodes: usize,
    faces: &[[usize; 3]],
    face_edges: &[[DirectedEdge; 3]],
) -> Result<()> {
    let mut corners: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_nodes];
    for (fi, f) in faces.iter().enumerate() {
        for (i, &n) in f.iter().enumerate() {
            corners[n].push((fi, i));
        }
    }
    let mut local: HashMap<usize, usize> = HashMap::new();
    let mut parent: Vec<usize> = Vec::new();
    for (node, list) in corners.iter().enumerate() {
        local.clear();
        parent.clear();
        for &(fi, i) in list {
            let out_edge = face_edges[fi][i].edge;
            let in_edge = face_edges[fi][(i + 2) % 3].edge;
            let a = slot(&mut local, &mut parent, out_edge);
            let b = slot(&mut local, &mut parent, in_edge);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let roots = (0..parent.len()).filter(|&i| find(&mut parent, i) == i).count();
        if roots > 1 {
            return Err(SurfaceError::NonManifoldVertex { node });
        }
    }
    Ok(())
}

fn slot(local: &mut HashMap<usize, usize>, parent: &mut Vec<usize>, edge: usize) -> usize {
    *local.entry(edge).or_insert_with(|| {
        parent.push(parent.len());
        parent.len() - 1
    })
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn check_connected(s: &CombinatorialSurface) -> Result<()> {
    let mut seen = vec![false; s.n_nodes];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..s.n_nodes {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for inc in s.star(v) {
                if !seen[inc.neighbor] {
                    seen[inc.neighbor] = true;
                    queue.push_back(inc.neighbor);
                }
            }
        }
    }
    if components > 1 {
        return Err(SurfaceError::Disconnected { components });
    }
    Ok(())
}

fn extract_loops(s: &CombinatorialSurface) -> Vec<BoundaryLoop> {
    let mut next: HashMap<usize, usize> = HashMap::new();
    for (e, &[u, v]) in s.edges.iter().enumerate() {
        match s.edge_faces[e] {
            [Some(_), None] => {
                next.insert(u, v);
            }
            [None, Some(_)] => {
                next.insert(v, u);
            }
            _ => {}
        }
    }
    let mut starts: Vec<usize> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut seen = vec![false; s.n_nodes];
    let mut loops = Vec::new();
    for start in starts {
        if seen[start] {
            continue;
        }
        let mut nodes = vec![start];
        seen[start] = true;
        let mut cur = next[&start];
        while cur != start {
            seen[cur] = true;
            nodes.push(cur);
            cur = next[&cur];
        }
        loops.push(BoundaryLoop { nodes, is_hole: false });
    }
    loops
}
