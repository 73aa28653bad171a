//! Machine construction (validation of a declaration), stratum
//! classification, vertex stabilization powers, fat-turn growth via affine
//! recursions over the abelian factors, and the bottom-up growth-type
//! assignment with the equal-λ degree bump.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::abelian::{self, IntMatrix};
use crate::error::{Error, Result};
use crate::growth::GrowthType;
use crate::LAMBDA_TOL_EXACT;

use super::decl::{CtMapDecl, ImageDecl};
use super::graph::{tighten, Circuit, Elt, GraphPath, GraphShape, OEdge};
use super::units::{
    ConnData, ExcData, InpData, Machine, SplitCircuit, SplitPath, Stratum, StratumClass, UnitId,
    UnitRef, K_CHECK, K_SPLIT,
};

// ---------------------------------------------------------------------------
// Construction and validation
// ---------------------------------------------------------------------------

pub fn build_machine(decl: CtMapDecl, power: usize) -> Result<Machine> {
    let d = &decl;
    // vertex map basics
    if d.vertex_map.len() != d.vertices.len() {
        return Err(Error::Invalid("vertex map size mismatch".into()));
    }
    for (v, vd) in d.vertices.iter().enumerate() {
        if vd.fat.is_some() && d.vertex_map[v] != v {
            return Err(Error::Invalid(format!(
                "fat vertex `{}` must be fixed by the map",
                vd.name
            )));
        }
    }
    for f in &d.factors {
        if !f.matrix.is_unimodular() {
            return Err(Error::NotUnimodular {
                det: f.matrix.det().to_string(),
            });
        }
    }

    // images: tight, endpoint-correct, nontrivial
    let mut raw_images = Vec::with_capacity(d.edges.len());
    for (id, ed) in d.edges.iter().enumerate() {
        let img = &d.images[id].path;
        img.validate(d)?;
        if img.n_edges() == 0 {
            return Err(Error::Invalid(format!(
                "image of edge `{}` must be a non-trivial path",
                ed.name
            )));
        }
        let t = tighten(d, img)?;
        if &t != img {
            return Err(Error::Invalid(format!(
                "declared image of edge `{}` is not tight",
                ed.name
            )));
        }
        if img.base != d.vertex_map[ed.from] || img.endpoint(d) != d.vertex_map[ed.to] {
            return Err(Error::Invalid(format!(
                "image of edge `{}` does not join the images of its endpoints",
                ed.name
            )));
        }
        raw_images.push(img.clone());
    }

    // strata from declared heights
    let mut heights: Vec<usize> = d.edges.iter().map(|e| e.height).collect();
    heights.sort_unstable();
    heights.dedup();
    let rank_of_height: HashMap<usize, usize> =
        heights.iter().enumerate().map(|(i, &h)| (h, i)).collect();
    let mut stratum_edges: Vec<Vec<usize>> = vec![Vec::new(); heights.len()];
    let mut stratum_of_edge = vec![0usize; d.edges.len()];
    for (id, ed) in d.edges.iter().enumerate() {
        let r = rank_of_height[&ed.height];
        stratum_of_edge[id] = r;
        stratum_edges[r].push(id);
    }

    // height monotonicity of images
    for (id, img) in raw_images.iter().enumerate() {
        let r = stratum_of_edge[id];
        for (e, _) in &img.steps {
            if stratum_of_edge[e.id] > r {
                return Err(Error::StrataInvalid {
                    height: d.edges[id].height,
                    reason: format!(
                        "image of `{}` crosses the higher edge `{}`",
                        d.edges[id].name, d.edges[e.id].name
                    ),
                });
            }
        }
    }

    // classify
    let mut strata = Vec::with_capacity(heights.len());
    for (r, edges) in stratum_edges.iter().enumerate() {
        let class = classify_stratum(d, &raw_images, &stratum_of_edge, r, edges)?;
        if matches!(class, StratumClass::Zero) {
            for &e in edges {
                for v in [d.edges[e].from, d.edges[e].to] {
                    if d.fat_factor(v).is_some() {
                        return Err(Error::StrataInvalid {
                            height: d.edges[e].height,
                            reason: "zero strata must not contain fat vertices".into(),
                        });
                    }
                }
                for (oe, _) in &raw_images[e].steps {
                    if stratum_of_edge[oe.id] >= r {
                        return Err(Error::StrataInvalid {
                            height: d.edges[e].height,
                            reason: "zero-stratum images must have strictly lower height".into(),
                        });
                    }
                }
            }
        }
        strata.push(Stratum {
            height: heights[r],
            edges: edges.clone(),
            class,
        });
    }

    let mut machine = Machine {
        decl,
        raw_images,
        edge_splits: Vec::new(),
        inps: Vec::new(),
        excs: Vec::new(),
        conns: Vec::new(),
        strata,
        stratum_of_edge,
        power,
    };
    machine.edge_splits = vec![None; machine.decl.edges.len()];

    // INPs: boundary-normalized paths with computed corrections
    for inp in &machine.decl.inps.clone() {
        let mut path = tighten(&machine, &inp.path)?;
        path.g0 = machine.zero_elt(path.base);
        if let Some((e, _)) = path.steps.last() {
            let v = machine.terminus(*e);
            path.steps.last_mut().unwrap().1 = machine.zero_elt(v);
        }
        let img = machine.f_sharp_path(&path, usize::MAX)?;
        let (left, right) = equivalence_boundaries(&machine, &path, &img).ok_or_else(|| {
            Error::Invalid(format!(
                "declared INP `{}` is not sent to an equivalent path by f♯",
                inp.name
            ))
        })?;
        machine.inps.push(InpData {
            name: inp.name.clone(),
            path,
            left,
            right,
        });
    }

    // exceptional templates
    for exc in &machine.decl.excs.clone() {
        let data = validate_exceptional(&machine, exc)?;
        machine.excs.push(data);
    }

    // connecting paths: normalized; images filled after edge splittings
    for conn in &machine.decl.conns.clone() {
        let mut path = tighten(&machine, &conn.path)?;
        path.g0 = machine.zero_elt(path.base);
        if let Some((e, _)) = path.steps.last() {
            let v = machine.terminus(*e);
            path.steps.last_mut().unwrap().1 = machine.zero_elt(v);
        }
        let mut strat: Option<usize> = None;
        for (e, _) in &path.steps {
            let r = machine.stratum_of_edge[e.id];
            if !matches!(machine.strata[r].class, StratumClass::Zero) {
                return Err(Error::Invalid(format!(
                    "connecting path `{}` leaves the zero strata",
                    conn.name
                )));
            }
            if *strat.get_or_insert(r) != r {
                return Err(Error::Invalid(format!(
                    "connecting path `{}` spans several strata",
                    conn.name
                )));
            }
        }
        machine.conns.push(ConnData {
            name: conn.name.clone(),
            path,
            image: SplitPath {
                base: 0,
                g0: Elt::Trivial,
                terms: Vec::new(),
                seps: Vec::new(),
                g_end: Elt::Trivial,
            },
        });
    }

    // declared splittings of EG/NEG edge images
    for id in 0..machine.decl.edges.len() {
        let r = machine.stratum_of_edge[id];
        if matches!(machine.strata[r].class, StratumClass::Zero) {
            continue;
        }
        let img_decl = machine.decl.images[id].clone();
        let split = resolve_marked_split(&machine, &img_decl)?;
        validate_edge_split(&machine, id, &split)?;
        if !machine.verify_split_path(&split, K_CHECK)? {
            return Err(Error::Invalid(format!(
                "declared splitting of `image {}` cancels under f♯",
                machine.decl.edges[id].name
            )));
        }
        machine.edge_splits[id] = Some(split);
    }

    // connecting-path images, in height order (images have lower height)
    let mut conn_order: Vec<usize> = (0..machine.conns.len()).collect();
    conn_order.sort_by_key(|&i| {
        machine.conns[i]
            .path
            .steps
            .iter()
            .map(|(e, _)| machine.stratum_of_edge[e.id])
            .max()
            .unwrap_or(0)
    });
    for i in conn_order {
        let img = machine.f_sharp_path(&machine.conns[i].path, usize::MAX)?;
        let split = machine.match_path(&img).ok_or_else(|| {
            Error::Invalid(format!(
                "image of connecting path `{}` is not completely split over the declared terms",
                machine.conns[i].name
            ))
        })?;
        if !machine.verify_split_path(&split, K_CHECK)? {
            return Err(Error::Invalid(format!(
                "image splitting of connecting path `{}` cancels under f♯",
                machine.conns[i].name
            )));
        }
        machine.conns[i].image = split;
    }

    Ok(machine)
}

/// `f♯(path) = left · path · right`? Returns the boundary corrections.
fn equivalence_boundaries(
    m: &Machine,
    path: &GraphPath,
    img: &GraphPath,
) -> Option<(Elt, Elt)> {
    if path.n_edges() != img.n_edges() || path.base != img.base {
        return None;
    }
    let n = path.n_edges();
    for k in 0..n {
        if path.steps[k].0 != img.steps[k].0 {
            return None;
        }
        if k + 1 < n && path.steps[k].1 != img.steps[k].1 {
            return None;
        }
    }
    let left = img.g0.add(&path.g0.neg()).ok()?;
    let right = img.steps[n - 1].1.add(&path.steps[n - 1].1.neg()).ok()?;
    let _ = m;
    Some((left, right))
}

fn classify_stratum(
    d: &CtMapDecl,
    raw_images: &[GraphPath],
    stratum_of_edge: &[usize],
    r: usize,
    edges: &[usize],
) -> Result<StratumClass> {
    let n = edges.len();
    let idx: HashMap<usize, usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    // crossing matrix: m[row][col] = how often edge `row` appears in the
    // image of edge `col` (either orientation)
    let mut m = vec![vec![0usize; n]; n];
    for (col, &e) in edges.iter().enumerate() {
        for (oe, _) in &raw_images[e].steps {
            if let Some(&row) = idx.get(&oe.id) {
                m[row][col] += 1;
            }
        }
    }
    let height = d.edges[edges[0]].height;
    let total: usize = m.iter().flatten().sum();
    if total == 0 {
        return Ok(StratumClass::Zero);
    }
    if n == 1 && m[0][0] == 1 {
        // NEG: f(e) = g·e·u (or mirrored), u of lower height
        let e = edges[0];
        let img = &raw_images[e];
        let pos = img
            .steps
            .iter()
            .position(|(oe, _)| oe.id == e)
            .expect("crossing counted");
        let oe = img.steps[pos].0;
        if oe.rev {
            return Err(Error::StrataInvalid {
                height,
                reason: format!("edge `{}` maps over its own reverse", d.edges[e].name),
            });
        }
        if pos != 0 && pos != img.steps.len() - 1 {
            return Err(Error::StrataInvalid {
                height,
                reason: format!(
                    "single crossing of `{}` must be the first or last edge of its image",
                    d.edges[e].name
                ),
            });
        }
        for (k, (oe2, _)) in img.steps.iter().enumerate() {
            if k != pos && stratum_of_edge[oe2.id] >= r {
                return Err(Error::StrataInvalid {
                    height,
                    reason: format!(
                        "the turn part of the image of `{}` is not of lower height",
                        d.edges[e].name
                    ),
                });
            }
        }
        let fixed = img.steps.len() == 1;
        return Ok(StratumClass::Neg {
            linear: false, // refined later, needs f♯ of the turn part
            fixed,
        });
    }
    if !is_irreducible(&m) {
        return Err(Error::StrataInvalid {
            height,
            reason: "transition matrix of the stratum is reducible".into(),
        });
    }
    let lambda = perron_root(&m)?;
    if lambda <= 1.0 + LAMBDA_TOL_EXACT {
        return Err(Error::StrataInvalid {
            height,
            reason: format!(
                "irreducible stratum has Perron-Frobenius eigenvalue {lambda} ≤ 1"
            ),
        });
    }
    let rows: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| row.iter().map(|&c| BigInt::from(c)).collect())
        .collect();
    let charpoly = IntMatrix::from_rows(rows)?.charpoly();
    Ok(StratumClass::Eg { lambda, charpoly })
}

fn is_irreducible(m: &[Vec<usize>]) -> bool {
    let n = m.len();
    if n == 0 {
        return false;
    }
    // reachability closure over the support digraph col -> row
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in m.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                reach[j][i] = true; // j's image crosses i
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    (0..n).all(|i| (0..n).all(|j| reach[i][j]))
}

/// Perron–Frobenius eigenvalue of an irreducible non-negative integer
/// matrix: power iteration on `M + I` (always primitive), cross-checked
/// against the characteristic polynomial.
fn perron_root(m: &[Vec<usize>]) -> Result<f64> {
    let n = m.len();
    let mut x = vec![1.0f64; n];
    let mut lambda = 0.0f64;
    for _ in 0..200_000 {
        let mut y = x.clone(); // the +I part
        for i in 0..n {
            for j in 0..n {
                y[i] += m[i][j] as f64 * x[j];
            }
        }
        let norm: f64 = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let next = norm - 1.0;
        for v in y.iter_mut() {
            *v /= norm;
        }
        let done = (next - lambda).abs() <= 1e-13 * next.max(1.0);
        lambda = next;
        x = y;
        if done {
            break;
        }
    }
    // cross-check as a root of the characteristic polynomial
    let rows: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| row.iter().map(|&c| BigInt::from(c)).collect())
        .collect();
    let cp = IntMatrix::from_rows(rows)?.charpoly();
    let val: f64 = cp
        .iter()
        .enumerate()
        .map(|(i, c)| c.to_f64().unwrap_or(0.0) * lambda.powi(i as i32))
        .sum();
    let scale: f64 = cp
        .iter()
        .enumerate()
        .map(|(i, c)| (c.to_f64().unwrap_or(0.0) * lambda.powi(i as i32)).abs())
        .sum();
    if val.abs() > 1e-8 * scale.max(1.0) {
        return Err(Error::CrossCheck(format!(
            "Perron root {lambda} is not a root of the transition characteristic polynomial"
        )));
    }
    Ok(lambda)
}

fn validate_exceptional(m: &Machine, exc: &super::decl::ExcDecl) -> Result<ExcData> {
    let name = &exc.name;
    if exc.e_left == exc.e_right {
        return Err(Error::Invalid(format!(
            "exceptional `{name}`: the two linear edges must differ"
        )));
    }
    if exc.d_left <= 0 || exc.d_right <= 0 || exc.d_left == exc.d_right {
        return Err(Error::Invalid(format!(
            "exceptional `{name}`: twist exponents must be positive and distinct"
        )));
    }
    // w: a closed Nielsen path with f♯(w) = w exactly
    let mut w = tighten(m, &exc.w)?;
    w.g0 = m.zero_elt(w.base);
    if let Some((e, _)) = w.steps.last() {
        let v = m.terminus(*e);
        // keep the trailing element: w is a loop, its wrap element matters
        let _ = v;
    }
    if w.endpoint(m) != w.base || w.n_edges() == 0 {
        return Err(Error::Invalid(format!(
            "exceptional `{name}`: w must be a non-trivial loop"
        )));
    }
    let img_w = m.f_sharp_path(&w, usize::MAX)?;
    if img_w != w {
        return Err(Error::Invalid(format!(
            "exceptional `{name}`: f♯(w) must equal w exactly"
        )));
    }
    // linear edges: f(e) = h · e · w^d
    let h_left = check_linear_form(m, exc.e_left, &w, exc.d_left, name)?;
    let h_right = check_linear_form(m, exc.e_right, &w, exc.d_right, name)?;
    let tl = m.terminus(OEdge::fwd(exc.e_left));
    let tr = m.terminus(OEdge::fwd(exc.e_right));
    if tl != w.base || tr != w.base {
        return Err(Error::Invalid(format!(
            "exceptional `{name}`: both linear edges must end at the base of w"
        )));
    }
    Ok(ExcData {
        name: name.clone(),
        e_left: exc.e_left,
        e_right: exc.e_right,
        w,
        d_left: exc.d_left,
        d_right: exc.d_right,
        h_left,
        h_right,
    })
}

/// Verify `f(e) = h · e · w^d` and return `h`.
fn check_linear_form(
    m: &Machine,
    e: usize,
    w: &GraphPath,
    d: i64,
    name: &str,
) -> Result<Elt> {
    let img = &m.raw_images[e];
    let first = img.steps.first();
    if first.map(|(oe, _)| *oe) != Some(OEdge::fwd(e)) {
        return Err(Error::Invalid(format!(
            "exceptional `{name}`: image of linear edge must start with the edge itself"
        )));
    }
    // expected tail: w^d starting after e
    let mut expect = GraphPath {
        base: m.terminus(OEdge::fwd(e)),
        g0: m.zero_elt(m.terminus(OEdge::fwd(e))),
        steps: Vec::new(),
    };
    for _ in 0..d {
        for (oe, g) in &w.steps {
            expect.steps.push((*oe, g.clone()));
        }
    }
    let tail = &img.steps[1..];
    if tail.len() != expect.steps.len() {
        return Err(Error::Invalid(format!(
            "exceptional `{name}`: image tail of a linear edge is not w^{d}"
        )));
    }
    for (k, (oe, g)) in tail.iter().enumerate() {
        if *oe != expect.steps[k].0 || (k + 1 < tail.len() && *g != expect.steps[k].1) {
            return Err(Error::Invalid(format!(
                "exceptional `{name}`: image tail of a linear edge is not w^{d}"
            )));
        }
    }
    Ok(img.g0.clone())
}

/// Resolve a marked image declaration into unit terms.
fn resolve_marked_split(m: &Machine, img: &ImageDecl) -> Result<SplitPath> {
    let path = &img.path;
    let n = path.n_edges();
    let mut bounds = vec![0usize];
    bounds.extend(img.marks.iter().copied());
    bounds.push(n);
    let mut terms = Vec::new();
    let mut seps = Vec::new();
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let unit = resolve_chunk(m, &path.steps, lo, hi - lo)?;
        terms.push(unit);
        seps.push(path.steps[hi - 1].1.clone());
    }
    let g_end = seps.pop().expect("image is non-trivial");
    Ok(SplitPath {
        base: path.base,
        g0: path.g0.clone(),
        terms,
        seps,
        g_end,
    })
}

fn resolve_chunk(
    m: &Machine,
    steps: &[(OEdge, Elt)],
    pos: usize,
    len: usize,
) -> Result<UnitRef> {
    for (u, l) in m.candidates_at_pub(steps, pos) {
        if l == len {
            return Ok(u);
        }
    }
    let names: Vec<String> = steps[pos..pos + len]
        .iter()
        .map(|(e, _)| m.decl.edge_name(*e))
        .collect();
    Err(Error::Invalid(format!(
        "declared splitting chunk `{}` is not a declared term",
        names.join(" ")
    )))
}

fn validate_edge_split(m: &Machine, id: usize, split: &SplitPath) -> Result<()> {
    let r = m.stratum_of_edge[id];
    match &m.strata[r].class {
        StratumClass::Eg { .. } => {
            for side in [split.terms.first(), split.terms.last()] {
                let Some(t) = side else { continue };
                let ok = matches!(t.id, UnitId::Edge(e) if m.stratum_of_edge[e] == r);
                if !ok {
                    return Err(Error::StrataInvalid {
                        height: m.strata[r].height,
                        reason: format!(
                            "image of EG edge `{}` must start and end with edges of its stratum",
                            m.decl.edges[id].name
                        ),
                    });
                }
            }
        }
        StratumClass::Neg { .. } => {
            let own =
                |t: &UnitRef| matches!(t.id, UnitId::Edge(e) if e == id) && !t.rev;
            let first_is = split.terms.first().map(own).unwrap_or(false);
            let last_is = split.terms.last().map(own).unwrap_or(false);
            if !first_is && !last_is {
                return Err(Error::StrataInvalid {
                    height: m.strata[r].height,
                    reason: format!(
                        "NEG edge `{}` must be the first or last term of its image",
                        m.decl.edges[id].name
                    ),
                });
            }
        }
        StratumClass::Zero => {}
    }
    Ok(())
}

/// Refine the NEG `linear` flags (needs the full machine: a linear edge's
/// turn part must be a Nielsen path).
pub fn refine_linear_flags(machine: &mut Machine) -> Result<()> {
    let mut updates: Vec<(usize, bool)> = Vec::new();
    for (r, stratum) in machine.strata.iter().enumerate() {
        let Stratum { edges, class, .. } = stratum;
        if let StratumClass::Neg { fixed, .. } = class {
            let e = edges[0];
            let linear = if *fixed {
                false
            } else {
                let img = &machine.raw_images[e];
                let pos = img
                    .steps
                    .iter()
                    .position(|(oe, _)| oe.id == e)
                    .expect("validated");
                // turn part u (before or after the edge occurrence)
                let u_steps: Vec<(OEdge, Elt)> = if pos == 0 {
                    img.steps[1..].to_vec()
                } else {
                    img.steps[..pos].to_vec()
                };
                if u_steps.is_empty() {
                    false
                } else {
                    let base = machine.origin(u_steps[0].0);
                    let mut u = GraphPath {
                        base,
                        g0: machine.zero_elt(base),
                        steps: u_steps,
                    };
                    let v_end = u.endpoint(machine);
                    u.steps.last_mut().unwrap().1 = machine.zero_elt(v_end);
                    let img_u = machine.f_sharp_path(&u, usize::MAX)?;
                    equivalence_boundaries(machine, &u, &img_u).is_some()
                }
            };
            updates.push((r, linear));
        }
    }
    for (r, linear) in updates {
        if let StratumClass::Neg { linear: l, .. } = &mut machine.strata[r].class {
            *l = linear;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Vertex stabilization
// ---------------------------------------------------------------------------

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Least `p ≥ 1` such that `f^p` maps every vertex onto a fixed point of
/// `f^p`: the lcm of the cycle lengths of the functional graph, raised to a
/// multiple covering the longest tail.
pub fn vertex_stabilization_power(map: &[usize]) -> usize {
    let n = map.len();
    let mut cycle_lcm = 1usize;
    let mut max_tail = 0usize;
    for start in 0..n {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut v = start;
        let mut step = 0usize;
        loop {
            if let Some(&first) = seen.get(&v) {
                let cycle = step - first;
                cycle_lcm = lcm(cycle_lcm, cycle);
                max_tail = max_tail.max(first);
                break;
            }
            seen.insert(v, step);
            v = map[v];
            step += 1;
        }
    }
    let mut p = cycle_lcm;
    while p < max_tail.max(1) {
        p += cycle_lcm;
    }
    p
}

// ---------------------------------------------------------------------------
// Fat turns
// ---------------------------------------------------------------------------

fn elt_to_vec(g: &Elt, rank: usize) -> Vec<BigInt> {
    match g {
        Elt::Trivial => vec![BigInt::zero(); rank],
        Elt::Fat(v) => v.clone(),
    }
}

/// Growth of a turn `(θ, g, θ′)` at a fat vertex: detect the eventual period
/// of the boundary contributions of the evolving adjacent terms, then solve
/// the affine recursion `g ← A g + c` exactly.
pub fn fat_turn_growth(
    m: &Machine,
    left: &UnitRef,
    g: &Elt,
    right: &UnitRef,
) -> Result<GrowthType> {
    let v = m.unit_endpoint(left);
    if m.unit_origin(right) != v {
        return Err(Error::Invalid("turn terms do not meet at a vertex".into()));
    }
    let Some(j) = m.fat_factor(v) else {
        return Err(Error::Invalid("fat_turn_growth needs a fat vertex".into()));
    };
    let rank = m.factor_rank(j);
    let a = m.factor_matrix(j).clone();
    let k_per = 2 * (2 * m.decl.edges.len() + m.inps.len() + m.excs.len() + m.conns.len()).max(1);

    let mut state_l = *left;
    let mut state_r = *right;
    let mut seen: HashMap<((UnitId, bool), (UnitId, bool)), usize> = HashMap::new();
    let mut cs: Vec<Vec<BigInt>> = Vec::new();
    let (t0, k0) = loop {
        let key = (state_l.state_key(), state_r.state_key());
        if let Some(&first) = seen.get(&key) {
            break (first, cs.len() - first);
        }
        if cs.len() > k_per {
            return Err(Error::PeriodNotFound { bound: k_per });
        }
        seen.insert(key, cs.len());
        let img_l = m.unit_image(&state_l);
        let img_r = m.unit_image(&state_r);
        let c = img_l.g_end.add(&img_r.g0)?;
        cs.push(elt_to_vec(&c, rank));
        state_l = *img_l.terms.last().expect("images are non-trivial");
        state_r = img_r.terms[0];
    };

    // run the recursion to the start of the periodic regime
    let mut g_cur = elt_to_vec(g, rank);
    for c in cs.iter().take(t0) {
        let mut next = a.mul_vec(&g_cur)?;
        for (x, y) in next.iter_mut().zip(c) {
            *x += y;
        }
        g_cur = next;
    }
    // accumulate one full period: B = A^{k0}, C = Σ A^{k0-1-i} c_{t0+i}
    let b = a.pow(k0);
    let mut acc = vec![BigInt::zero(); rank];
    for i in 0..k0 {
        let mut next = a.mul_vec(&acc)?;
        for (x, y) in next.iter_mut().zip(&cs[t0 + i]) {
            *x += y;
        }
        acc = next;
    }
    let growth = abelian::affine_orbit_growth(&b, &acc, &g_cur)?;
    Ok(growth.root(k0 as u32))
}

// ---------------------------------------------------------------------------
// Growth-type assignment
// ---------------------------------------------------------------------------

/// Internal result of the bottom-up assignment, in the machine's own power.
#[derive(Debug, Clone)]
pub struct Assignment {
    pub edge_types: Vec<Option<GrowthType>>,
    pub conn_types: Vec<GrowthType>,
    /// (description, growth) pairs for every fat turn inspected.
    pub fat_turns: Vec<(String, GrowthType)>,
}

impl Assignment {
    pub fn lookup(&self, u: &UnitRef) -> GrowthType {
        match u.id {
            UnitId::Edge(e) => self.edge_types[e]
                .clone()
                .expect("growth of a zero edge requested"),
            UnitId::Inp(_) => GrowthType::bounded(),
            UnitId::Exc(_) => GrowthType::new(1, 1.0),
            UnitId::Conn(i) => self.conn_types[i].clone(),
        }
    }
}

/// The fat turns contributed by a split path: its own junctions that are
/// fat, plus the images of its non-fat junctions that become fat.
fn junction_turn_growths(
    m: &Machine,
    terms: &[UnitRef],
    seps: &[Elt],
    cyclic: bool,
    log: &mut Vec<(String, GrowthType)>,
) -> Result<Vec<GrowthType>> {
    let mut out = Vec::new();
    let count = if cyclic {
        terms.len()
    } else {
        terms.len().saturating_sub(1)
    };
    for i in 0..count {
        let left = &terms[i];
        let right = &terms[(i + 1) % terms.len()];
        let sep = &seps[i];
        let v = m.unit_endpoint(left);
        if m.fat_factor(v).is_some() {
            let g = fat_turn_growth(m, left, sep, right)?;
            log.push((turn_desc(m, left, sep, right), g.clone()));
            out.push(g);
        } else {
            // image of the turn: does it become fat?
            let v_img = m.decl.vertex_map[v];
            if m.fat_factor(v_img).is_some() {
                let img_l = m.unit_image(left);
                let img_r = m.unit_image(right);
                let left2 = *img_l.terms.last().expect("non-trivial");
                let right2 = img_r.terms[0];
                let sep2 = img_l
                    .g_end
                    .add(&m.map_elt(v, sep)?)?
                    .add(&img_r.g0)?;
                let g = fat_turn_growth(m, &left2, &sep2, &right2)?;
                log.push((turn_desc(m, &left2, &sep2, &right2), g.clone()));
                out.push(g);
            }
            // with a stabilized vertex map, a vertex whose image is not fat
            // never reaches a fat vertex
        }
    }
    Ok(out)
}

fn turn_desc(m: &Machine, left: &UnitRef, g: &Elt, right: &UnitRef) -> String {
    let v = m.unit_endpoint(left);
    let gs = m
        .decl
        .display_elt(v, g)
        .unwrap_or_else(|| "1".to_string());
    format!(
        "({}, {}, {})",
        m.unit_name(left),
        gs,
        m.unit_name(right)
    )
}

fn growth_of_split_path(
    m: &Machine,
    s: &SplitPath,
    asg: &Assignment,
    log: &mut Vec<(String, GrowthType)>,
) -> Result<GrowthType> {
    let mut best = GrowthType::bounded();
    for t in &s.terms {
        best = best.max_tol(asg.lookup(t), LAMBDA_TOL_EXACT);
    }
    for g in junction_turn_growths(m, &s.terms, &s.seps, false, log)? {
        best = best.max_tol(g, LAMBDA_TOL_EXACT);
    }
    Ok(best)
}

fn growth_of_split_circuit(
    m: &Machine,
    c: &SplitCircuit,
    asg: &Assignment,
    log: &mut Vec<(String, GrowthType)>,
) -> Result<GrowthType> {
    let mut best = GrowthType::bounded();
    for t in &c.terms {
        best = best.max_tol(asg.lookup(t), LAMBDA_TOL_EXACT);
    }
    for g in junction_turn_growths(m, &c.terms, &c.seps, true, log)? {
        best = best.max_tol(g, LAMBDA_TOL_EXACT);
    }
    Ok(best)
}

/// The bottom-up assignment of growth types to every unit, in the machine's
/// power. INPs get `(0,1)`, exceptional paths `(1,1)`, connecting paths the
/// growth of their image; an EG/NEG edge gets
/// `max((0, λ_r), (d_C, λ_C))`, bumped to `(d_C + 1, λ_C)` when `λ_r = λ_C`.
pub fn assign_growth_types(m: &Machine) -> Result<Assignment> {
    let mut asg = Assignment {
        edge_types: vec![None; m.decl.edges.len()],
        conn_types: vec![GrowthType::bounded(); m.conns.len()],
        fat_turns: Vec::new(),
    };
    let mut log = Vec::new();
    for (r, stratum) in m.strata.iter().enumerate() {
        match &stratum.class {
            StratumClass::Zero => {
                for (ci, conn) in m.conns.iter().enumerate() {
                    let conn_r = conn
                        .path
                        .steps
                        .iter()
                        .map(|(e, _)| m.stratum_of_edge[e.id])
                        .max()
                        .unwrap_or(0);
                    if conn_r == r {
                        asg.conn_types[ci] =
                            growth_of_split_path(m, &conn.image, &asg, &mut log)?;
                    }
                }
            }
            StratumClass::Neg { fixed: true, .. } => {
                for &e in &stratum.edges {
                    asg.edge_types[e] = Some(GrowthType::bounded());
                }
            }
            class => {
                let (lambda_r, poly_r) = match class {
                    StratumClass::Eg { lambda, charpoly } => (*lambda, Some(charpoly.clone())),
                    _ => (1.0, Some(vec![BigInt::from(-1), BigInt::from(1)])),
                };
                let mut c_set: Vec<GrowthType> = Vec::new();
                for &e in &stratum.edges {
                    let split = m.edge_splits[e].as_ref().expect("EG/NEG edges are split");
                    for t in &split.terms {
                        if matches!(t.id, UnitId::Edge(e2) if m.stratum_of_edge[e2] == r) {
                            continue;
                        }
                        c_set.push(asg.lookup(t));
                    }
                    c_set.extend(junction_turn_growths(
                        m,
                        &split.terms,
                        &split.seps,
                        false,
                        &mut log,
                    )?);
                }
                let c_max = c_set
                    .into_iter()
                    .fold(GrowthType::bounded(), |a, b| a.max_tol(b, LAMBDA_TOL_EXACT));
                let mut lam_r = GrowthType::new(0, lambda_r);
                lam_r.poly = poly_r;
                let assigned = if lam_r.lambda_eq(&c_max, LAMBDA_TOL_EXACT) {
                    GrowthType {
                        d: c_max.d + 1,
                        lambda: lam_r.lambda,
                        poly: lam_r.poly.clone(),
                    }
                } else {
                    lam_r.max_tol(c_max, LAMBDA_TOL_EXACT)
                };
                for &e in &stratum.edges {
                    asg.edge_types[e] = Some(assigned.clone());
                }
            }
        }
    }
    asg.fat_turns = log;
    Ok(asg)
}

/// Growth of a circuit: match it (applying `f♯` up to `K_SPLIT` times if
/// needed — the growth type is `f♯`-invariant), then take the maximum over
/// term growths and fat-turn growths.
pub fn circuit_growth(
    m: &Machine,
    asg: &Assignment,
    circuit: &Circuit,
    declared: Option<&SplitCircuit>,
) -> Result<(GrowthType, usize)> {
    if let Some(split) = declared {
        let materialized = m.split_circuit_to_circuit(split)?;
        if !materialized.eq_up_to_rotation(circuit) {
            return Err(Error::Invalid(
                "declared splitting does not match the circuit".into(),
            ));
        }
        if !m.verify_split_circuit(split, K_CHECK)? {
            return Err(Error::Invalid(
                "declared circuit splitting cancels under f♯".into(),
            ));
        }
        let mut log = Vec::new();
        return Ok((growth_of_split_circuit(m, split, asg, &mut log)?, 0));
    }
    let mut cur = circuit.clone();
    for attempt in 0..=K_SPLIT {
        if let Some(split) = m.match_circuit(&cur) {
            let mut log = Vec::new();
            return Ok((growth_of_split_circuit(m, &split, asg, &mut log)?, attempt));
        }
        cur = m.f_sharp_circuit(&cur, usize::MAX)?;
    }
    Err(Error::NotCompletelySplit {
        attempts: K_SPLIT + 1,
    })
}

// ---------------------------------------------------------------------------
// Powers of the machine
// ---------------------------------------------------------------------------

/// Build the declaration of `f^p`: image paths and splittings are iterated,
/// factor matrices powered, twist exponents scaled, and each stratum refined
/// into the strongly connected components of its `f^p`-crossing digraph.
pub fn power_decl(m: &Machine, p: usize) -> Result<CtMapDecl> {
    assert!(p >= 1);
    let mut decl = m.decl.clone();
    // vertex map composed p times
    decl.vertex_map = (0..decl.vertices.len())
        .map(|v| {
            let mut x = v;
            for _ in 0..p {
                x = m.decl.vertex_map[x];
            }
            x
        })
        .collect();
    for (j, f) in decl.factors.iter_mut().enumerate() {
        f.matrix = m.factor_matrix(j).pow(p);
    }
    for exc in decl.excs.iter_mut() {
        exc.d_left *= p as i64;
        exc.d_right *= p as i64;
    }
    // images of f^p with marked splittings where available
    for id in 0..decl.edges.len() {
        match &m.edge_splits[id] {
            Some(split) => {
                let mut s = split.clone();
                for _ in 1..p {
                    s = m.term_f_sharp(&s)?;
                }
                let path = m.split_to_path(&s)?;
                let mut marks = Vec::new();
                let mut count = 0usize;
                for t in &s.terms[..s.terms.len() - 1] {
                    count += m.unit_to_path(t).n_edges();
                    marks.push(count);
                }
                decl.images[id] = ImageDecl { path, marks };
            }
            None => {
                let e = OEdge::fwd(id);
                let single = GraphPath {
                    base: m.origin(e),
                    g0: m.zero_elt(m.origin(e)),
                    steps: vec![(e, m.zero_elt(m.terminus(e)))],
                };
                let path = m.f_sharp_path_iter(&single, p, usize::MAX)?;
                decl.images[id] = ImageDecl {
                    path,
                    marks: Vec::new(),
                };
            }
        }
    }
    // refine strata: SCCs of the crossing digraph under f^p, lower targets
    // getting lower heights
    let mut next_height = 1usize;
    let mut new_heights = vec![0usize; decl.edges.len()];
    for stratum in &m.strata {
        let edges = &stratum.edges;
        let n = edges.len();
        let idx: HashMap<usize, usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut adj = vec![vec![false; n]; n]; // col -> row crossing
        for (col, &e) in edges.iter().enumerate() {
            for (oe, _) in &decl.images[e].path.steps {
                if let Some(&row) = idx.get(&oe.id) {
                    adj[col][row] = true;
                }
            }
        }
        let comps = sccs(&adj);
        // order components sinks-first so that crossing targets sit lower
        let order = topo_sinks_first(&adj, &comps);
        for comp_idx in order {
            for &local in &comps[comp_idx] {
                new_heights[edges[local]] = next_height;
            }
            next_height += 1;
        }
    }
    for (id, h) in new_heights.iter().enumerate() {
        decl.edges[id].height = *h;
    }
    Ok(decl)
}

/// Strongly connected components (iterative Tarjan would be overkill at this
/// scale: Kosaraju on the small adjacency matrix).
fn sccs(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut order = Vec::new();
    let mut seen = vec![false; n];
    fn dfs1(v: usize, adj: &[Vec<bool>], seen: &mut [bool], order: &mut Vec<usize>) {
        seen[v] = true;
        for (w, &a) in adj[v].iter().enumerate() {
            if a && !seen[w] {
                dfs1(w, adj, seen, order);
            }
        }
        order.push(v);
    }
    for v in 0..n {
        if !seen[v] {
            dfs1(v, adj, &mut seen, &mut order);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    fn dfs2(v: usize, adj: &[Vec<bool>], comp: &mut [usize], c: usize, members: &mut Vec<usize>) {
        comp[v] = c;
        members.push(v);
        for w in 0..adj.len() {
            if adj[w][v] && comp[w] == usize::MAX {
                dfs2(w, adj, comp, c, members);
            }
        }
    }
    for &v in order.iter().rev() {
        if comp[v] == usize::MAX {
            let mut members = Vec::new();
            dfs2(v, adj, &mut comp, comps.len(), &mut members);
            comps.push(members);
        }
    }
    comps
}

fn topo_sinks_first(adj: &[Vec<bool>], comps: &[Vec<usize>]) -> Vec<usize> {
    let nc = comps.len();
    let mut comp_of = vec![0usize; adj.len()];
    for (c, members) in comps.iter().enumerate() {
        for &v in members {
            comp_of[v] = c;
        }
    }
    // condensation arcs: a -> b if some v in a crosses w in b (a ≠ b)
    let mut out_deg = vec![0usize; nc];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); nc];
    let mut arcs = std::collections::HashSet::new();
    for (v, row) in adj.iter().enumerate() {
        for (w, &a) in row.iter().enumerate() {
            if a && comp_of[v] != comp_of[w] && arcs.insert((comp_of[v], comp_of[w])) {
                out_deg[comp_of[v]] += 1;
                preds[comp_of[w]].push(comp_of[v]);
            }
        }
    }
    let mut ready: Vec<usize> = (0..nc).filter(|&c| out_deg[c] == 0).collect();
    ready.sort_unstable();
    let mut out = Vec::new();
    while let Some(c) = ready.pop() {
        out.push(c);
        for &p in &preds[c] {
            out_deg[p] -= 1;
            if out_deg[p] == 0 {
                ready.push(p);
            }
        }
        ready.sort_unstable();
    }
    debug_assert_eq!(out.len(), nc);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stabilization_power_examples() {
        // all vertices fixed
        assert_eq!(vertex_stabilization_power(&[0, 1, 2]), 1);
        // two vertices swapped
        assert_eq!(vertex_stabilization_power(&[1, 0]), 2);
        // orbit of length 3 feeding a fixed vertex: v3 -> v2 -> v1 -> v0 -> v0
        assert_eq!(vertex_stabilization_power(&[0, 0, 1, 2]), 3);
        // a 2-cycle plus a tail of length 1 onto it: lcm 2 covers the tail
        assert_eq!(vertex_stabilization_power(&[1, 0, 0]), 2);
        // tail of length 3 onto a 2-cycle: need a multiple of 2 that is ≥ 3
        assert_eq!(vertex_stabilization_power(&[1, 0, 0, 2, 3]), 4);
    }
}
