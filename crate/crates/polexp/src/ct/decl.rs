//! Declaration of a completely split graph-of-groups self-map, and its file
//! format.
//!
//! ```text
//! factor g1 rank 2 matrix [[1,1],[1,0]]
//! vertex w fat g1
//! edge a w w height 1
//! map w -> w
//! image a -> a · g1[1,0] b
//! inp s = a g1[1,0] A
//! exceptional x = (e, f, w, 2, 1)
//! connecting c1 = z
//! component_spectrum s1 = {(0,1),(0,2.296630262886)}
//! ```
//!
//! Paths are whitespace-separated tokens: edge names (a single uppercase
//! letter or a `~` prefix inverts), and `g<j>[c1,..,ck]` group elements.
//! `·` (or a bare `.`) marks the declared complete-splitting boundaries in
//! `image` lines. Vertex `map` lines default to fixing the vertex.

use num_bigint::BigInt;

use crate::abelian::IntMatrix;
use crate::error::{Error, Result};
use crate::growth::GrowthType;
use crate::parse::{self, Tok};

use super::graph::{Elt, GraphPath, GraphShape, OEdge, VertexId};

#[derive(Debug, Clone)]
pub struct FactorDecl {
    pub name: String,
    pub rank: usize,
    pub matrix: IntMatrix,
}

#[derive(Debug, Clone)]
pub struct VertexDecl {
    pub name: String,
    /// 0-based index into `factors` when the vertex is fat.
    pub fat: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct EdgeDecl {
    pub name: String,
    pub from: VertexId,
    pub to: VertexId,
    pub height: usize,
}

#[derive(Debug, Clone)]
pub struct InpDecl {
    pub name: String,
    pub path: GraphPath,
}

#[derive(Debug, Clone)]
pub struct ExcDecl {
    pub name: String,
    pub e_left: usize,
    pub e_right: usize,
    /// Twist loop as a based path (must be a closed Nielsen path fixed by
    /// f♯); normalized to trivial boundary elements at load time.
    pub w: GraphPath,
    pub d_left: i64,
    pub d_right: i64,
}

#[derive(Debug, Clone)]
pub struct ConnDecl {
    pub name: String,
    pub path: GraphPath,
}

/// An edge image together with the declared splitting: the marker positions
/// as cumulative edge counts.
#[derive(Debug, Clone)]
pub struct ImageDecl {
    pub path: GraphPath,
    pub marks: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CtMapDecl {
    pub name: String,
    pub factors: Vec<FactorDecl>,
    pub vertices: Vec<VertexDecl>,
    pub edges: Vec<EdgeDecl>,
    pub vertex_map: Vec<VertexId>,
    /// Image of each edge in its declared orientation.
    pub images: Vec<ImageDecl>,
    pub inps: Vec<InpDecl>,
    pub excs: Vec<ExcDecl>,
    pub conns: Vec<ConnDecl>,
    /// Opaque component spectra (surface pieces): not tied to graph
    /// dynamics, merged into combination bounds.
    pub component_spectra: Vec<(String, Vec<GrowthType>)>,
}

impl GraphShape for CtMapDecl {
    fn origin(&self, e: OEdge) -> VertexId {
        let d = &self.edges[e.id];
        if e.rev {
            d.to
        } else {
            d.from
        }
    }

    fn terminus(&self, e: OEdge) -> VertexId {
        let d = &self.edges[e.id];
        if e.rev {
            d.from
        } else {
            d.to
        }
    }

    fn fat_factor(&self, v: VertexId) -> Option<usize> {
        self.vertices[v].fat
    }

    fn factor_rank(&self, factor: usize) -> usize {
        self.factors[factor].rank
    }
}

impl CtMapDecl {
    pub fn edge_by_name(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn edge_name(&self, e: OEdge) -> String {
        let n = &self.edges[e.id].name;
        if !e.rev {
            n.clone()
        } else if n.len() == 1 && n.chars().next().unwrap().is_ascii_lowercase() {
            n.to_uppercase()
        } else {
            format!("~{n}")
        }
    }

    pub fn display_elt(&self, v: VertexId, g: &Elt) -> Option<String> {
        match g {
            Elt::Trivial => None,
            Elt::Fat(vec) => {
                if g.is_trivial() {
                    return None;
                }
                let j = self.vertices[v].fat.expect("fat element at plain vertex");
                let cs: Vec<String> = vec.iter().map(|c| c.to_string()).collect();
                Some(format!("{}[{}]", self.factors[j].name, cs.join(",")))
            }
        }
    }

    pub fn display_path(&self, p: &GraphPath) -> String {
        let mut toks = Vec::new();
        let mut at = p.base;
        if let Some(s) = self.display_elt(at, &p.g0) {
            toks.push(s);
        }
        for (e, g) in &p.steps {
            toks.push(self.edge_name(*e));
            at = self.terminus(*e);
            if let Some(s) = self.display_elt(at, g) {
                toks.push(s);
            }
        }
        if toks.is_empty() {
            "1".to_string()
        } else {
            toks.join(" ")
        }
    }

    /// Parse a path in this graph's names; returns marker positions too.
    pub fn parse_marked_path(&self, text: &str) -> Result<(GraphPath, Vec<usize>)> {
        let toks = parse::tokenize_line("<path>", 1, text)?;
        self.parse_path_tokens(&toks, "<path>")
    }

    pub fn parse_path(&self, text: &str) -> Result<GraphPath> {
        Ok(self.parse_marked_path(text)?.0)
    }

    pub(super) fn parse_path_tokens(
        &self,
        toks: &[Tok],
        file: &str,
    ) -> Result<(GraphPath, Vec<usize>)> {
        enum Item {
            Edge(OEdge),
            Elt(usize, Vec<BigInt>),
            Mark,
        }
        let mut items = Vec::new();
        for t in toks {
            let txt = t.text.as_str();
            if txt == "·" || txt == "." {
                items.push(Item::Mark);
                continue;
            }
            if let Some(rest) = txt.strip_prefix('~') {
                let id = self.edge_by_name(rest).ok_or_else(|| {
                    Error::parse(file, t.line, t.col, format!("unknown edge `{rest}`"))
                })?;
                items.push(Item::Edge(OEdge { id, rev: true }));
                continue;
            }
            if txt.starts_with('g') && txt.contains('[') {
                let br = txt.find('[').unwrap();
                let fname = &txt[..br];
                let j = self
                    .factors
                    .iter()
                    .position(|f| f.name == fname)
                    .ok_or_else(|| {
                        Error::parse(file, t.line, t.col, format!("unknown factor `{fname}`"))
                    })?;
                let vec = parse::parse_int_vector(&txt[br..])
                    .map_err(|e| Error::parse(file, t.line, t.col, e.to_string()))?;
                if vec.len() != self.factors[j].rank {
                    return Err(Error::parse(
                        file,
                        t.line,
                        t.col,
                        format!("factor {fname} has rank {}", self.factors[j].rank),
                    ));
                }
                items.push(Item::Elt(j, vec));
                continue;
            }
            if let Some(id) = self.edge_by_name(txt) {
                items.push(Item::Edge(OEdge { id, rev: false }));
                continue;
            }
            if txt.len() == 1 && txt.chars().next().unwrap().is_ascii_uppercase() {
                let lower = txt.to_lowercase();
                if let Some(id) = self.edge_by_name(&lower) {
                    items.push(Item::Edge(OEdge { id, rev: true }));
                    continue;
                }
            }
            return Err(Error::parse(
                file,
                t.line,
                t.col,
                format!("unknown path token `{txt}`"),
            ));
        }

        let Some(first_edge) = items.iter().find_map(|i| match i {
            Item::Edge(e) => Some(*e),
            _ => None,
        }) else {
            return Err(Error::Invalid(
                "path must contain at least one edge".into(),
            ));
        };
        let base = self.origin(first_edge);
        let mut path = GraphPath {
            base,
            g0: self.zero_elt(base),
            steps: Vec::new(),
        };
        let mut marks = Vec::new();
        let mut at = base;
        let mut edge_count = 0usize;
        for item in items {
            match item {
                Item::Mark => marks.push(edge_count),
                Item::Elt(j, vec) => {
                    if self.fat_factor(at) != Some(j) {
                        return Err(Error::Invalid(format!(
                            "element of factor {} placed at vertex {}",
                            self.factors[j].name, self.vertices[at].name
                        )));
                    }
                    let g = Elt::Fat(vec);
                    let slot = match path.steps.last_mut() {
                        Some((_, t)) => t,
                        None => &mut path.g0,
                    };
                    *slot = slot.add(&g)?;
                }
                Item::Edge(e) => {
                    if self.origin(e) != at {
                        return Err(Error::Invalid(format!(
                            "edge `{}` does not start at vertex `{}`",
                            self.edge_name(e),
                            self.vertices[at].name
                        )));
                    }
                    at = self.terminus(e);
                    path.steps.push((e, self.zero_elt(at)));
                    edge_count += 1;
                }
            }
        }
        // drop leading/trailing/duplicate marks
        marks.retain(|&m| m > 0 && m < edge_count);
        marks.dedup();
        Ok((path, marks))
    }
}

/// Parse a `.ct` declaration file.
pub fn parse_ct(file_name: &str, text: &str) -> Result<CtMapDecl> {
    let mut decl = CtMapDecl {
        name: file_name.to_string(),
        factors: Vec::new(),
        vertices: Vec::new(),
        edges: Vec::new(),
        vertex_map: Vec::new(),
        images: Vec::new(),
        inps: Vec::new(),
        excs: Vec::new(),
        conns: Vec::new(),
        component_spectra: Vec::new(),
    };
    // collect structure first, then parse paths in a second pass
    let mut raw_lines: Vec<(usize, Vec<Tok>)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let toks = parse::tokenize_line(file_name, ln + 1, raw)?;
        if !toks.is_empty() {
            raw_lines.push((ln + 1, toks));
        }
    }

    let perr = |t: &Tok, m: String| Error::parse(file_name, t.line, t.col, m);

    // pass 1: factors, vertices, edges
    for (_, toks) in &raw_lines {
        match toks[0].text.as_str() {
            "factor" => {
                // factor g1 rank 2 matrix [[..]]
                if toks.len() != 6 || toks[2].text != "rank" || toks[4].text != "matrix" {
                    return Err(perr(
                        &toks[0],
                        "expected `factor g<j> rank <k> matrix [[..]]`".into(),
                    ));
                }
                let rank: usize = toks[3]
                    .text
                    .parse()
                    .map_err(|_| perr(&toks[3], "bad rank".into()))?;
                let matrix = IntMatrix::parse(&toks[5].text)
                    .map_err(|e| perr(&toks[5], e.to_string()))?;
                if matrix.n != rank {
                    return Err(perr(&toks[5], "matrix size does not match rank".into()));
                }
                decl.factors.push(FactorDecl {
                    name: toks[1].text.clone(),
                    rank,
                    matrix,
                });
            }
            "vertex" => {
                // vertex v0 [fat g1]
                let fat = if toks.len() >= 4 && toks[2].text == "fat" {
                    let fname = &toks[3].text;
                    Some(
                        decl.factors
                            .iter()
                            .position(|f| &f.name == fname)
                            .ok_or_else(|| perr(&toks[3], format!("unknown factor `{fname}`")))?,
                    )
                } else if toks.len() == 2 {
                    None
                } else {
                    return Err(perr(&toks[0], "expected `vertex <name> [fat g<j>]`".into()));
                };
                decl.vertices.push(VertexDecl {
                    name: toks[1].text.clone(),
                    fat,
                });
            }
            "edge" => {
                // edge a v0 v1 height 2
                if toks.len() != 6 || toks[4].text != "height" {
                    return Err(perr(
                        &toks[0],
                        "expected `edge <name> <from> <to> height <h>`".into(),
                    ));
                }
                let name = toks[1].text.clone();
                if name.starts_with('~') || name.chars().next().unwrap().is_ascii_uppercase() {
                    return Err(perr(&toks[1], "edge names must be lowercase".into()));
                }
                let from = vertex_by_name(&decl, &toks[2], file_name)?;
                let to = vertex_by_name(&decl, &toks[3], file_name)?;
                let height: usize = toks[5]
                    .text
                    .parse()
                    .map_err(|_| perr(&toks[5], "bad height".into()))?;
                if height == 0 {
                    return Err(perr(&toks[5], "heights start at 1".into()));
                }
                decl.edges.push(EdgeDecl {
                    name,
                    from,
                    to,
                    height,
                });
            }
            _ => {}
        }
    }
    decl.vertex_map = (0..decl.vertices.len()).collect();
    decl.images = vec![
        ImageDecl {
            path: GraphPath {
                base: 0,
                g0: Elt::Trivial,
                steps: Vec::new(),
            },
            marks: Vec::new(),
        };
        decl.edges.len()
    ];
    let mut image_seen = vec![false; decl.edges.len()];

    // pass 2: everything that mentions paths
    for (_, toks) in &raw_lines {
        match toks[0].text.as_str() {
            "factor" | "vertex" | "edge" => {}
            "map" => {
                // map v -> w
                if toks.len() != 4 || toks[2].text != "->" {
                    return Err(perr(&toks[0], "expected `map <vertex> -> <vertex>`".into()));
                }
                let v = vertex_by_name(&decl, &toks[1], file_name)?;
                let w = vertex_by_name(&decl, &toks[3], file_name)?;
                decl.vertex_map[v] = w;
            }
            "image" => {
                if toks.len() < 4 || toks[2].text != "->" {
                    return Err(perr(&toks[0], "expected `image <edge> -> <path>`".into()));
                }
                let id = decl
                    .edge_by_name(&toks[1].text)
                    .ok_or_else(|| perr(&toks[1], format!("unknown edge `{}`", toks[1].text)))?;
                let (path, marks) = decl.parse_path_tokens(&toks[3..], file_name)?;
                decl.images[id] = ImageDecl { path, marks };
                image_seen[id] = true;
            }
            "inp" => {
                if toks.len() < 4 || toks[2].text != "=" {
                    return Err(perr(&toks[0], "expected `inp <name> = <path>`".into()));
                }
                let (path, _) = decl.parse_path_tokens(&toks[3..], file_name)?;
                decl.inps.push(InpDecl {
                    name: toks[1].text.clone(),
                    path,
                });
            }
            "connecting" => {
                if toks.len() < 4 || toks[2].text != "=" {
                    return Err(perr(&toks[0], "expected `connecting <name> = <path>`".into()));
                }
                let (path, _) = decl.parse_path_tokens(&toks[3..], file_name)?;
                decl.conns.push(ConnDecl {
                    name: toks[1].text.clone(),
                    path,
                });
            }
            "exceptional" => {
                // exceptional x = ( e , e2 , <w path> , d , d2 )
                if toks.len() < 6 || toks[2].text != "=" || toks[3].text != "(" {
                    return Err(perr(
                        &toks[0],
                        "expected `exceptional <name> = (e, e', w, d, d')`".into(),
                    ));
                }
                let inner = &toks[4..toks.len() - 1];
                if toks.last().unwrap().text != ")" {
                    return Err(perr(toks.last().unwrap(), "expected closing `)`".into()));
                }
                let fields: Vec<Vec<Tok>> = split_on_commas(inner);
                if fields.len() != 5 {
                    return Err(perr(&toks[0], "expected five fields (e, e', w, d, d')".into()));
                }
                let e_left = edge_field(&decl, &fields[0], file_name)?;
                let e_right = edge_field(&decl, &fields[1], file_name)?;
                let (w, _) = decl.parse_path_tokens(&fields[2], file_name)?;
                let d_left = int_field(&fields[3], file_name)?;
                let d_right = int_field(&fields[4], file_name)?;
                decl.excs.push(ExcDecl {
                    name: toks[1].text.clone(),
                    e_left,
                    e_right,
                    w,
                    d_left,
                    d_right,
                });
            }
            "component_spectrum" => {
                if toks.len() != 4 || toks[2].text != "=" {
                    return Err(perr(
                        &toks[0],
                        "expected `component_spectrum <name> = {(d,λ),..}`".into(),
                    ));
                }
                let entries = parse_spectrum_set(&toks[3].text)
                    .map_err(|e| perr(&toks[3], e.to_string()))?;
                decl.component_spectra
                    .push((toks[1].text.clone(), entries));
            }
            other => {
                return Err(perr(
                    &toks[0],
                    format!("unknown directive `{other}` in ct file"),
                ));
            }
        }
    }

    for (id, seen) in image_seen.iter().enumerate() {
        if !seen {
            return Err(Error::parse(
                file_name,
                1,
                1,
                format!("missing `image` for edge `{}`", decl.edges[id].name),
            ));
        }
    }
    if decl.vertices.is_empty() || decl.edges.is_empty() {
        return Err(Error::parse(file_name, 1, 1, "graph has no vertices or edges"));
    }
    Ok(decl)
}

fn vertex_by_name(decl: &CtMapDecl, t: &Tok, file: &str) -> Result<VertexId> {
    decl.vertices
        .iter()
        .position(|v| v.name == t.text)
        .ok_or_else(|| Error::parse(file, t.line, t.col, format!("unknown vertex `{}`", t.text)))
}

fn split_on_commas(toks: &[Tok]) -> Vec<Vec<Tok>> {
    let mut out = vec![Vec::new()];
    for t in toks {
        if t.text == "," {
            out.push(Vec::new());
        } else {
            out.last_mut().unwrap().push(t.clone());
        }
    }
    out
}

fn edge_field(decl: &CtMapDecl, field: &[Tok], file: &str) -> Result<usize> {
    if field.len() != 1 {
        return Err(Error::parse(file, 1, 1, "expected a single edge name"));
    }
    decl.edge_by_name(&field[0].text).ok_or_else(|| {
        Error::parse(
            file,
            field[0].line,
            field[0].col,
            format!("unknown edge `{}`", field[0].text),
        )
    })
}

fn int_field(field: &[Tok], file: &str) -> Result<i64> {
    if field.len() != 1 {
        return Err(Error::parse(file, 1, 1, "expected an integer"));
    }
    field[0]
        .text
        .parse()
        .map_err(|_| Error::parse(file, field[0].line, field[0].col, "bad integer"))
}

/// Parse `{(d,λ),(d,λ),...}`.
pub fn parse_spectrum_set(text: &str) -> Result<Vec<GrowthType>> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| Error::Invalid(format!("expected {{(d,λ),..}}, got `{text}`")))?;
    let mut out = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let open = rest
            .find('(')
            .ok_or_else(|| Error::Invalid("expected `(`".into()))?;
        let close = rest[open..]
            .find(')')
            .ok_or_else(|| Error::Invalid("unterminated `(`".into()))?
            + open;
        let pair = &rest[open + 1..close];
        let (d_str, l_str) = pair
            .split_once(',')
            .ok_or_else(|| Error::Invalid(format!("bad spectrum entry `({pair})`")))?;
        let d: u32 = d_str
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad degree `{d_str}`")))?;
        let lambda: f64 = l_str
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad lambda `{l_str}`")))?;
        if lambda < 1.0 {
            return Err(Error::Invalid("spectrum λ must be ≥ 1".into()));
        }
        out.push(GrowthType::new(d, lambda));
        rest = rest[close + 1..].trim_start_matches([',', ' ', '\t']);
    }
    Ok(out)
}
