//! Complete-splitting machinery: split paths over the declared term
//! vocabulary (edges, INPs, exceptional paths, connecting paths), the
//! term-level image operator, greedy matching of raw paths against the
//! vocabulary, and the no-cancellation verification of declared splittings.

use num_bigint::BigInt;

use crate::abelian::IntMatrix;
use crate::error::{Error, Result};

use super::decl::CtMapDecl;
use super::graph::{
    tighten, Circuit, Elt, GraphPath, GraphShape, OEdge, PathBuilder, VertexId,
};

pub const K_CHECK: usize = 6;
pub const K_SPLIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitId {
    Edge(usize),
    Inp(usize),
    Exc(usize),
    Conn(usize),
}

/// A term of a complete splitting: a unit with an orientation and, for
/// exceptional paths, the twist exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnitRef {
    pub id: UnitId,
    pub rev: bool,
    pub exp: i64,
}

impl UnitRef {
    pub fn edge(e: OEdge) -> Self {
        UnitRef {
            id: UnitId::Edge(e.id),
            rev: e.rev,
            exp: 0,
        }
    }

    pub fn flip(self) -> Self {
        UnitRef {
            id: self.id,
            rev: !self.rev,
            exp: self.exp,
        }
    }

    /// The state key for turn evolution: exceptional exponents are dropped
    /// (the boundary of the image does not depend on them).
    pub fn state_key(self) -> (UnitId, bool) {
        (self.id, self.rev)
    }
}

/// A path presented as terms separated by junction elements:
/// `g0 · T₁ · sep₁ · T₂ · … · T_m · g_end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPath {
    pub base: VertexId,
    pub g0: Elt,
    pub terms: Vec<UnitRef>,
    pub seps: Vec<Elt>,
    pub g_end: Elt,
}

/// A circuit split into terms; `seps[i]` follows `terms[i]`, the last one
/// being the wrap junction back to `terms[0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitCircuit {
    pub terms: Vec<UnitRef>,
    pub seps: Vec<Elt>,
}

#[derive(Debug, Clone)]
pub struct InpData {
    pub name: String,
    /// Boundary-normalized path.
    pub path: GraphPath,
    /// `f♯(σ) = left · σ · right`.
    pub left: Elt,
    pub right: Elt,
}

#[derive(Debug, Clone)]
pub struct ExcData {
    pub name: String,
    pub e_left: usize,
    pub e_right: usize,
    /// The twist loop as a boundary-normalized based path at `t(e_left)`.
    pub w: GraphPath,
    pub d_left: i64,
    pub d_right: i64,
    /// Leading elements of the two linear-edge images:
    /// `f(e_left) = h_left · e_left · w^{d_left}` etc.
    pub h_left: Elt,
    pub h_right: Elt,
}

impl ExcData {
    pub fn drift(&self) -> i64 {
        self.d_left - self.d_right
    }
}

#[derive(Debug, Clone)]
pub struct ConnData {
    pub name: String,
    pub path: GraphPath,
    pub image: SplitPath,
}

/// Stratum classification.
#[derive(Debug, Clone, PartialEq)]
pub enum StratumClass {
    Eg {
        lambda: f64,
        charpoly: Vec<BigInt>,
    },
    Neg {
        linear: bool,
        /// `f(e) = g e g'` with no other edges: the edge is an INP.
        fixed: bool,
    },
    Zero,
}

#[derive(Debug, Clone)]
pub struct Stratum {
    pub height: usize,
    pub edges: Vec<usize>,
    pub class: StratumClass,
}

/// A validated declaration with everything precomputed: raw edge images,
/// declared splittings resolved to unit terms, INP boundary corrections,
/// exceptional template data, connecting-path image splittings and the
/// stratum classification. `power` records which power of the declared map
/// this machine represents.
#[derive(Debug, Clone)]
pub struct Machine {
    pub decl: CtMapDecl,
    pub raw_images: Vec<GraphPath>,
    /// Declared-orientation splittings for EG/NEG edges; `None` for zero
    /// edges (they only occur inside connecting paths).
    pub edge_splits: Vec<Option<SplitPath>>,
    pub inps: Vec<InpData>,
    pub excs: Vec<ExcData>,
    pub conns: Vec<ConnData>,
    pub strata: Vec<Stratum>,
    pub stratum_of_edge: Vec<usize>,
    pub power: usize,
}

impl GraphShape for Machine {
    fn origin(&self, e: OEdge) -> VertexId {
        self.decl.origin(e)
    }
    fn terminus(&self, e: OEdge) -> VertexId {
        self.decl.terminus(e)
    }
    fn fat_factor(&self, v: VertexId) -> Option<usize> {
        self.decl.fat_factor(v)
    }
    fn factor_rank(&self, factor: usize) -> usize {
        self.decl.factor_rank(factor)
    }
}

impl Machine {
    pub fn factor_matrix(&self, j: usize) -> &IntMatrix {
        &self.decl.factors[j].matrix
    }

    /// Image of a vertex-group element under the map (the abelian
    /// conjugators are absorbed): matrix action at fat vertices.
    pub fn map_elt(&self, v: VertexId, g: &Elt) -> Result<Elt> {
        match g {
            Elt::Trivial => Ok(Elt::Trivial),
            Elt::Fat(vec) => {
                let Some(j) = self.fat_factor(v) else {
                    return if g.is_trivial() {
                        Ok(Elt::Trivial)
                    } else {
                        Err(Error::Invalid("fat element at plain vertex".into()))
                    };
                };
                Ok(Elt::Fat(self.factor_matrix(j).mul_vec(vec)?))
            }
        }
    }

    pub fn image_of_edge(&self, e: OEdge) -> GraphPath {
        if e.rev {
            self.raw_images[e.id].invert(self)
        } else {
            self.raw_images[e.id].clone()
        }
    }

    /// Raw tightened image `f♯(path)`.
    pub fn f_sharp_path(&self, p: &GraphPath, budget: usize) -> Result<GraphPath> {
        let base = self.decl.vertex_map[p.base];
        let mut b = PathBuilder::new(self, base, budget);
        b.push_elt(&self.map_elt(p.base, &p.g0)?)?;
        for (e, g) in &p.steps {
            b.push_path(&self.image_of_edge(*e))?;
            let at = self.terminus(*e);
            b.push_elt(&self.map_elt(at, g)?)?;
        }
        Ok(b.finish())
    }

    /// Raw tightened image of a circuit (with cyclic tightening).
    pub fn f_sharp_circuit(&self, c: &Circuit, budget: usize) -> Result<Circuit> {
        let img = self.f_sharp_path(&c.as_based_path(self), budget)?;
        Circuit::from_closed_path(self, &img)
    }

    pub fn f_sharp_path_iter(&self, p: &GraphPath, n: usize, budget: usize) -> Result<GraphPath> {
        let mut cur = p.clone();
        for _ in 0..n {
            cur = self.f_sharp_path(&cur, budget)?;
        }
        Ok(cur)
    }

    // -- units ----------------------------------------------------------

    pub fn unit_name(&self, u: &UnitRef) -> String {
        let base = match u.id {
            UnitId::Edge(e) => self.decl.edge_name(OEdge { id: e, rev: u.rev }),
            UnitId::Inp(i) => {
                let n = &self.inps[i].name;
                if u.rev {
                    format!("~{n}")
                } else {
                    n.clone()
                }
            }
            UnitId::Exc(i) => {
                let n = &self.excs[i].name;
                let s = format!("{n}^[{}]", u.exp);
                if u.rev {
                    format!("~{s}")
                } else {
                    s
                }
            }
            UnitId::Conn(i) => {
                let n = &self.conns[i].name;
                if u.rev {
                    format!("~{n}")
                } else {
                    n.clone()
                }
            }
        };
        base
    }

    /// Boundary-normalized underlying path of a term.
    pub fn unit_to_path(&self, u: &UnitRef) -> GraphPath {
        let fwd = match u.id {
            UnitId::Edge(id) => {
                let e = OEdge { id, rev: false };
                let mut p = GraphPath::trivial(self, self.origin(e));
                p.steps.push((e, self.zero_elt(self.terminus(e))));
                p
            }
            UnitId::Inp(i) => self.inps[i].path.clone(),
            UnitId::Conn(i) => self.conns[i].path.clone(),
            UnitId::Exc(i) => self.exc_template_path(i, u.exp),
        };
        if u.rev {
            fwd.invert(self)
        } else {
            fwd
        }
    }

    /// The exceptional template `e_left · w^exp · ē_right` as a path.
    pub fn exc_template_path(&self, i: usize, exp: i64) -> GraphPath {
        let exc = &self.excs[i];
        let e = OEdge::fwd(exc.e_left);
        let mut b = PathBuilder::new(self, self.origin(e), usize::MAX);
        b.push_edge(e).expect("budget is unlimited");
        let w = if exp >= 0 {
            exc.w.clone()
        } else {
            exc.w.invert(self)
        };
        for _ in 0..exp.unsigned_abs() {
            b.push_path(&w).expect("budget is unlimited");
        }
        let closing = OEdge {
            id: exc.e_right,
            rev: true,
        };
        b.push_edge(closing).expect("budget is unlimited");
        b.finish()
    }

    pub fn unit_origin(&self, u: &UnitRef) -> VertexId {
        self.unit_to_path(u).base
    }

    pub fn unit_endpoint(&self, u: &UnitRef) -> VertexId {
        let p = self.unit_to_path(u);
        p.endpoint(self)
    }

    /// Image splitting of a term, with boundary elements.
    pub fn unit_image(&self, u: &UnitRef) -> SplitPath {
        match u.id {
            UnitId::Edge(id) => {
                let s = self.edge_splits[id]
                    .as_ref()
                    .expect("zero-stratum edge used as a splitting term");
                if u.rev {
                    self.split_reverse(s)
                } else {
                    s.clone()
                }
            }
            UnitId::Inp(i) => {
                let d = &self.inps[i];
                let (g0, g_end) = if u.rev {
                    (d.right.neg(), d.left.neg())
                } else {
                    (d.left.clone(), d.right.clone())
                };
                SplitPath {
                    base: self.unit_origin(u),
                    g0,
                    terms: vec![*u],
                    seps: Vec::new(),
                    g_end,
                }
            }
            UnitId::Exc(i) => {
                let d = &self.excs[i];
                let new_exp = u.exp + d.drift();
                let (g0, g_end) = if u.rev {
                    (d.h_right.clone(), d.h_left.neg())
                } else {
                    (d.h_left.clone(), d.h_right.neg())
                };
                SplitPath {
                    base: self.unit_origin(u),
                    g0,
                    terms: vec![UnitRef {
                        id: u.id,
                        rev: u.rev,
                        exp: new_exp,
                    }],
                    seps: Vec::new(),
                    g_end,
                }
            }
            UnitId::Conn(i) => {
                let s = self.conns[i].image.clone();
                if u.rev {
                    self.split_reverse(&s)
                } else {
                    s
                }
            }
        }
    }

    pub fn split_reverse(&self, s: &SplitPath) -> SplitPath {
        let terms: Vec<UnitRef> = s.terms.iter().rev().map(|t| t.flip()).collect();
        let seps: Vec<Elt> = s.seps.iter().rev().map(|g| g.neg()).collect();
        let base = self.split_endpoint(s);
        SplitPath {
            base,
            g0: s.g_end.neg(),
            terms,
            seps,
            g_end: s.g0.neg(),
        }
    }

    pub fn split_endpoint(&self, s: &SplitPath) -> VertexId {
        s.terms
            .last()
            .map(|t| self.unit_endpoint(t))
            .unwrap_or(s.base)
    }

    /// Vertices at the junctions (after each of the first `m-1` terms).
    pub fn split_junction_vertices(&self, s: &SplitPath) -> Vec<VertexId> {
        s.terms
            .iter()
            .take(s.terms.len().saturating_sub(1))
            .map(|t| self.unit_endpoint(t))
            .collect()
    }

    /// Term-level `f♯` on a split path: no tightening is needed because
    /// complete splittings never cancel.
    pub fn term_f_sharp(&self, s: &SplitPath) -> Result<SplitPath> {
        let images: Vec<SplitPath> = s.terms.iter().map(|t| self.unit_image(t)).collect();
        let base = self.decl.vertex_map[s.base];
        let mut terms = Vec::new();
        let mut seps = Vec::new();
        let mut g0 = self.map_elt(s.base, &s.g0)?;
        let mut pending: Option<Elt> = None; // junction being assembled
        for (i, img) in images.iter().enumerate() {
            let lead = match pending.take() {
                Some(p) => p.add(&img.g0)?,
                None => {
                    g0 = g0.add(&img.g0)?;
                    Elt::Trivial
                }
            };
            if i > 0 {
                seps.push(lead);
            }
            for (k, t) in img.terms.iter().enumerate() {
                terms.push(*t);
                if k < img.seps.len() {
                    seps.push(img.seps[k].clone());
                }
            }
            let mut trail = img.g_end.clone();
            if i < s.seps.len() {
                let v = self.unit_endpoint(s.terms.get(i).unwrap());
                trail = trail.add(&self.map_elt(v, &s.seps[i])?)?;
            }
            pending = Some(trail);
        }
        let v_end = self.split_endpoint(s);
        let g_end = pending
            .unwrap_or(Elt::Trivial)
            .add(&self.map_elt(v_end, &s.g_end)?)?;
        Ok(SplitPath {
            base,
            g0,
            terms,
            seps,
            g_end,
        })
    }

    pub fn term_f_sharp_circuit(&self, c: &SplitCircuit) -> Result<SplitCircuit> {
        // treat as a path with the wrap separator as g_end, then reattach
        let as_path = SplitPath {
            base: self.unit_origin(&c.terms[0]),
            g0: Elt::Trivial,
            terms: c.terms.clone(),
            seps: c.seps[..c.seps.len() - 1].to_vec(),
            g_end: c.seps.last().unwrap().clone(),
        };
        let img = self.term_f_sharp(&as_path)?;
        let mut seps = img.seps;
        let wrap = img.g_end.add(&img.g0)?;
        seps.push(wrap);
        Ok(SplitCircuit {
            terms: img.terms,
            seps,
        })
    }

    /// Materialize a split path (no tightening: splittings are tight).
    pub fn split_to_path(&self, s: &SplitPath) -> Result<GraphPath> {
        let mut out = GraphPath {
            base: s.base,
            g0: s.g0.clone(),
            steps: Vec::new(),
        };
        for (i, t) in s.terms.iter().enumerate() {
            let p = self.unit_to_path(t);
            // p has trivial boundary elements
            for (e, g) in &p.steps {
                out.steps.push((*e, g.clone()));
            }
            let trail = if i < s.seps.len() {
                s.seps[i].clone()
            } else {
                s.g_end.clone()
            };
            if let Some((_, last)) = out.steps.last_mut() {
                *last = last.add(&trail)?;
            } else {
                out.g0 = out.g0.add(&trail)?;
            }
        }
        Ok(out)
    }

    pub fn split_circuit_to_circuit(&self, c: &SplitCircuit) -> Result<Circuit> {
        let as_path = SplitPath {
            base: self.unit_origin(&c.terms[0]),
            g0: Elt::Trivial,
            terms: c.terms.clone(),
            seps: c.seps[..c.seps.len() - 1].to_vec(),
            g_end: c.seps.last().unwrap().clone(),
        };
        let p = self.split_to_path(&as_path)?;
        Circuit::from_closed_path(self, &p)
    }

    // -- matching --------------------------------------------------------

    fn edge_is_term(&self, id: usize) -> bool {
        !matches!(
            self.strata[self.stratum_of_edge[id]].class,
            StratumClass::Zero
        )
    }

    /// All (term, consumed-edge-count) candidates matching at `pos`.
    fn candidates_at(&self, steps: &[(OEdge, Elt)], pos: usize) -> Vec<(UnitRef, usize)> {
        let mut out = Vec::new();
        let remaining = steps.len() - pos;

        // exceptional templates, largest first
        for (i, exc) in self.excs.iter().enumerate() {
            let wl = exc.w.n_edges() as i64;
            let max_exp = if wl > 0 {
                (remaining as i64) / wl + 1
            } else {
                0
            };
            let mut exps: Vec<i64> = (-max_exp..=max_exp).collect();
            exps.sort_by_key(|e| -(e.abs()));
            for exp in exps {
                for rev in [false, true] {
                    let u = UnitRef {
                        id: UnitId::Exc(i),
                        rev,
                        exp,
                    };
                    let pat = self.unit_to_path(&u);
                    if pat.n_edges() <= remaining && segment_matches(steps, pos, &pat) {
                        out.push((u, pat.n_edges()));
                    }
                }
            }
        }
        // INPs and connecting paths
        for (i, inp) in self.inps.iter().enumerate() {
            for rev in [false, true] {
                let u = UnitRef {
                    id: UnitId::Inp(i),
                    rev,
                    exp: 0,
                };
                let pat = self.unit_to_path(&u);
                let _ = &inp.name;
                if pat.n_edges() <= remaining && segment_matches(steps, pos, &pat) {
                    out.push((u, pat.n_edges()));
                }
            }
        }
        for (i, _) in self.conns.iter().enumerate() {
            for rev in [false, true] {
                let u = UnitRef {
                    id: UnitId::Conn(i),
                    rev,
                    exp: 0,
                };
                let pat = self.unit_to_path(&u);
                if pat.n_edges() <= remaining && segment_matches(steps, pos, &pat) {
                    out.push((u, pat.n_edges()));
                }
            }
        }
        // a bare EG/NEG edge
        let e = steps[pos].0;
        if self.edge_is_term(e.id) {
            out.push((UnitRef::edge(e), 1));
        }
        // longest candidates first; stable for determinism
        out.sort_by_key(|(_, len)| std::cmp::Reverse(*len));
        out
    }

    pub fn candidates_at_pub(
        &self,
        steps: &[(OEdge, Elt)],
        pos: usize,
    ) -> Vec<(UnitRef, usize)> {
        self.candidates_at(steps, pos)
    }

    /// Exact cover of a path's steps by terms. `g0`/`g_end` of the path
    /// become the outer boundary of the splitting.
    pub fn match_path(&self, path: &GraphPath) -> Option<SplitPath> {
        let steps = &path.steps;
        if steps.is_empty() {
            return None;
        }
        let mut terms = Vec::new();
        let mut seps = Vec::new();
        if !self.dfs_cover(steps, 0, &mut terms, &mut seps) {
            return None;
        }
        let g_end = seps.pop().expect("cover of a nonempty path has a term");
        Some(SplitPath {
            base: path.base,
            g0: path.g0.clone(),
            terms,
            seps,
            g_end,
        })
    }

    fn dfs_cover(
        &self,
        steps: &[(OEdge, Elt)],
        pos: usize,
        terms: &mut Vec<UnitRef>,
        seps: &mut Vec<Elt>,
    ) -> bool {
        if pos == steps.len() {
            return true;
        }
        for (u, len) in self.candidates_at(steps, pos) {
            terms.push(u);
            seps.push(steps[pos + len - 1].1.clone());
            if self.dfs_cover(steps, pos + len, terms, seps) {
                return true;
            }
            terms.pop();
            seps.pop();
        }
        false
    }

    /// Match a circuit against the vocabulary, trying all rotations, and
    /// verify the no-cancellation property of the candidate splitting.
    pub fn match_circuit(&self, c: &Circuit) -> Option<SplitCircuit> {
        let n = c.steps.len();
        for r in 0..n {
            let rotated: Vec<(OEdge, Elt)> =
                (0..n).map(|i| c.steps[(r + i) % n].clone()).collect();
            let mut terms = Vec::new();
            let mut seps = Vec::new();
            if self.dfs_cover(&rotated, 0, &mut terms, &mut seps) {
                let cand = SplitCircuit { terms, seps };
                if self.verify_split_circuit(&cand, K_CHECK).unwrap_or(false) {
                    return Some(cand);
                }
            }
        }
        None
    }

    // -- verification -----------------------------------------------------

    /// Split a path into per-term paths, separators attached to the left.
    fn parts_of_split(&self, s: &SplitPath) -> Result<Vec<GraphPath>> {
        let mut parts = Vec::new();
        for (i, t) in s.terms.iter().enumerate() {
            let mut p = self.unit_to_path(t);
            if i == 0 {
                p.g0 = p.g0.add(&s.g0)?;
            }
            let trail = if i < s.seps.len() {
                s.seps[i].clone()
            } else {
                s.g_end.clone()
            };
            if let Some((_, last)) = p.steps.last_mut() {
                *last = last.add(&trail)?;
            }
            parts.push(p);
        }
        Ok(parts)
    }

    /// The splitting property: applying `f♯` term by term must never cancel
    /// across a junction. Checked for all powers up to `k_check`.
    pub fn verify_split_parts(
        &self,
        parts: &[GraphPath],
        cyclic: bool,
        k_check: usize,
    ) -> Result<bool> {
        let mut imgs: Vec<GraphPath> = parts.to_vec();
        for _ in 1..=k_check {
            for img in imgs.iter_mut() {
                *img = self.f_sharp_path(img, usize::MAX)?;
            }
            let m = imgs.len();
            let pairs = if cyclic { m } else { m.saturating_sub(1) };
            for i in 0..pairs {
                let left = &imgs[i];
                let right = &imgs[(i + 1) % m];
                if left.steps.is_empty() || right.steps.is_empty() {
                    return Ok(false);
                }
                let junction = left.steps.last().unwrap().1.add(&right.g0)?;
                let le = left.steps.last().unwrap().0;
                let rf = right.steps[0].0;
                if junction.is_trivial() && rf == le.flip() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn verify_split_path(&self, s: &SplitPath, k_check: usize) -> Result<bool> {
        let parts = self.parts_of_split(s)?;
        self.verify_split_parts(&parts, false, k_check)
    }

    pub fn verify_split_circuit(&self, c: &SplitCircuit, k_check: usize) -> Result<bool> {
        let as_path = SplitPath {
            base: self.unit_origin(&c.terms[0]),
            g0: Elt::Trivial,
            terms: c.terms.clone(),
            seps: c.seps[..c.seps.len() - 1].to_vec(),
            g_end: c.seps.last().unwrap().clone(),
        };
        let parts = self.parts_of_split(&as_path)?;
        self.verify_split_parts(&parts, true, k_check)
    }

    /// Tightened-image consistency between the two layers, used as an
    /// internal assertion in tests: `f♯(materialize(s)) =
    /// materialize(term_f♯(s))`.
    pub fn check_layers_agree(&self, s: &SplitPath) -> Result<bool> {
        let raw = self.f_sharp_path(&self.split_to_path(s)?, usize::MAX)?;
        let term = self.split_to_path(&self.term_f_sharp(s)?)?;
        Ok(tighten(self, &term)? == raw)
    }
}

/// Does `pat` (boundary-normalized) match `steps[pos..pos+len)` with exactly
/// equal interior elements?
fn segment_matches(steps: &[(OEdge, Elt)], pos: usize, pat: &GraphPath) -> bool {
    let len = pat.n_edges();
    if len == 0 || pos + len > steps.len() {
        return false;
    }
    for k in 0..len {
        if steps[pos + k].0 != pat.steps[k].0 {
            return false;
        }
        if k + 1 < len && steps[pos + k].1 != pat.steps[k].1 {
            return false;
        }
    }
    true
}
