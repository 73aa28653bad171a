//! Paths and circuits in a graph of groups with abelian vertex groups, and
//! the raw tightened-image operator `f♯`.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::abelian::l1_norm;
use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// An oriented edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OEdge {
    pub id: EdgeId,
    pub rev: bool,
}

impl OEdge {
    pub fn fwd(id: EdgeId) -> Self {
        OEdge { id, rev: false }
    }

    pub fn flip(self) -> Self {
        OEdge {
            id: self.id,
            rev: !self.rev,
        }
    }
}

/// A vertex-group element: trivial at plain vertices, an integer vector at
/// fat vertices (a zero vector is trivial but keeps its home factor).
#[derive(Debug, Clone)]
pub enum Elt {
    Trivial,
    Fat(Vec<BigInt>),
}

impl PartialEq for Elt {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Elt::Fat(a), Elt::Fat(b)) => a == b,
            (a, b) => a.is_trivial() && b.is_trivial(),
        }
    }
}

impl Eq for Elt {}

impl Elt {
    pub fn is_trivial(&self) -> bool {
        match self {
            Elt::Trivial => true,
            Elt::Fat(v) => v.iter().all(|c| c.is_zero()),
        }
    }

    pub fn neg(&self) -> Elt {
        match self {
            Elt::Trivial => Elt::Trivial,
            Elt::Fat(v) => Elt::Fat(v.iter().map(|c| -c).collect()),
        }
    }

    /// Sum at a common vertex.
    pub fn add(&self, other: &Elt) -> Result<Elt> {
        match (self, other) {
            (Elt::Trivial, x) | (x, Elt::Trivial) => Ok(x.clone()),
            (Elt::Fat(a), Elt::Fat(b)) => {
                if a.len() != b.len() {
                    return Err(Error::DimensionMismatch(
                        "adding elements of different factors".into(),
                    ));
                }
                Ok(Elt::Fat(a.iter().zip(b).map(|(x, y)| x + y).collect()))
            }
        }
    }

    pub fn length(&self) -> BigUint {
        match self {
            Elt::Trivial => BigUint::zero(),
            Elt::Fat(v) => l1_norm(v),
        }
    }
}

/// The static graph data a path needs: endpoints and fatness.
pub trait GraphShape {
    fn origin(&self, e: OEdge) -> VertexId;
    fn terminus(&self, e: OEdge) -> VertexId;
    /// Factor index (0-based) at a fat vertex.
    fn fat_factor(&self, v: VertexId) -> Option<usize>;
    fn factor_rank(&self, factor: usize) -> usize;

    /// The trivial element at `v`. `Trivial` is the canonical zero at every
    /// vertex (element equality treats a zero vector the same way), which
    /// keeps the hot tightening loops allocation-free.
    fn zero_elt(&self, _v: VertexId) -> Elt {
        Elt::Trivial
    }
}

/// A path `g₀ e₁ g₁ … e_p g_p`; `steps[i]` is `(e_{i+1}, g_{i+1})`. The
/// trivial path (`p = 0`) is just `g₀` at `base`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphPath {
    pub base: VertexId,
    pub g0: Elt,
    pub steps: Vec<(OEdge, Elt)>,
}

impl GraphPath {
    pub fn trivial(shape: &impl GraphShape, v: VertexId) -> Self {
        GraphPath {
            base: v,
            g0: shape.zero_elt(v),
            steps: Vec::new(),
        }
    }

    pub fn endpoint(&self, shape: &impl GraphShape) -> VertexId {
        self.steps
            .last()
            .map(|(e, _)| shape.terminus(*e))
            .unwrap_or(self.base)
    }

    pub fn n_edges(&self) -> usize {
        self.steps.len()
    }

    pub fn is_trivial_path(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn validate(&self, shape: &impl GraphShape) -> Result<()> {
        let mut at = self.base;
        check_elt_home(shape, at, &self.g0)?;
        for (e, g) in &self.steps {
            if shape.origin(*e) != at {
                return Err(Error::Invalid(
                    "path edges are not endpoint-consistent".into(),
                ));
            }
            at = shape.terminus(*e);
            check_elt_home(shape, at, g)?;
        }
        Ok(())
    }

    pub fn invert(&self, shape: &impl GraphShape) -> GraphPath {
        if self.steps.is_empty() {
            return GraphPath {
                base: self.base,
                g0: self.g0.neg(),
                steps: Vec::new(),
            };
        }
        let base = shape.terminus(self.steps.last().unwrap().0);
        let g0 = self.steps.last().unwrap().1.neg();
        let mut steps = Vec::with_capacity(self.steps.len());
        for i in (0..self.steps.len()).rev() {
            let e = self.steps[i].0.flip();
            let prev = if i == 0 {
                self.g0.neg()
            } else {
                self.steps[i - 1].1.neg()
            };
            steps.push((e, prev));
        }
        GraphPath { base, g0, steps }
    }

    /// `p + Σ_{i=1}^{p-1} |g_i|`: edge count plus interior element lengths
    /// (boundary elements excluded, so equivalent paths have equal length).
    pub fn path_length(&self) -> BigUint {
        let mut total = BigUint::from(self.steps.len());
        for (_, g) in self.steps.iter().rev().skip(1) {
            total += g.length();
        }
        total
    }

    /// Elements and edges as one displayable token stream.
    pub fn tokens(&self) -> (Elt, Vec<(OEdge, Elt)>) {
        (self.g0.clone(), self.steps.clone())
    }
}

fn check_elt_home(shape: &impl GraphShape, v: VertexId, g: &Elt) -> Result<()> {
    match (shape.fat_factor(v), g) {
        (None, Elt::Trivial) => Ok(()),
        (None, Elt::Fat(w)) if w.iter().all(|c| c.is_zero()) => Ok(()),
        (None, Elt::Fat(_)) => Err(Error::Invalid(
            "nontrivial group element at a plain vertex".into(),
        )),
        (Some(j), Elt::Fat(w)) if w.len() == shape.factor_rank(j) => Ok(()),
        (Some(_), Elt::Trivial) => Ok(()),
        (Some(j), _) => Err(Error::DimensionMismatch(format!(
            "element does not match rank of factor {j}"
        ))),
    }
}

/// Incremental builder that keeps the path tight while syllables stream in.
pub struct PathBuilder<'a, S: GraphShape> {
    shape: &'a S,
    base: VertexId,
    g0: Elt,
    steps: Vec<(OEdge, Elt)>,
    budget: usize,
}

impl<'a, S: GraphShape> PathBuilder<'a, S> {
    pub fn new(shape: &'a S, base: VertexId, budget: usize) -> Self {
        PathBuilder {
            shape,
            base,
            g0: shape.zero_elt(base),
            steps: Vec::new(),
            budget,
        }
    }

    pub fn push_elt(&mut self, g: &Elt) -> Result<()> {
        if g.is_trivial() {
            return Ok(());
        }
        let slot = match self.steps.last_mut() {
            Some((_, t)) => t,
            None => &mut self.g0,
        };
        *slot = slot.add(g)?;
        Ok(())
    }

    pub fn push_edge(&mut self, e: OEdge) -> Result<()> {
        if let Some((top, g)) = self.steps.last() {
            if g.is_trivial() && *top == e.flip() {
                // degenerate turn: drop ē g e
                self.steps.pop();
                return Ok(());
            }
        }
        self.steps.push((e, self.shape.zero_elt(self.shape.terminus(e))));
        if self.steps.len() > self.budget {
            return Err(Error::LengthBudgetExceeded {
                len: self.steps.len(),
                budget: self.budget,
                context: "tightening a graph path".to_string(),
            });
        }
        Ok(())
    }

    pub fn push_path(&mut self, p: &GraphPath) -> Result<()> {
        self.push_elt(&p.g0)?;
        for (e, g) in &p.steps {
            self.push_edge(*e)?;
            self.push_elt(g)?;
        }
        Ok(())
    }

    pub fn finish(self) -> GraphPath {
        GraphPath {
            base: self.base,
            g0: self.g0,
            steps: self.steps,
        }
    }
}

/// Tighten a raw path (idempotent; homotopic rel endpoints to the input).
pub fn tighten(shape: &impl GraphShape, path: &GraphPath) -> Result<GraphPath> {
    path.validate(shape)?;
    let mut b = PathBuilder::new(shape, path.base, usize::MAX);
    b.push_path(path)?;
    Ok(b.finish())
}

/// A tight circuit `e₁ g₁ … e_p g_p` up to rotation; `g_p` already includes
/// the wrap product. Nontrivial by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub steps: Vec<(OEdge, Elt)>,
}

impl Circuit {
    /// Build from a closed path, merging `g₀` into the trailing element and
    /// tightening cyclically.
    pub fn from_closed_path(shape: &impl GraphShape, path: &GraphPath) -> Result<Circuit> {
        let tightened = tighten(shape, path)?;
        if tightened.endpoint(shape) != tightened.base {
            return Err(Error::Invalid("circuit path is not closed".into()));
        }
        if tightened.steps.is_empty() {
            return Err(Error::Invalid(
                "trivial circuit (represents a vertex-group conjugacy class)".into(),
            ));
        }
        let mut steps = tightened.steps;
        let wrap = steps.last().unwrap().1.add(&tightened.g0)?;
        steps.last_mut().unwrap().1 = wrap;
        let mut c = Circuit { steps };
        c.cyclic_tighten(shape)?;
        Ok(c)
    }

    fn cyclic_tighten(&mut self, shape: &impl GraphShape) -> Result<()> {
        loop {
            if self.steps.len() < 2 {
                // single edge: e g with e = ē impossible, always tight
                return Ok(());
            }
            let last = self.steps.last().unwrap();
            let first = self.steps[0].0;
            if last.1.is_trivial() && first == last.0.flip() {
                // degenerate wrap turn: rotate-cancel e_p ē_p
                let (_, _) = self.steps.pop().unwrap();
                let (_, g1) = self.steps.remove(0);
                if self.steps.is_empty() {
                    return Err(Error::Invalid(
                        "circuit tightens to a vertex element".into(),
                    ));
                }
                let merged = self.steps.last().unwrap().1.add(&g1)?;
                self.steps.last_mut().unwrap().1 = merged;
                continue;
            }
            // also merge a possible abelian wrap with no edge cancellation:
            // nothing to do — elements already sit in single slots.
            let _ = shape;
            return Ok(());
        }
    }

    pub fn n_edges(&self) -> usize {
        self.steps.len()
    }

    /// `p + Σ_{i=1}^{p} |g_i|`.
    pub fn circuit_length(&self) -> BigUint {
        let mut total = BigUint::from(self.steps.len());
        for (_, g) in &self.steps {
            total += g.length();
        }
        total
    }

    /// Canonical rotation (lexicographically smallest), for comparison.
    pub fn canonical(&self) -> Circuit {
        let n = self.steps.len();
        let mut best: Option<Vec<(OEdge, Elt)>> = None;
        for r in 0..n {
            let rotated: Vec<(OEdge, Elt)> =
                (0..n).map(|i| self.steps[(r + i) % n].clone()).collect();
            let better = match &best {
                None => true,
                Some(b) => rotation_key(&rotated) < rotation_key(b),
            };
            if better {
                best = Some(rotated);
            }
        }
        Circuit {
            steps: best.unwrap(),
        }
    }

    pub fn eq_up_to_rotation(&self, other: &Circuit) -> bool {
        self.steps.len() == other.steps.len() && self.canonical() == other.canonical()
    }

    /// View as a based path starting at the origin of `steps[0]`.
    pub fn as_based_path(&self, shape: &impl GraphShape) -> GraphPath {
        let base = shape.origin(self.steps[0].0);
        GraphPath {
            base,
            g0: shape.zero_elt(base),
            steps: self.steps.clone(),
        }
    }
}

fn rotation_key(steps: &[(OEdge, Elt)]) -> Vec<String> {
    steps
        .iter()
        .map(|(e, g)| {
            let gs = match g {
                _ if g.is_trivial() => String::new(),
                Elt::Fat(v) => v
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                Elt::Trivial => String::new(),
            };
            format!("{}:{}:{gs}", e.id, e.rev)
        })
        .collect()
}
