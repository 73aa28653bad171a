//! Graph-of-groups self-maps with declared complete splittings: tightened
//! images, stratum classification, and the bottom-up growth-type table.
//!
//! A declaration supplies the graph (with fat vertices carrying free-abelian
//! factors), an ordered filtration into strata, the edge images with their
//! splittings marked, and the term vocabulary (INPs, exceptional paths,
//! connecting paths). The machine validates all of it — strata types,
//! splitting no-cancellation, INP invariance, exceptional drift — and then
//! assigns a growth type to every term and to arbitrary circuits, which the
//! brute-force length oracle can confirm empirically.

mod analysis;
mod decl;
mod graph;
mod units;

pub use decl::{parse_spectrum_set, CtMapDecl};
pub use graph::{tighten, Circuit, Elt, GraphPath, GraphShape, OEdge};
pub use units::{Machine, SplitCircuit, SplitPath, StratumClass, UnitId, UnitRef};

pub use analysis::vertex_stabilization_power;

use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::growth::{polexp_sum, GrowthType};
use crate::words::{GroupSpec, NormalWord, Syllable};

pub use crate::growth::polexp_sum as sum_growth;
use crate::parse;

/// A validated completely split self-map, with the base (power-1) machine.
#[derive(Debug, Clone)]
pub struct CtMap {
    machine: Machine,
}

/// One line of the stratum report.
#[derive(Debug, Clone)]
pub struct StratumReport {
    pub height: usize,
    pub edges: Vec<String>,
    pub class: StratumClass,
}

/// The assignment of growth types to every declared term, converted back to
/// the base map when a stabilization power was needed.
#[derive(Debug, Clone)]
pub struct TermGrowthTable {
    /// Vertex stabilization power used for the analysis.
    pub power: usize,
    pub strata: Vec<StratumReport>,
    pub edges: Vec<(String, GrowthType)>,
    pub inps: Vec<(String, GrowthType)>,
    pub excs: Vec<(String, GrowthType)>,
    pub conns: Vec<(String, GrowthType)>,
    pub fat_turns: Vec<(String, GrowthType)>,
}

/// Machine powered to the stabilization power plus its term assignment;
/// circuit queries run against this.
pub struct CtAnalysis {
    base: Machine,
    powered: Machine,
    power: usize,
    assignment: analysis::Assignment,
    pub table: TermGrowthTable,
}

impl CtMap {
    pub fn parse(file_name: &str, text: &str) -> Result<CtMap> {
        let decl = decl::parse_ct(file_name, text)?;
        CtMap::from_decl(decl)
    }

    pub fn from_decl(d: CtMapDecl) -> Result<CtMap> {
        let mut machine = analysis::build_machine(d, 1)?;
        analysis::refine_linear_flags(&mut machine)?;
        Ok(CtMap { machine })
    }

    pub fn decl(&self) -> &CtMapDecl {
        &self.machine.decl
    }

    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    /// Per-stratum classification of the declared map.
    pub fn classify_strata(&self) -> Vec<StratumReport> {
        stratum_reports(&self.machine)
    }

    /// Least power of the map under which every vertex lands on a fixed
    /// vertex.
    pub fn vertex_stabilization_power(&self) -> usize {
        analysis::vertex_stabilization_power(&self.machine.decl.vertex_map)
    }

    /// Growth of a fat turn between two named terms (edge, INP `name`,
    /// connecting `name`, or exceptional `name^[p]`; `~` reverses).
    pub fn fat_turn_growth(&self, left: &str, g: &str, right: &str) -> Result<GrowthType> {
        let lu = self.resolve_unit(left)?;
        let ru = self.resolve_unit(right)?;
        let v = self.machine.unit_endpoint(&lu);
        let elt = self.parse_elt_at(v, g)?;
        analysis::fat_turn_growth(&self.machine, &lu, &elt, &ru)
    }

    /// Run the full analysis: stabilize, assign growth types, convert back.
    pub fn analyze(&self) -> Result<CtAnalysis> {
        let p = self.vertex_stabilization_power();
        let powered = if p == 1 {
            self.machine.clone()
        } else {
            let decl = analysis::power_decl(&self.machine, p)?;
            let mut m = analysis::build_machine(decl, p)?;
            analysis::refine_linear_flags(&mut m)?;
            m
        };
        let assignment = analysis::assign_growth_types(&powered)?;
        let table = build_table(&self.machine, &powered, &assignment, p);
        Ok(CtAnalysis {
            base: self.machine.clone(),
            powered,
            power: p,
            assignment,
            table,
        })
    }

    // -- path plumbing ----------------------------------------------------

    pub fn parse_path(&self, text: &str) -> Result<GraphPath> {
        let p = self.machine.decl.parse_path(text)?;
        p.validate(&self.machine)?;
        tighten(&self.machine, &p)
    }

    pub fn parse_circuit(&self, text: &str) -> Result<Circuit> {
        let p = self.machine.decl.parse_path(text)?;
        Circuit::from_closed_path(&self.machine, &p)
    }

    pub fn f_sharp(&self, p: &GraphPath, budget: usize) -> Result<GraphPath> {
        self.machine.f_sharp_path(p, budget)
    }

    pub fn f_sharp_circuit(&self, c: &Circuit, budget: usize) -> Result<Circuit> {
        self.machine.f_sharp_circuit(c, budget)
    }

    /// Lengths of `f♯ⁿ(circuit)` for `n = 0..=n_max`.
    pub fn circuit_oracle(
        &self,
        c: &Circuit,
        n_max: usize,
        budget: usize,
    ) -> Result<Vec<BigUint>> {
        let mut out = Vec::with_capacity(n_max + 1);
        let mut cur = c.clone();
        for n in 0..=n_max {
            out.push(cur.circuit_length());
            if n < n_max {
                cur = self.machine.f_sharp_circuit(&cur, budget)?;
            }
        }
        Ok(out)
    }

    /// Transcribe a circuit to the conjugacy class it represents in the
    /// fundamental group `G_1 * … * G_q * F_N` (free letters are the
    /// non-tree edges of a breadth-first spanning tree, in declaration
    /// order).
    pub fn fundamental_group_spec(&self) -> (GroupSpec, Vec<usize>) {
        let d = &self.machine.decl;
        let n_v = d.vertices.len();
        let mut in_tree = vec![false; d.edges.len()];
        let mut visited = vec![false; n_v];
        visited[0] = true;
        let mut frontier = vec![0usize];
        while let Some(v) = frontier.pop() {
            for (id, e) in d.edges.iter().enumerate() {
                if in_tree[id] {
                    continue;
                }
                if e.from == v && !visited[e.to] {
                    visited[e.to] = true;
                    in_tree[id] = true;
                    frontier.push(e.to);
                } else if e.to == v && !visited[e.from] {
                    visited[e.from] = true;
                    in_tree[id] = true;
                    frontier.push(e.from);
                }
            }
        }
        let non_tree: Vec<usize> = (0..d.edges.len()).filter(|&id| !in_tree[id]).collect();
        let spec = GroupSpec {
            abelian_ranks: d.factors.iter().map(|f| f.rank).collect(),
            free_rank: non_tree.len(),
        };
        (spec, non_tree)
    }

    pub fn circuit_to_word(&self, c: &Circuit) -> Result<(GroupSpec, NormalWord)> {
        let (spec, non_tree) = self.fundamental_group_spec();
        let d = &self.machine.decl;
        let mut raw: Vec<Syllable> = Vec::new();
        for (e, g) in &c.steps {
            if let Some(idx) = non_tree.iter().position(|&id| id == e.id) {
                raw.push(Syllable::free(idx + 1, if e.rev { -1 } else { 1 }));
            }
            if let Elt::Fat(vec) = g {
                if !g.is_trivial() {
                    let v = self.machine.terminus(*e);
                    let j = d.vertices[v].fat.expect("fat element at fat vertex");
                    raw.push(Syllable::abelian(j + 1, vec.clone()));
                }
            }
        }
        let w = NormalWord::normalize(&raw, &spec)?;
        Ok((spec, w))
    }

    fn resolve_unit(&self, name: &str) -> Result<UnitRef> {
        let (body, rev) = match name.strip_prefix('~') {
            Some(b) => (b, true),
            None => (name, false),
        };
        let m = &self.machine;
        // exceptional with exponent: name^[p]
        if let Some((base, exp_s)) = body.split_once("^[") {
            let exp: i64 = exp_s
                .strip_suffix(']')
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Invalid(format!("bad exponent in `{name}`")))?;
            if let Some(i) = m.excs.iter().position(|x| x.name == base) {
                return Ok(UnitRef {
                    id: UnitId::Exc(i),
                    rev,
                    exp,
                });
            }
        }
        if let Some(i) = m.inps.iter().position(|x| x.name == body) {
            return Ok(UnitRef {
                id: UnitId::Inp(i),
                rev,
                exp: 0,
            });
        }
        if let Some(i) = m.conns.iter().position(|x| x.name == body) {
            return Ok(UnitRef {
                id: UnitId::Conn(i),
                rev,
                exp: 0,
            });
        }
        if let Some(id) = m.decl.edge_by_name(body) {
            return Ok(UnitRef {
                id: UnitId::Edge(id),
                rev,
                exp: 0,
            });
        }
        if body.len() == 1 && body.chars().next().unwrap().is_ascii_uppercase() {
            if let Some(id) = m.decl.edge_by_name(&body.to_lowercase()) {
                return Ok(UnitRef {
                    id: UnitId::Edge(id),
                    rev: !rev,
                    exp: 0,
                });
            }
        }
        Err(Error::Invalid(format!("unknown term `{name}`")))
    }

    fn parse_elt_at(&self, v: usize, g: &str) -> Result<Elt> {
        let t = g.trim();
        if t == "1" || t.is_empty() {
            return Ok(self.machine.zero_elt(v));
        }
        let Some(j) = self.machine.fat_factor(v) else {
            return Err(Error::Invalid("element given at a plain vertex".into()));
        };
        let vec = if let Some(br) = t.find('[') {
            parse::parse_int_vector(&t[br..])?
        } else {
            parse::parse_int_vector(t)?
        };
        if vec.len() != self.machine.factor_rank(j) {
            return Err(Error::DimensionMismatch("turn element rank".into()));
        }
        Ok(Elt::Fat(vec))
    }
}

impl CtAnalysis {
    pub fn power(&self) -> usize {
        self.power
    }

    /// Predicted growth type of a circuit under the base map.
    pub fn circuit_growth(&self, circuit: &Circuit) -> Result<GrowthType> {
        let (g, _) = analysis::circuit_growth(&self.powered, &self.assignment, circuit, None)?;
        Ok(g.root(self.power as u32))
    }

    /// Growth of an edge's term in the base map.
    pub fn edge_growth(&self, name: &str) -> Option<GrowthType> {
        self.table
            .edges
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, g)| g.clone())
    }

    pub fn base(&self) -> &Machine {
        &self.base
    }
}

fn stratum_reports(m: &Machine) -> Vec<StratumReport> {
    m.strata
        .iter()
        .map(|s| StratumReport {
            height: s.height,
            edges: s.edges.iter().map(|&e| m.decl.edges[e].name.clone()).collect(),
            class: s.class.clone(),
        })
        .collect()
}

fn build_table(
    base: &Machine,
    powered: &Machine,
    asg: &analysis::Assignment,
    power: usize,
) -> TermGrowthTable {
    let p = power as u32;
    let edges = powered
        .decl
        .edges
        .iter()
        .enumerate()
        .filter_map(|(id, e)| {
            asg.edge_types[id]
                .as_ref()
                .map(|g| (e.name.clone(), g.root(p)))
        })
        .collect();
    let inps = powered
        .inps
        .iter()
        .map(|i| (i.name.clone(), GrowthType::bounded()))
        .collect();
    let excs = powered
        .excs
        .iter()
        .map(|x| (x.name.clone(), GrowthType::new(1, 1.0)))
        .collect();
    let conns = powered
        .conns
        .iter()
        .enumerate()
        .map(|(i, c)| (c.name.clone(), asg.conn_types[i].root(p)))
        .collect();
    let mut fat_turns: Vec<(String, GrowthType)> = asg
        .fat_turns
        .iter()
        .map(|(s, g)| (s.clone(), g.root(p)))
        .collect();
    fat_turns.sort_by(|a, b| a.0.cmp(&b.0));
    fat_turns.dedup_by(|a, b| a.0 == b.0);
    TermGrowthTable {
        power,
        strata: stratum_reports(base),
        edges,
        inps,
        excs,
        conns,
        fat_turns,
    }
}

impl fmt::Display for StratumClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StratumClass::Eg { lambda, .. } => write!(f, "EG(λ = {lambda:.10})"),
            StratumClass::Neg { linear, fixed } => {
                if *fixed {
                    write!(f, "NEG (fixed edge, an INP)")
                } else if *linear {
                    write!(f, "NEG (linear)")
                } else {
                    write!(f, "NEG")
                }
            }
            StratumClass::Zero => write!(f, "zero"),
        }
    }
}

impl fmt::Display for TermGrowthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "stabilization power: {}", self.power)?;
        writeln!(f, "strata:")?;
        for s in &self.strata {
            writeln!(
                f,
                "  height {:>3}  {:<24}  edges: {}",
                s.height,
                s.class.to_string(),
                s.edges.join(" ")
            )?;
        }
        let section = |f: &mut fmt::Formatter<'_>,
                       title: &str,
                       rows: &[(String, GrowthType)]|
         -> fmt::Result {
            if rows.is_empty() {
                return Ok(());
            }
            writeln!(f, "{title}:")?;
            let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
            for (name, g) in rows {
                writeln!(f, "  {name:<width$}  {g}")?;
            }
            Ok(())
        };
        section(f, "edges", &self.edges)?;
        section(f, "inps", &self.inps)?;
        section(f, "exceptional", &self.excs)?;
        section(f, "connecting", &self.conns)?;
        section(f, "fat turns", &self.fat_turns)?;
        Ok(())
    }
}

/// Growth of `Σ_{k=1}^n (n-k)^d λ₁^k λ₂^{n-k}` (re-exported here because it
/// drives the degree bump of the assignment).
pub fn polexp_sum_growth(d: u32, lambda1: f64, lambda2: f64) -> GrowthType {
    polexp_sum(d, lambda1, lambda2)
}
