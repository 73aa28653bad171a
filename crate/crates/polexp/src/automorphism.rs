//! Automorphisms of `G = Z^{k_1} * … * Z^{k_q} * F_N`, their iteration, and
//! palangres.
//!
//! An automorphism is stored as generator images: a word per free generator,
//! and for each abelian factor a matrix `A_j ∈ GL(k_j, Z)` together with a
//! conjugating word `w_j`, so that `φ(v) = w_j · (A_j v) · w_j⁻¹` on `G_j`.
//! A verified inverse is required at construction; it backs negative powers
//! of `t` in the mapping torus `E = G ⋊_φ Z` with `t g t⁻¹ = φ(g)`.
//!
//! `φ` is required to leave every factor `G_j` invariant up to conjugacy; an
//! outer automorphism that permutes the factors must be replaced by a power
//! killing the permutation before it can be declared here.

use num_bigint::BigInt;
use num_traits::One;

use crate::abelian::IntMatrix;
use crate::error::{Error, Result};
use crate::parse::{self, Tok};
use crate::words::{GroupSpec, NormalWord, Syllable};

/// Generator images for one direction of an automorphism.
#[derive(Debug, Clone)]
pub struct GenMap {
    pub free_images: Vec<NormalWord>,
    pub factor_matrices: Vec<IntMatrix>,
    pub factor_conjugators: Vec<NormalWord>,
}

#[derive(Debug, Clone)]
pub struct Automorphism {
    spec: GroupSpec,
    fwd: GenMap,
    inv: GenMap,
}

/// Push the image of one syllable under `map` onto the reduction stack.
fn push_image(
    stack: &mut Vec<Syllable>,
    spec: &GroupSpec,
    map: &GenMap,
    s: &Syllable,
    budget: usize,
    context: &str,
) -> Result<()> {
    let push = |syl: Syllable, stack: &mut Vec<Syllable>| -> Result<()> {
        crate::words::push_reduce_pub(stack, syl);
        if stack.len() > budget {
            return Err(Error::LengthBudgetExceeded {
                len: stack.len(),
                budget,
                context: context.to_string(),
            });
        }
        Ok(())
    };
    match s {
        Syllable::Free { index, sign } => {
            let img = &map.free_images[*index - 1];
            if *sign > 0 {
                for syl in img.syllables() {
                    push(syl.clone(), stack)?;
                }
            } else {
                for syl in img.syllables().iter().rev() {
                    push(syl.inverse(), stack)?;
                }
            }
        }
        Syllable::Abelian { factor, vector } => {
            let j = *factor - 1;
            let conj = &map.factor_conjugators[j];
            let image_vec = map.factor_matrices[j].mul_vec(vector)?;
            for syl in conj.syllables() {
                push(syl.clone(), stack)?;
            }
            push(
                Syllable::Abelian {
                    factor: *factor,
                    vector: image_vec,
                },
                stack,
            )?;
            for syl in conj.syllables().iter().rev() {
                push(syl.inverse(), stack)?;
            }
        }
    }
    let _ = spec;
    Ok(())
}

fn apply_map(
    spec: &GroupSpec,
    map: &GenMap,
    u: &NormalWord,
    budget: usize,
    context: &str,
) -> Result<NormalWord> {
    let mut stack = Vec::with_capacity(u.syllable_count());
    for s in u.syllables() {
        push_image(&mut stack, spec, map, s, budget, context)?;
    }
    NormalWord::normalize(&stack, spec)
}

impl Automorphism {
    /// Build and validate an automorphism from its forward and claimed
    /// inverse generator images. Checks dimensions, `det A_j = ±1`, and that
    /// the two maps compose to the identity on every generator.
    pub fn new(spec: GroupSpec, fwd: GenMap, inv: GenMap) -> Result<Self> {
        for (name, map) in [("map", &fwd), ("inverse map", &inv)] {
            if map.free_images.len() != spec.free_rank {
                return Err(Error::SpecMismatch(format!(
                    "{name}: expected {} free images, got {}",
                    spec.free_rank,
                    map.free_images.len()
                )));
            }
            if map.factor_matrices.len() != spec.n_factors()
                || map.factor_conjugators.len() != spec.n_factors()
            {
                return Err(Error::SpecMismatch(format!(
                    "{name}: expected {} factor matrices and conjugators",
                    spec.n_factors()
                )));
            }
            for (j, m) in map.factor_matrices.iter().enumerate() {
                let k = spec.abelian_ranks[j];
                if m.n != k {
                    return Err(Error::DimensionMismatch(format!(
                        "{name}: matrix for g{} must be {k}×{k}",
                        j + 1
                    )));
                }
                if !m.is_unimodular() {
                    return Err(Error::NotUnimodular {
                        det: m.det().to_string(),
                    });
                }
            }
            for img in map.free_images.iter().chain(&map.factor_conjugators) {
                NormalWord::normalize(img.syllables(), &spec)?;
            }
        }

        let aut = Automorphism { spec, fwd, inv };
        for g in aut.generators() {
            let fw = apply_map(&aut.spec, &aut.fwd, &g, usize::MAX, "inverse check")?;
            let back = apply_map(&aut.spec, &aut.inv, &fw, usize::MAX, "inverse check")?;
            if back != g {
                return Err(Error::Invalid(format!(
                    "claimed inverse fails on generator {}: φ⁻¹(φ(g)) = {}",
                    g.display(&aut.spec),
                    back.display(&aut.spec)
                )));
            }
            let bw = apply_map(&aut.spec, &aut.inv, &g, usize::MAX, "inverse check")?;
            let fwd_back = apply_map(&aut.spec, &aut.fwd, &bw, usize::MAX, "inverse check")?;
            if fwd_back != g {
                return Err(Error::Invalid(format!(
                    "claimed inverse fails on generator {}: φ(φ⁻¹(g)) = {}",
                    g.display(&aut.spec),
                    fwd_back.display(&aut.spec)
                )));
            }
        }
        Ok(aut)
    }

    pub fn identity(spec: GroupSpec) -> Self {
        let map = GenMap {
            free_images: (1..=spec.free_rank)
                .map(|i| {
                    NormalWord::normalize(&[Syllable::free(i, 1)], &spec).expect("valid")
                })
                .collect(),
            factor_matrices: spec
                .abelian_ranks
                .iter()
                .map(|&k| IntMatrix::identity(k))
                .collect(),
            factor_conjugators: vec![NormalWord::identity(); spec.n_factors()],
        };
        Automorphism {
            spec,
            fwd: map.clone(),
            inv: map,
        }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn factor_matrix(&self, factor: usize) -> &IntMatrix {
        &self.fwd.factor_matrices[factor - 1]
    }

    /// The standard generators: free letters, then each factor's basis
    /// vectors.
    pub fn generators(&self) -> Vec<NormalWord> {
        let mut out = Vec::new();
        for i in 1..=self.spec.free_rank {
            out.push(
                NormalWord::normalize(&[Syllable::free(i, 1)], &self.spec).expect("valid"),
            );
        }
        for (j, &k) in self.spec.abelian_ranks.iter().enumerate() {
            for b in 0..k {
                let mut v = vec![BigInt::from(0); k];
                v[b] = BigInt::one();
                out.push(
                    NormalWord::normalize(&[Syllable::abelian(j + 1, v)], &self.spec)
                        .expect("valid"),
                );
            }
        }
        out
    }

    /// Image of a word, in normal form.
    pub fn apply(&self, u: &NormalWord, budget: usize) -> Result<NormalWord> {
        apply_map(&self.spec, &self.fwd, u, budget, "applying φ")
    }

    pub fn apply_inverse(&self, u: &NormalWord, budget: usize) -> Result<NormalWord> {
        apply_map(&self.spec, &self.inv, u, budget, "applying φ⁻¹")
    }

    /// `φ^e(u)` for any sign of `e`, applying the map word-by-word `|e|`
    /// times (never by composing generator images).
    pub fn apply_signed(&self, u: &NormalWord, e: i64, budget: usize) -> Result<NormalWord> {
        let mut w = u.clone();
        for _ in 0..e.unsigned_abs() {
            w = if e >= 0 {
                self.apply(&w, budget)?
            } else {
                self.apply_inverse(&w, budget)?
            };
        }
        Ok(w)
    }

    /// `φ^n(u)` for `n ≥ 0`.
    pub fn iterate(&self, u: &NormalWord, n: usize, budget: usize) -> Result<NormalWord> {
        let mut w = u.clone();
        for _ in 0..n {
            w = self.apply(&w, budget)?;
        }
        Ok(w)
    }

    /// Left palangre `L_n(φ, g) = g · φ(g) · … · φ^{n-1}(g)`.
    pub fn palangre_left(&self, g: &NormalWord, n: usize, budget: usize) -> Result<NormalWord> {
        let mut acc = NormalWord::identity();
        let mut cur = g.clone();
        for i in 0..n {
            acc = acc.concat(&cur);
            self.check_budget(&acc, budget, "left palangre")?;
            if i + 1 < n {
                cur = self.apply(&cur, budget)?;
            }
        }
        Ok(acc)
    }

    /// Right palangre `R_n(φ, h) = φ^{n-1}(h) · … · φ(h) · h`.
    pub fn palangre_right(&self, h: &NormalWord, n: usize, budget: usize) -> Result<NormalWord> {
        let mut acc = NormalWord::identity();
        let mut cur = h.clone();
        for i in 0..n {
            acc = cur.concat(&acc);
            self.check_budget(&acc, budget, "right palangre")?;
            if i + 1 < n {
                cur = self.apply(&cur, budget)?;
            }
        }
        Ok(acc)
    }

    fn check_budget(&self, w: &NormalWord, budget: usize, context: &str) -> Result<()> {
        if w.syllable_count() > budget {
            return Err(Error::LengthBudgetExceeded {
                len: w.syllable_count(),
                budget,
                context: context.to_string(),
            });
        }
        Ok(())
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Automorphism, budget: usize) -> Result<Automorphism> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch("composition of different groups".into()));
        }
        let fwd = GenMap {
            free_images: other
                .fwd
                .free_images
                .iter()
                .map(|w| self.apply(w, budget))
                .collect::<Result<_>>()?,
            factor_matrices: self
                .fwd
                .factor_matrices
                .iter()
                .zip(&other.fwd.factor_matrices)
                .map(|(a, b)| a.mul(b))
                .collect::<Result<_>>()?,
            factor_conjugators: other
                .fwd
                .factor_conjugators
                .iter()
                .zip(&self.fwd.factor_conjugators)
                .map(|(w_other, w_self)| Ok(self.apply(w_other, budget)?.concat(w_self)))
                .collect::<Result<_>>()?,
        };
        // (φ ∘ ψ)⁻¹ = ψ⁻¹ ∘ φ⁻¹
        let inv = GenMap {
            free_images: self
                .inv
                .free_images
                .iter()
                .map(|w| other.apply_inverse(w, budget))
                .collect::<Result<_>>()?,
            factor_matrices: other
                .inv
                .factor_matrices
                .iter()
                .zip(&self.inv.factor_matrices)
                .map(|(b, a)| b.mul(a))
                .collect::<Result<_>>()?,
            factor_conjugators: self
                .inv
                .factor_conjugators
                .iter()
                .zip(&other.inv.factor_conjugators)
                .map(|(w_self, w_other)| {
                    Ok(other.apply_inverse(w_self, budget)?.concat(w_other))
                })
                .collect::<Result<_>>()?,
        };
        Automorphism::new(self.spec.clone(), fwd, inv)
    }

    /// `φ^k` as an automorphism, `k ≥ 1`.
    pub fn power(&self, k: usize, budget: usize) -> Result<Automorphism> {
        if k == 0 {
            return Ok(Automorphism::identity(self.spec.clone()));
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.compose(self, budget)?;
        }
        Ok(acc)
    }

    /// The inverse automorphism (swaps the two generator maps).
    pub fn inverse(&self) -> Automorphism {
        Automorphism {
            spec: self.spec.clone(),
            fwd: self.inv.clone(),
            inv: self.fwd.clone(),
        }
    }

    /// `x ↦ a · φ(x) · a⁻¹`, a representative of the same outer class.
    pub fn twist_by_element(&self, a: &NormalWord, budget: usize) -> Result<Automorphism> {
        let a_inv = a.invert();
        let fwd = GenMap {
            free_images: self
                .fwd
                .free_images
                .iter()
                .map(|w| a.concat(w).concat(&a_inv))
                .collect(),
            factor_matrices: self.fwd.factor_matrices.clone(),
            factor_conjugators: self
                .fwd
                .factor_conjugators
                .iter()
                .map(|w| a.concat(w))
                .collect(),
        };
        // (ad_a ∘ φ)⁻¹ = φ⁻¹ ∘ ad_{a⁻¹} = ad_b ∘ φ⁻¹ with b = φ⁻¹(a⁻¹)
        let b = self.apply_inverse(&a_inv, budget)?;
        let b_inv = b.invert();
        let inv = GenMap {
            free_images: self
                .inv
                .free_images
                .iter()
                .map(|w| b.concat(w).concat(&b_inv))
                .collect(),
            factor_matrices: self.inv.factor_matrices.clone(),
            factor_conjugators: self
                .inv
                .factor_conjugators
                .iter()
                .map(|w| b.concat(w))
                .collect(),
        };
        Automorphism::new(self.spec.clone(), fwd, inv)
    }
}

// ---------------------------------------------------------------------------
// Mapping torus
// ---------------------------------------------------------------------------

/// An element `g·t^k` of the mapping torus `E = G ⋊_φ Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusElement {
    pub g: NormalWord,
    pub t_exp: i64,
}

impl TorusElement {
    pub fn new(g: NormalWord, t_exp: i64) -> Self {
        TorusElement { g, t_exp }
    }

    /// π(g·t^k) = k.
    pub fn pi(&self) -> i64 {
        self.t_exp
    }
}

/// `(g, n) · (h, m) = (g · φⁿ(h), n + m)`.
pub fn torus_mul(
    alpha: &TorusElement,
    beta: &TorusElement,
    phi: &Automorphism,
    budget: usize,
) -> Result<TorusElement> {
    let shifted = phi.apply_signed(&beta.g, alpha.t_exp, budget)?;
    Ok(TorusElement {
        g: alpha.g.concat(&shifted),
        t_exp: alpha.t_exp + beta.t_exp,
    })
}

/// `(g·t^k)⁻¹ = φ^{-k}(g⁻¹) · t^{-k}`.
pub fn torus_inv(alpha: &TorusElement, phi: &Automorphism, budget: usize) -> Result<TorusElement> {
    Ok(TorusElement {
        g: phi.apply_signed(&alpha.g.invert(), -alpha.t_exp, budget)?,
        t_exp: -alpha.t_exp,
    })
}

/// `α^n` for `n ≥ 0`.
pub fn torus_pow(
    alpha: &TorusElement,
    n: usize,
    phi: &Automorphism,
    budget: usize,
) -> Result<TorusElement> {
    let mut acc = TorusElement::new(NormalWord::identity(), 0);
    for _ in 0..n {
        acc = torus_mul(&acc, alpha, phi, budget)?;
    }
    Ok(acc)
}

/// The G-component of `αⁿ β⁻ⁿ` for `α = g·t^k`, `β = h⁻¹·t^k` with `k ≥ 1`;
/// equals the double palangre `L_n(φᵏ, g) · R_n(φᵏ, h)`.
pub fn torus_palangre(
    alpha: &TorusElement,
    beta: &TorusElement,
    phi: &Automorphism,
    n: usize,
    budget: usize,
) -> Result<NormalWord> {
    if alpha.pi() != beta.pi() {
        return Err(Error::ExponentMismatch {
            left: alpha.pi(),
            right: beta.pi(),
        });
    }
    if alpha.pi() < 1 {
        return Err(Error::Invalid(format!(
            "torus palangre needs π(α) = π(β) ≥ 1, got {}",
            alpha.pi()
        )));
    }
    let a_n = torus_pow(alpha, n, phi, budget)?;
    let b_inv = torus_inv(beta, phi, budget)?;
    let b_neg_n = torus_pow(&b_inv, n, phi, budget)?;
    let prod = torus_mul(&a_n, &b_neg_n, phi, budget)?;
    debug_assert_eq!(prod.t_exp, 0);
    Ok(prod.g)
}

// ---------------------------------------------------------------------------
// Declaration file
// ---------------------------------------------------------------------------

/// Parse an automorphism declaration:
///
/// ```text
/// group { abelian = [2]; free = 2 }
/// map a -> a g1[1,0] b
/// map b -> a
/// matrix g1 = [[1,1],[1,0]]
/// conj g1 = 1
/// inverse {
///   map a -> b
///   map b -> g1[0,-1] B a
///   matrix g1 = [[0,1],[1,-1]]
/// }
/// ```
///
/// `conj` lines default to the identity; the `inverse { … }` block is
/// required and verified.
pub fn parse_aut(file_name: &str, text: &str) -> Result<Automorphism> {
    let mut spec: Option<GroupSpec> = None;
    let mut maps: Vec<RawMap> = vec![RawMap::default(), RawMap::default()];
    let mut in_inverse = false;
    let mut seen_inverse = false;

    for (ln, raw_line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let toks = parse::tokenize_line(file_name, line_no, raw_line)?;
        if toks.is_empty() {
            continue;
        }
        let head = toks[0].text.as_str();
        let perr = |tok: &Tok, msg: String| Error::parse(file_name, tok.line, tok.col, msg);
        match head {
            "group" => {
                let joined = raw_line.trim();
                spec = Some(parse_group_spec(file_name, line_no, joined)?);
            }
            "inverse" => {
                in_inverse = true;
                seen_inverse = true;
            }
            "}" => {
                in_inverse = false;
            }
            "map" => {
                if toks.len() < 3 || toks[2].text != "->" {
                    return Err(perr(&toks[0], "expected `map <gen> -> <word>`".into()));
                }
                let target = maps.get_mut(in_inverse as usize).unwrap();
                let rest: Vec<String> = toks[3..].iter().map(|t| t.text.clone()).collect();
                target.maps.push((toks[1].clone(), rest.join(" ")));
            }
            "matrix" => {
                if toks.len() < 4 || toks[2].text != "=" {
                    return Err(perr(&toks[0], "expected `matrix g<j> = [[..]]`".into()));
                }
                let target = maps.get_mut(in_inverse as usize).unwrap();
                target
                    .matrices
                    .push((toks[1].clone(), toks[3].text.clone()));
            }
            "conj" => {
                if toks.len() < 3 || toks[2].text != "=" {
                    return Err(perr(&toks[0], "expected `conj g<j> = <word>`".into()));
                }
                let target = maps.get_mut(in_inverse as usize).unwrap();
                let rest: Vec<String> = toks[3..].iter().map(|t| t.text.clone()).collect();
                target.conjs.push((toks[1].clone(), rest.join(" ")));
            }
            _ => {
                return Err(perr(
                    &toks[0],
                    format!("unknown directive `{head}` in automorphism file"),
                ));
            }
        }
    }

    let spec = spec.ok_or_else(|| {
        Error::parse(file_name, 1, 1, "missing `group { ... }` declaration")
    })?;
    if !seen_inverse {
        return Err(Error::parse(
            file_name,
            1,
            1,
            "missing required `inverse { ... }` block",
        ));
    }
    let fwd = maps[0].build(file_name, &spec)?;
    let inv = maps[1].build(file_name, &spec)?;
    Automorphism::new(spec, fwd, inv)
}

#[derive(Default)]
struct RawMap {
    maps: Vec<(Tok, String)>,
    matrices: Vec<(Tok, String)>,
    conjs: Vec<(Tok, String)>,
}

impl RawMap {
    fn build(&self, file: &str, spec: &GroupSpec) -> Result<GenMap> {
        let mut free_images: Vec<Option<NormalWord>> = vec![None; spec.free_rank];
        for (tok, word) in &self.maps {
            let syl = crate::words::parse_syllable(&tok.text, spec)
                .map_err(|e| Error::parse(file, tok.line, tok.col, e.to_string()))?;
            let Syllable::Free { index, sign: 1 } = syl else {
                return Err(Error::parse(
                    file,
                    tok.line,
                    tok.col,
                    "map lines must name a positive free generator",
                ));
            };
            let img = NormalWord::parse(word, spec)
                .map_err(|e| Error::parse(file, tok.line, tok.col, e.to_string()))?;
            free_images[index - 1] = Some(img);
        }
        let free_images: Vec<NormalWord> = free_images
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                w.ok_or_else(|| {
                    Error::parse(file, 1, 1, format!("missing `map` for generator a{}", i + 1))
                })
            })
            .collect::<Result<_>>()?;

        let mut matrices: Vec<Option<IntMatrix>> = vec![None; spec.n_factors()];
        for (tok, m) in &self.matrices {
            let j = parse_factor_name(file, tok)?;
            if j == 0 || j > spec.n_factors() {
                return Err(Error::parse(file, tok.line, tok.col, "bad factor index"));
            }
            matrices[j - 1] = Some(
                IntMatrix::parse(m)
                    .map_err(|e| Error::parse(file, tok.line, tok.col, e.to_string()))?,
            );
        }
        let factor_matrices: Vec<IntMatrix> = matrices
            .into_iter()
            .enumerate()
            .map(|(j, m)| {
                m.ok_or_else(|| {
                    Error::parse(file, 1, 1, format!("missing `matrix` for g{}", j + 1))
                })
            })
            .collect::<Result<_>>()?;

        let mut conjugators = vec![NormalWord::identity(); spec.n_factors()];
        for (tok, w) in &self.conjs {
            let j = parse_factor_name(file, tok)?;
            if j == 0 || j > spec.n_factors() {
                return Err(Error::parse(file, tok.line, tok.col, "bad factor index"));
            }
            conjugators[j - 1] = NormalWord::parse(w, spec)
                .map_err(|e| Error::parse(file, tok.line, tok.col, e.to_string()))?;
        }

        Ok(GenMap {
            free_images,
            factor_matrices,
            factor_conjugators: conjugators,
        })
    }
}

fn parse_factor_name(file: &str, tok: &Tok) -> Result<usize> {
    tok.text
        .strip_prefix('g')
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| Error::parse(file, tok.line, tok.col, "expected factor name g<j>"))
}

fn parse_group_spec(file: &str, line_no: usize, line: &str) -> Result<GroupSpec> {
    // group { abelian = [2]; free = 2 }   (either field may be omitted)
    let inner = line
        .trim()
        .strip_prefix("group")
        .map(|s| s.trim())
        .and_then(|s| s.strip_prefix('{'))
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| Error::parse(file, line_no, 1, "expected `group { ... }` on one line"))?;
    let mut abelian = Vec::new();
    let mut free = 0usize;
    for part in inner.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| Error::parse(file, line_no, 1, format!("bad field `{part}`")))?;
        match key.trim() {
            "abelian" => {
                abelian = parse::parse_int_vector(val.trim())?
                    .into_iter()
                    .map(|c| {
                        usize::try_from(&c)
                            .map_err(|_| Error::parse(file, line_no, 1, "bad abelian rank"))
                    })
                    .collect::<Result<_>>()?;
            }
            "free" => {
                free = val
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(file, line_no, 1, "bad free rank"))?;
            }
            other => {
                return Err(Error::parse(
                    file,
                    line_no,
                    1,
                    format!("unknown group field `{other}`"),
                ));
            }
        }
    }
    GroupSpec::new(abelian, free)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    pub(crate) fn fib_aut() -> Automorphism {
        let spec = GroupSpec::free(2);
        parse_aut(
            "fib",
            "group { free = 2 }\n\
             map a -> a b\n\
             map b -> a\n\
             inverse {\n\
             map a -> b\n\
             map b -> B a\n\
             }\n",
        )
        .unwrap()
        .tap_check(&spec)
    }

    impl Automorphism {
        fn tap_check(self, spec: &GroupSpec) -> Self {
            assert_eq!(self.spec(), spec);
            self
        }
    }

    fn w(s: &str, spec: &GroupSpec) -> NormalWord {
        NormalWord::parse(s, spec).unwrap()
    }

    #[test]
    fn identity_applies_trivially() {
        let spec = GroupSpec::new(vec![2], 1).unwrap();
        let id = Automorphism::identity(spec.clone());
        let u = w("a g1[3,-1] A", &spec);
        assert_eq!(id.apply(&u, 1000).unwrap(), u);
    }

    #[test]
    fn fib_images() {
        let phi = fib_aut();
        let spec = phi.spec().clone();
        assert_eq!(phi.apply(&w("a", &spec), 100).unwrap(), w("a b", &spec));
        // homomorphism law on a sample
        let u = w("a B a", &spec);
        let v = w("b a", &spec);
        assert_eq!(
            phi.apply(&u.concat(&v), 1000).unwrap(),
            phi.apply(&u, 1000).unwrap().concat(&phi.apply(&v, 1000).unwrap())
        );
    }

    #[test]
    fn fib_lengths_are_fibonacci() {
        let phi = fib_aut();
        let spec = phi.spec().clone();
        let mut fib = vec![1u64, 1];
        for i in 2..=22 {
            fib.push(fib[i - 1] + fib[i - 2]);
        }
        for n in 0..=20 {
            let img = phi.iterate(&w("a", &spec), n, 1_000_000).unwrap();
            assert_eq!(img.word_length(), BigUint::from(fib[n + 1]), "n = {n}");
        }
    }

    #[test]
    fn budget_trips() {
        let phi = fib_aut();
        let spec = phi.spec().clone();
        let err = phi.iterate(&w("a", &spec), 40, 1000).unwrap_err();
        assert!(matches!(err, Error::LengthBudgetExceeded { .. }));
    }

    #[test]
    fn bad_inverse_rejected() {
        let res = parse_aut(
            "bad",
            "group { free = 2 }\n\
             map a -> a b\n\
             map b -> a\n\
             inverse {\n\
             map a -> b\n\
             map b -> a\n\
             }\n",
        );
        assert!(res.is_err());
    }

    #[test]
    fn palangre_recursion() {
        let phi = fib_aut();
        let spec = phi.spec().clone();
        let g = w("a B", &spec);
        for n in 0..8 {
            let l_n = phi.palangre_left(&g, n, 100_000).unwrap();
            let l_n1 = phi.palangre_left(&g, n + 1, 100_000).unwrap();
            let phig = phi.iterate(&g, n, 100_000).unwrap();
            assert_eq!(l_n1, l_n.concat(&phig));
        }
        // identity automorphism: L_n(id, g) = g^n
        let id = Automorphism::identity(spec.clone());
        let l3 = id.palangre_left(&g, 3, 1000).unwrap();
        assert_eq!(l3, g.concat(&g).concat(&g));
        assert!(id.palangre_left(&g, 0, 1000).unwrap().is_identity());
    }

    #[test]
    fn torus_group_law() {
        let phi = fib_aut();
        let spec = phi.spec().clone();
        let b = 100_000;
        // (1, 1)·(h, 0)·(1, -1) = (φ(h), 0)
        let t = TorusElement::new(NormalWord::identity(), 1);
        let h = TorusElement::new(w("a B a", &spec), 0);
        let t_inv = torus_inv(&t, &phi, b).unwrap();
        let conj = torus_mul(&torus_mul(&t, &h, &phi, b).unwrap(), &t_inv, &phi, b).unwrap();
        assert_eq!(conj.t_exp, 0);
        assert_eq!(conj.g, phi.apply(&h.g, b).unwrap());
    }

    #[test]
    fn torus_palangre_matches_palangres() {
        let phi = fib_aut();
        let spec = phi.spec().clone();
        let b = 1_000_000;
        let g = w("a", &spec);
        let h = w("b A", &spec);
        for k in 1..=2usize {
            let phik = phi.power(k, b).unwrap();
            let alpha = TorusElement::new(g.clone(), k as i64);
            let beta = TorusElement::new(h.invert(), k as i64);
            for n in 0..=6 {
                let lhs = torus_palangre(&alpha, &beta, &phi, n, b).unwrap();
                let rhs = phik
                    .palangre_left(&g, n, b)
                    .unwrap()
                    .concat(&phik.palangre_right(&h, n, b).unwrap());
                assert_eq!(lhs, rhs, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn torus_palangre_checks_exponents() {
        let phi = fib_aut();
        let spec = phi.spec().clone();
        let alpha = TorusElement::new(w("a", &spec), 1);
        let beta = TorusElement::new(w("b", &spec), 2);
        assert!(matches!(
            torus_palangre(&alpha, &beta, &phi, 3, 1000),
            Err(Error::ExponentMismatch { .. })
        ));
    }

    #[test]
    fn twist_matches_definition() {
        let phi = fib_aut();
        let spec = phi.spec().clone();
        let b = 100_000;
        let a = w("b a", &spec);
        let twisted = phi.twist_by_element(&a, b).unwrap();
        let x = w("a b A", &spec);
        assert_eq!(
            twisted.apply(&x, b).unwrap(),
            a.concat(&phi.apply(&x, b).unwrap()).concat(&a.invert())
        );
        // identity twist changes nothing
        let same = phi.twist_by_element(&NormalWord::identity(), b).unwrap();
        assert_eq!(same.apply(&x, b).unwrap(), phi.apply(&x, b).unwrap());
    }

    #[test]
    fn mixed_factor_automorphism() {
        let spec = GroupSpec::new(vec![2], 1).unwrap();
        let phi = parse_aut(
            "zhub",
            "group { abelian = [2]; free = 1 }\n\
             map a -> a g1[1,0]\n\
             matrix g1 = [[2,1],[1,1]]\n\
             inverse {\n\
             map a -> a g1[-1,1]\n\
             matrix g1 = [[1,-1],[-1,2]]\n\
             }\n",
        )
        .unwrap();
        let v = w("g1[0,1]", &spec);
        assert_eq!(phi.apply(&v, 100).unwrap(), w("g1[1,1]", &spec));
        let u = w("a", &spec);
        assert_eq!(phi.apply(&u, 100).unwrap(), w("a g1[1,0]", &spec));
        assert_eq!(
            phi.apply_inverse(&phi.apply(&u, 100).unwrap(), 100).unwrap(),
            u
        );
    }
}
