//! Growth-type set algebra: the `⁺` closure, power rescaling, empirical
//! spectrum enumeration over short conjugacy classes, and the combination
//! superset bound assembled from transition eigenvalues and component
//! spectra.

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;

use crate::automorphism::Automorphism;
use crate::error::{Error, Result};
use crate::fit::{fit_growth, FitOptions};
use crate::growth::GrowthType;
use crate::words::{GroupSpec, NormalWord, Syllable};
use crate::{LAMBDA_TOL_EMPIRICAL, LAMBDA_TOL_EXACT};

/// A finite set of growth types, deduplicated under λ-tolerance clustering
/// and always containing `(0, 1)`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    entries: Vec<GrowthType>,
    tol: f64,
}

impl Spectrum {
    pub fn new(entries: impl IntoIterator<Item = GrowthType>, tol: f64) -> Spectrum {
        let mut s = Spectrum {
            entries: vec![GrowthType::bounded()],
            tol,
        };
        for e in entries {
            s.insert(e);
        }
        s
    }

    pub fn exact(entries: impl IntoIterator<Item = GrowthType>) -> Spectrum {
        Spectrum::new(entries, LAMBDA_TOL_EXACT)
    }

    pub fn empirical(entries: impl IntoIterator<Item = GrowthType>) -> Spectrum {
        Spectrum::new(entries, LAMBDA_TOL_EMPIRICAL)
    }

    pub fn insert(&mut self, g: GrowthType) {
        if !self
            .entries
            .iter()
            .any(|e| e.d == g.d && e.lambda_eq(&g, self.tol))
        {
            self.entries.push(g);
            self.entries
                .sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.d.cmp(&b.d)));
        }
    }

    pub fn entries(&self) -> &[GrowthType] {
        &self.entries
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn contains(&self, g: &GrowthType, tol: f64) -> bool {
        self.entries
            .iter()
            .any(|e| e.d == g.d && e.lambda_eq(g, tol))
    }

    /// `Δ⁺ = Δ ∪ {(d+1, 1) : (d, 1) ∈ Δ}`.
    pub fn plus_closure(&self) -> Spectrum {
        let mut out = self.clone();
        for e in self.entries.clone() {
            if e.lambda_eq(&GrowthType::bounded(), self.tol) {
                out.insert(GrowthType::new(e.d + 1, 1.0));
            }
        }
        out
    }

    /// `Λᵏ = {(d, λᵏ)}`.
    pub fn power_rescale(&self, k: u32) -> Spectrum {
        Spectrum::new(self.entries.iter().map(|e| e.power(k)), self.tol)
    }

    /// `{(d, λ^{1/k})}` — the inverse rescaling.
    pub fn root_rescale(&self, k: u32) -> Spectrum {
        Spectrum::new(self.entries.iter().map(|e| e.root(k)), self.tol)
    }
}

/// Result of the empirical enumeration: every fitted type with up to eight
/// witness words, plus the classes skipped for budget reasons.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub spectrum: Spectrum,
    pub witnesses: Vec<(GrowthType, Vec<String>)>,
    pub skipped: Vec<(String, String)>,
    pub n_classes: usize,
}

/// Enumerate cyclically reduced words of length at most `max_len` (one per
/// cyclic-rotation class), fit the growth of `‖φⁿ(g)‖` for each, and collect
/// the distinct fitted types. The result is an empirical **lower bound** for
/// the spectrum: enumeration over bounded length cannot certify
/// completeness.
pub fn enumerate_spectrum(
    phi: &Automorphism,
    max_len: usize,
    n_max: usize,
    budget: usize,
) -> Result<SpectrumReport> {
    if n_max + 1 < 12 {
        return Err(Error::TooShort {
            len: n_max + 1,
            min: 12,
        });
    }
    let spec = phi.spec().clone();
    let classes = enumerate_classes(&spec, max_len);
    let n_classes = classes.len();

    let results: Vec<(String, std::result::Result<GrowthType, String>)> = classes
        .par_iter()
        .map(|g| {
            let display = g.display(&spec);
            let mut seq: Vec<BigUint> = Vec::with_capacity(n_max + 1);
            let mut cur = g.clone();
            for n in 0..=n_max {
                seq.push(cur.conj_length());
                if n < n_max {
                    match phi.apply(&cur, budget) {
                        Ok(next) => cur = next,
                        Err(e) => return (display, Err(e.to_string())),
                    }
                }
            }
            match fit_growth(&seq, &FitOptions::default()) {
                Ok(f) => (display, Ok(f.growth_type())),
                Err(e) => (display, Err(e.to_string())),
            }
        })
        .collect();

    let mut spectrum = Spectrum::empirical([]);
    let mut witnesses: Vec<(GrowthType, Vec<String>)> = Vec::new();
    let mut skipped = Vec::new();
    for (word, res) in results {
        match res {
            Ok(g) => {
                spectrum.insert(g.clone());
                match witnesses
                    .iter_mut()
                    .find(|(w, _)| w.d == g.d && w.lambda_eq(&g, LAMBDA_TOL_EMPIRICAL))
                {
                    Some((_, ws)) => {
                        if ws.len() < 8 {
                            ws.push(word);
                        }
                    }
                    None => witnesses.push((g, vec![word])),
                }
            }
            Err(reason) => skipped.push((word, reason)),
        }
    }
    witnesses.sort_by(|a, b| {
        a.0.lambda
            .total_cmp(&b.0.lambda)
            .then(a.0.d.cmp(&b.0.d))
    });
    Ok(SpectrumReport {
        spectrum,
        witnesses,
        skipped,
        n_classes,
    })
}

/// All cyclically reduced words of word length ≤ `max_len`, one per cyclic
/// class, including the identity.
pub fn enumerate_classes(spec: &GroupSpec, max_len: usize) -> Vec<NormalWord> {
    let mut out = vec![NormalWord::identity()];
    let mut seen = std::collections::HashSet::new();
    let mut current: Vec<Syllable> = Vec::new();
    gen_words(spec, max_len, &mut current, &mut seen, &mut out);
    out
}

fn syllable_choices(spec: &GroupSpec, budget: usize) -> Vec<Syllable> {
    let mut out = Vec::new();
    if budget == 0 {
        return out;
    }
    for i in 1..=spec.free_rank {
        out.push(Syllable::free(i, 1));
        out.push(Syllable::free(i, -1));
    }
    for (j, &k) in spec.abelian_ranks.iter().enumerate() {
        for v in crate::abelian::vectors_in_ball(k, budget as i64) {
            if v.iter().all(|c| c.is_zero()) {
                continue;
            }
            out.push(Syllable::abelian(j + 1, v));
        }
    }
    out
}

fn adjacent_ok(prev: &Syllable, next: &Syllable) -> bool {
    match (prev, next) {
        (
            Syllable::Free { index: a, sign: s },
            Syllable::Free { index: b, sign: t },
        ) => !(a == b && s + t == 0),
        (Syllable::Abelian { factor: a, .. }, Syllable::Abelian { factor: b, .. }) => a != b,
        _ => true,
    }
}

fn gen_words(
    spec: &GroupSpec,
    remaining: usize,
    current: &mut Vec<Syllable>,
    seen: &mut std::collections::HashSet<String>,
    out: &mut Vec<NormalWord>,
) {
    for s in syllable_choices(spec, remaining) {
        if let Some(last) = current.last() {
            if !adjacent_ok(last, &s) {
                continue;
            }
        }
        let len: usize = match s.length().try_into() {
            Ok(l) => l,
            Err(_) => continue,
        };
        if len > remaining {
            continue;
        }
        current.push(s);
        // cyclically reduced: ends must not cancel or merge
        if current.len() == 1 || adjacent_ok(current.last().unwrap(), &current[0]) {
            let key = canonical_rotation_key(current, spec);
            if seen.insert(key) {
                let w = NormalWord::normalize(current, spec).expect("generated in range");
                out.push(w);
            }
        }
        gen_words(spec, remaining - len, current, seen, out);
        current.pop();
    }
}

fn canonical_rotation_key(syls: &[Syllable], spec: &GroupSpec) -> String {
    let toks: Vec<String> = syls
        .iter()
        .map(|s| crate::words::display_syllable(s, spec))
        .collect();
    let n = toks.len();
    let mut best: Option<String> = None;
    for r in 0..n {
        let rotated: Vec<String> = (0..n).map(|i| toks[(r + i) % n].clone()).collect();
        let key = rotated.join(" ");
        if best.as_ref().map_or(true, |b| key < *b) {
            best = Some(key);
        }
    }
    best.unwrap_or_default()
}

/// The combination superset bound: λ may be a transition eigenvalue of the
/// map or appear in a component spectrum or palangre spectrum, and the
/// degree is capped by the number of strata plus the largest component
/// degree. Containment checks use both the λ provenance set and the cap.
#[derive(Debug, Clone)]
pub struct CombinationBound {
    pub entries: Spectrum,
    pub degree_cap: u32,
}

pub fn combination_bound(
    component_spectra: &[(Spectrum, Spectrum)],
    ct_eigenvalues: &[GrowthType],
    n_strata: usize,
) -> CombinationBound {
    let mut entries = Spectrum::empirical([]);
    for g in ct_eigenvalues {
        entries.insert(GrowthType {
            d: 0,
            lambda: g.lambda,
            poly: g.poly.clone(),
        });
    }
    let mut max_component_degree = 0u32;
    for (s, pal) in component_spectra {
        for e in s.entries().iter().chain(pal.entries()) {
            entries.insert(e.clone());
            max_component_degree = max_component_degree.max(e.d);
        }
    }
    CombinationBound {
        entries: entries.plus_closure(),
        degree_cap: n_strata as u32 + max_component_degree,
    }
}

impl CombinationBound {
    /// Membership up to λ-tolerance: the λ must match one of the bound's
    /// λ values and the degree must respect the cap.
    pub fn contains(&self, g: &GrowthType, tol: f64) -> bool {
        g.d <= self.degree_cap
            && self
                .entries
                .entries()
                .iter()
                .any(|e| e.lambda_eq(g, tol))
    }

    pub fn contains_spectrum(&self, s: &Spectrum, tol: f64) -> bool {
        s.entries().iter().all(|g| self.contains(g, tol))
    }
}

/// Exact spectrum and palangre spectrum of an abelian factor over the ball
/// of integer vectors with `‖v‖₁ ≤ radius` (exact per vector, exhaustive
/// over the ball).
pub fn abelian_component_spectra(
    a: &crate::abelian::IntMatrix,
    radius: i64,
) -> Result<(Spectrum, Spectrum)> {
    let (orbit, pal) = crate::abelian::growth_types_over_ball(a, radius)?;
    Ok((Spectrum::exact(orbit), Spectrum::exact(pal)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plus_closure_examples() {
        // {(0,1)} → {(0,1),(1,1)}
        let s = Spectrum::exact([]);
        let p = s.plus_closure();
        assert!(p.contains(&GrowthType::new(1, 1.0), LAMBDA_TOL_EXACT));
        assert_eq!(p.entries().len(), 2);

        // {(0,2)} gains the mandatory (0,1) and closes it
        let s = Spectrum::exact([GrowthType::new(0, 2.0)]);
        let p = s.plus_closure();
        assert!(p.contains(&GrowthType::new(0, 2.0), LAMBDA_TOL_EXACT));
        assert!(p.contains(&GrowthType::new(1, 1.0), LAMBDA_TOL_EXACT));

        // each closure adds exactly one more degree per λ = 1 chain
        let pp = p.plus_closure();
        assert!(pp.contains(&GrowthType::new(2, 1.0), LAMBDA_TOL_EXACT));
        assert_eq!(pp.entries().len(), p.entries().len() + 1);
    }

    #[test]
    fn power_rescale_examples() {
        let phi = 1.618033988749895f64;
        let s = Spectrum::exact([GrowthType::new(0, phi)]);
        assert_eq!(s.power_rescale(1).entries().len(), s.entries().len());
        let sq = s.power_rescale(2);
        // golden ratio squared is golden ratio plus one
        assert!(sq.contains(&GrowthType::new(0, phi + 1.0), 1e-9));
        // λ = 1 entries unchanged
        assert!(sq.contains(&GrowthType::bounded(), LAMBDA_TOL_EXACT));
        // and the root rescale returns the original within tolerance
        let back = sq.root_rescale(2);
        assert!(back.contains(&GrowthType::new(0, phi), 1e-9));
    }

    #[test]
    fn enumerate_classes_dedups_rotations() {
        let spec = GroupSpec::free(2);
        let classes = enumerate_classes(&spec, 2);
        // identity, a, A, b, B, aa, AA, bb, BB, ab, aB, Ab, AB
        assert!(classes.contains(&NormalWord::identity()));
        let count_len2_mixed = classes
            .iter()
            .filter(|w| {
                w.syllable_count() == 2
                    && w.syllables().iter().any(|s| matches!(s, Syllable::Free { index: 1, .. }))
                    && w.syllables().iter().any(|s| matches!(s, Syllable::Free { index: 2, .. }))
            })
            .count();
        assert_eq!(count_len2_mixed, 4); // ab, aB, Ab, AB (ba ~ ab etc.)
        assert_eq!(classes.len(), 13);
    }

    #[test]
    fn combination_bound_membership() {
        let bound = combination_bound(&[], &[GrowthType::new(0, 2.0)], 1);
        assert!(bound.contains(&GrowthType::new(0, 2.0), 0.02));
        assert!(bound.contains(&GrowthType::new(1, 1.0), 0.02));
        assert!(bound.contains(&GrowthType::new(1, 2.0), 0.02)); // within cap
        assert!(!bound.contains(&GrowthType::new(2, 2.0), 0.02)); // beyond cap
        assert!(!bound.contains(&GrowthType::new(0, 3.0), 0.02)); // unknown λ
    }
}
