//! Empirical growth estimation: fit `(d̂, λ̂)` to an exact length sequence.
//!
//! λ̂ comes from the slope of `ln a_n` against `n` over the tail window
//! `[⌈2·n_max/3⌉, n_max]`; the degree is the snapped slope of the λ-corrected
//! sequence against `ln n`. The two estimates are refined against each other
//! and the candidate with the smallest residual wins, so a polynomial factor
//! cannot bias the exponential base.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::growth::GrowthType;

/// Tuning knobs for [`fit_growth`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// λ̂ below `1 + eps_lambda` is snapped to exactly 1.
    pub eps_lambda: f64,
    /// Largest polynomial degree considered.
    pub d_max: u32,
    /// Residuals above this raise the low-confidence flag.
    pub residual_flag: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            eps_lambda: 0.02,
            d_max: 8,
            residual_flag: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Bounded,
    Polynomial(u32),
    Exponential { d: u32, lambda: f64 },
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Bounded => write!(f, "bounded"),
            Classification::Polynomial(d) => write!(f, "polynomial(d={d})"),
            Classification::Exponential { d, lambda } => {
                write!(f, "exponential(d={d}, lambda={lambda:.6})")
            }
        }
    }
}

/// Result of fitting a length sequence.
#[derive(Debug, Clone)]
pub struct FittedGrowth {
    pub d_hat: u32,
    pub lambda_hat: f64,
    /// Max relative deviation of `a_n / (C n^d λ^n)` from 1 over the tail.
    pub residual: f64,
    pub classification: Classification,
    /// Residual exceeded the confidence bar, or an exponential tail was not
    /// monotone (oscillation between the two ≍ bounds).
    pub low_confidence: bool,
    /// The tail was identically zero.
    pub degenerate: bool,
    /// Tail window `[lo, hi]` of n values used.
    pub window: (usize, usize),
}

impl FittedGrowth {
    pub fn growth_type(&self) -> GrowthType {
        GrowthType::new(self.d_hat, self.lambda_hat)
    }
}

const MIN_LEN: usize = 12;

/// Natural log of a big integer; `None` for zero. Uses the top 53 bits plus
/// the bit length, so it stays accurate far beyond the f64 range.
pub fn ln_biguint(x: &BigUint) -> Option<f64> {
    if x == &BigUint::from(0u32) {
        return None;
    }
    let bits = x.bits();
    if bits <= 53 {
        return Some(x.to_f64().unwrap().ln());
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().unwrap();
    Some(top.ln() + shift as f64 * std::f64::consts::LN_2)
}

fn regress(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return (0.0, sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Largest relative deviation of `a_n` from the model `C n^d λ^n`, with the
/// constant chosen as the geometric mean over the window.
fn residual_for(tail: &[(usize, f64)], d: u32, lambda: f64) -> f64 {
    let ln_lambda = lambda.ln();
    let devs: Vec<f64> = tail
        .iter()
        .map(|&(n, ln_a)| ln_a - d as f64 * (n as f64).ln() - n as f64 * ln_lambda)
        .collect();
    let ln_c = devs.iter().sum::<f64>() / devs.len() as f64;
    devs.iter()
        .map(|dv| ((dv - ln_c).exp() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Slope of the λ-corrected log-sequence against n, estimated as the
/// difference of the two half-window means (the least-squares slope for the
/// grouped two-block design). Unlike the pointwise regression slope this is
/// unbiased for sequences that oscillate between the two ≍ bounds with a
/// bounded multiplicative period, which happens whenever several eigenvalues
/// share the maximal modulus.
fn grouped_slope(pts: &[(f64, f64)]) -> f64 {
    let half = pts.len() / 2;
    let lo = &pts[..half];
    let hi = &pts[pts.len() - half..];
    let mean = |s: &[(f64, f64)]| {
        let x: f64 = s.iter().map(|p| p.0).sum::<f64>() / s.len() as f64;
        let y: f64 = s.iter().map(|p| p.1).sum::<f64>() / s.len() as f64;
        (x, y)
    };
    let (x1, y1) = mean(lo);
    let (x2, y2) = mean(hi);
    if (x2 - x1).abs() < 1e-12 {
        return 0.0;
    }
    (y2 - y1) / (x2 - x1)
}

fn lambda_given_d(tail: &[(usize, f64)], d: u32, eps: f64) -> f64 {
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .map(|&(n, ln_a)| (n as f64, ln_a - d as f64 * (n as f64).ln()))
        .collect();
    let lam = grouped_slope(&pts).exp();
    if lam < 1.0 + eps {
        1.0
    } else {
        lam
    }
}

/// Detect a genuine multiplicative oscillation (several eigenvalues of
/// equal modulus rotating at a resolvable period): fit
/// `c + s·n + A·cos(θn) + B·sin(θn)` over a period grid on the wide
/// window. When a period at most two thirds of the span explains the data
/// decisively, the de-oscillated slope pins the growth rate and the
/// de-oscillated residual regressed on ln n pins the degree; window-mean
/// estimators would see only a phase-dependent piece of the wave. Returns
/// `(slope, degree estimate)`.
fn oscillation_fit(lns: &[Option<f64>], hi: usize) -> Option<(f64, f64)> {
    let lo = (hi / 4).max(2);
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .filter_map(|n| lns[n].map(|l| (n as f64, l)))
        .collect();
    if pts.len() < 12 {
        return None;
    }
    let (slope0, intercept0) = regress(&pts);
    let sse0: f64 = pts
        .iter()
        .map(|&(x, y)| (y - intercept0 - slope0 * x).powi(2))
        .sum();
    let span = pts.last().unwrap().0 - pts[0].0;
    let mut best: Option<(Vec<f64>, f64, f64)> = None; // coeffs, theta, sse
    // periods from just above Nyquist (fast rotations alias but stay
    // resolvable) up to two thirds of the span
    let mut grid: Vec<f64> = Vec::new();
    let mut p = 2.05f64;
    while p < 6.0 {
        grid.push(p);
        p += 0.05;
    }
    let mut p = 6.0f64;
    while p <= span / 1.5 {
        grid.push(p);
        p += 0.5;
    }
    for period in grid {
        let theta = std::f64::consts::TAU / period;
        let mut g = vec![vec![0.0f64; 4]; 4];
        let mut rhs = vec![0.0f64; 4];
        for &(x, y) in &pts {
            let b = [1.0, x, (theta * x).cos(), (theta * x).sin()];
            for i in 0..4 {
                for j in 0..4 {
                    g[i][j] += b[i] * b[j];
                }
                rhs[i] += b[i] * y;
            }
        }
        if let Some(c) = solve_small(&mut g, &mut rhs) {
            let sse: f64 = pts
                .iter()
                .map(|&(x, y)| {
                    let b = [1.0, x, (theta * x).cos(), (theta * x).sin()];
                    (y - b.iter().zip(&c).map(|(u, v)| u * v).sum::<f64>()).powi(2)
                })
                .sum();
            if best.as_ref().map_or(true, |(_, _, bs)| sse < *bs) {
                best = Some((c, theta, sse));
            }
        }
    }
    let (c, theta, sse) = best?;
    if sse >= 0.25 * sse0 {
        return None;
    }
    // degree from the de-oscillated residual against ln n
    let deosc: Vec<(f64, f64)> = pts
        .iter()
        .map(|&(x, y)| {
            (
                x.ln(),
                y - c[1] * x - c[2] * (theta * x).cos() - c[3] * (theta * x).sin(),
            )
        })
        .collect();
    let (d_est, _) = regress(&deosc);
    Some((c[1], d_est))
}

fn d_given_lambda(tail: &[(usize, f64)], lambda: f64, d_max: u32) -> u32 {
    let ln_lambda = lambda.ln();
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .map(|&(n, ln_a)| ((n as f64).ln(), ln_a - n as f64 * ln_lambda))
        .collect();
    let (slope, _) = regress(&pts);
    slope.round().clamp(0.0, d_max as f64) as u32
}

/// Selection metric implementing the growth relation directly: the model is
/// `C·nᵈλⁿ + C'·nᵈ⁻¹λⁿ + B` — the leading term, its first
/// polynomial correction, and the additive slack of the ≍ definition — fit
/// over an extended range by least squares in *relative* coordinates
/// (weights `1/aₙ²`) and scored by the largest relative deviation. The
/// relative weighting keeps the small-n region, where competing growth
/// models actually separate, as informative as the peak. Data is scaled by
/// the model's value at `hi` to stay inside f64 range.
fn affine_model_residual(lns: &[Option<f64>], lo: usize, hi: usize, d: u32, lambda: f64) -> f64 {
    let ext_lo = lo.max(2);
    let scale = d as f64 * (hi as f64).ln() + hi as f64 * lambda.ln();
    // rows: (basis values, a_n), all scaled; zero entries are skipped
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    // basis columns: n^d λ^n, then n^{d-1} λ^n when it is not collinear
    // with the constant column, then the constant
    let ln_lambda = lambda.ln();
    let use_correction = d >= 1 && !(lambda == 1.0 && d == 1);
    for n in ext_lo..=hi {
        let Some(l) = lns[n] else { continue };
        let a_scaled = (l - scale).exp();
        let ln_n = (n as f64).ln();
        let u1 = (d as f64 * ln_n + n as f64 * ln_lambda - scale).exp();
        let mut basis = vec![u1];
        if use_correction {
            basis.push(((d as f64 - 1.0) * ln_n + n as f64 * ln_lambda - scale).exp());
        }
        basis.push((-scale).exp()); // constant column
        if !a_scaled.is_finite() || basis.iter().any(|x| !x.is_finite()) || a_scaled <= 0.0 {
            return f64::INFINITY;
        }
        rows.push((basis, a_scaled));
    }
    let k = match rows.first() {
        Some((b, _)) => b.len(),
        None => return f64::INFINITY,
    };
    if rows.len() < k + 2 {
        return f64::INFINITY;
    }
    if lambda == 1.0 && d == 0 {
        // constant model: the weighted mean
        let sw: f64 = rows.iter().map(|(_, a)| 1.0 / (a * a)).sum();
        let swa: f64 = rows.iter().map(|(_, a)| 1.0 / a).sum();
        let mean = swa / sw;
        if mean <= 0.0 {
            return f64::INFINITY;
        }
        return rows
            .iter()
            .map(|(_, a)| (a - mean).abs() / mean.max(*a))
            .fold(0.0, f64::max);
    }
    // weighted normal equations G c = r with weights 1/a²
    let mut g = vec![vec![0.0f64; k]; k];
    let mut rhs = vec![0.0f64; k];
    for (basis, a) in &rows {
        let w = 1.0 / (a * a);
        for i in 0..k {
            for j in 0..k {
                g[i][j] += w * basis[i] * basis[j];
            }
            rhs[i] += w * basis[i] * a;
        }
    }
    let Some(coef) = solve_small(&mut g, &mut rhs) else {
        return f64::INFINITY;
    };
    if coef[0] <= 0.0 {
        return f64::INFINITY; // the leading term must actually lead
    }
    rows.iter()
        .map(|(basis, a)| {
            let model: f64 = basis.iter().zip(&coef).map(|(x, c)| x * c).sum();
            (a - model).abs() / model.max(*a)
        })
        .fold(0.0, f64::max)
}

/// Gaussian elimination with partial pivoting for the tiny normal systems.
fn solve_small(g: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let k = rhs.len();
    for col in 0..k {
        let pivot = (col..k).max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs()))?;
        if g[pivot][col].abs() < 1e-300 {
            return None;
        }
        g.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in 0..k {
            if row == col {
                continue;
            }
            let f = g[row][col] / g[col][col];
            for j in col..k {
                let t = f * g[col][j];
                g[row][j] -= t;
            }
            rhs[row] -= f * rhs[col];
        }
    }
    Some((0..k).map(|i| rhs[i] / g[i][i]).collect())
}

/// Admissibility gate for exponential candidates: after removing the
/// polynomial part `d·ln n`, a genuine exponential keeps a steady positive
/// log-slope across the second half of the data, while polynomial
/// corrections produce a slope decaying like 1/n. Returns the grouped
/// slopes over the middle and final thirds.
fn corrected_slopes(lns: &[Option<f64>], hi: usize, d: u32) -> Option<(f64, f64)> {
    let t1 = (hi / 3).max(2);
    let t2 = (2 * hi / 3).max(t1 + 1);
    let window = |lo: usize, up: usize| -> Vec<(f64, f64)> {
        (lo..=up)
            .filter_map(|n| {
                lns[n].map(|l| (n as f64, l - d as f64 * (n as f64).ln()))
            })
            .collect()
    };
    let w1 = window(t1, t2);
    let w2 = window(t2, hi);
    if w1.len() < 3 || w2.len() < 3 {
        return None;
    }
    Some((grouped_slope(&w1), grouped_slope(&w2)))
}

fn exp_candidate_admissible(lns: &[Option<f64>], hi: usize, d: u32) -> bool {
    match corrected_slopes(lns, hi, d) {
        // the slope must neither vanish nor decay the way a polynomial's
        // 1/n tail does
        Some((s1, s2)) => s2 > 0.0 && s2 >= 0.8 * s1,
        None => true,
    }
}

/// Mirror gate for polynomial candidates of positive degree: a log-slope
/// that stays positive without decaying belongs to an exponential, which a
/// high-degree polynomial could otherwise imitate over a short window.
fn poly_candidate_admissible(lns: &[Option<f64>], hi: usize, d: u32, eps: f64) -> bool {
    if d == 0 {
        return true;
    }
    match corrected_slopes(lns, hi, 0) {
        Some((s1, s2)) => !(s2 > eps && s2 >= 0.92 * s1),
        None => true,
    }
}

/// Fit `(d̂, λ̂)` to an exact non-negative integer sequence indexed by
/// `n = 0, 1, …`.
pub fn fit_growth(seq: &[BigUint], opts: &FitOptions) -> Result<FittedGrowth> {
    if seq.len() < MIN_LEN {
        return Err(Error::TooShort {
            len: seq.len(),
            min: MIN_LEN,
        });
    }
    let n_max = seq.len() - 1;
    let lo = (2 * n_max).div_ceil(3);
    let window = (lo, n_max);

    let lns: Vec<Option<f64>> = seq.iter().map(ln_biguint).collect();
    let tail_all = &lns[lo..];
    if tail_all.iter().all(|x| x.is_none()) {
        return Ok(FittedGrowth {
            d_hat: 0,
            lambda_hat: 1.0,
            residual: 0.0,
            classification: Classification::Bounded,
            low_confidence: false,
            degenerate: true,
            window,
        });
    }
    if tail_all.iter().any(|x| x.is_none()) {
        return Err(Error::NonPositiveTail);
    }
    let tail: Vec<(usize, f64)> = (lo..=n_max).map(|n| (n, lns[n].unwrap())).collect();

    // Initial λ̂ from the raw slope, then alternate the two regressions.
    let mut candidates: Vec<(u32, f64)> = Vec::new();
    let mut lambda = lambda_given_d(&tail, 0, opts.eps_lambda);
    for _ in 0..3 {
        let d = d_given_lambda(&tail, lambda, opts.d_max);
        lambda = lambda_given_d(&tail, d, opts.eps_lambda);
        candidates.push((d, lambda));
    }

    // Oscillation shortcut: when the sequence provably oscillates with a
    // resolvable period, the de-oscillated slope fixes λ and the plain
    // degree regression fixes d; the model tournament below would otherwise
    // compare candidates against a band it cannot shrink.
    {
        if let Some((slope, d_coeff)) = oscillation_fit(&lns, n_max) {
            let lam = slope.exp();
            if lam >= 1.0 + opts.eps_lambda {
                let d_hat = d_coeff.round().clamp(0.0, opts.d_max as f64) as u32;
                let residual = residual_for(&tail, d_hat, lam);
                let monotone = seq[lo..].windows(2).all(|w| w[0] <= w[1]);
                return Ok(FittedGrowth {
                    d_hat,
                    lambda_hat: lam,
                    residual,
                    classification: Classification::Exponential {
                        d: d_hat,
                        lambda: lam,
                    },
                    low_confidence: residual > opts.residual_flag || !monotone,
                    degenerate: false,
                    window,
                });
            }
        }
    }
    // Grid over degrees: each with its own refit λ, plus the pure
    // polynomial model for the same degree.
    for dg in 0..=opts.d_max {
        candidates.push((dg, lambda_given_d(&tail, dg, opts.eps_lambda)));
        candidates.push((dg, 1.0));
    }

    // Over a short window a polynomial tail with an additive offset is fit
    // well by a slightly supercritical λ and vice versa; candidates are
    // therefore scored by the affine model C·nᵈλⁿ + B over an extended
    // range, with a small preference for the polynomial model on ties.
    // Exponential candidates are scored on the tail window (their
    // subdominant transients legitimately die off); polynomial candidates
    // must hold over the extended window (their corrections are part of the
    // model). Each family has a slope-decay admissibility gate.
    let ext_lo = (n_max / 3).max(2);
    let mut poly_cands: Vec<(u32, f64, f64)> = Vec::new();
    let mut exp_cands: Vec<(u32, f64, f64)> = Vec::new();
    for (d, l) in candidates {
        if l > 1.0 {
            if !exp_candidate_admissible(&lns, n_max, d) {
                continue;
            }
            let r = affine_model_residual(&lns, lo, n_max, d, l);
            if r.is_finite() {
                exp_cands.push((d, l, r));
            }
        } else {
            if !poly_candidate_admissible(&lns, n_max, d, opts.eps_lambda) {
                continue;
            }
            let r = affine_model_residual(&lns, ext_lo, n_max, d, l);
            if r.is_finite() {
                poly_cands.push((d, l, r));
            }
        }
    }
    // within a family, prefer the smallest degree among near-ties: a higher
    // degree with a vanishing leading coefficient fits at least as well
    let champion = |cands: &[(u32, f64, f64)]| -> Option<(u32, f64, f64)> {
        let best = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            return None;
        }
        let margin = (1.5 * best).max(best + 0.002);
        cands
            .iter()
            .filter(|c| c.2 <= margin)
            .min_by(|a, b| a.0.cmp(&b.0).then(a.2.total_cmp(&b.2)))
            .copied()
    };
    let poly = champion(&poly_cands).unwrap_or((0, 1.0, f64::INFINITY));
    let (d_hat, lambda_hat) = match champion(&exp_cands) {
        Some(exp) if exp.2 < poly.2 => (exp.0, exp.1),
        _ => (poly.0, poly.1),
    };
    let residual = residual_for(&tail, d_hat, lambda_hat);

    let monotone = seq[lo..].windows(2).all(|w| w[0] <= w[1]);
    let low_confidence =
        residual > opts.residual_flag || (lambda_hat > 1.0 && !monotone);

    let classification = if lambda_hat > 1.0 {
        Classification::Exponential {
            d: d_hat,
            lambda: lambda_hat,
        }
    } else if d_hat == 0 && residual <= opts.residual_flag {
        Classification::Bounded
    } else {
        Classification::Polynomial(d_hat)
    };

    Ok(FittedGrowth {
        d_hat,
        lambda_hat,
        residual,
        classification,
        low_confidence,
        degenerate: false,
        window,
    })
}

/// Check the power law between the length sequences of φ and φᵏ: degrees must
/// agree and `λ̂(φᵏ)` must equal `λ̂(φ)ᵏ` within 3%.
pub fn check_power_consistency(
    seq_phi: &[BigUint],
    seq_phi_k: &[BigUint],
    k: u32,
) -> Result<bool> {
    let opts = FitOptions::default();
    let f1 = fit_growth(seq_phi, &opts)?;
    let fk = fit_growth(seq_phi_k, &opts)?;
    if f1.d_hat != fk.d_hat {
        return Ok(false);
    }
    let expect = f1.lambda_hat.powi(k as i32);
    Ok((fk.lambda_hat - expect).abs() <= 0.03 * expect.max(1.0))
}

/// Emit the `n,length` CSV (no trailing whitespace).
pub fn to_csv(seq: &[BigUint]) -> String {
    let mut out = String::from("n,length");
    for (n, len) in seq.iter().enumerate() {
        out.push('\n');
        out.push_str(&format!("{n},{len}"));
    }
    out
}

/// Parse an `n,length` CSV produced by [`to_csv`] (entries must be the
/// consecutive integers starting at 0).
pub fn from_csv(text: &str) -> Result<Vec<BigUint>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if i == 0 {
            if line != "n,length" {
                return Err(Error::Invalid(format!(
                    "expected csv header `n,length`, got `{line}`"
                )));
            }
            continue;
        }
        let (n_str, len_str) = line
            .split_once(',')
            .ok_or_else(|| Error::Invalid(format!("bad csv line `{line}`")))?;
        let n: usize = n_str
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad csv index `{n_str}`")))?;
        if n != out.len() {
            return Err(Error::Invalid(format!(
                "csv rows out of order at n = {n}"
            )));
        }
        let v: BigUint = len_str
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad csv length `{len_str}`")))?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(seq: &[BigUint]) -> FittedGrowth {
        fit_growth(seq, &FitOptions::default()).unwrap()
    }

    fn biguints(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn constant_is_bounded() {
        let seq = vec![BigUint::from(7u32); 20];
        let f = fit(&seq);
        assert_eq!((f.d_hat, f.lambda_hat), (0, 1.0));
        assert_eq!(f.classification, Classification::Bounded);
        assert_eq!(f.residual, 0.0);
    }

    #[test]
    fn fibonacci_is_golden() {
        let mut seq = vec![BigUint::from(1u32), BigUint::from(2u32)];
        for i in 2..=30 {
            let next = &seq[i - 1] + &seq[i - 2];
            seq.push(next);
        }
        let f = fit(&seq);
        assert_eq!(f.d_hat, 0);
        assert!((f.lambda_hat - 1.618033988749895).abs() < 0.01 * 1.618);
        assert!(matches!(f.classification, Classification::Exponential { .. }));
    }

    #[test]
    fn quadratic_polynomial() {
        let seq: Vec<BigUint> = (0..=40u64).map(|n| BigUint::from(n * (n + 1) / 2)).collect();
        let f = fit(&seq);
        assert_eq!(f.d_hat, 2);
        assert_eq!(f.lambda_hat, 1.0);
        assert_eq!(f.classification, Classification::Polynomial(2));
    }

    #[test]
    fn synthetic_polexp_recovery() {
        for &d in &[0u32, 1, 2, 3, 4] {
            for &lambda in &[1.0f64, 1.3, 1.618, 2.618] {
                for &c in &[1.0f64, 5.0] {
                    if lambda == 1.0 && d == 0 {
                        continue;
                    }
                    let seq: Vec<BigUint> = (0..=35u32)
                        .map(|n| {
                            let v = c * (n as f64).powi(d as i32) * lambda.powi(n as i32);
                            BigUint::from(v.floor() as u128)
                        })
                        .collect();
                    let f = fit(&seq);
                    assert_eq!(f.d_hat, d, "d for (d={d}, λ={lambda}, c={c})");
                    assert!(
                        (f.lambda_hat - lambda).abs() <= 0.01 * lambda,
                        "λ for (d={d}, λ={lambda}, c={c}): got {}",
                        f.lambda_hat
                    );
                }
            }
        }
    }

    #[test]
    fn scale_invariance() {
        let base: Vec<BigUint> = (0..=30u64).map(|n| BigUint::from((n + 1) * (n + 1))).collect();
        let f1 = fit(&base);
        for c in [2u32, 17, 100] {
            let scaled: Vec<BigUint> = base.iter().map(|x| x * c).collect();
            let f2 = fit(&scaled);
            assert_eq!(f1.d_hat, f2.d_hat);
            assert!((f1.lambda_hat - f2.lambda_hat).abs() <= 0.001 * f1.lambda_hat.max(1.0));
        }
    }

    #[test]
    fn all_zero_tail_is_degenerate_bounded() {
        let seq = vec![BigUint::from(0u32); 15];
        let f = fit(&seq);
        assert!(f.degenerate);
        assert_eq!(f.classification, Classification::Bounded);
    }

    #[test]
    fn mixed_zero_tail_errors() {
        let mut seq = biguints(&[5; 20]);
        seq[18] = BigUint::from(0u32);
        assert!(matches!(
            fit_growth(&seq, &FitOptions::default()),
            Err(Error::NonPositiveTail)
        ));
    }

    #[test]
    fn too_short_errors() {
        let seq = biguints(&[1; 5]);
        assert!(matches!(
            fit_growth(&seq, &FitOptions::default()),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn power_consistency_examples() {
        // constant vs constant
        let c = vec![BigUint::from(4u32); 20];
        assert!(check_power_consistency(&c, &c, 2).unwrap());

        // fibonacci vs every-2nd fibonacci
        let mut fib = vec![BigUint::from(1u32), BigUint::from(2u32)];
        for i in 2..=40 {
            let next = &fib[i - 1] + &fib[i - 2];
            fib.push(next);
        }
        let even: Vec<BigUint> = fib.iter().step_by(2).cloned().collect();
        assert!(check_power_consistency(&fib[..20], &even, 2).unwrap());

        // negative control: linear vs quadratic
        let lin = biguints(&(1..=20u64).collect::<Vec<_>>());
        let quad: Vec<BigUint> = (1..=20u64).map(|n| BigUint::from(n * n)).collect();
        assert!(!check_power_consistency(&lin, &quad, 2).unwrap());
    }

    #[test]
    fn csv_round_trip() {
        let seq = biguints(&[0, 1, 4, 9]);
        let csv = to_csv(&seq);
        assert!(!csv.ends_with(char::is_whitespace));
        assert_eq!(from_csv(&csv).unwrap(), seq);
    }
}
