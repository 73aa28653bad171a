//! `polexp` — growth types of elements, conjugacy classes and palangres
//! under automorphism iteration, with exact analyzers and brute-force
//! oracles.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use polexp::abelian::{self, IntMatrix};
use polexp::automorphism::{parse_aut, Automorphism, TorusElement};
use polexp::ct::{CtMap, StratumClass};
use polexp::error::Error;
use polexp::fit::{fit_growth, to_csv, FitOptions, FittedGrowth};
use polexp::growth::{polexp_sum, GrowthType};
use polexp::report::{
    bound_json, fitted_json, growth_json, sequence_json, spectrum_json, table_json, Json,
};
use polexp::spectrum::{abelian_component_spectra, combination_bound, enumerate_spectrum, Spectrum};
use polexp::words::NormalWord;
use polexp::{Result, DEFAULT_BUDGET, LAMBDA_TOL_EMPIRICAL};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "polexp",
    about = "Growth types (d, λ) under iteration of automorphisms of free products of free-abelian and free groups"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Word-length growth |φⁿ(g)| of an element.
    Element {
        #[arg(long)]
        aut: PathBuf,
        #[arg(long)]
        word: String,
        /// Largest n of the iteration.
        #[arg(long, default_value_t = 25)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Conjugacy-length growth ‖φⁿ(g)‖ of a class.
    Class {
        #[arg(long)]
        aut: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 25)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Double-palangre growth |L_n(φᵏ,g)·R_n(φᵏ,h)| with the mapping-torus
    /// cross-check.
    Palangre {
        #[arg(long)]
        aut: PathBuf,
        #[arg(long)]
        g: String,
        #[arg(long)]
        h: String,
        /// Power of φ indexing the palangre.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Exact growth of ‖Aⁿv‖ for A ∈ GL(k,ℤ).
    Abelian {
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        vector: String,
        /// Analyze the partial sums ‖(I + A + … + Aⁿ⁻¹)v‖ instead.
        #[arg(long)]
        palangre: bool,
        /// Also print the exact oracle CSV up to this n.
        #[arg(long)]
        oracle: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Validate a declared train-track map and print its growth table.
    Ct {
        #[arg(long)]
        ct: PathBuf,
        /// Circuits to analyze (repeatable); predictions are checked against
        /// the iteration oracle.
        #[arg(long)]
        circuit: Vec<String>,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Empirical spectrum enumeration, and the combination bound when a
    /// train-track declaration is supplied.
    Spectrum {
        #[arg(long)]
        aut: PathBuf,
        #[arg(long)]
        ct: Option<PathBuf>,
        /// Enumerate cyclically reduced classes up to this word length.
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, default_value_t = 25)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// λ-tolerance for containment checks.
        #[arg(long, default_value_t = LAMBDA_TOL_EMPIRICAL)]
        tol_lambda: f64,
        /// ℓ¹ radius for the exact abelian component spectra.
        #[arg(long, default_value_t = 3)]
        radius: i64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Growth type of Σ (n-k)^d λ₁ᵏ λ₂ⁿ⁻ᵏ.
    Sum {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        l1: f64,
        #[arg(long)]
        l2: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_aut(path: &PathBuf) -> Result<Automorphism> {
    let text = std::fs::read_to_string(path)?;
    parse_aut(&path.display().to_string(), &text)
}

fn load_ct(path: &PathBuf) -> Result<CtMap> {
    let text = std::fs::read_to_string(path)?;
    CtMap::parse(&path.display().to_string(), &text)
}

fn print_sequence_report(
    label: &str,
    word: &str,
    seq: &[BigUint],
    fit: &FittedGrowth,
    extra: Vec<(&str, Json)>,
    format: Format,
) {
    match format {
        Format::Csv => println!("{}", to_csv(seq)),
        Format::Json => {
            let mut fields = vec![
                ("kind", Json::Str(label.to_string())),
                ("input", Json::Str(word.to_string())),
                ("sequence", sequence_json(seq)),
                ("fit", fitted_json(fit)),
            ];
            fields.extend(extra);
            print!("{}", Json::obj(fields).render());
        }
        Format::Text => {
            println!("{}", to_csv(seq));
            println!(
                "fitted growth: (d, λ) = ({}, {:.10})   [{}]{}",
                fit.d_hat,
                fit.lambda_hat,
                fit.classification,
                if fit.low_confidence {
                    "  (low confidence)"
                } else {
                    ""
                }
            );
            for (k, v) in extra {
                if let Json::Str(s) = v {
                    println!("{k}: {s}");
                }
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Element {
            aut,
            word,
            n,
            budget,
            format,
        } => {
            let phi = load_aut(&aut)?;
            let w = NormalWord::parse(&word, phi.spec())?;
            let mut seq = Vec::with_capacity(n + 1);
            let mut cur = w;
            for i in 0..=n {
                seq.push(cur.word_length());
                if i < n {
                    cur = phi.apply(&cur, budget)?;
                }
            }
            let fit = fit_growth(&seq, &FitOptions::default())?;
            print_sequence_report("element", &word, &seq, &fit, vec![], format);
        }
        Cmd::Class {
            aut,
            word,
            n,
            budget,
            format,
        } => {
            let phi = load_aut(&aut)?;
            let w = NormalWord::parse(&word, phi.spec())?;
            let mut seq = Vec::with_capacity(n + 1);
            let mut cur = w;
            for i in 0..=n {
                seq.push(cur.conj_length());
                if i < n {
                    cur = phi.apply(&cur, budget)?;
                }
            }
            let fit = fit_growth(&seq, &FitOptions::default())?;
            print_sequence_report("class", &word, &seq, &fit, vec![], format);
        }
        Cmd::Palangre {
            aut,
            g,
            h,
            k,
            n,
            budget,
            format,
        } => {
            let phi = load_aut(&aut)?;
            let gw = NormalWord::parse(&g, phi.spec())?;
            let hw = NormalWord::parse(&h, phi.spec())?;
            let phik = phi.power(k, budget)?;
            let mut seq = Vec::with_capacity(n + 1);
            for i in 0..=n {
                let left = phik.palangre_left(&gw, i, budget)?;
                let right = phik.palangre_right(&hw, i, budget)?;
                seq.push(left.concat(&right).word_length());
            }
            // mapping-torus cross-check at the last index
            let alpha = TorusElement::new(gw.clone(), k as i64);
            let beta = TorusElement::new(hw.invert(), k as i64);
            let via_torus =
                polexp::automorphism::torus_palangre(&alpha, &beta, &phi, n, budget)?;
            let lr = phik
                .palangre_left(&gw, n, budget)?
                .concat(&phik.palangre_right(&hw, n, budget)?);
            if via_torus != lr {
                return Err(Error::CrossCheck(
                    "torus power route disagrees with the palangre product".into(),
                ));
            }
            let fit = fit_growth(&seq, &FitOptions::default())?;
            print_sequence_report(
                "palangre",
                &format!("L_n(φ^{k},{g})·R_n(φ^{k},{h})"),
                &seq,
                &fit,
                vec![("torus_check", Json::Str("exact".into()))],
                format,
            );
        }
        Cmd::Abelian {
            matrix,
            vector,
            palangre,
            oracle,
            format,
        } => {
            let a = IntMatrix::parse(&matrix)?;
            let v = polexp::parse::parse_int_vector(&vector)?;
            let growth = if palangre {
                abelian::palangre_growth(&a, &v)?
            } else {
                abelian::orbit_growth(&a, &v)?
            };
            let poly_str = growth
                .poly
                .as_ref()
                .map(|p| abelian::poly_to_string(p));
            let oracle_seq = match oracle {
                Some(nn) if palangre => Some(abelian::palangre_oracle(&a, &v, nn)?),
                Some(nn) => Some(abelian::orbit_oracle(&a, &v, nn)?),
                None => None,
            };
            match format {
                Format::Json => {
                    let mut fields = vec![
                        ("kind", Json::Str("abelian".into())),
                        ("matrix", Json::Str(matrix.clone())),
                        ("vector", Json::Str(vector.clone())),
                        ("palangre", Json::Bool(palangre)),
                        ("growth", growth_json(&growth)),
                    ];
                    if let Some(seq) = &oracle_seq {
                        fields.push(("oracle", sequence_json(seq)));
                    }
                    print!("{}", Json::obj(fields).render());
                }
                _ => {
                    if growth.lambda == 1.0 {
                        println!("(d, λ) = ({}, 1)", growth.d);
                    } else {
                        println!("(d, λ) = ({}, {:.10})", growth.d, growth.lambda);
                    }
                    if let Some(p) = poly_str {
                        println!("λ is a root of {p}");
                    }
                    if let Some(seq) = &oracle_seq {
                        println!("{}", to_csv(seq));
                    }
                }
            }
        }
        Cmd::Ct {
            ct,
            circuit,
            n,
            budget,
            format,
        } => {
            let map = load_ct(&ct)?;
            let analysis = map.analyze()?;
            let mut circuit_reports = Vec::new();
            for text in &circuit {
                let c = map.parse_circuit(text)?;
                let predicted = analysis.circuit_growth(&c)?;
                let seq = map.circuit_oracle(&c, n, budget)?;
                let fitted = fit_growth(&seq, &FitOptions::default()).ok();
                circuit_reports.push((text.clone(), predicted, seq, fitted));
            }
            match format {
                Format::Json => {
                    let circuits = Json::Arr(
                        circuit_reports
                            .iter()
                            .map(|(text, predicted, seq, fitted)| {
                                let mut fields = vec![
                                    ("circuit", Json::Str(text.clone())),
                                    ("predicted", growth_json(predicted)),
                                    ("oracle", sequence_json(seq)),
                                ];
                                if let Some(f) = fitted {
                                    fields.push(("oracle_fit", fitted_json(f)));
                                }
                                print!("");
                                Json::obj(fields)
                            })
                            .collect(),
                    );
                    let report = Json::obj(vec![
                        ("kind", Json::Str("ct".into())),
                        ("table", table_json(&analysis.table)),
                        ("circuits", circuits),
                    ]);
                    print!("{}", report.render());
                }
                _ => {
                    print!("{}", analysis.table);
                    for (text, predicted, _, fitted) in &circuit_reports {
                        match fitted {
                            Some(f) => println!(
                                "circuit {text}: predicted {predicted}, oracle fit ({}, {:.10})",
                                f.d_hat, f.lambda_hat
                            ),
                            None => println!(
                                "circuit {text}: predicted {predicted} (oracle too short to fit)"
                            ),
                        }
                    }
                }
            }
        }
        Cmd::Spectrum {
            aut,
            ct,
            max_len,
            n,
            budget,
            tol_lambda,
            radius,
            format,
        } => {
            let phi = load_aut(&aut)?;
            let report = enumerate_spectrum(&phi, max_len, n, budget)?;
            let bound = match &ct {
                Some(path) => {
                    let map = load_ct(path)?;
                    let mut eigenvalues = Vec::new();
                    for s in map.classify_strata() {
                        if let StratumClass::Eg { lambda, charpoly } = s.class {
                            eigenvalues.push(GrowthType::with_poly(0, lambda, charpoly));
                        }
                    }
                    let mut components: Vec<(Spectrum, Spectrum)> = Vec::new();
                    for f in &map.decl().factors {
                        components.push(abelian_component_spectra(&f.matrix, radius)?);
                    }
                    for (_, entries) in &map.decl().component_spectra {
                        let s = Spectrum::empirical(entries.iter().cloned());
                        components.push((s.clone(), s));
                    }
                    let n_strata = map.classify_strata().len();
                    Some(combination_bound(&components, &eigenvalues, n_strata))
                }
                None => None,
            };
            let contained = bound
                .as_ref()
                .map(|b| b.contains_spectrum(&report.spectrum, tol_lambda));
            match format {
                Format::Json => {
                    let mut fields = vec![
                        ("kind", Json::Str("spectrum".into())),
                        ("spectrum", spectrum_json(&report)),
                    ];
                    if let Some(b) = &bound {
                        fields.push(("combination_bound", bound_json(b)));
                        fields.push(("contained", Json::Bool(contained.unwrap())));
                    }
                    print!("{}", Json::obj(fields).render());
                }
                _ => {
                    println!(
                        "empirical spectrum (lower bound, {} classes tested):",
                        report.n_classes
                    );
                    for (g, ws) in &report.witnesses {
                        println!("  {g}  e.g. {}", ws.first().cloned().unwrap_or_default());
                    }
                    if !report.skipped.is_empty() {
                        println!("skipped {} classes (budget)", report.skipped.len());
                    }
                    if let Some(b) = &bound {
                        println!("combination bound (degree cap {}):", b.degree_cap);
                        for g in b.entries.entries() {
                            println!("  {g}");
                        }
                        println!(
                            "containment: {}",
                            if contained.unwrap() { "ok" } else { "VIOLATED" }
                        );
                    }
                }
            }
            if contained == Some(false) {
                return Err(Error::CrossCheck(
                    "empirical spectrum escapes the combination bound".into(),
                ));
            }
        }
        Cmd::Sum { d, l1, l2 } => {
            if l1 < 1.0 || l2 < 1.0 {
                return Err(Error::Invalid("λ must be ≥ 1".into()));
            }
            let g = polexp_sum(d, l1, l2);
            if g.lambda == 1.0 {
                println!("({}, 1)", g.d);
            } else {
                println!("({}, {:.10})", g.d, g.lambda);
            }
        }
    }
    Ok(())
}
