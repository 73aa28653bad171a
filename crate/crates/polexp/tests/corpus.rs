//! Corpus-wide checks: every bundled declaration loads and validates, the
//! symbolic growth table matches the brute-force length oracle on test
//! circuits, declared INPs are length-invariant, exceptional paths drift
//! affinely, and circuit growth transfers to conjugacy growth of the
//! corresponding fundamental-group words.

use std::path::PathBuf;

use polexp::automorphism::{parse_aut, Automorphism};
use polexp::ct::CtMap;
use polexp::fit::{fit_growth, FitOptions};
use polexp::growth::{lambda_eq_tol, GrowthType};
use polexp::DEFAULT_BUDGET;

fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

fn load_ct(name: &str) -> CtMap {
    let text = std::fs::read_to_string(corpus_path(name)).expect("corpus file");
    CtMap::parse(name, &text).unwrap_or_else(|e| panic!("loading {name}: {e}"))
}

fn load_aut(name: &str) -> Automorphism {
    let text = std::fs::read_to_string(corpus_path(name)).expect("corpus file");
    parse_aut(name, &text).unwrap_or_else(|e| panic!("loading {name}: {e}"))
}

const PHI: f64 = 1.618033988749895;

/// (ct file, test circuits, expected edge growths, oracle n_max)
fn corpus_expectations() -> Vec<(&'static str, Vec<&'static str>, Vec<(&'static str, u32, f64)>, usize)> {
    vec![
        (
            "fib.ct",
            vec!["a", "a b", "a B"],
            vec![("a", 0, PHI), ("b", 0, PHI)],
            22,
        ),
        (
            "bg.ct",
            vec!["b", "a", "b a b"],
            vec![("a", 0, 1.0), ("b", 1, 1.0)],
            30,
        ),
        (
            "neg_tower.ct",
            vec!["c", "b", "c a", "c B"],
            vec![("a", 0, 1.0), ("b", 1, 1.0), ("c", 2, 1.0)],
            36,
        ),
        (
            "zhub.ct",
            vec!["a", "a g1[0,1]"],
            vec![("a", 0, 1.0)],
            30,
        ),
        (
            "bump.ct",
            vec!["a", "b a"],
            vec![("a", 1, PHI), ("b", 1, PHI)],
            24,
        ),
        (
            "inherit.ct",
            vec!["c", "c d"],
            vec![("c", 0, 2.618033988749895), ("d", 0, 2.618033988749895)],
            22,
        ),
        (
            "exc.ct",
            vec!["b a C", "b A C", "b a a C", "c", "b"],
            vec![("a", 0, 1.0), ("b", 1, 1.0), ("c", 1, 1.0)],
            40,
        ),
        (
            "zero.ct",
            vec!["e ~z", "a", "a b"],
            vec![("a", 0, PHI), ("b", 0, PHI), ("e", 0, PHI)],
            22,
        ),
        (
            "tail2.ct",
            vec!["e ~z2 ~z1", "a b"],
            vec![("a", 0, PHI), ("b", 0, PHI), ("e", 0, PHI)],
            22,
        ),
        (
            "surf.ct",
            vec!["a b"],
            vec![("a", 0, PHI), ("b", 0, PHI)],
            22,
        ),
    ]
}

#[test]
fn tables_match_expected_growths() {
    for (file, _, expected, _) in corpus_expectations() {
        let ct = load_ct(file);
        let analysis = ct.analyze().unwrap_or_else(|e| panic!("{file}: {e}"));
        for (edge, d, lambda) in expected {
            let g = analysis
                .edge_growth(edge)
                .unwrap_or_else(|| panic!("{file}: no growth for edge {edge}"));
            assert_eq!(g.d, d, "{file}: degree of edge {edge}, got {g}");
            assert!(
                lambda_eq_tol(g.lambda, lambda, 1e-8),
                "{file}: λ of edge {edge}: want {lambda}, got {}",
                g.lambda
            );
        }
    }
}

#[test]
fn predictions_match_oracle_on_circuits() {
    for (file, circuits, _, n_max) in corpus_expectations() {
        let ct = load_ct(file);
        let analysis = ct.analyze().unwrap_or_else(|e| panic!("{file}: {e}"));
        for text in circuits {
            let circuit = ct
                .parse_circuit(text)
                .unwrap_or_else(|e| panic!("{file}: circuit `{text}`: {e}"));
            let predicted = analysis
                .circuit_growth(&circuit)
                .unwrap_or_else(|e| panic!("{file}: growth of `{text}`: {e}"));
            let seq = ct
                .circuit_oracle(&circuit, n_max, DEFAULT_BUDGET)
                .unwrap_or_else(|e| panic!("{file}: oracle for `{text}`: {e}"));
            let fitted = fit_growth(&seq, &FitOptions::default())
                .unwrap_or_else(|e| panic!("{file}: fit for `{text}`: {e}"));
            assert_eq!(
                fitted.d_hat, predicted.d,
                "{file}: degree for circuit `{text}` (predicted {predicted}, fitted ({}, {}))",
                fitted.d_hat, fitted.lambda_hat
            );
            assert!(
                lambda_eq_tol(fitted.lambda_hat, predicted.lambda, 0.02),
                "{file}: λ for circuit `{text}`: predicted {}, fitted {}",
                predicted.lambda,
                fitted.lambda_hat
            );
        }
    }
}

#[test]
fn declared_inps_are_length_invariant() {
    for (file, _, _, _) in corpus_expectations() {
        let ct = load_ct(file);
        let m = ct.machine();
        for inp in &m.inps {
            let mut p = inp.path.clone();
            let len0 = p.path_length();
            for n in 1..=12 {
                p = m.f_sharp_path(&p, DEFAULT_BUDGET).unwrap();
                assert_eq!(
                    p.path_length(),
                    len0,
                    "{file}: INP `{}` changed length at power {n}",
                    inp.name
                );
            }
        }
    }
}

#[test]
fn exceptional_paths_drift_affinely() {
    let ct = load_ct("exc.ct");
    // circuit b a^p C has length (2 + p) + n·|d-d'|·|w| after n applications
    let circuit = ct.parse_circuit("b a a a C").unwrap();
    let seq = ct.circuit_oracle(&circuit, 12, DEFAULT_BUDGET).unwrap();
    for (n, len) in seq.iter().enumerate() {
        assert_eq!(
            *len,
            (5 + n).into(),
            "exceptional drift must be exactly affine with slope |d-d'|·|w| = 1"
        );
    }
}

#[test]
fn term_layer_agrees_with_raw_layer() {
    for (file, _, _, _) in corpus_expectations() {
        let ct = load_ct(file);
        let m = ct.machine();
        for (id, split) in m.edge_splits.iter().enumerate() {
            if let Some(s) = split {
                assert!(
                    m.check_layers_agree(s).unwrap(),
                    "{file}: term-level f♯ deviates from raw f♯ on the image of `{}`",
                    m.decl.edges[id].name
                );
            }
        }
    }
}

#[test]
fn stabilization_powers() {
    assert_eq!(load_ct("fib.ct").vertex_stabilization_power(), 1);
    assert_eq!(load_ct("zero.ct").vertex_stabilization_power(), 1);
    assert_eq!(load_ct("tail2.ct").vertex_stabilization_power(), 2);
}

/// Conjugacy transfer: the fitted growth of circuit lengths matches the
/// fitted growth of conjugacy lengths of the corresponding word under the
/// paired automorphism (same outer class).
#[test]
fn circuit_growth_transfers_to_word_growth() {
    let pairs: Vec<(&str, &str, Vec<&str>, usize)> = vec![
        ("fib.ct", "fib.aut", vec!["a b", "a B"], 22),
        ("bg.ct", "bg.aut", vec!["b", "b a b"], 30),
        ("neg_tower.ct", "neg_tower.aut", vec!["c", "c a"], 32),
        ("zhub.ct", "zhub.aut", vec!["a g1[0,1]", "a"], 25),
        ("bump.ct", "bump.aut", vec!["a", "b a"], 22),
        ("inherit.ct", "inherit.aut", vec!["c", "c d"], 20),
        ("exc.ct", "exc.aut", vec!["b a C", "c"], 32),
        ("zero.ct", "zero.aut", vec!["e ~z"], 22),
        ("tail2.ct", "tail2.aut", vec!["e ~z2 ~z1"], 22),
    ];
    let opts = FitOptions::default();
    for (ct_file, aut_file, circuits, n_max) in pairs {
        let ct = load_ct(ct_file);
        let phi = load_aut(aut_file);
        for text in circuits {
            let circuit = ct.parse_circuit(text).unwrap();
            let (spec, word) = ct.circuit_to_word(&circuit).unwrap();
            assert_eq!(&spec, phi.spec(), "{ct_file}/{aut_file}: group specs");
            let ct_seq = ct.circuit_oracle(&circuit, n_max, DEFAULT_BUDGET).unwrap();
            let mut word_seq = Vec::with_capacity(n_max + 1);
            let mut cur = word.clone();
            for n in 0..=n_max {
                word_seq.push(cur.conj_length());
                if n < n_max {
                    cur = phi.apply(&cur, DEFAULT_BUDGET).unwrap();
                }
            }
            let f_ct = fit_growth(&ct_seq, &opts).unwrap();
            let f_w = fit_growth(&word_seq, &opts).unwrap();
            assert_eq!(
                f_ct.d_hat, f_w.d_hat,
                "{ct_file}: circuit `{text}` degree (circuit {} vs word {})",
                f_ct.d_hat, f_w.d_hat
            );
            assert!(
                lambda_eq_tol(f_ct.lambda_hat, f_w.lambda_hat, 0.02),
                "{ct_file}: circuit `{text}` λ (circuit {} vs word {})",
                f_ct.lambda_hat,
                f_w.lambda_hat
            );
        }
    }
}

#[test]
fn fat_turn_examples() {
    // matrix [[2,1],[1,1]], translation (1,0), start 0: palangre growth
    let ct = load_ct("zhub.ct");
    let g = ct.fat_turn_growth("a", "g1[1,0]", "a").unwrap();
    assert_eq!(g.d, 0);
    assert!(lambda_eq_tol(g.lambda, 2.618033988749895, 1e-8));

    // bump's stratum processing inspects the fat turn inside the image of a
    let table = load_ct("bump.ct").analyze().unwrap().table;
    assert!(
        !table.fat_turns.is_empty(),
        "bump analysis must record the junction turn of image(a)"
    );
}

#[test]
fn classification_reports() {
    use polexp::ct::StratumClass;
    let ct = load_ct("neg_tower.ct");
    let strata = ct.classify_strata();
    assert!(matches!(
        strata[0].class,
        StratumClass::Neg { fixed: true, .. }
    ));
    assert!(matches!(
        strata[1].class,
        StratumClass::Neg {
            linear: true,
            fixed: false
        }
    ));

    let ct = load_ct("fib.ct");
    let strata = ct.classify_strata();
    let StratumClass::Eg { lambda, ref charpoly } = strata[0].class else {
        panic!("fib stratum must be EG");
    };
    assert!(lambda_eq_tol(lambda, PHI, 1e-10));
    // x^2 - x - 1
    let cp: Vec<i64> = charpoly.iter().map(|c| i64::try_from(c).unwrap()).collect();
    assert_eq!(cp, vec![-1, -1, 1]);

    let ct = load_ct("zero.ct");
    let strata = ct.classify_strata();
    assert!(matches!(strata[1].class, StratumClass::Zero));
}

#[test]
fn growth_is_f_sharp_invariant_on_circuits() {
    let ct = load_ct("fib.ct");
    let analysis = ct.analyze().unwrap();
    let c = ct.parse_circuit("a B").unwrap();
    let g0 = analysis.circuit_growth(&c).unwrap();
    let c1 = ct.f_sharp_circuit(&c, DEFAULT_BUDGET).unwrap();
    let g1 = analysis.circuit_growth(&c1).unwrap();
    assert_eq!(g0.d, g1.d);
    assert!(lambda_eq_tol(g0.lambda, g1.lambda, 1e-9));
}

#[test]
fn paired_automorphisms_share_outer_class_data() {
    // bg.aut is the twist of the bg.ct fundamental-group map by b
    let phi = load_aut("bg.aut");
    let spec = phi.spec().clone();
    let psi_text = "group { free = 2 }\nmap a -> a\nmap b -> b a\ninverse {\nmap a -> a\nmap b -> b A\n}\n";
    let psi = parse_aut("psi", psi_text).unwrap();
    let b = polexp::words::NormalWord::parse("b", &spec).unwrap();
    let twisted = psi.twist_by_element(&b, DEFAULT_BUDGET).unwrap();
    for g in phi.generators() {
        assert_eq!(
            twisted.apply(&g, DEFAULT_BUDGET).unwrap(),
            phi.apply(&g, DEFAULT_BUDGET).unwrap()
        );
    }
}

#[test]
fn component_spectrum_parses() {
    let ct = load_ct("surf.ct");
    let spectra = &ct.decl().component_spectra;
    assert_eq!(spectra.len(), 1);
    assert_eq!(spectra[0].1.len(), 2);
    assert!((spectra[0].1[1].lambda - 2.296630262886).abs() < 1e-12);
}

#[test]
fn invalid_declarations_are_rejected() {
    // reducible "EG" stratum: two edges swapping
    let bad = "vertex v\nedge a v v height 1\nedge b v v height 1\nimage a -> b\nimage b -> a\n";
    let err = CtMap::parse("bad", bad).unwrap_err();
    assert!(err.to_string().contains("stratum"), "{err}");

    // edge flip
    let bad = "vertex v\nedge a v v height 1\nimage a -> A\n";
    assert!(CtMap::parse("bad", bad).is_err());

    // fat vertex in a zero stratum
    let bad = "factor g1 rank 1 matrix [[1]]\nvertex w fat g1\n\
               edge c w w height 1\nedge z w w height 2\n\
               image c -> c\nimage z -> c\n";
    let err = CtMap::parse("bad", bad).unwrap_err();
    assert!(err.to_string().contains("zero"), "{err}");

    // image not tight
    let bad = "vertex v\nedge a v v height 1\nimage a -> a b B\nedge b v v height 1\nimage b -> b a\n";
    assert!(CtMap::parse("bad", bad).is_err());
}

#[test]
fn growth_type_of_trivial_and_exceptional_loops() {
    let ct = load_ct("exc.ct");
    let analysis = ct.analyze().unwrap();
    // single INP-edge loop
    let c = ct.parse_circuit("a").unwrap();
    let g = analysis.circuit_growth(&c).unwrap();
    assert!(g.is_bounded());
    // exceptional circuit
    let c = ct.parse_circuit("b a C").unwrap();
    let g = analysis.circuit_growth(&c).unwrap();
    assert_eq!((g.d, g.lambda), (1, 1.0));
}
