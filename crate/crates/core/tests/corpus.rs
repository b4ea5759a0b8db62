//! Generated documents read back through the public parser.

use qformula::genrand::{corpus_config, gen_classical_rof, meta_json, obfuscate, with_meta};
use qformula::ir::{parse_document, qformula_to_json, to_json_string, IrDocument};
use qformula::simulate::truth_table;
use qformula::{QFormula64, Tolerances64};

#[test]
fn generated_files_with_meta_parse_to_the_same_formula() {
    let tol = Tolerances64::default();
    let cfg = corpus_config(4);
    let q: QFormula64 = obfuscate(&gen_classical_rof(&cfg).unwrap(), &cfg).unwrap();
    let text = to_json_string(&with_meta(qformula_to_json(&q), meta_json(&cfg, "qformula")));
    let IrDocument::Quantum(back) = parse_document::<f64>(&text, &tol).unwrap() else {
        panic!("expected a quantum formula");
    };
    assert_eq!(truth_table(&back, &tol).unwrap().table, truth_table(&q, &tol).unwrap().table);
}

#[test]
fn seeded_generation_is_reproducible() {
    let a = gen_classical_rof(&corpus_config(9)).unwrap();
    let b = gen_classical_rof(&corpus_config(9)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, gen_classical_rof(&corpus_config(10)).unwrap());
}

#[test]
fn f32_and_f64_corpora_share_structure() {
    let cfg = corpus_config(2);
    let c = gen_classical_rof(&cfg).unwrap();
    let q64 = obfuscate::<f64>(&c, &cfg).unwrap();
    let q32 = obfuscate::<f32>(&c, &cfg).unwrap();
    let t32 = truth_table(&q32, &qformula::Tolerances32::default()).unwrap();
    assert!(t32.classical);
    assert_eq!(t32.table, truth_table(&q64, &Tolerances64::default()).unwrap().table);
}
