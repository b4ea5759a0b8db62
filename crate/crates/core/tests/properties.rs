use proptest::prelude::*;

use qformula::dequantize::dequantize_exact;
use qformula::genrand::{
    gen_circuit, gen_classical_rof, obfuscate, random_channel, random_mixed_state, rng_from_seed, GenConfig,
};
use qformula::ir::{parse_qformula, serialize_qformula, FormulaShape};
use qformula::oqp::compile;
use qformula::qlinalg::trace_distance;
use qformula::simulate::{eval_circuit, eval_qformula, truth_table};
use qformula::{QFormula64, Tolerances64};

fn tol() -> Tolerances64 {
    Tolerances64::default()
}

fn small_config(seed: u64) -> GenConfig {
    GenConfig {
        seed,
        max_vars: 6,
        max_depth: 3,
        ..GenConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn channels_never_increase_distance(seed in any::<u64>(), qubits in 1usize..=2, kraus in 1usize..=4) {
        let mut rng = rng_from_seed(seed);
        let ch = random_channel::<f64>(&mut rng, qubits, 1, kraus);
        prop_assert!(ch.completeness_deviation() < 1e-9);
        let (a, b) = (random_mixed_state(&mut rng, qubits), random_mixed_state(&mut rng, qubits));
        let before = trace_distance(&a, &b).unwrap();
        let after = trace_distance(&ch.apply(&a).unwrap(), &ch.apply(&b).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-9);
    }

    #[test]
    fn exact_dequantization_preserves_function_and_shape(seed in any::<u64>()) {
        let cfg = small_config(seed);
        let c = gen_classical_rof(&cfg).unwrap();
        let q = obfuscate::<f64>(&c, &cfg).unwrap();
        let out = dequantize_exact(&q, &tol()).unwrap();
        prop_assert_eq!(truth_table(&out.cformula, &tol()).unwrap().table, truth_table(&c, &tol()).unwrap().table);
        prop_assert_eq!(out.cformula.size_and_depth(), q.size_and_depth());
        prop_assert!(out.certificates_valid(&tol()));
    }

    #[test]
    fn serialization_preserves_semantics(seed in any::<u64>()) {
        let cfg = small_config(seed);
        let q = obfuscate::<f64>(&gen_classical_rof(&cfg).unwrap(), &cfg).unwrap();
        let text = serialize_qformula(&q);
        let back: QFormula64 = parse_qformula(&text, &tol()).unwrap();
        prop_assert_eq!(serialize_qformula(&back), text);
        let vars = q.variables();
        let x: Vec<bool> = (0..=*vars.last().unwrap()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
        let (a, b) = (eval_qformula(&q, &x).unwrap(), eval_qformula(&back, &x).unwrap());
        prop_assert!(trace_distance(&a, &b).unwrap() <= 1e-12);
    }

    #[test]
    fn compiled_programs_agree_on_one_input(seed in any::<u64>(), vars in 1usize..=6, depth in 0usize..=4) {
        let c = gen_circuit(&mut rng_from_seed(seed), vars, depth);
        let rep = compile::<f64>(&c);
        prop_assert!(rep.length as u128 <= rep.bound);
        let x: Vec<bool> = (0..vars).map(|i| (seed >> i) & 1 == 1).collect();
        let expect = f64::from(u8::from(eval_circuit(&c, &x).unwrap()));
        let got = qformula::simulate::eval_oqp(&rep.program, &x).unwrap().prob_one();
        prop_assert!((got - expect).abs() <= 1e-9);
    }
}
