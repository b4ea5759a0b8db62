//! Seeded generators for test corpora.
//!
//! Every generator draws from its own [`ChaCha8Rng`] seeded with
//! `seed_from_u64`, so outputs depend on the seed alone. Random numbers are
//! always drawn as `f64` and then converted, which keeps `f32` and `f64`
//! corpora structurally identical.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::ir::{BoolCircuit, CFormula, QFormula, QNode, TruthTable};
use crate::qlinalg::{Channel, Cx, DensityMatrix, Mat, Tolerances};
use crate::scalar::Real;
use crate::toffoli::enumerate_f_tof;

/// Name of the generator recorded in every emitted header.
pub const PRNG_NAME: &str = "ChaCha8Rng/seed_from_u64 (rand_chacha 0.9)";

pub type GenRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` for the same seed.
pub fn rng_stream(seed: u64, stream: u64) -> GenRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator configuration: {0}")]
    BadConfig(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_vars: usize,
    pub max_depth: usize,
    pub max_arity: usize,
    pub noise: f64,
    pub obfuscation_rounds: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_vars: 10,
            max_depth: 4,
            max_arity: 3,
            noise: 0.0,
            obfuscation_rounds: 1,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::BadConfig(m));
        if self.max_vars == 0 || self.max_vars > 20 {
            return bad(format!("max_vars {} outside 1..=20", self.max_vars));
        }
        if !(2..=6).contains(&self.max_arity) {
            return bad(format!("max_arity {} outside 2..=6", self.max_arity));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return bad(format!("noise {} outside [0, 1)", self.noise));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "max_vars": self.max_vars,
            "max_depth": self.max_depth,
            "max_arity": self.max_arity,
            "noise": self.noise,
            "obfuscation_rounds": self.obfuscation_rounds,
        })
    }
}

/// `{"seed", "config", "prng"}` header for generated files.
pub fn meta_json(cfg: &GenConfig, kind: &str) -> Value {
    json!({ "seed": cfg.seed, "kind": kind, "config": cfg.to_json(), "prng": PRNG_NAME })
}

/// Adds a `"meta"` key to a document object.
pub fn with_meta(doc: Value, meta: Value) -> Value {
    match doc {
        Value::Object(mut obj) => {
            obj.insert("meta".into(), meta);
            Value::Object(obj)
        }
        other => {
            let mut obj = Map::new();
            obj.insert("meta".into(), meta);
            obj.insert("document".into(), other);
            Value::Object(obj)
        }
    }
}

fn gaussian(rng: &mut GenRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Haar-random unitary: QR of a complex Gaussian matrix. Gram-Schmidt
/// leaves `R` with a positive real diagonal, which is the phase
/// normalization that makes `Q` Haar distributed.
pub fn haar_unitary<T: Real>(rng: &mut GenRng, dim: usize) -> Mat<T> {
    loop {
        let data = (0..dim * dim)
            .map(|_| {
                let re = gaussian(rng);
                let im = gaussian(rng);
                Cx::new(T::of(re), T::of(im))
            })
            .collect();
        let g = Mat::from_vec(dim, dim, data).expect("square");
        if let Ok((q, _)) = g.qr() {
            return q;
        }
    }
}

pub fn random_pure_state<T: Real>(rng: &mut GenRng, qubits: usize) -> DensityMatrix<T> {
    let u = haar_unitary::<T>(rng, 1 << qubits);
    DensityMatrix::pure(&u.column(0)).expect("unit vector")
}

/// Random spectrum in a Haar-random eigenbasis.
pub fn random_mixed_state<T: Real>(rng: &mut GenRng, qubits: usize) -> DensityMatrix<T> {
    let d = 1usize << qubits;
    let weights: Vec<f64> = (0..d).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = weights.iter().sum();
    let mut diag = Mat::zeros(d, d);
    for (i, w) in weights.iter().enumerate() {
        diag.set(i, i, Cx::new(T::of(w / total), T::zero()));
    }
    let u = haar_unitary::<T>(rng, d);
    DensityMatrix::from_mat_unchecked(diag.conjugate_by(&u).expect("same size"))
}

/// Random channel from a Haar isometry (Stinespring form) with `kraus_count` operators.
pub fn random_channel<T: Real>(rng: &mut GenRng, in_qubits: usize, out_qubits: usize, kraus_count: usize) -> Channel<T> {
    let din = 1usize << in_qubits;
    let dout = 1usize << out_qubits;
    let mut r = kraus_count.max(1);
    while dout * r < din {
        r += 1;
    }
    let w = haar_unitary::<T>(rng, dout * r);
    let kraus = (0..r)
        .map(|block| {
            let mut k = Mat::zeros(dout, din);
            for i in 0..dout {
                for j in 0..din {
                    k.set(i, j, w.get(block * dout + i, j));
                }
            }
            k
        })
        .collect();
    Channel::from_kraus_unchecked(in_qubits, kraus).expect("consistent shapes")
}

/// Single-qubit channel drawn from a pool mixing classical-preserving
/// dressings (identity, X, basis preparations) with generic ones, so that
/// dressed gates yield both classical and non-classical outputs.
pub fn random_dressing<T: Real>(rng: &mut GenRng) -> Channel<T> {
    let tol = Tolerances::default();
    let unit = |m: Mat<T>| Channel::unitary(m, &tol).expect("unitary constant");
    match rng.random_range(0..10u32) {
        0 | 1 => Channel::identity(1),
        2 | 3 => unit(Mat::pauli_x()),
        4 => unit(Mat::hadamard()),
        5 => Channel::preparation(&DensityMatrix::basis(rng.random_bool(0.5))),
        6 => Channel::preparation(&if rng.random_bool(0.5) {
            DensityMatrix::plus()
        } else {
            DensityMatrix::minus()
        }),
        7 => unit(haar_unitary(rng, 2)),
        8 => Channel::preparation(&random_mixed_state(rng, 1)),
        _ => {
            // Half unitary conjugation, half preparation.
            let u = haar_unitary::<T>(rng, 2);
            let s = random_pure_state::<T>(rng, 1);
            let half = T::of(0.5).sqrt();
            let mut kraus = vec![u.scale_real(half)];
            kraus.extend(Channel::preparation(&s).kraus().iter().map(|k| k.scale_real(half)));
            Channel::from_kraus_unchecked(1, kraus).expect("2x2 operators")
        }
    }
}

fn random_table(rng: &mut GenRng, m: usize) -> TruthTable {
    match rng.random_range(0..3u32) {
        0 => TruthTable::parity(m),
        1 => {
            let family = enumerate_f_tof(m).expect("arity in range");
            let idx = rng.random_range(0..family.len());
            family.iter().nth(idx).expect("index in range").clone()
        }
        _ => TruthTable::new(m, (0..1usize << m).map(|_| rng.random_bool(0.5)).collect()).expect("2^m entries"),
    }
}

fn maybe_not(rng: &mut GenRng, f: CFormula) -> CFormula {
    if rng.random_bool(0.1) {
        CFormula::gate("10".parse().expect("NOT table"), vec![f]).expect("arity 1")
    } else {
        f
    }
}

fn gen_shape(rng: &mut GenRng, depth_left: usize, budget: usize, max_arity: usize, root: bool) -> CFormula {
    if depth_left == 0 || budget < 2 || (!root && rng.random_bool(0.25)) {
        return maybe_not(rng, CFormula::Leaf(0));
    }
    let m = rng.random_range(2..=max_arity.min(budget));
    let mut budgets = vec![1usize; m];
    for _ in 0..budget - m {
        let k = rng.random_range(0..m);
        budgets[k] += 1;
    }
    let children = budgets
        .into_iter()
        .map(|b| gen_shape(rng, depth_left - 1, b, max_arity, false))
        .collect();
    let table = random_table(rng, m);
    maybe_not(rng, CFormula::gate(table, children).expect("arity matches"))
}

fn relabel(f: &CFormula, labels: &mut impl Iterator<Item = usize>) -> CFormula {
    match f {
        CFormula::Leaf(_) => CFormula::Leaf(labels.next().expect("one label per leaf")),
        CFormula::Gate { table, children } => CFormula::Gate {
            table: table.clone(),
            children: children.iter().map(|c| relabel(c, labels)).collect(),
        },
    }
}

/// Random read-once classical formula over parity, Toffoli-family and
/// random tables, with occasional NOT gates; variables are a random
/// permutation of `0..leaves`. Formulas computing a constant are redrawn.
pub fn gen_classical_rof(cfg: &GenConfig) -> Result<CFormula, GenError> {
    cfg.validate()?;
    let mut rng = rng_stream(cfg.seed, 0);
    loop {
        let budget = if cfg.max_vars < 2 { 1 } else { rng.random_range(2..=cfg.max_vars) };
        let shape = gen_shape(&mut rng, cfg.max_depth, budget, cfg.max_arity, true);
        let leaves = crate::ir::FormulaShape::leaf_vars(&shape).len();
        let mut perm: Vec<usize> = (0..leaves).collect();
        perm.shuffle(&mut rng);
        let f = relabel(&shape, &mut perm.into_iter());
        if !computes_constant(&f) {
            return Ok(f);
        }
    }
}

fn computes_constant(f: &CFormula) -> bool {
    let vars = crate::ir::FormulaShape::variables(f);
    let first = crate::simulate::eval_cformula(f, &crate::simulate::assignment(&vars, 0)).expect("assigned");
    (1..1usize << vars.len())
        .all(|i| crate::simulate::eval_cformula(f, &crate::simulate::assignment(&vars, i)).expect("assigned") == first)
}

fn embed_on_wire<T: Real>(u: &Mat<T>, wire: usize, arity: usize) -> Mat<T> {
    Mat::identity(1 << wire)
        .kron(u)
        .kron(&Mat::identity(1 << (arity - wire - 1)))
}

fn obfuscate_once<T: Real>(f: &QFormula<T>, rng: &mut GenRng, tol: &Tolerances<T>) -> QFormula<T> {
    let QNode::Gate(g) = &f.node else { return f.clone() };
    let m = g.children.len();
    let mut g = g.clone();
    for k in 0..m {
        let child = obfuscate_once(&g.children[k], rng, tol);
        let u = haar_unitary::<T>(rng, 2);
        let uc = Channel::unitary(u.clone(), tol).expect("Haar unitary");
        if g.pre[k].is_none() && rng.random_bool(0.5) {
            g.children[k] = child.append_out(&uc);
        } else {
            g.children[k] = child;
            g.pre[k] = Some(match &g.pre[k] {
                Some(p) => p.then(&uc).expect("single-qubit chain"),
                None => uc,
            });
        }
        g.channel = g
            .channel
            .after_unitary(&embed_on_wire(&u.adjoint(), k, m))
            .expect("dimensions match");
    }
    QFormula {
        node: QNode::Gate(g),
        out: f.out.clone(),
    }
}

/// Lifts `f` to permutation channels and hides every wire behind a
/// Haar-random unitary whose adjoint is fused into the consuming gate.
pub fn obfuscate<T: Real>(f: &CFormula, cfg: &GenConfig) -> Result<QFormula<T>, GenError> {
    cfg.validate()?;
    let tol = Tolerances::default();
    let mut rng = rng_stream(cfg.seed, 1);
    let mut q = f.to_qformula::<T>();
    for _ in 0..cfg.obfuscation_rounds {
        q = obfuscate_once(&q, &mut rng, &tol);
    }
    Ok(q)
}

/// Composes a depolarizing channel of strength `noise` once onto every
/// wire entering a multi-input gate, leaves included. One-input gates are
/// single-qubit operations on a wire and do not start a new one.
pub fn add_noise<T: Real>(f: &QFormula<T>, noise: T) -> QFormula<T> {
    let QNode::Gate(g) = &f.node else { return f.clone() };
    let dep = Channel::depolarizing(noise);
    let mut g = g.clone();
    let multi = g.children.len() >= 2;
    for k in 0..g.children.len() {
        g.children[k] = add_noise(&g.children[k], noise);
        if multi {
            g.pre[k] = Some(match &g.pre[k] {
                Some(p) => p.then(&dep).expect("single-qubit chain"),
                None => dep.clone(),
            });
        }
    }
    QFormula {
        node: QNode::Gate(g),
        out: f.out.clone(),
    }
}

/// Configuration for entry `index` of the standard formula corpus
/// (at most 10 variables, depth 4 and arity 3).
pub fn corpus_config(index: u64) -> GenConfig {
    GenConfig {
        seed: 1000 + index,
        ..GenConfig::default()
    }
}

/// Random AND/OR/NOT tree of depth at most `max_depth` over `num_vars` variables.
pub fn gen_circuit(rng: &mut GenRng, num_vars: usize, max_depth: usize) -> BoolCircuit {
    let node = if max_depth == 0 || rng.random_bool(0.15) {
        BoolCircuit::var(rng.random_range(0..num_vars.max(1)))
    } else {
        let a = gen_circuit(rng, num_vars, max_depth - 1);
        let b = gen_circuit(rng, num_vars, max_depth - 1);
        if rng.random_bool(0.5) {
            BoolCircuit::and(a, b)
        } else {
            BoolCircuit::or(a, b)
        }
    };
    if rng.random_bool(0.2) {
        BoolCircuit::not(node)
    } else {
        node
    }
}

/// Binary tree shapes of depth at most `d`; `None` is a leaf.
#[derive(Clone, Debug)]
enum Shape {
    Leaf,
    Node(Box<Shape>, Box<Shape>),
}

fn shapes(d: usize) -> Vec<Shape> {
    let mut out = vec![Shape::Leaf];
    if d > 0 {
        let sub = shapes(d - 1);
        for a in &sub {
            for b in &sub {
                out.push(Shape::Node(Box::new(a.clone()), Box::new(b.clone())));
            }
        }
    }
    out
}

fn gates_in(s: &Shape) -> usize {
    match s {
        Shape::Leaf => 0,
        Shape::Node(a, b) => 1 + gates_in(a) + gates_in(b),
    }
}

fn label_shape(s: &Shape, ops: &mut impl Iterator<Item = bool>, leaf: &mut usize, num_vars: usize, negate: bool) -> BoolCircuit {
    match s {
        Shape::Leaf => {
            let v = *leaf % num_vars;
            *leaf += 1;
            if negate && v % 2 == 1 {
                BoolCircuit::not(BoolCircuit::var(v))
            } else {
                BoolCircuit::var(v)
            }
        }
        Shape::Node(a, b) => {
            let is_and = ops.next().expect("one op per gate");
            let l = label_shape(a, ops, leaf, num_vars, negate);
            let r = label_shape(b, ops, leaf, num_vars, negate);
            if is_and {
                BoolCircuit::and(l, r)
            } else {
                BoolCircuit::or(l, r)
            }
        }
    }
}

/// Structured exhaustive corpus: every binary tree shape of depth at most
/// `max_depth`, every AND/OR labelling of its gates, leaves cycling through
/// `num_vars` variables, each with and without NOT on odd variables and on
/// the root.
pub fn structured_circuits(max_depth: usize, num_vars: usize) -> Vec<BoolCircuit> {
    let mut out = Vec::new();
    for s in shapes(max_depth) {
        let g = gates_in(&s);
        for labels in 0..1usize << g {
            for negate in [false, true] {
                let mut ops = (0..g).map(|i| (labels >> i) & 1 == 1);
                let c = label_shape(&s, &mut ops, &mut 0, num_vars, negate);
                out.push(c.clone());
                out.push(BoolCircuit::not(c));
            }
        }
    }
    out
}

/// Random formula over NOT, XOR and constant gates; variables may repeat.
pub fn gen_affine_formula(rng: &mut GenRng, num_vars: usize, max_depth: usize) -> CFormula {
    if max_depth == 0 || rng.random_bool(0.2) {
        return CFormula::Leaf(rng.random_range(0..num_vars.max(1)));
    }
    let tables = ["10", "0110", "1001", "0000", "1111", "00", "11"];
    let t: TruthTable = tables.choose(rng).expect("nonempty").parse().expect("valid table");
    let children = (0..t.arity()).map(|_| gen_affine_formula(rng, num_vars, max_depth - 1)).collect();
    CFormula::gate(t, children).expect("arity matches")
}
