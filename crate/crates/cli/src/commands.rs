//! Subcommand implementations and the error-to-exit-code mapping.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use qformula::dequantize::{dequantize_bounded, dequantize_exact, DequantizeError, ErrorBudget};
use qformula::genrand::{
    add_noise, gen_circuit, gen_classical_rof, meta_json, obfuscate, rng_stream, with_meta, GenConfig,
};
use qformula::ir::{
    circuit_to_json, cformula_to_json, mat_to_json, parse_document, qformula_to_json, serialize_cformula,
    serialize_program, to_json_string, IrDocument, TruthTable,
};
use qformula::oqp::{affine_check as is_affine, compile};
use qformula::qlinalg::{is_classical_state, Channel, Mat};
use qformula::simulate::{enumerate, truth_table, SimError, SimOutput, Simulable, MAX_ENUM_VARS};
use qformula::toffoli::{classify_depth_one, enumerate_f_tof, SingleBitGate, ToffoliError};
use qformula::{QFormula64, Tolerances64};

pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_EVAL: u8 = 3;
pub const EXIT_TRANSFORM: u8 = 4;
pub const EXIT_USAGE: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        Self::new(EXIT_EVAL, e.to_string())
    }
}

impl From<DequantizeError> for CliError {
    fn from(e: DequantizeError) -> Self {
        let code = match e {
            DequantizeError::TooManyVariables { .. } | DequantizeError::Sim(_) | DequantizeError::Linalg(_) => EXIT_EVAL,
            DequantizeError::BadBudget(_) => EXIT_USAGE,
            _ => EXIT_TRANSFORM,
        };
        Self::new(code, e.to_string())
    }
}

impl From<ToffoliError> for CliError {
    fn from(e: ToffoliError) -> Self {
        let code = match e {
            ToffoliError::ArityOutOfRange(_) | ToffoliError::WrongInputCount { .. } => EXIT_USAGE,
            _ => EXIT_EVAL,
        };
        Self::new(code, e.to_string())
    }
}

pub struct Ctx {
    json: bool,
    tol: Tolerances64,
    pool: rayon::ThreadPool,
}

impl Ctx {
    pub fn new(
        json: bool,
        threads: usize,
        eps_num: Option<f64>,
        eps_dedup: Option<f64>,
        eps_classical: Option<f64>,
    ) -> Result<Self, CliError> {
        let d = Tolerances64::default();
        let tol = Tolerances64::new(
            eps_num.unwrap_or(d.eps_num),
            eps_dedup.unwrap_or(d.eps_dedup),
            eps_classical.unwrap_or(d.eps_classical),
        )
        .map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
        Ok(Self { json, tol, pool })
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    fn emit(&self, text: impl FnOnce() -> String, value: impl FnOnce() -> Value) {
        if self.json {
            println!("{}", to_json_string(&value()));
        } else {
            println!("{}", text());
        }
    }
}

fn read_doc(path: &Path, ctx: &Ctx) -> Result<IrDocument<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    parse_document(&text, &ctx.tol).map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, format!("{text}\n")).map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn parse_bits(s: &str) -> Result<Vec<bool>, CliError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(CliError::new(EXIT_USAGE, format!("invalid bit {other:?} in {s:?}"))),
        })
        .collect()
}

fn doc_vars(doc: &IrDocument<f64>) -> Vec<usize> {
    match doc {
        IrDocument::Quantum(f) => f.sim_vars(),
        IrDocument::Classical(f) => f.sim_vars(),
        IrDocument::Circuit(c) => c.sim_vars(),
        IrDocument::Program(p) => p.sim_vars(),
    }
}

fn doc_simulate(doc: &IrDocument<f64>, x: &[bool]) -> Result<SimOutput<f64>, SimError> {
    match doc {
        IrDocument::Quantum(f) => f.simulate(x),
        IrDocument::Classical(f) => f.simulate(x),
        IrDocument::Circuit(c) => c.simulate(x),
        IrDocument::Program(p) => p.simulate(x),
    }
}

fn doc_table(doc: &IrDocument<f64>, ctx: &Ctx) -> Result<qformula::simulate::TruthTableResult, SimError> {
    match doc {
        IrDocument::Quantum(f) => truth_table(f, &ctx.tol),
        IrDocument::Classical(f) => truth_table(f, &ctx.tol),
        IrDocument::Circuit(c) => truth_table(c, &ctx.tol),
        IrDocument::Program(p) => truth_table(p, &ctx.tol),
    }
}

/// Classical value of an output, `None` when it is not a basis state.
fn output_bit(out: &SimOutput<f64>, ctx: &Ctx) -> Option<bool> {
    match out {
        SimOutput::Bit(b) => Some(*b),
        SimOutput::State(rho) => is_classical_state(rho, &ctx.tol),
    }
}

pub fn simulate(ctx: &Ctx, path: &Path, x: Option<&str>, all: bool) -> Result<(), CliError> {
    let doc = read_doc(path, ctx)?;
    if all {
        let t = doc_table(&doc, ctx)?;
        let n = t.vars.len();
        ctx.emit(
            || {
                let mut lines = vec![format!(
                    "vars: {}",
                    t.vars.iter().map(|v| format!("x{v}")).collect::<Vec<_>>().join(" ")
                )];
                for i in 0..1usize << n {
                    lines.push(format!("{} {}", bit_string(&qformula::ir::index_bits(i, n)), u8::from(t.table.get(i))));
                }
                if !t.classical {
                    lines.push("non-classical outputs rounded at P(1) = 1/2".into());
                }
                lines.join("\n")
            },
            || json!({ "vars": t.vars, "table": t.table.to_bit_string(), "classical": t.classical }),
        );
        return Ok(());
    }
    let bits = parse_bits(x.unwrap_or_default())?;
    let out = doc_simulate(&doc, &bits)?;
    let classical = output_bit(&out, ctx);
    let (prob_one, state) = match &out {
        SimOutput::Bit(b) => (f64::from(u8::from(*b)), None),
        SimOutput::State(rho) => (rho.prob_one(), Some(rho.mat().clone())),
    };
    ctx.emit(
        || match (classical, &state) {
            (Some(b), _) => format!("output: |{0}⟩⟨{0}| (classical {0})", u8::from(b)),
            (None, Some(m)) => format!("output: {} (non-classical, P(1) = {prob_one:.6})", to_json_string(&mat_to_json(m))),
            (None, None) => unreachable!("bits are classical"),
        },
        || {
            json!({
                "x": bit_string(&bits),
                "classical": classical.is_some(),
                "bit": classical.map(u8::from),
                "prob_one": prob_one,
                "state": state.as_ref().map(mat_to_json),
            })
        },
    );
    Ok(())
}

fn as_quantum(doc: IrDocument<f64>) -> Result<QFormula64, CliError> {
    match doc {
        IrDocument::Quantum(f) => Ok(f),
        IrDocument::Classical(f) => Ok(f.to_qformula()),
        _ => Err(CliError::new(EXIT_PARSE, "expected a quantum or classical formula")),
    }
}

pub fn dequantize(
    ctx: &Ctx,
    path: &Path,
    delta: Option<f64>,
    output: Option<&Path>,
    certificates: Option<&Path>,
) -> Result<(), CliError> {
    let f = as_quantum(read_doc(path, ctx)?)?;
    let out = match delta {
        None => dequantize_exact(&f, &ctx.tol)?,
        Some(d) => dequantize_bounded(&f, &ErrorBudget::new(d)?, &ctx.tol)?,
    };
    if let Some(p) = output {
        write_file(p, &serialize_cformula(&out.cformula))?;
    }
    if let Some(p) = certificates {
        write_file(p, &out.to_json_string())?;
    }
    let mode = if delta.is_some() { "bounded" } else { "exact" };
    ctx.emit(
        || format!("size={} depth={} certificates={} mode={mode}", out.size, out.depth, out.certificates.len()),
        || {
            json!({
                "mode": mode,
                "delta": delta,
                "size": out.size,
                "depth": out.depth,
                "certificates": out.certificates.len(),
                "cformula": cformula_to_json(&out.cformula),
            })
        },
    );
    Ok(())
}

pub fn compile_oqp(ctx: &Ctx, path: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let IrDocument::Circuit(c) = read_doc(path, ctx)? else {
        return Err(CliError::new(EXIT_PARSE, "expected a boolean circuit"));
    };
    let rep = compile::<f64>(&c);
    if let Some(p) = output {
        write_file(p, &serialize_program(&rep.program))?;
    }
    ctx.emit(
        || format!("length={} bound={} depth={}", rep.length, rep.bound, rep.source_depth),
        || rep.to_json(),
    );
    Ok(())
}

pub fn verify_equiv(ctx: &Ctx, left: &Path, right: &Path) -> Result<(), CliError> {
    let (a, b) = (read_doc(left, ctx)?, read_doc(right, ctx)?);
    let mut vars = doc_vars(&a);
    vars.extend(doc_vars(&b));
    vars.sort_unstable();
    vars.dedup();
    if vars.len() > MAX_ENUM_VARS {
        return Err(SimError::TooManyVariables {
            count: vars.len(),
            limit: MAX_ENUM_VARS,
        }
        .into());
    }
    let pairs = enumerate(&vars, |x| {
        Ok((output_bit(&doc_simulate(&a, x)?, ctx), output_bit(&doc_simulate(&b, x)?, ctx)))
    })?;
    let first = pairs.iter().position(|(l, r)| l.is_none() || l != r);
    let show = |v: Option<bool>| v.map_or_else(|| "non-classical".to_string(), |b| u8::from(b).to_string());
    match first {
        None => {
            ctx.emit(
                || format!("equivalent on all {} inputs", pairs.len()),
                || json!({ "equivalent": true, "inputs": pairs.len() }),
            );
            Ok(())
        }
        Some(i) => {
            let x = bit_string(&qformula::simulate::assignment(&vars, i));
            let (l, r) = pairs[i];
            ctx.emit(
                || format!("mismatch at x={x}: left {}, right {}", show(l), show(r)),
                || json!({ "equivalent": false, "x": x, "left": l.map(u8::from), "right": r.map(u8::from) }),
            );
            Err(CliError::new(EXIT_MISMATCH, ""))
        }
    }
}

fn dressing(name: &str) -> Result<Channel<f64>, CliError> {
    let gate = match name.trim() {
        "id" => SingleBitGate::Identity,
        "not" => SingleBitGate::Not,
        "c0" => SingleBitGate::Const0,
        "c1" => SingleBitGate::Const1,
        "h" => return Ok(Channel::unitary(Mat::hadamard(), &Tolerances64::default()).expect("Hadamard is unitary")),
        other => return Err(CliError::new(EXIT_USAGE, format!("unknown single-bit gate {other:?}"))),
    };
    Ok(gate.to_channel())
}

pub fn classify_toffoli(ctx: &Ctx, m: usize, pre: Option<&str>, post: &str, list: bool) -> Result<(), CliError> {
    let family = enumerate_f_tof(m)?;
    if list {
        ctx.emit(
            || family.iter().map(TruthTable::to_bit_string).collect::<Vec<_>>().join("\n"),
            || json!({ "m": m, "tables": family.iter().map(TruthTable::to_bit_string).collect::<Vec<_>>() }),
        );
        return Ok(());
    }
    let pre = pre
        .unwrap_or_default()
        .split(',')
        .map(dressing)
        .collect::<Result<Vec<_>, _>>()?;
    let table = classify_depth_one(&pre, &dressing(post)?, m, &ctx.tol)?;
    ctx.emit(
        || format!("table={table}"),
        || json!({ "m": m, "table": table.to_bit_string(), "in_family": family.contains(&table) }),
    );
    Ok(())
}

pub fn affine_check(ctx: &Ctx, path: Option<&Path>, table: Option<&str>) -> Result<(), CliError> {
    let table: TruthTable = match (path, table) {
        (_, Some(t)) => t.parse().map_err(|e: qformula::ir::IrError| CliError::new(EXIT_USAGE, e.to_string()))?,
        (Some(p), None) => {
            let t = doc_table(&read_doc(p, ctx)?, ctx)?;
            if !t.classical {
                return Err(CliError::new(EXIT_EVAL, "document has non-classical outputs"));
            }
            t.table
        }
        (None, None) => return Err(CliError::new(EXIT_USAGE, "give a path or --table")),
    };
    let affine = is_affine(&table);
    ctx.emit(
        || if affine { "affine" } else { "non-affine" }.to_string(),
        || json!({ "table": table.to_bit_string(), "affine": affine }),
    );
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub enum Gen {
    Classical,
    Quantum,
    Noisy,
    Circuit,
}

pub fn gen(ctx: &Ctx, kind: Gen, cfg: &GenConfig, output: Option<&Path>) -> Result<(), CliError> {
    cfg.validate().map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    let usage = |e: qformula::genrand::GenError| CliError::new(EXIT_USAGE, e.to_string());
    let quantum = || -> Result<QFormula64, CliError> { obfuscate(&gen_classical_rof(cfg).map_err(usage)?, cfg).map_err(usage) };
    let (name, doc) = match kind {
        Gen::Classical => ("cformula", cformula_to_json(&gen_classical_rof(cfg).map_err(usage)?)),
        Gen::Quantum => ("qformula", qformula_to_json(&quantum()?)),
        Gen::Noisy => ("noisy", qformula_to_json(&add_noise(&quantum()?, cfg.noise))),
        Gen::Circuit => {
            let c = gen_circuit(&mut rng_stream(cfg.seed, 2), cfg.max_vars, cfg.max_depth);
            ("circuit", circuit_to_json(&c))
        }
    };
    let text = to_json_string(&with_meta(doc, meta_json(cfg, name)));
    match output {
        Some(p) => {
            write_file(p, &text)?;
            ctx.emit(|| format!("wrote {}", p.display()), || json!({ "path": p.display().to_string(), "kind": name }));
        }
        None => println!("{text}"),
    }
    Ok(())
}
