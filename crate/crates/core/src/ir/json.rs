//! JSON codec for every IR type.
//!
//! Floats are written with 17 significant digits so matrices round-trip
//! bit-exactly. Complex numbers are `[re, im]`, matrices are row-major
//! nested arrays, and channels are `{"in_qubits": k, "kraus": [...]}`.

use std::io;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::{BoolCircuit, CFormula, IrError, OneQubitProgram, OqpItem, QFormula, QGate, QNode, TruthTable};
use crate::qlinalg::{Channel, Cx, Mat, Tolerances};
use crate::scalar::Real;

/// Compact formatter printing every float as `d.dddddddddddddddde±x`.
struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes a JSON value with the crate's float convention.
pub fn to_json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigFormatter);
    value.serialize(&mut ser).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn parse_text(text: &str) -> Result<Value, IrError> {
    serde_json::from_str(text).map_err(|e| IrError::Json(e.to_string()))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, IrError> {
    v.as_object().ok_or_else(|| IrError::schema(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, IrError> {
    v.as_array().ok_or_else(|| IrError::schema(path, "expected an array"))
}

fn as_index(v: &Value, path: &str) -> Result<usize, IrError> {
    v.as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| IrError::schema(path, "expected a non-negative integer"))
}

fn as_real<T: Real>(v: &Value, path: &str) -> Result<T, IrError> {
    let f = v.as_f64().ok_or_else(|| IrError::schema(path, "expected a number"))?;
    T::from_f64(f).ok_or_else(|| IrError::schema(path, "number out of range"))
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<(), IrError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(IrError::schema(path, format!("unexpected key {k:?}"))),
        None => Ok(()),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, IrError> {
    obj.get(key)
        .ok_or_else(|| IrError::schema(path, format!("missing key {key:?}")))
}

/// Drops a top-level `"meta"` header before schema dispatch.
fn strip_meta(v: &Value) -> Value {
    match v {
        Value::Object(obj) if obj.contains_key("meta") => {
            let mut o = obj.clone();
            o.remove("meta");
            Value::Object(o)
        }
        other => other.clone(),
    }
}

fn real_json<T: Real>(x: T) -> Value {
    Value::from(x.to_f64_lossless())
}

pub fn mat_to_json<T: Real>(m: &Mat<T>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    m.row(i)
                        .iter()
                        .map(|z| Value::Array(vec![real_json(z.re), real_json(z.im)]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn mat_from_json<T: Real>(v: &Value, path: &str) -> Result<Mat<T>, IrError> {
    let rows = as_array(v, path)?;
    let mut out = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let cells = as_array(r, &rp)?;
        let mut row = Vec::with_capacity(cells.len());
        for (j, c) in cells.iter().enumerate() {
            let cp = format!("{rp}[{j}]");
            let pair = as_array(c, &cp)?;
            if pair.len() != 2 {
                return Err(IrError::schema(cp, "complex numbers are [re, im]"));
            }
            row.push(Cx::new(as_real(&pair[0], &cp)?, as_real(&pair[1], &cp)?));
        }
        out.push(row);
    }
    Mat::from_rows(out).map_err(|e| IrError::linalg(path, e))
}

pub fn channel_to_json<T: Real>(c: &Channel<T>) -> Value {
    json!({
        "in_qubits": c.in_qubits(),
        "kraus": c.kraus().iter().map(mat_to_json).collect::<Vec<_>>(),
    })
}

pub fn channel_from_json<T: Real>(v: &Value, path: &str, tol: &Tolerances<T>) -> Result<Channel<T>, IrError> {
    let obj = as_object(v, path)?;
    check_keys(obj, &["in_qubits", "kraus"], path)?;
    let k = as_index(field(obj, "in_qubits", path)?, &format!("{path}.in_qubits"))?;
    if k == 0 || k > 16 {
        return Err(IrError::schema(format!("{path}.in_qubits"), "in_qubits must be in 1..=16"));
    }
    let kp = format!("{path}.kraus");
    let kraus = as_array(field(obj, "kraus", path)?, &kp)?
        .iter()
        .enumerate()
        .map(|(i, m)| mat_from_json(m, &format!("{kp}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Channel::new(k, kraus, tol).map_err(|e| IrError::linalg(path, e))
}

fn opt_channel_to_json<T: Real>(c: Option<&Channel<T>>) -> Value {
    c.map_or(Value::Null, channel_to_json)
}

fn opt_channel_from_json<T: Real>(
    v: Option<&Value>,
    path: &str,
    tol: &Tolerances<T>,
) -> Result<Option<Channel<T>>, IrError> {
    match v {
        None | Some(Value::Null) => Ok(None),
        Some(v) => channel_from_json(v, path, tol).map(Some),
    }
}

pub fn qformula_to_json<T: Real>(f: &QFormula<T>) -> Value {
    match &f.node {
        QNode::Leaf(v) => {
            let mut obj = Map::new();
            obj.insert("leaf".into(), Value::from(*v));
            if let Some(out) = &f.out {
                obj.insert("out".into(), channel_to_json(out));
            }
            Value::Object(obj)
        }
        QNode::Gate(g) => json!({
            "gate": {
                "channel": channel_to_json(&g.channel),
                "pre": g.pre.iter().map(|p| opt_channel_to_json(p.as_ref())).collect::<Vec<_>>(),
                "children": g.children.iter().map(qformula_to_json).collect::<Vec<_>>(),
            },
            "out": opt_channel_to_json(f.out.as_ref()),
        }),
    }
}

pub fn qformula_from_json<T: Real>(v: &Value, path: &str, tol: &Tolerances<T>) -> Result<QFormula<T>, IrError> {
    let obj = as_object(v, path)?;
    let out = opt_channel_from_json(obj.get("out"), &format!("{path}.out"), tol)?;
    if let Some(leaf) = obj.get("leaf") {
        check_keys(obj, &["leaf", "out"], path)?;
        let var = as_index(leaf, &format!("{path}.leaf"))?;
        return Ok(QFormula::leaf(var).with_out(out));
    }
    check_keys(obj, &["gate", "out"], path)?;
    let gp = format!("{path}.gate");
    let g = as_object(field(obj, "gate", path)?, &gp)?;
    check_keys(g, &["channel", "pre", "children"], &gp)?;
    let channel = channel_from_json(field(g, "channel", &gp)?, &format!("{gp}.channel"), tol)?;
    let cp = format!("{gp}.children");
    let children = as_array(field(g, "children", &gp)?, &cp)?
        .iter()
        .enumerate()
        .map(|(i, c)| qformula_from_json(c, &format!("{cp}[{i}]"), tol))
        .collect::<Result<Vec<_>, _>>()?;
    let pre = match g.get("pre") {
        None | Some(Value::Null) => vec![None; children.len()],
        Some(p) => {
            let pp = format!("{gp}.pre");
            as_array(p, &pp)?
                .iter()
                .enumerate()
                .map(|(i, c)| opt_channel_from_json(Some(c), &format!("{pp}[{i}]"), tol))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    let f = QFormula {
        node: QNode::Gate(QGate { channel, pre, children }),
        out,
    };
    f.validate_shallow(path)?;
    Ok(f)
}

pub fn cformula_to_json(f: &CFormula) -> Value {
    match f {
        CFormula::Leaf(v) => json!({ "leaf": v }),
        CFormula::Gate { table, children } => json!({
            "gate": { "arity": table.arity(), "bits": table.to_bit_string() },
            "children": children.iter().map(cformula_to_json).collect::<Vec<_>>(),
        }),
    }
}

pub fn cformula_from_json(v: &Value, path: &str) -> Result<CFormula, IrError> {
    let obj = as_object(v, path)?;
    if let Some(leaf) = obj.get("leaf") {
        check_keys(obj, &["leaf"], path)?;
        return Ok(CFormula::Leaf(as_index(leaf, &format!("{path}.leaf"))?));
    }
    check_keys(obj, &["gate", "children"], path)?;
    let gp = format!("{path}.gate");
    let g = as_object(field(obj, "gate", path)?, &gp)?;
    check_keys(g, &["arity", "bits"], &gp)?;
    let arity = as_index(field(g, "arity", &gp)?, &format!("{gp}.arity"))?;
    let bits = field(g, "bits", &gp)?
        .as_str()
        .ok_or_else(|| IrError::schema(format!("{gp}.bits"), "expected a bit string"))?;
    let table: TruthTable = bits.parse().map_err(|e: IrError| match e {
        IrError::Schema { msg, .. } => IrError::schema(format!("{gp}.bits"), msg),
        other => other,
    })?;
    if table.arity() != arity {
        return Err(IrError::schema(
            format!("{gp}.bits"),
            format!("{} bits do not match arity {arity}", bits.len()),
        ));
    }
    let cp = format!("{path}.children");
    let children = as_array(field(obj, "children", path)?, &cp)?
        .iter()
        .enumerate()
        .map(|(i, c)| cformula_from_json(c, &format!("{cp}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    CFormula::gate(table, children).map_err(|_| IrError::Arity {
        path: path.to_string(),
        inputs: arity,
        children: as_array(&obj["children"], path).map_or(0, Vec::len),
    })
}

pub fn circuit_to_json(c: &BoolCircuit) -> Value {
    match c {
        BoolCircuit::Var(v) => json!({ "var": v }),
        BoolCircuit::Not(a) => json!({ "not": circuit_to_json(a) }),
        BoolCircuit::And(a, b) => json!({ "and": [circuit_to_json(a), circuit_to_json(b)] }),
        BoolCircuit::Or(a, b) => json!({ "or": [circuit_to_json(a), circuit_to_json(b)] }),
    }
}

pub fn circuit_from_json(v: &Value, path: &str) -> Result<BoolCircuit, IrError> {
    let obj = as_object(v, path)?;
    if obj.len() != 1 {
        return Err(IrError::schema(path, "circuit nodes have exactly one key"));
    }
    let (key, val) = obj.iter().next().expect("one entry");
    let sub = format!("{path}.{key}");
    match key.as_str() {
        "var" => Ok(BoolCircuit::Var(as_index(val, &sub)?)),
        "not" => Ok(BoolCircuit::not(circuit_from_json(val, &sub)?)),
        "and" | "or" => {
            let args = as_array(val, &sub)?;
            if args.len() != 2 {
                return Err(IrError::schema(sub, "AND/OR take exactly two operands"));
            }
            let a = circuit_from_json(&args[0], &format!("{sub}[0]"))?;
            let b = circuit_from_json(&args[1], &format!("{sub}[1]"))?;
            Ok(if key == "and" {
                BoolCircuit::and(a, b)
            } else {
                BoolCircuit::or(a, b)
            })
        }
        other => Err(IrError::schema(path, format!("unknown circuit node {other:?}"))),
    }
}

pub fn program_to_json<T: Real>(p: &OneQubitProgram<T>) -> Value {
    json!({
        "items": p.items().iter().map(|it| match it {
            OqpItem::SingleQubit(u) => json!({ "u": mat_to_json(u) }),
            OqpItem::ControlledX(v) => json!({ "cx": v }),
        }).collect::<Vec<_>>(),
    })
}

pub fn program_from_json<T: Real>(
    v: &Value,
    path: &str,
    tol: &Tolerances<T>,
) -> Result<OneQubitProgram<T>, IrError> {
    let obj = as_object(v, path)?;
    check_keys(obj, &["items"], path)?;
    let ip = format!("{path}.items");
    let mut items = Vec::new();
    for (i, it) in as_array(field(obj, "items", path)?, &ip)?.iter().enumerate() {
        let p = format!("{ip}[{i}]");
        let o = as_object(it, &p)?;
        if let Some(u) = o.get("u") {
            check_keys(o, &["u"], &p)?;
            items.push(OqpItem::SingleQubit(mat_from_json(u, &format!("{p}.u"))?));
        } else if let Some(cx) = o.get("cx") {
            check_keys(o, &["cx"], &p)?;
            items.push(OqpItem::ControlledX(as_index(cx, &format!("{p}.cx"))?));
        } else {
            return Err(IrError::schema(p, "item must be {\"u\": ...} or {\"cx\": ...}"));
        }
    }
    OneQubitProgram::new(items, tol).map_err(|e| match e {
        IrError::Linalg { path: p, source } => IrError::Linalg {
            path: p.replacen('$', path, 1),
            source,
        },
        other => other,
    })
}

pub fn parse_qformula<T: Real>(text: &str, tol: &Tolerances<T>) -> Result<QFormula<T>, IrError> {
    qformula_from_json(&strip_meta(&parse_text(text)?), "$", tol)
}

pub fn serialize_qformula<T: Real>(f: &QFormula<T>) -> String {
    to_json_string(&qformula_to_json(f))
}

pub fn parse_cformula(text: &str) -> Result<CFormula, IrError> {
    cformula_from_json(&strip_meta(&parse_text(text)?), "$")
}

pub fn serialize_cformula(f: &CFormula) -> String {
    to_json_string(&cformula_to_json(f))
}

pub fn parse_circuit(text: &str) -> Result<BoolCircuit, IrError> {
    circuit_from_json(&strip_meta(&parse_text(text)?), "$")
}

pub fn serialize_circuit(c: &BoolCircuit) -> String {
    to_json_string(&circuit_to_json(c))
}

pub fn parse_program<T: Real>(text: &str, tol: &Tolerances<T>) -> Result<OneQubitProgram<T>, IrError> {
    program_from_json(&strip_meta(&parse_text(text)?), "$", tol)
}

pub fn serialize_program<T: Real>(p: &OneQubitProgram<T>) -> String {
    to_json_string(&program_to_json(p))
}

/// Any IR document, as detected from its top-level shape.
#[derive(Clone, Debug, PartialEq)]
pub enum IrDocument<T> {
    Quantum(QFormula<T>),
    Classical(CFormula),
    Circuit(BoolCircuit),
    Program(OneQubitProgram<T>),
}

/// Finds whether a formula tree has a quantum (`channel`) or classical
/// (`arity`) gate; `None` for a bare leaf.
fn formula_flavor(v: &Value) -> Option<bool> {
    let obj = v.as_object()?;
    if obj.contains_key("out") {
        return Some(true);
    }
    let g = obj.get("gate")?.as_object();
    match g {
        Some(g) if g.contains_key("channel") => Some(true),
        Some(g) if g.contains_key("arity") => Some(false),
        _ => None,
    }
}

/// Parses any IR file. A `{"cformula": ...}` wrapper (dequantizer output)
/// yields its classical formula; a bare `{"leaf": n}` reads as quantum.
pub fn parse_document<T: Real>(text: &str, tol: &Tolerances<T>) -> Result<IrDocument<T>, IrError> {
    let v = strip_meta(&parse_text(text)?);
    let obj = as_object(&v, "$")?;
    if let Some(cf) = obj.get("cformula") {
        return Ok(IrDocument::Classical(cformula_from_json(cf, "$.cformula")?));
    }
    if obj.contains_key("items") {
        return Ok(IrDocument::Program(program_from_json(&v, "$", tol)?));
    }
    if ["var", "not", "and", "or"].iter().any(|k| obj.contains_key(*k)) {
        return Ok(IrDocument::Circuit(circuit_from_json(&v, "$")?));
    }
    if obj.contains_key("leaf") || obj.contains_key("gate") {
        return match formula_flavor(&v) {
            Some(false) => Ok(IrDocument::Classical(cformula_from_json(&v, "$")?)),
            _ => Ok(IrDocument::Quantum(qformula_from_json(&v, "$", tol)?)),
        };
    }
    Err(IrError::schema("$", "unrecognized document"))
}
