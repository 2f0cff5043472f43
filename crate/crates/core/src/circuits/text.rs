//! Line-oriented circuit text format.
//!
//! ```text
//! # comment
//! qubits 3 depth 2
//! H 0
//! CZ 0 1
//! X 0 1 2
//! Rz 2 0.25
//! ```
//!
//! The header comes first. Each op line is `GATE target [controls...] [angle]`,
//! where the angle is present exactly for `Rx`, `Ry` and `Rz`. Blank lines and
//! lines starting with `#` are ignored.

use std::fmt::Write as _;

use super::{Circuit, GateOp};
use crate::error::{Error, Result};
use crate::gates::NamedGate;

pub fn serialize(circuit: &Circuit) -> String {
    let mut out = format!("qubits {} depth {}\n", circuit.num_qubits, circuit.depth);
    for op in &circuit.ops {
        out.push_str(op.gate.name());
        write!(out, " {}", op.target).unwrap();
        for c in &op.controls {
            write!(out, " {c}").unwrap();
        }
        if let Some(a) = op.gate.angle() {
            // Display for f64 prints the shortest string that round-trips.
            write!(out, " {a}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    match (it.next()?, it.next()?, it.next()?, it.next()?, it.next()) {
        ("qubits", n, "depth", d, None) => Some((n.parse().ok()?, d.parse().ok()?)),
        _ => None,
    }
}

fn parse_op(line: &str) -> Result<GateOp, String> {
    let mut tokens: Vec<&str> = line.split_whitespace().collect();
    let name = tokens.remove(0);
    let is_rotation = matches!(name, "Rx" | "Ry" | "Rz");
    let angle = if is_rotation {
        let tok = tokens.pop().ok_or_else(|| format!("{name} needs an angle"))?;
        let a: f64 = tok.parse().map_err(|_| format!("bad angle `{tok}`"))?;
        if !a.is_finite() {
            return Err(format!("angle `{tok}` is not finite"));
        }
        Some(a)
    } else {
        None
    };
    let gate = NamedGate::from_parts(name, angle).map_err(|e| e.to_string())?;
    let mut qubits = tokens.iter().map(|t| {
        t.parse::<usize>()
            .map_err(|_| format!("bad qubit index `{t}`"))
    });
    let target = qubits
        .next()
        .ok_or_else(|| format!("{name} needs a target qubit"))??;
    let controls = qubits.collect::<Result<Vec<_>, _>>()?;
    Ok(GateOp {
        gate,
        target,
        controls,
    })
}

pub fn parse(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        match circuit.as_mut() {
            None => {
                let (n, d) = parse_header(line).ok_or_else(|| {
                    err(format!("expected header `qubits N depth D`, found `{line}`"))
                })?;
                circuit = Some(Circuit::new(n, d).map_err(|e| err(e.to_string()))?);
            }
            Some(c) => {
                let op = parse_op(line).map_err(err)?;
                c.push(op).map_err(|e| err(e.to_string()))?;
            }
        }
    }
    circuit.ok_or_else(|| Error::Parse {
        line: text.lines().count().max(1),
        message: "missing header `qubits N depth D`".into(),
    })
}
