//! OpenQASM 2.0 export and a minimal reader for the exported subset.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

fn angle(x: f64) -> String {
    format!("{x:.16e}")
}

/// OpenQASM 2.0 text with one `q` and one `c` register. Angles carry 17
/// significant digits so the reader recovers them exactly.
pub fn export_qasm(circuit: &Circuit) -> Result<String> {
    let n = circuit.n_qubits();
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    writeln!(s, "qreg q[{n}];").unwrap();
    writeln!(s, "creg c[{n}];").unwrap();
    for g in circuit.gates() {
        let args = match &g.kind {
            GateKind::Su4(_) => return Err(Error::UnsupportedGate("su4 must be rebased before export".into())),
            GateKind::Rx(a) | GateKind::Rz(a) | GateKind::U1(a) => vec![*a],
            GateKind::U2(p, l) => vec![*p, *l],
            GateKind::U3(t, p, l) => vec![*t, *p, *l],
            _ => Vec::new(),
        };
        s.push_str(g.kind.tag().name());
        if !args.is_empty() {
            let a: Vec<String> = args.into_iter().map(angle).collect();
            write!(s, "({})", a.join(",")).unwrap();
        }
        let qs: Vec<String> = g.qubits.iter().map(|q| format!("q[{q}]")).collect();
        writeln!(s, " {};", qs.join(",")).unwrap();
    }
    if circuit.measure_all {
        for q in 0..n {
            writeln!(s, "measure q[{q}] -> c[{q}];").unwrap();
        }
    }
    Ok(s)
}

/// Arithmetic over numbers and `pi` with `+ - * /` and parentheses.
struct Expr<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Expr<'_> {
    fn eval(text: &str) -> std::result::Result<f64, String> {
        let mut e = Expr {
            src: text.as_bytes(),
            pos: 0,
        };
        let v = e.sum()?;
        e.skip_ws();
        if e.pos != e.src.len() {
            return Err(format!("trailing input in {text:?}"));
        }
        Ok(v)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn sum(&mut self) -> std::result::Result<f64, String> {
        let mut v = self.product()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let r = self.product()?;
            v = if op == b'+' { v + r } else { v - r };
        }
        Ok(v)
    }

    fn product(&mut self) -> std::result::Result<f64, String> {
        let mut v = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let r = self.unary()?;
            v = if op == b'*' { v * r } else { v / r };
        }
        Ok(v)
    }

    fn unary(&mut self) -> std::result::Result<f64, String> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err("missing ')'".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b'p') if self.src[self.pos..].starts_with(b"pi") => {
                self.pos += 2;
                Ok(PI)
            }
            Some(_) => {
                let start = self.pos;
                while self.pos < self.src.len() {
                    let ch = self.src[self.pos];
                    let exp_sign =
                        (ch == b'-' || ch == b'+') && self.pos > start && matches!(self.src[self.pos - 1], b'e' | b'E');
                    if ch.is_ascii_digit() || ch == b'.' || ch == b'e' || ch == b'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let tok = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                tok.parse().map_err(|_| format!("bad number {tok:?}"))
            }
            None => Err("unexpected end of expression".into()),
        }
    }
}

fn parse_operand(s: &str, reg: &str, size: usize) -> std::result::Result<usize, String> {
    let s = s.trim();
    let inner = s
        .strip_prefix(reg)
        .and_then(|r| r.trim().strip_prefix('['))
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("expected {reg}[i], got {s:?}"))?;
    let i: usize = inner.trim().parse().map_err(|_| format!("bad index in {s:?}"))?;
    if i >= size {
        return Err(format!("index {i} outside register of size {size}"));
    }
    Ok(i)
}

/// Index of the `)` closing a parameter list that starts before any space.
fn matching_paren(st: &str) -> Option<usize> {
    let open = st.find('(')?;
    if st[..open].contains(char::is_whitespace) {
        return None;
    }
    let mut depth = 0;
    for (i, ch) in st.char_indices().skip(open) {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Reads text in the form [`export_qasm`] writes: a single `qreg`, at most one
/// `creg`, gates from the crate's vocabulary and `measure` statements.
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    let mut qname = String::new();
    let mut measured = false;
    let mut stmts: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split("//").next().unwrap_or("");
        for part in line.split(';') {
            let p = part.trim();
            if !p.is_empty() {
                stmts.push((i + 1, p.to_string()));
            }
        }
    }
    for (line, st) in stmts {
        let err = |msg: String| Error::Parse { line, msg };
        if st.starts_with("OPENQASM")
            || st.starts_with("include")
            || st.starts_with("creg")
            || st.starts_with("barrier")
        {
            continue;
        }
        if let Some(rest) = st.strip_prefix("qreg") {
            if circuit.is_some() {
                return Err(err("only one qreg is supported".into()));
            }
            let rest = rest.trim();
            let open = rest.find('[').ok_or_else(|| err("bad qreg".into()))?;
            qname = rest[..open].trim().to_string();
            let size: usize = rest[open + 1..]
                .trim_end_matches(']')
                .trim()
                .parse()
                .map_err(|_| err("bad qreg size".into()))?;
            circuit = Some(Circuit::new(size));
            continue;
        }
        let c = circuit.as_mut().ok_or_else(|| err("gate before qreg".into()))?;
        let n = c.n_qubits();
        if let Some(rest) = st.strip_prefix("measure") {
            let (q, _) = rest.split_once("->").ok_or_else(|| err("bad measure".into()))?;
            parse_operand(q, &qname, n).map_err(err)?;
            measured = true;
            continue;
        }
        let (head, operands) = match matching_paren(&st) {
            Some(close) => st.split_at(close + 1),
            None => st
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(format!("bad statement {st:?}")))?,
        };
        let (name, args) = match head.find('(') {
            Some(open) => {
                let inner = head[open + 1..]
                    .trim_end()
                    .strip_suffix(')')
                    .ok_or_else(|| err("missing ')'".into()))?;
                let args = inner
                    .split(',')
                    .map(Expr::eval)
                    .collect::<std::result::Result<Vec<f64>, _>>()
                    .map_err(err)?;
                (head[..open].trim(), args)
            }
            None => (head.trim(), Vec::new()),
        };
        let qubits = operands
            .split(',')
            .map(|o| parse_operand(o, &qname, n))
            .collect::<std::result::Result<Vec<usize>, _>>()
            .map_err(err)?;
        let kind = match (name, args.as_slice()) {
            ("h", []) => GateKind::H,
            ("x", []) => GateKind::X,
            ("y", []) => GateKind::Y,
            ("z", []) => GateKind::Z,
            ("rx", [a]) => GateKind::Rx(*a),
            ("rz", [a]) => GateKind::Rz(*a),
            ("u1", [a]) => GateKind::U1(*a),
            ("u2", [p, l]) => GateKind::U2(*p, *l),
            ("u3", [t, p, l]) => GateKind::U3(*t, *p, *l),
            ("cx", []) => GateKind::Cx,
            ("cz", []) => GateKind::Cz,
            ("swap", []) => GateKind::Swap,
            _ => return Err(err(format!("unsupported gate {name}({} args)", args.len()))),
        };
        let gate = Gate::new(kind, &qubits).map_err(|e| err(e.to_string()))?;
        c.push(gate)?;
    }
    let mut c = circuit.ok_or(Error::Parse {
        line: 0,
        msg: "no qreg".into(),
    })?;
    c.measure_all = measured;
    Ok(c)
}
