//! Problem input: the network JSON format and a VNN-LIB property subset.
//!
//! Networks are stored as JSON (`input_dim` plus a list of dense layers
//! with row-major weights). Properties use the VNN-LIB fragment
//!
//! ```text
//! (declare-const X_<i> Real)      (declare-const Y_<j> Real)
//! (assert (<= X_<i> c))           (assert (>= X_<i> c))
//! (assert (<op> <term> <term>))   op in {<=, >=}, terms linear in Y
//! (assert (or ... (and ...) ...)) nesting at most one level deep
//! ```
//!
//! As usual for such files, the asserts on `Y` describe the
//! *counterexample condition*: the satisfiable region is the violation of
//! the property being checked. The parser collects the condition into
//! disjunctive normal form ([`VerificationProblem::negated_output`]); a
//! point of the input box satisfying any disjunct refutes the property.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Layer, Network, NetworkError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("network json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("network: {0}")]
    Network(#[from] NetworkError),
    #[error("property line {line}: {msg}")]
    Property { line: usize, msg: String },
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, IoError> {
    Err(IoError::Property { line, msg: msg.into() })
}

// ---------------------------------------------------------------------
// Network JSON
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    input_dim: usize,
    layers: Vec<Layer>,
}

/// Parse and validate a network from its JSON source. Shape validation
/// and normalization (appending an identity output layer after a final
/// ReLU layer) happen here, so the result always ends in an affine layer.
pub fn parse_network(text: &str) -> Result<Network, IoError> {
    let raw: NetworkFile = serde_json::from_str(text)?;
    Ok(Network::new(raw.input_dim, raw.layers)?)
}

/// Canonical JSON for a network. `serialize_network(parse_network(f))`
/// is the normal form of `f` and is a fixed point of parse/serialize.
pub fn serialize_network(net: &Network) -> String {
    let file = NetworkFile { input_dim: net.input_dim(), layers: net.layers().to_vec() };
    let mut out = serde_json::to_string_pretty(&file).expect("network serializes");
    out.push('\n');
    out
}

// ---------------------------------------------------------------------
// Properties
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
}

impl CmpOp {
    /// The non-strict comparison used when a constraint enters an LP.
    pub fn closed(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Le,
            CmpOp::Gt => CmpOp::Ge,
            op => op,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, CmpOp::Lt | CmpOp::Gt)
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        })
    }
}

/// A linear inequality over the network outputs:
/// `sum_j coeffs[j] * Y_j  op  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputIneq {
    pub coeffs: Vec<f64>,
    pub op: CmpOp,
    pub rhs: f64,
}

impl OutputIneq {
    pub fn lhs(&self, outputs: &[f64]) -> f64 {
        self.coeffs.iter().zip(outputs).map(|(c, y)| c * y).sum()
    }

    /// Signed slack: nonnegative (positive for strict ops) iff satisfied.
    pub fn slack(&self, outputs: &[f64]) -> f64 {
        let lhs = self.lhs(outputs);
        match self.op {
            CmpOp::Le | CmpOp::Lt => self.rhs - lhs,
            CmpOp::Ge | CmpOp::Gt => lhs - self.rhs,
        }
    }

    /// Exact satisfaction check; strict operators stay strict.
    pub fn satisfied(&self, outputs: &[f64]) -> bool {
        let lhs = self.lhs(outputs);
        match self.op {
            CmpOp::Le => lhs <= self.rhs,
            CmpOp::Lt => lhs < self.rhs,
            CmpOp::Ge => lhs >= self.rhs,
            CmpOp::Gt => lhs > self.rhs,
        }
    }
}

/// Conjunction of output inequalities; one branch of the DNF.
pub type Disjunct = Vec<OutputIneq>;

/// A verification query: does any point of `input_box` satisfy some
/// disjunct of `negated_output` under the network?
#[derive(Debug, Clone)]
pub struct VerificationProblem {
    pub net: Network,
    pub input_box: Vec<(f64, f64)>,
    pub negated_output: Vec<Disjunct>,
}

impl VerificationProblem {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.input_box.len()
            && x.iter().zip(&self.input_box).all(|(v, &(lo, hi))| lo <= *v && *v <= hi)
    }

    /// Exact counterexample check: `x` lies in the box and the network
    /// outputs satisfy some disjunct, with strict comparisons enforced
    /// strictly. This is the final word on every `sat` answer.
    pub fn validate_witness(&self, x: &[f64]) -> bool {
        if !self.contains(x) {
            return false;
        }
        let Ok(trace) = self.net.forward(x) else { return false };
        self.negated_output
            .iter()
            .any(|dis| dis.iter().all(|ineq| ineq.satisfied(&trace.outputs)))
    }
}

// ---------------------------------------------------------------------
// VNN-LIB tokenizer / reader
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

fn tokenize(text: &str) -> Vec<(Tok, usize)> {
    let mut toks = Vec::new();
    let mut line = 1;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\n' => line += 1,
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        break;
                    }
                }
            }
            '(' => toks.push((Tok::Open, line)),
            ')' => toks.push((Tok::Close, line)),
            c if c.is_whitespace() => {}
            c => {
                let mut atom = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' {
                        break;
                    }
                    atom.push(n);
                    chars.next();
                }
                toks.push((Tok::Atom(atom), line));
            }
        }
    }
    toks
}

#[derive(Debug)]
enum SExpr {
    Atom(String, usize),
    List(Vec<SExpr>, usize),
}

impl SExpr {
    fn line(&self) -> usize {
        match self {
            SExpr::Atom(_, l) | SExpr::List(_, l) => *l,
        }
    }
}

fn read_sexprs(text: &str) -> Result<Vec<SExpr>, IoError> {
    let toks = tokenize(text);
    let mut stack: Vec<(Vec<SExpr>, usize)> = Vec::new();
    let mut top = Vec::new();
    for (tok, line) in toks {
        match tok {
            Tok::Open => stack.push((Vec::new(), line)),
            Tok::Close => match stack.pop() {
                Some((items, open_line)) => {
                    let expr = SExpr::List(items, open_line);
                    match stack.last_mut() {
                        Some((parent, _)) => parent.push(expr),
                        None => top.push(expr),
                    }
                }
                None => return err(line, "unbalanced ')'"),
            },
            Tok::Atom(a) => {
                let expr = SExpr::Atom(a, line);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(expr),
                    None => top.push(expr),
                }
            }
        }
    }
    if let Some((_, line)) = stack.last() {
        return err(*line, "unclosed '('");
    }
    Ok(top)
}

// ---------------------------------------------------------------------
// VNN-LIB semantics
// ---------------------------------------------------------------------

/// A term, linear in inputs and outputs. Mixing the two in a single
/// inequality is rejected later.
#[derive(Default)]
struct LinTerm {
    xs: BTreeMap<usize, f64>,
    ys: BTreeMap<usize, f64>,
    konst: f64,
}

impl LinTerm {
    fn add(&mut self, other: &LinTerm, scale: f64) {
        for (&i, &c) in &other.xs {
            *self.xs.entry(i).or_insert(0.0) += scale * c;
        }
        for (&j, &c) in &other.ys {
            *self.ys.entry(j).or_insert(0.0) += scale * c;
        }
        self.konst += scale * other.konst;
    }
}

enum VarRef {
    Input(usize),
    Output(usize),
}

fn parse_var(name: &str) -> Option<VarRef> {
    let idx = |s: &str| s.parse::<usize>().ok();
    if let Some(rest) = name.strip_prefix("X_") {
        return idx(rest).map(VarRef::Input);
    }
    if let Some(rest) = name.strip_prefix("Y_") {
        return idx(rest).map(VarRef::Output);
    }
    None
}

fn parse_term(expr: &SExpr) -> Result<LinTerm, IoError> {
    let mut t = LinTerm::default();
    match expr {
        SExpr::Atom(a, line) => {
            if let Some(v) = parse_var(a) {
                match v {
                    VarRef::Input(i) => {
                        t.xs.insert(i, 1.0);
                    }
                    VarRef::Output(j) => {
                        t.ys.insert(j, 1.0);
                    }
                }
            } else if let Ok(c) = a.parse::<f64>() {
                t.konst = c;
            } else {
                return err(*line, format!("unsupported symbol '{a}' in term"));
            }
        }
        SExpr::List(items, line) => {
            let Some(SExpr::Atom(head, _)) = items.first() else {
                return err(*line, "expected operator at head of term");
            };
            let args = &items[1..];
            match head.as_str() {
                "+" => {
                    for a in args {
                        t.add(&parse_term(a)?, 1.0);
                    }
                }
                "-" => match args {
                    [single] => t.add(&parse_term(single)?, -1.0),
                    [first, rest @ ..] => {
                        t.add(&parse_term(first)?, 1.0);
                        for a in rest {
                            t.add(&parse_term(a)?, -1.0);
                        }
                    }
                    [] => return err(*line, "'-' needs at least one argument"),
                },
                "*" => {
                    let mut konst = 1.0;
                    let mut var: Option<LinTerm> = None;
                    for a in args {
                        let f = parse_term(a)?;
                        if f.xs.is_empty() && f.ys.is_empty() {
                            konst *= f.konst;
                        } else if var.is_none() {
                            var = Some(f);
                        } else {
                            return err(*line, "nonlinear product of variables");
                        }
                    }
                    match var {
                        Some(v) => t.add(&v, konst),
                        None => t.konst = konst,
                    }
                }
                other => return err(*line, format!("unsupported term operator '{other}'")),
            }
        }
    }
    Ok(t)
}

enum Constraint {
    /// `X_i op bound` after normalizing the coefficient to +1.
    Box { input: usize, op: CmpOp, bound: f64 },
    Output(OutputIneq),
}

struct PropertyReader<'n> {
    net: &'n Network,
    declared_inputs: Vec<bool>,
    declared_outputs: Vec<bool>,
    lower: Vec<Option<f64>>,
    upper: Vec<Option<f64>>,
    /// One disjunct list per top-level assert; conjoined by cross product.
    asserts: Vec<Vec<Disjunct>>,
}

impl<'n> PropertyReader<'n> {
    fn new(net: &'n Network) -> Self {
        PropertyReader {
            net,
            declared_inputs: vec![false; net.input_dim()],
            declared_outputs: vec![false; net.output_dim()],
            lower: vec![None; net.input_dim()],
            upper: vec![None; net.input_dim()],
            asserts: Vec::new(),
        }
    }

    fn declare(&mut self, items: &[SExpr], line: usize) -> Result<(), IoError> {
        let [_, SExpr::Atom(name, _), SExpr::Atom(sort, _)] = items else {
            return err(line, "expected (declare-const <name> Real)");
        };
        if sort != "Real" {
            return err(line, format!("unsupported sort '{sort}'"));
        }
        match parse_var(name) {
            Some(VarRef::Input(i)) if i < self.declared_inputs.len() => {
                self.declared_inputs[i] = true;
            }
            Some(VarRef::Output(j)) if j < self.declared_outputs.len() => {
                self.declared_outputs[j] = true;
            }
            Some(VarRef::Input(i)) => {
                return err(line, format!("X_{i} out of range: network has {} inputs", self.net.input_dim()));
            }
            Some(VarRef::Output(j)) => {
                return err(line, format!("Y_{j} out of range: network has {} outputs", self.net.output_dim()));
            }
            None => return err(line, format!("cannot declare '{name}': expected X_<i> or Y_<j>")),
        }
        Ok(())
    }

    fn comparison(&self, items: &[SExpr], line: usize) -> Result<Constraint, IoError> {
        let [SExpr::Atom(op, _), lhs, rhs] = items else {
            return err(line, "expected (<op> <term> <term>)");
        };
        let op = match op.as_str() {
            "<=" => CmpOp::Le,
            ">=" => CmpOp::Ge,
            other => return err(line, format!("unsupported comparison '{other}'")),
        };
        // Normalize to: lhs - rhs  op  0.
        let mut diff = parse_term(lhs)?;
        diff.add(&parse_term(rhs)?, -1.0);
        let used_x = diff.xs.values().any(|&c| c != 0.0);
        let used_y = diff.ys.values().any(|&c| c != 0.0);
        match (used_x, used_y) {
            (true, true) => err(line, "inequality mixes input (X) and output (Y) variables"),
            (false, false) => err(line, "inequality contains no variables"),
            (true, false) => {
                let nonzero: Vec<_> = diff.xs.iter().filter(|(_, &c)| c != 0.0).collect();
                let [(&input, &coeff)] = nonzero.as_slice() else {
                    return err(line, "input constraints must bound a single X variable");
                };
                if !self.declared_inputs[input] {
                    return err(line, format!("X_{input} used before declaration"));
                }
                // coeff * X + konst  op  0
                let bound = -diff.konst / coeff;
                let op = match (op, coeff > 0.0) {
                    (CmpOp::Le, true) | (CmpOp::Ge, false) => CmpOp::Le,
                    _ => CmpOp::Ge,
                };
                Ok(Constraint::Box { input, op, bound })
            }
            (false, true) => {
                let mut coeffs = vec![0.0; self.net.output_dim()];
                for (&j, &c) in &diff.ys {
                    if c != 0.0 && !self.declared_outputs[j] {
                        return err(line, format!("Y_{j} used before declaration"));
                    }
                    coeffs[j] = c;
                }
                Ok(Constraint::Output(OutputIneq { coeffs, op, rhs: -diff.konst }))
            }
        }
    }

    /// An atom of the output condition; boxes are not allowed here.
    fn output_atom(&self, expr: &SExpr) -> Result<OutputIneq, IoError> {
        let SExpr::List(items, line) = expr else {
            return err(expr.line(), "expected a comparison");
        };
        match self.comparison(items, *line)? {
            Constraint::Output(ineq) => Ok(ineq),
            Constraint::Box { .. } => err(*line, "input bounds may not appear under and/or"),
        }
    }

    fn conjunction(&self, items: &[SExpr], line: usize) -> Result<Disjunct, IoError> {
        if items.len() < 2 {
            return err(line, "'and' needs at least one argument");
        }
        items[1..].iter().map(|e| self.output_atom(e)).collect()
    }

    fn assert(&mut self, items: &[SExpr], line: usize) -> Result<(), IoError> {
        let [_, body] = items else {
            return err(line, "expected (assert <condition>)");
        };
        let SExpr::List(inner, body_line) = body else {
            return err(body.line(), "expected a condition");
        };
        let head = match inner.first() {
            Some(SExpr::Atom(h, _)) => h.as_str(),
            _ => return err(*body_line, "expected operator at head of condition"),
        };
        match head {
            "or" => {
                if inner.len() < 2 {
                    return err(*body_line, "'or' needs at least one argument");
                }
                let mut branches = Vec::new();
                for branch in &inner[1..] {
                    match branch {
                        SExpr::List(b, bl) if matches!(b.first(), Some(SExpr::Atom(h, _)) if h == "and") => {
                            branches.push(self.conjunction(b, *bl)?);
                        }
                        SExpr::List(b, bl) if matches!(b.first(), Some(SExpr::Atom(h, _)) if h == "or") => {
                            return err(*bl, "'or' may not nest inside 'or'");
                        }
                        _ => branches.push(vec![self.output_atom(branch)?]),
                    }
                }
                self.asserts.push(branches);
            }
            "and" => {
                let conj = self.conjunction(inner, *body_line)?;
                self.asserts.push(vec![conj]);
            }
            _ => match self.comparison(inner, *body_line)? {
                Constraint::Box { input, op, bound } => {
                    // Repeated bounds intersect.
                    match op {
                        CmpOp::Le | CmpOp::Lt => {
                            let u = self.upper[input].get_or_insert(bound);
                            *u = u.min(bound);
                        }
                        CmpOp::Ge | CmpOp::Gt => {
                            let l = self.lower[input].get_or_insert(bound);
                            *l = l.max(bound);
                        }
                    }
                }
                Constraint::Output(ineq) => self.asserts.push(vec![vec![ineq]]),
            },
        }
        Ok(())
    }

    fn finish(self, last_line: usize) -> Result<VerificationProblem, IoError> {
        let mut input_box = Vec::with_capacity(self.net.input_dim());
        for i in 0..self.net.input_dim() {
            match (self.lower[i], self.upper[i]) {
                (Some(lo), Some(hi)) if lo <= hi => input_box.push((lo, hi)),
                (Some(lo), Some(hi)) => {
                    return err(last_line, format!("empty box for X_{i}: [{lo}, {hi}]"));
                }
                _ => return err(last_line, format!("missing box bound for X_{i}")),
            }
        }
        if self.asserts.is_empty() {
            return err(last_line, "property constrains no outputs");
        }
        // Conjunction of per-assert disjunct lists, expanded by cross
        // product into disjunctive normal form.
        let mut negated_output: Vec<Disjunct> = vec![Vec::new()];
        for branches in &self.asserts {
            let mut next = Vec::with_capacity(negated_output.len() * branches.len());
            for existing in &negated_output {
                for branch in branches {
                    let mut d = existing.clone();
                    d.extend(branch.iter().cloned());
                    next.push(d);
                }
            }
            if next.len() > 256 {
                return err(last_line, "property expands to more than 256 disjuncts");
            }
            negated_output = next;
        }
        Ok(VerificationProblem { net: self.net.clone(), input_box, negated_output })
    }
}

/// Parse a property file against a network.
pub fn parse_vnnlib(text: &str, net: &Network) -> Result<VerificationProblem, IoError> {
    let forms = read_sexprs(text)?;
    let last_line = forms.last().map_or(1, SExpr::line);
    let mut reader = PropertyReader::new(net);
    for form in &forms {
        let SExpr::List(items, line) = form else {
            return err(form.line(), "expected a top-level form");
        };
        let head = match items.first() {
            Some(SExpr::Atom(h, _)) => h.as_str(),
            _ => return err(*line, "expected a command"),
        };
        match head {
            "declare-const" => reader.declare(items, *line)?,
            "assert" => reader.assert(items, *line)?,
            other => return err(*line, format!("unsupported command '{other}'")),
        }
    }
    reader.finish(last_line)
}
