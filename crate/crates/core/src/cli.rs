//! Problem files and the `tensoralt` subcommands.
//!
//! Problems come in two interchangeable encodings. The text form:
//!
//! ```text
//! # comments start with '#'
//! variables 3
//! degree 6
//! objective: x1^6 + x2^6 + x3^6 - x1^4*x2^2
//! constraint: x1^6 + x2^6 + x3^6 - 1
//! transform: 1 0 0; 0 1 0; 0 0 1
//! slater: 0 0 0
//! allow_non_enp
//! ```
//!
//! and the JSON form, where a polynomial is a list of `{"coef", "exps"}`:
//!
//! ```text
//! {"variables": 1, "degree": 2,
//!  "objective": [{"coef": 1.0, "exps": [2]}],
//!  "constraints": [[{"coef": 1.0, "exps": [2]}, {"coef": -1.0, "exps": [0]}]]}
//! ```
//!
//! Every command returns an [`Outcome`]: an exit code (0 success, 1 parse
//! error, 2 precondition violation, 3 numerically indeterminate) plus text
//! and JSON renderings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::alternative::{alternative_sdp, yuan_alternative, AltOutcome, AltSettings};
use crate::error::{Error, Result};
use crate::multiindex::Exponent;
use crate::poly::{format_sig, Polynomial};
use crate::popt::{
    oracle_minimize, solve_exact_sos, OracleBudget, PopInstance, PopSettings, SlaterEvidence, Validation,
};
use crate::sdp::{SdpSettings, SdpStatus};
use crate::sos::{sos_check_detailed, SosSettings, SosVerdict};
use crate::tensor::SymmetricTensor;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

/// Environment variable overriding `--seed`.
pub const SEED_ENV: &str = "TENSORALT_SEED";

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub variables: usize,
    pub degree: usize,
    pub objective: Polynomial,
    pub constraints: Vec<Polynomial>,
    pub transform: Option<DMatrix<f64>>,
    pub slater: Option<Vec<f64>>,
    pub allow_non_enp: bool,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parser for polynomial expressions such as `2.5*x1^2*x3 - x2 + 0.5`.
struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col0: usize,
    n: usize,
}

impl<'a> ExprParser<'a> {
    fn col(&self) -> usize {
        self.col0 + self.pos
    }

    fn err(&self, message: impl Into<String>) -> Error {
        parse_err(self.line, self.col(), message)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == b'.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map_err(|_| {
            parse_err(self.line, self.col0 + start, format!("invalid number '{text}'"))
        })
    }

    fn integer(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<u32>()
            .map_err(|_| parse_err(self.line, self.col0 + start, format!("integer '{text}' out of range")))
    }

    /// `factor ('*'? factor)*` returning coefficient and exponent.
    fn term(&mut self) -> Result<(f64, Vec<u32>)> {
        let mut coef = 1.0;
        let mut alpha = vec![0u32; self.n];
        let mut factors = 0;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(c) if c.is_ascii_digit() || c == b'.' => {
                    coef *= self.number()?;
                }
                Some(b'x') => {
                    let at = self.col();
                    self.pos += 1;
                    let i = self.integer()? as usize;
                    if i == 0 || i > self.n {
                        return Err(parse_err(
                            self.line,
                            at,
                            format!("variable x{i} outside x1..x{}", self.n),
                        ));
                    }
                    self.skip_ws();
                    let mut k = 1;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        self.skip_ws();
                        k = self.integer()?;
                    }
                    alpha[i - 1] += k;
                }
                Some(c) => {
                    return Err(self.err(format!("unexpected character '{}'", c as char)));
                }
                None => return Err(self.err("expected a number or a variable")),
            }
            factors += 1;
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                }
                Some(c) if c == b'x' || c.is_ascii_digit() || c == b'.' => {}
                _ => break,
            }
        }
        debug_assert!(factors > 0);
        Ok((coef, alpha))
    }

    fn polynomial(&mut self) -> Result<Polynomial> {
        let mut p = Polynomial::zero(self.n);
        self.skip_ws();
        if self.peek().is_none() {
            return Err(self.err("empty polynomial"));
        }
        let mut sign = 1.0;
        if let Some(c @ (b'+' | b'-')) = self.peek() {
            sign = if c == b'-' { -1.0 } else { 1.0 };
            self.pos += 1;
        }
        loop {
            let (c, alpha) = self.term()?;
            p.add_term(Exponent::new(alpha), sign * c);
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => sign = 1.0,
                Some(b'-') => sign = -1.0,
                Some(c) => return Err(self.err(format!("expected '+' or '-', found '{}'", c as char))),
            }
            self.pos += 1;
        }
        Ok(p)
    }
}

/// Parses a polynomial expression in `n` variables. `line` and `column`
/// locate the expression for error messages.
pub fn parse_polynomial(src: &str, n: usize, line: usize, column: usize) -> Result<Polynomial> {
    if let Some(pos) = src.find(|c: char| !c.is_ascii()) {
        return Err(parse_err(line, column + pos, "non-ASCII character"));
    }
    ExprParser {
        src: src.as_bytes(),
        pos: 0,
        line,
        col0: column,
        n,
    }
    .polynomial()
}

fn parse_numbers(src: &str, line: usize, column: usize) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for tok in src.split_whitespace() {
        let at = src[offset..].find(tok).expect("token from split") + offset;
        offset = at + tok.len();
        out.push(
            tok.parse::<f64>()
                .map_err(|_| parse_err(line, column + at, format!("invalid number '{tok}'")))?,
        );
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    coef: f64,
    exps: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonProblem {
    variables: usize,
    degree: usize,
    objective: Vec<JsonTerm>,
    #[serde(default)]
    constraints: Vec<Vec<JsonTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transform: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slater: Option<Vec<f64>>,
    #[serde(default)]
    allow_non_enp: bool,
}

impl ProblemFile {
    /// Reads a file, choosing the encoding by extension (`.json`) or by a
    /// leading `{`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        if is_json {
            Self::parse_json(&text)
        } else {
            Self::parse_text(&text)
        }
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut variables: Option<usize> = None;
        let mut degree: Option<(usize, usize)> = None;
        let mut objective: Option<Polynomial> = None;
        let mut constraints = Vec::new();
        let mut transform = None;
        let mut slater = None;
        let mut allow_non_enp = false;
        let mut last_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("");
            let lead = content.len() - content.trim_start().len();
            let body = content.trim();
            if body.is_empty() {
                continue;
            }
            let key_len = body
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(body.len());
            let key = &body[..key_len];
            let mut rest = &body[key_len..];
            let mut col = lead + key_len + 1;
            let trimmed = rest.trim_start();
            col += rest.len() - trimmed.len();
            rest = trimmed;
            if let Some(r) = rest.strip_prefix(':') {
                col += 1;
                let t = r.trim_start();
                col += r.len() - t.len();
                rest = t;
            }
            let rest = rest.trim_end();
            let need_n = || variables.ok_or_else(|| parse_err(line, lead + 1, "'variables' must come first"));
            match key {
                "variables" | "degree" => {
                    let v: usize = rest
                        .parse()
                        .map_err(|_| parse_err(line, col, format!("expected a positive integer after '{key}'")))?;
                    if key == "variables" {
                        if v == 0 {
                            return Err(parse_err(line, col, "at least one variable is required"));
                        }
                        if variables.replace(v).is_some() {
                            return Err(parse_err(line, lead + 1, "duplicate 'variables'"));
                        }
                    } else {
                        if v == 0 || !v.is_multiple_of(2) {
                            return Err(parse_err(line, col, format!("degree must be even and positive, got {v}")));
                        }
                        if degree.replace((v, line)).is_some() {
                            return Err(parse_err(line, lead + 1, "duplicate 'degree'"));
                        }
                    }
                }
                "objective" | "constraint" => {
                    let n = need_n()?;
                    let p = parse_polynomial(rest, n, line, col)?;
                    if let Some((m, _)) = degree {
                        if p.degree() > m {
                            return Err(parse_err(
                                line,
                                col,
                                format!("polynomial degree {} exceeds declared degree {m}", p.degree()),
                            ));
                        }
                    }
                    if key == "objective" {
                        if objective.replace(p).is_some() {
                            return Err(parse_err(line, lead + 1, "duplicate 'objective'"));
                        }
                    } else {
                        constraints.push(p);
                    }
                }
                "transform" => {
                    let n = need_n()?;
                    let mut rows = Vec::new();
                    let mut offset = 0;
                    for row in rest.split(';') {
                        let nums = parse_numbers(row, line, col + offset)?;
                        if nums.len() != n {
                            return Err(parse_err(
                                line,
                                col + offset,
                                format!("transform row has {} entries, expected {n}", nums.len()),
                            ));
                        }
                        rows.extend(nums);
                        offset += row.len() + 1;
                    }
                    if rows.len() != n * n {
                        return Err(parse_err(line, col, format!("transform needs {n} rows")));
                    }
                    transform = Some(DMatrix::from_row_slice(n, n, &rows));
                }
                "slater" => {
                    let n = need_n()?;
                    let nums = parse_numbers(rest, line, col)?;
                    if nums.len() != n {
                        return Err(parse_err(line, col, format!("slater point needs {n} coordinates")));
                    }
                    slater = Some(nums);
                }
                "allow_non_enp" => {
                    allow_non_enp = match rest {
                        "" | "true" => true,
                        "false" => false,
                        _ => return Err(parse_err(line, col, "expected 'true' or 'false'")),
                    };
                }
                _ => return Err(parse_err(line, lead + 1, format!("unknown key '{key}'"))),
            }
        }
        let variables = variables.ok_or_else(|| parse_err(last_line.max(1), 1, "missing 'variables'"))?;
        let (degree, _) = degree.ok_or_else(|| parse_err(last_line.max(1), 1, "missing 'degree'"))?;
        let objective = objective.ok_or_else(|| parse_err(last_line.max(1), 1, "missing 'objective'"))?;
        let file = Self {
            variables,
            degree,
            objective,
            constraints,
            transform,
            slater,
            allow_non_enp,
        };
        file.check_degrees()?;
        Ok(file)
    }

    fn check_degrees(&self) -> Result<()> {
        for (l, p) in std::iter::once(&self.objective).chain(&self.constraints).enumerate() {
            if p.degree() > self.degree {
                return Err(parse_err(
                    1,
                    1,
                    format!("f_{l} has degree {} above the declared degree {}", p.degree(), self.degree),
                ));
            }
        }
        Ok(())
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let raw: JsonProblem = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.column(), e.to_string()))?;
        let n = raw.variables;
        if n == 0 {
            return Err(parse_err(1, 1, "at least one variable is required"));
        }
        if raw.degree == 0 || !raw.degree.is_multiple_of(2) {
            return Err(parse_err(1, 1, format!("degree must be even and positive, got {}", raw.degree)));
        }
        let to_poly = |terms: &[JsonTerm], what: &str| -> Result<Polynomial> {
            for (k, t) in terms.iter().enumerate() {
                if t.exps.len() != n {
                    return Err(parse_err(
                        1,
                        1,
                        format!("{what}[{k}].exps has length {}, expected {n}", t.exps.len()),
                    ));
                }
            }
            Polynomial::from_terms(n, terms.iter().map(|t| (t.exps.clone(), t.coef)))
        };
        let objective = to_poly(&raw.objective, "objective")?;
        let constraints = raw
            .constraints
            .iter()
            .enumerate()
            .map(|(l, c)| to_poly(c, &format!("constraints[{l}]")))
            .collect::<Result<Vec<_>>>()?;
        let transform = match raw.transform {
            None => None,
            Some(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(parse_err(1, 1, format!("transform must be {n}x{n}")));
                }
                Some(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
            }
        };
        if raw.slater.as_ref().is_some_and(|s| s.len() != n) {
            return Err(parse_err(1, 1, format!("slater point needs {n} coordinates")));
        }
        let file = Self {
            variables: n,
            degree: raw.degree,
            objective,
            constraints,
            transform,
            slater: raw.slater,
            allow_non_enp: raw.allow_non_enp,
        };
        file.check_degrees()?;
        Ok(file)
    }

    /// Normalized text encoding.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "variables {}", self.variables);
        let _ = writeln!(s, "degree {}", self.degree);
        let _ = writeln!(s, "objective: {}", self.objective);
        for c in &self.constraints {
            let _ = writeln!(s, "constraint: {c}");
        }
        if let Some(p) = &self.transform {
            let rows: Vec<String> = (0..p.nrows())
                .map(|i| {
                    (0..p.ncols())
                        .map(|j| format_sig(p[(i, j)], 12))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let _ = writeln!(s, "transform: {}", rows.join("; "));
        }
        if let Some(x) = &self.slater {
            let _ = writeln!(s, "slater: {}", fmt_vec(x));
        }
        if self.allow_non_enp {
            let _ = writeln!(s, "allow_non_enp");
        }
        s
    }

    pub fn to_json(&self) -> String {
        let terms = |p: &Polynomial| -> Vec<JsonTerm> {
            p.terms()
                .map(|(a, c)| JsonTerm {
                    coef: c,
                    exps: a.as_slice().to_vec(),
                })
                .collect()
        };
        let raw = JsonProblem {
            variables: self.variables,
            degree: self.degree,
            objective: terms(&self.objective),
            constraints: self.constraints.iter().map(terms).collect(),
            transform: self.transform.as_ref().map(|p| {
                (0..p.nrows())
                    .map(|i| (0..p.ncols()).map(|j| p[(i, j)]).collect())
                    .collect()
            }),
            slater: self.slater.clone(),
            allow_non_enp: self.allow_non_enp,
        };
        serde_json::to_string_pretty(&raw).expect("problem serializes")
    }

    /// `[objective, constraints…]`
    pub fn polynomials(&self) -> Vec<&Polynomial> {
        std::iter::once(&self.objective).chain(&self.constraints).collect()
    }

    pub fn instance(&self) -> Result<PopInstance> {
        let inst = if self.allow_non_enp {
            PopInstance::new_unchecked(self.objective.clone(), self.constraints.clone(), self.degree)?
        } else {
            PopInstance::new(self.objective.clone(), self.constraints.clone(), self.degree)?
        };
        match &self.slater {
            Some(x0) => inst.with_slater_point(x0.clone()),
            None => Ok(inst),
        }
    }

    /// The tensors of objective and constraints, which must be forms of the
    /// declared degree.
    pub fn tensors(&self) -> Result<Vec<SymmetricTensor>> {
        self.polynomials()
            .into_iter()
            .enumerate()
            .map(|(l, p)| {
                if !p.is_zero() && !p.is_homogeneous(self.degree) {
                    return Err(Error::Precondition(format!(
                        "f_{l} is not homogeneous of degree {}",
                        self.degree
                    )));
                }
                p.to_tensor(self.degree)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub starts: usize,
    pub seed: u64,
    pub grid: Option<f64>,
    pub dump_sdp: Option<PathBuf>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tol: None,
            max_iter: None,
            starts: 64,
            seed: 0,
            grid: None,
            dump_sdp: None,
        }
    }
}

impl Options {
    fn sdp(&self) -> SdpSettings {
        SdpSettings {
            max_iter: self.max_iter.unwrap_or(SdpSettings::default().max_iter),
            ..SdpSettings::default()
        }
    }
}

/// `TENSORALT_SEED` if set and numeric, else `cli_seed`.
pub fn effective_seed(cli_seed: u64) -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(cli_seed)
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub text: String,
    pub json: Value,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("json renders");
                s.push('\n');
                s
            }
        }
    }

    fn from_error(command: &str, e: &Error) -> Self {
        let code = exit_code_for(e);
        Self {
            exit_code: code,
            text: format!("command: {command}\nerror: {e}\n"),
            json: json!({"command": command, "error": e.to_string(), "exit_code": code}),
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Io(_) | Error::Json(_) => EXIT_PARSE,
        Error::Singular(_) | Error::BadGram(_) | Error::MalformedSdp(_) | Error::NegativeDiagonal { .. } => {
            EXIT_INDETERMINATE
        }
        _ => EXIT_PRECONDITION,
    }
}

/// 12 significant digits, as a JSON number.
fn r12(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    format_sig(x, 12)
        .parse::<f64>()
        .map(Value::from)
        .unwrap_or(Value::Null)
}

fn r12_vec(x: &[f64]) -> Value {
    Value::Array(x.iter().map(|&v| r12(v)).collect())
}

fn fmt_vec(x: &[f64]) -> String {
    x.iter().map(|&v| format_sig(v, 12)).collect::<Vec<_>>().join(" ")
}

fn status_label(s: SdpStatus) -> &'static str {
    match s {
        SdpStatus::Optimal => "optimal",
        SdpStatus::PrimalInfeasibleLikely => "primal_infeasible_likely",
        SdpStatus::DualInfeasibleLikely => "dual_infeasible_likely",
        SdpStatus::MaxIterations => "max_iterations",
        SdpStatus::NumericalTrouble => "numerical_trouble",
    }
}

fn dump(opts: &Options, problem: &crate::sdp::SdpProblem, text: &mut String) -> Result<()> {
    if let Some(path) = &opts.dump_sdp {
        problem.write_dump(path)?;
        let _ = writeln!(text, "sdp_dump: {}", path.display());
    }
    Ok(())
}

/// Runs `command` (`classify`, `sos`, `alt`, `solve`, `oracle`) on a file.
pub fn run(command: &str, file: &Path, opts: &Options) -> Outcome {
    let result = ProblemFile::load(file).and_then(|pf| match command {
        "classify" => cmd_classify(&pf),
        "sos" => cmd_sos(&pf, opts),
        "alt" => cmd_alt(&pf, opts),
        "solve" => cmd_solve(&pf, opts),
        "oracle" => cmd_oracle(&pf, opts),
        other => Err(Error::Precondition(format!("unknown command '{other}'"))),
    });
    result.unwrap_or_else(|e| Outcome::from_error(command, &e))
}

/// ENP status of every polynomial, with offending exponents.
pub fn cmd_classify(pf: &ProblemFile) -> Result<Outcome> {
    let m = pf.degree as u32;
    let mut text = String::from("command: classify\n");
    let _ = writeln!(text, "degree: {}", pf.degree);
    let mut entries = Vec::new();
    let mut all = true;
    for (l, p) in pf.polynomials().into_iter().enumerate() {
        let bad = p.enp_violations(m);
        let name = if l == 0 { "objective".to_string() } else { format!("constraint {l}") };
        let list: Vec<String> = bad.iter().map(|e| e.to_string()).collect();
        if bad.is_empty() {
            let _ = writeln!(text, "f_{l} ({name}): ENP");
        } else {
            all = false;
            let _ = writeln!(text, "f_{l} ({name}): NOT_ENP offending {}", list.join(" "));
        }
        entries.push(json!({
            "index": l,
            "role": if l == 0 { "objective" } else { "constraint" },
            "enp": bad.is_empty(),
            "offending": bad.iter().map(|e| e.as_slice().to_vec()).collect::<Vec<_>>(),
        }));
    }
    let verdict = if all { "ALL_ENP" } else { "NOT_ENP" };
    let _ = writeln!(text, "verdict: {verdict}");
    Ok(Outcome {
        exit_code: EXIT_OK,
        text,
        json: json!({"command": "classify", "degree": pf.degree, "polynomials": entries, "verdict": verdict}),
    })
}

/// SOS membership of the objective polynomial.
pub fn cmd_sos(pf: &ProblemFile, opts: &Options) -> Result<Outcome> {
    let settings = SosSettings {
        sdp: opts.sdp(),
        tol: opts.tol.unwrap_or(SosSettings::default().tol),
    };
    let check = sos_check_detailed(&pf.objective, pf.degree, &settings)?;
    let mut text = String::from("command: sos\n");
    let _ = writeln!(text, "tolerance: {}", format_sig(settings.tol, 12));
    dump(opts, &check.problem, &mut text)?;
    let mut j = json!({
        "command": "sos",
        "tolerance": r12(settings.tol),
        "gamma": r12(check.gamma),
        "sdp_status": status_label(check.solution.status()),
    });
    let (label, code) = match &check.verdict {
        SosVerdict::Sos(_) => ("SOS", EXIT_OK),
        SosVerdict::NotSos { .. } => ("NOT_SOS", EXIT_OK),
        SosVerdict::Boundary { .. } => ("BOUNDARY", EXIT_INDETERMINATE),
        SosVerdict::Indeterminate { .. } => ("INDETERMINATE", EXIT_INDETERMINATE),
    };
    let _ = writeln!(text, "verdict: {label}");
    let _ = writeln!(text, "gamma: {}", format_sig(check.gamma, 12));
    j["verdict"] = json!(label);
    match &check.verdict {
        SosVerdict::Sos(cert) => {
            let _ = writeln!(text, "residual: {}", format_sig(cert.residual, 12));
            let _ = writeln!(text, "squares: {}", cert.squares.len());
            let squares: Vec<String> = cert.squares.iter().map(|g| g.pruned(1e-12).to_string()).collect();
            for g in &squares {
                let _ = writeln!(text, "  ({g})^2");
            }
            j["residual"] = r12(cert.residual);
            j["squares"] = json!(squares);
        }
        SosVerdict::NotSos { witness, gamma } => {
            let mineig = witness.min_eigenvalue(&check.basis);
            let _ = writeln!(text, "pairing: {}", format_sig(*gamma, 12));
            let _ = writeln!(text, "moment_matrix_min_eigenvalue: {}", format_sig(mineig, 12));
            let _ = writeln!(text, "moments:");
            let mut moments = Vec::new();
            for (a, v) in witness.values() {
                if v.abs() > 1e-12 {
                    let _ = writeln!(text, "  y{a} = {}", format_sig(v, 12));
                    moments.push(json!({"exps": a.as_slice(), "value": r12(v)}));
                }
            }
            j["pairing"] = r12(*gamma);
            j["moment_matrix_min_eigenvalue"] = r12(mineig);
            j["moments"] = Value::Array(moments);
        }
        _ => {}
    }
    j["exit_code"] = json!(code);
    Ok(Outcome { exit_code: code, text, json: j })
}

/// The alternative theorem for the objective and constraint forms.
pub fn cmd_alt(pf: &ProblemFile, opts: &Options) -> Result<Outcome> {
    let tensors = pf.tensors()?;
    let settings = AltSettings {
        sdp: opts.sdp(),
        tol: opts.tol.unwrap_or(AltSettings::default().tol),
        starts: opts.starts,
        seed: opts.seed,
    };
    let mut text = String::from("command: alt\n");
    let _ = writeln!(text, "tolerance: {}", format_sig(settings.tol, 12));
    if opts.dump_sdp.is_some() {
        let problem = alternative_sdp(&tensors, pf.transform.as_ref())?;
        dump(opts, &problem, &mut text)?;
    }
    let cert = yuan_alternative(&tensors, pf.transform.as_ref(), &settings)?;
    let code = match cert.outcome {
        AltOutcome::StatementI | AltOutcome::StatementII => EXIT_OK,
        AltOutcome::AssumptionViolated => EXIT_PRECONDITION,
        AltOutcome::Indeterminate => EXIT_INDETERMINATE,
    };
    let _ = writeln!(text, "outcome: {}", cert.outcome.label());
    let mut j = json!({
        "command": "alt",
        "tolerance": r12(settings.tol),
        "outcome": cert.outcome.label(),
        "margin": cert.margin.map(r12),
        "notes": cert.notes,
    });
    if let Some(g) = cert.margin {
        let _ = writeln!(text, "margin: {}", format_sig(g, 12));
    }
    if let Some(lam) = &cert.lambda {
        let _ = writeln!(text, "lambda: {}", fmt_vec(lam));
        j["lambda"] = r12_vec(lam);
    }
    if let Some(sos) = &cert.sos {
        let squares: Vec<String> = sos.squares.iter().map(|g| g.pruned(1e-12).to_string()).collect();
        let _ = writeln!(text, "residual: {}", format_sig(sos.residual, 12));
        let _ = writeln!(text, "squares: {}", squares.len());
        for g in &squares {
            let _ = writeln!(text, "  ({g})^2");
        }
        j["residual"] = r12(sos.residual);
        j["squares"] = json!(squares);
    }
    if let Some(x) = &cert.witness {
        let values: Vec<f64> = tensors.iter().map(|t| t.evaluate(x).unwrap_or(f64::NAN)).collect();
        let _ = writeln!(text, "witness: {}", fmt_vec(x));
        let _ = writeln!(text, "values_at_witness: {}", fmt_vec(&values));
        j["witness"] = r12_vec(x);
        j["values_at_witness"] = r12_vec(&values);
    }
    if !cert.violations.is_empty() {
        let _ = writeln!(
            text,
            "violations: {}",
            cert.violations.iter().map(|l| format!("F_{l}")).collect::<Vec<_>>().join(" ")
        );
        j["violations"] = json!(cert.violations);
    }
    for note in &cert.notes {
        let _ = writeln!(text, "note: {note}");
    }
    j["exit_code"] = json!(code);
    Ok(Outcome { exit_code: code, text, json: j })
}

fn slater_label(s: SlaterEvidence) -> &'static str {
    match s {
        SlaterEvidence::Supplied => "supplied",
        SlaterEvidence::SuppliedInvalid => "supplied_invalid",
        SlaterEvidence::Found => "found",
        SlaterEvidence::NotFound => "not_found",
        SlaterEvidence::NotNeeded => "not_needed",
    }
}

/// The exact SOS relaxation with recovery, validation and the oracle.
pub fn cmd_solve(pf: &ProblemFile, opts: &Options) -> Result<Outcome> {
    let inst = pf.instance()?;
    let mut sdp = opts.sdp();
    if let Some(t) = opts.tol {
        sdp.tol = t;
    }
    let settings = PopSettings {
        sdp,
        oracle: OracleBudget {
            starts: opts.starts,
            grid: opts.grid,
            seed: opts.seed,
        },
        run_oracle: true,
    };
    let report = solve_exact_sos(&inst, &settings)?;
    let mut text = String::from("command: solve\n");
    let _ = writeln!(text, "tolerance: {}", format_sig(sdp.tol, 12));
    dump(opts, &report.problem, &mut text)?;
    let _ = writeln!(text, "bound: {}", format_sig(report.bound, 12));
    let _ = writeln!(text, "multipliers: {}", fmt_vec(&report.multipliers));
    let _ = writeln!(text, "validation: {}", report.validation.label());
    let mut j = json!({
        "command": "solve",
        "tolerance": r12(sdp.tol),
        "bound": r12(report.bound),
        "multipliers": r12_vec(&report.multipliers),
        "validation": report.validation.label(),
        "gap": report.gap,
        "slater": slater_label(report.slater),
        "sdp_status": status_label(report.sdp_status),
        "sdp_iterations": report.sdp_iterations,
        "enp_checked": inst.enp_checked(),
        "notes": report.notes,
    });
    if let Some(x) = &report.recovered {
        let v = inst.objective().eval_unchecked(x);
        let _ = writeln!(text, "recovered: {}", fmt_vec(x));
        let _ = writeln!(text, "objective_at_recovered: {}", format_sig(v, 12));
        j["recovered"] = r12_vec(x);
        j["objective_at_recovered"] = r12(v);
    }
    match report.oracle_value() {
        Some(v) => {
            let _ = writeln!(text, "oracle_value: {}", format_sig(v, 12));
            j["oracle_value"] = r12(v);
        }
        None => {
            let _ = writeln!(text, "oracle_value: NO_FEASIBLE_POINT");
            j["oracle_value"] = Value::Null;
        }
    }
    let _ = writeln!(text, "gap: {}", if report.gap { "GAP" } else { "none" });
    let _ = writeln!(text, "slater: {}", slater_label(report.slater));
    let _ = writeln!(text, "sdp_status: {}", status_label(report.sdp_status));
    let _ = writeln!(text, "sdp_iterations: {}", report.sdp_iterations);
    if let Some(sigma) = &report.sigma {
        let _ = writeln!(text, "certificate_residual: {}", format_sig(sigma.residual, 12));
        j["certificate_residual"] = r12(sigma.residual);
    }
    for note in &report.notes {
        let _ = writeln!(text, "note: {note}");
    }
    let code = if report.validation == Validation::Indeterminate {
        EXIT_INDETERMINATE
    } else {
        EXIT_OK
    };
    j["exit_code"] = json!(code);
    Ok(Outcome { exit_code: code, text, json: j })
}

/// Best feasible point found by the multi-start oracle.
pub fn cmd_oracle(pf: &ProblemFile, opts: &Options) -> Result<Outcome> {
    let inst = PopInstance::new_unchecked(pf.objective.clone(), pf.constraints.clone(), pf.degree)?;
    let budget = OracleBudget {
        starts: opts.starts,
        grid: opts.grid,
        seed: opts.seed,
    };
    let r = oracle_minimize(&inst, &budget);
    let mut text = String::from("command: oracle\n");
    let _ = writeln!(text, "tolerance: {}", format_sig(crate::popt::ORACLE_FEAS_TOL, 12));
    let _ = writeln!(text, "starts: {}", r.starts);
    if r.grid_points > 0 {
        let _ = writeln!(text, "grid_points: {}", r.grid_points);
    }
    let mut j = json!({
        "command": "oracle",
        "tolerance": r12(crate::popt::ORACLE_FEAS_TOL),
        "starts": r.starts,
        "grid_points": r.grid_points,
    });
    match &r.best {
        Some((x, v)) => {
            let _ = writeln!(text, "value: {}", format_sig(*v, 12));
            let _ = writeln!(text, "point: {}", fmt_vec(x));
            j["value"] = r12(*v);
            j["point"] = r12_vec(x);
            j["status"] = json!("FEASIBLE");
        }
        None => {
            let _ = writeln!(text, "value: NO_FEASIBLE_POINT");
            j["status"] = json!("NO_FEASIBLE_POINT");
        }
    }
    j["exit_code"] = json!(EXIT_OK);
    Ok(Outcome { exit_code: EXIT_OK, text, json: j })
}
