//! Plain-text LP files in a CPLEX-LP-like layout with exact rationals.
//!
//! ```text
//! \ comment
//! Minimize
//!  obj: 2 x0 - 1/3 x1
//! Subject To
//!  c0: x0 + x1 >= 1
//! Bounds
//!  x0 >= 0
//!  x1 >= 0
//! End
//! ```
//!
//! Every variable is non-negative. The `Bounds` section lists the variables in
//! index order, so a written program parses back with the same indexing.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::problem::{LinearProgram, Relation, Sense};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::LpError;

fn var_label(lp: &LinearProgram, j: usize) -> String {
    lp.var_name(j).map(str::to_string).unwrap_or_else(|| format!("x{j}"))
}

fn write_terms(out: &mut String, lp: &LinearProgram, row: &[(usize, Rational)]) {
    if row.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (k, (j, v)) in row.iter().enumerate() {
        let sign = if v.is_negative() { "-" } else { "+" };
        if k > 0 || v.is_negative() {
            write!(out, " {sign}").unwrap();
        }
        let mag = v.abs();
        if mag.is_one() {
            write!(out, " {}", var_label(lp, *j)).unwrap();
        } else {
            write!(out, " {} {}", format_rational(&mag), var_label(lp, *j)).unwrap();
        }
    }
}

pub fn write_lp(lp: &LinearProgram) -> String {
    let mut out = String::new();
    out.push_str(match lp.sense() {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    write_terms(&mut out, lp, lp.objective());
    out.push_str("\nSubject To\n");
    for (i, c) in lp.constraints().iter().enumerate() {
        let name = c.name.clone().unwrap_or_else(|| format!("c{i}"));
        write!(out, " {name}:").unwrap();
        write_terms(&mut out, lp, &c.coeffs);
        let rel = match c.relation {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        };
        writeln!(out, " {rel} {}", format_rational(&c.rhs)).unwrap();
    }
    out.push_str("Bounds\n");
    for j in 0..lp.num_vars() {
        writeln!(out, " {} >= 0", var_label(lp, j)).unwrap();
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Sign(bool),
    Num(Rational),
    Ident(String),
    Label(String),
    Rel(Relation),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    End,
}

fn parse_err(line: usize, message: impl Into<String>) -> LpError {
    LpError::Parse {
        line,
        message: message.into(),
    }
}

fn tokenize(text: &str, line: usize, out: &mut Vec<(usize, Tok)>) -> Result<(), LpError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch == '\\' {
            break;
        } else if ch == '+' || ch == '-' {
            out.push((line, Tok::Sign(ch == '-')));
            i += 1;
        } else if matches!(ch, '<' | '>' | '=') {
            let mut s = String::new();
            while i < chars.len() && matches!(chars[i], '<' | '>' | '=') {
                s.push(chars[i]);
                i += 1;
            }
            let rel = match s.as_str() {
                "=" | "==" => Relation::Eq,
                "<=" | "=<" | "<" => Relation::Le,
                ">=" | "=>" | ">" => Relation::Ge,
                _ => return Err(parse_err(line, format!("unknown relation {s:?}"))),
            };
            out.push((line, Tok::Rel(rel)));
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.' || chars[i] == '/') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = parse_rational(&s).map_err(|e| parse_err(line, e.to_string()))?;
            out.push((line, Tok::Num(v)));
        } else {
            let start = i;
            while i < chars.len()
                && !chars[i].is_whitespace()
                && !matches!(chars[i], '+' | '-' | '<' | '>' | '=' | ':' | '\\')
            {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if i < chars.len() && chars[i] == ':' {
                i += 1;
                out.push((line, Tok::Label(s)));
            } else {
                out.push((line, Tok::Ident(s)));
            }
        }
    }
    Ok(())
}

struct Vars {
    index: HashMap<String, usize>,
    names: Vec<String>,
}

impl Vars {
    fn get(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        let j = self.names.len();
        self.index.insert(name.to_string(), j);
        self.names.push(name.to_string());
        j
    }
}

/// Parses a linear expression; stops at a relation, label or end of input.
fn parse_expr(
    toks: &[(usize, Tok)],
    pos: &mut usize,
    vars: &mut Vars,
) -> Result<Vec<(usize, Rational)>, LpError> {
    let mut terms = Vec::new();
    loop {
        let mut negative = false;
        let mut saw_sign = false;
        while let Some((_, Tok::Sign(neg))) = toks.get(*pos) {
            negative ^= *neg;
            saw_sign = true;
            *pos += 1;
        }
        let mut coeff = Rational::one();
        let mut saw_num = false;
        if let Some((_, Tok::Num(v))) = toks.get(*pos) {
            coeff = v.clone();
            saw_num = true;
            *pos += 1;
        }
        match toks.get(*pos) {
            Some((_, Tok::Ident(name))) => {
                let j = vars.get(name);
                *pos += 1;
                terms.push((j, if negative { -coeff } else { coeff }));
            }
            other => {
                if saw_num && coeff.is_zero() && !saw_sign {
                    // A lone "0" stands for the empty expression.
                    return Ok(terms);
                }
                if saw_sign || saw_num {
                    let line = other.map(|t| t.0).unwrap_or(0);
                    return Err(parse_err(line, "expected a variable name"));
                }
                return Ok(terms);
            }
        }
    }
}

pub fn parse_lp(text: &str) -> Result<LinearProgram, LpError> {
    let mut section = Section::None;
    let mut sense = None;
    let mut objective_toks = Vec::new();
    let mut constraint_toks = Vec::new();
    let mut bound_lines: Vec<(usize, Vec<(usize, Tok)>)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let key = raw.trim().to_ascii_lowercase();
        let key = key.split('\\').next().unwrap_or("").trim().to_string();
        let next = match key.as_str() {
            "minimize" | "minimise" | "min" => {
                sense = Some(Sense::Minimize);
                Some(Section::Objective)
            }
            "maximize" | "maximise" | "max" => {
                sense = Some(Sense::Maximize);
                Some(Section::Objective)
            }
            "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
            "bounds" => Some(Section::Bounds),
            "end" => Some(Section::End),
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            continue;
        }
        match section {
            Section::None => {
                let mut t = Vec::new();
                tokenize(raw, line, &mut t)?;
                if !t.is_empty() {
                    return Err(parse_err(line, "content before the objective section"));
                }
            }
            Section::Objective => tokenize(raw, line, &mut objective_toks)?,
            Section::Constraints => tokenize(raw, line, &mut constraint_toks)?,
            Section::Bounds => {
                let mut t = Vec::new();
                tokenize(raw, line, &mut t)?;
                if !t.is_empty() {
                    bound_lines.push((line, t));
                }
            }
            Section::End => {
                let mut t = Vec::new();
                tokenize(raw, line, &mut t)?;
                if !t.is_empty() {
                    return Err(parse_err(line, "content after End"));
                }
            }
        }
    }
    let sense = sense.ok_or_else(|| parse_err(1, "missing objective section"))?;

    let mut vars = Vars {
        index: HashMap::new(),
        names: Vec::new(),
    };
    for (line, t) in &bound_lines {
        match t.as_slice() {
            [(_, Tok::Ident(name)), (_, Tok::Rel(Relation::Ge)), (_, Tok::Num(v))] if v.is_zero() => {
                vars.get(name);
            }
            _ => return Err(parse_err(*line, "only bounds of the form `x >= 0` are supported")),
        }
    }

    let mut pos = 0;
    if let Some((_, Tok::Label(_))) = objective_toks.first() {
        pos = 1;
    }
    let objective = parse_expr(&objective_toks, &mut pos, &mut vars)?;
    if pos != objective_toks.len() {
        return Err(parse_err(objective_toks[pos].0, "unexpected token in objective"));
    }

    let mut rows = Vec::new();
    let mut pos = 0;
    while pos < constraint_toks.len() {
        let line = constraint_toks[pos].0;
        let mut name = None;
        if let Some((_, Tok::Label(l))) = constraint_toks.get(pos) {
            name = Some(l.clone());
            pos += 1;
        }
        let coeffs = parse_expr(&constraint_toks, &mut pos, &mut vars)?;
        let relation = match constraint_toks.get(pos) {
            Some((_, Tok::Rel(r))) => *r,
            _ => return Err(parse_err(line, "expected a relation")),
        };
        pos += 1;
        let mut negative = false;
        while let Some((_, Tok::Sign(neg))) = constraint_toks.get(pos) {
            negative ^= *neg;
            pos += 1;
        }
        let rhs = match constraint_toks.get(pos) {
            Some((_, Tok::Num(v))) => v.clone(),
            _ => return Err(parse_err(line, "expected a right-hand side")),
        };
        pos += 1;
        rows.push((name, coeffs, relation, if negative { -rhs } else { rhs }));
    }

    let mut lp = LinearProgram::with_vars(sense, vars.names.len());
    for (j, name) in vars.names.iter().enumerate() {
        lp.set_var_name(j, name.clone());
    }
    lp.set_objective(objective);
    for (name, coeffs, relation, rhs) in rows {
        lp.add_named_constraint(name, coeffs, relation, rhs);
    }
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn round_trip() {
        let mut lp = LinearProgram::with_vars(Sense::Maximize, 3);
        lp.set_objective(vec![(0, rat(2, 3)), (2, int(-1))]);
        lp.add_constraint(vec![(0, int(1)), (1, rat(-5, 2))], Relation::Le, int(3));
        lp.add_constraint(vec![(1, int(1)), (2, int(1))], Relation::Eq, rat(-1, 4));
        lp.add_constraint(vec![], Relation::Ge, int(0));
        let text = write_lp(&lp);
        let back = parse_lp(&text).unwrap();
        assert_eq!(back.num_vars(), 3);
        assert_eq!(back.objective(), lp.objective());
        assert_eq!(back.sense(), lp.sense());
        assert_eq!(back.num_constraints(), 3);
        for (a, b) in back.constraints().iter().zip(lp.constraints()) {
            assert_eq!(a.coeffs, b.coeffs);
            assert_eq!(a.relation, b.relation);
            assert_eq!(a.rhs, b.rhs);
        }
        assert_eq!(write_lp(&back), text);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_lp("Minimize\n obj: x\nSubject To\n c: x + >= 1\nEnd\n").unwrap_err();
        assert!(matches!(err, LpError::Parse { line: 4, .. }));
    }
}
