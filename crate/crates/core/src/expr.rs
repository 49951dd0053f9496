//! A small arithmetic expression language for cost functions and limit
//! states.
//!
//! Grammar (precedence low to high):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?            // right-associative, binds above unary minus
//! atom    := number | identifier | identifier '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin`, `cos`, `sqrt`, `ln`, `exp`, `abs` (1 argument) and
//! `min`, `max` (2 arguments). Identifiers resolve against the variable list
//! fixed at parse time, falling back to a caller-supplied constant table;
//! `pi` and `e` are always available unless shadowed by a variable.
//!
//! Expressions compile to a closed AST evaluated against a value slice in
//! variable-list order, which keeps problem definitions data (storable in
//! config files) rather than code.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum UnaryFn {
    Sin,
    Cos,
    Sqrt,
    Ln,
    Exp,
    Abs,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum BinaryFn {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Num(f64),
    Var(usize),
    Unary(UnaryFn, Box<Node>),
    Binary(BinaryFn, Box<Node>, Box<Node>),
}

impl Node {
    fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Var(i) => vars[*i],
            Node::Unary(f, a) => {
                let x = a.eval(vars);
                match f {
                    UnaryFn::Sin => x.sin(),
                    UnaryFn::Cos => x.cos(),
                    UnaryFn::Sqrt => x.sqrt(),
                    UnaryFn::Ln => x.ln(),
                    UnaryFn::Exp => x.exp(),
                    UnaryFn::Abs => x.abs(),
                    UnaryFn::Neg => -x,
                }
            }
            Node::Binary(f, a, b) => {
                let x = a.eval(vars);
                let y = b.eval(vars);
                match f {
                    BinaryFn::Add => x + y,
                    BinaryFn::Sub => x - y,
                    BinaryFn::Mul => x * y,
                    BinaryFn::Div => x / y,
                    BinaryFn::Pow => x.powf(y),
                    BinaryFn::Min => x.min(y),
                    BinaryFn::Max => x.max(y),
                }
            }
        }
    }
}

/// A parsed expression bound to a fixed variable order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledExpr {
    source: String,
    variables: Vec<String>,
    root: Node,
}

impl CompiledExpr {
    /// Evaluate with `values` in the order of the variable list given at
    /// parse time. Panics if the slice length is wrong (programming error,
    /// not input error).
    pub fn eval(&self, values: &[f64]) -> f64 {
        assert_eq!(
            values.len(),
            self.variables.len(),
            "expression `{}` expects {} values",
            self.source,
            self.variables.len()
        );
        self.root.eval(values)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }
}

/// Parse `source` against a fixed variable order and optional named constants.
pub fn parse_expr(
    source: &str,
    variables: &[&str],
    constants: &[(&str, f64)],
) -> Result<CompiledExpr> {
    let mut parser = Parser {
        src: source,
        chars: source.char_indices().peekable(),
        variables,
        constants,
    };
    let root = parser.parse_expr()?;
    parser.skip_ws();
    if let Some(&(pos, c)) = parser.chars.peek() {
        return Err(parser.error_at(pos, format!("unexpected `{c}`")));
    }
    Ok(CompiledExpr {
        source: source.to_string(),
        variables: variables.iter().map(|s| s.to_string()).collect(),
        root,
    })
}

struct Parser<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    variables: &'a [&'a str],
    constants: &'a [(&'a str, f64)],
}

impl<'a> Parser<'a> {
    fn error_at(&self, byte_pos: usize, msg: String) -> Error {
        let upto = &self.src[..byte_pos];
        let line = upto.matches('\n').count() + 1;
        let col = upto.chars().rev().take_while(|&c| c != '\n').count() + 1;
        Error::ExprParse { line, col, msg }
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some(&(_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn peek_char(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.peek().map(|&(_, c)| c)
    }

    fn parse_expr(&mut self) -> Result<Node> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek_char() {
                Some('+') => {
                    self.chars.next();
                    let rhs = self.parse_term()?;
                    lhs = Node::Binary(BinaryFn::Add, Box::new(lhs), Box::new(rhs));
                }
                Some('-') => {
                    self.chars.next();
                    let rhs = self.parse_term()?;
                    lhs = Node::Binary(BinaryFn::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Node> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek_char() {
                Some('*') => {
                    self.chars.next();
                    let rhs = self.parse_unary()?;
                    lhs = Node::Binary(BinaryFn::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some('/') => {
                    self.chars.next();
                    let rhs = self.parse_unary()?;
                    lhs = Node::Binary(BinaryFn::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Node> {
        if self.peek_char() == Some('-') {
            self.chars.next();
            let inner = self.parse_unary()?;
            return Ok(Node::Unary(UnaryFn::Neg, Box::new(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Node> {
        let base = self.parse_atom()?;
        if self.peek_char() == Some('^') {
            self.chars.next();
            // right-associative; exponent may carry its own unary minus
            let exponent = self.parse_unary()?;
            return Ok(Node::Binary(
                BinaryFn::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Node> {
        self.skip_ws();
        let &(pos, c) = match self.chars.peek() {
            Some(pc) => pc,
            None => {
                let end = self.src.len();
                return Err(self.error_at(end, "unexpected end of expression".into()));
            }
        };
        if c == '(' {
            self.chars.next();
            let inner = self.parse_expr()?;
            self.expect(')')?;
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.parse_number(pos);
        }
        if c.is_ascii_alphabetic() || c == '_' {
            return self.parse_identifier(pos);
        }
        Err(self.error_at(pos, format!("unexpected `{c}`")))
    }

    fn expect(&mut self, want: char) -> Result<()> {
        self.skip_ws();
        match self.chars.peek() {
            Some(&(_, c)) if c == want => {
                self.chars.next();
                Ok(())
            }
            Some(&(pos, c)) => Err(self.error_at(pos, format!("expected `{want}`, found `{c}`"))),
            None => Err(self.error_at(self.src.len(), format!("expected `{want}`"))),
        }
    }

    fn parse_number(&mut self, start: usize) -> Result<Node> {
        let mut end = start;
        let mut saw_exp = false;
        while let Some(&(pos, c)) = self.chars.peek() {
            let take = c.is_ascii_digit()
                || c == '.'
                || c == 'e'
                || c == 'E'
                || ((c == '+' || c == '-') && saw_exp && {
                    // sign only directly after the exponent marker
                    let prev = self.src[..pos].chars().next_back();
                    matches!(prev, Some('e') | Some('E'))
                });
            if c == 'e' || c == 'E' {
                saw_exp = true;
            }
            if !take {
                break;
            }
            end = pos + c.len_utf8();
            self.chars.next();
        }
        let text = &self.src[start..end];
        text.parse::<f64>()
            .map(Node::Num)
            .map_err(|_| self.error_at(start, format!("malformed number `{text}`")))
    }

    fn parse_identifier(&mut self, start: usize) -> Result<Node> {
        let mut end = start;
        while let Some(&(pos, c)) = self.chars.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                end = pos + c.len_utf8();
                self.chars.next();
            } else {
                break;
            }
        }
        let name = &self.src[start..end];
        if self.peek_char() == Some('(') {
            self.chars.next();
            return self.parse_call(start, name);
        }
        if let Some(idx) = self.variables.iter().position(|v| *v == name) {
            return Ok(Node::Var(idx));
        }
        if let Some(&(_, v)) = self.constants.iter().find(|(n, _)| *n == name) {
            return Ok(Node::Num(v));
        }
        match name {
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            "e" => Ok(Node::Num(std::f64::consts::E)),
            _ => Err(self.error_at(start, format!("unknown identifier `{name}`"))),
        }
    }

    fn parse_call(&mut self, start: usize, name: &str) -> Result<Node> {
        let mut args = vec![self.parse_expr()?];
        while self.peek_char() == Some(',') {
            self.chars.next();
            args.push(self.parse_expr()?);
        }
        self.expect(')')?;
        let unary = |f: UnaryFn, mut args: Vec<Node>| Node::Unary(f, Box::new(args.remove(0)));
        let binary = |f: BinaryFn, mut args: Vec<Node>| {
            let a = args.remove(0);
            let b = args.remove(0);
            Node::Binary(f, Box::new(a), Box::new(b))
        };
        let arity_err = |p: &Self, want: usize, got: usize| {
            p.error_at(
                start,
                format!("function `{name}` takes {want} argument(s), got {got}"),
            )
        };
        match (name, args.len()) {
            ("sin", 1) => Ok(unary(UnaryFn::Sin, args)),
            ("cos", 1) => Ok(unary(UnaryFn::Cos, args)),
            ("sqrt", 1) => Ok(unary(UnaryFn::Sqrt, args)),
            ("ln", 1) => Ok(unary(UnaryFn::Ln, args)),
            ("exp", 1) => Ok(unary(UnaryFn::Exp, args)),
            ("abs", 1) => Ok(unary(UnaryFn::Abs, args)),
            ("min", 2) => Ok(binary(BinaryFn::Min, args)),
            ("max", 2) => Ok(binary(BinaryFn::Max, args)),
            ("sin" | "cos" | "sqrt" | "ln" | "exp" | "abs", n) => Err(arity_err(self, 1, n)),
            ("min" | "max", n) => Err(arity_err(self, 2, n)),
            _ => Err(self.error_at(start, format!("unknown function `{name}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ev(src: &str, vars: &[&str], vals: &[f64]) -> f64 {
        parse_expr(src, vars, &[]).unwrap().eval(vals)
    }

    #[test]
    fn linear_combination() {
        assert_abs_diff_eq!(
            ev("x1 + x2 - 3", &["x1", "x2"], &[1.0, 1.0]),
            -1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn oscillatory_limit_state_matches_direct_arithmetic() {
        let x1 = 2.84f64;
        let x2 = 3.23f64;
        let direct = -x1 * (4.0 * x1).sin() - 1.1 * x2 * (2.0 * x2).sin();
        let via_expr = ev(
            "-x1*sin(4*x1) - 1.1*x2*sin(2*x2)",
            &["x1", "x2"],
            &[x1, x2],
        );
        assert_abs_diff_eq!(via_expr, direct, epsilon = 1e-15);
        // frozen from independent evaluation
        assert_abs_diff_eq!(via_expr, 2.028538902993728, epsilon = 1e-12);
    }

    #[test]
    fn precedence_and_power() {
        assert_abs_diff_eq!(ev("2 + 3 * 4", &[], &[]), 14.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev("2 ^ 3 ^ 2", &[], &[]), 512.0, epsilon = 1e-12); // right-assoc
        assert_abs_diff_eq!(ev("-2 ^ 2", &[], &[]), -4.0, epsilon = 1e-15); // -(2^2)
        assert_abs_diff_eq!(ev("(1 + 2) * (3 - 1)", &[], &[]), 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev("2 ^ -1", &[], &[]), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn functions_and_constants() {
        assert_abs_diff_eq!(ev("sin(pi / 2)", &[], &[]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev("ln(e)", &[], &[]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev("sqrt(16) + abs(-2)", &[], &[]), 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev("min(3, 2) + max(5, 1)", &[], &[]), 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev("exp(0)", &[], &[]), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn caller_constants_resolve() {
        let e = parse_expr("rho * g0", &[], &[("rho", 7860.0), ("g0", 9.81)]).unwrap();
        assert_abs_diff_eq!(e.eval(&[]), 7860.0 * 9.81, epsilon = 1e-9);
    }

    #[test]
    fn scientific_notation() {
        assert_abs_diff_eq!(ev("3.5e6 / 1e3", &[], &[]), 3500.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev("1.75E+5", &[], &[]), 1.75e5, epsilon = 1e-12);
        assert_abs_diff_eq!(ev("2e-3", &[], &[]), 0.002, epsilon = 1e-18);
    }

    #[test]
    fn unknown_identifier_is_reported() {
        let err = parse_expr("x1 + y9", &["x1"], &[]).unwrap_err();
        assert!(matches!(err, Error::ExprUnknownIdentifier(ref n) if n == "y9"));
    }

    #[test]
    fn arity_errors_are_reported() {
        let err = parse_expr("min(1)", &[], &[]).unwrap_err();
        assert!(err.to_string().contains("takes 2 argument"));
        let err = parse_expr("sqrt(1, 2)", &[], &[]).unwrap_err();
        assert!(err.to_string().contains("takes 1 argument"));
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_expr("1 + )", &[], &[]) {
            Err(Error::ExprParse { line, col, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(col, 5);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_expr("(1 + 2", &[], &[]) {
            Err(Error::ExprParse { .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn trailing_garbage_rejected() {
        assert!(parse_expr("1 2", &[], &[]).is_err());
        assert!(parse_expr("x1 x1", &["x1"], &[]).is_err());
    }

    #[test]
    fn variables_shadow_builtin_constants() {
        let e = parse_expr("pi", &["pi"], &[]).unwrap();
        assert_abs_diff_eq!(e.eval(&[2.0]), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn serialization_round_trip() {
        let e = parse_expr("x1 * sin(x2) + 0.5", &["x1", "x2"], &[]).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        let back: CompiledExpr = serde_json::from_str(&json).unwrap();
        assert_eq!(e, back);
        assert_abs_diff_eq!(back.eval(&[2.0, 1.0]), e.eval(&[2.0, 1.0]), epsilon = 0.0);
    }
}
