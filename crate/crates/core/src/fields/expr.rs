use std::fmt;
use std::rc::Rc;

use nalgebra::DMatrix;

use crate::{Error, Result};

use super::Chart;

/// Entries of a square expression matrix, row-major; the carrier for
/// deferred matrix inversion.
#[derive(Debug)]
pub struct ExprMatrixData {
    pub n: usize,
    pub entries: Vec<Expr>,
}

/// A scalar expression over chart coordinates.
///
/// Trees are built through the smart constructors, which fold constants
/// and drop trivial terms so that symbolic derivatives stay compact.
/// Children are reference-counted, so cloning is cheap and derivative
/// trees share subtrees with their parents.
///
/// `InvEntry` is an entry of the inverse of an expression matrix,
/// evaluated by numeric LU at each point. It cannot be produced by the
/// parser; it only arises from symbolic matrix inversion for sizes where
/// the adjugate would blow up.
#[derive(Debug, Clone)]
pub enum Expr {
    Const(f64),
    /// Zero-based coordinate index; `x1` in the surface syntax.
    Coord(usize),
    Add(Rc<Expr>, Rc<Expr>),
    Sub(Rc<Expr>, Rc<Expr>),
    Mul(Rc<Expr>, Rc<Expr>),
    Div(Rc<Expr>, Rc<Expr>),
    Pow(Rc<Expr>, i32),
    Neg(Rc<Expr>),
    Sin(Rc<Expr>),
    Cos(Rc<Expr>),
    Exp(Rc<Expr>),
    Log(Rc<Expr>),
    Sqrt(Rc<Expr>),
    InvEntry {
        matrix: Rc<ExprMatrixData>,
        row: usize,
        col: usize,
    },
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn coord(i: usize) -> Expr {
        Expr::Coord(i)
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 1.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (Expr::Const(x), _) if *x == 0.0 => b,
            (_, Expr::Const(y)) if *y == 0.0 => a,
            _ => Expr::Add(Rc::new(a), Rc::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            (_, Expr::Const(y)) if *y == 0.0 => a,
            (Expr::Const(x), _) if *x == 0.0 => Expr::neg(b),
            _ => Expr::Sub(Rc::new(a), Rc::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (Expr::Const(x), _) if *x == 0.0 => Expr::zero(),
            (_, Expr::Const(y)) if *y == 0.0 => Expr::zero(),
            (Expr::Const(x), _) if *x == 1.0 => b,
            (_, Expr::Const(y)) if *y == 1.0 => a,
            _ => Expr::Mul(Rc::new(a), Rc::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), _) if *x == 0.0 => Expr::zero(),
            (_, Expr::Const(y)) if *y == 1.0 => a,
            (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => Expr::Const(x / y),
            _ => Expr::Div(Rc::new(a), Rc::new(b)),
        }
    }

    pub fn pow(a: Expr, k: i32) -> Expr {
        match (&a, k) {
            (_, 0) => Expr::one(),
            (_, 1) => a,
            (Expr::Const(x), _) => Expr::Const(x.powi(k)),
            _ => Expr::Pow(Rc::new(a), k),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) => Expr::Const(-x),
            Expr::Neg(inner) => inner.as_ref().clone(),
            _ => Expr::Neg(Rc::new(a)),
        }
    }

    pub fn sin(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) => Expr::Const(x.sin()),
            _ => Expr::Sin(Rc::new(a)),
        }
    }

    pub fn cos(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) => Expr::Const(x.cos()),
            _ => Expr::Cos(Rc::new(a)),
        }
    }

    pub fn exp(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) => Expr::Const(x.exp()),
            _ => Expr::Exp(Rc::new(a)),
        }
    }

    pub fn log(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) => Expr::Const(x.ln()),
            _ => Expr::Log(Rc::new(a)),
        }
    }

    pub fn sqrt(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) => Expr::Const(x.sqrt()),
            _ => Expr::Sqrt(Rc::new(a)),
        }
    }

    /// Evaluates at a point. Singularities surface as `inf`/`NaN`; field
    /// validation rejects such points separately.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(v) => *v,
            Expr::Coord(i) => x.get(*i).copied().unwrap_or(f64::NAN),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, k) => a.eval(x).powi(*k),
            Expr::Neg(a) => -a.eval(x),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Log(a) => a.eval(x).ln(),
            Expr::Sqrt(a) => a.eval(x).sqrt(),
            Expr::InvEntry { matrix, row, col } => {
                let n = matrix.n;
                let m = DMatrix::from_fn(n, n, |r, c| matrix.entries[r * n + c].eval(x));
                match m.try_inverse() {
                    Some(inv) => inv[(*row, *col)],
                    None => f64::NAN,
                }
            }
        }
    }

    /// Exact symbolic partial derivative with respect to coordinate `i`
    /// (zero-based).
    pub fn diff(&self, i: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Coord(j) => {
                if *j == i {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Add(a, b) => Expr::add(a.diff(i), b.diff(i)),
            Expr::Sub(a, b) => Expr::sub(a.diff(i), b.diff(i)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(i), b.as_ref().clone()),
                Expr::mul(a.as_ref().clone(), b.diff(i)),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.diff(i), b.as_ref().clone()),
                    Expr::mul(a.as_ref().clone(), b.diff(i)),
                ),
                Expr::pow(b.as_ref().clone(), 2),
            ),
            Expr::Pow(a, k) => Expr::mul(
                Expr::mul(Expr::Const(*k as f64), Expr::pow(a.as_ref().clone(), k - 1)),
                a.diff(i),
            ),
            Expr::Neg(a) => Expr::neg(a.diff(i)),
            Expr::Sin(a) => Expr::mul(Expr::cos(a.as_ref().clone()), a.diff(i)),
            Expr::Cos(a) => Expr::neg(Expr::mul(Expr::sin(a.as_ref().clone()), a.diff(i))),
            Expr::Exp(a) => Expr::mul(Expr::exp(a.as_ref().clone()), a.diff(i)),
            Expr::Log(a) => Expr::div(a.diff(i), a.as_ref().clone()),
            Expr::Sqrt(a) => Expr::div(
                a.diff(i),
                Expr::mul(Expr::Const(2.0), Expr::sqrt(a.as_ref().clone())),
            ),
            // d(M^{-1})_{rc} = −Σ_{a,b} (M^{-1})_{ra} (∂M)_{ab} (M^{-1})_{bc}
            Expr::InvEntry { matrix, row, col } => {
                let n = matrix.n;
                let mut sum = Expr::zero();
                for a in 0..n {
                    for b in 0..n {
                        let dm = matrix.entries[a * n + b].diff(i);
                        if dm.is_zero() {
                            continue;
                        }
                        let left = Expr::InvEntry {
                            matrix: Rc::clone(matrix),
                            row: *row,
                            col: a,
                        };
                        let right = Expr::InvEntry {
                            matrix: Rc::clone(matrix),
                            row: b,
                            col: *col,
                        };
                        sum = Expr::add(sum, Expr::mul(Expr::mul(left, dm), right));
                    }
                }
                Expr::neg(sum)
            }
        }
    }

    /// Largest coordinate index appearing in the tree.
    pub fn max_coord(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Coord(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                max_opt(a.max_coord(), b.max_coord())
            }
            Expr::Pow(a, _)
            | Expr::Neg(a)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a)
            | Expr::Log(a)
            | Expr::Sqrt(a) => a.max_coord(),
            Expr::InvEntry { matrix, .. } => matrix
                .entries
                .iter()
                .map(|e| e.max_coord())
                .fold(None, max_opt),
        }
    }

    /// Whether the expression is free of coordinates (syntactically
    /// constant).
    pub fn is_constant(&self) -> bool {
        self.max_coord().is_none()
    }
}

fn max_opt(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Central finite difference with one Richardson refinement; the
/// independent oracle for every symbolic derivative in the crate.
pub fn finite_difference(e: &Expr, i: usize, x: &[f64], chart: &Chart) -> Result<f64> {
    if !chart.contains_interior(x) {
        return Err(Error::PointOutsideChart(x.to_vec()));
    }
    let h = (1e-6_f64).max(1e-6 * x[i].abs());
    let central = |step: f64| {
        let mut hi = x.to_vec();
        let mut lo = x.to_vec();
        hi[i] += step;
        lo[i] -= step;
        (e.eval(&hi) - e.eval(&lo)) / (2.0 * step)
    };
    let d1 = central(h);
    let d2 = central(h / 2.0);
    Ok((4.0 * d2 - d1) / 3.0)
}

// Printing: precedence levels are sum < product < power < atom. The
// printed form re-parses to an expression with identical values.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, f, 0)
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) | Expr::Neg(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Pow(..) => 3,
        Expr::Const(v) if *v < 0.0 => 1,
        _ => 4,
    }
}

fn write_prec(e: &Expr, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
    let p = prec(e);
    let parens = p < min;
    if parens {
        write!(f, "(")?;
    }
    match e {
        Expr::Const(v) => write!(f, "{v}")?,
        Expr::Coord(i) => write!(f, "x{}", i + 1)?,
        Expr::Add(a, b) => {
            write_prec(a, f, 1)?;
            write!(f, " + ")?;
            write_prec(b, f, 2)?;
        }
        Expr::Sub(a, b) => {
            write_prec(a, f, 1)?;
            write!(f, " - ")?;
            write_prec(b, f, 2)?;
        }
        Expr::Mul(a, b) => {
            write_prec(a, f, 2)?;
            write!(f, " * ")?;
            write_prec(b, f, 3)?;
        }
        Expr::Div(a, b) => {
            write_prec(a, f, 2)?;
            write!(f, " / ")?;
            write_prec(b, f, 3)?;
        }
        Expr::Pow(a, k) => {
            write_prec(a, f, 4)?;
            if *k < 0 {
                write!(f, "^({k})")?;
            } else {
                write!(f, "^{k}")?;
            }
        }
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_prec(a, f, 2)?;
        }
        Expr::Sin(a) => write!(f, "sin({a})")?,
        Expr::Cos(a) => write!(f, "cos({a})")?,
        Expr::Exp(a) => write!(f, "exp({a})")?,
        Expr::Log(a) => write!(f, "log({a})")?,
        Expr::Sqrt(a) => write!(f, "sqrt({a})")?,
        Expr::InvEntry { row, col, .. } => write!(f, "<inv[{row},{col}]>")?,
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

/// Parses an expression in the scenario grammar against a chart.
///
/// Grammar:
/// ```text
/// expr   := ['-'] term (('+'|'-') term)*
/// term   := factor (('*'|'/') factor)*
/// factor := base ('^' integer)?
/// base   := number | 'x'digit+ | func '(' expr ')' | '(' expr ')'
/// func   := sin | cos | exp | log | sqrt
/// ```
/// Whitespace is insignificant. Coordinate indices are checked against
/// the chart dimension.
pub fn parse_expression(text: &str, chart: &Chart) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::Syntax {
            offset: p.pos,
            message: format!("unexpected `{}`", p.peek_char()),
        });
    }
    if let Some(i) = e.max_coord() {
        if i >= chart.dim() {
            return Err(Error::UnknownCoordinate {
                index: i + 1,
                dim: chart.dim(),
            });
        }
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_char(&self) -> String {
        match self.peek() {
            Some(c) => (c as char).to_string(),
            None => "end of input".to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        self.skip_ws();
        let negated = self.eat(b'-');
        let mut acc = self.term()?;
        if negated {
            acc = Expr::neg(acc);
        }
        loop {
            self.skip_ws();
            if self.eat(b'+') {
                let rhs = self.term()?;
                acc = Expr::add(acc, rhs);
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                acc = Expr::sub(acc, rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                let rhs = self.factor()?;
                acc = Expr::mul(acc, rhs);
            } else if self.eat(b'/') {
                let rhs = self.factor()?;
                acc = Expr::div(acc, rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let k = self.integer()?;
            Ok(Expr::pow(base, k))
        } else {
            Ok(base)
        }
    }

    fn integer(&mut self) -> Result<i32> {
        let start = self.pos;
        let parens = self.eat(b'(');
        if parens {
            self.skip_ws();
        }
        let mut digits = String::new();
        if self.eat(b'-') {
            digits.push('-');
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.src[self.pos] as char);
            self.pos += 1;
        }
        let value = digits.parse::<i32>().map_err(|_| Error::Syntax {
            offset: start,
            message: "expected integer exponent".to_string(),
        })?;
        if parens {
            self.skip_ws();
            if !self.eat(b')') {
                return Err(Error::Syntax {
                    offset: self.pos,
                    message: "expected `)` after exponent".to_string(),
                });
            }
        }
        Ok(value)
    }

    fn base(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(Error::Syntax {
                        offset: self.pos,
                        message: "expected `)`".to_string(),
                    });
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            _ => Err(Error::Syntax {
                offset: self.pos,
                message: format!("expected expression, found `{}`", self.peek_char()),
            }),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
            self.pos += 1;
        }
        // Optional exponent part, accepted for convenience in scenario
        // files.
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| Error::Syntax {
                offset: start,
                message: format!("invalid number `{text}`"),
            })
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if let Some(rest) = name.strip_prefix('x') {
            if !rest.is_empty() && rest.bytes().all(|c| c.is_ascii_digit()) {
                let index: usize = rest.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("invalid coordinate `{name}`"),
                })?;
                if index == 0 {
                    return Err(Error::Syntax {
                        offset: start,
                        message: "coordinates are numbered from x1".to_string(),
                    });
                }
                return Ok(Expr::Coord(index - 1));
            }
        }
        let func: fn(Expr) -> Expr = match name {
            "sin" => Expr::sin,
            "cos" => Expr::cos,
            "exp" => Expr::exp,
            "log" => Expr::log,
            "sqrt" => Expr::sqrt,
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unknown identifier `{name}`"),
                })
            }
        };
        self.skip_ws();
        if !self.eat(b'(') {
            return Err(Error::Syntax {
                offset: self.pos,
                message: format!("expected `(` after `{name}`"),
            });
        }
        let arg = self.expr()?;
        self.skip_ws();
        if !self.eat(b')') {
            return Err(Error::Syntax {
                offset: self.pos,
                message: format!("expected `)` closing `{name}(`"),
            });
        }
        Ok(func(arg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn chart3() -> Chart {
        Chart::unit_cube(3, 3).unwrap()
    }

    #[test]
    fn parse_and_eval_polynomial() {
        let e = parse_expression("1 + x1^2", &chart3()).unwrap();
        assert_eq!(e.eval(&[2.0, 0.0, 0.0]), 5.0);
        let e = parse_expression("x1*x2 - 3/x3", &chart3()).unwrap();
        assert!((e.eval(&[2.0, 5.0, 4.0]) - 9.25).abs() < 1e-15);
    }

    #[test]
    fn parse_functions_and_precedence() {
        let e = parse_expression("sin(x1) + cos(x2)*exp(x3)", &chart3()).unwrap();
        let x = [0.3, 0.7, 0.1];
        let expected = 0.3_f64.sin() + 0.7_f64.cos() * 0.1_f64.exp();
        assert!((e.eval(&x) - expected).abs() < 1e-15);

        // Power binds tighter than unary minus and products.
        let e = parse_expression("-x1^2", &chart3()).unwrap();
        assert_eq!(e.eval(&[3.0, 0.0, 0.0]), -9.0);
        let e = parse_expression("2*x1^-1", &chart3()).unwrap();
        assert_eq!(e.eval(&[4.0, 0.0, 0.0]), 0.5);
    }

    #[test]
    fn parse_reports_offsets() {
        match parse_expression("log(", &chart3()) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse_expression("x1 + ", &chart3()) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse_expression("", &chart3()).is_err());
        assert!(parse_expression("x1 x2", &chart3()).is_err());
    }

    #[test]
    fn parse_rejects_unknown_coordinates() {
        match parse_expression("x5", &chart3()) {
            Err(Error::UnknownCoordinate { index, dim }) => {
                assert_eq!((index, dim), (5, 3));
            }
            other => panic!("expected coordinate error, got {other:?}"),
        }
        assert!(parse_expression("y1", &chart3()).is_err());
    }

    #[test]
    fn constant_folding() {
        let chart = chart3();
        assert!(parse_expression("2*3 + 1", &chart).unwrap().is_constant());
        let e = parse_expression("0*x1 + x2", &chart).unwrap();
        assert!(matches!(e, Expr::Coord(1)));
    }

    #[test]
    fn differentiation_rules() {
        let chart = chart3();
        let e = parse_expression("sin(x1^2 + 3*x2)", &chart).unwrap();
        let d = e.diff(0);
        let x = [0.4, 0.2, 0.0];
        let expected = (0.4f64 * 0.4 + 0.6).cos() * 0.8;
        assert!((d.eval(&x) - expected).abs() < 1e-14);
        // Constants differentiate to zero exactly.
        assert!(parse_expression("7", &chart).unwrap().diff(0).is_zero());
        // Quotient rule.
        let e = parse_expression("x1/x2", &chart).unwrap();
        assert!((e.diff(1).eval(&[3.0, 2.0, 0.0]) + 0.75).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let chart = chart3();
        let samples = [
            "x1^3 - 2*x2*x3",
            "exp(x1)*sin(3*x2)",
            "log(1 + x1^2 + x3^2)",
            "sqrt(1 + x2^2)",
            "1/(1 + x1*x2)",
        ];
        for text in samples {
            let e = parse_expression(text, &chart).unwrap();
            let x = [0.31, 0.57, 0.43];
            for i in 0..3 {
                let exact = e.diff(i).eval(&x);
                let fd = finite_difference(&e, i, &x, &chart).unwrap();
                assert!(
                    (exact - fd).abs() <= 1e-6 * exact.abs().max(1.0),
                    "{text} d{i}: exact {exact}, fd {fd}"
                );
            }
        }
    }

    #[test]
    fn finite_difference_needs_interior_points() {
        let chart = chart3();
        let e = parse_expression("x1", &chart).unwrap();
        assert!(finite_difference(&e, 0, &[0.0, 0.5, 0.5], &chart).is_err());
    }

    #[test]
    fn display_round_trips() {
        let chart = chart3();
        for text in [
            "1 + x1^2",
            "-x1^2 + x2*x3",
            "sin(x1)*cos(x2) - exp(-x3)",
            "(x1 + x2)^3/(1 + x3^2)",
            "sqrt(1 + x1^2) + log(2 + x2)",
        ] {
            let e = parse_expression(text, &chart).unwrap();
            let printed = e.to_string();
            let reparsed = parse_expression(&printed, &chart)
                .unwrap_or_else(|err| panic!("reparse of `{printed}` failed: {err}"));
            for x in chart.evaluation_points() {
                let a = e.eval(&x);
                let b = reparsed.eval(&x);
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "`{text}` -> `{printed}`");
            }
        }
    }

    #[test]
    fn max_coord_tracks_usage() {
        let chart = chart3();
        assert_eq!(parse_expression("4", &chart).unwrap().max_coord(), None);
        assert_eq!(
            parse_expression("x1 + x3^2", &chart).unwrap().max_coord(),
            Some(2)
        );
    }

    #[test]
    fn inv_entry_eval_and_diff() {
        // M = [[1 + x1, 0], [0, 2]] on a 1-dimensional chart; the inverse
        // entry (0,0) is 1/(1+x1) with derivative −1/(1+x1)².
        let data = std::rc::Rc::new(ExprMatrixData {
            n: 2,
            entries: vec![
                Expr::add(Expr::one(), Expr::coord(0)),
                Expr::zero(),
                Expr::zero(),
                Expr::constant(2.0),
            ],
        });
        let inv00 = Expr::InvEntry {
            matrix: data,
            row: 0,
            col: 0,
        };
        let x = [0.5];
        assert!((inv00.eval(&x) - 1.0 / 1.5).abs() < 1e-15);
        let d = inv00.diff(0);
        assert!((d.eval(&x) + 1.0 / (1.5 * 1.5)).abs() < 1e-12);
    }
}
