//! Gate parameters folded to an exact `a·π + b` form where possible.

use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone)]
pub enum GateParam {
    /// `pi·π + rat`, compared by rational equality.
    Exact { pi: Rational, rat: Rational },
    /// Anything the exact form cannot hold. Compared bitwise.
    Float(f64),
    /// Depends on a classical value unknown at analysis time. Two symbols are
    /// equal when their canonical texts and signs agree.
    Symbol { negated: bool, text: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivisionByZero;

impl PartialEq for GateParam {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (GateParam::Exact { pi: a, rat: b }, GateParam::Exact { pi: c, rat: d }) => a == c && b == d,
            (GateParam::Float(a), GateParam::Float(b)) => a.to_bits() == b.to_bits(),
            (GateParam::Symbol { negated: a, text: s }, GateParam::Symbol { negated: b, text: t }) => a == b && s == t,
            _ => false,
        }
    }
}

impl Eq for GateParam {}

impl GateParam {
    pub fn int(v: i64) -> Self {
        GateParam::Exact { pi: Rational::zero(), rat: Rational::from_integer(v as i128) }
    }

    pub fn pi() -> Self {
        GateParam::Exact { pi: Rational::from_integer(1), rat: Rational::zero() }
    }

    pub fn pi_fraction(num: i128, den: i128) -> Self {
        GateParam::Exact { pi: Rational::new(num, den), rat: Rational::zero() }
    }

    pub fn symbol(text: impl Into<String>) -> Self {
        GateParam::Symbol { negated: false, text: text.into() }
    }

    /// Parse a decimal literal such as `4.0`, `0.125` or `1e-3` exactly.
    pub fn literal(text: &str) -> Self {
        match parse_decimal(text) {
            Some(r) => GateParam::Exact { pi: Rational::zero(), rat: r },
            None => GateParam::Float(text.parse().unwrap_or(f64::NAN)),
        }
    }

    pub fn to_f64(&self) -> Option<f64> {
        match self {
            GateParam::Exact { pi, rat } => Some(pi.to_f64()? * std::f64::consts::PI + rat.to_f64()?),
            GateParam::Float(v) => Some(*v),
            GateParam::Symbol { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, GateParam::Exact { .. })
    }

    pub fn neg(&self) -> Self {
        match self {
            GateParam::Exact { pi, rat } => GateParam::Exact { pi: -pi, rat: -rat },
            GateParam::Float(v) => GateParam::Float(-v),
            GateParam::Symbol { negated, text } => GateParam::Symbol { negated: !negated, text: text.clone() },
        }
    }

    pub fn is_negation_of(&self, other: &GateParam) -> bool {
        self.neg() == *other
    }

    pub fn add(&self, other: &GateParam) -> GateParam {
        if let (GateParam::Exact { pi: a, rat: b }, GateParam::Exact { pi: c, rat: d }) = (self, other) {
            if let (Some(pi), Some(rat)) = (a.checked_add(c), b.checked_add(d)) {
                return GateParam::Exact { pi, rat };
            }
        }
        self.float_op(other, |x, y| x + y, "+")
    }

    pub fn sub(&self, other: &GateParam) -> GateParam {
        if let (GateParam::Exact { pi: a, rat: b }, GateParam::Exact { pi: c, rat: d }) = (self, other) {
            if let (Some(pi), Some(rat)) = (a.checked_sub(c), b.checked_sub(d)) {
                return GateParam::Exact { pi, rat };
            }
        }
        self.float_op(other, |x, y| x - y, "-")
    }

    pub fn mul(&self, other: &GateParam) -> GateParam {
        if let (GateParam::Exact { pi: a, rat: b }, GateParam::Exact { pi: c, rat: d }) = (self, other) {
            // (aπ + b)(cπ + d) stays linear unless both carry π.
            if a.is_zero() || c.is_zero() {
                let pi = a.checked_mul(d).zip(c.checked_mul(b)).and_then(|(x, y)| x.checked_add(&y));
                let rat = b.checked_mul(d);
                if let (Some(pi), Some(rat)) = (pi, rat) {
                    return GateParam::Exact { pi, rat };
                }
            }
        }
        self.float_op(other, |x, y| x * y, "*")
    }

    pub fn div(&self, other: &GateParam) -> Result<GateParam, DivisionByZero> {
        if let GateParam::Exact { pi: c, rat: d } = other {
            if c.is_zero() && d.is_zero() {
                return Err(DivisionByZero);
            }
            if let (GateParam::Exact { pi: a, rat: b }, true) = (self, c.is_zero()) {
                if let (Some(pi), Some(rat)) = (a.checked_div(d), b.checked_div(d)) {
                    return Ok(GateParam::Exact { pi, rat });
                }
            }
        }
        if let GateParam::Float(v) = other {
            if *v == 0.0 {
                return Err(DivisionByZero);
            }
        }
        Ok(self.float_op(other, |x, y| x / y, "/"))
    }

    fn float_op(&self, other: &GateParam, f: impl Fn(f64, f64) -> f64, sym: &str) -> GateParam {
        match (self.to_f64(), other.to_f64()) {
            (Some(x), Some(y)) => GateParam::Float(f(x, y)),
            _ => GateParam::symbol(format!("({}){}({})", self, sym, other)),
        }
    }
}

/// Exact value of a decimal literal, or `None` if it does not fit.
fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    let num: i128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let scale = exp - frac_part.len() as i32;
    let pow = 10i128.checked_pow(scale.unsigned_abs())?;
    if scale >= 0 {
        Some(Rational::from_integer(num.checked_mul(pow)?))
    } else {
        Some(Rational::new(num, pow))
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GateParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateParam::Exact { pi, rat } => {
                if pi.is_zero() {
                    return f.write_str(&fmt_rational(rat));
                }
                let coef = if *pi == Rational::from_integer(1) {
                    "π".to_string()
                } else if *pi == Rational::from_integer(-1) {
                    "-π".to_string()
                } else if pi.is_integer() {
                    format!("{}π", pi.numer())
                } else if *pi.numer() == 1 {
                    format!("π/{}", pi.denom())
                } else if *pi.numer() == -1 {
                    format!("-π/{}", pi.denom())
                } else {
                    format!("{}π/{}", pi.numer(), pi.denom())
                };
                if rat.is_zero() {
                    f.write_str(&coef)
                } else if rat.is_negative() {
                    write!(f, "{}-{}", coef, fmt_rational(&-rat))
                } else {
                    write!(f, "{}+{}", coef, fmt_rational(rat))
                }
            }
            GateParam::Float(v) => write!(f, "{v:?}"),
            GateParam::Symbol { negated, text } => {
                if *negated {
                    write!(f, "-({text})")
                } else {
                    f.write_str(text)
                }
            }
        }
    }
}
