//! Exact currency arithmetic on signed integer cents.
//!
//! Every dollar figure in the model is a [`Money`] value. Addition and
//! subtraction are exact integer operations; the only place floating point
//! enters is the utility transform, and results coming back from it are
//! rounded half-even to the cent.

use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoneyError {
    #[error("money arithmetic overflowed the signed cent range")]
    Overflow,
    #[error("cannot convert {0} to money: not a finite amount")]
    NotFinite(f64),
    #[error("invalid money literal {literal:?}: {reason}")]
    Parse { literal: String, reason: String },
    #[error("invalid fraction literal {literal:?}: {reason}")]
    ParseFraction { literal: String, reason: String },
}

/// A dollar amount held as signed integer cents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money {
    cents: i64,
}

impl Money {
    pub const ZERO: Money = Money { cents: 0 };

    pub const fn from_cents(cents: i64) -> Money {
        Money { cents }
    }

    /// Whole-dollar constructor for literals; panics outside the cent range.
    pub fn dollars(d: i64) -> Money {
        Money {
            cents: d.checked_mul(100).expect("dollar literal out of range"),
        }
    }

    pub const fn cents(self) -> i64 {
        self.cents
    }

    pub fn to_dollars(self) -> f64 {
        self.cents as f64 / 100.0
    }

    /// Rounds a computed dollar amount half-even to the cent.
    pub fn from_dollars(dollars: f64) -> Result<Money, MoneyError> {
        Money::from_cents_f64(dollars * 100.0)
    }

    pub fn from_cents_f64(cents: f64) -> Result<Money, MoneyError> {
        if !cents.is_finite() {
            return Err(MoneyError::NotFinite(cents));
        }
        let r = cents.round_ties_even();
        // i64::MAX as f64 rounds up past i64::MAX, so >= catches the edge.
        if r >= i64::MAX as f64 || r <= i64::MIN as f64 {
            return Err(MoneyError::Overflow);
        }
        Ok(Money { cents: r as i64 })
    }

    pub fn checked_add(self, other: Money) -> Result<Money, MoneyError> {
        self.cents
            .checked_add(other.cents)
            .map(Money::from_cents)
            .ok_or(MoneyError::Overflow)
    }

    pub fn checked_sub(self, other: Money) -> Result<Money, MoneyError> {
        self.cents
            .checked_sub(other.cents)
            .map(Money::from_cents)
            .ok_or(MoneyError::Overflow)
    }

    pub fn checked_neg(self) -> Result<Money, MoneyError> {
        self.cents
            .checked_neg()
            .map(Money::from_cents)
            .ok_or(MoneyError::Overflow)
    }

    /// Exact rational scaling: cents * num / den in 128-bit, half-even.
    pub fn mul_fraction(self, f: Fraction) -> Result<Money, MoneyError> {
        let wide = self.cents as i128 * f.num as i128;
        let neg = wide < 0;
        let mag = wide.unsigned_abs();
        let den = f.den as u128;
        let q = mag / den;
        let r = mag % den;
        let rounded = match (2 * r).cmp(&den) {
            std::cmp::Ordering::Less => q,
            std::cmp::Ordering::Greater => q + 1,
            std::cmp::Ordering::Equal => {
                if q.is_multiple_of(2) {
                    q
                } else {
                    q + 1
                }
            }
        };
        if rounded > i64::MAX as u128 {
            return Err(MoneyError::Overflow);
        }
        let cents = if neg {
            -(rounded as i64)
        } else {
            rounded as i64
        };
        Ok(Money { cents })
    }

    pub fn is_negative(self) -> bool {
        self.cents < 0
    }

    pub fn is_positive(self) -> bool {
        self.cents > 0
    }

    pub fn is_zero(self) -> bool {
        self.cents == 0
    }

    /// Canonical file-format rendering: plain decimal dollars, no grouping
    /// or currency sign, fractional part only when the cents require it.
    pub fn to_plain_string(self) -> String {
        let neg = self.cents < 0;
        let mag = self.cents.unsigned_abs();
        let (d, c) = (mag / 100, mag % 100);
        let sign = if neg { "-" } else { "" };
        if c == 0 {
            format!("{sign}{d}")
        } else if c % 10 == 0 {
            format!("{sign}{d}.{}", c / 10)
        } else {
            format!("{sign}{d}.{c:02}")
        }
    }
}

impl FromStr for Money {
    type Err = MoneyError;

    /// Accepts `[sign][$]digits[,digits...][.digits{1,2}]`.
    fn from_str(s: &str) -> Result<Money, MoneyError> {
        let err = |reason: &str| MoneyError::Parse {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        let mut rest = s.trim();
        let mut neg = false;
        if let Some(r) = rest.strip_prefix('-') {
            neg = true;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        rest = rest.strip_prefix('$').unwrap_or(rest);
        if rest.is_empty() {
            return Err(err("empty amount"));
        }
        let (whole, frac) = match rest.split_once('.') {
            Some((w, f)) => (w, Some(f)),
            None => (rest, None),
        };
        let mut dollars: i64 = 0;
        let mut saw_digit = false;
        for ch in whole.chars() {
            match ch {
                '0'..='9' => {
                    saw_digit = true;
                    dollars = dollars
                        .checked_mul(10)
                        .and_then(|d| d.checked_add((ch as u8 - b'0') as i64))
                        .ok_or(MoneyError::Overflow)?;
                }
                ',' => {}
                _ => return Err(err("unexpected character in dollar part")),
            }
        }
        let cents_part: i64 = match frac {
            None => 0,
            Some(f) => {
                if f.is_empty() || f.len() > 2 || !f.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(err("fractional part must be 1 or 2 digits"));
                }
                saw_digit = true;
                let v: i64 = f.parse().unwrap();
                if f.len() == 1 {
                    v * 10
                } else {
                    v
                }
            }
        };
        if !saw_digit {
            return Err(err("no digits"));
        }
        let cents = dollars
            .checked_mul(100)
            .and_then(|c| c.checked_add(cents_part))
            .ok_or(MoneyError::Overflow)?;
        Ok(Money {
            cents: if neg { -cents } else { cents },
        })
    }
}

impl fmt::Display for Money {
    /// Dollars with thousands grouping: `$26,298.00`, `-$191,234.00`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = self.cents < 0;
        let mag = self.cents.unsigned_abs();
        let (d, c) = (mag / 100, mag % 100);
        let digits = d.to_string();
        let mut grouped = String::with_capacity(digits.len() + digits.len() / 3);
        let lead = digits.len() % 3;
        for (i, ch) in digits.chars().enumerate() {
            if i != 0 && (i + 3 - lead) % 3 == 0 {
                grouped.push(',');
            }
            grouped.push(ch);
        }
        write!(f, "{}${grouped}.{c:02}", if neg { "-" } else { "" })
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Money", 2)?;
        s.serialize_field("cents", &self.cents)?;
        s.serialize_field("display", &self.to_string())?;
        s.end()
    }
}

/// An exact non-negative ratio, kept reduced. Savings fractions in scenario
/// files parse into this so `2/3` of an annual bill stays exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };
    pub const ONE: Fraction = Fraction { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Option<Fraction> {
        if den == 0 {
            return None;
        }
        let g = gcd(num, den);
        Some(Fraction {
            num: num / g,
            den: den / g,
        })
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// num <= den, i.e. the ratio lies in [0, 1].
    pub fn is_proper(self) -> bool {
        self.num <= self.den
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b.max(1);
    }
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// Caps keep cents(i64) * num inside i128 with room to spare.
const FRACTION_LIMIT: u64 = 1_000_000_000_000;

impl FromStr for Fraction {
    type Err = MoneyError;

    /// Accepts `a/b`, a plain integer, or a decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Fraction, MoneyError> {
        let err = |reason: &str| MoneyError::ParseFraction {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        let t = s.trim();
        let parse_part = |p: &str| -> Result<u64, MoneyError> {
            let v: u64 = p
                .trim()
                .parse()
                .map_err(|_| err("expected an unsigned integer"))?;
            if v > FRACTION_LIMIT {
                return Err(err("term too large"));
            }
            Ok(v)
        };
        if let Some((n, d)) = t.split_once('/') {
            let num = parse_part(n)?;
            let den = parse_part(d)?;
            return Fraction::new(num, den).ok_or_else(|| err("zero denominator"));
        }
        if let Some((w, f)) = t.split_once('.') {
            if f.is_empty() || f.len() > 12 || !f.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err("bad decimal fraction"));
            }
            let whole = if w.is_empty() { 0 } else { parse_part(w)? };
            let den = 10u64.pow(f.len() as u32);
            let num = whole
                .checked_mul(den)
                .and_then(|n| n.checked_add(f.parse::<u64>().unwrap()))
                .filter(|&n| n <= FRACTION_LIMIT)
                .ok_or_else(|| err("term too large"))?;
            return Fraction::new(num, den).ok_or_else(|| err("zero denominator"));
        }
        let whole = parse_part(t)?;
        Fraction::new(whole, 1).ok_or_else(|| err("zero denominator"))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}
