//! Exact fixed-point decimal numbers.
//!
//! Values are stored as an `i128` count of billionths, so addition,
//! subtraction and multiplication of values with at most nine fractional
//! digits are exact. Division truncates toward zero at the ninth digit.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

/// Number of fractional digits carried by every [`Decimal`].
pub const FRACTION_DIGITS: u32 = 9;
const SCALE: i128 = 1_000_000_000;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Decimal(i128);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecimalError {
    Overflow,
    DivisionByZero,
    Syntax(String),
}

impl fmt::Display for DecimalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecimalError::Overflow => f.write_str("decimal overflow"),
            DecimalError::DivisionByZero => f.write_str("division by zero"),
            DecimalError::Syntax(s) => write!(f, "invalid decimal literal `{s}`"),
        }
    }
}

impl core::error::Error for DecimalError {}

impl Decimal {
    pub const ZERO: Decimal = Decimal(0);

    pub fn from_int(v: i64) -> Self {
        Decimal(v as i128 * SCALE)
    }

    /// Raw scaled representation (value × 10⁹).
    pub fn raw(self) -> i128 {
        self.0
    }

    pub fn from_raw(raw: i128) -> Self {
        Decimal(raw)
    }

    pub fn is_integer(self) -> bool {
        self.0 % SCALE == 0
    }

    /// Returns the value as an `i64` when it is integral and in range.
    pub fn to_i64(self) -> Option<i64> {
        if self.is_integer() {
            i64::try_from(self.0 / SCALE).ok()
        } else {
            None
        }
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, DecimalError> {
        self.0.checked_add(rhs.0).map(Decimal).ok_or(DecimalError::Overflow)
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, DecimalError> {
        self.0.checked_sub(rhs.0).map(Decimal).ok_or(DecimalError::Overflow)
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self, DecimalError> {
        let wide = self.0.checked_mul(rhs.0).ok_or(DecimalError::Overflow)?;
        Ok(Decimal(wide / SCALE))
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self, DecimalError> {
        if rhs.0 == 0 {
            return Err(DecimalError::DivisionByZero);
        }
        let wide = self.0.checked_mul(SCALE).ok_or(DecimalError::Overflow)?;
        Ok(Decimal(wide / rhs.0))
    }

    pub fn checked_neg(self) -> Result<Self, DecimalError> {
        self.0.checked_neg().map(Decimal).ok_or(DecimalError::Overflow)
    }
}

impl From<i64> for Decimal {
    fn from(v: i64) -> Self {
        Decimal::from_int(v)
    }
}

impl fmt::Debug for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = self.0 < 0;
        let abs = self.0.unsigned_abs();
        let int = abs / SCALE as u128;
        let mut frac = abs % SCALE as u128;
        if neg {
            f.write_str("-")?;
        }
        write!(f, "{int}")?;
        if frac != 0 {
            let mut digits = FRACTION_DIGITS as usize;
            while frac.is_multiple_of(10) {
                frac /= 10;
                digits -= 1;
            }
            write!(f, ".{frac:0digits$}")?;
        }
        Ok(())
    }
}

impl FromStr for Decimal {
    type Err = DecimalError;

    /// Accepts `[-+]digits[.digits][(e|E)[-+]digits]`. Values that need more
    /// than nine fractional digits are rejected rather than rounded.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DecimalError::Syntax(String::from(s));
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(i) => {
                let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
                (&s[..i], e)
            }
            None => (s, 0),
        };
        let (neg, body) = match mantissa.as_bytes().first() {
            Some(b'-') => (true, &mantissa[1..]),
            Some(b'+') => (false, &mantissa[1..]),
            _ => (false, mantissa),
        };
        let (int_part, frac_part) = match body.find('.') {
            Some(i) => (&body[..i], &body[i + 1..]),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        // Collect significant digits as an integer plus a power-of-ten shift.
        let mut digits: i128 = 0;
        for b in int_part.bytes().chain(frac_part.bytes()) {
            digits = digits
                .checked_mul(10)
                .and_then(|d| d.checked_add((b - b'0') as i128))
                .ok_or(DecimalError::Overflow)?;
        }
        let shift = exp - frac_part.len() as i32 + FRACTION_DIGITS as i32;
        let mut raw = digits;
        if shift >= 0 {
            for _ in 0..shift {
                if raw == 0 {
                    break;
                }
                raw = raw.checked_mul(10).ok_or(DecimalError::Overflow)?;
            }
        } else {
            for _ in 0..(-shift) {
                if raw % 10 != 0 {
                    return Err(bad());
                }
                raw /= 10;
            }
        }
        Ok(Decimal(if neg { -raw } else { raw }))
    }
}
