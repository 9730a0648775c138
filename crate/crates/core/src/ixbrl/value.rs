//! Inline XBRL value transformation: displayed text to scaled decimal.

use std::str::FromStr;

use rust_decimal::Decimal;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("empty fact text")]
    Empty,
    #[error("non-numeric residue `{0}`")]
    NonNumeric(String),
    #[error("value overflows decimal range")]
    Overflow,
}

/// Separator convention implied by an `ixt:` format code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumberFormat {
    /// `1,234.5`
    DotDecimal,
    /// `1.234,5`
    CommaDecimal,
    /// Dash or other placeholder meaning zero.
    Zero,
    /// Spelled-out English numbers (`three`, `twenty-one`, `no`).
    Words,
}

impl NumberFormat {
    /// Maps an `ixt:`/`ixt-sec:` transform name to a convention. Unknown or
    /// absent hints fall back to dot-decimal.
    pub fn from_hint(hint: Option<&str>) -> Self {
        let Some(hint) = hint else {
            return NumberFormat::DotDecimal;
        };
        let local = hint.rsplit(':').next().unwrap_or(hint).to_ascii_lowercase();
        let compact: String = local.chars().filter(|c| *c != '-').collect();
        match compact.as_str() {
            "numcommadecimal" | "numdotcomma" | "numspacecomma" | "numcomma" => NumberFormat::CommaDecimal,
            "fixedzero" | "zerodash" | "numdash" | "nocontent" => NumberFormat::Zero,
            "numwordsen" | "numwordsnonenumwordsen" | "numwordsennonone" | "nonenumwordsen" => NumberFormat::Words,
            _ => NumberFormat::DotDecimal,
        }
    }
}

/// Resolves displayed fact text to its value: grouping separators removed,
/// multiplied by `10^scale`, negated when `negative`.
pub fn resolve_value(raw_text: &str, scale: i32, negative: bool, format_hint: Option<&str>) -> Result<Decimal, ValueError> {
    let text = raw_text.trim();
    let format = NumberFormat::from_hint(format_hint);
    if text.is_empty() && format != NumberFormat::Zero {
        return Err(ValueError::Empty);
    }
    let base = match format {
        NumberFormat::Zero => Decimal::ZERO,
        NumberFormat::DotDecimal => parse_plain(&strip(text, &[',', ' ', '\u{a0}', '\u{202f}', '\'']))?,
        NumberFormat::CommaDecimal => {
            let stripped = strip(text, &['.', ' ', '\u{a0}', '\u{202f}', '\'']);
            parse_plain(&stripped.replace(',', "."))?
        }
        NumberFormat::Words => parse_words(text)?,
    };
    let scaled = apply_scale(base, scale)?;
    let signed = if negative { -scaled } else { scaled };
    Ok(signed.normalize())
}

fn strip(text: &str, separators: &[char]) -> String {
    text.chars().filter(|c| !separators.contains(c)).collect()
}

fn parse_plain(s: &str) -> Result<Decimal, ValueError> {
    let valid = {
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        let digits = |p: &str| p.chars().all(|c| c.is_ascii_digit());
        !s.is_empty() && digits(int) && digits(frac) && !(int.is_empty() && frac.is_empty()) && s.matches('.').count() <= 1
    };
    if !valid {
        return Err(ValueError::NonNumeric(s.to_string()));
    }
    Decimal::from_str(s).map_err(|_| ValueError::Overflow)
}

fn apply_scale(value: Decimal, scale: i32) -> Result<Decimal, ValueError> {
    if scale >= 0 {
        let mut out = value;
        for _ in 0..scale {
            out = out.checked_mul(Decimal::TEN).ok_or(ValueError::Overflow)?;
        }
        Ok(out)
    } else {
        let mut out = value;
        for _ in 0..scale.unsigned_abs() {
            out = out.checked_div(Decimal::TEN).ok_or(ValueError::Overflow)?;
        }
        Ok(out)
    }
}

fn parse_words(text: &str) -> Result<Decimal, ValueError> {
    let lower = text.to_lowercase();
    let mut total: u64 = 0;
    let mut group: u64 = 0;
    let mut seen = false;
    for word in lower.split(|c: char| c.is_whitespace() || c == '-').filter(|w| !w.is_empty() && *w != "and") {
        let small = match word {
            "no" | "none" | "zero" => Some(0),
            "one" | "a" => Some(1),
            "two" => Some(2),
            "three" => Some(3),
            "four" => Some(4),
            "five" => Some(5),
            "six" => Some(6),
            "seven" => Some(7),
            "eight" => Some(8),
            "nine" => Some(9),
            "ten" => Some(10),
            "eleven" => Some(11),
            "twelve" => Some(12),
            "thirteen" => Some(13),
            "fourteen" => Some(14),
            "fifteen" => Some(15),
            "sixteen" => Some(16),
            "seventeen" => Some(17),
            "eighteen" => Some(18),
            "nineteen" => Some(19),
            "twenty" => Some(20),
            "thirty" => Some(30),
            "forty" => Some(40),
            "fifty" => Some(50),
            "sixty" => Some(60),
            "seventy" => Some(70),
            "eighty" => Some(80),
            "ninety" => Some(90),
            _ => None,
        };
        if let Some(n) = small {
            group += n;
        } else {
            match word {
                "hundred" => group = group.max(1) * 100,
                "thousand" | "million" | "billion" => {
                    let mult = match word {
                        "thousand" => 1_000,
                        "million" => 1_000_000,
                        _ => 1_000_000_000,
                    };
                    total += group.max(1) * mult;
                    group = 0;
                }
                other => return Err(ValueError::NonNumeric(other.to_string())),
            }
        }
        seen = true;
    }
    if !seen {
        return Err(ValueError::Empty);
    }
    Ok(Decimal::from(total + group))
}
