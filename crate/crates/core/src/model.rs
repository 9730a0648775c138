//! Records shared across pipeline stages.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FormType {
    #[serde(rename = "10-K")]
    TenK,
    #[serde(rename = "10-Q")]
    TenQ,
}

impl FormType {
    pub fn as_str(self) -> &'static str {
        match self {
            FormType::TenK => "10-K",
            FormType::TenQ => "10-Q",
        }
    }
}

impl fmt::Display for FormType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormType {
    type Err = Error;

    /// Only the two periodic report forms are accepted; amendments such as
    /// `10-K/A` are rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "10-K" => Ok(FormType::TenK),
            "10-Q" => Ok(FormType::TenQ),
            other => Err(Error::InvalidInput(format!("unsupported form type `{other}`"))),
        }
    }
}

/// Which linkbase a relationship came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaxonomyKind {
    #[serde(alias = "cal")]
    Calculation,
    #[serde(alias = "pre")]
    Presentation,
}

impl TaxonomyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaxonomyKind::Calculation => "calculation",
            TaxonomyKind::Presentation => "presentation",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            TaxonomyKind::Calculation => "cal",
            TaxonomyKind::Presentation => "pre",
        }
    }
}

impl fmt::Display for TaxonomyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaxonomyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cal" | "calculation" => Ok(TaxonomyKind::Calculation),
            "pre" | "presentation" => Ok(TaxonomyKind::Presentation),
            other => Err(Error::InvalidInput(format!("unknown taxonomy kind `{other}`"))),
        }
    }
}

/// A taxonomy element name of the form `prefix:LocalName`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Tag(String);

impl Tag {
    pub fn new(s: impl Into<String>) -> Result<Self, Error> {
        let s = s.into();
        if is_valid_tag(&s) {
            Ok(Tag(s))
        } else {
            Err(Error::InvalidInput(format!("`{s}` is not a prefix:LocalName tag")))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn prefix(&self) -> &str {
        self.0.split_once(':').map(|(p, _)| p).unwrap_or_default()
    }

    pub fn local_name(&self) -> &str {
        self.0.split_once(':').map(|(_, l)| l).unwrap_or_default()
    }
}

/// Exactly one `:` with a nonempty prefix and local name.
pub fn is_valid_tag(s: &str) -> bool {
    match s.split_once(':') {
        Some((prefix, local)) => {
            !prefix.is_empty()
                && !local.is_empty()
                && !local.contains(':')
                && !s.chars().any(char::is_whitespace)
        }
        None => false,
    }
}

impl TryFrom<String> for Tag {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Tag::new(s)
    }
}

impl From<Tag> for String {
    fn from(t: Tag) -> Self {
        t.0
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Label for tags outside a chosen label set.
pub const OOS: &str = "OOS";

/// One tagged numeric fact inside a paragraph.
///
/// Character offsets count Unicode scalar values of the owning paragraph's
/// text; `end_char` is exclusive. The label is kept as a plain string because
/// later stages rewrite it to sentinels (`OOS`) and expert categories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    #[serde(rename = "Start character")]
    pub start_char: usize,
    #[serde(rename = "End character")]
    pub end_char: usize,
    #[serde(rename = "Label")]
    pub label: String,
    #[serde(rename = "Start date for period")]
    pub period_start: NaiveDate,
    #[serde(rename = "End date for period")]
    pub period_end: NaiveDate,
    #[serde(rename = "Currency / Unit")]
    pub unit: String,
    #[serde(rename = "Value", with = "decimal_number")]
    pub value: Decimal,
}

/// A narrative snippet and the facts tagged inside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub form_type: FormType,
    pub accession_number: String,
    /// Milliseconds since the Unix epoch.
    pub filing_date: i64,
    /// `YYYYMMDD` of the reporting period end.
    pub quarter_ending: String,
    pub company_name: String,
    pub text: String,
    pub entities: Vec<Entity>,
}

impl Paragraph {
    /// Calendar (UTC) date of the filing timestamp.
    pub fn filing_day(&self) -> NaiveDate {
        chrono::DateTime::from_timestamp_millis(self.filing_date)
            .map(|dt| dt.date_naive())
            .unwrap_or_default()
    }

    pub fn word_count(&self) -> usize {
        self.text.split_whitespace().count()
    }

    /// Entity with the smallest start offset.
    pub fn first_entity(&self) -> Option<&Entity> {
        self.entities.iter().min_by_key(|e| e.start_char)
    }

    /// Text covered by an entity span.
    pub fn span_text(&self, entity: &Entity) -> String {
        self.text
            .chars()
            .skip(entity.start_char)
            .take(entity.end_char.saturating_sub(entity.start_char))
            .collect()
    }
}

/// Serializes a [`Decimal`] as a JSON number (`3300000000.0`) and reads any
/// JSON number back without going through binary floating point.
pub mod decimal_number {
    use std::fmt;
    use std::str::FromStr;

    use rust_decimal::prelude::ToPrimitive;
    use rust_decimal::Decimal;
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Decimal, serializer: S) -> Result<S::Ok, S::Error> {
        let f = value
            .to_f64()
            .ok_or_else(|| serde::ser::Error::custom("decimal out of f64 range"))?;
        serializer.serialize_f64(f)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Decimal, D::Error> {
        deserializer.deserialize_any(DecimalVisitor)
    }

    pub(crate) struct DecimalVisitor;

    impl Visitor<'_> for DecimalVisitor {
        type Value = Decimal;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a number")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Decimal, E> {
            Ok(Decimal::from(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Decimal, E> {
            Ok(Decimal::from(v))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Decimal, E> {
            parse_decimal(&v.to_string()).ok_or_else(|| E::custom(format!("unrepresentable number {v}")))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Decimal, E> {
            parse_decimal(v).ok_or_else(|| E::custom(format!("not a number: `{v}`")))
        }
    }

    /// Plain or scientific notation, normalized (trailing zeros dropped).
    pub fn parse_decimal(s: &str) -> Option<Decimal> {
        let s = s.trim();
        let d = if s.contains(['e', 'E']) {
            Decimal::from_scientific(s).ok()?
        } else {
            Decimal::from_str(s).ok()?
        };
        Some(d.normalize())
    }

    /// Optional variant for prediction records, where the field may be absent or null.
    pub mod option {
        use super::*;

        pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Option<Decimal>, D::Error> {
            deserializer.deserialize_option(OptVisitor)
        }

        pub fn serialize<S: Serializer>(value: &Option<Decimal>, serializer: S) -> Result<S::Ok, S::Error> {
            match value {
                Some(v) => super::serialize(v, serializer),
                None => serializer.serialize_none(),
            }
        }

        struct OptVisitor;

        impl<'de> Visitor<'de> for OptVisitor {
            type Value = Option<Decimal>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or null")
            }

            fn visit_none<E: de::Error>(self) -> Result<Self::Value, E> {
                Ok(None)
            }

            fn visit_unit<E: de::Error>(self) -> Result<Self::Value, E> {
                Ok(None)
            }

            fn visit_some<D: Deserializer<'de>>(self, d: D) -> Result<Self::Value, D::Error> {
                // Unparseable strings ("N/A") count as a missing prediction.
                Ok(d.deserialize_any(LenientVisitor).unwrap_or(None))
            }
        }

        struct LenientVisitor;

        impl Visitor<'_> for LenientVisitor {
            type Value = Option<Decimal>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(Some(Decimal::from(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(Some(Decimal::from(v)))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Ok(parse_decimal(&v.to_string()))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                Ok(parse_decimal(&v.replace(',', "")))
            }

            fn visit_bool<E: de::Error>(self, _: bool) -> Result<Self::Value, E> {
                Ok(None)
            }
        }
    }
}
