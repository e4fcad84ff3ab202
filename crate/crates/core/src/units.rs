//! Runtime dimensions, unit-expression parsing and display conversions.
//!
//! Every quantity is stored in SI base units (joule, second, bit, gram).
//! Unit strings such as `"mWh/MByte"`, `"W/Mbps"` or `"Wh/(MByte·year)"` are
//! parsed into a scale factor plus a [`Dimension`]. Decimal prefixes are
//! used throughout (`M` = 10^6), and one byte is eight bits.

use std::fmt;

use thiserror::Error;

/// Seconds in the 365-day accounting year used by every yearly figure.
pub const SECONDS_PER_YEAR: f64 = 365.0 * 86_400.0;

pub const JOULES_PER_KWH: f64 = 3.6e6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("malformed unit expression `{0}`")]
    Malformed(String),
    #[error("malformed quantity `{0}`: expected `<number> <unit>`")]
    MalformedQuantity(String),
}

/// Exponents over the four base dimensions of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimension {
    pub energy: i8,
    pub time: i8,
    pub data: i8,
    pub mass: i8,
}

impl std::ops::Mul for Dimension {
    type Output = Dimension;
    fn mul(self, rhs: Dimension) -> Dimension {
        Dimension::new(
            self.energy + rhs.energy,
            self.time + rhs.time,
            self.data + rhs.data,
            self.mass + rhs.mass,
        )
    }
}

impl std::ops::Div for Dimension {
    type Output = Dimension;
    fn div(self, rhs: Dimension) -> Dimension {
        Dimension::new(
            self.energy - rhs.energy,
            self.time - rhs.time,
            self.data - rhs.data,
            self.mass - rhs.mass,
        )
    }
}

impl Dimension {
    pub const DIMENSIONLESS: Dimension = Dimension::new(0, 0, 0, 0);
    pub const ENERGY: Dimension = Dimension::new(1, 0, 0, 0);
    pub const POWER: Dimension = Dimension::new(1, -1, 0, 0);
    pub const TIME: Dimension = Dimension::new(0, 1, 0, 0);
    pub const DATA_SIZE: Dimension = Dimension::new(0, 0, 1, 0);
    pub const DATA_RATE: Dimension = Dimension::new(0, -1, 1, 0);
    /// Also the dimension of power per data rate, W/(bit/s) = J/bit.
    pub const ENERGY_PER_BIT: Dimension = Dimension::new(1, 0, -1, 0);
    pub const ENERGY_PER_BIT_TIME: Dimension = Dimension::new(1, -1, -1, 0);
    pub const MASS: Dimension = Dimension::new(0, 0, 0, 1);
    pub const CARBON_INTENSITY: Dimension = Dimension::new(-1, 0, 0, 1);

    pub const fn new(energy: i8, time: i8, data: i8, mass: i8) -> Self {
        Dimension {
            energy,
            time,
            data,
            mass,
        }
    }

    pub fn name(self) -> Option<&'static str> {
        Some(match self {
            Dimension::DIMENSIONLESS => "dimensionless",
            Dimension::ENERGY => "energy",
            Dimension::POWER => "power",
            Dimension::TIME => "time",
            Dimension::DATA_SIZE => "data-size",
            Dimension::DATA_RATE => "data-rate",
            Dimension::ENERGY_PER_BIT => "energy-per-bit",
            Dimension::ENERGY_PER_BIT_TIME => "energy-per-bit-year",
            Dimension::MASS => "mass",
            Dimension::CARBON_INTENSITY => "carbon-intensity",
            _ => return None,
        })
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name() {
            Some(name) => f.write_str(name),
            None => write!(
                f,
                "J^{} s^{} bit^{} g^{}",
                self.energy, self.time, self.data, self.mass
            ),
        }
    }
}

/// A parsed unit expression: `si_value = value * scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unit {
    pub scale: f64,
    pub dimension: Dimension,
}

impl Unit {
    const fn new(scale: f64, dimension: Dimension) -> Self {
        Unit { scale, dimension }
    }

    pub fn parse(expr: &str) -> Result<Unit, UnitError> {
        let trimmed = expr.trim();
        if trimmed.is_empty() || trimmed == "1" || trimmed == "-" {
            return Ok(Unit::new(1.0, Dimension::DIMENSIONLESS));
        }
        let tokens = tokenize(trimmed)?;
        let mut parser = Parser {
            tokens: &tokens,
            pos: 0,
            source: trimmed,
        };
        let unit = parser.expr()?;
        if parser.pos != tokens.len() {
            return Err(UnitError::Malformed(trimmed.to_string()));
        }
        Ok(unit)
    }

    fn times(self, rhs: Unit) -> Unit {
        Unit::new(self.scale * rhs.scale, self.dimension * rhs.dimension)
    }

    fn per(self, rhs: Unit) -> Unit {
        Unit::new(self.scale / rhs.scale, self.dimension / rhs.dimension)
    }
}

struct Atom {
    symbol: &'static str,
    scale: f64,
    dimension: Dimension,
    prefixable: bool,
}

const fn atom(symbol: &'static str, scale: f64, dimension: Dimension, prefixable: bool) -> Atom {
    Atom {
        symbol,
        scale,
        dimension,
        prefixable,
    }
}

const ATOMS: &[Atom] = &[
    atom("J", 1.0, Dimension::ENERGY, true),
    atom("Wh", 3600.0, Dimension::ENERGY, true),
    atom("W", 1.0, Dimension::POWER, true),
    atom("s", 1.0, Dimension::TIME, true),
    atom("s_video", 1.0, Dimension::TIME, false),
    atom("min", 60.0, Dimension::TIME, false),
    atom("h", 3600.0, Dimension::TIME, false),
    atom("d", 86_400.0, Dimension::TIME, false),
    atom("day", 86_400.0, Dimension::TIME, false),
    atom("year", SECONDS_PER_YEAR, Dimension::TIME, false),
    atom("yr", SECONDS_PER_YEAR, Dimension::TIME, false),
    atom("bit", 1.0, Dimension::DATA_SIZE, true),
    atom("Byte", 8.0, Dimension::DATA_SIZE, true),
    atom("B", 8.0, Dimension::DATA_SIZE, true),
    atom("bps", 1.0, Dimension::DATA_RATE, true),
    atom("g", 1.0, Dimension::MASS, true),
    atom("t", 1.0e6, Dimension::MASS, true),
    atom("%", 0.01, Dimension::DIMENSIONLESS, false),
];

const PREFIXES: &[(&str, f64)] = &[
    ("µ", 1e-6),
    ("u", 1e-6),
    ("m", 1e-3),
    ("k", 1e3),
    ("M", 1e6),
    ("G", 1e9),
    ("T", 1e12),
    ("P", 1e15),
];

fn lookup_atom(name: &str) -> Option<Unit> {
    if let Some(a) = ATOMS.iter().find(|a| a.symbol == name) {
        return Some(Unit::new(a.scale, a.dimension));
    }
    for (prefix, factor) in PREFIXES {
        if let Some(rest) = name.strip_prefix(prefix) {
            if let Some(a) = ATOMS.iter().find(|a| a.prefixable && a.symbol == rest) {
                return Some(Unit::new(a.scale * factor, a.dimension));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Times,
    Per,
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>, UnitError> {
    let mut tokens = Vec::new();
    let mut ident = String::new();
    let flush = |ident: &mut String, tokens: &mut Vec<Token>| {
        if !ident.is_empty() {
            tokens.push(Token::Ident(std::mem::take(ident)));
        }
    };
    for c in src.chars() {
        match c {
            '*' | '·' | '.' => {
                flush(&mut ident, &mut tokens);
                tokens.push(Token::Times);
            }
            '/' => {
                flush(&mut ident, &mut tokens);
                tokens.push(Token::Per);
            }
            '(' => {
                flush(&mut ident, &mut tokens);
                tokens.push(Token::Open);
            }
            ')' => {
                flush(&mut ident, &mut tokens);
                tokens.push(Token::Close);
            }
            c if c.is_whitespace() => flush(&mut ident, &mut tokens),
            c if c.is_alphanumeric() || c == '_' || c == '%' || c == 'µ' => ident.push(c),
            _ => return Err(UnitError::Malformed(src.to_string())),
        }
    }
    flush(&mut ident, &mut tokens);
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    source: &'a str,
}

impl Parser<'_> {
    fn expr(&mut self) -> Result<Unit, UnitError> {
        let mut acc = self.term()?;
        while let Some(tok) = self.tokens.get(self.pos) {
            match tok {
                Token::Times => {
                    self.pos += 1;
                    acc = acc.times(self.term()?);
                }
                Token::Per => {
                    self.pos += 1;
                    acc = acc.per(self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Unit, UnitError> {
        match self.tokens.get(self.pos) {
            Some(Token::Ident(name)) => {
                self.pos += 1;
                lookup_atom(name).ok_or_else(|| UnitError::UnknownUnit(name.clone()))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.tokens.get(self.pos) != Some(&Token::Close) {
                    return Err(UnitError::Malformed(self.source.to_string()));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(UnitError::Malformed(self.source.to_string())),
        }
    }
}

/// A magnitude in SI base units together with its dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub si: f64,
    pub dimension: Dimension,
}

impl Quantity {
    /// Parses `"<number> <unit>"`; the space may be omitted (`"5Mbps"`).
    pub fn parse(text: &str) -> Result<Quantity, UnitError> {
        let text = text.trim();
        let (number, unit) =
            split_number(text).ok_or_else(|| UnitError::MalformedQuantity(text.to_string()))?;
        let value: f64 = number
            .parse()
            .map_err(|_| UnitError::MalformedQuantity(text.to_string()))?;
        Quantity::from_value(value, unit)
    }

    pub fn from_value(value: f64, unit: &str) -> Result<Quantity, UnitError> {
        let unit = Unit::parse(unit)?;
        Ok(Quantity {
            si: value * unit.scale,
            dimension: unit.dimension,
        })
    }

    /// Magnitude expressed in `unit`. Fails on unknown units or a dimension mismatch.
    pub fn value_in(&self, unit: &str) -> Result<f64, UnitError> {
        let u = Unit::parse(unit)?;
        if u.dimension != self.dimension {
            return Err(UnitError::Malformed(format!(
                "{unit} is not a {} unit",
                self.dimension
            )));
        }
        Ok(self.si / u.scale)
    }

    /// Formats in the conventional display unit for the dimension.
    pub fn to_display_string(&self) -> String {
        let unit = display_unit(self.dimension);
        match self.value_in(unit) {
            Ok(v) => format!("{v} {unit}"),
            Err(_) => format!("{} {}", self.si, si_unit_symbol(self.dimension)),
        }
    }

    /// Formats in `display` when that reproduces the SI magnitude exactly on
    /// re-parse, otherwise in the SI symbol.
    pub fn to_lossless_string(&self, display: &str) -> String {
        if let Ok(v) = self.value_in(display) {
            if let Ok(back) = Quantity::from_value(v, display) {
                if back.si == self.si {
                    return format!("{v} {display}");
                }
            }
        }
        format!("{} {}", self.si, si_unit_symbol(self.dimension))
    }
}

fn split_number(text: &str) -> Option<(&str, &str)> {
    if let Some((head, tail)) = text.split_once(char::is_whitespace) {
        return Some((head, tail.trim()));
    }
    let bytes = text.as_bytes();
    let mut end = 0;
    while end < bytes.len() {
        let c = bytes[end] as char;
        let exponent_follows = (c == 'e' || c == 'E')
            && bytes
                .get(end + 1)
                .map(|n| n.is_ascii_digit() || *n == b'-' || *n == b'+')
                .unwrap_or(false);
        if c.is_ascii_digit()
            || c == '.'
            || ((c == '-' || c == '+') && (end == 0 || matches!(bytes[end - 1], b'e' | b'E')))
            || exponent_follows
        {
            end += 1;
        } else {
            break;
        }
    }
    if end == 0 {
        return None;
    }
    Some((&text[..end], &text[end..]))
}

/// The unit used when printing a dimension to people.
pub fn display_unit(dimension: Dimension) -> &'static str {
    match dimension {
        Dimension::ENERGY => "kWh",
        Dimension::POWER => "W",
        Dimension::TIME => "s",
        Dimension::DATA_SIZE => "MByte",
        Dimension::DATA_RATE => "Mbps",
        Dimension::ENERGY_PER_BIT => "mWh/MByte",
        Dimension::ENERGY_PER_BIT_TIME => "Wh/(MByte·year)",
        Dimension::MASS => "kg",
        Dimension::CARBON_INTENSITY => "g/kWh",
        _ => "1",
    }
}

/// SI base-unit symbol; always a scale-1 unit so formatting is exact.
pub fn si_unit_symbol(dimension: Dimension) -> &'static str {
    match dimension {
        Dimension::ENERGY => "J",
        Dimension::POWER => "W",
        Dimension::TIME => "s",
        Dimension::DATA_SIZE => "bit",
        Dimension::DATA_RATE => "bps",
        Dimension::ENERGY_PER_BIT => "J/bit",
        Dimension::ENERGY_PER_BIT_TIME => "J/(bit·s)",
        Dimension::MASS => "g",
        Dimension::CARBON_INTENSITY => "g/J",
        _ => "1",
    }
}
