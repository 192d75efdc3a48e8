//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Numeric values accept
//! simple products and quotients of numbers, `pi` and `sqrt(x)`, so
//! `3pi/4`, `3*pi/4` and `1/sqrt(2)` all work. Lists are comma separated.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Raw key-value pairs; later insertions override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues(BTreeMap<String, String>);

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`, got {raw:?}", n + 1));
            };
            let key = normalize_key(k);
            if key.is_empty() {
                return err(format!("line {}: empty key", n + 1));
            }
            map.insert(key, v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(normalize_key(key), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key)
            .map(|v| eval_number(v).map_err(|e| ConfigError(format!("{key}: {}", e.0))))
            .transpose()
    }

    pub fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|item| eval_number(item).map_err(|e| ConfigError(format!("{key}: {}", e.0))))
                    .collect()
            })
            .transpose()
    }

    pub fn integer(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.get(key)
            .map(|v| parse_integer(v).map_err(|e| ConfigError(format!("{key}: {}", e.0))))
            .transpose()
    }

    pub fn integers(&self, key: &str) -> Result<Option<Vec<u64>>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|item| parse_integer(item).map_err(|e| ConfigError(format!("{key}: {}", e.0))))
                    .collect()
            })
            .transpose()
    }
}

fn normalize_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

fn parse_integer(s: &str) -> Result<u64, ConfigError> {
    let t = s.trim().replace('_', "");
    if let Ok(n) = t.parse::<u64>() {
        return Ok(n);
    }
    // allow 1e6 style counts
    match t.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(64) => Ok(x as u64),
        _ => err(format!("expected a non-negative integer, got {s:?}")),
    }
}

/// Evaluates a product/quotient of factors such as `-3pi/4` or `1/sqrt(2)`.
pub fn eval_number(s: &str) -> Result<f64, ConfigError> {
    let mut p = Parser { src: s.trim().as_bytes(), pos: 0, text: s };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return err(format!("unexpected trailing input in {s:?}"));
    }
    if !v.is_finite() {
        return err(format!("{s:?} is not finite"));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    text: &'a str,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bad<T>(&self) -> Result<T, ConfigError> {
        err(format!("cannot parse number {:?}", self.text))
    }

    fn expr(&mut self) -> Result<f64, ConfigError> {
        let mut sign = 1.0;
        while let Some(c @ (b'-' | b'+')) = self.peek() {
            if c == b'-' {
                sign = -sign;
            }
            self.pos += 1;
        }
        let mut acc = self.implicit_product()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc *= self.implicit_product()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    acc /= self.implicit_product()?;
                }
                _ => return Ok(sign * acc),
            }
        }
    }

    /// A factor optionally followed directly by `pi` or `sqrt(..)`, e.g. `3pi`.
    fn implicit_product(&mut self) -> Result<f64, ConfigError> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(b'p' | b's')) {
            acc *= self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<f64, ConfigError> {
        let rest = &self.src[self.pos..];
        if rest.starts_with(b"pi") {
            self.pos += 2;
            return Ok(std::f64::consts::PI);
        }
        if rest.starts_with(b"sqrt(") {
            self.pos += 5;
            let inner = self.expr()?;
            if self.peek() != Some(b')') {
                return self.bad();
            }
            self.pos += 1;
            return Ok(inner.sqrt());
        }
        if rest.first() == Some(&b'(') {
            self.pos += 1;
            let inner = self.expr()?;
            if self.peek() != Some(b')') {
                return self.bad();
            }
            self.pos += 1;
            return Ok(inner);
        }
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            let exp_sign = matches!(c, b'+' | b'-')
                && self.pos > start
                && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let tok = std::str::from_utf8(&self.src[start..self.pos]).map_err(|_| ConfigError("utf8".into()))?;
        match tok {
            "inf" | "" => self.bad(),
            _ => tok.parse::<f64>().or_else(|_| self.bad()),
        }
    }
}
