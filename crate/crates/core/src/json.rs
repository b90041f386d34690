//! JSON I/O shared by the library and the CLI.
//!
//! Floats are written with 17 significant digits in `%.17g` style so every
//! value parses back to the identical `f64` and re-serializes to identical
//! text.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter};

use crate::error::{Error, Result};
use crate::matrix::{c, Mat2, Mat4, Unitary2, Unitary4, EXTERNAL_UNITARY_TOL};

/// `%.17g` rendering of a finite double.
pub fn fmt_g17(v: f64) -> String {
    if v == 0.0 {
        // "-0" would come back as the integer 0 and lose the sign.
        return if v.is_sign_negative() { "-0.0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|ch| *ch != '.').collect();
    if (-5..17).contains(&exp) {
        let body = if exp >= 0 {
            let split = exp as usize + 1;
            let (int, frac) = digits.split_at(split);
            let frac = frac.trim_end_matches('0');
            if frac.is_empty() {
                int.to_string()
            } else {
                format!("{int}.{frac}")
            }
        } else {
            let zeros = "0".repeat((-exp - 1) as usize);
            format!("0.{zeros}{}", digits.trim_end_matches('0'))
        };
        format!("{sign}{body}")
    } else {
        let (lead, rest) = digits.split_at(1);
        let rest = rest.trim_end_matches('0');
        let m = if rest.is_empty() { lead.to_string() } else { format!("{lead}.{rest}") };
        let esign = if exp < 0 { '-' } else { '+' };
        format!("{sign}{m}e{esign}{:02}", exp.abs())
    }
}

/// Compact JSON formatter that writes floats through [`fmt_g17`].
#[derive(Default)]
pub struct G17Formatter(CompactFormatter);

impl Formatter for G17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, G17Formatter::default());
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// `{"dim": 2|4, "rows": [[[re, im], ...], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl MatrixJson {
    fn check_shape(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::MatrixFormat(format!("expected dim {dim}, found {}", self.dim)));
        }
        if self.rows.len() != dim || self.rows.iter().any(|r| r.len() != dim) {
            return Err(Error::MatrixFormat(format!(
                "\"rows\" must be {dim}×{dim} for dim {dim}"
            )));
        }
        Ok(())
    }

    pub fn to_unitary4(&self) -> Result<Unitary4> {
        self.to_unitary4_with_tolerance(EXTERNAL_UNITARY_TOL)
    }

    pub fn to_unitary4_with_tolerance(&self, tol: f64) -> Result<Unitary4> {
        self.check_shape(4)?;
        let m = Mat4::from_fn(|r, col| c(self.rows[r][col][0], self.rows[r][col][1]));
        Unitary4::with_tolerance(m, tol)
    }

    pub fn to_unitary2(&self) -> Result<Unitary2> {
        self.check_shape(2)?;
        let m = Mat2::from_fn(|r, col| c(self.rows[r][col][0], self.rows[r][col][1]));
        Unitary2::with_tolerance(m, EXTERNAL_UNITARY_TOL)
    }
}

impl From<&Unitary4> for MatrixJson {
    fn from(u: &Unitary4) -> Self {
        let m = u.matrix();
        MatrixJson {
            dim: 4,
            rows: (0..4).map(|r| (0..4).map(|col| [m[(r, col)].re, m[(r, col)].im]).collect()).collect(),
        }
    }
}

impl From<&Unitary2> for MatrixJson {
    fn from(u: &Unitary2) -> Self {
        let m = u.matrix();
        MatrixJson {
            dim: 2,
            rows: (0..2).map(|r| (0..2).map(|col| [m[(r, col)].re, m[(r, col)].im]).collect()).collect(),
        }
    }
}

pub fn parse_unitary4(text: &str) -> Result<Unitary4> {
    let mj: MatrixJson = serde_json::from_str(text)?;
    mj.to_unitary4()
}

pub fn unitary4_to_json(u: &Unitary4) -> String {
    to_string(&MatrixJson::from(u)).expect("matrix JSON serializes")
}
