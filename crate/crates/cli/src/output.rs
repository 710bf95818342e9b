//! Row serialization: CSV with `%.17g` numbers, or JSON lines.

use std::io::Write;

use serde_json::{json, Map, Number};

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    F(f64),
    U(u64),
    S(String),
    B(bool),
    Empty,
}

impl Value {
    fn cell(&self) -> String {
        match self {
            Value::F(x) => g17(*x),
            Value::U(n) => n.to_string(),
            Value::S(s) => s.clone(),
            Value::B(b) => b.to_string(),
            Value::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            // JSON has no NaN or infinity
            Value::F(x) => Number::from_f64(*x).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Value::U(n) => json!(n),
            Value::S(s) => json!(s),
            Value::B(b) => json!(b),
            Value::Empty => serde_json::Value::Null,
        }
    }
}

/// C's `printf("%.17g", x)`.
pub fn g17(x: f64) -> String {
    const P: i32 = 17;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mant), exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes a header block, then rows, in one of the two formats.
pub struct RowWriter<'a> {
    format: Format,
    header: Vec<&'static str>,
    csv: Option<csv::Writer<&'a mut dyn Write>>,
    raw: Option<&'a mut dyn Write>,
}

impl<'a> RowWriter<'a> {
    /// `echo` lines become `# ` comments in CSV and a leading `config`
    /// object in JSON lines.
    pub fn new(
        sink: &'a mut dyn Write,
        format: Format,
        header: Vec<&'static str>,
        echo: &[(String, String)],
    ) -> Result<Self, CliError> {
        match format {
            Format::Csv => {
                for (k, v) in echo {
                    writeln!(sink, "# {k} = {v}")?;
                }
                let mut w = csv::WriterBuilder::new().from_writer(sink);
                w.write_record(&header).map_err(csv_err)?;
                Ok(Self {
                    format,
                    header,
                    csv: Some(w),
                    raw: None,
                })
            }
            Format::Jsonl => {
                let config: Map<String, serde_json::Value> =
                    echo.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
                writeln!(sink, "{}", json!({ "config": config }))?;
                Ok(Self {
                    format,
                    header,
                    csv: None,
                    raw: Some(sink),
                })
            }
        }
    }

    pub fn write(&mut self, values: &[Value]) -> Result<(), CliError> {
        debug_assert_eq!(values.len(), self.header.len());
        match self.format {
            Format::Csv => {
                let w = self.csv.as_mut().expect("csv writer");
                w.write_record(values.iter().map(Value::cell)).map_err(csv_err)
            }
            Format::Jsonl => {
                let obj: Map<String, serde_json::Value> = self
                    .header
                    .iter()
                    .zip(values)
                    .map(|(k, v)| (k.to_string(), v.json()))
                    .collect();
                let w = self.raw.as_mut().expect("raw writer");
                writeln!(w, "{}", serde_json::Value::Object(obj))?;
                Ok(())
            }
        }
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        if let Some(w) = self.csv.as_mut() {
            w.flush()?;
        }
        if let Some(w) = self.raw.as_mut() {
            w.flush()?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf() {
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(2.5), "2.5");
        assert_eq!(g17(-3.0), "-3");
        assert_eq!(g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(g17(2.4647e-7), "2.4647000000000001e-07");
        assert_eq!(g17(1e17), "1e+17");
        assert_eq!(g17(1e16), "10000000000000000");
        assert_eq!(g17(123456.789), "123456.789");
        assert_eq!(g17(0.0001), "0.0001");
        assert_eq!(g17(f64::NAN), "nan");
        assert_eq!(g17(1e300), "1.0000000000000001e+300");
    }

    #[test]
    fn round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 6.66e11, 1e-300, 5e-324, f64::MAX] {
            assert_eq!(g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
