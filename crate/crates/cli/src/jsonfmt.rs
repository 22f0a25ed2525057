//! JSON and CSV output with a fixed floating-point format.
//!
//! Every f64 prints as `{:.16e}`: 17 significant digits, enough to
//! round-trip any double, and independent of locale or shortest-repr
//! heuristics.  Byte-identical reruns are part of the output contract,
//! so object keys rely on the serializer's sorted maps and nothing here
//! consults ambient state.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use serde_json::Value;

use crate::error::CliError;

/// Pretty printing with the fixed float format layered on top.
struct FixedFloats<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for FixedFloats<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Serialize a document, trailing newline included.
pub fn to_string_pretty(value: &Value) -> String {
    let mut out = Vec::new();
    let fmt = FixedFloats {
        inner: PrettyFormatter::new(),
    };
    let mut ser = Serializer::with_formatter(&mut out, fmt);
    value
        .serialize(&mut ser)
        .expect("serializing an in-memory JSON value cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("the JSON serializer emits UTF-8")
}

/// A float as a JSON value; `Value` cannot hold non-finite numbers, so
/// those are reported as an error naming the offending quantity rather
/// than silently becoming null.
pub fn num(label: &str, x: f64) -> Result<Value, CliError> {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .ok_or_else(|| CliError::new("non-finite-output", format!("{label} is not finite ({x})")))
}

pub fn num_array(label: &str, xs: &[f64]) -> Result<Value, CliError> {
    Ok(Value::Array(
        xs.iter()
            .map(|&x| num(label, x))
            .collect::<Result<Vec<_>, _>>()?,
    ))
}

/// CSV cell with the same fixed format as the JSON floats.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}
