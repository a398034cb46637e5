//! JSON output with every float printed to 17 significant digits, so that
//! reruns are byte-identical and values round-trip exactly.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Pretty printer whose floats are written as `d.dddddddddddddddde±x`.
pub struct Sig17<'a>(PrettyFormatter<'a>);

impl Default for Sig17<'_> {
    fn default() -> Self {
        Sig17(PrettyFormatter::with_indent(b"  "))
    }
}

/// `format!("{:.16e}")` with non-finite values mapped to `null`.
pub fn fmt_f64(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        "null".into()
    }
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate! {
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    }
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

pub fn write_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    std::fs::write(path, to_string(value)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_string(&serde_json::json!({"a": 0.1, "b": [1.0, -2.5e-300], "c": 3})).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("-2.5000000000000000e-300"));
        assert!(s.contains("\"c\": 3"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn non_finite_becomes_null() {
        let s = to_string(&[f64::NAN, f64::INFINITY]).unwrap();
        assert!(!s.contains("NaN") && s.matches("null").count() == 2);
    }
}
