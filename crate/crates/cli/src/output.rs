//! Artifact emission: one float format everywhere, JSON through a
//! formatter that uses it, and file helpers that keep path context.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// 17 significant digits in scientific notation: enough to round-trip any
/// f64 exactly, and a fixed width keeps reruns diffable byte for byte.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    format!("{v:.16e}")
}

pub fn fmt_residual(r: Option<f64>) -> String {
    r.map(fmt_float).unwrap_or_else(|| "NaN".into())
}

/// Pretty printer whose finite floats come out in the fixed scientific
/// format; everything structural is delegated.
struct SciPretty<'a>(PrettyFormatter<'a>);

impl Formatter for SciPretty<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", fmt_float(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    // marks the object nonempty; without it the closing brace hugs the
    // last scalar member
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, SciPretty(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .with_context(|| format!("serializing {}", path.display()))?;
    buf.push(b'\n');
    std::fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}

pub fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn finish(mut w: BufWriter<File>, path: &Path) -> anyhow::Result<()> {
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
}
