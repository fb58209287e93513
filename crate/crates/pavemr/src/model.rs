//! Text model files.
//!
//! A network block is a header of `key value` lines followed by one
//! parameter per line:
//!
//! ```text
//! format pavemr-mlp
//! version 1
//! head linear
//! seed 7
//! sizes 40 64 64 1
//! parameters 6913
//! checksum sha256:<hex digest of the parameter lines>
//! <parameter 0>
//! ...
//! ```
//!
//! Parameters are listed layer by layer, weights (row-major, outputs ×
//! inputs) before biases, and printed as the shortest decimal that parses
//! back to the same `f64`, so `load(save(m))` is bit-identical.
//!
//! A surrogate file starts with `format pavemr-surrogate`, `version 1`,
//! `epoch_year` and a checksum over the rest of the file, then holds one
//! section per indicator: `indicator <name>`, `target <min> <max>`,
//! `norm <n>` followed by `n` lines of `<min> <max>`, then `model` and a
//! network block.

use std::path::Path;

use sha2::{Digest, Sha256};

use pavemr_core::dataprep::{FeatureRange, NormalizationParams};
use pavemr_core::envmodel::SurrogatePair;
use pavemr_core::neural::{Dense, Head, Mlp};

use crate::error::{Error, Result};
use crate::io;

pub const MLP_FORMAT: &str = "pavemr-mlp";
pub const SURROGATE_FORMAT: &str = "pavemr-surrogate";
pub const FORMAT_VERSION: u32 = 1;

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn head_name(h: Head) -> &'static str {
    match h {
        Head::Linear => "linear",
        Head::Softmax => "softmax",
    }
}

pub fn render_mlp(m: &Mlp) -> String {
    let mut payload = String::new();
    for p in m.params() {
        payload.push_str(&io::num(*p));
        payload.push('\n');
    }
    let sizes: Vec<String> = m.sizes().iter().map(usize::to_string).collect();
    format!(
        "format {MLP_FORMAT}\nversion {FORMAT_VERSION}\nhead {}\nseed {}\nsizes {}\nparameters {}\nchecksum sha256:{}\n{payload}",
        head_name(m.head()),
        m.seed(),
        sizes.join(" "),
        m.parameter_count(),
        sha256_hex(&payload),
    )
}

/// Line reader that reports the file path and line number on errors.
struct Lines<'a> {
    path: &'a Path,
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Self {
            path,
            lines: text.lines().collect(),
            pos: 0,
        }
    }

    fn fail(&self, msg: impl std::fmt::Display) -> Error {
        Error::format(self.path, format!("line {}: {msg}", self.pos))
    }

    fn next(&mut self) -> Result<&'a str> {
        let line = self.lines.get(self.pos).copied();
        self.pos += 1;
        line.ok_or_else(|| self.fail("unexpected end of file"))
    }

    /// Reads `key rest` and returns `rest`.
    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest.trim()),
            _ if line == key => Ok(""),
            _ => Err(self.fail(format!("expected `{key}`, found `{line}`"))),
        }
    }

    fn parse<T: std::str::FromStr>(&self, s: &str, what: &str) -> Result<T> {
        s.parse().map_err(|_| self.fail(format!("invalid {what} `{s}`")))
    }

    fn expect_header(&mut self, format: &str) -> Result<()> {
        let f = self.field("format")?;
        if f != format {
            return Err(self.fail(format!("expected format {format}, found {f}")));
        }
        let v: u32 = {
            let s = self.field("version")?;
            self.parse(s, "version")?
        };
        if v != FORMAT_VERSION {
            return Err(self.fail(format!("unsupported version {v}")));
        }
        Ok(())
    }

    fn checksum(&mut self) -> Result<String> {
        let c = self.field("checksum")?;
        c.strip_prefix("sha256:")
            .map(str::to_string)
            .ok_or_else(|| self.fail("checksum must be sha256:<hex>"))
    }

    /// Text of the remaining lines, newline-terminated.
    fn rest(&self) -> String {
        let mut s = String::new();
        for l in &self.lines[self.pos..] {
            s.push_str(l);
            s.push('\n');
        }
        s
    }

    fn range(&mut self) -> Result<FeatureRange> {
        let line = self.next()?;
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(self.fail(format!("expected `<min> <max>`, found `{line}`")));
        };
        Ok(FeatureRange::new(self.parse(a, "number")?, self.parse(b, "number")?))
    }

    fn mlp(&mut self) -> Result<Mlp> {
        self.expect_header(MLP_FORMAT)?;
        let head = match self.field("head")? {
            "linear" => Head::Linear,
            "softmax" => Head::Softmax,
            other => return Err(self.fail(format!("unknown head `{other}`"))),
        };
        let seed: u64 = {
            let s = self.field("seed")?;
            self.parse(s, "seed")?
        };
        let sizes: Vec<usize> = {
            let s = self.field("sizes")?;
            s.split_whitespace().map(|x| self.parse(x, "layer size")).collect::<Result<_>>()?
        };
        if sizes.len() < 2 {
            return Err(self.fail("a network needs at least two sizes"));
        }
        let count: usize = {
            let s = self.field("parameters")?;
            self.parse(s, "parameter count")?
        };
        let expected: usize = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        if count != expected {
            return Err(self.fail(format!("sizes imply {expected} parameters, header says {count}")));
        }
        let checksum = self.checksum()?;
        let mut payload = String::new();
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            let line = self.next()?;
            values.push(self.parse::<f64>(line, "parameter")?);
            payload.push_str(line);
            payload.push('\n');
        }
        if sha256_hex(&payload) != checksum {
            return Err(Error::format(self.path, "parameter checksum mismatch"));
        }
        let mut it = values.into_iter();
        let layers = sizes
            .windows(2)
            .map(|w| Dense {
                inputs: w[0],
                outputs: w[1],
                weights: it.by_ref().take(w[0] * w[1]).collect(),
                biases: it.by_ref().take(w[1]).collect(),
            })
            .collect();
        Ok(Mlp::from_layers(head, seed, layers)?)
    }
}

pub fn parse_mlp(text: &str, path: &Path) -> Result<Mlp> {
    let mut lines = Lines::new(path, text);
    let m = lines.mlp()?;
    if lines.pos != lines.lines.len() {
        return Err(lines.fail("trailing content after the parameters"));
    }
    Ok(m)
}

pub fn save_mlp(path: &Path, m: &Mlp) -> Result<()> {
    io::write_text(path, &render_mlp(m))
}

pub fn load_mlp(path: &Path) -> Result<Mlp> {
    parse_mlp(&io::read_text(path)?, path)
}

pub fn render_surrogate(sp: &SurrogatePair) -> String {
    let mut body = String::new();
    let sections = [
        ("iri", &sp.iri_model, &sp.iri_norm, sp.iri_target),
        ("rd", &sp.rd_model, &sp.rd_norm, sp.rd_target),
    ];
    for (name, model, norm, target) in sections {
        body.push_str(&format!("indicator {name}\n"));
        body.push_str(&format!("target {} {}\n", io::num(target.min), io::num(target.max)));
        body.push_str(&format!("norm {}\n", norm.ranges.len()));
        for r in &norm.ranges {
            body.push_str(&format!("{} {}\n", io::num(r.min), io::num(r.max)));
        }
        body.push_str("model\n");
        body.push_str(&render_mlp(model));
    }
    format!(
        "format {SURROGATE_FORMAT}\nversion {FORMAT_VERSION}\nepoch_year {}\nchecksum sha256:{}\n{body}",
        sp.epoch_year,
        sha256_hex(&body)
    )
}

pub fn parse_surrogate(text: &str, path: &Path) -> Result<SurrogatePair> {
    let mut lines = Lines::new(path, text);
    lines.expect_header(SURROGATE_FORMAT)?;
    let epoch_year: i32 = {
        let s = lines.field("epoch_year")?;
        lines.parse(s, "epoch year")?
    };
    let checksum = lines.checksum()?;
    if sha256_hex(&lines.rest()) != checksum {
        return Err(Error::format(path, "surrogate checksum mismatch"));
    }
    let mut section = |name: &str| -> Result<(Mlp, NormalizationParams, FeatureRange)> {
        let found = lines.field("indicator")?;
        if found != name {
            return Err(lines.fail(format!("expected indicator {name}, found {found}")));
        }
        let target = {
            let s = lines.field("target")?;
            let (a, b) = s.split_once(' ').ok_or_else(|| lines.fail("target needs `<min> <max>`"))?;
            FeatureRange::new(lines.parse(a, "number")?, lines.parse(b, "number")?)
        };
        let n: usize = {
            let s = lines.field("norm")?;
            lines.parse(s, "norm length")?
        };
        let ranges = (0..n).map(|_| lines.range()).collect::<Result<Vec<_>>>()?;
        lines.field("model")?;
        Ok((lines.mlp()?, NormalizationParams::from_ranges(ranges), target))
    };
    let (iri_model, iri_norm, iri_target) = section("iri")?;
    let (rd_model, rd_norm, rd_target) = section("rd")?;
    let sp = SurrogatePair {
        iri_model,
        rd_model,
        iri_norm,
        rd_norm,
        iri_target,
        rd_target,
        epoch_year,
    };
    sp.validate()?;
    Ok(sp)
}

pub fn save_surrogate(path: &Path, sp: &SurrogatePair) -> Result<()> {
    io::write_text(path, &render_surrogate(sp))
}

pub fn load_surrogate(path: &Path) -> Result<SurrogatePair> {
    parse_surrogate(&io::read_text(path)?, path)
}
