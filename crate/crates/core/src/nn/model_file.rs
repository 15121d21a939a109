//! Line-oriented text model format.
//!
//! ```text
//! DEVOC-MLP v1
//! dims 32 <n_hidden> <n_out>
//! layout row-major W1 b1 W2 b2
//! labels <comma-separated class names>
//! <one parameter per line, 17 significant digits>
//! ```

use std::fs;
use std::path::Path;

use super::Mlp;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

pub const MODEL_MAGIC: &str = "DEVOC-MLP";
pub const MODEL_VERSION: u32 = 1;
const LAYOUT_LINE: &str = "layout row-major W1 b1 W2 b2";

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedModelFile(msg.into())
}

pub fn encode_model(net: &Mlp, labels: &[String]) -> Result<String> {
    if labels.len() != net.n_out() {
        return Err(Error::BadDimensions(format!(
            "{} labels for {} outputs",
            labels.len(),
            net.n_out()
        )));
    }
    if let Some(bad) = labels
        .iter()
        .find(|l| l.is_empty() || l.contains(',') || l.chars().any(char::is_whitespace))
    {
        return Err(Error::BadDimensions(format!("label {bad:?} is not storable")));
    }
    let mut out = String::new();
    out.push_str(&format!("{MODEL_MAGIC} v{MODEL_VERSION}\n"));
    out.push_str(&format!(
        "dims {} {} {}\n",
        net.n_in(),
        net.n_hidden(),
        net.n_out()
    ));
    out.push_str(LAYOUT_LINE);
    out.push('\n');
    out.push_str(&format!("labels {}\n", labels.join(",")));
    for p in net.params() {
        // 1 + 16 fractional digits = 17 significant digits
        out.push_str(&format!("{p:.16e}\n"));
    }
    Ok(out)
}

pub fn decode_model(text: &str) -> Result<(Mlp, Vec<String>)> {
    let mut lines = text.lines();
    let mut next = |what: &str| lines.next().ok_or_else(|| malformed(format!("missing {what}")));

    let header = next("header")?;
    let version = header
        .strip_prefix(MODEL_MAGIC)
        .and_then(|rest| rest.strip_prefix(" v"))
        .ok_or_else(|| malformed(format!("bad header {header:?}")))?;
    if version != MODEL_VERSION.to_string() {
        return Err(Error::VersionMismatch {
            found: version.to_string(),
            supported: MODEL_VERSION,
        });
    }

    let dims_line = next("dims")?;
    let dims: Vec<usize> = dims_line
        .strip_prefix("dims ")
        .ok_or_else(|| malformed("bad dims line"))?
        .split_whitespace()
        .map(|d| d.parse().map_err(|_| malformed(format!("bad dimension {d:?}"))))
        .collect::<Result<_>>()?;
    let [n_in, n_hidden, n_out] = dims[..] else {
        return Err(malformed("dims needs three values"));
    };

    if next("layout")? != LAYOUT_LINE {
        return Err(malformed("unknown parameter layout"));
    }

    let labels: Vec<String> = next("labels")?
        .strip_prefix("labels ")
        .ok_or_else(|| malformed("bad labels line"))?
        .split(',')
        .map(str::to_string)
        .collect();
    if labels.len() != n_out {
        return Err(malformed(format!(
            "{} labels for {n_out} outputs",
            labels.len()
        )));
    }

    let mut net = Mlp::zeros(n_in, n_hidden, n_out).map_err(|e| malformed(e.to_string()))?;
    let params: Vec<f64> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(format!("bad parameter {l:?}")))
        })
        .collect::<Result<_>>()?;
    if params.len() != net.n_params() {
        return Err(malformed(format!(
            "expected {} parameters, found {}",
            net.n_params(),
            params.len()
        )));
    }
    net.set_params(&params)?;
    Ok((net, labels))
}

pub fn save_model(path: &Path, net: &Mlp, labels: &[String]) -> Result<()> {
    write_atomic(path, encode_model(net, labels)?.as_bytes())
}

pub fn load_model(path: &Path) -> Result<(Mlp, Vec<String>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_model(&text)
}
