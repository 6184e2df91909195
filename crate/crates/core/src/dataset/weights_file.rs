//! Text format for [`ModelWeights`].
//!
//! ```text
//! # comment lines start with '#'
//! hidden_dim 32
//! uniform false
//! activation elu
//! degree_transform log1p
//! temperature 1
//! decode_threshold 0.5
//! tensor f_r.weight 32 1
//! <one line per row, values separated by spaces>
//! ...
//! ```
//!
//! Values use 17 significant digits so files round-trip exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::neural::{ModelWeights, Tensor};
use crate::numfmt::fmt_g17;
use crate::{Error, Result};

pub fn format_weights(weights: &ModelWeights) -> String {
    let mut out = String::new();
    writeln!(out, "# hitset model weights").unwrap();
    writeln!(out, "hidden_dim {}", weights.hidden_dim).unwrap();
    writeln!(out, "uniform {}", weights.uniform).unwrap();
    writeln!(out, "activation {}", weights.activation.as_str()).unwrap();
    writeln!(out, "degree_transform {}", weights.degree_transform.as_str()).unwrap();
    writeln!(out, "temperature {}", fmt_g17(weights.temperature)).unwrap();
    writeln!(out, "decode_threshold {}", fmt_g17(weights.decode_threshold)).unwrap();
    for (name, t) in &weights.tensors {
        writeln!(out, "tensor {name} {} {}", t.rows, t.cols).unwrap();
        for i in 0..t.rows {
            let row: Vec<String> = t.row(i).iter().map(|&v| fmt_g17(v)).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| parse_err(line, format!("bad value {raw:?} for {key}")))
}

/// Parses and validates a weights document.
pub fn parse_weights(text: &str) -> Result<ModelWeights> {
    let mut header: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut tensors: BTreeMap<String, Tensor> = BTreeMap::new();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    while let Some((line, content)) = lines.next() {
        let parts: Vec<&str> = content.split_whitespace().collect();
        if parts[0] == "tensor" {
            let [_, name, rows, cols] = parts[..] else {
                return Err(parse_err(line, "expected `tensor <name> <rows> <cols>`"));
            };
            let rows: usize = parse_value(line, "rows", rows)?;
            let cols: usize = parse_value(line, "cols", cols)?;
            let mut data = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                let (row_line, row) = lines
                    .next()
                    .ok_or_else(|| parse_err(line, format!("tensor {name} ends after {r} rows")))?;
                let values = row
                    .split_whitespace()
                    .map(|v| parse_value::<f64>(row_line, name, v))
                    .collect::<Result<Vec<_>>>()?;
                if values.len() != cols {
                    return Err(parse_err(
                        row_line,
                        format!("tensor {name} row has {} values, expected {cols}", values.len()),
                    ));
                }
                data.extend(values);
            }
            if tensors
                .insert(name.to_string(), Tensor { rows, cols, data })
                .is_some()
            {
                return Err(parse_err(line, format!("tensor {name} defined twice")));
            }
        } else {
            let [key, value] = parts[..] else {
                return Err(parse_err(line, format!("expected `key value`, got {content:?}")));
            };
            if !tensors.is_empty() {
                return Err(parse_err(line, "header keys must precede tensors"));
            }
            if header.insert(key.to_string(), (line, value.to_string())).is_some() {
                return Err(parse_err(line, format!("duplicate key {key}")));
            }
        }
    }
    let mut get = |key: &str| {
        header
            .remove(key)
            .ok_or_else(|| parse_err(0, format!("missing header key {key}")))
    };
    let (l, v) = get("hidden_dim")?;
    let hidden_dim = parse_value(l, "hidden_dim", &v)?;
    let (l, v) = get("uniform")?;
    let uniform = parse_value(l, "uniform", &v)?;
    let (l, v) = get("activation")?;
    let activation = parse_value(l, "activation", &v)?;
    let (l, v) = get("degree_transform")?;
    let degree_transform = parse_value(l, "degree_transform", &v)?;
    let (l, v) = get("temperature")?;
    let temperature = parse_value(l, "temperature", &v)?;
    let (l, v) = get("decode_threshold")?;
    let decode_threshold = parse_value(l, "decode_threshold", &v)?;
    if let Some((key, (line, _))) = header.into_iter().next() {
        return Err(parse_err(line, format!("unknown header key {key}")));
    }
    let weights = ModelWeights {
        hidden_dim,
        uniform,
        activation,
        degree_transform,
        temperature,
        decode_threshold,
        tensors,
    };
    weights.validate()?;
    Ok(weights)
}

pub fn write_weights_file(path: impl AsRef<Path>, weights: &ModelWeights) -> Result<()> {
    std::fs::write(path, format_weights(weights))?;
    Ok(())
}

pub fn read_weights_file(path: impl AsRef<Path>) -> Result<ModelWeights> {
    parse_weights(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::analytic_weights;

    #[test]
    fn round_trip_is_exact() {
        for (h, uniform) in [(1, false), (3, true), (32, false)] {
            let w = ModelWeights::random(h, uniform, 7).unwrap();
            assert_eq!(parse_weights(&format_weights(&w)).unwrap(), w);
            let a = analytic_weights(h, uniform).unwrap();
            assert_eq!(parse_weights(&format_weights(&a)).unwrap(), a);
        }
    }

    #[test]
    fn schema_errors() {
        let text = format_weights(&analytic_weights(2, false).unwrap());
        let missing = text.replace("activation elu\n", "");
        assert!(parse_weights(&missing).is_err());
        let bad_row = text.replacen("tensor f_d.bias 1 2\n0 0", "tensor f_d.bias 1 2\n0", 1);
        assert!(matches!(parse_weights(&bad_row), Err(Error::Parse { .. })));
        let bad_shape = text.replace("tensor q_x.bias 1 1", "tensor q_x.bias 1 1\n0\ntensor extra 1 1");
        assert!(parse_weights(&bad_shape).is_err());
        assert!(parse_weights("").is_err());
    }
}
