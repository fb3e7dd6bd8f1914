//! Text layout for network parameters:
//!
//! ```text
//! dynprice-network 1
//! layers <L>
//! dense <in> <out> <activation> <bias|nobias>
//! <out lines of `in` weights, row-major>
//! <one line of `out` biases, when present>
//! ... repeated per layer
//! ```
//!
//! Numbers use Rust's shortest round-trip formatting, so save/load is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Activation, Dense, Network, NeuralError};

const MAGIC: &str = "dynprice-network";
const VERSION: u32 = 1;

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v}").expect("write to string");
    }
    s
}

pub fn to_text(net: &Network) -> String {
    let mut out = format!("{MAGIC} {VERSION}\nlayers {}\n", net.layers().len());
    for l in net.layers() {
        let bias = if l.has_bias() { "bias" } else { "nobias" };
        writeln!(
            out,
            "dense {} {} {} {bias}",
            l.in_dim,
            l.out_dim,
            l.activation.name()
        )
        .expect("write");
        for row in l.weights.chunks(l.in_dim.max(1)) {
            out.push_str(&join(row));
            out.push('\n');
        }
        if l.has_bias() {
            out.push_str(&join(&l.bias));
            out.push('\n');
        }
    }
    out
}

pub fn from_text(text: &str) -> Result<Network, NeuralError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| NeuralError::Format {
            line: 0,
            reason: format!("unexpected end, expected {what}"),
        })
    };
    let bad = |line: usize, reason: String| NeuralError::Format { line, reason };

    let (ln, head) = next("header")?;
    let version = head
        .strip_prefix(MAGIC)
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or_else(|| bad(ln, format!("expected `{MAGIC} <version>`")))?;
    if version != VERSION {
        return Err(bad(ln, format!("unsupported version {version}")));
    }
    let (ln, count) = next("layer count")?;
    let n_layers: usize = count
        .strip_prefix("layers")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| bad(ln, "expected `layers <n>`".into()))?;

    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let (ln, desc) = next("layer descriptor")?;
        let parts: Vec<&str> = desc.split_whitespace().collect();
        let (in_dim, out_dim, act, bias) = match parts.as_slice() {
            ["dense", i, o, a, b] => (
                i.parse::<usize>()
                    .map_err(|_| bad(ln, "bad in_dim".into()))?,
                o.parse::<usize>()
                    .map_err(|_| bad(ln, "bad out_dim".into()))?,
                Activation::from_name(a)
                    .ok_or_else(|| bad(ln, format!("unknown activation {a}")))?,
                match *b {
                    "bias" => true,
                    "nobias" => false,
                    other => return Err(bad(ln, format!("expected bias|nobias, got {other}"))),
                },
            ),
            _ => {
                return Err(bad(
                    ln,
                    "expected `dense <in> <out> <activation> <bias|nobias>`".into(),
                ))
            }
        };
        let mut parse_row = |len: usize| -> Result<Vec<f64>, NeuralError> {
            let (ln, row) = next("parameter row")?;
            let vals = row
                .split_whitespace()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| bad(ln, format!("bad number {v:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if vals.len() != len {
                return Err(bad(
                    ln,
                    format!("expected {len} values, found {}", vals.len()),
                ));
            }
            Ok(vals)
        };
        let mut weights = Vec::with_capacity(in_dim * out_dim);
        for _ in 0..out_dim {
            weights.extend(parse_row(in_dim)?);
        }
        let bias = if bias {
            parse_row(out_dim)?
        } else {
            Vec::new()
        };
        layers.push(Dense {
            in_dim,
            out_dim,
            activation: act,
            weights,
            bias,
        });
    }
    Network::new(layers)
}

pub fn save_network(path: &Path, net: &Network) -> Result<(), NeuralError> {
    fs::write(path, to_text(net))?;
    Ok(())
}

pub fn load_network(path: &Path) -> Result<Network, NeuralError> {
    from_text(&fs::read_to_string(path)?)
}
