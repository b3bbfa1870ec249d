//! Text snapshot of an [`EnergyModel`].
//!
//! ```text
//! rsl-energy-model v1
//! layers <K>
//! layer <rows> <cols>        (K lines)
//! beta <K>
//! w_out <width>
//! sha256 <hex digest of the payload lines, each terminated by '\n'>
//! payload
//! <one value per line: layer weights row-major in layer order, then β, then w_out>
//! ```

use sha2::{Digest, Sha256};

use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};
use crate::nn::GcnParams;

use super::EnergyModel;

const MAGIC: &str = "rsl-energy-model v1";

fn digest(payload: &str) -> String {
    let hash = Sha256::digest(payload.as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn encode_model(model: &EnergyModel) -> String {
    let mut payload = String::new();
    for v in model.to_flat() {
        payload.push_str(&v.to_string());
        payload.push('\n');
    }
    let mut s = format!("{MAGIC}\nlayers {}\n", model.num_layers());
    for w in &model.gcn.layer_weights {
        s.push_str(&format!("layer {} {}\n", w.rows(), w.cols()));
    }
    s.push_str(&format!("beta {}\nw_out {}\n", model.beta.len(), model.w_out.len()));
    s.push_str(&format!("sha256 {}\npayload\n", digest(&payload)));
    s.push_str(&payload);
    s
}

fn bad(msg: impl Into<String>) -> RslError {
    RslError::Snapshot(msg.into())
}

fn header_value<'a>(line: Option<&'a str>, key: &str) -> Result<Vec<&'a str>> {
    let line = line.ok_or_else(|| bad(format!("missing `{key}` line")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(bad(format!("expected `{key}`, found `{line}`")));
    }
    Ok(parts.collect())
}

fn count(tok: Option<&&str>, what: &str) -> Result<usize> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| bad(format!("bad {what} in header")))
}

pub fn decode_model(text: &str) -> Result<EnergyModel> {
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(bad("unrecognized header"));
    }
    let k = count(header_value(lines.next(), "layers")?.first(), "layer count")?;
    let mut shapes = Vec::with_capacity(k);
    for _ in 0..k {
        let v = header_value(lines.next(), "layer")?;
        shapes.push((count(v.first(), "layer rows")?, count(v.get(1), "layer cols")?));
    }
    let n_beta = count(header_value(lines.next(), "beta")?.first(), "beta length")?;
    let n_out = count(header_value(lines.next(), "w_out")?.first(), "w_out length")?;
    let sum = header_value(lines.next(), "sha256")?
        .first()
        .map(|s| s.to_string())
        .ok_or_else(|| bad("missing checksum"))?;
    if lines.next() != Some("payload") {
        return Err(bad("missing payload marker"));
    }
    let body: Vec<&str> = lines.collect();
    let mut payload = String::new();
    for l in &body {
        payload.push_str(l);
        payload.push('\n');
    }
    if digest(&payload) != sum {
        return Err(bad("checksum mismatch"));
    }
    let expected: usize = shapes.iter().map(|(r, c)| r * c).sum::<usize>() + n_beta + n_out;
    if body.len() != expected {
        return Err(bad(format!("payload has {} values, header declares {expected}", body.len())));
    }
    let values: Vec<f64> = body
        .iter()
        .map(|s| s.parse::<f64>().map_err(|_| bad(format!("bad value `{s}`"))))
        .collect::<Result<_>>()?;
    let mut off = 0;
    let mut layer_weights = Vec::with_capacity(k);
    for (r, c) in shapes {
        layer_weights.push(DenseMatrix::from_vec(r, c, values[off..off + r * c].to_vec())?);
        off += r * c;
    }
    let beta = values[off..off + n_beta].to_vec();
    off += n_beta;
    let w_out = values[off..].to_vec();
    let model = EnergyModel {
        gcn: GcnParams { layer_weights },
        beta,
        w_out,
    };
    model
        .validate()
        .map_err(|e| bad(format!("inconsistent shapes: {e}")))?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn model() -> EnergyModel {
        EnergyModel::init(3, 4, 2, &mut Rng::new(21)).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        assert_eq!(decode_model(&encode_model(&m)).unwrap(), m);
    }

    #[test]
    fn corrupted_payload_fails_checksum() {
        let text = encode_model(&model());
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let last = lines.len() - 1;
        lines[last] = "0.125".into();
        let broken = lines.join("\n") + "\n";
        assert!(matches!(decode_model(&broken), Err(RslError::Snapshot(_))));
    }

    #[test]
    fn shape_header_mismatch() {
        let text = encode_model(&model()).replacen("layer 3 4", "layer 4 4", 1);
        assert!(matches!(decode_model(&text), Err(RslError::Snapshot(_))));
        assert!(decode_model("garbage").is_err());
    }
}
