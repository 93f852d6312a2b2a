//! Binary weights file.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic        4 bytes   "HROI"
//! version      u16       1
//! angle mode   u8        0 = sin/cos, 1 = scalar
//! spec length  u16       byte length of the feature-spec tag
//! spec         bytes     UTF-8 feature-spec tag
//! head count   u8        3 (center, size, angle)
//! per head:
//!   layers     u8        number of layer widths k
//!   widths     k * u32   input, hidden..., output
//!   params     f64 ...   per layer: weights row-major (out x in), then biases
//! ```
//!
//! No trailing bytes are allowed.

use std::path::Path;

use crate::error::{Error, Result, WeightsError};
use crate::model::mlp::Mlp;
use crate::model::predictor::{AngleMode, RoiPredictor, FEATURE_SPEC};

pub const MAGIC: &[u8; 4] = b"HROI";
pub const VERSION: u16 = 1;

pub fn encode(p: &RoiPredictor) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(match p.angle_mode {
        AngleMode::SinCos => 0,
        AngleMode::Scalar => 1,
    });
    let spec = p.feature_spec.as_bytes();
    out.extend_from_slice(&(spec.len() as u16).to_le_bytes());
    out.extend_from_slice(spec);
    out.push(3);
    for head in [&p.center_head, &p.size_head, &p.angle_head] {
        out.push(head.layer_sizes().len() as u8);
        for &n in head.layer_sizes() {
            out.extend_from_slice(&(n as u32).to_le_bytes());
        }
        for v in head.params() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WeightsError> {
        if self.buf.len() - self.pos < n {
            return Err(WeightsError::Truncated(self.pos));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, WeightsError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, WeightsError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, WeightsError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, WeightsError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn read_head(r: &mut Reader<'_>) -> Result<Mlp> {
    let k = r.u8()? as usize;
    if k < 2 {
        return Err(WeightsError::Shape(format!("head with {k} layer widths")).into());
    }
    let sizes = (0..k)
        .map(|_| r.u32().map(|n| n as usize))
        .collect::<Result<Vec<_>, _>>()?;
    if sizes.iter().any(|&n| n == 0 || n > 4096) {
        return Err(WeightsError::Shape(format!("implausible layer widths {sizes:?}")).into());
    }
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for w in sizes.windows(2) {
        weights.push(
            (0..w[0] * w[1])
                .map(|_| r.f64())
                .collect::<Result<Vec<_>, _>>()?,
        );
        biases.push((0..w[1]).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?);
    }
    Mlp::from_parts(&sizes, weights, biases).map_err(|e| WeightsError::Shape(e.to_string()).into())
}

pub fn decode(bytes: &[u8]) -> Result<RoiPredictor> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r
        .take(4)
        .map_err(|_| WeightsError::Version("missing magic".into()))?;
    if magic != MAGIC {
        return Err(WeightsError::Version(format!("bad magic {magic:?}")).into());
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(WeightsError::Version(format!("unsupported version {version}")).into());
    }
    let angle_mode = match r.u8()? {
        0 => AngleMode::SinCos,
        1 => AngleMode::Scalar,
        m => return Err(WeightsError::Version(format!("unknown angle mode {m}")).into()),
    };
    let len = r.u16()? as usize;
    let spec = std::str::from_utf8(r.take(len)?)
        .map_err(|_| WeightsError::Version("feature spec is not UTF-8".into()))?;
    if spec != FEATURE_SPEC {
        return Err(WeightsError::Version(format!(
            "feature spec {spec:?}, expected {FEATURE_SPEC:?}"
        ))
        .into());
    }
    let heads = r.u8()?;
    if heads != 3 {
        return Err(WeightsError::Shape(format!("{heads} heads, expected 3")).into());
    }
    let center = read_head(&mut r)?;
    let size = read_head(&mut r)?;
    let angle = read_head(&mut r)?;
    if r.pos != bytes.len() {
        return Err(WeightsError::Shape(format!("{} trailing bytes", bytes.len() - r.pos)).into());
    }
    RoiPredictor::new(center, size, angle, angle_mode).map_err(|e| match e {
        Error::InvalidDataset(m) => WeightsError::Shape(m).into(),
        e => e,
    })
}

pub fn save_weights(p: &RoiPredictor, path: &Path) -> Result<()> {
    std::fs::write(path, encode(p)).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: &Path) -> Result<RoiPredictor> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::predictor::head_sizes;
    use rand::SeedableRng;

    fn random(mode: AngleMode) -> RoiPredictor {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        RoiPredictor::new(
            Mlp::glorot(&head_sizes(2), &mut rng).unwrap(),
            Mlp::glorot(&head_sizes(1), &mut rng).unwrap(),
            Mlp::glorot(&head_sizes(mode.outputs()), &mut rng).unwrap(),
            mode,
        )
        .unwrap()
    }

    #[test]
    fn roundtrip_is_byte_identical() {
        for mode in [AngleMode::SinCos, AngleMode::Scalar] {
            let p = random(mode);
            let bytes = encode(&p);
            let q = decode(&bytes).unwrap();
            assert_eq!(p, q);
            assert_eq!(encode(&q), bytes);
        }
    }

    #[test]
    fn file_size_matches_layout() {
        let bytes = encode(&random(AngleMode::SinCos));
        let header = 4 + 2 + 1 + 2 + FEATURE_SPEC.len() + 1;
        let heads = 3 * (1 + 4 * 4);
        assert_eq!(bytes.len(), header + heads + 8 * (332 + 321 + 332));
    }

    #[test]
    fn size_head_shape_is_reported() {
        let q = decode(&encode(&random(AngleMode::SinCos))).unwrap();
        assert_eq!(q.size_head.layer_sizes(), &[19, 10, 10, 1]);
        assert_eq!(q.size_head.param_count(), 321);
    }

    #[test]
    fn corrupted_header() {
        let mut bytes = encode(&random(AngleMode::SinCos));
        bytes[0] = b'X';
        assert!(matches!(
            decode(&bytes),
            Err(Error::Weights(WeightsError::Version(_)))
        ));

        let mut bytes = encode(&random(AngleMode::SinCos));
        bytes[4] = 9;
        assert!(matches!(
            decode(&bytes),
            Err(Error::Weights(WeightsError::Version(_)))
        ));

        assert!(matches!(
            decode(b"HR"),
            Err(Error::Weights(WeightsError::Version(_)))
        ));
    }

    #[test]
    fn truncated_and_trailing() {
        let bytes = encode(&random(AngleMode::SinCos));
        for cut in [7, 20, bytes.len() / 2, bytes.len() - 1] {
            assert!(
                matches!(
                    decode(&bytes[..cut]),
                    Err(Error::Weights(WeightsError::Truncated(_)))
                ),
                "cut at {cut}"
            );
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(
            decode(&extra),
            Err(Error::Weights(WeightsError::Shape(_)))
        ));
    }

    #[test]
    fn wrong_head_shape() {
        let p = random(AngleMode::SinCos);
        let mut bytes = encode(&p);
        // first center-head width lives right after the head-count byte
        let off = 4 + 2 + 1 + 2 + FEATURE_SPEC.len() + 1 + 1;
        bytes[off..off + 4].copy_from_slice(&18u32.to_le_bytes());
        assert!(decode(&bytes).is_err());
    }

    #[test]
    fn arbitrary_bytes_never_panic() {
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let good = encode(&random(AngleMode::SinCos));
        for _ in 0..500 {
            let mut b = good.clone();
            let i = rng.random_range(0..b.len().min(120));
            b[i] = rng.random();
            let _ = decode(&b);
        }
    }
}
