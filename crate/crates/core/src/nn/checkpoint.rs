//! Binary parameter snapshots.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic        8 bytes  b"GANLABNN"
//! version      u32      1
//! step         u64
//! layer_count  u32
//! per layer    u32 in_dim, u32 out_dim, u8 activation (0 relu, 1 tanh, 2 sigmoid, 3 identity)
//! param_count  u64
//! params       param_count × f64, flattening order of `Model::params`
//! ```

use super::{Activation, Layer, Model, Network};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"GANLABNN";
const VERSION: u32 = 1;

/// Flattened parameters at a training step.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSnapshot {
    pub step: u64,
    pub params: Vec<f64>,
}

impl ParamSnapshot {
    pub fn of(model: &dyn Model, step: u64) -> Self {
        ParamSnapshot {
            step,
            params: model.params(),
        }
    }
}

pub fn encode(net: &Network, step: u64) -> Vec<u8> {
    let params = net.params();
    let mut out = Vec::with_capacity(32 + 9 * net.layers().len() + 8 * params.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&step.to_le_bytes());
    out.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
    for l in net.layers() {
        out.extend_from_slice(&(l.in_dim() as u32).to_le_bytes());
        out.extend_from_slice(&(l.out_dim() as u32).to_le_bytes());
        out.push(l.activation().code());
    }
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::invalid("checkpoint", "truncated"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Rebuilds a network and its step from [`encode`] output.
pub fn decode(bytes: &[u8]) -> Result<(Network, u64)> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::invalid("checkpoint", "bad magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::invalid("checkpoint", format!("unsupported version {version}")));
    }
    let step = r.u64()?;
    let n_layers = r.u32()? as usize;
    let mut shapes = Vec::with_capacity(n_layers.min(1024));
    for _ in 0..n_layers {
        let i = r.u32()? as usize;
        let o = r.u32()? as usize;
        let act = Activation::from_code(r.u8()?).ok_or_else(|| Error::invalid("checkpoint", "unknown activation"))?;
        shapes.push((i, o, act));
    }
    let count = r.u64()? as usize;
    let expected: usize = shapes.iter().map(|(i, o, _)| i * o + o).sum();
    if count != expected {
        return Err(Error::LengthMismatch(count, expected));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for (i, o, act) in shapes {
        let weights = (0..i * o).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let bias = (0..o).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        layers.push(Layer::new(i, o, weights, bias, act)?);
    }
    if r.pos != bytes.len() {
        return Err(Error::invalid("checkpoint", "trailing bytes"));
    }
    Ok((Network::from_layers(layers)?, step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn round_trip() {
        let mut rng = Stream::new(1, 1);
        let net = Network::mlp(&[2, 5, 3, 1], Activation::Relu, Activation::Sigmoid, &mut rng).unwrap();
        let bytes = encode(&net, 1234);
        let (back, step) = decode(&bytes).unwrap();
        assert_eq!(step, 1234);
        assert_eq!(back.params(), net.params());
        assert_eq!(back.dims(), net.dims());
        assert_eq!(back.layers()[2].activation(), Activation::Sigmoid);
    }

    #[test]
    fn header_layout() {
        let layer = Layer::new(1, 1, vec![0.5], vec![-2.0], Activation::Tanh).unwrap();
        let net = Network::from_layers(vec![layer]).unwrap();
        let bytes = encode(&net, 7);
        assert_eq!(&bytes[..8], b"GANLABNN");
        assert_eq!(bytes.len(), 8 + 4 + 8 + 4 + 9 + 8 + 16);
        assert_eq!(&bytes[bytes.len() - 8..], &(-2.0f64).to_le_bytes());
    }

    #[test]
    fn rejects_corruption() {
        let mut rng = Stream::new(2, 1);
        let net = Network::mlp(&[2, 2, 1], Activation::Relu, Activation::Identity, &mut rng).unwrap();
        let bytes = encode(&net, 0);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(decode(&extra).is_err());
    }
}
