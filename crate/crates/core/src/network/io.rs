//! JSON-lines network files.
//!
//! The first line is a header object echoing the generation parameters; each
//! following line is one fracture record
//! `{id, cx, cy, cz, nx, ny, nz, radius, aperture}`. Floats are written in
//! shortest round-trip form, so read/write is bit-exact.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Fracture, FractureNetwork, GenerationParams, NetworkError};
use crate::geometry::{Aabb, Vec3};
use crate::scalar::Real;

pub const FORMAT_TAG: &str = "udfm-network";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct Header<T> {
    format: String,
    version: u32,
    seed: u64,
    n_fractures: usize,
    domain: Aabb<T>,
    params: GenerationParams<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct Record<T> {
    id: usize,
    cx: T,
    cy: T,
    cz: T,
    nx: T,
    ny: T,
    nz: T,
    radius: T,
    aperture: T,
}

impl<T: Real> From<&Fracture<T>> for Record<T> {
    fn from(f: &Fracture<T>) -> Self {
        Self {
            id: f.id,
            cx: f.center.x,
            cy: f.center.y,
            cz: f.center.z,
            nx: f.normal.x,
            ny: f.normal.y,
            nz: f.normal.z,
            radius: f.radius,
            aperture: f.aperture,
        }
    }
}

impl<T: Real> From<Record<T>> for Fracture<T> {
    fn from(r: Record<T>) -> Self {
        Fracture::new(
            r.id,
            Vec3::new(r.cx, r.cy, r.cz),
            Vec3::new(r.nx, r.ny, r.nz),
            r.radius,
            r.aperture,
        )
    }
}

pub fn write_network<T: Real, W: Write>(net: &FractureNetwork<T>, mut w: W) -> Result<(), NetworkError> {
    let header = Header {
        format: FORMAT_TAG.to_string(),
        version: FORMAT_VERSION,
        seed: net.params.seed,
        n_fractures: net.fractures.len(),
        domain: net.domain,
        params: net.params.clone(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for f in &net.fractures {
        serde_json::to_writer(&mut w, &Record::from(f))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_network<T: Real, R: BufRead>(r: R) -> Result<FractureNetwork<T>, NetworkError> {
    let mut lines = r.lines();
    let first = lines
        .next()
        .ok_or_else(|| NetworkError::Format("missing header line".into()))??;
    let header: Header<T> = serde_json::from_str(&first)?;
    if header.format != FORMAT_TAG || header.version != FORMAT_VERSION {
        return Err(NetworkError::Format(format!(
            "unsupported format {} v{}",
            header.format, header.version
        )));
    }
    let mut fractures = Vec::with_capacity(header.n_fractures);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record<T> = serde_json::from_str(&line)?;
        if rec.id != fractures.len() {
            return Err(NetworkError::Format(format!(
                "fracture ids must be contiguous: expected {}, found {}",
                fractures.len(),
                rec.id
            )));
        }
        fractures.push(rec.into());
    }
    if fractures.len() != header.n_fractures {
        return Err(NetworkError::Format(format!(
            "header announces {} fractures, file holds {}",
            header.n_fractures,
            fractures.len()
        )));
    }
    Ok(FractureNetwork {
        fractures,
        domain: header.domain,
        params: header.params,
    })
}

pub fn network_to_string<T: Real>(net: &FractureNetwork<T>) -> String {
    let mut buf = Vec::new();
    write_network(net, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("json is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::generate_network;
    use proptest::prelude::*;

    #[test]
    fn rejects_gapped_ids() {
        let mut p = GenerationParams::<f64>::desk_defaults();
        p.n_fractures = 3;
        let text = network_to_string(&generate_network(&p).unwrap());
        let broken: Vec<&str> = text.lines().enumerate().filter(|(i, _)| *i != 2).map(|(_, l)| l).collect();
        let err = read_network::<f64, _>(broken.join("\n").as_bytes()).unwrap_err();
        assert!(matches!(err, NetworkError::Format(_)));
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(seed in any::<u64>(), n in 0usize..20) {
            let mut p = GenerationParams::<f64>::desk_defaults();
            p.n_fractures = n;
            p.seed = seed;
            let net = generate_network(&p).unwrap();
            let text = network_to_string(&net);
            let back: FractureNetwork<f64> = read_network(text.as_bytes()).unwrap();
            for (a, b) in net.fractures.iter().zip(&back.fractures) {
                for (x, y) in [
                    (a.center.x, b.center.x), (a.center.y, b.center.y), (a.center.z, b.center.z),
                    (a.normal.x, b.normal.x), (a.normal.y, b.normal.y), (a.normal.z, b.normal.z),
                    (a.radius, b.radius), (a.aperture, b.aperture),
                ] {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
            }
            prop_assert_eq!(back, net);
        }
    }
}
