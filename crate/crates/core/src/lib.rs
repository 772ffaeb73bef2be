#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod focal;
pub mod geoflow;
pub mod harness;
pub mod numerics;
pub mod quasimode;
pub mod spectral;
pub mod surfaces;
pub mod transfer;

use sha2::{Digest, Sha256};

/// Decimal rendering with 12 significant digits used by every CSV writer.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

/// SHA-256 of the canonical JSON form of a value, hex encoded.
pub fn content_hash<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("serializable");
    hex::encode(Sha256::digest(&json))
}
