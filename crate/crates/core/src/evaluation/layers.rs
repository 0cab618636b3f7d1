//! Comparing images by their layer digests, read from build manifests.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub digest_equal: bool,
    pub matching_layer_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("manifest lists no layers")]
pub struct EmptyManifest;

/// Share of the original image's layer digests also present in the generated image.
pub fn layer_match(
    original: &[String],
    generated: &[String],
    original_digest: &str,
    generated_digest: &str,
) -> Result<LayerReport, EmptyManifest> {
    if original.is_empty() {
        return Err(EmptyManifest);
    }
    let digest_equal = original_digest == generated_digest;
    let ours: BTreeSet<&str> = original.iter().map(String::as_str).collect();
    let theirs: BTreeSet<&str> = generated.iter().map(String::as_str).collect();
    let ratio = if digest_equal {
        1.0
    } else {
        ours.intersection(&theirs).count() as f64 / ours.len() as f64
    };
    Ok(LayerReport {
        digest_equal,
        matching_layer_ratio: ratio,
    })
}

/// OCI ChainID of an ordered layer list.
pub fn chain_id(layers: &[String]) -> Option<String> {
    let mut iter = layers.iter();
    let mut chain = iter.next()?.clone();
    for layer in iter {
        let hash = Sha256::digest(format!("{chain} {layer}").as_bytes());
        chain = format!("sha256:{}", hex(&hash));
    }
    Some(chain)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerManifest {
    pub digest: String,
    pub layers: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ManifestInput {
    Layers(Vec<String>),
    Full { digest: String, layers: Vec<String> },
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Empty(#[from] EmptyManifest),
}

/// Accepts a bare list of layer digests (image digest taken as the ChainID)
/// or an object with `digest` and `layers`.
pub fn parse_manifest(text: &str) -> Result<LayerManifest, ManifestError> {
    match serde_json::from_str(text)? {
        ManifestInput::Layers(layers) => {
            let digest = chain_id(&layers).ok_or(EmptyManifest)?;
            Ok(LayerManifest { digest, layers })
        }
        ManifestInput::Full { digest, layers } => Ok(LayerManifest { digest, layers }),
    }
}

pub fn compare_manifests(
    original: &LayerManifest,
    generated: &LayerManifest,
) -> Result<LayerReport, EmptyManifest> {
    layer_match(
        &original.layers,
        &generated.layers,
        &original.digest,
        &generated.digest,
    )
}
