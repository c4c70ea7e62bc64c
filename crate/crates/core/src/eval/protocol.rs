//! Newline-delimited JSON protocol spoken with embedding backend processes.
//!
//! Every request is one line `{"id": <int>, "op": <op>, ...}` and every
//! response one line `{"id": <same>, "ok": true|false, ...}`:
//!
//! | op             | request fields                 | response fields                                             |
//! |----------------|--------------------------------|-------------------------------------------------------------|
//! | `hello`        |                                | `protocol_version`, `embedding_dim`, `model_id`, `capabilities` |
//! | `embed_texts`  | `texts: [str]`                 | `vectors: [[f32]]`                                          |
//! | `embed_images` | `paths: [str]`                 | `vectors: [[f32]]`                                          |
//! | `adapt`        | `path`, `prompts`, `config`    | `scores: [f64]`, `predicted: int`                           |
//!
//! Failures answer `{"id", "ok": false, "error": <message>}`; the id is
//! `null` when the request could not be parsed. Vectors are unit-norm.

use serde::{Deserialize, Serialize};

use crate::prompt::PROMPT_PREFIX;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Capabilities {
    pub text: bool,
    pub image: bool,
    pub adapt: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendInfo {
    pub protocol_version: u32,
    pub embedding_dim: usize,
    pub model_id: String,
    pub capabilities: Capabilities,
}

/// Test-time prompt adaptation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptConfig {
    /// The only prompt part that is tuned.
    pub tunable_prefix: String,
    /// Original image plus `n_views - 1` augmentations.
    pub n_views: usize,
    pub steps: usize,
    pub step_size: f64,
    /// Share of most confident views kept for the entropy objective.
    pub confidence_fraction: f64,
    pub seed: u64,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            tunable_prefix: PROMPT_PREFIX.to_string(),
            n_views: 64,
            steps: 1,
            step_size: 5e-3,
            confidence_fraction: 0.1,
            seed: 0,
        }
    }
}

/// One class prompt split into its tunable prefix and the frozen rest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptPrompt {
    pub text: String,
    pub prefix: String,
    pub class_name: String,
    pub domain_segment: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Request {
    Hello,
    EmbedTexts {
        texts: Vec<String>,
    },
    EmbedImages {
        paths: Vec<String>,
    },
    Adapt {
        path: String,
        prompts: Vec<AdaptPrompt>,
        config: AdaptConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestEnvelope {
    pub id: u64,
    #[serde(flatten)]
    pub request: Request,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Response {
    pub id: serde_json::Value,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capabilities: Option<Capabilities>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<f32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<usize>,
}

impl Response {
    pub fn error(id: serde_json::Value, message: impl Into<String>) -> Self {
        Self {
            id,
            ok: false,
            error: Some(message.into()),
            ..Self::default()
        }
    }

    pub fn hello(id: serde_json::Value, info: &BackendInfo) -> Self {
        Self {
            id,
            ok: true,
            protocol_version: Some(info.protocol_version),
            embedding_dim: Some(info.embedding_dim),
            model_id: Some(info.model_id.clone()),
            capabilities: Some(info.capabilities),
            ..Self::default()
        }
    }

    pub fn vectors(id: serde_json::Value, vectors: Vec<Vec<f32>>) -> Self {
        Self {
            id,
            ok: true,
            vectors: Some(vectors),
            ..Self::default()
        }
    }

    pub fn adapted(id: serde_json::Value, scores: Vec<f64>, predicted: usize) -> Self {
        Self {
            id,
            ok: true,
            scores: Some(scores),
            predicted: Some(predicted),
            ..Self::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn request_wire_format() {
        let r = RequestEnvelope {
            id: 7,
            request: Request::EmbedTexts {
                texts: vec!["a photo of a dog".into()],
            },
        };
        assert_eq!(
            serde_json::to_value(&r).unwrap(),
            json!({"id": 7, "op": "embed_texts", "texts": ["a photo of a dog"]})
        );
        let hello: RequestEnvelope = serde_json::from_str(r#"{"id":1,"op":"hello"}"#).unwrap();
        assert_eq!(hello.request, Request::Hello);
    }

    #[test]
    fn response_wire_format() {
        let info = BackendInfo {
            protocol_version: PROTOCOL_VERSION,
            embedding_dim: 4,
            model_id: "m".into(),
            capabilities: Capabilities {
                text: true,
                image: true,
                adapt: false,
            },
        };
        assert_eq!(
            serde_json::to_value(Response::hello(json!(0), &info)).unwrap(),
            json!({"id": 0, "ok": true, "protocol_version": 1, "embedding_dim": 4, "model_id": "m",
                   "capabilities": {"text": true, "image": true, "adapt": false}})
        );
        assert_eq!(
            serde_json::to_value(Response::error(serde_json::Value::Null, "bad")).unwrap(),
            json!({"id": null, "ok": false, "error": "bad"})
        );
    }

    #[test]
    fn adapt_defaults() {
        let c: AdaptConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c.tunable_prefix, "a photo of a");
        assert_eq!(c.n_views, 64);
        assert_eq!(c.steps, 1);
        assert_eq!(c.confidence_fraction, 0.1);
    }
}
