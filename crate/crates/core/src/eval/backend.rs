//! Embedding backends: the deterministic in-process mock and the
//! subprocess client for the stdio protocol.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::embedding::{classify, EmbeddingVector, Scores};
use super::protocol::{
    AdaptConfig, AdaptPrompt, BackendInfo, Capabilities, Request, RequestEnvelope, Response, PROTOCOL_VERSION,
};
use crate::prompt::PROMPT_PREFIX;

/// Tolerance on the norm of vectors a backend returns.
pub const BACKEND_NORM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("cannot start backend `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("backend i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("backend closed the connection")]
    Closed,
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("backend error: {0}")]
    Remote(String),
    #[error("backend does not support `{0}`")]
    Unsupported(&'static str),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("unknown backend `{0}` (expected mock:oracle, mock:constant, mock:noise or stdio:<command>)")]
    UnknownSpec(String),
}

/// An image to embed. `class_hint` is the manifest label, which only the
/// in-process oracle mock looks at.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageInput {
    pub path: PathBuf,
    pub key: String,
    pub class_hint: Option<String>,
}

pub trait EmbeddingBackend {
    fn info(&self) -> &BackendInfo;
    fn embed_texts(&mut self, texts: &[String]) -> Result<Vec<EmbeddingVector>, BackendError>;
    fn embed_images(&mut self, images: &[ImageInput]) -> Result<Vec<EmbeddingVector>, BackendError>;
    fn adapt(
        &mut self,
        _image: &ImageInput,
        _prompts: &[AdaptPrompt],
        _config: &AdaptConfig,
    ) -> Result<Scores, BackendError> {
        Err(BackendError::Unsupported("adapt"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockMode {
    /// Class `c` prompts and class `c` images share one vector.
    Oracle,
    /// The same vector for everything.
    Constant,
    /// Seeded pseudo-random vectors per text and per image.
    Noise,
}

impl std::str::FromStr for MockMode {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oracle" => Ok(Self::Oracle),
            "constant" => Ok(Self::Constant),
            "noise" => Ok(Self::Noise),
            _ => Err(BackendError::UnknownSpec(format!("mock:{s}"))),
        }
    }
}

impl MockMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MockMode::Oracle => "oracle",
            MockMode::Constant => "constant",
            MockMode::Noise => "noise",
        }
    }
}

pub const MOCK_MIN_DIM: usize = 16;

/// Deterministic backend for tests and dry runs.
///
/// With a class list, oracle vectors are the standard basis `e_i` for class
/// `i`; other class tokens get a hashed unit vector.
#[derive(Debug, Clone)]
pub struct MockBackend {
    mode: MockMode,
    classes: Vec<String>,
    info: BackendInfo,
}

impl MockBackend {
    pub fn new(mode: MockMode, classes: Vec<String>) -> Self {
        let info = BackendInfo {
            protocol_version: PROTOCOL_VERSION,
            embedding_dim: classes.len().max(MOCK_MIN_DIM),
            model_id: format!("mock-{}", mode.as_str()),
            capabilities: Capabilities {
                text: true,
                image: true,
                adapt: true,
            },
        };
        Self { mode, classes, info }
    }

    pub fn mode(&self) -> MockMode {
        self.mode
    }

    fn hashed(&self, tag: &str, token: &str) -> EmbeddingVector {
        let digest = Sha256::digest(format!("{tag}\u{0}{token}"));
        let mut rng = ChaCha8Rng::seed_from_u64(u64::from_le_bytes(digest[..8].try_into().expect("8 bytes")));
        loop {
            let v: Vec<f32> = (0..self.info.embedding_dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
            if let Ok(v) = EmbeddingVector::normalized(v) {
                return v;
            }
        }
    }

    fn class_vector(&self, token: &str) -> EmbeddingVector {
        match self.classes.iter().position(|c| c == token) {
            Some(i) => EmbeddingVector::basis(self.info.embedding_dim, i),
            None => self.hashed("class", token),
        }
    }

    /// Class token of a composed prompt: the longest known class right after
    /// the prefix, or without a class list the text up to the first slot.
    pub fn class_of_prompt<'t>(&self, text: &'t str) -> &'t str {
        let rest = text
            .strip_prefix(PROMPT_PREFIX)
            .map(|r| r.trim_start())
            .unwrap_or(text);
        let mut best: Option<&str> = None;
        for c in &self.classes {
            if let Some(tail) = rest.strip_prefix(c.as_str()) {
                let boundary = tail.is_empty() || tail.starts_with([' ', ',', '.']);
                if boundary && best.is_none_or(|b| c.len() > b.len()) {
                    best = Some(&rest[..c.len()]);
                }
            }
        }
        if let Some(b) = best {
            return b;
        }
        let mut end = rest.find([',', '.']).unwrap_or(rest.len());
        for connective in [" in ", " from ", " with "] {
            if let Some(i) = rest.find(connective) {
                end = end.min(i);
            }
        }
        rest[..end].trim()
    }

    pub fn text_vector(&self, text: &str) -> EmbeddingVector {
        match self.mode {
            MockMode::Oracle => self.class_vector(self.class_of_prompt(text)),
            MockMode::Constant => EmbeddingVector::basis(self.info.embedding_dim, 0),
            MockMode::Noise => self.hashed("text", text),
        }
    }

    pub fn image_vector(&self, image: &ImageInput) -> EmbeddingVector {
        match (self.mode, &image.class_hint) {
            (MockMode::Oracle, Some(class)) => self.class_vector(class),
            (MockMode::Constant, _) => EmbeddingVector::basis(self.info.embedding_dim, 0),
            _ => self.hashed("image", &image.key),
        }
    }
}

impl EmbeddingBackend for MockBackend {
    fn info(&self) -> &BackendInfo {
        &self.info
    }

    fn embed_texts(&mut self, texts: &[String]) -> Result<Vec<EmbeddingVector>, BackendError> {
        Ok(texts.iter().map(|t| self.text_vector(t)).collect())
    }

    fn embed_images(&mut self, images: &[ImageInput]) -> Result<Vec<EmbeddingVector>, BackendError> {
        Ok(images.iter().map(|i| self.image_vector(i)).collect())
    }

    /// Prompt vectors here do not depend on the prefix, so adaptation is
    /// the identity and the result equals tuning-free classification.
    fn adapt(
        &mut self,
        image: &ImageInput,
        prompts: &[AdaptPrompt],
        config: &AdaptConfig,
    ) -> Result<Scores, BackendError> {
        check_adapt_request(prompts, config)?;
        let texts: Vec<EmbeddingVector> = prompts.iter().map(|p| self.text_vector(&p.text)).collect();
        classify(&self.image_vector(image), &texts).map_err(|e| BackendError::InvalidRequest(e.to_string()))
    }
}

pub fn check_adapt_request(prompts: &[AdaptPrompt], config: &AdaptConfig) -> Result<(), BackendError> {
    if config.n_views < 2 {
        return Err(BackendError::InvalidRequest(format!("n_views must be ≥2, got {}", config.n_views)));
    }
    for p in prompts {
        if !p.text.starts_with(&config.tunable_prefix) || p.prefix != config.tunable_prefix {
            return Err(BackendError::InvalidRequest(format!(
                "prompt `{}` lacks the tunable prefix `{}`",
                p.text, config.tunable_prefix
            )));
        }
    }
    Ok(())
}

/// Client for a backend process speaking the stdio protocol.
pub struct StdioBackend {
    command: String,
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    next_id: u64,
    info: BackendInfo,
}

impl StdioBackend {
    /// Runs `command` through `sh -c` and performs the handshake.
    pub fn spawn(command: &str) -> Result<Self, BackendError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| BackendError::Spawn {
                command: command.to_string(),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut backend = Self {
            command: command.to_string(),
            child,
            stdin: Some(stdin),
            stdout,
            next_id: 0,
            info: BackendInfo {
                protocol_version: 0,
                embedding_dim: 0,
                model_id: String::new(),
                capabilities: Capabilities::default(),
            },
        };
        let hello = backend.call(Request::Hello)?;
        let (Some(version), Some(dim), Some(model_id), Some(capabilities)) =
            (hello.protocol_version, hello.embedding_dim, hello.model_id, hello.capabilities)
        else {
            return Err(BackendError::Protocol("incomplete hello response".into()));
        };
        if version != PROTOCOL_VERSION {
            return Err(BackendError::Protocol(format!(
                "backend speaks protocol {version}, expected {PROTOCOL_VERSION}"
            )));
        }
        if dim == 0 {
            return Err(BackendError::Protocol("embedding_dim must be > 0".into()));
        }
        backend.info = BackendInfo {
            protocol_version: version,
            embedding_dim: dim,
            model_id,
            capabilities,
        };
        log::info!("backend `{}` ready: {} (dim {})", backend.command, backend.info.model_id, dim);
        Ok(backend)
    }

    pub fn call(&mut self, request: Request) -> Result<Response, BackendError> {
        let id = self.next_id;
        self.next_id += 1;
        let line = serde_json::to_string(&RequestEnvelope { id, request }).expect("request serializes");
        let stdin = self.stdin.as_mut().ok_or(BackendError::Closed)?;
        writeln!(stdin, "{line}")?;
        stdin.flush()?;
        let mut reply = String::new();
        if self.stdout.read_line(&mut reply)? == 0 {
            return Err(BackendError::Closed);
        }
        let response: Response = serde_json::from_str(reply.trim_end())
            .map_err(|e| BackendError::Protocol(format!("unparsable response: {e}")))?;
        if response.id != id {
            return Err(BackendError::Protocol(format!(
                "response id {} does not match request id {id}",
                response.id
            )));
        }
        if !response.ok {
            return Err(BackendError::Remote(response.error.unwrap_or_else(|| "unspecified".into())));
        }
        Ok(response)
    }

    fn vectors(&self, response: Response, expected: usize) -> Result<Vec<EmbeddingVector>, BackendError> {
        let vectors = response
            .vectors
            .ok_or_else(|| BackendError::Protocol("response has no vectors".into()))?;
        if vectors.len() != expected {
            return Err(BackendError::Protocol(format!(
                "expected {expected} vectors, got {}",
                vectors.len()
            )));
        }
        vectors
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let v = EmbeddingVector::new(v);
                if v.dim() != self.info.embedding_dim {
                    return Err(BackendError::Protocol(format!(
                        "vector {i} has dimension {}, handshake declared {}",
                        v.dim(),
                        self.info.embedding_dim
                    )));
                }
                if !v.is_unit(BACKEND_NORM_TOLERANCE) {
                    return Err(BackendError::Protocol(format!("vector {i} is not unit-norm ({})", v.norm())));
                }
                Ok(v)
            })
            .collect()
    }
}

impl EmbeddingBackend for StdioBackend {
    fn info(&self) -> &BackendInfo {
        &self.info
    }

    fn embed_texts(&mut self, texts: &[String]) -> Result<Vec<EmbeddingVector>, BackendError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let r = self.call(Request::EmbedTexts { texts: texts.to_vec() })?;
        self.vectors(r, texts.len())
    }

    fn embed_images(&mut self, images: &[ImageInput]) -> Result<Vec<EmbeddingVector>, BackendError> {
        if images.is_empty() {
            return Ok(Vec::new());
        }
        let paths = images.iter().map(|i| i.path.to_string_lossy().into_owned()).collect();
        let r = self.call(Request::EmbedImages { paths })?;
        self.vectors(r, images.len())
    }

    fn adapt(
        &mut self,
        image: &ImageInput,
        prompts: &[AdaptPrompt],
        config: &AdaptConfig,
    ) -> Result<Scores, BackendError> {
        if !self.info.capabilities.adapt {
            return Err(BackendError::Unsupported("adapt"));
        }
        let r = self.call(Request::Adapt {
            path: image.path.to_string_lossy().into_owned(),
            prompts: prompts.to_vec(),
            config: config.clone(),
        })?;
        let (Some(scores), Some(predicted)) = (r.scores, r.predicted) else {
            return Err(BackendError::Protocol("adapt response needs scores and predicted".into()));
        };
        if scores.len() != prompts.len() || predicted >= scores.len() {
            return Err(BackendError::Protocol("adapt response does not match the prompt count".into()));
        }
        Ok(Scores { scores, predicted })
    }
}

impl Drop for StdioBackend {
    fn drop(&mut self) {
        // closing stdin asks the server to exit
        drop(self.stdin.take());
        let deadline = Instant::now() + Duration::from_secs(2);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            std::thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// `mock:<mode>` or `stdio:<command>`; plain `mock` means `mock:oracle`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    Mock(MockMode),
    Stdio(String),
}

impl std::str::FromStr for BackendSpec {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "mock" {
            return Ok(Self::Mock(MockMode::Oracle));
        }
        if let Some(mode) = s.strip_prefix("mock:") {
            return mode.parse().map(Self::Mock);
        }
        match s.strip_prefix("stdio:") {
            Some(cmd) if !cmd.trim().is_empty() => Ok(Self::Stdio(cmd.to_string())),
            _ => Err(BackendError::UnknownSpec(s.to_string())),
        }
    }
}

impl BackendSpec {
    pub fn connect(&self, classes: &[String]) -> Result<Box<dyn EmbeddingBackend>, BackendError> {
        Ok(match self {
            BackendSpec::Mock(mode) => Box::new(MockBackend::new(*mode, classes.to_vec())),
            BackendSpec::Stdio(cmd) => Box::new(StdioBackend::spawn(cmd)?),
        })
    }

    pub fn id(&self) -> String {
        match self {
            BackendSpec::Mock(m) => format!("mock:{}", m.as_str()),
            BackendSpec::Stdio(cmd) => format!("stdio:{cmd}"),
        }
    }
}
