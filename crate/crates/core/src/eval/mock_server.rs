//! Stdio protocol server backed by [`MockBackend`], for wiring tests and
//! dry runs without a model. Image class comes from the parent directory
//! name, which matches both generated and imported layouts.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::backend::{EmbeddingBackend, ImageInput, MockBackend};
use super::protocol::{Request, RequestEnvelope, Response};

fn image_input(path: &str) -> ImageInput {
    let p = PathBuf::from(path);
    let class_hint = p
        .parent()
        .and_then(Path::file_name)
        .map(|n| n.to_string_lossy().into_owned());
    ImageInput {
        key: path.to_string(),
        path: p,
        class_hint,
    }
}

pub fn handle(backend: &mut MockBackend, line: &str) -> Response {
    let raw: Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(e) => return Response::error(Value::Null, format!("malformed request: {e}")),
    };
    let id = raw.get("id").cloned().unwrap_or(Value::Null);
    let envelope: RequestEnvelope = match serde_json::from_value(raw) {
        Ok(r) => r,
        Err(e) => return Response::error(id, format!("malformed request: {e}")),
    };
    match envelope.request {
        Request::Hello => Response::hello(id, backend.info()),
        Request::EmbedTexts { texts } => match backend.embed_texts(&texts) {
            Ok(v) => Response::vectors(id, v.into_iter().map(|v| v.into_values()).collect()),
            Err(e) => Response::error(id, e.to_string()),
        },
        Request::EmbedImages { paths } => {
            if let Some(missing) = paths.iter().find(|p| !Path::new(p).is_file()) {
                return Response::error(id, format!("image not found: {missing}"));
            }
            let inputs: Vec<ImageInput> = paths.iter().map(|p| image_input(p)).collect();
            match backend.embed_images(&inputs) {
                Ok(v) => Response::vectors(id, v.into_iter().map(|v| v.into_values()).collect()),
                Err(e) => Response::error(id, e.to_string()),
            }
        }
        Request::Adapt { path, prompts, config } => {
            if !Path::new(&path).is_file() {
                return Response::error(id, format!("image not found: {path}"));
            }
            match backend.adapt(&image_input(&path), &prompts, &config) {
                Ok(s) => Response::adapted(id, s.scores, s.predicted),
                Err(e) => Response::error(id, e.to_string()),
            }
        }
    }
}

/// Answers requests until end of input. Bad requests get error responses;
/// they never stop the loop.
pub fn serve<R: BufRead, W: Write>(backend: &mut MockBackend, input: R, mut output: W) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = handle(backend, &line);
        writeln!(output, "{}", serde_json::to_string(&response).expect("response serializes"))?;
        output.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::backend::MockMode;
    use serde_json::json;

    fn run(lines: &str) -> Vec<Value> {
        let mut b = MockBackend::new(MockMode::Oracle, vec!["dog".into(), "car".into()]);
        let mut out = Vec::new();
        serve(&mut b, lines.as_bytes(), &mut out).unwrap();
        String::from_utf8(out)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect()
    }

    #[test]
    fn survives_bad_requests() {
        let r = run("not json\n{\"id\": 4, \"op\": \"fly\"}\n{\"id\": 5, \"op\": \"hello\"}\n");
        assert_eq!(r.len(), 3);
        assert_eq!(r[0]["id"], Value::Null);
        assert_eq!(r[0]["ok"], json!(false));
        assert_eq!(r[1]["id"], json!(4));
        assert_eq!(r[1]["ok"], json!(false));
        assert_eq!(r[2]["embedding_dim"], json!(16));
    }

    #[test]
    fn missing_image_is_cited() {
        let r = run("{\"id\": 1, \"op\": \"embed_images\", \"paths\": [\"/no/such/dog/file.png\"]}\n");
        assert_eq!(r[0]["ok"], json!(false));
        assert!(r[0]["error"].as_str().unwrap().contains("/no/such/dog/file.png"));
    }

    #[test]
    fn text_vectors_are_unit() {
        let r = run("{\"id\": 2, \"op\": \"embed_texts\", \"texts\": [\"a photo of a dog\", \"a photo of a car\"]}\n");
        let vs = r[0]["vectors"].as_array().unwrap();
        assert_eq!(vs.len(), 2);
        for v in vs {
            let n: f64 = v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap().powi(2)).sum();
            assert!((n.sqrt() - 1.0).abs() < 1e-4);
        }
    }
}
