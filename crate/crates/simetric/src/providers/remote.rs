//! Remote provider speaking line-delimited JSON over a subprocess pipe
//! (or any byte transport). One provider process can serve every slot.
//!
//! Request line:  {"op": "...", "text": "...", "text2"?: "...",
//!                 "seed"?: n, "version": "..."}
//! Response line: {"values": [..]} or {"text": "..."} or {"error": "..."}
//!
//! ops: embed | perplexity | readability | similarity | simplify.
//! similarity responses carry values = [precision, recall, f1].

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{
    EmbeddingProvider, PerplexityProvider, ReadabilityProvider, Similarity, SimilarityProvider,
    SimplifierProvider,
};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
pub struct RemoteRequest {
    pub op: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct RemoteResponse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One request line out, one response line back.
pub trait RemoteTransport: Send {
    fn roundtrip(&mut self, request_line: &str) -> std::io::Result<String>;
}

struct ChildTransport {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl RemoteTransport for ChildTransport {
    fn roundtrip(&mut self, request_line: &str) -> std::io::Result<String> {
        self.stdin.write_all(request_line.as_bytes())?;
        self.stdin.write_all(b"\n")?;
        self.stdin.flush()?;
        let mut line = String::new();
        let n = self.stdout.read_line(&mut line)?;
        if n == 0 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                "provider process closed its output",
            ));
        }
        Ok(line)
    }
}

impl Drop for ChildTransport {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub struct RemoteProvider {
    id: String,
    version: String,
    dim: usize,
    transport: Mutex<Box<dyn RemoteTransport>>,
}

impl RemoteProvider {
    /// Spawn `command` and talk to it over stdin/stdout.
    pub fn spawn(command: &[String], version: &str, dim: usize) -> Result<Self> {
        if command.is_empty() {
            return Err(Error::Config("remote provider command is empty".into()));
        }
        let mut child = Command::new(&command[0])
            .args(&command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::ProviderTransport(format!("spawn {}: {e}", command[0])))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self::from_transport(
            Box::new(ChildTransport {
                child,
                stdin,
                stdout,
            }),
            &command.join(" "),
            version,
            dim,
        ))
    }

    pub fn from_transport(
        transport: Box<dyn RemoteTransport>,
        id: &str,
        version: &str,
        dim: usize,
    ) -> Self {
        RemoteProvider {
            id: id.to_string(),
            version: version.to_string(),
            dim,
            transport: Mutex::new(transport),
        }
    }

    fn call(&self, op: &str, text: &str, text2: Option<&str>, seed: Option<u64>) -> Result<RemoteResponse> {
        let request = RemoteRequest {
            op: op.to_string(),
            text: text.to_string(),
            text2: text2.map(str::to_string),
            seed,
            version: self.version.clone(),
        };
        let line = serde_json::to_string(&request)
            .map_err(|e| Error::ProviderTransport(format!("{}: encode: {e}", self.id)))?;
        let response_line = self
            .transport
            .lock()
            .unwrap()
            .roundtrip(&line)
            .map_err(|e| Error::ProviderTransport(format!("{}: {e}", self.id)))?;
        let response: RemoteResponse = serde_json::from_str(response_line.trim())
            .map_err(|e| Error::ProviderTransport(format!("{}: decode: {e}", self.id)))?;
        if let Some(message) = response.error {
            return Err(Error::ProviderFault(format!("{}: {message}", self.id)));
        }
        Ok(response)
    }

    fn scalar(&self, op: &str, text: &str) -> Result<f64> {
        let response = self.call(op, text, None, None)?;
        match response.values.as_deref() {
            Some([v]) if v.is_finite() => Ok(*v),
            _ => Err(Error::ProviderFault(format!(
                "{}: {op} expected one finite value",
                self.id
            ))),
        }
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn id(&self) -> &str {
        &self.id
    }
    fn version(&self) -> &str {
        &self.version
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let response = self.call("embed", text, None, None)?;
        let values = response.values.ok_or_else(|| {
            Error::ProviderFault(format!("{}: embed returned no values", self.id))
        })?;
        if values.len() != self.dim {
            return Err(Error::ProviderFault(format!(
                "{}: embed returned {} values, expected {}",
                self.id,
                values.len(),
                self.dim
            )));
        }
        Ok(values)
    }
}

impl PerplexityProvider for RemoteProvider {
    fn id(&self) -> &str {
        &self.id
    }
    fn version(&self) -> &str {
        &self.version
    }
    fn perplexity(&self, text: &str) -> Result<f64> {
        if text.is_empty() {
            return Err(Error::EmptyText);
        }
        self.scalar("perplexity", text)
    }
}

impl ReadabilityProvider for RemoteProvider {
    fn id(&self) -> &str {
        &self.id
    }
    fn version(&self) -> &str {
        &self.version
    }
    fn readability(&self, text: &str) -> Result<f64> {
        self.scalar("readability", text)
    }
}

impl SimilarityProvider for RemoteProvider {
    fn id(&self) -> &str {
        &self.id
    }
    fn version(&self) -> &str {
        &self.version
    }
    fn similarity(&self, candidate: &str, reference: &str) -> Result<Similarity> {
        let response = self.call("similarity", candidate, Some(reference), None)?;
        match response.values.as_deref() {
            Some([p, r, f1]) => Ok(Similarity {
                precision: *p,
                recall: *r,
                f1: *f1,
            }),
            _ => Err(Error::ProviderFault(format!(
                "{}: similarity expected [precision, recall, f1]",
                self.id
            ))),
        }
    }
}

impl SimplifierProvider for RemoteProvider {
    fn id(&self) -> &str {
        &self.id
    }
    fn version(&self) -> &str {
        &self.version
    }
    fn simplify(&self, source: &str, seed: u64) -> Result<String> {
        let response = self.call("simplify", source, None, Some(seed))?;
        response
            .text
            .ok_or_else(|| Error::ProviderFault(format!("{}: simplify returned no text", self.id)))
    }
}
