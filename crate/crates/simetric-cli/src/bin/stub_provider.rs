//! Deterministic toy provider for exercising the remote-provider protocol
//! in tests: line-delimited JSON on stdin/stdout, one response per request.
//! Any request whose text contains TRIGGER_FAULT gets an error response.

use std::io::{self, BufRead, Write};

use simetric::providers::{RemoteRequest, RemoteResponse};

const EMBED_DIM: usize = 16;
const FAULT_MARKER: &str = "TRIGGER_FAULT";

fn hash64(bytes: &[u8], salt: u64) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325 ^ salt;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn unit(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn embed(text: &str) -> Vec<f64> {
    (0..EMBED_DIM)
        .map(|i| unit(hash64(text.as_bytes(), i as u64)) * 2.0 - 1.0)
        .collect()
}

fn perplexity(text: &str) -> f64 {
    1.5 + unit(hash64(text.as_bytes(), 101)) * 30.0
}

fn readability(text: &str) -> f64 {
    let words = text.split_whitespace().count().max(1) as f64;
    let chars = text.chars().filter(|c| !c.is_whitespace()).count() as f64;
    4.0 - chars / words
}

fn similarity(candidate: &str, reference: &str) -> [f64; 3] {
    let cand: Vec<String> = candidate.split_whitespace().map(str::to_lowercase).collect();
    let refs: Vec<String> = reference.split_whitespace().map(str::to_lowercase).collect();
    if cand.is_empty() || refs.is_empty() {
        return [0.0, 0.0, 0.0];
    }
    let hits_p = cand.iter().filter(|t| refs.contains(t)).count() as f64;
    let hits_r = refs.iter().filter(|t| cand.contains(t)).count() as f64;
    let p = hits_p / cand.len() as f64;
    let r = hits_r / refs.len() as f64;
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    [p, r, f1]
}

fn simplify(source: &str, seed: u64) -> String {
    let keep_len = 8 + (seed % 3) as usize;
    let words: Vec<&str> = source
        .split_whitespace()
        .filter(|w| w.len() <= keep_len)
        .collect();
    if words.is_empty() {
        source.split_whitespace().next().unwrap_or("text").to_string()
    } else {
        words.join(" ")
    }
}

fn respond(request: &RemoteRequest) -> RemoteResponse {
    let faulted = request.text.contains(FAULT_MARKER)
        || request
            .text2
            .as_deref()
            .is_some_and(|t| t.contains(FAULT_MARKER));
    if faulted {
        return RemoteResponse {
            error: Some("synthetic fault requested by input".to_string()),
            ..Default::default()
        };
    }
    match request.op.as_str() {
        "embed" => RemoteResponse {
            values: Some(embed(&request.text)),
            ..Default::default()
        },
        "perplexity" => RemoteResponse {
            values: Some(vec![perplexity(&request.text)]),
            ..Default::default()
        },
        "readability" => RemoteResponse {
            values: Some(vec![readability(&request.text)]),
            ..Default::default()
        },
        "similarity" => match &request.text2 {
            Some(reference) => RemoteResponse {
                values: Some(similarity(&request.text, reference).to_vec()),
                ..Default::default()
            },
            None => RemoteResponse {
                error: Some("similarity needs text2".to_string()),
                ..Default::default()
            },
        },
        "simplify" => RemoteResponse {
            text: Some(simplify(&request.text, request.seed.unwrap_or(0))),
            ..Default::default()
        },
        other => RemoteResponse {
            error: Some(format!("unknown op {other:?}")),
            ..Default::default()
        },
    }
}

fn main() -> io::Result<()> {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<RemoteRequest>(&line) {
            Ok(request) => respond(&request),
            Err(e) => RemoteResponse {
                error: Some(format!("bad request: {e}")),
                ..Default::default()
            },
        };
        serde_json::to_writer(&mut out, &response)?;
        out.write_all(b"\n")?;
        out.flush()?;
    }
    Ok(())
}
