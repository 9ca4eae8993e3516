//! Server side of the scorer protocol, used by the bundled `echo-scorer`
//! stub and by `supportive serve-scorer`.

use std::io::{BufRead, Write};
use std::time::Duration;

use serde_json::{json, Value};

use super::external::PROTOCOL_VERSION;
use crate::corpus::clean;
use crate::linear::TextClassifier;

pub enum StubScore {
    Constant(f64),
    Model(Box<TextClassifier>),
}

impl StubScore {
    fn score(&self, text: &str) -> f64 {
        match self {
            StubScore::Constant(p) => *p,
            StubScore::Model(m) => m.predict_proba(&clean(text)),
        }
    }
}

/// Deliberate misbehaviour for exercising the client.
#[derive(Debug, Clone, Default)]
pub struct Faults {
    /// Buffer this many responses and emit them in reverse.
    pub reverse_window: usize,
    /// Exit without answering once this many requests have been read.
    pub exit_after: Option<usize>,
    /// Stop answering (but stay alive) after this many requests.
    pub stall_after: Option<usize>,
    /// Announce a different protocol version.
    pub protocol: Option<u64>,
    /// Echo a wrong id.
    pub mangle_ids: bool,
}

pub struct StubServer {
    pub name: String,
    pub score: StubScore,
    pub faults: Faults,
}

impl StubServer {
    pub fn new(name: impl Into<String>, score: StubScore) -> Self {
        Self {
            name: name.into(),
            score,
            faults: Faults::default(),
        }
    }

    /// Runs until `input` reaches end of file.
    pub fn serve(&self, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
        let mut pending: Vec<String> = Vec::new();
        let mut requests = 0usize;
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let reply = match serde_json::from_str::<Value>(&line) {
                Ok(v) if v.get("op").and_then(Value::as_str) == Some("hello") => {
                    let version = self.faults.protocol.unwrap_or(PROTOCOL_VERSION);
                    writeln!(
                        output,
                        "{}",
                        json!({"protocol": version, "name": self.name})
                    )?;
                    output.flush()?;
                    continue;
                }
                Ok(v) => match (
                    v.get("id").and_then(Value::as_str),
                    v.get("text").and_then(Value::as_str),
                ) {
                    (Some(id), Some(text)) => {
                        requests += 1;
                        if self.faults.exit_after.is_some_and(|k| requests > k) {
                            return Ok(());
                        }
                        if self.faults.stall_after.is_some_and(|k| requests > k) {
                            loop {
                                std::thread::sleep(Duration::from_secs(3600));
                            }
                        }
                        let id = if self.faults.mangle_ids {
                            format!("{id}-x")
                        } else {
                            id.to_string()
                        };
                        json!({"id": id, "p": self.score.score(text)})
                    }
                    _ => json!({"error": "request needs string `id` and `text`", "line": n + 1}),
                },
                Err(e) => json!({"error": e.to_string(), "line": n + 1}),
            };
            pending.push(reply.to_string());
            if pending.len() >= self.faults.reverse_window.max(1) {
                for r in pending.drain(..).rev() {
                    writeln!(output, "{r}")?;
                }
                output.flush()?;
            }
        }
        for r in pending.drain(..).rev() {
            writeln!(output, "{r}")?;
        }
        output.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(server: &StubServer, input: &str) -> Vec<Value> {
        let mut out = Vec::new();
        server.serve(input.as_bytes(), &mut out).unwrap();
        String::from_utf8(out)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect()
    }

    #[test]
    fn handshake_then_scores() {
        let s = StubServer::new("hope", StubScore::Constant(0.25));
        let out = run(&s, "{\"op\":\"hello\"}\n{\"id\":\"1\",\"text\":\"x\"}\n");
        assert_eq!(out[0], json!({"protocol": 1, "name": "hope"}));
        assert_eq!(out[1], json!({"id": "1", "p": 0.25}));
    }

    #[test]
    fn malformed_lines_report_and_continue() {
        let s = StubServer::new("hope", StubScore::Constant(0.5));
        let out = run(
            &s,
            "not json\n{\"id\":\"1\"}\n{\"id\":\"2\",\"text\":\"y\"}\n",
        );
        assert_eq!(out[0]["line"], 1);
        assert_eq!(out[1]["line"], 2);
        assert_eq!(out[2]["id"], "2");
    }

    #[test]
    fn reverse_window() {
        let mut s = StubServer::new("hope", StubScore::Constant(0.5));
        s.faults.reverse_window = 2;
        let out = run(
            &s,
            "{\"id\":\"a\",\"text\":\"\"}\n{\"id\":\"b\",\"text\":\"\"}\n{\"id\":\"c\",\"text\":\"\"}\n",
        );
        let ids: Vec<&str> = out.iter().map(|v| v["id"].as_str().unwrap()).collect();
        assert_eq!(ids, ["b", "a", "c"]);
    }
}
