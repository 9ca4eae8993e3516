//! Client side of the line-delimited scorer protocol (version 1).
//!
//! ```text
//! -> {"op":"hello"}
//! <- {"protocol":1,"name":"..."}
//! -> {"id":"...","text":"..."}        one line per post
//! <- {"id":"...","p":0.93}            any order, one per request
//! ```

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::CleanText;
use crate::{Error, Result};

pub const PROTOCOL_VERSION: u64 = 1;

/// How to launch and drive an external scorer process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalCommand {
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    /// Number of processes scoring disjoint slices in parallel.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_timeout_secs() -> u64 {
    60
}
fn default_batch_size() -> usize {
    256
}
fn default_workers() -> usize {
    1
}

impl ExternalCommand {
    pub fn new(
        program: impl Into<String>,
        args: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        Self {
            program: program.into(),
            args: args.into_iter().map(Into::into).collect(),
            timeout_secs: default_timeout_secs(),
            batch_size: default_batch_size(),
            workers: default_workers(),
        }
    }

    pub fn command_line(&self) -> String {
        std::iter::once(self.program.as_str())
            .chain(self.args.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Scores `tweets` with the external process, preserving input order.
pub fn score_external(
    scorer: &str,
    cmd: &ExternalCommand,
    tweets: &[(String, CleanText)],
) -> Result<Vec<f64>> {
    if tweets.is_empty() {
        return Ok(Vec::new());
    }
    let workers = cmd.workers.clamp(1, tweets.len());
    let chunk = tweets.len().div_ceil(workers);
    let results: Vec<Result<Vec<f64>>> = thread::scope(|s| {
        let handles: Vec<_> = tweets
            .chunks(chunk)
            .map(|slice| s.spawn(move || Session::start(scorer, cmd)?.score_all(slice)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(protocol(scorer, "worker thread panicked")))
            })
            .collect()
    });
    let mut out = Vec::with_capacity(tweets.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn protocol(scorer: &str, detail: impl Into<String>) -> Error {
    Error::Protocol {
        scorer: scorer.to_string(),
        detail: detail.into(),
    }
}

fn failure(scorer: &str, id: &str, reason: impl Into<String>) -> Error {
    Error::Scoring {
        scorer: scorer.to_string(),
        id: id.to_string(),
        reason: reason.into(),
    }
}

struct Session<'a> {
    scorer: &'a str,
    cmd: &'a ExternalCommand,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    /// Name announced in the handshake.
    name: String,
}

impl<'a> Session<'a> {
    fn start(scorer: &'a str, cmd: &'a ExternalCommand) -> Result<Self> {
        let mut child = Command::new(&cmd.program)
            .args(&cmd.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| {
                failure(
                    scorer,
                    "<handshake>",
                    format!("cannot start `{}`: {e}", cmd.command_line()),
                )
            })?;
        let stdout = child.stdout.take().expect("piped stdout");
        let stdin = child.stdin.take();
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut session = Self {
            scorer,
            cmd,
            child,
            stdin,
            lines: rx,
            name: String::new(),
        };
        session.handshake()?;
        Ok(session)
    }

    fn timeout(&self) -> Duration {
        Duration::from_secs(self.cmd.timeout_secs)
    }

    fn handshake(&mut self) -> Result<()> {
        self.send(&[json!({"op": "hello"}).to_string()], "<handshake>")?;
        let deadline = Instant::now() + self.timeout();
        let line = self.recv(deadline, "<handshake>")?;
        let v: Value = serde_json::from_str(&line).map_err(|e| {
            protocol(
                self.scorer,
                format!("handshake reply is not JSON ({e}): {line}"),
            )
        })?;
        match v.get("protocol").and_then(Value::as_u64) {
            Some(PROTOCOL_VERSION) => {}
            other => {
                return Err(protocol(
                    self.scorer,
                    format!("expected protocol {PROTOCOL_VERSION}, got {other:?}"),
                ))
            }
        }
        self.name = v
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| protocol(self.scorer, "handshake reply lacks a `name`"))?
            .to_string();
        Ok(())
    }

    fn send(&mut self, lines: &[String], first_id: &str) -> Result<()> {
        let Some(stdin) = self.stdin.as_mut() else {
            return Err(failure(self.scorer, first_id, "stdin already closed"));
        };
        let mut buf = String::new();
        for l in lines {
            buf.push_str(l);
            buf.push('\n');
        }
        stdin
            .write_all(buf.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| failure(self.scorer, first_id, format!("cannot write request: {e}")))
    }

    fn recv(&mut self, deadline: Instant, pending_id: &str) -> Result<String> {
        let wait = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(wait) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(failure(self.scorer, pending_id, format!("read error: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                let _ = self.child.kill();
                Err(failure(
                    self.scorer,
                    pending_id,
                    format!("no response within {}s", self.cmd.timeout_secs),
                ))
            }
            Err(RecvTimeoutError::Disconnected) => {
                let status = self
                    .child
                    .wait()
                    .map(|s| s.to_string())
                    .unwrap_or_else(|e| e.to_string());
                Err(failure(
                    self.scorer,
                    pending_id,
                    format!("process exited ({status})"),
                ))
            }
        }
    }

    fn score_all(mut self, tweets: &[(String, CleanText)]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(tweets.len());
        for batch in tweets.chunks(self.cmd.batch_size.max(1)) {
            out.extend(self.score_batch(batch)?);
        }
        self.stdin.take();
        let deadline = Instant::now() + self.timeout();
        loop {
            match self.child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => {
                    let _ = self.child.kill();
                    let _ = self.child.wait();
                    break;
                }
            }
        }
        Ok(out)
    }

    fn score_batch(&mut self, batch: &[(String, CleanText)]) -> Result<Vec<f64>> {
        let requests: Vec<String> = batch
            .iter()
            .map(|(id, t)| json!({"id": id, "text": t.text}).to_string())
            .collect();
        let mut slot: HashMap<&str, usize> = HashMap::with_capacity(batch.len());
        for (i, (id, _)) in batch.iter().enumerate() {
            if slot.insert(id.as_str(), i).is_some() {
                return Err(Error::Config(format!(
                    "duplicate id `{id}` in scoring batch"
                )));
            }
        }
        self.send(&requests, &batch[0].0)?;

        let mut scores: Vec<Option<f64>> = vec![None; batch.len()];
        let mut remaining = batch.len();
        let deadline = Instant::now() + self.timeout();
        while remaining > 0 {
            let pending = batch
                .iter()
                .zip(&scores)
                .find(|(_, s)| s.is_none())
                .map(|((id, _), _)| id.as_str())
                .unwrap_or_default();
            let line = self.recv(deadline, pending)?;
            let v: Value = serde_json::from_str(&line).map_err(|e| {
                protocol(self.scorer, format!("response is not JSON ({e}): {line}"))
            })?;
            if let Some(err) = v.get("error") {
                return Err(failure(
                    self.scorer,
                    pending,
                    format!("scorer reported error: {err}"),
                ));
            }
            let id = v
                .get("id")
                .and_then(Value::as_str)
                .ok_or_else(|| protocol(self.scorer, format!("response without `id`: {line}")))?;
            let p = v.get("p").and_then(Value::as_f64).ok_or_else(|| {
                protocol(self.scorer, format!("response without numeric `p`: {line}"))
            })?;
            let &i = slot
                .get(id)
                .ok_or_else(|| protocol(self.scorer, format!("response for unknown id `{id}`")))?;
            if scores[i].is_some() {
                return Err(protocol(
                    self.scorer,
                    format!("duplicate response for id `{id}`"),
                ));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(protocol(
                    self.scorer,
                    format!("probability {p} for `{id}` is outside [0, 1]"),
                ));
            }
            scores[i] = Some(p);
            remaining -= 1;
        }
        Ok(scores
            .into_iter()
            .map(|s| s.expect("all slots filled"))
            .collect())
    }
}

impl Drop for Session<'_> {
    fn drop(&mut self) {
        if let Ok(None) = self.child.try_wait() {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

/// Starts the process and returns the name it announces in the handshake.
pub fn handshake_name(scorer: &str, cmd: &ExternalCommand) -> Result<String> {
    let session = Session::start(scorer, cmd)?;
    Ok(session.name.clone())
}
