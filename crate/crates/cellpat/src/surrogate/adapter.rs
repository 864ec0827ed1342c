//! External-predictor adapter: line-delimited JSON over a child process's
//! standard streams. Requests carry an id and a genotype document; replies
//! may arrive out of order and are matched back by id.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cell::NetworkSpec;
use crate::error::{Error, Result};
use crate::genotype::serialize_genotype;
use crate::surrogate::Predictor;

/// Environment variable bounding how long one reply may take, in ms.
pub const ADAPTER_TIMEOUT_ENV: &str = "CELLPAT_ADAPTER_TIMEOUT_MS";
const DEFAULT_TIMEOUT_MS: u64 = 30_000;

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    genotype: &'a serde_json::Value,
}

#[derive(Deserialize)]
struct Reply {
    id: u64,
    #[serde(default)]
    score: Option<f64>,
    #[serde(default)]
    error: Option<String>,
}

struct AdapterIo {
    stdin: ChildStdin,
    replies: Receiver<std::result::Result<Reply, String>>,
    /// Replies that arrived while waiting for a different id.
    pending: BTreeMap<u64, std::result::Result<f64, String>>,
    next_id: u64,
}

/// A child-process predictor speaking the line-delimited JSON protocol.
/// One request/reply channel; concurrent callers are serialized internally.
pub struct ExternalAdapter {
    child: Child,
    io: Mutex<AdapterIo>,
    timeout: Duration,
}

impl ExternalAdapter {
    /// Launches `command` via `sh -c` with piped standard streams.
    pub fn spawn(command: &str) -> Result<Self> {
        let timeout_ms = std::env::var(ADAPTER_TIMEOUT_ENV)
            .ok()
            .and_then(|v| v.parse::<u64>().ok())
            .unwrap_or(DEFAULT_TIMEOUT_MS);
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Adapter(format!("failed to launch `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = child.stdout.take().expect("stdout piped");

        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let item = match line {
                    Ok(line) if line.trim().is_empty() => continue,
                    Ok(line) => serde_json::from_str::<Reply>(&line)
                        .map_err(|e| format!("malformed reply `{line}`: {e}")),
                    Err(e) => Err(format!("read failure: {e}")),
                };
                if tx.send(item).is_err() {
                    break;
                }
            }
        });

        Ok(ExternalAdapter {
            child,
            io: Mutex::new(AdapterIo {
                stdin,
                replies: rx,
                pending: BTreeMap::new(),
                next_id: 1,
            }),
            timeout: Duration::from_millis(timeout_ms),
        })
    }

    fn call_batch(&self, specs: &[NetworkSpec]) -> Result<Vec<f64>> {
        let mut io = self
            .io
            .lock()
            .map_err(|_| Error::Adapter("adapter state poisoned".to_string()))?;

        let mut ids = Vec::with_capacity(specs.len());
        for spec in specs {
            let genotype: serde_json::Value = serde_json::from_str(&serialize_genotype(spec)?)?;
            let id = io.next_id;
            io.next_id += 1;
            let mut line = serde_json::to_string(&Request {
                id,
                genotype: &genotype,
            })?;
            line.push('\n');
            io.stdin
                .write_all(line.as_bytes())
                .map_err(|e| Error::Adapter(format!("request write failed: {e}")))?;
            ids.push(id);
        }
        io.stdin
            .flush()
            .map_err(|e| Error::Adapter(format!("request flush failed: {e}")))?;

        ids.iter()
            .map(|&id| Self::wait_for(&mut io, id, self.timeout))
            .collect()
    }

    fn wait_for(io: &mut AdapterIo, id: u64, timeout: Duration) -> Result<f64> {
        let started = Instant::now();
        loop {
            if let Some(outcome) = io.pending.remove(&id) {
                return outcome.map_err(Error::Adapter);
            }
            let remaining = timeout
                .checked_sub(started.elapsed())
                .ok_or_else(|| timeout_error(id, timeout))?;
            match io.replies.recv_timeout(remaining) {
                Ok(Ok(reply)) => {
                    let outcome = match (reply.score, reply.error) {
                        (_, Some(message)) => Err(format!("predictor error: {message}")),
                        (Some(score), None) if score.is_finite() => Ok(score),
                        (Some(score), None) => Err(format!("non-finite score {score}")),
                        (None, None) => Err("reply carries neither score nor error".to_string()),
                    };
                    io.pending.insert(reply.id, outcome);
                }
                Ok(Err(message)) => return Err(Error::Adapter(message)),
                Err(RecvTimeoutError::Timeout) => return Err(timeout_error(id, timeout)),
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(Error::Adapter(
                        "predictor closed its output stream".to_string(),
                    ))
                }
            }
        }
    }
}

fn timeout_error(id: u64, timeout: Duration) -> Error {
    Error::Adapter(format!(
        "timed out after {}ms waiting for reply {id}",
        timeout.as_millis()
    ))
}

impl Predictor for ExternalAdapter {
    fn predict(&self, spec: &NetworkSpec) -> Result<f64> {
        Ok(self.call_batch(std::slice::from_ref(spec))?[0])
    }

    fn predict_batch(&self, specs: &[NetworkSpec]) -> Result<Vec<f64>> {
        self.call_batch(specs)
    }
}

impl Drop for ExternalAdapter {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
