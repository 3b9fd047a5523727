//! Line-delimited subprocess protocol for external objective evaluators.
//!
//! For each batch the engine launches the configured command, writes one
//! request per point to the child's standard input:
//!
//! ```text
//! {"id": 17, "x": [0.25, -1.5]}
//! ```
//!
//! and expects one response per request on the child's standard output, in
//! any order:
//!
//! ```text
//! {"id": 17, "f": [3.2]}
//! ```
//!
//! Input is closed at the end of the batch. Every request id must be
//! answered exactly once; missing or duplicate ids, malformed lines, a
//! nonzero exit status, or exceeding the per-batch timeout all fail the
//! batch with an evaluation error naming the offending point where known.

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

pub const DEFAULT_TIMEOUT_SECS: u64 = 60;

#[derive(Debug, Clone)]
pub struct EvaluatorOptions {
    /// Per-batch wall-clock budget for an external evaluator process.
    pub timeout: Duration,
}

impl Default for EvaluatorOptions {
    fn default() -> Self {
        EvaluatorOptions {
            timeout: Duration::from_secs(DEFAULT_TIMEOUT_SECS),
        }
    }
}

#[derive(Serialize)]
struct Request<'a> {
    id: usize,
    x: &'a [f64],
}

#[derive(Deserialize)]
struct Response {
    id: usize,
    f: Vec<f64>,
}

/// Run one batch through the evaluator command. Returns `n_outputs` values
/// per point, ordered by point index.
pub fn evaluate(
    command: &[String],
    points: &[Vec<f64>],
    n_outputs: usize,
    options: &EvaluatorOptions,
) -> Result<Vec<Vec<f64>>> {
    let (program, args) = command
        .split_first()
        .ok_or_else(|| Error::Config("external evaluator command is empty".into()))?;

    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| Error::evaluation(None, format!("failed to launch `{program}`: {e}")))?;

    let mut stdin = child.stdin.take().expect("stdin was piped");
    let stdout = child.stdout.take().expect("stdout was piped");

    // Feed requests from a separate thread so a child that interleaves
    // reading and writing cannot deadlock against us. Write errors (e.g. a
    // crashed child closing the pipe) surface later as missing responses.
    let request_lines: Vec<String> = points
        .iter()
        .enumerate()
        .map(|(id, x)| serde_json::to_string(&Request { id, x }).expect("serializable request"))
        .collect();
    let writer = std::thread::spawn(move || {
        for line in &request_lines {
            if stdin.write_all(line.as_bytes()).is_err() {
                return;
            }
            if stdin.write_all(b"\n").is_err() {
                return;
            }
        }
        // stdin dropped here, closing the child's input.
    });

    // Stream stdout lines through a channel so we can enforce the deadline.
    let (tx, rx) = mpsc::channel::<std::io::Result<String>>();
    let reader = std::thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            if tx.send(line).is_err() {
                return;
            }
        }
    });

    let deadline = Instant::now() + options.timeout;
    let mut answers: Vec<Option<Vec<f64>>> = vec![None; points.len()];
    let mut received = 0usize;
    let outcome: Result<()> = loop {
        if received == points.len() {
            break Ok(());
        }
        let remaining = deadline.saturating_duration_since(Instant::now());
        if remaining.is_zero() {
            break Err(Error::evaluation(
                first_missing(&answers),
                format!("evaluator timed out after {:?}", options.timeout),
            ));
        }
        match rx.recv_timeout(remaining) {
            Ok(Ok(line)) => {
                if line.trim().is_empty() {
                    continue;
                }
                let resp: Response = match serde_json::from_str(&line) {
                    Ok(r) => r,
                    Err(e) => {
                        break Err(Error::evaluation(
                            None,
                            format!("malformed evaluator response `{line}`: {e}"),
                        ))
                    }
                };
                if resp.id >= points.len() {
                    break Err(Error::evaluation(
                        Some(resp.id),
                        format!("response id {} outside batch of {}", resp.id, points.len()),
                    ));
                }
                if answers[resp.id].is_some() {
                    break Err(Error::evaluation(
                        Some(resp.id),
                        format!("duplicate response for id {}", resp.id),
                    ));
                }
                if resp.f.len() != n_outputs {
                    break Err(Error::evaluation(
                        Some(resp.id),
                        format!(
                            "expected {n_outputs} objective values, got {}",
                            resp.f.len()
                        ),
                    ));
                }
                answers[resp.id] = Some(resp.f);
                received += 1;
            }
            Ok(Err(e)) => break Err(Error::evaluation(None, format!("read error: {e}"))),
            // Channel closed: child stdout reached EOF before all answers.
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                break Err(Error::evaluation(
                    first_missing(&answers),
                    "evaluator closed its output before answering every request".to_string(),
                ));
            }
            Err(mpsc::RecvTimeoutError::Timeout) => {
                break Err(Error::evaluation(
                    first_missing(&answers),
                    format!("evaluator timed out after {:?}", options.timeout),
                ));
            }
        }
    };

    if outcome.is_err() {
        let _ = child.kill();
    }
    let status = child
        .wait()
        .map_err(|e| Error::evaluation(None, format!("wait failed: {e}")))?;
    // On the error path the threads may still be blocked on pipes held open
    // by a grandchild of the evaluator; drop the channel and let them finish
    // on their own instead of joining.
    drop(rx);
    if outcome.is_ok() {
        let _ = writer.join();
        let _ = reader.join();
    }
    outcome?;

    if !status.success() {
        return Err(Error::evaluation(
            first_missing(&answers),
            format!("evaluator exited with status {status}"),
        ));
    }
    Ok(answers
        .into_iter()
        .map(|a| a.expect("all ids answered"))
        .collect())
}

fn first_missing(answers: &[Option<Vec<f64>>]) -> Option<usize> {
    answers.iter().position(|a| a.is_none())
}
