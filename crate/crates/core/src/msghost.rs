//! Native-messaging host: length-prefixed JSON frames over stdio.
//!
//! Every frame is a 4-byte little-endian length followed by that many bytes
//! of UTF-8 JSON. Frames larger than [`MAX_FRAME_LEN`] are refused in both
//! directions. Bad requests get an in-band error response; only framing
//! violations end the session.

use std::io::{self, Read, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::scorer::{Scorer, Tier};

/// Host name registered with the browser.
pub const HOST_NAME: &str = "deep_breath";
pub const MAX_FRAME_LEN: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("stream ended after {got} of {expected} bytes")]
    Truncated { expected: usize, got: usize },
    #[error("frame of {0} bytes exceeds the {MAX_FRAME_LEN} byte limit")]
    TooLarge(usize),
    #[error("zero-length frame")]
    Empty,
}

/// Reads as many bytes as are available up to `buf.len()`.
fn read_full<R: Read>(input: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match input.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Reads one frame. `Ok(None)` means the stream ended cleanly before a header.
pub fn read_frame<R: Read>(input: &mut R) -> Result<Option<Vec<u8>>, FrameError> {
    let mut header = [0u8; 4];
    match read_full(input, &mut header)? {
        0 => return Ok(None),
        4 => {}
        got => return Err(FrameError::Truncated { expected: 4, got }),
    }
    let len = u32::from_le_bytes(header) as usize;
    if len > MAX_FRAME_LEN {
        return Err(FrameError::TooLarge(len));
    }
    if len == 0 {
        return Err(FrameError::Empty);
    }
    let mut payload = vec![0u8; len];
    let got = read_full(input, &mut payload)?;
    if got != len {
        return Err(FrameError::Truncated { expected: len, got });
    }
    Ok(Some(payload))
}

/// Writes the length header and payload, then flushes.
pub fn write_frame<W: Write>(output: &mut W, payload: &[u8]) -> Result<(), FrameError> {
    if payload.len() > MAX_FRAME_LEN {
        return Err(FrameError::TooLarge(payload.len()));
    }
    let len = payload.len() as u32;
    output.write_all(&len.to_le_bytes())?;
    output.write_all(payload)?;
    output.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Response {
    Result { score: f64, tier: Tier },
    Error { message: String },
}

impl Response {
    fn error(message: impl Into<String>) -> Self {
        Response::Error {
            message: message.into(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("response serializes")
    }
}

/// Extracts the headline of a `{"type":"score","headline":...}` request.
fn parse_request(payload: &[u8]) -> Result<String, String> {
    let value: Value =
        serde_json::from_slice(payload).map_err(|e| format!("malformed JSON request: {e}"))?;
    let object = value
        .as_object()
        .ok_or_else(|| "request must be a JSON object".to_owned())?;
    match object.get("type") {
        Some(Value::String(t)) if t == "score" => {}
        Some(Value::String(t)) => return Err(format!("unknown request type {t:?}")),
        Some(_) => return Err("request `type` must be a string".to_owned()),
        None => return Err("request is missing `type`".to_owned()),
    }
    match object.get("headline") {
        Some(Value::String(h)) => Ok(h.clone()),
        Some(_) => Err("`headline` must be a string".to_owned()),
        None => Err("score request is missing `headline`".to_owned()),
    }
}

pub fn handle_request(scorer: &Scorer, payload: &[u8]) -> Response {
    match parse_request(payload) {
        Ok(headline) => {
            let r = scorer.assess(&headline);
            Response::Result {
                score: r.score,
                tier: r.tier,
            }
        }
        Err(message) => Response::error(message),
    }
}

#[derive(Debug, Error)]
pub enum HostError {
    #[error("protocol error: {0}")]
    Protocol(#[from] FrameError),
}

/// Answers frames until the input ends. Returns the number of requests
/// served.
pub fn serve<R: Read, W: Write>(
    scorer: &Scorer,
    input: &mut R,
    output: &mut W,
) -> Result<usize, HostError> {
    let mut served = 0;
    while let Some(payload) = read_frame(input)? {
        let bytes = handle_request(scorer, &payload).to_bytes();
        match write_frame(output, &bytes) {
            Err(FrameError::TooLarge(n)) => {
                let fallback = Response::error(format!(
                    "internal error: response of {n} bytes is too large"
                ));
                write_frame(output, &fallback.to_bytes())?;
            }
            other => other?,
        }
        served += 1;
    }
    Ok(served)
}

/// Browser families use different allow-list keys in the host manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Browser {
    Firefox,
    Chromium,
}

/// Native host manifest registering `host_path` for the given extensions.
///
/// Firefox reads `~/.mozilla/native-messaging-hosts/deep_breath.json` on
/// Linux; Chromium reads `~/.config/chromium/NativeMessagingHosts/`.
pub fn native_manifest(browser: Browser, host_path: &Path, allowed: &[String]) -> Value {
    let allow_key = match browser {
        Browser::Firefox => "allowed_extensions",
        Browser::Chromium => "allowed_origins",
    };
    json!({
        "name": HOST_NAME,
        "description": "Scores news headlines for sensationalist or misleading framing",
        "path": host_path.to_string_lossy(),
        "type": "stdio",
        (allow_key): allowed,
    })
}
