use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{EnvState, ExecReport, PanelMeta, Size, SymbolicRaster};

/// Largest payload accepted in either direction.
pub const MAX_FRAME: usize = 16 * 1024 * 1024;

/// Every message on the wire. Requests flow client to server; each gets
/// exactly one reply.
///
/// | request    | reply                         |
/// |------------|-------------------------------|
/// | `Hello`    | `Hello` or `Error`            |
/// | `Reset`    | `ObservationMsg` or `Error`   |
/// | `Observe`  | `ObservationMsg` or `Error`   |
/// | `Execute`  | `ExecResultMsg` or `Error`    |
/// | `Snapshot` | `StateMsg` or `Error`         |
/// | `Shutdown` | `Shutdown`                    |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum WireMessage {
    Hello { proto_version: String, screen: Size },
    Reset { task_id: String },
    Observe {},
    ObservationMsg { metadata: Vec<PanelMeta>, raster: SymbolicRaster, state_hash: String },
    Execute { script_text: String },
    ExecResultMsg { report: ExecReport, state_hash: String },
    Snapshot {},
    StateMsg { state: Box<EnvState> },
    Error { code: String, detail: String },
    Shutdown {},
}

impl WireMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            WireMessage::Hello { .. } => "Hello",
            WireMessage::Reset { .. } => "Reset",
            WireMessage::Observe {} => "Observe",
            WireMessage::ObservationMsg { .. } => "ObservationMsg",
            WireMessage::Execute { .. } => "Execute",
            WireMessage::ExecResultMsg { .. } => "ExecResultMsg",
            WireMessage::Snapshot {} => "Snapshot",
            WireMessage::StateMsg { .. } => "StateMsg",
            WireMessage::Error { .. } => "Error",
            WireMessage::Shutdown {} => "Shutdown",
        }
    }

    pub fn error(code: &str, detail: impl Into<String>) -> Self {
        WireMessage::Error { code: code.to_string(), detail: detail.into() }
    }
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("frame of {0} bytes exceeds the limit")]
    FrameTooLarge(usize),
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// 4-byte big-endian payload length, then the JSON payload.
pub fn encode(msg: &WireMessage) -> Result<Vec<u8>, WireError> {
    let payload = serde_json::to_vec(msg).map_err(|e| WireError::MalformedPayload(e.to_string()))?;
    if payload.len() > MAX_FRAME {
        return Err(WireError::FrameTooLarge(payload.len()));
    }
    let mut out = Vec::with_capacity(4 + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

fn decode_payload(payload: &[u8]) -> Result<WireMessage, WireError> {
    if payload.is_empty() {
        return Err(WireError::MalformedPayload("empty frame".into()));
    }
    serde_json::from_slice(payload).map_err(|e| WireError::MalformedPayload(e.to_string()))
}

fn check_len(header: [u8; 4]) -> Result<usize, WireError> {
    let len = u32::from_be_bytes(header) as usize;
    if len > MAX_FRAME {
        return Err(WireError::FrameTooLarge(len));
    }
    Ok(len)
}

/// Decodes exactly one complete frame.
pub fn decode(bytes: &[u8]) -> Result<WireMessage, WireError> {
    let Some((header, payload)) = bytes.split_first_chunk::<4>() else {
        return Err(WireError::MalformedPayload("short header".into()));
    };
    let len = check_len(*header)?;
    if payload.len() != len {
        return Err(WireError::MalformedPayload(format!("header says {len} bytes, frame has {}", payload.len())));
    }
    decode_payload(payload)
}

/// Reads one frame. `Ok(None)` means the peer closed cleanly between
/// frames.
pub fn read_frame(r: &mut impl Read) -> Result<Option<WireMessage>, WireError> {
    let mut header = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut header[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(WireError::Io(io::ErrorKind::UnexpectedEof.into())),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = check_len(header)?;
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload)?;
    decode_payload(&payload).map(Some)
}

pub fn write_frame(w: &mut impl Write, msg: &WireMessage) -> Result<(), WireError> {
    w.write_all(&encode(msg)?)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hello_round_trips() {
        let m = WireMessage::Hello { proto_version: "1".into(), screen: Size { w: 640, h: 480 } };
        let bytes = encode(&m).unwrap();
        assert_eq!(decode(&bytes).unwrap(), m);
        assert_eq!(encode(&decode(&bytes).unwrap()).unwrap(), bytes);
        assert_eq!(&bytes[..4], &((bytes.len() - 4) as u32).to_be_bytes());
    }

    #[test]
    fn zero_length_is_malformed() {
        assert!(matches!(decode(&[0, 0, 0, 0]), Err(WireError::MalformedPayload(_))));
        let mut r: &[u8] = &[0, 0, 0, 0];
        assert!(matches!(read_frame(&mut r), Err(WireError::MalformedPayload(_))));
    }

    #[test]
    fn oversized_header_is_rejected() {
        let mut r: &[u8] = &(MAX_FRAME as u32 + 1).to_be_bytes();
        assert!(matches!(read_frame(&mut r), Err(WireError::FrameTooLarge(_))));
    }

    #[test]
    fn garbage_and_truncation() {
        let mut bad = 3u32.to_be_bytes().to_vec();
        bad.extend_from_slice(b"{x}");
        assert!(matches!(decode(&bad), Err(WireError::MalformedPayload(_))));
        let good = encode(&WireMessage::Observe {}).unwrap();
        assert!(decode(&good[..good.len() - 1]).is_err());
        let mut r: &[u8] = &[];
        assert!(read_frame(&mut r).unwrap().is_none());
        let mut r: &[u8] = &good[..2];
        assert!(matches!(read_frame(&mut r), Err(WireError::Io(_))));
    }

    #[test]
    fn stream_of_frames() {
        let msgs = vec![
            WireMessage::Reset { task_id: "widget/volume_set".into() },
            WireMessage::Execute { script_text: "click(1, 2)".into() },
            WireMessage::error("x", "y"),
            WireMessage::Shutdown {},
        ];
        let mut buf = Vec::new();
        for m in &msgs {
            write_frame(&mut buf, m).unwrap();
        }
        let mut r: &[u8] = &buf;
        let mut back = Vec::new();
        while let Some(m) = read_frame(&mut r).unwrap() {
            back.push(m);
        }
        assert_eq!(back, msgs);
    }
}
