use std::io::{BufReader, BufWriter};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use super::wire::{read_frame, write_frame, WireMessage};
use super::PROTO_VERSION;
use crate::action::ActionScript;
use crate::env::{EnvError, Environment, Executed, Observed};
use crate::sim::{EnvState, ExecError, Observation, Size};

/// An environment hosted by a bridge server.
pub struct RemoteEnv {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    screen: Size,
}

fn transport(e: impl std::fmt::Display) -> EnvError {
    EnvError::Transport(e.to_string())
}

impl RemoteEnv {
    /// Connects and performs the `Hello` exchange.
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Self, EnvError> {
        Self::connect_with(addr, PROTO_VERSION, Duration::from_secs(60))
    }

    /// As [`RemoteEnv::connect`] with an explicit protocol version and
    /// reply timeout.
    pub fn connect_with(addr: impl ToSocketAddrs, version: &str, timeout: Duration) -> Result<Self, EnvError> {
        let stream = TcpStream::connect(addr).map_err(transport)?;
        stream.set_read_timeout(Some(timeout)).map_err(transport)?;
        stream.set_nodelay(true).map_err(transport)?;
        let reader = BufReader::new(stream.try_clone().map_err(transport)?);
        let mut env = Self { reader, writer: BufWriter::new(stream), screen: Size { w: 0, h: 0 } };
        match env.request(&WireMessage::Hello { proto_version: version.into(), screen: env.screen })? {
            WireMessage::Hello { screen, .. } => {
                env.screen = screen;
                Ok(env)
            }
            other => Err(unexpected(other)),
        }
    }

    /// Sends one request and waits for its reply. `Error` replies become
    /// [`EnvError`]s.
    pub fn request(&mut self, msg: &WireMessage) -> Result<WireMessage, EnvError> {
        write_frame(&mut self.writer, msg).map_err(transport)?;
        match read_frame(&mut self.reader).map_err(transport)? {
            None => Err(EnvError::Transport("connection closed by server".into())),
            Some(WireMessage::Error { code, detail }) => Err(remote_error(code, detail)),
            Some(reply) => Ok(reply),
        }
    }

    /// Ends the session.
    pub fn shutdown(mut self) -> Result<(), EnvError> {
        self.request(&WireMessage::Shutdown {}).map(|_| ())
    }
}

fn remote_error(code: String, detail: String) -> EnvError {
    match code.as_str() {
        "exec_error" => match serde_json::from_str::<ExecError>(&detail) {
            Ok(e) => EnvError::Exec(e),
            Err(_) => EnvError::Remote { code, detail },
        },
        "unknown_task" => EnvError::UnknownTask(detail),
        "bad_script" => EnvError::Script(detail),
        _ => EnvError::Remote { code, detail },
    }
}

fn unexpected(msg: WireMessage) -> EnvError {
    EnvError::Remote { code: "unexpected_reply".into(), detail: msg.kind().into() }
}

fn observed(msg: WireMessage) -> Result<Observed, EnvError> {
    match msg {
        WireMessage::ObservationMsg { metadata, raster, state_hash } => {
            Ok(Observed { observation: Observation { metadata, raster }, state_hash })
        }
        other => Err(unexpected(other)),
    }
}

impl Environment for RemoteEnv {
    fn reset(&mut self, task_id: &str) -> Result<(), EnvError> {
        observed(self.request(&WireMessage::Reset { task_id: task_id.into() })?).map(|_| ())
    }

    fn observe(&mut self) -> Result<Observed, EnvError> {
        observed(self.request(&WireMessage::Observe {})?)
    }

    fn execute(&mut self, script: &ActionScript) -> Result<Executed, EnvError> {
        match self.request(&WireMessage::Execute { script_text: script.render() })? {
            WireMessage::ExecResultMsg { report, state_hash } => Ok(Executed { report, state_hash }),
            other => Err(unexpected(other)),
        }
    }

    fn snapshot(&mut self) -> Result<EnvState, EnvError> {
        match self.request(&WireMessage::Snapshot {})? {
            WireMessage::StateMsg { state } => Ok(*state),
            other => Err(unexpected(other)),
        }
    }

    fn screen(&self) -> Size {
        self.screen
    }
}
