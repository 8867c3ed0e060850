use std::io::{self, BufReader, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use super::wire::{read_frame, write_frame, WireError, WireMessage};
use super::PROTO_VERSION;
use crate::action::parse;
use crate::env::{EnvError, EnvFactory, Environment, LocalEnv};

#[derive(Debug, Clone, Copy)]
pub struct ServeConfig {
    /// A session that sends nothing for this long is closed with an
    /// `Error { code: "timeout" }`.
    pub idle_timeout: Duration,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self { idle_timeout: Duration::from_secs(300) }
    }
}

/// A running server. Dropping the handle stops accepting new sessions.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the accept loop ends.
    pub fn wait(mut self) {
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if self.accept.is_some() {
            self.shutdown();
        }
    }
}

/// Hosts environments built by `factory`, one session per connection,
/// each on its own thread.
pub fn serve(
    factory: Arc<dyn EnvFactory>,
    listen: impl ToSocketAddrs,
    config: ServeConfig,
) -> io::Result<ServerHandle> {
    let listener = TcpListener::bind(listen)?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&stop);
    let accept = std::thread::spawn(move || {
        for conn in listener.incoming() {
            if flag.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = conn else { continue };
            let factory = Arc::clone(&factory);
            std::thread::spawn(move || {
                let _ = run_session(stream, factory, config);
            });
        }
    });
    Ok(ServerHandle { addr, stop, accept: Some(accept) })
}

#[derive(PartialEq)]
enum Phase {
    AwaitHello,
    AwaitReset,
    Ready,
}

fn env_error(e: EnvError) -> WireMessage {
    match e {
        EnvError::Exec(x) => WireMessage::error("exec_error", serde_json::to_string(&x).unwrap_or_default()),
        EnvError::UnknownTask(t) => WireMessage::error("unknown_task", t),
        EnvError::Script(s) => WireMessage::error("bad_script", s),
        other => WireMessage::error("env_error", other.to_string()),
    }
}

fn observation(env: &mut LocalEnv) -> WireMessage {
    match env.observe() {
        Ok(o) => WireMessage::ObservationMsg {
            metadata: o.observation.metadata,
            raster: o.observation.raster,
            state_hash: o.state_hash,
        },
        Err(e) => env_error(e),
    }
}

/// Handles one connection until `Shutdown`, a protocol violation, a
/// transport error or the idle timeout.
pub fn run_session(stream: TcpStream, factory: Arc<dyn EnvFactory>, config: ServeConfig) -> Result<(), WireError> {
    stream.set_read_timeout(Some(config.idle_timeout))?;
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let mut env = LocalEnv::new(Arc::clone(&factory));
    let mut phase = Phase::AwaitHello;
    loop {
        let msg = match read_frame(&mut reader) {
            Ok(Some(m)) => m,
            Ok(None) => return Ok(()),
            Err(WireError::Io(e)) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
                return write_frame(&mut writer, &WireMessage::error("timeout", "session idle too long"));
            }
            Err(WireError::Io(e)) => return Err(e.into()),
            Err(e) => {
                let _ = write_frame(&mut writer, &WireMessage::error("malformed", e.to_string()));
                return Err(e);
            }
        };
        let violation = |why: String| WireMessage::error("protocol_violation", why);
        let (reply, close) = match (&phase, msg) {
            (_, WireMessage::Shutdown {}) => (WireMessage::Shutdown {}, true),
            (Phase::AwaitHello, WireMessage::Hello { proto_version, .. }) => {
                if proto_version == PROTO_VERSION {
                    phase = Phase::AwaitReset;
                    (WireMessage::Hello { proto_version: PROTO_VERSION.into(), screen: factory.screen() }, false)
                } else {
                    let detail = format!("server speaks version {PROTO_VERSION}, client sent {proto_version}");
                    (WireMessage::error("version_mismatch", detail), true)
                }
            }
            (Phase::AwaitHello, other) => (violation(format!("{} before Hello", other.kind())), true),
            (_, WireMessage::Reset { task_id }) => match env.reset(&task_id) {
                Ok(()) => {
                    phase = Phase::Ready;
                    (observation(&mut env), false)
                }
                Err(e) => (env_error(e), false),
            },
            (
                Phase::AwaitReset,
                other @ (WireMessage::Observe {} | WireMessage::Execute { .. } | WireMessage::Snapshot {}),
            ) => (violation(format!("{} before Reset", other.kind())), true),
            (Phase::Ready, WireMessage::Observe {}) => (observation(&mut env), false),
            (Phase::Ready, WireMessage::Execute { script_text }) => {
                let reply = match parse(&script_text) {
                    Err(e) => env_error(EnvError::Script(e.to_string())),
                    Ok(script) => match env.execute(&script) {
                        Ok(x) => WireMessage::ExecResultMsg { report: x.report, state_hash: x.state_hash },
                        Err(e) => env_error(e),
                    },
                };
                (reply, false)
            }
            (Phase::Ready, WireMessage::Snapshot {}) => match env.snapshot() {
                Ok(s) => (WireMessage::StateMsg { state: Box::new(s) }, false),
                Err(e) => (env_error(e), false),
            },
            (_, other) => (violation(format!("unexpected {}", other.kind())), true),
        };
        write_frame(&mut writer, &reply)?;
        if close {
            return Ok(());
        }
    }
}
