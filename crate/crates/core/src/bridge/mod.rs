//! Running the environment in another process.
//!
//! The server hosts simulated desktops; the agent drives one through
//! [`RemoteEnv`], which implements the same [`crate::env::Environment`]
//! trait as the in-process [`crate::env::LocalEnv`]. Frames are a 4-byte
//! big-endian length followed by a JSON payload tagged by `type`. The
//! protocol is lockstep: one reply per request, in order.
//!
//! A session must open with `Hello` and `Reset` before `Observe`,
//! `Execute` or `Snapshot`. Anything out of order gets an `Error` reply
//! with code `protocol_violation` and the connection closes. Errors from
//! the environment itself (unknown task, unparsable script, off-screen
//! action) are replied to and the session continues.
//!
//! The raster travels as the symbolic grid. An adapter for a real desktop
//! would send an image in the same `ObservationMsg` slot.

mod client;
mod server;
mod wire;

pub use client::RemoteEnv;
pub use server::{run_session, serve, ServeConfig, ServerHandle};
pub use wire::{decode, encode, read_frame, write_frame, WireError, WireMessage, MAX_FRAME};

pub const PROTO_VERSION: &str = "1";
pub const DEFAULT_PORT: u16 = 48333;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::parse;
    use crate::env::{EnvError, Environment, LocalEnv, StateTable};
    use crate::sim::{EnvState, Rect, Widget, WidgetKind, Window};
    use std::collections::BTreeMap;
    use std::io::{BufReader, BufWriter};
    use std::net::TcpStream;
    use std::sync::Arc;
    use std::time::Duration;

    fn table() -> StateTable {
        let mut s = EnvState::blank(320, 160);
        s.windows.push(
            Window::new("w", "App", Rect::new(0, 0, 320, 160)).with_children(vec![Widget::new(
                "c",
                WidgetKind::Checkbox,
                Rect::new(8, 16, 80, 8),
            )
            .with_text("Mute")]),
        );
        StateTable {
            states: BTreeMap::from([("a".into(), s.clone()), ("b".into(), s)]),
            screen: crate::sim::Size { w: 320, h: 160 },
        }
    }

    fn server() -> ServerHandle {
        serve(Arc::new(table()), "127.0.0.1:0", ServeConfig::default()).unwrap()
    }

    fn raw(addr: std::net::SocketAddr) -> (BufReader<TcpStream>, BufWriter<TcpStream>) {
        let s = TcpStream::connect(addr).unwrap();
        s.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
        (BufReader::new(s.try_clone().unwrap()), BufWriter::new(s))
    }

    #[test]
    fn remote_matches_local() {
        let srv = server();
        let mut remote = RemoteEnv::connect(srv.addr()).unwrap();
        let mut local = LocalEnv::new(Arc::new(table()));
        remote.reset("a").unwrap();
        local.reset("a").unwrap();
        assert_eq!(remote.observe().unwrap(), local.observe().unwrap());
        let script = parse("click(8, 16)").unwrap();
        assert_eq!(remote.execute(&script).unwrap(), local.execute(&script).unwrap());
        assert_eq!(remote.snapshot().unwrap(), local.snapshot().unwrap());
        let off = parse("click(999, 0)").unwrap();
        assert_eq!(remote.execute(&off), local.execute(&off));
        assert!(matches!(remote.reset("zzz"), Err(EnvError::UnknownTask(_))));
        remote.shutdown().unwrap();
    }

    #[test]
    fn observe_before_reset_is_violation() {
        let srv = server();
        let (mut r, mut w) = raw(srv.addr());
        write_frame(&mut w, &WireMessage::Hello { proto_version: "1".into(), screen: crate::sim::Size { w: 0, h: 0 } })
            .unwrap();
        assert!(matches!(read_frame(&mut r).unwrap(), Some(WireMessage::Hello { .. })));
        write_frame(&mut w, &WireMessage::Observe {}).unwrap();
        match read_frame(&mut r).unwrap() {
            Some(WireMessage::Error { code, .. }) => assert_eq!(code, "protocol_violation"),
            other => panic!("{other:?}"),
        }
        assert!(read_frame(&mut r).unwrap().is_none());
    }

    #[test]
    fn version_mismatch_is_refused() {
        let srv = server();
        let err = RemoteEnv::connect_with(srv.addr(), "0", Duration::from_secs(5)).err().unwrap();
        assert!(matches!(err, EnvError::Remote { ref code, .. } if code == "version_mismatch"), "{err}");
    }

    #[test]
    fn sessions_are_isolated() {
        let srv = server();
        let mut a = RemoteEnv::connect(srv.addr()).unwrap();
        let mut b = RemoteEnv::connect(srv.addr()).unwrap();
        a.reset("a").unwrap();
        b.reset("a").unwrap();
        let h0 = b.observe().unwrap().state_hash;
        a.execute(&parse("click(8, 16)").unwrap()).unwrap();
        assert_eq!(b.observe().unwrap().state_hash, h0);
        assert_ne!(a.observe().unwrap().state_hash, h0);
    }

    #[test]
    fn dropped_connection_is_transport_error() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let t = std::thread::spawn(move || {
            let (s, _) = listener.accept().unwrap();
            let mut r = BufReader::new(s.try_clone().unwrap());
            let mut w = BufWriter::new(s);
            read_frame(&mut r).unwrap();
            write_frame(
                &mut w,
                &WireMessage::Hello { proto_version: "1".into(), screen: crate::sim::Size { w: 1, h: 1 } },
            )
            .unwrap();
        });
        let mut env = RemoteEnv::connect(addr).unwrap();
        t.join().unwrap();
        assert!(matches!(env.reset("a"), Err(EnvError::Transport(_))));
    }

    #[test]
    fn idle_session_times_out() {
        let srv =
            serve(Arc::new(table()), "127.0.0.1:0", ServeConfig { idle_timeout: Duration::from_millis(100) }).unwrap();
        let (mut r, _w) = raw(srv.addr());
        match read_frame(&mut r).unwrap() {
            Some(WireMessage::Error { code, .. }) => assert_eq!(code, "timeout"),
            other => panic!("{other:?}"),
        }
    }
}
