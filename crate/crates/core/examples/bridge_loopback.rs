//! Serves the bundled pack on a loopback port and runs the same episode
//! locally and over the bridge. The scrubbed traces are identical.

use std::sync::Arc;

use ace_core::bridge::{serve, RemoteEnv, ServeConfig};
use ace_core::cli::BUNDLED_PACK;
use ace_core::env::LocalEnv;
use ace_core::eval::{fixture_backend, run_episode, Fixture, RunConfig, TaskPack};

fn main() {
    let pack = TaskPack::load(BUNDLED_PACK).expect("bundled pack loads");
    let server = serve(Arc::new(pack.factory()), "127.0.0.1:0", ServeConfig::default()).expect("bind");
    println!("serving on {}", server.addr());

    let spec = pack.task("design/paint_square").unwrap();
    let config = RunConfig::default();
    let backend = fixture_backend(spec, Fixture::Golden).unwrap();
    let local = run_episode(spec, &backend, &mut LocalEnv::new(Arc::new(pack.factory())), &config);

    let backend = fixture_backend(spec, Fixture::Golden).unwrap();
    let mut remote_env = RemoteEnv::connect(server.addr()).expect("connect");
    let remote = run_episode(spec, &backend, &mut remote_env, &config);
    remote_env.shutdown().unwrap();
    server.stop();

    println!("local:  success={} steps={}", local.outcome.success, local.outcome.steps);
    println!("remote: success={} steps={}", remote.outcome.success, remote.outcome.steps);
    println!("scrubbed traces equal: {}", local.scrubbed().to_jsonl() == remote.scrubbed().to_jsonl());
}
