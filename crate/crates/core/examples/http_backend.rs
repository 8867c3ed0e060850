//! Sends one prompt to an OpenAI-compatible endpoint. The key comes from
//! ACE_API_KEY and the endpoint from ACE_API_BASE.
//!
//!     ACE_API_KEY=... cargo run --example http_backend -- "Say hi"

use ace_core::llm::{Backend, HttpBackend, HttpConfig};

fn main() {
    let prompt = std::env::args().nth(1).unwrap_or_else(|| "Reply with the word ready.".into());
    let config = HttpConfig::from_env();
    println!("endpoint {} model {}", config.endpoint, config.model);
    let backend = HttpBackend::new(config);
    match backend.complete(&prompt) {
        Ok(reply) => println!("{reply}"),
        Err(e) => {
            eprintln!("request failed: {e}");
            std::process::exit(1);
        }
    }
}
