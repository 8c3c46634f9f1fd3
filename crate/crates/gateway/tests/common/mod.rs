//! A live gateway on an ephemeral port plus a tiny blocking client.
#![allow(dead_code)]

use std::sync::mpsc;
use std::time::{Duration, Instant};

use matspace::{router, ApiConfig, Gateway};
use serde_json::Value;

/// Starts the gateway with its trigger worker; returns the base URL. The
/// server lives until the test process exits.
pub fn spawn_server(config: ApiConfig) -> String {
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let gw = Gateway::open(config).unwrap();
            tokio::spawn(gw.clone().trigger_worker());
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, router(gw)).await.unwrap();
        });
    });
    let addr = rx.recv_timeout(Duration::from_secs(10)).expect("server did not start");
    format!("http://{addr}")
}

pub struct Reply {
    pub status: u16,
    pub body: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("not JSON ({e}): {}", self.body))
    }
}

pub fn request(method: &str, url: &str, body: Option<(&str, &[u8])>, token: Option<&str>) -> Reply {
    let mut req = ureq::request(method, url);
    if let Some(t) = token {
        req = req.set("Authorization", &format!("Bearer {t}"));
    }
    let resp = match body {
        Some((ctype, bytes)) => req.set("Content-Type", ctype).send_bytes(bytes),
        None => req.call(),
    };
    match resp {
        Ok(r) => Reply { status: r.status(), body: r.into_string().unwrap() },
        Err(ureq::Error::Status(status, r)) => Reply { status, body: r.into_string().unwrap() },
        Err(e) => panic!("{method} {url}: {e}"),
    }
}

pub fn get(url: &str) -> Reply {
    request("GET", url, None, None)
}

pub fn post_json(url: &str, body: &Value) -> Reply {
    request("POST", url, Some(("application/json", body.to_string().as_bytes())), None)
}

/// Polls `/health` until the trigger worker has drained every queued run.
pub fn wait_idle(base: &str) {
    let deadline = Instant::now() + Duration::from_secs(30);
    loop {
        let h = get(&format!("{base}/health")).json();
        if h["stats"]["pending_runs"] == 0 {
            return;
        }
        assert!(Instant::now() < deadline, "runs still pending: {h}");
        std::thread::sleep(Duration::from_millis(10));
    }
}
