//! HTTP service for crypto-agility assessments.
//!
//! All endpoints live under `/api/v1` and exchange UTF-8 JSON. Sessions are
//! stored as one JSON file each; updates use optimistic concurrency through
//! the session revision. Static UI assets are served from `/ui/`.

mod api;
mod store;

use std::future::Future;
use std::net::SocketAddr;

pub use api::{router, ApiError, AppState};
pub use store::{FaultInjector, PersistStage, SessionStore, SessionSummary, StoreError};

/// Bind `addr` and serve until `shutdown` resolves. In-flight requests (and
/// therefore their writes) complete before this returns.
pub async fn serve(
    addr: SocketAddr,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    serve_on(listener, state, shutdown).await
}

/// Like [`serve`] on an already bound listener.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        () = ctrl_c => {},
        () = term => {},
    }
}
