use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, HeaderMap, Method as HttpMethod, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use clap::{Parser, Subcommand};
use glider_core::station::api::{Method, Request, StationApi, MAX_BODY_BYTES};
use glider_core::station::store::StationStore;

/// Ground station for vehicle telemetry and mission uploads.
#[derive(Debug, Parser)]
#[command(name = "station", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Serve the HTTP API until interrupted.
    Serve {
        /// 0 picks a free port.
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Journal directory; the store is memory-only when unset.
        #[arg(long, env = "STATION_DATA_DIR")]
        data_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 270)]
        downlink_mtu: usize,
    },
}

fn unix_now() -> u32 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs().min(u32::MAX as u64) as u32)
}

async fn dispatch(
    State(api): State<Arc<StationApi>>,
    method: HttpMethod,
    uri: Uri,
    headers: HeaderMap,
    body: Bytes,
) -> Response {
    let content_type = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok());
    let req = Request {
        method: Method::parse(method.as_str()),
        path: uri.path(),
        query: uri.query(),
        content_type,
        body: &body,
    };
    let res = api.handle(&req, unix_now());
    let status = StatusCode::from_u16(res.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, "application/json")], res.body).into_response()
}

fn router(api: Arc<StationApi>) -> Router {
    Router::new()
        .fallback(dispatch)
        // the handler answers oversized bodies itself with a JSON 413
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES * 4))
        .with_state(api)
}

async fn serve(addr: SocketAddr, api: Arc<StationApi>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    println!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(api))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn main() -> ExitCode {
    let Command::Serve {
        port,
        host,
        data_dir,
        downlink_mtu,
    } = Cli::parse().command;
    let store = match &data_dir {
        Some(dir) => StationStore::open(dir),
        None => Ok(StationStore::in_memory()),
    };
    let store = match store {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    let api = Arc::new(StationApi::new(store, downlink_mtu));
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    };
    match runtime.block_on(serve(SocketAddr::new(host, port), api)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
