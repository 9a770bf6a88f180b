//! Transport-independent request handling for the station API.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | GET | `/vehicles` | |
//! | GET | `/vehicles/{id}/track` | `from`, `to` (unix s, inclusive) |
//! | GET | `/vehicles/{id}/readings/{kind}` | `from`, `to` |
//! | GET | `/vehicles/{id}/latest` | |
//! | GET | `/vehicles/{id}/outbox` | |
//! | GET | `/vehicles/{id}/missions` | |
//! | POST | `/vehicles/{id}/mission` | `[{"hour","lat","lon"}, …]` |
//! | POST | `/vehicles/{id}/frames` | raw frame bytes, or `{"frame": "<hex>"}` |
//!
//! Errors carry `{"code", "detail"}` with code one of `bad_request`,
//! `not_found`, `conflict`, `payload_too_large`.

use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::store::{MissionWaypoint, StationStore, StoreError};
use crate::sensors::SensorKind;

pub const MAX_BODY_BYTES: usize = 64 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiErrorCode {
    BadRequest,
    NotFound,
    Conflict,
    PayloadTooLarge,
}

impl ApiErrorCode {
    pub fn status(self) -> u16 {
        match self {
            ApiErrorCode::BadRequest => 400,
            ApiErrorCode::NotFound => 404,
            ApiErrorCode::Conflict => 409,
            ApiErrorCode::PayloadTooLarge => 413,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ApiErrorCode,
    pub detail: String,
}

impl ApiError {
    fn new(code: ApiErrorCode, detail: impl Into<String>) -> Self {
        Self {
            code,
            detail: detail.into(),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let code = match &e {
            StoreError::BadRequest(_) => ApiErrorCode::BadRequest,
            StoreError::NotFound(_) => ApiErrorCode::NotFound,
            StoreError::Conflict(_) => ApiErrorCode::Conflict,
            StoreError::PayloadTooLarge(_) => ApiErrorCode::PayloadTooLarge,
            // storage failures are reported as conflicts: the request was
            // well formed but could not be committed
            StoreError::Io { .. } | StoreError::Journal { .. } => ApiErrorCode::Conflict,
        };
        ApiError::new(code, e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiResponse {
    pub status: u16,
    pub body: String,
}

impl ApiResponse {
    fn ok(status: u16, value: serde_json::Value) -> Self {
        Self {
            status,
            body: serde_json::to_string(&value).expect("json values serialize"),
        }
    }

    fn error(e: ApiError) -> Self {
        Self {
            status: e.code.status(),
            body: serde_json::to_string(&e).expect("errors serialize"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Get,
    Post,
    Other,
}

impl Method {
    pub fn parse(s: &str) -> Self {
        match s {
            "GET" => Method::Get,
            "POST" => Method::Post,
            _ => Method::Other,
        }
    }
}

pub struct Request<'a> {
    pub method: Method,
    pub path: &'a str,
    pub query: Option<&'a str>,
    pub content_type: Option<&'a str>,
    pub body: &'a [u8],
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MissionBody {
    List(Vec<MissionWaypoint>),
    Wrapped { waypoints: Vec<MissionWaypoint> },
}

#[derive(Deserialize)]
struct FrameBody {
    frame: String,
}

/// Shared store plus the fixed parameters the handlers need.
pub struct StationApi {
    store: RwLock<StationStore>,
    downlink_mtu: usize,
}

fn range(query: Option<&str>) -> Result<(u32, u32), ApiError> {
    let mut from = 0u32;
    let mut to = u32::MAX;
    for pair in query.unwrap_or("").split('&').filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
        let parse = |v: &str| {
            v.parse::<u32>()
                .map_err(|_| ApiError::new(ApiErrorCode::BadRequest, format!("{k} must be unix seconds, got {v:?}")))
        };
        match k {
            "from" => from = parse(v)?,
            "to" => to = parse(v)?,
            _ => {}
        }
    }
    if from > to {
        return Err(ApiError::new(ApiErrorCode::BadRequest, format!("from {from} is after to {to}")));
    }
    Ok((from, to))
}

impl StationApi {
    pub fn new(store: StationStore, downlink_mtu: usize) -> Self {
        Self {
            store: RwLock::new(store),
            downlink_mtu,
        }
    }

    pub fn store(&self) -> &RwLock<StationStore> {
        &self.store
    }

    /// Serves one request. `now` stamps new missions and acks.
    pub fn handle(&self, req: &Request<'_>, now: u32) -> ApiResponse {
        match self.route(req, now) {
            Ok(r) => r,
            Err(e) => ApiResponse::error(e),
        }
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, StationStore> {
        self.store.read().unwrap_or_else(|p| p.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, StationStore> {
        self.store.write().unwrap_or_else(|p| p.into_inner())
    }

    fn route(&self, req: &Request<'_>, now: u32) -> Result<ApiResponse, ApiError> {
        if req.body.len() > MAX_BODY_BYTES {
            return Err(ApiError::new(
                ApiErrorCode::PayloadTooLarge,
                format!("body exceeds {MAX_BODY_BYTES} bytes"),
            ));
        }
        let segments: Vec<&str> = req.path.trim_matches('/').split('/').collect();
        let not_found = || ApiError::new(ApiErrorCode::NotFound, format!("no route for {}", req.path));
        match (req.method, segments.as_slice()) {
            (Method::Get, ["health"]) => Ok(ApiResponse::ok(200, json!({"status": "ok"}))),
            (Method::Get, ["vehicles"]) => {
                let store = self.read();
                let ids: Vec<&str> = store.vehicle_ids().collect();
                Ok(ApiResponse::ok(200, json!({ "vehicles": ids })))
            }
            (Method::Get, ["vehicles", id, "track"]) => {
                let (from, to) = range(req.query)?;
                let track = self.read().query_track(id, from, to)?;
                Ok(ApiResponse::ok(200, json!({ "vehicle": id, "track": track })))
            }
            (Method::Get, ["vehicles", id, "readings", kind]) => {
                let k = SensorKind::from_name(kind)
                    .ok_or_else(|| ApiError::new(ApiErrorCode::BadRequest, format!("unknown reading kind {kind:?}")))?;
                let (from, to) = range(req.query)?;
                let readings = self.read().query_readings(id, k, from, to)?;
                Ok(ApiResponse::ok(
                    200,
                    json!({ "vehicle": id, "kind": kind, "unit": k.unit(), "readings": readings }),
                ))
            }
            (Method::Get, ["vehicles", id, "latest"]) => {
                let store = self.read();
                let latest = store.latest(id)?;
                Ok(ApiResponse::ok(200, json!({ "vehicle": id, "latest": latest })))
            }
            (Method::Get, ["vehicles", id, "outbox"]) => {
                let store = self.read();
                let outbox = store.outbox(id)?;
                Ok(ApiResponse::ok(200, json!({ "vehicle": id, "outbox": outbox })))
            }
            (Method::Get, ["vehicles", id, "missions"]) => {
                let store = self.read();
                let missions = store.missions(id)?;
                Ok(ApiResponse::ok(200, json!({ "vehicle": id, "missions": missions })))
            }
            (Method::Post, ["vehicles", id, "mission"]) => {
                let body: MissionBody = serde_json::from_slice(req.body)
                    .map_err(|e| ApiError::new(ApiErrorCode::BadRequest, format!("mission body: {e}")))?;
                let waypoints = match body {
                    MissionBody::List(w) | MissionBody::Wrapped { waypoints: w } => w,
                };
                let version = self.write().post_mission(id, &waypoints, now, self.downlink_mtu)?;
                Ok(ApiResponse::ok(201, json!({ "vehicle": id, "version": version })))
            }
            (Method::Post, ["vehicles", id, "frames"]) => {
                let bytes = if req.content_type.is_some_and(|c| c.starts_with("application/octet-stream")) {
                    req.body.to_vec()
                } else {
                    let b: FrameBody = serde_json::from_slice(req.body)
                        .map_err(|e| ApiError::new(ApiErrorCode::BadRequest, format!("frame body: {e}")))?;
                    hex::decode(b.frame.trim())
                        .map_err(|e| ApiError::new(ApiErrorCode::BadRequest, format!("frame hex: {e}")))?
                };
                let outcome = self.write().ingest_bytes(id, &bytes, now as f64)?;
                let status = match outcome {
                    super::store::IngestOutcome::Inserted => 201,
                    super::store::IngestOutcome::Duplicate => 200,
                };
                Ok(ApiResponse::ok(status, json!({ "vehicle": id, "outcome": outcome })))
            }
            (Method::Get | Method::Post, _) => Err(not_found()),
            (Method::Other, _) => Err(ApiError::new(ApiErrorCode::BadRequest, "unsupported method")),
        }
    }
}
