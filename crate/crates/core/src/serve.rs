//! JSON service for interactive sessions: one labelled seed per session,
//! moved by mutations and permutations, with undo and replay checks.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::explore::{explore_seeds, ExploreOptions};
use crate::graph::{Edge, LabelledGraph};
use crate::group::{Generator, GroupElement};
use crate::io::{self, QuiverJson};
use crate::laurent::LaurentError;
use crate::perm::Perm;
use crate::quiver::QuiverError;
use crate::quotient::{self, Relation};
use crate::seed::{LabelledSeed, Limits, SeedError};

/// Seed budget for `classinfo`.
pub const DEFAULT_CLASS_BUDGET: usize = 5_000;
pub const MAX_NEIGHBORHOOD_DEPTH: usize = 6;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }

    fn bad(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<SeedError> for ApiError {
    fn from(e: SeedError) -> Self {
        let status = match e {
            SeedError::Quiver(QuiverError::FrozenVertex(_)) | SeedError::Quiver(QuiverError::MovesFrozen(_)) => {
                StatusCode::CONFLICT
            }
            SeedError::Laurent(LaurentError::TermLimit { .. }) | SeedError::Quiver(QuiverError::Overflow(_)) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// A seed as sent over the wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedView {
    pub quiver: QuiverJson,
    pub cluster: Vec<String>,
    pub digest: String,
    pub rendered: String,
}

impl SeedView {
    pub fn of(s: &LabelledSeed) -> Self {
        SeedView {
            quiver: QuiverJson::from_quiver(s.quiver()),
            cluster: s.cluster().iter().map(|p| p.to_string()).collect(),
            digest: s.digest_hex(),
            rendered: s.render(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub seed: SeedView,
    pub word: String,
    pub history: Vec<String>,
}

struct Session {
    initial: LabelledSeed,
    current: LabelledSeed,
    /// Applied generators with the digest of the seed they produced.
    history: Vec<(Generator, String)>,
    /// Seeds before each step, for undo.
    previous: Vec<LabelledSeed>,
    element: GroupElement,
}

impl Session {
    fn new(seed: LabelledSeed) -> Self {
        let n = seed.rank();
        Session { initial: seed.clone(), current: seed, history: Vec::new(), previous: Vec::new(), element: GroupElement::identity(n) }
    }

    fn apply(&mut self, g: Generator, limits: Limits) -> Result<(), ApiError> {
        let next = self.current.apply_generator(&g, limits)?;
        self.element.push(&g).map_err(|e| ApiError::bad(e.to_string()))?;
        self.history.push((g, next.digest_hex()));
        self.previous.push(std::mem::replace(&mut self.current, next));
        Ok(())
    }

    fn undo(&mut self) -> Result<(), ApiError> {
        let prev = self.previous.pop().ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "nothing to undo"))?;
        self.history.pop();
        self.current = prev;
        let n = self.current.rank();
        self.element = GroupElement::normal_form(n, self.history.iter().map(|(g, _)| g))
            .map_err(|e| ApiError::bad(e.to_string()))?;
        Ok(())
    }

    fn view(&self, id: &str) -> SessionView {
        SessionView {
            id: id.to_string(),
            seed: SeedView::of(&self.current),
            word: self.element.to_string(),
            history: self.history.iter().map(|(g, _)| g.to_string()).collect(),
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<Session>>>>>,
    next_id: Arc<AtomicU64>,
    class_budget: usize,
    limits: Limits,
}

impl Default for AppState {
    fn default() -> Self {
        Self::new(DEFAULT_CLASS_BUDGET)
    }
}

impl AppState {
    pub fn new(class_budget: usize) -> Self {
        AppState {
            sessions: Arc::default(),
            next_id: Arc::new(AtomicU64::new(1)),
            class_budget,
            limits: Limits::default(),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<tokio::sync::Mutex<Session>>, ApiError> {
        self.sessions
            .lock()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown session {id:?}")))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/session", post(create))
        .route("/session/:id", get(show))
        .route("/session/:id/mutate", post(mutate))
        .route("/session/:id/permute", post(permute))
        .route("/session/:id/undo", post(undo))
        .route("/session/:id/word", get(word))
        .route("/session/:id/neighborhood", get(neighborhood))
        .route("/session/:id/classinfo", get(classinfo))
        .route("/session/:id/check", get(check))
        .with_state(state)
}

pub async fn run(port: u16, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    axum::serve(listener, router(state)).await
}

fn parse_body(body: &Value) -> Result<LabelledSeed, ApiError> {
    if let Some(name) = body.get("preset") {
        let name = name.as_str().ok_or_else(|| ApiError::bad("preset must be a string"))?;
        let q = io::preset(name).ok_or_else(|| ApiError::bad(format!("unknown preset {name:?}")))?;
        return Ok(LabelledSeed::initial(q));
    }
    io::parse_json(&body.to_string()).map_err(|e| ApiError::bad(e.to_string()))
}

async fn create(State(st): State<AppState>, Json(body): Json<Value>) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let seed = parse_body(&body)?;
    let id = format!("s{}", st.next_id.fetch_add(1, Ordering::Relaxed));
    let session = Session::new(seed);
    let view = session.view(&id);
    st.sessions.lock().expect("session table poisoned").insert(id, Arc::new(tokio::sync::Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn show(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<SessionView> {
    let s = st.session(&id)?;
    let s = s.lock().await;
    Ok(Json(s.view(&id)))
}

#[derive(Deserialize)]
struct MutateBody {
    vertex: usize,
}

async fn mutate(State(st): State<AppState>, Path(id): Path<String>, Json(body): Json<MutateBody>) -> ApiResult<SessionView> {
    let s = st.session(&id)?;
    let mut s = s.lock().await;
    let n = s.current.rank();
    if body.vertex == 0 || body.vertex > n {
        return Err(ApiError::bad(format!("vertex {} out of range 1..={n}", body.vertex)));
    }
    s.apply(Generator::Mutation(body.vertex - 1), st.limits)?;
    Ok(Json(s.view(&id)))
}

/// `{"perm": "(1 2)"}` in cycle notation, or `{"perm": [2, 1]}` as one-based images.
#[derive(Deserialize)]
struct PermuteBody {
    perm: PermSpec,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PermSpec {
    Cycles(String),
    Images(Vec<usize>),
}

async fn permute(State(st): State<AppState>, Path(id): Path<String>, Json(body): Json<PermuteBody>) -> ApiResult<SessionView> {
    let s = st.session(&id)?;
    let mut s = s.lock().await;
    let n = s.current.rank();
    let p = match body.perm {
        PermSpec::Cycles(text) => Perm::parse(&text, n),
        PermSpec::Images(images) => {
            if images.len() != n || images.contains(&0) {
                return Err(ApiError::bad(format!("expected {n} one-based images")));
            }
            Perm::from_images(images.iter().map(|i| i - 1).collect())
        }
    }
    .map_err(|e| ApiError::bad(e.to_string()))?;
    s.apply(Generator::Permutation(p), st.limits)?;
    Ok(Json(s.view(&id)))
}

async fn undo(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<SessionView> {
    let s = st.session(&id)?;
    let mut s = s.lock().await;
    s.undo()?;
    Ok(Json(s.view(&id)))
}

async fn word(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Value> {
    let s = st.session(&id)?;
    let s = s.lock().await;
    Ok(Json(json!({ "word": s.element.to_string() })))
}

#[derive(Deserialize)]
struct DepthQuery {
    #[serde(default = "one")]
    depth: usize,
}

fn one() -> usize {
    1
}

/// Seeds within `depth` mutations of `s0`, with the mutation edges among
/// them. Vertex 0 is `s0`.
pub fn neighborhood_graph(s0: &LabelledSeed, depth: usize, limits: Limits) -> Result<LabelledGraph, SeedError> {
    let mutable = s0.quiver().mutable_vertices();
    let mut index: HashMap<[u8; 32], usize> = HashMap::from([(s0.digest(), 0)]);
    let mut seeds = vec![(s0.clone(), 0usize)];
    let mut edges = BTreeSet::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        if seeds[v].1 == depth {
            continue;
        }
        for &i in &mutable {
            let t = seeds[v].0.mutate_limited(i, limits)?;
            let w = match index.get(&t.digest()) {
                Some(&w) => w,
                None => {
                    let w = seeds.len();
                    index.insert(t.digest(), w);
                    seeds.push((t, seeds[v].1 + 1));
                    queue.push_back(w);
                    w
                }
            };
            edges.insert(Edge::new(v, w, i + 1));
        }
    }
    let mut g = LabelledGraph::new();
    for (s, _) in &seeds {
        g.add_vertex(s.digest_hex(), s.render());
    }
    g.edges = edges.into_iter().collect();
    Ok(g)
}

async fn neighborhood(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<DepthQuery>,
) -> ApiResult<LabelledGraph> {
    if q.depth > MAX_NEIGHBORHOOD_DEPTH {
        return Err(ApiError::bad(format!("depth {} exceeds {MAX_NEIGHBORHOOD_DEPTH}", q.depth)));
    }
    let seed = st.session(&id)?.lock().await.current.clone();
    let limits = st.limits;
    let g = tokio::task::spawn_blocking(move || neighborhood_graph(&seed, q.depth, limits))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(g))
}

/// Quotient data for the class of `seed`, or `{"status": "unknown"}` when
/// the class does not close within `budget` seeds.
pub fn class_info(seed: &LabelledSeed, budget: usize, limits: Limits) -> Value {
    let ex = match explore_seeds(seed, ExploreOptions { budget, limits }) {
        Ok(ex) if ex.is_closed() => ex,
        _ => return json!({ "status": "unknown", "budget": budget }),
    };
    let mut out = json!({ "status": "closed", "seed_count": ex.len() });
    for rel in [Relation::SameQuiver, Relation::Similar] {
        let Ok((graph, part)) = quotient::quotient_graph(&ex, rel) else {
            return json!({ "status": "unknown", "budget": budget });
        };
        out[rel.to_string()] = json!({
            "classes": part.len(),
            "class_of_current": part.class_of[0],
            "graph": graph,
        });
    }
    out
}

async fn classinfo(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Value> {
    let seed = st.session(&id)?.lock().await.current.clone();
    let (budget, limits) = (st.class_budget, st.limits);
    let info = tokio::task::spawn_blocking(move || class_info(&seed, budget, limits))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(Json(info))
}

/// Replays the session from its initial seed, both step by step and as one
/// normal-form element, and compares with the stored state.
async fn check(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Value> {
    let s = st.session(&id)?;
    let s = s.lock().await;
    let folded = s.initial.apply_limited(&s.element, st.limits)?;
    let mut stepwise = s.initial.clone();
    let mut digests_match = true;
    for (g, digest) in &s.history {
        stepwise = stepwise.apply_generator(g, st.limits)?;
        digests_match &= stepwise.digest_hex() == *digest;
    }
    let word = GroupElement::normal_form(s.initial.rank(), s.history.iter().map(|(g, _)| g))
        .map_err(|e| ApiError::bad(e.to_string()))?;
    let consistent = folded == s.current && stepwise == s.current && digests_match && word == s.element;
    Ok(Json(json!({
        "consistent": consistent,
        "word": s.element.to_string(),
        "steps": s.history.len(),
    })))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighborhood_of_a2() {
        let s = LabelledSeed::initial(io::preset("A2").unwrap());
        let g = neighborhood_graph(&s, 1, Limits::default()).unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 2);
        let g = neighborhood_graph(&s, 5, Limits::default()).unwrap();
        assert_eq!(g.num_vertices(), 10);
        assert!(g.is_regular(&[1, 2]));
        assert_eq!(neighborhood_graph(&s, 0, Limits::default()).unwrap().num_vertices(), 1);
    }

    #[test]
    fn class_info_closes_for_a2() {
        let s = LabelledSeed::initial(io::preset("A2").unwrap());
        let info = class_info(&s, 1000, Limits::default());
        assert_eq!(info["status"], "closed");
        assert_eq!(info["seed_count"], 10);
        assert_eq!(info["same-quiver"]["classes"], 2);
        let m = LabelledSeed::initial(io::preset("markov3").unwrap());
        assert_eq!(class_info(&m, 50, Limits::default())["status"], "unknown");
    }
}
