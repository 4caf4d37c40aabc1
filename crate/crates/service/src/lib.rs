//! HTTP advisor: live deadline sessions plus the analysis endpoints.

mod error;
mod input;
mod state;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use stakewise_core::horizon::auto_mode;
use stakewise_core::report::{self, AnalyzeOptions, Measure};
use stakewise_core::search::{best_bk, kelly_contest, SearchOptions};
use stakewise_core::simulate::{monte_carlo, simulate_game, Policy, Round, SimGame};
use num::{One, Signed};
use stakewise_core::{GameSpec, ModeChoice, NumericMode, Rational};

pub use error::{ApiError, ApiResult};
pub use state::{AppState, Session};

use input::Body;

/// Largest batch accepted by `/api/simulate`.
pub const MAX_GAMES: usize = 10_000_000;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(get_session))
        .route("/api/session/{id}/outcome", post(record_outcome))
        .route("/api/session/{id}/options", get(stake_options))
        .route("/api/analyze", post(analyze))
        .route("/api/search/bk", post(search_bk))
        .route("/api/kelly-contest", post(contest))
        .route("/api/simulate", post(simulate))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, snapshot: Option<PathBuf>) -> std::io::Result<()> {
    let state = AppState::new(snapshot)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

type Reply = ApiResult<Json<Value>>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

fn resolve_mode(choice: ModeChoice, spec: &GameSpec, horizon: usize) -> NumericMode {
    choice.resolve(|| auto_mode(spec, horizon))
}

async fn create_session(State(st): State<Arc<AppState>>, Json(body): Json<Value>) -> ApiResult<(StatusCode, Json<Value>)> {
    let b = Body::new(&body)?;
    let spec = b.spec()?;
    let horizon = b.horizon("T")?;
    let capital = b.capital(&spec)?;
    let mode = resolve_mode(b.mode()?, &spec, horizon);
    let sig = b.sig_digits()?;
    let table = st.table(&spec, horizon, mode).await?;
    let session = Session {
        id: uuid::Uuid::new_v4().to_string(),
        p: spec.p().clone(),
        goal: spec.goal(),
        horizon,
        capital,
        rounds_played: 0,
        mode,
        history: Vec::new(),
    };
    st.persist(&session).await?;
    let view = session.view(table.as_ref(), sig);
    st.insert(session);
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Reply {
    let handle = st.session(&id)?;
    let s = handle.lock().await;
    let table = st.table(&s.spec(), s.horizon, s.mode).await?;
    Ok(Json(s.view(table.as_ref(), report::DEFAULT_SIG_DIGITS)))
}

async fn record_outcome(State(st): State<Arc<AppState>>, Path(id): Path<String>, Json(body): Json<Value>) -> Reply {
    let b = Body::new(&body)?;
    let won = match b.text("result")? {
        "win" => true,
        "lose" => false,
        other => return Err(ApiError::invalid("result", format!("result must be win or lose, got {other:?}"))),
    };
    let handle = st.session(&id)?;
    let mut s = handle.lock().await;
    if let Some(exit) = s.status() {
        return Err(ApiError::conflict(format!("session {id} has ended: {exit:?}")));
    }
    let spec = s.spec();
    let table = st.table(&spec, s.horizon, s.mode).await?;
    let bound = spec.max_stake(s.capital);
    let stake = match b.opt_count("stake")? {
        Some(x) if x < 1 || x > bound => {
            return Err(ApiError::invalid(
                "stake",
                format!("stake {x} at capital {} outside 1..={bound}", s.capital),
            ))
        }
        Some(x) => x,
        None => table.stake(s.capital, s.remaining()).expect("active session"),
    };
    let capital = s.capital;
    s.history.push(Round { capital, stake, won });
    s.capital = if won { capital + stake } else { capital - stake };
    s.rounds_played += 1;
    st.persist(&s).await?;
    Ok(Json(s.view(table.as_ref(), report::DEFAULT_SIG_DIGITS)))
}

async fn stake_options(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Reply {
    let handle = st.session(&id)?;
    let s = handle.lock().await;
    if let Some(exit) = s.status() {
        return Err(ApiError::conflict(format!("session {id} has ended: {exit:?}")));
    }
    let table = st.table(&s.spec(), s.horizon, s.mode).await?;
    let sig = report::DEFAULT_SIG_DIGITS;
    let options: Vec<Value> = table
        .options(s.capital, s.remaining())
        .into_iter()
        .map(|(x, v, optimal)| json!({ "stake": x, "survival": report::number(&v, sig), "optimal": optimal }))
        .collect();
    Ok(Json(json!({
        "id": s.id,
        "capital": s.capital,
        "remaining": s.remaining(),
        "survival": report::number(&table.value(s.capital, s.remaining()), sig),
        "options": options,
    })))
}

async fn analyze(Json(body): Json<Value>) -> Reply {
    blocking(move || {
        let b = Body::new(&body)?;
        let spec = b.spec()?;
        let s = b.strategy(spec.goal())?;
        let measure: Measure = b
            .text("measure")?
            .parse()
            .map_err(|e: stakewise_core::Error| ApiError::invalid("measure", e.to_string()))?;
        let mode = match b.mode()? {
            ModeChoice::Auto => NumericMode::Exact,
            other => other.resolve(|| NumericMode::Exact),
        };
        let opts = AnalyzeOptions {
            mode,
            series: b.opt_count("series")?,
            normalized: b.flag("normalized")?,
            sig: b.sig_digits()?,
        };
        Ok(Json(report::analyze(&spec, &s, measure, opts)?))
    })
    .await
}

fn search_options(b: &Body) -> ApiResult<SearchOptions> {
    let mode = match b.mode()? {
        ModeChoice::Auto => NumericMode::Decimal,
        other => other.resolve(|| NumericMode::Decimal),
    };
    Ok(SearchOptions {
        mode,
        verify_exact: !b.has("verify") || b.flag("verify")?,
        keep_grid: b.flag("grid")?,
    })
}

async fn search_bk(Json(body): Json<Value>) -> Reply {
    blocking(move || {
        let b = Body::new(&body)?;
        let spec = b.spec()?;
        let capital = b.capital(&spec)?;
        let horizon = b.opt_horizon("T")?;
        let h = b.rational("resolution")?;
        let opts = search_options(&b)?;
        let sig = b.sig_digits()?;
        let r = best_bk(&spec, capital, horizon, &h, opts).map_err(|e| ApiError::engine("resolution", e))?;
        Ok(Json(report::search(&r, sig)))
    })
    .await
}

async fn contest(Json(body): Json<Value>) -> Reply {
    blocking(move || {
        let b = Body::new(&body)?;
        let spec = b.spec()?;
        let capital = b.capital(&spec)?;
        let h = b.rational("resolution")?;
        let conf = b.rational("conf")?;
        let opts = search_options(&b)?;
        let sig = b.sig_digits()?;
        let field = if conf.is_positive() && conf < Rational::one() {
            "resolution"
        } else {
            "conf"
        };
        let r = kelly_contest(&spec, capital, &h, &conf, opts).map_err(|e| ApiError::engine(field, e))?;
        Ok(Json(report::search(&r, sig)))
    })
    .await
}

async fn simulate(State(st): State<Arc<AppState>>, Json(body): Json<Value>) -> Reply {
    let b = Body::new(&body)?;
    let seed = b.seed("seed")?;
    let p = b.rational("p")?;
    let goal = b.count("N")?;
    let degenerate = b.flag("degenerate")?;
    let game = if degenerate {
        SimGame::degenerate(p.clone(), goal)?
    } else {
        SimGame::new(&GameSpec::new(p.clone(), goal)?)
    };
    let capital = b.count("capital")?;
    if capital == 0 || capital >= goal {
        return Err(ApiError::invalid("capital", format!("capital must lie in 1..={}", goal - 1)));
    }
    let horizon = b.opt_horizon("T")?;
    let policy = if b.has("strategy") && b.text("strategy")? == "optimal" {
        if degenerate {
            return Err(ApiError::invalid("strategy", "optimal play needs 0 < p < 1"));
        }
        let Some(t) = horizon else {
            return Err(ApiError::invalid("T", "optimal play needs a horizon"));
        };
        let spec = GameSpec::new(p, goal)?;
        let mode = resolve_mode(b.mode()?, &spec, t);
        Policy::Optimal(st.table(&spec, t, mode).await?)
    } else {
        Policy::Fixed(b.strategy(goal)?)
    };
    let games = b.opt_count("games")?;
    if let Some(n) = games {
        if n == 0 || n > MAX_GAMES {
            return Err(ApiError::invalid("games", format!("games must lie in 1..={MAX_GAMES}")));
        }
    }
    blocking(move || {
        let v = match games {
            None => json!({ "trajectory": simulate_game(&game, &policy, capital, horizon, seed)? }),
            Some(n) => json!({ "summary": monte_carlo(&game, &policy, capital, horizon, n, seed, true)? }),
        };
        Ok(Json(v))
    })
    .await
}
