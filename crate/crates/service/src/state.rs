//! Shared server state: live sessions, the table cache and snapshots.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;

use stakewise_core::horizon::{build_table_dyn, DeadlineTable};
use stakewise_core::numeric::rational::ratio_serde;
use stakewise_core::report;
use stakewise_core::simulate::{Exit, Round};
use stakewise_core::{GameSpec, NumericMode, Rational};

use crate::error::{ApiError, ApiResult};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    #[serde(with = "ratio_serde")]
    pub p: Rational,
    #[serde(rename = "N")]
    pub goal: usize,
    /// Rounds allowed when the session was created.
    pub horizon: usize,
    pub capital: usize,
    pub rounds_played: usize,
    pub mode: NumericMode,
    pub history: Vec<Round>,
}

impl Session {
    pub fn spec(&self) -> GameSpec {
        GameSpec::new(self.p.clone(), self.goal).expect("validated at creation")
    }

    pub fn remaining(&self) -> usize {
        self.horizon - self.rounds_played
    }

    pub fn status(&self) -> Option<Exit> {
        if self.capital == self.goal {
            Some(Exit::Winner)
        } else if self.capital == 0 {
            Some(Exit::Loser)
        } else if self.remaining() == 0 {
            Some(Exit::DeadlineExpired)
        } else {
            None
        }
    }

    pub fn view(&self, table: &dyn DeadlineTable, sig: usize) -> Value {
        let remaining = self.remaining();
        let status = self.status();
        let recommendation = match status {
            None => {
                let stake = table.stake(self.capital, remaining).expect("active session");
                json!({ "stake": stake, "survival": report::number(&table.value(self.capital, remaining), sig) })
            }
            Some(_) => Value::Null,
        };
        let mut warnings = Vec::new();
        if !self.spec().is_superfair() {
            warnings.push("p is below 1/2: the house has the edge");
        }
        json!({
            "id": self.id,
            "spec": report::spec(&self.spec()),
            "horizon": self.horizon,
            "remaining": remaining,
            "capital": self.capital,
            "rounds_played": self.rounds_played,
            "status": match status {
                None => "active",
                Some(Exit::Winner) => "winner",
                Some(Exit::Loser) => "loser",
                Some(Exit::DeadlineExpired) => "deadline_expired",
            },
            "terminal": status.is_some(),
            "recommendation": recommendation,
            "survival": report::number(&table.value(self.capital, remaining), sig),
            "numeric": report::mode_meta(table.mode()),
            "warnings": warnings,
            "history": self.history,
        })
    }
}

type TableKey = (Rational, usize, NumericMode);

pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    tables: RwLock<HashMap<TableKey, Arc<dyn DeadlineTable>>>,
    snapshot_path: Option<PathBuf>,
    snapshot: Mutex<HashMap<String, Session>>,
}

impl AppState {
    pub fn new(snapshot_path: Option<PathBuf>) -> std::io::Result<Arc<Self>> {
        let mut restored = HashMap::new();
        if let Some(path) = &snapshot_path {
            if path.exists() {
                let text = std::fs::read_to_string(path)?;
                let list: Vec<Session> = serde_json::from_str(&text)
                    .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
                for s in list {
                    restored.insert(s.id.clone(), s);
                }
            }
        }
        let sessions = restored
            .values()
            .map(|s| (s.id.clone(), Arc::new(Mutex::new(s.clone()))))
            .collect();
        Ok(Arc::new(AppState {
            sessions: RwLock::new(sessions),
            tables: RwLock::new(HashMap::new()),
            snapshot_path,
            snapshot: Mutex::new(restored),
        }))
    }

    pub fn session(&self, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    pub fn insert(&self, s: Session) -> Arc<Mutex<Session>> {
        let handle = Arc::new(Mutex::new(s.clone()));
        self.sessions
            .write()
            .expect("session map lock")
            .insert(s.id, handle.clone());
        handle
    }

    /// Deadline table for `spec` covering at least `horizon` rounds. Tables
    /// are cached per game and backend and grown when a longer horizon is
    /// requested.
    pub async fn table(&self, spec: &GameSpec, horizon: usize, mode: NumericMode) -> ApiResult<Arc<dyn DeadlineTable>> {
        let key = (spec.p().clone(), spec.goal(), mode);
        if let Some(t) = self.tables.read().expect("table cache lock").get(&key) {
            if t.horizon() >= horizon {
                return Ok(t.clone());
            }
        }
        let owned = spec.clone();
        let table = tokio::task::spawn_blocking(move || build_table_dyn(&owned, horizon, mode))
            .await
            .map_err(|e| ApiError::internal(e.to_string()))??;
        let mut cache = self.tables.write().expect("table cache lock");
        let entry = cache.entry(key).or_insert_with(|| table.clone());
        if entry.horizon() < table.horizon() {
            *entry = table;
        }
        Ok(entry.clone())
    }

    /// Records the session's new state and rewrites the snapshot file.
    pub async fn persist(&self, s: &Session) -> ApiResult<()> {
        let mut snap = self.snapshot.lock().await;
        snap.insert(s.id.clone(), s.clone());
        if let Some(path) = &self.snapshot_path {
            let mut list: Vec<&Session> = snap.values().collect();
            list.sort_by(|a, b| a.id.cmp(&b.id));
            let text = serde_json::to_string_pretty(&list).map_err(|e| ApiError::internal(e.to_string()))?;
            write_atomic(path, &text).map_err(|e| ApiError::internal(format!("snapshot: {e}")))?;
        }
        Ok(())
    }
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(tmp, path)
}
