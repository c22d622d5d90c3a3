//! Append-only JSON-lines persistence, one file per session.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use capt_core::analysis::AttemptAnalysis;
use capt_core::stats::PairedSample;
use serde::{Deserialize, Serialize};

use crate::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Audio,
    Phonemes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub sentence_id: String,
    pub input_kind: InputKind,
    #[serde(flatten)]
    pub analysis: AttemptAnalysis,
    /// Unix time in milliseconds.
    pub created_at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    #[serde(flatten)]
    pub sample: PairedSample,
    pub created_at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub created_at: u64,
    pub attempts: Vec<AttemptRecord>,
    pub ratings: Vec<RatingRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum Event {
    Created { session_id: String, created_at: u64 },
    Attempt(AttemptRecord),
    Rating(RatingRecord),
}

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Session ids are client-chosen; they become file names, so only a safe
/// alphabet is accepted.
pub fn valid_session_id(id: &str) -> bool {
    (1..=64).contains(&id.len()) && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

struct Slot {
    session: Session,
    path: PathBuf,
}

/// In-memory view of all sessions backed by their files. Each session has
/// its own lock, so writes to one file are serialized while different
/// sessions proceed independently.
pub struct SessionStore {
    dir: PathBuf,
    sessions: Mutex<BTreeMap<String, Arc<Mutex<Slot>>>>,
}

impl SessionStore {
    /// Opens `dir`, creating it if needed, and replays every session file.
    /// A final line without its newline was never acknowledged and is
    /// ignored.
    pub fn open(dir: &Path) -> Result<Self, ServiceError> {
        std::fs::create_dir_all(dir).map_err(|e| ServiceError::Store(format!("{}: {e}", dir.display())))?;
        let mut sessions = BTreeMap::new();
        let entries = std::fs::read_dir(dir).map_err(|e| ServiceError::Store(format!("{}: {e}", dir.display())))?;
        for entry in entries {
            let path = entry.map_err(|e| ServiceError::Store(e.to_string()))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
                continue;
            }
            let session = replay(&path)?;
            sessions.insert(session.session_id.clone(), Arc::new(Mutex::new(Slot { session, path })));
        }
        Ok(SessionStore { dir: dir.to_path_buf(), sessions: Mutex::new(sessions) })
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>, ServiceError> {
        let mut map = self.sessions.lock().expect("store lock");
        if let Some(s) = map.get(id) {
            return Ok(s.clone());
        }
        let path = self.dir.join(format!("{id}.jsonl"));
        let created_at = now_ms();
        append_line(&path, &Event::Created { session_id: id.to_string(), created_at })?;
        let slot = Arc::new(Mutex::new(Slot {
            session: Session { session_id: id.to_string(), created_at, attempts: Vec::new(), ratings: Vec::new() },
            path,
        }));
        map.insert(id.to_string(), slot.clone());
        Ok(slot)
    }

    /// Persists the attempt (fsync'd) before returning it.
    pub fn add_attempt(&self, id: &str, record: AttemptRecord) -> Result<AttemptRecord, ServiceError> {
        let slot = self.slot(id)?;
        let mut slot = slot.lock().expect("session lock");
        let event = Event::Attempt(record);
        append_line(&slot.path, &event)?;
        let Event::Attempt(record) = event else { unreachable!() };
        slot.session.attempts.push(record.clone());
        Ok(record)
    }

    pub fn add_rating(&self, id: &str, record: RatingRecord) -> Result<RatingRecord, ServiceError> {
        let slot = self.slot(id)?;
        let mut slot = slot.lock().expect("session lock");
        let event = Event::Rating(record);
        append_line(&slot.path, &event)?;
        let Event::Rating(record) = event else { unreachable!() };
        slot.session.ratings.push(record.clone());
        Ok(record)
    }

    pub fn session(&self, id: &str) -> Option<Session> {
        let slot = self.sessions.lock().expect("store lock").get(id).cloned()?;
        let s = slot.lock().expect("session lock").session.clone();
        Some(s)
    }

    /// Every stored rating, by session id then in arrival order.
    pub fn all_ratings(&self) -> Vec<PairedSample> {
        let slots: Vec<_> = self.sessions.lock().expect("store lock").values().cloned().collect();
        slots
            .iter()
            .flat_map(|s| s.lock().expect("session lock").session.ratings.iter().map(|r| r.sample.clone()).collect::<Vec<_>>())
            .collect()
    }
}

fn append_line(path: &Path, event: &Event) -> Result<(), ServiceError> {
    let mut line = serde_json::to_vec(event).map_err(|e| ServiceError::Store(e.to_string()))?;
    line.push(b'\n');
    let io = |e: std::io::Error| ServiceError::Store(format!("{}: {e}", path.display()));
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    f.write_all(&line).map_err(io)?;
    f.sync_data().map_err(io)
}

fn replay(path: &Path) -> Result<Session, ServiceError> {
    let text = std::fs::read_to_string(path).map_err(|e| ServiceError::Store(format!("{}: {e}", path.display())))?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    if complete.len() < text.len() {
        tracing::warn!(file = %path.display(), "ignoring unterminated trailing record");
    }
    let mut session: Option<Session> = None;
    for (n, line) in complete.lines().enumerate() {
        let bad = |m: String| ServiceError::Store(format!("{} line {}: {m}", path.display(), n + 1));
        let event: Event = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        match (event, session.as_mut()) {
            (Event::Created { session_id, created_at }, None) => {
                session = Some(Session { session_id, created_at, attempts: Vec::new(), ratings: Vec::new() })
            }
            (Event::Attempt(a), Some(s)) => s.attempts.push(a),
            (Event::Rating(r), Some(s)) => s.ratings.push(r),
            _ => return Err(bad("events out of order".into())),
        }
    }
    session.ok_or_else(|| ServiceError::Store(format!("{} has no session header", path.display())))
}
