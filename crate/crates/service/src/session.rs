use std::collections::HashMap;
use std::sync::{Arc, RwLock};
use std::time::{Duration, Instant};

use idss_core::pipeline::Compiled;
use uuid::Uuid;

/// A compiled model; never mutated after creation.
#[derive(Debug)]
pub struct Session {
    pub id: Uuid,
    pub compiled: Compiled,
    pub created: Instant,
}

/// In-memory sessions that expire `ttl` after creation.
#[derive(Debug)]
pub struct SessionStore {
    ttl: Duration,
    sessions: RwLock<HashMap<Uuid, Arc<Session>>>,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        SessionStore { ttl, sessions: RwLock::new(HashMap::new()) }
    }

    pub fn insert(&self, compiled: Compiled) -> Arc<Session> {
        let session = Arc::new(Session { id: Uuid::new_v4(), compiled, created: Instant::now() });
        self.sessions.write().expect("session lock").insert(session.id, session.clone());
        session
    }

    pub fn get(&self, id: &Uuid) -> Option<Arc<Session>> {
        let session = self.sessions.read().expect("session lock").get(id).cloned()?;
        if session.created.elapsed() >= self.ttl {
            self.sessions.write().expect("session lock").remove(id);
            return None;
        }
        Some(session)
    }

    /// Drops expired sessions; returns how many were removed.
    pub fn purge(&self) -> usize {
        let mut map = self.sessions.write().expect("session lock");
        let before = map.len();
        map.retain(|_, s| s.created.elapsed() < self.ttl);
        before - map.len()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
