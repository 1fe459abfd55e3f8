use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{EntailmentOracle, EntailmentQuery, OracleError, Verdict};

/// Environment variable holding the bearer token for the remote judge.
pub const TOKEN_ENV: &str = "ALIICE_ORACLE_TOKEN";

#[derive(Serialize)]
struct JudgeRequest<'a> {
    premise: &'a str,
    hypothesis: &'a str,
}

#[derive(Deserialize)]
struct JudgeResponse {
    entailed: bool,
}

/// Client for an NLI service answering `POST {endpoint}/judge`.
pub struct RemoteOracle {
    agent: ureq::Agent,
    url: String,
    token: Option<String>,
    retries: u32,
}

impl RemoteOracle {
    pub fn new(endpoint: &str, timeout_secs: u64, retries: u32, token: Option<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(timeout_secs.max(1))))
            .build();
        RemoteOracle {
            agent: config.into(),
            url: format!("{}/judge", endpoint.trim_end_matches('/')),
            token,
            retries,
        }
    }

    fn call(&self, query: &EntailmentQuery) -> Result<bool, ureq::Error> {
        let mut req = self.agent.post(&self.url);
        if let Some(token) = &self.token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let resp = req.send_json(JudgeRequest {
            premise: &query.premise,
            hypothesis: &query.hypothesis,
        })?;
        let body: JudgeResponse = resp.into_body().read_json()?;
        Ok(body.entailed)
    }
}

impl EntailmentOracle for RemoteOracle {
    fn judge(&self, query: &EntailmentQuery) -> Result<Verdict, OracleError> {
        let attempts = self.retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            match self.call(query) {
                Ok(v) => return Ok(v.into()),
                Err(e) => {
                    log::warn!("judge request {} of {attempts} failed: {e}", attempt + 1);
                    last = e.to_string();
                    if attempt + 1 < attempts {
                        std::thread::sleep(Duration::from_millis(100 << attempt.min(6)));
                    }
                }
            }
        }
        Err(OracleError::Unavailable { attempts, message: last })
    }
}

/// Caps the number of concurrent calls into the wrapped oracle.
pub struct Throttled<O> {
    inner: O,
    limit: usize,
    in_flight: Mutex<usize>,
    freed: Condvar,
    peak: AtomicUsize,
}

impl<O> Throttled<O> {
    pub fn new(inner: O, limit: usize) -> Self {
        Throttled {
            inner,
            limit: limit.max(1),
            in_flight: Mutex::new(0),
            freed: Condvar::new(),
            peak: AtomicUsize::new(0),
        }
    }

    /// Highest number of simultaneous calls observed so far.
    pub fn peak(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }
}

impl<O: EntailmentOracle> EntailmentOracle for Throttled<O> {
    fn judge(&self, query: &EntailmentQuery) -> Result<Verdict, OracleError> {
        {
            let mut n = self.in_flight.lock().unwrap();
            while *n >= self.limit {
                n = self.freed.wait(n).unwrap();
            }
            *n += 1;
            self.peak.fetch_max(*n, Ordering::SeqCst);
        }
        let result = self.inner.judge(query);
        *self.in_flight.lock().unwrap() -= 1;
        self.freed.notify_one();
        result
    }
}
