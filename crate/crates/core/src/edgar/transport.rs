//! HTTP access behind a small trait so the client can run against fixtures.

use std::time::Duration;

/// What the client needs from one GET.
#[derive(Debug, Clone, Default)]
pub struct Response {
    pub status: u16,
    pub content_length: Option<u64>,
    /// Seconds from a `Retry-After` header.
    pub retry_after: Option<u64>,
    pub body: Vec<u8>,
}

impl Response {
    pub fn ok(body: impl Into<Vec<u8>>) -> Self {
        let body = body.into();
        Response {
            status: 200,
            content_length: Some(body.len() as u64),
            retry_after: None,
            body,
        }
    }

    pub fn status(status: u16) -> Self {
        Response {
            status,
            ..Response::default()
        }
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

pub trait Transport: Send + Sync {
    /// Performs a GET; only connection-level failures are errors, every HTTP
    /// status comes back as a [`Response`].
    fn get(&self, url: &str, headers: &[(&str, &str)]) -> Result<Response, String>;
}

/// Blocking HTTPS transport.
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build();
        HttpTransport {
            agent: config.into(),
        }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        HttpTransport::new(Duration::from_secs(60))
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str, headers: &[(&str, &str)]) -> Result<Response, String> {
        let mut req = self.agent.get(url);
        for (k, v) in headers {
            req = req.header(*k, *v);
        }
        let mut resp = req.call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let header_u64 = |name: &str| {
            resp.headers()
                .get(name)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<u64>().ok())
        };
        // A decoded body no longer matches the wire length.
        let encoded = resp.headers().contains_key("content-encoding");
        let content_length = header_u64("content-length").filter(|_| !encoded);
        let retry_after = header_u64("retry-after");
        let body = resp
            .body_mut()
            .with_config()
            .limit(1 << 30)
            .read_to_vec()
            .map_err(|e| e.to_string())?;
        Ok(Response {
            status,
            content_length,
            retry_after,
            body,
        })
    }
}
