//! JSON-over-HTTP backends. Each service takes a POST with a JSON body and
//! answers with JSON; credentials come from a bearer token held in an
//! environment variable.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{
    BackendError, GenerationBackend, GenerationRequest, GenerationResult, NerBackend, NerEntity, NerResponse,
    TranslationBackend, TranslationRequest, TranslationResult,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub url: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub token_env: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    60
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>) -> Self {
        EndpointConfig { url: url.into(), token_env: None, timeout_secs: default_timeout_secs() }
    }
}

pub struct HttpClient {
    config: EndpointConfig,
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(config: EndpointConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpClient { config, agent }
    }

    fn token(&self) -> Result<Option<String>, BackendError> {
        match &self.config.token_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| BackendError::MissingToken(var.clone())),
        }
    }

    pub fn post_json<Req: Serialize, Resp: DeserializeOwned>(&self, body: &Req) -> Result<Resp, BackendError> {
        let mut request = self.agent.post(&self.config.url);
        if let Some(token) = self.token()? {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request
            .send_json(body)
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            let message = response.body_mut().read_to_string().unwrap_or_default();
            return Err(BackendError::Status { status, message });
        }
        response
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Status { status, message: format!("invalid response body: {e}") })
    }
}

pub struct HttpTranslator(pub HttpClient);

impl HttpTranslator {
    pub fn new(config: EndpointConfig) -> Self {
        HttpTranslator(HttpClient::new(config))
    }
}

impl TranslationBackend for HttpTranslator {
    fn translate(&self, request: &TranslationRequest) -> Result<TranslationResult, BackendError> {
        self.0.post_json(request)
    }
}

pub struct HttpGenerator(pub HttpClient);

impl HttpGenerator {
    pub fn new(config: EndpointConfig) -> Self {
        HttpGenerator(HttpClient::new(config))
    }
}

impl GenerationBackend for HttpGenerator {
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult, BackendError> {
        self.0.post_json(request)
    }
}

pub struct HttpNer(pub HttpClient);

impl HttpNer {
    pub fn new(config: EndpointConfig) -> Self {
        HttpNer(HttpClient::new(config))
    }
}

#[derive(Serialize)]
struct NerRequest<'a> {
    text: &'a str,
}

impl NerBackend for HttpNer {
    fn entities(&self, text: &str) -> Result<Vec<NerEntity>, BackendError> {
        let response: NerResponse = self.0.post_json(&NerRequest { text })?;
        Ok(response.entities)
    }
}
