use std::sync::Arc;

use codehelp_core::llm::PriceTable;
use codehelp_core::lti::LaunchVerifier;
use codehelp_core::registry::Registry;
use codehelp_core::session::SessionKeys;
use codehelp_core::Pipeline;

use crate::error::ApiError;

/// Shared, cheaply cloneable handle to everything a request may touch.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    registry: Arc<Registry>,
    pipeline: Pipeline,
    sessions: SessionKeys,
    lti: Option<Arc<LaunchVerifier>>,
    dev_login: bool,
    secure_cookies: bool,
    prices: PriceTable,
}

impl AppState {
    pub fn new(registry: Registry, pipeline: Pipeline, sessions: SessionKeys) -> Self {
        Self {
            inner: Arc::new(Inner {
                registry: Arc::new(registry),
                pipeline,
                sessions,
                lti: None,
                dev_login: false,
                secure_cookies: false,
                prices: PriceTable::june_2023(),
            }),
        }
    }

    fn edit(mut self, f: impl FnOnce(&mut Inner)) -> Self {
        f(Arc::get_mut(&mut self.inner).expect("state is configured before it is shared"));
        self
    }

    pub fn with_lti(self, verifier: LaunchVerifier) -> Self {
        self.edit(|i| i.lti = Some(Arc::new(verifier)))
    }

    pub fn with_dev_login(self, enabled: bool) -> Self {
        self.edit(|i| i.dev_login = enabled)
    }

    pub fn with_secure_cookies(self, secure: bool) -> Self {
        self.edit(|i| i.secure_cookies = secure)
    }

    pub fn with_prices(self, prices: PriceTable) -> Self {
        self.edit(|i| i.prices = prices)
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.inner.registry
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.inner.pipeline
    }

    pub fn sessions(&self) -> &SessionKeys {
        &self.inner.sessions
    }

    pub fn lti(&self) -> Option<&Arc<LaunchVerifier>> {
        self.inner.lti.as_ref()
    }

    pub fn dev_login(&self) -> bool {
        self.inner.dev_login
    }

    pub fn secure_cookies(&self) -> bool {
        self.inner.secure_cookies
    }

    pub fn prices(&self) -> &PriceTable {
        &self.inner.prices
    }

    /// Runs a registry call on the blocking pool.
    pub async fn with_registry<T, F>(&self, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&Registry) -> Result<T, ApiError> + Send + 'static,
    {
        let registry = self.inner.registry.clone();
        tokio::task::spawn_blocking(move || f(&registry))
            .await
            .map_err(|e| {
                tracing::error!(error = %e, "registry task panicked");
                ApiError::backend_failure("the query store is unavailable")
            })?
    }
}
