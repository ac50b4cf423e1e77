use std::fmt;

use conformal_core::MapError;

/// Process exit statuses. Stable for scripting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Config = 2,
    Numeric = 3,
    Invariant = 4,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// An error together with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Self { exit: Exit::Config, error: error.into() }
    }

    pub fn msg(exit: Exit, message: impl fmt::Display) -> Self {
        Self { exit, error: anyhow::anyhow!("{message}") }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub fn classify(e: &MapError) -> Exit {
    match e {
        MapError::InvalidInput(_)
        | MapError::Resolution(_)
        | MapError::OutOfRange { .. }
        | MapError::OutsideTrustedRegion { .. } => Exit::Config,
        MapError::Boundary(_) => Exit::Invariant,
        _ => Exit::Numeric,
    }
}

/// Tags a library error with the module it came from.
pub trait Stage<T> {
    fn stage(self, module: &str) -> Result<T, Failure>;
}

impl<T> Stage<T> for conformal_core::Result<T> {
    fn stage(self, module: &str) -> Result<T, Failure> {
        self.map_err(|e| Failure { exit: classify(&e), error: anyhow::Error::new(e).context(format!("[{module}]")) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_carry_module_tag_and_code() {
        let r: conformal_core::Result<()> = Err(MapError::Resolution("too coarse".into()));
        let f = r.stage("fredholm").unwrap_err();
        assert_eq!(f.exit, Exit::Config);
        assert_eq!(f.to_string(), "[fredholm]: resolution guard violated: too coarse");
    }

    #[test]
    fn numeric_and_invariant_classes() {
        assert_eq!(classify(&MapError::Singular { condition: 1e13, diagnostics: String::new() }), Exit::Numeric);
        assert_eq!(classify(&MapError::FoldNotLocalizable { t0: 1.0 }), Exit::Numeric);
        assert_eq!(classify(&MapError::Boundary("loop".into())), Exit::Invariant);
    }
}
