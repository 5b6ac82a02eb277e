use serde_json::{json, Map, Value};

/// Exit status for malformed invocations.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for failures inside a well-formed run.
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage {
        message: String,
        field: Option<String>,
    },
    Core(phirg_core::Error),
    Io {
        message: String,
        path: String,
    },
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage {
            message: message.into(),
            field: None,
        }
    }

    pub fn field(field: &str, message: impl Into<String>) -> Self {
        CliError::Usage {
            message: format!("--{field}: {}", message.into()),
            field: Some(field.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => EXIT_USAGE,
            CliError::Core(_) | CliError::Io { .. } => EXIT_COMPUTE,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage { .. } => "usage",
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage { message, .. } | CliError::Io { message, .. } => message.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }

    fn context(&self) -> Map<String, Value> {
        use phirg_core::Error as E;
        let ctx = match self {
            CliError::Usage { field, .. } => match field {
                Some(f) => json!({ "field": f }),
                None => json!({}),
            },
            CliError::Io { path, .. } => json!({ "path": path }),
            CliError::Core(e) => match e {
                E::NonFinite { order, value } => json!({ "order": order, "value": num(*value) }),
                E::OutOfRange { order, min, max } => {
                    json!({ "order": order, "min_order": min, "max_reliable_order": max })
                }
                E::Domain { name, value, .. } => json!({ "name": name, "value": num(*value) }),
                E::Kinematic { rsq } => json!({ "channel": num(*rsq) }),
                E::NoRealFactorization { discriminant } => {
                    json!({ "discriminant": num(*discriminant) })
                }
                E::Gauge(g) => json!({ "gauge": num(*g) }),
                E::InternalConsistency { what, left, right } => {
                    json!({ "what": what, "left": num(*left), "right": num(*right) })
                }
                E::NumericalFailure { mu, value, .. } => {
                    json!({ "last_mu": num(*mu), "last_value": num(*value) })
                }
                E::LandauPole { ln_mu } => json!({ "ln_mu": num(*ln_mu), "mu": num(ln_mu.exp()) }),
                _ => json!({}),
            },
        };
        match ctx {
            Value::Object(m) => m,
            _ => Map::new(),
        }
    }

    /// `{"error": {"kind", "message", "context"}}`.
    pub fn to_json(&self) -> Value {
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.message(),
                "context": Value::Object(self.context()),
            }
        })
    }
}

impl From<phirg_core::Error> for CliError {
    fn from(e: phirg_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Finite floats become JSON numbers; infinities and NaN become null.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}
