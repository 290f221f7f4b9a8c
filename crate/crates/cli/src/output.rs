use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Warn,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Fail => 2,
            Status::Pass | Status::Warn => 0,
        }
    }
}

/// One JSON document per invocation.
#[derive(Debug, Clone, Serialize)]
pub struct CommandResult {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    /// How each output was obtained.
    pub provenance: Vec<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CommandResult {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: Map::new(),
            outputs: Map::new(),
            provenance: Vec::new(),
            status: Status::Pass,
            error: None,
        }
    }

    pub fn input(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.inputs.insert(
            key.to_string(),
            serde_json::to_value(v).expect("serialisable input"),
        );
        self
    }

    pub fn output(&mut self, key: &str, v: Value) -> &mut Self {
        self.outputs.insert(key.to_string(), v);
        self
    }

    pub fn method(&mut self, how: &str) -> &mut Self {
        self.provenance.push(how.to_string());
        self
    }

    pub fn check(&mut self, ok: bool) -> &mut Self {
        if !ok {
            self.status = Status::Fail;
        }
        self
    }

    pub fn warn(&mut self) -> &mut Self {
        if self.status == Status::Pass {
            self.status = Status::Warn;
        }
        self
    }

    pub fn fail(&mut self, message: String) -> &mut Self {
        self.status = Status::Fail;
        self.error = Some(message);
        self
    }
}

/// Rounding-level error for closed-form values.
pub fn rounding(x: f64) -> f64 {
    8.0 * f64::EPSILON * x.abs().max(1.0)
}

pub fn real(value: f64, error: f64) -> Value {
    json!({ "value": value, "error": error })
}

pub fn exact(value: f64) -> Value {
    real(value, rounding(value))
}

pub fn complex(value: C64, error: f64) -> Value {
    json!({ "re": value.re, "im": value.im, "error": error })
}

pub fn exact_complex(value: C64) -> Value {
    complex(value, rounding(value.norm()))
}

/// A check statistic such as a residual or relative gap.
pub fn gap(value: f64) -> Value {
    real(value, rounding(value))
}

pub fn flag(v: bool) -> Value {
    Value::Bool(v)
}
