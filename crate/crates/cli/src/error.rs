use std::fmt;

use serde_json::json;
use supportive::Error;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    /// An input that an earlier subcommand writes is absent or stale.
    Missing {
        artifact: String,
        producer: &'static str,
        detail: String,
    },
    Data(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Core(Error::Config(_)) => 2,
            CliError::Missing { .. } => 3,
            CliError::Core(Error::Protocol { .. } | Error::Scoring { .. }) => 5,
            CliError::Data(_) | CliError::Core(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "missing-artifact",
            5 => "scorer",
            _ => "data",
        }
    }

    /// One line of JSON for stderr.
    pub fn to_json(&self) -> String {
        let mut v = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Missing {
            artifact, producer, ..
        } = self
        {
            v["artifact"] = json!(artifact);
            v["producer"] = json!(producer);
        }
        v.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Data(m) => f.write_str(m),
            CliError::Missing {
                artifact,
                producer,
                detail,
            } => write!(f, "{artifact} {detail}; run `supportive {producer}` first"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(Error::Config("x".into())).exit_code(), 2);
        let m = CliError::Missing {
            artifact: "scores.tsv".into(),
            producer: "score",
            detail: "is missing".into(),
        };
        assert_eq!(m.exit_code(), 3);
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(v["producer"], "score");
        let p = Error::Protocol {
            scorer: "s".into(),
            detail: "d".into(),
        };
        assert_eq!(CliError::Core(p).exit_code(), 5);
        assert_eq!(
            CliError::Core(Error::InsufficientData("x".into())).exit_code(),
            4
        );
    }
}
