//! Exit-code classification: 1 for invalid input or configuration, 2 for
//! runtime failures.

use std::fmt;

/// Marker for problems the user can fix by changing flags or inputs.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn core_is_invalid(e: &iqa_core::Error) -> bool {
    use iqa_core::Error as E;
    match e {
        E::UnknownDistortion(_)
        | E::LevelOutOfRange(_)
        | E::TooManyLevels { .. }
        | E::DimensionMismatch(_)
        | E::InvalidConfig(_)
        | E::ConfigMismatch { .. }
        | E::ScorerMismatch { .. }
        | E::Manifest { .. }
        | E::UnsupportedVersion { .. } => true,
        E::Entry { source, .. } => core_is_invalid(source),
        _ => false,
    }
}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return 1;
        }
        let core = cause
            .downcast_ref::<iqa_core::Error>()
            .or_else(|| cause.downcast_ref::<Box<iqa_core::Error>>().map(|b| &**b));
        if let Some(e) = core {
            return if core_is_invalid(e) { 1 } else { 2 };
        }
    }
    2
}
