use thiserror::Error;

use crate::lattice::{Rect, Site};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("column {column} outside column set range [{lo}, {hi}]")]
    ColumnOutOfRange { column: i64, lo: i64, hi: i64 },

    #[error("site ({}, {}) outside region {region}", .site.x, .site.y)]
    SiteOutOfRegion { site: Site, region: Rect },

    #[error("configuration region {have} does not cover required region {need}")]
    RegionTooSmall { have: Rect, need: Rect },

    #[error("sites ({}, {}) and ({}, {}) are not nearest neighbours", .0.x, .0.y, .1.x, .1.y)]
    NotAnEdge(Site, Site),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("insufficient samples: need at least {need}, got {got}")]
    InsufficientSamples { need: u64, got: u64 },

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error("sample {index} of stream {stream}: {source}")]
    Sample {
        index: u64,
        stream: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(what: &'static str, input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            what,
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{value} is not in [0, 1]")))
    }
}
