use alloc::boxed::Box;
use alloc::string::String;

use crate::ids::{LinkId, NodeId, UeId};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration field failed validation. `field` is the dotted
    /// config path (`traffic.mean_holding_s`) so callers can map it back to
    /// a source line.
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cluster-head must be MEC-enabled")]
    PassiveClusterHead,

    #[error("cluster member {0} is not a flying radio head")]
    NotFlyingMember(NodeId),

    #[error("{members} members exceed the extended-star capacity of {capacity}")]
    ClusterTooLarge { members: usize, capacity: usize },

    #[error("route is disconnected at link {0}")]
    Routing(LinkId),

    #[error("link {0} has no usable rate")]
    DropNoLink(LinkId),

    #[error("no processing site reachable")]
    DropNoProcessor,

    #[error("{0} released twice or never admitted")]
    DoubleRelease(UeId),

    #[error("consistency violation at event seq {seq}: {reason}")]
    Consistency { seq: u64, reason: String },

    #[error("run failed at load point {point} seed {seed}: {source}")]
    Sweep {
        point: u32,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(reason: impl Into<String>) -> Self {
        Error::Domain(reason.into())
    }
}
