//! Structured simulator events. The event log is the simulator-native
//! stand-in for packet capture: oracles read it, archives export it as
//! newline-delimited JSON records.

use std::fmt;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::prefix::Prefix;

/// BGP NOTIFICATION error code. Only Cease is ever emitted here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NotificationCode {
    Cease,
}

/// BGP NOTIFICATION error subcode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NotificationSubcode {
    MaxPrefixesReached,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EventKind {
    SessionUp {
        peer: String,
    },
    SessionDown {
        peer: String,
    },
    Notification {
        peer: String,
        code: NotificationCode,
        subcode: NotificationSubcode,
    },
    PrefixAnnounced {
        prefix: Prefix,
        from: String,
    },
    PrefixWithdrawn {
        prefix: Prefix,
        from: String,
    },
    IcmpUnreachable {
        src: String,
        dst: Ipv4Addr,
    },
    ConfigApplied,
    ConfigRejected {
        reason: String,
    },
}

/// A timestamped simulator emission.
///
/// The log is totally ordered: `tick` is the logical phase counter
/// (bumped per config application and per convergence round), `seq` is a
/// strictly increasing emission index that breaks ties deterministically
/// (events within a tick are generated in sorted node order).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkEvent {
    pub tick: u64,
    pub seq: u64,
    pub node: String,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl NetworkEvent {
    pub fn is_notification(&self) -> bool {
        matches!(self.kind, EventKind::Notification { .. })
    }

    pub fn is_config_rejected(&self) -> bool {
        matches!(self.kind, EventKind::ConfigRejected { .. })
    }

    /// The remote node this event concerns, if any. Used for
    /// observation-interface filtering.
    pub fn peer(&self) -> Option<&str> {
        match &self.kind {
            EventKind::SessionUp { peer }
            | EventKind::SessionDown { peer }
            | EventKind::Notification { peer, .. }
            | EventKind::PrefixAnnounced { from: peer, .. }
            | EventKind::PrefixWithdrawn { from: peer, .. } => Some(peer),
            _ => None,
        }
    }
}

/// Restricts an event slice to the observed interface: events on the
/// link between the target and the labeled peer, plus the target's own
/// node-local events. Without a label the full log passes through.
pub fn observe_filter(
    events: &[NetworkEvent],
    target: &str,
    peer_label: Option<&str>,
) -> Vec<NetworkEvent> {
    match peer_label {
        None => events.to_vec(),
        Some(label) => events
            .iter()
            .filter(|e| {
                (e.node == target && e.peer().is_none_or(|p| p == label))
                    || (e.node == label && e.peer() == Some(target))
            })
            .cloned()
            .collect(),
    }
}

impl fmt::Display for NetworkEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}#{}] {}: ", self.tick, self.seq, self.node)?;
        match &self.kind {
            EventKind::SessionUp { peer } => write!(f, "session up with {peer}"),
            EventKind::SessionDown { peer } => write!(f, "session down with {peer}"),
            EventKind::Notification { peer, code, subcode } => {
                write!(f, "NOTIFICATION to {peer}: {code:?}/{subcode:?}")
            }
            EventKind::PrefixAnnounced { prefix, from } => {
                write!(f, "prefix {prefix} announced by {from}")
            }
            EventKind::PrefixWithdrawn { prefix, from } => {
                write!(f, "prefix {prefix} withdrawn by {from}")
            }
            EventKind::IcmpUnreachable { src, dst } => {
                write!(f, "ICMP unreachable for {dst} (flow from {src})")
            }
            EventKind::ConfigApplied => write!(f, "configuration applied"),
            EventKind::ConfigRejected { reason } => {
                write!(f, "configuration rejected: {reason}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observe_filter_keeps_target_link_events() {
        let events = vec![
            NetworkEvent {
                tick: 1,
                seq: 1,
                node: "dc2".into(),
                kind: EventKind::SessionUp { peer: "prov2".into() },
            },
            NetworkEvent {
                tick: 1,
                seq: 2,
                node: "prov1".into(),
                kind: EventKind::SessionUp { peer: "cust".into() },
            },
            NetworkEvent {
                tick: 1,
                seq: 3,
                node: "dc2".into(),
                kind: EventKind::ConfigApplied,
            },
        ];
        let filtered = observe_filter(&events, "dc2", Some("prov2"));
        assert_eq!(filtered.len(), 2);
        assert_eq!(observe_filter(&events, "dc2", None).len(), 3);
    }

    #[test]
    fn serializes_as_flat_json_record() {
        let event = NetworkEvent {
            tick: 3,
            seq: 17,
            node: "dc2".into(),
            kind: EventKind::Notification {
                peer: "prov2".into(),
                code: NotificationCode::Cease,
                subcode: NotificationSubcode::MaxPrefixesReached,
            },
        };
        let json = serde_json::to_string(&event).unwrap();
        assert!(json.contains("\"kind\":\"Notification\""));
        assert!(json.contains("\"MaxPrefixesReached\""));
        let back: NetworkEvent = serde_json::from_str(&json).unwrap();
        assert_eq!(back, event);
    }
}
