use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque subsystem label, unique within a composite state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsystemId(String);

impl SubsystemId {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SubsystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SubsystemId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl From<String> for SubsystemId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

/// Who may act on a subsystem at a given time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Owner {
    Alice,
    Channel,
    Bob,
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Owner::Alice => "Alice",
            Owner::Channel => "Channel",
            Owner::Bob => "Bob",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferEntry {
    pub at: f64,
    pub id: SubsystemId,
    pub from: Owner,
    pub to: Owner,
}

/// Current owner of every subsystem plus the append-only transfer history.
///
/// Exchanged systems always pass through the channel: Alice and Bob never
/// hand a subsystem to each other directly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OwnershipLedger {
    owners: BTreeMap<SubsystemId, Owner>,
    history: Vec<TransferEntry>,
}

impl OwnershipLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, id: SubsystemId, owner: Owner) -> Result<()> {
        if self.owners.contains_key(&id) {
            return Err(Error::DuplicateSubsystem(id));
        }
        self.owners.insert(id, owner);
        Ok(())
    }

    pub fn owner(&self, id: &SubsystemId) -> Result<Owner> {
        self.owners
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownSubsystem(id.clone()))
    }

    pub fn owners(&self) -> &BTreeMap<SubsystemId, Owner> {
        &self.owners
    }

    pub fn history(&self) -> &[TransferEntry] {
        &self.history
    }

    pub fn owned_by(&self, owner: Owner) -> impl Iterator<Item = &SubsystemId> {
        self.owners
            .iter()
            .filter(move |(_, &o)| o == owner)
            .map(|(id, _)| id)
    }

    /// Time at which `id` most recently entered the channel, if it is there.
    pub fn entered_channel_at(&self, id: &SubsystemId) -> Option<f64> {
        if self.owners.get(id) != Some(&Owner::Channel) {
            return None;
        }
        self.history
            .iter()
            .rev()
            .find(|e| &e.id == id && e.to == Owner::Channel)
            .map(|e| e.at)
    }

    pub fn transfer(&mut self, id: &SubsystemId, to: Owner, at: f64) -> Result<()> {
        let from = self.owner(id)?;
        let legal = matches!(
            (from, to),
            (Owner::Alice, Owner::Channel)
                | (Owner::Bob, Owner::Channel)
                | (Owner::Channel, Owner::Alice)
                | (Owner::Channel, Owner::Bob)
        );
        if !legal || !at.is_finite() {
            return Err(Error::IllegalTransfer {
                id: id.clone(),
                from,
                to,
            });
        }
        if let Some(last) = self.history.iter().rev().find(|e| &e.id == id) {
            if at < last.at {
                return Err(Error::Causality {
                    id: id.clone(),
                    entered: last.at,
                    at,
                });
            }
        }
        self.owners.insert(id.clone(), to);
        self.history.push(TransferEntry {
            at,
            id: id.clone(),
            from,
            to,
        });
        Ok(())
    }

    pub(crate) fn merge(&mut self, other: &OwnershipLedger) -> Result<()> {
        for (id, &owner) in &other.owners {
            self.assign(id.clone(), owner)?;
        }
        self.history.extend(other.history.iter().cloned());
        self.history.sort_by(|a, b| a.at.total_cmp(&b.at));
        Ok(())
    }

    pub(crate) fn restrict(&self, keep: &[SubsystemId]) -> OwnershipLedger {
        OwnershipLedger {
            owners: self
                .owners
                .iter()
                .filter(|(id, _)| keep.contains(id))
                .map(|(id, &o)| (id.clone(), o))
                .collect(),
            history: self
                .history
                .iter()
                .filter(|e| keep.contains(&e.id))
                .cloned()
                .collect(),
        }
    }
}
