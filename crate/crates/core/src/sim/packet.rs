use crate::topology::{NodeId, ObjectId};

/// Interest Packets default to 1.25 KB.
pub const DEFAULT_INTEREST_BITS: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterestPacket {
    pub object: ObjectId,
    pub nonce: u64,
    /// Creation time at the requester, seconds.
    pub created: f64,
    pub size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPacket {
    pub object: ObjectId,
    pub nonce: u64,
    pub size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Packet {
    Interest(InterestPacket),
    Data(DataPacket),
}

impl Packet {
    pub fn size(&self) -> f64 {
        match self {
            Packet::Interest(p) => p.size,
            Packet::Data(p) => p.size,
        }
    }

    pub fn key(&self) -> PitKey {
        match *self {
            Packet::Interest(p) => PitKey { object: p.object, nonce: p.nonce },
            Packet::Data(p) => PitKey { object: p.object, nonce: p.nonce },
        }
    }
}

/// Content name concatenated with the nonce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PitKey {
    pub object: ObjectId,
    pub nonce: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitEntry {
    /// Interface the Interest arrived on; `None` at the requester.
    pub from: Option<NodeId>,
    /// Flat routing hop the Interest left on.
    pub hop: usize,
    pub forwarded_at: f64,
    pub created: f64,
}
