use std::collections::BTreeSet;

use crate::topology::ObjectId;

/// A node's cache. Capacity is enforced on every insertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentStore {
    capacity: usize,
    items: BTreeSet<ObjectId>,
}

/// Outcome of a caching strategy for an arriving Data Packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheDecision {
    Keep,
    Admit,
    Replace(ObjectId),
}

impl ContentStore {
    pub fn new(capacity: usize) -> Self {
        ContentStore {
            capacity,
            items: BTreeSet::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.items.len() >= self.capacity
    }

    pub fn contains(&self, object: ObjectId) -> bool {
        self.items.contains(&object)
    }

    pub fn iter(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.items.iter().copied()
    }

    /// False, and no change, when the store is full.
    pub fn insert(&mut self, object: ObjectId) -> bool {
        if self.is_full() && !self.contains(object) {
            return false;
        }
        self.items.insert(object);
        true
    }

    pub fn remove(&mut self, object: ObjectId) -> bool {
        self.items.remove(&object)
    }

    /// Applies a strategy decision for `object`. False when the decision
    /// would exceed capacity or evicts an object that is not cached.
    pub fn apply(&mut self, object: ObjectId, decision: CacheDecision) -> bool {
        match decision {
            CacheDecision::Keep => true,
            CacheDecision::Admit => self.insert(object),
            CacheDecision::Replace(old) => {
                if !self.remove(old) {
                    return false;
                }
                self.insert(object)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_is_enforced() {
        let mut s = ContentStore::new(1);
        assert!(s.apply(3, CacheDecision::Admit));
        assert!(!s.apply(4, CacheDecision::Admit));
        assert!(!s.apply(4, CacheDecision::Replace(9)));
        assert!(s.apply(4, CacheDecision::Replace(3)));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![4]);
        let mut none = ContentStore::new(0);
        assert!(!none.insert(1));
    }
}
