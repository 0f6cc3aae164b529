use crate::sim::{CacheDecision, ContentStore};
use crate::topology::ObjectId;

/// Request counts since the start of the run for one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfuCacheState {
    frequency: Vec<u64>,
}

impl LfuCacheState {
    pub fn new(object_count: usize) -> Self {
        LfuCacheState {
            frequency: vec![0; object_count],
        }
    }

    pub fn record(&mut self, object: ObjectId) {
        self.frequency[object] += 1;
    }

    pub fn frequency(&self, object: ObjectId) -> u64 {
        self.frequency[object]
    }
}

/// Admit when there is room; otherwise evict the least frequent cached
/// object (lowest id among equals) only if `new` is strictly more
/// frequent.
pub fn lfu_admit(state: &LfuCacheState, store: &ContentStore, new: ObjectId) -> CacheDecision {
    if store.capacity() == 0 {
        return CacheDecision::Keep;
    }
    if !store.is_full() {
        return CacheDecision::Admit;
    }
    let victim = store.iter().min_by_key(|&k| (state.frequency(k), k));
    match victim {
        Some(k) if state.frequency(new) > state.frequency(k) => CacheDecision::Replace(k),
        _ => CacheDecision::Keep,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(freqs: &[u64]) -> LfuCacheState {
        LfuCacheState {
            frequency: freqs.to_vec(),
        }
    }

    #[test]
    fn admits_when_not_full() {
        let store = ContentStore::new(2);
        assert_eq!(lfu_admit(&state(&[0, 0]), &store, 1), CacheDecision::Admit);
    }

    #[test]
    fn strict_frequency_rule() {
        let mut store = ContentStore::new(1);
        store.insert(0);
        assert_eq!(lfu_admit(&state(&[3, 7]), &store, 1), CacheDecision::Replace(0));
        assert_eq!(lfu_admit(&state(&[3, 3]), &store, 1), CacheDecision::Keep);
        assert_eq!(lfu_admit(&state(&[3, 3]), &ContentStore::new(0), 1), CacheDecision::Keep);
    }
}
