use std::hash::Hash;

use parking_lot::RwLock;
use rustc_hash::FxHashMap;

/// Thread-safe memo that is dropped wholesale once it holds `limit` entries.
#[derive(Debug)]
pub(crate) struct BoundedMemo<K, V> {
    map: RwLock<FxHashMap<K, V>>,
    limit: usize,
}

impl<K: Hash + Eq, V: Clone> BoundedMemo<K, V> {
    pub(crate) fn new(limit: usize) -> Self {
        Self { map: RwLock::new(FxHashMap::default()), limit }
    }

    pub(crate) fn len(&self) -> usize {
        self.map.read().len()
    }

    pub(crate) fn get_or_insert_with(&self, key: K, compute: impl FnOnce() -> V) -> V {
        if let Some(v) = self.map.read().get(&key) {
            return v.clone();
        }
        let v = compute();
        let mut w = self.map.write();
        if w.len() >= self.limit {
            w.clear();
        }
        w.insert(key, v.clone());
        v
    }
}
