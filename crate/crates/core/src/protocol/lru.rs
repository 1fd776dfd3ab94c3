const NIL: u32 = u32::MAX;
const EMPTY: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Slot {
    key: u32,
    prev: u32,
    next: u32,
}

/// Fixed-capacity least-recently-used set of message ids.
///
/// Entries live in a slab threaded by a doubly linked list (head = most
/// recently used). An open-addressing table with linear probing and
/// backward-shift deletion maps keys to slab slots; it stays at most half
/// full and grows with the number of entries, not with the capacity.
#[derive(Debug, Clone)]
pub struct LruCache {
    capacity: usize,
    slots: Vec<Slot>,
    /// `(key, slot)` pairs; `slot == EMPTY` marks a free bucket.
    table: Vec<(u32, u32)>,
    shift: u32,
    head: u32,
    tail: u32,
}

impl LruCache {
    /// # Panics
    /// If `capacity` is zero.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "cache capacity must be positive");
        assert!(capacity < NIL as usize / 4);
        let mut c = LruCache {
            capacity,
            slots: Vec::new(),
            table: Vec::new(),
            shift: 0,
            head: NIL,
            tail: NIL,
        };
        c.rebuild(8.min(2 * capacity.next_power_of_two()).max(4));
        c
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Membership test that leaves the recency order alone.
    pub fn contains(&self, key: u32) -> bool {
        self.find(key).is_ok()
    }

    /// Lookup: on a hit, `key` becomes most recently used.
    pub fn touch(&mut self, key: u32) -> bool {
        match self.find(key) {
            Ok(pos) => {
                let s = self.table[pos].1;
                self.move_to_front(s);
                true
            }
            Err(_) => false,
        }
    }

    /// Insert `key` as most recently used, returning the evicted id if the
    /// cache was full. Inserting a present key only touches it.
    pub fn insert(&mut self, key: u32) -> Option<u32> {
        match self.find(key) {
            Ok(pos) => {
                let s = self.table[pos].1;
                self.move_to_front(s);
                None
            }
            Err(pos) => self.insert_at(key, pos),
        }
    }

    /// Single-lookup membership test that inserts `key` when absent. A
    /// present key is moved to the front only if `refresh` is set. Returns
    /// whether `key` was present.
    pub fn check_insert(&mut self, key: u32, refresh: bool) -> bool {
        match self.find(key) {
            Ok(pos) => {
                if refresh {
                    let s = self.table[pos].1;
                    self.move_to_front(s);
                }
                true
            }
            Err(pos) => {
                self.insert_at(key, pos);
                false
            }
        }
    }

    fn insert_at(&mut self, key: u32, mut pos: usize) -> Option<u32> {
        if self.slots.len() < self.capacity {
            if 2 * (self.slots.len() + 1) > self.table.len() {
                self.rebuild(2 * self.table.len());
                pos = self.find(key).unwrap_err();
            }
            let s = self.slots.len() as u32;
            self.slots.push(Slot {
                key,
                prev: NIL,
                next: NIL,
            });
            self.table[pos] = (key, s);
            self.link_front(s);
            return None;
        }
        // reuse the tail slot; removal may shift `pos`, so look it up again
        let s = self.tail;
        let old = self.slots[s as usize].key;
        let old_pos = self.find(old).expect("cached key is indexed");
        self.remove_at(old_pos);
        self.unlink(s);
        self.slots[s as usize].key = key;
        let pos = self.find(key).unwrap_err();
        self.table[pos] = (key, s);
        self.link_front(s);
        Some(old)
    }

    /// Ids from most to least recently used.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        let mut cur = self.head;
        std::iter::from_fn(move || {
            (cur != NIL).then(|| {
                let slot = self.slots[cur as usize];
                cur = slot.next;
                slot.key
            })
        })
    }

    fn home(&self, key: u32) -> usize {
        (key.wrapping_mul(0x9e37_79b9) >> self.shift) as usize
    }

    /// `Ok(bucket)` holding `key`, or `Err(bucket)` where it would go.
    fn find(&self, key: u32) -> Result<usize, usize> {
        let mask = self.table.len() - 1;
        let mut i = self.home(key);
        loop {
            let (k, s) = self.table[i];
            if s == EMPTY {
                return Err(i);
            }
            if k == key {
                return Ok(i);
            }
            i = (i + 1) & mask;
        }
    }

    fn remove_at(&mut self, mut hole: usize) {
        let mask = self.table.len() - 1;
        let mut j = hole;
        loop {
            j = (j + 1) & mask;
            let (k, s) = self.table[j];
            if s == EMPTY {
                break;
            }
            // entries whose home lies cyclically in (hole, j] stay put
            let h = self.home(k);
            let stays = if hole <= j {
                hole < h && h <= j
            } else {
                hole < h || h <= j
            };
            if !stays {
                self.table[hole] = self.table[j];
                hole = j;
            }
        }
        self.table[hole] = (0, EMPTY);
    }

    fn rebuild(&mut self, buckets: usize) {
        debug_assert!(buckets.is_power_of_two());
        self.shift = 32 - buckets.trailing_zeros();
        self.table = vec![(0, EMPTY); buckets];
        for s in 0..self.slots.len() {
            let key = self.slots[s].key;
            let pos = self.find(key).unwrap_err();
            self.table[pos] = (key, s as u32);
        }
    }

    fn move_to_front(&mut self, s: u32) {
        if self.head != s {
            self.unlink(s);
            self.link_front(s);
        }
    }

    fn unlink(&mut self, s: u32) {
        let Slot { prev, next, .. } = self.slots[s as usize];
        if prev == NIL {
            self.head = next;
        } else {
            self.slots[prev as usize].next = next;
        }
        if next == NIL {
            self.tail = prev;
        } else {
            self.slots[next as usize].prev = prev;
        }
    }

    fn link_front(&mut self, s: u32) {
        let old = self.head;
        self.slots[s as usize].prev = NIL;
        self.slots[s as usize].next = old;
        if old == NIL {
            self.tail = s;
        } else {
            self.slots[old as usize].prev = s;
        }
        self.head = s;
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    /// Most recently used first, truncated to capacity.
    fn model(capacity: usize, ops: &[(bool, u32)]) -> Vec<u32> {
        let mut list: Vec<u32> = Vec::new();
        for &(insert, key) in ops {
            match list.iter().position(|&k| k == key) {
                Some(i) => {
                    list.remove(i);
                    list.insert(0, key);
                }
                None if insert => {
                    list.insert(0, key);
                    list.truncate(capacity);
                }
                None => {}
            }
        }
        list
    }

    #[test]
    fn eviction_order() {
        let mut c = LruCache::new(2);
        assert_eq!(c.insert(1), None);
        assert_eq!(c.insert(2), None);
        assert!(c.touch(1));
        assert_eq!(c.insert(3), Some(2));
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![3, 1]);
        assert!(!c.touch(2));
        assert!(c.contains(1) && !c.contains(2));
    }

    #[test]
    fn capacity_one() {
        let mut c = LruCache::new(1);
        c.insert(7);
        assert_eq!(c.insert(7), None);
        assert_eq!(c.insert(8), Some(7));
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn wide_keys_and_large_capacity() {
        let mut c = LruCache::new(300);
        let mut x: u32 = 1;
        let mut ops = Vec::new();
        for _ in 0..20_000 {
            x = x.wrapping_mul(1_103_515_245).wrapping_add(12_345);
            let op = (x >> 31 == 0, (x >> 8) % 900 * 7_919);
            if op.0 {
                c.insert(op.1);
            } else {
                c.touch(op.1);
            }
            ops.push(op);
        }
        let expected = model(300, &ops);
        assert_eq!(c.iter().collect::<Vec<_>>(), expected);
        assert!(ops.iter().all(|&(_, k)| c.contains(k) == expected.contains(&k)));
    }

    proptest! {
        #[test]
        fn matches_list_model(
            capacity in 1usize..=8,
            ops in proptest::collection::vec((any::<bool>(), 0u32..12), 0..64),
        ) {
            let mut c = LruCache::new(capacity);
            for &(insert, key) in &ops {
                if insert { c.insert(key); } else { c.touch(key); }
            }
            let mut d = LruCache::new(capacity);
            for &(insert, key) in &ops {
                if insert { let was = d.contains(key); prop_assert_eq!(d.check_insert(key, true), was); } else { d.touch(key); }
            }
            prop_assert_eq!(d.iter().collect::<Vec<_>>(), model(capacity, &ops));
            prop_assert_eq!(c.iter().collect::<Vec<_>>(), model(capacity, &ops));
            prop_assert!(c.len() <= capacity);
        }
    }
}
