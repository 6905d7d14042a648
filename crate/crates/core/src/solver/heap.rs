//! Indexed max-heap over variable activities.

use super::lit::Var;

pub(super) struct VarHeap {
    heap: Vec<Var>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl VarHeap {
    pub fn new(num_vars: usize) -> Self {
        Self {
            heap: Vec::with_capacity(num_vars),
            pos: vec![ABSENT; num_vars],
        }
    }

    pub fn contains(&self, v: Var) -> bool {
        self.pos[v as usize] != ABSENT
    }


    pub fn insert(&mut self, v: Var, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v as usize] = self.heap.len() as u32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    /// Restores heap order after `v`'s activity increased.
    pub fn increased(&mut self, v: Var, act: &[f64]) {
        if let Some(&p) = self.pos.get(v as usize).filter(|&&p| p != ABSENT) {
            self.sift_up(p as usize, act);
        }
    }

    pub fn pop(&mut self, act: &[f64]) -> Option<Var> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = ABSENT;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn better(a: Var, b: Var, act: &[f64]) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::better(v, p, act) {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = i as u32;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child = if right < n && Self::better(self.heap[right], self.heap[left], act) {
                right
            } else {
                left
            };
            if !Self::better(self.heap[child], v, act) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i] as usize] = i as u32;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_in_activity_order() {
        let mut act = vec![0.5, 3.0, 1.0, 3.0, 0.0];
        let mut h = VarHeap::new(5);
        for v in 0..5 {
            h.insert(v, &act);
        }
        act[4] = 10.0;
        h.increased(4, &act);
        let order: Vec<Var> = std::iter::from_fn(|| h.pop(&act)).collect();
        assert_eq!(order, vec![4, 1, 3, 2, 0]);
        assert!(h.pop(&act).is_none() && !h.contains(4));
    }
}
