/// Disjoint sets with path halving and union by rank; tracks set sizes.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
    size: Vec<u32>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            size: vec![1; n],
            sets: n,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.rank[ra as usize] < self.rank[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        if self.rank[ra as usize] == self.rank[rb as usize] {
            self.rank[ra as usize] += 1;
        }
        self.sets -= 1;
        true
    }

    pub fn set_size(&mut self, x: u32) -> usize {
        let r = self.find(x);
        self.size[r as usize] as usize
    }

    pub fn sets(&self) -> usize {
        self.sets
    }

    /// Dense component labels `0..sets`, numbered by smallest member.
    pub fn labels(&mut self) -> Vec<u32> {
        let n = self.len();
        let mut by_root = vec![u32::MAX; n];
        let mut labels = vec![0u32; n];
        let mut next = 0u32;
        for v in 0..n as u32 {
            let r = self.find(v) as usize;
            if by_root[r] == u32::MAX {
                by_root[r] = next;
                next += 1;
            }
            labels[v as usize] = by_root[r];
        }
        labels
    }

    /// Sizes of all sets, largest first.
    pub fn sizes_desc(&mut self) -> Vec<usize> {
        let n = self.len();
        let mut out = Vec::new();
        for v in 0..n as u32 {
            if self.find(v) == v {
                out.push(self.size[v as usize] as usize);
            }
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }
}
