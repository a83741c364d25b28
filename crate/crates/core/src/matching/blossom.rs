//! Edmonds' blossom algorithm for maximum-weight (not maximum-cardinality)
//! matching on general graphs, O(n³), exact on integer weights.
//!
//! Follows the primal-dual structure of Galil's exposition: S/T labels, blossom
//! shrinking and expansion, and four kinds of dual adjustment. All weights are
//! expected to be even so every dual update stays integral.

const NONE: usize = usize::MAX;

struct State<'a> {
    nv: usize,
    edges: &'a [(usize, usize, i64)],
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Option<Vec<usize>>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<i64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

fn wrap(j: isize, len: usize) -> usize {
    j.rem_euclid(len as isize) as usize
}

impl<'a> State<'a> {
    fn slack(&self, k: usize) -> i64 {
        let (i, j, w) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2 * w
    }

    fn leaves(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![b];
        while let Some(x) = stack.pop() {
            if x < self.nv {
                out.push(x);
            } else {
                for &c in self.blossomchilds[x].iter().rev() {
                    stack.push(c);
                }
            }
        }
        out
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let leaves = self.leaves(b);
            self.queue.extend(leaves);
        } else if t == 2 {
            let base = self.blossombase[b];
            let mb = self.mate[base];
            self.assign_label(self.endpoint[mb], 1, mb ^ 1);
        }
    }

    /// Traces back from `v` and `w` to find a new blossom base, or `NONE` for
    /// an augmenting path.
    fn scan_blossom(&mut self, mut v: usize, mut w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        while v != NONE || w != NONE {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            path.push(b);
            self.label[b] = 5;
            if self.labelend[b] == NONE {
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                v = self.endpoint[self.labelend[b]];
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("blossom pool exhausted");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;
        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            path.push(bv);
            endps.push(self.labelend[bv]);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            path.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0;
        for leaf in self.leaves_of(&path) {
            if self.label[self.inblossom[leaf]] == 2 {
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }
        let mut bestedgeto = vec![NONE; 2 * self.nv];
        for &sub in &path {
            let lists: Vec<Vec<usize>> = match self.blossombestedges[sub].take() {
                None => self
                    .leaves(sub)
                    .into_iter()
                    .map(|x| self.neighbend[x].iter().map(|p| p / 2).collect())
                    .collect(),
                Some(list) => vec![list],
            };
            for list in lists {
                for k in list {
                    let (mut i, mut j, _) = self.edges[k];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = i;
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.bestedge[sub] = NONE;
        }
        let best: Vec<usize> = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        self.bestedge[b] = NONE;
        for &k in &best {
            if self.bestedge[b] == NONE || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
        self.blossombestedges[b] = Some(best);
        self.blossomchilds[b] = path;
        self.blossomendps[b] = endps;
    }

    fn leaves_of(&self, children: &[usize]) -> Vec<usize> {
        children.iter().flat_map(|&c| self.leaves(c)).collect()
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let children = self.blossomchilds[b].clone();
        for &s in &children {
            self.blossomparent[s] = NONE;
            if s < self.nv {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for leaf in self.leaves(s) {
                    self.inblossom[leaf] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            let len = children.len();
            let endps = self.blossomendps[b].clone();
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let mut j = children.iter().position(|&c| c == entrychild).unwrap() as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 != 0 {
                j -= len as isize;
                (1, 0)
            } else {
                (-1, 1)
            };
            let mut p = self.labelend[b];
            while j != 0 {
                self.label[self.endpoint[p ^ 1]] = 0;
                let q = endps[wrap(j - endptrick as isize, len)] ^ endptrick ^ 1;
                self.label[self.endpoint[q]] = 0;
                self.assign_label(self.endpoint[p ^ 1], 2, p);
                self.allowedge[endps[wrap(j - endptrick as isize, len)] / 2] = true;
                j += jstep;
                p = endps[wrap(j - endptrick as isize, len)] ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = children[wrap(j, len)];
            let ep = self.endpoint[p ^ 1];
            self.label[ep] = 2;
            self.label[bv] = 2;
            self.labelend[ep] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while children[wrap(j, len)] != entrychild {
                let bv = children[wrap(j, len)];
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                if let Some(v) = self.leaves(bv).into_iter().find(|&v| self.label[v] != 0) {
                    self.label[v] = 0;
                    let m = self.mate[self.blossombase[bv]];
                    self.label[self.endpoint[m]] = 0;
                    self.assign_label(v, 2, self.labelend[v]);
                }
                j += jstep;
            }
        }
        self.label[b] = 0;
        self.labelend[b] = NONE;
        self.blossomchilds[b].clear();
        self.blossomendps[b].clear();
        self.blossombase[b] = NONE;
        self.blossombestedges[b] = None;
        self.bestedge[b] = NONE;
        self.unusedblossoms.push(b);
    }

    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nv {
            self.augment_blossom(t, v);
        }
        let len = self.blossomchilds[b].len();
        let i = self.blossomchilds[b].iter().position(|&c| c == t).unwrap();
        let mut j = i as isize;
        let (jstep, endptrick): (isize, usize) = if i & 1 != 0 {
            j -= len as isize;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = self.blossomchilds[b][wrap(j, len)];
            let p = self.blossomendps[b][wrap(j - endptrick as isize, len)] ^ endptrick;
            if t >= self.nv {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            let t = self.blossomchilds[b][wrap(j, len)];
            if t >= self.nv {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                if bs >= self.nv {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                if bt >= self.nv {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }
}

/// Maximum-weight matching over `nv` vertices. Each edge is `(i, j, w)` with
/// `i != j` and `w` even; returns the mate of every vertex (`None` if single).
pub(crate) fn max_weight_matching(nv: usize, edges: &[(usize, usize, i64)]) -> Vec<Option<usize>> {
    if edges.is_empty() || nv == 0 {
        return vec![None; nv];
    }
    let maxweight = edges.iter().map(|e| e.2).max().unwrap_or(0).max(0);
    let mut endpoint = Vec::with_capacity(2 * edges.len());
    let mut neighbend = vec![Vec::new(); nv];
    for (k, &(i, j, _)) in edges.iter().enumerate() {
        endpoint.push(i);
        endpoint.push(j);
        neighbend[i].push(2 * k + 1);
        neighbend[j].push(2 * k);
    }
    let mut st = State {
        nv,
        edges,
        endpoint,
        neighbend,
        mate: vec![NONE; nv],
        label: vec![0; 2 * nv],
        labelend: vec![NONE; 2 * nv],
        inblossom: (0..nv).collect(),
        blossomparent: vec![NONE; 2 * nv],
        blossomchilds: vec![Vec::new(); 2 * nv],
        blossombase: (0..nv).chain(std::iter::repeat_n(NONE, nv)).collect(),
        blossomendps: vec![Vec::new(); 2 * nv],
        bestedge: vec![NONE; 2 * nv],
        blossombestedges: vec![None; 2 * nv],
        unusedblossoms: (nv..2 * nv).collect(),
        dualvar: std::iter::repeat_n(maxweight, nv)
            .chain(std::iter::repeat_n(0, nv))
            .collect(),
        allowedge: vec![false; edges.len()],
        queue: Vec::new(),
    };

    for _stage in 0..nv {
        st.label.iter_mut().for_each(|l| *l = 0);
        st.bestedge.iter_mut().for_each(|b| *b = NONE);
        for b in nv..2 * nv {
            st.blossombestedges[b] = None;
        }
        st.allowedge.iter_mut().for_each(|a| *a = false);
        st.queue.clear();
        for v in 0..nv {
            if st.mate[v] == NONE && st.label[st.inblossom[v]] == 0 {
                st.assign_label(v, 1, NONE);
            }
        }
        let mut augmented = false;
        loop {
            while let Some(v) = (!augmented).then(|| st.queue.pop()).flatten() {
                let ends = st.neighbend[v].clone();
                for p in ends {
                    let k = p / 2;
                    let w = st.endpoint[p];
                    if st.inblossom[v] == st.inblossom[w] {
                        continue;
                    }
                    let mut kslack = 0;
                    if !st.allowedge[k] {
                        kslack = st.slack(k);
                        if kslack <= 0 {
                            st.allowedge[k] = true;
                        }
                    }
                    if st.allowedge[k] {
                        if st.label[st.inblossom[w]] == 0 {
                            st.assign_label(w, 2, p ^ 1);
                        } else if st.label[st.inblossom[w]] == 1 {
                            let base = st.scan_blossom(v, w);
                            if base != NONE {
                                st.add_blossom(base, k);
                            } else {
                                st.augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if st.label[w] == 0 {
                            st.label[w] = 2;
                            st.labelend[w] = p ^ 1;
                        }
                    } else if st.label[st.inblossom[w]] == 1 {
                        let b = st.inblossom[v];
                        if st.bestedge[b] == NONE || kslack < st.slack(st.bestedge[b]) {
                            st.bestedge[b] = k;
                        }
                    } else if st.label[w] == 0
                        && (st.bestedge[w] == NONE || kslack < st.slack(st.bestedge[w]))
                    {
                        st.bestedge[w] = k;
                    }
                }
            }
            if augmented {
                break;
            }

            // Dual adjustment: pick the smallest of the four delta kinds.
            let mut deltatype = 1u8;
            let mut delta = st.dualvar[..nv].iter().copied().min().unwrap();
            let mut deltaedge = NONE;
            let mut deltablossom = NONE;
            for v in 0..nv {
                if st.label[st.inblossom[v]] == 0 && st.bestedge[v] != NONE {
                    let d = st.slack(st.bestedge[v]);
                    if d < delta {
                        delta = d;
                        deltatype = 2;
                        deltaedge = st.bestedge[v];
                    }
                }
            }
            for b in 0..2 * nv {
                if st.blossomparent[b] == NONE && st.label[b] == 1 && st.bestedge[b] != NONE {
                    let d = st.slack(st.bestedge[b]) / 2;
                    if d < delta {
                        delta = d;
                        deltatype = 3;
                        deltaedge = st.bestedge[b];
                    }
                }
            }
            for b in nv..2 * nv {
                if st.blossombase[b] != NONE
                    && st.blossomparent[b] == NONE
                    && st.label[b] == 2
                    && st.dualvar[b] < delta
                {
                    delta = st.dualvar[b];
                    deltatype = 4;
                    deltablossom = b;
                }
            }
            for v in 0..nv {
                match st.label[st.inblossom[v]] {
                    1 => st.dualvar[v] -= delta,
                    2 => st.dualvar[v] += delta,
                    _ => {}
                }
            }
            for b in nv..2 * nv {
                if st.blossombase[b] != NONE && st.blossomparent[b] == NONE {
                    match st.label[b] {
                        1 => st.dualvar[b] += delta,
                        2 => st.dualvar[b] -= delta,
                        _ => {}
                    }
                }
            }
            match deltatype {
                1 => break,
                2 => {
                    st.allowedge[deltaedge] = true;
                    let (mut i, mut j, _) = edges[deltaedge];
                    if st.label[st.inblossom[i]] == 0 {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = j;
                    st.queue.push(i);
                }
                3 => {
                    st.allowedge[deltaedge] = true;
                    let (i, _, _) = edges[deltaedge];
                    st.queue.push(i);
                }
                _ => st.expand_blossom(deltablossom, false),
            }
        }
        if !augmented {
            break;
        }
        for b in nv..2 * nv {
            if st.blossomparent[b] == NONE
                && st.blossombase[b] != NONE
                && st.label[b] == 1
                && st.dualvar[b] == 0
            {
                st.expand_blossom(b, true);
            }
        }
    }
    st.mate
        .iter()
        .map(|&p| {
            if p == NONE {
                None
            } else {
                Some(st.endpoint[p])
            }
        })
        .collect()
}
