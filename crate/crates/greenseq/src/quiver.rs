//! Exchange matrices, ice quivers, mutation, framed quivers, c- and
//! g-matrices, vertex colors, and canonical keys.
//!
//! Vertices are 1-based throughout the public API; the frozen copy of a
//! mutable vertex `i` in a framed quiver is `n + i`. All arithmetic is
//! 64-bit checked; overflow is a hard error.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// An `n x m` integer exchange matrix with `n` mutable vertices (rows) and
/// `m` total vertices (columns); frozen vertices are `n+1..=m`.
///
/// Entry `b[i][j] = #(i -> j) - #(j -> i)`. The principal `n x n` part is
/// skew-symmetric.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IceQuiver {
    n: usize,
    m: usize,
    b: Vec<i64>,
}

impl std::fmt::Debug for IceQuiver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IceQuiver(n={}, m={})", self.n, self.m)?;
        for i in 1..=self.n {
            let row: Vec<i64> = (1..=self.m).map(|j| self.entry(i, j)).collect();
            writeln!(f, "  {:?}", row)?;
        }
        Ok(())
    }
}

impl IceQuiver {
    /// Builds an ice quiver from rows, validating shape and skew-symmetry of
    /// the principal part.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::MalformedQuiver("need at least one mutable vertex".into()));
        }
        let m = rows[0].len();
        if m < n {
            return Err(Error::MalformedQuiver(format!("m = {} < n = {}", m, n)));
        }
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::MalformedQuiver("ragged rows".into()));
        }
        let mut b = Vec::with_capacity(n * m);
        for r in rows {
            b.extend_from_slice(r);
        }
        let q = IceQuiver { n, m, b };
        q.validate()?;
        Ok(q)
    }

    fn validate(&self) -> Result<()> {
        for i in 1..=self.n {
            if self.entry(i, i) != 0 {
                return Err(Error::MalformedQuiver(format!("loop at vertex {}", i)));
            }
            for j in 1..=self.n {
                if self.entry(i, j) != -self.entry(j, i) {
                    return Err(Error::MalformedQuiver(format!(
                        "principal part not skew-symmetric at ({}, {})",
                        i, j
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Entry `b_{ij}` with 1-based indices, `i <= n`, `j <= m`.
    pub fn entry(&self, i: usize, j: usize) -> i64 {
        debug_assert!(1 <= i && i <= self.n && 1 <= j && j <= self.m);
        self.b[(i - 1) * self.m + (j - 1)]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (1..=self.n)
            .map(|i| (1..=self.m).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// Matrix mutation at mutable vertex `k`.
    pub fn mutate(&self, k: usize) -> Result<IceQuiver> {
        if k < 1 || k > self.n {
            return Err(Error::IndexOutOfRange(k, self.n));
        }
        let (n, m) = (self.n, self.m);
        let mut out = vec![0i64; n * m];
        for i in 1..=n {
            for j in 1..=m {
                let v = if i == k || j == k {
                    self.entry(i, j).checked_neg().ok_or(Error::Overflow)?
                } else {
                    let bik = self.entry(i, k);
                    let bkj = self.entry(k, j);
                    let t1 = bik.abs().checked_mul(bkj).ok_or(Error::Overflow)?;
                    let t2 = bik.checked_mul(bkj.abs()).ok_or(Error::Overflow)?;
                    let s = t1.checked_add(t2).ok_or(Error::Overflow)?;
                    self.entry(i, j).checked_add(s / 2).ok_or(Error::Overflow)?
                };
                out[(i - 1) * m + (j - 1)] = v;
            }
        }
        let q = IceQuiver { n, m, b: out };
        debug_assert!(q.validate().is_ok());
        Ok(q)
    }

    /// Applies mutations left to right.
    pub fn mutate_seq(&self, ks: &[usize]) -> Result<IceQuiver> {
        let mut q = self.clone();
        for &k in ks {
            q = q.mutate(k)?;
        }
        Ok(q)
    }

    /// The c-matrix: columns `n+1..=2n` of a quiver in the mutation class of
    /// a framed quiver. Requires `m = 2n`; every row must be sign-coherent.
    pub fn c_matrix(&self) -> Result<CMatrix> {
        if self.m != 2 * self.n {
            return Err(Error::MalformedQuiver(format!(
                "c-matrix needs m = 2n, got n = {}, m = {}",
                self.n, self.m
            )));
        }
        let n = self.n;
        let mut c = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                c.push(self.entry(i, n + j));
            }
        }
        let cm = CMatrix { n, c };
        for i in 1..=n {
            if cm.row_sign(i).is_none() {
                return Err(Error::SignCoherenceViolation(i, cm.row(i).to_vec()));
            }
        }
        Ok(cm)
    }

    /// Color of mutable vertex `k`, read from the c-vector sign.
    pub fn color(&self, k: usize) -> Result<VertexColor> {
        if k < 1 || k > self.n {
            return Err(Error::IndexOutOfRange(k, self.n));
        }
        let c = self.c_matrix()?;
        match c.row_sign(k) {
            Some(RowSign::NonNegative) => Ok(VertexColor::Green),
            Some(RowSign::NonPositive) => Ok(VertexColor::Red),
            None => Err(Error::SignCoherenceViolation(k, c.row(k).to_vec())),
        }
    }

    pub fn is_all_red(&self) -> Result<bool> {
        let c = self.c_matrix()?;
        Ok((1..=self.n).all(|i| c.row_sign(i) == Some(RowSign::NonPositive)))
    }

    /// Lists the arrows of the quiver (multiplicity-expanded counts), all
    /// vertices included. Fails on loops; 2-cycles cannot occur in matrix
    /// form by construction.
    pub fn arrow_view(&self) -> Result<ArrowQuiver> {
        let mut arrows = Vec::new();
        for i in 1..=self.n {
            for j in 1..=self.m {
                let v = self.entry(i, j);
                if j <= self.n && j <= i {
                    continue; // principal part: count each unordered pair once
                }
                if v > 0 {
                    arrows.push(Arrow { src: i, tgt: j, mult: v as u32 });
                } else if v < 0 {
                    arrows.push(Arrow { src: j, tgt: i, mult: (-v) as u32 });
                }
            }
        }
        Ok(ArrowQuiver { n: self.n, m: self.m, arrows })
    }

    /// Simultaneously relabels the mutable vertices by `perm`, where
    /// `perm[i-1]` is the new 1-based label of vertex `i`. Frozen columns
    /// follow the same permutation when `m = 2n`, else stay fixed.
    pub fn permuted(&self, perm: &[usize]) -> Result<IceQuiver> {
        if perm.len() != self.n {
            return Err(Error::InvalidInput("permutation length mismatch".into()));
        }
        let n = self.n;
        let m = self.m;
        let framed = m == 2 * n;
        let col_of = |j: usize| -> usize {
            if j <= n {
                perm[j - 1]
            } else if framed {
                n + perm[j - n - 1]
            } else {
                j
            }
        };
        let mut b = vec![0i64; n * m];
        for i in 1..=n {
            for j in 1..=m {
                b[(perm[i - 1] - 1) * m + (col_of(j) - 1)] = self.entry(i, j);
            }
        }
        Ok(IceQuiver { n, m, b })
    }

    /// Parses the whitespace-separated row text format.
    pub fn parse_matrix(text: &str) -> Result<IceQuiver> {
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<i64>, _> =
                line.split_whitespace().map(|t| t.parse::<i64>()).collect();
            rows.push(row.map_err(|e| Error::InvalidInput(format!("bad integer: {}", e)))?);
        }
        IceQuiver::from_rows(&rows)
    }

    /// Renders the whitespace-separated row text format.
    pub fn to_matrix_text(&self) -> String {
        self.rows()
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// A single arrow with multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arrow {
    pub src: usize,
    pub tgt: usize,
    pub mult: u32,
}

/// Arrow-multiset view of an ice quiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowQuiver {
    pub n: usize,
    pub m: usize,
    pub arrows: Vec<Arrow>,
}

impl ArrowQuiver {
    /// Rebuilds the exchange matrix. Rejects loops, 2-cycles, and arrows
    /// between frozen vertices.
    pub fn matrix_view(&self) -> Result<IceQuiver> {
        let (n, m) = (self.n, self.m);
        if n == 0 || m < n {
            return Err(Error::MalformedQuiver("bad vertex counts".into()));
        }
        let mut b = vec![0i64; n * m];
        let mut seen = std::collections::HashMap::new();
        for a in &self.arrows {
            if a.src == a.tgt {
                return Err(Error::MalformedQuiver(format!("loop at {}", a.src)));
            }
            if a.src > m || a.tgt > m || a.src == 0 || a.tgt == 0 {
                return Err(Error::MalformedQuiver(format!(
                    "arrow ({}, {}) out of range",
                    a.src, a.tgt
                )));
            }
            if a.src > n && a.tgt > n {
                return Err(Error::MalformedQuiver(format!(
                    "arrow between frozen vertices {} and {}",
                    a.src, a.tgt
                )));
            }
            if seen.insert((a.tgt, a.src), ()).is_some() || seen.contains_key(&(a.src, a.tgt)) {
                // both orientations present
                if self
                    .arrows
                    .iter()
                    .any(|x| x.src == a.tgt && x.tgt == a.src && x.mult > 0)
                    && a.mult > 0
                {
                    return Err(Error::MalformedQuiver(format!(
                        "2-cycle between {} and {}",
                        a.src, a.tgt
                    )));
                }
            }
            let mult = a.mult as i64;
            if a.src <= n {
                b[(a.src - 1) * m + (a.tgt - 1)] += mult;
            }
            if a.tgt <= n {
                b[(a.tgt - 1) * m + (a.src - 1)] -= mult;
            }
        }
        let q = IceQuiver { n, m, b };
        q.validate()?;
        Ok(q)
    }
}

/// Plain quiver on `n` mutable vertices (no frozen part), the usual CLI
/// input. JSON format: `{"n": int, "frozen": int, "arrows": [[src,tgt,mult],...]}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Quiver {
    n: usize,
    b: Vec<i64>,
}

impl std::fmt::Debug for Quiver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Quiver(n={}, arrows={:?})", self.n, self.arrows())
    }
}

#[derive(Serialize, Deserialize)]
struct QuiverJson {
    n: usize,
    #[serde(default)]
    frozen: usize,
    arrows: Vec<(usize, usize, u32)>,
}

impl Quiver {
    pub fn new(n: usize, arrows: &[(usize, usize, u32)]) -> Result<Quiver> {
        if n == 0 {
            return Err(Error::MalformedQuiver("need at least one vertex".into()));
        }
        let aq = ArrowQuiver {
            n,
            m: n,
            arrows: arrows
                .iter()
                .map(|&(s, t, m)| Arrow { src: s, tgt: t, mult: m })
                .collect(),
        };
        let iq = aq.matrix_view()?;
        Ok(Quiver { n, b: iq.b })
    }

    pub fn from_matrix(iq: &IceQuiver) -> Result<Quiver> {
        if iq.m() != iq.n() {
            return Err(Error::MalformedQuiver("quiver must have no frozen part".into()));
        }
        Ok(Quiver { n: iq.n(), b: iq.b.clone() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self, i: usize, j: usize) -> i64 {
        debug_assert!(1 <= i && i <= self.n && 1 <= j && j <= self.n);
        self.b[(i - 1) * self.n + (j - 1)]
    }

    pub fn matrix(&self) -> IceQuiver {
        IceQuiver { n: self.n, m: self.n, b: self.b.clone() }
    }

    /// Arrow list with positive multiplicities, src < tgt not required.
    pub fn arrows(&self) -> Vec<(usize, usize, u32)> {
        let mut out = Vec::new();
        for i in 1..=self.n {
            for j in (i + 1)..=self.n {
                let v = self.b(i, j);
                if v > 0 {
                    out.push((i, j, v as u32));
                } else if v < 0 {
                    out.push((j, i, (-v) as u32));
                }
            }
        }
        out
    }

    /// Total degree of `v` in the underlying graph, counting multiplicities.
    pub fn degree(&self, v: usize) -> u32 {
        (1..=self.n)
            .map(|j| self.b(v, j).unsigned_abs() as u32)
            .sum()
    }

    /// Neighbors of `v` in the underlying graph.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (1..=self.n).filter(|&j| self.b(v, j) != 0).collect()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n + 1];
        let mut stack = vec![1usize];
        seen[1] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        (1..=self.n).all(|v| seen[v])
    }

    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm on the directed graph.
        let mut indeg = vec![0i64; self.n + 1];
        for i in 1..=self.n {
            for j in 1..=self.n {
                if self.b(i, j) > 0 {
                    indeg[j] += self.b(i, j);
                }
            }
        }
        let mut queue: Vec<usize> = (1..=self.n).filter(|&v| indeg[v] == 0).collect();
        let mut removed = 0;
        while let Some(v) = queue.pop() {
            removed += 1;
            for j in 1..=self.n {
                if self.b(v, j) > 0 {
                    indeg[j] -= self.b(v, j);
                    if indeg[j] == 0 {
                        queue.push(j);
                    }
                }
            }
        }
        removed == self.n
    }

    /// Framed quiver: adds one frozen copy `i' = n + i` per mutable `i` with
    /// an arrow `i -> i'`.
    pub fn framed(&self) -> IceQuiver {
        self.with_frozen_identity(1)
    }

    /// Coframed quiver: arrows `i' -> i`.
    pub fn coframed(&self) -> IceQuiver {
        self.with_frozen_identity(-1)
    }

    fn with_frozen_identity(&self, sign: i64) -> IceQuiver {
        let n = self.n;
        let m = 2 * n;
        let mut b = vec![0i64; n * m];
        for i in 1..=n {
            for j in 1..=n {
                b[(i - 1) * m + (j - 1)] = self.b(i, j);
            }
            b[(i - 1) * m + (n + i - 1)] = sign;
        }
        IceQuiver { n, m, b }
    }

    /// Full subquiver on `vertices` (1-based, deduplicated, ascending
    /// relabeling to 1..=k).
    pub fn full_subquiver(&self, vertices: &[usize]) -> Result<(Quiver, Vec<usize>)> {
        let mut vs: Vec<usize> = vertices.to_vec();
        vs.sort_unstable();
        vs.dedup();
        if vs.is_empty() || *vs.last().unwrap() > self.n || vs[0] == 0 {
            return Err(Error::BadIndex("subquiver vertex out of range".into()));
        }
        let k = vs.len();
        let mut b = vec![0i64; k * k];
        for (ii, &vi) in vs.iter().enumerate() {
            for (jj, &vj) in vs.iter().enumerate() {
                b[ii * k + jj] = self.b(vi, vj);
            }
        }
        Ok((Quiver { n: k, b }, vs))
    }

    /// Relabels vertices by `perm` (new label of `i` is `perm[i-1]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Quiver> {
        let iq = self.matrix().permuted(perm)?;
        Quiver::from_matrix(&iq)
    }

    /// Canonical form bytes: minimum over all vertex relabelings of the
    /// matrix serialization. Exponential in `n`; intended for small quivers.
    pub fn canonical_form(&self) -> Vec<i64> {
        let n = self.n;
        let mut perm: Vec<usize> = (1..=n).collect();
        let mut best: Option<Vec<i64>> = None;
        permute_all(&mut perm, 0, &mut |p| {
            let q = self.permuted(p).expect("valid permutation");
            match &best {
                Some(b) if *b <= q.b => {}
                _ => best = Some(q.b.clone()),
            }
        });
        best.unwrap()
    }

    pub fn to_json(&self) -> String {
        let j = QuiverJson { n: self.n, frozen: 0, arrows: self.arrows() };
        serde_json::to_string(&j).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Quiver> {
        let j: QuiverJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("bad quiver JSON: {}", e)))?;
        if j.frozen != 0 {
            return Err(Error::InvalidInput(
                "frozen vertices are not accepted as CLI input; supply the mutable quiver".into(),
            ));
        }
        Quiver::new(j.n, &j.arrows)
    }
}

fn permute_all(perm: &mut Vec<usize>, at: usize, f: &mut impl FnMut(&[usize])) {
    if at == perm.len() {
        f(perm);
        return;
    }
    for i in at..perm.len() {
        perm.swap(at, i);
        permute_all(perm, at + 1, f);
        perm.swap(at, i);
    }
}

/// Sign pattern of a c-vector row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSign {
    NonNegative,
    NonPositive,
}

/// Vertex color in a framed-quiver seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexColor {
    Green,
    Red,
}

/// The `n x n` c-matrix; row `i` is the c-vector of mutable vertex `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CMatrix {
    n: usize,
    c: Vec<i64>,
}

impl CMatrix {
    pub fn identity(n: usize) -> CMatrix {
        let mut c = vec![0i64; n * n];
        for i in 0..n {
            c[i * n + i] = 1;
        }
        CMatrix { n, c }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<CMatrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("c-matrix must be square".into()));
        }
        let mut c = Vec::with_capacity(n * n);
        for r in rows {
            c.extend_from_slice(r);
        }
        Ok(CMatrix { n, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.c[(i - 1) * self.n..i * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (1..=self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// `NonNegative` / `NonPositive` for a sign-coherent nonzero row, `None`
    /// otherwise.
    pub fn row_sign(&self, i: usize) -> Option<RowSign> {
        let r = self.row(i);
        if r.iter().all(|&v| v == 0) {
            return None;
        }
        if r.iter().all(|&v| v >= 0) {
            Some(RowSign::NonNegative)
        } else if r.iter().all(|&v| v <= 0) {
            Some(RowSign::NonPositive)
        } else {
            None
        }
    }

    /// Determinant via fraction-free elimination in i128.
    pub fn det(&self) -> i64 {
        let n = self.n;
        let mut a: Vec<i128> = self.c.iter().map(|&v| v as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k * n + k] == 0 {
                let swap = (k + 1..n).find(|&r| a[r * n + k] != 0);
                match swap {
                    Some(r) => {
                        for j in 0..n {
                            a.swap(k * n + j, r * n + j);
                        }
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in (k + 1)..n {
                for j in (k + 1)..n {
                    a[i * n + j] =
                        (a[k * n + k] * a[i * n + j] - a[i * n + k] * a[k * n + j]) / prev;
                }
                a[i * n + k] = 0;
            }
            prev = a[k * n + k];
        }
        (sign * a[(n - 1) * n + (n - 1)]) as i64
    }

    /// Dedup key: rows sorted lexicographically, then serialized. Equal keys
    /// iff equal row multisets.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut rows = self.rows();
        rows.sort();
        let mut out = Vec::new();
        for r in rows {
            for v in r {
                out.extend_from_slice(&v.to_be_bytes());
            }
            out.push(b';');
        }
        out
    }
}

/// The `n x n` g-matrix; row `i` is the g-vector of mutable vertex `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GMatrix {
    n: usize,
    g: Vec<i64>,
}

impl GMatrix {
    pub fn identity(n: usize) -> GMatrix {
        let mut g = vec![0i64; n * n];
        for i in 0..n {
            g[i * n + i] = 1;
        }
        GMatrix { n, g }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.g[(i - 1) * self.n..i * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (1..=self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// g-matrix mutation at `k`: only row `k` changes, to `-g_k` plus the sum
    /// of `g_j` over arrows `j -> k` (k green) or `k -> j` (k red) among the
    /// mutable vertices of the seed `qbar`, with multiplicity.
    pub fn mutate(&self, qbar: &IceQuiver, k: usize) -> Result<GMatrix> {
        if k < 1 || k > self.n {
            return Err(Error::IndexOutOfRange(k, self.n));
        }
        if qbar.n() != self.n {
            return Err(Error::InvalidInput("seed size mismatch".into()));
        }
        let color = qbar.color(k)?;
        let n = self.n;
        let mut new_row = vec![0i64; n];
        for (t, nr) in new_row.iter_mut().enumerate() {
            *nr = self.row(k)[t].checked_neg().ok_or(Error::Overflow)?;
        }
        for j in 1..=n {
            if j == k {
                continue;
            }
            // b_{jk} > 0 means arrows j -> k; b_{kj} > 0 means k -> j.
            let mult = match color {
                VertexColor::Green => qbar.entry(j, k).max(0),
                VertexColor::Red => qbar.entry(k, j).max(0),
            };
            if mult > 0 {
                for t in 0..n {
                    let add = self.row(j)[t].checked_mul(mult).ok_or(Error::Overflow)?;
                    new_row[t] = new_row[t].checked_add(add).ok_or(Error::Overflow)?;
                }
            }
        }
        let mut g = self.g.clone();
        g[(k - 1) * n..k * n].copy_from_slice(&new_row);
        Ok(GMatrix { n, g })
    }

    /// Checks the duality `G = (C^{-1})^T`, i.e. `C * G^T = I`, in integers.
    pub fn is_inverse_transpose_of(&self, c: &CMatrix) -> bool {
        if c.n() != self.n {
            return false;
        }
        let n = self.n;
        for i in 1..=n {
            for j in 1..=n {
                let mut s: i128 = 0;
                for t in 0..n {
                    s += c.row(i)[t] as i128 * self.row(j)[t] as i128;
                }
                let expect = if i == j { 1 } else { 0 };
                if s != expect {
                    return false;
                }
            }
        }
        true
    }
}

/// Recomputes the g-matrix from the c-matrix via duality: `G = (C^{-1})^T`,
/// computed exactly with the adjugate (valid since `det C = ±1`).
pub fn g_from_c(c: &CMatrix) -> Result<GMatrix> {
    let n = c.n();
    let det = c.det();
    if det != 1 && det != -1 {
        return Err(Error::InvalidInput(format!("c-matrix determinant {} is not ±1", det)));
    }
    // G^T = C^{-1} = adj(C) / det, so G[j][i] = cofactor_{i,j} / det and
    // G[i][j] = adj(C)[j][i] / det = cofactor_{i,j}/det... keep indices straight:
    // C^{-1}[i][j] = cof(j,i)/det ; G = (C^{-1})^T so G[i][j] = C^{-1}[j][i] = cof(i,j)/det.
    let mut g = vec![0i64; n * n];
    for i in 1..=n {
        for j in 1..=n {
            let minor = minor_det(c, i, j);
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            g[(i - 1) * n + (j - 1)] = (sign as i128 * minor * det as i128) as i64;
        }
    }
    Ok(GMatrix { n, g })
}

fn minor_det(c: &CMatrix, skip_row: usize, skip_col: usize) -> i128 {
    let n = c.n();
    if n == 1 {
        return 1;
    }
    let idx: Vec<usize> = (1..=n).filter(|&r| r != skip_row).collect();
    let jdx: Vec<usize> = (1..=n).filter(|&cc| cc != skip_col).collect();
    let k = n - 1;
    let mut a = vec![0i128; k * k];
    for (ii, &r) in idx.iter().enumerate() {
        for (jj, &cc) in jdx.iter().enumerate() {
            a[ii * k + jj] = c.row(r)[cc - 1] as i128;
        }
    }
    det_i128(&mut a, k)
}

fn det_i128(a: &mut [i128], n: usize) -> i128 {
    let mut sign = 1i128;
    let mut prev = 1i128;
    for kk in 0..n {
        if a[kk * n + kk] == 0 {
            let swap = (kk + 1..n).find(|&r| a[r * n + kk] != 0);
            match swap {
                Some(r) => {
                    for j in 0..n {
                        a.swap(kk * n + j, r * n + j);
                    }
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in (kk + 1)..n {
            for j in (kk + 1)..n {
                a[i * n + j] = (a[kk * n + kk] * a[i * n + j] - a[i * n + kk] * a[kk * n + j]) / prev;
            }
            a[i * n + kk] = 0;
        }
        prev = a[kk * n + kk];
    }
    sign * a[(n - 1) * n + (n - 1)]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Arrow-level 3-step mutation, used as an independent oracle against
    /// the matrix rule.
    pub fn mutate_arrows(aq: &ArrowQuiver, k: usize) -> ArrowQuiver {
        let mut arrows: Vec<(usize, usize)> = Vec::new();
        for a in &aq.arrows {
            for _ in 0..a.mult {
                arrows.push((a.src, a.tgt));
            }
        }
        // step 1: for every 2-path i -> k -> j, adjoin i -> j
        let into: Vec<usize> = arrows.iter().filter(|&&(_, t)| t == k).map(|&(s, _)| s).collect();
        let out: Vec<usize> = arrows.iter().filter(|&&(s, _)| s == k).map(|&(_, t)| t).collect();
        let mut added = Vec::new();
        for &i in &into {
            for &j in &out {
                added.push((i, j));
            }
        }
        arrows.extend(added);
        // step 2: reverse arrows incident to k
        for a in arrows.iter_mut() {
            if a.0 == k || a.1 == k {
                *a = (a.1, a.0);
            }
        }
        // step 3: cancel 2-cycles, drop frozen-frozen arrows
        let n = aq.n;
        arrows.retain(|&(s, t)| !(s > n && t > n));
        let mut counts: std::collections::HashMap<(usize, usize), i64> =
            std::collections::HashMap::new();
        for (s, t) in arrows {
            let key = if s < t { (s, t) } else { (t, s) };
            let delta = if s < t { 1 } else { -1 };
            *counts.entry(key).or_insert(0) += delta;
        }
        let mut out_arrows = Vec::new();
        let mut keys: Vec<_> = counts.keys().cloned().collect();
        keys.sort_unstable();
        for key in keys {
            let v = counts[&key];
            if v > 0 {
                out_arrows.push(Arrow { src: key.0, tgt: key.1, mult: v as u32 });
            } else if v < 0 {
                out_arrows.push(Arrow { src: key.1, tgt: key.0, mult: (-v) as u32 });
            }
        }
        ArrowQuiver { n: aq.n, m: aq.m, arrows: out_arrows }
    }

    fn a2() -> Quiver {
        Quiver::new(2, &[(1, 2, 1)]).unwrap()
    }

    #[test]
    fn worked_three_by_four_mutation() {
        let b = IceQuiver::from_rows(&[
            vec![0, 2, 0, 0],
            vec![-2, 0, 1, 0],
            vec![0, -1, 0, -1],
        ])
        .unwrap();
        let got = b.mutate(2).unwrap();
        let want = IceQuiver::from_rows(&[
            vec![0, -2, 2, 0],
            vec![2, 0, -1, 0],
            vec![-2, 1, 0, -1],
        ])
        .unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn mutation_is_involution() {
        let b = IceQuiver::from_rows(&[
            vec![0, 2, 0, 0],
            vec![-2, 0, 1, 0],
            vec![0, -1, 0, -1],
        ])
        .unwrap();
        for k in 1..=3 {
            assert_eq!(b.mutate(k).unwrap().mutate(k).unwrap(), b);
        }
    }

    #[test]
    fn two_by_two_mutation() {
        let b = IceQuiver::from_rows(&[vec![0, 1], vec![-1, 0]]).unwrap();
        let got = b.mutate(1).unwrap();
        assert_eq!(got.rows(), vec![vec![0, -1], vec![1, 0]]);
    }

    #[test]
    fn mutation_at_frozen_vertex_rejected() {
        let b = a2().framed();
        assert!(matches!(b.mutate(3), Err(Error::IndexOutOfRange(3, 2))));
        assert!(matches!(b.mutate(0), Err(Error::IndexOutOfRange(0, 2))));
    }

    #[test]
    fn matrix_rule_matches_arrow_oracle() {
        // Random-ish small quivers with simple and double arrows.
        let cases = vec![
            IceQuiver::from_rows(&[vec![0, 2, 0, 0], vec![-2, 0, 1, 0], vec![0, -1, 0, -1]])
                .unwrap(),
            a2().framed(),
            Quiver::new(3, &[(1, 2, 1), (2, 3, 1), (3, 1, 1)]).unwrap().framed(),
            Quiver::new(2, &[(1, 2, 2)]).unwrap().framed(),
        ];
        for b in cases {
            for k in 1..=b.n() {
                let via_matrix = b.mutate(k).unwrap();
                let via_arrows = mutate_arrows(&b.arrow_view().unwrap(), k).matrix_view().unwrap();
                assert_eq!(via_matrix, via_arrows, "mutation mismatch at k={}", k);
            }
        }
    }

    #[test]
    fn framed_shape() {
        let q = a2();
        let f = q.framed();
        assert_eq!(f.rows(), vec![vec![0, 1, 1, 0], vec![-1, 0, 0, 1]]);
        assert_eq!(f.c_matrix().unwrap(), CMatrix::identity(2));
        let empty = Quiver::new(3, &[]).unwrap();
        let f3 = empty.framed();
        assert_eq!(
            f3.rows(),
            vec![vec![0, 0, 0, 1, 0, 0], vec![0, 0, 0, 0, 1, 0], vec![0, 0, 0, 0, 0, 1]]
        );
        let cf = q.coframed();
        assert_eq!(cf.rows(), vec![vec![0, 1, -1, 0], vec![-1, 0, 0, -1]]);
    }

    #[test]
    fn arrow_view_round_trip() {
        let b = IceQuiver::from_rows(&[
            vec![0, 2, 0, 0],
            vec![-2, 0, 1, 0],
            vec![0, -1, 0, -1],
        ])
        .unwrap();
        let av = b.arrow_view().unwrap();
        assert_eq!(av.matrix_view().unwrap(), b);

        let kron = IceQuiver::from_rows(&[vec![0, 2], vec![-2, 0]]).unwrap();
        let av = kron.arrow_view().unwrap();
        assert_eq!(av.arrows, vec![Arrow { src: 1, tgt: 2, mult: 2 }]);
    }

    #[test]
    fn frozen_frozen_arrow_rejected() {
        let aq = ArrowQuiver {
            n: 2,
            m: 4,
            arrows: vec![Arrow { src: 4, tgt: 3, mult: 1 }],
        };
        assert!(matches!(aq.matrix_view(), Err(Error::MalformedQuiver(_))));
    }

    #[test]
    fn loops_and_two_cycles_rejected() {
        assert!(Quiver::new(2, &[(1, 1, 1)]).is_err());
        assert!(Quiver::new(2, &[(1, 2, 1), (2, 1, 1)]).is_err());
    }

    #[test]
    fn a2_c_matrix_after_one_step() {
        // Oracle-derived: mu_1 of the framed 1->2 gives c-vectors (-1,0), (0,1).
        let f = a2().framed();
        let c = f.mutate(1).unwrap().c_matrix().unwrap();
        assert_eq!(c.rows(), vec![vec![-1, 0], vec![0, 1]]);
        assert_eq!(f.mutate(1).unwrap().color(1).unwrap(), VertexColor::Red);
        assert_eq!(f.mutate(1).unwrap().color(2).unwrap(), VertexColor::Green);
    }

    #[test]
    fn a2_full_sequence_all_red() {
        let f = a2().framed();
        let end = f.mutate_seq(&[1, 2]).unwrap();
        assert!(end.is_all_red().unwrap());
        let c = end.c_matrix().unwrap();
        for i in 1..=2 {
            assert_eq!(c.row_sign(i), Some(RowSign::NonPositive));
        }
    }

    #[test]
    fn every_initial_vertex_green() {
        let q = Quiver::new(3, &[(1, 2, 1), (2, 3, 1), (3, 1, 1)]).unwrap();
        let f = q.framed();
        for k in 1..=3 {
            assert_eq!(f.color(k).unwrap(), VertexColor::Green);
        }
    }

    #[test]
    fn g_mutation_first_step() {
        let f = a2().framed();
        let g = GMatrix::identity(2).mutate(&f, 1).unwrap();
        assert_eq!(g.rows(), vec![vec![-1, 0], vec![0, 1]]);
    }

    #[test]
    fn g_mutation_double_step_restores() {
        // Mutating twice at the same vertex (green then red) restores G.
        let f = a2().framed();
        let g0 = GMatrix::identity(2);
        let g1 = g0.mutate(&f, 1).unwrap();
        let f1 = f.mutate(1).unwrap();
        let g2 = g1.mutate(&f1, 1).unwrap();
        assert_eq!(g0, g2);
    }

    #[test]
    fn duality_along_paths() {
        let q = Quiver::new(3, &[(1, 2, 1), (2, 3, 1), (3, 1, 1)]).unwrap();
        let mut seed = q.framed();
        let mut g = GMatrix::identity(3);
        for &k in &[1, 2, 3, 1, 2, 3, 2, 1] {
            g = g.mutate(&seed, k).unwrap();
            seed = seed.mutate(k).unwrap();
            let c = seed.c_matrix().unwrap();
            assert!(g.is_inverse_transpose_of(&c));
            assert_eq!(g_from_c(&c).unwrap(), g);
            assert!(c.det() == 1 || c.det() == -1);
        }
    }

    #[test]
    fn color_matches_arrow_criterion() {
        // Green iff no arrow from a frozen vertex into k.
        let q = Quiver::new(3, &[(1, 2, 1), (2, 3, 1)]).unwrap();
        let mut seed = q.framed();
        for &k in &[1, 3, 2, 1] {
            let av = seed.arrow_view().unwrap();
            for v in 1..=3 {
                let has_frozen_in = av.arrows.iter().any(|a| a.src > 3 && a.tgt == v);
                let color = seed.color(v).unwrap();
                assert_eq!(color == VertexColor::Green, !has_frozen_in);
            }
            seed = seed.mutate(k).unwrap();
        }
    }

    #[test]
    fn canonical_key_properties() {
        let id3 = CMatrix::identity(3);
        let permuted = CMatrix::from_rows(&[
            vec![0, 1, 0],
            vec![0, 0, 1],
            vec![1, 0, 0],
        ])
        .unwrap();
        assert_eq!(id3.canonical_key(), permuted.canonical_key());
        let neg = CMatrix::from_rows(&[
            vec![-1, 0, 0],
            vec![0, -1, 0],
            vec![0, 0, -1],
        ])
        .unwrap();
        assert_ne!(id3.canonical_key(), neg.canonical_key());
    }

    #[test]
    fn matrix_text_round_trip() {
        let b = IceQuiver::from_rows(&[vec![0, 2, 0, 0], vec![-2, 0, 1, 0], vec![0, -1, 0, -1]])
            .unwrap();
        let text = b.to_matrix_text();
        assert_eq!(IceQuiver::parse_matrix(&text).unwrap(), b);
    }

    #[test]
    fn quiver_json_round_trip() {
        let q = Quiver::new(3, &[(1, 2, 2), (2, 3, 1)]).unwrap();
        let j = q.to_json();
        assert_eq!(Quiver::from_json(&j).unwrap(), q);
        let q2 = Quiver::from_json(r#"{"n":2,"arrows":[[1,2,1]]}"#).unwrap();
        assert_eq!(q2, a2());
    }
}
