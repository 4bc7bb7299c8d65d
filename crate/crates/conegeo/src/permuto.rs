//! Exact combinatorics of the compactified diagonal chart: permutohedron
//! faces indexed by ordered set partitions, the Weyl-chamber fan, torus
//! fixed-point strata, the cell census of a generic one-parameter flow, and
//! the boundary strata of the compactification.
//!
//! Everything here is exact integer arithmetic; there are no tolerances.
//! Enumerations emit canonically sorted lists so output is deterministic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ConeError, Result};

/// Value guard for the face/strata enumerations.
pub const MAX_FACE_N: usize = 7;
/// Value guard for the fixed-point indexing report.
pub const MAX_REPORT_N: usize = 5;

/// Permutation of `{1..m}` stored as an image list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation(pub Vec<u8>);

impl Permutation {
    pub fn is_valid(&self) -> bool {
        let m = self.0.len();
        let mut seen = vec![false; m + 1];
        for &v in &self.0 {
            if v == 0 || v as usize > m || seen[v as usize] {
                return false;
            }
            seen[v as usize] = true;
        }
        true
    }

    /// Position (0-based) of each value: `pos[v-1] = i` with `self.0[i] = v`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0usize; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            pos[v as usize - 1] = i;
        }
        pos
    }

    /// Rank in the lexicographic enumeration of all permutations (Lehmer code).
    pub fn lex_rank(&self) -> u64 {
        let m = self.0.len();
        let mut rank = 0u64;
        let mut fact = 1u64;
        let mut factorials = vec![1u64; m];
        for i in 1..m {
            fact *= i as u64;
            factorials[i] = fact;
        }
        for i in 0..m {
            let smaller = self.0[i + 1..].iter().filter(|&&v| v < self.0[i]).count() as u64;
            rank += smaller * factorials[m - 1 - i];
        }
        rank
    }
}

/// Ordered partition of `{1..m}` into disjoint nonempty blocks.
///
/// Stored as a block-assignment vector: element `i+1` lives in block
/// `assign[i]`, with block indices `0..num_blocks` giving the block order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrderedSetPartition {
    assign: Vec<u8>,
    num_blocks: u8,
}

impl OrderedSetPartition {
    pub fn from_blocks(blocks: &[Vec<u8>], m: usize) -> Result<Self> {
        let mut assign = vec![u8::MAX; m];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(ConeError::InvalidArgument("empty block".into()));
            }
            for &e in block {
                if e == 0 || e as usize > m || assign[e as usize - 1] != u8::MAX {
                    return Err(ConeError::InvalidArgument(
                        "blocks must disjointly cover the ground set".into(),
                    ));
                }
                assign[e as usize - 1] = b as u8;
            }
        }
        if assign.iter().any(|&a| a == u8::MAX) {
            return Err(ConeError::InvalidArgument(
                "blocks must cover the ground set".into(),
            ));
        }
        Ok(Self {
            assign,
            num_blocks: blocks.len() as u8,
        })
    }

    pub fn ground_size(&self) -> usize {
        self.assign.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks as usize
    }

    /// Face dimension: ground size minus block count.
    pub fn dimension(&self) -> usize {
        self.ground_size() - self.num_blocks()
    }

    /// Blocks in order, elements 1-based ascending within each block.
    pub fn blocks(&self) -> Vec<Vec<u8>> {
        let mut out = vec![Vec::new(); self.num_blocks()];
        for (i, &b) in self.assign.iter().enumerate() {
            out[b as usize].push(i as u8 + 1);
        }
        out
    }

    /// For an all-singleton partition, the vertex it pins down: the point
    /// whose coordinate at the element of block `k` is `k+1`.
    pub fn as_vertex(&self) -> Option<Permutation> {
        if self.num_blocks() != self.ground_size() {
            return None;
        }
        let mut image = vec![0u8; self.ground_size()];
        for (i, &b) in self.assign.iter().enumerate() {
            image[i] = b + 1;
        }
        Some(Permutation(image))
    }

    /// Whether the vertex (a permutation point) lies on this face: block `k`
    /// must carry exactly the value range of its position in the order.
    pub fn contains_vertex(&self, p: &Permutation) -> bool {
        if p.0.len() != self.ground_size() {
            return false;
        }
        let blocks = self.blocks();
        let mut lo = 1u8;
        for block in blocks {
            let hi = lo + block.len() as u8 - 1;
            for &e in &block {
                let v = p.0[e as usize - 1];
                if v < lo || v > hi {
                    return false;
                }
            }
            lo = hi + 1;
        }
        true
    }
}

/// All `(n+1)!` vertices, lexicographic: the permutations of `(1, ..., n+1)`.
pub fn vertices(n: usize) -> Result<Vec<Permutation>> {
    if n < 1 {
        return Err(ConeError::InvalidArgument("n must be >= 1".into()));
    }
    let m = n + 1;
    let mut current: Vec<u8> = (1..=m as u8).collect();
    let mut out = Vec::new();
    loop {
        out.push(Permutation(current.clone()));
        // next lexicographic permutation
        let mut i = m.wrapping_sub(2);
        while i != usize::MAX && current[i] >= current[i + 1] {
            i = i.wrapping_sub(1);
        }
        if i == usize::MAX {
            break;
        }
        let mut j = m - 1;
        while current[j] <= current[i] {
            j -= 1;
        }
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    Ok(out)
}

/// Coordinate sum shared by every vertex, `(n+1)(n+2)/2`.
pub fn vertex_coordinate_sum(n: usize) -> u64 {
    let m = (n + 1) as u64;
    m * (m + 1) / 2
}

/// Complete face list with the f-vector (faces counted by dimension).
#[derive(Debug, Clone)]
pub struct FaceCensus {
    pub faces: Vec<OrderedSetPartition>,
    /// `f_vector[k]` = number of faces of dimension `k`, `k = 0..=n`.
    pub f_vector: Vec<u64>,
}

impl FaceCensus {
    pub fn total(&self) -> u64 {
        self.faces.len() as u64
    }

    /// Alternating sum over all faces including the top face.
    pub fn euler_sum(&self) -> i64 {
        self.f_vector
            .iter()
            .enumerate()
            .map(|(dim, &count)| {
                if dim % 2 == 0 {
                    count as i64
                } else {
                    -(count as i64)
                }
            })
            .sum()
    }
}

/// Enumerates every face of the `n`-permutohedron as an ordered set
/// partition of `{1..n+1}`, by recursive block building.
///
/// Guarded at `n <= 7`; larger sizes go through [`faces_unchecked`].
pub fn faces(n: usize) -> Result<FaceCensus> {
    if n < 1 {
        return Err(ConeError::InvalidArgument("n must be >= 1".into()));
    }
    if n > MAX_FACE_N {
        return Err(ConeError::SizeGuard(format!(
            "face enumeration is guarded at n <= {MAX_FACE_N} (requested {n})"
        )));
    }
    Ok(faces_unchecked(n))
}

/// Unguarded face enumeration; memory grows like the ordered Bell numbers.
pub fn faces_unchecked(n: usize) -> FaceCensus {
    let m = n + 1;
    let full: u16 = (1u16 << m) - 1;
    let mut faces = Vec::new();
    let mut assign = vec![0u8; m];

    fn recurse(
        remaining: u16,
        block: u8,
        m: usize,
        assign: &mut Vec<u8>,
        out: &mut Vec<OrderedSetPartition>,
    ) {
        if remaining == 0 {
            out.push(OrderedSetPartition {
                assign: assign.clone(),
                num_blocks: block,
            });
            return;
        }
        // iterate nonempty submasks of `remaining` as the next block
        let mut sub = remaining;
        loop {
            for i in 0..m {
                if sub & (1 << i) != 0 {
                    assign[i] = block;
                }
            }
            recurse(remaining & !sub, block + 1, m, assign, out);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & remaining;
            if sub == 0 {
                break;
            }
        }
    }

    recurse(full, 0, m, &mut assign, &mut faces);
    faces.sort();
    let mut f_vector = vec![0u64; n + 1];
    for f in &faces {
        f_vector[f.dimension()] += 1;
    }
    FaceCensus { faces, f_vector }
}

/// Number of surjections from an `m`-set onto a `k`-set, by inclusion-exclusion.
///
/// Independent route for cross-checking the block-building enumeration.
pub fn surjection_count(m: u32, k: u32) -> i128 {
    let mut total: i128 = 0;
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1i128 } else { -1i128 };
        let binom = binomial(k as i128, j as i128);
        total += sign * binom * ((k - j) as i128).pow(m);
    }
    total
}

fn binomial(n: i128, k: i128) -> i128 {
    if k < 0 || k > n {
        return 0;
    }
    let mut r = 1i128;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// The Weyl-chamber fan on the trace-zero hyperplane: maximal cones indexed
/// by coordinate orderings, lower cones by ordered set partitions (ties
/// across blocks).
#[derive(Debug, Clone, Copy)]
pub struct WeylFan {
    n: usize,
}

/// The fan of chambers cut out by the hyperplanes `a_i = a_j`.
pub fn weyl_chamber_fan(n: usize) -> Result<WeylFan> {
    if n < 1 {
        return Err(ConeError::InvalidArgument("n must be >= 1".into()));
    }
    Ok(WeylFan { n })
}

impl WeylFan {
    pub fn n(&self) -> usize {
        self.n
    }

    /// One maximal cone per ordering of `n+1` coordinates.
    pub fn maximal_cone_count(&self) -> u128 {
        factorial(self.n as u32 + 1)
    }

    /// The (unique) cone whose relative interior contains `a`: coordinates
    /// sorted ascending, tied values grouped into one block. Every point is
    /// classified; ties land in shared lower-dimensional faces.
    pub fn classify(&self, a: &[f64]) -> Result<OrderedSetPartition> {
        let m = self.n + 1;
        if a.len() != m {
            return Err(ConeError::DimensionMismatch(format!(
                "point has {} coordinates, the fan lives in {} of them",
                a.len(),
                m
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(ConeError::NonFinite);
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| a[i].partial_cmp(&a[j]).unwrap().then(i.cmp(&j)));
        let mut assign = vec![0u8; m];
        let mut block = 0u8;
        for w in 0..m {
            if w > 0 && a[order[w]] > a[order[w - 1]] {
                block += 1;
            }
            assign[order[w]] = block;
        }
        Ok(OrderedSetPartition {
            assign,
            num_blocks: block + 1,
        })
    }
}

pub fn factorial(k: u32) -> u128 {
    (1..=k as u128).product()
}

/// Fixed-point stratum: an independent set `J` of simple-root indices and the
/// coset count `(n+1)!/2^|J|`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointStratum {
    /// 1-based indices into the simple roots `g_1..g_n`; no two adjacent.
    pub j: Vec<u8>,
    pub size: u128,
}

/// Strata of torus-fixed points: one per independent subset of the simple
/// roots, of size `(n+1)!/2^|J|`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointStrata {
    pub strata: Vec<FixedPointStratum>,
    pub total: u128,
}

/// Enumerates all independent `J` (no two consecutive simple roots) with the
/// stratum sizes and grand total.
pub fn fixed_point_strata(n: usize) -> Result<FixedPointStrata> {
    if n < 1 {
        return Err(ConeError::InvalidArgument("n must be >= 1".into()));
    }
    let w_order = factorial(n as u32 + 1);
    let mut strata = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask & (mask << 1) != 0 {
            continue; // adjacent simple roots do not commute
        }
        let j: Vec<u8> = (0..n as u8).filter(|i| mask & (1 << i) != 0).collect();
        let size = w_order >> j.len();
        strata.push(FixedPointStratum { j, size });
    }
    strata.sort_by(|a, b| (a.j.len(), &a.j).cmp(&(b.j.len(), &b.j)));
    let total = strata.iter().map(|s| s.size).sum();
    Ok(FixedPointStrata { strata, total })
}

/// Coset count of the reflection subgroup generated by the simple
/// transpositions in `J`, by direct enumeration of all permutations.
///
/// Matches `(n+1)!/2^|J|` exactly; kept as the independent route for tests.
pub fn coset_count_by_enumeration(n: usize, j: &[u8]) -> Result<u128> {
    if n < 1 || n > 8 {
        return Err(ConeError::SizeGuard(
            "coset enumeration is intended for n <= 8".into(),
        ));
    }
    let verts = vertices(n)?;
    let mut reps = std::collections::BTreeSet::new();
    for v in &verts {
        // canonical coset representative: minimum over the subgroup orbit,
        // multiplying by each generating transposition (they commute)
        let mut orbit = vec![v.0.clone()];
        for &gi in j {
            let mut next = Vec::with_capacity(orbit.len() * 2);
            for w in &orbit {
                let mut swapped = w.clone();
                swapped.swap(gi as usize - 1, gi as usize);
                next.push(w.clone());
                next.push(swapped);
            }
            orbit = next;
        }
        reps.insert(orbit.into_iter().min().unwrap());
    }
    Ok(reps.len() as u128)
}

/// Cell-dimension census of the gradient flow induced by a generic weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BbCensus {
    /// dimension -> number of cells of that dimension
    pub by_dimension: BTreeMap<usize, u64>,
    /// lexicographic rank of the unique dimension-0 vertex
    pub source: u64,
    /// lexicographic rank of the unique dimension-n vertex
    pub sink: u64,
}

/// One cell per vertex; the cell dimension at a vertex is the number of
/// permutohedron edges along which the weight increases. Requires a weight
/// with pairwise-distinct entries (checked); the census does not depend on
/// which generic weight is chosen.
pub fn bb_cells(n: usize, weight: &[i64]) -> Result<BbCensus> {
    if n < 1 {
        return Err(ConeError::InvalidArgument("n must be >= 1".into()));
    }
    let m = n + 1;
    if weight.len() != m {
        return Err(ConeError::DimensionMismatch(format!(
            "weight has {} entries, expected {}",
            weight.len(),
            m
        )));
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if weight[i] == weight[j] {
                return Err(ConeError::InvalidArgument(format!(
                    "weight is not generic: entries {i} and {j} are tied"
                )));
            }
        }
    }
    let verts = vertices(n)?;
    let mut by_dimension: BTreeMap<usize, u64> = BTreeMap::new();
    let mut source = None;
    let mut sink = None;
    for (id, v) in verts.iter().enumerate() {
        let pos = v.positions();
        // edge k swaps the positions of values k and k+1; it ascends when the
        // weight at the position of k exceeds the weight at the position of k+1
        let dim = (0..n)
            .filter(|&k| weight[pos[k]] > weight[pos[k + 1]])
            .count();
        *by_dimension.entry(dim).or_insert(0) += 1;
        if dim == 0 {
            source = Some(id as u64);
        }
        if dim == n {
            sink = Some(id as u64);
        }
    }
    let source = source.ok_or_else(|| {
        ConeError::InvalidArgument("no dimension-0 cell found".into())
    })?;
    let sink = sink.ok_or_else(|| {
        ConeError::InvalidArgument("no top-dimensional cell found".into())
    })?;
    Ok(BbCensus {
        by_dimension,
        source,
        sink,
    })
}

/// One boundary stratum of the compactified chart: a proper face together
/// with the cells centered on it.
#[derive(Debug, Clone)]
pub struct StratumInfo {
    pub osp: OrderedSetPartition,
    /// lexicographic ranks of the vertices lying on the stratum (the centers
    /// of the cells that touch it)
    pub cell_centers: Vec<u64>,
}

/// Boundary strata grouped by dimension; total is one less than the face count.
#[derive(Debug, Clone)]
pub struct ResidualStrata {
    pub by_dimension: BTreeMap<usize, Vec<StratumInfo>>,
    pub total: u64,
}

/// The proper faces (at least two blocks) of the compactified diagonal chart,
/// each tagged with the vertices on it.
pub fn frobenius_residual_strata(n: usize) -> Result<ResidualStrata> {
    let census = faces(n)?;
    let mut by_dimension: BTreeMap<usize, Vec<StratumInfo>> = BTreeMap::new();
    let mut total = 0u64;
    for osp in &census.faces {
        if osp.num_blocks() < 2 {
            continue; // the top face is not part of the boundary
        }
        total += 1;
        let centers = vertices_on_face(osp);
        by_dimension
            .entry(osp.dimension())
            .or_default()
            .push(StratumInfo {
                osp: osp.clone(),
                cell_centers: centers,
            });
    }
    Ok(ResidualStrata { by_dimension, total })
}

/// Lexicographic ranks of the vertices on a face, generated blockwise: each
/// block independently permutes its value range.
fn vertices_on_face(osp: &OrderedSetPartition) -> Vec<u64> {
    let m = osp.ground_size();
    let blocks = osp.blocks();
    let mut image = vec![0u8; m];
    let mut ranks = Vec::new();

    fn assign_block(
        blocks: &[Vec<u8>],
        b: usize,
        lo: u8,
        image: &mut Vec<u8>,
        ranks: &mut Vec<u64>,
    ) {
        if b == blocks.len() {
            let p = Permutation(image.clone());
            ranks.push(p.lex_rank());
            return;
        }
        let block = &blocks[b];
        let len = block.len();
        let values: Vec<u8> = (lo..lo + len as u8).collect();
        let mut perm: Vec<usize> = (0..len).collect();
        loop {
            for (slot, &vi) in perm.iter().enumerate() {
                image[block[slot] as usize - 1] = values[vi];
            }
            assign_block(blocks, b + 1, lo + len as u8, image, ranks);
            // next permutation of `perm`
            let mut i = len.wrapping_sub(2);
            while i != usize::MAX && perm[i] >= perm[i + 1] {
                i = i.wrapping_sub(1);
            }
            if i == usize::MAX {
                break;
            }
            let mut j = len - 1;
            while perm[j] <= perm[i] {
                j -= 1;
            }
            perm.swap(i, j);
            perm[i + 1..].reverse();
        }
    }

    assign_block(&blocks, 0, 1, &mut image, &mut ranks);
    ranks.sort_unstable();
    ranks
}

/// Index set over which the fixed-point sum of the degree formula ranges.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexedFixedPoint {
    pub vertex_rank: u64,
    pub point: Vec<u8>,
    /// rational weight placeholder; not computed here
    pub weight: Option<f64>,
}

/// Ambient fixed-point stratum beyond the chart vertices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmbientStratum {
    pub j: Vec<u8>,
    pub size: u128,
    pub note: String,
}

/// Join of the fixed-point strata with the boundary strata: the vertices on
/// boundary strata index the degree sum, weights left as placeholders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexingReport {
    pub indexed: Vec<IndexedFixedPoint>,
    pub ambient: Vec<AmbientStratum>,
    pub index_set_size: u64,
}

/// Builds the fixed-point indexing report. Guarded at `n <= 5`.
pub fn ml_degree_indexing_report(n: usize) -> Result<IndexingReport> {
    if n < 1 {
        return Err(ConeError::InvalidArgument("n must be >= 1".into()));
    }
    if n > MAX_REPORT_N {
        return Err(ConeError::SizeGuard(format!(
            "indexing report is guarded at n <= {MAX_REPORT_N} (requested {n})"
        )));
    }
    let verts = vertices(n)?;
    let strata = frobenius_residual_strata(n)?;
    // every vertex lies on its own vertex stratum; collect from the join so
    // the report is the actual intersection, not an assumption
    let mut on_boundary = std::collections::BTreeSet::new();
    for infos in strata.by_dimension.values() {
        for info in infos {
            for &r in &info.cell_centers {
                on_boundary.insert(r);
            }
        }
    }
    let indexed: Vec<IndexedFixedPoint> = on_boundary
        .iter()
        .map(|&r| IndexedFixedPoint {
            vertex_rank: r,
            point: verts[r as usize].0.clone(),
            weight: None,
        })
        .collect();
    let fixed = fixed_point_strata(n)?;
    let ambient = fixed
        .strata
        .into_iter()
        .filter(|s| !s.j.is_empty())
        .map(|s| AmbientStratum {
            j: s.j,
            size: s.size,
            note: "ambient stratum; vertex placement outside the chart census".into(),
        })
        .collect();
    let index_set_size = indexed.len() as u64;
    Ok(IndexingReport {
        indexed,
        ambient,
        index_set_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertices_n1() {
        let v = vertices(1).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].0, vec![1, 2]);
        assert_eq!(v[1].0, vec![2, 1]);
    }

    #[test]
    fn vertices_coordinate_sum() {
        for n in 1..=4 {
            let sum = vertex_coordinate_sum(n);
            for v in vertices(n).unwrap() {
                assert_eq!(v.0.iter().map(|&x| x as u64).sum::<u64>(), sum);
                assert!(v.is_valid());
            }
        }
    }

    #[test]
    fn hexagon_f_vector() {
        let census = faces(2).unwrap();
        assert_eq!(census.f_vector, vec![6, 6, 1]);
        assert_eq!(census.total(), 13);
    }

    #[test]
    fn n3_f_vector() {
        let census = faces(3).unwrap();
        assert_eq!(census.f_vector, vec![24, 36, 14, 1]);
        assert_eq!(census.total(), 75);
    }

    #[test]
    fn euler_sum_is_one() {
        for n in 1..=4 {
            assert_eq!(faces(n).unwrap().euler_sum(), 1, "n = {n}");
        }
    }

    #[test]
    fn face_totals_match_surjection_counting() {
        // ordered Bell numbers 3, 13, 75, 541 by two independent routes
        let expected = [3u64, 13, 75, 541];
        for (n, &expect) in (1..=4).zip(&expected) {
            let census = faces(n).unwrap();
            assert_eq!(census.total(), expect);
            let m = (n + 1) as u32;
            let by_surjections: i128 = (1..=m).map(|k| surjection_count(m, k)).sum();
            assert_eq!(by_surjections as u64, expect);
            // per-dimension counts are surjection counts onto k blocks
            for k in 1..=m {
                let dim = (m - k) as usize;
                assert_eq!(census.f_vector[dim] as i128, surjection_count(m, k));
            }
        }
    }

    #[test]
    fn face_guard() {
        assert!(matches!(faces(8), Err(ConeError::SizeGuard(_))));
    }

    #[test]
    fn singleton_faces_are_vertices() {
        let census = faces(2).unwrap();
        let verts = vertices(2).unwrap();
        let mut from_faces: Vec<Permutation> = census
            .faces
            .iter()
            .filter_map(|f| f.as_vertex())
            .collect();
        from_faces.sort();
        let mut expected = verts.clone();
        expected.sort();
        assert_eq!(from_faces, expected);
    }

    #[test]
    fn fan_classification() {
        let fan = weyl_chamber_fan(2).unwrap();
        assert_eq!(fan.maximal_cone_count(), 6);
        // strictly sorted point: unique maximal cone of its ordering
        let osp = fan.classify(&[-1.0, 0.25, 0.75]).unwrap();
        assert_eq!(osp.num_blocks(), 3);
        assert_eq!(osp.blocks(), vec![vec![1], vec![2], vec![3]]);
        // ties land in a shared face
        let osp = fan.classify(&[0.5, 0.5, -1.0]).unwrap();
        assert_eq!(osp.num_blocks(), 2);
        assert_eq!(osp.blocks(), vec![vec![3], vec![1, 2]]);
    }

    #[test]
    fn fixed_point_totals() {
        assert_eq!(fixed_point_strata(1).unwrap().total, 3);
        assert_eq!(fixed_point_strata(2).unwrap().total, 12);
        let s3 = fixed_point_strata(3).unwrap();
        assert_eq!(s3.total, 66);
        let sizes: Vec<u128> = s3.strata.iter().map(|s| s.size).collect();
        assert_eq!(sizes, vec![24, 12, 12, 12, 6]);
    }

    #[test]
    fn coset_enumeration_matches_formula() {
        for n in 1..=4 {
            for stratum in fixed_point_strata(n).unwrap().strata {
                let by_enum = coset_count_by_enumeration(n, &stratum.j).unwrap();
                assert_eq!(by_enum, stratum.size, "n={n} J={:?}", stratum.j);
            }
        }
    }

    #[test]
    fn bb_census_segment_and_hexagon() {
        let c = bb_cells(1, &[1, 0]).unwrap();
        assert_eq!(c.by_dimension, BTreeMap::from([(0, 1), (1, 1)]));

        let c = bb_cells(2, &[3, -1, 2]).unwrap();
        assert_eq!(c.by_dimension, BTreeMap::from([(0, 1), (1, 4), (2, 1)]));
        assert_ne!(c.source, c.sink);
    }

    #[test]
    fn bb_rejects_tied_weights() {
        assert!(matches!(
            bb_cells(2, &[1, 1, 0]),
            Err(ConeError::InvalidArgument(_))
        ));
    }

    #[test]
    fn residual_strata_counts() {
        let r1 = frobenius_residual_strata(1).unwrap();
        assert_eq!(r1.total, 2);
        let r2 = frobenius_residual_strata(2).unwrap();
        assert_eq!(r2.total, 12);
        // vertex strata carry exactly one cell center each
        for info in &r2.by_dimension[&0] {
            assert_eq!(info.cell_centers.len(), 1);
        }
        // edge strata of the hexagon carry two endpoints
        for info in &r2.by_dimension[&1] {
            assert_eq!(info.cell_centers.len(), 2);
        }
    }

    #[test]
    fn indexing_report_counts() {
        let r = ml_degree_indexing_report(1).unwrap();
        assert_eq!(r.index_set_size, 2);
        let r = ml_degree_indexing_report(2).unwrap();
        assert_eq!(r.index_set_size, 6);
        assert!(r.indexed.iter().all(|p| p.weight.is_none()));
        assert_eq!(r.ambient.len(), 2);
        assert!(matches!(
            ml_degree_indexing_report(6),
            Err(ConeError::SizeGuard(_))
        ));
    }

    #[test]
    fn lex_rank_is_the_enumeration_index() {
        for n in 1..=4 {
            for (i, v) in vertices(n).unwrap().iter().enumerate() {
                assert_eq!(v.lex_rank(), i as u64);
            }
        }
    }
}
