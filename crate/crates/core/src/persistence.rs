//! Cubical persistence of 2D scalar fields under the super-level filtration.
//!
//! The field is read as a V-construction complex: pixels are vertices, edges
//! join 4-neighbors, and a unit square is present once all four corners are.
//! A cell carries the minimum of its vertex values, so it enters the
//! super-level complex when its last vertex does. Features are born at high
//! thresholds and die at lower ones, giving birth >= death everywhere.
//!
//! Degree 0 runs union-find over pixels in descending value order with the
//! elder rule. Degree 1 uses planar duality: a 1-cycle of the super-level set
//! walls off a bounded region of the complement, so holes are tracked as
//! components of the dual grid (one node per unit square plus the unbounded
//! face) merged in ascending vertex order, with the unbounded face as the
//! eldest component. Both passes keep only pairs that are visible at the
//! level of filtration values, i.e. birth strictly above death; the lone
//! surviving component is emitted as essential with death clamped to the
//! field minimum.

use std::fmt;

use crate::field::{FiltrationKind, ScalarField};

/// Homology degree of a diagram point: components or loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    Zero,
    One,
}

impl Degree {
    pub const ALL: [Degree; 2] = [Degree::Zero, Degree::One];

    pub fn as_u8(&self) -> u8 {
        match self {
            Degree::Zero => 0,
            Degree::One => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Degree> {
        match v {
            0 => Some(Degree::Zero),
            1 => Some(Degree::One),
            _ => None,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// One birth-death pair of the super-level filtration (birth >= death).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePoint {
    pub degree: Degree,
    pub birth: f64,
    pub death: f64,
    pub essential: bool,
}

impl PersistencePoint {
    pub fn new(degree: Degree, birth: f64, death: f64, essential: bool) -> Self {
        debug_assert!(birth >= death, "super-level convention requires b >= d");
        PersistencePoint {
            degree,
            birth,
            death,
            essential,
        }
    }

    /// Lifespan of the feature across thresholds.
    pub fn persistence(&self) -> f64 {
        self.birth - self.death
    }
}

/// Multiset of persistence points at one scale under one filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub points: Vec<PersistencePoint>,
    pub scale_index: u32,
    pub filtration: FiltrationKind,
}

impl PersistenceDiagram {
    /// Wraps points in canonical order (degree, then birth and death
    /// descending, essentials first among exact ties).
    pub fn new(
        mut points: Vec<PersistencePoint>,
        scale_index: u32,
        filtration: FiltrationKind,
    ) -> Self {
        canonical_sort(&mut points);
        PersistenceDiagram {
            points,
            scale_index,
            filtration,
        }
    }

    /// Points of one degree, in diagram order.
    pub fn points_of_degree(&self, degree: Degree) -> Vec<PersistencePoint> {
        self.points
            .iter()
            .copied()
            .filter(|p| p.degree == degree)
            .collect()
    }

    /// Drops zero-persistence points (for constant regions these are the
    /// essential points themselves).
    pub fn without_zero_persistence(&self) -> PersistenceDiagram {
        PersistenceDiagram {
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| p.persistence() > 0.0)
                .collect(),
            scale_index: self.scale_index,
            filtration: self.filtration,
        }
    }
}

/// Sort key shared by diagram construction and CSV output.
pub(crate) fn canonical_sort(points: &mut [PersistencePoint]) {
    points.sort_by(|a, b| {
        a.degree
            .cmp(&b.degree)
            .then(b.birth.total_cmp(&a.birth))
            .then(b.death.total_cmp(&a.death))
            .then(b.essential.cmp(&a.essential))
    });
}

/// Union-find with path halving; merge policy lives at the call site.
struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut node: u32) -> u32 {
        while self.parent[node as usize] != node {
            let grand = self.parent[self.parent[node as usize] as usize];
            self.parent[node as usize] = grand;
            node = grand;
        }
        node
    }

    fn link(&mut self, child: u32, root: u32) {
        self.parent[child as usize] = root;
    }
}

/// Computes the degree-0 and degree-1 diagram of a field.
pub fn compute_pd(
    field: &ScalarField,
    scale_index: u32,
    filtration: FiltrationKind,
) -> PersistenceDiagram {
    let mut points = degree_zero_points(field);
    points.extend(degree_one_points(field));
    PersistenceDiagram::new(points, scale_index, filtration)
}

/// Counts features alive at threshold `tau`: finite points spanning it plus
/// essentials born at or above it.
pub fn betti_at(pd: &PersistenceDiagram, tau: f64) -> (usize, usize) {
    let mut counts = [0usize; 2];
    for p in &pd.points {
        let alive = if p.essential {
            p.birth >= tau
        } else {
            p.birth >= tau && tau > p.death
        };
        if alive {
            counts[p.degree.as_u8() as usize] += 1;
        }
    }
    (counts[0], counts[1])
}

/// Elder comparison for components: higher birth wins, then the component
/// holding the smaller row-major index.
fn primal_is_elder(birth_a: f64, min_a: u32, birth_b: f64, min_b: u32) -> bool {
    birth_a > birth_b || (birth_a == birth_b && min_a < min_b)
}

fn degree_zero_points(field: &ScalarField) -> Vec<PersistencePoint> {
    let values = field.values();
    let n = values.len();
    let (w, h) = (field.width(), field.height());

    // Descending value, ascending index: plateau pixels are swept in
    // row-major order within their threshold batch.
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| {
        values[b as usize]
            .total_cmp(&values[a as usize])
            .then(a.cmp(&b))
    });
    let mut pos = vec![0u32; n];
    for (rank, &idx) in order.iter().enumerate() {
        pos[idx as usize] = rank as u32;
    }

    let mut sets = DisjointSet::new(n);
    let mut birth = vec![0.0f64; n];
    let mut min_index = vec![0u32; n];
    let mut points = Vec::new();

    for &pixel in &order {
        let v = values[pixel as usize];
        birth[pixel as usize] = v;
        min_index[pixel as usize] = pixel;

        let row = pixel as usize / w;
        let col = pixel as usize % w;
        let mut neighbors = [0u32; 4];
        let mut count = 0;
        if row > 0 {
            neighbors[count] = pixel - w as u32;
            count += 1;
        }
        if col > 0 {
            neighbors[count] = pixel - 1;
            count += 1;
        }
        if col + 1 < w {
            neighbors[count] = pixel + 1;
            count += 1;
        }
        if row + 1 < h {
            neighbors[count] = pixel + w as u32;
            count += 1;
        }

        for &nb in &neighbors[..count] {
            if pos[nb as usize] >= pos[pixel as usize] {
                continue; // not yet part of the super-level set
            }
            let ra = sets.find(pixel);
            let rb = sets.find(nb);
            if ra == rb {
                continue;
            }
            let a_elder = primal_is_elder(
                birth[ra as usize],
                min_index[ra as usize],
                birth[rb as usize],
                min_index[rb as usize],
            );
            let (elder, young) = if a_elder { (ra, rb) } else { (rb, ra) };
            // The younger component dies at the current value; pairs born and
            // killed inside one threshold batch are invisible at value level.
            if birth[young as usize] > v {
                points.push(PersistencePoint::new(
                    Degree::Zero,
                    birth[young as usize],
                    v,
                    false,
                ));
            }
            sets.link(young, elder);
            if min_index[young as usize] < min_index[elder as usize] {
                min_index[elder as usize] = min_index[young as usize];
            }
        }
    }

    // The full grid is connected, so exactly one component survives.
    let root = sets.find(0);
    debug_assert!(order.iter().all(|&p| sets.find(p) == root));
    points.push(PersistencePoint::new(
        Degree::Zero,
        field.max_value(),
        field.min_value(),
        true,
    ));
    points
}

/// Dual node id of the unbounded face.
const OUTSIDE: usize = usize::MAX;

fn degree_one_points(field: &ScalarField) -> Vec<PersistencePoint> {
    let (w, h) = (field.width(), field.height());
    if w < 2 || h < 2 {
        return Vec::new(); // a path complex carries no loops
    }
    let values = field.values();
    let n = values.len();
    let (dw, dh) = (w - 1, h - 1);
    let n_sq = dw * dh;
    let outside = n_sq as u32;

    // Ascending value, ascending index: the complement grows as the
    // threshold rises past each vertex.
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| {
        values[a as usize]
            .total_cmp(&values[b as usize])
            .then(a.cmp(&b))
    });

    let mut sets = DisjointSet::new(n_sq + 1);
    // Appearance value of each dual region; forward in time this is the
    // threshold at which the hole fills in.
    let mut appeared = vec![f64::NAN; n_sq];
    let mut min_index = vec![0usize; n_sq + 1];
    min_index[n_sq] = OUTSIDE;
    let mut points = Vec::new();

    let mut merge = |sets: &mut DisjointSet,
                     appeared: &mut [f64],
                     min_index: &mut [usize],
                     a: u32,
                     b: u32,
                     at: f64| {
        let ra = sets.find(a);
        let rb = sets.find(b);
        if ra == rb {
            return;
        }
        // The unbounded face is always elder; otherwise the region that
        // appeared at the lower value survives.
        let a_elder = if ra == outside || rb == outside {
            ra == outside
        } else {
            let (da, db) = (appeared[ra as usize], appeared[rb as usize]);
            da < db || (da == db && min_index[ra as usize] < min_index[rb as usize])
        };
        let (elder, young) = if a_elder { (ra, rb) } else { (rb, ra) };
        let death = appeared[young as usize];
        if at > death {
            points.push(PersistencePoint::new(Degree::One, at, death, false));
        }
        sets.link(young, elder);
        if elder != outside && min_index[young as usize] < min_index[elder as usize] {
            min_index[elder as usize] = min_index[young as usize];
        }
    };

    for &pixel in &order {
        let v = values[pixel as usize];
        let row = pixel as usize / w;
        let col = pixel as usize % w;

        // Squares incident to this vertex open up to each other (and to the
        // unbounded face when the vertex sits on the border) once the vertex
        // leaves the super-level set.
        let mut incident = [0u32; 4];
        let mut count = 0;
        for dr in [row.wrapping_sub(1), row] {
            for dc in [col.wrapping_sub(1), col] {
                if dr < dh && dc < dw {
                    incident[count] = (dr * dw + dc) as u32;
                    count += 1;
                }
            }
        }
        for &sq in &incident[..count] {
            if appeared[sq as usize].is_nan() {
                // First corner processed is the square's minimum vertex.
                appeared[sq as usize] = v;
                min_index[sq as usize] = sq as usize;
            }
        }
        let border = row == 0 || row + 1 == h || col == 0 || col + 1 == w;
        let anchor = if border { outside } else { incident[0] };
        for &sq in &incident[..count] {
            merge(&mut sets, &mut appeared, &mut min_index, anchor, sq, v);
        }
    }

    // Once every vertex has left, the complement is one unbounded region.
    debug_assert!((0..n_sq as u32).all(|q| sets.find(q) == outside));
    points
}
