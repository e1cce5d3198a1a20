//! Brute-force persistence via boundary-matrix reduction over GF(2).
//!
//! Builds the full cubical complex of a small field, orders cells by
//! descending value (ties by dimension, then lexicographic position), and
//! runs the standard left-to-right column reduction. Independent of the
//! union-find path in `persistence`, it serves as the verification oracle:
//! the two must agree as exact multisets on every field within the size
//! limit.

use thiserror::Error;

use crate::field::{FiltrationKind, ScalarField};
use crate::persistence::{Degree, PersistenceDiagram, PersistencePoint};

/// Fields beyond this many pixels are rejected; reduction is cubic-ish.
pub const ORACLE_PIXEL_LIMIT: usize = 256;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("field has {pixels} pixels, oracle limit is {limit}")]
    FieldTooLarge { pixels: usize, limit: usize },
}

#[derive(Clone, Copy)]
struct Cell {
    dim: u8,
    // Doubled coordinates: vertices on even rows/cols, squares on odd/odd.
    row2: u32,
    col2: u32,
    value: f64,
}

/// Full-complex reduction; must equal `compute_pd` as a multiset.
pub fn oracle_pd(field: &ScalarField) -> Result<PersistenceDiagram, OracleError> {
    let pixels = field.len();
    if pixels > ORACLE_PIXEL_LIMIT {
        return Err(OracleError::FieldTooLarge {
            pixels,
            limit: ORACLE_PIXEL_LIMIT,
        });
    }
    Ok(PersistenceDiagram::new(
        oracle_points(field),
        1,
        FiltrationKind::Intensity,
    ))
}

fn oracle_points(field: &ScalarField) -> Vec<PersistencePoint> {
    let (w, h) = (field.width(), field.height());
    let at = |r: usize, c: usize| field.get(r, c);

    let mut cells = Vec::new();
    for r in 0..h {
        for c in 0..w {
            cells.push(Cell {
                dim: 0,
                row2: 2 * r as u32,
                col2: 2 * c as u32,
                value: at(r, c),
            });
            if c + 1 < w {
                cells.push(Cell {
                    dim: 1,
                    row2: 2 * r as u32,
                    col2: 2 * c as u32 + 1,
                    value: at(r, c).min(at(r, c + 1)),
                });
            }
            if r + 1 < h {
                cells.push(Cell {
                    dim: 1,
                    row2: 2 * r as u32 + 1,
                    col2: 2 * c as u32,
                    value: at(r, c).min(at(r + 1, c)),
                });
            }
            if r + 1 < h && c + 1 < w {
                let value = at(r, c)
                    .min(at(r, c + 1))
                    .min(at(r + 1, c))
                    .min(at(r + 1, c + 1));
                cells.push(Cell {
                    dim: 2,
                    row2: 2 * r as u32 + 1,
                    col2: 2 * c as u32 + 1,
                    value,
                });
            }
        }
    }

    // Super-level filtration order: a cell enters when its minimum vertex
    // does, lower-dimensional cells first within a threshold batch.
    cells.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then(a.dim.cmp(&b.dim))
            .then(a.row2.cmp(&b.row2))
            .then(a.col2.cmp(&b.col2))
    });

    let index_of = {
        let mut map = std::collections::HashMap::new();
        for (i, cell) in cells.iter().enumerate() {
            map.insert((cell.row2, cell.col2), i);
        }
        map
    };

    // Boundary columns as sorted filtration indices.
    let boundary = |cell: &Cell| -> Vec<usize> {
        let (r2, c2) = (cell.row2, cell.col2);
        let faces: Vec<(u32, u32)> = match cell.dim {
            0 => Vec::new(),
            1 => {
                if c2 % 2 == 1 {
                    vec![(r2, c2 - 1), (r2, c2 + 1)]
                } else {
                    vec![(r2 - 1, c2), (r2 + 1, c2)]
                }
            }
            _ => vec![(r2 - 1, c2), (r2 + 1, c2), (r2, c2 - 1), (r2, c2 + 1)],
        };
        let mut column: Vec<usize> = faces.iter().map(|key| index_of[key]).collect();
        column.sort_unstable();
        column
    };

    let n = cells.len();
    let mut reduced: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    let mut killed = vec![false; n];

    for (j, cell) in cells.iter().enumerate() {
        let mut column = boundary(cell);
        while let Some(&low) = column.last() {
            match pivot_owner[low] {
                Some(owner) => column = xor_columns(&column, &reduced[owner]),
                None => break,
            }
        }
        if let Some(&low) = column.last() {
            pivot_owner[low] = Some(j);
            killed[low] = true;
        } else {
            debug_assert!(cells[j].dim < 2, "square boundaries are independent");
        }
        reduced.push(column);
    }

    let min_value = field.min_value();
    let mut points = Vec::new();
    for (low, owner) in pivot_owner.iter().enumerate() {
        if let Some(j) = owner {
            let birth = cells[low].value;
            let death = cells[*j].value;
            // Pairs inside one threshold batch never show at value level.
            if birth > death {
                let degree = if cells[low].dim == 0 {
                    Degree::Zero
                } else {
                    Degree::One
                };
                points.push(PersistencePoint::new(degree, birth, death, false));
            }
        }
    }
    for (i, cell) in cells.iter().enumerate() {
        if killed[i] || !reduced[i].is_empty() {
            continue;
        }
        // Unpaired creators are essential classes; a filled grid is simply
        // connected, so only a single vertex can qualify.
        assert_eq!(cell.dim, 0, "unexpected essential class above degree 0");
        points.push(PersistencePoint::new(
            Degree::Zero,
            cell.value,
            min_value,
            true,
        ));
    }
    points
}

fn xor_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
