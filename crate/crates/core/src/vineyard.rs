//! Cross-scale vine tracking and stable diagram extraction.
//!
//! Diagrams of consecutive pyramid levels are matched per degree; each
//! accepted match either extends the vine that currently ends at the source
//! point or starts a new one. A vine whose current point goes unmatched is
//! terminated. Completed vines are scored by a persistence-weighted average
//! of 1/(1 + segment distance); vines at or above the stability threshold
//! contribute the source point of their middle segment to the stable
//! diagram, and the per-degree results are united.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::field::{FiltrationKind, ScalePyramid};
use crate::matching::{match_costs, points_distance_matrix, DistanceMetric};
use crate::persistence::{compute_pd, Degree, PersistenceDiagram, PersistencePoint};

/// Shipped defaults for the two thresholds; see `DistanceMetric` for the
/// default metric (relative persistence).
pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.3;
pub const DEFAULT_STABILITY_THRESHOLD: f64 = 0.7;

#[derive(Debug, Error)]
pub enum TrackError {
    #[error("tracking needs at least two diagrams, got {0}")]
    TooFewDiagrams(usize),
    #[error("diagrams mix filtration tags {0} and {1}")]
    MixedFiltrations(FiltrationKind, FiltrationKind),
    #[error("diagram scales must ascend consecutively, got {prev} then {next}")]
    NonConsecutiveScales { prev: u32, next: u32 },
}

/// One accepted match between points of adjacent scales.
#[derive(Debug, Clone, PartialEq)]
pub struct VineSegment {
    pub scale_from: u32,
    pub point_from: PersistencePoint,
    pub point_to: PersistencePoint,
    pub distance: f64,
    pub pers_from: f64,
    pub pers_to: f64,
}

/// Maximal chain of segments across consecutive scales.
#[derive(Debug, Clone, PartialEq)]
pub struct Vine {
    pub degree: Degree,
    pub segments: Vec<VineSegment>,
    pub birth_scale: u32,
    pub death_scale: u32,
}

impl Vine {
    /// Persistence-weighted stability of the whole trajectory, in (0, 1].
    pub fn stability(&self) -> f64 {
        stability_score(self)
    }
}

/// Stable-diagram point with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct StablePoint {
    pub point: PersistencePoint,
    pub stability: f64,
    pub medial_scale: u32,
    pub vine_id: u32,
}

/// Medial-scale representatives of the vines passing the stability filter,
/// united over homology degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct StableDiagram {
    pub points: Vec<StablePoint>,
    pub filtration: FiltrationKind,
}

/// Assembles vines from diagrams ordered finest to coarsest.
///
/// Returns completed vines in termination order: vines cut at scale i+1
/// first, then survivors of the final scale. Points never matched at any
/// step yield no vine.
pub fn track_vines(
    diagrams: &[PersistenceDiagram],
    degree: Degree,
    metric: DistanceMetric,
    match_threshold: f64,
) -> Result<Vec<Vine>, TrackError> {
    if diagrams.len() < 2 {
        return Err(TrackError::TooFewDiagrams(diagrams.len()));
    }
    let filtration = diagrams[0].filtration;
    for d in &diagrams[1..] {
        if d.filtration != filtration {
            return Err(TrackError::MixedFiltrations(filtration, d.filtration));
        }
    }
    for pair in diagrams.windows(2) {
        if pair[1].scale_index != pair[0].scale_index + 1 {
            return Err(TrackError::NonConsecutiveScales {
                prev: pair[0].scale_index,
                next: pair[1].scale_index,
            });
        }
    }

    // Active vines keyed by the index of their current point in the most
    // recently matched diagram; BTreeMap keeps termination order stable.
    let mut active: BTreeMap<usize, Vine> = BTreeMap::new();
    let mut complete: Vec<Vine> = Vec::new();

    for window in diagrams.windows(2) {
        let (current, next) = (&window[0], &window[1]);
        let scale = current.scale_index;
        let points_a = current.points_of_degree(degree);
        let points_b = next.points_of_degree(degree);
        let costs = points_distance_matrix(&points_a, &points_b, metric);
        let result = match_costs(&costs, match_threshold);

        let mut carried: BTreeMap<usize, Vine> = BTreeMap::new();
        let mut matched_sources = vec![false; points_a.len()];
        for &(a, b, distance) in &result.pairs {
            matched_sources[a] = true;
            let segment = VineSegment {
                scale_from: scale,
                point_from: points_a[a],
                point_to: points_b[b],
                distance,
                pers_from: points_a[a].persistence(),
                pers_to: points_b[b].persistence(),
            };
            match active.remove(&a) {
                Some(mut vine) => {
                    vine.segments.push(segment);
                    carried.insert(b, vine);
                }
                None => {
                    carried.insert(
                        b,
                        Vine {
                            degree,
                            segments: vec![segment],
                            birth_scale: scale,
                            death_scale: 0,
                        },
                    );
                }
            }
        }
        // Tracked points that found no continuation die at the next scale.
        for (a, mut vine) in std::mem::take(&mut active) {
            debug_assert!(!matched_sources[a]);
            vine.death_scale = scale + 1;
            complete.push(vine);
        }
        active = carried;
    }

    let last_scale = diagrams.last().unwrap().scale_index;
    for (_, mut vine) in active {
        vine.death_scale = last_scale;
        complete.push(vine);
    }
    Ok(complete)
}

/// Persistence-weighted stability score.
///
/// Each segment contributes 1/(1 + distance) weighted by the mean endpoint
/// persistence floored at 0.1, so high-persistence structure dominates while
/// diagonal chatter cannot zero out the weights.
pub fn stability_score(vine: &Vine) -> f64 {
    debug_assert!(!vine.segments.is_empty());
    let mut weighted = 0.0f64;
    let mut total = 0.0f64;
    for s in &vine.segments {
        let weight = 0.1f64.max((s.pers_from + s.pers_to) / 2.0);
        weighted += weight / (1.0 + s.distance);
        total += weight;
    }
    weighted / total
}

/// Keeps vines with stability at or above the threshold and emits the
/// source point of each one's middle segment, tagged with its provenance.
pub fn stable_diagram(
    vines: &[Vine],
    stability_threshold: f64,
    filtration: FiltrationKind,
) -> StableDiagram {
    let points = vines
        .iter()
        .enumerate()
        .filter_map(|(id, vine)| {
            let stability = stability_score(vine);
            if stability < stability_threshold {
                return None;
            }
            let middle = vine.segments.len() / 2;
            let segment = &vine.segments[middle];
            Some(StablePoint {
                point: segment.point_from,
                stability,
                medial_scale: segment.scale_from,
                vine_id: id as u32,
            })
        })
        .collect();
    StableDiagram { points, filtration }
}

/// Full pipeline for one pyramid: per-level diagrams, per-degree tracking,
/// stability filtering, and the degree-wise union.
pub fn stabilize(
    pyramid: &ScalePyramid,
    metric: DistanceMetric,
    match_threshold: f64,
    stability_threshold: f64,
) -> Result<StableDiagram, TrackError> {
    let diagrams: Vec<PersistenceDiagram> = pyramid
        .levels()
        .iter()
        .enumerate()
        .map(|(i, level)| compute_pd(level, i as u32 + 1, pyramid.filtration()))
        .collect();
    stabilize_diagrams(&diagrams, metric, match_threshold, stability_threshold)
}

/// Same as [`stabilize`] but starting from precomputed per-scale diagrams.
pub fn stabilize_diagrams(
    diagrams: &[PersistenceDiagram],
    metric: DistanceMetric,
    match_threshold: f64,
    stability_threshold: f64,
) -> Result<StableDiagram, TrackError> {
    stabilize_with_vines(diagrams, metric, match_threshold, stability_threshold)
        .map(|(stable, _)| stable)
}

/// Variant returning the completed vines (degree 0 first, then degree 1)
/// alongside the stable diagram; vine ids index into that list.
pub fn stabilize_with_vines(
    diagrams: &[PersistenceDiagram],
    metric: DistanceMetric,
    match_threshold: f64,
    stability_threshold: f64,
) -> Result<(StableDiagram, Vec<Vine>), TrackError> {
    let filtration = diagrams
        .first()
        .map(|d| d.filtration)
        .unwrap_or(FiltrationKind::Intensity);
    let mut all_vines = Vec::new();
    for degree in Degree::ALL {
        all_vines.extend(track_vines(diagrams, degree, metric, match_threshold)?);
    }
    let stable = stable_diagram(&all_vines, stability_threshold, filtration);
    Ok((stable, all_vines))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{build_pyramid, ScalarField, ValueRange};

    fn pt(birth: f64, death: f64) -> PersistencePoint {
        PersistencePoint::new(Degree::Zero, birth, death, false)
    }

    fn diagram(points: Vec<PersistencePoint>, scale: u32) -> PersistenceDiagram {
        PersistenceDiagram::new(points, scale, FiltrationKind::Intensity)
    }

    fn segment(distance: f64, pers_from: f64, pers_to: f64) -> VineSegment {
        VineSegment {
            scale_from: 1,
            point_from: pt(pers_from, 0.0),
            point_to: pt(pers_to, 0.0),
            distance,
            pers_from,
            pers_to,
        }
    }

    #[test]
    fn identical_diagrams_trace_full_span_vines() {
        let points = vec![pt(1.0, 0.0), pt(0.6, 0.2), pt(0.4, 0.1)];
        let pds: Vec<PersistenceDiagram> = (1..=3)
            .map(|s| diagram(points.clone(), s))
            .collect();
        let vines = track_vines(&pds, Degree::Zero, DistanceMetric::Euclidean, 0.0).unwrap();
        assert_eq!(vines.len(), 3);
        for vine in &vines {
            assert_eq!(vine.segments.len(), 2);
            assert_eq!((vine.birth_scale, vine.death_scale), (1, 3));
            assert!(vine.segments.iter().all(|s| s.distance == 0.0));
        }
    }

    #[test]
    fn point_present_only_at_first_scale_yields_no_vine() {
        let pds = vec![
            diagram(vec![pt(1.0, 0.0)], 1),
            diagram(vec![], 2),
            diagram(vec![], 3),
        ];
        let vines = track_vines(&pds, Degree::Zero, DistanceMetric::Euclidean, 0.3).unwrap();
        assert!(vines.is_empty());
    }

    #[test]
    fn early_termination_records_death_scale() {
        let pds = vec![
            diagram(vec![pt(0.9, 0.0)], 1),
            diagram(vec![pt(0.8, 0.05)], 2),
            diagram(vec![], 3),
        ];
        let vines = track_vines(&pds, Degree::Zero, DistanceMetric::Euclidean, 0.3).unwrap();
        assert_eq!(vines.len(), 1);
        let vine = &vines[0];
        assert_eq!((vine.birth_scale, vine.death_scale), (1, 3));
        assert_eq!(vine.segments.len(), 1);
        let expected = (0.01f64 + 0.0025).sqrt();
        assert!((vine.segments[0].distance - expected).abs() < 1e-12);
    }

    #[test]
    fn tracking_rejects_bad_inputs() {
        let one = vec![diagram(vec![pt(1.0, 0.0)], 1)];
        assert!(matches!(
            track_vines(&one, Degree::Zero, DistanceMetric::Euclidean, 0.3),
            Err(TrackError::TooFewDiagrams(1))
        ));

        let mixed = vec![
            diagram(vec![], 1),
            PersistenceDiagram::new(vec![], 2, FiltrationKind::Gradient),
        ];
        assert!(matches!(
            track_vines(&mixed, Degree::Zero, DistanceMetric::Euclidean, 0.3),
            Err(TrackError::MixedFiltrations(..))
        ));

        let gapped = vec![diagram(vec![], 1), diagram(vec![], 3)];
        assert!(matches!(
            track_vines(&gapped, Degree::Zero, DistanceMetric::Euclidean, 0.3),
            Err(TrackError::NonConsecutiveScales { .. })
        ));
    }

    #[test]
    fn stability_of_perfect_segment_is_one() {
        let vine = Vine {
            degree: Degree::Zero,
            segments: vec![segment(0.0, 0.7, 0.7)],
            birth_scale: 1,
            death_scale: 2,
        };
        assert_eq!(stability_score(&vine), 1.0);
    }

    #[test]
    fn stability_matches_hand_values() {
        let vine = Vine {
            degree: Degree::Zero,
            segments: vec![segment(1.0, 1.0, 1.0)],
            birth_scale: 1,
            death_scale: 2,
        };
        assert!((stability_score(&vine) - 0.5).abs() < 1e-15);

        let vine = Vine {
            degree: Degree::Zero,
            segments: vec![segment(0.0, 2.0, 2.0), segment(1.0, 0.0, 0.0)],
            birth_scale: 1,
            death_scale: 3,
        };
        let expected = (2.0 * 1.0 + 0.1 * 0.5) / 2.1;
        assert!((stability_score(&vine) - expected).abs() < 1e-15);
    }

    #[test]
    fn stable_diagram_keeps_passing_vines() {
        let perfect = Vine {
            degree: Degree::Zero,
            segments: vec![segment(0.0, 0.5, 0.5), segment(0.0, 0.5, 0.5)],
            birth_scale: 1,
            death_scale: 3,
        };
        let stable = stable_diagram(&[perfect.clone()], 0.7, FiltrationKind::Intensity);
        assert_eq!(stable.points.len(), 1);

        // A strict threshold of 1.0 drops any vine with positive movement.
        let moved = Vine {
            segments: vec![segment(0.2, 0.5, 0.5)],
            ..perfect
        };
        let stable = stable_diagram(&[moved], 1.0, FiltrationKind::Intensity);
        assert!(stable.points.is_empty());
    }

    #[test]
    fn medial_point_of_two_segment_vine_sits_at_middle_scale() {
        let mut first = segment(0.0, 0.6, 0.6);
        first.scale_from = 1;
        first.point_from = pt(0.9, 0.3);
        first.point_to = pt(0.8, 0.3);
        let mut second = segment(0.0, 0.6, 0.6);
        second.scale_from = 2;
        second.point_from = pt(0.8, 0.3);
        second.point_to = pt(0.7, 0.3);
        let vine = Vine {
            degree: Degree::Zero,
            segments: vec![first, second.clone()],
            birth_scale: 1,
            death_scale: 3,
        };
        let stable = stable_diagram(&[vine], 0.0, FiltrationKind::Intensity);
        assert_eq!(stable.points[0].medial_scale, 2);
        assert_eq!(stable.points[0].point, second.point_from);
    }

    #[test]
    fn constant_pyramid_stabilizes_to_single_essential_point() {
        let f = ScalarField::new(8, 8, vec![0.4; 64], ValueRange::UNIT).unwrap();
        let pyramid = build_pyramid(&f, 3, FiltrationKind::Intensity);
        let stable = stabilize(&pyramid, DistanceMetric::RelativePersistence, 0.3, 0.7).unwrap();
        assert_eq!(stable.points.len(), 1);
        let sp = &stable.points[0];
        assert!(sp.point.essential);
        assert_eq!(sp.medial_scale, 2);
        assert_eq!(sp.stability, 1.0);
    }

    #[test]
    fn vines_are_vertex_disjoint_per_scale() {
        // Distinct point values make (birth, death) identify a diagram point,
        // so one-to-one matching must never reuse an endpoint at any scale.
        let points = vec![pt(1.0, 0.0), pt(0.95, 0.05), pt(0.5, 0.2)];
        let pds: Vec<PersistenceDiagram> = (1..=4)
            .map(|s| diagram(points.clone(), s))
            .collect();
        let vines =
            track_vines(&pds, Degree::Zero, DistanceMetric::RelativePersistence, 0.3).unwrap();
        for scale in 1..4u32 {
            let mut sources = Vec::new();
            let mut targets = Vec::new();
            for segment in vines.iter().flat_map(|v| &v.segments) {
                if segment.scale_from == scale {
                    sources.push((
                        segment.point_from.birth.to_bits(),
                        segment.point_from.death.to_bits(),
                    ));
                    targets.push((
                        segment.point_to.birth.to_bits(),
                        segment.point_to.death.to_bits(),
                    ));
                }
            }
            let unique = |mut v: Vec<(u64, u64)>| {
                let before = v.len();
                v.sort_unstable();
                v.dedup();
                v.len() == before
            };
            assert!(unique(sources), "duplicate source at scale {scale}");
            assert!(unique(targets), "duplicate target at scale {scale}");
        }
    }

    #[test]
    fn tracking_is_deterministic() {
        let points = vec![pt(0.8, 0.1), pt(0.8, 0.1), pt(0.3, 0.2)];
        let pds: Vec<PersistenceDiagram> = (1..=3)
            .map(|s| diagram(points.clone(), s))
            .collect();
        let a = track_vines(&pds, Degree::Zero, DistanceMetric::RelativePersistence, 0.3).unwrap();
        let b = track_vines(&pds, Degree::Zero, DistanceMetric::RelativePersistence, 0.3).unwrap();
        assert_eq!(a, b);
    }
}
