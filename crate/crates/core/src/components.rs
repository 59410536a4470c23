//! Euclidean connected components over a member subset of a cloud.

use crate::cloud::PointCloud;
use crate::spatial::{Dims, SpatialIndex};

/// Result of a connected-component pass.
#[derive(Debug, Clone)]
pub struct Components {
    /// Component id per member, parallel to the input `member_ids`.
    /// Ids are assigned in order of first discovery.
    pub component_of: Vec<usize>,
    /// Size of each component.
    pub sizes: Vec<usize>,
    /// Cloud ids of members in components of size >= min_size, sorted.
    pub surviving: Vec<usize>,
}

/// Clusters `member_ids` by 3D distance: two members share a component iff
/// they are connected by a chain of member-to-member distances <= `link_dist`.
/// Components smaller than `min_size` are dropped from `surviving`.
pub fn connected_components(
    cloud: &PointCloud,
    member_ids: &[usize],
    link_dist: f64,
    min_size: usize,
) -> Components {
    assert!(link_dist > 0.0);
    assert!(min_size >= 1);
    if member_ids.is_empty() {
        return Components {
            component_of: Vec::new(),
            sizes: Vec::new(),
            surviving: Vec::new(),
        };
    }
    let pts: Vec<[f64; 3]> = member_ids
        .iter()
        .map(|&i| cloud.points[i].pos())
        .collect();
    let index = SpatialIndex::from_points(pts);

    const UNVISITED: usize = usize::MAX;
    let mut component_of = vec![UNVISITED; member_ids.len()];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..member_ids.len() {
        if component_of[start] != UNVISITED {
            continue;
        }
        let comp = sizes.len();
        let mut size = 0usize;
        component_of[start] = comp;
        stack.push(start);
        while let Some(i) = stack.pop() {
            size += 1;
            for j in index.radius_neighbors_of(i, link_dist, Dims::Three) {
                if component_of[j] == UNVISITED {
                    component_of[j] = comp;
                    stack.push(j);
                }
            }
        }
        sizes.push(size);
    }

    let mut surviving: Vec<usize> = member_ids
        .iter()
        .zip(&component_of)
        .filter(|&(_, &c)| sizes[c] >= min_size)
        .map(|(&id, _)| id)
        .collect();
    surviving.sort_unstable();
    Components {
        component_of,
        sizes,
        surviving,
    }
}
