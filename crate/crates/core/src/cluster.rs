//! DBSCAN clustering of on-road points into corner-case proposals.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::grid::VoxelGrid;
use crate::pointcloud::{IndexSet, PointCloud};

/// DBSCAN parameters. `min_cluster_size` doubles as the core-point minPts
/// and as the floor on emitted cluster sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DbscanConfig {
    #[serde(rename = "epsilon_m")]
    pub epsilon: f64,
    pub min_cluster_size: usize,
}

impl Default for DbscanConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            min_cluster_size: 30,
        }
    }
}

impl DbscanConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.epsilon > 0.0) {
            return Err(GeometryError::InvalidConfig("dbscan epsilon must be > 0"));
        }
        if self.min_cluster_size < 1 {
            return Err(GeometryError::InvalidConfig(
                "dbscan min_cluster_size must be >= 1",
            ));
        }
        Ok(())
    }
}

/// Lifecycle of a proposal: every cluster starts `Proposed` and is resolved
/// to exactly one terminal status by the pipeline gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterStatus {
    Proposed,
    /// Covered by a 3D detection.
    Known3D,
    /// Recognized by the 2D classifier.
    Known2D,
    /// Survived both gates.
    Anomaly,
}

/// A corner-case proposal: an index set into the scene point cloud plus its
/// lifecycle status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cluster {
    pub members: IndexSet,
    status: ClusterStatus,
    class_label: Option<String>,
    score: Option<f64>,
}

impl Cluster {
    pub fn proposed(members: IndexSet) -> Self {
        Self {
            members,
            status: ClusterStatus::Proposed,
            class_label: None,
            score: None,
        }
    }

    pub fn status(&self) -> ClusterStatus {
        self.status
    }

    pub fn class_label(&self) -> Option<&str> {
        self.class_label.as_deref()
    }

    pub fn score(&self) -> Option<f64> {
        self.score
    }

    /// Move from `Proposed` to a terminal status. Statuses only move
    /// forward; re-resolving is an error.
    pub fn resolve(
        &mut self,
        status: ClusterStatus,
        class_label: Option<String>,
        score: Option<f64>,
    ) -> Result<(), GeometryError> {
        if self.status != ClusterStatus::Proposed || status == ClusterStatus::Proposed {
            return Err(GeometryError::InvalidStatusTransition);
        }
        self.status = status;
        self.class_label = class_label;
        self.score = score;
        Ok(())
    }
}

/// DBSCAN over the subset, 3D Euclidean distance, neighborhoods inclusive of
/// the point itself and of the `epsilon` boundary.
///
/// Core points have at least `min_cluster_size` neighbors; clusters are the
/// density-connected components of core points plus border points. A border
/// point reachable from several clusters goes to the cluster of its
/// lowest-index core neighbor, which makes the output unique. Noise is
/// discarded, clusters below `min_cluster_size` are dropped, and the result
/// is ordered by smallest member index. All clusters come back `Proposed`.
pub fn dbscan(cloud: &PointCloud, subset: &IndexSet, config: &DbscanConfig) -> Vec<Cluster> {
    debug_assert!(config.validate().is_ok());
    let n = subset.len();
    if n == 0 {
        return Vec::new();
    }
    let pts = subset.gather(cloud);
    let grid = VoxelGrid::build(&pts, config.epsilon);

    // Neighbor lists (subset positions, ascending, self included).
    let mut neighbors: Vec<Vec<u32>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut list = Vec::new();
        grid.for_neighbors_within(&pts, i, config.epsilon, |j| list.push(j as u32));
        neighbors.push(list);
    }
    let core: Vec<bool> = neighbors
        .iter()
        .map(|l| l.len() >= config.min_cluster_size)
        .collect();

    // Union core points that are within epsilon of each other.
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        if !core[i] {
            continue;
        }
        for &j in &neighbors[i] {
            if core[j as usize] {
                uf.union(i, j as usize);
            }
        }
    }

    // Assign: core points to their component, border points to the cluster
    // of their lowest-index core neighbor (neighbor lists are ascending).
    let mut assignment: Vec<Option<usize>> = alloc::vec![None; n];
    for i in 0..n {
        if core[i] {
            assignment[i] = Some(uf.find(i));
        } else if let Some(&c) = neighbors[i].iter().find(|&&j| core[j as usize]) {
            assignment[i] = Some(uf.find(c as usize));
        }
    }

    // Group by component root, keyed deterministically by smallest member.
    let mut roots: Vec<usize> = assignment.iter().flatten().copied().collect();
    roots.sort_unstable();
    roots.dedup();
    let subset_indices = subset.as_slice();
    let mut clusters: Vec<Vec<usize>> = alloc::vec![Vec::new(); roots.len()];
    for (pos, assigned) in assignment.iter().enumerate() {
        if let Some(root) = assigned {
            let slot = roots.binary_search(root).unwrap();
            clusters[slot].push(subset_indices[pos]);
        }
    }

    let mut out: Vec<Cluster> = clusters
        .into_iter()
        .filter(|members| members.len() >= config.min_cluster_size)
        .map(|members| {
            Cluster::proposed(IndexSet::new(members).expect("members collected in order"))
        })
        .collect();
    out.sort_by_key(|c| c.members.as_slice()[0]);
    out
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = i;
        while cur != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    /// Union by smaller root index, so component roots are stable and
    /// deterministic.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo as u32;
    }
}
