use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read, write_atomic, IoError};
use crate::geometry::{Point, VertexId};
use crate::model::{AffineLaw, CellId, Metadata, Partition};

/// On-disk form of a partition with its dynamics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub dimension: usize,
    #[serde(default)]
    pub metadata: Metadata,
    pub vertices: Vec<Vec<f64>>,
    pub cells: Vec<CellEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellEntry {
    /// Defaults to the position in the list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<usize>,
    pub vertices: Vec<usize>,
    #[serde(rename = "A")]
    pub a_matrix: Vec<Vec<f64>>,
    #[serde(rename = "a", default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<f64>>,
}

impl PartitionFile {
    pub fn from_partition(p: &Partition) -> Self {
        PartitionFile {
            dimension: p.dim(),
            metadata: p.metadata.clone(),
            vertices: p.vertices().points().iter().map(|x| x.coords().to_vec()).collect(),
            cells: p
                .cells()
                .iter()
                .map(|c| CellEntry {
                    id: Some(c.id.0),
                    vertices: c.vertices.iter().map(|v| v.0).collect(),
                    a_matrix: c.law.rows(),
                    offset: Some(c.law.offset().to_vec()),
                })
                .collect(),
        }
    }

    /// Builds the partition; `origin` names the source in error messages.
    pub fn into_partition(self, origin: &str) -> Result<Partition, IoError> {
        let n = self.dimension;
        if n == 0 {
            return Err(IoError::invalid(origin, "dimension must be positive"));
        }
        let mut p = Partition::new(n);
        let mut map = Vec::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.into_iter().enumerate() {
            if v.len() != n {
                return Err(IoError::invalid(origin, format!("vertex {i} has {} coordinates, expected {n}", v.len())));
            }
            let pt = Point::try_new(v).map_err(|_| IoError::invalid(origin, format!("vertex {i} is not finite")))?;
            map.push(p.add_vertex(pt).map_err(|e| IoError::invalid(origin, e.to_string()))?);
        }
        for (k, c) in self.cells.into_iter().enumerate() {
            let id = CellId(c.id.unwrap_or(k));
            let mut ids: Vec<VertexId> = Vec::with_capacity(c.vertices.len());
            for &v in &c.vertices {
                let vid = map.get(v).ok_or_else(|| {
                    IoError::invalid(origin, format!("cell {id} refers to vertex {v}, but only {} vertices exist", map.len()))
                })?;
                ids.push(*vid);
            }
            let offset = c.offset.unwrap_or_else(|| vec![0.0; n]);
            let law = AffineLaw::new(c.a_matrix, offset).map_err(|e| IoError::invalid(origin, format!("cell {id}: {e}")))?;
            if law.dim() != n {
                return Err(IoError::invalid(origin, format!("cell {id}: law has dimension {}, expected {n}", law.dim())));
            }
            p.add_cell_with_id(id, ids, law).map_err(|e| IoError::invalid(origin, e.to_string()))?;
        }
        p.metadata = self.metadata;
        Ok(p)
    }
}

pub fn parse_partition(text: &str, origin: &str) -> Result<Partition, IoError> {
    let file: PartitionFile = serde_json::from_str(text).map_err(|e| IoError::parse(origin, e))?;
    file.into_partition(origin)
}

pub fn partition_to_string(p: &Partition) -> String {
    let mut s = serde_json::to_string_pretty(&PartitionFile::from_partition(p)).expect("partition serializes");
    s.push('\n');
    s
}

pub fn load_partition(path: &Path) -> Result<Partition, IoError> {
    parse_partition(&read(path)?, &path.display().to_string())
}

pub fn save_partition(p: &Partition, path: &Path) -> Result<(), IoError> {
    write_atomic(path, partition_to_string(p).as_bytes())
}
