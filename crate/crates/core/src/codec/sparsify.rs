//! Top-k sparsification of particle-update matrices: per-particle, shared,
//! and the grouped generalization that interpolates between them.

use crate::error::{Error, Result};

/// A flat row-major N_p x d update matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMatrix {
    pub data: Vec<f64>,
    pub n_particles: usize,
    pub dim: usize,
}

impl DeltaMatrix {
    pub fn new(data: Vec<f64>, n_particles: usize, dim: usize) -> Result<Self> {
        if data.len() != n_particles * dim || n_particles == 0 || dim == 0 {
            return Err(Error::invalid("delta matrix shape mismatch"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("update matrix".into()));
        }
        Ok(DeltaMatrix {
            data,
            n_particles,
            dim,
        })
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.data[n * self.dim..(n + 1) * self.dim]
    }
}

/// Sorted top-k column index sets, one per sparsity group. Group g covers
/// `rows_per_group` consecutive particle rows starting at g * rows_per_group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    pub groups: Vec<Vec<usize>>,
    pub rows_per_group: usize,
    pub k: usize,
}

impl SparsityPattern {
    /// Index set covering particle row `n`.
    pub fn group_for_row(&self, n: usize) -> &[usize] {
        &self.groups[n / self.rows_per_group]
    }
}

fn check_k(k: usize, d: usize) -> Result<()> {
    if k < 1 || k > d {
        return Err(Error::invalid(format!("k = {k} out of range [1, {d}]")));
    }
    Ok(())
}

/// Indices of the k largest values, ties broken by lower index, returned sorted.
fn top_k_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut top: Vec<usize> = idx.into_iter().take(k).collect();
    top.sort_unstable();
    top
}

/// Top-k by absolute value applied independently to each particle row.
pub fn sparsify_per_particle(delta: &DeltaMatrix, k: usize) -> Result<SparsityPattern> {
    check_k(k, delta.dim)?;
    let groups = (0..delta.n_particles)
        .map(|n| {
            let abs: Vec<f64> = delta.row(n).iter().map(|v| v.abs()).collect();
            top_k_indices(&abs, k)
        })
        .collect();
    Ok(SparsityPattern {
        groups,
        rows_per_group: 1,
        k,
    })
}

/// One pattern from the column sums of absolute values, applied to all rows.
pub fn sparsify_shared(delta: &DeltaMatrix, k: usize) -> Result<SparsityPattern> {
    check_k(k, delta.dim)?;
    let sums = column_abs_sums(delta, 0, delta.n_particles);
    Ok(SparsityPattern {
        groups: vec![top_k_indices(&sums, k)],
        rows_per_group: delta.n_particles,
        k,
    })
}

fn column_abs_sums(delta: &DeltaMatrix, row_start: usize, row_end: usize) -> Vec<f64> {
    let mut sums = vec![0.0; delta.dim];
    for n in row_start..row_end {
        for (s, v) in sums.iter_mut().zip(delta.row(n)) {
            *s += v.abs();
        }
    }
    sums
}

/// Shared sparsification within `num_groups` contiguous blocks of rows.
///
/// `num_groups` is 1/alpha_s; it must divide N_p. One group reduces to
/// shared sparsification, N_p groups to per-particle.
pub fn sparsify_alpha_shared(
    delta: &DeltaMatrix,
    k: usize,
    num_groups: usize,
) -> Result<SparsityPattern> {
    check_k(k, delta.dim)?;
    if num_groups == 0 || delta.n_particles % num_groups != 0 {
        return Err(Error::invalid(format!(
            "1/alpha = {num_groups} must divide N_p = {}",
            delta.n_particles
        )));
    }
    let rows_per_group = delta.n_particles / num_groups;
    let groups = (0..num_groups)
        .map(|g| {
            let sums = column_abs_sums(delta, g * rows_per_group, (g + 1) * rows_per_group);
            top_k_indices(&sums, k)
        })
        .collect();
    Ok(SparsityPattern {
        groups,
        rows_per_group,
        k,
    })
}
