//! CSV artifacts for chains, histograms and W1 curves.

use std::path::Path;

use anyhow::{Context, Result};
use jdld::data_io::write_csv;
use jdld::diagnostics::{Histogram, W1Curve};
use jdld::samplers::ChainRecord;

/// Row indices kept when thinning `len` rows to at most `max_rows` with a
/// uniform stride.
pub fn thinned_rows(len: usize, max_rows: usize) -> Vec<usize> {
    let stride = len.div_ceil(max_rows.max(1)).max(1);
    (0..len).step_by(stride).collect()
}

pub fn coord_names(dim: usize) -> Vec<String> {
    (0..dim).map(|c| format!("x{c}")).collect()
}

fn write_columns(names: &[String], cols: &[Vec<f64>], path: &Path) -> Result<()> {
    let named: Vec<(&str, &[f64])> = names.iter().map(String::as_str).zip(cols.iter().map(Vec::as_slice)).collect();
    write_csv(&named, path).with_context(|| format!("writing {}", path.display()))
}

/// `t, x0, x1, ...` with at most `max_rows` rows.
pub fn write_chain_csv(chain: &ChainRecord, max_rows: usize, path: &Path) -> Result<()> {
    let rows = thinned_rows(chain.len(), max_rows);
    let mut names = vec!["t".to_owned()];
    names.extend(coord_names(chain.dim()));
    let mut cols = vec![rows.iter().map(|&r| r as f64).collect::<Vec<_>>()];
    for c in 0..chain.dim() {
        cols.push(rows.iter().map(|&r| chain.sample(r)[c]).collect());
    }
    write_columns(&names, &cols, path)
}

/// `center` followed by one count column per histogram (all share bins).
pub fn write_histogram_csv(names: &[String], hists: &[Histogram], path: &Path) -> Result<()> {
    let mut all_names = vec!["center".to_owned()];
    all_names.extend_from_slice(names);
    let mut cols = vec![hists[0].bin_centers()];
    cols.extend(hists.iter().map(|h| h.counts.iter().map(|&c| c as f64).collect()));
    write_columns(&all_names, &cols, path)
}

/// `iteration, w1_x0, w1_x1, ...`.
pub fn write_w1_csv(curves: &[W1Curve], path: &Path) -> Result<()> {
    let mut names = vec!["iteration".to_owned()];
    names.extend((0..curves.len()).map(|c| format!("w1_x{c}")));
    let mut cols = vec![curves[0].checkpoints.iter().map(|&k| k as f64).collect::<Vec<_>>()];
    cols.extend(curves.iter().map(|c| c.distances.clone()));
    write_columns(&names, &cols, path)
}

pub fn write_single_column(name: &str, values: &[f64], path: &Path) -> Result<()> {
    let idx: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
    write_csv(&[("draw", &idx), (name, values)], path).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_bounds_rows_with_uniform_stride() {
        assert_eq!(thinned_rows(10, 100), (0..10).collect::<Vec<_>>());
        assert_eq!(thinned_rows(10, 5), vec![0, 2, 4, 6, 8]);
        assert_eq!(thinned_rows(10, 3), vec![0, 4, 8]);
        for (len, max) in [(1_000_000, 1_000), (999_999, 7), (5, 1)] {
            let rows = thinned_rows(len, max);
            assert!(rows.len() <= max && !rows.is_empty());
        }
        assert!(thinned_rows(0, 10).is_empty());
    }
}
