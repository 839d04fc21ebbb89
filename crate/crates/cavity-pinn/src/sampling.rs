//! The shared rule that maps a fine node grid onto the coarse sensor grid.
//!
//! A stride-4 walk over a 200-node edge cannot produce 50 evenly spaced
//! nodes that include both ends, so the downsample rule is
//! `index(k) = round(k * (src - 1) / (dst - 1))`, which always keeps the
//! first and last node. Sensor locations, PDE collocation points and the
//! boundary-condition sample are all built from the same rule so they stay
//! aligned.

/// Indices of `dst` nodes selected from `src` nodes, endpoints included.
pub fn downsample_indices(src: usize, dst: usize) -> Vec<usize> {
    assert!(src >= 2 && dst >= 2 && dst <= src);
    (0..dst)
        .map(|k| {
            let t = k as f64 * (src - 1) as f64 / (dst - 1) as f64;
            t.round() as usize
        })
        .collect()
}

/// Coordinates of the selected nodes on `[0, 1]` for a `src`-node edge.
pub fn downsample_coords(src: usize, dst: usize) -> Vec<f64> {
    downsample_indices(src, dst)
        .into_iter()
        .map(|i| i as f64 / (src - 1) as f64)
        .collect()
}
