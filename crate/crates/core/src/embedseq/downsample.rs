use crate::error::{Error, Result};

/// Rounding rule used for frame selection: ties go to the even neighbour.
///
/// Kept in one place so an alternate tie-break can be swapped in.
#[inline]
pub fn round_half_even(x: f64) -> f64 {
    x.round_ties_even()
}

/// Frame indices for resampling a clip from `current_fps` down to
/// `target_fps`: `i_j = round(r * j)` with `r = current_fps / target_fps`,
/// for `j = 0, 1, ...` while `i_j < num_frames`.
///
/// With `r >= 1` the indices are strictly increasing; an integer `r` picks
/// every `r`-th frame.
pub fn downsample_indices(num_frames: usize, current_fps: f64, target_fps: f64) -> Result<Vec<usize>> {
    if num_frames == 0 {
        return Err(Error::InvalidArgument("num_frames must be at least 1".into()));
    }
    for (name, v) in [("current_fps", current_fps), ("target_fps", target_fps)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    if target_fps > current_fps {
        return Err(Error::InvalidArgument(format!(
            "target fps {target_fps} exceeds source fps {current_fps}; upsampling is not supported"
        )));
    }
    let ratio = current_fps / target_fps;
    let mut indices = Vec::with_capacity((num_frames as f64 / ratio).ceil() as usize + 1);
    for j in 0u64.. {
        let idx = round_half_even(ratio * j as f64);
        if idx >= num_frames as f64 {
            break;
        }
        indices.push(idx as usize);
    }
    Ok(indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_ratio() {
        assert_eq!(downsample_indices(10, 24.0, 8.0).unwrap(), vec![0, 3, 6, 9]);
    }

    #[test]
    fn identity_ratio() {
        assert_eq!(downsample_indices(5, 8.0, 8.0).unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn fractional_ratio_ties_to_even() {
        // 3.75 * j = 0, 3.75, 7.5, 11.25, 15 -> 7.5 rounds to 8
        assert_eq!(downsample_indices(16, 30.0, 8.0).unwrap(), vec![0, 4, 8, 11, 15]);
        assert_eq!(round_half_even(2.5), 2.0);
        assert_eq!(round_half_even(3.5), 4.0);
    }

    #[test]
    fn rejects_upsampling() {
        assert!(downsample_indices(10, 8.0, 24.0).is_err());
        assert!(downsample_indices(0, 8.0, 8.0).is_err());
    }
}
