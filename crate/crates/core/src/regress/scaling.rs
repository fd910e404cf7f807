use ndarray::{Array1, ArrayView1};

use crate::chemio::Scaling;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Size normalization for additive targets: forward divides by atom count,
/// inverse multiplies back. Intensive and unknown targets pass through.
pub fn scale_target<T: Scalar>(
    y: ArrayView1<T>,
    sizes: ArrayView1<T>,
    scaling: Scaling,
    direction: Direction,
) -> Result<Array1<T>> {
    if scaling != Scaling::Additive {
        return Ok(y.to_owned());
    }
    if y.len() != sizes.len() {
        return Err(Error::Invalid(format!("{} targets but {} sizes", y.len(), sizes.len())));
    }
    if let Some(i) = sizes.iter().position(|s| !(*s > T::zero())) {
        return Err(Error::Invalid(format!("structure {i} has size 0")));
    }
    Ok(match direction {
        Direction::Forward => &y / &sizes,
        Direction::Inverse => &y * &sizes,
    })
}
