use serde::{Deserialize, Serialize};

use super::NumericError;

/// Dense row-major array of 64-bit floats.
///
/// Values are immutable once the array is built; every operation allocates a
/// fresh result. Shapes use one positive extent per dimension and the data
/// length always equals the product of the extents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Array {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Array {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, NumericError> {
        if shape.contains(&0) {
            return Err(NumericError::contract(
                "Array::new",
                format!("zero extent in shape {shape:?}"),
            ));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(NumericError::contract(
                "Array::new",
                format!("shape {shape:?} needs {expected} values, got {}", data.len()),
            ));
        }
        Ok(Array { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Array::filled(shape, 0.0)
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        let len = shape.iter().product();
        Array {
            shape: shape.to_vec(),
            data: vec![value; len],
        }
    }

    /// One-element array holding a single value.
    pub fn scalar(value: f64) -> Self {
        Array {
            shape: vec![1],
            data: vec![value],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1
    }

    /// Value of a one-element array.
    pub fn scalar_value(&self) -> f64 {
        debug_assert!(self.is_scalar(), "scalar_value on shape {:?}", self.shape);
        self.data[0]
    }

    /// Row-major element access by multi-index.
    pub fn at(&self, index: &[usize]) -> f64 {
        self.data[self.flat_index(index)]
    }

    pub(crate) fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.shape.len());
        let mut flat = 0;
        for (i, &idx) in index.iter().enumerate() {
            debug_assert!(idx < self.shape[i]);
            flat = flat * self.shape[i] + idx;
        }
        flat
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Extents of a channels × height × width map.
    pub fn dims3(&self) -> Result<(usize, usize, usize), NumericError> {
        match self.shape.as_slice() {
            &[c, h, w] => Ok((c, h, w)),
            other => Err(NumericError::contract(
                "Array::dims3",
                format!("expected 3 dimensions, got {other:?}"),
            )),
        }
    }

    pub fn dims2(&self) -> Result<(usize, usize), NumericError> {
        match self.shape.as_slice() {
            &[r, c] => Ok((r, c)),
            other => Err(NumericError::contract(
                "Array::dims2",
                format!("expected 2 dimensions, got {other:?}"),
            )),
        }
    }

    /// Same data under a new shape with an equal element count.
    pub fn reshaped(&self, shape: Vec<usize>) -> Result<Array, NumericError> {
        Array::new(shape, self.data.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_length_mismatch() {
        let err = Array::new(vec![2, 3], vec![0.0; 5]).unwrap_err();
        assert!(matches!(err, NumericError::Contract { .. }));
    }

    #[test]
    fn new_rejects_zero_extent() {
        assert!(Array::new(vec![2, 0], vec![]).is_err());
    }

    #[test]
    fn row_major_indexing() {
        let a = Array::new(vec![2, 3], (0..6).map(f64::from).collect()).unwrap();
        assert_eq!(a.at(&[0, 0]), 0.0);
        assert_eq!(a.at(&[0, 2]), 2.0);
        assert_eq!(a.at(&[1, 0]), 3.0);
        assert_eq!(a.at(&[1, 2]), 5.0);
    }

    #[test]
    fn finiteness_check() {
        let mut a = Array::zeros(&[2]);
        assert!(a.all_finite());
        a.data_mut()[1] = f64::NAN;
        assert!(!a.all_finite());
    }
}
