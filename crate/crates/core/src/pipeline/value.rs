use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::chemio::{Dataset, Element};
use crate::descriptors::AtomicCoefficients;
use crate::error::{Error, Result};

/// How an entry is sliced when a split view is opened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataTag {
    /// Samples × features; rows follow the view.
    DesignMatrix,
    /// Samples × samples; rows follow the active set, columns the train set.
    KernelMatrix,
    /// One value per sample.
    Vector,
    /// Opaque payload, identical in every view.
    Object,
}

impl DataTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DataTag::DesignMatrix => "design_matrix",
            DataTag::KernelMatrix => "kernel_matrix",
            DataTag::Vector => "vector",
            DataTag::Object => "object",
        }
    }
}

/// Per-atom rows for every structure, with the element of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomRows {
    /// Channel elements (ordered by atomic number) used for per-element pooling.
    pub elements: Vec<Element>,
    pub items: Vec<(Vec<Element>, Array2<f64>)>,
}

#[derive(Debug, Clone)]
pub enum Object {
    Dataset(Arc<Dataset>),
    Atoms(AtomRows),
    Coefficients(Vec<AtomicCoefficients<f64>>),
}

/// A single stream entry.
#[derive(Debug, Clone)]
pub enum Value {
    Matrix(Arc<Array2<f64>>),
    Vector(Arc<Array1<f64>>),
    Object(Arc<Object>),
}

impl Value {
    pub fn matrix(m: Array2<f64>) -> Value {
        Value::Matrix(Arc::new(m))
    }

    pub fn vector(v: Array1<f64>) -> Value {
        Value::Vector(Arc::new(v))
    }

    pub fn object(o: Object) -> Value {
        Value::Object(Arc::new(o))
    }

    pub fn as_matrix(&self) -> Result<&Array2<f64>> {
        match self {
            Value::Matrix(m) => Ok(m),
            _ => Err(Error::Pipeline("expected a matrix entry".into())),
        }
    }

    pub fn as_vector(&self) -> Result<&Array1<f64>> {
        match self {
            Value::Vector(v) => Ok(v),
            _ => Err(Error::Pipeline("expected a vector entry".into())),
        }
    }

    pub fn as_object(&self) -> Result<&Object> {
        match self {
            Value::Object(o) => Ok(o),
            _ => Err(Error::Pipeline("expected an object entry".into())),
        }
    }

    /// Leading dimension for array entries.
    pub fn rows(&self) -> Option<usize> {
        match self {
            Value::Matrix(m) => Some(m.nrows()),
            Value::Vector(v) => Some(v.len()),
            Value::Object(_) => None,
        }
    }

    pub fn matches(&self, tag: DataTag) -> bool {
        matches!(
            (self, tag),
            (Value::Matrix(_), DataTag::DesignMatrix | DataTag::KernelMatrix)
                | (Value::Vector(_), DataTag::Vector)
                | (Value::Object(_), DataTag::Object)
        )
    }
}

/// Index sets defining a split view: rows are taken from `active`, kernel
/// columns from `train`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct View {
    pub active: Vec<usize>,
    pub train: Vec<usize>,
}

impl View {
    pub fn full(n: usize) -> View {
        let all: Vec<usize> = (0..n).collect();
        View {
            active: all.clone(),
            train: all,
        }
    }

    pub fn train(train: &[usize]) -> View {
        View {
            active: train.to_vec(),
            train: train.to_vec(),
        }
    }

    pub fn test(test: &[usize], train: &[usize]) -> View {
        View {
            active: test.to_vec(),
            train: train.to_vec(),
        }
    }

    pub fn check(&self, sample_count: usize) -> Result<()> {
        match self.active.iter().chain(&self.train).find(|&&i| i >= sample_count) {
            Some(i) => Err(Error::Invalid(format!("view index {i} out of range for {sample_count} samples"))),
            None => Ok(()),
        }
    }

    /// Slices `value` according to `tag`.
    pub fn slice(&self, tag: DataTag, value: &Value) -> Result<Value> {
        if !value.matches(tag) {
            return Err(Error::Pipeline(format!("entry does not hold a {}", tag.as_str())));
        }
        if let Some(n) = value.rows() {
            self.check(n)?;
        }
        Ok(match (tag, value) {
            (DataTag::DesignMatrix, Value::Matrix(m)) => Value::matrix(m.select(Axis(0), &self.active)),
            (DataTag::KernelMatrix, Value::Matrix(m)) => {
                Value::matrix(m.select(Axis(0), &self.active).select(Axis(1), &self.train))
            }
            (DataTag::Vector, Value::Vector(v)) => Value::vector(v.select(Axis(0), &self.active)),
            _ => value.clone(),
        })
    }
}

/// Train and test views for a split; both share the train columns.
pub fn open_split(split: &super::Split, sample_count: usize) -> Result<(View, View)> {
    split.validate(sample_count)?;
    Ok((View::train(&split.train), View::test(&split.test, &split.train)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::Split;

    #[test]
    fn views_slice_by_tag() {
        let x = Value::matrix(Array2::from_shape_fn((10, 3), |(i, j)| (i * 3 + j) as f64));
        let k = Value::matrix(Array2::from_shape_fn((10, 10), |(i, j)| (i * 10 + j) as f64));
        let split = Split::new((0..7).collect(), (7..10).collect(), "t");
        let (train, test) = open_split(&split, 10).unwrap();
        assert_eq!(train.slice(DataTag::DesignMatrix, &x).unwrap().as_matrix().unwrap().dim(), (7, 3));
        assert_eq!(test.slice(DataTag::DesignMatrix, &x).unwrap().as_matrix().unwrap().dim(), (3, 3));
        let kt = test.slice(DataTag::KernelMatrix, &k).unwrap();
        let kt = kt.as_matrix().unwrap();
        assert_eq!(kt.dim(), (3, 7));
        assert_eq!(kt[[0, 0]], 70.0);
        assert_eq!(kt[[2, 6]], 96.0);
        let kk = train.slice(DataTag::KernelMatrix, &k).unwrap();
        assert_eq!(kk.as_matrix().unwrap().dim(), (7, 7));
    }

    #[test]
    fn objects_pass_through_and_tags_are_checked() {
        let o = Value::object(Object::Coefficients(Vec::new()));
        let v = View::test(&[1], &[0]);
        assert!(matches!(v.slice(DataTag::Object, &o).unwrap(), Value::Object(_)));
        assert!(v.slice(DataTag::Vector, &o).is_err());
    }

    #[test]
    fn out_of_range_view() {
        let x = Value::vector(Array1::zeros(3));
        assert!(View::test(&[3], &[0]).slice(DataTag::Vector, &x).is_err());
    }
}
