use crate::model::ModelParams;

/// Engine that produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    ClosedForm,
    Oracle,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed",
            Self::Oracle => "oracle",
        }
    }
}

/// `(t, value)` samples of one observable together with where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    pub params: ModelParams<T>,
    pub engine: Engine,
    pub observable: &'static str,
    pub samples: Vec<(T, T)>,
}

impl<T: Copy + PartialOrd> TimeSeries<T> {
    pub fn new(params: ModelParams<T>, engine: Engine, observable: &'static str) -> Self {
        Self {
            params,
            engine,
            observable,
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, t: T, value: T) {
        self.samples.push((t, value));
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    /// Sample with the largest value.
    pub fn argmax(&self) -> Option<(T, T)> {
        self.samples
            .iter()
            .copied()
            .fold(None, |best: Option<(T, T)>, s| match best {
                Some(b) if b.1 >= s.1 => Some(b),
                _ => Some(s),
            })
    }
}
