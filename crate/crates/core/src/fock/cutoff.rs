use crate::error::{invalid, Error, Result};

/// Automatic Fock-cutoff selection: start small and double until the tracked
/// observables stop moving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPolicy {
    pub start: usize,
    pub max: usize,
    /// Accepted change between `n_cut` and `2 n_cut`, relative to the largest
    /// magnitude among the tracked values.
    pub tolerance: f64,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self {
            start: 32,
            max: 4096,
            tolerance: 1e-6,
        }
    }
}

/// Values computed at an accepted cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct Converged<V> {
    pub values: V,
    /// Cutoff the returned values were computed at.
    pub n_cut: usize,
    /// Scale-relative change against the previous (halved) cutoff.
    pub change: f64,
}

impl CutoffPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.start < 4 {
            return Err(invalid("cutoff.start", "must be at least 4"));
        }
        if self.max < self.start {
            return Err(invalid("cutoff.max", "must not be below cutoff.start"));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid("cutoff.tolerance", "must be positive"));
        }
        Ok(())
    }

    /// Cutoffs tried in order: `start, 2·start, …` up to `max`.
    pub fn ladder(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut n = self.start;
        while n <= self.max {
            out.push(n);
            n *= 2;
        }
        out
    }

    /// Doubles the cutoff until two consecutive evaluations differ by less
    /// than the tolerance. A cutoff whose evolution leaks out of the
    /// truncated space counts as unconverged; other errors are returned.
    pub fn converge<V, F>(&self, mut eval: F) -> Result<Converged<V>>
    where
        V: Tracked,
        F: FnMut(usize) -> Result<V>,
    {
        self.validate()?;
        let mut previous: Option<V> = None;
        let mut last_change = f64::INFINITY;
        for n_cut in self.ladder() {
            let values = match eval(n_cut) {
                Ok(v) => v,
                Err(Error::TruncationLeak { .. }) => {
                    previous = None;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if let Some(prev) = &previous {
                last_change = values.change_from(prev);
                if last_change < self.tolerance {
                    return Ok(Converged {
                        values,
                        n_cut,
                        change: last_change,
                    });
                }
            }
            previous = Some(values);
        }
        Err(Error::CutoffNotConverged {
            max_cut: self.max,
            last_change,
        })
    }
}

/// Observables compared between successive cutoffs.
pub trait Tracked {
    /// Scale-relative distance to the values at the previous cutoff.
    fn change_from(&self, previous: &Self) -> f64;
}

impl Tracked for Vec<f64> {
    fn change_from(&self, previous: &Self) -> f64 {
        scaled_change(previous, self)
    }
}

impl Tracked for f64 {
    fn change_from(&self, previous: &Self) -> f64 {
        scaled_change(&[*previous], &[*self])
    }
}

/// `max |a − b| / max |b|`, or the absolute change when every value is zero.
pub fn scaled_change(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_doubles() {
        let p = CutoffPolicy {
            start: 32,
            max: 300,
            tolerance: 1e-6,
        };
        assert_eq!(p.ladder(), vec![32, 64, 128, 256]);
    }

    #[test]
    fn converges_on_geometric_tail() {
        let p = CutoffPolicy::default();
        let c = p.converge(|n| Ok(vec![1.0 + 1.0 / (n * n) as f64, 0.0])).unwrap();
        assert!(c.change < 1e-6);
        assert_eq!(c.n_cut, 2048);
    }

    #[test]
    fn leaks_restart_the_comparison() {
        let p = CutoffPolicy::default();
        let c = p
            .converge(|n| {
                if n < 128 {
                    Err(Error::TruncationLeak {
                        n_cut: n,
                        tail: 1.0,
                        threshold: 1e-8,
                    })
                } else {
                    Ok(vec![2.0])
                }
            })
            .unwrap();
        assert_eq!(c.n_cut, 256);
    }

    #[test]
    fn reports_non_convergence() {
        let p = CutoffPolicy {
            start: 8,
            max: 64,
            tolerance: 1e-6,
        };
        let r = p.converge(|n| Ok(n as f64));
        assert!(matches!(r, Err(Error::CutoffNotConverged { max_cut: 64, .. })));
        assert!(p.converge(|_| Err::<f64, _>(Error::BlockMismatch)).is_err());
    }
}
