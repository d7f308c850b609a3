use crate::error::DomainError;

/// `[t_start, t_end]` split into `n_slices` uniform time slices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomain {
    t_start: f64,
    t_end: f64,
    n_slices: usize,
}

impl TimeDomain {
    pub fn new(t_start: f64, t_end: f64, n_slices: usize) -> Result<Self, DomainError> {
        if !(t_end > t_start) {
            return Err(DomainError::EmptyInterval { t_start, t_end });
        }
        if n_slices == 0 {
            return Err(DomainError::NoSlices);
        }
        Ok(Self {
            t_start,
            t_end,
            n_slices,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn slice_length(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_slices as f64
    }

    /// Boundary `t_j`, `j = 0..=n_slices`. The last boundary is exactly `t_end`.
    pub fn boundary(&self, j: usize) -> f64 {
        assert!(j <= self.n_slices, "boundary index {j} out of range");
        if j == self.n_slices {
            self.t_end
        } else {
            self.t_start + j as f64 * self.slice_length()
        }
    }

    pub fn boundaries(&self) -> Vec<f64> {
        (0..=self.n_slices).map(|j| self.boundary(j)).collect()
    }
}
