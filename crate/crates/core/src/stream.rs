// SPDX-License-Identifier: MIT OR Apache-2.0

//! Windowed prefix sums for `N` parallel streams.
//!
//! Time is 1-based: after `t` pushes the state holds `S_{n,j}` for
//! `j ∈ [max(0, t - m1), t]`, with `S_{n,0} = 0`. Everything a detector needs
//! for a candidate change-point `k` is a difference of two stored columns.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamState {
    n_streams: usize,
    time: u64,
    capacity: usize,
    /// Ring of `capacity + 1` columns, column for time `j` at slot `j % (capacity + 1)`.
    prefix: Vec<f64>,
    /// Kahan compensation of the running sums, when enabled.
    compensation: Option<Vec<f64>>,
    /// Raw observations in the same ring layout, when retained.
    raw: Option<Vec<f64>>,
}

impl StreamState {
    /// `n_streams` streams with a lookback of `window_capacity` (m1) steps.
    pub fn new(n_streams: usize, window_capacity: usize) -> Result<Self> {
        if n_streams == 0 {
            return Err(Error::param("n_streams", "must be positive"));
        }
        if window_capacity == 0 {
            return Err(Error::param("window_capacity", "must be positive"));
        }
        Ok(Self {
            n_streams,
            time: 0,
            capacity: window_capacity,
            prefix: vec![0.0; n_streams * (window_capacity + 1)],
            compensation: Some(vec![0.0; n_streams]),
            raw: None,
        })
    }

    /// Keep the raw observations of the window alongside the prefix sums.
    pub fn with_raw_retention(mut self) -> Self {
        self.raw = Some(vec![0.0; self.prefix.len()]);
        self
    }

    /// Disable compensated accumulation of the running sums.
    pub fn without_compensation(mut self) -> Self {
        self.compensation = None;
        self
    }

    pub fn n_streams(&self) -> usize {
        self.n_streams
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn window_capacity(&self) -> usize {
        self.capacity
    }

    /// Oldest addressable time index.
    pub fn oldest(&self) -> u64 {
        self.time.saturating_sub(self.capacity as u64)
    }

    #[inline]
    fn slot(&self, j: u64) -> usize {
        (j % (self.capacity as u64 + 1)) as usize * self.n_streams
    }

    pub fn push(&mut self, y: &[f64]) -> Result<()> {
        if y.len() != self.n_streams {
            return Err(Error::Dimension {
                expected: self.n_streams,
                got: y.len(),
            });
        }
        let n = self.n_streams;
        let prev = self.slot(self.time);
        let next = self.slot(self.time + 1);
        match self.compensation.as_mut() {
            Some(comp) => {
                for i in 0..n {
                    // Kahan update of S_{i,t} with compensation carried forward.
                    let s = self.prefix[prev + i];
                    let yk = y[i] - comp[i];
                    let t = s + yk;
                    comp[i] = (t - s) - yk;
                    self.prefix[next + i] = t;
                }
            }
            None => {
                for i in 0..n {
                    self.prefix[next + i] = self.prefix[prev + i] + y[i];
                }
            }
        }
        if let Some(raw) = self.raw.as_mut() {
            raw[next..next + n].copy_from_slice(y);
        }
        self.time += 1;
        Ok(())
    }

    fn check_addressable(&self, j: u64) -> Result<()> {
        if j > self.time || j < self.oldest() {
            return Err(Error::OutOfWindow {
                k: j,
                lo: self.oldest(),
                hi: self.time,
                t: self.time,
            });
        }
        Ok(())
    }

    /// Prefix sums of all streams at time `j`.
    pub fn column(&self, j: u64) -> Result<&[f64]> {
        self.check_addressable(j)?;
        let s = self.slot(j);
        Ok(&self.prefix[s..s + self.n_streams])
    }

    /// Prefix sums at the current time.
    pub fn current(&self) -> &[f64] {
        let s = self.slot(self.time);
        &self.prefix[s..s + self.n_streams]
    }

    /// Column at `j` without bounds checks beyond the ring; callers guarantee
    /// `oldest() <= j <= time()`.
    #[inline]
    pub(crate) fn column_unchecked(&self, j: u64) -> &[f64] {
        let s = self.slot(j);
        &self.prefix[s..s + self.n_streams]
    }

    pub fn prefix(&self, n: usize, j: u64) -> Result<f64> {
        self.check_stream(n)?;
        Ok(self.column(j)?[n])
    }

    /// Raw observation `y_{n,j}`, available only with raw retention and for
    /// `j` in `(oldest, time]`.
    pub fn raw(&self, n: usize, j: u64) -> Option<f64> {
        let raw = self.raw.as_ref()?;
        if j == 0 || j > self.time || j <= self.oldest() || n >= self.n_streams {
            return None;
        }
        Some(raw[self.slot(j) + n])
    }

    fn check_stream(&self, n: usize) -> Result<()> {
        if n >= self.n_streams {
            return Err(Error::param(
                "stream",
                format!("index {n} out of range for {} streams", self.n_streams),
            ));
        }
        Ok(())
    }

    fn check_k(&self, k: u64) -> Result<()> {
        if k >= self.time {
            return Err(Error::OutOfWindow {
                k,
                lo: self.oldest(),
                hi: self.time.saturating_sub(1),
                t: self.time,
            });
        }
        self.check_addressable(k)
    }

    /// `U_{n,k,t} = (S_{n,t} - S_{n,k}) / sqrt(t - k)`.
    pub fn u_stat(&self, k: u64, n: usize) -> Result<f64> {
        self.check_stream(n)?;
        self.check_k(k)?;
        let w = (self.time - k) as f64;
        Ok((self.current()[n] - self.column_unchecked(k)[n]) / w.sqrt())
    }

    /// Log-GLR of stream `n` for change-point `k`: `(U⁺)² / 2`.
    pub fn glr_stat(&self, k: u64, n: usize) -> Result<f64> {
        let u = self.u_stat(k, n)?.max(0.0);
        Ok(0.5 * u * u)
    }

    /// Log-likelihood ratio at a fixed post-change mean `delta`:
    /// `delta (S_{n,t} - S_{n,k}) - delta² (t - k) / 2`.
    pub fn loglik_fixed(&self, k: u64, n: usize, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::param("delta", format!("must be positive, got {delta}")));
        }
        self.check_stream(n)?;
        self.check_k(k)?;
        let w = (self.time - k) as f64;
        Ok(delta * (self.current()[n] - self.column_unchecked(k)[n]) - 0.5 * delta * delta * w)
    }

    /// All `U_{n,k,t}` for a given `k`, written into `out`.
    pub fn u_vector(&self, k: u64, out: &mut [f64]) -> Result<()> {
        self.check_k(k)?;
        if out.len() != self.n_streams {
            return Err(Error::Dimension {
                expected: self.n_streams,
                got: out.len(),
            });
        }
        let scale = 1.0 / ((self.time - k) as f64).sqrt();
        let cur = self.current();
        let old = self.column_unchecked(k);
        for ((o, c), p) in out.iter_mut().zip(cur).zip(old) {
            *o = (c - p) * scale;
        }
        Ok(())
    }

    /// Clear all sums and restart at `t = 0`.
    pub fn reset(&mut self) {
        self.time = 0;
        self.prefix.iter_mut().for_each(|x| *x = 0.0);
        if let Some(c) = self.compensation.as_mut() {
            c.iter_mut().for_each(|x| *x = 0.0);
        }
        if let Some(r) = self.raw.as_mut() {
            r.iter_mut().for_each(|x| *x = 0.0);
        }
    }
}
