//! Explicit transient-memory accounting.
//!
//! Every temporary tensor in both pipelines registers its byte size here;
//! persistent state (graph, features, parameters, optimizer moments) does
//! not. The peak is therefore an algorithmic quantity, reproducible across
//! runs and machines.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::sync::{Arc, Mutex};

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct MeterReading {
    pub current: u64,
    pub peak: u64,
}

/// Shared transient-byte counter. Cloning yields another handle to the same
/// counters. A disabled meter accepts every call and records nothing.
#[derive(Clone, Default)]
pub struct MemoryMeter {
    inner: Option<Arc<Mutex<MeterReading>>>,
}

impl fmt::Debug for MemoryMeter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner {
            Some(_) => f.debug_tuple("MemoryMeter").field(&self.reading()).finish(),
            None => f.write_str("MemoryMeter(disabled)"),
        }
    }
}

impl MemoryMeter {
    pub fn new() -> Self {
        MemoryMeter {
            inner: Some(Arc::default()),
        }
    }

    pub fn disabled() -> Self {
        MemoryMeter { inner: None }
    }

    pub fn is_enabled(&self) -> bool {
        self.inner.is_some()
    }

    fn with<R>(&self, f: impl FnOnce(&mut MeterReading) -> R) -> Option<R> {
        self.inner
            .as_ref()
            .map(|m| f(&mut m.lock().unwrap_or_else(|e| e.into_inner())))
    }

    pub fn acquire(&self, bytes: u64) {
        self.with(|r| {
            r.current += bytes;
            r.peak = r.peak.max(r.current);
        });
    }

    /// Panics when releasing more than is live: that is an accounting bug.
    pub fn release(&self, bytes: u64) {
        self.with(|r| {
            assert!(
                bytes <= r.current,
                "meter release of {bytes} bytes exceeds {} live bytes",
                r.current
            );
            r.current -= bytes;
        });
    }

    /// Register `bytes` until the returned guard is dropped.
    #[must_use]
    pub fn scope(&self, bytes: u64) -> MeterScope {
        self.acquire(bytes);
        MeterScope {
            meter: self.clone(),
            bytes,
        }
    }

    pub fn reading(&self) -> MeterReading {
        self.with(|r| *r).unwrap_or_default()
    }

    pub fn current(&self) -> u64 {
        self.reading().current
    }

    pub fn peak(&self) -> u64 {
        self.reading().peak
    }

    /// Start a new measurement window: the peak restarts from what is live now.
    pub fn reset_peak(&self) {
        self.with(|r| r.peak = r.current);
    }

    /// Wrap a vector so its logical size stays registered while it lives.
    pub fn track<T>(&self, data: Vec<T>) -> TrackedVec<T> {
        let bytes = std::mem::size_of_val(data.as_slice()) as u64;
        self.acquire(bytes);
        TrackedVec {
            data,
            bytes,
            meter: self.clone(),
        }
    }

    pub fn filled<T: Clone>(&self, len: usize, value: T) -> TrackedVec<T> {
        self.track(vec![value; len])
    }
}

/// Registration guard returned by [`MemoryMeter::scope`].
#[derive(Debug)]
pub struct MeterScope {
    meter: MemoryMeter,
    bytes: u64,
}

impl MeterScope {
    pub fn bytes(&self) -> u64 {
        self.bytes
    }
}

impl Drop for MeterScope {
    fn drop(&mut self) {
        self.meter.release(self.bytes);
    }
}

/// A `Vec<T>` whose byte size is registered with a meter for its lifetime.
pub struct TrackedVec<T> {
    data: Vec<T>,
    bytes: u64,
    meter: MemoryMeter,
}

impl<T> TrackedVec<T> {
    /// Stop tracking and hand back the vector.
    pub fn into_inner(mut self) -> Vec<T> {
        self.meter.release(self.bytes);
        self.bytes = 0;
        std::mem::take(&mut self.data)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn tracked_bytes(&self) -> u64 {
        self.bytes
    }
}

impl<T> Drop for TrackedVec<T> {
    fn drop(&mut self) {
        self.meter.release(self.bytes);
    }
}

impl<T> Deref for TrackedVec<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.data
    }
}

impl<T> DerefMut for TrackedVec<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
}

impl<T: Clone> Clone for TrackedVec<T> {
    fn clone(&self) -> Self {
        self.meter.track(self.data.clone())
    }
}

impl<T: PartialEq> PartialEq for TrackedVec<T> {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
    }
}

impl<T: fmt::Debug> fmt::Debug for TrackedVec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.data.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acquire_release_peak() {
        let m = MemoryMeter::new();
        m.acquire(100);
        m.acquire(50);
        m.release(100);
        assert_eq!(m.reading(), MeterReading { current: 50, peak: 150 });
        m.reset_peak();
        assert_eq!(m.peak(), 50);
        m.release(50);
        assert_eq!(m.current(), 0);
    }

    #[test]
    #[should_panic(expected = "exceeds")]
    fn release_without_acquire_panics() {
        MemoryMeter::new().release(1);
    }

    #[test]
    fn tracked_vec_registers_logical_bytes() {
        let m = MemoryMeter::new();
        {
            let a = m.filled(10, 0f32);
            let b = m.filled(3, 0f64);
            assert_eq!(a.tracked_bytes(), 40);
            assert_eq!(m.current(), 64);
            let c = b.clone();
            assert_eq!(m.current(), 88);
            drop(c);
            let v = a.into_inner();
            assert_eq!(v.len(), 10);
            assert_eq!(m.current(), 24);
        }
        assert_eq!(m.reading(), MeterReading { current: 0, peak: 88 });
    }

    #[test]
    fn scopes_nest() {
        let m = MemoryMeter::new();
        let a = m.scope(7);
        {
            let _b = m.scope(5);
            assert_eq!(m.current(), 12);
        }
        assert_eq!(a.bytes(), 7);
        drop(a);
        assert_eq!(m.reading(), MeterReading { current: 0, peak: 12 });
    }

    #[test]
    fn disabled_meter_is_inert() {
        let m = MemoryMeter::disabled();
        m.release(10);
        let _v = m.filled(100, 1u8);
        assert_eq!(m.reading(), MeterReading::default());
        assert!(!m.is_enabled());
    }

    #[test]
    fn concurrent_handles_share_counters() {
        let m = MemoryMeter::new();
        std::thread::scope(|s| {
            for _ in 0..4 {
                let m = m.clone();
                s.spawn(move || {
                    for _ in 0..1000 {
                        let _g = m.scope(8);
                    }
                });
            }
        });
        assert_eq!(m.current(), 0);
        assert!(m.peak() >= 8 && m.peak() <= 32);
    }
}
