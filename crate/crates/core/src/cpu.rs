//! Process CPU-load sampling.
//!
//! A background thread reads the process CPU clock every period and records
//! `Δcpu_time / Δwall_time`, i.e. the number of cores kept busy on average
//! over that interval.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub const DEFAULT_SAMPLE_PERIOD: Duration = Duration::from_millis(100);

/// Load over the interval ending at `time_s` (seconds since the run start).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpuSample {
    pub time_s: f64,
    pub load: f64,
}

/// CPU time consumed by all threads of this process, if the platform exposes it.
pub fn process_cpu_time() -> Option<Duration> {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: `ts` is a valid, writable timespec.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return None;
    }
    Some(Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32))
}

pub fn available_cores() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}

/// Running sampler. Dropping it without [`CpuMonitor::stop`] detaches the thread
/// after signalling it to finish.
pub struct CpuMonitor {
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<Vec<CpuSample>>>,
}

impl CpuMonitor {
    /// Starts sampling with timestamps relative to `origin`. Returns `None`
    /// when the process CPU clock is unavailable.
    pub fn start(origin: Instant, period: Duration) -> Option<Self> {
        let period = period.max(Duration::from_millis(1));
        let mut last_cpu = process_cpu_time()?;
        let mut last_wall = Instant::now();
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let handle = thread::Builder::new()
            .name("cpu-monitor".into())
            .spawn(move || {
                let mut samples = Vec::new();
                loop {
                    let deadline = last_wall + period;
                    while !flag.load(Ordering::Acquire) {
                        let now = Instant::now();
                        if now >= deadline {
                            break;
                        }
                        thread::park_timeout(deadline - now);
                    }
                    let now = Instant::now();
                    let Some(cpu) = process_cpu_time() else { break };
                    let wall = now.duration_since(last_wall).as_secs_f64();
                    if wall >= 1e-3 {
                        let busy = cpu.saturating_sub(last_cpu).as_secs_f64();
                        samples.push(CpuSample {
                            time_s: now.duration_since(origin).as_secs_f64(),
                            load: busy / wall,
                        });
                    }
                    last_cpu = cpu;
                    last_wall = now;
                    if flag.load(Ordering::Acquire) {
                        break;
                    }
                }
                samples
            })
            .ok()?;
        Some(Self {
            stop,
            handle: Some(handle),
        })
    }

    /// Takes a final sample and returns the series.
    pub fn stop(mut self) -> Vec<CpuSample> {
        self.finish()
    }

    fn finish(&mut self) -> Vec<CpuSample> {
        self.stop.store(true, Ordering::Release);
        match self.handle.take() {
            Some(h) => {
                h.thread().unpark();
                h.join().unwrap_or_default()
            }
            None => Vec::new(),
        }
    }
}

impl Drop for CpuMonitor {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Release);
        if let Some(h) = &self.handle {
            h.thread().unpark();
        }
    }
}

/// Mean load from the run start until `until_s`, including the sample whose
/// interval contains `until_s`.
pub fn mean_load_until(samples: &[CpuSample], until_s: f64) -> Option<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for s in samples {
        total += s.load;
        count += 1;
        if s.time_s >= until_s {
            break;
        }
    }
    (count > 0).then(|| total / count as f64)
}
