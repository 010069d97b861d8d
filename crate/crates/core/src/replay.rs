//! Deterministic replay of a recording into a sample consumer.

use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::sample::{GazeRecording, GazeSample};

#[derive(Debug, Error)]
pub enum ReplayError<E: std::error::Error + 'static> {
    #[error("replay speed must be finite and non-negative, got {0}")]
    InvalidSpeed(f64),
    #[error("sink rejected sample {position}: {source}")]
    Rejected {
        position: usize,
        #[source]
        source: E,
    },
}

/// Receives samples one at a time, in recording order.
pub trait SampleSink {
    type Error: std::error::Error + 'static;

    fn accept(&mut self, sample: &GazeSample) -> Result<(), Self::Error>;
}

impl<F, E> SampleSink for F
where
    F: FnMut(&GazeSample) -> Result<(), E>,
    E: std::error::Error + 'static,
{
    type Error = E;

    fn accept(&mut self, sample: &GazeSample) -> Result<(), E> {
        self(sample)
    }
}

/// Delivers every sample of `recording` to `sink`, exactly once and in order.
///
/// With `speed > 0` delivery is paced against the recorded timestamps divided
/// by `speed`; the schedule is anchored at the first sample so sleep jitter
/// does not accumulate. `speed == 0` delivers as fast as possible.
pub fn replay<S: SampleSink>(recording: &GazeRecording, speed: f64, sink: &mut S) -> Result<(), ReplayError<S::Error>> {
    if !(speed.is_finite() && speed >= 0.0) {
        return Err(ReplayError::InvalidSpeed(speed));
    }
    let Some(first) = recording.samples.first() else {
        return Ok(());
    };
    let origin_us = first.timestamp_us;
    let started = Instant::now();
    for (position, sample) in recording.samples.iter().enumerate() {
        if speed > 0.0 {
            let offset_s = (sample.timestamp_us - origin_us) as f64 / 1e6 / speed;
            let due = Duration::from_secs_f64(offset_s);
            if let Some(wait) = due.checked_sub(started.elapsed()) {
                thread::sleep(wait);
            }
        }
        sink.accept(sample)
            .map_err(|source| ReplayError::Rejected { position, source })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::RecordingHeader;
    use std::convert::Infallible;

    fn recording(n: u64, step_us: u64) -> GazeRecording {
        let samples = (0..n)
            .map(|i| GazeSample::binocular(i * step_us, 0.5, 0.5, 3.0))
            .collect();
        GazeRecording::new(RecordingHeader::default(), samples).unwrap()
    }

    #[test]
    fn unthrottled_delivers_all_in_order() {
        let rec = recording(3, 16_667);
        let mut got = Vec::new();
        replay(&rec, 0.0, &mut |s: &GazeSample| {
            got.push(*s);
            Ok::<_, Infallible>(())
        })
        .unwrap();
        assert_eq!(got, rec.samples);
    }

    #[test]
    fn empty_recording_returns_immediately() {
        let rec = recording(0, 1);
        let mut calls = 0;
        let started = Instant::now();
        replay(&rec, 1.0, &mut |_: &GazeSample| {
            calls += 1;
            Ok::<_, Infallible>(())
        })
        .unwrap();
        assert_eq!(calls, 0);
        assert!(started.elapsed() < Duration::from_millis(50));
    }

    #[derive(Debug, Error)]
    #[error("full")]
    struct Full;

    #[test]
    fn rejection_reports_position() {
        let rec = recording(5, 10);
        let mut seen = 0;
        let err = replay(&rec, 0.0, &mut |_: &GazeSample| {
            seen += 1;
            if seen == 3 {
                Err(Full)
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        assert!(matches!(err, ReplayError::Rejected { position: 2, .. }));
    }

    #[test]
    fn negative_speed_rejected() {
        let rec = recording(1, 10);
        let err = replay(&rec, -1.0, &mut |_: &GazeSample| Ok::<_, Infallible>(())).unwrap_err();
        assert!(matches!(err, ReplayError::InvalidSpeed(_)));
    }

    #[test]
    fn real_time_pacing_within_ten_percent() {
        // 60 samples spanning exactly 1 s
        let samples = (0..60)
            .map(|i| GazeSample::binocular(i * 1_000_000 / 59, 0.5, 0.5, 3.0))
            .collect();
        let rec = GazeRecording::new(RecordingHeader::default(), samples).unwrap();
        let started = Instant::now();
        let mut n = 0;
        replay(&rec, 1.0, &mut |_: &GazeSample| {
            n += 1;
            Ok::<_, Infallible>(())
        })
        .unwrap();
        let elapsed = started.elapsed().as_secs_f64();
        assert_eq!(n, 60);
        assert!((0.9..=1.1).contains(&elapsed), "elapsed {elapsed}");
    }
}
