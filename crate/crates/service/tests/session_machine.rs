mod common;

use gazeprompt_core::{GazeSample, InteractionMode};
use gazeprompt_llm::RefactorResponse;
use gazeprompt_service::{Phase, RefactorOutcome, Session, SessionError, SessionEvent};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Ingest(usize),
    Stale,
    Trigger(Option<InteractionMode>),
    Confirm,
    Finish(bool),
    Geometry(u32),
    Close,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        4 => (1usize..40).prop_map(Op::Ingest),
        1 => Just(Op::Stale),
        2 => prop_oneof![Just(None), Just(Some(InteractionMode::Preset)), Just(Some(InteractionMode::Realtime))].prop_map(Op::Trigger),
        2 => Just(Op::Confirm),
        2 => any::<bool>().prop_map(Op::Finish),
        1 => (1u32..200).prop_map(Op::Geometry),
        1 => Just(Op::Close),
    ]
}

fn response(id: &str) -> RefactorResponse {
    RefactorResponse {
        request_id: id.into(),
        refactored_code: "class A {}".into(),
        backend_name: "mock".into(),
        latency_ms: 1.0,
        raw_model_message: "```\nclass A {}\n```".into(),
    }
}

fn allowed(op: &Op, phase: Phase, samples: usize) -> bool {
    match op {
        Op::Ingest(_) => phase == Phase::Reading,
        Op::Stale => false,
        Op::Trigger(_) => phase == Phase::Reading && samples >= 2,
        Op::Confirm => phase == Phase::PromptReady,
        Op::Finish(_) => phase == Phase::Refactoring,
        Op::Geometry(_) | Op::Close => phase != Phase::Closed,
    }
}

fn legal_step(before: Phase, after: Phase) -> bool {
    use Phase::*;
    before == after
        || matches!(
            (before, after),
            (Reading, PromptReady)
                | (PromptReady, Refactoring)
                | (Refactoring, Refactored)
                | (Refactoring, PromptReady)
        )
        || after == Closed
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn operations_succeed_only_in_their_phase(ops in proptest::collection::vec(op(), 1..40)) {
        let rec = common::novice(1, 20_000.0);
        let (mut s, opened) = Session::open("p", common::settings(InteractionMode::Realtime)).unwrap();
        prop_assert_eq!(opened.seq, 0);
        let mut cursor = 0usize;
        let mut seq = 1u64;
        let mut request_id = String::new();
        for op in ops {
            let before = s.phase();
            let samples_before = cursor;
            let expect_ok = allowed(&op, before, samples_before)
                && !(matches!(op, Op::Ingest(_)) && cursor >= rec.samples.len());
            let result: Result<Vec<gazeprompt_service::Frame>, SessionError> = match &op {
                Op::Ingest(n) => {
                    let end = (cursor + n).min(rec.samples.len());
                    if end == cursor {
                        // Stream exhausted: nothing left to send.
                        continue;
                    }
                    let r = s.ingest(&rec.samples[cursor..end]);
                    if r.is_ok() {
                        cursor = end;
                    }
                    r
                }
                Op::Stale => {
                    let stale = GazeSample::binocular(0, 0.5, 0.5, 3.0);
                    if cursor == 0 || rec.samples[cursor - 1].timestamp_us == 0 {
                        continue;
                    }
                    s.ingest(&[stale])
                }
                Op::Trigger(mode) => s.trigger(*mode),
                Op::Confirm => s.begin_refactor().map(|(req, f)| {
                    request_id = req.request_id;
                    vec![f]
                }),
                Op::Finish(ok) => {
                    let outcome = if *ok {
                        RefactorOutcome::Done(response(&request_id))
                    } else {
                        RefactorOutcome::Failed { code: "backend_unavailable".into(), message: "down".into() }
                    };
                    s.finish_refactor(outcome).map(|f| vec![f])
                }
                Op::Geometry(first) => s
                    .update_geometry(gazeprompt_core::EditorGeometry::default().scrolled_to(*first))
                    .map(|f| vec![f]),
                Op::Close => s.close().map(|f| vec![f]),
            };
            match result {
                Ok(frames) => {
                    prop_assert!(expect_ok, "{:?} succeeded in {}", op, before);
                    for f in &frames {
                        prop_assert_eq!(f.seq, seq);
                        seq += 1;
                    }
                    prop_assert_eq!(frames.last().map(|f| f.phase), Some(s.phase()));
                }
                Err(e) => {
                    prop_assert!(!expect_ok, "{:?} failed in {}: {}", op, before, e);
                    prop_assert_eq!(s.phase(), before);
                    prop_assert_eq!(s.next_seq(), seq);
                }
            }
            prop_assert!(legal_step(before, s.phase()), "{} -> {}", before, s.phase());
        }
    }
}

#[test]
fn wrong_phase_is_reported_with_code() {
    let (mut s, _) = Session::open("w", common::settings(InteractionMode::Realtime)).unwrap();
    let err = s.begin_refactor().unwrap_err();
    assert_eq!(err.code(), "wrong_phase");
    let frame = s.error_frame(err.code(), &err.to_string());
    assert_eq!(frame.seq, 1);
    assert!(matches!(frame.event, SessionEvent::Error { .. }));
}

#[test]
fn trigger_needs_two_samples() {
    let (mut s, _) = Session::open("t", common::settings(InteractionMode::Realtime)).unwrap();
    assert_eq!(s.trigger(None).unwrap_err().code(), "insufficient_data");
    s.ingest(&[GazeSample::binocular(0, 0.5, 0.5, 3.0)]).unwrap();
    assert_eq!(s.trigger(None).unwrap_err().code(), "insufficient_data");
    s.ingest(&[GazeSample::binocular(16_667, 0.5, 0.5, 3.0)]).unwrap();
    assert!(s.trigger(None).is_ok());
    assert_eq!(s.phase(), Phase::PromptReady);
}

#[test]
fn stale_batch_is_rejected_whole() {
    let (mut s, _) = Session::open("m", common::settings(InteractionMode::Realtime)).unwrap();
    s.ingest(&[GazeSample::binocular(100, 0.5, 0.5, 3.0)]).unwrap();
    let batch = [
        GazeSample::binocular(200, 0.5, 0.5, 3.0),
        GazeSample::binocular(50, 0.5, 0.5, 3.0),
    ];
    assert_eq!(s.ingest(&batch).unwrap_err().code(), "nonmonotonic_timestamps");
    assert_eq!(s.snapshot().sample_count, 1);
    assert_eq!(
        s.ingest(&[GazeSample::binocular(99, 0.5, 0.5, 3.0)])
            .unwrap_err()
            .code(),
        "nonmonotonic_timestamps"
    );
}

#[test]
fn open_rejects_bad_settings() {
    let mut bad = common::settings(InteractionMode::Realtime);
    bad.geometry.line_height_px = 0.0;
    assert_eq!(Session::open("x", bad).unwrap_err().code(), "invalid_settings");
    let mut empty = common::settings(InteractionMode::Realtime);
    empty.source_code.clear();
    assert_eq!(Session::open("x", empty).unwrap_err().code(), "missing_source");
}

#[test]
fn screen_size_is_fixed_for_the_session() {
    let (mut s, _) = Session::open("g", common::settings(InteractionMode::Realtime)).unwrap();
    let g = gazeprompt_core::EditorGeometry {
        screen_width_px: 1280,
        ..Default::default()
    };
    assert_eq!(s.update_geometry(g).unwrap_err().code(), "invalid_settings");
}

#[test]
fn metrics_updates_respect_the_snapshot_period() {
    let rec = common::novice(2, 5_000.0);
    let (mut s, _) = Session::open("u", common::settings(InteractionMode::Realtime)).unwrap();
    let mut stamps = Vec::new();
    for chunk in rec.samples.chunks(3) {
        for f in s.ingest(chunk).unwrap() {
            if let SessionEvent::MetricsUpdate { stream_time_us, .. } = f.event {
                stamps.push(stream_time_us);
            }
        }
    }
    assert!(stamps.len() >= 9, "{stamps:?}");
    for w in stamps.windows(2) {
        assert!(w[1] - w[0] >= 500_000);
        // With 3-sample batches an update is never more than a batch late.
        assert!(w[1] - w[0] < 500_000 + 3 * 16_667 + 1);
    }
}
