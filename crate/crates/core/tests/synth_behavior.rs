use gazeprompt_core::{
    analyze, synth_trace, EditorGeometry, FixationConfig, GazeMetrics, ProfileKind, ScanpathProfile,
};

fn run(profile: &ScanpathProfile, ms: f64) -> GazeMetrics {
    let trace = synth_trace(profile, &EditorGeometry::default(), ms).unwrap();
    analyze(&trace.recording, &FixationConfig::default()).unwrap()
}

#[test]
fn novices_hop_shorter_and_dwell_longer() {
    for seed in 0..20 {
        let novice = run(&ScanpathProfile::novice(seed), 30_000.0);
        let expert = run(&ScanpathProfile::expert(seed), 30_000.0);
        assert!(novice.mean_saccade_length_px.unwrap() < expert.mean_saccade_length_px.unwrap());
        assert!(novice.mean_fixation_duration_ms.unwrap() > expert.mean_fixation_duration_ms.unwrap());
    }
}

#[test]
fn saccade_length_grows_with_hop_distance() {
    for seed in [1, 2, 3] {
        let mut previous = 0.0;
        for hop in [40.0, 80.0, 160.0, 320.0, 480.0] {
            let profile = ScanpathProfile {
                hop_distance_px: hop,
                ..ScanpathProfile::expert(seed)
            };
            let s = run(&profile, 20_000.0).mean_saccade_length_px.unwrap();
            assert!(s > previous, "seed {seed} hop {hop}: {s} <= {previous}");
            previous = s;
        }
    }
}

#[test]
fn fixation_duration_tracks_dwell() {
    let mut previous = 0.0;
    for dwell in [180.0, 240.0, 320.0, 450.0] {
        let profile = ScanpathProfile {
            mean_dwell_ms: dwell,
            ..ScanpathProfile::novice(9)
        };
        let d = run(&profile, 20_000.0).mean_fixation_duration_ms.unwrap();
        assert!(d > previous);
        assert!((d - dwell).abs() < 40.0, "dwell {dwell} measured {d}");
        previous = d;
    }
}

#[test]
fn pupil_load_shows_as_dilation() {
    let calm = run(
        &ScanpathProfile {
            pupil_load_mm: 0.0,
            ..ScanpathProfile::novice(3)
        },
        10_000.0,
    );
    let loaded = run(&ScanpathProfile::novice(3), 10_000.0);
    assert!(calm.mean_pupil_dilation_mm.unwrap().abs() < 0.02);
    assert!(loaded.mean_pupil_dilation_mm.unwrap() > 0.1);
}

#[test]
fn same_seed_same_trace() {
    for kind in [ProfileKind::Novice, ProfileKind::Expert] {
        let a = synth_trace(
            &ScanpathProfile::for_kind(kind, 77),
            &EditorGeometry::default(),
            5_000.0,
        )
        .unwrap();
        let b = synth_trace(
            &ScanpathProfile::for_kind(kind, 77),
            &EditorGeometry::default(),
            5_000.0,
        )
        .unwrap();
        assert_eq!(a, b);
        let c = synth_trace(
            &ScanpathProfile::for_kind(kind, 78),
            &EditorGeometry::default(),
            5_000.0,
        )
        .unwrap();
        assert_ne!(a.recording.samples, c.recording.samples);
    }
}
