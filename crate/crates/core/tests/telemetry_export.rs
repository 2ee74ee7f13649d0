use std::fs;

use vdrive_core::telemetry::{TelemetryError, FRAME_FIELDS};
use vdrive_core::{load_scenario, run, Recorder, TelemetryFrame};

fn recorded(duration: f64) -> Recorder {
    let s = load_scenario(&format!(
        r#"{{"sim": {{"duration": {duration}}}, "control": {{"mode": "FOC"}},
            "timeline": [{{"t": 0, "cmd": "PwmEnable", "value": true}},
                         {{"t": 0.01, "cmd": "SetSpeedRef", "value": 60}}]}}"#
    ))
    .unwrap();
    let mut rec = Recorder::default();
    run(&s, &mut [&mut rec]).unwrap();
    rec
}

#[test]
fn export_writes_header_and_one_row_per_frame() {
    let rec = recorded(0.05);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frames.csv");
    let rows = rec.export_csv(&path).unwrap();
    assert_eq!(rows, 50);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), FRAME_FIELDS.join(","));
    assert_eq!(lines.count(), 50);
    assert!(!text.contains('\r'));

    // exporting again gives the same bytes
    let again = dir.path().join("again.csv");
    rec.export_csv(&again).unwrap();
    assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn exported_rows_read_back_exactly() {
    let rec = recorded(0.03);
    let mut buf = Vec::new();
    rec.write_csv(&mut buf).unwrap();
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    let headers = rdr.headers().unwrap().clone();
    let originals: Vec<&TelemetryFrame> = rec.frames().collect();
    let mut n = 0;
    for (row, orig) in rdr.records().zip(&originals) {
        let row = row.unwrap();
        let f = TelemetryFrame::from_fields(|k| headers.iter().position(|h| h == k).and_then(|i| row.get(i))).unwrap();
        assert_eq!(&f, *orig);
        n += 1;
    }
    assert_eq!(n, originals.len());
}

#[test]
fn timestamps_strictly_increase() {
    let rec = recorded(0.05);
    let t: Vec<f64> = rec.frames().map(|f| f.t).collect();
    assert!(t.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn small_ring_keeps_the_newest_frames() {
    let full = recorded(0.05);
    let s = load_scenario(
        r#"{"sim": {"duration": 0.05}, "control": {"mode": "FOC"},
        "timeline": [{"t": 0, "cmd": "PwmEnable", "value": true},
                     {"t": 0.01, "cmd": "SetSpeedRef", "value": 60}]}"#,
    )
    .unwrap();
    let mut small = Recorder::with_capacity(8);
    run(&s, &mut [&mut small]).unwrap();
    assert_eq!(small.len(), 8);
    assert_eq!(small.evicted(), 42);
    let tail: Vec<_> = full.frames().skip(42).collect();
    assert_eq!(small.frames().collect::<Vec<_>>(), tail);
}

#[test]
fn export_to_missing_directory_fails_with_io() {
    let rec = recorded(0.01);
    let err = rec.export_csv("/nonexistent-dir/x/frames.csv").unwrap_err();
    assert!(matches!(err, TelemetryError::Io(_) | TelemetryError::Csv(_)), "{err:?}");
}
