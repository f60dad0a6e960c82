use cs_causality::sigsim::write_channels_csv;
use cs_causality_harness::ingest::{ingest_spike_trains, parse_channel_csv, parse_event_list, SpikeFormat};
use tempfile::TempDir;

#[test]
fn channel_csv_round_trip() {
    let a = [0.0, 1.0, 0.0, 1.0, 1.0];
    let b = [0.25, -3.5e-7, 1e12, 0.1, 7.0];
    let mut buf = b"# cs-causality v1\n".to_vec();
    write_channels_csv(&mut buf, &[&a, &b]).unwrap();
    let s = parse_channel_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(s.shape(), (2, 5));
    for t in 0..5 {
        assert_eq!(s[(0, t)].to_bits(), a[t].to_bits());
        assert_eq!(s[(1, t)].to_bits(), b[t].to_bits());
    }
}

#[test]
fn event_list_round_trip_through_file() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("events.txt");
    // channel, timestamp
    std::fs::write(&path, "0,0.5\n1,1.2\n0,3.9\n1,4.0\n").unwrap();
    let s = ingest_spike_trains(&path, SpikeFormat::EventList { bin_width: 1.0 }).unwrap();
    assert_eq!(s.nrows(), 2);
    assert_eq!(s[(0, 0)], 1.0);
    assert_eq!(s[(0, 3)], 1.0);
    assert_eq!(s[(1, 1)], 1.0);
    assert_eq!(s[(1, 4)], 1.0);
    assert_eq!(s.iter().sum::<f64>(), 4.0);
}

#[test]
fn malformed_inputs_are_rejected() {
    assert!(parse_channel_csv("a,b\n1,2\n").is_err());
    assert!(parse_channel_csv("ch0,ch1\n1,2\n3\n").is_err());
    assert!(parse_event_list("0,2.0\n0,1.0\n", 1.0).is_err());
}
