import pytest

import ecgm


def test_checksum_and_decode():
    frame = bytes([0xAA, 0xAA, 0x04, 0x02, 0x00, 0x03, 0x64, 0x96])
    assert ecgm.compute_checksum(frame[3:7]) == 0x96
    events = ecgm.StreamDecoder().feed(frame)
    assert [e["kind"] for e in events] == ["PacketDecoded"]
    assert [r.as_int() for r in events[0]["rows"]] == [0, 100]


def test_encode_round_trip():
    rows = [ecgm.DataRow.raw_ecg(-1234), ecgm.DataRow.heart_rate(72), ecgm.DataRow(0x9A, b"\x01\x02", 1)]
    frame = ecgm.encode_packet(rows)
    events = ecgm.StreamDecoder().feed(frame)
    assert events[0]["rows"] == rows


def test_bad_checksum_is_reported():
    d = ecgm.StreamDecoder()
    events = d.feed(bytes([0xAA, 0xAA, 0x04, 0x02, 0x00, 0x03, 0x64, 0x97]))
    assert events[0]["kind"] == "ChecksumError"
    assert d.stats["checksum_errors"] == 1


def test_segment_and_reassemble():
    data = bytes(range(45))
    notes = ecgm.segment(data, 23)
    assert [len(p) for _, p in notes] == [20, 20, 5]
    assert ecgm.reassemble(notes) == data
    with pytest.raises(ecgm.EcgmError) as info:
        ecgm.reassemble([notes[0], notes[2]])
    assert info.value.kind == "transport-gap error"


def test_signal_chain_recovers_heart_rate():
    samples, peaks = ecgm.gen_ecg(60, 10)
    assert len(samples) == 5120
    assert len(peaks) == 10
    assert ecgm.hr_from_peaks(ecgm.detect_qrs(samples)) == pytest.approx(60, abs=2)
    codes, saturations = ecgm.afe_pipeline(ecgm.add_noise(samples, powerline_mv=0.3))
    assert saturations == 0
    assert all(-32768 <= c <= 32767 for c in codes)


def test_notch_depth():
    assert ecgm.magnitude_response("notch", 50, 512, 30, 50) < 0.01
    assert ecgm.magnitude_response("notch", 50, 512, 30, 10) == pytest.approx(1, abs=0.01)


def test_power_checks():
    verdicts = ecgm.rails_check()
    assert len(verdicts) == 7
    assert all(ok for _, _, ok in verdicts)
    assert ecgm.battery_runtime([("mcu_active", 1.0)]) == 120.0
    assert ecgm.charge_compliance(16.7)[:2] == (60.0, True)


def test_parameter_errors_carry_kind():
    with pytest.raises(ecgm.EcgmError) as info:
        ecgm.gen_ecg(0, 1)
    assert info.value.kind == "parameter error"


def test_run_e2e():
    summary = ecgm.run_e2e(hr=72, duration=10, seed=7)
    assert summary["mean_hr"] == pytest.approx(72, abs=2)
    assert summary["checksum_errors"] == 0
    assert summary["frames_emitted"] == summary["frames_generated"]
    assert ecgm.run_e2e(hr=72, duration=10, seed=7) == summary
    assert "hr" in ecgm.default_config()
