"""Burst arithmetic and the conformance checker."""

import pytest

from fbsim.axi import (AddrBeat, BurstError, ChannelSample, DataBeat,
                       PortTrace, RespBeat, beat_address, check_trace,
                       handshake_fired)


def ab(addr, beats, size_log2=4, txn_id=0):
    return AddrBeat(id=txn_id, addr=addr, len_m1=beats - 1, size_log2=size_log2)


def test_beat_address_arithmetic():
    assert beat_address(0x100, 4, 2) == 0x120
    assert beat_address(0x100, 4, 0) == 0x100
    assert beat_address(0x0, 0, 5) == 5


def test_handshake_fired_table():
    assert handshake_fired(1, 1)
    assert not handshake_fired(1, 0)
    assert not handshake_fired(0, 1)
    assert not handshake_fired(0, 0)


def test_burst_4k_crossing_enumeration():
    # second 16-byte beat of a burst at 0x0FF0 lands on 0x1000
    assert beat_address(0x0FF0, 4, 1) == 0x1000
    assert not ab(0x0FF0, 1).crosses_4k()
    assert ab(0x0FF0, 2).crosses_4k()
    assert not ab(0x0000, 256).crosses_4k()  # exactly one 4 KiB page
    assert ab(0x0010, 256).crosses_4k()


def test_addr_beat_validation():
    with pytest.raises(BurstError):
        AddrBeat(id=0, addr=0, len_m1=256, size_log2=4)
    with pytest.raises(BurstError):
        AddrBeat(id=0, addr=0, len_m1=0, size_log2=4, burst="WRAP")


def _trace(port="p0"):
    return PortTrace(port)


def _read_burst_samples(trace, start_cycle, addr, beats, *, last_on=None,
                        deliver=None, data=b"\x00" * 16):
    """Clean AR + R sequence; oddities injected via last_on/deliver."""
    trace.record("AR", ChannelSample(start_cycle, True, True, ab(addr, beats)))
    deliver = beats if deliver is None else deliver
    last_on = beats - 1 if last_on is None else last_on
    for i in range(deliver):
        trace.record("R", ChannelSample(start_cycle + 2 + i, True, True,
                                        DataBeat(data=data, last=i == last_on)))


def test_clean_trace_has_no_violations():
    trace = _trace()
    _read_burst_samples(trace, 0, 0x100, 4)
    _read_burst_samples(trace, 10, 0x200, 1)
    assert check_trace([trace]) == []


def test_valid_retraction_flagged():
    trace = _trace()
    trace.record("AR", ChannelSample(0, True, False, ab(0x100, 1)))
    # gap at cycle 1: valid dropped before the handshake
    trace.record("AR", ChannelSample(2, True, True, ab(0x100, 1)))
    violations = check_trace([trace])
    assert [v.rule for v in violations] == ["VS"]
    assert violations[0].cycle == 1
    assert violations[0].channel == "AR"


def test_payload_change_while_stalled_flagged():
    trace = _trace()
    beat = DataBeat(data=b"\x01" * 16, last=True)
    changed = DataBeat(data=b"\x02" * 16, last=True)
    trace.record("AR", ChannelSample(0, True, True, ab(0x0, 1)))
    trace.record("R", ChannelSample(2, True, False, beat))
    trace.record("R", ChannelSample(3, True, True, changed))
    violations = check_trace([trace])
    assert [v.rule for v in violations] == ["VS"]
    assert "payload changed" in violations[0].description


def test_stalled_then_stable_is_clean():
    trace = _trace()
    beat = DataBeat(data=b"\x07" * 16, last=True)
    trace.record("AR", ChannelSample(0, True, True, ab(0x0, 1)))
    trace.record("R", ChannelSample(2, True, False, beat))
    trace.record("R", ChannelSample(3, True, False, beat))
    trace.record("R", ChannelSample(4, True, True, beat))
    assert check_trace([trace]) == []


def test_short_burst_with_early_last_flags_cnt_and_last():
    # declares 4 beats, delivers 3 with LAST on beat 3
    trace = _trace()
    _read_burst_samples(trace, 0, 0x100, 4, deliver=3, last_on=2)
    rules = sorted(v.rule for v in check_trace([trace]))
    assert rules == ["CNT", "LAST"]


def test_missing_last_on_final_beat():
    trace = _trace()
    _read_burst_samples(trace, 0, 0x100, 2, last_on=5)  # never asserts LAST
    rules = [v.rule for v in check_trace([trace])]
    assert "LAST" in rules


def test_data_beat_without_address():
    trace = _trace()
    trace.record("R", ChannelSample(0, True, True, DataBeat(b"\x00" * 16, True)))
    rules = [v.rule for v in check_trace([trace])]
    assert rules == ["CNT"]


def test_write_response_pairing():
    trace = _trace()
    trace.record("AW", ChannelSample(0, True, True, ab(0x40, 1)))
    trace.record("W", ChannelSample(1, True, True,
                                    DataBeat(b"\x00" * 16, True, strb=0xFFFF)))
    trace.record("B", ChannelSample(2, True, True, RespBeat(0)))
    assert check_trace([trace]) == []
    # a second response with no pending burst violates B1
    trace.record("B", ChannelSample(3, True, True, RespBeat(0)))
    assert [v.rule for v in check_trace([trace])] == ["B1"]


def test_4k_crossing_burst_flagged_at_issue():
    trace = _trace()
    trace.record("AR", ChannelSample(0, True, True, ab(0x0FF0, 2)))
    trace.record("R", ChannelSample(2, True, True,
                                    DataBeat(b"\x00" * 16, False)))
    trace.record("R", ChannelSample(3, True, True,
                                    DataBeat(b"\x00" * 16, True)))
    assert [v.rule for v in check_trace([trace])] == ["4KB"]


def test_check_trace_is_pure():
    trace = _trace()
    _read_burst_samples(trace, 0, 0x100, 4, deliver=3, last_on=2)
    first = check_trace([trace])
    second = check_trace([trace])
    assert first == second


def test_beat_conservation_on_clean_trace():
    trace = _trace()
    bursts = [(0, 0x000, 3), (20, 0x100, 1), (40, 0x200, 7)]
    for start, addr, beats in bursts:
        _read_burst_samples(trace, start, addr, beats)
    assert check_trace([trace]) == []
    declared = sum(beats for _, _, beats in bursts)
    fired_data = sum(1 for s in trace.samples["R"] if s.ready)
    assert fired_data == declared
