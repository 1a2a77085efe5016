import io
import json

import pytest

from srds.errors import EngineError
from srds.net import Engine


def test_unicast_and_multicast_accounting():
    e = Engine(4)
    inbox = e.run_round(lambda eng: [(0, 1, b"ab"), (2, (0, 1, 3), b"xyz")], label="r")
    m = e.metrics
    assert m.bits_sent == [16, 0, 72, 0]
    assert m.bits_processed == [24, 40, 0, 24]
    assert [x.sender for x in inbox[1]] == [0, 2]
    assert m.peers[2] == {0, 1, 3} and m.peers[1] == {0, 2}
    assert m.per_round["1:r"]["envelopes"] == 4


def test_filter_splits_processed_and_filtered():
    e = Engine(3)
    e.run_round(lambda eng: [(0, (1, 2), b"a" * 4), (1, 2, b"b")],
                filters=lambda env: {1} if env.sender == 0 else False)
    m = e.metrics
    assert m.bits_processed == [0, 32, 0]
    assert m.bits_filtered == [0, 0, 32 + 8]
    assert m.bits_received == [0, 32, 40]


def test_rushing_adversary_sees_messages_to_corrupt():
    e = Engine(3, corrupt={2})
    seen = []

    def adv(rush):
        seen.extend((x.sender, x.payload) for x in rush)
        return [(2, 0, b"reply")]

    inbox = e.run_round(lambda eng: [(0, (1, 2), b"hi"), (1, 0, b"no")], adv)
    assert seen == [(0, b"hi")]
    assert [x.payload for x in inbox[0]] == [b"no", b"reply"]


def test_engine_rejects_bad_senders():
    e = Engine(3, corrupt={2})
    with pytest.raises(EngineError):
        e.run_round(lambda eng: [(2, 0, b"x")])
    with pytest.raises(EngineError):
        e.run_round(lambda eng: [], lambda rush: [(0, 1, b"x")])
    with pytest.raises(EngineError):
        e.run_round(lambda eng: [(0, 7, b"x")])


def test_charge_and_oracle_round():
    e = Engine(4)
    e.oracle_round("ideal")
    e.charge(0, [0, 1, 2], 10, "ideal")
    assert e.round == 1
    assert e.metrics.bits_sent[0] == 160
    assert e.metrics.bits_processed == [0, 80, 80, 0]
    s = e.metrics.summary(honest=[0, 1, 2, 3])
    assert s["max_honest_bits_sent"] == 160 and s["max_honest_peers"] == 2


def test_transcript_dump():
    e = Engine(2, record=True)
    e.run_round(lambda eng: [(0, 1, b"abc")], label="x")
    buf = io.StringIO()
    e.dump_jsonl(buf)
    rows = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert rows == [{"bytes": 3, "from": 0, "round": 1, "sha256": rows[0]["sha256"], "tag": "x", "to": 1}]
