import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from liveprof.server import (
    ALPHABETICAL,
    RECENCY,
    OrderingPolicy,
    SyncEngine,
    create_app,
    order_names,
)
from liveprof.session import SessionState


APTS = "price,county\n100,Alameda\n-5,---\n250,Alameda\n"


@pytest.fixture
def engine(tmp_csv, tmp_path):
    session = SessionState(base_dir=str(tmp_path))
    tmp_csv(APTS, "apts.csv")
    tmp_csv("a\n1\n2\n", "small.csv")
    return SyncEngine(session)


def exec_msg(engine, source, client="c1", mid="m1"):
    return engine.handle(client, {"type": "exec", "id": mid, "source": source})


class TestOrdering:
    def test_pin_dominates_recency(self):
        names = order_names([("a", 3), ("b", 5)], OrderingPolicy(RECENCY, {"a"}))
        assert names == ["a", "b"]

    def test_recency_newest_first(self):
        names = order_names([("x", 5), ("y", 3)], OrderingPolicy(RECENCY, set()))
        assert names == ["x", "y"]

    def test_alphabetical_with_pins(self):
        names = order_names(
            [("b", 1), ("z", 2), ("a", 3)], OrderingPolicy(ALPHABETICAL, {"z"})
        )
        assert names == ["z", "a", "b"]

    def test_recency_tie_breaks_by_name(self):
        names = order_names([("b", 4), ("a", 4)], OrderingPolicy(RECENCY, set()))
        assert names == ["a", "b"]

    @given(
        st.dictionaries(
            st.sampled_from("abcdefgh"), st.integers(0, 5), min_size=1, max_size=8
        ),
        st.sets(st.sampled_from("abcdefgh")),
        st.sampled_from([RECENCY, ALPHABETICAL]),
    )
    @settings(max_examples=200)
    def test_total_stable_order_property(self, epochs, pins, mode):
        items = sorted(epochs.items())
        policy = OrderingPolicy(mode, pins)
        out = order_names(items, policy)
        assert sorted(out) == sorted(epochs)  # total
        assert out == order_names(list(reversed(items)), policy)  # input-order free
        cut = len([n for n in out if n in pins])
        assert all(n in pins for n in out[:cut])
        assert all(n not in pins for n in out[cut:])
        for group in (out[:cut], out[cut:]):
            for x, y in zip(group, group[1:]):
                if mode == ALPHABETICAL:
                    assert x < y
                else:
                    assert (-epochs[x], x) < (-epochs[y], y)


class TestExecFlow:
    def test_exec_reply_and_broadcast(self, engine):
        engine.handle("sub", {"type": "subscribe", "id": "s"})
        replies, broadcasts = exec_msg(engine, 'load "apts.csv" as df')
        assert replies[0] == {"type": "exec_result", "id": "m1", "ok": True}
        profs = [b for b in broadcasts if b["type"] == "profiles"]
        assert len(profs) == 1
        assert [p["table_name"] for p in profs[0]["profiles"]] == ["df"]

    def test_error_forwarded_connection_survives(self, engine):
        replies, _ = exec_msg(engine, "x = filter nosuch where a > 0")
        assert replies[0]["ok"] is False
        assert replies[0]["error"]["kind"] == "NameError"
        replies, _ = exec_msg(engine, 'load "apts.csv" as df', mid="m2")
        assert replies[0]["ok"]

    def test_request_id_echoed(self, engine):
        replies, _ = exec_msg(engine, 'load "apts.csv" as df', mid="req-42")
        assert replies[0]["id"] == "req-42"

    def test_temp_profile_lifecycle(self, engine):
        engine.handle("sub", {"type": "subscribe", "id": "s"})
        exec_msg(engine, 'load "apts.csv" as df')
        _, b1 = exec_msg(engine, "df", mid="m2")
        temp_name = f"Output of statement {engine.session.epoch}"
        profs = [b for b in b1 if b["type"] == "profiles"][0]["profiles"]
        temp = [p for p in profs if p["table_name"] == temp_name]
        assert temp and temp[0]["temporary"] is True
        _, b2 = exec_msg(engine, "df2 = head df 1", mid="m3")
        removed = [b for b in b2 if b["type"] == "removed"][0]
        assert removed["names"] == [temp_name]

    def test_epochs_strictly_increase(self, engine):
        engine.handle("sub", {"type": "subscribe", "id": "s"})
        seen = []
        for i in range(4):
            _, bs = exec_msg(engine, 'load "apts.csv" as df', mid=f"m{i}")
            seen += [b["epoch"] for b in bs if b["type"] == "profiles"]
        assert seen == sorted(seen) and len(set(seen)) == len(seen)


class TestLaziness:
    def test_zero_subscribers_zero_profiling(self, engine):
        for i in range(100):
            exec_msg(engine, 'load "apts.csv" as df', mid=f"m{i}")
        assert engine.profile_calls == 0

    def test_one_computation_per_changed_table(self, engine):
        engine.handle("sub", {"type": "subscribe", "id": "s"})
        exec_msg(engine, 'load "apts.csv" as df')
        n0 = engine.profile_calls
        assert n0 == 1
        exec_msg(engine, 'load "small.csv" as small', mid="m2")
        assert engine.profile_calls == n0 + 1  # df unchanged: cache hit
        exec_msg(engine, "x = head df 1", mid="m3")
        assert engine.profile_calls == n0 + 2

    def test_unchanged_rebind_costs_nothing(self, engine):
        engine.handle("sub", {"type": "subscribe", "id": "s"})
        exec_msg(engine, 'load "apts.csv" as df')
        exec_msg(engine, "x = head df 2", mid="m2")
        n = engine.profile_calls
        exec_msg(engine, "x = head df 2", mid="m3")
        assert engine.profile_calls == n

    def test_subscribe_after_dirty_period(self, engine):
        exec_msg(engine, 'load "apts.csv" as df')
        exec_msg(engine, "x = filter df where price > 0", mid="m2")
        assert engine.profile_calls == 0
        replies, _ = engine.handle("sub", {"type": "subscribe", "id": "s"})
        profs = replies[0]["profiles"]
        assert {p["table_name"] for p in profs} == {"df", "x"}
        assert engine.profile_calls == 2
        # snapshot reflects latest fingerprints: forced recomputation agrees
        fresh = SyncEngine(engine.session).snapshot_payload()["profiles"]
        assert profs == fresh


class TestSubscribe:
    def test_snapshot_recency_order(self, engine):
        exec_msg(engine, 'load "apts.csv" as a')
        exec_msg(engine, 'load "apts.csv" as b', mid="m2")
        exec_msg(engine, 'load "apts.csv" as c', mid="m3")
        replies, _ = engine.handle("sub", {"type": "subscribe", "id": "s"})
        assert [p["table_name"] for p in replies[0]["profiles"]] == ["c", "b", "a"]

    def test_empty_session_snapshot(self, engine):
        replies, _ = engine.handle("sub", {"type": "subscribe", "id": "s"})
        assert replies[0]["profiles"] == []

    def test_unsubscribe_stops_profiling(self, engine):
        engine.handle("sub", {"type": "subscribe", "id": "s"})
        exec_msg(engine, 'load "apts.csv" as df')
        n = engine.profile_calls
        engine.handle("sub", {"type": "unsubscribe", "id": "u"})
        exec_msg(engine, "x = head df 1", mid="m2")
        assert engine.profile_calls == n


class TestPinSortReset:
    def test_pin_reorders(self, engine):
        engine.handle("sub", {"type": "subscribe", "id": "s"})
        exec_msg(engine, 'load "apts.csv" as a')
        exec_msg(engine, 'load "apts.csv" as b', mid="m2")
        _, bs = engine.handle("c1", {"type": "pin", "id": "p", "table": "a", "pinned": True})
        profs = [b for b in bs if b["type"] == "profiles"][0]["profiles"]
        assert [p["table_name"] for p in profs] == ["a", "b"]

    def test_sort_mode_switch(self, engine):
        engine.handle("sub", {"type": "subscribe", "id": "s"})
        exec_msg(engine, 'load "apts.csv" as z')
        exec_msg(engine, 'load "apts.csv" as a', mid="m2")
        _, bs = engine.handle("c1", {"type": "sort", "id": "o", "mode": ALPHABETICAL})
        profs = [b for b in bs if b["type"] == "profiles"][0]["profiles"]
        assert [p["table_name"] for p in profs] == ["a", "z"]

    def test_reset_broadcasts_removed_then_empty(self, engine):
        engine.handle("sub", {"type": "subscribe", "id": "s"})
        exec_msg(engine, 'load "apts.csv" as df')
        exec_msg(engine, "df", mid="m2")
        temp = f"Output of statement {engine.session.epoch}"
        replies, bs = engine.handle("c1", {"type": "reset", "id": "r"})
        assert replies[0]["ok"]
        removed = [b for b in bs if b["type"] == "removed"][0]
        assert set(removed["names"]) == {"df", temp}
        profiles = [b for b in bs if b["type"] == "profiles"][0]
        assert profiles["profiles"] == []

    def test_snapshot_empty_after_reset(self, engine):
        exec_msg(engine, 'load "apts.csv" as df')
        engine.handle("c1", {"type": "reset", "id": "r"})
        assert engine.snapshot_payload()["profiles"] == []


class TestExportMessage:
    def test_snippet_reply(self, engine):
        exec_msg(engine, 'load "apts.csv" as df')
        replies, _ = engine.handle(
            "c1",
            {
                "type": "export",
                "id": "e1",
                "request": {
                    "kind": "cat_value",
                    "table": "df",
                    "column": "county",
                    "params": {"value": "---"},
                },
            },
        )
        assert replies[0]["type"] == "snippet"
        assert replies[0]["text"] == 'df_sel = filter df where county == "---"'

    def test_export_error_reply(self, engine):
        replies, _ = engine.handle(
            "c1",
            {"type": "export", "id": "e2", "request": {"kind": "cat_value", "table": "nope", "column": "x"}},
        )
        assert replies[0]["type"] == "error"
        assert replies[0]["kind"] == "UnknownTable"

    def test_unknown_message_type(self, engine):
        replies, _ = engine.handle("c1", {"type": "frobnicate", "id": "z"})
        assert replies[0]["type"] == "error"


class TestWebSocketTransport:
    def test_ws_and_snapshot_roundtrip(self, engine):
        from fastapi.testclient import TestClient

        app = create_app(engine)
        client = TestClient(app)
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps({"type": "subscribe", "id": "s1"}))
            snap = json.loads(ws.receive_text())
            assert snap["type"] == "profiles" and snap["profiles"] == []
            ws.send_text(json.dumps({"type": "exec", "id": "x1", "source": 'load "apts.csv" as df'}))
            reply = json.loads(ws.receive_text())
            assert reply["type"] == "exec_result" and reply["ok"]
            push = json.loads(ws.receive_text())
            assert push["type"] == "profiles"
            assert [p["table_name"] for p in push["profiles"]] == ["df"]
        http_snap = client.get("/snapshot")
        assert http_snap.status_code == 200
        assert [p["table_name"] for p in http_snap.json()["profiles"]] == ["df"]

    def test_ws_invalid_json(self, engine):
        from fastapi.testclient import TestClient

        client = TestClient(create_app(engine))
        with client.websocket_connect("/ws") as ws:
            ws.send_text("not json{")
            err = json.loads(ws.receive_text())
            assert err["type"] == "error"
