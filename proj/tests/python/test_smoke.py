import json

import lazyverify as lv


def test_laws_pass():
    rep = json.loads(lv.laws_json(seed=1))
    assert rep["all_pass"] is True
    assert len(rep["laws"]) == 8
    assert all(law["status"] == "Holds" for law in rep["laws"])


def test_lazy_set_semantics():
    s = lv.LazySet()
    assert s.add(5) is True
    assert s.add(5) is False
    assert s.contains(5) is True
    assert s.remove(5) is True
    assert s.contains(5) is False
    assert s.add(3) and s.add(7) and s.add(5)
    assert s.snapshot() == [3, 5, 7]
    assert s.sorted() is True


def test_contains_refinement_holds():
    v = json.loads(lv.check_refinement_json("contains"))
    assert v["status"] == "Holds"
    assert v["cases"] > 0


def test_mutant_is_refuted():
    v = json.loads(lv.check_refinement_json("add", mutant="swap-link"))
    assert v["status"] == "Counterexample"
    assert "witness" in v


def test_stress_and_history_roundtrip():
    r = json.loads(lv.stress_json(threads=4, ops=500, keys=8, seed=7))
    assert r["sorted_ok"] is True
    assert r["unmarked_unlinks"] == 0
    assert r["linearisable"] is True
    back = json.loads(lv.check_lin_json(r["history_jsonl"]))
    assert back["linearisable"] is True


def test_runtime_fault_detected():
    found = False
    for seed in range(1, 21):
        r = json.loads(
            lv.stress_json(threads=4, ops=1500, keys=4, seed=seed, mutant="no-validate", phases=6)
        )
        if not r["linearisable"] or not r["sorted_ok"] or r["unmarked_unlinks"] > 0:
            found = True
            break
    assert found
