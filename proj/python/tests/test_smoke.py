#!/usr/bin/env python3
"""Smoke tests for the _rvspoof extension module."""
import os
import sys

import _rvspoof as rv

DATA = os.environ.get("RVSPOOF_DATA", os.path.join(os.path.dirname(__file__), "..", "..", "data"))


def test_flows():
    lines = rv.enumerate_flows(["all"])
    assert len(lines) == 44, len(lines)
    assert lines[0] == "AF1 MMWRadar A1-E-F pattern=FP1 path=AtkPath4 rounds=1", lines[0]
    assert sum(1 for line in lines if "rounds=2" in line) == 12
    ultrasonic = rv.enumerate_flows(["Ultrasonic"])
    assert len(ultrasonic) == 2, ultrasonic


def test_coverage():
    report = rv.coverage(os.path.join(DATA, "catalog_reference.txt"))
    assert report["total"] == 103
    assert report["known"] == 26
    assert report["unexplored"] == 77
    assert report["classes"]["C3"] == 36
    assert report["patterns"]["FP14"]["known"] == 3


def test_simulation():
    scenario = os.path.join(DATA, "scenarios", "atkpath4_phantom_brake.scn")
    spoofs = os.path.join(DATA, "spoofs", "atkpath4_phantom_brake.spf")
    clean = rv.simulate(scenario, seed=1)
    assert clean["outcome"] == "none", clean
    assert clean["path"] is None
    attacked = rv.simulate(scenario, spoofs, seed=1)
    assert attacked["outcome"] == "emergency_stop", attacked
    assert attacked["path"] == "AtkPath4"
    again = rv.simulate(scenario, spoofs, seed=1)
    assert attacked["trace_hash"] == again["trace_hash"]


def test_optimizer():
    scene = os.path.join(DATA, "scenes", "placement_reference.txt")
    result = rv.optimize_placement(scene, seed=1, iterations=10)
    history = result["history"]
    assert len(history) == 10
    assert all(b >= a for a, b in zip(history, history[1:]))
    assert result["best_loss"] > 0


def test_loop_closure():
    fixture = os.path.join(DATA, "fixtures", "loopclosure_reference.txt")
    result = rv.loop_closure_attack(fixture, budget=40)
    assert result["before"] == "none"
    assert result["after"] == "closure"
    assert result["injected"] == 28
    assert result["pairs"] >= 34
    assert result["groups"] >= 3


def test_cli_roundtrip():
    code, out, err = rv.cli(["flows", "--sensors", "ultrasonic"])
    assert code == 0, err
    assert out.count("\n") == 2


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} python smoke tests passed")


if __name__ == "__main__":
    sys.exit(main())
