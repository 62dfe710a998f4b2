import json
from fractions import Fraction

from zkpauth import harness
from zkpauth.curve import P192, TINY17
from zkpauth.protocols import ZKP1, ZKP2


def test_soundness_zkp1_exact():
    r = harness.audit_soundness(TINY17, ZKP1, secrets=[2, 7])
    assert r.verdict and r.measured == Fraction(1, 19)


def test_soundness_binary_challenge():
    # the classic single-bit challenge: a cheater wins half the time
    r = harness.audit_soundness(TINY17, ZKP1, challenge_space=(0, 1), secrets=[5])
    assert r.verdict and r.measured == Fraction(1, 2)


def test_soundness_zkp2_toy_bound():
    r = harness.audit_soundness(TINY17, ZKP2, secrets=[3])
    assert r.verdict
    assert r.measured == r.expected == r.details["toy_hash_bound"]
    assert r.measured >= Fraction(1, 19)


def test_zero_knowledge_subset():
    r = harness.audit_zero_knowledge(TINY17, secrets=[1, 2, 18])
    assert r.verdict and r.measured == 0
    assert r.details == {"witness_uniform": True, "simulated_all_verify": True}


def test_forward_secrecy_one_pair():
    r = harness.audit_forward_secrecy(TINY17, identity_pairs=((2, 3),))
    assert r.verdict
    assert r.measured == r.expected
    # a*w_B is a*x_B*G; it meets x_A*x_B*G only when x_A == a
    assert r.measured["2,3:a*w_B"] == 18
    assert r.details["2,3"]["distinct_keys"] == 18


def test_completeness_p192_small():
    r = harness.audit_completeness(P192, runs=5, seed=1)
    assert r.verdict and r.details["count_mismatch_total"] == 0
    assert r.params["runs"] == {"ZKP1": 5, "ZKP2": 5, "ZKP3": 5}


def test_key_agreement_p192_small():
    r = harness.audit_key_agreement(P192, runs=10, seed=2)
    assert r.verdict


def test_wire_fuzz_small():
    r = harness.audit_wire_fuzz(P192, mutations=300, seed=3)
    assert r.verdict
    assert sum(r.measured.values()) == 300
    assert "accepted" not in r.measured and "crash" not in r.measured


def test_check_counts_reports_mismatch():
    from zkpauth.protocols import Identity, run_zkp1
    p, v = run_zkp1(Identity.from_secret(TINY17, 2))
    assert harness.check_counts(p) == [] and harness.check_counts(v) == []
    v.cost.mu_count += 1
    assert harness.check_counts(v) == ["ZKP1 verifier mu_count: 2 != 1"]


def test_bench_p192():
    res = harness.bench_table4(P192, n=3, repetitions=1, seed=4)
    assert res["verdict"] and res["counts_match"] and res["bandwidth_order_ok"]
    assert res["memory_slope_bits"] == 192 + 392
    json.dumps(res)


def test_records_are_json(capsys):
    r = harness.audit_soundness(TINY17, ZKP1, secrets=[2])
    rec = json.loads(r.to_json())
    assert rec["measured"] == "1/19" and rec["verdict"] == "pass"
    table = harness.summary_table([r])
    assert "soundness-ZKP1" in table.splitlines()[1]
