import pytest

from distproof.distinct import ChainState, ah
from distproof.pipeline import HOOKS, ConfigError, RunConfig, run_epoch


def failed_flags(report):
    return [sorted(k for k, v in b["accept"].items() if not v) for b in report.accept_flags]


def test_single_block_single_worker():
    r = run_epoch(RunConfig(validators=8, blocks=1, workers=1))
    assert r.all_accepted
    assert r.traffic["w2w"] == 0


def test_chaining_over_epoch():
    r = run_epoch(RunConfig(validators=32, blocks=32, workers=4, clusters=2, seed=3))
    assert r.all_accepted
    assert r.final_h_cur == ChainState(ah(range(1024)).value).to_hex()


def test_block_order_does_not_change_final_hash():
    # each seed shuffles the same index set into blocks differently
    reports = [run_epoch(RunConfig(validators=8, blocks=6, workers=2, seed=s)) for s in (1, 2, 3)]
    assert all(r.all_accepted for r in reports)
    assert len({r.final_h_cur for r in reports}) == 1


@pytest.mark.parametrize("hook,flag", [("dup-index", "distinct"), ("flip-sibling", "membership"),
                                       ("perturb-round-poly", "sumcheck"), ("mempool-overwrite", "pcs")])
def test_hooks_hit_only_their_target(hook, flag):
    r = run_epoch(RunConfig(validators=16, blocks=4, workers=4, clusters=2, tamper=(f"{hook}@2",)))
    assert failed_flags(r) == [[], [], [flag], []]
    assert r.traffic["w2w"] == 0


def test_dup_index_in_block_five():
    r = run_epoch(RunConfig(validators=8, blocks=8, workers=2, tamper=("dup-index@5",)))
    assert [all(b["accept"].values()) for b in r.accept_flags] == [i != 5 for i in range(8)]


def test_rejected_block_does_not_advance_chain():
    honest = run_epoch(RunConfig(validators=8, blocks=3, workers=2))
    bad = run_epoch(RunConfig(validators=8, blocks=3, workers=2, tamper=("flip-sibling@2",)))
    assert honest.final_h_cur != bad.final_h_cur
    assert bad.accept_flags[2]["accept"]["membership"] is False


def test_unknown_hook():
    with pytest.raises(ConfigError):
        run_epoch(RunConfig(tamper=("bogus",)))


@pytest.mark.parametrize("kw", [dict(validators=0), dict(blocks=0), dict(workers=3), dict(workers=4, clusters=3),
                                dict(field="nope"), dict(validators=8, blocks=4, depth=4)])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw).validate()


def test_report_is_deterministic(tmp_path):
    a = run_epoch(RunConfig(validators=8, blocks=2, workers=4, seed=5, report=str(tmp_path / "a.json")))
    b = run_epoch(RunConfig(validators=8, blocks=2, workers=4, seed=5, report=str(tmp_path / "b.json")))
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert a.to_json() == b.to_json()


def test_report_fields():
    r = run_epoch(RunConfig(validators=8, blocks=2, workers=4, clusters=2, timings=True))
    import json
    d = json.loads(r.to_json())
    assert set(d) == {"accept_flags", "final_h_cur", "traffic", "proof_sizes", "timings"}
    assert set(d["traffic"]) == {"w2w", "w2m", "m2w", "mempool", "phases"}
    assert "2" in d["proof_sizes"] and d["timings"]["total"] > 0


def test_state_file_carries_across_epochs(tmp_path):
    state = tmp_path / "h"
    cfg = dict(validators=8, blocks=2, workers=2, state_file=str(state))
    first = run_epoch(RunConfig(**cfg))
    second = run_epoch(RunConfig(**cfg))
    assert first.all_accepted and second.all_accepted
    h = ah(range(16)).value
    assert ChainState.load(state).h == (2 * h) % ChainState.load(state).field.modulus


def test_other_fields():
    assert run_epoch(RunConfig(field="goldilocks", validators=8, blocks=2, workers=2)).all_accepted
