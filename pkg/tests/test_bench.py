import csv
import io

import pytest

from netcomplete.bench import (
    CSV_COLUMNS,
    DegradationConfig,
    degrade,
    degraded_corpus,
    make_rng,
    run_experiment,
    synthetic_network,
)
from netcomplete.completion import SearchOptions
from netcomplete.errors import CannotDeactivate
from netcomplete.factio import emit_facts
from netcomplete.linear import stoichiometrically_activated
from netcomplete.model import MetabolicNetwork, Reaction, extend
from netcomplete.verify import flux_witness, topologically_ok


@pytest.fixture
def intact(toy):
    return extend(toy, ["r6", "r7", "r9"])


def test_degrade_toy(toy, intact):
    instance = degrade(intact, {"r5"}, DegradationConfig(0.5, rng_seed=3))
    assert not stoichiometrically_activated(instance.draft, {"r5"})[0]
    assert len(instance.reference_only) >= 6
    # boundary reactions and the target stay
    assert {"r_s1", "r_s2", "r5"} <= set(instance.draft.reactions)
    # restoring everything repairs it
    assert flux_witness(extend(instance, instance.reference_only), {"r5"}) is not None


def test_degrade_is_deterministic(intact):
    cfg = DegradationConfig(0.2, rng_seed=99)
    assert emit_facts(degrade(intact, {"r5"}, cfg)) == emit_facts(degrade(intact, {"r5"}, cfg))


def test_tiny_fraction_still_removes_one(toy):
    # the toy draft is already inactive
    instance = degrade(toy.draft, {"r5"}, DegradationConfig(0.001, rng_seed=1))
    assert len(instance.reference_only) == 1


def test_cannot_deactivate():
    net = MetabolicNetwork.from_reactions([Reaction("src", {}, {"A": 1}), Reaction("t", {"A": 1}, {})])
    with pytest.raises(CannotDeactivate):
        degrade(net, {"t"}, DegradationConfig(0.5))


def test_config_validation():
    for bad in (dict(fraction=0), dict(fraction=1), dict(rng_seed=-1), dict(instances=0)):
        with pytest.raises(ValueError):
            DegradationConfig(**bad)


def test_synthetic_targets_are_active():
    for seed in range(3):
        synth = synthetic_network(make_rng(seed), 80)
        assert topologically_ok(synth.network, synth.seeds, synth.targets)
        assert flux_witness(synth.network, synth.targets) is not None


def test_corpus_is_reproducible():
    first = [(name, emit_facts(i)) for name, i in degraded_corpus(3, rng_seed=5)]
    second = [(name, emit_facts(i)) for name, i in degraded_corpus(3, rng_seed=5)]
    assert first == second and len(first) == 3


def test_toy_table(toy):
    table = run_experiment([("toy", toy)], ["topo", "strict", "relaxed", "hybrid"])
    assert [r["optimum_size"] for r in table.rows] == [2, 2, 1, 3]
    assert all(r["verified"] == 100.0 for r in table.rows)
    rows = list(csv.DictReader(io.StringIO(table.to_csv())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert "hybrid" in table.format_table()


def test_empty_table():
    table = run_experiment([], ["hybrid"])
    assert table.rows == [] and table.summary() == []
    assert table.to_csv().strip() == ",".join(CSV_COLUMNS)


def test_failures_become_rows(toy, monkeypatch):
    import netcomplete.bench as bench

    def boom(*args, **kwargs):
        raise RuntimeError("solver exploded")

    monkeypatch.setattr(bench, "enumerate_minimal", boom)
    table = run_experiment([("toy", toy)], ["hybrid"])
    assert table.rows[0]["status"].startswith("Error")


def test_worker_pool_matches_serial(toy, balanced):
    corpus = [("toy", toy), ("balanced", balanced)]
    opts = SearchOptions()
    strip = lambda rows: [{k: v for k, v in r.items() if k != "elapsed_ms"} for r in rows]
    serial = run_experiment(corpus, ["topo", "hybrid"], opts, workers=1)
    pooled = run_experiment(corpus, ["topo", "hybrid"], opts, workers=2)
    assert strip(serial.rows) == strip(pooled.rows)
