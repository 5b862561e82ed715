from extagents.config import RunConfig
from extagents.latency import bench_latency, format_table

GRID = [8192 * 2 ** i for i in range(6)]  # 8k .. 256k


def test_rounds_by_method():
    rows = bench_latency(RunConfig(chunk_size=16 * 1024), ["extagents", "direct", "chain_of_agents"], GRID)
    by = {(r.method, r.input_length): r for r in rows}
    assert {by["extagents", g].critical_path_rounds for g in GRID} == {3}
    assert {by["direct", g].critical_path_rounds for g in GRID} == {1}
    for g in GRID:
        assert by["chain_of_agents", g].critical_path_rounds == by["chain_of_agents", g].n_chunks + 1
    chain = [by["chain_of_agents", g].modeled_latency for g in GRID]
    assert chain == sorted(chain)
    assert "chain_of_agents" in format_table(rows)
