import pytest

from sdrls import algorithms
from sdrls.algorithms import AlgorithmConfig, Variant, run_trial
from sdrls.core import derive
from sdrls.graphs import erdos_renyi, random_spanning_tree, tg_graph
from sdrls.core import RandomSource
from sdrls.problems import FunctionProblem, Jump, MSTProblem, NeedGlobalMut, OneMax

needs_kernel = pytest.mark.skipif(not algorithms.KERNEL_AVAILABLE, reason="compiled kernel not built")

CONFIGS = [
    AlgorithmConfig(Variant.RLS_STATIC),
    AlgorithmConfig(Variant.RLS_STATIC, s=3),
    AlgorithmConfig(Variant.SD_RLS),
    AlgorithmConfig(Variant.SD_RLS_STAR),
    AlgorithmConfig(Variant.EA_ONE_ONE),
    AlgorithmConfig(Variant.EA_ONE_ONE, rate=0.3),
    AlgorithmConfig(Variant.FEA_BETA, beta=1.5),
    AlgorithmConfig(Variant.SD_EA),
    AlgorithmConfig(Variant.RLS_12),
]

PROBLEMS = [
    OneMax(40),
    Jump(24, 3),
    NeedGlobalMut(24),
    MSTProblem(tg_graph(12)),
    MSTProblem(erdos_renyi(10, RandomSource(4))),
]


@needs_kernel
@pytest.mark.parametrize("config", CONFIGS, ids=lambda c: f"{c.name}-{c.rate}")
@pytest.mark.parametrize("problem", PROBLEMS, ids=repr)
def test_kernel_matches_python(config, problem):
    for i in range(3):
        seed = derive(2024, i)
        kw = dict(trace=True, keep_point=True)
        a = run_trial(config, problem, 30_000, seed, engine="python", **kw)
        b = run_trial(config, problem, 30_000, seed, engine="kernel", **kw)
        assert a == b


@needs_kernel
def test_kernel_matches_python_with_tree_init():
    p = MSTProblem(erdos_renyi(12, RandomSource(1)))
    init = lambda rng: random_spanning_tree(p.graph, rng)  # noqa: E731
    for config in CONFIGS:
        a = run_trial(config, p, 20_000, 5, init=init, engine="python")
        b = run_trial(config, p, 20_000, 5, init=init, engine="kernel")
        assert a == b


@needs_kernel
def test_kernel_budget_edges():
    for budget in (1, 2, 3, 17):
        for config in CONFIGS:
            a = run_trial(config, Jump(30, 5), budget, 3, engine="python", trace=True)
            b = run_trial(config, Jump(30, 5), budget, 3, engine="kernel", trace=True)
            assert a == b and a.evaluations == budget


def test_fallback_when_kernel_missing(monkeypatch):
    ref = run_trial(CONFIGS[3], Jump(20, 2), 10 ** 5, 8, engine="python")
    monkeypatch.setattr(algorithms, "KERNEL_AVAILABLE", False)
    assert run_trial(CONFIGS[3], Jump(20, 2), 10 ** 5, 8) == ref
    with pytest.raises(RuntimeError):
        run_trial(CONFIGS[3], Jump(20, 2), 10 ** 5, 8, engine="kernel")


def test_function_problems_use_python():
    p = FunctionProblem(6, lambda x: sum(x), optimum_value=6)
    res = run_trial(CONFIGS[2], p, 10 ** 4, 1)
    assert res.success
    if algorithms.KERNEL_AVAILABLE:
        with pytest.raises(ValueError):
            run_trial(CONFIGS[2], p, 10 ** 4, 1, engine="kernel")


def test_unknown_engine():
    with pytest.raises(ValueError):
        run_trial(CONFIGS[0], OneMax(5), 10, 1, engine="gpu")
