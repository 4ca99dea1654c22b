import json

import numpy as np
import pytest
from oracles import premise_pairs

from icseg.bifunctions import check_lipschitz_type
from icseg.problems import (VOLTERRA_CASES, VolterraOperator, gen_nash_cournot, gen_skew,
                            gen_strongly_pseudomonotone, gen_volterra, generate,
                            instance_from_dict, instance_to_dict, load_instance, save_instance,
                            skew_matrix, volterra_seeds)


def test_nash_cournot_seed_examples():
    inst = gen_nash_cournot(3, rng_seed=0)
    y0, y_m1, w_m1, w_m2 = inst.seeds
    np.testing.assert_allclose(y_m1, [1 / 11, 2 / 21, 3 / 31], rtol=1e-15)
    np.testing.assert_allclose(w_m2, [3, 7 / 5, 8 / 10], rtol=1e-15)
    np.testing.assert_array_equal(y0, y_m1)
    np.testing.assert_array_equal(w_m1, w_m2)


@pytest.mark.parametrize("m", [50, 100, 200, 300])
def test_nash_cournot_seed_formulas(m):
    _, y_m1, _, w_m2 = gen_nash_cournot(m, rng_seed=0).seeds
    for i in range(1, m + 1):
        assert y_m1[i - 1] == i / (10 * i + 1)
        assert w_m2[i - 1] == (i + 5) / (i * i + 1)


def test_nash_cournot_monotone_part_is_psd():
    f = gen_nash_cournot(10, rng_seed=5).f
    assert np.linalg.eigvalsh(f.P - f.Q).min() >= -1e-8
    assert np.linalg.eigvalsh(f.Q).min() >= -1e-8
    assert f.r.min() >= -1 and f.r.max() <= 1


def test_skew_matrix_m4():
    A = skew_matrix(4).toarray()
    want = np.zeros((4, 4))
    want[0, 3], want[1, 2], want[2, 1], want[3, 0] = -1, -1, 1, 1
    np.testing.assert_array_equal(A, want)


@pytest.mark.parametrize("m", range(2, 11))
def test_skew_matrix_antisymmetric(m):
    A = skew_matrix(m).toarray()
    np.testing.assert_array_equal(A.T, -A)
    assert np.count_nonzero(A) == 2 * (m // 2)


def test_skew_instance(rng):
    inst = gen_skew(20, rng_seed=4)
    assert np.all(inst.known_solution == 0)
    for s in inst.seeds:
        assert inst.C.contains(s)
    np.testing.assert_array_equal(inst.seeds[2], inst.seeds[3])
    for y in inst.C.sample(rng, 50):
        assert inst.f.evaluate(inst.known_solution, y) == 0.0


def test_volterra_case_one_at_origin():
    y_m1, w_m2 = volterra_seeds(np.array([0.0, 0.5, 1.0]), "I")
    assert y_m1[0] == 1.5
    np.testing.assert_allclose(y_m1, [1.5, 0.75, 1.0])
    np.testing.assert_allclose(w_m2, 2 * np.sin([1.0, 1.5, 2.0]))


def test_volterra_cases_formulas():
    t = np.linspace(0, 1, 7)
    np.testing.assert_allclose(volterra_seeds(t, "II")[0], t**2 + 1)
    np.testing.assert_allclose(volterra_seeds(t, "III")[0], np.exp(t) + 2 * t - 1)
    np.testing.assert_allclose(volterra_seeds(t, "IV")[0], np.sin(2 * t + 1) + 5)
    with pytest.raises(ValueError):
        volterra_seeds(t, "V")


def test_volterra_operator_against_integral():
    n = 500
    op = VolterraOperator(n)
    t = np.linspace(0, 1, n)
    x = np.ones(n)
    np.testing.assert_allclose(op(x), np.exp(-np.linalg.norm(x)) * t, atol=2 / n)
    np.testing.assert_allclose(op.integrate(x), t, atol=2 / n)
    np.testing.assert_array_equal(op(np.zeros(n)), np.zeros(n))


def test_volterra_instance():
    inst = gen_volterra(50, "III")
    assert inst.C.radius == 2.0 and inst.dim == 50
    assert inst.f.evaluate(np.zeros(50), np.ones(50)) == 0.0
    w = gen_volterra(50, "III", metric="weighted")
    np.testing.assert_allclose(w.seeds[0], inst.seeds[0] / np.sqrt(50))
    with pytest.raises(ValueError):
        gen_volterra(9)
    with pytest.raises(ValueError):
        gen_volterra(50, metric="sobolev")


def test_strongly_pseudomonotone_definition(rng):
    inst = gen_strongly_pseudomonotone(10, beta=1.0, rng_seed=2)
    f, beta = inst.f, 1.0
    assert np.linalg.eigvalsh(f.matrix).min() >= beta - 1e-12
    S, W = premise_pairs(inst, rng, 1000)
    for s, w in zip(S, W):
        assert f.evaluate(s, w) >= 0
        assert f.evaluate(w, s) + beta * np.sum((s - w) ** 2) <= 1e-8


def test_strongly_pseudomonotone_uncoupled_is_scaled_identity():
    inst = gen_strongly_pseudomonotone(6, beta=1e-6, rng_seed=0, coupled=False)
    np.testing.assert_array_equal(inst.f.matrix, 1e-6 * np.eye(6))


@pytest.mark.parametrize("gen,kw", [(gen_nash_cournot, dict(m=1)), (gen_skew, dict(m=1)),
                                    (gen_volterra, dict(n_grid=9)),
                                    (gen_strongly_pseudomonotone, dict(m=1)),
                                    (gen_strongly_pseudomonotone, dict(m=5, beta=0.0))])
def test_generator_preconditions(gen, kw):
    with pytest.raises(ValueError):
        gen(**kw)


def same(a, b):
    da, db = instance_to_dict(a), instance_to_dict(b)
    return json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)


@pytest.mark.parametrize("family,kw", [("nash_cournot", dict(m=12)), ("skew", dict(m=12)),
                                       ("volterra", dict(n_grid=30, case="II")),
                                       ("strongly_pm", dict(m=12))])
def test_reproducible(family, kw):
    a = generate(family, rng_seed=9, **kw)
    b = generate(family, rng_seed=9, **kw)
    assert same(a, b)
    for s, t in zip(a.seeds, b.seeds):
        assert s.tobytes() == t.tobytes()
    if family != "volterra":
        c = generate(family, rng_seed=10, **kw)
        assert not same(a, c)


@pytest.mark.parametrize("family,kw", [("nash_cournot", dict(m=10)), ("skew", dict(m=10)),
                                       ("volterra", dict(n_grid=40)),
                                       ("strongly_pm", dict(m=10))])
def test_declared_lipschitz_constants_hold(family, kw):
    inst = generate(family, **kw)
    k1, k2 = inst.f.lipschitz
    assert check_lipschitz_type(inst.f, k1, k2, 1000, inst.C.sample, np.random.default_rng(1))


@pytest.mark.parametrize("family,kw", [("skew", dict(m=10)), ("volterra", dict(n_grid=40))])
def test_known_solutions_certified(family, kw, rng):
    inst = generate(family, **kw)
    vals = [inst.f.evaluate(inst.known_solution, y) for y in inst.C.sample(rng, 1000)]
    assert min(vals) >= -1e-8


@pytest.mark.parametrize("family,kw", [("nash_cournot", dict(m=6)), ("skew", dict(m=7)),
                                       ("volterra", dict(n_grid=20, case="IV")),
                                       ("strongly_pm", dict(m=5))])
def test_serialization_round_trip(family, kw, tmp_path, rng):
    inst = generate(family, rng_seed=3, **kw)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    back = load_instance(path)
    assert same(inst, back)
    assert back.name == inst.name and back.rng_seed == 3
    for x, y in zip(rng.normal(size=(5, inst.dim)), rng.normal(size=(5, inst.dim))):
        assert back.f.evaluate(x, y) == pytest.approx(inst.f.evaluate(x, y), rel=1e-15, abs=1e-15)
    assert instance_from_dict(json.loads(path.read_text())).dim == inst.dim


def test_load_rejects_foreign_files(tmp_path):
    with pytest.raises(ValueError):
        instance_from_dict({"format": "other"})
    d = instance_to_dict(gen_skew(3))
    d["version"] = 99
    with pytest.raises(ValueError):
        instance_from_dict(d)


def test_generate_unknown_family():
    with pytest.raises(ValueError):
        generate("bogus")
