import json

import numpy as np
import pytest

from gmacsec.channel_model import (BUILTINS, ChannelSpecError, GmacChannel, builtin,
                                   degradation_residual, find_stochastic_degradation,
                                   is_physically_degraded, load_channel, marginal)

MULTIPLIER_TABLE = {  # (x1, x2) -> (y, y2)
    (0, 0): (0, 1),
    (0, 1): (0, 1),
    (1, 0): (0, 0),
    (1, 1): (1, 1),
}


def _multiplier_doc():
    t = np.zeros((2, 2, 2, 1, 2))
    for (x1, x2), (y, y2) in MULTIPLIER_TABLE.items():
        t[x1, x2, y, 0, y2] = 1.0
    return {"name": "table", "alphabets": {"x1": 2, "x2": 2, "y": 2, "y1": 1, "y2": 2},
            "transition": t.tolist()}


def test_load_table_channel():
    ch = load_channel(_multiplier_doc())
    assert ch.sizes == {"x1": 2, "x2": 2, "y": 2, "y1": 1, "y2": 2}
    assert np.array_equal(ch.transition, builtin("multiplier_bias").transition)


def test_load_from_file(tmp_path):
    path = tmp_path / "ch.json"
    path.write_text(json.dumps(_multiplier_doc()))
    assert load_channel(path).name == "table"


def test_load_rejects_bad_slices():
    doc = _multiplier_doc()
    t = np.array(doc["transition"])
    t[0, 0] *= 0.9
    doc["transition"] = t.tolist()
    with pytest.raises(ChannelSpecError):
        load_channel(doc)
    with pytest.raises(ChannelSpecError):
        load_channel({"alphabets": {"x1": 2}})
    with pytest.raises(ChannelSpecError):
        load_channel({**_multiplier_doc(), "alphabets": {"x1": 2, "x2": 2, "y": 3, "y1": 1, "y2": 2}})
    with pytest.raises(ChannelSpecError):
        GmacChannel(np.full((2, 2, 2, 1, 2), -0.25))


def test_destination_and_user2_marginals():
    ch = builtin("multiplier_bias")
    py = marginal(ch, "destination").tensor
    py2 = marginal(ch, "user2").tensor
    for (x1, x2), (y, y2) in MULTIPLIER_TABLE.items():
        assert py[x1, x2, y] == 1.0
        assert py2[x1, x2, y2] == 1.0
    p = 0.2
    py2 = marginal(builtin("degraded_binary", p=p), "user2").tensor
    for x1 in range(2):
        for x2 in range(2):
            y = x1 * x2
            assert py2[x1, x2, y] == pytest.approx(1 - p)
            assert py2[x1, x2, 1 - y] == pytest.approx(p)
    with pytest.raises(ValueError):
        marginal(ch, "relay")


@pytest.mark.parametrize("name", BUILTINS)
@pytest.mark.parametrize("receiver", ["destination", "user1", "user2"])
def test_marginals_are_stochastic(name, receiver):
    t = marginal(builtin(name), receiver).tensor
    assert np.allclose(t.sum(axis=2), 1.0, atol=1e-12)


def test_degraded_binary_extremes():
    half = marginal(builtin("degraded_binary", p=0.5), "user2").tensor
    assert np.allclose(half, 0.5)
    ch = builtin("degraded_binary", p=0.0)
    assert np.array_equal(marginal(ch, "user2").tensor, marginal(ch, "destination").tensor)


def test_physical_degradedness():
    for p in np.linspace(0.01, 0.5, 50):
        assert is_physically_degraded(builtin("degraded_binary", p=p))
    assert not is_physically_degraded(builtin("multiplier_bias"))
    t = np.zeros((2, 2, 2, 1, 1))
    t[:, :, 0, 0, 0] = 0.3
    t[:, :, 1, 0, 0] = 0.7
    assert is_physically_degraded(GmacChannel(t))


def test_degraded_binary_kernel_is_bsc():
    p = 0.13
    rep = find_stochastic_degradation(builtin("degraded_binary", p=p))
    assert rep.physically_degraded and rep.stochastically_degraded
    assert rep.residual <= 1e-12
    # x2 = 1 reaches both y values, so its kernel is the BSC itself
    assert np.allclose(rep.degrading_kernel[1], [[1 - p, p], [p, 1 - p]])


def test_quantized_gaussian_is_stochastically_degraded():
    ch = builtin("quantized_gaussian", P1=1.0, P2=1.0, N=1.0, N2=3.0, levels=4)
    rep = find_stochastic_degradation(ch)
    assert rep.stochastically_degraded
    assert rep.residual < 1e-9
    assert not rep.physically_degraded
    assert degradation_residual(ch, rep.degrading_kernel) < 1e-9


def test_multiplier_channel_not_degraded_by_grid_search():
    ch = builtin("multiplier_bias")
    rep = find_stochastic_degradation(ch)
    assert not rep.stochastically_degraded and rep.degrading_kernel is None
    # brute force over kernels K(1|y=0), K(1|y=1) on a 1e-3 grid, per x2
    py = marginal(ch, "destination").tensor
    py2 = marginal(ch, "user2").tensor
    g = np.linspace(0.0, 1.0, 1001)
    k0, k1 = np.meshgrid(g, g, indexing="ij")
    worst = 0.0
    for x2 in range(2):
        res = np.zeros_like(k0)
        for x1 in range(2):
            pred1 = py[x1, x2, 0] * k0 + py[x1, x2, 1] * k1
            res = np.maximum(res, np.abs(pred1 - py2[x1, x2, 1]))
        worst = max(worst, float(res.min()))
    assert worst > 0.1
    assert rep.residual == pytest.approx(worst, abs=1e-3)


@pytest.mark.parametrize("p", [0.05, 0.2, 0.5])
def test_degradation_kernel_column_stochastic(p):
    for ch in (builtin("degraded_binary", p=p), builtin("quantized_gaussian", N2=2.0 + p)):
        k = find_stochastic_degradation(ch).degrading_kernel
        assert np.all(k >= -1e-9)
        assert np.allclose(k.sum(axis=2), 1.0, atol=1e-9)


def test_builtin_errors():
    with pytest.raises(ValueError):
        builtin("nope")
    with pytest.raises(ValueError):
        builtin("degraded_binary", p=0.7)
