import json

import numpy as np
import pytest

from midfuse import nn


def fd_check(model, inputs, y, n_checks=120, h=1e-5, seed=0):
    """Max relative error of analytic gradients vs central differences over random coordinates."""
    _, grads = nn.loss_and_gradients(model, inputs, y)
    rng = np.random.default_rng(seed)
    names = list(model.params)
    worst = 0.0
    for _ in range(n_checks):
        name = names[int(rng.integers(len(names)))]
        p = model.params[name]
        idx = tuple(int(rng.integers(s)) for s in p.shape)
        old = p[idx]
        p[idx] = old + h
        up, _ = nn.loss_and_gradients(model, inputs, y)
        p[idx] = old - h
        down, _ = nn.loss_and_gradients(model, inputs, y)
        p[idx] = old
        numeric = (up - down) / (2 * h)
        analytic = grads[name][idx]
        denom = max(abs(numeric), abs(analytic), 1e-7)
        worst = max(worst, abs(numeric - analytic) / denom)
    return worst


def small_data(rng, n, dims):
    Xs = [rng.standard_normal((n, d)) for d in dims]
    y = (rng.random(n) < 0.5).astype(float)
    return Xs, y


@pytest.mark.parametrize("layers", [1, 2])
def test_gradients_early(layers):
    rng = np.random.default_rng(layers)
    (X,), y = small_data(rng, 12, [6])
    cfg = nn.MLPConfig("early", (6,), layers, 16, 0.5)
    model = nn.init_model(cfg, seed=3)
    assert fd_check(model, X, y) < 1e-4


@pytest.mark.parametrize("layers", [1, 2])
def test_gradients_mid(layers):
    rng = np.random.default_rng(10 + layers)
    Xs, y = small_data(rng, 10, [4, 3, 5])
    cfg = nn.MLPConfig("mid", (4, 3, 5), layers, 16, 0.75)
    model = nn.init_model(cfg, seed=4)
    assert fd_check(model, Xs, y) < 1e-4


def test_init_examples():
    cfg = nn.MLPConfig("early", (8,), 1, 16)
    m = nn.init_model(cfg, seed=0)
    W = m.params["hidden0.W"]
    assert W.shape == (8, 16)
    assert np.std(W) == pytest.approx(0.5, abs=0.08)
    m2 = nn.init_model(cfg, seed=0)
    assert all(np.array_equal(m.params[k], m2.params[k]) for k in m.params)
    mid = nn.init_model(nn.MLPConfig("mid", (3, 4, 5), 2, 16), seed=0)
    names = {k.rsplit(".", 1)[0] for k in mid.params}
    assert names == {"view0.0", "view0.1", "view1.0", "view1.1", "view2.0", "view2.1", "shared", "out"}


def test_forward_examples():
    cfg = nn.MLPConfig("early", (5,), 2, 16, 0.5)
    m = nn.init_model(cfg, seed=1)
    zero = nn.NNModel(cfg, {k: np.zeros_like(v) for k, v in m.params.items()})
    X = np.random.default_rng(0).standard_normal((7, 5))
    np.testing.assert_array_equal(nn.forward(zero, X), np.full(7, 0.5))
    a = nn.forward(m, X, train_mode=True, dropout_seed=5)
    b = nn.forward(m, X, train_mode=True, dropout_seed=5)
    np.testing.assert_array_equal(a, b)
    nodrop = nn.init_model(nn.MLPConfig("early", (5,), 2, 16, 0.0), seed=1)
    np.testing.assert_array_equal(nn.forward(nodrop, X, train_mode=True, dropout_seed=9), nn.forward(nodrop, X))
    np.testing.assert_array_equal(nn.predict_proba(m, X), nn.predict_proba(m, X))


def test_loss_examples():
    cfg = nn.MLPConfig("early", (3,), 1, 16)
    m = nn.init_model(cfg, seed=0)
    zero = nn.NNModel(cfg, {k: np.zeros_like(v) for k, v in m.params.items()})
    X = np.ones((4, 3))
    loss, _ = nn.loss_and_gradients(zero, X, np.array([0, 1, 0, 1.0]))
    assert loss == pytest.approx(np.log(2.0), abs=1e-15)
    confident = nn.NNModel(cfg, {k: np.zeros_like(v) for k, v in m.params.items()})
    confident.params["out.b"][:] = 200.0
    loss, grads = nn.loss_and_gradients(confident, X, np.ones(4))
    assert np.isfinite(loss) and loss <= 1e-11
    confident.params["out.b"][:] = -200.0
    loss, _ = nn.loss_and_gradients(confident, X, np.ones(4))
    assert np.isfinite(loss)


def test_mid_with_one_view_equals_early():
    early = nn.init_model(nn.MLPConfig("early", (6,), 1, 16), seed=2)
    mid_cfg = nn.MLPConfig("mid", (6,), 1, 16)
    mid = nn.init_model(mid_cfg, seed=2)
    # the mid model has one extra shared layer; make it the identity on ReLU outputs
    mid.params["view0.0.W"] = early.params["hidden0.W"].copy()
    mid.params["shared.W"] = np.eye(16)
    mid.params["out.W"] = early.params["out.W"].copy()
    X = np.random.default_rng(1).standard_normal((9, 6))
    np.testing.assert_allclose(nn.forward(mid, [X]), nn.forward(early, X), rtol=1e-14)


def test_adam_examples():
    params = {"w": np.array([1.0, -2.0, 3.0])}
    state = nn.AdamState.zeros_like(params)
    same, _ = nn.adam_step(params, {"w": np.zeros(3)}, state)
    np.testing.assert_array_equal(same["w"], params["w"])
    g = {"w": np.array([0.3, -5.0, 1e-3])}
    new, state1 = nn.adam_step(params, g, state)
    np.testing.assert_allclose(new["w"] - params["w"], -0.001 * np.sign(g["w"]), rtol=1e-4)
    again, _ = nn.adam_step(params, g, state)
    np.testing.assert_array_equal(new["w"], again["w"])
    assert state1.t == 1 and state.t == 0


def test_fused_kernel_matches_reference_adam():
    rng = np.random.default_rng(0)
    params = {"a": rng.standard_normal((3, 4)), "b": rng.standard_normal(4)}
    state = nn.AdamState.zeros_like(params)
    flat, views = nn._flat_buffers(params)
    m, v = np.zeros_like(flat), np.zeros_like(flat)
    ref = params
    for t in range(1, 6):
        grads = {k: rng.standard_normal(p.shape) for k, p in params.items()}
        ref, state = nn.adam_step(ref, grads, state)
        gflat = np.concatenate([grads[k].ravel() for k in params])
        nn._adam_kernel(flat, gflat, m, v, 0.001 / (1 - 0.9 ** t), 0.9, 0.999, 1 / np.sqrt(1 - 0.999 ** t), 1e-8)
    for k in params:
        np.testing.assert_allclose(views[k], ref[k], rtol=1e-12, atol=1e-15)


def test_train_separable_toy():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(-2, 0.5, (100, 2)), rng.normal(2, 0.5, (100, 2))])
    y = np.r_[np.zeros(100), np.ones(100)]
    cfg = nn.MLPConfig("early", (2,), 1, 16, 0.0, 50, 16)
    for seed in range(4):
        m = nn.train(cfg, X, y, seed=seed)
        assert nn.predict(m, X).tolist() == y.astype(int).tolist()
        assert m.loss_trace[-1] <= m.loss_trace[0]
    m2 = nn.train(cfg, X, y, seed=3)
    assert all(np.array_equal(m.params[k], m2.params[k]) for k in m.params)


def test_train_mid_runs_and_is_deterministic():
    rng = np.random.default_rng(1)
    Xs, y = small_data(rng, 40, [5, 7])
    cfg = nn.MLPConfig("mid", (5, 7), 2, 32, 0.5, 25, 32)
    a = nn.train(cfg, Xs, y, seed=3)
    b = nn.train(cfg, Xs, y, seed=3)
    np.testing.assert_array_equal(nn.predict_proba(a, Xs), nn.predict_proba(b, Xs))
    p = nn.predict_proba(a, Xs)
    assert np.all((p >= 0) & (p <= 1))


def test_config_grid_enforced():
    with pytest.raises(ValueError):
        nn.MLPConfig("early", (3,), 1, 17)
    with pytest.raises(ValueError):
        nn.MLPConfig("early", (3, 4))
    with pytest.raises(ValueError):
        nn.MLPConfig("late", (3,))


def test_model_json_round_trip():
    cfg = nn.MLPConfig("mid", (2, 3), 1, 16)
    m = nn.init_model(cfg, seed=0)
    m2 = nn.NNModel.from_dict(json.loads(json.dumps(m.to_dict())))
    Xs = [np.ones((2, 2)), np.ones((2, 3))]
    np.testing.assert_array_equal(nn.forward(m, Xs), nn.forward(m2, Xs))
    assert m.to_dict()["manifest"]["shared.W"] == [32, 16]
