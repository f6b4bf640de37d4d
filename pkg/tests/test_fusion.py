import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from topolesion.fusion import (
    FusionHead,
    TrainConfig,
    backward,
    forward,
    fuse,
    numerical_gradients,
    reduce,
    relative_error,
    sigmoid,
    synthetic_task,
    train,
)


def random_instance(seed, n=5, nb=4, nt=6, r=5, k=3):
    rng = np.random.default_rng(seed)
    head = FusionHead.init(nb, nt, k, reduced_dim=r, a_raw=rng.normal(), seed=seed)
    head.b_red[:] = rng.normal(0, 0.5, r)
    head.b_cls[:] = rng.normal(0, 0.5, k)
    return head, rng.normal(size=(n, nb)), rng.normal(size=(n, nt)), rng.integers(0, k, n)


def test_fuse_examples():
    assert fuse([2.0], [4.0], 0.0).tolist() == [1.0, 2.0]
    out = fuse([2.0, 3.0], [4.0], -30.0)
    assert out == pytest.approx([2.0, 3.0, 0.0], abs=1e-12)
    assert sigmoid(0.5) == pytest.approx(0.62246, abs=1e-5)
    assert FusionHead.init(2, 2, 2, reduced_dim=2).alpha == pytest.approx(0.62246, abs=1e-5)


@given(st.floats(-5, 5), st.floats(-3, 3))
def test_fuse_is_linear(a_raw, c):
    rng = np.random.default_rng(0)
    vb, vt, wb, wt = rng.normal(size=(4, 3))
    assert np.allclose(fuse(vb + c * wb, vt, a_raw), fuse(vb, vt, a_raw) + c * fuse(wb, np.zeros(3), a_raw))
    assert np.allclose(fuse(vb, vt + c * wt, a_raw), fuse(vb, vt, a_raw) + c * fuse(np.zeros(3), wt, a_raw))


def test_reduce_examples(rng):
    assert not reduce(np.ones(4), np.zeros((3, 4)), np.zeros(3)).any()
    x = np.array([0.5, 2.0, 3.0])
    assert np.array_equal(reduce(x, np.eye(3), np.zeros(3)), x)
    W, b, v = rng.normal(size=(4, 5)), rng.normal(size=4), rng.normal(size=5)
    expected = np.zeros(4)
    for i in range(4):
        s = b[i]
        for j in range(5):
            s += W[i, j] * v[j]
        expected[i] = max(s, 0.0)
    assert np.allclose(reduce(v, W, b), expected)
    with pytest.raises(ValueError):
        reduce(np.ones(3), W, b)


def test_forward_distribution(rng):
    head, vb, vt, _ = random_instance(1)
    probs = forward(head, vb, vt)
    assert np.all(probs >= 0)
    assert np.allclose(probs.sum(axis=1), 1, atol=1e-12)
    head.W_cls[:] = 0
    head.b_cls[:] = 0
    assert np.allclose(forward(head, vb[0], vt[0]), 1 / 3)
    head.b_cls[1] = 30
    assert forward(head, vb[0], vt[0])[1] > 1 - 1e-9
    with pytest.raises(ValueError):
        forward(head, np.ones(3), vt[0])


def test_zero_inputs_only_bias_gradients():
    head, _, _, y = random_instance(2)
    head.b_red[:] = 0
    _, g = backward(head, np.zeros((5, 4)), np.zeros((5, 6)), y)
    assert not g["W_red"].any() and not g["W_cls"].any() and not g["b_red"].any()
    assert g["a_raw"] == 0
    assert g["b_cls"].any()


@pytest.mark.parametrize("seed", range(5))
def test_gradients_match_finite_differences(seed):
    head, vb, vt, y = random_instance(seed)
    _, analytic = backward(head, vb, vt, y)
    numeric = numerical_gradients(head, vb, vt, y, step=1e-5)
    for name in analytic:
        assert relative_error(analytic[name], numeric[name]) <= 1e-4, name


def test_alpha_gradient_uses_both_branches():
    head, vb, vt, y = random_instance(9)
    _, g = backward(head, vb, vt, y)
    numeric = numerical_gradients(head, vb, vt, y)["a_raw"]
    assert g["a_raw"] == pytest.approx(numeric, rel=1e-4)
    _, g_no_backbone = backward(head, np.zeros_like(vb), vt, y)
    assert g_no_backbone["a_raw"] != pytest.approx(g["a_raw"])


def test_zero_learning_rate_leaves_parameters():
    vb, vt, y = synthetic_task(20, backbone_dim=3, topo_dim=4)
    head = FusionHead.init(3, 4, 2, reduced_dim=4)
    trained = train(vb, vt, y, TrainConfig(learning_rate=0.0, epochs=3, reduced_dim=4), head=head)
    for name, value in head.params().items():
        assert np.array_equal(np.asarray(value), np.asarray(trained.head.params()[name]))
    assert all(r.alpha == head.alpha for r in trained.trace)


def test_training_reproducible_and_alpha_in_range():
    vb, vt, y = synthetic_task(40, seed=4)
    cfg = TrainConfig(learning_rate=0.05, epochs=20, reduced_dim=8, seed=4)
    a, b = train(vb, vt, y, cfg), train(vb, vt, y, cfg)
    assert a.head.to_json() == b.head.to_json()
    assert all(0 < r.alpha < 1 for r in a.trace)


def test_empty_dataset():
    with pytest.raises(ValueError):
        train(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0, dtype=int))


def test_head_json_round_trip():
    head, *_ = random_instance(3)
    back = FusionHead.from_json(head.to_json())
    assert back.to_json() == head.to_json()
    assert back.W_red.shape == head.W_red.shape


def test_trace_csv(tmp_path):
    vb, vt, y = synthetic_task(20, seed=1)
    trained = train(vb, vt, y, TrainConfig(epochs=3, reduced_dim=4))
    trained.write_trace(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "epoch,loss,accuracy,alpha" and len(lines) == 4
