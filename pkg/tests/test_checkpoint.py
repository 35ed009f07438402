"""Checkpoint format: byte-identical round-trips and corruption detection."""

import numpy as np
import pytest

from sketchrl.errors import CheckpointError
from sketchrl.nn import (
    Network,
    adam_init,
    adam_update,
    classifier_spec,
    decode_rng_state,
    encode_rng_state,
    load_checkpoint,
    q_network_spec,
    save_checkpoint,
)


@pytest.fixture(scope="module")
def trained_net():
    spec = q_network_spec()
    net = Network.init(spec, seed=5)
    adam = adam_init(net.params)
    grads = {k: np.full_like(v, 1e-3) for k, v in net.params.items()}
    net.params, adam = adam_update(net.params, grads, adam, lr=1e-4)
    return spec, net, adam


def test_round_trip_bit_exact(tmp_path, trained_net):
    spec, net, adam = trained_net
    rng = np.random.Generator(np.random.Philox(9))
    rng.random(17)  # advance so the state is nontrivial
    path = tmp_path / "q.ckpt"
    save_checkpoint(str(path), spec, net.params, adam=adam, step=41, rng_state=encode_rng_state(rng))
    bundle = load_checkpoint(str(path), spec=spec)
    assert bundle.kind == spec.name
    assert bundle.step == 41
    assert bundle.adam.t == adam.t
    for key, arr in net.params.items():
        assert np.array_equal(bundle.params[key], arr)
        assert np.array_equal(bundle.adam.m[key], adam.m[key])
        assert np.array_equal(bundle.adam.v[key], adam.v[key])
    # Restored generator continues the exact stream.
    rng2 = np.random.Generator(np.random.Philox(0))
    rng2.bit_generator.state = decode_rng_state(bundle.rng_state)
    assert np.array_equal(rng.random(8), rng2.random(8))


def test_double_save_byte_identical(tmp_path, trained_net):
    spec, net, adam = trained_net
    a = tmp_path / "a.ckpt"
    b = tmp_path / "b.ckpt"
    save_checkpoint(str(a), spec, net.params, adam=adam, step=1, meta={"phase": "x"})
    save_checkpoint(str(b), spec, net.params, adam=adam, step=1, meta={"phase": "x"})
    assert a.read_bytes() == b.read_bytes()


def test_forward_identical_after_round_trip(tmp_path, trained_net):
    spec, net, adam = trained_net
    path = tmp_path / "q.ckpt"
    save_checkpoint(str(path), spec, net.params)
    bundle = load_checkpoint(str(path), spec=spec)
    restored = Network(spec, bundle.params)
    glob = np.random.Generator(np.random.Philox(2)).random((4, 84, 84)).astype(np.float32)
    loc = np.zeros((1, 11, 11), dtype=np.float32)
    assert np.array_equal(net.forward(glob, loc), restored.forward(glob, loc))


def test_no_adam_round_trip(tmp_path, trained_net):
    spec, net, _ = trained_net
    path = tmp_path / "q.ckpt"
    save_checkpoint(str(path), spec, net.params)
    bundle = load_checkpoint(str(path))
    assert bundle.adam is None
    assert bundle.manifest["has_adam"] is False


def test_tampered_blob_fails_checksum(tmp_path, trained_net):
    spec, net, _ = trained_net
    path = tmp_path / "q.ckpt"
    save_checkpoint(str(path), spec, net.params)
    raw = bytearray(path.read_bytes())
    raw[-3] ^= 0xFF  # flip bits inside the final parameter array
    path.write_bytes(bytes(raw))
    with pytest.raises(CheckpointError, match="checksum"):
        load_checkpoint(str(path))


def test_truncated_file_detected(tmp_path, trained_net):
    spec, net, _ = trained_net
    path = tmp_path / "q.ckpt"
    save_checkpoint(str(path), spec, net.params)
    raw = path.read_bytes()
    for cut in (4, 60, len(raw) - 100):
        path.write_bytes(raw[:cut])
        with pytest.raises(CheckpointError):
            load_checkpoint(str(path))


def test_wrong_kind_rejected(tmp_path):
    cls_spec = classifier_spec()
    cls = Network.init(cls_spec, seed=0)
    path = tmp_path / "cls.ckpt"
    save_checkpoint(str(path), cls_spec, cls.params)
    load_checkpoint(str(path), spec=cls_spec)  # sanity: loads as itself
    with pytest.raises(CheckpointError):
        load_checkpoint(str(path), spec=q_network_spec())


def test_param_count_enforced_on_save(tmp_path):
    spec = q_network_spec()
    net = Network.init(spec, seed=0)
    bad = dict(net.params)
    bad["fc2.b"] = np.zeros(243, dtype=np.float32)
    with pytest.raises(CheckpointError):
        save_checkpoint(str(tmp_path / "bad.ckpt"), spec, bad)


def test_rng_state_json_round_trip():
    rng = np.random.Generator(np.random.Philox(123))
    rng.integers(0, 100, size=11)
    encoded = encode_rng_state(rng)
    import json

    again = json.loads(json.dumps(encoded))  # must survive real JSON
    rng2 = np.random.Generator(np.random.Philox(0))
    rng2.bit_generator.state = decode_rng_state(again)
    assert np.array_equal(rng.integers(0, 2**62, size=5), rng2.integers(0, 2**62, size=5))
