import math
import os
import subprocess

import numpy as np
import pytest

import hogs

P = hogs.Parametrization


def test_homogeneous_round_trip():
    raw = hogs.encode_from_cartesian([1.0, 2.0, 3.0], [0.1, 0.2, 0.3], [1.0, 0.0, 0.0, 0.0],
                                     P.Homogeneous, 0.5)
    d = hogs.decode(raw, P.Homogeneous)
    assert d.valid
    np.testing.assert_allclose(d.mean, [1.0, 2.0, 3.0], rtol=1e-12)
    np.testing.assert_allclose(d.scale, [0.1, 0.2, 0.3], rtol=1e-12)
    # rescaling the homogeneous tuple leaves the decoded Gaussian alone
    d2 = hogs.decode(hogs.rescale_homogeneous(raw, 7.0), P.Homogeneous)
    np.testing.assert_allclose(d2.mean, d.mean, rtol=1e-12)


def test_parse_parametrization():
    assert hogs.parse_parametrization("homogeneous") == P.Homogeneous
    with pytest.raises(ValueError):
        hogs.parse_parametrization("polar")


def test_render_single_gaussian():
    s = hogs.GaussianSet(P.Cartesian, 0)
    raw = hogs.encode_from_cartesian([0.0, 0.0, 5.0], [0.3, 0.3, 0.3], [1, 0, 0, 0], P.Cartesian)
    s.push_back(raw, 3.0, [1.5, 0.0, -1.5])
    cam = hogs.Camera.look_at([0, 0, 0], [0, 0, 5], [0, -1, 0], 40.0, 32, 24)
    out = hogs.render(s, cam)
    assert out["radiance"].shape == (24, 32, 3)
    assert out["alpha"].shape == (24, 32)
    assert 0.5 < out["alpha"].max() < 1.0
    assert np.all(out["radiance"] >= 0.0) and np.all(out["radiance"] <= 1.0)


def test_metrics():
    rng = np.random.default_rng(0)
    a = rng.uniform(size=(16, 16, 3))
    assert hogs.ssim(a, a) == pytest.approx(1.0)
    b = np.clip(a + 0.01, 0, 1)
    mse = np.mean((a - b) ** 2)
    assert hogs.psnr(a, b) == pytest.approx(-10 * math.log10(mse), rel=1e-9)


def test_split():
    train, test = hogs.split_train_test(16)
    assert test == [0, 8]
    assert len(train) == 14


def test_simulate_1d_ordering():
    h = hogs.simulate_1d(0.1, [10.0], "homogeneous")
    c = hogs.simulate_1d(0.1, [10.0], "cartesian")
    assert h[0] is not None and c[0] is not None
    assert h[0] < c[0]
    with pytest.raises(ValueError):
        hogs.simulate_1d(0.1, [10.0], "spherical")


def test_init_from_points():
    pts = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [0.0, 0.0, 30.0]])
    cols = np.full((4, 3), 0.5)
    s = hogs.init_from_points(pts, cols, P.Homogeneous, "1/d", 1)
    assert len(s) == 4
    np.testing.assert_allclose(s.means(), pts, atol=1e-9)
    with pytest.raises(ValueError):
        hogs.init_from_points(pts[:, :2], cols, P.Homogeneous)


def test_fixture_train_export(tmp_path):
    cli = os.environ.get("HOGS_CLI")
    if not cli:
        pytest.skip("HOGS_CLI not set")
    manifest = hogs.write_fixture(str(tmp_path / "scene"), 3, True)
    assert os.path.exists(manifest)
    out = tmp_path / "run"
    subprocess.run([cli, "train", manifest, "--out", str(out), "--iterations", "20",
                    "--parametrization", "homogeneous"], check=True, capture_output=True)
    s = hogs.load_checkpoint(str(out / "checkpoint_final.hgsc"))
    assert s.parametrization == P.Homogeneous
    assert len(s) > 0
    hogs.export_3dgs_ply(s, str(tmp_path / "out.ply"))
    assert (tmp_path / "out.ply").stat().st_size > 0


def test_bad_checkpoint(tmp_path):
    bad = tmp_path / "bad.hgsc"
    bad.write_bytes(b"not a checkpoint")
    with pytest.raises(ValueError):
        hogs.load_checkpoint(str(bad))
