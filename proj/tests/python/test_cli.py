# SPDX-License-Identifier: Apache-2.0
"""End-to-end checks of the command-line surface: config precedence, keep
forms, error taxonomy exit codes, and byte determinism."""

import json
import os
import subprocess

import numpy as np
import pytest

CLI = os.environ.get("QUANTPRUNE_CLI", "")

pytestmark = pytest.mark.skipif(not CLI, reason="QUANTPRUNE_CLI not set")


def run(*args, env_extra=None, check=True):
    env = dict(os.environ)
    env.pop("QUANTPRUNE_CONFIG", None)
    if env_extra:
        env.update(env_extra)
    proc = subprocess.run([CLI, *args], capture_output=True, text=True,
                          env=env)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args} failed: {proc.stderr}")
    return proc


def write_npy(path, array):
    array = np.asarray(array, dtype=np.float32)
    with open(path, "wb") as f:
        np.lib.format.write_array(f, array, version=(1, 0))


@pytest.fixture()
def workspace(tmp_path):
    tokens = tmp_path / "tokens.npy"
    run("synth", "--seed", "3", "--n-tokens", "64", "--dim", "32",
        "--outlier-channels", "4", "--out", str(tokens))
    return tmp_path, tokens


def report_bits(path):
    return json.load(open(path))["config"]["quant"]["bits"]


def test_config_precedence(workspace):
    tmp, tokens = workspace
    cfg = tmp / "cfg.json"
    cfg.write_text('{"bits": 8}')
    out = tmp / "r.json"

    run("score", "--tokens", str(tokens), "--out", str(out))
    assert report_bits(out) == 4  # built-in default

    run("score", "--tokens", str(tokens), "--config", str(cfg), "--out",
        str(out))
    assert report_bits(out) == 8  # file overrides default

    run("score", "--tokens", str(tokens), "--config", str(cfg), "--bits", "2",
        "--out", str(out))
    assert report_bits(out) == 2  # flag overrides file

    run("score", "--tokens", str(tokens), "--out", str(out),
        env_extra={"QUANTPRUNE_CONFIG": str(cfg)})
    assert report_bits(out) == 8  # env default config


def test_keep_count_and_ratio(workspace):
    tmp, tokens = workspace
    out = tmp / "p.json"
    run("prune", "--tokens", str(tokens), "--query-seed", "1", "--keep", "16",
        "--out", str(out))
    assert len(json.load(open(out))["selection"]["selected_indices"]) == 16

    run("prune", "--tokens", str(tokens), "--query-seed", "1", "--keep",
        "ratio:0.25", "--out", str(out))
    assert len(json.load(open(out))["selection"]["selected_indices"]) == 16


def test_semantic_file_roundtrip(workspace):
    tmp, tokens = workspace
    sp = tmp / "sp.npy"
    write_npy(sp, np.linspace(0.0, 1.0, 64))
    out = tmp / "p.json"
    run("prune", "--tokens", str(tokens), "--semantic", str(sp), "--alpha",
        "1.0", "--keep", "4", "--out", str(out))
    sel = json.load(open(out))["selection"]["selected_indices"]
    assert sel == [60, 61, 62, 63]  # highest semantic scores win at alpha=1


def test_exit_codes(workspace):
    tmp, tokens = workspace
    out = tmp / "x.json"

    p = run("score", "--tokens", str(tokens), "--metric", "nope", "--out",
            str(out), check=False)
    assert p.returncode == 2  # configuration

    sp_short = tmp / "short.npy"
    write_npy(sp_short, np.zeros(7))
    p = run("prune", "--tokens", str(tokens), "--semantic", str(sp_short),
            "--keep", "4", "--out", str(out), check=False)
    assert p.returncode == 3  # data

    not_npy = tmp / "not.npy"
    not_npy.write_text("plain text")
    p = run("score", "--tokens", str(not_npy), "--out", str(out), check=False)
    assert p.returncode == 4  # format

    p = run("score", "--tokens", str(tmp / "missing.npy"), "--out", str(out),
            check=False)
    assert p.returncode == 5  # I/O

    p = run("definitely-not-a-subcommand", check=False)
    assert p.returncode == 2
    assert "Usage" in p.stderr or "Usage" in p.stdout

    cfg = tmp / "bad.json"
    cfg.write_text('{"bogus_key": 1}')
    p = run("score", "--tokens", str(tokens), "--config", str(cfg), "--out",
            str(out), check=False)
    assert p.returncode == 2


def test_heatmap_contract(workspace):
    tmp, tokens = workspace
    grid = tmp / "g.csv"
    run("heatmap", "--tokens", str(tokens), "--rows", "8", "--cols", "8",
        "--out", str(grid))
    lines = grid.read_text().strip().split("\n")
    assert len(lines) == 8
    assert all(len(line.split(",")) == 8 for line in lines)

    scores = tmp / "s.npy"
    write_npy(scores, [1.0, 2.0, 3.0, 4.0])
    run("heatmap", "--scores", str(scores), "--rows", "2", "--cols", "2",
        "--out", str(grid))
    assert grid.read_text() == "1,2\n3,4\n"

    p = run("heatmap", "--scores", str(scores), "--rows", "3", "--cols", "2",
            "--out", str(grid), check=False)
    assert p.returncode == 3  # grid does not cover the scores


def test_byte_determinism(workspace):
    tmp, tokens = workspace
    a, b = tmp / "a.json", tmp / "b.json"
    for out in (a, b):
        run("prune", "--tokens", str(tokens), "--query-seed", "5", "--keep",
            "8", "--out", str(out))
    assert a.read_bytes() == b.read_bytes()

    t1, t2 = tmp / "t1.npy", tmp / "t2.npy"
    for out in (t1, t2):
        run("synth", "--seed", "11", "--n-tokens", "16", "--dim", "16",
            "--n-outlier-tokens", "1", "--outlier-channels", "2", "--out",
            str(out))
    assert t1.read_bytes() == t2.read_bytes()


def test_numpy_reads_our_npy_and_vice_versa(workspace):
    tmp, tokens = workspace
    arr = np.lib.format.read_array(open(tokens, "rb"))
    assert arr.shape == (64, 32)
    assert arr.dtype == np.float32

    ours = tmp / "np_written.npy"
    data = np.arange(12, dtype=np.float32).reshape(3, 4)
    write_npy(ours, data)
    out = tmp / "score_of_np.npy"
    run("score", "--tokens", str(ours), "--metric", "l2_norm", "--out",
        str(out))
    scores = np.lib.format.read_array(open(out, "rb"))
    np.testing.assert_allclose(scores, np.linalg.norm(data, axis=1),
                               rtol=1e-6)


def test_keep_is_required(workspace):
    tmp, tokens = workspace
    out = tmp / "x.json"
    p = run("prune", "--tokens", str(tokens), "--query-seed", "1", "--out",
            str(out), check=False)
    assert p.returncode == 2
    assert "keep" in p.stderr

    cfg = tmp / "keepcfg.json"
    cfg.write_text('{"keep": "ratio:0.25"}')
    run("prune", "--tokens", str(tokens), "--query-seed", "1", "--config",
        str(cfg), "--out", str(out))
    assert len(json.load(open(out))["selection"]["selected_indices"]) == 16
