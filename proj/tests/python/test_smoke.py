# Copyright 2026 The p804kit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import math

import numpy as np
import pytest

import p804kit


def test_correlations_match_numpy():
    rng = np.random.default_rng(3)
    x = rng.normal(size=40)
    y = 0.5 * x + rng.normal(size=40)
    assert p804kit.pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)
    assert p804kit.spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)
    assert p804kit.kendall_tau_b([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


def test_constant_input_raises_with_code():
    with pytest.raises(p804kit.P804Error) as info:
        p804kit.pearson([1, 1, 1], [1, 2, 3])
    assert p804kit.error_code(info.value) == "undefined-correlation"
    assert isinstance(info.value, ValueError)


def test_icc_shrout_fleiss():
    ratings = np.array([[9, 2, 5, 8], [6, 1, 3, 2], [8, 4, 6, 8], [7, 1, 2, 6], [10, 5, 6, 9], [6, 2, 4, 7]], float)
    assert p804kit.icc_k(ratings) == pytest.approx(0.6200505, abs=1e-6)
    assert p804kit.icc_k(ratings, consistency=True) == pytest.approx(0.9093155, abs=1e-6)
    same = np.repeat(np.array([[1.0], [2.0], [4.5]]), 3, axis=1)
    assert p804kit.icc_k(same) == 1.0


def test_ranking_and_tau_b95():
    ranks = dict(p804kit.corrected_ranking([("x", 4.0, 0.05), ("y", 3.5, 0.6), ("z", 3.4, 0.05)]))
    assert ranks == {"x": 1, "y": 2, "z": 2}
    a = [("m1", 1.0, 0.0), ("m2", 2.0, 0.0), ("m3", 3.0, 0.0)]
    assert p804kit.tau_b95(a, a) == pytest.approx(1.0)


def test_efa_recovers_planted_loadings():
    lam = np.array([[0.8, 0.1], [0.7, 0.2], [0.75, 0.0], [0.1, 0.8], [0.2, 0.7], [0.0, 0.65]])
    r = lam @ lam.T
    np.fill_diagonal(r, 1.0)
    sol = p804kit.efa(r, 2, rotate=False)
    assert sol["converged"]
    fitted = sol["loadings"] @ sol["loadings"].T
    assert np.abs(fitted - lam @ lam.T).max() < 1e-4
    assert p804kit.kmo(r) > 0.5
    chi2, df, p = p804kit.bartlett(np.eye(5), 40)
    assert (chi2, df, p) == (0.0, 10.0, 1.0)


def test_mediation_identity():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(500, 3))
    signal = 0.6 * x[:, 0] + rng.normal(size=500) * 0.8
    overall = 0.2 * x[:, 0] + 0.5 * signal + rng.normal(size=500) * 0.7
    values = np.column_stack([x, signal, overall])
    res = p804kit.mediation(values, ["A", "B", "C", "Signal", "Overall"])
    assert res["n"] == 500
    for e in res["effects"]:
        assert math.isclose(e["total"], e["direct"] + e["indirect"], abs_tol=1e-9)


def test_aggregate_mos_clip_and_model():
    votes = [("A", "m1", "Overall", v) for v in (4, 5, 3, 4, 4)]
    votes += [("B", "m1", "Overall", v) for v in (2, 3, 2, 1, 2)]
    clip = {e["key"]: e for e in p804kit.aggregate_mos(votes)}
    assert clip["A"]["mos"] == pytest.approx(4.0)
    assert clip["A"]["ci95"] == pytest.approx(0.8779890330850831, abs=1e-12)
    model = p804kit.aggregate_mos(votes, level="model")
    assert model[0]["key"] == "m1" and model[0]["mos"] == pytest.approx(3.0)


def test_build_packages_partitions_clips():
    clips = [{"clip_id": f"c{i}", "uri": f"c{i}.wav", "model_id": f"m{i % 3}", "duration_s": 4.0} for i in range(23)]
    gold = {"kind": "gold", "clip": {"clip_id": "g", "uri": "g.wav", "duration_s": 4.0},
            "expected": {"Overall": {"value": 5, "tolerance": 1}}}
    trap = {"kind": "trapping", "clip": {"clip_id": "t", "uri": "t.wav", "duration_s": 4.0},
            "expected": {s: {"value": 1} for s in
                         ("Noisiness", "Coloration", "Discontinuity", "Loudness", "Reverberation", "Signal", "Overall")}}
    packages = p804kit.build_packages(clips, [gold], [trap], {"package_size": 10}, seed=5)
    assert len(packages) == 3
    real = [c["clip_id"] for p in packages for c, pad in zip(p["rating_clips"], p["padding"]) if not pad]
    assert sorted(real) == sorted(c["clip_id"] for c in clips)
    assert all(len(p["rating_clips"]) == 10 and len(p["controls"]) == 2 for p in packages)
    with pytest.raises(p804kit.P804Error):
        p804kit.build_packages(clips, [gold], [trap], {"bogus": 1})


def test_bandpass_noise_is_deterministic():
    a = np.asarray(p804kit.bandpass_noise(3500.0, 22000.0, 0.5, seed=4))
    b = np.asarray(p804kit.bandpass_noise(3500.0, 22000.0, 0.5, seed=4))
    assert a.shape == (24000,)
    assert np.array_equal(a, b)
    spectrum = np.abs(np.fft.rfft(a * np.hanning(a.size))) ** 2
    freqs = np.fft.rfftfreq(a.size, 1 / 48000)
    assert spectrum[freqs < 2000].sum() < 1e-4 * spectrum[(freqs > 4000) & (freqs < 20000)].sum()
