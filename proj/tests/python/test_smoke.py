# Copyright (c) 2026 The asgscore Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import asgscore


def test_cosine_and_weights():
    assert asgscore.cosine([1.0, 0.0], [0.0, 2.0]) == 0.0
    s = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.5], [0.0, 0.5, 0.0]])
    w = asgscore.weight_matrix(s, alpha=1.0)
    e = math.e
    assert w[0, 1] == pytest.approx(e / (e + 1), abs=1e-15)
    assert w[0, 2] == pytest.approx(1 / (e + 1), abs=1e-15)
    np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(np.diag(w) == 0.0)


def test_refine_converges_to_fixed_point():
    rng = np.random.default_rng(0)
    w = rng.random((20, 20))
    w /= w.sum(axis=1, keepdims=True)
    y0 = rng.uniform(-1, 1, 20)
    expected = 0.5 * np.linalg.solve(np.eye(20) - 0.5 * w, y0)
    np.testing.assert_allclose(asgscore.fixed_point(y0, w, 0.5), expected,
                               atol=1e-12)
    np.testing.assert_allclose(asgscore.refine(y0, w, 0.5, 60), expected,
                               atol=1e-12)


def test_pair_score_properties():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(2, 8)), rng.normal(size=(1, 8))
    aux = rng.normal(size=(30, 8))
    ab = asgscore.pair_score(a, b, aux, lam=0.6, top_k=10)
    assert ab == asgscore.pair_score(b, a, aux, lam=0.6, top_k=10)
    shuffled = aux[rng.permutation(30)]
    assert asgscore.pair_score(a, b, shuffled, lam=0.6, top_k=10) == \
        pytest.approx(ab, abs=1e-12)
    raw = np.mean([asgscore.cosine(x, b[0]) for x in a])
    assert asgscore.pair_score(a, b, aux, lam=0.0) == pytest.approx(raw,
                                                                    abs=1e-15)


def test_contribution_weights_rows_sum_to_one():
    rng = np.random.default_rng(2)
    w = asgscore.contribution_weights(rng.normal(size=(5, 6)),
                                      rng.normal(size=(40, 6)), top_k=7)
    assert w.shape == (5, 40)
    np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
    assert np.all((w > 0).sum(axis=1) <= 7)


def test_eer_fixture():
    rate, _ = asgscore.eer([0.9, 0.8, 0.3], [0.7, 0.2, 0.1])
    assert rate == 1.0 / 3.0


def test_synth_round_trip(tmp_path):
    ids, speakers, vectors = asgscore.generate_speakers(speakers=5, utts=3,
                                                        dim=4, seed=3)
    assert vectors.shape == (15, 4)
    assert len(set(speakers)) == 5
    stem = str(tmp_path / "emb")
    asgscore.save_embeddings(stem, ids, speakers, vectors)
    ids2, speakers2, vectors2 = asgscore.load_embeddings(stem)
    assert ids2 == ids and speakers2 == speakers
    np.testing.assert_array_equal(vectors2, vectors)


def test_s_norm_matches_numpy():
    rng = np.random.default_rng(4)
    cohort = rng.normal(size=(12, 5))
    enroll, test = rng.normal(size=(3, 5)), rng.normal(size=(3, 5))
    raw = [asgscore.cosine(e, t) for e, t in zip(enroll, test)]
    unit = cohort / np.linalg.norm(cohort, axis=1, keepdims=True)

    def stats(v):
        s = unit @ (v / np.linalg.norm(v))
        return s.mean(), s.std()

    expected = []
    for r, e, t in zip(raw, enroll, test):
        (me, se), (mt, st) = stats(e), stats(t)
        expected.append(0.5 * ((r - me) / se + (r - mt) / st))
    np.testing.assert_allclose(
        asgscore.cohort_normalize(raw, enroll, test, cohort, "s"), expected,
        atol=1e-12)


def test_train_ghosts_and_trained_scoring():
    ids, speakers, vectors = asgscore.generate_speakers(speakers=8, utts=5,
                                                        dim=6, seed=5)
    ghosts, params, history = asgscore.train_ghosts(
        speakers, vectors, num_ghosts=4, steps=5, groups=2, lr=0.01)
    assert ghosts.shape == (4, 6)
    assert len(history) == 5 and all(math.isfinite(x) for x in history)
    assert params.dim == 6
    score = asgscore.pair_score(vectors[:1], vectors[1:2], ghosts,
                                edge_mode="trained", params=params)
    assert math.isfinite(score)


def test_errors_raise():
    with pytest.raises(asgscore.AsgError):
        asgscore.cosine([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        asgscore.pair_score(np.ones((1, 3)), np.ones((1, 3)), np.ones((2, 3)),
                            edge_mode="trained")
