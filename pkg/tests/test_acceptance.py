"""Acceptance suite: one test per criterion, at the stated tolerances.

A per-criterion PASS/FAIL summary is printed at the end of the pytest run
(see conftest.py).
"""

import time

import numpy as np
import pytest

from hquant import (
    EmbeddingSet,
    HouseholderStack,
    ItqConfig,
    LossKind,
    SynthConfig,
    TrainConfig,
    apply_stack,
    decompose_orthogonal,
    fit,
    generate_rotated_hypercube,
    hamming_distance,
    itq_fit,
    loss_grad,
    loss_value,
    map_at_k,
    normalize,
    pack_codes,
    random_orthogonal,
    random_stack,
    read_hsh1,
    read_rot1,
    sign_binarize,
    stack_backprop,
    stack_to_matrix,
    write_hsh1,
    write_rot1,
)
from hquant.cli import main
from oracles import brute_force_map, central_diff, sample_nonboundary


@pytest.fixture(scope="module")
def hypercube_pipeline():
    """Shared sigma=0.1 recovery pipeline: synth, train, hash, evaluate."""
    t0 = time.perf_counter()
    cfg = SynthConfig(n_per_class=256, num_classes=8, k=16, noise_sigma=0.1,
                      planted_rotation_seed=5, sample_seed=6)
    train, query, db = generate_rotated_hypercube(cfg)
    stack, report = fit(train, TrainConfig(seed=1))
    m_rot = map_at_k(query, sign_binarize(query, stack), db, sign_binarize(db, stack), 100)
    m_id = map_at_k(query, sign_binarize(query), db, sign_binarize(db), 100)
    elapsed = time.perf_counter() - t0
    return {
        "train": train, "query": query, "db": db,
        "stack": stack, "report": report,
        "map_rotated": m_rot.map_at_k, "map_identity": m_id.map_at_k,
        "elapsed": elapsed,
    }


def test_criterion_01_published_table_values_out_of_scope():
    """The published absolute mAP tables require CNN training on large image
    datasets and are not reproducible at desk scale; acceptance substitutes
    the property suites below plus the synthetic end-to-end recovery test."""


def test_criterion_02_orthogonality_suite():
    t0 = time.perf_counter()
    for k in (2, 8, 16, 32, 64):
        for trial in range(100):
            u = stack_to_matrix(random_stack(k, 1000 * k + trial))
            assert np.max(np.abs(u.T @ u - np.eye(k))) < 1e-8
    assert time.perf_counter() - t0 < 10.0


def test_criterion_03_decomposition_roundtrip():
    for k in range(2, 17):
        for trial in range(100):
            u = random_orthogonal(k, 1000 * k + trial)
            stack = decompose_orthogonal(u)
            assert len(stack) <= k
            assert np.max(np.abs(stack_to_matrix(stack) - u)) < 1e-8


def test_criterion_04_inner_product_preservation():
    rng = np.random.default_rng(4)
    stack = random_stack(16, 40)
    for _ in range(1000):
        u = rng.standard_normal(16)
        w = rng.standard_normal(16)
        ru, rw = apply_stack(stack, u), apply_stack(stack, w)
        assert np.isclose(ru @ rw, u @ w, rtol=1e-6, atol=1e-9)
        cos = (u @ w) / (np.linalg.norm(u) * np.linalg.norm(w))
        rcos = (ru @ rw) / (np.linalg.norm(ru) * np.linalg.norm(rw))
        assert np.isclose(rcos, cos, rtol=1e-6, atol=1e-9)

    # cosine rankings of 50 queries against 500 database points are an exact
    # permutation match before and after rotation
    db = rng.standard_normal((500, 16))
    queries = rng.standard_normal((50, 16))
    rot_db = apply_stack(stack, db)
    rot_q = apply_stack(stack, queries)

    def rankings(qs, xs):
        sims = (qs / np.linalg.norm(qs, axis=1, keepdims=True)) @ (
            xs / np.linalg.norm(xs, axis=1, keepdims=True)
        ).T
        return np.argsort(-sims, axis=1, kind="stable"), sims

    before, sims = rankings(queries, db)
    after, _ = rankings(rot_q, rot_db)
    assert np.min(np.diff(np.sort(sims, axis=1), axis=1)) > 1e-9
    assert np.array_equal(before, after)


def test_criterion_05_gradient_checks():
    rng = np.random.default_rng(5)
    for kind in LossKind:
        for _ in range(20):
            z = sample_nonboundary(rng, (4, 8))
            numeric = central_diff(lambda zz: loss_value(kind, zz), z, step=1e-5)
            assert np.allclose(loss_grad(kind, z), numeric, rtol=1e-4, atol=1e-8)

    # full chain backprop, both against a fixed linear functional and
    # through the L2 loss itself
    for trial in range(20):
        stack = random_stack(8, 500 + trial)
        x = rng.standard_normal((4, 8)) * 2.0
        g = rng.standard_normal((4, 8))
        vg, gin = stack_backprop(stack, x, g)

        def linear(vectors):
            return float(np.sum(g * apply_stack(HouseholderStack(dim=8, vectors=vectors), x)))

        assert np.allclose(vg, central_diff(linear, np.array(stack.vectors), step=1e-5),
                           rtol=1e-4, atol=1e-8)
        assert np.allclose(
            gin,
            central_diff(lambda xx: float(np.sum(g * apply_stack(stack, xx))), x, step=1e-5),
            rtol=1e-4, atol=1e-8,
        )

        z = apply_stack(stack, x)
        if np.min(np.abs(z)) > 1e-3:  # keep the composite check off the kinks
            vg2, _ = stack_backprop(stack, x, loss_grad(LossKind.L2, z))

            def composite(vectors):
                return loss_value(
                    LossKind.L2, apply_stack(HouseholderStack(dim=8, vectors=vectors), x)
                )

            assert np.allclose(vg2, central_diff(composite, np.array(stack.vectors), step=1e-5),
                               rtol=1e-4, atol=1e-8)


def test_criterion_06_2d_closed_form_recovery():
    root2 = np.sqrt(2.0)
    pts = np.array([[root2, 0.0], [-root2, 0.0], [0.0, root2], [0.0, -root2]])
    identity_loss = loss_value(LossKind.L2, pts)
    assert np.isclose(identity_loss, 4 - 2 * root2, rtol=1e-12)  # per point
    t0 = time.perf_counter()
    _, report = fit(EmbeddingSet(pts), TrainConfig(seed=0))
    assert time.perf_counter() - t0 < 5.0
    assert report.final_loss < 1e-2


def test_criterion_07_rotated_hypercube_recovery(hypercube_pipeline):
    p = hypercube_pipeline
    train, report = p["train"], p["report"]

    # (a) trained loss beats the identity and the best of 200 random rotations
    norm = normalize(train).data
    identity_loss = loss_value(LossKind.L2, norm)
    random_losses = [
        loss_value(LossKind.L2, norm @ random_orthogonal(16, 2000 + i).T)
        for i in range(200)
    ]
    assert report.final_loss < identity_loss
    assert report.final_loss < min(random_losses)

    # (b) retrieval with the trained rotation is at least as good as identity
    assert p["map_rotated"] >= p["map_identity"]

    # (c) with sigma = 0 the recovery is exact
    t0 = time.perf_counter()
    cfg0 = SynthConfig(n_per_class=256, num_classes=8, k=16, noise_sigma=0.0,
                       planted_rotation_seed=5, sample_seed=6)
    train0, query0, db0 = generate_rotated_hypercube(cfg0)
    stack0, _ = fit(train0, TrainConfig(seed=1))
    res0 = map_at_k(query0, sign_binarize(query0, stack0), db0, sign_binarize(db0, stack0), 100)
    assert res0.map_at_k == 1.0
    assert p["elapsed"] + (time.perf_counter() - t0) < 120.0


def test_criterion_08_itq_monotone_and_pipeline_validity(hypercube_pipeline, tmp_path):
    train, query, db = (hypercube_pipeline[n] for n in ("train", "query", "db"))
    v = normalize(train).data
    objectives = [
        loss_value(LossKind.L2, v @ itq_fit(train, ItqConfig(iterations=it, seed=9)))
        for it in range(1, 51)
    ]
    assert all(b <= a + 1e-12 for a, b in zip(objectives, objectives[1:]))

    # both pipelines emit valid ROT1 / HSH1 files and share no state
    itq_stack = decompose_orthogonal(itq_fit(train, ItqConfig(iterations=50, seed=9)).T)
    for tag, stack in (("h2q", hypercube_pipeline["stack"]), ("itq", itq_stack)):
        rot_path = tmp_path / f"{tag}.rot1"
        hsh_path = tmp_path / f"{tag}.hsh1"
        write_rot1(rot_path, stack)
        write_hsh1(hsh_path, sign_binarize(db, stack))
        reloaded = read_rot1(rot_path)
        assert reloaded.dim == 16 and len(reloaded) <= 16
        assert read_hsh1(hsh_path).n == db.n
        res = map_at_k(query, sign_binarize(query, stack), db, read_hsh1(hsh_path), 100)
        assert 0.0 <= res.map_at_k <= 1.0
    assert not np.array_equal(
        read_hsh1(tmp_path / "h2q.hsh1").bits, read_hsh1(tmp_path / "itq.hsh1").bits
    )


def test_criterion_09_hamming_identity_and_map_oracle():
    rng = np.random.default_rng(9)
    for instance in range(200):
        k = int(rng.integers(2, 17))
        a = rng.integers(0, 2, size=k) * 2 - 1
        b = rng.integers(0, 2, size=k) * 2 - 1
        packed = hamming_distance(pack_codes(a[None]).bits[0], pack_codes(b[None]).bits[0], k)
        assert packed == (k - int(a @ b)) // 2

        nq, n, kk = 5, 20, 8
        q_emb = rng.standard_normal((nq, kk))
        db_emb = rng.standard_normal((n, kk))
        q_labels = [frozenset(rng.choice(5, size=int(rng.integers(1, 4)), replace=False).tolist())
                    for _ in range(nq)]
        db_labels = [frozenset(rng.choice(5, size=int(rng.integers(1, 4)), replace=False).tolist())
                     for _ in range(n)]
        q_pm1 = rng.integers(0, 2, size=(nq, kk)) * 2 - 1
        db_pm1 = rng.integers(0, 2, size=(n, kk)) * 2 - 1
        res = map_at_k(EmbeddingSet(q_emb, q_labels), pack_codes(q_pm1),
                       EmbeddingSet(db_emb, db_labels), pack_codes(db_pm1), 10)
        aps, mean_ap, _ = brute_force_map(q_emb, q_pm1, q_labels, db_emb, db_pm1, db_labels, 10)
        assert res.per_query_ap == aps  # bit-for-bit
        assert res.map_at_k == mean_ap


def test_criterion_10_performance_envelope():
    rng = np.random.default_rng(10)
    train = EmbeddingSet(rng.standard_normal((20000, 64)))
    t0 = time.perf_counter()
    stack, report = fit(train, TrainConfig(seed=0))
    fit_seconds = time.perf_counter() - t0
    assert fit_seconds < 600.0
    assert report.final_loss <= report.initial_loss

    big = EmbeddingSet(rng.standard_normal((1_000_000, 64)))
    t0 = time.perf_counter()
    codes = sign_binarize(big, stack)
    hash_seconds = time.perf_counter() - t0
    assert hash_seconds < 5.0
    assert codes.n == 1_000_000 and codes.k == 64


def test_criterion_11_seeded_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    for root in (a, b):
        assert main(["synth", "--out-prefix", f"{root}/x", "--n-per-class", "32",
                     "--classes", "4", "--bits", "8", "--sigma", "0.1",
                     "--seed", "5"]) == 0
        assert main(["fit", "--embeddings", f"{root}/x.train.emb1", "--epochs", "5",
                     "--seed", "7", "--out", f"{root}/r.rot1", "--log", f"{root}/r.log"]) == 0
        assert main(["itq", "--embeddings", f"{root}/x.train.emb1", "--iters", "10",
                     "--seed", "7", "--out", f"{root}/i.rot1"]) == 0
        assert main(["hash", "--embeddings", f"{root}/x.db.emb1",
                     "--rotation", f"{root}/r.rot1", "--out", f"{root}/h.hsh1"]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
