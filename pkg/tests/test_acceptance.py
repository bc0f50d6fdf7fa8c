"""Acceptance suite: one test per release criterion, at pinned tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.
"""

import json
import struct
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import random_crf_instance, random_model
from oracles import (
    brute_force_log_partition,
    brute_force_viterbi,
    max_rel_err,
    numeric_grad,
)
from zoneseg import (
    FeatureEncoder,
    LembMagicError,
    LembTruncatedError,
    LembVersionError,
    SplitSpec,
    TrainConfig,
    builtin_taxonomy,
    cohens_kappa,
    evaluate,
    generate_synthetic_corpus,
    load_embedding_file,
    read_corpus,
    split_corpus,
    train_on_corpora,
    write_corpus,
    write_embedding_file,
)
from zoneseg.cli import main
from zoneseg.corpus import corpus_bytes
from zoneseg.crf import crf_log_partition, crf_marginals, crf_nll_and_grad, crf_viterbi
from zoneseg.lstm import (
    bilstm_backward,
    bilstm_forward,
    bilstm_forward_cached,
    lstm_cell_backward,
    lstm_cell_forward,
)
from zoneseg.model import TENSOR_ORDER, predict

GMANE15 = builtin_taxonomy("gmane15")


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE FAIL: {name}")
        raise
    print(f"ACCEPTANCE PASS: {name}")


def test_crf_oracle_equivalence():
    with criterion("CRF oracle equivalence (200 instances, 1e-10, exact Viterbi)"):
        started = time.perf_counter()
        rng = np.random.default_rng(2024)
        for case in range(200):
            emissions, trans, start, end = random_crf_instance(
                rng, max_len=5, max_labels=4, integer=(case % 3 == 0)
            )
            log_z = crf_log_partition(emissions, trans, start, end)
            assert abs(log_z - brute_force_log_partition(emissions, trans, start, end)) <= 1e-10
            labels, score = crf_viterbi(emissions, trans, start, end)
            oracle_labels, oracle_score = brute_force_viterbi(emissions, trans, start, end)
            assert labels == oracle_labels
            assert score == pytest.approx(oracle_score, abs=1e-9)
        elapsed = time.perf_counter() - started
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def _gradient_instances(n=50, seed=77):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        input_dim = int(rng.integers(2, 4))
        hidden = int(rng.integers(2, 4))
        n_labels = int(rng.integers(2, 4))
        length = int(rng.integers(1, 5))
        params = random_model(rng, input_dim=input_dim, hidden=hidden, n_labels=n_labels)
        x = rng.uniform(-1, 1, (length, input_dim))
        gold = rng.integers(0, n_labels, size=length)
        yield rng, params, x, gold


def test_gradient_suite():
    with criterion("Gradient suite (cell, BiLSTM+projection, CRF NLL; rel err < 1e-4)"):
        started = time.perf_counter()
        for rng, params, x, gold in _gradient_instances():
            hidden = params.hidden
            dim = params.input_dim

            # LSTM cell against central differences.
            wx, wh, b = params.lstm_fw_wx, params.lstm_fw_wh, params.lstm_fw_b
            x0 = x[0]
            h_prev = rng.uniform(-1, 1, hidden)
            c_prev = rng.uniform(-1, 1, hidden)
            r_h = rng.uniform(0.5, 1.5, hidden) * rng.choice([-1, 1], hidden)
            r_c = rng.uniform(0.5, 1.5, hidden) * rng.choice([-1, 1], hidden)
            _, _, cache = lstm_cell_forward(wx, wh, b, x0, h_prev, c_prev)
            dwx, dwh, db, _, _ = lstm_cell_backward(wx, wh, cache, r_h, r_c)

            def cell_loss(arr, which):
                parts = {"wx": wx, "wh": wh, "b": b}
                parts[which] = arr
                h, c, _ = lstm_cell_forward(
                    parts["wx"], parts["wh"], parts["b"], x0, h_prev, c_prev
                )
                return float(r_h @ h + r_c @ c)

            assert max_rel_err(dwx, numeric_grad(lambda a: cell_loss(a, "wx"), wx.copy())) < 1e-4
            assert max_rel_err(dwh, numeric_grad(lambda a: cell_loss(a, "wh"), wh.copy())) < 1e-4
            assert max_rel_err(db, numeric_grad(lambda a: cell_loss(a, "b"), b.copy())) < 1e-4

            # BiLSTM + projection against central differences.
            r = rng.uniform(0.5, 1.5, (x.shape[0], params.n_labels)) * rng.choice(
                [-1, 1], (x.shape[0], params.n_labels)
            )
            _, fwd_cache = bilstm_forward_cached(params, x, train_mode=False)
            grads = bilstm_backward(params, fwd_cache, r)
            for name in ("lstm_fw_wx", "lstm_bw_wh", "lstm_fw_b", "proj_w", "proj_b"):
                def bilstm_loss(arr, name=name):
                    probe = params.copy()
                    setattr(probe, name, arr)
                    return float(np.sum(bilstm_forward(probe, x) * r))

                numeric = numeric_grad(bilstm_loss, getattr(params, name).copy())
                assert max_rel_err(grads[name], numeric) < 1e-4, name

            # CRF NLL against central differences.
            emissions = rng.uniform(-2, 2, (x.shape[0], params.n_labels))
            trans = params.crf_trans
            start, end = params.crf_start, params.crf_end
            _, d_em, d_trans, d_start, d_end = crf_nll_and_grad(
                emissions, trans, start, end, gold
            )

            def nll(em=emissions, tr=trans, st=start, en=end):
                return crf_nll_and_grad(em, tr, st, en, gold)[0]

            assert max_rel_err(d_em, numeric_grad(lambda a: nll(em=a), emissions.copy())) < 1e-4
            assert max_rel_err(d_trans, numeric_grad(lambda a: nll(tr=a), trans.copy())) < 1e-4
            assert max_rel_err(d_start, numeric_grad(lambda a: nll(st=a), start.copy())) < 1e-4
            assert max_rel_err(d_end, numeric_grad(lambda a: nll(en=a), end.copy())) < 1e-4
        elapsed = time.perf_counter() - started
        assert elapsed < 60.0, f"took {elapsed:.1f}s"


def test_marginal_normalization():
    with criterion("Marginal normalization (sum to 1 within 1e-8)"):
        for rng, params, x, gold in _gradient_instances():
            emissions = rng.uniform(-2, 2, (x.shape[0], params.n_labels))
            unary, pairwise, _ = crf_marginals(
                emissions, params.crf_trans, params.crf_start, params.crf_end
            )
            assert np.all(np.abs(unary.sum(axis=1) - 1.0) <= 1e-8)
            if pairwise.shape[0]:
                sums = pairwise.reshape(pairwise.shape[0], -1).sum(axis=1)
                assert np.all(np.abs(sums - 1.0) <= 1e-8)


def test_capacity_check(tmp_path):
    with criterion("Capacity check (8 emails to 100% within 300 epochs, bitwise runs)"):
        started = time.perf_counter()
        corpus = generate_synthetic_corpus(8, GMANE15, seed=101)
        corpus_path = tmp_path / "cap.jsonl"
        write_corpus(corpus, corpus_path)
        models = []
        for run in range(2):
            model_path = tmp_path / f"cap-{run}.zsm"
            code = main(
                [
                    "train",
                    "--train", str(corpus_path),
                    "--dev", str(corpus_path),
                    "--model-out", str(model_path),
                    "--epochs", "300",
                    "--patience", "300",
                    "--seed", "7",
                ]
            )
            assert code == 0
            models.append(model_path.read_bytes())
        log = json.loads((tmp_path / "cap-1.zsm.trainlog.json").read_text())
        assert log["best_dev_accuracy"] == 1.0
        assert log["best_epoch"] <= 300
        assert models[0] == models[1], "seeded runs are not bitwise identical"
        # The trained model really does reproduce its own training labels.
        encoder = FeatureEncoder()
        from zoneseg import load_model

        params = load_model(tmp_path / "cap-0.zsm")
        for a in corpus.emails:
            labels = predict(params, encoder.encode_email(a.email))
            assert [GMANE15.zones[i] for i in labels] == list(a.zones)
        elapsed = time.perf_counter() - started
        assert elapsed < 120.0, f"took {elapsed:.1f}s"


def test_generalization_check():
    with criterion("Generalization (accuracy >= 0.95, quotation recall >= 0.98)"):
        train_full = generate_synthetic_corpus(200, GMANE15, seed=1001)
        held_out = generate_synthetic_corpus(50, GMANE15, seed=2002)
        train_part, dev_part, _ = split_corpus(train_full, SplitSpec(0.9, 0.1, 0.0, seed=5))
        encoder = FeatureEncoder()
        result = train_on_corpora(
            train_part, dev_part, encoder, TrainConfig(epochs=100, patience=15, seed=7)
        )
        from zoneseg import AnnotatedEmail, Corpus

        predicted = []
        for a in held_out.emails:
            labels = predict(result.params, encoder.encode_email(a.email))
            predicted.append(
                AnnotatedEmail(
                    email=a.email, zones=tuple(GMANE15.zones[i] for i in labels)
                )
            )
        report = evaluate(held_out.emails, predicted, GMANE15)
        print(
            f"  generalization: accuracy {report.accuracy:.4f}, "
            f"quotation recall {report.per_zone['quotation'].recall:.4f}"
        )
        assert report.accuracy >= 0.95
        assert report.per_zone["quotation"].recall >= 0.98


def test_cross_domain_harness(tmp_path):
    with criterion("Cross-domain harness (domain A -> domain B, mapped reports)"):
        train_a = tmp_path / "train-a.jsonl"
        dev_a = tmp_path / "dev-a.jsonl"
        test_b = tmp_path / "test-b.jsonl"
        assert main(["synth", "--n", "40", "--seed", "11", "--domain", "a", "--out", str(train_a)]) == 0
        assert main(["synth", "--n", "10", "--seed", "12", "--domain", "a", "--out", str(dev_a)]) == 0
        assert main(["synth", "--n", "15", "--seed", "13", "--domain", "b", "--out", str(test_b)]) == 0

        model = tmp_path / "domain-a.zsm"
        assert main(
            [
                "train",
                "--train", str(train_a),
                "--dev", str(dev_a),
                "--model-out", str(model),
                "--epochs", "40",
                "--patience", "10",
                "--seed", "3",
            ]
        ) == 0

        predictions = tmp_path / "pred-b.jsonl"
        assert main(
            ["predict", "--model", str(model), "--input", str(test_b), "--out", str(predictions)]
        ) == 0

        summary = {"train_corpus": "synth-a", "test_corpus": "synth-b"}
        for target, zone_count in (("two2", 2), ("two5", 5)):
            report_path = tmp_path / f"report-{target}.json"
            assert main(
                [
                    "evaluate",
                    "--gold", str(test_b),
                    "--pred", str(predictions),
                    "--map-taxonomy", target,
                    "--report-out", str(report_path),
                ]
            ) == 0
            doc = json.loads(report_path.read_text())
            target_zones = list(builtin_taxonomy(target).zones)
            assert doc["zones"] == target_zones, "taxonomy mapping not applied"
            assert set(doc["per_zone"]) == set(target_zones)
            assert len(doc["confusion"]) == zone_count
            assert 0.0 <= doc["accuracy"] <= 1.0
            for scores in doc["per_zone"].values():
                assert set(scores) == {"recall", "precision", "f1", "support"}
            summary[f"accuracy_{zone_count}_zones"] = doc["accuracy"]
        print(f"  cross-domain report: {json.dumps(summary)}")


def test_metrics_identities():
    with criterion("Metrics identities (kappa 0.5 / perfect agreement / trace check)"):
        assert cohens_kappa(list("AABB"), list("AABA")) == pytest.approx(0.5)

        from zoneseg import agreement_report

        corpus = generate_synthetic_corpus(12, GMANE15, seed=55)
        agreement = agreement_report(corpus, corpus)
        assert agreement.kappa == 1.0
        assert agreement.accuracy == 1.0
        assert agreement.f1_a1a2 == 1.0 and agreement.f1_a2a1 == 1.0

        rng = np.random.default_rng(56)
        from zoneseg import AnnotatedEmail, Email

        zones = GMANE15.zones
        gold, pred = [], []
        for i in range(30):
            n = int(rng.integers(1, 9))
            lines = tuple("x" for _ in range(n))
            gold.append(
                AnnotatedEmail(
                    email=Email(id=f"m{i}", lang="en", lines=lines),
                    zones=tuple(zones[j] for j in rng.integers(0, len(zones), n)),
                )
            )
            pred.append(
                AnnotatedEmail(
                    email=Email(id=f"m{i}", lang="en", lines=lines),
                    zones=tuple(zones[j] for j in rng.integers(0, len(zones), n)),
                )
            )
        report = evaluate(gold, pred, GMANE15)
        assert report.accuracy == np.trace(report.confusion) / report.n_lines


def test_format_round_trips(tmp_path):
    with criterion("Format round trips (corpus + LEMB byte-exact, corrupt LEMB rejected)"):
        corpus = generate_synthetic_corpus(6, GMANE15, seed=8)
        corpus_path = tmp_path / "c.jsonl"
        write_corpus(corpus, corpus_path)
        first_bytes = corpus_path.read_bytes()
        reloaded = read_corpus(corpus_path)
        assert corpus_bytes(reloaded) == first_bytes
        assert reloaded.emails == corpus.emails

        rng = np.random.default_rng(9)
        entries = [
            (a.email.id, rng.standard_normal((len(a.email.lines), 6)).astype(np.float32))
            for a in corpus.emails
        ]
        lemb_path = tmp_path / "c.lemb"
        write_embedding_file(lemb_path, entries)
        loaded = load_embedding_file(lemb_path)
        for email_id, rows in entries:
            assert np.max(np.abs(loaded.email_rows(email_id) - rows)) == 0.0
        copy_path = tmp_path / "copy.lemb"
        write_embedding_file(copy_path, [(i, loaded.email_rows(i)) for i in loaded.index])
        assert copy_path.read_bytes() == lemb_path.read_bytes()

        blob = bytearray(lemb_path.read_bytes())
        bad_magic = tmp_path / "bad-magic.lemb"
        bad_magic.write_bytes(b"XXXX" + bytes(blob[4:]))
        (tmp_path / "bad-magic.lemb.idx.jsonl").write_bytes(
            (tmp_path / "c.lemb.idx.jsonl").read_bytes()
        )
        with pytest.raises(LembMagicError):
            load_embedding_file(bad_magic)

        bad_version = tmp_path / "bad-version.lemb"
        bad_version.write_bytes(bytes(blob[:4]) + struct.pack("<I", 99) + bytes(blob[8:]))
        (tmp_path / "bad-version.lemb.idx.jsonl").write_bytes(
            (tmp_path / "c.lemb.idx.jsonl").read_bytes()
        )
        with pytest.raises(LembVersionError):
            load_embedding_file(bad_version)

        truncated = tmp_path / "trunc.lemb"
        truncated.write_bytes(bytes(blob[:-10]))
        (tmp_path / "trunc.lemb.idx.jsonl").write_bytes(
            (tmp_path / "c.lemb.idx.jsonl").read_bytes()
        )
        with pytest.raises(LembTruncatedError):
            load_embedding_file(truncated)
