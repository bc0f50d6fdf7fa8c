import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zoneseg import (
    AnnotatedEmail,
    Corpus,
    Email,
    Taxonomy,
    ValidationError,
    agreement_report,
    builtin_taxonomy,
    cohens_kappa,
    evaluate,
    generate_synthetic_corpus,
    render_agreement_table,
    render_eval_report,
)

GMANE15 = builtin_taxonomy("gmane15")
QP = Taxonomy(name="qp", zones=("quotation", "paragraph", "closing"))


def _annotated(i, zones, lang="en", annotator=None):
    email = Email(id=f"m{i}", lang=lang, lines=tuple("x" for _ in zones))
    return AnnotatedEmail(email=email, zones=tuple(zones), annotator=annotator)


class TestEvaluate:
    def test_identity_predictions_are_perfect(self):
        gold = [_annotated(0, ["quotation", "paragraph"]), _annotated(1, ["closing"])]
        report = evaluate(gold, gold, QP)
        assert report.accuracy == 1.0
        assert report.macro_f1 == 1.0
        for zone, scores in report.per_zone.items():
            if scores.support > 0:
                assert scores.recall == 1.0

    def test_two_out_of_three(self):
        gold = [_annotated(0, ["quotation", "quotation", "paragraph"])]
        pred = [_annotated(0, ["quotation", "paragraph", "paragraph"])]
        report = evaluate(gold, pred, QP)
        assert report.accuracy == pytest.approx(2 / 3)
        assert report.per_zone["quotation"].recall == pytest.approx(0.5)
        assert report.per_zone["paragraph"].recall == 1.0
        assert report.per_zone["paragraph"].precision == pytest.approx(0.5)

    def test_zone_absent_from_gold_has_zero_support_and_recall(self):
        gold = [_annotated(0, ["paragraph", "paragraph"])]
        pred = [_annotated(0, ["paragraph", "quotation"])]
        report = evaluate(gold, pred, QP)
        assert report.per_zone["quotation"].support == 0
        assert report.per_zone["quotation"].recall == 0.0
        assert report.per_zone["closing"].support == 0

    def test_permutation_invariant_over_email_order(self):
        gold = [_annotated(0, ["quotation"]), _annotated(1, ["paragraph", "closing"])]
        pred = [_annotated(0, ["paragraph"]), _annotated(1, ["paragraph", "closing"])]
        a = evaluate(gold, pred, QP)
        b = evaluate(list(reversed(gold)), pred, QP)
        assert a.accuracy == b.accuracy
        np.testing.assert_array_equal(a.confusion, b.confusion)

    def test_accuracy_equals_confusion_trace_over_total(self):
        rng = np.random.default_rng(0)
        zones = QP.zones
        gold, pred = [], []
        for i in range(20):
            n = int(rng.integers(1, 8))
            gold.append(_annotated(i, [zones[j] for j in rng.integers(0, 3, n)]))
            pred.append(_annotated(i, [zones[j] for j in rng.integers(0, 3, n)]))
        report = evaluate(gold, pred, QP)
        assert report.accuracy == pytest.approx(
            np.trace(report.confusion) / report.n_lines
        )
        # Per-zone recall is exactly the row-normalized confusion diagonal.
        rows = report.confusion.sum(axis=1)
        for i, zone in enumerate(QP.zones):
            expected = report.confusion[i, i] / rows[i] if rows[i] else 0.0
            assert report.per_zone[zone].recall == pytest.approx(expected)
        assert sum(s.support for s in report.per_zone.values()) == report.n_lines

    def test_id_mismatch_names_emails(self):
        gold = [_annotated(0, ["paragraph"])]
        pred = [_annotated(1, ["paragraph"])]
        with pytest.raises(ValidationError) as err:
            evaluate(gold, pred, QP)
        assert "m0" in str(err.value) or "m1" in str(err.value)

    def test_length_mismatch_names_email(self):
        gold = [_annotated(0, ["paragraph", "closing"])]
        pred = [_annotated(0, ["paragraph"])]
        with pytest.raises(ValidationError) as err:
            evaluate(gold, pred, QP)
        assert "m0" in str(err.value)

    def test_render_has_global_row_and_one_row_per_zone(self):
        gold = [_annotated(0, ["quotation", "paragraph"])]
        report = evaluate(gold, gold, QP)
        text = render_eval_report(report)
        lines = text.splitlines()
        assert lines[1].startswith("All")
        assert len(lines) == 2 + len(QP.zones)


class TestKappa:
    def test_perfect_agreement_with_two_labels(self):
        assert cohens_kappa(["a", "b", "a"], ["a", "b", "a"]) == 1.0

    def test_hand_derived_four_item_example(self):
        # p_o = 3/4, p_e = 0.5*0.75 + 0.5*0.25 = 0.5, kappa = 0.5.
        assert cohens_kappa(list("AABB"), list("AABA")) == pytest.approx(0.5)

    def test_degenerate_single_label_case(self):
        assert cohens_kappa(["a", "a"], ["a", "a"]) == 1.0

    def test_high_agreement_fixture_lands_near_reported_scale(self):
        # 7% disagreement over many labels gives kappa just under 0.93.
        rng = np.random.default_rng(1)
        zones = list(GMANE15.zones)
        a1 = [zones[i] for i in rng.integers(0, len(zones), 2000)]
        a2 = list(a1)
        flip = rng.choice(2000, size=140, replace=False)
        for i in flip:
            a2[i] = zones[(zones.index(a2[i]) + 1) % len(zones)]
        kappa = cohens_kappa(a1, a2)
        assert 0.88 <= kappa <= 0.93

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            cohens_kappa(["a"], ["a", "b"])

    @given(st.lists(st.sampled_from("abcd"), min_size=1, max_size=60))
    def test_self_agreement_is_one(self, labels):
        assert cohens_kappa(labels, labels) == pytest.approx(1.0)

    @given(
        st.lists(
            st.tuples(st.sampled_from("abcd"), st.sampled_from("abcd")),
            min_size=2,
            max_size=60,
        )
    )
    @settings(max_examples=60)
    def test_invariant_under_relabeling_bijection(self, pairs):
        a = [p[0] for p in pairs]
        b = [p[1] for p in pairs]
        relabel = {"a": "w", "b": "x", "c": "y", "d": "z"}
        mapped = cohens_kappa([relabel[x] for x in a], [relabel[x] for x in b])
        assert cohens_kappa(a, b) == pytest.approx(mapped)


class TestAgreementReport:
    def test_identical_corpora(self):
        corpus = generate_synthetic_corpus(10, GMANE15, seed=2)
        report = agreement_report(corpus, corpus)
        assert report.accuracy == 1.0
        assert report.f1_a1a2 == 1.0
        assert report.f1_a2a1 == 1.0
        assert report.kappa == 1.0

    def test_swapping_annotators_swaps_f1_directions(self):
        c1 = generate_synthetic_corpus(10, GMANE15, seed=3)
        rng = np.random.default_rng(3)
        zones = list(GMANE15.zones)
        flipped = []
        for a in c1.emails:
            new_zones = [
                zones[(zones.index(z) + 1) % len(zones)] if rng.random() < 0.2 else z
                for z in a.zones
            ]
            flipped.append(AnnotatedEmail(email=a.email, zones=tuple(new_zones)))
        c2 = Corpus(name="a2", taxonomy=c1.taxonomy, emails=tuple(flipped))
        fwd = agreement_report(c1, c2)
        rev = agreement_report(c2, c1)
        assert fwd.accuracy == rev.accuracy
        assert fwd.kappa == rev.kappa
        assert fwd.f1_a1a2 == pytest.approx(rev.f1_a2a1)
        assert fwd.f1_a2a1 == pytest.approx(rev.f1_a1a2)

    def test_total_disagreement_on_two_labels(self):
        two2 = builtin_taxonomy("two2")
        a1 = Corpus(
            name="a1",
            taxonomy=two2,
            emails=(
                AnnotatedEmail(
                    email=Email(id="m0", lang="en", lines=("x", "y")),
                    zones=("body", "body"),
                ),
            ),
        )
        a2 = Corpus(
            name="a2",
            taxonomy=two2,
            emails=(
                AnnotatedEmail(
                    email=Email(id="m0", lang="en", lines=("x", "y")),
                    zones=("other", "other"),
                ),
            ),
        )
        report = agreement_report(a1, a2)
        assert report.accuracy == 0.0

    def test_micro_f1_equals_accuracy(self):
        corpus = generate_synthetic_corpus(6, GMANE15, seed=4)
        report = agreement_report(corpus, corpus, f1_average="micro")
        assert report.f1_a1a2 == report.accuracy

    def test_render_table_shape(self):
        corpus = generate_synthetic_corpus(5, GMANE15, seed=5)
        report = agreement_report(corpus, corpus)
        text = render_agreement_table({"pt": report, "all": report})
        lines = text.splitlines()
        assert len(lines) == 5
        assert lines[1].startswith("accuracy")
        assert lines[2].startswith("F1 A1A2")
        assert lines[3].startswith("F1 A2A1")
        assert lines[4].startswith("kappa")
