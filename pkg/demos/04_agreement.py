#!/usr/bin/env python3
"""Inter-annotator agreement: accuracy, directional F1, and Cohen's kappa."""

import numpy as np

from zoneseg import (
    AnnotatedEmail,
    Corpus,
    agreement_report,
    builtin_taxonomy,
    cohens_kappa,
    generate_synthetic_corpus,
    render_agreement_table,
)

print("hand example: a=[A,A,B,B] vs b=[A,A,B,A] ->", cohens_kappa(list("AABB"), list("AABA")))

gmane15 = builtin_taxonomy("gmane15")
a1 = generate_synthetic_corpus(60, gmane15, seed=7)

# Simulate a second annotator who disagrees on ~7% of lines.
rng = np.random.default_rng(7)
zones = list(gmane15.zones)
relabeled = []
for annotated in a1.emails:
    new_zones = [
        zones[(zones.index(z) + 1) % len(zones)] if rng.random() < 0.07 else z
        for z in annotated.zones
    ]
    relabeled.append(
        AnnotatedEmail(email=annotated.email, zones=tuple(new_zones), annotator="a2")
    )
a2 = Corpus(name="annotator2", taxonomy=gmane15, emails=tuple(relabeled))

reports = {}
for lang in sorted({a.email.lang for a in a1.emails}):
    ids = {a.email.id for a in a1.emails if a.email.lang == lang}
    sub1 = Corpus(name="a1", taxonomy=gmane15,
                  emails=tuple(a for a in a1.emails if a.email.id in ids))
    sub2 = Corpus(name="a2", taxonomy=gmane15,
                  emails=tuple(a for a in a2.emails if a.email.id in ids))
    reports[lang] = agreement_report(sub1, sub2)
reports["all"] = agreement_report(a1, a2)

print()
print(render_agreement_table(reports))
