"""Synthetic email generator for desk-scale experiments and tests.

Emails are assembled from a hand-written template grammar: each zone
emits lines with a distinctive surface pattern (quotation lines start
with ">", visual separators are blank lines or pure rule lines matching
``^[-_=*]{3,}$``, salutations come from a multilingual greeting lexicon,
MUA signatures follow the conventional "-- " delimiter line, and so on),
and zones follow the order typical of real emails: salutation,
paragraphs, optional technical material, closing, signature, then a
quoted block introduced by a quotation marker.

Two template domains with disjoint surface lexicons are provided:
domain "a" reads like office/project mail with C-style code snippets,
domain "b" like infrastructure/ops mail with Python-style snippets.
Generation is fully deterministic given the seed. Empty lines are
labeled ``visual_separator`` and counted like any other line.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import Corpus
from .emails import AnnotatedEmail, Email, Taxonomy
from .exceptions import ValidationError

LANGS = ("en", "pt", "es", "fr")


@dataclass(frozen=True)
class Domain:
    """Surface lexicons for one synthetic email domain."""

    name: str
    first_names: tuple[str, ...]
    last_names: tuple[str, ...]
    words: tuple[str, ...]
    greetings: dict[str, tuple[str, ...]]
    closings: dict[str, tuple[str, ...]]
    roles: tuple[str, ...]
    company: str
    host: str
    phone_prefix: str
    mailer: str
    mailer_url: str
    code_lines: tuple[str, ...]
    log_lines: tuple[str, ...]
    tech_lines: tuple[str, ...]
    table_header: str
    table_row: str
    heading_format: str
    rule_chars: str
    subjects: tuple[str, ...]


DOMAIN_A = Domain(
    name="a",
    first_names=("Ana", "João", "Marie", "Lucía", "Peter", "Sofia", "Paul", "Rita"),
    last_names=("Martins", "Silva", "Dubois", "Ortega", "Hall", "Rossi", "Weber"),
    words=(
        "the", "we", "report", "meeting", "draft", "schedule", "update", "client",
        "review", "notes", "budget", "proposal", "team", "deadline", "figures",
        "summary", "plan", "office", "contract", "invoice", "feedback", "agenda",
        "release", "minutes", "quarter", "should", "before", "friday", "final",
        "attached", "version", "document", "slides", "numbers", "confirm",
    ),
    greetings={
        "en": ("Hello", "Hi"),
        "pt": ("Olá", "Boa tarde"),
        "es": ("Hola", "Buenas tardes"),
        "fr": ("Bonjour", "Bonsoir"),
    },
    closings={
        "en": ("Regards,", "Cheers,"),
        "pt": ("Cumprimentos,", "Obrigado,"),
        "es": ("Saludos,", "Un saludo,"),
        "fr": ("Cordialement,", "Merci,"),
    },
    roles=("Project Manager", "Data Analyst", "Consultant", "Account Manager"),
    company="Acme Corp",
    host="acme.example",
    phone_prefix="+351 21",
    mailer="Mailer",
    mailer_url="https://mailer.example/get",
    code_lines=(
        "for (int i = 0; i < n; i++) {",
        "results[i] = compute(values[i]);",
        "if (count > threshold) {",
        "return normalize(buffer);",
        "}",
        "static int parse_header(char *line) {",
        "int total = 0;",
        "free(buffer);",
    ),
    log_lines=(
        "2021-03-{d:02d} {h:02d}:{m:02d}:{s:02d} INFO worker[{k}]: job {j} finished in {t} ms",
        "2021-03-{d:02d} {h:02d}:{m:02d}:{s:02d} WARN worker[{k}]: retry {k} for job {j}",
        "2021-03-{d:02d} {h:02d}:{m:02d}:{s:02d} ERROR queue: job {j} failed with code {k}",
    ),
    tech_lines=(
        "Build-ID: {hex}",
        "Version: 2.{k}.{j} (stable)",
        "Checksum: {hex}",
        "Toolchain: gcc 9.{k} lto",
    ),
    table_header="name\tcount\tstatus",
    table_row="{word}\t{j}\tok",
    heading_format="== {a} {b} ==",
    rule_chars="-=",
    subjects=("budget review", "release plan", "meeting notes", "contract draft"),
)

DOMAIN_B = Domain(
    name="b",
    first_names=("Elena", "Marc", "Nuno", "Clara", "Tom", "Iris", "Diego", "Lea"),
    last_names=("Vidal", "Petit", "Costa", "Muñoz", "Becker", "Lang", "Moreau"),
    words=(
        "server", "deploy", "cluster", "backup", "latency", "the", "we", "storage",
        "network", "monitor", "pipeline", "database", "cache", "failover",
        "metrics", "restart", "shard", "queue", "traffic", "incident", "rollout",
        "capacity", "upgrade", "node", "kernel", "during", "window", "tonight",
        "alert", "paging", "runbook", "maintenance", "replica", "snapshot",
    ),
    greetings={
        "en": ("Dear", "Good morning"),
        "pt": ("Bom dia", "Caro"),
        "es": ("Estimado", "Buenos dias"),
        "fr": ("Cher", "Salut"),
    },
    closings={
        "en": ("Best regards,", "Thanks,"),
        "pt": ("Atenciosamente,", "Obrigada,"),
        "es": ("Atentamente,", "Gracias,"),
        "fr": ("Amicalement,", "Bien à vous,"),
    },
    roles=("Site Reliability Engineer", "Systems Administrator", "Network Engineer"),
    company="Orbit Ops",
    host="orbit.test",
    phone_prefix="+33 6",
    mailer="OrbitMail",
    mailer_url="https://orbit.test/mail",
    code_lines=(
        "def process(batch):",
        "    total = sum(len(x) for x in batch)",
        "    return total / max(1, len(batch))",
        "for item in queue:",
        "    handle(item)",
        "values = [v * scale for v in data]",
        "config = load_config(path)",
        "    retries += 1",
    ),
    log_lines=(
        "[{h:02d}:{m:02d}:{s:02d}] node{k} status=ok load={j}.{t}",
        "[{h:02d}:{m:02d}:{s:02d}] node{k} disk={j}% inodes={t}%",
        "[{h:02d}:{m:02d}:{s:02d}] lb: drained node{k} in {t}s",
    ),
    tech_lines=(
        "Kernel: 5.{k}.0-{j}-generic x86_64",
        "Uptime: {j} days",
        "Firmware: v{k}.{j}",
        "Raid: level {k}, {j} disks",
    ),
    table_header="host\tcpu\tmem",
    table_row="node{j}\t{k}%\t{t}%",
    heading_format="### {a} {b}",
    rule_chars="_*",
    subjects=("failover drill", "capacity report", "incident 4412", "upgrade window"),
)

DOMAINS = {"a": DOMAIN_A, "b": DOMAIN_B}

_MARKER_TEMPLATES = {
    "en": "On Mon, {d} Mar 2021 at {h:02d}:{m:02d}, {name} wrote:",
    "pt": "Em seg., {d} de mar. de 2021 às {h:02d}:{m:02d}, {name} escreveu:",
    "es": "El lun, {d} mar 2021 a las {h:02d}:{m:02d}, {name} escribió:",
    "fr": "Le lun. {d} mars 2021 à {h:02d}:{m:02d}, {name} a écrit :",
}


class _EmailBuilder:
    def __init__(self, rng: random.Random, domain: Domain, lang: str):
        self.rng = rng
        self.domain = domain
        self.lang = lang
        self.lines: list[str] = []
        self.zones: list[str] = []

    def add(self, zone: str, line: str):
        self.lines.append(line)
        self.zones.append(zone)

    def blank(self):
        self.add("visual_separator", "")

    def rule(self):
        ch = self.rng.choice(self.domain.rule_chars)
        self.add("visual_separator", ch * self.rng.randint(3, 24))

    def person(self) -> str:
        return (
            f"{self.rng.choice(self.domain.first_names)} "
            f"{self.rng.choice(self.domain.last_names)}"
        )

    def sentence(self, n_words: int | None = None) -> str:
        rng = self.rng
        n = n_words if n_words is not None else rng.randint(6, 12)
        words = [rng.choice(self.domain.words) for _ in range(n)]
        return words[0].capitalize() + " " + " ".join(words[1:]) + "."

    def salutation(self):
        greet = self.rng.choice(self.domain.greetings[self.lang])
        first = self.rng.choice(self.domain.first_names)
        self.add("salutation", f"{greet} {first},")

    def paragraph(self, n_lines: int):
        for _ in range(n_lines):
            self.add("paragraph", self.sentence())

    def heading(self):
        a = self.rng.choice(self.domain.words).capitalize()
        b = self.rng.choice(self.domain.words)
        self.add("section_heading", self.domain.heading_format.format(a=a, b=b))

    def closing(self):
        self.add("closing", self.rng.choice(self.domain.closings[self.lang]))

    def personal_signature(self):
        rng = self.rng
        self.add("personal_signature", self.person())
        if rng.random() < 0.7:
            self.add(
                "personal_signature",
                f"{rng.choice(self.domain.roles)}, {self.domain.company}",
            )
        if rng.random() < 0.6:
            digits = " ".join(f"{rng.randint(100, 999)}" for _ in range(2))
            self.add("personal_signature", f"{self.domain.phone_prefix} {digits}")

    def mua_signature(self):
        rng = self.rng
        self.add("mua_signature", "-- ")
        self.add(
            "mua_signature",
            f"Sent with {self.domain.mailer} {rng.randint(1, 4)}.{rng.randint(0, 9)}",
        )
        if rng.random() < 0.5:
            self.add("mua_signature", self.domain.mailer_url)

    def inline_headers(self):
        rng = self.rng
        user = rng.choice(self.domain.first_names).lower()
        self.add("inline_headers", f"From: {user}@{self.domain.host}")
        if rng.random() < 0.7:
            self.add("inline_headers", f"To: team@{self.domain.host}")
        self.add("inline_headers", f"Subject: {rng.choice(self.domain.subjects)}")

    def quotation_marker(self):
        line = _MARKER_TEMPLATES[self.lang].format(
            d=self.rng.randint(1, 28),
            h=self.rng.randint(8, 19),
            m=self.rng.randint(0, 59),
            name=self.person(),
        )
        self.add("quotation_marker", line)

    def quotation(self, n_lines: int):
        depth = 2 if self.rng.random() < 0.2 else 1
        prefix = "> " * depth
        for _ in range(n_lines):
            self.add("quotation", prefix + self.sentence())

    def code_block(self, n_lines: int):
        for _ in range(n_lines):
            self.add("raw_code", self.rng.choice(self.domain.code_lines))

    def log_block(self, n_lines: int):
        rng = self.rng
        for _ in range(n_lines):
            template = rng.choice(self.domain.log_lines)
            self.add(
                "log_data",
                template.format(
                    d=rng.randint(1, 28),
                    h=rng.randint(0, 23),
                    m=rng.randint(0, 59),
                    s=rng.randint(0, 59),
                    k=rng.randint(1, 9),
                    j=rng.randint(10, 99),
                    t=rng.randint(1, 999),
                ),
            )

    def table_block(self, n_rows: int):
        rng = self.rng
        self.add("tabular", self.domain.table_header)
        for _ in range(n_rows):
            self.add(
                "tabular",
                self.domain.table_row.format(
                    word=rng.choice(self.domain.words),
                    j=rng.randint(1, 99),
                    k=rng.randint(1, 99),
                    t=rng.randint(1, 99),
                ),
            )

    def tech_block(self, n_lines: int):
        rng = self.rng
        for _ in range(n_lines):
            template = rng.choice(self.domain.tech_lines)
            hex_id = "".join(rng.choice("0123456789abcdef") for _ in range(8))
            self.add(
                "technical",
                template.format(hex=hex_id, k=rng.randint(0, 9), j=rng.randint(1, 60)),
            )

    def patch_block(self):
        rng = self.rng
        a, b = rng.randint(1, 90), rng.randint(2, 8)
        self.add("patch", f"@@ -{a},{b} +{a},{b + 1} @@")
        for _ in range(rng.randint(2, 4)):
            sign = rng.choice("+-")
            self.add("patch", sign + rng.choice(self.domain.code_lines))


def generate_email(rng: random.Random, domain: Domain, email_id: str) -> AnnotatedEmail:
    lang = rng.choice(LANGS)
    b = _EmailBuilder(rng, domain, lang)

    if rng.random() < 0.85:
        b.salutation()
        if rng.random() < 0.6:
            b.blank()
    if rng.random() < 0.12:
        b.heading()
    b.paragraph(rng.randint(1, 3))

    # Bottom-posting style: a quoted passage answered inline, mid-email.
    if rng.random() < 0.25:
        if rng.random() < 0.5:
            b.blank()
        if rng.random() < 0.5:
            b.quotation_marker()
        b.quotation(rng.randint(1, 3))
        b.paragraph(rng.randint(1, 2))

    if rng.random() < 0.3:
        if rng.random() < 0.5:
            b.blank()
        kind = rng.choices(("code", "log", "table", "tech", "patch"),
                           weights=(30, 25, 20, 15, 10))[0]
        if kind == "code":
            b.code_block(rng.randint(2, 4))
        elif kind == "log":
            b.log_block(rng.randint(2, 4))
        elif kind == "table":
            b.table_block(rng.randint(2, 3))
        elif kind == "tech":
            b.tech_block(rng.randint(2, 3))
        else:
            b.patch_block()

    if rng.random() < 0.35:
        if rng.random() < 0.5:
            b.blank()
        b.paragraph(rng.randint(1, 2))

    if rng.random() < 0.85:
        if rng.random() < 0.5:
            b.blank()
        b.closing()
    # Some MUAs append the signature at the very bottom, below the quotes.
    has_signature = rng.random() < 0.8
    personal = rng.random() < 0.55
    sig_after_quotes = rng.random() < 0.35
    if has_signature and not sig_after_quotes:
        if personal:
            b.personal_signature()
        else:
            b.mua_signature()

    if rng.random() < 0.8:
        if rng.random() < 0.6:
            b.blank()
        if rng.random() < 0.22:
            if rng.random() < 0.5:
                b.rule()
            b.inline_headers()
        # Most quoted blocks are introduced by a marker line, not all.
        if rng.random() < 0.85:
            b.quotation_marker()
        b.quotation(rng.randint(2, 6))
    if has_signature and sig_after_quotes:
        if personal:
            b.personal_signature()
        else:
            b.mua_signature()
    if rng.random() < 0.15:
        b.blank()

    email = Email(id=email_id, lang=lang, lines=tuple(b.lines))
    return AnnotatedEmail(email=email, zones=tuple(b.zones), annotator=None)


def generate_synthetic_corpus(
    n_emails: int, taxonomy: Taxonomy, seed: int, domain: str = "a"
) -> Corpus:
    """Generate ``n_emails`` synthetic annotated emails, deterministic by seed.

    Every emitted zone name must exist in ``taxonomy`` (the templates use
    the 15-zone vocabulary). ``domain`` selects the surface lexicon set,
    "a" or "b".
    """
    if n_emails < 1:
        raise ValidationError("n_emails must be >= 1")
    if domain not in DOMAINS:
        raise ValidationError(f"unknown domain {domain!r}; choose from {sorted(DOMAINS)}")
    dom = DOMAINS[domain]
    rng = random.Random(seed)
    emails = tuple(
        generate_email(rng, dom, f"synth-{domain}-{seed}-{i:04d}")
        for i in range(n_emails)
    )
    emitted = {z for a in emails for z in a.zones}
    missing = emitted - taxonomy.zone_set
    if missing:
        raise ValidationError(
            f"taxonomy {taxonomy.name!r} lacks zones required by the templates: "
            f"{sorted(missing)}"
        )
    return Corpus(name=f"synth-{domain}-{seed}", taxonomy=taxonomy, emails=emails)
