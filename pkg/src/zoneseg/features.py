"""Hand-crafted per-line features: a small, fast, deterministic encoder.

Each line maps to a fixed-order vector of graphic, orthographic, and
lexical cues. All entries lie in [0, 1]: flags are 0/1, fractions are
per-character ratios, and counts are divided by the caps below.

Feature order (``FEATURE_NAMES``):

  0 quote_depth        leading ">" count, spaces between markers ignored, /8
  1 is_empty           line == ""
  2 is_sig_delimiter   line is exactly "--" or "-- "
  3 is_separator       matches ^[-_=*.]{3,}\\s*$
  4 leading_ws         leading space/tab count, /16
  5 length             character count, capped at 200, /200
  6 digit_frac         decimal digits / length
  7 punct_frac         ASCII punctuation / length
  8 upper_frac         uppercase letters / length
  9 has_at             "@" anywhere in the line
 10 has_url            "://" anywhere in the line
 11 ends_colon         last character is ":"
 12 greeting_hit       lowercased line starts with a greeting term
 13 closing_hit        lowercased line starts with a closing term
 14 code_frac          characters from {}[]();=<> / length
 15 tab_count          "\\t" count, /8

The greeting and closing lexicons cover English, Portuguese, Spanish,
and French salutation/sign-off conventions.
"""

from __future__ import annotations

import re
import string

import numpy as np

FEATURE_NAMES = (
    "quote_depth",
    "is_empty",
    "is_sig_delimiter",
    "is_separator",
    "leading_ws",
    "length",
    "digit_frac",
    "punct_frac",
    "upper_frac",
    "has_at",
    "has_url",
    "ends_colon",
    "greeting_hit",
    "closing_hit",
    "code_frac",
    "tab_count",
)

FEATURE_DIM = len(FEATURE_NAMES)

QUOTE_DEPTH_CAP = 8
LEADING_WS_CAP = 16
LENGTH_CAP = 200
TAB_CAP = 8

SEPARATOR_RE = re.compile(r"^[-_=*.]{3,}\s*$")
_CODE_SYMBOLS = frozenset("{}[]();=<>")
_PUNCTUATION = frozenset(string.punctuation)

GREETING_TERMS = (
    "hello",
    "hi",
    "hey",
    "dear",
    "good morning",
    "good afternoon",
    "greetings",
    "olá",
    "ola",
    "bom dia",
    "boa tarde",
    "caro",
    "cara",
    "prezado",
    "prezada",
    "hola",
    "buenos días",
    "buenos dias",
    "buenas tardes",
    "estimado",
    "estimada",
    "bonjour",
    "bonsoir",
    "salut",
    "cher",
    "chère",
    "chere",
)

CLOSING_TERMS = (
    "regards",
    "best regards",
    "kind regards",
    "best",
    "cheers",
    "thanks",
    "thank you",
    "sincerely",
    "yours",
    "cumprimentos",
    "obrigado",
    "obrigada",
    "atenciosamente",
    "abraço",
    "abraco",
    "saludos",
    "gracias",
    "un saludo",
    "atentamente",
    "cordialement",
    "merci",
    "amicalement",
    "bien à vous",
    "bien a vous",
    "à bientôt",
    "a bientot",
)


def _lexicon_prefix_hit(lowered: str, terms: tuple[str, ...]) -> bool:
    # A term only counts at the start of the line and on a word boundary,
    # so "hit the deadline" does not trigger on "hi".
    for term in terms:
        if lowered.startswith(term):
            if len(lowered) == len(term) or not lowered[len(term)].isalnum():
                return True
    return False


def quote_depth(line: str) -> int:
    """Number of leading ">" markers, ignoring spaces between them."""
    depth = 0
    for ch in line:
        if ch == ">":
            depth += 1
        elif ch == " ":
            continue
        else:
            break
    return depth


def feature_vector(line: str) -> np.ndarray:
    """Encode one line as a ``FEATURE_DIM`` float64 vector in [0, 1].

    Pure function: identical lines always yield identical vectors. The
    line must not contain LF or CR.
    """
    n = len(line)
    vec = np.zeros(FEATURE_DIM, dtype=np.float64)
    vec[0] = min(quote_depth(line), QUOTE_DEPTH_CAP) / QUOTE_DEPTH_CAP
    vec[1] = 1.0 if n == 0 else 0.0
    vec[2] = 1.0 if line in ("--", "-- ") else 0.0
    vec[3] = 1.0 if SEPARATOR_RE.match(line) else 0.0
    leading_ws = n - len(line.lstrip(" \t"))
    vec[4] = min(leading_ws, LEADING_WS_CAP) / LEADING_WS_CAP
    vec[5] = min(n, LENGTH_CAP) / LENGTH_CAP
    if n > 0:
        vec[6] = sum(ch.isdigit() for ch in line) / n
        vec[7] = sum(ch in _PUNCTUATION for ch in line) / n
        vec[8] = sum(ch.isupper() for ch in line) / n
        vec[14] = sum(ch in _CODE_SYMBOLS for ch in line) / n
    vec[9] = 1.0 if "@" in line else 0.0
    vec[10] = 1.0 if "://" in line else 0.0
    vec[11] = 1.0 if line.endswith(":") else 0.0
    lowered = line.strip().lower()
    vec[12] = 1.0 if _lexicon_prefix_hit(lowered, GREETING_TERMS) else 0.0
    vec[13] = 1.0 if _lexicon_prefix_hit(lowered, CLOSING_TERMS) else 0.0
    vec[15] = min(line.count("\t"), TAB_CAP) / TAB_CAP
    return vec
