"""Published scores and resource statistics for the 16-language study.

These are constants for analysis and reporting; nothing here is recomputed.
Scores are corpus chrF++ unless stated otherwise. ``None`` marks a system that
was not run (word retrieval disabled for a too-small dictionary).
"""

from __future__ import annotations

from .analysis import FeatureRow

CONFIGS = ("baseline", "W", "W+S", "W+S+G")
DIRECTIONS = ("eng-X", "X-eng")

# code, display name, ISO 639-3
LANGUAGES = (
    ("cjk", "Chokwe"),
    ("dik", "Dinka"),
    ("gug", "Guarani"),
    ("ilo", "Ilokano"),
    ("kea", "Kabuverdianu"),
    ("kac", "Kachin"),
    ("kmb", "Kimbundu"),
    ("ltg", "Latgalian"),
    ("min", "Minangkabau"),
    ("lus", "Mizo"),
    ("wol", "Wolof"),
    ("chv", "Chuvash"),
    ("dgo", "Dogri"),
    ("git", "Gitksan"),
    ("kgv", "Kalamang"),
    ("ntu", "Natugu"),
)
DISPLAY_NAMES = dict(LANGUAGES)

_ = None
# Main results table: (baseline, W, W+S, W+S+G) per direction.
MAIN_CHRF = {
    "eng-X": {
        "cjk": (12.3, _, 21.0, 16.9),
        "dik": (8.8, _, 16.3, 11.1),
        "gug": (29.4, 20.6, 29.1, 29.0),
        "ilo": (43.1, 37.6, 45.1, 43.8),
        "kea": (39.0, 29.8, 55.9, 47.2),
        "kac": (12.5, _, 27.7, 21.2),
        "kmb": (11.6, _, 26.2, 14.4),
        "ltg": (26.0, 21.0, 37.6, 31.1),
        "min": (42.0, 28.1, 47.0, 44.3),
        "lus": (30.4, 29.7, 32.2, 30.3),
        "wol": (23.2, 15.0, 25.6, 26.0),
        "chv": (2.6, 13.7, 19.0, 16.0),
        "dgo": (5.9, _, 34.3, 24.9),
        "git": (7.8, _, 13.3, 15.9),
        "kgv": (5.1, 27.1, 41.9, 37.3),
        "ntu": (6.8, 4.5, 12.0, 17.0),
    },
    "X-eng": {
        "cjk": (22.8, _, 27.3, 25.8),
        "dik": (20.7, _, 25.0, 23.0),
        "gug": (43.4, 41.7, 42.3, 41.7),
        "ilo": (53.9, 52.1, 52.5, 53.6),
        "kea": (69.3, 66.9, 68.3, 68.4),
        "kac": (22.5, _, 25.2, 23.8),
        "kmb": (19.3, _, 24.3, 25.0),
        "ltg": (49.8, 41.1, 48.5, 50.3),
        "min": (55.1, 43.9, 51.9, 54.0),
        "lus": (36.6, 35.0, 35.6, 36.2),
        "wol": (36.4, 29.6, 31.3, 35.8),
        "chv": (25.4, 23.4, 24.2, 26.8),
        "dgo": (51.2, _, 52.4, 52.0),
        "git": (14.0, _, 24.4, 24.6),
        "kgv": (11.3, 18.7, 27.6, 34.8),
        "ntu": (13.2, 6.8, 9.9, 23.7),
    },
}

MAIN_SYSTEM_AVERAGE = {
    "eng-X": (19.2, 22.7, 30.3, 26.7),
    "X-eng": (34.1, 35.9, 35.7, 37.5),
}
MAIN_SYSTEM_WINS = {
    "eng-X": (1, 0, 12, 3),
    "X-eng": (6, 0, 4, 6),
}

NLLB_CHRF = {
    "eng-X": {"cjk": 24.3, "dik": 24.2, "gug": 36.9, "ilo": 53.3, "kea": 42.8, "kac": 37.5, "kmb": 24.9,
              "ltg": 53.6, "min": 52.4, "lus": 38.0, "wol": 29.7},
    "X-eng": {"cjk": 30.8, "dik": 31.2, "gug": 48.4, "ilo": 62.1, "kea": 68.4, "kac": 41.6, "kmb": 33.9,
              "ltg": 63.4, "min": 62.5, "lus": 41.4, "wol": 41.2},
}

# Point scores from the paired-bootstrap tables (the first number of each cell).
BOOTSTRAP_CHRF = {
    "eng-X": {
        "cjk": (12.7, _, 21.9, 17.9),
        "chv": (4.2, 13.5, 19.2, 17.2),
        "dik": (8.8, _, 17.5, 11.1),
        "dgo": (7.7, _, 34.2, 25.0),
        "git": (8.5, _, 14.1, 18.0),
        "gug": (30.1, 20.9, 30.0, 29.8),
        "ilo": (43.9, 38.4, 45.9, 44.6),
        "kea": (40.4, 30.1, 56.4, 47.7),
        "kac": (12.6, _, 27.7, 21.0),
        "kgv": (5.8, 29.2, 42.9, 38.5),
        "kmb": (11.9, _, 26.8, 15.6),
        "ltg": (28.4, 22.4, 39.7, 33.1),
        "min": (42.8, 29.0, 47.8, 45.4),
        "lus": (32.5, 29.7, 31.2, 30.4),
        "ntu": (7.1, 4.8, 13.0, 18.7),
        "wol": (24.0, 15.5, 26.3, 27.1),
    },
    "X-eng": {
        "cjk": (23.5, _, 28.1, 26.5),
        "chv": (24.0, 21.8, 22.9, 26.6),
        "dik": (21.6, _, 25.5, 24.1),
        "dgo": (52.1, _, 53.9, 52.1),
        "git": (14.3, _, 25.2, 25.7),
        "gug": (43.9, 42.2, 42.8, 42.5),
        "ilo": (53.5, 51.8, 52.7, 52.3),
        "kea": (69.5, 67.1, 68.5, 68.6),
        "kac": (22.7, _, 25.6, 23.5),
        "kgv": (11.5, 20.1, 28.4, 38.4),
        "kmb": (18.6, _, 23.8, 25.9),
        "ltg": (49.9, 40.2, 48.5, 50.3),
        "min": (55.8, 44.3, 52.5, 54.7),
        "lus": (37.0, 35.1, 35.6, 36.2),
        "ntu": (13.1, 6.4, 9.6, 23.0),
        "wol": (37.3, 30.2, 31.9, 36.7),
    },
}

OPUS_SENTENCES = {
    "lus": 6979898, "gug": 2959865, "wol": 1572603, "ilo": 1458586, "kea": 1229409, "kac": 1003100,
    "min": 303354, "cjk": 214973, "chv": 200001, "kmb": 196240, "dik": 172589, "ltg": 131709,
    "dgo": 0, "git": 0, "kgv": 0, "ntu": 0,
}

# tokens, perplexity
GRAMMAR_STATS = {
    "cjk": (114483, 23.61), "chv": (118294, 85.73), "dik": (120420, 55.57), "dgo": (53993, 22.38),
    "git": (106310, 23.22), "gug": (76725, 19.86), "ilo": (83025, 26.06), "kea": (104185, 17.08),
    "kac": (110639, 33.81), "kgv": (92009, 25.72), "kmb": (119545, 20.95), "ltg": (80567, 30.71),
    "min": (110746, 16.05), "lus": (85609, 30.96), "ntu": (80401, 21.37), "wol": (42898, 11.60),
}

# dictionary entries: (eng->X, X->eng)
DICTIONARY_SIZES = {
    "cjk": (35, 40), "chv": (3941, 3611), "dik": (10, 10), "dgo": (19, 20), "git": (17, 16),
    "gug": (3641, 3531), "ilo": (5479, 4779), "kea": (1413, 1320), "kac": (92, 105), "kgv": (1932, 2531),
    "kmb": (67, 61), "ltg": (925, 710), "min": (348, 349), "lus": (16717, 14981), "ntu": (351, 382),
    "wol": (2397, 2850),
}

# sentence source, retrieval split size, evaluation split size
SENTENCE_SPLITS = {
    "cjk": ("FLORES", 997, 1012), "chv": ("FLORES", 497, 500), "dik": ("FLORES", 997, 1012),
    "dgo": ("FLORES", 497, 500), "git": ("SIGMORPHON 2023 ST", 42, 68), "gug": ("FLORES", 997, 1012),
    "ilo": ("FLORES", 997, 1012), "kea": ("FLORES", 997, 1012), "kac": ("FLORES", 997, 1012),
    "kgv": ("MTOB", 376, 50), "kmb": ("FLORES", 997, 1012), "ltg": ("FLORES", 997, 1012),
    "min": ("FLORES", 997, 1012), "lus": ("FLORES", 997, 1012), "ntu": ("SIGMORPHON 2023 ST", 890, 99),
    "wol": ("FLORES", 997, 1012),
}

# Published R^2 for the W+S+G regression: (additive, single) per feature row.
FEATURE_R2 = {
    "eng-X": ((0.643, 0.643), (0.648, 0.054), (0.708, 0.050), (0.751, 0.177), (0.755, 0.062)),
    "X-eng": ((0.849, 0.849), (0.850, 0.007), (0.880, 0.012), (0.925, 0.141), (0.927, 0.115)),
}


def scores_by_language(direction: str, table=None) -> dict:
    """``{lang: {config: score}}`` for one direction."""
    table = MAIN_CHRF if table is None else table
    return {lang: dict(zip(CONFIGS, vals)) for lang, vals in table[direction].items()}


def feature_rows(direction: str, table=None) -> list[FeatureRow]:
    """Regression rows pairing baseline and W+S+G scores with the resource statistics."""
    table = MAIN_CHRF if table is None else table
    col = DIRECTIONS.index(direction)
    rows = []
    for lang, vals in table[direction].items():
        tokens, ppl = GRAMMAR_STATS[lang]
        rows.append(FeatureRow(
            lang=lang,
            direction=direction,
            baseline_score=vals[0],
            target_score=vals[3],
            dict_words=DICTIONARY_SIZES[lang][col],
            opus_sentences=OPUS_SENTENCES[lang],
            grammar_perplexity=ppl,
            grammar_tokens=tokens,
        ))
    return rows
