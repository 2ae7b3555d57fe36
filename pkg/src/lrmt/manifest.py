"""Experiment manifests: which languages, resources, configs and backend to run.

A manifest is a YAML (or JSON) mapping; relative paths resolve against the
manifest's own directory. See ``examples/manifest.yaml`` in the repository for
a complete example.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .corpus import (
    ENGLISH,
    GrammarMeta,
    LanguageResources,
    load_dictionary,
    load_grammar_book,
    load_parallel_corpus,
    split_dev_corpus,
)
from .errors import ManifestError
from .llm import BackendConfig
from .prompt import CONFIG_LABELS
from .scoring import ChrfParams

DIRECTIONS = ("eng-X", "X-eng")


def direction_langs(direction: str, lang: str) -> tuple[str, str]:
    if direction == "eng-X":
        return ENGLISH, lang
    if direction == "X-eng":
        return lang, ENGLISH
    raise ManifestError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")


@dataclass(frozen=True)
class DictionarySpec:
    path: Path
    size: Optional[int] = None


@dataclass(frozen=True)
class LanguageSpec:
    code: str
    display_name: str
    dev: tuple[Path, Path]
    devtest: Optional[tuple[Path, Path]] = None
    split_dev: Optional[int] = None
    dictionary_fwd: Optional[DictionarySpec] = None
    dictionary_rev: Optional[DictionarySpec] = None
    grammar: Optional[Path] = None
    grammar_meta: GrammarMeta = GrammarMeta()
    opus_sentences: Optional[int] = None
    nllb: dict = field(default_factory=dict)

    def paths(self) -> list[tuple[str, Path]]:
        out = [("dev source", self.dev[0]), ("dev target", self.dev[1])]
        if self.devtest:
            out += [("devtest source", self.devtest[0]), ("devtest target", self.devtest[1])]
        if self.dictionary_fwd:
            out.append(("dictionary eng-X", self.dictionary_fwd.path))
        if self.dictionary_rev:
            out.append(("dictionary X-eng", self.dictionary_rev.path))
        if self.grammar:
            out.append(("grammar", self.grammar))
        return out


@dataclass(frozen=True)
class ExperimentManifest:
    languages: tuple[LanguageSpec, ...]
    directions: tuple[str, ...] = DIRECTIONS
    configs: tuple[str, ...] = CONFIG_LABELS
    backend: BackendConfig = BackendConfig(backend_kind="mock", model_name="mock-identity")
    eval_params: ChrfParams = ChrfParams()
    output_dir: Path = Path("runs")
    seed: int = 1234
    prompt: dict = field(default_factory=dict)
    n_resamples: int = 1000
    max_sentences: Optional[int] = None
    max_in_flight: int = 4
    source: Optional[Path] = None

    def language(self, code: str) -> LanguageSpec:
        for spec in self.languages:
            if spec.code == code:
                return spec
        raise ManifestError(f"language {code!r} is not in the manifest")


def _path(base: Path, value) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def _pair(base: Path, value, what: str) -> tuple[Path, Path]:
    if isinstance(value, dict):
        try:
            return _path(base, value["source"]), _path(base, value["target"])
        except KeyError as exc:
            raise ManifestError(f"{what}: missing {exc.args[0]!r}") from None
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return _path(base, value[0]), _path(base, value[1])
    raise ManifestError(f"{what}: expected {{source, target}} paths")


def _dictionary(base: Path, value, what: str) -> Optional[DictionarySpec]:
    if value is None:
        return None
    if isinstance(value, str):
        return DictionarySpec(_path(base, value))
    if isinstance(value, dict) and "path" in value:
        size = value.get("size")
        return DictionarySpec(_path(base, value["path"]), int(size) if size is not None else None)
    raise ManifestError(f"{what}: expected a path or {{path, size}}")


def _language(base: Path, raw: dict) -> LanguageSpec:
    if not isinstance(raw, dict) or "code" not in raw:
        raise ManifestError("every language needs a 'code'")
    code = raw["code"]
    if "dev" not in raw:
        raise ManifestError(f"{code}: a 'dev' corpus is required")
    grammar = raw.get("grammar")
    grammar_path, meta = None, GrammarMeta()
    if isinstance(grammar, str):
        grammar_path = _path(base, grammar)
    elif isinstance(grammar, dict):
        grammar_path = _path(base, grammar["path"])
        meta = GrammarMeta(tokens=grammar.get("tokens"), perplexity=grammar.get("perplexity"),
                           citation=grammar.get("citation", ""))
    elif grammar is not None:
        raise ManifestError(f"{code}: grammar must be a path or a mapping")
    return LanguageSpec(
        code=code,
        display_name=raw.get("display_name", code),
        dev=_pair(base, raw["dev"], f"{code}.dev"),
        devtest=_pair(base, raw["devtest"], f"{code}.devtest") if raw.get("devtest") else None,
        split_dev=raw.get("split_dev"),
        dictionary_fwd=_dictionary(base, raw.get("dictionary_fwd"), f"{code}.dictionary_fwd"),
        dictionary_rev=_dictionary(base, raw.get("dictionary_rev"), f"{code}.dictionary_rev"),
        grammar=grammar_path,
        grammar_meta=meta,
        opus_sentences=raw.get("opus_sentences"),
        nllb=dict(raw.get("nllb") or {}),
    )


def parse_manifest(data: dict, base_dir: Path = Path("."), source: Optional[Path] = None) -> ExperimentManifest:
    if not isinstance(data, dict):
        raise ManifestError("manifest must be a mapping")
    langs = data.get("languages") or []
    if not langs:
        raise ManifestError("manifest lists no languages")
    languages = tuple(_language(base_dir, raw) for raw in langs)
    codes = [spec.code for spec in languages]
    if len(set(codes)) != len(codes):
        raise ManifestError("duplicate language codes in manifest")

    configs = tuple(data.get("configs") or CONFIG_LABELS)
    bad = [c for c in configs if c not in CONFIG_LABELS]
    if bad:
        raise ManifestError(f"unknown config label(s) {bad}; expected {list(CONFIG_LABELS)}")
    directions = tuple(data.get("directions") or DIRECTIONS)
    bad = [d for d in directions if d not in DIRECTIONS]
    if bad:
        raise ManifestError(f"unknown direction(s) {bad}; expected {list(DIRECTIONS)}")

    backend_raw = dict(data.get("backend") or {"kind": "mock", "model_name": "mock-identity"})
    for key in ("cache_dir", "fixture_path"):
        if backend_raw.get(key):
            backend_raw[key] = str(_path(base_dir, backend_raw[key]))
    try:
        backend = BackendConfig.from_dict(backend_raw)
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"backend: {exc}") from None

    eval_raw = dict(data.get("eval") or {})
    n_resamples = int(eval_raw.pop("n_resamples", 1000))
    try:
        params = ChrfParams(**eval_raw)
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"eval: {exc}") from None

    return ExperimentManifest(
        languages=languages,
        directions=directions,
        configs=configs,
        backend=backend,
        eval_params=params,
        output_dir=_path(base_dir, data.get("output_dir", "runs")),
        seed=int(data.get("seed", 1234)),
        prompt=dict(data.get("prompt") or {}),
        n_resamples=n_resamples,
        max_sentences=data.get("max_sentences"),
        max_in_flight=int(data.get("max_in_flight", 4)),
        source=source,
    )


def load_manifest(path) -> ExperimentManifest:
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest {path} does not exist")
    text = path.read_text(encoding="utf-8")
    try:
        data: Any = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ManifestError(f"{path}: cannot parse manifest: {exc}") from None
    if data is None:
        raise ManifestError(f"{path}: manifest is empty")
    return parse_manifest(data, path.parent, path)


def load_language(spec: LanguageSpec, seed: int) -> LanguageResources:
    """Load every resource of one language; raises on the first problem."""
    corpus = load_parallel_corpus(spec.dev[0], spec.dev[1], "dev", lang=spec.code)
    if spec.devtest:
        corpus = corpus.merged(load_parallel_corpus(spec.devtest[0], spec.devtest[1], "devtest", lang=spec.code))
    elif spec.split_dev is not None:
        dev, devtest = split_dev_corpus(corpus, int(spec.split_dev), seed)
        corpus = dev.merged(devtest)
    fwd = rev = None
    if spec.dictionary_fwd:
        fwd = load_dictionary(spec.dictionary_fwd.path, ENGLISH, spec.code, spec.dictionary_fwd.size)
    if spec.dictionary_rev:
        rev = load_dictionary(spec.dictionary_rev.path, spec.code, ENGLISH, spec.dictionary_rev.size)
    grammar = load_grammar_book(spec.grammar, spec.code, spec.grammar_meta) if spec.grammar else None
    return LanguageResources(spec.code, corpus, spec.display_name, fwd, rev, grammar)
