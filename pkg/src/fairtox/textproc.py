"""Tokenization and template-based synthetic comment generation.

Template file format (tab-separated, one template per line):

    category<TAB>pattern<TAB>variant-rules

``category`` is one of ``toxic_identity``, ``toxic_non_identity``,
``nontoxic_identity``. ``pattern`` may contain ``{identity}`` and ``{slur}``
slots. ``variant-rules`` is optional: semicolon-separated rule sets, each a
comma-separated list of ``source=>replacement`` phrase substitutions. Each
rule set yields one alternative wording of the pattern; the pattern as
written always counts as a variant of its own.

Lexicon files hold one lowercase term per line; blank lines and lines
starting with ``#`` are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import DataError, GenerationError
from .numerics.core import rng as seeded_rng
from .records import Category, Identity, LabeledExample, Origin, category_for

# Runs of unicode alphanumerics, allowing apostrophes inside a word so
# contractions like "i'm" stay one token. Underscore is excluded on purpose.
_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*", re.UNICODE)

_SYNTH_CATEGORIES = (
    Category.TOXIC_IDENTITY,
    Category.TOXIC_NON_IDENTITY,
    Category.NONTOXIC_IDENTITY,
)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric boundaries.

    >>> tokenize("Why would you assume?")
    ['why', 'would', 'you', 'assume']
    """
    normalized = text.lower().replace("’", "'")
    return _TOKEN_RE.findall(normalized)


def apply_rules(text: str, rules: list[tuple[str, str]]) -> str:
    """Apply one variant's phrase substitutions as literal replacements."""
    for src, dst in rules:
        text = text.replace(src, dst)
    return text


@dataclass
class Template:
    """A fill-in pattern for one synthesizable comment category."""

    pattern: str
    category: Category
    variants: list[list[tuple[str, str]]] = field(default_factory=list)

    def __post_init__(self):
        if self.category not in _SYNTH_CATEGORIES:
            raise ValueError(f"cannot synthesize category {self.category}")
        needs_identity = self.category in (Category.TOXIC_IDENTITY, Category.NONTOXIC_IDENTITY)
        if needs_identity and "{identity}" not in self.pattern:
            raise ValueError(f"{self.category.value} template needs an {{identity}} slot: {self.pattern!r}")
        if self.category is Category.TOXIC_NON_IDENTITY and "{identity}" in self.pattern:
            raise ValueError(f"toxic non-identity template must not use {{identity}}: {self.pattern!r}")
        for rules in self.variants:
            rewritten = apply_rules(self.pattern, rules)
            for slot in ("{identity}", "{slur}"):
                if (slot in self.pattern) and (slot not in rewritten):
                    raise ValueError(f"variant {rules} destroys the {slot} slot in {self.pattern!r}")

    @property
    def n_variants(self) -> int:
        return 1 + len(self.variants)

    def render(self, variant_index: int, identity_term: str | None, slur_term: str | None) -> str:
        text = self.pattern
        if variant_index > 0:
            text = apply_rules(text, self.variants[variant_index - 1])
        if identity_term is not None:
            text = text.replace("{identity}", identity_term)
        if slur_term is not None:
            text = text.replace("{slur}", slur_term)
        return text


@dataclass
class TermLexicon:
    """Identity terms plus stand-in tokens used by toxic templates."""

    identity_terms: list[str]
    slur_terms: list[str]

    def __post_init__(self):
        for name in ("identity_terms", "slur_terms"):
            terms = getattr(self, name)
            if not terms:
                raise ValueError(f"{name} must be non-empty")
            if len(set(terms)) != len(terms):
                raise ValueError(f"{name} contains duplicates")
            for t in terms:
                if not t.strip() or t != t.lower():
                    raise ValueError(f"{name} entries must be non-empty lowercase, got {t!r}")


def load_terms(path: str | Path) -> list[str]:
    terms = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            terms.append(line)
    return terms


_CATEGORY_NAMES = {c.value: c for c in _SYNTH_CATEGORIES}


def _parse_rules(spec: str) -> list[list[tuple[str, str]]]:
    variants = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        rules = []
        for rule in chunk.split(","):
            if "=>" not in rule:
                raise ValueError(f"bad substitution rule {rule!r} (expected source=>replacement)")
            src, dst = rule.split("=>", 1)
            rules.append((src.strip(), dst.strip()))
        variants.append(rules)
    return variants


def load_templates(path: str | Path) -> list[Template]:
    """Parse a tab-separated template file; see the module docstring."""
    templates = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise DataError(f"{path}:{lineno}: expected category<TAB>pattern[<TAB>rules]")
        name = parts[0].strip()
        if name not in _CATEGORY_NAMES:
            raise DataError(f"{path}:{lineno}: unknown template category {name!r}")
        try:
            variants = _parse_rules(parts[2]) if len(parts) > 2 else []
            templates.append(Template(parts[1], _CATEGORY_NAMES[name], variants))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
    return templates


def _combination_space(templates: list[Template], lexicon: TermLexicon, category: Category):
    """All (template, identity term, slur term, variant) tuples for a category."""
    combos = []
    for t in templates:
        if t.category is not category:
            continue
        identity_axis = lexicon.identity_terms if "{identity}" in t.pattern else [None]
        slur_axis = lexicon.slur_terms if "{slur}" in t.pattern else [None]
        for ident in identity_axis:
            for slur in slur_axis:
                for v in range(t.n_variants):
                    combos.append((t, ident, slur, v))
    return combos


def synthesize_comments(
    templates: list[Template],
    lexicon: TermLexicon,
    per_category_target: int,
    seed: int,
    categories: Iterable[Category] = _SYNTH_CATEGORIES,
) -> list[LabeledExample]:
    """Emit exactly ``per_category_target`` synthetic examples per category.

    Combinations are drawn without repetition until the category's full
    (template x term x variant) space is exhausted; any remainder is drawn
    with replacement. Output is deterministic for fixed inputs and seed.
    """
    if per_category_target < 0:
        raise ValueError("per_category_target must be >= 0")
    rng = seeded_rng(seed)
    out: list[LabeledExample] = []
    for category in categories:
        if category not in _SYNTH_CATEGORIES:
            raise GenerationError(f"cannot synthesize category {category.value}")
        if per_category_target == 0:
            continue
        combos = _combination_space(templates, lexicon, category)
        if not combos:
            raise GenerationError(f"no template/term combinations for category {category.value}")
        order = rng.permutation(len(combos))
        picks = list(order[:per_category_target])
        deficit = per_category_target - len(combos)
        if deficit > 0:
            picks.extend(rng.integers(0, len(combos), size=deficit))
        label = 1 if category.is_toxic else 0
        identity = Identity.IDENTITY if category.is_identity else Identity.NON_IDENTITY
        for n, idx in enumerate(picks):
            template, ident_term, slur_term, variant = combos[idx]
            text = template.render(variant, ident_term, slur_term)
            out.append(
                LabeledExample(
                    tokens=tokenize(text),
                    label=label,
                    identity=identity,
                    category=category_for(label, identity),
                    origin=Origin.SYNTHETIC,
                    example_id=f"syn:{category.value}:{n}",
                )
            )
    return out
