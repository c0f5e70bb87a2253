"""Dictionary parsing, stopword filtering and vocabulary construction.

A vocabulary starts from a user-supplied base word list. Each base word is
looked up in a tab-separated dictionary file, its first definition is
tokenized, filtered against an explicit stopword list, truncated to 19 terms
and padded with the reserved ``<PAD>`` sentinel. Every real definition term
that is not already a base word is appended to the final word list, one
level deep (definition terms are not themselves expanded).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

PAD = "<PAD>"
MAX_DEFINITION_TERMS = 19

# Copulas, articles and similar filler only. Conjunctions, question words,
# emphatics and punctuation are deliberately absent: they can change the
# tone and meaning of a definition and are always kept.
DEFAULT_STOPWORDS = frozenset(
    "a an the is are was were be been being also "
    "of to in on at by for with as it its this that".split()
)

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


class VocabError(ValueError):
    """Raised for malformed dictionary / vocabulary input."""


@dataclass(frozen=True)
class StopwordPolicy:
    """An explicit, closed drop list; membership is exact match after lowercasing."""

    dropped: frozenset = DEFAULT_STOPWORDS

    @classmethod
    def from_file(cls, path) -> "StopwordPolicy":
        words = set()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                tok = line.strip().lower()
                if not tok or tok.startswith("#"):
                    continue
                words.add(tok)
        return cls(dropped=frozenset(words))


@dataclass
class Dictionary:
    """Headword -> ordered list of definition strings (>= 1 each)."""

    entries: dict = field(default_factory=dict)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def first_definition(self, word: str) -> str:
        return self.entries[word][0]


@dataclass
class DefinitionEntry:
    """A word with its definition normalized to exactly 19 ordered terms.

    Real terms come first, PAD sentinels trail; ``real_term_count`` is the
    number of non-PAD terms.
    """

    word: str
    terms: list
    real_term_count: int

    def __post_init__(self):
        assert len(self.terms) == MAX_DEFINITION_TERMS
        assert self.terms[self.real_term_count:] == [PAD] * (
            MAX_DEFINITION_TERMS - self.real_term_count
        )


@dataclass
class Vocabulary:
    base_words: list
    all_words: list
    entries: dict
    skipped: list = field(default_factory=list)


def load_dictionary(path) -> Dictionary:
    """Parse a ``headword<TAB>definition`` file; ``#`` lines are comments.

    Repeated headwords append extra definitions in file order.
    """
    entries: dict = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            if "\t" not in line:
                raise VocabError(f"{path}: missing TAB separator at line {lineno}")
            head, _, definition = line.partition("\t")
            head = head.strip().lower()
            if not head:
                raise VocabError(f"{path}: empty headword at line {lineno}")
            if any(ch.isspace() for ch in head):
                raise VocabError(
                    f"{path}: headword contains whitespace at line {lineno}"
                )
            if head == PAD.lower() or head == PAD:
                raise VocabError(f"{path}: reserved token {PAD} at line {lineno}")
            if not definition.strip():
                raise VocabError(f"{path}: empty definition at line {lineno}")
            entries.setdefault(head, []).append(definition.strip())
    return Dictionary(entries=entries)


def load_word_list(path) -> list:
    """One token per line; blanks and ``#`` comments skipped; order kept, deduplicated."""
    words = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            tok = raw.strip().lower()
            if not tok or tok.startswith("#"):
                continue
            if any(ch.isspace() for ch in tok):
                raise VocabError(f"{path}: token contains whitespace at line {lineno}")
            if tok == PAD.lower():
                raise VocabError(f"{path}: reserved token {PAD} at line {lineno}")
            if tok not in seen:
                seen.add(tok)
                words.append(tok)
    return words


def tokenize_definition(text: str, policy: StopwordPolicy) -> list:
    """Lowercase, split on whitespace, split punctuation into standalone tokens,
    then drop exact stopword matches. Survivor order is preserved."""
    tokens = _TOKEN_RE.findall(text.lower())
    return [t for t in tokens if t not in policy.dropped]


def build_definition_entry(
    word: str, dictionary: Dictionary, policy: StopwordPolicy
) -> DefinitionEntry:
    """Tokenize the word's first definition, truncate to 19 terms, pad with PAD."""
    if word not in dictionary:
        raise VocabError(f"no definition for '{word}'")
    tokens = tokenize_definition(dictionary.first_definition(word), policy)
    tokens = tokens[:MAX_DEFINITION_TERMS]
    n = len(tokens)
    return DefinitionEntry(
        word=word,
        terms=tokens + [PAD] * (MAX_DEFINITION_TERMS - n),
        real_term_count=n,
    )


def build_vocabulary(
    base: list, dictionary: Dictionary, policy: StopwordPolicy
) -> Vocabulary:
    """Build entries for every base word with a definition and close the word
    list over all real definition terms (one level deep).

    Base words missing from the dictionary are skipped and reported, not fatal.
    The ``all_words`` order is deterministic: base words in input order, then
    new definition terms in first-encounter order.
    """
    if not base:
        raise VocabError("base vocabulary is empty")
    retained = []
    skipped = []
    entries = {}
    for word in base:
        if word not in dictionary:
            skipped.append(word)
            continue
        entries[word] = build_definition_entry(word, dictionary, policy)
        retained.append(word)
    all_words = list(retained)
    seen = set(retained)
    for word in retained:
        for term in entries[word].terms:
            if term == PAD or term in seen:
                continue
            seen.add(term)
            all_words.append(term)
    return Vocabulary(
        base_words=retained, all_words=all_words, entries=entries, skipped=skipped
    )


def save_vocabulary(vocab: Vocabulary, path) -> None:
    """Write ``word<TAB>real_term_count<TAB>term1 ... term19`` per base word."""
    with open(path, "w", encoding="utf-8") as fh:
        for word in vocab.base_words:
            entry = vocab.entries[word]
            fh.write(f"{word}\t{entry.real_term_count}\t{' '.join(entry.terms)}\n")


def save_skip_report(skipped: list, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word in skipped:
            fh.write(word + "\n")
