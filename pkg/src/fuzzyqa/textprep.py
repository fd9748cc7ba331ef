"""
Question and document preprocessing.

Raw text goes through four stages: tokenization, stop-word removal,
part-of-speech tagging and keyword extraction.  The tagger is a lexicon
lookup backed by suffix heuristics; no external model is needed.
"""

import enum
import hashlib
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Collection, Iterable, Mapping

from fuzzyqa.exceptions import ParseError

_TOKEN_RE = re.compile(r"[^\W_]+")

DATA_ENV_VAR = "FUZZYQA_DATA"


class PosTag(enum.Enum):
    NOUN = "NOUN"
    VERB = "VERB"
    ADJECTIVE = "ADJ"
    OTHER = "OTHER"

    @property
    def is_content(self):
        return self is not PosTag.OTHER


CONTENT_TAGS = frozenset({PosTag.NOUN, PosTag.VERB, PosTag.ADJECTIVE})

# checked in order; the first matching suffix wins
_SUFFIX_TAGS = (
    ("ing", PosTag.VERB),
    ("ed", PosTag.VERB),
    ("ous", PosTag.ADJECTIVE),
    ("ful", PosTag.ADJECTIVE),
    ("y", PosTag.ADJECTIVE),
)


@dataclass(frozen=True)
class Token:
    text: str
    position: int
    tag: PosTag = PosTag.OTHER


@dataclass(frozen=True)
class Keyword:
    lemma: str
    tag: PosTag
    origin: int


def parse_tag(name, lineno=None, source=None):
    """Map a file tag name (NOUN, VERB, ADJ) to a :class:`PosTag`."""
    try:
        tag = PosTag(name.strip().upper())
    except ValueError:
        raise ParseError(f"unknown tag {name!r}", lineno, source) from None
    if tag is PosTag.OTHER:
        raise ParseError("tag must be one of NOUN, VERB, ADJ", lineno, source)
    return tag


def tokenize(raw):
    """Split ``raw`` into lowercase alphanumeric tokens tagged OTHER."""
    return [Token(m.group(0).lower(), i) for i, m in enumerate(_TOKEN_RE.finditer(raw))]


def remove_stopwords(tokens, stoplist):
    return [t for t in tokens if t.text not in stoplist]


def _suffix_tag(word):
    for suffix, tag in _SUFFIX_TAGS:
        if word.endswith(suffix) and len(word) > len(suffix):
            return tag
    return PosTag.NOUN


def pos_tag(tokens, lexicon):
    """
    Tag each token: lexicon entry first, then suffix heuristics, else NOUN.
    """
    return [Token(t.text, t.position, lexicon.get(t.text) or _suffix_tag(t.text)) for t in tokens]


def lemmatize(word, known_terms=()):
    """
    Strip a plural "-es" or "-s" when the remaining stem has at least three
    characters and is a known term.  Unknown stems leave the word unchanged.
    """
    for suffix in ("es", "s"):
        if word.endswith(suffix):
            stem = word[: -len(suffix)]
            if len(stem) >= 3 and stem in known_terms:
                return stem
    return word


def extract_keywords(tokens, known_terms=()):
    """
    Keep noun, verb and adjective tokens as keywords.

    Parameters
    ----------
    tokens : list of Token
        Stop-word filtered, tagged tokens.
    known_terms : collection of str
        Vocabulary used to validate plural stripping.

    Returns
    -------
    list of Keyword
        One entry per distinct lemma, in order of first occurrence.
    """
    seen = set()
    keywords = []
    for t in tokens:
        if t.tag not in CONTENT_TAGS:
            continue
        lemma = lemmatize(t.text, known_terms)
        if lemma in seen:
            continue
        seen.add(lemma)
        keywords.append(Keyword(lemma, t.tag, t.position))
    return keywords


def _content_lines(text):
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def load_stoplist(text):
    return frozenset(line.lower() for _, line in _content_lines(text))


def load_lexicon(text, source=None):
    lexicon = {}
    for lineno, line in _content_lines(text):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip():
            raise ParseError("expected 'word<TAB>TAG'", lineno, source)
        lexicon[parts[0].strip().lower()] = parse_tag(parts[1], lineno, source)
    return lexicon


def _read_data_file(name):
    data_dir = os.environ.get(DATA_ENV_VAR)
    if data_dir:
        path = os.path.join(data_dir, name)
        if os.path.exists(path):
            with open(path, encoding="utf-8") as f:
                return f.read()
    return resources.files("fuzzyqa").joinpath("data", name).read_text(encoding="utf-8")


def default_stoplist_text():
    return _read_data_file("stopwords.txt")


def default_lexicon_text():
    return _read_data_file("lexicon.tsv")


@dataclass(frozen=True)
class TextPipeline:
    """Loaded stoplist and tag lexicon, with the full keyword pipeline."""

    stoplist: Collection[str]
    lexicon: Mapping[str, PosTag]
    digest: str = field(default="", compare=False)

    @classmethod
    def from_texts(cls, stoplist_text, lexicon_text):
        h = hashlib.sha256()
        h.update(stoplist_text.encode("utf-8"))
        h.update(b"\0")
        h.update(lexicon_text.encode("utf-8"))
        return cls(load_stoplist(stoplist_text), load_lexicon(lexicon_text), h.hexdigest())

    @classmethod
    def default(cls):
        return cls.from_texts(default_stoplist_text(), default_lexicon_text())

    @classmethod
    def from_files(cls, stoplist_path=None, lexicon_path=None):
        def read(path, fallback):
            if path is None:
                return fallback()
            with open(path, encoding="utf-8") as f:
                return f.read()

        return cls.from_texts(
            read(stoplist_path, default_stoplist_text), read(lexicon_path, default_lexicon_text)
        )

    def _tagged(self, raw):
        return pos_tag(remove_stopwords(tokenize(raw), self.stoplist), self.lexicon)

    def keywords(self, raw, known_terms: Iterable[str] = ()):
        known = set(known_terms) | set(self.lexicon)
        return extract_keywords(self._tagged(raw), known)

    def keyword_stream(self, raw, known_terms: Iterable[str] = ()):
        """Content lemmas in document order, repeats kept (for term counts)."""
        known = set(known_terms) | set(self.lexicon)
        return [lemmatize(t.text, known) for t in self._tagged(raw) if t.tag in CONTENT_TAGS]
