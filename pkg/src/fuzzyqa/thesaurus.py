"""Synset storage and synonym-based query expansion."""

import hashlib
import itertools
from dataclasses import dataclass, field

from fuzzyqa.exceptions import ParseError
from fuzzyqa.textprep import parse_tag

DEFAULT_CAP = 256

# One query variant: a lemma per keyword slot.
QueryVariant = tuple


@dataclass(frozen=True)
class Synset:
    id: str
    members: tuple
    tag: object

    def __post_init__(self):
        if not self.members:
            raise ValueError(f"synset {self.id!r} has no members")
        if len(set(self.members)) != len(self.members):
            raise ValueError(f"synset {self.id!r} has duplicate members")


@dataclass
class Thesaurus:
    synsets: dict = field(default_factory=dict)
    digest: str = field(default="", compare=False)

    def __post_init__(self):
        self._index = {}
        for sid in sorted(self.synsets):
            for member in self.synsets[sid].members:
                self._index.setdefault(member, []).append(sid)

    def synset_ids(self, lemma):
        return list(self._index.get(lemma, ()))

    def lemmas(self):
        return self._index.keys()

    def __contains__(self, lemma):
        return lemma in self._index

    def __len__(self):
        return len(self.synsets)


def load_thesaurus(stream, source=None):
    """
    Parse synset lines of the form ``ID TAG member1,member2,...``.

    ``stream`` may be a string or a text file object.  Blank lines and
    lines starting with ``#`` are skipped.
    """
    text = stream if isinstance(stream, str) else stream.read()
    synsets = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 2)
        if len(parts) != 3:
            raise ParseError("expected 'ID TAG member1,member2,...'", lineno, source)
        sid, tag_name, member_field = parts
        tag = parse_tag(tag_name, lineno, source)
        members = tuple(m.strip().lower() for m in member_field.split(","))
        if any(not m or " " in m for m in members):
            raise ParseError("empty or multi-word member", lineno, source)
        if sid in synsets:
            raise ParseError(f"duplicate synset id {sid!r}", lineno, source)
        try:
            synsets[sid] = Synset(sid, members, tag)
        except ValueError as exc:
            raise ParseError(str(exc), lineno, source) from None
    return Thesaurus(synsets, hashlib.sha256(text.encode("utf-8")).hexdigest())


def synonyms(lemma, thesaurus, tag=None):
    """
    All members of every synset containing ``lemma``, without ``lemma`` itself.

    Ordered by synset id then member order; each synonym appears once.
    """
    out = []
    for sid in thesaurus.synset_ids(lemma):
        synset = thesaurus.synsets[sid]
        if tag is not None and synset.tag is not tag:
            continue
        for member in synset.members:
            if member != lemma and member not in out:
                out.append(member)
    return out


def expand_query(keywords, thesaurus, cap=DEFAULT_CAP):
    """
    Enumerate synonym combinations of the keyword list.

    Each slot offers the original lemma followed by its synonyms; the
    Cartesian product is taken in lexicographic order of slot choices, so
    the all-original variant comes first.  At most ``cap`` variants are
    returned.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    slots = [[kw.lemma] + synonyms(kw.lemma, thesaurus) for kw in keywords]
    return [tuple(v) for v in itertools.islice(itertools.product(*slots), cap)]
