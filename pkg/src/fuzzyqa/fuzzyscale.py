"""
Two-level fuzzy scale used to prioritize answers.

Level 1 is a type-1 membership of a document in its cluster.  Level 2 is
an interval type-2 membership of a query word: a ``[lower, upper]`` band
with uniform secondary grade.  An answer's score is

    (doc membership + mean word membership) / number of candidate documents

where each word band is reduced to its midpoint.

Membership grades are written as decimals (0.61, 0.69, ...), so the
arithmetic here is carried out on their shortest decimal representation
and rounded once, making midpoint(0.61, 0.69) exactly 0.65.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from fuzzyqa.exceptions import ParseError

DEFAULT_WORD_MEMBERSHIP = 0.5


def _dec(value):
    return Fraction(repr(float(value)))


def _check_grade(value, name):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class Type1Membership:
    mu: float

    def __post_init__(self):
        _check_grade(self.mu, "mu")


@dataclass(frozen=True)
class IntervalType2Membership:
    lower: float
    upper: float

    def __post_init__(self):
        _check_grade(self.lower, "lower")
        _check_grade(self.upper, "upper")
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    @classmethod
    def crisp(cls, mu):
        return cls(mu, mu)

    @property
    def width(self):
        return self.upper - self.lower

    def reduce(self):
        return reduce(self)

    def scaled(self, factor):
        """Band multiplied by a type-1 grade ``factor`` in [0, 1]."""
        _check_grade(factor, "factor")
        return IntervalType2Membership(self.lower * factor, self.upper * factor)

    def __contains__(self, value):
        return self.lower <= value <= self.upper


def reduce(interval):
    """Type-1 value of an interval band: the centroid of its uniform footprint."""
    if isinstance(interval, (tuple, list)):
        interval = IntervalType2Membership(*interval)
    return Type1Membership(float((_dec(interval.lower) + _dec(interval.upper)) / 2))


@dataclass(frozen=True)
class WordSense:
    lemma: str
    label: str
    point: float
    cues: frozenset = frozenset()


@dataclass(frozen=True)
class SenseEntry:
    interval: IntervalType2Membership
    senses: tuple = ()


@dataclass
class SenseBank:
    entries: dict = field(default_factory=dict)

    def __contains__(self, lemma):
        return lemma in self.entries

    def __len__(self):
        return len(self.entries)


def load_sense_bank(stream, source=None):
    """
    Parse lines ``lemma<TAB>lower<TAB>upper<TAB>sense:point:cue1|cue2,...``.

    The sense column is optional.  Every sense point must fall inside its
    lemma's band.
    """
    text = stream if isinstance(stream, str) else stream.read()
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (3, 4):
            raise ParseError("expected 'lemma<TAB>lower<TAB>upper[<TAB>senses]'", lineno, source)
        lemma = parts[0].strip().lower()
        if lemma in entries:
            raise ParseError(f"duplicate lemma {lemma!r}", lineno, source)
        try:
            interval = IntervalType2Membership(float(parts[1]), float(parts[2]))
        except ValueError as exc:
            raise ParseError(str(exc), lineno, source) from None
        senses = []
        if len(parts) == 4 and parts[3].strip():
            for spec in parts[3].split(","):
                fields = spec.strip().split(":")
                if len(fields) not in (2, 3):
                    raise ParseError(f"bad sense {spec!r}", lineno, source)
                try:
                    point = float(fields[1])
                except ValueError:
                    raise ParseError(f"bad sense point in {spec!r}", lineno, source) from None
                if point not in interval:
                    raise ParseError(
                        f"sense point {point} outside [{interval.lower}, {interval.upper}]",
                        lineno,
                        source,
                    )
                cues = frozenset(c.strip().lower() for c in fields[2].split("|")) if len(fields) == 3 else frozenset()
                senses.append(WordSense(lemma, fields[0].strip(), point, cues - {""}))
        entries[lemma] = SenseEntry(interval, tuple(senses))
    return SenseBank(entries)


def word_membership(lemma, context, sense_bank):
    """
    Interval membership of a query word and its sense in ``context``.

    The sense whose cue words overlap the context the most is chosen,
    earliest listed on ties.  Words without an entry get the crisp band
    ``[0.5, 0.5]`` and no sense.
    """
    entry = sense_bank.entries.get(lemma)
    if entry is None:
        return IntervalType2Membership.crisp(DEFAULT_WORD_MEMBERSHIP), None
    words = {getattr(k, "lemma", k) for k in context}
    best = None
    best_overlap = -1
    for sense in entry.senses:
        overlap = len(sense.cues & words)
        if overlap > best_overlap:
            best, best_overlap = sense, overlap
    return entry.interval, best


def score(doc_mu, word_intervals, n_docs):
    """
    Fuzzy-scale score of one answer.

    ``(doc_mu + mean(reduce(w) for w in word_intervals)) / n_docs``; the
    word term is 0 when there are no words.  Only meaningful for ranking
    within one retrieval, it is not bounded by 1.
    """
    if n_docs < 1:
        raise ValueError("number of documents must be >= 1")
    mu = doc_mu.mu if isinstance(doc_mu, Type1Membership) else doc_mu
    _check_grade(mu, "doc_mu")
    word_intervals = [
        w if isinstance(w, IntervalType2Membership) else IntervalType2Membership(*w)
        for w in word_intervals
    ]
    word_term = Fraction(0)
    if word_intervals:
        word_term = sum(_dec(reduce(w).mu) for w in word_intervals) / len(word_intervals)
    return float((_dec(mu) + word_term) / n_docs)


@dataclass(frozen=True)
class ScoredAnswer:
    doc_id: int
    score: float
    cluster: int
    breakdown: dict = field(default_factory=dict, hash=False)
    title: str = ""
    doc_mu: float = 0.0
    word_intervals: dict = field(default_factory=dict, hash=False)
    senses: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if self.score < 0:
            raise ValueError("score must be nonnegative")

    def to_dict(self):
        return {
            "doc_id": self.doc_id,
            "title": self.title,
            "score": self.score,
            "cluster": self.cluster,
            "doc_mu": self.doc_mu,
            "similarity": dict(self.breakdown),
            "word_intervals": {k: [w.lower, w.upper] for k, w in self.word_intervals.items()},
            "senses": dict(self.senses),
        }


def rank(candidates):
    """Order answers by descending score, then ascending document id."""
    return sorted(candidates, key=lambda a: (-a.score, a.doc_id))
