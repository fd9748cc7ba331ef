"""
Is-a taxonomy and edge-count similarity.

Similarity between two concepts combines the depth ``d`` of the whole tree
with the shortest path ``S`` between them::

    St = (exp(x*d) - 1) / (exp(x*d) + exp(y*S) - 2)

which is 1 for identical concepts and decays towards 0 as ``S`` grows.
"""

import hashlib
import math
from dataclasses import dataclass
from functools import cached_property

from fuzzyqa.exceptions import (
    DegenerateTaxonomyError,
    ParseError,
    TaxonomyError,
    UnknownTermError,
)
from fuzzyqa.thesaurus import synonyms


@dataclass(frozen=True)
class SimilarityParams:
    x: float = 0.5
    y: float = 0.6

    def __post_init__(self):
        if not (self.x > 0 and self.y > 0):
            raise ValueError(f"smoothing factors must be positive, got x={self.x}, y={self.y}")


class Taxonomy:
    """
    Rooted concept tree built from child -> parent is-a edges.

    A single concept with no edges is a valid (depth 0) taxonomy; build it
    with ``Taxonomy({}, root="thing")``.
    """

    def __init__(self, parents, root=None, digest=""):
        self.parents = dict(parents)
        self.digest = digest
        concepts = set(self.parents) | set(self.parents.values())
        if root is not None:
            concepts.add(root)
        roots = sorted(c for c in concepts if c not in self.parents)
        if len(roots) != 1:
            self._check_cycles()
            raise TaxonomyError(
                "taxonomy must have exactly one root, found "
                + (", ".join(roots) if roots else "none")
            )
        if root is not None and roots[0] != root:
            raise TaxonomyError(f"{root!r} is not the root")
        self.root = roots[0]
        self._check_cycles()
        self.concepts = frozenset(concepts)
        self.children = {c: [] for c in concepts}
        for child, parent in sorted(self.parents.items()):
            self.children[parent].append(child)

    def _check_cycles(self):
        state = {}
        for start in sorted(self.parents):
            path = []
            node = start
            while node in self.parents and node not in state:
                state[node] = start
                path.append(node)
                node = self.parents[node]
                if state.get(node) == start:
                    raise TaxonomyError(f"cycle detected involving {node!r}")

    def __contains__(self, concept):
        return concept in self.concepts

    def __len__(self):
        return len(self.concepts)

    @cached_property
    def levels(self):
        """Edge distance from the root for every concept."""
        level = {self.root: 0}
        stack = [self.root]
        while stack:
            node = stack.pop()
            for child in self.children[node]:
                level[child] = level[node] + 1
                stack.append(child)
        return level

    @cached_property
    def depth(self):
        return max(self.levels.values())

    def ancestors(self, concept):
        """``concept`` followed by its ancestors up to the root."""
        self._require(concept)
        chain = [concept]
        while chain[-1] in self.parents:
            chain.append(self.parents[chain[-1]])
        return chain

    def _require(self, concept):
        if concept not in self.concepts:
            raise UnknownTermError(concept)

    def shortest_path(self, t1, t2):
        """Number of edges between two concepts, walking through their common subsumer."""
        up1 = {c: i for i, c in enumerate(self.ancestors(t1))}
        for j, c in enumerate(self.ancestors(t2)):
            if c in up1:
                return up1[c] + j
        raise AssertionError("a rooted tree always has a common subsumer")

    def similarity(self, t1, t2, params=SimilarityParams()):
        return similarity(t1, t2, self, params)


def load_taxonomy(stream, source=None):
    """
    Parse ``child<TAB>parent`` lines into a :class:`Taxonomy`.

    Labels are lowercased.  Comment lines start with ``#``.
    """
    text = stream if isinstance(stream, str) else stream.read()
    parents = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip().lower() for p in line.split("\t")]
        if len(parts) != 2 or not all(parts):
            raise ParseError("expected 'child<TAB>parent'", lineno, source)
        child, parent = parts
        if child == parent:
            raise ParseError(f"cycle detected involving {child!r}", lineno, source)
        if child in parents:
            raise ParseError(f"duplicate child {child!r}", lineno, source)
        parents[child] = parent
    if not parents:
        raise TaxonomyError("taxonomy has no edges")
    return Taxonomy(parents, digest=hashlib.sha256(text.encode("utf-8")).hexdigest())


def depth(taxonomy):
    return taxonomy.depth


def shortest_path(t1, t2, taxonomy):
    return taxonomy.shortest_path(t1, t2)


def edge_count_similarity(d, S, params=SimilarityParams()):
    """
    Similarity value for tree depth ``d`` and path length ``S``.

    ``S`` may be ``math.inf`` (unrelated concepts), giving 0.
    """
    if d <= 0:
        raise DegenerateTaxonomyError("similarity is undefined for a depth-0 taxonomy")
    if S == 0:
        return 1.0
    if math.isinf(S):
        return 0.0
    # e^a + e^b - 2 == expm1(a) + expm1(b); avoids cancellation for small exponents
    num = math.expm1(params.x * d)
    return num / (num + math.expm1(params.y * S))


def similarity(t1, t2, taxonomy, params=SimilarityParams()):
    return edge_count_similarity(taxonomy.depth, taxonomy.shortest_path(t1, t2), params)


def term_to_concept(lemma, taxonomy, thesaurus=None):
    """Resolve a lemma to a concept directly or through its first synonym that is one."""
    if lemma in taxonomy:
        return lemma
    if thesaurus is not None:
        for syn in synonyms(lemma, thesaurus):
            if syn in taxonomy:
                return syn
    return None
