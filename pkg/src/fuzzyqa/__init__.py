"""Semantic question answering with ontology similarity and fuzzy co-clustering."""

from fuzzyqa.cocluster import CoClusterConfig, CoClusterModel, FuzzyCoClustering, TermDocMatrix
from fuzzyqa.engine import Corpus, Document, Index, SemanticQA, answer, index_corpus
from fuzzyqa.exceptions import FuzzyQAError
from fuzzyqa.fuzzyscale import IntervalType2Membership, ScoredAnswer, Type1Membership
from fuzzyqa.ontology import SimilarityParams, Taxonomy
from fuzzyqa.textprep import Keyword, PosTag, TextPipeline, Token
from fuzzyqa.thesaurus import Synset, Thesaurus

__version__ = "0.1.0"

__all__ = [
    "CoClusterConfig",
    "CoClusterModel",
    "Corpus",
    "Document",
    "FuzzyCoClustering",
    "FuzzyQAError",
    "Index",
    "IntervalType2Membership",
    "Keyword",
    "PosTag",
    "ScoredAnswer",
    "SemanticQA",
    "SimilarityParams",
    "Synset",
    "Taxonomy",
    "TermDocMatrix",
    "TextPipeline",
    "Thesaurus",
    "Token",
    "Type1Membership",
    "answer",
    "index_corpus",
]
