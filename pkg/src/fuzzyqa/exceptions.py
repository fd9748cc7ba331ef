class FuzzyQAError(Exception):
    """Base class for every error raised by fuzzyqa."""


class ParseError(FuzzyQAError, ValueError):
    def __init__(self, message, lineno=None, source=None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if lineno is not None:
            where += f"line {lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)


class TaxonomyError(FuzzyQAError, ValueError):
    pass


class UnknownTermError(FuzzyQAError, KeyError):
    def __init__(self, term):
        self.term = term
        super().__init__(term)

    def __str__(self):
        return f"unknown term: {self.term!r}"


class DegenerateTaxonomyError(FuzzyQAError, ValueError):
    pass


class EmptyQuestionError(FuzzyQAError, ValueError):
    pass


class IndexFormatError(FuzzyQAError, ValueError):
    pass


class StaleIndexWarning(UserWarning):
    """The index was built from different taxonomy/thesaurus files."""
