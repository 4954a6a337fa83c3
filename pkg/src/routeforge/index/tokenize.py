"""SMILES tokenization for n-gram retrieval.

Works on arbitrary text, including invalid SMILES (required by the
fallback search path): two-letter halogens, bracket atoms and %nn ring
closures stay atomic, every other character is its own token, and
unterminated brackets degrade to single-character tokens.
"""

from __future__ import annotations


def tokenize_smiles(text: str) -> list[str]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            end = text.find("]", i)
            if end == -1:
                tokens.append(ch)
                i += 1
            else:
                tokens.append(text[i:end + 1])
                i = end + 1
        elif ch == "%" and text[i + 1:i + 3].isdigit():
            tokens.append(text[i:i + 3])
            i += 3
        elif text[i:i + 2] in ("Cl", "Br"):
            tokens.append(text[i:i + 2])
            i += 2
        else:
            tokens.append(ch)
            i += 1
    return tokens


def ngrams(tokens: list[str]) -> list[tuple[str, ...]]:
    """All consecutive token pairs and triplets, in order of occurrence."""
    out = []
    for size in (2, 3):
        for i in range(len(tokens) - size + 1):
            out.append(tuple(tokens[i:i + size]))
    return out
