# group_pipeline/presentation.py
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from pydantic import BaseModel, Field, ValidationError, ConfigDict

from errors import PresentationError

logger = logging.getLogger("elocus")

Letter = tuple[int, int]  # (generator index, exponent +1 / -1)


@dataclass(frozen=True)
class Word:
    """
    A word in the generators, stored as signed generator indices.

    Lowercase letters are generators (a = 0, b = 1, ...), uppercase letters are
    their inverses, so "abA" is a·b·a⁻¹.
    """
    letters: tuple[Letter, ...] = ()

    @classmethod
    def parse(cls, text: str, rank: int) -> "Word":
        letters: list[Letter] = []
        for ch in text.strip():
            if not ch.isascii() or not ch.isalpha():
                raise PresentationError(f"invalid character {ch!r} in word {text!r}")
            g = ord(ch.lower()) - ord("a")
            if g >= rank:
                raise PresentationError(
                    f"unknown generator letter {ch!r} in word {text!r} (rank {rank})"
                )
            letters.append((g, 1 if ch.islower() else -1))
        return cls(tuple(letters))

    def reduced(self) -> "Word":
        """Freely reduced form."""
        out: list[Letter] = []
        for g, e in self.letters:
            if out and out[-1] == (g, -e):
                out.pop()
            else:
                out.append((g, e))
        return Word(tuple(out))

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.letters)))

    def exponent_sums(self, rank: int) -> list[int]:
        sums = [0] * rank
        for g, e in self.letters:
            sums[g] += e
        return sums

    def __add__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __str__(self) -> str:
        return "".join(
            chr(ord("a") + g) if e > 0 else chr(ord("A") + g) for g, e in self.letters
        )


@dataclass(frozen=True)
class Presentation:
    name: str
    rank: int
    relators: tuple[Word, ...]
    meridian: Word
    longitude: Word
    genus: int | None = None
    assume_small: bool = False
    comment: str | None = field(default=None, compare=False)

    @property
    def deficiency(self) -> int:
        return self.rank - len(self.relators)

    def exponent_matrix(self) -> list[list[int]]:
        """Relator-by-generator matrix of exponent sums."""
        return [r.exponent_sums(self.rank) for r in self.relators]

    def peripheral_words(self) -> tuple[Word, Word, Word]:
        """(μ, λ, μλ) in that order."""
        return self.meridian, self.longitude, (self.meridian + self.longitude).reduced()


class ManifoldFile(BaseModel):
    """
    JSON schema of a manifold file.
    """
    model_config = ConfigDict(extra="ignore")

    name: str
    generators: int = Field(ge=1, le=26)
    relators: list[str]
    meridian: str
    longitude: str
    genus: int | None = Field(default=None, ge=1)
    assume_small: bool = False
    comment: str | None = None


def parse_presentation(data: ManifoldFile | dict[str, Any]) -> Presentation:
    """
    Validate an in-memory manifold description and build a Presentation.

    Args:
        data (ManifoldFile | dict): Parsed JSON object or an already validated model.

    Returns:
        Presentation: Validated presentation with freely reduced words.
    """
    if not isinstance(data, ManifoldFile):
        try:
            data = ManifoldFile.model_validate(data)
        except ValidationError as e:
            raise PresentationError(f"manifold schema violation: {e}") from e

    rank = data.generators
    relators = tuple(Word.parse(r, rank).reduced() for r in data.relators)
    relators = tuple(r for r in relators if len(r) > 0)
    if rank > 1 and not relators:
        raise PresentationError(f"empty relator list with rank {rank}")
    if rank - len(relators) not in (0, 1):
        raise PresentationError(
            f"deficiency {rank - len(relators)} not in {{0, 1}} "
            f"({rank} generators, {len(relators)} relators)"
        )

    meridian = Word.parse(data.meridian, rank).reduced()
    longitude = Word.parse(data.longitude, rank).reduced()
    if len(meridian) == 0:
        raise PresentationError("meridian word is empty")
    # NOTE: a solid torus <a | > has a null-homotopic longitude; nothing else may.
    if len(longitude) == 0 and rank > 1:
        raise PresentationError("longitude word is empty")

    return Presentation(
        name=data.name,
        rank=rank,
        relators=relators,
        meridian=meridian,
        longitude=longitude,
        genus=data.genus,
        assume_small=data.assume_small,
        comment=data.comment,
    )


def parse_manifold(path: str | Path) -> Presentation:
    """
    Read and validate a manifold JSON file.

    Args:
        path (str | Path): Location of the manifold file.

    Returns:
        Presentation: Validated presentation.
    """
    path = Path(path)
    if not path.is_file():
        raise PresentationError(f"manifold file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise PresentationError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(raw, dict):
        raise PresentationError(f"{path}: top level must be a JSON object")

    p = parse_presentation(raw)
    logger.debug("parsed %s: rank=%d relators=%d", p.name, p.rank, len(p.relators))
    return p
