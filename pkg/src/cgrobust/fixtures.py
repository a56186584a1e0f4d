"""Bundled sample knowledge bases.

``picture-v1`` / ``picture-v2`` model a person thinking of a picture.  In the
second version a person (cn13) is moved into the picture, the other pictured
person (cn15) is identified as John, and Peter, a ``Think`` relation, a
``Truit`` concept and two ``contain`` links are added.

Id assignment (one numbering for concepts and relations)::

    cn10 Person (thinker)      cn20 think   (cn10, cn11)
    cn11 Picture (context)     cn21 on      (cn12, cn14)
    cn12 Fisherman             cn22 on      (cn16, cn14)
    cn13 Person                cn23 contain (v2: cn14, cn25)
    cn14 Lake                  cn24 Think   (v2)
    cn15 Person (v2: John)     cn17 Person : Peter (v2)
    cn16 Friend                cn25 Truit   (v2)
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .cgx import parse_kb
from .model import KnowledgeBase

NAMES = ("picture-v1", "picture-v2")


def path(name: str) -> Path:
    ref = resources.files(__package__).joinpath("data", f"{name}.cgx")
    return Path(str(ref))


def load(name: str) -> KnowledgeBase:
    return parse_kb(path(name).read_bytes())
