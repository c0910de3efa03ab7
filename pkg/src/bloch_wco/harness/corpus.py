"""
Bundled corpus of symbol pairs.

Entries load in file-name order. A file that fails to parse or
validate becomes an entry with its error so batch runs can report it
and move on.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Union

from config import PATHS

from bloch_wco.functionals import SymbolPair
from bloch_wco.harness.symbol_files import parse_symbol_file

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorpusEntry:
    path: Path
    pair: Optional[SymbolPair] = None
    error: Optional[Exception] = None

    @property
    def label(self) -> str:
        return self.pair.label if self.pair is not None else self.path.stem

    @property
    def ok(self) -> bool:
        return self.pair is not None


def corpus_files(directory: Optional[Union[str, Path]] = None) -> List[Path]:
    directory = Path(directory) if directory is not None else PATHS["corpus"]
    if not directory.exists():
        raise FileNotFoundError(f"Corpus not found: {directory}")
    return sorted(directory.glob("*.json"))


def load_entries(paths: Iterable[Union[str, Path]]) -> List[CorpusEntry]:
    entries = []
    for path in paths:
        path = Path(path)
        try:
            entries.append(CorpusEntry(path, pair=parse_symbol_file(path)))
        except Exception as e:
            logger.warning("could not load %s: %s", path.name, e)
            entries.append(CorpusEntry(path, error=e))
    return entries


def load_corpus(directory: Optional[Union[str, Path]] = None) -> List[CorpusEntry]:
    return load_entries(corpus_files(directory))
