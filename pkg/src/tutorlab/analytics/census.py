"""Dataset census: which logged datasets plausibly represent real studies.

Three filters, applied in order: a 300-transaction floor, a name screen for
"test"/"pilot", and at most one dataset per (project, semester), keeping the
largest.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from pathlib import Path

from ..errors import SchemaMismatch

MIN_TRANSACTIONS = 300
EXCLUDED_NAME_WORDS = ("test", "pilot")

REGISTRY_COLUMNS = ["dataset_id", "project_id", "name", "transactions", "start_date"]


@dataclass(frozen=True)
class DatasetRegistryEntry:
    dataset_id: str
    project_id: str
    name: str
    transactions: int
    start_date: date


def semester(day: date) -> str:
    if day.month <= 5:
        return "Spring"
    if day.month <= 8:
        return "Summer"
    return "Fall"


def census_filter(registry: list[DatasetRegistryEntry]) -> tuple[list[DatasetRegistryEntry], int]:
    survivors = [e for e in registry if e.transactions >= MIN_TRANSACTIONS]
    survivors = [
        e for e in survivors
        if not any(word in e.name.lower() for word in EXCLUDED_NAME_WORDS)
    ]
    best: dict[tuple[str, int, str], tuple[int, int]] = {}  # group -> (index, transactions)
    for i, entry in enumerate(survivors):
        key = (entry.project_id, entry.start_date.year, semester(entry.start_date))
        if key not in best or entry.transactions > best[key][1]:
            best[key] = (i, entry.transactions)
    keep = {i for i, _ in best.values()}
    kept = [e for i, e in enumerate(survivors) if i in keep]
    return kept, len(kept)


def load_registry_tsv(path) -> list[DatasetRegistryEntry]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split("\t") != REGISTRY_COLUMNS:
        raise SchemaMismatch(f"registry header must be exactly {REGISTRY_COLUMNS}")
    entries = []
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split("\t")
        if len(cells) != len(REGISTRY_COLUMNS):
            raise SchemaMismatch(f"registry row has {len(cells)} columns: {line!r}")
        transactions = int(cells[3])
        if transactions < 0:
            raise SchemaMismatch(f"dataset {cells[0]!r} has negative transaction count")
        entries.append(
            DatasetRegistryEntry(
                dataset_id=cells[0],
                project_id=cells[1],
                name=cells[2],
                transactions=transactions,
                start_date=date.fromisoformat(cells[4]),
            )
        )
    return entries
