"""The bundled corpus of kernel functions and their obligations.

A corpus root holds one directory per target::

    <root>/<target>/<target>.krs
    <root>/<target>/obligations.toml

Loading never aborts on one bad entry: each :class:`TargetEntry` carries its
own diagnostics and the rest of the corpus is still usable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import frontend as fe
from . import ir
from .checker.obligations import ObligationError, load_obligations

CORPUS_ROOT = Path(__file__).parent / "corpus"
MUTANTS_ROOT = Path(__file__).parent / "mutants"


@dataclass
class TargetEntry:
    name: str
    source_path: Path
    unit: Optional[ir.IrUnit] = None
    obligations: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    @property
    def source(self) -> str:
        return self.source_path.read_text()


def load_target(directory) -> TargetEntry:
    directory = Path(directory)
    name = directory.name
    entry = TargetEntry(name, directory / f"{name}.krs")
    try:
        text = entry.source_path.read_text()
    except OSError as e:
        entry.diagnostics.append(f"cannot read source: {e}")
        return entry
    try:
        entry.unit = ir.lower(fe.load_source(text, str(entry.source_path)))
    except (fe.FrontendError, ir.LoweringError) as e:
        entry.diagnostics.append(str(e))
        return entry
    ob_path = directory / "obligations.toml"
    if ob_path.exists():
        signatures = {f.name: list(f.params) for f in entry.unit.functions}
        try:
            entry.obligations = load_obligations(ob_path, signatures)
        except (ObligationError, ValueError) as e:
            entry.diagnostics.append(f"{ob_path.name}: {e}")
    return entry


def list_targets(root=CORPUS_ROOT) -> list:
    """Target names under ``root`` in lexicographic order."""
    root = Path(root)
    return sorted(p.name for p in root.iterdir() if p.is_dir() and (p / f"{p.name}.krs").exists())


def load_corpus(root=CORPUS_ROOT, names=None) -> list:
    """Load targets (all, or the given names) in lexicographic order."""
    root = Path(root)
    available = list_targets(root)
    if names is not None:
        missing = sorted(set(names) - set(available))
        if missing:
            raise KeyError(f"unknown targets: {', '.join(missing)}")
        available = [n for n in available if n in set(names)]
    return [load_target(root / n) for n in available]


def list_mutants(root=MUTANTS_ROOT) -> list:
    return sorted(p.name for p in Path(root).iterdir() if p.is_dir())


def load_mutant(name: str, root=MUTANTS_ROOT) -> TargetEntry:
    """A mutant directory holds a single target directory of the usual shape."""
    mdir = Path(root) / name
    targets = [p for p in mdir.iterdir() if p.is_dir()]
    if len(targets) != 1:
        raise ValueError(f"mutant {name} should contain exactly one target")
    return load_target(targets[0])
