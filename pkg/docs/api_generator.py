"""Generate the API reference of `mmabtk`.

Each public subpackage gets a page rendering what it exports, which is where
the guides link to, e.g. `mmabtk.arena.Arena`. Under it comes one page per
public module. The navigation is written to `api/SUMMARY.md` for literate-nav.

# https://mkdocstrings.github.io/recipes/
"""
from __future__ import annotations

import logging
from pathlib import Path

import mkdocs_gen_files

logger = logging.getLogger(__name__)

SRC = Path("src")
PACKAGE = "mmabtk"
API = Path("api")

# Module pages that leave out what their classes inherit from the stdlib
NO_INHERITS = ("mmabtk.harness.executors", "mmabtk.arena.events")
TAB = "    "


def is_public(parts: tuple[str, ...]) -> bool:
    """Whether a module path is documented, the package root aside."""
    if len(parts) < 2 or parts[-1] in ("__main__", "__version__"):  # noqa: PLR2004
        return False
    return not any(p.startswith("_") for p in parts if p != "__init__")


def page(parts: tuple[str, ...]) -> tuple[str, Path, tuple[str, ...]]:
    """The identifier, doc path and navigation entry of a module."""
    if parts[-1] == "__init__":
        parts = parts[:-1]
        return ".".join(parts), Path(*parts[1:], "index.md"), parts[1:]
    return ".".join(parts), Path(*parts[1:]).with_suffix(".md"), parts[1:]


nav = mkdocs_gen_files.Nav()
nav["Overview"] = "index.md"

for path in sorted((SRC / PACKAGE).rglob("*.py")):
    parts = path.relative_to(SRC).with_suffix("").parts
    if not is_public(parts):
        continue

    ident, doc_path, nav_key = page(parts)
    with mkdocs_gen_files.open(API / doc_path, "w") as fd:
        fd.write(f"::: {ident}")
        if ident in NO_INHERITS:
            fd.write(f"\n{TAB}options:")
            fd.write(f"\n{TAB}{TAB}inherited_members: false")

    mkdocs_gen_files.set_edit_path(API / doc_path, path)
    nav[nav_key] = doc_path.as_posix()
    logger.debug(f"API page {doc_path} for {ident}")

with mkdocs_gen_files.open(API / "SUMMARY.md", "w") as fd:
    fd.writelines(nav.build_literate_nav())
