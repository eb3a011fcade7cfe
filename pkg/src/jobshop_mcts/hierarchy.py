"""Option hierarchy: a rooted tree whose leaves are job ids."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterator, Union

from .core import InstanceError

Tree = Union[int, tuple]


def _freeze(node) -> Tree:
    if isinstance(node, (list, tuple)):
        return tuple(_freeze(c) for c in node)
    return int(node)


class OptionHierarchy:
    """Internal nodes are tuples of children (abstract options), leaves are ints (jobs).

    >>> h = OptionHierarchy(((((0, 1), 2), (3, 4))))
    >>> h.leaves()
    [0, 1, 2, 3, 4]
    >>> h.to_json()
    '[[[0, 1], 2], [3, 4]]'
    """

    def __init__(self, root):
        self.root = _freeze(root)
        leaves = self.leaves()
        if len(set(leaves)) != len(leaves):
            raise InstanceError("a job appears in more than one leaf")
        for opt in self.options():
            if len(opt) < 2:
                raise InstanceError("every abstract option needs at least two children")

    @classmethod
    def flat(cls, n_jobs: int) -> "OptionHierarchy":
        if n_jobs < 1:
            raise InstanceError("hierarchy needs at least one job")
        return cls(0 if n_jobs == 1 else tuple(range(n_jobs)))

    def leaves(self) -> list:
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, tuple):
                stack.extend(reversed(node))
            else:
                out.append(node)
        return out

    def options(self) -> Iterator[tuple]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, tuple):
                yield node
                stack.extend(reversed(node))

    def depth(self) -> int:
        def d(node):
            return 1 + max(map(d, node)) if isinstance(node, tuple) else 0
        return d(self.root)

    def check_jobs(self, n_jobs: int) -> None:
        if sorted(self.leaves()) != list(range(n_jobs)):
            raise InstanceError("hierarchy leaves must be exactly the job ids 0..n-1")

    def canonical(self) -> Tree:
        """Order-independent form: children sorted recursively."""
        def key(node):
            return (0, node) if isinstance(node, int) else (1, repr(node))

        def canon(node):
            if isinstance(node, int):
                return node
            return tuple(sorted((canon(c) for c in node), key=key))
        return canon(self.root)

    def __eq__(self, other):
        return isinstance(other, OptionHierarchy) and self.root == other.root

    def __hash__(self):
        return hash(self.root)

    def __repr__(self):
        return f"OptionHierarchy({self.to_json()})"

    def to_json(self, path: Union[str, Path, None] = None) -> str:
        text = json.dumps(self.root).replace("(", "[").replace(")", "]")
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source: Union[str, Path]) -> "OptionHierarchy":
        p = Path(source)
        text = p.read_text() if p.suffix == ".json" and p.exists() else str(source)
        return cls(json.loads(text))
