"""Prefix parse tree over tokens with a shared wildcard branch."""

from __future__ import annotations

from typing import Iterator, Sequence

from babylon import kernels
from babylon.parse_core.syntax import SyntaxTemplate


class Node:
    __slots__ = ("children", "cluster_refs")

    def __init__(self):
        # key None is the wildcard branch
        self.children: dict[str | None, Node] = {}
        self.cluster_refs: set[int] = set()


class ParseTree:
    def __init__(self):
        self.root = Node()

    def insert(self, syntax: SyntaxTemplate, cluster_id: int) -> None:
        node = self.root
        for key in syntax.mask:
            child = node.children.get(key)
            if child is None:
                child = node.children[key] = Node()
            node = child
        node.cluster_refs.add(cluster_id)

    def remove(self, syntax: SyntaxTemplate, cluster_id: int) -> None:
        """Drop a cluster pointer and prune nodes left empty."""
        path = [self.root]
        for key in syntax.mask:
            child = path[-1].children.get(key)
            if child is None:
                return
            path.append(child)
        path[-1].cluster_refs.discard(cluster_id)
        for depth in range(len(path) - 1, 0, -1):
            node = path[depth]
            if node.children or node.cluster_refs:
                break
            del path[depth - 1].children[syntax.mask[depth - 1]]

    def candidates(self, tokens: Sequence[str]) -> set[int]:
        return kernels.walk(self.root, tokens)

    def reaches(self, syntax: SyntaxTemplate, cluster_id: int) -> bool:
        node = self.root
        for key in syntax.mask:
            node = node.children.get(key)
            if node is None:
                return False
        return cluster_id in node.cluster_refs

    def iter_refs(self) -> Iterator[tuple[tuple, int]]:
        """Yield (path mask, cluster id) for every pointer in the tree."""
        stack = [(self.root, ())]
        while stack:
            node, path = stack.pop()
            for cid in node.cluster_refs:
                yield path, cid
            for key, child in node.children.items():
                stack.append((child, path + (key,)))

    def node_count(self) -> int:
        count, stack = 0, [self.root]
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(node.children.values())
        return count


def update_tree(tree: ParseTree, syntax: SyntaxTemplate, cluster_id: int) -> None:
    tree.insert(syntax, cluster_id)
