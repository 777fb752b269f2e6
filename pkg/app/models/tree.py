from dataclasses import dataclass

import numpy as np

from app.schemas.models import TreeDocument, TreeHyperparams, TreeNodes

LEAF = -1


@dataclass(frozen=True, eq=False)
class TreeModel:
    """Binary CART tree stored as flat node arrays; rows with ``x <= threshold`` go left."""

    feature_names: tuple[str, ...]
    hyperparams: TreeHyperparams
    seed: int
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    preset: str | None = None

    @property
    def node_count(self) -> int:
        return int(self.feature.size)

    def is_leaf(self, node: int) -> bool:
        return bool(self.feature[node] == LEAF)

    def depth(self) -> int:
        depths = np.zeros(self.node_count, dtype=int)
        # children always follow their parent in preorder
        for node in range(self.node_count):
            if not self.is_leaf(node):
                depths[self.left[node]] = depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def predict_proba(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        rows = np.arange(values.shape[0])
        node = np.zeros(values.shape[0], dtype=int)
        for _ in range(self.depth()):
            feature = self.feature[node]
            leaf = feature == LEAF
            if leaf.all():
                break
            go_left = values[rows, np.where(leaf, 0, feature)] <= self.threshold[node]
            node = np.where(leaf, node, np.where(go_left, self.left[node], self.right[node]))
        return self.value[node]

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        values = np.asarray(values, dtype=float)
        leaves = np.empty(values.shape[0], dtype=int)
        for row in range(values.shape[0]):
            node = 0
            while not self.is_leaf(node):
                node = self.left[node] if values[row, self.feature[node]] <= self.threshold[node] else self.right[node]
            leaves[row] = node
        return leaves

    def used_columns(self) -> list[int]:
        return sorted({int(f) for f in self.feature if f != LEAF})

    def to_document(self) -> TreeDocument:
        return TreeDocument(
            preset=self.preset,
            feature_names=list(self.feature_names),
            hyperparams=self.hyperparams,
            seed=self.seed,
            nodes=TreeNodes(
                feature=[int(f) for f in self.feature],
                threshold=[float(t) for t in self.threshold],
                left=[int(i) for i in self.left],
                right=[int(i) for i in self.right],
                value=[float(v) for v in self.value],
                n_samples=[int(n) for n in self.n_samples],
            ),
        )

    @classmethod
    def from_document(cls, document: TreeDocument) -> "TreeModel":
        nodes = document.nodes
        return cls(
            feature_names=tuple(document.feature_names),
            hyperparams=document.hyperparams,
            seed=document.seed,
            feature=np.asarray(nodes.feature, dtype=int),
            threshold=np.asarray(nodes.threshold, dtype=float),
            left=np.asarray(nodes.left, dtype=int),
            right=np.asarray(nodes.right, dtype=int),
            value=np.asarray(nodes.value, dtype=float),
            n_samples=np.asarray(nodes.n_samples, dtype=int),
            preset=document.preset,
        )
