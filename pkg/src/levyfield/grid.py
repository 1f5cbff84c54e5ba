"""Lattice-valued fields and their on-disk format."""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np


@dataclass
class GridField:
    """Field values on the lattice origin + (i h1, j h2), i = 0..n1, j = 0..n2.

    `raw`, `noise` and `lattice` are kept in memory only so that off-lattice
    queries can reuse the same noise; they are rebuilt from the seed on load.
    """

    values: np.ndarray
    origin: tuple
    spacings: tuple
    meta: dict
    raw: Optional[np.ndarray] = field(default=None, repr=False)
    noise: Optional[np.ndarray] = field(default=None, repr=False)
    lattice: Optional[object] = field(default=None, repr=False)

    @property
    def shape(self):
        return self.values.shape

    def coords(self):
        n1, n2 = self.values.shape
        t1 = self.origin[0] + self.spacings[0] * np.arange(n1)
        t2 = self.origin[1] + self.spacings[1] * np.arange(n2)
        return t1, t2

    def to_binary(self, path) -> None:
        """Row-major little-endian float64 values plus a JSON sidecar `<path>.json`."""
        path = Path(path)
        np.ascontiguousarray(self.values, dtype="<f8").tofile(path)
        sidecar = {"shape": list(self.values.shape), "dtype": "<f8", "order": "C",
                   "origin": list(self.origin), "spacings": list(self.spacings), "meta": self.meta}
        path.with_name(path.name + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_binary(cls, path) -> "GridField":
        path = Path(path)
        side = json.loads(path.with_name(path.name + ".json").read_text())
        values = np.fromfile(path, dtype="<f8").reshape(side["shape"])
        return cls(values, tuple(side["origin"]), tuple(side["spacings"]), side["meta"])

    def to_csv(self, path) -> None:
        t1, t2 = self.coords()
        T1, T2 = np.meshgrid(t1, t2, indexing="ij")
        with open(path, "w") as fh:
            fh.write("t1,t2,value\n")
            for a, b, v in zip(T1.ravel(), T2.ravel(), self.values.ravel()):
                fh.write(f"{a!r},{b!r},{v!r}\n")
