"""MDP archive (.npz) with fixed zip metadata, so identical MDPs give identical bytes."""

from __future__ import annotations

import io
import zipfile
from pathlib import Path

import numpy as np

from ..models import Mdp

_EPOCH = (1980, 1, 1, 0, 0, 0)


def write_mdp(mdp: Mdp, path: str | Path) -> None:
    arrays = {
        "transitions": mdp.transitions,
        "features": mdp.features,
        "initial_dist": mdp.initial_dist,
        "discount": np.array(mdp.discount),
    }
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name, array in arrays.items():
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.asarray(array, order="C"), allow_pickle=False)
            info = zipfile.ZipInfo(f"{name}.npy", date_time=_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            zf.writestr(info, buf.getvalue())


def read_mdp(path: str | Path) -> Mdp:
    with np.load(path, allow_pickle=False) as npz:
        return Mdp(
            transitions=npz["transitions"],
            features=npz["features"],
            discount=npz["discount"].item(),
            initial_dist=npz["initial_dist"],
        )
