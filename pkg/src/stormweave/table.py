"""Precomputed transition table: per-point candidate lists with weights.

Every eligible source point gets a row of candidate global point ids and
normalized kernel weights, stored CSR-style. The build is a pure function of
(library, params, reserved_steps): rebuilding bit-identically reproduces the
same file, and partitioning the row computation across workers cannot change
the result because rows are independent and merged in source order.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import container
from .errors import InputError, StaleArtifactError
from .kernels import KernelParams, transition_weights
from .library import SegmentLibrary

LOGGER = logging.getLogger(__name__)

TABLE_SCHEMA = "stormweave-table/1"


@dataclass(frozen=True)
class TransitionTable:
    params: KernelParams
    reserved_steps: int
    library_checksum: str
    row_ptr: np.ndarray     # (n_points + 1,) int64, CSR offsets
    cand_ids: np.ndarray    # int64 global point ids
    weights: np.ndarray     # float64, normalized per row
    eligible: np.ndarray    # bool per point; ineligible points have no row
    cum_weights: np.ndarray = field(repr=False, default=None)  # derived

    @property
    def n_points(self) -> int:
        return len(self.row_ptr) - 1

    @property
    def n_candidates(self) -> int:
        return len(self.cand_ids)

    def has_row(self, gid: int) -> bool:
        return bool(self.eligible[gid])

    def row(self, gid: int) -> tuple[np.ndarray, np.ndarray]:
        s, e = self.row_ptr[gid], self.row_ptr[gid + 1]
        return self.cand_ids[s:e], self.weights[s:e]

    def row_cum(self, gid: int) -> tuple[np.ndarray, np.ndarray]:
        s, e = self.row_ptr[gid], self.row_ptr[gid + 1]
        return self.cand_ids[s:e], self.cum_weights[s:e]

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(self.library_checksum.encode())
        h.update(repr(sorted(self.params.to_dict().items())).encode())
        h.update(np.int64(self.reserved_steps).tobytes())
        h.update(self.row_ptr.tobytes())
        h.update(self.cand_ids.tobytes())
        h.update(self.weights.tobytes())
        return h.hexdigest()


def _finalize(params, reserve, checksum, row_ptr, cand_ids, weights, eligible) -> TransitionTable:
    for arr in (row_ptr, cand_ids, weights, eligible):
        arr.setflags(write=False)
    if len(weights):
        cum = np.cumsum(weights)
        # per-row cumulative: subtract the running total at each row start
        starts = cum[row_ptr[:-1] - 1]
        starts[row_ptr[:-1] == 0] = 0.0
        cum_rows = cum - np.repeat(starts, np.diff(row_ptr))
    else:
        cum_rows = np.empty(0)
    cum_rows.setflags(write=False)
    return TransitionTable(
        params=params,
        reserved_steps=reserve,
        library_checksum=checksum,
        row_ptr=row_ptr,
        cand_ids=cand_ids,
        weights=weights,
        eligible=eligible,
        cum_weights=cum_rows,
    )


def precompute_table(
    library: SegmentLibrary,
    params: KernelParams,
    reserved_steps: int | None = None,
    workers: int = 1,
) -> TransitionTable:
    """Build the lookup table for every eligible source point."""
    reserve = library.reserved_steps if reserved_steps is None else int(reserved_steps)
    n = library.n_points
    eligible = library.eligible.copy() if reserve == library.reserved_steps else _eligible_mask(library, reserve)

    src_gids = np.flatnonzero(eligible)
    chunks = np.array_split(src_gids, max(1, min(workers * 8, len(src_gids) or 1)))

    def build_chunk(gids):
        out = []
        for gid in gids:
            ti = int(library.point_track[gid])
            si = int(library.point_step[gid])
            ids, w = transition_weights(library, ti, si, params, reserved_steps=reserve)
            out.append((int(gid), ids, w))
        return out

    if workers <= 1:
        results = [build_chunk(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(build_chunk, chunks))

    row_ptr = np.zeros(n + 1, dtype=np.int64)
    rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for chunk in results:
        for gid, ids, w in chunk:
            rows[gid] = (ids, w)
            row_ptr[gid + 1] = len(ids)
    np.cumsum(row_ptr, out=row_ptr)

    total = int(row_ptr[-1])
    cand_ids = np.empty(total, dtype=np.int64)
    weights = np.empty(total, dtype=np.float64)
    for gid, (ids, w) in rows.items():
        s, e = row_ptr[gid], row_ptr[gid + 1]
        cand_ids[s:e] = ids
        weights[s:e] = w

    return _finalize(params, reserve, library.checksum, row_ptr, cand_ids, weights, eligible)


def _eligible_mask(library: SegmentLibrary, reserve: int) -> np.ndarray:
    lens = np.diff(library.track_offsets)
    cut = lens[library.point_track] - reserve
    return library.point_step < cut


def save_table(path, table: TransitionTable) -> None:
    header = {
        "schema": TABLE_SCHEMA,
        "params": table.params.to_dict(),
        "reserved_steps": table.reserved_steps,
        "library_checksum": table.library_checksum,
        "table_checksum": table.checksum(),
    }
    container.save(
        path,
        header,
        {
            "row_ptr": table.row_ptr,
            "cand_ids": table.cand_ids,
            "weights": table.weights,
            "eligible": table.eligible,
        },
    )


def load_table(path, library: SegmentLibrary | None = None) -> TransitionTable:
    """Load a table; refuses a table built against a different library."""
    header, arrays = container.load(path)
    if header.get("schema") != TABLE_SCHEMA:
        raise InputError(f"{path}: not a transition table (schema {header.get('schema')!r})")

    table = _finalize(
        KernelParams.from_dict(header["params"]),
        int(header["reserved_steps"]),
        header["library_checksum"],
        arrays["row_ptr"],
        arrays["cand_ids"],
        arrays["weights"],
        arrays["eligible"].astype(bool),
    )
    if table.checksum() != header["table_checksum"]:
        raise InputError(f"{path}: table content does not match its recorded checksum")
    if library is not None and library.checksum != table.library_checksum:
        raise StaleArtifactError(
            f"{path}: table was built against a different library "
            f"(table {table.library_checksum[:12]}…, library {library.checksum[:12]}…)"
        )
    return table
