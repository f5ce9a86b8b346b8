"""Vectorized Monte Carlo drivers with thread-count-independent results.

Replicas are processed in fixed chunks of CHUNK; chunk i always uses the
generator derived from (master_seed, task_id, i) and results are
concatenated in chunk order, so any thread count produces byte-identical
reports.  The batch samplers here draw from the same per-trial
distributions as the scalar ones in the majority module (their stream
consumption differs, so per-run sequences are not comparable, only the
distributions are).
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from .majority import (
    MajorityParams,
    build_family_a,
    build_family_b,
    default_amplification_reps,
    t_for_eps,
)
from .seeding import derive_stream
from .util import POP16

CHUNK = 1024


def run_chunked(
    total: int,
    chunk_fn: Callable[[np.random.Generator, int], tuple],
    master_seed: int,
    task_id: str,
    threads: int = 1,
):
    """Run chunk_fn over fixed-size chunks; concatenate outputs in order.

    chunk_fn(rng, count) must return a tuple of 1-D arrays of length
    count.  The returned tuple holds the concatenations over all chunks.
    """
    if total < 1:
        raise ValueError("total must be positive")
    jobs = []
    done = 0
    ci = 0
    while done < total:
        cnt = min(CHUNK, total - done)
        jobs.append((ci, cnt))
        done += cnt
        ci += 1

    def work(job):
        idx, cnt = job
        return chunk_fn(derive_stream(master_seed, task_id, idx), cnt)

    if threads <= 1:
        parts = [work(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, jobs))
    width = len(parts[0])
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(width))


def eliminate_a_batch(
    params: MajorityParams, z, rng: np.random.Generator, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """count independent A-elimination runs; returns (outputs, queries)."""
    fam = build_family_a(params)
    nf = len(fam)
    if nf > 16:
        raise ValueError("batch sampler uses 16-bit survivor masks")
    rhos = np.array([e.rho(z) for e in fam])
    mask = np.full(count, (1 << nf) - 1, dtype=np.uint16)
    queries = np.zeros(count, dtype=np.int64)
    output = np.zeros(count, dtype=np.uint8)
    active = np.ones(count, dtype=bool)
    k = 0
    while active.any():
        k += 1
        m = params.copies_factor * k
        acts = np.flatnonzero(active)
        queries[acts] += m * POP16[mask[acts]].astype(np.int64)
        for j in range(nf):
            bit = 1 << j
            holders = acts[(mask[acts] & bit) != 0]
            if holders.size:
                draws = rng.binomial(m, rhos[j], size=holders.size)
                dead = holders[2 * draws <= m]
                mask[dead] &= np.uint16(0xFFFF ^ bit)
        wiped = acts[mask[acts] == 0]
        output[wiped] = 1
        active[wiped] = False
        rest = np.flatnonzero(active)
        over = rest[queries[rest] >= params.budget]
        active[over] = False  # output stays 0
    return output, queries


def eliminate_b_batch(
    params: MajorityParams, z, rng: np.random.Generator, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """count independent B-elimination runs; returns (outputs, queries)."""
    fam = build_family_b(params)
    mlen = len(fam)
    queries = np.zeros(count, dtype=np.int64)
    if mlen == 0:
        return np.ones(count, dtype=np.uint8), queries
    rhos = np.array([e.rho(z) for e in fam])
    pos = np.zeros(count, dtype=np.int64)
    for _ in range(params.b_trials):
        live = np.flatnonzero(pos < mlen)
        if live.size == 0:
            break
        u = rng.random(live.size)
        queries[live] += 1
        died = live[u >= rhos[pos[live]]]
        pos[died] += 1
    return (pos == mlen).astype(np.uint8), queries


def majority_batch(
    n: int,
    z,
    eps: float,
    rng: np.random.Generator,
    count: int,
    amplification_reps: Optional[int] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """count independent majority runs at a known weight."""
    t = t_for_eps(eps)
    if t > n // 4:
        out = np.full(count, 1 if 2 * z >= n else 0, dtype=np.uint8)
        return out, np.full(count, n, dtype=np.int64)
    params = MajorityParams(n, t)
    r = amplification_reps or default_amplification_reps(eps)
    votes = np.zeros(count, dtype=np.int64)
    queries = np.zeros(count, dtype=np.int64)
    for _ in range(r):
        o, q = eliminate_a_batch(params, z, rng, count)
        votes += o
        queries += q
    outputs = np.zeros(count, dtype=np.uint8)
    consent = np.flatnonzero(2 * votes > r)
    if consent.size:
        bo, bq = eliminate_b_batch(params, z, rng, consent.size)
        outputs[consent] = bo
        queries[consent] += bq
    return outputs, queries


def majority_weight_trial(
    n: int,
    z,
    eps: float,
    runs: int,
    master_seed: int,
    threads: int = 1,
    amplification_reps: Optional[int] = None,
) -> dict:
    """Monte Carlo error estimate for one weight; deterministic row dict."""
    task = f"majority:n={n}:z={z!r}:eps={eps!r}:r={amplification_reps!r}"
    outputs, queries = run_chunked(
        runs,
        lambda rng, cnt: majority_batch(n, z, eps, rng, cnt, amplification_reps),
        master_seed,
        task,
        threads,
    )
    true = 1 if 2 * z >= n else 0
    wrong = int(np.count_nonzero(outputs != true))
    return {
        "n": n,
        "weight": float(z),
        "true_value": true,
        "runs": runs,
        "wrong": wrong,
        "empirical_error": wrong / runs,
        "max_queries": int(queries.max()),
        "mean_queries": float(queries.mean()),
    }


def elimination_trial(
    kind: str,
    params: MajorityParams,
    z,
    runs: int,
    master_seed: int,
    threads: int = 1,
) -> dict:
    """Monte Carlo estimate of P[output = 1] for one elimination family."""
    if kind == "A":
        batch = lambda rng, cnt: eliminate_a_batch(params, z, rng, cnt)
    elif kind == "B":
        batch = lambda rng, cnt: eliminate_b_batch(params, z, rng, cnt)
    else:
        raise ValueError(f"kind must be A or B, got {kind!r}")
    task = f"eliminate{kind}:N={params.N}:t={params.t}:z={z!r}"
    outputs, queries = run_chunked(runs, batch, master_seed, task, threads)
    ones = int(np.count_nonzero(outputs))
    return {
        "kind": kind,
        "N": params.N,
        "t": params.t,
        "weight": float(z),
        "runs": runs,
        "ones": ones,
        "p_one_hat": ones / runs,
        "max_queries": int(queries.max()),
        "mean_queries": float(queries.mean()),
    }


def render_report(
    experiment: str, config: dict, metrics: dict, rows: Optional[list] = None
) -> str:
    """Canonical report text: sorted keys, two-space indent, LF line ends.

    Timing and host details stay out on purpose so reruns with the same
    seed are byte-identical regardless of machine or thread count.
    """
    data = {"version": 1, "experiment": experiment, "config": config, "metrics": metrics}
    if rows is not None:
        data["rows"] = rows
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_text(path: str, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
