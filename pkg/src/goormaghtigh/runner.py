"""Checkpointed, optionally parallel driver around the block search."""

import json
import logging
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from itertools import islice

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .search import (
    SearchConfig,
    fnv1a_64,
    is_unexpected,
    iter_blocks,
    m_candidates,
    process_block,
    select_tables,
    x_limit,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 3
EXIT_PAUSED = 4


class ResumeError(Exception):
    pass


def run_hash(cfg: SearchConfig, threads: int) -> str:
    text = cfg.canonical_text()
    # Adaptive prime order is refreshed once per wave of `threads` blocks.
    if cfg.adaptive:
        text += f"threads={threads}\n"
    return format(fnv1a_64(text.encode()), "016x")


def dump_record(rec: dict) -> str:
    return json.dumps(rec, separators=(",", ":")) + "\n"


_worker_tables = None
_worker_cfg = None


def _init_worker(tables, cfg):
    global _worker_tables, _worker_cfg
    _worker_tables, _worker_cfg = tables, cfg


def _ordered(tables, order):
    if order is None:
        return tables
    by_p = {t.p: t for t in tables}
    return [by_p[p] for p in order]


def _work(job):
    unit, order = job
    return process_block(_ordered(_worker_tables, order), _worker_cfg, unit)


def _wave_order(tables, kills, adaptive):
    if not adaptive:
        return None
    return [t.p for t in sorted(tables, key=lambda t: (-kills.get(t.p, 0), t.p))]


class _Writer:
    def __init__(self, fh, binary):
        self.fh = fh
        self.binary = binary

    def write(self, rec):
        line = dump_record(rec)
        self.fh.write(line.encode() if self.binary else line)

    def sync(self):
        self.fh.flush()
        if self.binary:
            os.fsync(self.fh.fileno())

    def tell(self):
        return self.fh.tell() if self.binary else 0


def _open_report(report_path, ck: Checkpoint, fresh: bool, stdout):
    if report_path is None or report_path == "-":
        return _Writer(stdout, binary=False), None
    if fresh or ck.position is None and ck.report_offset == 0:
        fh = open(report_path, "wb")
    else:
        fh = open(report_path, "r+b")
        # Records written after the last checkpoint are replayed, so drop them.
        fh.truncate(ck.report_offset)
        fh.seek(ck.report_offset)
    return _Writer(fh, binary=True), fh


def _completed_ms(ms, m, next_x, cfg):
    done = [mm for mm in ms if mm < m]
    if next_x > x_limit(m, cfg):
        done.append(m)
    return done


def run_search(
    cfg: SearchConfig,
    tables,
    report_path=None,
    checkpoint_path=None,
    fresh=False,
    threads=1,
    max_blocks=None,
    stdout=None,
) -> int:
    """Run (or resume) one shard and return a process exit status.

    0: finished, nothing unexpected. 3: finished with an unexpected survivor
    or solution. 4: stopped after max_blocks with a checkpoint to resume from.
    """
    tables = select_tables(tables, cfg)
    h = run_hash(cfg, threads)

    ck = Checkpoint(config_hash=h)
    if checkpoint_path is not None and not fresh:
        if os.path.exists(checkpoint_path):
            ck = load_checkpoint(checkpoint_path, h)
            if ck.done:
                log.info("checkpoint %s records a finished search; nothing to do", checkpoint_path)
                return EXIT_UNEXPECTED if ck.unexpected else EXIT_OK
            log.info("resuming at m=%s x=%s", ck.m, ck.next_x)
        elif report_path not in (None, "-") and os.path.exists(report_path) and os.path.getsize(report_path) > 0:
            raise ResumeError(
                f"checkpoint {checkpoint_path} is missing but report {report_path} has content; "
                "pass --fresh to start over"
            )

    writer, fh = _open_report(report_path, ck, fresh, stdout)
    ms = m_candidates(cfg)
    kills = dict(ck.kills)
    unexpected = ck.unexpected
    wave = max(1, threads)
    blocks = iter_blocks(cfg, ck.position)
    pool = None
    if threads > 1:
        ctx = multiprocessing.get_context("fork")
        pool = ProcessPoolExecutor(threads, mp_context=ctx, initializer=_init_worker, initargs=(tables, cfg))
    else:
        _init_worker(tables, cfg)
    processed = 0
    try:
        while True:
            units = list(islice(blocks, wave))
            if not units:
                break
            if max_blocks is not None and processed >= max_blocks:
                return EXIT_PAUSED
            order = _wave_order(tables, kills, cfg.adaptive)
            jobs = [(u, order) for u in units]
            results = pool.map(_work, jobs) if pool else map(_work, jobs)
            for res in results:
                for rec in res.records():
                    unexpected = unexpected or is_unexpected(rec)
                    writer.write(rec)
                for p, c in res.kills.items():
                    kills[p] = kills.get(p, 0) + c
            processed += len(units)
            last = units[-1]
            writer.sync()
            if checkpoint_path is not None:
                _, m, _, x_hi = last
                ck = Checkpoint(
                    config_hash=h,
                    m=m,
                    next_x=x_hi + 1,
                    completed_m=_completed_ms(ms, m, x_hi + 1, cfg),
                    block_index=last[0] + 1,
                    report_offset=writer.tell(),
                    kills=dict(kills),
                    unexpected=unexpected,
                )
                save_checkpoint(ck, checkpoint_path)
        for p, c in sorted(kills.items()):
            writer.write({"type": "stats", "p": p, "kills": c})
        writer.sync()
        if checkpoint_path is not None:
            ck.kills = dict(kills)
            ck.unexpected = unexpected
            ck.report_offset = writer.tell()
            ck.completed_m = list(ms)
            ck.done = True
            save_checkpoint(ck, checkpoint_path)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
        if fh is not None:
            fh.close()
    return EXIT_UNEXPECTED if unexpected else EXIT_OK
