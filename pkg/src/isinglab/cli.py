"""Batch front end.

Six subcommands (`sample`, `decompose`, `psi`, `estimate`, `multiscale`,
`report`), each driven by a JSON config and writing into an output
directory.  Defaults are expanded on load and echoed back into the run
manifest, so a manifest is itself a valid config and re-running from it
reproduces the outputs byte for byte.  Every output file carries the
tool version, the config hash, and the seed: snapshots in their binary
header, delimited files in a leading comment line, figures in their PNG
metadata.  All writes are atomic (temp + rename).

Exit status: 0 success, 2 invalid config, 3 acceptance-check failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys

from . import __version__, stats
from .interface import excess, extract, flat_interface
from .ising import ChainParams, default_burn_in, run_chain
from .lattice import Box, l0_face
from .pillars import EmptyPillar, decompose, excess_report, pillar
from .psimap import NotTame, audit_check, psi, psi_at_height
from .snapshots import (
    SnapshotError,
    read_snapshot,
    snapshot_bytes,
    write_atomic,
)
from .walls import standardize, wall_excess

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECK = 3
EXIT_IO = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- config plumbing -----------------------------------------------------


def _json_default(v):
    # numpy scalars leak out of the observable code; keep JSON plain
    if hasattr(v, "item"):
        return v.item()
    raise TypeError(f"not JSON serializable: {type(v)}")


def canonical_json(obj) -> str:
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), default=_json_default
    )


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as e:
        raise CliError(EXIT_CONFIG, f"{path}: invalid JSON: {e}") from e
    if not isinstance(cfg, dict):
        raise CliError(EXIT_CONFIG, f"{path}: config must be a JSON object")
    # a run manifest round-trips as a config for the same command
    if "config" in cfg and "command" in cfg:
        cfg = cfg["config"]
    return cfg


def expand_config(cfg: dict, required: dict, defaults: dict) -> dict:
    out = {}
    for key, kind in required.items():
        if key not in cfg:
            raise CliError(EXIT_CONFIG, f"missing config field {key!r}")
        out[key] = _coerce(key, cfg[key], kind)
    for key, (kind, default) in defaults.items():
        val = cfg.get(key, default)
        out[key] = val if val is None else _coerce(key, val, kind)
    known = set(required) | set(defaults)
    for key in cfg:
        if key not in known:
            raise CliError(EXIT_CONFIG, f"unknown config field {key!r}")
    return out


def _coerce(key, val, kind):
    try:
        if kind is int:
            if isinstance(val, bool) or val != int(val):
                raise ValueError
            return int(val)
        if kind is float:
            if isinstance(val, bool):
                raise ValueError
            return float(val)
        if kind is bool:
            if not isinstance(val, bool):
                raise ValueError
            return val
        if kind is str:
            if not isinstance(val, str):
                raise ValueError
            return val
        if kind == "pair":
            a, b = val
            return [int(a), int(b)]
        if kind == "intlist":
            return [int(v) for v in val]
    except (TypeError, ValueError):
        pass
    raise CliError(EXIT_CONFIG, f"config field {key!r}: expected {kind}")


def _dims_of(cfg: dict) -> Box:
    return Box.centered(cfg["n"], cfg["m"], cfg["h_cap"])


def _chain_of(cfg: dict) -> ChainParams:
    try:
        return ChainParams(
            beta=cfg["beta"],
            sweeps=cfg["sweeps"],
            burn_in=cfg["burn_in"],
            thin=cfg["thin"],
            seed=cfg["seed"],
            dims=_dims_of(cfg),
        )
    except ValueError as e:
        raise CliError(EXIT_CONFIG, str(e)) from e


_CHAIN_REQUIRED = {"beta": float, "n": int, "sweeps": int, "seed": int}


def _chain_defaults(cfg: dict) -> dict:
    n = cfg.get("n")
    if not isinstance(n, int) or n < 1:
        raise CliError(EXIT_CONFIG, "config field 'n': expected positive int")
    return {
        "m": (int, n),
        "h_cap": (int, 8),
        "burn_in": (int, default_burn_in(n)),
        "thin": (int, 1),
    }


# -- output plumbing -----------------------------------------------------


def _stamp(cfg_hash: str, seed) -> str:
    return f"# isinglab {__version__} config={cfg_hash[:16]} seed={seed}\n"


def _write_stamped(path: str, cfg_hash: str, seed, body: str) -> None:
    write_atomic(path, (_stamp(cfg_hash, seed) + body).encode())


def _write_csv(path, cfg_hash, seed, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    _write_stamped(path, cfg_hash, seed, buf.getvalue())


def _write_ndjson(path, cfg_hash, seed, records) -> None:
    head = {
        "schema": "isinglab/header/1",
        "version": __version__,
        "config_hash": cfg_hash,
        "seed": seed,
    }
    lines = [canonical_json(head)]
    lines += [canonical_json(r) for r in records]
    write_atomic(path, ("\n".join(lines) + "\n").encode())


def write_manifest(out_dir, command, cfg, names) -> None:
    entries = []
    for name in names:
        with open(os.path.join(out_dir, name), "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        entries.append({"path": name, "sha256": digest})
    manifest = {
        "tool": "isinglab",
        "version": __version__,
        "command": command,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "seed": cfg.get("seed"),
        "outputs": entries,
    }
    body = json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    write_atomic(os.path.join(out_dir, "manifest.json"), body.encode())


def _snapshot_paths(source: str) -> list[str]:
    """Snapshot files named by a manifest, a directory, or one file."""
    if os.path.isdir(source):
        names = sorted(n for n in os.listdir(source) if n.endswith(".snap"))
        return [os.path.join(source, n) for n in names]
    if source.endswith(".json"):
        with open(source) as fh:
            manifest = json.load(fh)
        base = os.path.dirname(source)
        return [
            os.path.join(base, e["path"])
            for e in manifest.get("outputs", [])
            if e["path"].endswith(".snap")
        ]
    return [source]


def _face_key(f) -> list[int]:
    return [f.axis, f.fx, f.fy, f.fz]


def _layer_index(f) -> list[int]:
    return [(f.fx - 1) // 2, (f.fy - 1) // 2]


# -- commands ------------------------------------------------------------


def cmd_sample(raw: dict, out_dir: str) -> int:
    cfg = expand_config(
        raw,
        _CHAIN_REQUIRED,
        {**_chain_defaults(raw), "replica": (int, 0)},
    )
    names = []
    # an empty run (nothing kept after burn-in) is a valid, empty output
    if cfg["sweeps"] != cfg["burn_in"]:
        chain = _chain_of(cfg)
        for i, spin_cfg in enumerate(run_chain(chain, replica=cfg["replica"])):
            sweep = cfg["burn_in"] + (i + 1) * cfg["thin"]
            name = f"sample_{i:06d}.snap"
            write_atomic(
                os.path.join(out_dir, name),
                snapshot_bytes(spin_cfg, cfg["beta"], cfg["seed"], sweep),
            )
            names.append(name)
    write_manifest(out_dir, "sample", cfg, names)
    return EXIT_OK


def cmd_decompose(raw: dict, out_dir: str) -> int:
    cfg = expand_config(
        raw, {"snapshots": str}, {"x": ("pair", None)}
    )
    h = config_hash(cfg)
    records = []
    seed = None
    for path in _snapshot_paths(cfg["snapshots"]):
        spin_cfg, meta = read_snapshot(path)
        seed = meta["seed"] if seed is None else seed
        iface = extract(spin_cfg)
        coll = standardize(iface)
        rec = {
            "schema": "isinglab/decompose/1",
            "sample": os.path.basename(path),
            "sweep": meta["sweep"],
            "n_faces": len(iface),
            "excess_flat": excess(iface, flat_interface(spin_cfg.dims)),
            "M": max(f.top_d for f in iface.faces) // 2,
            "walls": [
                {
                    "index": _layer_index(w.index),
                    "n_faces": len(w.faces),
                    "excess": wall_excess(w),
                }
                for w in sorted(coll, key=lambda w: _face_key(w.index))
            ],
        }
        if cfg["x"] is not None:
            a, b = cfg["x"]
            try:
                p = pillar(iface, l0_face(a, b))
                d = decompose(p)
                rep = excess_report(p, d)
                rec["pillar"] = {
                    "x": [a, b],
                    "height": p.height,
                    "cut_points": list(d.cut_points),
                    "n_increments": len(d.increments),
                    "m_base": rep.m_base,
                    "m_spine": rep.m_spine,
                    "m_increments": list(rep.m_increments),
                    "m_remainder": rep.m_remainder,
                }
            except EmptyPillar:
                rec["pillar"] = None
        records.append(rec)
    _write_ndjson(os.path.join(out_dir, "decompose.ndjson"), h, seed, records)
    write_manifest(out_dir, "decompose", cfg, ["decompose.ndjson"])
    return EXIT_OK


def cmd_psi(raw: dict, out_dir: str) -> int:
    cfg = expand_config(
        raw,
        {"snapshots": str, "x": "pair"},
        {"t": (int, None), "ell": (float, None), "dump": (bool, False)},
    )
    if (cfg["t"] is None) == (cfg["ell"] is None):
        raise CliError(EXIT_CONFIG, "exactly one of 't' and 'ell' is required")
    h = config_hash(cfg)
    a, b = cfg["x"]
    x = l0_face(a, b)
    records = []
    skipped = {"not-tame": 0, "empty-pillar": 0}
    failed = 0
    seed = None
    for path in _snapshot_paths(cfg["snapshots"]):
        spin_cfg, meta = read_snapshot(path)
        seed = meta["seed"] if seed is None else seed
        name = os.path.basename(path)
        iface = extract(spin_cfg)
        try:
            if cfg["t"] is not None:
                j, audit = psi(iface, x, cfg["t"])
            else:
                j, audit = psi_at_height(iface, x, cfg["ell"])
        except NotTame:
            skipped["not-tame"] += 1
            records.append(
                {"schema": "isinglab/psi/1", "sample": name, "skipped": "not-tame"}
            )
            continue
        except EmptyPillar:
            skipped["empty-pillar"] += 1
            records.append(
                {
                    "schema": "isinglab/psi/1",
                    "sample": name,
                    "skipped": "empty-pillar",
                }
            )
            continue
        ok, report = audit_check(audit, iface, j)
        if not ok:
            failed += 1
        rec = {
            "schema": "isinglab/psi/1",
            "sample": name,
            "t": audit.t,
            "excess_m": audit.excess_m,
            "n_faces_in": len(iface),
            "n_faces_out": len(j),
            "j_star": audit.j_star,
            "k_star": audit.k_star,
            "shift_schedule": list(audit.shift_schedule),
            "n_marked": len(audit.marked_Y),
            "deleted": sorted(_layer_index(f) for f in audit.deleted_D),
            "Wx_size": audit.Wx_J_size,
            "audit_ok": ok,
        }
        if not ok:
            rec["audit_failures"] = [v[0] for v in report]
        if cfg["ell"] is not None:
            rec["tau_ell"] = audit.metadata["tau_ell"]
        if cfg["dump"]:
            rec["output_faces"] = sorted(_face_key(f) for f in j.faces)
        records.append(rec)
    _write_ndjson(os.path.join(out_dir, "psi.ndjson"), h, seed, records)
    counts = {
        "checked": len(records) - sum(skipped.values()),
        "skipped": skipped,
        "audit_failures": failed,
    }
    body = json.dumps(counts, sort_keys=True, indent=2) + "\n"
    write_atomic(os.path.join(out_dir, "psi_counts.json"), body.encode())
    write_manifest(out_dir, "psi", cfg, ["psi.ndjson", "psi_counts.json"])
    if failed:
        raise CliError(EXIT_CHECK, f"{failed} audit check(s) failed")
    return EXIT_OK


def _csv_float(v: float) -> str:
    return repr(float(v))


def cmd_estimate(raw: dict, out_dir: str) -> int:
    cfg = expand_config(
        raw,
        _CHAIN_REQUIRED,
        {
            **_chain_defaults(raw),
            "h_max": (int, 4),
            "slack": (float, 0.25),
        },
    )
    h = config_hash(cfg)
    chain = _chain_of(cfg)
    try:
        table = stats.alpha_table(
            cfg["beta"], cfg["n"], cfg["h_max"], chain, slack=cfg["slack"]
        )
    except ValueError as e:
        raise CliError(EXIT_CONFIG, str(e)) from e
    rows = [
        (
            hh,
            _csv_float(table.entries[hh].value),
            _csv_float(table.entries[hh].stderr),
            table.entries[hh].n_samples,
        )
        for hh in sorted(table.entries)
    ]
    _write_csv(
        os.path.join(out_dir, "alpha.csv"),
        h,
        cfg["seed"],
        ("h", "alpha_hat", "stderr", "n_samples"),
        rows,
    )
    lines = [
        f"alpha table at beta={cfg['beta']} n={cfg['n']} "
        f"({table.entries[1].n_samples} samples)",
        f"slope fit (h >= 2): alpha = {table.alpha_hat.value:.4f} "
        f"+- {table.alpha_hat.stderr:.4f}",
        f"sup form max_h (alpha_h - {cfg['slack']})/h = "
        f"{table.alpha_sup.value:.4f}",
    ]
    for hh, flag in sorted(table.flags.items()):
        lines.append(f"h={hh}: {flag} (no climbs observed)")
    try:
        ms = stats.m_star(table, cfg["n"], cfg["beta"])
        lines.append(
            f"m* = {ms.value} (stderr interval [{ms.lo}, {ms.hi}]) from "
            f"inf{{h : alpha_h > 2 log(2n) - 2 beta = {ms.threshold:.4f}}}"
        )
    except ValueError:
        lines.append("m*: threshold 2 log(2n) - 2 beta not crossed in table")
    _write_stamped(
        os.path.join(out_dir, "summary.txt"), h, cfg["seed"],
        "\n".join(lines) + "\n",
    )
    write_manifest(out_dir, "estimate", cfg, ["alpha.csv", "summary.txt"])
    return EXIT_OK


def cmd_multiscale(raw: dict, out_dir: str) -> int:
    n = raw.get("n")
    if not isinstance(n, int) or n < 1:
        raise CliError(EXIT_CONFIG, "config field 'n': expected positive int")
    cfg = expand_config(
        raw,
        {"beta": float, "n": int, "L": int, "sweeps": int, "seed": int},
        {
            "h_cap": (int, 8),
            "sweeps_small": (int, raw.get("sweeps", 0)),
            "burn_in": (int, default_burn_in(n)),
            "thin": (int, 1),
            "seed_small": (int, raw.get("seed", 0) + 1),
        },
    )
    h = config_hash(cfg)
    big = ChainParams(
        beta=cfg["beta"],
        sweeps=cfg["sweeps"],
        burn_in=cfg["burn_in"],
        thin=cfg["thin"],
        seed=cfg["seed"],
        dims=Box.centered(cfg["n"], cfg["n"], cfg["h_cap"]),
    )
    small = ChainParams(
        beta=cfg["beta"],
        sweeps=cfg["sweeps_small"],
        burn_in=cfg["burn_in"],
        thin=cfg["thin"],
        seed=cfg["seed_small"],
        dims=Box.centered(cfg["L"], cfg["L"], cfg["h_cap"]),
    )
    try:
        rep = stats.multiscale(cfg["n"], cfg["L"], big, small)
    except ValueError as e:
        raise CliError(EXIT_CONFIG, str(e)) from e
    _write_csv(
        os.path.join(out_dir, "multiscale.csv"),
        h,
        cfg["seed"],
        ("ks", "kappa", "n_big", "n_blocks", "beta"),
        [
            (
                _csv_float(rep.ks),
                rep.kappa,
                rep.n_big,
                rep.n_blocks,
                _csv_float(rep.beta),
            )
        ],
    )
    body = (
        f"KS(law of M_{cfg['n']}, law of max of {rep.kappa} iid M_{cfg['L']}) "
        f"= {rep.ks:.4f}\n{rep.context}\n"
    )
    _write_stamped(os.path.join(out_dir, "summary.txt"), h, cfg["seed"], body)
    write_manifest(out_dir, "multiscale", cfg, ["multiscale.csv", "summary.txt"])
    return EXIT_OK


def _superadd_rows(table, beta: float):
    """Two one-sided band checks on alpha_1 and alpha_2:
    alpha_1 + alpha_1 <= alpha_2 + 0.5 and
    alpha_2 <= alpha_1 + (4 beta + exp(-4 beta)) + 0.5."""
    a1, a2 = table.entries.get(1), table.entries.get(2)
    abar = 4 * beta + math.exp(-4 * beta)
    rows = []
    if a1 is None or a2 is None or not (
        math.isfinite(a1.value) and math.isfinite(a2.value)
    ):
        for name in ("2*a_1 <= a_2 + 0.5", "a_2 <= a_1 + (4b+e^-4b) + 0.5"):
            rows.append(("superadditivity", name, float("nan"), float("nan"),
                         float("nan"), False))
        return rows
    se12 = math.sqrt(4 * a1.stderr**2 + a2.stderr**2)
    lhs = 2 * a1.value
    rhs = a2.value + 0.5
    rows.append((
        "superadditivity",
        "2*a_1 <= a_2 + 0.5",
        lhs,
        rhs,
        se12,
        lhs <= rhs + stats.Z95 * se12,
    ))
    se21 = math.sqrt(a1.stderr**2 + a2.stderr**2)
    lhs = a2.value
    rhs = a1.value + abar + 0.5
    rows.append((
        "superadditivity",
        "a_2 <= a_1 + (4b+e^-4b) + 0.5",
        lhs,
        rhs,
        se21,
        lhs <= rhs + stats.Z95 * se21,
    ))
    return rows


def _render_figures(out_dir, cfg_hash, seed, table, dist, threshold):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    meta = {
        "Software": f"isinglab {__version__}",
        "Title": f"config={cfg_hash[:16]} seed={seed}",
    }
    hs = sorted(h for h in table.entries if math.isfinite(table.entries[h].value))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.errorbar(
        hs,
        [table.entries[h].value for h in hs],
        yerr=[table.entries[h].stderr for h in hs],
        fmt="o-",
        capsize=3,
    )
    ax.axhline(threshold, color="gray", ls="--", lw=1)
    ax.set_xlabel("h")
    ax.set_ylabel("alpha_h")
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "report_alpha.png"), metadata=meta)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ks = sorted(dist.counts)
    ax.bar(ks, [dist.counts[k] for k in ks], width=0.8)
    ax.set_xlabel("interface maximum M")
    ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "report_maxdist.png"), metadata=meta)
    plt.close(fig)


def cmd_report(raw: dict, out_dir: str) -> int:
    cfg = expand_config(
        raw,
        _CHAIN_REQUIRED,
        {
            **_chain_defaults(raw),
            "h_max": (int, 4),
            "slack": (float, 0.25),
            "lower_bound_hs": ("intlist", [1]),
            "lower_bound_factor": (float, 0.5),
            "submult_h": ("pair", [1, 1]),
        },
    )
    h = config_hash(cfg)
    chain = _chain_of(cfg)
    beta = cfg["beta"]
    rows = []
    try:
        for hh in cfg["lower_bound_hs"]:
            est = stats.estimate_event_window("E", hh, chain)
            rep = stats.check_height_lower_bound(
                est, beta, hh, factor=cfg["lower_bound_factor"]
            )
            rows.append((
                "lower-bound", rep.inequality, est.value, rep.bound,
                est.stderr, rep.passed,
            ))
        h1, h2 = cfg["submult_h"]
        sub = stats.check_submult_window(h1, h2, chain, slack=cfg["slack"])
        rows.append((
            "submultiplicativity", sub.inequality, sub.p.value, sub.bound,
            sub.p.stderr, sub.passed,
        ))
        table = stats.alpha_table(beta, cfg["n"], cfg["h_max"], chain)
        rows += _superadd_rows(table, beta)
        dist = stats.max_dist(cfg["n"], beta, chain)
    except ValueError as e:
        raise CliError(EXIT_CONFIG, str(e)) from e
    _write_csv(
        os.path.join(out_dir, "report.csv"),
        h,
        cfg["seed"],
        ("check", "inequality", "value", "bound", "stderr", "passed"),
        [
            (c, iq, _csv_float(v), _csv_float(bd), _csv_float(se), p)
            for c, iq, v, bd, se, p in rows
        ],
    )
    threshold = 2 * math.log(2 * cfg["n"]) - 2 * beta
    lines = [
        f"report at beta={beta} n={cfg['n']}",
        f"empirical median of M: {dist.median}",
    ]
    for check, ineq, v, bd, se, passed in rows:
        verdict = "PASS" if passed else "FAIL"
        lines.append(f"{verdict} [{check}] {ineq}  (value={v:.4g} bound={bd:.4g})")
    _write_stamped(
        os.path.join(out_dir, "summary.txt"), h, cfg["seed"],
        "\n".join(lines) + "\n",
    )
    _render_figures(out_dir, h, cfg["seed"], table, dist, threshold)
    write_manifest(
        out_dir,
        "report",
        cfg,
        ["report.csv", "summary.txt", "report_alpha.png", "report_maxdist.png"],
    )
    if not all(p for *_, p in rows):
        raise CliError(EXIT_CHECK, "one or more report checks failed")
    return EXIT_OK


_COMMANDS = {
    "sample": cmd_sample,
    "decompose": cmd_decompose,
    "psi": cmd_psi,
    "estimate": cmd_estimate,
    "multiscale": cmd_multiscale,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isinglab", description=__doc__.splitlines()[0]
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.command](cfg, args.out)
    except CliError as e:
        print(f"isinglab {args.command}: {e}", file=sys.stderr)
        return e.code
    except SnapshotError as e:
        print(f"isinglab {args.command}: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"isinglab {args.command}: {e}", file=sys.stderr)
        return EXIT_IO
    except (KeyError, TypeError, ValueError) as e:
        print(f"isinglab {args.command}: invalid config: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
