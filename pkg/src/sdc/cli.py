"""Command-line front end: verification suites, protocol runs, reports.

Subcommands: bases, verify, encode, decode, table, run, sweep, rates, spin.
Reports are emitted as sorted-key JSON or LF-terminated CSV and contain no
timestamps or unordered collections, so identical configurations produce
byte-identical output.  Exit codes: 0 success, 1 verification/round-trip
failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, analysis, bell, decoder, encoder, gates, hadamard, hilbert
from .errors import ConfigError, MessageOutOfRange, SdcError

CONFIG_ENV = "SDC_CONFIG"

# Sweeps above this many messages fall back to a seeded sample of this size.
SWEEP_CAP = 16384
SWEEP_SAMPLE = 4096


@dataclass
class RunConfig:
    """Resolved options for one invocation (config file merged with flags)."""

    n: int = 1
    s: float = 0.0
    path: str = "grand"
    tol_exact: float = hilbert.TOL_EXACT
    tol_chained: float = hilbert.TOL_CHAINED
    custom_matrices: str | None = None
    seed: int = 20240515
    registry: dict = field(default_factory=dict)

    def hadamard_pair(self):
        """(order-2N matrix, order-N matrix or None when the pipeline is off)."""
        H = hadamard.build(2 * self.n, custom=self.registry or None)
        HN = None
        if self.path == "pipeline":
            HN = hadamard.build(self.n, custom=self.registry or None)
        return H, HN


def _load_config_file() -> dict:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    values = {}
    try:
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"bad config line (expected key=value): {line!r}")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def make_config(args: argparse.Namespace) -> RunConfig:
    raw = _load_config_file()
    cfg = RunConfig()
    if "tolerance.exact" in raw:
        cfg.tol_exact = float(raw["tolerance.exact"])
    if "tolerance.chained" in raw:
        cfg.tol_chained = float(raw["tolerance.chained"])
    if "hadamard.custom_matrices" in raw:
        cfg.custom_matrices = raw["hadamard.custom_matrices"]
    if "seed" in raw:
        cfg.seed = int(raw["seed"])

    for name in ("n", "s", "path", "seed"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "custom_matrices", None):
        cfg.custom_matrices = args.custom_matrices

    if cfg.n < 1:
        raise ConfigError(f"n must be positive, got {cfg.n}")
    if cfg.path not in ("grand", "pipeline"):
        raise ConfigError(f"path must be grand or pipeline, got {cfg.path}")
    if cfg.custom_matrices:
        cfg.registry = hadamard.load_custom_matrices(cfg.custom_matrices)
    return cfg


def _emit_json(payload) -> None:
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _emit_csv(header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    sys.stdout.write(buf.getvalue())


def _static_conventions(H) -> dict:
    """Self-describing header: the fixed conventions every report relies on."""
    return {
        "hadamard_construction": H.construction,
        "index_map": "plus-n to n-1, minus-n to N+n-1",
        "modular_reduction": "zero-free into 1..N",
        "compact_relabel": "first-particle interleave, identity on second",
    }


def _conventions(cfg: RunConfig, H) -> dict:
    """Static conventions plus the readings resolved for this run."""
    out = _static_conventions(H)
    out["member_mixer_reading"] = encoder.resolve_member_mixer_reading(cfg.n, H)["reading"]
    out["composition_order"] = encoder.resolve_composition_order(cfg.n, H)["order"]
    if cfg.path == "pipeline":
        HN = hadamard.build(cfg.n, custom=cfg.registry or None)
        out["mixer_normalization"] = gates.resolve_mixer_normalization(cfg.n, HN)["reading"]
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_bases(cfg: RunConfig) -> int:
    H, _ = cfg.hadamard_pair()
    basis = bell.bell_basis_matrix(cfg.n, H)
    gram_dev = float(np.max(np.abs(basis.conj() @ basis.T - np.eye(4 * cfg.n * cfg.n))))
    states = []
    for lab in bell.all_labels(cfg.n):
        state = bell.bell_state(cfg.n, lab, H)
        entry = {"label": {"k": lab.k, "r": lab.r, "j": lab.j}}
        entry.update(hilbert.state_to_dict(state))
        states.append(entry)
    _emit_json(
        {
            "n": cfg.n,
            "conventions": _static_conventions(H),
            "gram_max_deviation": gram_dev,
            "states": states,
        }
    )
    return 0


def _check(name: str, residual: float, tolerance: float) -> dict:
    return {
        "name": name,
        "residual": float(residual),
        "tolerance": tolerance,
        "pass": bool(residual <= tolerance),
    }


def build_verify_report(cfg: RunConfig) -> dict:
    """Full invariant suite for one N; every check carries its residual."""
    N = cfg.n
    H, HN = cfg.hadamard_pair()
    dim = 2 * N
    checks: list[dict] = []

    # Hadamard backbone
    norm = H.normalized
    checks.append(_check("hadamard-symmetry", np.max(np.abs(norm - norm.T)), 0.0))
    checks.append(
        _check("hadamard-involution", np.max(np.abs(norm @ norm - np.eye(dim))), cfg.tol_exact)
    )
    checks.append(
        _check(
            "hadamard-entry-magnitude",
            np.max(np.abs(np.abs(norm) - 1.0 / np.sqrt(dim))),
            cfg.tol_exact,
        )
    )

    # Bell bases
    labels = bell.all_labels(N)
    basis = bell.bell_basis_matrix(N, H)
    eye = np.eye(4 * N * N)
    checks.append(_check("bell-gram", np.max(np.abs(basis.conj() @ basis.T - eye)), cfg.tol_exact))
    cbasis = bell.bell_basis_matrix(N, H, compact=True)
    checks.append(
        _check("bell-compact-gram", np.max(np.abs(cbasis.conj() @ cbasis.T - eye)), cfg.tol_exact)
    )

    ptr_dev = 0.0
    amp_dev = 0.0
    allowed = np.array([0.0, 1.0 / np.sqrt(dim)])
    for row in basis:
        state = hilbert.StateVector((dim, dim), row)
        for keep in (0, 1):
            rho = hilbert.partial_trace(state, keep)
            ptr_dev = max(ptr_dev, float(np.max(np.abs(rho - np.eye(dim) / dim))))
        amp_dev = max(
            amp_dev, float(np.max(np.min(np.abs(np.abs(row)[:, None] - allowed[None, :]), axis=1)))
        )
    checks.append(_check("bell-partial-trace", ptr_dev, cfg.tol_exact))
    checks.append(_check("bell-amplitude-structure", amp_dev, cfg.tol_exact))

    try:
        relabel_method = bell.derive_compact_relabel(N, H).method
        relabel_missing = 0.0
    except SdcError:
        relabel_method = "none"
        relabel_missing = 1.0
    checks.append(_check("bell-compact-relabel-found", relabel_missing, 0.0))

    # basic gates
    gate_report = {}
    def op_residuals(name, mat):
        d = mat.shape[0]
        unit = float(np.max(np.abs(mat.conj().T @ mat - np.eye(d))))
        invol = float(np.max(np.abs(mat @ mat - np.eye(d))))
        gate_report[name] = {"unitarity": unit, "involution": invol}
        checks.append(_check(f"gate-{name}-unitarity", unit, cfg.tol_chained))
        return invol

    for n in range(1, N + 1):
        for name, op in (
            (f"channel-sign-{n}", gates.channel_sign_gate(N, n)),
            (f"channel-swap-{n}", gates.channel_swap_gate(N, n)),
            (f"channel-hadamard-{n}", gates.channel_hadamard_gate(N, n)),
        ):
            invol = op_residuals(name, hilbert.dense_of(op))
            checks.append(_check(f"gate-{name}-involution", invol, cfg.tol_chained))

    ladder = gates.ladder_shift_gate(N, 1)
    cycle = hilbert.identity_perm(dim)
    for _ in range(N):
        cycle = hilbert.compose_perms(ladder, cycle)
    checks.append(
        _check(
            "gate-ladder-cycle",
            np.max(np.abs(cycle.dense() - np.eye(dim))),
            cfg.tol_exact,
        )
    )

    pcs = gates.position_controlled_swap(N).dense() if dim <= 32 else None
    if pcs is not None:
        invol = op_residuals("controlled-swap", pcs)
        checks.append(_check("gate-controlled-swap-involution", invol, cfg.tol_chained))
    if N >= 2:
        h1 = gates.channel_hadamard_gate(N, 1).dense()
        h2 = gates.channel_hadamard_gate(N, 2).dense()
        checks.append(
            _check("gate-disjoint-commutation", np.max(np.abs(h1 @ h2 - h2 @ h1)), cfg.tol_exact)
        )

    mixer_info = None
    if HN is not None:
        mixer_info = gates.resolve_mixer_normalization(N, HN)
        checks.append(
            _check("gate-mixer-unitarity", mixer_info["unitarity_residual"], cfg.tol_chained)
        )
        checks.append(
            _check("gate-mixer-involution", mixer_info["involution_residual"], cfg.tol_chained)
        )

    # encoder laws
    structure_dev = 0.0
    rule_dev = 0.0
    signaling_dev = 0.0
    start_states = {
        (kp, rp): bell.bell_state(N, bell.BellLabel(kp, rp, 1), H)
        for kp in range(1, N + 1)
        for rp in (+1, -1)
    }
    label_index = {
        (lab.k, lab.r, lab.j): i for i, lab in enumerate(labels)
    }
    for lab in labels:
        op = encoder.encode_direct(N, H, lab)
        dense = op.dense()
        structure_dev = max(
            structure_dev,
            float(np.max(np.abs(np.abs(dense).sum(axis=0) - 1.0))),
            float(np.max(np.abs(np.abs(dense).sum(axis=1) - 1.0))),
        )
        for (kp, rp), start in start_states.items():
            moved = hilbert.apply(op, 0, start)
            kpp, rpp = bell.compose_family(lab.k, lab.r, kp, rp, N)
            expected = basis[label_index[(kpp, rpp, lab.j)]]
            overlap = np.vdot(expected, moved.amp)
            rule_dev = max(rule_dev, abs(abs(overlap) - 1.0))
            rho_b = hilbert.partial_trace(moved, 1)
            signaling_dev = max(
                signaling_dev, float(np.max(np.abs(rho_b - np.eye(dim) / dim)))
            )
    checks.append(_check("encode-signed-permutation-structure", structure_dev, cfg.tol_exact))
    checks.append(_check("encode-family-rule", rule_dev, cfg.tol_chained))
    checks.append(_check("encode-no-signaling", signaling_dev, cfg.tol_exact))

    reading = encoder.resolve_member_mixer_reading(N, H)
    order = encoder.resolve_composition_order(N, H)
    checks.append(
        _check("encode-composed-action", order["max_overlap_deviation"], cfg.tol_chained)
    )

    # decoder
    grand = decoder.grand_operator(N, H)
    if dim <= 32:
        gdense = grand.toarray()
        gunit = float(np.max(np.abs(gdense.conj().T @ gdense - np.eye(dim * dim))))
        ginvol = float(np.max(np.abs(gdense @ gdense - np.eye(dim * dim))))
        checks.append(_check("grand-unitarity", gunit, cfg.tol_chained))
        checks.append(_check("grand-involution", ginvol, cfg.tol_chained))

    min_top = 1.0
    completeness_dev = 0.0
    try:
        decoder.build_decode_table(N, H, path="grand", grand=grand)
        injective = True
    except SdcError:
        injective = False
    for lab in labels:
        top, dist = decoder.decode_grand(N, H, bell.bell_state(N, lab, H), grand=grand)
        min_top = min(min_top, top.probability)
        completeness_dev = max(
            completeness_dev, abs(sum(o.probability for o in dist) - 1.0)
        )
    checks.append(_check("decode-determinism", 1.0 - min_top, cfg.tol_chained))
    checks.append(_check("decode-injectivity", 0.0 if injective else 1.0, 0.0))
    checks.append(_check("measurement-completeness", completeness_dev, cfg.tol_exact))

    report = {
        "version": __version__,
        "n": N,
        "path": cfg.path,
        "conventions": _conventions(cfg, H),
        "resolutions": {
            "member_mixer": reading,
            "composition": order,
            "mixer_normalization": mixer_info,
            "compact_relabel_method": relabel_method,
        },
        "gates": gate_report,
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }
    if cfg.path == "pipeline":
        report["pipeline"] = decoder.pipeline_report(N, H, HN)
        if N == 1 and not report["pipeline"]["deterministic"]:
            report["pass"] = False
    return report


def cmd_verify(cfg: RunConfig, gates_only: bool = False) -> int:
    report = build_verify_report(cfg)
    if gates_only:
        _emit_json({"n": report["n"], "gates": report["gates"]})
    else:
        _emit_json(report)
    return 0 if report["pass"] else 1


def cmd_encode(cfg: RunConfig, message: int, dump_op: bool) -> int:
    H, _ = cfg.hadamard_pair()
    if not 0 <= message < 4 * cfg.n * cfg.n:
        raise MessageOutOfRange(
            f"message {message} outside 0..{4 * cfg.n * cfg.n - 1}"
        )
    lab = bell.message_to_label(message, cfg.n)
    payload = {
        "n": cfg.n,
        "conventions": _static_conventions(H),
        "message": message,
        "label": {"k": lab.k, "r": lab.r, "j": lab.j},
    }
    if dump_op:
        op = encoder.encode_direct(cfg.n, H, lab)
        payload["op"] = {
            "dim": op.dim,
            "entries": [
                {"col": int(c), "row": int(op.target[c]), "sign": int(op.phase[c].real)}
                for c in range(op.dim)
            ],
        }
    _emit_json(payload)
    return 0


def cmd_decode(cfg: RunConfig, state_path: str) -> int:
    H, HN = cfg.hadamard_pair()
    state = hilbert.state_from_dict(json.loads(Path(state_path).read_text()))
    if cfg.path == "grand":
        top, dist = decoder.decode_grand(cfg.n, H, state)
    else:
        top, dist = decoder.decode_pipeline(cfg.n, H, HN, state)
    _emit_json(
        {
            "n": cfg.n,
            "path": cfg.path,
            "conventions": _static_conventions(H),
            "top": {"first": top.first, "second": top.second, "probability": top.probability},
            "outcomes": [
                {"first": o.first, "second": o.second, "probability": o.probability}
                for o in dist
            ],
        }
    )
    return 0


def cmd_table(cfg: RunConfig) -> int:
    H, HN = cfg.hadamard_pair()
    table = decoder.build_decode_table(cfg.n, H, path=cfg.path, HN=HN)
    rows = []
    for (first, second), lab in table.entries.items():
        sent = bell.label_to_message(bell.BellLabel(lab.k, -lab.r, lab.j), cfg.n)
        rows.append([sent, first, second])
    rows.sort()
    _emit_csv(["message", "first", "second"], rows)
    return 0


def cmd_run(cfg: RunConfig, message: int, dump_state: str | None, sign: int = 1) -> int:
    H, HN = cfg.hadamard_pair()
    if cfg.s > 0:
        total = analysis.spin_message_count(cfg.n, cfg.s)
        if not 0 <= message < total:
            raise MessageOutOfRange(f"message {message} outside 0..{total - 1}")
        d = int(round(2 * cfg.s)) + 1
        m_pos, m_spin = divmod(message, d * d)
        lab = bell.message_to_label(m_pos, cfg.n)
        decoded = analysis.run_protocol_spin(cfg.n, cfg.s, message, H, sign=sign)
        payload = {
            "n": cfg.n,
            "s": cfg.s,
            "sign_variant": sign,
            "conventions": _static_conventions(H),
            "message": message,
            "label": {
                "position": {"k": lab.k, "r": lab.r, "j": lab.j},
                "spin": {"shift": m_spin // d, "clock": m_spin % d},
            },
            "decoded": decoded,
        }
        _emit_json({**payload, "ok": decoded == message})
        return 0 if decoded == message else 1

    if not 0 <= message < 4 * cfg.n * cfg.n:
        raise MessageOutOfRange(f"message {message} outside 0..{4 * cfg.n * cfg.n - 1}")
    lab = bell.message_to_label(message, cfg.n)
    sent = hilbert.apply(
        encoder.encode_direct(cfg.n, H, lab), 0, analysis.start_state(cfg.n, H)
    )
    if dump_state:
        Path(dump_state).write_text(
            json.dumps(hilbert.state_to_dict(sent), sort_keys=True)
        )
    table = decoder.build_decode_table(cfg.n, H, path=cfg.path, HN=HN)
    if cfg.path == "grand":
        top, _ = decoder.decode_grand(cfg.n, H, sent)
    else:
        top, _ = decoder.decode_pipeline(cfg.n, H, HN, sent)
    decoded = table.message_for(top)
    _emit_json(
        {
            "n": cfg.n,
            "path": cfg.path,
            "conventions": _static_conventions(H),
            "message": message,
            "label": {"k": lab.k, "r": lab.r, "j": lab.j},
            "outcome": {
                "first": top.first,
                "second": top.second,
                "probability": top.probability,
            },
            "decoded": decoded,
            "ok": decoded == message,
        }
    )
    return 0 if decoded == message else 1


def cmd_sweep(cfg: RunConfig) -> int:
    H, HN = cfg.hadamard_pair()
    total = 4 * cfg.n * cfg.n
    sampled = total > SWEEP_CAP
    if sampled:
        rng = np.random.default_rng(cfg.seed)
        messages = sorted(rng.choice(total, size=SWEEP_SAMPLE, replace=False).tolist())
    else:
        messages = None
    result = analysis.round_trip_sweep(cfg.n, H, path=cfg.path, HN=HN, messages=messages)
    result["conventions"] = _static_conventions(H)
    result["sampled"] = sampled
    if sampled:
        result["seed"] = cfg.seed
    _emit_json(result)
    return 0 if result["round_trip_ok"] == result["checked"] else 1


def cmd_rates(cfg: RunConfig, n_list: list[int], t: float) -> int:
    rows = []
    for n in n_list:
        tm = analysis.TimingModel.equal_time(n, t)
        r_m = "" if n < 2 else repr(analysis.rate_maximal(n, tm))
        rows.append(
            [
                n,
                repr(analysis.capacity_bits(n)),
                repr(analysis.rate_spatial(n, tm)),
                repr(analysis.rate_spatial_asymptotic(n, t)),
                repr(analysis.rate_pairwise(n, tm)),
                r_m,
                repr(analysis.advantage(n, t)),
            ]
        )
    _emit_csv(
        ["N", "capacity_bits", "R_x_exact", "R_x_asymptotic", "R_p", "R_m", "advantage"],
        rows,
    )
    return 0


def cmd_spin(cfg: RunConfig, sign: int) -> int:
    H, _ = cfg.hadamard_pair()
    report = analysis.spin_state_report(cfg.n, cfg.s, H, sign=sign)
    report["conventions"] = _static_conventions(H)
    _emit_json(report)
    ok = (
        report["factorizes"]
        and report["norm_deviation"] <= cfg.tol_exact
        and report["reduced_density_deviation"] <= cfg.tol_exact
        and report["schmidt_rank"] == report["schmidt_rank_expected"]
    )
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdc",
        description="Simulate and verify dense coding over entangled spatial channels.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_path=True):
        p.add_argument("--n", type=int, default=None, help="number of channel pairs per side")
        p.add_argument("--custom-matrices", type=str, default=None,
                       help="registry file of extra sign matrices")
        if with_path:
            p.add_argument("--path", choices=["grand", "pipeline"], default=None)

    p = sub.add_parser("bases", help="emit all basis states and the Gram deviation")
    common(p, with_path=False)

    p = sub.add_parser("verify", help="run the invariant suite")
    common(p)
    p.add_argument("--gates", action="store_true", help="emit only the per-gate residuals")

    p = sub.add_parser("encode", help="show the encoding operator for a message")
    common(p, with_path=False)
    p.add_argument("--message", type=int, required=True)
    p.add_argument("--dump-op", action="store_true")

    p = sub.add_parser("decode", help="decode a dumped state file")
    common(p)
    p.add_argument("--state", type=str, required=True)

    p = sub.add_parser("table", help="emit the outcome-to-message table as CSV")
    common(p)

    p = sub.add_parser("run", help="round-trip one message")
    common(p)
    p.add_argument("--message", type=int, required=True)
    p.add_argument("--s", type=float, default=None, help="spin of each particle")
    p.add_argument("--sign", type=int, choices=[1, -1], default=1,
                   help="sign variant of the spin pair state")
    p.add_argument("--dump-state", type=str, default=None)

    p = sub.add_parser("sweep", help="round-trip all (or a sample of) messages")
    common(p)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("rates", help="emit the rate comparison as CSV")
    p.add_argument("--n-list", type=str, default="1,2,4,8,16,32,64")
    p.add_argument("--t", type=float, default=1.0)

    p = sub.add_parser("spin", help="verify the spin-extended resource state")
    common(p, with_path=False)
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--sign", type=int, choices=[1, -1], default=1)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rates":
            cfg = RunConfig()
            n_list = [int(tok) for tok in args.n_list.split(",") if tok]
            return cmd_rates(cfg, n_list, args.t)
        cfg = make_config(args)
        if args.command == "bases":
            return cmd_bases(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, gates_only=args.gates)
        if args.command == "encode":
            return cmd_encode(cfg, args.message, args.dump_op)
        if args.command == "decode":
            return cmd_decode(cfg, args.state)
        if args.command == "table":
            return cmd_table(cfg)
        if args.command == "run":
            return cmd_run(cfg, args.message, args.dump_state, sign=args.sign)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "spin":
            return cmd_spin(cfg, args.sign)
        parser.error(f"unknown command {args.command}")
    except SdcError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
