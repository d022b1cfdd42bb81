"""Command-line surface: configuration, subcommands, deterministic reports.

A run is a pure function of (config, seed).  JSON reports are emitted with
sorted keys, TSV rows come in prime order, DOT output follows the builder's
vertex order, and every artifact embeds the sha256 of the effective
configuration together with the labeling conventions, so repeated runs with
the same config and seed are byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import multiprocessing
import random
import sys
from dataclasses import dataclass, fields as dataclass_fields
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from . import acceptance
from .classgroup import (
    class_group,
    emit_chi_table,
    load_chi_table,
    make_character,
    verify_conditions,
)
from .coefficients import coeff_field
from .frobenius import attachment_row, usable_primes
from .globalphi import PhiEvaluator, hecke_decompose, phi
from .lattices import ContextS, Lattice, augment_N, default_M, m_of, m_prime
from .localtrees import ball_size, build_patch, patch_to_dot
from .quadratic import QuadraticField


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


# Conventions that pin down the meaning of every report.  `lambda` fixes
# which prime over a split ell is the first one; `cover` fixes where the
# local eigenfunctions live.
CONVENTIONS = {
    "lambda": (
        "for split ell the first prime is (ell, omega - r) with r the least "
        "root of x^2 - t*x + n mod ell; the second prime takes the other root"
    ),
    "cover": (
        "inert local eigenfunctions live on the double cover of the ell-tree "
        "(sigma in {0,1}); split ones live on the tree itself"
    ),
}

# dotted config key -> (RunConfig attribute, parser)
CONFIG_KEYS = {
    "field.d0": ("d0", int),
    "coeff": ("coeff", str),
    "chi.order": ("chi_order", int),
    "chi.table": ("chi_table", str),
    "S.M": ("M", int),
    "S.N": ("N", int),
    "bounds.upto": ("upto", int),
    "bounds.radius": ("radius", int),
    "bounds.samples": ("samples", int),
    "bounds.index": ("index_bound", int),
    "seed": ("seed", int),
    "jobs": ("jobs", int),
    "out": ("out", str),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _fn) in CONFIG_KEYS.items()}


@dataclass
class RunConfig:
    d0: int = 229
    coeff: str = "Fp:7"
    chi_order: int = 3
    chi_table: Optional[str] = None
    M: Optional[int] = None
    N: int = 1
    upto: int = 100
    radius: int = 2
    samples: int = 200
    index_bound: int = 10 ** 4
    seed: int = 0
    jobs: int = 1
    out: Optional[str] = None

    def canonical_lines(self) -> List[str]:
        # jobs and out steer execution and IO, never the mathematics, so they
        # stay out of the hash.
        lines = []
        for f in dataclass_fields(self):
            if f.name in ("jobs", "out"):
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            lines.append(f"{_ATTR_TO_KEY[f.name]}={value}")
        return sorted(lines)

    def sha256(self) -> str:
        blob = "\n".join(self.canonical_lines()).encode()
        return hashlib.sha256(blob).hexdigest()


def load_config_file(path: str) -> Dict[str, object]:
    """key=value lines, # comments, dotted section keys."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path!r}: {exc}") from exc
    out: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key:
            raise ConfigError(f"config: line {lineno}: expected key=value")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"config: line {lineno}: unknown key {key!r}")
        attr, parse = CONFIG_KEYS[key]
        try:
            out[attr] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {value!r}") from exc
    return out


def assemble_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    merged: Dict[str, object] = {}
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config))
    for attr in _ATTR_TO_KEY:
        value = getattr(args, attr, None)
        if value is not None:
            merged[attr] = value
    cfg = RunConfig(**merged)
    for attr, least in (
        ("chi_order", 1),
        ("N", 1),
        ("upto", 0),
        ("radius", 0),
        ("samples", 0),
        ("index_bound", 1),
        ("jobs", 1),
    ):
        if getattr(cfg, attr) < least:
            raise ConfigError(f"{_ATTR_TO_KEY[attr]}: must be >= {least}")
    return cfg


# ---------------------------------------------------------------------------
# stack construction

@dataclass
class Stack:
    cfg: RunConfig
    K: QuadraticField
    F: object
    G: object
    chi: object
    ctx: ContextS
    ev: PhiEvaluator


def build_stack(cfg: RunConfig) -> Stack:
    try:
        K = QuadraticField(cfg.d0)
    except ValueError as exc:
        raise ConfigError(f"field.d0: {exc}") from exc
    try:
        F = coeff_field(cfg.coeff)
    except ValueError as exc:
        raise ConfigError(f"coeff: {exc}") from exc
    if F.characteristic == 2:
        raise ConfigError("coeff: characteristic 2 is not supported")
    p = F.characteristic or 1
    if cfg.N < 1:
        raise ConfigError(f"S.N: must be positive, got {cfg.N}")
    N = augment_N(K, p, cfg.N)
    M = cfg.M if cfg.M is not None else default_M(K, p, N)
    try:
        ctx = ContextS(K, M=M, N=N, p=p)
    except ValueError as exc:
        raise ConfigError(f"S.M: {exc}") from exc
    G = class_group(K)
    if cfg.chi_table is not None:
        try:
            with open(cfg.chi_table, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"chi.table: cannot read {cfg.chi_table!r}: {exc}") from exc
        try:
            chi = load_chi_table(text, G, cfg.chi_order, F, modulus=N)
        except ValueError as exc:
            raise ConfigError(f"chi.table: {exc}") from exc
    else:
        try:
            chi = make_character(G, cfg.chi_order, F)
        except ValueError as exc:
            raise ConfigError(f"chi.order: {exc}") from exc
    ev = PhiEvaluator(ctx, F, chi)
    return Stack(cfg, K, F, G, chi, ctx, ev)


# ---------------------------------------------------------------------------
# report plumbing

def _envelope(cfg: RunConfig, command: str, payload: dict) -> dict:
    report = {
        "command": command,
        "config_sha256": cfg.sha256(),
        "conventions": CONVENTIONS,
    }
    report.update(payload)
    return report


def _render_json(cfg: RunConfig, command: str, payload: dict) -> str:
    return json.dumps(_envelope(cfg, command, payload), sort_keys=True, indent=2) + "\n"


def _write_text(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _comment_header(cfg: RunConfig, mark: str) -> List[str]:
    lines = [f"{mark} config_sha256: {cfg.sha256()}"]
    for key in ("lambda", "cover"):
        lines.append(f"{mark} {key}: {CONVENTIONS[key]}")
    return lines


# ---------------------------------------------------------------------------
# subcommands

def cmd_field(cfg: RunConfig, args: argparse.Namespace) -> int:
    st = build_stack(cfg)
    K, ctx, G = st.K, st.ctx, st.G
    payload = {
        "d0": K.d0,
        "disc": K.d,
        "omega": {"trace": K.t, "norm": K.n},
        "epsilon": {
            "u": str(K.epsilon.u),
            "v": str(K.epsilon.v),
            "norm": str(K.epsilon.norm()),
        },
        "minkowski_bound": K.minkowski_bound,
        "class_number": G.h,
        "generators": [
            {"label": P.label(), "order": order} for P, order in G.generators
        ],
        "context": {
            "p": ctx.p,
            "N": ctx.N,
            "M": ctx.M,
            "pdN": ctx.pdN,
            "i_S": ctx.i_S,
            "sign_iS": ctx.sign_iS,
        },
    }
    _write_text(cfg.out, _render_json(cfg, "field", payload))
    return 0


def cmd_character(cfg: RunConfig, args: argparse.Namespace) -> int:
    st = build_stack(cfg)
    conditions = verify_conditions(st.chi, st.ctx, samples=cfg.samples, seed=cfg.seed)
    payload = {
        "order": st.chi.order,
        "n": st.chi.n,
        "modulus": st.chi.modulus,
        "source": "table" if st.chi.is_tabular else "class-group",
        "table": emit_chi_table(st.chi).splitlines(),
        "conditions": conditions,
    }
    _write_text(cfg.out, _render_json(cfg, "character", payload))
    return 0 if conditions["status"] == "pass" else 1


def _require_prime_ell(args: argparse.Namespace, command: str) -> int:
    ell = getattr(args, "ell", None)
    if ell is None:
        raise ConfigError(f"{command}: --ell is required")
    if ell < 2 or not sympy.isprime(ell):
        raise ConfigError(f"{command}: --ell must be prime, got {ell}")
    return ell


def cmd_tree(cfg: RunConfig, args: argparse.Namespace) -> int:
    _require_prime_ell(args, "tree")
    st = build_stack(cfg)
    patch = build_patch(st.K, args.ell, args.n, cfg.radius)
    expected = ball_size(args.ell, cfg.radius) * args.n
    if len(patch.keys) != expected:
        raise ConfigError("bounds.radius: vertex count disagrees with the growth formula")
    header = _comment_header(cfg, "//")
    header.append(
        f"// ell={args.ell} n={args.n} radius={cfg.radius} "
        f"vertices={len(patch.keys)} expected={expected} "
        f"interior={len(patch.interior_indices())} "
        f"idealistic={sum(patch.idealistic)}"
    )
    _write_text(cfg.out, "\n".join(header) + "\n" + patch_to_dot(patch))
    return 0


def cmd_phi(cfg: RunConfig, args: argparse.Namespace) -> int:
    st = build_stack(cfg)
    L = Lattice.parse_literal(st.K, args.lattice)
    mL, sign = m_of(st.ctx, L)
    payload = {
        "lattice": L.literal(),
        "det": str(L.det),
        "support": L.support_primes(),
        "m": mL,
        "sign": sign,
        "m_prime": m_prime(st.ctx, L),
        "phi": str(phi(st.ev, L)),
    }
    _write_text(cfg.out, _render_json(cfg, "phi", payload))
    return 0


def cmd_hecke(cfg: RunConfig, args: argparse.Namespace) -> int:
    _require_prime_ell(args, "hecke")
    st = build_stack(cfg)
    L = Lattice.parse_literal(st.K, args.lattice)
    rep = hecke_decompose(st.ctx, st.ev, L, args.ell)
    payload = {
        "ell": args.ell,
        "lattice": L.literal(),
        "mu": str(st.ev.mu(args.ell)),
        "report": rep.to_dict(),
    }
    _write_text(cfg.out, _render_json(cfg, "hecke", payload))
    return 0 if rep.equal else 1


def _sample_panel(st: Stack, count: int) -> List[Lattice]:
    """Panel lattices of modest index for the per-prime cross-check.

    Kept small on purpose: the eigenvalue identity is uniform in the index,
    while witness searches between huge-conductor sublattices cost minutes.
    bounds.index stays the knob for the invariance suite, which never needs
    witnesses."""
    rng = random.Random(st.cfg.seed)
    skip = st.ctx.pdN * (st.F.characteristic or 1)
    smalls = [q for q in (2, 3, 5, 11, 13) if skip % q]
    if not smalls:
        raise ConfigError("S.N: no small primes left for panel sampling")
    out: List[Lattice] = []
    for _ in range(count):
        a = Fraction(rng.choice(smalls))
        c = Fraction(rng.choice([1] + smalls))
        b = Fraction(rng.randrange(int(c))) if c > 1 else Fraction(0)
        L = Lattice(st.K, a, b, c)
        if rng.random() < 0.3:
            L = L.scale_rational(Fraction(1, rng.choice(smalls)))
        out.append(L)
    return out


_WORKER: Dict[str, object] = {}


def _attach_worker_init(cfg_kwargs: dict, panel_count: int) -> None:
    cfg = RunConfig(**cfg_kwargs)
    st = build_stack(cfg)
    _WORKER["stack"] = st
    _WORKER["panel"] = _sample_panel(st, panel_count)


def _attach_worker_row(ell: int) -> dict:
    st = _WORKER["stack"]
    return attachment_row(st.ctx, st.ev, ell, panel=_WORKER["panel"]).to_dict()


def _attach_rows(st: Stack, panel_count: int) -> Tuple[List[dict], List[str]]:
    cfg = st.cfg
    panel = _sample_panel(st, panel_count)
    primes = usable_primes(st.ctx, st.ev, cfg.upto)
    if cfg.jobs > 1 and len(primes) > 1:
        cfg_kwargs = {f.name: getattr(cfg, f.name) for f in dataclass_fields(cfg)}
        mp = multiprocessing.get_context("fork")
        with mp.Pool(
            min(cfg.jobs, len(primes)),
            initializer=_attach_worker_init,
            initargs=(cfg_kwargs, panel_count),
        ) as pool:
            rows = pool.map(_attach_worker_row, primes)
    else:
        rows = [
            attachment_row(st.ctx, st.ev, ell, panel=panel).to_dict()
            for ell in primes
        ]
    return rows, [L.literal() for L in panel]


def _attach_tsv(cfg: RunConfig, rows: List[dict]) -> str:
    lines = _comment_header(cfg, "#")
    lines.append("ell\tkind\ta\tA\ttr\tdet\tmatch")
    for row in rows:
        lines.append(
            f"{row['ell']}\t{row['kind']}\t{row['a']}\t{row['A']}"
            f"\t{row['tr']}\t{row['det']}\t{'true' if row['match'] else 'false'}"
        )
    return "\n".join(lines) + "\n"


def cmd_attach(cfg: RunConfig, args: argparse.Namespace) -> int:
    st = build_stack(cfg)
    rows, panel_literals = _attach_rows(st, args.panel)
    tsv = _attach_tsv(cfg, rows)
    payload = {
        "upto": cfg.upto,
        "panel": panel_literals,
        "rows": rows,
        "all_match": all(row["match"] for row in rows),
    }
    if cfg.out is None:
        sys.stdout.write(tsv)
    else:
        _write_text(cfg.out + ".tsv", tsv)
        _write_text(cfg.out + ".json", _render_json(cfg, "attach", payload))
    return 0 if payload["all_match"] else 1


def cmd_selftest(cfg: RunConfig, args: argparse.Namespace) -> int:
    for line in _comment_header(cfg, "#"):
        print(line)
    results = acceptance.run_all(seed=cfg.seed, emit=print)
    passed = all(r.passed for r in results)
    if cfg.out is not None:
        payload = {
            "results": [
                {
                    "number": r.number,
                    "name": r.name,
                    "pass": r.passed,
                    "detail": r.detail,
                }
                for r in results
            ],
            "pass": passed,
        }
        _write_text(cfg.out, _render_json(cfg, "selftest", payload))
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# argument parsing

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value config file")
    common.add_argument("--d0", type=int, help="squarefree field discriminant seed")
    common.add_argument("--coeff", help="coefficient field, Fp:<p> or cyclotomic:<n>")
    common.add_argument("--chi-order", dest="chi_order", type=int, help="character order (odd)")
    common.add_argument("--chi-table", dest="chi_table", metavar="PATH", help="external character table")
    common.add_argument("-M", "--modulus", dest="M", type=int, help="congruence modulus M (>= 3, M | pdN)")
    common.add_argument("-N", "--level", dest="N", type=int, help="auxiliary level N")
    common.add_argument("--upto", type=int, help="prime bound for attach")
    common.add_argument("--radius", type=int, help="patch radius for tree")
    common.add_argument("--samples", type=int, help="sample count for character checks")
    common.add_argument("--index-bound", dest="index_bound", type=int, help="lattice index bound for sampling")
    common.add_argument("--seed", type=int, help="RNG seed (default 0)")
    common.add_argument("--jobs", type=int, help="worker processes for attach (default 1)")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    return common


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="heckephi",
        description="Exact Hecke eigenclasses on lattice functions for a real quadratic field.",
        epilog="config file keys: " + ", ".join(sorted(CONFIG_KEYS)),
    )
    common = _common_parser()
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("field", parents=[common], help="field, unit, and class-group data")
    sub.add_parser("character", parents=[common], help="character table and eligibility conditions")

    p_tree = sub.add_parser("tree", parents=[common], help="DOT rendering of a local tree patch")
    p_tree.add_argument("--ell", type=int, required=True, help="residue characteristic of the tree")
    p_tree.add_argument("--n", type=int, default=1, choices=(1, 2), help="cover degree (2 = inert double cover)")

    p_phi = sub.add_parser("phi", parents=[common], help="evaluate Phi at one lattice")
    p_phi.add_argument("--lattice", required=True, help="lattice literal [[x1,x2],[y1,y2]]")

    p_hecke = sub.add_parser("hecke", parents=[common], help="T_ell decomposition at one lattice")
    p_hecke.add_argument("--ell", type=int, required=True, help="Hecke prime")
    p_hecke.add_argument("--lattice", default="[[1,0],[0,1]]", help="lattice literal (default O)")

    p_attach = sub.add_parser("attach", parents=[common], help="Frobenius attachment table")
    p_attach.add_argument("--panel", type=int, default=0, metavar="K",
                          help="extra random lattices cross-checked per prime")

    sub.add_parser("selftest", parents=[common], help="run the full acceptance suite")
    return ap


_DISPATCH = {
    "field": cmd_field,
    "character": cmd_character,
    "tree": cmd_tree,
    "phi": cmd_phi,
    "hecke": cmd_hecke,
    "attach": cmd_attach,
    "selftest": cmd_selftest,
}


def run(command: str, cfg: RunConfig, args: Optional[argparse.Namespace] = None) -> int:
    if command not in _DISPATCH:
        raise ConfigError(f"unknown subcommand {command!r}")
    if args is None:
        args = argparse.Namespace(ell=None, n=1, lattice="[[1,0],[0,1]]", panel=0)
    return _DISPATCH[command](cfg, args)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = assemble_config(args)
        return run(args.command, cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
