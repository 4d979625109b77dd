"""Command line front end.

Subcommands (all tabular output is CSV with a header row, to stdout or
--output):

  count           box counts in one of the engine modes
  sieve-pipeline  lower-bound report: direct vs sieved counts per B
  series          truncated Euler products / support sums with tail bounds
  lattice         congruence-lattice point counts against the area estimate
  volume          areas of the regions R_z(B)
  fit             normalized constants c_B = N (log B)^(1-r/n) / B^2
  report          one summary row per bundled example pair

Field and form data come from INI files: a [field] section with q, H
(comma-separated residues) and pid, a [form] section with a, b, c, and an
optional [engine] section (strategy, threads, memory_budget,
squarefree_only, coprime_only).  One file may carry all three sections,
so --field run.ini --form run.ini is fine.

Where a sieve modulus W is built, --w0 raises the support floor and the
chosen w0 is reported on stderr together with the two competing lower
bounds (the convergence floor and the largest bad prime), so it is visible
which invariant forced an enlargement.

Exit codes: 0 on success, 2 when a standing hypothesis of the method is
violated (HypothesisError), 1 on anything else, bad arguments included.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from typing import Optional, Sequence

from .arith import factor
from .engine import (EXAMPLE_PAIRS, SweepConfig, asymptotic_fit, count_NFL,
                     count_loc_upper)
from .errors import HypothesisError, ResourceBudgetError
from .fields import FieldSpec
from .forms import FormSpec, compute_W, find_base_point
from .lattices import lambda_star_count, lambda_star_estimate
from .regions import vol_region
from .series import V0, c_FL, sigma_k
from .sieve import lower_bound_pipeline

__all__ = ["main", "load_field", "load_form"]


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; 2 is reserved for
    hypothesis violations here, so remap usage errors to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    vals = [int(tok) for tok in text.split(",") if tok.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("empty integer list")
    return vals


def _float_list(text: str) -> list[float]:
    vals = [float(tok) for tok in text.split(",") if tok.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("empty float list")
    return vals


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

def _read_section(path: str, name: str) -> configparser.SectionProxy:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    if name not in cp:
        raise ValueError(f"{path}: missing [{name}] section")
    return cp[name]


def load_field(path: str) -> FieldSpec:
    """FieldSpec from the [field] section of an INI file."""
    sec = _read_section(path, "field")
    q = sec.getint("q")
    if q is None:
        raise ValueError(f"{path}: [field] needs q")
    H = tuple(int(tok) for tok in sec.get("H", "1").split(",") if tok.strip())
    pid = sec.getboolean("pid", fallback=True)
    return FieldSpec(q, H, pid)


def load_form(path: str) -> FormSpec:
    """FormSpec from the [form] section of an INI file."""
    sec = _read_section(path, "form")
    vals = [sec.getint(key) for key in ("a", "b", "c")]
    if any(v is None for v in vals):
        raise ValueError(f"{path}: [form] needs a, b, c")
    return FormSpec(*vals)


def _engine_config(args, B: int) -> SweepConfig:
    """SweepConfig from the optional [engine] section plus CLI overrides."""
    kw: dict = {}
    path = getattr(args, "engine", None)
    if path:
        sec = _read_section(path, "engine")
        if "strategy" in sec:
            kw["strategy"] = sec.get("strategy")
        if "threads" in sec:
            kw["threads"] = sec.getint("threads")
        if "memory_budget" in sec:
            kw["memory_budget"] = sec.getint("memory_budget")
        if "squarefree_only" in sec:
            kw["squarefree_only"] = sec.getboolean("squarefree_only")
        if "coprime_only" in sec:
            kw["coprime_only"] = sec.getboolean("coprime_only")
    if getattr(args, "threads", None):
        kw["threads"] = args.threads
    if getattr(args, "strategy", None):
        kw["strategy"] = args.strategy
    return SweepConfig(B=B, **kw)


def _modulus_note(L: FieldSpec, F: FormSpec, requested: int):
    """compute_W plus a stderr line naming which bound pinned w0."""
    M = compute_W(L, F, w0_min=requested)
    n = L.normalize().degree
    floor = 2 * (n - 1) + 1
    bad = max(factor(F.disc * F(0, 1) * F(1, 0) * L.normalize().q).primes)
    print(
        f"# w0 = {M.w0} (requested {requested}, convergence floor {floor}, "
        f"largest bad prime {bad}); W = {M.W}",
        file=sys.stderr,
    )
    return M


# ---------------------------------------------------------------------------
# subcommands: each returns (header, rows)
# ---------------------------------------------------------------------------

def _cmd_count(args):
    L = load_field(args.field)
    F = load_form(args.form)
    rows = []
    for B in args.B:
        cfg = _engine_config(args, B)
        if args.mode == "loc_upper":
            val = count_loc_upper(L, F, B, config=cfg)
        else:
            val = count_NFL(L, F, B, mode=args.mode, config=cfg)
        rows.append([B, args.mode, val])
    return ["B", "mode", "count"], rows


def _cmd_sieve_pipeline(args):
    L = load_field(args.field)
    F = load_form(args.form)
    _modulus_note(L.normalize(), F, args.w0)
    rows = []
    for B in args.B:
        rep = lower_bound_pipeline(L, F, B, eta=args.eta, eps0=args.eps0,
                                   beta=args.beta, threads=args.threads,
                                   w0=args.w0)
        print(
            f"# B={B}: base={rep['base']} z={rep['z']:.3f} y={rep['y']:.3f} "
            f"support={rep['support_size']} "
            f"inequality_holds={rep['inequality_holds']}"
            + (" (reducible: counting through the index-two subfield)"
               if rep["reducible"] else ""),
            file=sys.stderr,
        )
        rows.append([B, rep["direct"], rep["sieved"],
                     rep["predicted_order"], rep["ratio"]])
    return ["B", "direct", "sieved", "predicted_order", "ratio"], rows


def _cmd_series(args):
    L = load_field(args.field)
    F = load_form(args.form)
    rows = []
    if args.kind == "euler":
        M = _modulus_note(L.normalize(), F, args.w0)
        for P in args.cutoffs:
            t = c_FL(L, F, V0, M.W, P=int(P))
            rows.append([t.cutoff, t.value, t.tail_bound])
    else:  # support-sum over l | (a k1)^infty
        for P in args.cutoffs:
            t = sigma_k(L, F, args.k1, args.a, bound=int(P))
            rows.append([t.bound, t.value, t.tail_bound])
    return ["cutoff", "value", "tail_bound"], rows


def _cmd_lattice(args):
    F = load_form(args.form)
    bs, bt = args.base
    rows = []
    for k in args.k:
        cnt = lambda_star_count(F, args.B, args.z, k, (bs, bt), args.W)
        est = lambda_star_estimate(F, args.B, args.z, k, args.W)
        rel = abs(cnt - est) / est if est else float("inf")
        rows.append([k, cnt, est, rel])
    return ["k", "count", "estimate", "rel_err"], rows


def _cmd_volume(args):
    F = load_form(args.form)
    rows = [[args.B, z, vol_region(F, args.B, z)] for z in args.z]
    return ["B", "z", "volume"], rows


def _cmd_fit(args):
    with open(args.input, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header is None:
            raise ValueError(f"{args.input}: empty file")
        cols = [h.strip().lower() for h in header]
        try:
            bi = cols.index("b")
        except ValueError:
            raise ValueError(f"{args.input}: no B column") from None
        ci = cols.index("count") if "count" in cols else len(cols) - 1
        pts = [(int(row[bi]), float(row[ci])) for row in rd if row]
    pts.sort()
    cB, spread = asymptotic_fit(pts, args.r, args.n)
    rows = [[B, N, c, spread] for (B, N), c in zip(pts, cB)]
    return ["B", "count", "c_B", "spread"], rows


def _cmd_report(args):
    rows = []
    for L, F in EXAMPLE_PAIRS:
        M = compute_W(L, F)
        base = find_base_point(L, F, M)
        cfg = SweepConfig(B=args.B, threads=args.threads)
        exact = count_NFL(L, F, args.B, config=cfg)
        det = count_NFL(L, F, args.B, mode="squarefree_detector", config=cfg)
        upper = count_loc_upper(L, F, args.B, config=cfg)
        rows.append([L.q, F.a, F.b, F.c, L.degree, M.w0, M.W,
                     base[0], base[1], args.B, exact, det, upper])
    return ["q", "a", "b", "c", "degree", "w0", "W", "base_s", "base_t",
            "B", "exact", "detector", "upper"], rows


# ---------------------------------------------------------------------------
# parser assembly / entry point
# ---------------------------------------------------------------------------

def _add_pair_args(sp, engine: bool = False):
    sp.add_argument("--field", required=True, metavar="CFG",
                    help="INI file with a [field] section")
    sp.add_argument("--form", required=True, metavar="CFG",
                    help="INI file with a [form] section")
    if engine:
        sp.add_argument("--engine", metavar="CFG",
                        help="INI file with an [engine] section")
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--strategy",
                        choices=["auto", "naive", "spf_table", "row_sieve"])


def _build_parser() -> _Parser:
    ap = _Parser(prog="normsieve", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("count", help="box counts in one engine mode")
    _add_pair_args(sp, engine=True)
    sp.add_argument("--B", required=True, type=_int_list,
                    help="box size, or comma list for one row each")
    sp.add_argument("--mode", default="exact_norm",
                    choices=["exact_norm", "squarefree_detector", "loc_upper"])
    sp.set_defaults(func=_cmd_count)

    sp = sub.add_parser("sieve-pipeline",
                        help="direct vs sieved lower-bound report")
    _add_pair_args(sp)
    sp.add_argument("--B", required=True, type=_int_list)
    sp.add_argument("--eta", type=float, default=None,
                    help="z = B^eta (default 1/(16 n^2))")
    sp.add_argument("--eps0", type=float, default=None,
                    help="y = B^eps0 (default 1/(8 n^2))")
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--w0", type=int, default=2,
                    help="floor for the sieve-support bound w0")
    sp.set_defaults(func=_cmd_sieve_pipeline)

    sp = sub.add_parser("series",
                        help="truncated products/sums with tail bounds")
    _add_pair_args(sp)
    sp.add_argument("--kind", default="euler",
                    choices=["euler", "support-sum"])
    sp.add_argument("--cutoffs", type=_float_list,
                    default=[10.0**3, 10.0**4, 10.0**5, 10.0**6])
    sp.add_argument("--a", type=int, default=1,
                    help="support-sum: the fixed outer divisor a")
    sp.add_argument("--k1", type=int, default=1,
                    help="support-sum: the squarefree kernel k1")
    sp.add_argument("--w0", type=int, default=2)
    sp.set_defaults(func=_cmd_series)

    sp = sub.add_parser("lattice",
                        help="lattice point counts vs area estimate")
    sp.add_argument("--form", required=True, metavar="CFG")
    sp.add_argument("--B", required=True, type=int)
    sp.add_argument("--z", type=float, default=0.0)
    sp.add_argument("--k", type=_int_list, default=[1],
                    help="comma list of moduli k (points with k | F)")
    sp.add_argument("--W", type=int, default=1)
    sp.add_argument("--base", type=_int_list, default=[0, 0],
                    help="congruence base point s1,t1 when W > 1")
    sp.set_defaults(func=_cmd_lattice)

    sp = sub.add_parser("volume", help="areas of the regions R_z(B)")
    sp.add_argument("--form", required=True, metavar="CFG")
    sp.add_argument("--B", required=True, type=float)
    sp.add_argument("--z", type=_float_list, default=[0.0],
                    help="comma list of level cuts z")
    sp.set_defaults(func=_cmd_volume)

    sp = sub.add_parser("fit", help="normalized constants from a counts CSV")
    sp.add_argument("--input", required=True,
                    help="CSV with a header naming a B column and a count "
                         "column (count output works as is)")
    sp.add_argument("--r", required=True, type=int,
                    help="number of split residue classes")
    sp.add_argument("--n", required=True, type=int, help="field degree")
    sp.set_defaults(func=_cmd_fit)

    sp = sub.add_parser("report",
                        help="summary row per bundled example pair")
    sp.add_argument("--B", type=int, default=512)
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=_cmd_report)

    for spx in sub.choices.values():
        spx.add_argument("--output", metavar="FILE",
                         help="write the CSV here instead of stdout")
    return ap


def _emit(header, rows, path: Optional[str]) -> None:
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        wr = csv.writer(out)
        wr.writerow(header)
        wr.writerows(rows)
    finally:
        if path:
            out.close()


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        header, rows = args.func(args)
        _emit(header, rows, args.output)
    except HypothesisError as exc:
        print(f"normsieve: hypothesis violated: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, OverflowError, ResourceBudgetError,
            configparser.Error) as exc:
        print(f"normsieve: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
