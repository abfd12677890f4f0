"""Command-line front end.

Every subcommand prints a plain-text report: the command line, digests
of the data files it read, its output and one PASS/FAIL line per check,
followed by a timing footer that is excluded from comparisons.  Exit
status is 0 when every check passes, 1 when some check fails and 2 for
unusable input.
"""
from __future__ import annotations

import hashlib
import pickle
import sys
import time
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import click

from .alphabet import DATA_DIR, AlphabetError, AlphabetInvalid, D4, parse_alphabet, robinson_alphabet
from .patchwork import Patch, PatchError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


@dataclass
class RunReport:
    command: str
    inputs: dict = field(default_factory=dict)
    lines: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)

    def input(self, path: str | Path, label: str | None = None) -> None:
        p = Path(path)
        self.inputs[label or p.name] = hashlib.sha256(p.read_bytes()).hexdigest()

    def say(self, text: str) -> None:
        self.lines.extend(str(text).rstrip("\n").splitlines())

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append((name, bool(ok), detail))
        self.lines.append(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))
        return ok

    @property
    def failed(self) -> int:
        return sum(not ok for _, ok, _ in self.checks)

    def comparable(self) -> str:
        out = [f"robinson {_version()}", f"command: {self.command}"]
        out += [f"input {k} sha256={v}" for k, v in sorted(self.inputs.items())]
        out += self.lines
        out.append(f"result: {'PASS' if not self.failed else 'FAIL'} "
                   f"({len(self.checks) - self.failed}/{len(self.checks)} checks)")
        return "\n".join(out) + "\n"

    def emit(self, stream=None) -> int:
        stream = stream or sys.stdout
        stream.write(self.comparable())
        stream.write(f"-- time {time.perf_counter() - self.started:.2f}s\n")
        return EXIT_FAIL if self.failed else EXIT_OK


def _finish(report: RunReport) -> None:
    sys.exit(report.emit())


def _input_error(msg: str) -> None:
    click.echo(f"error: {msg}", err=True)
    sys.exit(EXIT_INPUT)


def _command_echo(ctx: click.Context) -> str:
    # rebuilt from the parsed parameters so that it does not depend on how the CLI was invoked
    parts = ["robinson", ctx.info_name]
    for param in ctx.command.params:
        v = ctx.params.get(param.name)
        if v is None or v == () or v is False:
            continue
        if isinstance(param, click.Argument):
            parts += [str(x) for x in v] if isinstance(v, tuple) else [str(v)]
        else:
            opt = max(param.opts, key=len)
            parts.append(opt + ("" if v is True else f"={v}"))
    return " ".join(parts)


class _Cache:
    def __init__(self, directory: str | None):
        self.dir = Path(directory) if directory else None

    def get(self, key: str, compute):
        if self.dir is None:
            return compute()
        self.dir.mkdir(parents=True, exist_ok=True)
        p = self.dir / (key + ".pkl")
        if p.exists():
            with p.open("rb") as fh:
                return pickle.load(fh)
        value = compute()
        with p.open("wb") as fh:
            pickle.dump(value, fh)
        return value


def _alphabets() -> dict:
    from .alphabet import corner_alphabet, decorated_alphabet, marker_alphabet

    return {"A": robinson_alphabet(), "B": corner_alphabet(), "Btilde": decorated_alphabet(),
            "M": marker_alphabet()}


def _read_patch(path: str) -> Patch:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        _input_error(str(exc))
    try:
        return Patch.from_text(text, _alphabets())
    except (PatchError, KeyError, ValueError) as exc:
        _input_error(f"{path}: {exc}")


def _write(out: str | None, text: str, report: RunReport) -> None:
    if out is None:
        report.say(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        _input_error(str(exc))
    report.say(f"wrote {out}")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--cache", "cache_dir", type=click.Path(file_okay=False), default=None,
              help="Directory for cached language samples.")
@click.version_option(_version(), prog_name="robinson")
@click.pass_context
def main(ctx: click.Context, cache_dir: str | None) -> None:
    """Robinson tilings: alphabets, supercrosses, substitutions, derivations and cohomology."""
    ctx.obj = _Cache(cache_dir)


# ---------------------------------------------------------------------------
# validate

_PACKAGED = {"A": "robinson_A.tiles", "B": "corner_B.tiles", "Btilde": "decorated_Btilde.tiles"}


@main.command()
@click.argument("files", nargs=-1, type=click.Path())
@click.pass_context
def validate(ctx, files) -> None:
    """Parse and validate alphabet files (default: the packaged ones)."""
    report = RunReport(_command_echo(ctx))
    paths = [Path(f) for f in files] or [DATA_DIR / f for f in _PACKAGED.values()]
    for p in paths:
        try:
            text = p.read_text()
        except OSError as exc:
            _input_error(str(exc))
        report.input(p)
        try:
            alph = parse_alphabet(text, source=str(p))
        except AlphabetInvalid as exc:
            report.check(p.name, False, str(exc))
            continue
        except AlphabetError as exc:
            _input_error(f"{p}: {exc}")
        report.check(p.name, True, f"{len(alph)} tiles")
    _finish(report)


# ---------------------------------------------------------------------------
# patch producers


@main.command()
@click.option("--level", "-n", type=click.IntRange(0, 7), required=True)
@click.option("--orient", "-g", default="r0", show_default=True, help="Element of D4, e.g. r90 or s0.")
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def supercross(ctx, level, orient, out) -> None:
    """Build an n-supercross and print it in patch format."""
    from .patchwork import build_supercross, is_admissible, side

    try:
        D4.parse(orient)
    except ValueError as exc:
        _input_error(str(exc))
    report = RunReport(_command_echo(ctx))
    try:
        p = build_supercross(level, orient)
    except PatchError as exc:
        report.check("supercross arms unique", False, str(exc))
        _finish(report)
    _write(out, p.to_text(), report)
    report.check("size", p.width == side(level) == p.height, f"{p.width}x{p.height}")
    report.check("admissible", is_admissible(p))
    _finish(report)


@main.command()
@click.option("--rule", "-r", "rule_name", default="omega", show_default=True)
@click.option("--iter", "-n", "n", type=click.IntRange(0, 10), default=1, show_default=True)
@click.option("--tile", "-t", "tile_id", required=True)
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def subst(ctx, rule_name, n, tile_id, out) -> None:
    """Apply a substitution n times to one tile."""
    from .substitution import RuleError, iterate_tile, rule_by_name

    try:
        rule = rule_by_name(rule_name)
        t = rule.alphabet.tile(tile_id)
    except (RuleError, KeyError, ValueError) as exc:
        _input_error(str(exc))
    report = RunReport(_command_echo(ctx))
    p = iterate_tile(rule, t, n)
    _write(out, p.to_text(), report)
    report.check("size", p.width == p.height == 2 ** n, f"{p.width}x{p.height}")
    report.check("tiles in alphabet", all(x in rule.alphabet for _, _, x in p.cells()))
    _finish(report)


@main.command()
@click.option("--rule", "-r", "name", type=click.Choice(["phi", "phi1", "phi2", "d1", "d2"]), required=True)
@click.option("--in", "-i", "source", type=click.Path(), required=True, help="Patch file, or - for stdin.")
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def derive(ctx, name, source, out) -> None:
    """Apply a local derivation to a patch."""
    from . import derivation as dv

    p = _read_patch(source)
    report = RunReport(_command_echo(ctx))
    if source != "-":
        report.input(source)
    want = {"phi": "A", "phi1": "A", "phi2": "M", "d1": "A", "d2": "Btilde"}[name]
    if p.alphabet.name != want:
        _input_error(f"{name} reads {want} patches, not {p.alphabet.name}")
    fn = {"phi": dv.phi, "phi1": dv.phi1, "phi2": dv.phi2, "d1": dv.apply_d1, "d2": dv.apply_d2}[name]
    try:
        q = fn(p)
    except dv.DerivationError as exc:
        report.check(f"{name} defined on every window", False, str(exc))
        _finish(report)
    _write(out, q.to_text(), report)
    report.check(f"{name} defined on every window", True, f"{p.width}x{p.height} -> {q.width}x{q.height}")
    _finish(report)


@main.command()
@click.option("--kind", "-k", type=click.Choice(["shear", "filling"]), required=True)
@click.option("--param", "-p", type=int, required=True, help="Shear (even) or filling number (1-6).")
@click.option("--level", "-l", type=click.IntRange(1, 5), default=3, show_default=True)
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def fault(ctx, kind, param, level, out) -> None:
    """Build a fault window between two infinite-order supertiles."""
    from .patchwork import fault_patch, is_admissible

    report = RunReport(_command_echo(ctx))
    try:
        p = fault_patch(kind, shear=param, level=level) if kind == "shear" else \
            fault_patch(kind, filling=param, level=level)
    except PatchError as exc:
        _input_error(str(exc))
    _write(out, p.to_text(), report)
    report.check("admissible", is_admissible(p))
    _finish(report)


@main.command()
@click.option("--in", "-i", "source", type=click.Path(), required=True, help="Patch file, or - for stdin.")
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None)
@click.option("--ascii", "as_ascii", is_flag=True, help="Print tile ids in a grid instead of SVG.")
@click.option("--cell", type=click.IntRange(8, 400), default=40, show_default=True)
def render(source, out, as_ascii, cell) -> None:
    """Draw a patch as SVG (or ASCII)."""
    from .render import render_ascii, render_svg

    if not as_ascii and out is None:
        raise click.UsageError("give --out FILE.svg or --ascii")
    p = _read_patch(source)
    if p.width == 0 or p.height == 0:
        raise click.UsageError("empty patch")
    text = render_ascii(p) if as_ascii else render_svg(p, cell)
    if out is None:
        click.echo(text, nl=False)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        _input_error(str(exc))
    click.echo(f"wrote {out}")


# ---------------------------------------------------------------------------
# verify

SUITES = ("rules", "supercross", "roundtrip", "fault", "factor")
ROTATIONS = ("r0", "r90", "r180", "r270")


def _suite_rules(report: RunReport, cache: _Cache, rules_file: str | None) -> None:
    from .alphabet import corner_alphabet, decorated_alphabet
    from .derivation import DerivationError, d1_rule, d2_rule, load_rules
    from .substitution import (
        arrow_factor_check,
        decoration_closure,
        is_primitive,
        omega_rule,
        omega_tilde_rule,
        psi_compatible,
    )

    report.check("A has 28 tiles", len(robinson_alphabet()) == 28, f"{len(robinson_alphabet())} tiles")
    report.check("B from closure of omega", len(corner_alphabet()) == len(omega_rule().alphabet),
                  f"{len(corner_alphabet())} tiles")
    report.check("B~ has 208 tiles", len(decorated_alphabet()) == 208, f"{len(decorated_alphabet())} tiles")
    tilde, _, rep = decoration_closure(omega_rule())
    report.check("decoration closure reproduces B~",
                 {t.id for t in tilde} == {t.id for t in decorated_alphabet()},
                 f"{rep.created} created, {rep.kept} kept")
    for name, r in (("omega", omega_rule()), ("omega-tilde", omega_tilde_rule())):
        ok, k = is_primitive(r)
        report.check(f"{name} primitive", ok, f"power {k}")
    bad = psi_compatible(omega_tilde_rule(), omega_rule())
    report.check("psi intertwines the substitutions", bad is None, bad or "")
    report.check("arrows follow a -> aa", arrow_factor_check(omega_tilde_rule()))
    for name, get in (("d1", d1_rule), ("d2", d2_rule)):
        d = get()
        report.check(f"{name} rule table deterministic", not d.lint(), f"{len(d.rules)} rules")
    if rules_file:
        report.input(rules_file)
        try:
            d = load_rules(rules_file)
            report.check(f"{Path(rules_file).name} parses", True, f"{len(d.rules)} rules")
        except DerivationError as exc:
            report.check(f"{Path(rules_file).name} parses", False, str(exc))
        except OSError as exc:
            _input_error(str(exc))


def _suite_supercross(report: RunReport, cache: _Cache, level: int) -> None:
    from .derivation import marking_check, phi
    from .patchwork import build_supercross, is_admissible, occurrences

    for n in range(1, level + 1):
        try:
            p = build_supercross(n)
        except PatchError as exc:
            report.check(f"{n}-supercross arms unique", False, str(exc))
            continue
        report.check(f"{n}-supercross arms unique", True, f"{p.width}x{p.height}")
        report.check(f"{n}-supercross admissible", is_admissible(p))
        even = all(p[i, j].is_cross for i in range(0, p.width, 2) for j in range(0, p.height, 2))
        rows = all(any(p[i, j].is_cross for i in range(p.width)) for j in range(p.height))
        cols = all(any(p[i, j].is_cross for j in range(p.height)) for i in range(p.width))
        report.check(f"{n}-supercross crosses on the even lattice", even)
        report.check(f"{n}-supercross every row and column crosses", rows and cols)
        if n >= 2:
            subs = sum(len(occurrences(build_supercross(n - 1, g), p)) for g in ROTATIONS)
            report.check(f"{n}-supercross holds four {n - 1}-supercrosses", subs == 4, f"{subs} found")
    for n in range(1, min(level, 3) + 1):
        imgs = {phi(build_supercross(n, g)).rows for g in ROTATIONS}
        report.check(f"phi injective on {n}-supercrosses", len(imgs) == len(ROTATIONS),
                     f"{len(imgs)} images of {len(ROTATIONS)} supercrosses")
    r = marking_check(min(level, 5))
    report.check("alternating-rule marking is local", r.passed,
                 ", ".join(f"{k}={v}" for k, v in r.details.items()))


def _suite_roundtrip(report: RunReport, cache: _Cache) -> None:
    from .derivation import mirror_roundtrip_check, roundtrip_check
    from .patchwork import stabilized_language
    from .substitution import language_windows, omega_tilde_rule

    sample = cache.get("language-A-3x3", lambda: stabilized_language((3, 3)))
    r = roundtrip_check(sample.patches)
    report.check("d2 o d1 returns the centre tile", r.passed,
                 f"{r.checked} windows, stable at level {sample.level}, {len(r.failures)} failures")
    wins = cache.get("language-omega-tilde-3x3", lambda: language_windows(omega_tilde_rule(), 3, 3)[0])
    r = mirror_roundtrip_check(wins)
    report.check("d1 o d2 returns the centre tile", r.passed, f"{r.checked} windows, {len(r.failures)} failures")


def _suite_fault(report: RunReport, cache: _Cache) -> None:
    from .derivation import non_injectivity_witness, shear_check

    r = non_injectivity_witness()
    report.check("six fillings, one image, blank row", r.passed,
                 ", ".join(f"{k}={v}" for k, v in r.details.items()))
    r = shear_check()
    report.check("sheared windows admissible and absent from supercrosses", r.passed,
                 "; ".join(f"{s}: occurrences {v[2]}" for s, v in r.details["shears"].items()))


def _suite_factor(report: RunReport, cache: _Cache, level: int) -> None:
    from .derivation import factor_witness, supercross_image_in_all

    for n in range(1, level + 1):
        r = supercross_image_in_all(n)
        report.check(f"omega^{n}(t) contains phi of a {n - 1}-supercross for all t", r.passed,
                     f"{r.checked} tiles")
    for n in range(1, level + 1):
        r = factor_witness(n)
        report.check(f"phi({n}-supercross) is an omega-word", r.passed,
                     ", ".join(f"{k}={v}" for k, v in r.details.items()))


@main.command()
@click.option("--suite", "-s", type=click.Choice(("all",) + SUITES), default="all", show_default=True)
@click.option("--level", "-l", type=click.IntRange(1, 5), default=4, show_default=True)
@click.option("--rules", "rules_file", type=click.Path(dir_okay=False), default=None,
              help="Extra pattern-rule file to parse in the rules suite.")
@click.pass_context
def verify(ctx, suite, level, rules_file) -> None:
    """Run a verification suite."""
    report = RunReport(_command_echo(ctx))
    for f in ("robinson_A.tiles", "corner_B.tiles", "decorated_Btilde.tiles", "omega.rule",
              "omega_tilde.rule", "d1.rules", "d2.rules"):
        report.input(DATA_DIR / f)
    cache = ctx.obj
    for s in SUITES if suite == "all" else (suite,):
        report.say(f"suite {s}")
        if s == "rules":
            _suite_rules(report, cache, rules_file)
        elif s == "supercross":
            _suite_supercross(report, cache, level)
        elif s == "roundtrip":
            _suite_roundtrip(report, cache)
        elif s == "fault":
            _suite_fault(report, cache)
        elif s == "factor":
            _suite_factor(report, cache, level)
    _finish(report)


# ---------------------------------------------------------------------------
# cohomology


@main.command()
@click.option("--rule", "-r", "rule_name", default="omega-tilde", show_default=True)
@click.option("--collar", type=click.Choice(["auto", "on", "off"]), default="auto", show_default=True)
@click.option("--audit", "audit_dir", type=click.Path(file_okay=False), default=None,
              help="Write the complex, matrices and log here.")
@click.pass_context
def cohomology(ctx, rule_name, collar, audit_dir) -> None:
    """Cech cohomology of a substitution tiling space via its Anderson-Putnam complex."""
    from .homology import compute_cohomology, load_golden
    from .substitution import RuleError, rule_by_name

    try:
        rule = rule_by_name(rule_name)
    except (RuleError, KeyError, ValueError) as exc:
        _input_error(str(exc))
    report = RunReport(_command_echo(ctx))
    report.input(DATA_DIR / "golden.txt")
    res = compute_cohomology(rule, collar)
    g = res.complex
    report.say(f"complex: {'collared' if g.collared else 'plain'} tiles, V={g.nv} E={g.ne} F={g.nf}")
    if g.forcing is not None:
        report.say(f"border forcing: {'yes' if g.forcing[0] else 'no'} (levels {g.forcing[2]})")
    for k, H in enumerate(res.gamma_groups):
        report.say(f"H{k}(complex) = {H}")
    report.say(res.report())
    for name, ok in res.checks.items():
        report.check(name, ok)
    golden = load_golden().get(rule.name)
    if golden and all(k in golden for k in ("H0", "H1", "H2")):
        report.check("matches expected groups", res.matches(golden),
                     "; ".join(f"{k} = {golden[k]}" for k in ("H2", "H1", "H0")))
    else:
        report.say("no expected groups recorded for this rule")
    if audit_dir:
        try:
            files = res.write_audit(audit_dir)
        except OSError as exc:
            _input_error(str(exc))
        report.say(f"audit: {len(files)} files in {audit_dir}")
    _finish(report)


if __name__ == "__main__":
    main()
