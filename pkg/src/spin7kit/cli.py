"""``spin7kit`` command line: group queries, chambers, quotient runs and resolution reports.

Exit codes: 0 success, 2 invalid input, 3 a numerical iteration did not converge.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from importlib import resources

import click
import numpy as np

from .chambers import (StabilityParam, WallEndpointError, chamber_signature, is_regular, path_wall_crossings,
                       wall_system)
from .cohomology import CohomologyDataError, load_spec, resolution_report, spec_from_dict
from .mckay import (DESCRIPTOR_HELP, GroupError, build_group, cartan_matrix, character_table, conjugacy_age_spectrum,
                    freeness_check, mckay_quiver)

EXIT_INVALID = 2
EXIT_NONCONVERGED = 3
BUNDLED = ("t8", "kummer_t4", "k3xk3", "product_t4_k3_z2cubed")


class NonConvergence(click.ClickException):
    exit_code = EXIT_NONCONVERGED


class Invalid(click.ClickException):
    exit_code = EXIT_INVALID


@dataclass(frozen=True)
class JobConfig:
    tol: float = 1e-10
    radii: tuple[float, ...] = (10.0, 20.0, 40.0, 70.0, 100.0)
    samples: int = 3
    seed: int = 0
    fmt: str = "json"

    def __post_init__(self):
        if not self.tol > 0:
            raise Invalid("tolerances must be positive")
        if self.samples < 1:
            raise Invalid("--samples must be at least 1")
        if any(r <= 0 for r in self.radii):
            raise Invalid("radii must be positive")
        if self.fmt not in ("json", "table"):
            raise Invalid("--format is json or table")

    @classmethod
    def from_mapping(cls, obj: dict) -> "JobConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise Invalid(f"unknown configuration keys: {sorted(unknown)}")
        if "radii" in obj:
            obj = dict(obj, radii=tuple(float(r) for r in obj["radii"]))
        return cls(**obj)


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def _table(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_table(v, indent + 1))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{k}:")
            for item in v:
                lines.append(_table(item, indent + 1))
                lines.append("")
        else:
            lines.append(f"{pad}{k}: {json.dumps(v, ensure_ascii=False)}")
    return "\n".join(lines)


def _emit(ctx: click.Context, report: dict) -> None:
    cfg: JobConfig = ctx.obj["cfg"]
    report = _plain(report)
    text = json.dumps(report, indent=2, ensure_ascii=False) if cfg.fmt == "json" else _table(report)
    out = ctx.obj.get("output")
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def _group(desc: str):
    try:
        return build_group(desc)
    except GroupError as e:
        raise Invalid(str(e)) from e


def _parse_zeta(text: str | None, dims: tuple[int, ...], seed: int, k: int = 3) -> StabilityParam:
    """JSON list over irreducibles, list of k such lists, or {"reduced": ...}; default is generic."""
    if text is None:
        rng = np.random.default_rng(seed)
        return StabilityParam.from_reduced(rng.normal(size=(k, len(dims) - 1)), dims)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise Invalid(f"ζ is not valid JSON (line {e.lineno}, column {e.colno}): {e.msg}") from e
    try:
        if isinstance(obj, dict):
            if set(obj) != {"reduced"}:
                raise Invalid("ζ object must have the single key 'reduced'")
            return StabilityParam.from_reduced(obj["reduced"], dims)
        return StabilityParam(np.asarray(obj, dtype=float), dims)
    except (ValueError, TypeError) as e:
        raise Invalid(f"malformed ζ: {e}") from e


def _options(f):
    """Job options accepted both before and after the subcommand name."""
    decorators = [
        click.option("--output", "-o", type=click.Path(dir_okay=False, writable=True), default=None,
                     help="Write the report here."),
        click.option("--tol", type=float, default=None, help="Solver tolerance (positive)."),
        click.option("--radii", type=str, default=None, help="Comma-separated radii for decay fits."),
        click.option("--samples", type=int, default=None, help="Directions or samples per radius."),
        click.option("--seed", type=int, default=None, help="Seed for every random choice."),
        click.option("--format", "fmt", type=click.Choice(["json", "table"]), default=None),
        click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="JSON job configuration."),
    ]
    for d in reversed(decorators):
        f = d(f)
    return f


def _configure(ctx: click.Context, output=None, tol=None, radii=None, samples=None, seed=None, fmt=None,
               config=None) -> None:
    ctx.ensure_object(dict)
    base: dict = dict(ctx.obj.get("raw", {}))
    if config:
        with open(config) as fh:
            try:
                base.update(json.load(fh))
            except json.JSONDecodeError as e:
                raise Invalid(f"{config}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    for key, val in (("tol", tol), ("samples", samples), ("seed", seed), ("fmt", fmt)):
        if val is not None:
            base[key] = val
    if radii is not None:
        try:
            base["radii"] = [float(r) for r in radii.split(",")]
        except ValueError as e:
            raise Invalid(f"--radii: {e}") from e
    ctx.obj["raw"] = base
    ctx.obj["cfg"] = JobConfig.from_mapping(base)
    if output is not None:
        ctx.obj["output"] = output


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@_options
@click.pass_context
def main(ctx, **opts):
    """Spin(7) structures, McKay quivers and hyperkähler quotients at desk scale."""
    _configure(ctx, **opts)


@main.command()
@click.argument("group")
@_options
@click.pass_context
def mckay(ctx, group, **opts):
    """Characters, McKay quiver, Cartan matrix, Dynkin type and ages of GROUP.

    \b
    Descriptors:
    """
    _configure(ctx, **opts)
    g = _group(group)
    t = character_table(g, seed=ctx.obj["cfg"].seed)
    rep: dict = {"group": group, "order": g.order, "degrees": list(t.degrees),
                 "class_sizes": [len(c) for c in g.classes]}
    su2 = g.dim == 2 and not g.real
    if su2 or g.dim == 3:
        q = mckay_quiver(g, t)
        rep["quiver"] = q.adjacency
        rep["loops"] = q.loops()
        if su2:
            c = cartan_matrix(q)
            rep["cartan"] = c.matrix
            rep["dynkin"] = c.dynkin
            rep["kernel"] = c.kernel
    ages = conjugacy_age_spectrum(g)
    rep["ages"] = [{"class": a.index, "size": a.size, "age": a.age} for a in ages]
    rep["free"] = freeness_check(g).free
    _emit(ctx, rep)


mckay.help = (mckay.help or "") + "\n\n\b\n" + DESCRIPTOR_HELP


@main.command()
@click.argument("group")
@click.option("--zeta", type=str, default=None, help="ζ as JSON; default is a seeded generic value.")
@click.option("--path", "path_json", type=str, default=None, help="JSON list of ζ vertices.")
@click.option("--through-origin", is_flag=True, help="Cross-check the straight path from ζ to −ζ.")
@_options
@click.pass_context
def chambers(ctx, group, zeta, path_json, through_origin, **opts):
    """Regularity, chamber signature and wall crossings."""
    _configure(ctx, **opts)
    cfg: JobConfig = ctx.obj["cfg"]
    g = _group(group)
    w = wall_system(g)
    z = _parse_zeta(zeta, w.dims, cfg.seed)
    reg = is_regular(z, w)
    rep: dict = {"group": group, "dims": w.dims, "walls": w.n_walls, "wall_source": w.source,
                 "zeta": z.values, "regular": reg.regular, "distance": reg.distance}
    if w.n_walls and not np.any(w.pairings(z)):
        rep["status"] = "on all walls"
    elif not reg.regular:
        rep["status"] = "on a wall"
        rep["nearest_wall"] = reg.nearest_wall
    else:
        rep["status"] = "regular"
        rep["signature"] = chamber_signature(z, w)
    if w.mismatch:
        rep["subsum_walls"] = len(w.subsum_normals)
    path = None
    if path_json:
        try:
            path = [np.asarray(v, dtype=float) for v in json.loads(path_json)]
        except (json.JSONDecodeError, ValueError) as e:
            raise Invalid(f"malformed path: {e}") from e
    elif through_origin:
        path = [z.values, -z.values]
    if path is not None:
        try:
            events = path_wall_crossings(path, w)
        except (WallEndpointError, ValueError) as e:
            raise Invalid(str(e)) from e
        rep["crossings"] = [{"t": e.t, "wall": e.wall, "transversal": e.transversal} for e in events]
        rep["walls_crossed"] = len({e.wall for e in events})
    _emit(ctx, rep)


@main.command()
@click.argument("group")
@click.option("--zeta", type=str, default=None, help="ζ as JSON; default is seeded and normalised to |ζ| = 1.")
@_options
@click.pass_context
def quotient(ctx, group, zeta, **opts):
    """Solve μ = ζ, build a chart, fit the ALE decay and check scaling."""
    _configure(ctx, **opts)
    from .hk.quotient import ale_decay_fit, moment_solve, tangent_chart
    from .hk.rep import RepSpace

    cfg: JobConfig = ctx.obj["cfg"]
    g = _group(group)
    try:
        space = RepSpace(g)
    except ValueError as e:
        raise Invalid(str(e)) from e
    dims = tuple(space.table.degrees)
    z = _parse_zeta(zeta, dims, cfg.seed)
    if zeta is None:
        z = z * (1.0 / space.zeta_norm(z))
    rep: dict = {"group": group, "real_dim": space.real_dim, "gauge_dim": space.gauge_dim,
                 "zeta": z.values, "zeta_norm": space.zeta_norm(z)}
    w = wall_system(g)
    if len(dims) > 1 and not is_regular(z, w).regular:
        rep["warning"] = "ζ lies on a wall; the quotient is singular"
    seed_pt = space.flat_orbit_point(np.array([0.6, 0.8j]), 1.0)
    res = moment_solve(space, z, seed_pt, tol=cfg.tol)
    rep["residual"] = res.residual
    rep["iterations"] = res.iterations
    if not res.converged:
        _emit(ctx, rep)
        raise NonConvergence(f"moment solve stalled at residual {res.residual:.3e}")
    chart = tangent_chart(space, res.point)
    rep["chart_dim"] = chart.dim
    rep["chart_expected"] = chart.expected_dim
    if not chart.regular:
        rep["warning"] = f"chart dimension {chart.dim} differs from {chart.expected_dim}"
        rep["singular_values"] = np.sort(chart.singular_values)[:6]
    mu2 = space.mu(2 * res.point.x)
    rep["scaling_error"] = float(np.max(np.abs(mu2 - 4 * space.zeta_coords(z))))
    if space.zeta_norm(z) == 0:
        rep["decay"] = "flat cone: deviation identically zero"
    else:
        try:
            fit = ale_decay_fit(space, z, cfg.radii, directions=cfg.samples, seed=cfg.seed)
        except ValueError as e:
            raise Invalid(str(e)) from e
        rep["decay_exponent"] = fit.exponent
        rep["decay_radii"] = fit.radii
        rep["decay_deviations"] = fit.deviations
    _emit(ctx, rep)


@main.command()
@click.argument("spec", required=False)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), help="Orbifold spec JSON.")
@_options
@click.pass_context
def resolve(ctx, spec, input_path, **opts):
    """Resolution report for an orbifold spec (a path or a bundled name)."""
    _configure(ctx, **opts)
    name = input_path or spec
    if not name:
        raise Invalid(f"give a spec path or one of {', '.join(BUNDLED)}")
    try:
        if name in BUNDLED:
            text = resources.files("spin7kit.data").joinpath(f"{name}.json").read_text()
            spec_obj = spec_from_dict(json.loads(text))
        else:
            spec_obj = load_spec(name)
        rep = resolution_report(spec_obj)
    except json.JSONDecodeError as e:
        raise Invalid(f"{name}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    except (CohomologyDataError, GroupError, OSError) as e:
        raise Invalid(str(e)) from e
    _emit(ctx, rep)


if __name__ == "__main__":
    sys.exit(main())
