"""Command-line front end: space reports, verification suites, point and
word application, distances, decompositions and the Cayley transform."""

import json
import sys

import click
import numpy as np

from . import core, cpw, glwc, metrics, transforms, wspace
from .core import DimensionError, ResidualError, ZeroDivisorError
from .cpw import CPWPoint, phi_j, points_equal
from .glwc import cartan, decomposition_json, iwasawa
from .metrics import BallBoundaryError, MetricModel
from .wspace import WPoint

DEFAULT_SEED = 305419896

EXIT_CHECK_FAIL = 1
EXIT_USAGE = 2
EXIT_SCHEMA = 3
EXIT_DOMAIN = 4

SUITES = ("algebra", "j2", "isometry", "curvature", "volume", "charts",
          "decompositions", "collineations", "appendix", "all")

DOMAIN_ERRORS = (ZeroDivisorError, ResidualError, BallBoundaryError,
                 np.linalg.LinAlgError, ValueError, ArithmeticError)


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (np.floating,)):
        return format(float(value), ".17g")
    if isinstance(value, dict):
        items = sorted(value.items())
        return "{" + ", ".join("%s: %s" % (json.dumps(str(k)), _fmt(v))
                               for k, v in items) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    if isinstance(value, np.ndarray):
        return _fmt(value.tolist())
    raise TypeError("cannot serialize %r" % type(value))


def emit(data, out, fmt="json", csv_rows=None):
    """Write the report deterministically: sorted keys, floats with 17
    significant digits."""
    if fmt == "csv" and csv_rows is not None:
        header, rows = csv_rows
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(
                format(x, ".17g") if isinstance(x, float) else str(x)
                for x in row))
        text = "\n".join(lines) + "\n"
    else:
        text = _fmt(data) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def space_name(d, n):
    if n == 0:
        return "S^%d" % d
    if d == 1:
        return "RP^%d" % (n + 1)
    if d == 2:
        return "CP^%d" % (n + 1)
    if d == 4:
        return "HP^%d" % (n + 1)
    return "OP^%d" % (n + 1)


def make_space(d, n):
    try:
        return core.make_module(d, n)
    except (DimensionError, ValueError) as exc:
        raise click.exceptions.Exit(EXIT_USAGE) from _usage(str(exc))


def _usage(msg):
    click.echo("error: %s" % msg, err=True)
    return None


@click.group()
def main():
    """Numerical toolkit for the rank-one symmetric spaces built from
    norm-composing module actions."""


@main.command("info")
@click.option("--d", "d", type=int, required=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--out", "out", type=click.Path(), default=None)
def cmd_info(d, n, out):
    """Dimensions, display name, volume and curvature range."""
    spec = make_space(d, n)
    report = {
        "name": space_name(d, n),
        "d": d,
        "n": n,
        "dim_w": spec.dim_w,
        "volume": metrics.volume(spec),
        "curvature_range": [1.0, 4.0] if spec.dim_w >= 2 else [4.0, 4.0],
    }
    emit(report, out)


def _check(name, violation, tol):
    return {"name": name, "max_violation": float(violation),
            "tol": float(tol), "passed": bool(violation < tol)}


def suite_algebra(spec, rng, tol, samples):
    report = core.verify_composition(spec, sample_count=samples,
                                     seed=int(rng.integers(2 ** 31)))
    checks = []
    for key, val in sorted(report.items()):
        if key == "vacuous":
            continue
        checks.append(_check("algebra_" + key, val, tol))
    return checks


def suite_j2(spec, rng, tol, samples):
    checks = []
    if spec.n == 0:
        checks.append(_check("j2_fixture_vacuous", 0.0, 0.5))
    else:
        ok = core.verify_j2(spec, sample_count=min(samples, 50),
                            seed=int(rng.integers(2 ** 31)))
        expected = spec.d in (1, 2, 4, 8)
        checks.append(_check("j2_fixture",
                             0.0 if ok == expected else 1.0, 0.5))
    for kind in ("d3", "d4_mixed"):
        bad = core.make_non_j2_module(kind)
        ok = core.verify_j2(bad, sample_count=min(samples, 50),
                            seed=int(rng.integers(2 ** 31)))
        checks.append(_check("j2_negative_" + kind,
                             1.0 if ok else 0.0, 0.5))
    return checks


def suite_isometry(spec, rng, tol, samples):
    comp = MetricModel("compact", spec)
    ball = MetricModel("ball", spec)
    count = max(2, min(samples, 10))
    worst_b = worst_a = worst_c = 0.0
    for _ in range(count):
        w = WPoint.from_vector(
            spec, 0.8 * core.sample_sphere(rng, spec.dim_w))
        th = 0.1 + 0.6 * rng.random()
        worst_b = max(worst_b, metrics.metric_pullback_error(
            comp, comp,
            lambda ww: transforms.b_theta_apply(
                spec, th, CPWPoint(finite=ww)).finite, w))
        worst_c = max(worst_c, metrics.metric_pullback_error(
            comp, comp,
            lambda ww: cpw.phi0(spec, CPWPoint(finite=ww)).finite, w))
        wb = WPoint.from_vector(
            spec, 0.5 * core.sample_sphere(rng, spec.dim_w))
        worst_a = max(worst_a, metrics.metric_pullback_error(
            ball, ball,
            lambda ww: transforms.a_t_apply(
                spec, th, CPWPoint(finite=ww)).finite, wb))
    return [_check("isometry_btheta_pullback", worst_b, tol),
            _check("isometry_at_pullback", worst_a, tol),
            _check("isometry_phi0_pullback", worst_c, tol)]


def suite_curvature(spec, rng, tol, samples):
    if spec.dim_w < 2:
        return [_check("curvature_vacuous", 0.0, tol)]
    comp = MetricModel("compact", spec)
    count = max(2, min(samples, 20))
    worst = 0.0
    for _ in range(count):
        x = core.sample_sphere(rng, spec.dim_w)
        y = rng.standard_normal(spec.dim_w)
        y -= (y @ x) * x
        y /= np.linalg.norm(y)
        exact = metrics.sectional_curvature(comp, x, y)
        est = metrics.curvature_circle_estimate(spec, x, y, 0.02)
        worst = max(worst, abs(exact - est))
    return [_check("curvature_circle_oracle", worst, tol)]


def suite_volume(spec, rng, tol, samples):
    v1 = metrics.volume(spec)
    v2 = metrics.volume_quadrature(spec)
    return [_check("volume_quadrature_rel", abs(v1 - v2) / v1, tol)]


def suite_charts(spec, rng, tol, samples):
    worst = 0.0
    count = max(2, min(samples, 10))
    for _ in range(count):
        x = core.sample_sphere(rng, spec.dim_w)
        p = CPWPoint(finite=WPoint.from_vector(spec, 1.5 * x))
        for j in range(spec.n + 2):
            q = phi_j(spec, j, phi_j(spec, j, p))
            if not points_equal(spec, p, q, tol=tol):
                worst = max(worst, 1.0)
            else:
                gap = np.linalg.norm(q.finite.to_vector()
                                     - p.finite.to_vector())
                worst = max(worst, gap)
    return [_check("charts_involutive", worst, max(tol, 1e-9))]


def suite_decompositions(spec, rng, tol, samples):
    if spec.n == 0:
        return [_check("decompositions_vacuous", 0.0, tol)]
    count = max(2, min(samples, 10))
    worst_kan = worst_kak = 0.0
    for _ in range(count):
        entries = np.zeros((spec.n + 1, spec.n + 1, spec.d))
        for j in range(spec.n + 1):
            for k in range(j):
                entries[j, k] = 0.5 * rng.standard_normal(spec.d)
        nmat = glwc.n_from_lambda(spec, glwc.LambdaMatrix(entries)).mat
        t = glwc.ADiag(0.5 + 2.0 * rng.random(spec.n + 1))
        kmat = wspace.k_to_point(spec, WPoint.from_vector(
            spec, core.sample_sphere(rng, spec.dim_w))).mat
        g = kmat @ t.as_matrix(spec) @ nmat
        k1, a1, n1 = iwasawa(spec, g)
        rec = k1.mat @ a1.as_matrix(spec) @ n1.mat
        worst_kan = max(worst_kan, np.abs(rec - g).max()
                        / max(1.0, np.abs(g).max()))
        k1, a1, k2 = cartan(spec, g)
        rec = k1.mat @ a1.as_matrix(spec) @ k2.mat
        worst_kak = max(worst_kak, np.abs(rec - g).max()
                        / max(1.0, np.abs(g).max()))
    return [_check("decompositions_kan", worst_kan, tol),
            _check("decompositions_kak", worst_kak, tol)]


def suite_collineations(spec, rng, tol, samples):
    if spec.n == 0:
        return [_check("collineations_vacuous", 0.0, tol)]
    w0 = WPoint.from_vector(spec,
                            0.4 * core.sample_sphere(rng, spec.dim_w))
    word = [transforms.translate_prim(w0), transforms.b_prim(0.4)]
    double = transforms.theta_word(spec, transforms.theta_word(spec, word))
    worst_theta = 0.0
    count = max(2, min(samples, 10))
    for _ in range(count):
        q = CPWPoint(finite=WPoint.from_vector(
            spec, core.sample_sphere(rng, spec.dim_w)))
        a = transforms.apply_word(spec, word, q)
        b = transforms.apply_word(spec, double, q)
        gap = np.linalg.norm(a.finite.to_vector() - b.finite.to_vector()) \
            if a.is_finite and b.is_finite else 1.0
        worst_theta = max(worst_theta, gap)
    uw, adiag, (lam, wvec) = transforms.factor_collineation(spec, word)
    rec = transforms.recompose_collineation(spec, uw, adiag, (lam, wvec))
    worst_factor = 0.0
    for _ in range(count):
        q = CPWPoint(finite=WPoint.from_vector(
            spec, core.sample_sphere(rng, spec.dim_w)))
        a = transforms.apply_word(spec, word, q)
        b = transforms.apply_word(spec, rec, q)
        if a.is_finite and b.is_finite:
            worst_factor = max(worst_factor, np.linalg.norm(
                a.finite.to_vector() - b.finite.to_vector()))
        elif a.is_finite != b.is_finite:
            worst_factor = max(worst_factor, 1.0)
    checks = [_check("collineations_theta_involution", worst_theta,
                     max(tol, 1e-9)),
              _check("collineations_factor_round_trip", worst_factor,
                     max(tol, 1e-8))]
    if spec.d >= 2:
        base = WPoint.from_vector(
            spec, 0.3 * core.sample_sphere(rng, spec.dim_w))
        cl = wspace.cline_through(spec, WPoint.from_vector(
            spec, core.sample_sphere(rng, spec.dim_w)))
        pt = WPoint.from_vector(
            spec, base.to_vector()
            + 0.2 * cl.frame.T @ rng.standard_normal(spec.d))
        spread = transforms.conformal_check(spec, word, (base, cl), pt)
        checks.append(_check("collineations_conformal", spread,
                             max(tol, 1e-6)))
    return checks


def suite_appendix(spec, rng, tol, samples):
    count = max(2, min(samples, 20))
    worst_h = worst_n = worst_a = 0.0
    for _ in range(count):
        p = WPoint.from_vector(
            spec, 0.8 * rng.random() * core.sample_sphere(rng, spec.dim_w))
        q = transforms.cayley(spec, p)
        h = transforms.height(spec, q)
        expect = (1.0 - p.norm() ** 2) / \
            np.linalg.norm(core.unit_c(spec.d) - p.zeta) ** 2
        worst_h = max(worst_h, abs(h - expect))
        if spec.n >= 1:
            z = np.zeros(spec.d)
            if spec.d > 1:
                z[1] = rng.standard_normal()
            u = rng.standard_normal(spec.dim_v)
            worst_n = max(worst_n, abs(
                transforms.height(spec, transforms.ntilde_apply(
                    spec, z, u, q)) - h))
        tshift = rng.standard_normal() * 0.5
        worst_a = max(worst_a, abs(
            transforms.height(spec, transforms.atilde_apply(spec, tshift, q))
            - np.exp(2.0 * tshift) * h))
    checks = [_check("appendix_height_identity", worst_h, max(tol, 1e-12)),
              _check("appendix_ntilde_invariance", worst_n,
                     max(tol, 1e-12)),
              _check("appendix_atilde_scaling", worst_a, max(tol, 1e-12))]
    if spec.dim_w >= 2:
        comp = MetricModel("compact", spec)
        ball = MetricModel("ball", spec)
        x = core.sample_sphere(rng, spec.dim_w)
        y = rng.standard_normal(spec.dim_w)
        y -= (y @ x) * x
        y /= np.linalg.norm(y)
        gap = abs(metrics.sectional_curvature(ball, x, y)
                  + metrics.sectional_curvature(comp, x, y))
        checks.append(_check("appendix_ball_curvature", gap,
                             max(tol, 1e-12)))
    return checks


SUITE_RUNNERS = {
    "algebra": (suite_algebra, 1e-12),
    "j2": (suite_j2, 0.5),
    "isometry": (suite_isometry, 1e-6),
    "curvature": (suite_curvature, 1e-4),
    "volume": (suite_volume, 1e-8),
    "charts": (suite_charts, 1e-9),
    "decompositions": (suite_decompositions, 1e-9),
    "collineations": (suite_collineations, 1e-6),
    "appendix": (suite_appendix, 1e-12),
}


@main.command("verify")
@click.option("--d", "d", type=int, required=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--suite", "suite", type=click.Choice(SUITES), default="all")
@click.option("--seed", "seed", type=int, default=DEFAULT_SEED)
@click.option("--tol", "tol", type=float, default=None)
@click.option("--samples", "samples", type=int, default=200)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json")
@click.option("--out", "out", type=click.Path(), default=None)
def cmd_verify(d, n, suite, seed, tol, samples, fmt, out):
    """Run an invariant suite; exit 0 iff every check passes."""
    spec = make_space(d, n)
    names = list(SUITE_RUNNERS) if suite == "all" else [suite]
    checks = []
    for name in names:
        runner, default_tol = SUITE_RUNNERS[name]
        rng = np.random.default_rng(seed)
        checks.extend(runner(spec, rng, tol if tol is not None
                             else default_tol, samples))
    report = {"space": {"d": d, "n": n, "name": space_name(d, n)},
              "suite": suite, "seed": seed,
              "checks": checks,
              "passed": all(c["passed"] for c in checks)}
    rows = [(c["name"], c["max_violation"], c["tol"], c["passed"])
            for c in checks]
    emit(report, out, fmt, csv_rows=(("name", "max_violation", "tol",
                                      "passed"), rows))
    if not report["passed"]:
        raise click.exceptions.Exit(EXIT_CHECK_FAIL)


def _load_input(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _usage("cannot read input: %s" % exc)
        raise click.exceptions.Exit(EXIT_SCHEMA)


def _parse_space(data):
    try:
        d = int(data["space"]["d"])
        n = int(data["space"]["n"])
    except (KeyError, TypeError, ValueError) as exc:
        _usage("bad space block: %s" % exc)
        raise click.exceptions.Exit(EXIT_SCHEMA)
    try:
        return core.make_module(d, n)
    except (DimensionError, ValueError) as exc:
        _usage(str(exc))
        raise click.exceptions.Exit(EXIT_USAGE)


def _parse_point(spec, data):
    try:
        p = CPWPoint.from_json_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        _usage("bad point block: %s" % exc)
        raise click.exceptions.Exit(EXIT_SCHEMA)
    if p.is_finite:
        p = CPWPoint(finite=WPoint(np.asarray(p.finite.zeta, dtype=float),
                                   np.asarray(p.finite.v, dtype=float)))
        if p.finite.zeta.shape != (spec.d,) or \
                p.finite.v.shape != (spec.dim_v,):
            _usage("point dimensions do not match the space")
            raise click.exceptions.Exit(EXIT_SCHEMA)
    return p


@main.command("apply")
@click.option("--in", "infile", type=click.Path(exists=True), required=True)
@click.option("--out", "out", type=click.Path(), default=None)
def cmd_apply(infile, out):
    """Apply a transformation word (JSON) to a point (JSON)."""
    data = _load_input(infile)
    spec = _parse_space(data)
    p = _parse_point(spec, data.get("point", {}))
    try:
        word = transforms.word_from_json(data["word"])
    except (KeyError, TypeError, ValueError) as exc:
        _usage("bad word block: %s" % exc)
        raise click.exceptions.Exit(EXIT_SCHEMA)
    try:
        img = transforms.apply_word(spec, word, p)
    except DOMAIN_ERRORS as exc:
        _usage(str(exc))
        raise click.exceptions.Exit(EXIT_DOMAIN)
    emit({"point": img.to_json_dict()}, out)


@main.command("distance")
@click.option("--in", "infile", type=click.Path(exists=True), required=True)
@click.option("--model", "model_kind",
              type=click.Choice(["compact", "ball"]), default="compact")
@click.option("--out", "out", type=click.Path(), default=None)
def cmd_distance(infile, model_kind, out):
    """Geodesic distance between two points given as JSON."""
    data = _load_input(infile)
    spec = _parse_space(data)
    p = _parse_point(spec, data.get("p", {}))
    q = _parse_point(spec, data.get("q", {}))
    model = MetricModel(model_kind, spec)
    try:
        if model_kind == "ball":
            dist = metrics.distance(model, p.finite, q.finite) \
                if p.is_finite and q.is_finite else None
            if dist is None:
                raise BallBoundaryError("ball points must be finite")
        else:
            dist = metrics.distance(model, p, q)
    except DOMAIN_ERRORS as exc:
        _usage(str(exc))
        raise click.exceptions.Exit(EXIT_DOMAIN)
    emit({"distance": dist, "model": model_kind}, out)


@main.command("decompose")
@click.option("--in", "infile", type=click.Path(exists=True), required=True)
@click.option("--kind", "kind", type=click.Choice(["kan", "kak"]),
              default="kan")
@click.option("--out", "out", type=click.Path(), default=None)
def cmd_decompose(infile, kind, out):
    """Factor a matrix of the structure group as KAN or KAK."""
    data = _load_input(infile)
    spec = _parse_space(data)
    try:
        mat = np.array(data["mat"], dtype=float)
        if mat.shape != (spec.dim_w, spec.dim_w):
            raise ValueError("matrix shape mismatch")
    except (KeyError, TypeError, ValueError) as exc:
        _usage("bad matrix block: %s" % exc)
        raise click.exceptions.Exit(EXIT_SCHEMA)
    try:
        if kind == "kan":
            k, a, tail = iwasawa(spec, mat)
            rec = k.mat @ a.as_matrix(spec) @ tail.mat
        else:
            k, a, tail = cartan(spec, mat)
            rec = k.mat @ a.as_matrix(spec) @ tail.mat
    except DOMAIN_ERRORS as exc:
        _usage(str(exc))
        raise click.exceptions.Exit(EXIT_DOMAIN)
    report = decomposition_json(k, a, tail, spec, kind=kind)
    report["round_trip_error"] = float(np.abs(rec - mat).max())
    emit(report, out)


@main.command("cayley")
@click.option("--in", "infile", type=click.Path(exists=True), required=True)
@click.option("--inverse", "inverse", is_flag=True, default=False)
@click.option("--out", "out", type=click.Path(), default=None)
def cmd_cayley(infile, inverse, out):
    """Cayley transform of a ball point, or its inverse."""
    data = _load_input(infile)
    spec = _parse_space(data)
    try:
        zeta = np.array(data["point"]["zeta"], dtype=float)
        v = np.array(data["point"]["v"], dtype=float)
        if zeta.shape != (spec.d,) or v.shape != (spec.dim_v,):
            raise ValueError("point dimensions do not match the space")
    except (KeyError, TypeError, ValueError) as exc:
        _usage("bad point block: %s" % exc)
        raise click.exceptions.Exit(EXIT_SCHEMA)
    p = WPoint(zeta, v)
    try:
        img = transforms.cayley_inv(spec, p) if inverse \
            else transforms.cayley(spec, p)
    except DOMAIN_ERRORS as exc:
        _usage(str(exc))
        raise click.exceptions.Exit(EXIT_DOMAIN)
    emit({"zeta": img.zeta.tolist(), "v": img.v.tolist(),
          "height": transforms.height(spec, img)}, out)


if __name__ == "__main__":
    main()
