"""Turning a :class:`JobConfig` into objects and running its command."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction

from . import distributions as dist
from . import engine, fdm, gaussian
from .config import (
    NEEDS_DELTA,
    NEEDS_MU1,
    NEEDS_MU2,
    NEEDS_VALID_DELTA,
    RANDOMIZED,
    DistSpec,
    JobConfig,
    Report,
    render_element,
    render_list,
)
from .errors import ConfigSemanticError, HeydeError, SizeLimitError
from .groups import (
    ELEMENT_BOUND,
    FiniteAbelianGroup,
    GroupMap,
    adjoint,
    check_heyde_condition,
    generated_subgroup,
    is_automorphism,
    make_group,
    make_map,
    trivial_subgroup,
    whole_group,
)

DEFAULT_FDM_TRIALS = 20
DEFAULT_GAUSS_SAMPLES = 100


@dataclass
class Job:
    config: JobConfig
    group: FiniteAbelianGroup
    delta: GroupMap | None
    mu1: dist.RationalDistribution | None
    mu2: dist.RationalDistribution | None
    tol: float


def _line(cfg: JobConfig, key: str):
    return cfg.lines.get(key)


def _build_dist(cfg: JobConfig, key: str, spec: DistSpec, G: FiniteAbelianGroup) -> dist.RationalDistribution:
    line = _line(cfg, key)
    try:
        if spec.kind == "literal":
            return dist.from_masses(G, spec.masses)
        if spec.kind == "point":
            _check_rank(spec.element, G, key, line)
            return dist.point_mass(G.element(spec.element))
        if spec.subgroup == "full":
            return dist.haar(whole_group(G))
        if spec.subgroup == "trivial":
            return dist.haar(trivial_subgroup(G))
        for g in spec.generators:
            _check_rank(g, G, key, line)
        return dist.haar(generated_subgroup(G, [G.element(g) for g in spec.generators]))
    except (ValueError, HeydeError) as exc:
        if isinstance(exc, ConfigSemanticError):
            raise
        raise ConfigSemanticError(f"{key}: {exc}", line) from None


def _check_rank(coords, G, key, line):
    if len(coords) != G.rank:
        raise ConfigSemanticError(f"{key}: element {render_element(coords)} does not have {G.rank} coordinates", line)


def build_job(cfg: JobConfig) -> Job:
    """Construct and semantically validate everything the command needs."""
    try:
        G = make_group(cfg.group, bound=cfg.bound or ELEMENT_BOUND)
    except SizeLimitError:
        raise
    except HeydeError as exc:
        raise ConfigSemanticError(f"group: {exc}", _line(cfg, "group")) from None
    if cfg.cmd in RANDOMIZED and cfg.seed is None:
        raise ConfigSemanticError(f"command {cfg.cmd} is randomized and needs an explicit seed", _line(cfg, "cmd"))
    delta = None
    if cfg.cmd in NEEDS_DELTA:
        if cfg.delta is None:
            raise ConfigSemanticError(f"command {cfg.cmd} needs 'delta'")
        line = _line(cfg, "delta")
        try:
            delta = make_map(cfg.delta, G)
        except HeydeError as exc:
            raise ConfigSemanticError(f"delta: {exc}", line) from None
        if not is_automorphism(delta):
            raise ConfigSemanticError(f"delta = {delta} is not an automorphism of {G}", line)
        if cfg.cmd in NEEDS_VALID_DELTA:
            ok, witness = check_heyde_condition(delta)
            if not ok:
                raise ConfigSemanticError(
                    f"delta violates Ker(I + delta) = {{0}}; kernel element {witness}", line, witness=witness
                )
    mus = {}
    for key, needed in (("mu1", NEEDS_MU1), ("mu2", NEEDS_MU2)):
        spec = getattr(cfg, key)
        if cfg.cmd in needed and spec is None:
            raise ConfigSemanticError(f"command {cfg.cmd} needs '{key}'")
        mus[key] = _build_dist(cfg, key, spec, G) if spec is not None else None
    if cfg.cmd == "gaussian-check":
        _gaussian_parts(cfg, G)
    tol = float(cfg.tol) if cfg.tol is not None else dist.FEQ_TOL
    return Job(cfg, G, delta, mus["mu1"], mus["mu2"], tol)


def validate_config(cfg: JobConfig) -> None:
    build_job(cfg)


def _gaussian_parts(cfg: JobConfig, G: FiniteAbelianGroup):
    if cfg.eps_real is None:
        raise ConfigSemanticError("command gaussian-check needs 'eps_real'")
    delta = make_map(cfg.delta, G)
    try:
        block = gaussian.RealAutomorphismBlock(cfg.eps_real, adjoint(delta))
    except HeydeError as exc:
        raise ConfigSemanticError(f"eps_real: {exc}", _line(cfg, "eps_real")) from None
    out = []
    for j in ("mu1", "mu2"):
        A, t = cfg.get_gaussian(f"{j}.A"), cfg.get_gaussian(f"{j}.t")
        if A is None or t is None:
            raise ConfigSemanticError(f"command gaussian-check needs '{j}.A' and '{j}.t'")
        try:
            gamma = gaussian.GaussianParams(A, t)
        except (ValueError, HeydeError) as exc:
            raise ConfigSemanticError(f"{j}.A/{j}.t: {exc}", _line(cfg, f"{j}.A")) from None
        if gamma.dim != block.dim:
            raise ConfigSemanticError(f"{j}.t has dimension {gamma.dim}, eps_real has {block.dim}", _line(cfg, f"{j}.t"))
        sh = cfg.get_gaussian(f"{j}.shift") or (0,) * G.rank
        _check_rank(sh, G, f"{j}.shift", _line(cfg, f"{j}.shift"))
        rho = _build_dist(cfg, j, getattr(cfg, j), G)
        out.append(gaussian.ProductDistribution(gamma, rho, G.element(sh)))
    return block, out[0], out[1]


# ---------------------------------------------------------------------------


def _pair(a, b) -> str:
    return f"{a} {b}"


def _masses(mu) -> str:
    return render_list(list(mu.masses))


def _subgroup(S) -> str:
    return "{" + ", ".join(str(x) for x in S.elements) + "}"


def run(cfg: JobConfig, tol: Fraction | None = None, bound: int | None = None) -> Report:
    """Dispatch ``cfg.cmd``; semantic problems become an ERROR report."""
    if tol is not None or bound is not None:
        cfg = JobConfig(**{**cfg.__dict__, "tol": tol if tol is not None else cfg.tol,
                           "bound": bound if bound is not None else cfg.bound})
    report = Report(cfg.cmd, "ERROR", echo=cfg.items())
    start = time.perf_counter()
    try:
        job = build_job(cfg)
        _COMMANDS[cfg.cmd](job, report)
    except ConfigSemanticError as exc:
        report.verdict = "ERROR"
        report.add("error", exc.code)
        if exc.line is not None:
            report.add("line", exc.line)
        report.add("message", exc.message)
        if exc.witness is not None:
            report.add("witness", exc.witness)
    except HeydeError as exc:
        report.verdict = "ERROR"
        report.add("error", exc.code)
        report.add("message", str(exc))
    report.elapsed = time.perf_counter() - start
    return report


def _cmd_check(job: Job, report: Report) -> None:
    sym = engine.is_conditionally_symmetric(job.mu1, job.mu2, job.delta)
    feq = engine.satisfies_feq(job.mu1, job.mu2, job.delta, job.tol)
    report.add("symmetric", sym.ok)
    if not sym.ok:
        a, b = sym.witness
        report.add("witness", _pair(a, b))
        report.add("mass", sym.mass)
        report.add("mirrored_mass", sym.mirrored_mass)
    report.add("feq_max_residual", feq.max_residual)
    report.add("lemma1_agrees", sym.ok == feq.ok)
    if sym.ok != feq.ok:
        report.verdict = "ERROR"
        report.add("error", "lemma1-disagreement")
        report.add("message", "exact symmetry test and functional equation disagree")
        return
    report.verdict = "PASS" if sym.ok else "FAIL"


def _cmd_feq(job: Job, report: Report) -> None:
    feq = engine.satisfies_feq(job.mu1, job.mu2, job.delta, job.tol)
    report.add("tol", f"{job.tol:.6e}")
    report.add("feq_max_residual", feq.max_residual)
    report.add("feq_worst_at", _pair(*feq.witness))
    if not feq.ok:
        report.add("witness", _pair(*feq.witness))
    report.verdict = "PASS" if feq.ok else "FAIL"


def _cmd_solve_partner(job: Job, report: Report) -> None:
    sol = engine.solve_partner(job.mu2, job.delta)
    if sol.particular is None or sol.is_empty:
        report.add("solution", "empty")
        report.add("witness", "no probability vector satisfies the symmetry equations")
        report.verdict = "FAIL"
        return
    report.add("dimension", sol.dimension)
    report.add("particular", render_list(list(sol.particular)))
    for i, b in enumerate(sol.basis, start=1):
        report.add(f"basis.{i}", render_list(list(b)))
    report.add("vertex_count", len(sol.vertices))
    for i, v in enumerate(sol.vertices, start=1):
        report.add(f"vertex.{i}", _masses(v))
    report.verdict = "PASS"


def _cmd_decompose(job: Job, report: Report) -> None:
    sym = engine.is_conditionally_symmetric(job.mu1, job.mu2, job.delta)
    report.add("symmetric", sym.ok)
    if not sym.ok:
        report.add("witness", _pair(*sym.witness))
        report.verdict = "FAIL"
        return
    try:
        dec = engine.extract_decomposition(job.mu1, job.mu2, job.delta)
    except engine.DecompositionNotFound as exc:
        report.add("witness", "no candidate subgroup F admits the factorization")
        report.add("message", str(exc))
        report.verdict = "FAIL"
        return
    _add_decomposition(report, dec)
    check = engine.verify_decomposition(job.mu1, job.mu2, job.delta, dec)
    report.add("verified", check.ok)
    report.verdict = "PASS" if check.ok else "FAIL"
    if not check.ok:
        report.add("witness", check.reason)


def _add_decomposition(report: Report, dec: engine.Decomposition) -> None:
    report.add("F", _subgroup(dec.subgroup))
    report.add("F_order", len(dec.subgroup))
    report.add("rho1", _masses(dec.rho[0]))
    report.add("rho2", _masses(dec.rho[1]))
    report.add("g1", dec.shifts[0])
    report.add("g2", dec.shifts[1])


def _cmd_enumerate_auts(job: Job, report: Report) -> None:
    trace = engine.automorphism_trace(job.group)
    valid = [t for t in trace if t.ok]
    report.add("automorphism_count", len(trace))
    report.add("valid_count", len(valid))
    for i, t in enumerate(trace, start=1):
        outcome = "valid" if t.ok else f"kernel {t.witness}"
        report.add(f"trace.{i}", f"{t.delta} {outcome}")
    for i, t in enumerate(valid, start=1):
        report.add(f"valid.{i}", t.delta)
    if not valid:
        report.add("note", "no valid delta")
    report.verdict = "PASS"


def _random_function(rng: random.Random, G: FiniteAbelianGroup) -> fdm.GroupFunction:
    return fdm.GroupFunction(G, tuple(Fraction(rng.randint(-8, 8), rng.randint(1, 8)) for _ in range(G.order)))


def _cmd_fdm_demo(job: Job, report: Report) -> None:
    G = job.group
    eps = adjoint(job.delta)
    rng = random.Random(job.config.seed)
    trials = job.config.samples or DEFAULT_FDM_TRIALS
    failure = None
    for _ in range(trials):
        phi1, phi2 = _random_function(rng, G), _random_function(rng, G)
        k1, k2, k3 = (G.elements[rng.randrange(G.order)] for _ in range(3))
        grid = fdm.cascade_identity_grid(phi1, phi2, eps, k1, k2, k3)
        if not grid.ok and failure is None:
            failure = (k1, k2, k3, *grid.witness)
    lemma2_bad = None
    for _ in range(trials):
        f = _random_function(rng, G)
        if not fdm.lemma2_finite_check(f):
            lemma2_bad = lemma2_bad or f
    report.add("trials", trials)
    report.add("cascade_holds", failure is None)
    report.add("lemma2_holds", lemma2_bad is None)
    report.add("B", _subgroup(fdm.subgroup_B(eps, whole_group(G))))
    if failure is not None:
        report.add("witness", " ".join(str(x) for x in failure))
    if lemma2_bad is not None:
        report.add("witness", render_list(list(lemma2_bad.values)))
    report.verdict = "PASS" if failure is None and lemma2_bad is None else "FAIL"


def _cmd_gaussian_check(job: Job, report: Report) -> None:
    block, m1, m2 = _gaussian_parts(job.config, job.group)
    samples = job.config.samples or DEFAULT_GAUSS_SAMPLES
    pair_ok = gaussian.gaussian_pair_condition(m1.gamma, m2.gamma, block.eps_real)
    res = gaussian.check_product_feq(m1, m2, block, samples, job.tol, job.config.seed)
    disc = engine.is_conditionally_symmetric(m1.discrete, m2.discrete, block.delta_disc)
    report.add("pair_condition", pair_ok)
    report.add("discrete_symmetric", disc.ok)
    report.add("samples_used", samples)
    report.add("product_feq_max_residual", res.max_residual)
    report.add("prediction_agrees", res.ok == (pair_ok and disc.ok))
    if not res.ok:
        s, sp, h, hp = res.witness
        report.add("witness", f"{render_list(s)} {render_list(sp)} {h} {hp}")
        report.verdict = "FAIL"
        return
    dec = engine.extract_decomposition(m1.discrete, m2.discrete, block.delta_disc)
    _add_decomposition(report, dec)
    check = gaussian.verify_full_decomposition(m1, m2, block, dec)
    report.add("verified", check.ok)
    report.verdict = "PASS" if check.ok else "FAIL"
    if not check.ok:
        report.add("witness", check.reason)


_COMMANDS = {
    "check": _cmd_check,
    "feq": _cmd_feq,
    "solve-partner": _cmd_solve_partner,
    "decompose": _cmd_decompose,
    "enumerate-auts": _cmd_enumerate_auts,
    "fdm-demo": _cmd_fdm_demo,
    "gaussian-check": _cmd_gaussian_check,
}
