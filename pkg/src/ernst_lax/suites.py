"""Verification suites: each turns a module's contract into named report checks.

Convergence checks run on a grid pair (coarse and refined) and compare the
interior max norm over the same physical region: the margin is a tenth of
the node count on each grid.  Negative controls are ordinary checks whose
``pass`` means the residual stayed away from zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .charges import (
    ChargeTower,
    backward_forward_roundtrip,
    build_tower,
    conservation_residual,
    forward_backward_roundtrip,
)
from .config import RunConfig, SolutionSpec, parse_complex
from .deform import Contour, contour_project, deformation_residual_sweep, hidden_symmetry_delta
from .ernst import (
    ErnstPotential,
    MetricSolution,
    catalog_solution,
    connection,
    divergence_form,
    ernst_matrix_residual,
    ernst_scalar_residual,
    matrix_to_potential,
    maurer_cartan,
    potential_to_matrix,
    potential_X,
)
from .exterior import (
    OneForm,
    anticommutator,
    commutator,
    d0,
    d1,
    form_max_abs,
    form_norm,
    hodge_star,
    wedge,
)
from .grid import (
    Grid,
    MatrixField,
    ScalarField,
    coordinate_fields,
    make_grid,
    matrix_unit,
    partial_rho,
    partial_z,
    random_trig_field,
)
from .report import Check, bound_check, nonzero_check, order_check
from .spectral import (
    SpectralFunction,
    bz_map,
    bz_residual,
    evaluate_psi,
    evaluate_psi_lambda,
    exp_profile,
    lax_component_residuals,
    lax_residual_exterior,
    lax_residual_fields,
    linear_profile,
    profile_of_invariant,
    spectral_invariant,
    star_form_residual,
    truncation_boundary,
)
from .symmetry import characteristic_catalog, symmetry_residual


def margin_for(grid: Grid) -> int:
    return max(2, (min(grid.n_rho, grid.n_z) - 1) // 10)


def lam_label(lam: complex) -> str:
    lam = complex(lam)
    if lam.imag == 0:
        return f"{lam.real:g}"
    return f"{lam.real:g}{lam.imag:+g}j"


def _rel(diff: float, scale: float) -> float:
    return diff / max(scale, 1e-300)


@dataclass
class Context:
    """Shared state of one run: config plus caches of solutions and towers."""

    cfg: RunConfig
    _solutions: dict = field(default_factory=dict)
    _towers: dict = field(default_factory=dict)

    @property
    def tol(self):
        return self.cfg.tolerances

    def grids(self, spec: SolutionSpec) -> tuple[Grid, Grid]:
        g = spec.grid
        coarse = make_grid((g.rho, g.z), (int(g.n), int(g.n)))
        return coarse, coarse.refined(self.cfg.refine)

    def pair_params(self, spec: SolutionSpec, **extra) -> dict:
        grids = self.grids(spec)
        out = {
            "solution": spec.name,
            "solution_params": dict(spec.params),
            "h": [[gr.h_rho, gr.h_z] for gr in grids],
            "margin": [margin_for(gr) for gr in grids],
        }
        out.update(extra)
        return out

    def solution(self, spec: SolutionSpec, grid: Grid) -> MetricSolution:
        key = (spec.name, json.dumps(spec.params, sort_keys=True), grid)
        if key not in self._solutions:
            self._solutions[key] = catalog_solution(spec.name, spec.params, grid)
        return self._solutions[key]

    def seed_matrix(self) -> np.ndarray:
        return np.asarray(self.cfg.seed_matrix, dtype=float)

    def tower(self, spec: SolutionSpec, grid: Grid, seed: str, n_min: int, n_max: int) -> ChargeTower:
        key = (spec.name, json.dumps(spec.params, sort_keys=True), grid, seed, n_min, n_max)
        if key not in self._towers:
            sol = self.solution(spec, grid)
            phi = characteristic_catalog(seed, sol, self.seed_matrix())
            self._towers[key] = build_tower(sol, phi, n_max=n_max, n_min=n_min, margin=margin_for(grid))
        return self._towers[key]

    def main_tower(self, grid: Grid) -> ChargeTower:
        t = self.cfg.tower
        return self.tower(self.cfg.solution, grid, self.cfg.seed, t.n_min, t.n_max)

    def order(self, name, coarse, fine, params, hi=True, extra_norms=None) -> Check:
        return order_check(
            name, coarse, fine, params, lo=self.tol.order_lo,
            hi=self.tol.order_hi if hi else None, ratio=self.cfg.refine, extra_norms=extra_norms,
        )


@dataclass
class SuiteResult:
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)


def _pair(ctx: Context, spec: SolutionSpec, fn):
    """Evaluate ``fn(grid, margin)`` on both grids of the pair."""
    return [fn(gr, margin_for(gr)) for gr in ctx.grids(spec)]


# -- exterior calculus ----------------------------------------------------------


def _random_forms(grid: Grid, seed: int):
    rng = np.random.default_rng(seed)
    fields = [random_trig_field(grid, rng) for _ in range(5)]
    s1 = OneForm(fields[0], fields[1])
    s2 = OneForm(fields[2], fields[3])
    return s1, s2, fields[4]


def suite_identities(ctx: Context) -> SuiteResult:
    res = SuiteResult()
    tol = ctx.tol
    spec = ctx.cfg.solution
    coarse, _ = ctx.grids(spec)
    s1, s2, psi = _random_forms(coarse, ctx.cfg.rng_seed)
    params = {"grid": [coarse.n_rho, coarse.n_z], "rng_seed": ctx.cfg.rng_seed}

    res.checks.append(bound_check(
        "identities.double_star", form_max_abs(hodge_star(hodge_star(s1)) + s1), tol.exact, params))
    res.checks.append(bound_check(
        "identities.star_wedge",
        form_max_abs(wedge(hodge_star(s1), hodge_star(s2)) - wedge(s1, s2)), tol.exact, params))
    res.checks.append(bound_check(
        "identities.star_anticommutator",
        form_max_abs(anticommutator(s1, hodge_star(s2)) + anticommutator(hodge_star(s1), s2)),
        tol.exact, params))
    a, b = 0.7, -1.3 + 0.4j
    res.checks.append(bound_check(
        "identities.star_linearity",
        form_max_abs(hodge_star(s1 * a + s2 * b) - (hodge_star(s1) * a + hodge_star(s2) * b)),
        tol.exact, params))

    def dd(grid, m):
        s, _, p = _random_forms(grid, ctx.cfg.rng_seed)
        return form_norm(d1(d0(p)), m)

    def antideriv(grid, m):
        s, _, p = _random_forms(grid, ctx.cfg.rng_seed)
        lhs = d1(commutator(s, p))
        rhs = commutator(d1(s), p) - anticommutator(s, d0(p))
        return form_norm(lhs - rhs, m)

    pparams = ctx.pair_params(spec, rng_seed=ctx.cfg.rng_seed)
    pparams.pop("solution"), pparams.pop("solution_params")
    c, f = _pair(ctx, spec, dd)
    # the discrete partials act on different axes and commute exactly
    res.checks.append(bound_check("identities.d_squared", max(c, f), tol.roundoff, pparams,
                                  {"coarse": c, "fine": f}))
    c, f = _pair(ctx, spec, antideriv)
    res.checks.append(ctx.order("identities.antiderivation", c, f, pparams))
    return res


# -- Ernst equation -----------------------------------------------------------


def _nonsolution_metric(grid: Grid) -> MetricSolution:
    """Smooth symmetric unimodular field that does not solve the equation."""
    r, z = grid.mesh()
    p = ErnstPotential(ScalarField(grid, np.exp(0.5 * np.sin(r) * np.cos(z))),
                       ScalarField(grid, 0.4 * np.sin(r + z)))
    return potential_to_matrix(p, "nonsolution")


def _diag_exp_metric(grid: Grid) -> MatrixField:
    r, _ = grid.mesh()
    v = np.zeros(grid.shape + (2, 2))
    v[..., 0, 0] = np.exp(r)
    v[..., 1, 1] = np.exp(-r)
    return MatrixField(grid, v)


def suite_verify_solution(ctx: Context) -> SuiteResult:
    res = SuiteResult()
    tol = ctx.tol
    for spec in ctx.cfg.catalog:
        tag = f"solution.{spec.name}"
        params = ctx.pair_params(spec)
        sols = [ctx.solution(spec, gr) for gr in ctx.grids(spec)]
        defects = {k: max(s.structure_defects()[k] for s in sols) for k in ("imag", "asymmetry", "det_minus_one")}
        res.checks.append(bound_check(f"{tag}.structure", max(defects.values()), tol.exact, params, defects))

        mat = _pair(ctx, spec, lambda gr, m: form_norm(ernst_matrix_residual(ctx.solution(spec, gr)), m))
        sca = _pair(ctx, spec, lambda gr, m: form_norm(
            ernst_scalar_residual(matrix_to_potential(ctx.solution(spec, gr))), m))
        if spec.name == "flat":
            # constant g: every stencil vanishes identically
            res.checks.append(bound_check(f"{tag}.matrix_residual", max(mat), tol.exact, params,
                                          {"coarse": mat[0], "fine": mat[1]}))
            res.checks.append(bound_check(f"{tag}.scalar_residual", max(sca), tol.exact, params,
                                          {"coarse": sca[0], "fine": sca[1]}))
        else:
            res.checks.append(ctx.order(f"{tag}.matrix_residual", *mat, params))
            res.checks.append(ctx.order(f"{tag}.scalar_residual", *sca, params))

        def div_gap(gr, m):
            g = ctx.solution(spec, gr)
            a = ernst_matrix_residual(g)
            b = divergence_form(connection(g)).coeff
            return _rel(form_max_abs(a - b), max(form_max_abs(a), 1.0))

        gaps = _pair(ctx, spec, div_gap)
        res.checks.append(bound_check(f"{tag}.divergence_form", max(gaps), tol.relative, params,
                                      {"coarse": gaps[0], "fine": gaps[1]}))

        if spec.name != "flat":
            mc = _pair(ctx, spec, lambda gr, m: form_norm(maurer_cartan(connection(ctx.solution(spec, gr))), m))
            res.checks.append(ctx.order(f"{tag}.maurer_cartan", *mc, params))

    # Maurer-Cartan on a non-solution, and on a connection not derived from any g
    spec = ctx.cfg.solution
    pp = ctx.pair_params(spec)
    pp.update(solution="nonsolution", solution_params={})
    mc = _pair(ctx, spec, lambda gr, m: form_norm(maurer_cartan(connection(_nonsolution_metric(gr))), m))
    ern = _pair(ctx, spec, lambda gr, m: form_norm(ernst_matrix_residual(_nonsolution_metric(gr)), m))
    res.checks.append(ctx.order("maurer_cartan.nonsolution", *mc, pp,
                                extra_norms={"ernst_residual_coarse": ern[0], "ernst_residual_fine": ern[1]}))

    def free_gamma(gr, m):
        rho, z = coordinate_fields(gr)
        gamma = OneForm(MatrixField.constant(gr, matrix_unit(1, 2)) * rho,
                        MatrixField.constant(gr, matrix_unit(2, 1)) * z)
        return form_norm(maurer_cartan(gamma), m)

    mc = _pair(ctx, spec, free_gamma)
    pp = ctx.pair_params(spec)
    pp.update(solution="nonintegrable_connection", solution_params={})
    res.checks.append(nonzero_check("negative.maurer_cartan.nonintegrable", *mc, tol.negative_change,
                                    params=pp))

    # non-solution g = diag(e^rho, e^-rho): residual tends to diag(1, -1)
    def diag_gap(gr, m):
        r = ernst_matrix_residual(_diag_exp_metric(gr))
        return form_norm(r - MatrixField.constant(gr, np.diag([1.0, -1.0])), m) / np.sqrt(2.0), form_norm(r, m)

    (gc, nc), (gf, nf) = _pair(ctx, spec, diag_gap)
    pp = ctx.pair_params(spec)
    pp.update(solution="diag_exp", solution_params={})
    res.checks.append(Check(
        "negative.diag_exp", f"residual within {tol.negative_target:g} of diag(1,-1) on both grids",
        bool(max(gc, gf) <= tol.negative_target and min(nc, nf) > 1e-6), pp,
        {"coarse": nc, "fine": nf, "relative_gap_coarse": gc, "relative_gap_fine": gf},
    ))

    # non-solution potential E = 1 + z^2: scalar residual 2 - 2 z^2
    def scalar_negative(gr, m):
        _, z = gr.mesh()
        p = ErnstPotential(ScalarField(gr, 1 + z**2), ScalarField(gr, 0 * z))
        r = ernst_scalar_residual(p)
        return form_norm(r, m), form_norm(r - ScalarField(gr, 2 - 2 * z**2), m)

    (nc, ec), (nf, ef) = _pair(ctx, spec, scalar_negative)
    pp.update(solution="one_plus_z_squared")
    res.checks.append(Check(
        "negative.scalar_residual", "matches 2 - 2 z^2 and stays nonzero",
        bool(max(ec, ef) <= tol.roundoff and min(nc, nf) > 1e-6), pp,
        {"coarse": nc, "fine": nf, "analytic_gap_coarse": ec, "analytic_gap_fine": ef},
    ))

    # matrix potential X on the main solution
    px = [(potential_X(ctx.solution(spec, gr)), gr) for gr in ctx.grids(spec)]
    params = ctx.pair_params(spec)
    path = [form_norm(p.path_disagreement, margin_for(gr)) for p, gr in px]
    res.checks.append(ctx.order("potential_X.path_disagreement", *path, params))
    sec = [form_norm(p.second_order_residual, margin_for(gr)) for p, gr in px]
    res.checks.append(ctx.order("potential_X.second_order_residual", *sec, params))

    def defining(p, gr):
        gamma = connection(ctx.solution(spec, gr))
        rho, _ = coordinate_fields(gr)
        X = p.X
        a = form_norm(gamma.rho * rho - partial_z(X), margin_for(gr))
        b = form_norm(gamma.z * rho + partial_rho(X), margin_for(gr))
        return max(a, b)

    rel = [defining(p, gr) for p, gr in px]
    res.checks.append(ctx.order("potential_X.defining_relations", *rel, params))
    return res


# -- symmetry characteristics -----------------------------------------------------


def suite_symmetry(ctx: Context) -> SuiteResult:
    res = SuiteResult()
    tol = ctx.tol
    c = ctx.seed_matrix()
    for name in ctx.cfg.symmetry_solutions:
        spec = ctx.cfg.solution_by_name(name)
        params = ctx.pair_params(spec)
        for kind in ("constant", "z_translation"):
            norms = _pair(ctx, spec, lambda gr, m: form_norm(symmetry_residual(
                ctx.solution(spec, gr), characteristic_catalog(kind, ctx.solution(spec, gr), c)), m))
            res.checks.append(ctx.order(f"symmetry.{name}.{kind}", *norms, dict(params, characteristic=kind)))
    for name in ctx.cfg.control_solutions:
        spec = ctx.cfg.solution_by_name(name)
        norms = _pair(ctx, spec, lambda gr, m: form_norm(symmetry_residual(
            ctx.solution(spec, gr), characteristic_catalog("rho_translation", ctx.solution(spec, gr))), m))
        res.checks.append(nonzero_check(f"negative.symmetry.{name}.rho_translation", *norms, tol.negative_change,
                                        params=ctx.pair_params(spec, characteristic="rho_translation")))

    flat = ctx.cfg.solution_by_name("flat") if any(s.name == "flat" for s in ctx.cfg.catalog) else None
    if flat is not None:
        norms = _pair(ctx, flat, lambda gr, m: form_norm(symmetry_residual(
            ctx.solution(flat, gr), characteristic_catalog("linear_z", ctx.solution(flat, gr), c)), m))
        res.checks.append(bound_check("symmetry.flat.linear_z", max(norms), tol.roundoff,
                                      ctx.pair_params(flat, characteristic="linear_z"),
                                      {"coarse": norms[0], "fine": norms[1]}))
    return res


# -- charge towers ------------------------------------------------------------------


def flat_closed_form(grid: Grid, c: np.ndarray) -> dict:
    """Levels of the flat tower seeded with ``c z``: the coefficients of ``c s``."""
    r, z = grid.mesh()
    one = np.ones_like(r)
    return {
        -1: MatrixField(grid, (one / 2)[..., None, None] * c),
        0: MatrixField(grid, z[..., None, None] * c),
        1: MatrixField(grid, (-(r**2) / 2)[..., None, None] * c),
        2: MatrixField.zeros(grid),
    }


def flat_tower(ctx: Context, grid: Grid) -> ChargeTower:
    """Flat tower of seed ``c z`` with the forward constant matching the closed form."""
    c = ctx.seed_matrix()
    flat = catalog_solution("flat", {}, grid)
    seed = characteristic_catalog("linear_z", flat, c)
    i0, _ = grid.default_base()
    rho_b = grid.rho[i0]
    return build_tower(flat, seed, n_max=2, n_min=-1, base_values={1: -(rho_b**2) / 2 * c},
                       margin=margin_for(grid))


def _flat_spec(ctx: Context) -> SolutionSpec:
    for s in ctx.cfg.catalog:
        if s.name == "flat":
            return s
    return SolutionSpec("flat", {}, ctx.cfg.solution.grid)


def suite_tower(ctx: Context) -> SuiteResult:
    res = SuiteResult()
    tol = ctx.tol
    c = ctx.seed_matrix()

    flat = _flat_spec(ctx)
    gaps = []
    for gr in ctx.grids(flat):
        tower, exact = flat_tower(ctx, gr), flat_closed_form(gr, c)
        gaps.append(max(form_max_abs(tower[n] - exact[n]) for n in exact))
    res.checks.append(bound_check("tower.flat.closed_form", max(gaps), tol.closed_form,
                                  ctx.pair_params(flat, seed="linear_z", levels=[-1, 2]),
                                  {"coarse": gaps[0], "fine": gaps[1]}))

    # level-1 charge fed back in at level 0: residual -2 rho c
    def mismatched(gr, m):
        rho, _ = coordinate_fields(gr)
        phi1 = flat_closed_form(gr, c)[1]
        r = conservation_residual(catalog_solution("flat", {}, gr), phi1, 0)
        return form_norm(r, m), form_norm(r - MatrixField.constant(gr, c) * rho * (-2.0), m)

    (nc, ec), (nf, ef) = _pair(ctx, flat, mismatched)
    res.checks.append(Check(
        "negative.tower.mismatched_level", "matches -2 rho c and stays nonzero",
        bool(max(ec, ef) <= tol.roundoff and min(nc, nf) > 1e-6),
        ctx.pair_params(flat, level_used=0, level_true=1),
        {"coarse": nc, "fine": nf, "analytic_gap_coarse": ec, "analytic_gap_fine": ef},
    ))

    spec = ctx.cfg.solution
    grids = ctx.grids(spec)
    towers = [ctx.main_tower(gr) for gr in grids]
    sols = [ctx.solution(spec, gr) for gr in grids]
    params = ctx.pair_params(spec, seed=ctx.cfg.seed, levels=[towers[0].n_min, towers[0].n_max])
    tag = f"tower.{spec.name}"
    for n in towers[0].levels():
        if n == 0:
            continue
        kind = "closedness" if n > 0 else "consistency"
        certs = [t.certificates[n] for t in towers]
        chk = ctx.order(f"{tag}.{kind}.n={n}", *certs, dict(params, level=n))
        chk.certificates = {"coarse": certs[0], "fine": certs[1]}
        res.checks.append(chk)
    for n in towers[0].levels():
        norms = [form_norm(conservation_residual(s, t[n], n), margin_for(gr))
                 for s, t, gr in zip(sols, towers, grids)]
        res.checks.append(ctx.order(f"{tag}.conservation.n={n}", *norms, dict(params, level=n)))
    for n in range(towers[0].n_min, towers[0].n_max):
        fb = [form_norm(forward_backward_roundtrip(s, t[n], n), margin_for(gr))
              for s, t, gr in zip(sols, towers, grids)]
        res.checks.append(ctx.order(f"{tag}.roundtrip_forward_backward.n={n}", *fb, dict(params, level=n), hi=False))
        bf = [form_norm(backward_forward_roundtrip(s, t[n + 1], n), margin_for(gr))
              for s, t, gr in zip(sols, towers, grids)]
        res.checks.append(ctx.order(f"{tag}.roundtrip_backward_forward.n={n}", *bf, dict(params, level=n), hi=False))

    rows = [[n, float(towers[0].certificates.get(n, 0.0)), float(towers[1].certificates.get(n, 0.0))]
            for n in towers[0].levels()]
    res.tables["tower_certificates"] = (["level", "certificate_coarse", "certificate_fine"], rows)
    return res


# -- Lax pair --------------------------------------------------------------------


def suite_lax(ctx: Context) -> SuiteResult:
    res = SuiteResult()
    tol = ctx.tol
    spec = ctx.cfg.solution
    grids = ctx.grids(spec)
    N = ctx.cfg.tower.truncation
    towers = [ctx.main_tower(gr) for gr in grids]
    sols = [ctx.solution(spec, gr) for gr in grids]
    spectral = [SpectralFunction(t.truncate(-N, N)) for t in towers]
    base = ctx.pair_params(spec, seed=ctx.cfg.seed, truncation=N)
    tag = f"lax.{spec.name}"

    def truncation_norms(lam):
        out = []
        for s, t, S, gr in zip(sols, towers, spectral, grids):
            R = lax_residual_exterior(s, S, lam)
            out.append((form_norm(R - truncation_boundary(t, N, lam), margin_for(gr)), form_norm(R, margin_for(gr))))
        return out

    for lam in ctx.cfg.lambda_values():
        label = lam_label(lam)
        params = dict(base, **{"lambda": lam})
        (dc, rc), (df, rf) = truncation_norms(lam)
        res.checks.append(ctx.order(f"{tag}.truncation.lambda={label}", dc, df, params,
                                    extra_norms={"residual_coarse": rc, "residual_fine": rf}))

        s, S = sols[0], spectral[0]
        R = lax_residual_exterior(s, S, lam)
        first, second = lax_component_residuals(s, evaluate_psi(S, lam), evaluate_psi_lambda(S, lam), lam)
        gap = max(form_max_abs(R.z - first), form_max_abs(R.rho + second))
        res.checks.append(bound_check(f"{tag}.components.lambda={label}", _rel(gap, max(form_max_abs(R), 1.0)),
                                      tol.exact, params))

        SF = star_form_residual(s, S, lam)
        gap = form_max_abs(SF + hodge_star(R) * lam)
        res.checks.append(bound_check(f"{tag}.star_form.lambda={label}", _rel(gap, form_max_abs(SF)),
                                      tol.exact, params))

        if lam.imag == 0:
            imag = max(float(np.abs(evaluate_psi(Sx, lam).values.imag).max()) for Sx in spectral)
            res.checks.append(bound_check(f"{tag}.reality.lambda={label}", imag, tol.exact, params))

    rows, ok, orders = [], True, []
    for lam in (parse_complex(v, "lambda_sweep") for v in ctx.cfg.lambda_sweep):
        (dc, rc), (df, rf) = truncation_norms(lam)
        chk = ctx.order("sweep", dc, df, {})
        ok &= chk.passed
        orders.append(chk.order)
        rows.append([lam.real, lam.imag, dc, df, chk.order if chk.order is not None else float("nan")])
    res.checks.append(Check(
        f"{tag}.truncation.sweep", f"order in [{tol.order_lo}, {tol.order_hi}] at every sweep point", bool(ok),
        dict(base, lambdas=[parse_complex(v) for v in ctx.cfg.lambda_sweep]),
        {"min_order": min(o for o in orders if o is not None) if any(orders) else None}, None,
        {"orders": orders},
    ))
    res.tables["lax_sweep"] = (["lambda_re", "lambda_im", "coarse", "fine", "order"], rows)

    # spectral invariant and the flat tower of seed c z
    flat = _flat_spec(ctx)
    c = ctx.seed_matrix()
    for lam in ctx.cfg.lambda_values():
        label = lam_label(lam)
        inv = _pair(ctx, flat, lambda gr, m: max(form_norm(spectral_invariant(gr, lam).L1, m),
                                                  form_norm(spectral_invariant(gr, lam).L2, m)))
        res.checks.append(bound_check(f"spectral_invariant.lambda={label}", max(inv), tol.roundoff,
                                      ctx.pair_params(flat, **{"lambda": lam}), {"coarse": inv[0], "fine": inv[1]}))

        def flat_lax(gr, m):
            S = SpectralFunction(flat_tower(ctx, gr))
            g = catalog_solution("flat", {}, gr)
            s = spectral_invariant(gr, lam).s
            gap = form_max_abs(evaluate_psi(S, lam) - MatrixField.constant(gr, c) * s)
            return form_norm(lax_residual_exterior(g, S, lam), m), gap

        (rc, gc), (rf, gf) = _pair(ctx, flat, flat_lax)
        res.checks.append(Check(
            f"lax.flat.linear_z.lambda={label}", f"Psi = c s within {tol.closed_form:g}; residual <= {tol.roundoff:g}",
            bool(max(gc, gf) <= tol.closed_form and max(rc, rf) <= tol.roundoff),
            ctx.pair_params(flat, **{"lambda": lam}),
            {"coarse": rc, "fine": rf, "closed_form_gap_coarse": gc, "closed_form_gap_fine": gf},
        ))
    return res


# -- Belinski-Zakharov variant ----------------------------------------------------


def suite_bz(ctx: Context) -> SuiteResult:
    res = SuiteResult()
    tol = ctx.tol
    flat = _flat_spec(ctx)
    bracket = ctx.cfg.bz_bracket
    K = np.asarray(ctx.cfg.bz_generator, dtype=float)
    M = ctx.seed_matrix()

    coarse, _ = ctx.grids(flat)
    g0 = catalog_solution("flat", {}, coarse)
    ident = MatrixField.identity(coarse)
    r = bz_residual(g0, ident, MatrixField.zeros(coarse), 1.0, bracket)
    res.checks.append(bound_check("bz.flat.identity", form_max_abs(r), tol.exact,
                                  {"bracket": bracket, "grid": [coarse.n_rho, coarse.n_z]}))

    for lam in ctx.cfg.lambda_values():
        label = lam_label(lam)
        params = ctx.pair_params(flat, bracket=bracket, generator=K, profile=M, **{"lambda": lam})

        def bz(gr, m):
            g = catalog_solution("flat", {}, gr)
            phi = profile_of_invariant(exp_profile(K), gr, lam)
            psi = bz_map(phi.psi, phi.psi_lambda, linear_profile(M), lam)
            bzr = form_norm(bz_residual(g, phi.psi, phi.psi_lambda, lam, bracket), m)
            lax = form_norm(lax_residual_fields(g, psi.psi, psi.psi_lambda, lam), m)
            trace = _rel(form_max_abs(psi.psi.trace()), form_max_abs(psi.psi))
            return bzr, lax, trace

        (bc, lc, tc), (bf, lf, tf) = _pair(ctx, flat, bz)
        res.checks.append(ctx.order(f"bz.flat.exp.lambda={label}", bc, bf, params))
        res.checks.append(ctx.order(f"bz.flat.map.lambda={label}", lc, lf, params))
        res.checks.append(bound_check(f"bz.flat.trace.lambda={label}", max(tc, tf), tol.exact, params))

    # Phi = rho I is not a solution: residual -(1/lambda) I drho + rho I dz
    lam = 1.0

    def rho_identity(gr, m):
        g = catalog_solution("flat", {}, gr)
        rho, _ = coordinate_fields(gr)
        ident = MatrixField.identity(gr)
        r = bz_residual(g, ident * rho, MatrixField.zeros(gr), lam, bracket)
        expected = OneForm(ident * (-1.0 / lam), ident * rho)
        return form_norm(r, m), form_norm(r - expected, m)

    (nc, ec), (nf, ef) = _pair(ctx, flat, rho_identity)
    res.checks.append(Check(
        "negative.bz.flat.rho_identity", "matches -(1/lambda) drho + rho dz and stays nonzero",
        bool(max(ec, ef) <= tol.roundoff and min(nc, nf) > 1e-6),
        ctx.pair_params(flat, bracket=bracket, **{"lambda": lam}),
        {"coarse": nc, "fine": nf, "analytic_gap_coarse": ec, "analytic_gap_fine": ef},
    ))
    return res


# -- hidden symmetry ----------------------------------------------------------------


def exact_dz_metric(spec: SolutionSpec, grid: Grid, eps: float = 1e-3) -> MatrixField:
    """``d g / d z`` of a catalog solution from closed-form values on shifted grids."""

    def at(shift):
        g = make_grid(((grid.rho_min, grid.rho_max), (grid.z_min + shift, grid.z_max + shift)),
                      (grid.n_rho, grid.n_z))
        return catalog_solution(spec.name, spec.params, g).g.values

    vals = (-at(2 * eps) + 8 * at(eps) - 8 * at(-eps) + at(-2 * eps)) / (12 * eps)
    return MatrixField(grid, vals)


def _normalized(tower: ChargeTower, scale: float) -> ChargeTower:
    """Rescale every level so the seed's largest node norm equals ``scale``."""
    k = scale / form_max_abs(tower[0])
    return ChargeTower({n: f * k for n, f in tower.charges.items()}, tower.base, provenance=tower.provenance)


def _sweep_table(rep) -> tuple:
    return (["alpha", "residual", "det_drift"], [list(r) for r in rep.rows()])


def suite_deform(ctx: Context) -> SuiteResult:
    res = SuiteResult()
    tol = ctx.tol
    spec = ctx.cfg.solution
    cs = ctx.cfg.contour
    contour = Contour(cs.radius, cs.nodes)
    grids = ctx.grids(spec)
    coarse = grids[0]
    rng = np.random.default_rng(ctx.cfg.rng_seed)

    consts = {n: rng.normal(size=(2, 2)) for n in (-1, 0, 1)}
    toy = ChargeTower({n: MatrixField.constant(coarse, v) for n, v in consts.items()}, coarse.default_base())
    gap = form_max_abs(contour_project(SpectralFunction(toy), contour) - toy[0])
    res.checks.append(bound_check("deform.contour.constants", gap, tol.exact,
                                  {"radius": cs.radius, "nodes": cs.nodes, "levels": [-1, 1]}))

    N = ctx.cfg.tower.truncation
    tower = ctx.main_tower(coarse).truncate(-N, N)
    S = SpectralFunction(tower)
    proj = contour_project(S, contour)
    scale = form_max_abs(tower[0])
    res.checks.append(bound_check("deform.contour.tower", _rel(form_max_abs(proj - tower[0]), scale), tol.exact,
                                  {"solution": spec.name, "seed": ctx.cfg.seed, "levels": [-N, N],
                                   "radius": cs.radius, "nodes": cs.nodes}))
    for rad in cs.alt_radii:
        other = contour_project(S, Contour(rad, cs.nodes))
        res.checks.append(bound_check(f"deform.contour.radius={rad:g}",
                                      _rel(form_max_abs(other - proj), scale), tol.exact,
                                      {"solution": spec.name, "radii": [cs.radius, rad], "nodes": cs.nodes}))

    # z-translation seed: delta g / alpha = 2 d_z g
    def ztrans(gr, m):
        t = ctx.tower(spec, gr, "z_translation", -1, 1)
        sol = ctx.solution(spec, gr)
        d = hidden_symmetry_delta(sol, SpectralFunction(t), contour)
        g = sol.g
        proj_gap = _rel(form_max_abs(d.delta_g - (g @ t[0] + t[0].T @ g)), form_max_abs(d.delta_g))
        exact = form_norm(d.delta_g - exact_dz_metric(spec, gr) * 2.0, m)
        v = d.delta_g.values
        asym = _rel(float(np.abs(v - np.swapaxes(v, -1, -2)).max()), form_max_abs(d.delta_g))
        return exact, proj_gap, asym, _rel(d.imag_violation, form_max_abs(d.delta_g))

    (ec, pc, ac, ic), (ef, pf, af, if_) = _pair(ctx, spec, ztrans)
    params = ctx.pair_params(spec, seed="z_translation", levels=[-1, 1])
    res.checks.append(ctx.order("deform.hidden.z_translation", ec, ef, params))
    res.checks.append(bound_check("deform.hidden.projection", max(pc, pf), tol.exact, params))
    res.checks.append(bound_check("deform.hidden.symmetric", max(ac, af), tol.exact, params))
    res.checks.append(bound_check("deform.hidden.real", max(ic, if_), tol.exact, params))

    # alpha sweeps on a dedicated fine grid
    sw = ctx.cfg.sweep
    sspec = sw.solution
    g_sw = make_grid((sspec.grid.rho, sspec.grid.z),
                     (int(sspec.grid.n), int(sspec.grid.n)))
    m_sw = margin_for(g_sw)
    sol = ctx.solution(sspec, g_sw)
    alphas = list(np.logspace(np.log10(sw.alpha_max), np.log10(sw.alpha_min), int(sw.alpha_count)))
    sparams = {"solution": sspec.name, "solution_params": dict(sspec.params), "h": [g_sw.h_rho, g_sw.h_z],
               "margin": m_sw, "alphas": alphas, "seed_scale": sw.seed_scale}
    for seed in ("z_translation", "constant"):
        t = _normalized(ctx.tower(sspec, g_sw, seed, -1, 1), sw.seed_scale)
        d = hidden_symmetry_delta(sol, SpectralFunction(t), contour)
        rep = deformation_residual_sweep(sol, d, alphas, margin=m_sw)
        p = dict(sparams, seed=seed, floor=rep.floor, fitted=rep.fitted, flags=rep.flags)
        ok = rep.slope is not None and tol.order_lo <= rep.slope <= tol.order_hi
        res.checks.append(Check(f"deform.sweep.{seed}", f"slope in [{tol.order_lo}, {tol.order_hi}]", bool(ok),
                                p, {"floor": rep.floor, "max_residual": max(rep.residuals)}, rep.slope))
        ok = rep.det_slope is not None and tol.order_lo <= rep.det_slope <= tol.order_hi
        res.checks.append(Check(f"deform.det_drift.{seed}", f"slope in [{tol.order_lo}, {tol.order_hi}]",
                                bool(ok), dict(p, fitted=rep.det_fitted),
                                {"max_det_drift": max(rep.det_drift)}, rep.det_slope))
        res.tables[f"deform_sweep_{seed}"] = _sweep_table(rep)

    phi = random_trig_field(g_sw, np.random.default_rng(ctx.cfg.rng_seed), real=True)
    t = _normalized(ChargeTower({0: phi}, g_sw.default_base()), sw.seed_scale)
    d = hidden_symmetry_delta(sol, SpectralFunction(t), contour)
    rep = deformation_residual_sweep(sol, d, alphas, margin=m_sw)
    ok = rep.slope is not None and tol.slope_control_lo <= rep.slope <= tol.slope_control_hi
    res.checks.append(Check(
        "negative.deform.sweep.random", f"slope in [{tol.slope_control_lo}, {tol.slope_control_hi}]", bool(ok),
        dict(sparams, seed="random", floor=rep.floor, fitted=rep.fitted, flags=rep.flags),
        {"floor": rep.floor, "max_residual": max(rep.residuals)}, rep.slope,
    ))
    res.tables["deform_sweep_random"] = _sweep_table(rep)
    return res


SUITES = {
    "identities": suite_identities,
    "verify-solution": suite_verify_solution,
    "symmetry": suite_symmetry,
    "tower": suite_tower,
    "lax": suite_lax,
    "bz": suite_bz,
    "deform": suite_deform,
}


def run_suites(names, cfg: RunConfig) -> SuiteResult:
    """Run suites in registry order, sharing one cache."""
    ctx = Context(cfg)
    out = SuiteResult()
    for name, fn in SUITES.items():
        if name in names:
            part = fn(ctx)
            out.checks.extend(part.checks)
            out.tables.update(part.tables)
    return out
