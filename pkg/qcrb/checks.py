"""
Randomized self-check suites run by `qcrb check`.

Each suite draws its models from a generator seeded from the run seed and
the suite name, so selecting a subset never changes another suite's draws.
"""

import zlib
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

import qcrb.utils as utils
from qcrb.bounds import (
    bound_beta,
    bound_rld,
    bound_sld,
    max_beta_closed_form,
    max_beta_scan,
    suzuki_branch,
    suzuki_bound,
    upper_bound_2sld,
)
from qcrb.errors import InvalidInput
from qcrb.holevo import (
    build_extension,
    dinv_check,
    holevo_min_f,
    holevo_sdp,
    rank_one_params,
)
from qcrb.logderiv import (
    beta_log_derivative,
    classical_fisher,
    estimator_covariance,
    fisher_beta,
    fisher_monotone,
    locally_unbiased_estimator,
)
from qcrb.matcore import (
    DensityMatrix,
    WeightMatrix,
    apply_commutation,
    min_real_cov,
    schur_complement,
)
from qcrb.model import (
    example_dim2,
    example_dim2_beta_star,
    example_dim4,
    example_dim4_beta_star,
    example_extended_dim2,
    random_density,
    random_model,
    random_povm,
    random_traceless,
    random_weight,
    tensor_power,
)

log = utils.get_logger("qcrb.Check")

DEFAULT_SEED = 0


class SuiteResult:
    """
    Outcome of one suite: pass flag, worst residual seen, number of cases
    and the first failing property.
    """

    name: str
    passed: bool
    worst: float
    cases: int
    failing: str

    def __init__(self, name: str):
        self.name = name
        self.passed = True
        self.worst = 0.0
        self.cases = 0
        self.failing = ""

    def record(self, prop: str, residual: float, tol: float) -> None:
        """residual is the amount by which the property is violated (<= tol passes)."""
        self.cases += 1
        self.worst = max(self.worst, float(residual))
        if not residual <= tol and self.passed:
            self.passed = False
            self.failing = prop
            log.debug("Suite %s: %s violated by %.3e", self.name, prop, residual)

    def to_dict(self) -> Dict[str, object]:
        return {
            "suite": self.name,
            "status": "PASS" if self.passed else "FAIL",
            "worst": self.worst,
            "cases": self.cases,
            "failing": self.failing,
        }


def _suite_rng(seed: int, name: str) -> np.random.Generator:
    return utils.make_rng([seed, zlib.crc32(name.encode())])


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


### Suites ###


def suite_matcore(res: SuiteResult, rng: np.random.Generator) -> None:
    for _ in range(20):
        dim = int(rng.integers(2, 5))
        rho = DensityMatrix(random_density(rng, dim))
        x = random_traceless(rng, dim)
        dx = apply_commutation(rho, x)
        r = rho.data
        res.record("commutation identity", float(np.max(np.abs(dx @ r + r @ dx - 1j * (x @ r - r @ x)))), 1e-10)
        res.record("commutation hermiticity", float(np.max(np.abs(dx - dx.conj().T))), 1e-12)
    for _ in range(20):
        n = 5
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        a = a + a.conj().T + 2 * n * np.eye(n)
        lhs = np.linalg.inv(schur_complement(a, 2))
        rhs = np.linalg.inv(a)[:2, :2]
        res.record("schur block inverse", float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))), 1e-9)
    g = WeightMatrix(np.diag([1.0, 2.0]))
    for _ in range(5):
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        j = h @ h.conj().T
        value, v_star = min_real_cov(g, j)
        for _ in range(40):
            noise = rng.standard_normal((2, 2))
            w = v_star + noise @ noise.T
            res.record("min_real_cov optimality", value - float(np.trace(g.entries @ w)), 1e-9)


def suite_logderiv(res: SuiteResult, rng: np.random.Generator) -> None:
    for _ in range(10):
        m = random_model(rng, int(rng.integers(2, 4)), 2)
        for beta in (0.0, 0.25, 0.5, 0.75, 1.0):
            res.record("log derivative residual", beta_log_derivative(m, beta).residual(m), 1e-10)
            jb = fisher_beta(m, beta).entries
            jm = fisher_beta(m, -beta).entries
            res.record("conjugation symmetry", float(np.max(np.abs(jm - jb.conj()))), 1e-10)
        for beta in (0.0, 0.3, 1.0):
            fm = fisher_monotone(m, lambda x, b=beta: (1 + b) / 2 * x + (1 - b) / 2)
            res.record("monotone family", float(np.max(np.abs(fm.entries - fisher_beta(m, beta).entries))), 1e-12 * max(1.0, float(np.max(np.abs(fm.entries)))))
        geo = fisher_monotone(m, np.sqrt, "sqrt")
        res.record("monotone ordering", -float(np.linalg.eigvalsh(geo.entries - fisher_beta(m, 0.0).entries)[0]), 1e-10)


def suite_monotonicity(res: SuiteResult, rng: np.random.Generator) -> None:
    for _ in range(5):
        m = random_model(rng, 2, 2)
        g = random_weight(rng, 2)
        c_h = holevo_min_f(g, build_extension(m)).value
        for _ in range(10):
            povm = random_povm(rng, 2, 4)
            jm = classical_fisher(m, povm).entries
            for beta in (0.0, 0.5, 1.0):
                gap = fisher_beta(m, beta).entries - jm
                res.record("povm monotonicity", -float(np.linalg.eigvalsh(gap)[0]), 1e-9)
            est = locally_unbiased_estimator(m, povm)
            v = estimator_covariance(m, povm, est)
            res.record("estimator above holevo", c_h - float(np.trace(g.entries @ v)), 1e-7)


def suite_chain(res: SuiteResult, rng: np.random.Generator) -> None:
    for i in range(40):
        m = random_model(rng, 2 + i % 2, 2)
        g = random_weight(rng, 2)
        c_s, c_r = bound_sld(g, m), bound_rld(g, m)
        c_b, _ = max_beta_scan(g, m)
        c_h = holevo_min_f(g, build_extension(m)).value
        res.record("max_beta >= max(sld, rld)", max(c_s, c_r) - c_b, 1e-8)
        res.record("holevo >= max_beta", c_b - c_h, 1e-8)
        res.record("2 sld >= holevo", c_h - upper_bound_2sld(g, m), 1e-8)
        for beta in (0.0, 0.5, 1.0):
            res.record("holevo >= beta bound", bound_beta(g, m, beta) - c_h, 1e-8)


def suite_suzuki(res: SuiteResult, rng: np.random.Generator) -> None:
    cases = [(example_dim2(0.95, 0.1), None), (example_dim2(0.95, 0.5), None)]
    cases += [(random_model(rng, 2, 2), random_weight(rng, 2)) for _ in range(60)]
    branches = {"rld": 0, "quadratic": 0}
    for m, g in cases:
        g = g if g is not None else WeightMatrix(fisher_beta(m, 0.0).real)
        ext = build_extension(m)
        a, b = ext.rank_one if ext.rank_one is not None else rank_one_params(ext, m)
        c_cf, _ = max_beta_closed_form(g, a, b)
        res.record("qubit formula = closed form", _rel(suzuki_bound(g, m), c_cf), 1e-8)
        branches[suzuki_branch(g, m)] += 1
    res.record("both formula branches hit", 0.0 if min(branches.values()) > 0 else 1.0, 0.0)


def suite_rank_one(res: SuiteResult, rng: np.random.Generator) -> None:
    for _ in range(20):
        m = random_model(rng, 2, 2)
        g = random_weight(rng, 2)
        ext = build_extension(m)
        a, b = ext.rank_one if ext.rank_one is not None else rank_one_params(ext, m)
        c_cf, _ = max_beta_closed_form(g, a, b)
        res.record("holevo = closed form", _rel(holevo_min_f(g, ext).value, c_cf), 1e-6)


def suite_solvers(res: SuiteResult, rng: np.random.Generator) -> None:
    for i in range(6):
        m = random_model(rng, 2 + i % 2, 2)
        g = random_weight(rng, 2)
        ext = build_extension(m)
        res.record("min_f = sdp", _rel(holevo_min_f(g, ext).value, holevo_sdp(g, ext).value), 1e-5)


def suite_examples(res: SuiteResult, rng: np.random.Generator) -> None:
    a = 0.95
    for r in np.arange(0.0, 0.95, 0.1):
        m = example_dim2(a, r)
        g = WeightMatrix(fisher_beta(m, 0.0).real)
        _, beta = max_beta_scan(g, m)
        res.record("dim2 beta*", abs(beta - example_dim2_beta_star(a, r)), 1e-6)
    for r in (0.0, 0.3, 0.6):
        m = example_dim4(a, r)
        g = WeightMatrix(fisher_beta(m, 0.0).real)
        _, beta = max_beta_scan(g, m)
        res.record("dim4 beta*", abs(beta - example_dim4_beta_star(a, r)), 1e-6)


def suite_scaling(res: SuiteResult, rng: np.random.Generator) -> None:
    m = example_dim2(0.95, 0.3)
    g = WeightMatrix(fisher_beta(m, 0.0).real)
    single = holevo_min_f(g, build_extension(m)).value
    double = holevo_min_f(g, build_extension(tensor_power(m, 2))).value
    res.record("holevo tensor scaling", _rel(double, 0.5 * single), 1e-5)


def suite_dinv(res: SuiteResult, rng: np.random.Generator) -> None:
    rep = dinv_check(example_extended_dim2(0.95, 0.3))
    res.record("extended model fisher identity", rep.fisher_identity_error, 1e-9)
    for _ in range(5):
        m = random_model(rng, 2, 2)
        rep = dinv_check(m.extended([m.rho.data - np.eye(2) / 2]))
        res.record("extended random model fisher identity", rep.fisher_identity_error, 1e-9)


SUITES: Dict[str, Callable[[SuiteResult, np.random.Generator], None]] = {
    "matcore": suite_matcore,
    "logderiv": suite_logderiv,
    "monotonicity": suite_monotonicity,
    "chain": suite_chain,
    "suzuki": suite_suzuki,
    "rank_one": suite_rank_one,
    "solvers": suite_solvers,
    "examples": suite_examples,
    "scaling": suite_scaling,
    "dinv": suite_dinv,
}


def run_checks(seed: int = DEFAULT_SEED, suite: Optional[str] = None) -> List[SuiteResult]:
    """
    Run one named suite or all of them; numerical errors inside a suite
    count as a failure of that suite.
    """
    if suite is not None and suite not in SUITES:
        raise InvalidInput(f"unknown suite '{suite}', choose from {', '.join(SUITES)}")
    names = [suite] if suite is not None else list(SUITES)
    results = []
    for name in names:
        res = SuiteResult(name)
        try:
            SUITES[name](res, _suite_rng(seed, name))
        except ArithmeticError as e:
            log.error("Suite %s raised %s: %s", name, type(e).__name__, e)
            res.passed = False
            res.failing = type(e).__name__
        log.info("Suite %s: %s (worst %.3e over %d cases)", name, "PASS" if res.passed else "FAIL", res.worst, res.cases)
        results.append(res)
    return results


def summary_rows(results: List[SuiteResult]) -> List[Dict[str, object]]:
    return [r.to_dict() for r in results]


def all_passed(results: List[SuiteResult]) -> Tuple[bool, str]:
    for r in results:
        if not r.passed:
            return False, f"{r.name}: {r.failing}"
    return True, ""
