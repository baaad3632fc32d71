"""Experiment runners.  Each returns an :class:`ExperimentResult` holding
CSV-ready tables, regression fits and a flat summary.

Randomness flows from ``config.seed`` through ``SeedSequence.spawn`` with one
child per grid point, so rows do not depend on the thread count.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .. import bounds, conditionality as cond, greedy, olevskii
from ..errors import BudgetExceeded, NumericalError, ValidationError
from ..spaces import (SequenceSpace, canonical_basis, dirichlet_weighted_norm, gram_basis,
                      gram_from_weighted_trig, rotated_pair_basis, weighted_trig_basis)
from .fitting import fit_polylog, fit_power


@dataclass
class Table:
    name: str
    header: list
    rows: list

    def column(self, key):
        j = self.header.index(key)
        return [r[j] for r in self.rows]

    def records(self):
        return [dict(zip(self.header, r)) for r in self.rows]


@dataclass
class Figure:
    name: str
    x: list
    series: dict
    scale: str = "loglog"
    fits: dict = field(default_factory=dict)
    xlabel: str = "N"
    ylabel: str = ""


@dataclass
class ExperimentResult:
    experiment: str
    tables: list
    fits: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    figures: list = field(default_factory=list)

    def table(self, name):
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


def child_seeds(seed, n):
    return [int(s.generate_state(1, dtype=np.uint64)[0])
            for s in np.random.SeedSequence(seed).spawn(n)]


def pmap(fn, items, threads=1):
    items = list(items)
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def _fit_summary(prefix, fit, out):
    out[f"{prefix}_exponent"] = fit.exponent
    out[f"{prefix}_constant"] = fit.constant
    out[f"{prefix}_r2"] = fit.r2


# -- cached bases -----------------------------------------------------------

@lru_cache(maxsize=16)
def babenko_basis(alpha, maxfreq):
    return gram_from_weighted_trig(alpha, maxfreq)[1]


@lru_cache(maxsize=16)
def trig_pair_basis(alpha, pairs):
    """Rotated pair of the trigonometric systems of |t|^alpha and |t|^-alpha."""
    E = weighted_trig_basis(-alpha, count=pairs)
    F = weighted_trig_basis(alpha, count=pairs)
    return rotated_pair_basis(E, F, name=f"trigpair(alpha={alpha:g})")


@lru_cache(maxsize=4)
def seq_pair_basis(pairs):
    """Rotated pair of the unit vector bases of c_0 and l^1 (n = `pairs`)."""
    E = canonical_basis(SequenceSpace(math.inf, pairs), name="c0")
    F = canonical_basis(SequenceSpace(1, pairs), name="l1")
    return rotated_pair_basis(E, F, name="c0+l1")


@lru_cache(maxsize=8)
def th2_basis(alpha, kmax):
    return olevskii.olevskii_basis(trig_pair_basis(alpha, (kmax + 1) // 2), kmax)


@lru_cache(maxsize=4)
def seq_olevskii_basis(kmax):
    return olevskii.olevskii_basis(seq_pair_basis((kmax + 1) // 2), kmax)


def _witness_cells(w):
    return [w.ratio, w.method, tuple(int(i) for i in w.A), np.asarray(w.x)]


# -- Dirichlet kernels --------------------------------------------------------

def run_dirichlet_table(cfg):
    p = cfg.params
    gammas = [float(g) for g in p["gammas"]]
    Ns = [int(n) for n in p["Ns"]]

    def one(g):
        rows = []
        for N in Ns:
            try:
                nrm = dirichlet_weighted_norm(N, g)
                rows.append([g, N, nrm, nrm / N ** ((1 - g) / 2), "ok"])
            except NumericalError as exc:
                rows.append([g, N, None, None, f"quadrature-failure: {exc.achieved:.3e}"])
        return rows

    rows = [r for chunk in pmap(one, gammas, cfg.threads) for r in chunk]
    table = Table("dirichlet", ["gamma", "N", "norm", "ratio", "status"], rows)
    summary, series = {}, {}
    for g in gammas:
        rat = [r[3] for r in rows if r[0] == g and r[3] is not None]
        summary[f"spread[gamma={g:g}]"] = max(rat) / min(rat) if rat else None
        series[f"gamma={g:g}"] = [r[3] for r in rows if r[0] == g]
        if g == 0.0:
            err = max(abs(r[2] / math.sqrt(2 * math.pi * (2 * r[1] + 1)) - 1)
                      for r in rows if r[0] == g and r[2] is not None)
            summary["parseval_max_rel_err"] = err
    fig = Figure("dirichlet", Ns, series, ylabel="||D_N|| / N^((1-gamma)/2)")
    return ExperimentResult("dirichlet", [table], {}, summary, [fig])


# -- Babenko basis ------------------------------------------------------------

def _sample_sets(basis, N, count, rng):
    """Uniform subsets and sign halves of random frequency windows, |A| <= N."""
    d = basis.dim
    freq = cond._freq_index(basis)
    top = max(abs(n) for n in freq)
    out = []
    for j in range(count):
        if j % 2 == 0:
            m = int(rng.integers(1, N + 1))
            A = rng.choice(d, size=m, replace=False)
        else:
            w = int(rng.integers(1, top + 1))
            idx = np.array([freq[n] for n in range(-w, w + 1)])
            eps = rng.random(idx.size) < 0.5
            A = idx[eps] if eps.any() else idx[:1]
            if A.size > N:
                A = rng.choice(A, size=N, replace=False)
        out.append(tuple(sorted(int(i) for i in A)))
    return out


def sampled_projection_max(basis, sets):
    """Largest exact ||S_A|| over `sets`; returns (value, argmax set)."""
    H, Hinv = basis.gram, basis.gram_inv
    by_size = {}
    for A in sets:
        by_size.setdefault(len(A), []).append(A)
    best, arg = 0.0, None
    for m in sorted(by_size):
        group = by_size[m]
        vals = cond._spectral_batch(H, Hinv, np.array(group))
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, arg = float(vals[i]), group[i]
    return math.sqrt(best), arg


def run_babenko_kn(cfg):
    p = cfg.params
    alpha, maxfreq = float(p["alpha"]), int(p["maxfreq"])
    basis = babenko_basis(alpha, maxfreq)
    Ns = [int(n) for n in p["Ns"]]
    seeds = child_seeds(cfg.seed, 2 * len(Ns))

    def one(i):
        N = Ns[i]
        sw = cond.sign_partition_witness(basis, N, int(p["sign_trials"]), seeds[2 * i])
        rng = np.random.default_rng(seeds[2 * i + 1])
        sets = _sample_sets(basis, N, int(p["samples"]), rng)
        smax, A = sampled_projection_max(basis, sets)
        _, x = cond._spectral_witness(basis, A)
        mw = cond.WitnessReport(A, x, cond.witness_ratio(basis, A, x), "sampled-max")
        return [N, len(sw.A)] + _witness_cells(sw) + [smax] + _witness_cells(mw)

    rows = pmap(one, range(len(Ns)), cfg.threads)
    header = ["N", "sign_size", "sign_ratio", "sign_method", "sign_A", "sign_x",
              "sampled_max", "max_ratio", "max_method", "max_A", "max_x"]
    main = Table("babenko", header, rows)

    exact_rows = []
    for N in range(1, maxfreq + 1):
        if cond.subset_count(basis.dim, N) > int(p["exact_budget"]):
            break
        exact_rows.append([N, cond.k_n_exact(basis, N, int(p["exact_budget"]))])
    exact = Table("babenko_exact", ["N", "k_N"], exact_rows)

    fits, summary = {}, {"alpha": alpha, "maxfreq": maxfreq, "dim": basis.dim}
    lower = [r[2] for r in rows]
    upper = [r[6] for r in rows]
    if len(Ns) >= 2:
        fits["sign"] = fit_power(Ns, lower)
        fits["sampled_max"] = fit_power(Ns, upper)
        _fit_summary("sign", fits["sign"], summary)
        _fit_summary("sampled_max", fits["sampled_max"], summary)
    summary["max_over_N^alpha"] = max(u / n ** alpha for u, n in zip(upper, Ns)) if alpha else None
    fig = Figure("babenko", Ns, {"sign-partition": lower, "sampled max": upper},
                 fits=fits, ylabel="||S_A x|| / ||x||")
    return ExperimentResult("babenko", [main, exact], fits, summary, [fig])


# -- rotated pair growth ------------------------------------------------------

def run_pair_growth(cfg):
    p = cfg.params
    Ns = [int(n) for n in p["Ns"]]
    alphas = [float(a) for a in p["alphas"]]

    def one(a):
        basis = trig_pair_basis(a, max(Ns))
        return [[a, N] + _witness_cells(cond.odd_block_witness(basis, N)) for N in Ns]

    rows = [r for chunk in pmap(one, alphas, cfg.threads) for r in chunk]
    table = Table("pair", ["alpha", "N", "ratio", "method", "A", "x"], rows)
    fits, summary, series = {}, {}, {}
    for a in alphas:
        y = [r[2] for r in rows if r[0] == a]
        series[f"alpha={a:g}"] = y
        if len(Ns) >= 2:
            fits[f"alpha={a:g}"] = f = fit_power(Ns, y)
            _fit_summary(f"alpha={a:g}", f, summary)
    fig = Figure("pair", Ns, series, fits=fits, ylabel="||S_A x|| / ||x||")
    return ExperimentResult("pair", [table], fits, summary, [fig])


# -- Olevskii pipeline ----------------------------------------------------------

def dyadic_Ms(kmax):
    return [2 ** j for j in range(2, kmax + 1)]


def _knH_rows(psi, Ms, seed, budget, threads, strategies):
    seeds = child_seeds(seed, len(Ms))

    def one(i):
        w = cond.knH_witness(psi, Ms[i], strategies=strategies, seed=seeds[i], budget=budget)
        inf = w.info
        return [Ms[i], inf["N"], inf["size"], inf["inner_ratio"], inf["inner_method"]] \
            + _witness_cells(w)

    return pmap(one, range(len(Ms)), threads)


KNH_HEADER = ["M", "N", "size", "inner_ratio", "inner_method", "ratio", "method", "A", "x"]


def run_th2_pipeline(cfg):
    p = cfg.params
    alpha, kmax = float(p["alpha"]), int(p["kmax"])
    ob = th2_basis(alpha, kmax)
    psi = ob.psi
    s_knh, s_qg, s_demo = child_seeds(cfg.seed, 3)
    Ms = dyadic_Ms(kmax)
    rows = _knH_rows(ob, Ms, s_knh, int(p["exact_budget"]), cfg.threads,
                     (cond.EXACT, cond.ODD, cond.RANDOM))
    knh = Table("th2_knH", KNH_HEADER, rows)
    ratios = [r[5] for r in rows]

    qg = greedy.estimate_qg_constant(psi, trials=int(p["qg_trials"]), seed=s_qg,
                                     threads=cfg.threads)
    sizes = [2 ** j for j in range(int(math.log2(psi.dim)) + 1)]
    demo = cond.democracy_profile(psi, sizes, int(p["democracy_trials"]), s_demo)
    dem = Table("th2_democracy", ["N", "sup", "inf", "sets", "sup_over_sqrtN", "inf_over_sqrtN"],
                [[r.N, r.sup, r.inf, r.count, r.sup / math.sqrt(r.N), r.inf / math.sqrt(r.N)]
                 for r in demo])
    top = [w.ratio for w in qg.witnesses]
    qgt = Table("th2_qg", ["trials", "Khat", "kappaHat", "top_ratios"],
                [[qg.trials, qg.Khat, qg.kappaHat, np.array(top)]])

    fits, summary = {}, {"alpha": alpha, "kmax": kmax, "dim": psi.dim,
                         "Khat": qg.Khat, "kappaHat": qg.kappaHat}
    if len(Ms) >= 2:
        fits["knH"] = fit_polylog(Ms, ratios)
        _fit_summary("knH", fits["knH"], summary)
    summary["monotone"] = all(b >= a - 1e-12 for a, b in zip(ratios, ratios[1:]))
    nsq = [r[4] for r in dem.rows] + [r[5] for r in dem.rows]
    summary["democracy_spread"] = max(nsq) / min(nsq)
    fig = Figure("th2_knH", Ms, {"knH witness": ratios}, scale="logx", fits=fits,
                 xlabel="M", ylabel="||S_L x|| / ||x||")
    return ExperimentResult("th2", [knh, qgt, dem], fits, summary, [fig])


def run_seqspace_kn(cfg):
    p = cfg.params
    Nmax, kmax = int(p["Nmax"]), int(p["kmax"])
    X = seq_pair_basis(Nmax)
    inner_rows = []
    for N in range(1, Nmax + 1):
        w = cond.odd_block_witness(X, N)
        exp = math.sqrt(1 + N * N) / 2
        inner_rows.append([N, exp, abs(w.ratio - exp), w.ratio / N] + _witness_cells(w))
    inner = Table("seqspace_inner", ["N", "expected", "abs_err", "ratio_over_N", "ratio",
                                     "method", "A", "x"], inner_rows)
    ob = seq_olevskii_basis(kmax)
    Ms = dyadic_Ms(kmax)
    rows = _knH_rows(ob, Ms, cfg.seed, 0, cfg.threads, (cond.ODD, cond.RANDOM))
    knh = Table("seqspace_knH", KNH_HEADER, rows)
    ratios = [r[5] for r in rows]
    fits = {"knH": fit_polylog(Ms, ratios)} if len(Ms) >= 2 else {}
    summary = {"inner_max_abs_err": max(r[2] for r in inner_rows), "dim": ob.psi.dim,
               "lower_bounds": "general ambient: psi ratios are witness lower bounds"}
    if fits:
        _fit_summary("knH", fits["knH"], summary)
    by_M = dict(zip(Ms, ratios))
    if 16 in by_M and 512 in by_M:
        summary["growth_512_over_16"] = by_M[512] / by_M[16]
    figs = [Figure("seqspace_knH", Ms, {"knH witness": ratios}, scale="logx", fits=fits,
                   xlabel="M", ylabel="||S_L x|| / ||x||")]
    return ExperimentResult("seqspace", [inner, knh], fits, summary, figs)


# -- closed forms -------------------------------------------------------------

def parallelogram_min_slack(p, pairs, dim, seed):
    rng = np.random.default_rng(seed)
    worst = math.inf
    for _ in range(pairs):
        x = rng.standard_normal(dim) * rng.exponential(size=dim)
        y = rng.standard_normal(dim) * rng.exponential(size=dim)
        worst = min(worst, bounds.weak_parallelogram_check(p, x, y))
    return worst


def run_bounds_report(cfg):
    p = cfg.params
    Ks = np.geomspace(float(p["K_min"]), float(p["K_max"]), int(p["K_points"])).tolist()
    Ks = sorted(set(Ks + [1.0, 2 / math.sqrt(3)]))
    krows = []
    for K in Ks:
        r = bounds.alpha_of_K(K)
        e = r.extras
        krows.append([K, r.delta, e["first"], e["second"], e["besselian"], r.alpha, r.branch])
    ktab = Table("bounds_K", ["K", "delta", "alpha_first", "alpha_second", "alpha_besselian",
                              "alpha", "branch"], krows)
    prows = []
    for q in p["ps"]:
        for kap in p["kappas"]:
            br = bounds.c_p_branches(q, kap)
            r = bounds.alpha_p(q, kap)
            prows.append([q, kap, br.get("i"), br.get("ii"), r.extras["c_p"], r.alpha, r.extras["gap"], r.branch])
    ptab = Table("bounds_p", ["p", "kappa", "c_p_i", "c_p_ii", "c_p", "alpha_p", "gap", "branch"], prows)
    half = bounds.alpha_branches(0.5)
    summary = {
        "switch_gap": abs(half[0] - half[1]),
        "switch_value_err": abs(half[0] - 0.5 * math.log2(3)),
        "max_alpha": max(r[5] for r in krows),
        "max_alpha_p": max(r[5] for r in prows),
        "p2_branch_gap": max((abs(r[2] - r[3]) for r in prows if r[0] == 2.0), default=0.0),
    }
    seeds = child_seeds(cfg.seed, 2)
    wp = [[q, 10_000, 64, parallelogram_min_slack(q, 10_000, 64, s)]
          for q, s in zip((1.5, 3.0), seeds)]
    wtab = Table("bounds_parallelogram", ["p", "pairs", "dim", "min_slack"], wp)
    summary["parallelogram_min_slack"] = min(r[3] for r in wp)
    fig = Figure("bounds_alpha", Ks, {"alpha(K)": [r[5] for r in krows],
                                      "first": [r[2] for r in krows],
                                      "second": [r[3] for r in krows]},
                 scale="logx", xlabel="K", ylabel="alpha")
    return ExperimentResult("bounds", [ktab, ptab, wtab], {}, summary, [fig])


# -- utilities ------------------------------------------------------------------

def inner_basis(kind, alpha, kmax):
    if kind == "onb":
        return canonical_basis(SequenceSpace(2, kmax), name="onb")
    if kind == "babenko":
        return babenko_basis(alpha, (kmax + 1) // 2)
    if kind == "pair":
        return trig_pair_basis(alpha, (kmax + 1) // 2)
    if kind == "seqspace":
        return seq_pair_basis((kmax + 1) // 2)
    raise ValidationError(f"unknown inner basis {kind!r}")


def run_olevskii_build(cfg):
    p = cfg.params
    kmax = int(p["kmax"])
    inner = inner_basis(p["inner"], float(p["alpha"]), kmax)
    ob = olevskii.olevskii_basis(inner, kmax)
    lay = ob.layout
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for k in range(1, kmax + 1):
        A = ob.haar[k]
        orth = float(np.max(np.abs(A.T @ A - np.eye(A.shape[0]))))
        worst = 0.0
        for _ in range(int(p["bonek_trials"])):
            m = int(rng.integers(0, (1 << k) + 1))
            L = rng.choice(1 << k, size=m, replace=False)
            lhs, rhs = olevskii.verify_bonek(ob, k, L)
            worst = max(worst, abs(lhs - rhs))
        sl = lay.block_slice(k)
        rows.append([k, sl.start, 1 << k, lay.n[k], lay.n[k + 1], orth, worst])
    table = Table("olevskii_blocks", ["k", "psi_start", "size", "n_k", "n_k1", "haar_orth_err",
                                      "bonek_max_err"], rows)
    summary = {"inner": p["inner"], "dim": ob.psi.dim, "ambient_dim": ob.psi.ambient.dim,
               "max_bonek_err": max(r[6] for r in rows)}
    if ob.psi.kind == "hilbert":
        summary["gram_dev_from_identity"] = float(np.max(np.abs(ob.psi.gram - np.eye(ob.dim))))
        # frame bounds of the finite sections; Psi should inherit the inner ones
        ev = np.linalg.eigvalsh(ob.psi.gram)
        summary["psi_frame_lower"], summary["psi_frame_upper"] = float(ev[0]), float(ev[-1])
        if inner.kind == "hilbert":
            ev = np.linalg.eigvalsh(inner.gram)
            summary["inner_frame_lower"] = float(ev[0])
            summary["inner_frame_upper"] = float(ev[-1])
    return ExperimentResult("olevskii-build", [table], {}, summary, [])


def read_gram_file(path):
    """Plain text: first line d, then d rows of d reals (symmetry checked)."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    except OSError as exc:
        raise ValidationError(f"cannot read Gram file {path}: {exc}") from None
    if not lines:
        raise ValidationError("empty Gram file")
    try:
        d = int(lines[0].strip())
        G = np.array([[float(t) for t in ln.split()] for ln in lines[1:]])
    except ValueError as exc:
        raise ValidationError(f"malformed Gram file: {exc}") from None
    if d < 1 or G.shape != (d, d):
        raise ValidationError(f"expected {d} rows of {d} reals, got shape {G.shape}")
    if not np.allclose(G, G.T, rtol=0, atol=1e-12 * max(1.0, np.abs(G).max())):
        raise ValidationError("Gram matrix is not symmetric")
    return G


def run_kn(cfg):
    p = cfg.params
    basis = gram_basis(read_gram_file(p["gram"]), name="adhoc")
    budget, mode = int(p["budget"]), p["mode"]
    seeds = child_seeds(cfg.seed, len(p["Ns"]))
    rows = []
    for N, s in zip(p["Ns"], seeds):
        N = int(N)
        if not 1 <= N <= basis.dim:
            raise ValidationError(f"N={N} outside [1, {basis.dim}]")
        fits_budget = cond.subset_count(basis.dim, N) <= budget
        if mode == "exact" and not fits_budget:
            raise BudgetExceeded(f"exhaustive k_{N} needs {cond.subset_count(basis.dim, N)} subsets",
                                 required=cond.subset_count(basis.dim, N), budget=budget)
        strategies = (cond.EXACT, cond.RANDOM) if mode != "lower" else (cond.RANDOM,)
        row = cond.k_n_lower(basis, N, strategies=strategies, seed=s, budget=budget)
        rows.append([N, row.lower, row.exact is not None] + _witness_cells(row.witness))
    table = Table("kn", ["N", "k_N", "exact", "ratio", "method", "A", "x"], rows)
    return ExperimentResult("kn", [table], {}, {"dim": basis.dim}, [])


def run_selftest(cfg):
    checks = []

    def check(name, value, tol):
        checks.append([name, value, tol, bool(value <= tol)])

    check("haar_orthogonality_k10",
          float(np.max(np.abs(olevskii.haar_matrix(10).T @ olevskii.haar_matrix(10) - np.eye(1024)))),
          1e-12)
    ob = olevskii.olevskii_basis(canonical_basis(SequenceSpace(2, 4)), 4)
    check("olevskii_onb_gram", float(np.max(np.abs(ob.psi.gram - np.eye(ob.dim)))), 1e-10)
    lhs, rhs = olevskii.verify_bonek(ob, 3, [0, 2, 5])
    check("bonek_identity", abs(lhs - rhs), 1e-9)
    half = bounds.alpha_branches(0.5)
    check("alpha_branch_switch", abs(half[0] - 0.5 * math.log2(3)) + abs(half[1] - half[0]), 1e-12)
    X = seq_pair_basis(8)
    check("c0_l1_witness", abs(cond.odd_block_witness(X, 8).ratio - math.sqrt(65) / 2), 1e-9)
    check("dirichlet_parseval",
          abs(dirichlet_weighted_norm(8, 0.0) / math.sqrt(2 * math.pi * 17) - 1), 1e-9)
    table = Table("selftest", ["check", "value", "tol", "pass"], checks)
    return ExperimentResult("selftest", [table], {}, {"passed": all(c[3] for c in checks)}, [])


RUNNERS = {
    "dirichlet": run_dirichlet_table,
    "babenko": run_babenko_kn,
    "pair": run_pair_growth,
    "th2": run_th2_pipeline,
    "seqspace": run_seqspace_kn,
    "bounds": run_bounds_report,
    "olevskii-build": run_olevskii_build,
    "kn": run_kn,
    "selftest": run_selftest,
}


def run(cfg):
    return RUNNERS[cfg.experiment](cfg)


def basis_resolver(cfg):
    """Map (table name, CSV record) to the basis its witness columns live in."""
    p = cfg.params

    def resolve(table, rec):
        if table == "babenko":
            return babenko_basis(float(p["alpha"]), int(p["maxfreq"]))
        if table == "pair":
            return trig_pair_basis(float(rec["alpha"]), max(int(n) for n in p["Ns"]))
        if table == "th2_knH":
            return th2_basis(float(p["alpha"]), int(p["kmax"])).psi
        if table == "seqspace_inner":
            return seq_pair_basis(int(p["Nmax"]))
        if table == "seqspace_knH":
            return seq_olevskii_basis(int(p["kmax"])).psi
        if table == "kn":
            return gram_basis(read_gram_file(p["gram"]), name="adhoc")
        raise KeyError(table)

    return resolve
