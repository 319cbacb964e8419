"""End-to-end acceptance checks.  Each test prints one PASS/FAIL line and then
asserts, so the verdicts show up in the log even when run without -s."""
import json
import time

import numpy as np
import pytest

from gmacsec import cli
from gmacsec.channel_model import GmacChannel, builtin
from gmacsec.closed_form import (GaussianParams, binary_region_slice, binary_secrecy_capacity,
                                 binary_time_sharing_secrecy, gaussian_secrecy_capacity)
from gmacsec.info_core import FiniteDist, binary_entropy, binary_epi_floor, entropy, xor_noise_output
from gmacsec.regions import (OneMessageDist, RegionTrace, degraded_region, inner_bound_one,
                             inner_slice, mi_bundle_one_message, mi_bundle_two_message, one_message_terms,
                             slice_max, two_message_inner_bound)
from gmacsec.regions.distributions import degraded_grid
from gmacsec.regions.equivalence import verify_equivalence
from gmacsec.tables import read_csv
from gmacsec.wiretap_sim import corner_codebook, measure_equivocation, simulate, superposition_inputs


@pytest.fixture
def verdict(capsys):
    def report(label, ok, detail=""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}: {detail}")
        assert ok, detail
    return report


def test_binary_example_region_boundary(verdict, capsys):
    r0s = "0:0.98:0.02"
    t = time.perf_counter()
    code = cli.main(["region", "--builtin", "multiplier_bias", "--theorem", "secrecy1", "--r0-grid", r0s])
    elapsed = time.perf_counter() - t
    out = capsys.readouterr().out
    comments = read_csv(out)[2]
    slices = json.loads(next(c for c in comments if c.startswith("# slices:")).split(": ", 1)[1])
    worst = max(abs(r1 - (1 - r0)) for r0, r1, _ in slices)
    ok = code == 0 and len(slices) == 50 and worst <= 1e-6 and elapsed < 10
    verdict("1 multiplier channel secrecy boundary R0 + R1 = 1", ok,
            f"{len(slices)} slices, max deviation {worst:.2e}, {elapsed:.2f} s")


def test_binary_closed_form_endpoints(verdict):
    t = time.perf_counter()
    r0 = np.linspace(0, 1, 1000)
    zero = max(abs(binary_secrecy_capacity(0.0, x)) for x in r0)
    half = max(abs(binary_secrecy_capacity(0.5, x) - (1 - x)) for x in r0)
    at0 = max(abs(binary_secrecy_capacity(p, 0.0) - binary_entropy(p)) for p in np.linspace(0, 0.5, 1000))
    elapsed = time.perf_counter() - t
    ok = max(zero, half, at0) <= 1e-9 and elapsed < 1
    verdict("2 binary closed-form endpoints", ok,
            f"p=0 dev {zero:.1e}, p=1/2 dev {half:.1e}, R0=0 dev {at0:.1e}, {elapsed:.2f} s")


def test_time_sharing_strictly_suboptimal(verdict):
    p = 0.11
    r0 = np.linspace(0, 1, 1001)
    gap = np.array([binary_secrecy_capacity(p, x) - binary_time_sharing_secrecy(p, x) for x in r0])
    mid = binary_secrecy_capacity(p, 0.5) - binary_time_sharing_secrecy(p, 0.5)
    ok = bool(np.all(gap[1:-1] > 1e-9)) and mid > 0.01
    verdict("3 time sharing strictly below capacity at p = 0.11", ok,
            f"min interior gap {gap[1:-1].min():.3e}, gap at R0 = 0.5 {mid:.6f}")


def test_gaussian_continuity_and_monotonicity(verdict):
    n2s = (2.0, 5.0, 10.0)
    params = {n2: GaussianParams(10.0, 10.0, 1.0, n2) for n2 in n2s}
    jump = max(abs(gaussian_secrecy_capacity(pr, pr.threshold)
                   - gaussian_secrecy_capacity(pr, pr.threshold + 1e-12)) for pr in params.values())
    r0 = np.linspace(0, params[2.0].r0_max, 401)
    rows = np.array([[gaussian_secrecy_capacity(params[n2], x) for x in r0] for n2 in n2s])
    down_r0 = bool(np.all(np.diff(rows, axis=1) <= 1e-12))
    up_n2 = bool(np.all(np.diff(rows, axis=0) >= -1e-12))
    same = GaussianParams(10.0, 10.0, 1.0, 1.0)
    at_n = max(abs(gaussian_secrecy_capacity(same, x)) for x in r0)
    ok = jump <= 1e-9 and down_r0 and up_n2 and at_n <= 1e-9
    verdict("4 Gaussian continuity and monotonicity", ok,
            f"threshold jump {jump:.1e}, non-increasing in R0 {down_r0}, "
            f"non-decreasing in N2 {up_n2}, max at N2 = N {at_n:.1e}")


def test_equivocation_set_forms_agree(verdict):
    t = time.perf_counter()
    rep = verify_equivalence(1000, seed=2024, n=64, resolution=256)
    elapsed = time.perf_counter() - t
    ok = rep.ok and rep.disagreements == 0 and elapsed < 60
    verdict("5 explicit vs union equivocation sets", ok,
            f"{rep.instances} instances, {rep.disagreements} disagreements, {elapsed:.1f} s")


def _random_channel(rng):
    t = rng.dirichlet(np.full(8, 0.5), size=(2, 2))
    return GmacChannel(t.reshape(2, 2, 2, 2, 2), name="random")


def _random_dist(rng):
    return OneMessageDist(rng.dirichlet(np.ones(4)).reshape(2, 2), rng.dirichlet(np.ones(3), size=2),
                          rng.dirichlet(np.ones(2), size=3))


def test_two_message_specializes_to_one_message(verdict):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(20):
        ch = _random_channel(rng)
        dists = [_random_dist(rng) for _ in range(3)]
        top = max(mi_bundle_one_message(ch, d).i_sum for d in dists)
        r0s = np.linspace(0, top, 9)
        r0s[-1] = top
        one_pts, two_pts = [], []
        for d in dists:
            mi2 = mi_bundle_two_message(ch, d.as_two_message())
            own = r0s[r0s <= mi2.i_all]
            rates = [(r0, min(mi2.i_u, mi2.i_uv, mi2.i_all - r0), 0.0) for r0 in own]
            two_pts.extend(two_message_inner_bound(ch, d.as_two_message(), rates).points)
            one_pts.extend(p.as_array() for p in inner_bound_one(ch, d, own))
        one = RegionTrace(one_pts, ("d",) * len(one_pts), "inner", "")
        two = RegionTrace(two_pts, ("d",) * len(two_pts), "inner", "")
        for r0 in np.linspace(0, top, 17):
            for coord in ("R1", "R1e", "R2", "R2e"):
                a, b = slice_max(two, coord, {"R0": r0}), slice_max(one, coord, {"R0": r0})
                if a is None or b is None:
                    worst = max(worst, 0.0 if a is b else np.inf)
                else:
                    worst = max(worst, abs(a - b))
    verdict("6 two-message bound with R2 = R2e = 0, V = X2 equals one-message bound", worst <= 1e-9,
            f"20 channels, max slice deviation {worst:.1e}")


def _superposition_rows(grid, alpha):
    """Grid indices holding Q uniform, X2 = 1, X1 = Q xor Bern(alpha), up to relabeling Q."""
    rows = {tuple(np.round([1 - alpha, alpha], 12)), tuple(np.round([alpha, 1 - alpha], 12))}
    hits = []
    for ids, k in grid.batches():
        flat_q = np.round(k["p_qx2"].reshape(len(ids), -1), 12)
        pu = np.round(k["p_u_q"], 12)
        for j in np.flatnonzero(np.all(flat_q == [0.0, 0.5, 0.0, 0.5], axis=1)):
            if {tuple(pu[j, 0]), tuple(pu[j, 1])} == rows:
                hits.append((ids[j], {name: v[j:j + 1] for name, v in k.items()}))
    return hits


def test_degraded_region_matches_closed_form(verdict):
    worst, missing, above = 0.0, [], 0.0
    r0s = np.linspace(0, 1, 21)
    for p in (0.1, 0.3, 0.5):
        ch = builtin("degraded_binary", p=p)
        grid = degraded_grid(2, 2, q=2, step=16)
        for k in range(9):
            a = k / 16
            hits = _superposition_rows(grid, a)
            if not hits:
                missing.append((p, a))
                continue
            for _, kern in hits:
                mi = one_message_terms(ch, kern).item(0)
                for r0 in r0s:
                    cf = binary_region_slice(p, a, r0)
                    got = inner_slice(mi, r0) or (0.0, 0.0)
                    worst = max(worst, abs(got[0] - cf.r1_max), abs(got[1] - cf.re_max))
        trace = degraded_region(ch, grid, refine=False)
        for r0 in r0s:
            # the union over the grid cannot beat capacity
            above = max(above, slice_max(trace, "R1e", {"R0": r0}) - binary_secrecy_capacity(p, r0))
    ok = worst <= 1e-6 and not missing and above <= 1e-6
    verdict("7 degraded region vs closed form on shared alpha = k/16", ok,
            f"max deviation {worst:.1e}, missing alphas {missing}, max excess over capacity {above:.1e}")


def test_vector_entropy_floor(verdict):
    rng = np.random.default_rng(37)
    violations, count, slack = 0, 0, np.inf
    for n in (1, 2, 3, 4):
        for _ in range(300):
            px = rng.random(2 ** n) ** rng.uniform(1, 6)
            px /= px.sum()
            p0 = rng.uniform(1e-3, 0.5)
            hx = entropy(FiniteDist(px), [0])
            hy = entropy(FiniteDist(xor_noise_output(px, p0)), [0])
            gap = hy - n * binary_epi_floor(min(hx / n, 1.0), p0)
            slack = min(slack, gap)
            violations += gap < -1e-9
            count += 1
    verdict("8 output entropy floor for n <= 4", violations == 0 and count >= 1000,
            f"{count} distributions, {violations} violations, min slack {slack:.2e}")


def test_corner_codebook_exactness(verdict):
    cb, g1, g2 = corner_codebook()
    stats = measure_equivocation(cb, g1, g2, builtin("multiplier_bias"), 10_000, seed=0)
    ok = (stats.equivocation1 == 1.0 and stats.lam == 0.0
          and stats.meta["equivocation1_min"] == stats.meta["equivocation1_max"] == 1.0)
    verdict("9 corner codebook perfect secrecy", ok,
            f"10000 trials, equivocation {stats.equivocation1}, lambda {stats.lam}")


def test_simulator_trend(verdict):
    t = time.perf_counter()
    ch = builtin("degraded_binary", p=0.3)
    d = superposition_inputs(0.25)
    info = d.information(ch)
    r1p = 0.7 * info["i1"]
    r0 = 0.7 * info["i_all"] - r1p
    passed, lines = 0, []
    for seed in (11, 22, 33):
        small, _ = simulate(ch, d, 8, r0, r1p, 0.0, 10_000, seed)
        big, _ = simulate(ch, d, 16, r0, r1p, 0.0, 10_000, seed)
        dev = abs(big.equivocation1 - big.meta["target1"])
        good = big.lam < small.lam and dev <= 0.15
        passed += good
        lines.append(f"seed {seed}: lambda {small.lam:.3f} -> {big.lam:.3f}, equivocation dev {dev:.3f}")
    elapsed = time.perf_counter() - t
    verdict("10 simulator error trend and equivocation target", passed >= 2 and elapsed < 300,
            f"{passed}/3 seeds; " + "; ".join(lines) + f"; {elapsed:.0f} s")


DETERMINISM_RUNS = [
    ["region", "--builtin", "degraded_binary", "--p", "0.2", "--theorem", "secrecy1", "--grid-step", "2",
     "--r0-grid", "0:1:0.25"],
    ["region", "--builtin", "adder_bsc", "--theorem", "inner2", "--q-card", "1", "--format", "doc"],
    ["figure", "--figure", "fig7"],
    ["figure", "--figure", "fig8", "--q-card", "1"],
    ["simulate", "--seed", "7", "--builtin", "degraded_binary", "--p", "0.3", "--n", "12",
     "--rate-fraction", "0.7", "--trials", "200"],
    ["simulate", "--seed", "3", "--scheme", "corner", "--trials", "100", "--format", "csv"],
    ["verify-equivocation", "--seed", "4", "--instances", "50", "--grid", "32"],
]


def test_seeded_outputs_byte_identical(verdict, tmp_path, capsys):
    differing = []
    for k, argv in enumerate(DETERMINISM_RUNS):
        outs = []
        for rep in range(2):
            dest = tmp_path / f"run{k}_{rep}.out"
            if cli.main(argv + ["--out", str(dest)]) != 0:
                differing.append(argv[0] + " (nonzero exit)")
            outs.append(dest.read_bytes())
        if outs[0] != outs[1]:
            differing.append(" ".join(argv))
    capsys.readouterr()
    verdict("11 byte-identical seeded outputs", not differing,
            f"{len(DETERMINISM_RUNS)} commands run twice, differing: {differing or 'none'}")
