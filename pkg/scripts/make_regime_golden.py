"""Write tests/data/regime_golden.json: schedule and bound formulas evaluated at 20
parameter points in 50-digit arithmetic, written out independently of vplab.regimes.

Values are stored as decimal strings together with their natural logarithms, so the
test can compare in log space where a double would under- or overflow.

    python scripts/make_regime_golden.py [--out tests/data/regime_golden.json]
"""
import argparse
import json
from pathlib import Path

import mpmath as mp
import numpy as np

mp.mp.dps = 50


def points(seed=20240611, n=20):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        d = [1, 2, 3][i % 3]
        gamma = float(np.round(rng.uniform(0.5, 20.0), 3))
        delta = float(np.round(rng.uniform(2.05, 6.0), 3))
        eps = float(np.round(rng.uniform(0.3, 1.0), 4))
        r = float(np.round(10 ** rng.uniform(-6, -0.5), 8))
        N = int(10 ** rng.uniform(1, 9))
        C = float(np.round(rng.uniform(0.2, 3.0), 3))
        C_T = float(np.round(rng.uniform(0.2, 3.0), 3))
        A = float(np.round(rng.uniform(0.5, 5.0), 3))
        A_T = float(np.round(rng.uniform(0.5, 5.0), 3))
        T = float(np.round(rng.uniform(0.1, 2.0), 3))
        eta = float(np.round(rng.uniform(0.6, 2.0), 3))
        alpha = float(np.round(rng.uniform(0.001, 0.05), 4))
        m = int(rng.integers(1, 7))
        p = [1, 2, m / 2][i % 3]
        x = float(np.round(10 ** rng.uniform(-2, 0.3), 5))
        out.append(dict(d=d, gamma=gamma, delta=delta, eps=eps, r=r, N=N, C=C, C_T=C_T,
                        A=A, A_T=A_T, T=T, eta=eta, alpha=alpha,
                        conc=dict(m=m, p=p, x=x, N=int(rng.integers(5, 500)),
                                  C=C, c=float(np.round(rng.uniform(0.1, 2.0), 3)))))
    return out


def mpf(v):
    return mp.mpf(repr(v)) if isinstance(v, float) else mp.mpf(v)


def evaluate(q):
    d, eps, r = q["d"], mpf(q["eps"]), mpf(q["r"])
    gamma, delta, C, C_T = mpf(q["gamma"]), mpf(q["delta"]), mpf(q["C"]), mpf(q["C_T"])
    T, eta = mpf(q["T"]), mpf(q["eta"])
    res = {}
    if d == 1:
        z = mp.mpf(0)
    elif d == 2:
        z = max(gamma, delta)
    else:
        z = max(gamma, mp.mpf(38) / 3)
    if d > 1:
        res["zeta"] = z
    Mz = C_T * eps ** (-z * d)
    res["M"] = Mz
    res["eps_min"] = mpf(q["A"]) / mp.log(q["N"])
    if d > 1:
        res["log_r_max"] = -C_T * eps ** (-2 - d * z)
        res["r_min"] = mpf(q["A_T"]) * mp.power(q["N"], -mp.mpf(1) / (d * (d + 2)) + mpf(q["alpha"]))
    if d == 1:
        res["log_phi"] = mp.log(C / eps * mp.exp(-C / eps))
    else:
        k = 2 * (1 + max(delta, gamma)) if d == 2 else 2 + max(mp.mpf(38), 3 * gamma)
        res["log_phi"] = -mp.exp(C / eps**k)
    res["placement_budget"] = eps ** (-gamma) * r ** (1 + mp.mpf(d) / 2 + eta / 2)
    # Gronwall quantities with sup rho <= M on [0, T]
    a1 = mp.sqrt(2) * T + 8 * Mz * T
    res["alpha_1d"] = a1
    res["log_bound_1d"] = mp.log(mp.exp(a1 / eps) / eps)
    L = -mp.log(r)
    lam = C / eps * mp.sqrt(L * Mz)
    res["lambda_opt"] = lam
    res["alpha_opt"] = C / eps**2 * L * Mz / lam
    res["log_growth"] = C / eps * mp.sqrt(L) * mp.sqrt(Mz) * T
    res["log_rur_bound"] = mp.log(C * eps ** mp.mpf(-1.5) * Mz ** mp.mpf(0.75) * r
                                  * L ** mp.mpf(-0.25)) + res["log_growth"]
    c = q["conc"]
    m, p, x, Nc = mp.mpf(c["m"]), mpf(c["p"]), mpf(c["x"]), c["N"]
    if x > 1:
        res["concentration"] = mp.mpf(0)
    else:
        if p > m / 2:
            e = x**2
        elif p == m / 2:
            e = (x / mp.log(2 + 1 / x)) ** 2
        else:
            e = x ** (m / p)
        res["concentration"] = mpf(c["C"]) * mp.exp(-mpf(c["c"]) * Nc * e)
    return res


def encode(v):
    v = mp.mpf(v)
    return {"value": mp.nstr(v, 30), "log": mp.nstr(mp.log(abs(v)), 30) if v != 0 else None,
            "sign": int(mp.sign(v))}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1]
                                         / "tests" / "data" / "regime_golden.json"))
    a = ap.parse_args(argv)
    rows = [{"inputs": q, "expected": {k: encode(v) for k, v in evaluate(q).items()}}
            for q in points()]
    Path(a.out).parent.mkdir(parents=True, exist_ok=True)
    Path(a.out).write_text(json.dumps(rows, indent=1))
    print(f"wrote {len(rows)} points to {a.out}")


if __name__ == "__main__":
    main()
