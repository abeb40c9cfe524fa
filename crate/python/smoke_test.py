"""Smoke test for the robord_py extension.

Usage: python3 python/smoke_test.py [path/to/librobord_py.so]

Without an argument the library is looked up in target/release and
target/debug. It is copied to a temp dir as robord_py.so and imported.
"""

import importlib
import math
import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def find_library():
    if len(sys.argv) > 1:
        return sys.argv[1]
    for profile in ("release", "debug"):
        p = os.path.join(ROOT, "target", profile, "librobord_py.so")
        if os.path.exists(p):
            return p
    sys.exit("librobord_py.so not found; run `cargo build -p robord-py` first")


def load():
    tmp = tempfile.mkdtemp()
    shutil.copy(find_library(), os.path.join(tmp, "robord_py.so"))
    sys.path.insert(0, tmp)
    return importlib.import_module("robord_py")


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    rp = load()

    close(rp.cdf("probit", 0.0), 0.5, 1e-15)
    close(rp.quantile("logit", rp.cdf("logit", 1.3)), 1.3, 1e-10)

    p = rp.Params([1.0], [-1.5, 0.5, 1.5])
    probs = rp.category_probs(p, "probit", [0.0])
    close(sum(probs), 1.0, 1e-12)
    close(probs[0], 0.066807, 1e-6)

    # tiny dataset
    rows = [[-1.2], [-0.4], [0.1], [0.3], [0.9], [1.4], [-0.8], [0.6], [2.0], [-2.0]]
    y = [1, 2, 2, 3, 3, 3, 1, 2, 3, 1]
    data = rp.Dataset(y, rows)
    assert len(data) == 10 and data.n_categories == 3

    r = rp.fit(data, method="ml", link="probit")
    assert r.converged
    close(r.objective, rp.neg_log_lik(r.params, "probit", data), 1e-12)
    rd = rp.fit(data, method="dp", tuning=0.3)
    assert rd.method == "dp" and rd.tuning == 0.3

    cov = rp.sandwich(r, data)
    assert len(cov["std_errors"]) == 3
    assert all(s > 0 for s in cov["std_errors"])
    w = rp.wald(r, data)
    assert w[0][0] == "beta1" and 0.0 <= w[0][4] <= 1.0

    names, values = rp.influence_profile("dp", p, "probit", 1, [-30.0, 0.0, 30.0], tuning=0.3)
    assert names[0] == "beta1"
    assert max(abs(v) for v in values[-1]) <= 1e-6

    probe = rp.condition_probe("probit", 0.3)
    assert not probe["ml_beta_bounded"] and probe["redescending"]

    res = rp.generalized_residuals(r.params, "probit", data)
    assert len(res["residuals"]) == 10

    d = rp.distance(r.params, rd.params)
    assert d[0] >= 0 and math.isfinite(d[1])

    try:
        rp.Params([1.0], [0.5, -0.5])
    except ValueError:
        pass
    else:
        raise AssertionError("decreasing cutpoints accepted")

    print("robord_py smoke test ok", rp.__version__)


if __name__ == "__main__":
    main()
