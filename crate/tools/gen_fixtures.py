#!/usr/bin/env python3
"""Regenerates the test fixtures under crates/core/tests/fixtures/.

Two oracles, both independent of the Rust code:

* mms_sources.txt - the manufactured-solution source terms, derived here by
  symbolic differentiation of the stream-function and concentration
  definitions and evaluated at high precision, while the Rust side uses
  hand-simplified closed forms.
* rng_reference.txt - the first draws of the seeded generator, computed by
  a from-scratch Python implementation of the same integer recurrence.

Run from the repository root:  python3 tools/gen_fixtures.py
"""

import os

import sympy as sp

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "fixtures")


def mms_lines():
    x, y, t = sp.symbols("x y t")
    lx, ly, a, b, omega, sigma = sp.symbols("lx ly a b omega sigma", positive=True)
    mu, mu_e, d, alpha, beta, delta_hat, g = sp.symbols(
        "mu mu_e d alpha beta delta_hat g"
    )

    psi = a * sp.sin(sp.pi * x / lx) ** 2 * sp.sin(sp.pi * y / ly) ** 2 * sp.cos(omega * t)
    u = sp.diff(psi, y)
    v = -sp.diff(psi, x)
    c = 1 + b * sp.cos(sp.pi * x / lx) * sp.cos(sp.pi * y / ly) * sp.exp(-sigma * t)

    lap = lambda f: sp.diff(f, x, 2) + sp.diff(f, y, 2)
    source_c = (
        sp.diff(c, t) + u * sp.diff(c, x) + v * sp.diff(c, y) - d * lap(c) + c * g
    )
    drag = mu * (alpha + beta * c)
    source_u = sp.diff(u, t) + drag * u - mu_e * lap(u) + delta_hat * sp.diff(c, x) * lap(c)
    source_v = sp.diff(v, t) + drag * v - mu_e * lap(v) + delta_hat * sp.diff(c, y) * lap(c)

    cases = [
        # (lx, ly, a, b, omega, sigma, mu, mu_e, d, alpha, beta, delta_hat, g)
        (1, 1, "0.1", "0.5", 1, 1, 1, 1, 1, 1, "0.5", "0.01", 1),
        (2, "1.5", "0.07", "0.3", "2.5", "0.8", "0.7", "0.2", "0.3", "1.3", "0.25", "0.05", "0.6"),
        (1, 1, "0.25", "0.9", 0, "2.0", "2.0", "0.5", "0.1", "0.5", 0, "0.001", 0),
    ]
    points = [
        ("0.3", "0.7", "0.0"),
        ("0.123456", "0.654321", "0.05"),
        ("0.015625", "0.984375", "0.1"),
    ]

    lines = [
        "# lx ly a b omega sigma mu mu_e d alpha beta delta_hat g x y t source_c source_u source_v",
    ]
    for params in cases:
        subs_base = dict(
            zip(
                (lx, ly, a, b, omega, sigma, mu, mu_e, d, alpha, beta, delta_hat, g),
                (sp.Rational(p) for p in params),
            )
        )
        for px, py, pt in points:
            subs = dict(subs_base)
            # Scale the sample point into the box so it stays interior.
            subs[x] = sp.Rational(px) * subs_base[lx]
            subs[y] = sp.Rational(py) * subs_base[ly]
            subs[t] = sp.Rational(pt)
            vals = [
                repr(float(expr.subs(subs).evalf(30)))
                for expr in (source_c, source_u, source_v)
            ]
            inputs = [repr(float(sp.Rational(p))) for p in params]
            point = [repr(float(subs[x])), repr(float(subs[y])), repr(float(sp.Rational(pt)))]
            lines.append(" ".join(inputs + point + vals))
    return lines


def splitmix_lines():
    mask = (1 << 64) - 1

    def stream(seed):
        state = seed
        while True:
            state = (state + 0x9E3779B97F4A7C15) & mask
            z = state
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
            yield z ^ (z >> 31)

    lines = ["# kind seed index value"]
    for seed in (0, 1, 2, 42, 2**64 - 1):
        it = stream(seed)
        for k in range(4):
            word = next(it)
            lines.append(f"u64 {seed} {k} {word}")
        it = stream(seed)
        for k in range(4):
            word = next(it)
            sym = 2.0 * ((word >> 11) / float(1 << 53)) - 1.0
            lines.append(f"sym {seed} {k} {sym!r}")
    return lines


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    for name, lines in [
        ("mms_sources.txt", mms_lines()),
        ("rng_reference.txt", splitmix_lines()),
    ]:
        path = os.path.join(OUT_DIR, name)
        with open(path, "w") as f:
            f.write("\n".join(lines) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
