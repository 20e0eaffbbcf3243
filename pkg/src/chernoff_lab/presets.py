"""Named experiment configurations runnable through the command line."""

from __future__ import annotations

import copy

RAMP = {"kind": "ramp"}
POW2 = [1, 2, 4, 8, 16, 32, 64]


def _law(v: dict, f: dict = RAMP, n_values=POW2, **extra) -> dict:
    params = {"f": f, "v": v, "T": 1.0, "n_values": list(n_values)}
    params.update(extra)
    return {"command": "translation-law", "params": params, "seed": 0}


_CATALOG: dict[str, dict] = {
    "fast:power": {
        "description": "ramp under v(x) = (1+x)^-k with k = 2: error (1+n)^-2",
        "formula": "(1+x)^(-k)",
        "config": _law({"name": "power", "params": {"k": 2}}),
    },
    "fast:exp_decay": {
        "description": "ramp under v(x) = exp(-x): error exp(-n)",
        "formula": "exp(-x)",
        "config": _law({"name": "exp_decay"}, n_values=range(1, 31)),
    },
    "fast:double_exp": {
        "description": "ramp under v(x) = exp(-exp(x)): error exp(-exp(n))",
        "formula": "exp(-exp(x))",
        "config": _law({"name": "double_exp"}, n_values=range(1, 9)),
    },
    "slow:root": {
        "description": "ramp under u(x) = (1+x)^(-1/k) with k = 4: error (1+n)^(-1/4)",
        "formula": "(1+x)^(-1/k)",
        "config": _law({"name": "root", "params": {"k": 4}}, n_values=[2**k for k in range(13)]),
    },
    "slow:inv_log": {
        "description": "ramp under u(x) = 1/ln(x+e): error 1/ln(n+e)",
        "formula": "1/ln(x+e)",
        "config": _law({"name": "inv_log"}, n_values=[2**k for k in range(13)]),
    },
    "slow:inv_loglog": {
        "description": "ramp under u(x) = 1/ln(ln(x+e^e)): error 1/ln(ln(n+e^e))",
        "formula": "1/ln(ln(x+e^e))",
        "config": _law({"name": "inv_loglog"}, n_values=[2**k for k in range(13)]),
    },
    "vector:smooth_slow": {
        "description": "odd C-infinity vector (x on [-1,1], constant 2 beyond 3) under u(x) = 1/ln(x+e)",
        "formula": "1/ln(x+e)",
        "config": _law({"name": "inv_log"}, f={"kind": "smooth_slow"}, n_values=[1, 4, 16, 64, 256], lattice_size=48),
    },
    "translation:ramp_inv_x": {
        "description": "ramp under v(x) = 1/x: error exactly 1/n",
        "formula": "1/x",
        "config": _law({"name": "inv_x"}),
    },
    "translation:counterexample": {
        "description": "unit-norm f_n with error 1 at x = -t for every n",
        "config": {"command": "translation-counterexample", "params": {"t": 1.0, "n_max": 1024}, "seed": 0},
    },
    "matrix:identities": {
        "description": "algebraic identities of matrix semigroups on random draws",
        "config": {
            "command": "matrix-identities",
            "params": {"pairs": 1000, "d_max": 6, "n_max": 20, "taylor_draws": 200, "m_max": 4, "t_values": [0.1, 0.5, 1.0]},
            "seed": 7,
        },
    },
    "matrix:fractional_defect": {
        "description": "second-order Taylor step plus t^(2+eps) L^3 with eps = 1/2: error ~ n^-(1+eps)",
        "config": {
            "command": "matrix-bound",
            "params": {
                "system": {"kind": "fractional_defect", "d": 4, "eps": 0.5, "norm": 0.5},
                "ts": [0.25, 0.5, 1.0],
                "n_values": list(range(1, 257)),
                "vectors": 3,
                "rate_window": [16, 256],
            },
            "seed": 7,
        },
    },
    "matrix:exact_exp": {
        "description": "S(t) = e^(tL): zero Chernoff error against the bound",
        "config": {
            "command": "matrix-bound",
            "params": {
                "system": {"kind": "explicit", "L": [-1.0, 0.5, 0.0, -0.5], "S": {"kind": "exact_exp"}, "m": 1, "p": 1, "T": 1.0},
                "ts": [0.5, 1.0],
                "n_values": [1, 2, 4, 8, 16, 32, 64],
                "vectors": 2,
            },
            "seed": 1,
        },
    },
    "parabolic:heat_bump": {
        "description": "a = 1, b = c = 0, Gaussian bump, kernel quadrature reference",
        "config": {
            "command": "parabolic-rate",
            "params": {
                "coefficients": {"a": {"kind": "constant", "params": {"value": 1.0}}},
                "f": {"kind": "gaussian", "params": {"width": 1.0}},
                "t": 1.0,
                "n_values": [4, 8, 16, 32, 64],
                "interest": [-8.0, 8.0],
                "support": [-10.0, 10.0],
                "order_range": [0.85, 1.15],
                "r2_min": 0.99,
            },
            "seed": 0,
        },
    },
    "parabolic:variable_diffusion": {
        "description": "a = 1 + 1/(2(1+x^2)), b = c = 0, Gaussian bump, Crank-Nicolson reference",
        "config": {
            "command": "parabolic-rate",
            "params": {
                "coefficients": {"a": {"kind": "bounded_smooth_preset", "params": {"name": "bump_half"}}},
                "f": {"kind": "gaussian", "params": {"width": 1.0}},
                "t": 1.0,
                "n_values": [4, 8, 16, 32, 64],
                "interest": [-8.0, 8.0],
                "support": [-10.0, 10.0],
                "h": 0.02,
                "order_range": [0.8, 1.2],
            },
            "seed": 0,
        },
    },
    "parabolic:derivative_constants": {
        "description": "derivative constants up to order 4 for variable a, b, c and their check on test functions",
        "config": {
            "command": "derivative-constants",
            "params": {
                "coefficients": {
                    "a": {"kind": "bounded_smooth_preset", "params": {"name": "bump_half"}},
                    "b": {"kind": "bounded_smooth_preset", "params": {"name": "tanh_drift"}},
                    "c": {"kind": "bounded_smooth_preset", "params": {"name": "sech_potential"}},
                    "window": [-15.0, 15.0],
                },
                "n_max": 4,
                "test_functions": [
                    {"kind": "gaussian", "params": {"width": 1.0}},
                    {"kind": "gaussian", "params": {"center": 1.0, "width": 0.5}},
                    {"kind": "gaussian", "params": {"center": -2.0, "width": 2.0, "amplitude": -0.5}},
                ],
            },
            "seed": 0,
        },
    },
    "modulus:axioms": {
        "description": "modulus axioms for sqrt(x), 2x and x^2 (the last is not semiadditive)",
        "config": {
            "command": "modulus-axioms",
            "params": {
                "candidates": [
                    {"name": "sqrt", "expr": "sqrt(x)"},
                    {"name": "linear", "expr": "2*x"},
                    {"name": "square", "expr": "x**2", "expect": {"semiadditive": False, "ratio_nonincreasing": False}},
                    {"name": "ramp_numeric", "function": {"kind": "ramp"}, "domain": [-2.0, 3.0]},
                ],
                "lattice": {"lo": 0.0, "hi": 4.0, "points": 81},
            },
            "seed": 0,
        },
    },
}


def list_presets() -> dict[str, dict]:
    """Deep copy of the preset catalog, keyed by preset name."""
    return copy.deepcopy(_CATALOG)


def preset_config(name: str) -> dict:
    if name not in _CATALOG:
        raise KeyError(f"unknown preset {name!r}")
    return copy.deepcopy(_CATALOG[name]["config"])
