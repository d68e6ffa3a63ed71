"""Central finite differences, independent of the analytic backprop code."""
import numpy as np


def numeric_gradient(loss, params: dict, h: float = 1e-5) -> dict:
    grads = {}
    for name, arr in params.items():
        g = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = arr[i]
            arr[i] = old + h
            up = loss()
            arr[i] = old - h
            down = loss()
            arr[i] = old
            g[i] = (up - down) / (2 * h)
        grads[name] = g
    return grads


def max_relative_error(analytic: dict, numeric: dict) -> float:
    a = np.concatenate([analytic[k].ravel() for k in sorted(analytic)])
    n = np.concatenate([numeric[k].ravel() for k in sorted(numeric)])
    return float(np.max(np.abs(a - n)) / max(np.max(np.abs(a)), np.max(np.abs(n)), 1e-300))


def toy_sse(out, targets):
    return 0.5 * float(np.sum((targets - out) ** 2)) / out.shape[0]
