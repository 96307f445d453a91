"""solve_ivp restarted at the knots of a piecewise profile.

A PCHIP table is only C^1 at its knots; a step that straddles one spoils the
embedded error estimate of high-order methods. Integrating knot to knot keeps
the requested tolerance honest.
"""
from __future__ import annotations

from types import SimpleNamespace

import numpy as np
from scipy.integrate import OdeSolution, solve_ivp


def solve_piecewise(fun, t0, t1, y0, breaks=(), t_eval=None, dense_output=False, events=None, **options):
    """Same contract as solve_ivp (t, y, sol, status, t_events, success, message)."""
    edges = [t0, *[float(b) for b in breaks], t1]
    sign = 1.0 if t1 >= t0 else -1.0
    t_eval = None if t_eval is None else np.asarray(t_eval, float)
    events_list = [] if events is None else (list(events) if isinstance(events, (list, tuple)) else [events])
    ts_out, ys_out, grid_ts, interps = [], [], [], []
    t_events = [[] for _ in events_list]
    y = np.asarray(y0)
    status, message = 0, "The solver successfully reached the end of the integration interval."
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        seg_eval, extra = None, False
        if t_eval is not None:
            lo = sign * t_eval >= sign * a if i == 0 else sign * t_eval > sign * a
            seg_eval = t_eval[lo & (sign * t_eval <= sign * b)]
            # always sample the segment end: it seeds the next segment
            extra = not (seg_eval.size and seg_eval[-1] == b)
            if extra:
                seg_eval = np.append(seg_eval, b)
        sol = solve_ivp(fun, (a, b), y, t_eval=seg_eval, dense_output=dense_output,
                        events=events_list or None, **options)
        if sol.success and sol.status == 0:
            y = sol.y[:, -1]
            if extra:
                sol.t, sol.y = sol.t[:-1], sol.y[:, :-1]
        if not sol.success:
            return SimpleNamespace(t=np.concatenate(ts_out + [sol.t]), y=None, sol=None, status=-1,
                                   t_events=None, success=False, message=sol.message)
        if t_eval is None and i > 0:
            ts_out.append(sol.t[1:])
            ys_out.append(sol.y[:, 1:])
        else:
            ts_out.append(sol.t)
            ys_out.append(sol.y)
        if dense_output:
            grid_ts.append(sol.sol.ts if not grid_ts else sol.sol.ts[1:])
            interps.extend(sol.sol.interpolants)
        for k, te in enumerate(sol.t_events or []):
            t_events[k].extend(te)
        if sol.status == 1:
            status, message = 1, sol.message
            break
    dense = OdeSolution(np.concatenate(grid_ts), interps) if dense_output else None
    return SimpleNamespace(
        t=np.concatenate(ts_out), y=np.concatenate(ys_out, axis=1), sol=dense, status=status,
        t_events=[np.array(te) for te in t_events] if events_list else None,
        success=status >= 0, message=message,
    )

