"""Shared helpers: thread budget, deterministic serialization, small numerics."""

import json
import os

import numpy as np

DEFAULT_SEED = 1093

# machine floor used by the entropy solver before taking logs
PHI_FLOOR = 1e-12


def thread_budget():
    """Parallel worker cap, from CONIC_RICCI_THREADS (default: cpu count, max 8)."""
    env = os.environ.get("CONIC_RICCI_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


def sig12(x):
    """Format a float with 12 significant digits (report convention)."""
    return "%.12g" % float(x)


def round_floats(obj):
    """Recursively round floats to 12 significant digits for stable JSON output."""
    if isinstance(obj, float):
        return float(sig12(obj))
    if isinstance(obj, (np.floating,)):
        return float(sig12(float(obj)))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [round_floats(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def write_json(path, obj):
    """Deterministic JSON: sorted keys, 12-digit floats, trailing newline."""
    with open(path, "w") as f:
        json.dump(round_floats(obj), f, indent=2, sort_keys=True)
        f.write("\n")


def write_csv(path, header, rows):
    """Deterministic CSV with 12-significant-digit floats."""
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for v in row:
                if isinstance(v, (float, np.floating)):
                    cells.append(sig12(v))
                else:
                    cells.append(str(v))
            f.write(",".join(cells) + "\n")


def parse_point(text):
    """Parse a chart coordinate: 'inf' is the north pole, otherwise a complex literal."""
    if isinstance(text, (int, float)):
        return complex(text)
    if isinstance(text, complex):
        return text
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "oo"):
        return None
    return complex(t.replace(" ", ""))


def format_point(p):
    if p is None:
        return "inf"
    if p.imag == 0:
        return sig12(p.real)
    return "%s%+sj" % (sig12(p.real), sig12(p.imag))
