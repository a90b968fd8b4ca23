"""Bridge between a generated optimizer class and the evaluation harness.

The harness launches this module as ``python -m benchevo_shim SOURCE ENTRY``
and speaks JSON Lines over the pipe pair: one init message in, then a tell
for every ask out. The optimizer class never touches the pipes; it receives a
callable proxy exposing the conventional surface (``func.state.evaluations``,
``func.bounds.lb``/``.ub``, ``func.optimum.y``). Every value the optimizer
sees came from a tell; nothing is evaluated locally.
"""

import argparse
import importlib.util
import json
import sys
import traceback

import numpy as np

EXIT_OK = 0
EXIT_CANDIDATE_ERROR = 1
EXIT_LOAD_ERROR = 3
EXIT_PROTOCOL_ERROR = 4

_INIT_KEYS = ("dim", "budget", "lb", "ub", "y_opt")


class HarnessStopped(BaseException):
    """Unwinds the optimizer when the harness ends the run.

    Deliberately a BaseException: generated code often wraps its loop in a
    broad ``except Exception`` and the unwind must not be swallowed.
    """


class _State:
    __slots__ = ("evaluations",)

    def __init__(self):
        self.evaluations = 0


class _Bounds:
    __slots__ = ("lb", "ub")

    def __init__(self, lb, ub, dim):
        # Arrays, not scalars: rng.uniform(lb, ub) must yield a dim-vector.
        self.lb = np.full(dim, float(lb))
        self.ub = np.full(dim, float(ub))


class _Optimum:
    __slots__ = ("y",)

    def __init__(self, y):
        self.y = float(y)


def _send_line(text: str) -> bool:
    try:
        sys.stdout.write(text + "\n")
        sys.stdout.flush()
        return True
    except (BrokenPipeError, OSError, ValueError):
        return False


class FunctionProxy:
    """Callable stand-in for the problem; each call costs one harness tell.

    ``state.evaluations`` mirrors the ``evals`` field of the last tell. After
    a stop message, a tell with ``target_hit``, or stream loss, the proxy is
    finished and every further call raises HarnessStopped.
    """

    def __init__(self, init: dict, recv=None, send=None):
        self.state = _State()
        self.bounds = _Bounds(init["lb"], init["ub"], int(init["dim"]))
        self.optimum = _Optimum(init["y_opt"])
        self._recv = recv if recv is not None else sys.stdin.readline
        self._send = send if send is not None else _send_line
        self._finished = False

    def __call__(self, x):
        if self._finished:
            raise HarnessStopped
        vector = [float(v) for v in x]
        if not self._send(json.dumps({"type": "ask", "x": vector})):
            self._finished = True
            raise HarnessStopped
        line = self._recv()
        if not line:
            self._finished = True
            raise HarnessStopped
        msg = json.loads(line)
        if not isinstance(msg, dict) or msg.get("type") != "tell":
            # stop, or anything unrecognized: the harness owns the run
            self._finished = True
            raise HarnessStopped
        if "evals" in msg:
            self.state.evaluations = int(msg["evals"])
        else:
            self.state.evaluations += 1
        if msg.get("target_hit"):
            # the harness ends the run after this value; don't ask again
            self._finished = True
        return msg["y"]


def load_entry(source_file: str, entry_name: str) -> type:
    """Import the candidate source file and return its entry class.

    Raises on syntax errors, import-time exceptions, a missing attribute,
    or an entry that is not a class.
    """
    spec = importlib.util.spec_from_file_location("benchevo_candidate", source_file)
    if spec is None or spec.loader is None:
        raise ImportError(f"cannot load module from {source_file!r}")
    module = importlib.util.module_from_spec(spec)
    sys.modules[spec.name] = module
    spec.loader.exec_module(module)
    entry = getattr(module, entry_name, None)
    if not isinstance(entry, type):
        raise TypeError(f"{entry_name!r} is not a class in {source_file!r}")
    return entry


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="benchevo-shim",
        description="Run a generated optimizer class against the harness protocol on stdin/stdout.",
    )
    parser.add_argument("source_file", help="path of the candidate source file")
    parser.add_argument("entry_name", help="name of the class to instantiate")
    args = parser.parse_args(argv)

    try:
        entry = load_entry(args.source_file, args.entry_name)
    except BaseException:
        traceback.print_exc()
        return EXIT_LOAD_ERROR

    init_line = sys.stdin.readline()
    if not init_line:
        return EXIT_OK  # stream closed before the run started
    try:
        init = json.loads(init_line)
    except json.JSONDecodeError:
        print("shim: first message is not JSON", file=sys.stderr)
        return EXIT_PROTOCOL_ERROR
    if not isinstance(init, dict) or init.get("type") != "init":
        print("shim: expected an init message first", file=sys.stderr)
        return EXIT_PROTOCOL_ERROR
    missing = [key for key in _INIT_KEYS if key not in init]
    if missing:
        print(f"shim: init message missing {missing}", file=sys.stderr)
        return EXIT_PROTOCOL_ERROR

    proxy = FunctionProxy(init)
    try:
        algorithm = entry(int(init["budget"]), int(init["dim"]), init.get("seed"))
        algorithm(proxy)
    except HarnessStopped:
        pass
    except BaseException:
        traceback.print_exc()
        return EXIT_CANDIDATE_ERROR
    return EXIT_OK
