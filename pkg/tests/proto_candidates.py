"""Source builders for protocol-speaking test candidates.

These candidates run under the sandbox "proto" launcher: the source itself is
the child program and talks the ask/tell JSON-lines protocol on stdin/stdout.
Each builder returns a complete source string; all behavior is deterministic
given the init seed.
"""

import textwrap

PROTO_PRELUDE = '''\
import json
import random
import sys


def read_msg():
    line = sys.stdin.readline()
    if not line:
        return None
    return json.loads(line)


def send(obj):
    sys.stdout.write(json.dumps(obj) + "\\n")
    sys.stdout.flush()


def ask(x):
    send({"type": "ask", "x": list(x)})
    msg = read_msg()
    if msg is None or msg.get("type") == "stop":
        return None
    return msg


class ProtoCandidate:
    pass
'''


def random_search(max_evals=None, salt=0):
    """Samples uniformly until budget, target, stop, or max_evals."""
    cap = "None" if max_evals is None else str(int(max_evals))
    return PROTO_PRELUDE + textwrap.dedent(
        f"""
        init = read_msg()
        rng = random.Random(init["seed"] * 1000003 + {int(salt)})
        cap = {cap}
        n = 0
        while cap is None or n < cap:
            if init["domain"] == "bool":
                x = [rng.randint(0, 1) for _ in range(init["dim"])]
            else:
                x = [rng.uniform(init["lb"], init["ub"]) for _ in range(init["dim"])]
            msg = ask(x)
            if msg is None:
                break
            n += 1
            if msg.get("target_hit"):
                break
        """
    )


def bit_flip_climber(max_evals=None):
    """Deterministic hill climber over bits: cycles flip positions, keeps improvements."""
    cap = "None" if max_evals is None else str(int(max_evals))
    return PROTO_PRELUDE + textwrap.dedent(
        f"""
        init = read_msg()
        dim = init["dim"]
        cap = {cap}
        x = [0] * dim
        msg = ask(x)
        if msg is not None:
            best = msg["y"]
            n = 1
            idx = 0
            while not msg.get("target_hit") and (cap is None or n < cap):
                y = list(x)
                y[idx] = 1 - y[idx]
                msg = ask(y)
                if msg is None:
                    break
                n += 1
                if msg["y"] > best:
                    best = msg["y"]
                    x = y
                idx = (idx + 1) % dim
        """
    )


def optimum_hitter():
    """Sends the all-ones point first; optimal for instance-1 pbo problems."""
    return PROTO_PRELUDE + textwrap.dedent(
        """
        init = read_msg()
        ask([1] * init["dim"])
        """
    )


def adversarial_over_asker(count_file):
    """Ignores the budget, asks budget+10 times, then records how many tells arrived."""
    return PROTO_PRELUDE + textwrap.dedent(
        f"""
        init = read_msg()
        tells = 0
        for i in range(init["budget"] + 10):
            msg = ask([i % 2] + [0] * (init["dim"] - 1))
            if msg is None:
                break
            tells += 1
        with open({str(count_file)!r}, "w") as fh:
            fh.write(str(tells))
        """
    )


def immediate_crasher():
    return PROTO_PRELUDE + textwrap.dedent(
        """
        raise RuntimeError("boom at import time")
        """
    )


def crasher_after(evals):
    return PROTO_PRELUDE + textwrap.dedent(
        f"""
        init = read_msg()
        for i in range({int(evals)}):
            ask([i % 2] + [0] * (init["dim"] - 1))
        raise RuntimeError("boom after {int(evals)} evals")
        """
    )


def sleeper():
    return PROTO_PRELUDE + textwrap.dedent(
        """
        import time
        init = read_msg()
        time.sleep(3600)
        """
    )


def garbage_speaker():
    return PROTO_PRELUDE + textwrap.dedent(
        """
        init = read_msg()
        sys.stdout.write("this is not json\\n")
        sys.stdout.flush()
        sys.stdin.readline()
        """
    )


def wrong_length_asker():
    return PROTO_PRELUDE + textwrap.dedent(
        """
        init = read_msg()
        ask([0] * (init["dim"] + 1))
        """
    )


def silent_exiter():
    return PROTO_PRELUDE + textwrap.dedent(
        """
        init = read_msg()
        """
    )
