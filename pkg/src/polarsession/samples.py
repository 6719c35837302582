"""Random instances for property checks and benchmarks.

All generators take a `random.Random` so runs are reproducible.
"""

from __future__ import annotations

import random
from itertools import permutations

from . import polar
from .diagram import Diagram, DiagramBuilder
from .polar import OUT, RECV, SEND, PolarItem, PolarShuffle
from .session import Session, session_runtime
from .signature import RECV_PREFIX, RUNTIME, SEND_PREFIX, Generator, Polygraph

# A small pure theory with constants and discards for every object, so
# random programs can always produce or drop a value of any type.
TOY = Polygraph(
    ("X", "Y"),
    (
        Generator("f", ("X",), ("Y",)),
        Generator("g", ("Y",), ("X",)),
        Generator("m", ("X", "Y"), ("X",)),
        Generator("c", ("X",), ("X", "X")),
        Generator("h", ("X", "X"), ("Y", "X")),
        Generator("kX", (), ("X",)),
        Generator("kY", (), ("Y",)),
        Generator("dX", ("X",), ()),
        Generator("dY", ("Y",), ()),
    ),
)


# ------------------------------------------------------- polar shuffles

def _place(lists, lst, item, rng):
    """Insert item at a random index of lists[lst]; return a handle to it."""
    handle = object()
    seq = lists[lst]
    seq.insert(rng.randint(0, len(seq)), (item, handle))
    return handle


def _assemble(lists, out, pairs) -> PolarShuffle:
    where = {}
    for k, seq in enumerate(lists):
        for i, (_, h) in enumerate(seq):
            where[h] = (k, i)
    for i, (_, h) in enumerate(out):
        where[h] = (OUT, i)
    pairing = {where[a]: where[b] for a, b in pairs}
    return PolarShuffle(tuple(tuple(it for it, _ in seq) for seq in lists),
                        tuple(it for it, _ in out), pairing)


def random_polar_shuffle(rng: random.Random, max_elements: int = 10, max_arity: int = 3,
                         types=("X", "Y"), fixed_input: tuple | None = None, fixed_at: int = 0,
                         valid: bool = True, tries: int = 1000) -> PolarShuffle:
    """A random polar shuffle with at most `max_elements` list elements.

    Every pair is one of: pass a send out, pass a receive in, link a send
    to a receive, or spawn a channel in the output. Positions are random;
    with `valid` the sample is rejected until it is acyclic. With
    `fixed_input` the input list at `fixed_at` is prescribed.
    """
    for _ in range(tries):
        arity = rng.randint(1 if fixed_input is not None else 0, max_arity)
        if fixed_input is not None:
            fixed_at_ = min(fixed_at, arity - 1)
        lists = [[] for _ in range(arity)]
        out: list = []
        pairs = []
        budget = max_elements
        fixed_handles = []
        if fixed_input is not None:
            fixed = polar.plist(fixed_input)
            budget -= 2 * len(fixed)
            if budget < 0:
                raise ValueError("fixed list is longer than the element budget")
            others = [k for k in range(arity) if k != fixed_at_]
            for it in fixed:
                h = object()
                fixed_handles.append((it, h))
                partner_list = rng.choice(others + [OUT])
                if it.polarity is SEND:
                    pol = SEND if partner_list == OUT else RECV
                else:
                    pol = RECV if partner_list == OUT else SEND
                target = out if partner_list == OUT else lists[partner_list]
                p = object()
                target.insert(rng.randint(0, len(target)), (PolarItem(it.type, pol), p))
                pairs.append((h, p) if it.polarity is SEND else (p, h))
        free = [k for k in range(arity) if fixed_input is None or k != fixed_at_]
        n_pairs = rng.randint(0, budget // 2)
        for _ in range(n_pairs):
            t = rng.choice(types)
            kinds = ["spawn"]
            if free:
                kinds += ["pass_send", "pass_recv", "link"]
            kind = rng.choice(kinds)
            if kind == "pass_send":
                a = _place(lists, rng.choice(free), PolarItem(t, SEND), rng)
                b = _place([out], 0, PolarItem(t, SEND), rng)
                pairs.append((a, b))
            elif kind == "pass_recv":
                a = _place([out], 0, PolarItem(t, RECV), rng)
                b = _place(lists, rng.choice(free), PolarItem(t, RECV), rng)
                pairs.append((a, b))
            elif kind == "link":
                a = _place(lists, rng.choice(free), PolarItem(t, SEND), rng)
                b = _place(lists, rng.choice(free), PolarItem(t, RECV), rng)
                pairs.append((a, b))
            else:
                a = _place([out], 0, PolarItem(t, RECV), rng)
                b = _place([out], 0, PolarItem(t, SEND), rng)
                pairs.append((a, b))
        if fixed_input is not None:
            lists[fixed_at_] = fixed_handles
        s = _assemble(lists, out, pairs)
        if not valid or polar.validate(s).ok:
            return s
    raise RuntimeError("no valid sample found; loosen the constraints")


def distinctly_typed(rng: random.Random, max_elements: int = 8, max_arity: int = 3) -> tuple:
    """Lists for a distinctly typed instance (one type per pair), possibly with no valid shuffle.

    Returns (inputs, output). Items are shuffled inside each list, so the
    forced pairing may be cyclic.
    """
    s = random_polar_shuffle(rng, max_elements=max_elements, max_arity=max_arity, valid=False)
    rename = {}
    for k, (a, b) in enumerate(sorted(s.pairing.items())):
        rename[a] = rename[b] = f"T{k}"
    inputs = []
    for lst, l in enumerate(s.inputs):
        items = [PolarItem(rename[(lst, i)], it.polarity) for i, it in enumerate(l)]
        rng.shuffle(items)
        inputs.append(tuple(items))
    output = [PolarItem(rename[(OUT, i)], it.polarity) for i, it in enumerate(s.output)]
    rng.shuffle(output)
    return tuple(inputs), tuple(output)


def brute_force_shuffles(inputs, output) -> list[PolarShuffle]:
    """All acyclic type-preserving bijections, by exhaustive search."""
    skeleton = PolarShuffle(tuple(inputs), tuple(output), {})
    dom, cod = skeleton.domain(), skeleton.codomain()
    found = []
    if len(dom) != len(cod):
        return found
    for image in permutations(cod):
        if any(skeleton.item(a).type != skeleton.item(b).type for a, b in zip(dom, image)):
            continue
        s = PolarShuffle(skeleton.inputs, skeleton.output, dict(zip(dom, image)))
        if polar.validate(s).ok:
            found.append(s)
    return found


# -------------------------------------------------------------- sessions

def _producers(sig: Polygraph, t: str):
    return [g for g in sig.generators if not g.effectful and not g.inputs and t in g.outputs]


def random_session(rng: random.Random, events=None, max_events: int = 6, max_pure: int = 6,
                   base: Polygraph = TOY, dom=None) -> Session:
    """A random session over the sends and receives of `base`.

    `events` fixes the event sequence (a polar list); otherwise it is random.
    Pure steps are sprinkled between events. Leftover wires are outputs.
    """
    runtime = session_runtime(base)
    if events is None:
        events = [PolarItem(rng.choice(base.objects), rng.choice((SEND, RECV)))
                  for _ in range(rng.randint(0, max_events))]
    events = polar.plist(events)
    if dom is None:
        dom = [rng.choice(base.objects) for _ in range(rng.randint(0, 2))]
    b = DiagramBuilder(runtime)
    r = b.add_input(RUNTIME)
    pool = [b.add_input(t) for t in dom]
    pure = [g for g in base.generators if not g.effectful]

    def step():
        avail = {}
        for w in pool:
            avail.setdefault(b.wire_types[w], []).append(w)
        options = [g for g in pure if all(g.inputs.count(t) <= len(avail.get(t, [])) for t in set(g.inputs))]
        if not options:
            return
        g = rng.choice(options)
        args = []
        for t in g.inputs:
            w = rng.choice([w for w in avail[t] if w not in args])
            args.append(w)
        for w in args:
            pool.remove(w)
        outs = b.apply(g.name, args)
        for w in outs:
            pool.insert(rng.randint(0, len(pool)), w)

    def need(t):
        if not any(b.wire_types[w] == t for w in pool):
            (w,) = b.apply(rng.choice(_producers(base, t)).name, [])
            pool.append(w)

    for ev in events:
        for _ in range(rng.randint(0, max_pure // max(1, len(events)) + 1)):
            step()
        if ev.polarity is SEND:
            need(ev.type)
            w = rng.choice([w for w in pool if b.wire_types[w] == ev.type])
            pool.remove(w)
            (r,) = b.apply(SEND_PREFIX + ev.type, [r, w])
        else:
            r, w = b.apply(RECV_PREFIX + ev.type, [r])
            pool.insert(rng.randint(0, len(pool)), w)
    for _ in range(rng.randint(0, 2)):
        step()
    return Session.of(b.build([r] + pool))


# -------------------------------------------------------------- programs

def random_program(rng: random.Random, n_statements: int = 6, base: Polygraph = TOY,
                   name: str = "prog", dom=None) -> str:
    """Text of a random linear do-program over a pure polygraph."""
    counter = 0

    def fresh():
        nonlocal counter
        counter += 1
        return f"v{counter}"

    if dom is None:
        dom = [rng.choice(base.objects) for _ in range(rng.randint(0, 3))]
    params = [(fresh(), t) for t in dom]
    live = list(params)
    lines = [f"{name}({', '.join(f'{v}: {t}' for v, t in params)}):"]
    pure = [g for g in base.generators if not g.effectful]
    for _ in range(n_statements):
        options = [g for g in pure
                   if all(g.inputs.count(t) <= sum(1 for _, u in live if u == t) for t in set(g.inputs))]
        g = rng.choice(options)
        args = []
        for t in g.inputs:
            choice = rng.choice([v for v in live if v[1] == t and v not in args])
            args.append(choice)
        for v in args:
            live.remove(v)
        binders = [(fresh(), t) for t in g.outputs]
        live.extend(binders)
        rng.shuffle(live)
        lines.append(f"  {g.name}({', '.join(v for v, _ in args)}) -> ({', '.join(v for v, _ in binders)})")
    lines.append(f"  return({', '.join(v for v, _ in live)})")
    return "\n".join(lines) + "\n"


def swap_independent(text: str, rng: random.Random) -> str | None:
    """Swap one random adjacent pair of statements that share no variable."""
    lines = text.rstrip("\n").split("\n")
    body = list(range(1, len(lines) - 1))

    def uses(line):
        head, _, tail = line.partition("->")
        args = head[head.index("(") + 1:head.rindex(")")]
        binds = tail.strip().strip("()")
        return {a.strip() for a in args.split(",") if a.strip()}, {b.strip() for b in binds.split(",") if b.strip()}

    candidates = []
    for i in body[:-1]:
        a_in, a_out = uses(lines[i])
        b_in, _ = uses(lines[i + 1])
        if not (a_out & b_in):
            candidates.append(i)
    if not candidates:
        return None
    i = rng.choice(candidates)
    lines[i], lines[i + 1] = lines[i + 1], lines[i]
    return "\n".join(lines) + "\n"


def random_diagram(rng: random.Random, n_nodes: int = 6, base: Polygraph = TOY, dom=None) -> Diagram:
    from .donotation import elaborate_text
    return elaborate_text(random_program(rng, n_nodes, base, dom=dom), base)
